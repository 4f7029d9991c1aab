pub mod linalg;
pub mod operators;
pub mod predicates;
pub mod definability;
pub mod cli;
