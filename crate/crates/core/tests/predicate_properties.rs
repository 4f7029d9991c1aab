mod common;

use common::{field_of, random_compact, random_finite_rank, random_in_ball, random_spec, random_vector};
use opdef_core::linalg::{DenseVector, Scalar, C64};
use opdef_core::operators::{OperatorSpec, ParameterSet};
use opdef_core::predicates::{
    compact_predicate, finite_rank_distance_complex, finite_rank_distance_real, m_of, orthogonal_project,
    scale_predicate, SortIndex,
};
use opdef_core::linalg::Field;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle(t: &OperatorSpec, x: &DenseVector, y: &DenseVector) -> f64 {
    t.apply_exact(x).unwrap().sub(y).unwrap().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(seed);
        let rank = rng.gen_range(0..=5);
        let t = OperatorSpec::new(field, random_finite_rank(&mut rng, field, rank, 20)).unwrap();
        let x = random_vector(&mut rng, field, 20);
        let y = random_vector(&mut rng, field, 20);
        let v = match field {
            Field::Real => finite_rank_distance_real(&t, &x, &y).unwrap(),
            Field::Complex => finite_rank_distance_complex(&t, &x, &y).unwrap(),
        };
        prop_assert!((v - oracle(&t, &x, &y)).abs() <= 1e-10);
    }

    #[test]
    fn compact_predicate_error_is_sound(seed in any::<u64>(), eps in prop::sample::select(vec![0.3, 0.1, 0.01])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(seed);
        let t = OperatorSpec::new(field, random_compact(&mut rng, field)).unwrap();
        let n = SortIndex::new(rng.gen_range(1..=3)).unwrap();
        let p = compact_predicate(&t, n, eps).unwrap();
        prop_assert!(p.error_bound() <= eps);
        for _ in 0..50 {
            let x = random_in_ball(&mut rng, field, 40, f64::from(n.get()));
            let y = random_in_ball(&mut rng, field, 40, f64::from(p.target().get()));
            let v = p.eval(&x, &y).unwrap();
            prop_assert!((v - oracle(&t, &x, &y)).abs() <= p.error_bound() + 1e-10);
        }
    }

    #[test]
    fn predicates_are_lipschitz_in_y(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(seed);
        let t = OperatorSpec::new(field, random_compact(&mut rng, field)).unwrap();
        let p = compact_predicate(&t, SortIndex::new(1).unwrap(), 0.05).unwrap();
        for _ in 0..20 {
            let x = random_in_ball(&mut rng, field, 16, 1.0);
            let y1 = random_vector(&mut rng, field, 16);
            let y2 = random_vector(&mut rng, field, 16);
            let dv = (p.eval_unchecked(x.entries(), y1.entries()) - p.eval_unchecked(x.entries(), y2.entries())).abs();
            prop_assert!(dv <= y1.sub(&y2).unwrap().norm() + 1e-9);
        }
    }

    #[test]
    fn scaling_back_reproduces_values(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(seed);
        let t = OperatorSpec::new(field, random_compact(&mut rng, field)).unwrap();
        let p = compact_predicate(&t, SortIndex::new(1).unwrap(), 0.1).unwrap();
        let r = common::random_scalar(&mut rng, field, 3.0) + C64::new(0.5, 0.0);
        let r = Scalar::new(field, r).unwrap();
        let back = scale_predicate(&scale_predicate(&p, r).unwrap(), Scalar::new(field, C64::new(1.0, 0.0) / r.value()).unwrap()).unwrap();
        for _ in 0..20 {
            let x = random_in_ball(&mut rng, field, 16, 1.0);
            let y = random_in_ball(&mut rng, field, 16, 1.0);
            let a = p.eval_unchecked(x.entries(), y.entries());
            let b = back.eval_unchecked(x.entries(), y.entries());
            prop_assert!((a - b).abs() <= 2e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn m_of_contains_the_image(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(seed);
        let t = random_spec(&mut rng, field, 3);
        let n = rng.gen_range(1..=4);
        let m = m_of(&t, SortIndex::new(n).unwrap());
        for _ in 0..50 {
            let x = random_in_ball(&mut rng, field, 24, f64::from(n));
            prop_assert!(t.apply_exact(&x).unwrap().norm() <= f64::from(m) + 1e-10);
        }
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = field_of(seed);
        let k = rng.gen_range(0..5);
        let a = ParameterSet::new(field, (0..k).map(|_| random_vector(&mut rng, field, 8)).collect()).unwrap();
        let x = random_vector(&mut rng, field, 10);
        let (px, r) = orthogonal_project(&a, &x).unwrap();
        for b in a.basis() {
            prop_assert!(opdef_core::linalg::inner_product(&r, b).unwrap().abs() <= 1e-10);
        }
        let (ppx, _) = orthogonal_project(&a, &px).unwrap();
        prop_assert!(ppx.sub(&px).unwrap().norm() <= 1e-10);
        prop_assert!(px.add(&r).unwrap().sub(&x).unwrap().norm() <= 1e-14);
    }
}
