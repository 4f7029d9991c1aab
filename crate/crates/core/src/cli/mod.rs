//! The `opdef` command line: loads an operator spec, runs one command and
//! renders the result as text, JSON or CSV. Exit codes: 0 definable or
//! success, 1 not definable, 2 inconclusive or numerical failure, 3 input
//! error.

mod grid;
mod render;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::definability::{
    classify, eigenspace, essential_spectrum_scan, fredholm_index, invariant_subspace, kernel_basis,
    DefinabilityError, DefinabilityVerdict, EigenspaceResult, IndexWitness, InvariantRoute, InvariantSubspace,
    Options, ScanRow, DEFAULT_K_FRACTION,
};
use crate::linalg::{DenseVector, Field, Scalar};
use crate::operators::{LinearityReport, OperatorSpec};
use crate::predicates::{m_of, operator_predicate, PredicateError, SortIndex};

pub use grid::parse_grid;

/// Grid scanned by `report` when none is given.
const REPORT_GRID: &str = "circle:16";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Definable, not definable or inconclusive, with evidence.
    Classify,
    /// Essential spectrum defects over a grid.
    Spectrum,
    /// Fredholm index from kernel and cokernel dimensions.
    Index,
    /// Orthonormal kernel basis and its distance from the parameters.
    Kernel,
    /// Eigenspaces at the grid points.
    Eigenspace,
    /// Distance predicate value next to the direct oracle.
    PredicateEval,
    /// A nontrivial invariant subspace of a definable operator.
    InvariantSubspace,
    /// Classification, index, spectrum scan and parameter data together.
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "opdef", version, about = "Decide whether structured operators on l2 are scalar plus compact")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Operator spec JSON file.
    #[arg(long)]
    pub operator: PathBuf,
    /// Work over this field; `complex` complexifies a real spec.
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    #[arg(long, default_value_t = Options::default().cert_tol)]
    pub cert_tol: f64,
    #[arg(long, default_value_t = Options::default().weyl_tol)]
    pub weyl_tol: f64,
    #[arg(long, default_value_t = Options::default().rank_threshold)]
    pub rank_threshold: f64,
    #[arg(long, default_value_t = Options::default().n_max)]
    pub n_max: usize,
    /// `circle:<count>`, `box:<re0>,<re1>,<im0>,<im1>,<steps>` or a list of
    /// points, with `;` between segments.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Vector as inline JSON (`[1, 0]` or `[[re, im], ...]`) or a file path.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
}

impl Cli {
    pub fn options(&self) -> Options {
        Options {
            cert_tol: self.cert_tol,
            weyl_tol: self.weyl_tol,
            rank_threshold: self.rank_threshold,
            n_max: self.n_max,
            seed: self.seed,
            ..Options::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CliError {
    /// Bad arguments or input files.
    Input(String),
    /// The operator was refuted where a definable one was needed.
    NotDefinable(String),
    /// A numerical precondition failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotDefinable(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Input(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::NotDefinable(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<DefinabilityError> for CliError {
    fn from(e: DefinabilityError) -> Self {
        match e {
            DefinabilityError::BadOption(_)
            | DefinabilityError::EmptyGrid
            | DefinabilityError::MuIsLambda { .. }
            | DefinabilityError::RealField
            | DefinabilityError::NotProjection => CliError::Input(e.to_string()),
            DefinabilityError::NotDefinable => CliError::NotDefinable(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PredicateError> for CliError {
    fn from(e: PredicateError) -> Self {
        match e {
            PredicateError::SortViolation { .. }
            | PredicateError::ZeroSort
            | PredicateError::BadTolerance(_)
            | PredicateError::WrongField { .. } => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PredicateOutcome {
    pub source_sort: u32,
    pub target_sort: u32,
    pub epsilon: f64,
    pub value: f64,
    pub error_bound: f64,
    pub oracle: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum IndexOutcome {
    Witness(IndexWitness),
    Failure { error: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub verdict: DefinabilityVerdict,
    pub index: IndexOutcome,
    pub spectrum: Vec<ScanRow>,
    pub parameter_dimension: usize,
    pub norm_bound: f64,
    pub linearity: LinearityReport,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Verdict(DefinabilityVerdict),
    Spectrum(Vec<ScanRow>),
    Index(IndexWitness),
    Eigen(Vec<EigenspaceResult>),
    Predicate(PredicateOutcome),
    Invariant(InvariantSubspace),
    Full(Box<FullReport>),
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: Cli,
    pub seed: u64,
    pub result: Payload,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        let verdict_code = |v: &DefinabilityVerdict| match v {
            DefinabilityVerdict::Definable { .. } => 0,
            DefinabilityVerdict::NotDefinable { .. } => 1,
            DefinabilityVerdict::Inconclusive { .. } => 2,
        };
        match &self.result {
            Payload::Verdict(v) => verdict_code(v),
            Payload::Full(r) => verdict_code(&r.verdict),
            Payload::Invariant(s) if s.route == InvariantRoute::Inconclusive => 2,
            _ => 0,
        }
    }
}

fn load_operator(cli: &Cli) -> Result<OperatorSpec, CliError> {
    let path = &cli.operator;
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let spec = OperatorSpec::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    match (cli.field, spec.field()) {
        (Some(FieldArg::Complex), Field::Real) => Ok(spec.as_complex()),
        (Some(FieldArg::Real), Field::Complex) => {
            Err(CliError::Input(format!("{} is a complex operator and cannot be read as real", path.display())))
        }
        _ => Ok(spec),
    }
}

fn load_vector(arg: Option<&str>, field: Field, name: &str) -> Result<DenseVector, CliError> {
    let Some(arg) = arg else {
        return Ok(DenseVector::zeros(field, 0));
    };
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Input(format!("cannot read --{name} file {arg}: {e}")))?
    };
    let v: DenseVector = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("--{name}: {e}")))?;
    match (field, v.field()) {
        (Field::Complex, Field::Real) => Ok(v.to_complex()),
        (Field::Real, Field::Complex) => Err(CliError::Input(format!("--{name} is complex but the operator is real"))),
        _ => Ok(v),
    }
}

fn grid(cli: &Cli, default: Option<&str>) -> Result<Vec<Scalar>, CliError> {
    match cli.grid.as_deref().or(default) {
        Some(spec) => parse_grid(spec).map_err(CliError::Input),
        None => Err(CliError::Input(format!("{:?} needs --grid", cli.command).to_lowercase())),
    }
}

fn predicate_eval(cli: &Cli, t: &OperatorSpec) -> Result<PredicateOutcome, CliError> {
    let x = load_vector(cli.x.as_deref(), t.field(), "x")?;
    let y = load_vector(cli.y.as_deref(), t.field(), "y")?;
    let n = SortIndex::covering(x.norm());
    let p = operator_predicate(t, n, cli.cert_tol)?;
    let m = m_of(t, n);
    if y.norm() > f64::from(m) * (1.0 + 1e-12) {
        return Err(CliError::Input(format!("y has norm {} outside the target sort B_{m}", y.norm())));
    }
    let value = p.eval(&x, &y)?;
    let image = t.apply_exact(&x).map_err(|e| CliError::Numerical(e.to_string()))?;
    let oracle = image.sub(&y).map_err(|e| CliError::Input(e.to_string()))?.norm();
    Ok(PredicateOutcome {
        source_sort: n.get(),
        target_sort: m,
        epsilon: cli.cert_tol,
        value,
        error_bound: p.error_bound(),
        oracle,
        deviation: (value - oracle).abs(),
    })
}

/// Runs the command and collects its report.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let start = Instant::now();
    let options = cli.options();
    options.validate()?;
    let t = load_operator(cli)?;
    let n = options.working_size();
    let result = match cli.command {
        Command::Classify => Payload::Verdict(classify(&t, &options)?),
        Command::Spectrum => {
            Payload::Spectrum(essential_spectrum_scan(&t, &grid(cli, None)?, DEFAULT_K_FRACTION, n)?)
        }
        Command::Index => Payload::Index(fredholm_index(&t, options.rank_threshold, n)?),
        Command::Kernel => {
            Payload::Eigen(vec![kernel_basis(&t, options.rank_threshold, n, Some(&t.extract_parameters()))?])
        }
        Command::Eigenspace => Payload::Eigen(
            grid(cli, None)?
                .into_iter()
                .map(|mu| eigenspace(&t, mu, options.rank_threshold, n))
                .collect::<Result<_, _>>()?,
        ),
        Command::PredicateEval => Payload::Predicate(predicate_eval(cli, &t)?),
        Command::InvariantSubspace => {
            if t.field() == Field::Real {
                return Err(CliError::Input("invariant subspaces need a complex operator; pass --field complex".into()));
            }
            let verdict = classify(&t, &options)?;
            match verdict {
                DefinabilityVerdict::Definable { .. } => {}
                DefinabilityVerdict::NotDefinable { .. } => {
                    return Err(CliError::NotDefinable("operator is not definable".into()))
                }
                DefinabilityVerdict::Inconclusive { reason, .. } => {
                    return Err(CliError::Numerical(format!("classification inconclusive: {reason}")))
                }
            }
            Payload::Invariant(invariant_subspace(&t, &verdict, options.rank_threshold, n)?)
        }
        Command::Report => {
            let verdict = classify(&t, &options)?;
            let index = match fredholm_index(&t, options.rank_threshold, n) {
                Ok(w) => IndexOutcome::Witness(w),
                Err(e) => IndexOutcome::Failure { error: e.to_string() },
            };
            let spectrum = essential_spectrum_scan(&t, &grid(cli, Some(REPORT_GRID))?, DEFAULT_K_FRACTION, n)?;
            Payload::Full(Box::new(FullReport {
                verdict,
                index,
                spectrum,
                parameter_dimension: t.extract_parameters().dimension(),
                norm_bound: t.norm_bound(),
                linearity: t.linearity_check(8, cli.seed),
            }))
        }
    };
    Ok(Report {
        command: cli.command,
        config: cli.clone(),
        seed: cli.seed,
        result,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Numerical(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Text => Ok(render::text(report)),
        OutputFormat::Csv => render::csv(report),
    }
}

/// Parses `args`, runs the command, writes to `out` and `err`, and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let outcome = execute(&cli).and_then(|r| render(&r, cli.output).map(|s| (s, r.exit_code())));
    match outcome {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}
