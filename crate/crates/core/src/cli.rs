//! Command-line front end. [`run`] parses arguments, dispatches and returns
//! the process exit code.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use crate::error::Error;
use crate::kernels::{
    almost_symmetric_kernel, default_epsilon, symmetric_kernel, validate, wootters_kernel, Kernel,
    KernelFamily,
};
use crate::numerics::{adjoint, c, cr, frob_dist, trace, ComplexMatrix, PSD_SLACK, TOL};
use crate::phasespace::PhaseGrid;
use crate::quantizer::Quantizer;
use crate::tomography::{
    continuum_study, leonhardt_reconstruct_matrix, leonhardt_wigner, line_projector, relate_even, relate_odd,
    ContinuumKernel, HalfIntegerWignerGrid, Line,
};
use crate::wigner::{
    almost_symmetric_wigner, marginals, matrix_to_json, reconstruct_matrix, symmetric_wigner, wigner, DensityOperator,
    WignerGrid,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BAD_STATE: i32 = 2;
pub const EXIT_KERNEL_MISMATCH: i32 = 3;
pub const EXIT_RESIDUAL: i32 = 4;
pub const EXIT_EMBEDDING: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "dwigner", version, about = "Discrete number-phase Wigner functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the Wigner function of a state
    Wigner {
        #[command(flatten)]
        config: RunConfig,
        #[command(flatten)]
        state: StateArg,
    },
    /// Rebuild a density matrix from a Wigner grid file
    Reconstruct {
        #[command(flatten)]
        config: RunConfig,
        /// Grid file written by `wigner --format json`
        input: PathBuf,
    },
    /// Check kernel conditions and quantizer identities
    Verify {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Tabulate scaled Wigner values against their large-N limit
    Converge {
        #[command(flatten)]
        config: RunConfig,
        #[command(flatten)]
        state: StateArg,
        /// Number level
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Phase angle in radians
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// Comma-separated list of N values
        #[arg(long = "Ns", value_delimiter = ',', default_value = "5,10,20,40,80")]
        ns: Vec<usize>,
    },
    /// Transform a Wootters or doubled-grid Wigner function into the
    /// symmetric or almost-symmetric one
    Relate {
        direction: Direction,
        #[command(flatten)]
        config: RunConfig,
        /// Source grid file; computed from --state when absent
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        state: StateArg,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Hilbert-space dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Reference phase in radians
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    /// symmetric, wootters, almost-symmetric, leonhardt or file:<path>
    #[arg(long)]
    pub kernel: Option<String>,
    /// Shift of the almost-symmetric kernel; defaults to 1/(2N)
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct StateArg {
    /// fock <n>, phase <m>, mixed, qubit <a1> <a2> <a3>, superposition01, or a JSON file
    #[arg(long, num_args = 1..=4, allow_negative_numbers = true)]
    pub state: Option<Vec<String>>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Odd,
    Even,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl fmt::Display) -> Self {
        Self { code, message: message.to_string() }
    }

    fn state(e: impl fmt::Display) -> Self {
        Self::new(EXIT_BAD_STATE, format!("invalid state: {e}"))
    }

    fn kernel(e: impl fmt::Display) -> Self {
        Self::new(EXIT_KERNEL_MISMATCH, format!("kernel/dimension mismatch: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidEmbedding(_) => EXIT_EMBEDDING,
            Error::DimensionMismatch { .. }
            | Error::InvalidKernel(_)
            | Error::InadmissibleEpsilon { .. }
            | Error::WrongKernel { .. }
            | Error::WrongParity(_) => EXIT_KERNEL_MISMATCH,
            _ => EXIT_FAILURE,
        };
        Self::new(code, e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::Wigner { config, state } => cmd_wigner(&config, &state),
        Command::Reconstruct { config, input } => cmd_reconstruct(&config, &input),
        Command::Verify { config } => cmd_verify(&config),
        Command::Converge { config, state, n, phi, ns } => cmd_converge(&config, &state, n, phi, &ns),
        Command::Relate { direction, config, input, state } => cmd_relate(direction, &config, input.as_deref(), &state),
    }
}

/// State given on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum StateChoice {
    Fock(usize),
    Phase(i64),
    Mixed,
    Qubit([f64; 3]),
    Superposition01,
    File(PathBuf),
}

impl StateChoice {
    pub fn parse(words: &[String]) -> CliResult<Self> {
        let bad = |msg: &str| CliError::state(msg);
        let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::state(format!("not a number: {s}")));
        match words {
            [] => Err(bad("missing --state")),
            [w, n] if w == "fock" => n.parse().map(StateChoice::Fock).map_err(|_| bad("fock needs a level")),
            [w, m] if w == "phase" => m.parse().map(StateChoice::Phase).map_err(|_| bad("phase needs an index")),
            [w] if w == "mixed" => Ok(StateChoice::Mixed),
            [w] if w == "superposition01" => Ok(StateChoice::Superposition01),
            [w, a, b, c] if w == "qubit" => Ok(StateChoice::Qubit([num(a)?, num(b)?, num(c)?])),
            [path] => Ok(StateChoice::File(PathBuf::from(path))),
            _ => Err(bad(&format!("unrecognized state: {}", words.join(" ")))),
        }
    }

    /// Dimension implied by the state argument alone, if any.
    fn natural_dim(&self) -> Option<usize> {
        match self {
            StateChoice::Qubit(_) => Some(2),
            _ => None,
        }
    }

    /// Smallest dimension holding the state, used when no `--dim` is given.
    fn minimal_dim(&self) -> Option<usize> {
        match self {
            StateChoice::Fock(n) => Some(n + 1),
            StateChoice::Superposition01 | StateChoice::Qubit(_) => Some(2),
            _ => None,
        }
    }

    pub fn resolve(&self, dim: Option<usize>, phi0: f64) -> CliResult<DensityOperator> {
        let need_dim = || dim.ok_or_else(|| CliError::state("this state needs --dim"));
        let rho = match self {
            StateChoice::Fock(n) => DensityOperator::fock(need_dim()?, *n).map_err(CliError::state)?,
            StateChoice::Phase(m) => {
                let grid = PhaseGrid::new(need_dim()?, phi0).map_err(CliError::state)?;
                DensityOperator::phase_state(&grid, *m)
            }
            StateChoice::Mixed => DensityOperator::maximally_mixed(need_dim()?),
            StateChoice::Qubit(a) => DensityOperator::from_bloch(*a).map_err(CliError::state)?,
            StateChoice::Superposition01 => DensityOperator::superposition01(need_dim()?).map_err(CliError::state)?,
            StateChoice::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::state(format!("{}: {e}", path.display())))?;
                DensityOperator::from_json(&text).map_err(|e| CliError::state(format!("{}: {e}", path.display())))?
            }
        };
        if let Some(d) = dim {
            if d != rho.dim() {
                return Err(CliError::kernel(format!("state has dimension {}, --dim is {d}", rho.dim())));
            }
        }
        Ok(rho)
    }
}

fn load_state(arg: &StateArg, dim: Option<usize>, phi0: f64) -> CliResult<DensityOperator> {
    let words = arg.state.as_deref().ok_or_else(|| CliError::state("missing --state"))?;
    let choice = StateChoice::parse(words)?;
    choice.resolve(dim.or(choice.natural_dim()), phi0)
}

/// Kernel selected on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelChoice {
    Symmetric,
    Wootters,
    AlmostSymmetric,
    Leonhardt,
    File(PathBuf),
}

impl KernelChoice {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "symmetric" => Ok(Self::Symmetric),
            "wootters" => Ok(Self::Wootters),
            "almost-symmetric" => Ok(Self::AlmostSymmetric),
            "leonhardt" => Ok(Self::Leonhardt),
            _ => match s.strip_prefix("file:") {
                Some(p) => Ok(Self::File(PathBuf::from(p))),
                None => Err(CliError::kernel(format!("unknown kernel {s}"))),
            },
        }
    }

    /// Builds the kernel for dimension `dim`, checking parity.
    fn build(&self, dim: usize, epsilon: Option<f64>) -> CliResult<Kernel> {
        let odd = |name: &str| {
            if dim % 2 == 1 {
                Ok(dim / 2)
            } else {
                Err(CliError::kernel(format!("{name} kernel needs an odd dimension, got {dim}")))
            }
        };
        let kernel = match self {
            Self::Symmetric => symmetric_kernel(odd("symmetric")?)?,
            Self::Wootters => wootters_kernel(odd("wootters")?)?,
            Self::AlmostSymmetric | Self::Leonhardt => {
                if dim % 2 == 1 || dim == 0 {
                    return Err(CliError::kernel(format!("almost-symmetric kernel needs an even dimension, got {dim}")));
                }
                let n = dim / 2;
                almost_symmetric_kernel(n, epsilon.unwrap_or_else(|| default_epsilon(n)))?
            }
            Self::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::kernel(format!("{}: {e}", path.display())))?;
                let k = Kernel::from_json(&text).map_err(|e| CliError::kernel(format!("{}: {e}", path.display())))?;
                if k.dim() != dim {
                    return Err(CliError::kernel(format!("kernel file has dimension {}, state has {dim}", k.dim())));
                }
                k
            }
        };
        Ok(kernel)
    }
}

/// Inverse of the kernel labels written into grid files.
pub fn kernel_from_label(label: &str, dim: usize) -> CliResult<Kernel> {
    if let Some(eps) = label.strip_prefix("almost-symmetric:") {
        let eps: f64 = eps.parse().map_err(|_| CliError::kernel(format!("bad kernel label {label}")))?;
        return KernelChoice::AlmostSymmetric.build(dim, Some(eps));
    }
    match label {
        "symmetric" => KernelChoice::Symmetric.build(dim, None),
        "wootters" => KernelChoice::Wootters.build(dim, None),
        _ => Err(CliError::kernel(format!("grid kernel {label} needs --kernel file:<path>"))),
    }
}

fn require_kernel(config: &RunConfig) -> CliResult<KernelChoice> {
    let name = config.kernel.as_deref().ok_or_else(|| CliError::kernel("missing --kernel"))?;
    KernelChoice::parse(name)
}

fn emit(config: &RunConfig, json: impl FnOnce() -> crate::Result<String>, csv: impl FnOnce() -> String) -> CliResult<()> {
    let text = match config.format {
        Format::Json => json()?,
        Format::Csv => csv(),
    };
    write_output(config.out.as_deref(), &text)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            let mut result = stdout.write_all(text.as_bytes());
            if result.is_ok() && !text.ends_with('\n') {
                result = stdout.write_all(b"\n");
            }
            match result {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::new(EXIT_FAILURE, e)),
                _ => Ok(()),
            }
        }
    }
}

fn report_grid(w: &WignerGrid) {
    let (pm, nm) = marginals(w);
    eprintln!("kernel: {}", w.kernel_label());
    eprintln!("normalization: {:.17e}", w.total());
    eprintln!("phase marginal checksum: {:.17e}", pm.iter().sum::<f64>());
    eprintln!("number marginal checksum: {:.17e}", nm.iter().sum::<f64>());
}

fn cmd_wigner(config: &RunConfig, state: &StateArg) -> CliResult<i32> {
    let choice = require_kernel(config)?;
    let rho = load_state(state, config.dim, config.phi0)?;
    let d = rho.dim();
    let kernel = choice.build(d, config.epsilon)?;
    if choice == KernelChoice::Leonhardt {
        let w = leonhardt_wigner(d / 2, config.phi0, &rho)?;
        eprintln!("kernel: leonhardt");
        eprintln!("normalization: {:.17e}", w.total());
        emit(config, || w.to_json(), || w.to_csv())?;
        return Ok(EXIT_OK);
    }
    let grid = PhaseGrid::new(d, config.phi0)?;
    let q = Quantizer::build(grid, kernel)?;
    if let Some(min) = q.conditioning_warning() {
        eprintln!("warning: smallest kernel modulus {min:e}; inversion is ill-conditioned");
    }
    let w = wigner(&q, &rho)?;
    report_grid(&w);
    emit(config, || w.to_json(), || w.to_csv())?;
    Ok(EXIT_OK)
}

/// Largest of the Hermiticity defect, the trace defect and, when the matrix
/// is a state, the Wigner round-trip defect.
struct Residual {
    value: f64,
    positive: bool,
}

fn state_residual(m: &ComplexMatrix, round_trip: impl FnOnce(DensityOperator) -> crate::Result<f64>) -> CliResult<Residual> {
    let herm = frob_dist(m, &adjoint(m))?;
    let tr = (trace(m) - cr(1.0)).norm();
    let positive = m.is_positive_semidefinite(PSD_SLACK);
    let mut value = herm.max(tr);
    if positive && value <= 10.0 * TOL {
        if let Ok(rho) = DensityOperator::new(m.clone()) {
            value = value.max(round_trip(rho)?);
        }
    }
    Ok(Residual { value, positive })
}

fn cmd_reconstruct(config: &RunConfig, input: &Path) -> CliResult<i32> {
    let text = fs::read_to_string(input).map_err(|e| CliError::state(format!("{}: {e}", input.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::state(format!("{}: {e}", input.display())))?;
    let (matrix, residual) = if value.get("N").is_some() {
        let w = HalfIntegerWignerGrid::from_json(&text).map_err(CliError::state)?;
        let m = leonhardt_reconstruct_matrix(&w)?;
        let r = state_residual(&m, |rho| Ok(leonhardt_wigner(w.half_dim(), w.phi0(), &rho)?.max_abs_diff(&w)))?;
        (m, r)
    } else {
        let w = WignerGrid::from_json(&text).map_err(CliError::state)?;
        let kernel = match &config.kernel {
            Some(name) => KernelChoice::parse(name)?.build(w.dim(), config.epsilon)?,
            None => kernel_from_label(w.kernel_label(), w.dim())?,
        };
        let m = reconstruct_matrix(&w, &kernel)?;
        let q = Quantizer::build(*w.grid(), kernel)?;
        let r = state_residual(&m, |rho| Ok(wigner(&q, &rho)?.max_abs_diff(&w)))?;
        (m, r)
    };
    write_output(config.out.as_deref(), &matrix_to_json(&matrix)?)?;
    eprintln!("residual: {:.3e}", residual.value);
    if !residual.positive {
        eprintln!("reconstructed matrix is not positive semidefinite");
    }
    if residual.value > 10.0 * TOL || !residual.positive {
        return Ok(EXIT_RESIDUAL);
    }
    Ok(EXIT_OK)
}

enum Outcome {
    Pass(f64),
    Fail(f64),
    NotApplicable(&'static str),
}

struct Suite {
    unexpected: usize,
}

impl Suite {
    fn line(&mut self, name: &str, outcome: Outcome) {
        match outcome {
            Outcome::Pass(dev) => println!("[PASS] {name} (deviation {dev:.2e})"),
            Outcome::Fail(dev) => {
                self.unexpected += 1;
                println!("[FAIL] {name} (deviation {dev:.2e})");
            }
            Outcome::NotApplicable(why) => println!("[----] {name}: n/a ({why})"),
        }
    }

    fn check(&mut self, name: &str, passed: bool, deviation: f64) {
        self.line(name, if passed { Outcome::Pass(deviation) } else { Outcome::Fail(deviation) });
    }

    fn flag(&mut self, name: &str, passed: bool) {
        if passed {
            println!("[PASS] {name}");
        } else {
            self.unexpected += 1;
            println!("[FAIL] {name}");
        }
    }
}

fn cmd_verify(config: &RunConfig) -> CliResult<i32> {
    let choice = require_kernel(config)?;
    let d = config.dim.ok_or_else(|| CliError::kernel("missing --dim"))?;
    if choice == KernelChoice::Leonhardt {
        return Err(CliError::kernel("verify takes symmetric, wootters, almost-symmetric or file:<path>"));
    }
    let kernel = choice.build(d, config.epsilon)?;
    let mut suite = Suite { unexpected: 0 };
    println!("kernel {} in dimension {d}", kernel.label());

    let report = validate(&kernel);
    suite.flag("kernel: nonvanishing", report.nonvanishing);
    suite.flag("kernel: hermiticity (bulk)", report.hermitian_bulk);
    suite.flag("kernel: hermiticity (row k = 0)", report.hermitian_row);
    suite.flag("kernel: hermiticity (column l = 0)", report.hermitian_column);
    suite.flag("kernel: hermiticity (origin)", report.hermitian_origin);
    suite.flag("kernel: phase functions", report.phase_functions);
    suite.flag("kernel: number functions", report.number_functions);
    if !report.is_valid() {
        println!("quantizer checks skipped: kernel is not valid");
        return Ok(EXIT_FAILURE);
    }

    let grid = PhaseGrid::new(d, config.phi0)?;
    let q = Quantizer::build(grid, kernel)?;
    let r = q.verify();
    suite.check("quantizer: Hermitian", r.hermitian.passed, r.hermitian.deviation);
    suite.check("quantizer: unit trace", r.unit_trace.passed, r.unit_trace.deviation);
    suite.check("quantizer: phase marginal", r.phase_marginal.passed, r.phase_marginal.deviation);
    suite.check("quantizer: number marginal", r.number_marginal.passed, r.number_marginal.deviation);
    suite.check("quantizer: resolution of identity", r.resolution.passed, r.resolution.deviation);
    suite.check("quantizer: overlap formula", r.overlap_formula.passed, r.overlap_formula.deviation);
    if r.unimodular {
        suite.check("quantizer: orthogonality", r.orthogonality.passed, r.orthogonality.deviation);
    } else {
        suite.line("quantizer: orthogonality", Outcome::NotApplicable("kernel not unimodular"));
    }

    let family = q.kernel().family();
    match family {
        KernelFamily::Symmetric | KernelFamily::AlmostSymmetric { .. } => {
            let mut rng = StdRng::seed_from_u64(7);
            let a: Vec<_> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let b: Vec<_> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let o = q.ordering_check(|p| a[grid.nearest_phase_index(p)], |n| b[n])?;
            suite.check("ordering: quantized product", o.passed, o.deviation);
        }
        _ => suite.line("ordering: quantized product", Outcome::NotApplicable("kernel has no ordering rule")),
    }

    if d % 2 == 0 {
        suite.line("lines: projectivity and completeness", Outcome::NotApplicable("even dim"));
    } else if family != KernelFamily::Wootters {
        suite.line("lines: projectivity and completeness", Outcome::NotApplicable("kernel not Wootters"));
    } else {
        let (mut idem, mut complete) = (0.0f64, 0.0f64);
        for n1 in 0..d {
            for n2 in 0..d {
                if Line::new(n1, n2, 0, d)?.is_degenerate() {
                    continue;
                }
                let mut sum = ComplexMatrix::zeros(d);
                for line in Line::family(n1, n2, d)? {
                    let p = line_projector(&q, &line)?;
                    idem = idem.max(frob_dist(&(&p * &p), &p)?);
                    sum += &p;
                }
                complete = complete.max(frob_dist(&sum, &ComplexMatrix::identity(d))?);
            }
        }
        suite.check("lines: projectors are idempotent", idem <= TOL, idem);
        suite.check("lines: each family sums to identity", complete <= TOL, complete);
    }

    if suite.unexpected == 0 {
        println!("all expected checks passed");
        Ok(EXIT_OK)
    } else {
        println!("{} unexpected failure(s)", suite.unexpected);
        Ok(EXIT_FAILURE)
    }
}

fn cmd_converge(config: &RunConfig, state: &StateArg, n: usize, phi: f64, ns: &[usize]) -> CliResult<i32> {
    let kernel = match require_kernel(config)? {
        KernelChoice::Symmetric => ContinuumKernel::Symmetric,
        KernelChoice::Wootters => ContinuumKernel::Wootters,
        _ => return Err(CliError::kernel("converge takes the symmetric or wootters kernel")),
    };
    let words = state.state.as_deref().ok_or_else(|| CliError::state("missing --state"))?;
    let choice = StateChoice::parse(words)?;
    let rho = choice.resolve(config.dim.or(choice.minimal_dim()), config.phi0)?;
    let report = continuum_study(kernel, &rho, n, phi, config.phi0, ns)?;
    let target = report.rows.first().map(|r| r.target).unwrap_or_default();
    eprintln!("target: {target:.17e}");
    if let Some(e) = report.final_error() {
        eprintln!("final error: {e:.3e}");
    }
    eprintln!("monotone: {}", if report.monotone { "yes" } else { "no" });
    write_output(config.out.as_deref(), &report.to_csv())?;
    Ok(EXIT_OK)
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::state(format!("{}: {e}", path.display())))
}

fn cmd_relate(direction: Direction, config: &RunConfig, input: Option<&Path>, state: &StateArg) -> CliResult<i32> {
    let rho = match &state.state {
        Some(_) => Some(load_state(state, config.dim, config.phi0)?),
        None => None,
    };
    let (out, direct) = match direction {
        Direction::Odd => {
            let w = match input {
                Some(path) => WignerGrid::from_json(&read_input(path)?).map_err(CliError::state)?,
                None => {
                    let rho = rho.as_ref().ok_or_else(|| CliError::state("relate needs --input or --state"))?;
                    let kernel = KernelChoice::Wootters.build(rho.dim(), None)?;
                    wigner(&Quantizer::build(PhaseGrid::new(rho.dim(), config.phi0)?, kernel)?, rho)?
                }
            };
            let out = relate_odd(&w).map_err(CliError::kernel)?;
            let direct = match &rho {
                Some(r) => Some(symmetric_wigner(w.grid(), r).map_err(CliError::kernel)?),
                None => None,
            };
            (out, direct)
        }
        Direction::Even => {
            let w = match input {
                Some(path) => {
                    let text = read_input(path)?;
                    let value: serde_json::Value = serde_json::from_str(&text).map_err(CliError::state)?;
                    if value.get("N").is_none() {
                        return Err(CliError::kernel("even relation needs a doubled-grid (leonhardt) file"));
                    }
                    HalfIntegerWignerGrid::from_json(&text).map_err(CliError::state)?
                }
                None => {
                    let rho = rho.as_ref().ok_or_else(|| CliError::state("relate needs --input or --state"))?;
                    if rho.dim() % 2 == 1 {
                        return Err(CliError::kernel("even relation needs an even dimension"));
                    }
                    leonhardt_wigner(rho.dim() / 2, config.phi0, rho)?
                }
            };
            let eps = config.epsilon.unwrap_or_else(|| default_epsilon(w.half_dim()));
            let out = relate_even(&w, eps)?;
            let direct = match &rho {
                Some(r) => Some(almost_symmetric_wigner(out.grid(), eps, r).map_err(CliError::kernel)?),
                None => None,
            };
            (out, direct)
        }
    };
    report_grid(&out);
    emit(config, || out.to_json(), || out.to_csv())?;
    if let Some(direct) = direct {
        let dev = out.max_abs_diff(&direct);
        eprintln!("max deviation from direct computation: {dev:.3e}");
        if dev > TOL {
            return Ok(EXIT_FAILURE);
        }
    }
    Ok(EXIT_OK)
}
