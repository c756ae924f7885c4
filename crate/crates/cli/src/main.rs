mod format;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kyp_core::fixtures::{FixtureKind, FixtureSpec};
use kyp_core::kyp::{evaluate_forms, solution_bounds, uniqueness_report};
use kyp_core::moebius::{parameter_system, verify_moebius};
use kyp_core::solver::{optimality_check, rescale_realization, solve_min};
use kyp_core::system::{classify, disk_grid, max_transfer_norm};
use kyp_core::{KypCandidate, KypError, SystemRealization, Tolerances};
use serde::Serialize;

use format::{load_candidate, load_system, InputError, MatrixFile, SystemFile};
use report::*;

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_NOT_PASSIVE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_ITERATION_CAP: u8 = 4;
const EXIT_MOEBIUS: u8 = 5;
const EXIT_INPUT: u8 = 64;

/// Radius of the disk on which transfer functions are sampled.
const GRID_RADIUS: f64 = 0.9;

#[derive(Parser)]
#[command(
    name = "kyp",
    version,
    about = "KYP inequality and Riccati analysis of passive discrete-time systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct TolFlags {
    /// Absolute eigenvalue floor for PSD acceptance.
    #[arg(long, default_value_t = 1e-10)]
    psd_tol: f64,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Stopping threshold on the gap between successive iterates.
    #[arg(long, default_value_t = 1e-10)]
    fixpoint_tol: f64,
    /// Iteration cap for the minimal-solution solver.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
}

impl TolFlags {
    fn tolerances(self) -> Result<Tolerances, InputError> {
        let tol = Tolerances {
            psd_tol: self.psd_tol,
            rank_tol: self.rank_tol,
            fixpoint_tol: self.fixpoint_tol,
            max_iter: self.max_iter,
        };
        tol.validate().map_err(|e| InputError(e.to_string()))?;
        Ok(tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a system and report shorted defects, solution bounds and
    /// uniqueness conditions.
    Analyze {
        system: PathBuf,
        #[command(flatten)]
        tol: TolFlags,
        /// Points of the disk grid used for the transfer-function check.
        #[arg(long, default_value_t = 32)]
        grid_points: usize,
    },
    /// Compute the minimal solution, or evaluate a given candidate.
    Solve {
        system: PathBuf,
        #[command(flatten)]
        tol: TolFlags,
        /// Candidate X to evaluate instead of running the solver.
        #[arg(long)]
        candidate: Option<PathBuf>,
        /// Where to write the realization rescaled by X_min.
        #[arg(long)]
        rescaled_out: Option<PathBuf>,
    },
    /// Extract the Möbius parameter system and verify the representation.
    Moebius {
        system: PathBuf,
        #[command(flatten)]
        tol: TolFlags,
        #[arg(long, default_value_t = 32)]
        grid_points: usize,
    },
    /// Write a fixture system file.
    Fixture {
        /// ex1, ex2, fix-a, fix-b, fix-c or scalar-generic.
        kind: String,
        #[arg(long, default_value_t = 1)]
        n_h: usize,
        /// Input dimension; defaults to n_h.
        #[arg(long)]
        n_m: Option<usize>,
        /// Output dimension; defaults to n_h.
        #[arg(long)]
        n_n: Option<usize>,
        /// Defaults to 0.25 for ex1 and 0.5 for ex2.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolFlags,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Numerical(KypError),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<KypError> for Failure {
    fn from(e: KypError) -> Self {
        match e {
            KypError::Dimension(_) | KypError::NotSquare { .. } | KypError::InvalidInput(_) => {
                Failure::Input(e.to_string())
            }
            other => Failure::Numerical(other),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn emit<T: Serialize>(report: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::Input(format!("serializing report: {e}")))?;
    println!("{text}");
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Input(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Emits the not-passive report and returns its exit code, or `None` for a
/// passive system.
fn reject_active(
    command: &'static str,
    tau: &SystemRealization,
    tol: &Tolerances,
) -> Result<Option<u8>, Failure> {
    if tau.is_passive(tol) {
        return Ok(None);
    }
    let n = kyp_core::numerics::norm(&tau.assembled());
    emit(&NotPassiveReport {
        header: Header::new(command, tau, tol),
        passive: false,
        norm: n,
        margin: 1.0 - n,
        exit_status: EXIT_NOT_PASSIVE.into(),
    })?;
    Ok(Some(EXIT_NOT_PASSIVE))
}

fn analyze(path: &Path, tol: &Tolerances, grid_points: usize) -> Outcome {
    let tau = load_system(path)?;
    if let Some(code) = reject_active("analyze", &tau, tol)? {
        return Ok(code);
    }
    let cls = classify(&tau, tol);
    let bounds = solution_bounds(&tau, tol)?;
    let uniq = uniqueness_report(&tau, tol)?;
    let max_norm = max_transfer_norm(&tau, &disk_grid(grid_points, GRID_RADIUS))?;
    emit(&AnalyzeReport {
        header: Header::new("analyze", &tau, tol),
        classification: (&cls).into(),
        defshort: AnalyzeReport::defshort(&uniq),
        est1: (&bounds).into(),
        uniqq: uniq.uniqq,
        uniq1: uniq.uniq1,
        nesopt: uniq.nesopt,
        sufficient_optimality: uniq.sufficient_optimality,
        range_conditions: RangeConditions {
            uniqq: uniq.range_uniqq,
            uniq1: uniq.range_uniq1,
            nesopt: uniq.range_nesopt,
        },
        agreement: uniq.agreement,
        transfer: TransferOut {
            grid_points,
            radius: GRID_RADIUS,
            max_norm,
        },
        exit_status: EXIT_OK.into(),
    })?;
    Ok(EXIT_OK)
}

fn evaluate_candidate(tau: &SystemRealization, x: &Path, tol: &Tolerances) -> Outcome {
    let x = load_candidate(x)?;
    if x.shape() != (tau.state_dim(), tau.state_dim()) {
        return Err(Failure::Input(format!(
            "X: expected {0}x{0} for the state dimension, found {1}x{2}",
            tau.state_dim(),
            x.nrows(),
            x.ncols()
        )));
    }
    let candidate = KypCandidate::new(x, tol).map_err(|e| Failure::Input(format!("X: {e}")))?;
    let forms = evaluate_forms(tau, &candidate, tol)?;
    let code = if forms.feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    };
    emit(&CandidateReport {
        header: Header::new("solve", tau, tol),
        candidate: MatrixFile::from_matrix(candidate.x()),
        forms: (&forms).into(),
        exit_status: code.into(),
    })?;
    Ok(code)
}

fn optimality(tau: &SystemRealization, tol: &Tolerances) -> OptimalityOut {
    match optimality_check(tau, tol) {
        Ok(r) => OptimalityOut {
            optimal: Some(r.optimal),
            star_optimal: Some(r.star_optimal),
            adjoint_x_min: Some(MatrixFile::from_matrix(r.adjoint_x_min.x())),
            adjoint_converged: Some(r.adjoint_trace.converged),
            unavailable: None,
        },
        Err(e) => OptimalityOut {
            optimal: None,
            star_optimal: None,
            adjoint_x_min: None,
            adjoint_converged: None,
            unavailable: Some(e.to_string()),
        },
    }
}

fn solve(
    path: &Path,
    tol: &Tolerances,
    candidate: Option<&Path>,
    rescaled_out: Option<&Path>,
) -> Outcome {
    let tau = load_system(path)?;
    if let Some(code) = reject_active("solve", &tau, tol)? {
        return Ok(code);
    }
    if let Some(x) = candidate {
        return evaluate_candidate(&tau, x, tol);
    }
    let (x_min, trace) = solve_min(&tau, tol)?;
    let forms = evaluate_forms(&tau, &x_min, tol)?;
    let identity = evaluate_forms(&tau, &KypCandidate::identity(tau.state_dim()), tol)?;
    let (rescaled, rescaled_norm, rescale_error) = match rescale_realization(&tau, &x_min, tol) {
        Ok(r) => (
            Some(SystemFile::from_system(&r)),
            Some(kyp_core::numerics::norm(&r.assembled())),
            None,
        ),
        Err(e) => (None, None, Some(e.to_string())),
    };
    if let (Some(out), Some(file)) = (rescaled_out, rescaled.as_ref()) {
        write_json(out, file)?;
    }
    let code = if trace.converged {
        EXIT_OK
    } else {
        EXIT_ITERATION_CAP
    };
    emit(&SolveReport {
        header: Header::new("solve", &tau, tol),
        x_min: MatrixFile::from_matrix(x_min.x()),
        trace: (&trace).into(),
        forms: (&forms).into(),
        identity_residual: identity.max_residual(),
        optimality: optimality(&tau, tol),
        rescaled,
        rescaled_norm,
        rescale_error,
        exit_status: code.into(),
    })?;
    Ok(code)
}

fn moebius(path: &Path, tol: &Tolerances, grid_points: usize) -> Outcome {
    let tau = load_system(path)?;
    if let Some(code) = reject_active("moebius", &tau, tol)? {
        return Ok(code);
    }
    let pair = parameter_system(&tau, tol)?;
    let check = verify_moebius(&tau, &pair, &disk_grid(grid_points, GRID_RADIUS), tol)?;
    let check = MoebiusOut::new(&check, tol.zero_tol());
    let code = if check.ok() { EXIT_OK } else { EXIT_MOEBIUS };
    emit(&MoebiusReport {
        header: Header::new("moebius", &tau, tol),
        theta0: MatrixFile::from_matrix(&pair.theta0),
        parameter_system: SystemFile::from_system(&pair.parameter_system),
        grid_points,
        radius: GRID_RADIUS,
        check,
        exit_status: code.into(),
    })?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn fixture(
    kind: &str,
    n_h: usize,
    n_m: Option<usize>,
    n_n: Option<usize>,
    alpha: Option<f64>,
    seed: u64,
    tol: &Tolerances,
    output: Option<&Path>,
) -> Outcome {
    let kind = FixtureKind::parse(kind)
        .ok_or_else(|| Failure::Input(format!("kind: unknown fixture {kind:?}")))?;
    let alpha = alpha.unwrap_or(match kind {
        FixtureKind::Ex2 => 0.5,
        _ => 0.25,
    });
    let spec = FixtureSpec {
        kind,
        dims: (n_h, n_m.unwrap_or(n_h), n_n.unwrap_or(n_h)),
        alpha,
        seed,
    };
    let file = SystemFile::from_system(&spec.build(tol)?);
    match output {
        Some(path) => write_json(path, &file)?,
        None => emit(&file)?,
    }
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze {
            system,
            tol,
            grid_points,
        } => analyze(&system, &tol.tolerances()?, grid_points),
        Command::Solve {
            system,
            tol,
            candidate,
            rescaled_out,
        } => solve(
            &system,
            &tol.tolerances()?,
            candidate.as_deref(),
            rescaled_out.as_deref(),
        ),
        Command::Moebius {
            system,
            tol,
            grid_points,
        } => moebius(&system, &tol.tolerances()?, grid_points),
        Command::Fixture {
            kind,
            n_h,
            n_m,
            n_n,
            alpha,
            seed,
            tol,
            output,
        } => fixture(
            &kind,
            n_h,
            n_m,
            n_n,
            alpha,
            seed,
            &tol.tolerances()?,
            output.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
