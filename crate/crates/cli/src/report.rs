//! Serializable reports. Field order is fixed by the struct layout and maps
//! are sorted, so identical inputs produce byte-identical output.

use std::collections::BTreeMap;

use kyp_core::kyp::{SolutionBounds, UniquenessReport};
use kyp_core::moebius::MoebiusCheck;
use kyp_core::numerics::norm;
use kyp_core::{Classification, IterationTrace, KypReport, SystemRealization, Tolerances};
use serde::Serialize;

use crate::format::{MatrixFile, SystemFile};

/// JSON has no infinities; undefined or unbounded values become `null`.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Serialize)]
pub struct ToleranceEcho {
    pub psd_tol: f64,
    pub rank_tol: f64,
    pub fixpoint_tol: f64,
    pub max_iter: usize,
}

impl From<&Tolerances> for ToleranceEcho {
    fn from(t: &Tolerances) -> Self {
        Self {
            psd_tol: t.psd_tol,
            rank_tol: t.rank_tol,
            fixpoint_tol: t.fixpoint_tol,
            max_iter: t.max_iter,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Header {
    pub command: &'static str,
    pub system: String,
    pub state_dim: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub tolerances: ToleranceEcho,
}

impl Header {
    pub fn new(command: &'static str, tau: &SystemRealization, tol: &Tolerances) -> Self {
        Self {
            command,
            system: tau.label.clone(),
            state_dim: tau.state_dim(),
            input_dim: tau.input_dim(),
            output_dim: tau.output_dim(),
            tolerances: tol.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NotPassiveReport {
    #[serde(flatten)]
    pub header: Header,
    pub passive: bool,
    pub norm: f64,
    /// `1 - ‖T‖`, negative for an active system.
    pub margin: f64,
    pub exit_status: i32,
}

#[derive(Debug, Serialize)]
pub struct ClassificationOut {
    pub passive: bool,
    pub isometric: bool,
    pub coisometric: bool,
    pub conservative: bool,
    pub controllable: bool,
    pub observable: bool,
    pub simple: bool,
    pub minimal: bool,
    pub norm: f64,
    pub controllable_dim: usize,
    pub observable_dim: usize,
}

impl From<&Classification> for ClassificationOut {
    fn from(c: &Classification) -> Self {
        Self {
            passive: c.passive,
            isometric: c.isometric,
            coisometric: c.coisometric,
            conservative: c.conservative,
            controllable: c.controllable,
            observable: c.observable,
            simple: c.simple,
            minimal: c.minimal,
            norm: c.norm,
            controllable_dim: c.controllable_basis.ncols(),
            observable_dim: c.observable_basis.ncols(),
        }
    }
}

/// The four shorted defects, keyed by the operator they short.
#[derive(Debug, Serialize)]
pub struct DefshortOut {
    pub d2_t_on_h: MatrixFile,
    pub d2_pn_t_on_h: MatrixFile,
    pub d2_ts_on_k: MatrixFile,
    pub d2_pm_ts_on_k: MatrixFile,
    pub norms: [f64; 4],
    pub route_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct BoundsOut {
    pub lower: MatrixFile,
    pub observable: bool,
    pub interval_lower: Option<MatrixFile>,
    pub exact_min: Option<MatrixFile>,
}

impl From<&SolutionBounds> for BoundsOut {
    fn from(b: &SolutionBounds) -> Self {
        Self {
            lower: MatrixFile::from_matrix(&b.lower),
            observable: b.observable,
            interval_lower: b.interval_lower.as_ref().map(MatrixFile::from_matrix),
            exact_min: b.exact_min.as_ref().map(MatrixFile::from_matrix),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RangeConditions {
    #[serde(rename = "UNIQQ")]
    pub uniqq: bool,
    #[serde(rename = "UNIQ1")]
    pub uniq1: bool,
    pub nesopt: bool,
}

#[derive(Debug, Serialize)]
pub struct TransferOut {
    pub grid_points: usize,
    pub radius: f64,
    pub max_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    #[serde(flatten)]
    pub header: Header,
    pub classification: ClassificationOut,
    pub defshort: DefshortOut,
    pub est1: BoundsOut,
    #[serde(rename = "UNIQQ")]
    pub uniqq: bool,
    #[serde(rename = "UNIQ1")]
    pub uniq1: bool,
    pub nesopt: bool,
    pub sufficient_optimality: bool,
    pub range_conditions: RangeConditions,
    pub agreement: bool,
    pub transfer: TransferOut,
    pub exit_status: i32,
}

impl AnalyzeReport {
    pub fn defshort(u: &UniquenessReport) -> DefshortOut {
        let d = &u.defects;
        DefshortOut {
            d2_t_on_h: MatrixFile::from_matrix(&d.t_h),
            d2_pn_t_on_h: MatrixFile::from_matrix(&d.pn_t_h),
            d2_ts_on_k: MatrixFile::from_matrix(&d.ts_k),
            d2_pm_ts_on_k: MatrixFile::from_matrix(&d.pm_ts_k),
            norms: d.all().map(norm),
            route_gap: d.route_gap,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FormsOut {
    pub margins: BTreeMap<&'static str, Option<f64>>,
    pub residuals: BTreeMap<&'static str, Option<f64>>,
    pub feasible: bool,
    pub consistent: bool,
    pub riccati_consistent: bool,
    pub kernel_trivial: bool,
    pub max_residual: f64,
}

impl From<&KypReport> for FormsOut {
    fn from(r: &KypReport) -> Self {
        Self {
            margins: r
                .margins
                .iter()
                .map(|(f, m)| (f.name(), m.and_then(finite)))
                .collect(),
            residuals: r
                .residuals
                .iter()
                .map(|(f, m)| (f.name(), m.and_then(finite)))
                .collect(),
            feasible: r.feasible,
            consistent: r.consistent,
            riccati_consistent: r.riccati_consistent,
            kernel_trivial: r.kernel_trivial,
            max_residual: r.max_residual(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TraceOut {
    pub converged: bool,
    pub iterations_used: usize,
    pub steps: usize,
    pub final_gap: Option<f64>,
    pub final_residual: f64,
    pub slow_convergence: bool,
    pub empirical_rate: Option<f64>,
}

impl From<&IterationTrace> for TraceOut {
    fn from(t: &IterationTrace) -> Self {
        Self {
            converged: t.converged,
            iterations_used: t.iterations_used,
            steps: t.gaps.len(),
            final_gap: t.gaps.last().copied(),
            final_residual: t.final_residual,
            slow_convergence: t.slow_convergence,
            empirical_rate: t.empirical_rate.and_then(finite),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OptimalityOut {
    pub optimal: Option<bool>,
    pub star_optimal: Option<bool>,
    pub adjoint_x_min: Option<MatrixFile>,
    pub adjoint_converged: Option<bool>,
    /// Why the verdicts are missing, e.g. a non-minimal system.
    pub unavailable: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub header: Header,
    pub x_min: MatrixFile,
    pub trace: TraceOut,
    pub forms: FormsOut,
    /// Largest Riccati residual at `X = I`.
    pub identity_residual: f64,
    pub optimality: OptimalityOut,
    pub rescaled: Option<SystemFile>,
    /// `‖T₁‖`; above 1 by the KYP defect of `X_min` amplified by `‖X_min^{-1}‖`.
    pub rescaled_norm: Option<f64>,
    pub rescale_error: Option<String>,
    pub exit_status: i32,
}

#[derive(Debug, Serialize)]
pub struct CandidateReport {
    #[serde(flatten)]
    pub header: Header,
    pub candidate: MatrixFile,
    pub forms: FormsOut,
    pub exit_status: i32,
}

#[derive(Debug, Serialize)]
pub struct MoebiusOut {
    pub identity_gap: f64,
    pub schwarz_excess: f64,
    pub krylov_gap: f64,
    pub threshold: f64,
    pub identity_ok: bool,
    pub schwarz_ok: bool,
    pub krylov_ok: bool,
}

impl MoebiusOut {
    pub fn new(c: &MoebiusCheck, threshold: f64) -> Self {
        Self {
            identity_gap: c.identity_gap,
            schwarz_excess: c.schwarz_excess,
            krylov_gap: c.krylov_gap,
            threshold,
            identity_ok: c.identity_gap <= threshold,
            schwarz_ok: c.schwarz_excess <= threshold,
            krylov_ok: c.krylov_gap <= threshold,
        }
    }

    pub fn ok(&self) -> bool {
        self.identity_ok && self.schwarz_ok && self.krylov_ok
    }
}

#[derive(Debug, Serialize)]
pub struct MoebiusReport {
    #[serde(flatten)]
    pub header: Header,
    pub theta0: MatrixFile,
    pub parameter_system: SystemFile,
    pub grid_points: usize,
    pub radius: f64,
    pub check: MoebiusOut,
    pub exit_status: i32,
}
