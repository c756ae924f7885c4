//! Monotone iteration to the minimal solution of the KYP inequality.
//!
//! Starting from `X⁽⁰⁾ = 0`, each step applies
//! `X ↦ G*G + D_G L* D_{F*} X^{1/2} W^{-1} X^{1/2} D_{F*} L D_G`,
//! `W = I - X^{1/2} F F* X^{1/2}`, which equals
//! `I - (D_T² + T*(I - X)P'_H T)_H` on the state space.

use crate::contraction::{shorted_defects, BlockContraction};
use crate::error::{KypError, Result};
use crate::kyp::{evaluate_forms, shorted_step, KypCandidate, ParameterData};
use crate::numerics::{
    eigh, hermitian_part, identity, loewner_margin, norm, psd_sqrt, CMatrix, Tolerances,
};
use crate::system::{adjoint, classify, SystemRealization};

/// Number of trailing gaps inspected by the slow-convergence test.
const RATE_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// `X⁽⁰⁾, X⁽¹⁾, …`, ending with the returned iterate.
    pub iterates: Vec<CMatrix>,
    /// `‖X⁽ⁿ⁺¹⁾ - X⁽ⁿ⁾‖` for each step taken.
    pub gaps: Vec<f64>,
    /// Largest Riccati residual at the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
    /// Index of the first iterate whose successor was within `fixpoint_tol`,
    /// or the number of steps taken when the cap was hit.
    pub iterations_used: usize,
    /// The gaps decayed slower than geometrically over the final window.
    pub slow_convergence: bool,
    /// Mean per-step contraction factor of the gaps over the final window.
    pub empirical_rate: Option<f64>,
}

/// One step of the iteration through the closed form on `H`.
fn closed_form_step(
    p: &ParameterData,
    x: &CMatrix,
    t: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let root = psd_sqrt(x, tol)?;
    match p.shortx_rhs(&root, tol) {
        Some(next) => Ok(next),
        None => shorted_route_step(t, x, tol),
    }
}

/// One step through the shorted operator of the full `(H ⊕ M)`-sized
/// matrix: `I - (D_T² + T*(I - X)P'_H T)_H` restricted to `H`.
pub fn shorted_route_step(t: &CMatrix, x: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let h = x.nrows();
    Ok(hermitian_part(
        &(identity(h) - shorted_step(t, h, &(identity(h) - x), tol)?),
    ))
}

/// One step of the closed form for the system `tau`.
pub fn iteration_step(tau: &SystemRealization, x: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    let p = ParameterData::new(&t, tol)?;
    closed_form_step(&p, x, &t.assembled(), tol)
}

/// Mean log-ratio of consecutive gaps over the two halves of the final
/// window. Returns `(slow, rate)`.
fn rate_analysis(gaps: &[f64]) -> (bool, Option<f64>) {
    let positive: Vec<f64> = gaps.iter().copied().filter(|g| *g > 0.0).collect();
    let window = &positive[positive.len().saturating_sub(RATE_WINDOW)..];
    if window.len() < 8 {
        return (false, None);
    }
    let logs: Vec<f64> = window.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let half = logs.len() / 2;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (r1, r2) = (mean(&logs[..half]), mean(&logs[half..]));
    let slow = r2.exp() > 0.99 || r2.abs() < 0.9 * r1.abs();
    (slow, Some(r2.exp()))
}

/// Runs the iteration from `X⁽⁰⁾ = 0` until the gap drops below
/// `fixpoint_tol` or `max_iter` steps have been taken.
///
/// A step that decreases the iterate by more than `psd_tol` in the Loewner
/// order, or leaves `[0, I]`, is an internal-consistency failure.
pub fn solve_min(
    tau: &SystemRealization,
    tol: &Tolerances,
) -> Result<(KypCandidate, IterationTrace)> {
    tol.validate()?;
    tau.require_passive(tol)?;
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    let p = ParameterData::new(&t, tol)?;
    let full = t.assembled();
    let h = tau.state_dim();

    let mut x = CMatrix::zeros(h, h);
    let mut iterates = vec![x.clone()];
    let mut gaps = Vec::new();
    let mut converged = false;
    for step in 1..=tol.max_iter {
        let next = closed_form_step(&p, &x, &full, tol)?;
        let margin = loewner_margin(&x, &next)?;
        if margin < -tol.psd_tol {
            return Err(KypError::NonMonotone { step, margin });
        }
        if h > 0 {
            let eig = eigh(&next)?;
            if eig.min() < -tol.psd_tol || eig.max() > 1.0 + tol.psd_tol {
                return Err(KypError::OutsideUnitInterval {
                    lower: eig.min(),
                    upper: 1.0 - eig.max(),
                });
            }
        }
        let gap = norm(&(&next - &x));
        gaps.push(gap);
        iterates.push(next.clone());
        x = next;
        if gap < tol.fixpoint_tol {
            converged = true;
            break;
        }
    }
    let iterations_used = if converged {
        gaps.len() - 1
    } else {
        gaps.len()
    };
    let candidate = KypCandidate::new(x, tol)?;
    let final_residual = evaluate_forms(tau, &candidate, tol)?.max_residual();
    let (slow_convergence, empirical_rate) = rate_analysis(&gaps);
    Ok((
        candidate,
        IterationTrace {
            iterates,
            gaps,
            final_residual,
            converged,
            iterations_used,
            slow_convergence,
            empirical_rate,
        },
    ))
}

/// `T₁ = [[X^{1/2} A X^{-1/2}, X^{1/2} B], [C X^{-1/2}, D]]`.
pub fn rescale_realization(
    tau: &SystemRealization,
    x: &KypCandidate,
    tol: &Tolerances,
) -> Result<SystemRealization> {
    if x.dim() != tau.state_dim() {
        return Err(KypError::Dimension(format!(
            "candidate of size {} for a state space of dimension {}",
            x.dim(),
            tau.state_dim()
        )));
    }
    let floor = 100.0 * tol.psd_tol;
    let eig = eigh(x.x())?;
    if x.dim() > 0 && eig.min() < floor {
        return Err(KypError::Singular(format!(
            "rescaling needs X ≥ {floor:e} I (smallest eigenvalue {:e})",
            eig.min()
        )));
    }
    let root = eig.map(f64::sqrt);
    let inv_root = eig.map(|v| 1.0 / v.sqrt());
    SystemRealization::from_parts(
        &root * tau.a() * &inv_root,
        &root * tau.b(),
        tau.c() * &inv_root,
        tau.d().clone(),
        format!("{}/rescaled", tau.label),
    )
}

/// Whether `(D²_T)_H` of a system vanishes, with its norm.
pub fn state_defect_norm(tau: &SystemRealization, tol: &Tolerances) -> Result<f64> {
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    Ok(norm(&shorted_defects(&t, tol)?.t_h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub optimal: bool,
    pub star_optimal: bool,
    pub x_min: KypCandidate,
    pub adjoint_x_min: KypCandidate,
    pub trace: IterationTrace,
    pub adjoint_trace: IterationTrace,
}

/// Distance from `I` below which a minimal solution counts as the identity.
pub fn identity_threshold(tol: &Tolerances) -> f64 {
    10.0 * tol.fixpoint_tol.sqrt()
}

/// `τ` is optimal iff its minimal solution is `I`, and (*)-optimal iff the
/// minimal solution for `τ*` is `I`. Requires a passive minimal system.
pub fn optimality_check(tau: &SystemRealization, tol: &Tolerances) -> Result<OptimalityReport> {
    tau.require_passive(tol)?;
    let cls = classify(tau, tol);
    if !cls.minimal {
        return Err(KypError::NotMinimal {
            controllable: cls.controllable,
            observable: cls.observable,
        });
    }
    let (x_min, trace) = solve_min(tau, tol)?;
    let (adjoint_x_min, adjoint_trace) = solve_min(&adjoint(tau), tol)?;
    let h = tau.state_dim();
    let at_identity = |x: &KypCandidate| norm(&(identity(h) - x.x())) <= identity_threshold(tol);
    Ok(OptimalityReport {
        optimal: at_identity(&x_min),
        star_optimal: at_identity(&adjoint_x_min),
        x_min,
        adjoint_x_min,
        trace,
        adjoint_trace,
    })
}
