//! The KYP inequality and the Riccati equation in all their equivalent
//! forms, bounds on solutions, and the uniqueness and optimality tests.
//!
//! A form is evaluated literally. Where a form composes a Moore–Penrose
//! inverse, the underlying range inclusion is checked first; if it fails
//! numerically the form is reported as undefined and left out of the
//! consistency vote.

use std::fmt;

use crate::contraction::{parametrize, shorted_defects, BlockContraction, ShortedDefects};
use crate::error::{KypError, Result};
use crate::numerics::{
    block2, block_diag, defect_operator, eigh, hermitian_part, identity, is_psd, leading, norm,
    pinv, projection_residual, psd_sqrt, range_basis, range_intersection, support_basis, zeros,
    CMatrix, Tolerances,
};
use crate::shorted::{shorted, shorted_complement, Subspace};
use crate::system::SystemRealization;

/// Checks `-psd_tol ≤ X ≤ (1 + psd_tol) I`.
pub fn check_unit_interval(x: &CMatrix, tol: &Tolerances) -> Result<()> {
    if x.nrows() != x.ncols() {
        return Err(KypError::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    let eig = eigh(x)?;
    let (lower, upper) = (eig.min(), 1.0 - eig.max());
    if x.nrows() > 0 && (lower < -tol.psd_tol || upper < -tol.psd_tol) {
        return Err(KypError::OutsideUnitInterval { lower, upper });
    }
    Ok(())
}

/// A candidate solution `0 ≤ X ≤ I` on the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct KypCandidate {
    x: CMatrix,
    /// `ker X = {0}`.
    pub kernel_trivial: bool,
}

impl KypCandidate {
    pub fn new(x: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_unit_interval(&x, tol)?;
        let x = hermitian_part(&x);
        let kernel_trivial = x.nrows() == 0 || eigh(&x)?.min() > tol.psd_tol;
        Ok(Self { x, kernel_trivial })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: identity(n),
            kernel_trivial: true,
        }
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn into_inner(self) -> CMatrix {
        self.x
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }
}

fn check_dims(tau: &SystemRealization, x: &KypCandidate) -> Result<()> {
    if x.dim() != tau.state_dim() {
        return Err(KypError::Dimension(format!(
            "candidate of size {} for a state space of dimension {}",
            x.dim(),
            tau.state_dim()
        )));
    }
    Ok(())
}

/// `L_τ(X)`, the block matrix whose positivity is the KYP inequality.
pub fn kyp_matrix(tau: &SystemRealization, x: &KypCandidate) -> Result<CMatrix> {
    check_dims(tau, x)?;
    let (a, b, c, d) = (tau.a(), tau.b(), tau.c(), tau.d());
    let x = x.x();
    let m = tau.input_dim();
    let top_left = x - a.adjoint() * x * a - c.adjoint() * c;
    let top_right = -(a.adjoint() * x * b) - c.adjoint() * d;
    let bottom = identity(m) - b.adjoint() * x * b - d.adjoint() * d;
    Ok(hermitian_part(&block2(
        &top_left,
        &top_right,
        &top_right.adjoint(),
        &bottom,
    )))
}

/// The equivalent forms of the KYP inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KypForm {
    /// `diag(X, I) - T* diag(X, I) T ≥ 0`.
    Ckyp,
    /// The same inequality written entrywise in `A, B, C, D`.
    Kyp1,
    /// `(I - X) P_H ≤ (D_T² + T*(I - X)P'_H T)_H`.
    SkypX,
    /// The 2×2 block form in the parameters `F, G, L`.
    Ckyp1,
    /// `X ≥ G*G + D_G L* D_{F*} X^{1/2} W^{-1} X^{1/2} D_{F*} L D_G`.
    ShortX,
    /// The block form for the parameter contraction `Q`.
    CkypQ,
    /// [`KypForm::CkypQ`] written entrywise.
    SkypQXX,
    /// `(I - X) P_H ≤ (D_Q² + Q*(I - X)P'_H Q)_H`.
    SkypQX,
}

impl KypForm {
    pub const ALL: [KypForm; 8] = [
        KypForm::Ckyp,
        KypForm::Kyp1,
        KypForm::SkypX,
        KypForm::Ckyp1,
        KypForm::ShortX,
        KypForm::CkypQ,
        KypForm::SkypQXX,
        KypForm::SkypQX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KypForm::Ckyp => "CKYP",
            KypForm::Kyp1 => "kyp1",
            KypForm::SkypX => "SkypX",
            KypForm::Ckyp1 => "CKYP1",
            KypForm::ShortX => "SHORTX",
            KypForm::CkypQ => "CKYPQ",
            KypForm::SkypQXX => "SkypQXX",
            KypForm::SkypQX => "SkypQX",
        }
    }
}

/// The equivalent forms of the Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RiccatiForm {
    RicXX,
    RicX,
    RicQX,
    RicQXXX,
    RicShortX,
}

impl RiccatiForm {
    pub const ALL: [RiccatiForm; 5] = [
        RiccatiForm::RicXX,
        RiccatiForm::RicX,
        RiccatiForm::RicQX,
        RiccatiForm::RicQXXX,
        RiccatiForm::RicShortX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RiccatiForm::RicXX => "RicXX",
            RiccatiForm::RicX => "RicX",
            RiccatiForm::RicQX => "RICQX",
            RiccatiForm::RicQXXX => "RicQXXX",
            RiccatiForm::RicShortX => "RICSHORTX",
        }
    }
}

impl fmt::Display for KypForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for RiccatiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Feasibility margins and Riccati residuals of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct KypReport {
    /// Smallest eigenvalue of each form; `None` when the form is undefined.
    pub margins: Vec<(KypForm, Option<f64>)>,
    /// Spectral norm of each Riccati residual; `None` when undefined.
    pub residuals: Vec<(RiccatiForm, Option<f64>)>,
    pub kernel_trivial: bool,
    /// Every defined form has margin `≥ -psd_tol`.
    pub feasible: bool,
    /// All defined feasibility verdicts agree.
    pub consistent: bool,
    /// No residual is below `psd_tol` while another exceeds `100 psd_tol`.
    pub riccati_consistent: bool,
    psd_tol: f64,
}

impl KypReport {
    pub fn margin(&self, form: KypForm) -> Option<f64> {
        self.margins
            .iter()
            .find(|(f, _)| *f == form)
            .and_then(|(_, m)| *m)
    }

    pub fn residual(&self, form: RiccatiForm) -> Option<f64> {
        self.residuals
            .iter()
            .find(|(f, _)| *f == form)
            .and_then(|(_, r)| *r)
    }

    pub fn verdict(&self, form: KypForm) -> Option<bool> {
        self.margin(form).map(|m| m >= -self.psd_tol)
    }

    /// Largest defined Riccati residual.
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .filter_map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }

    pub fn defined_residuals(&self) -> usize {
        self.residuals.iter().filter(|(_, r)| r.is_some()).count()
    }
}

/// `pinv(W^{1/2}) Y`, provided `Y = W^{1/2} M` is solvable numerically.
fn douglas_factor(w: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Option<CMatrix> {
    let root = psd_sqrt(w, tol).ok()?;
    let m = pinv(&root, tol) * y;
    let residual = norm(&(&root * &m - y));
    (residual <= tol.range_tol() * norm(y).max(1.0)).then_some(m)
}

fn min_eig(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(eigh(m)?.min())
}

/// `(D_T² + T* (I - X) P'_H T)_H` restricted to `H`, for a contraction
/// `t : H ⊕ M → H ⊕ N` with `dim H = h`.
pub fn shorted_step(t: &CMatrix, h: usize, y: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let cols = t.ncols();
    let rows = t.nrows();
    let d2 = identity(cols) - t.adjoint() * t;
    let y_full = block_diag(y, &zeros(rows - h, rows - h));
    let s = hermitian_part(&(d2 + t.adjoint() * y_full * t));
    let r = shorted(&s, &Subspace::leading(cols, h), tol)?;
    Ok(leading(&r.value, h, h))
}

/// Pieces shared by the parameter forms.
pub(crate) struct ParameterData {
    gg: CMatrix,
    s: CMatrix,
    f: CMatrix,
    f_c: CMatrix,
    g_c: CMatrix,
    d_g: CMatrix,
    d_fs: CMatrix,
    l: CMatrix,
}

impl ParameterData {
    pub(crate) fn new(t: &BlockContraction, tol: &Tolerances) -> Result<Self> {
        let p = parametrize(t, tol)?;
        Ok(Self {
            gg: p.g.adjoint() * &p.g,
            s: p.s(tol)?,
            f_c: p.f_coords(),
            g_c: p.g_coords(),
            d_g: p.d_g(tol)?,
            d_fs: p.d_fs(tol)?,
            f: p.f,
            l: p.l,
        })
    }

    /// `Q` in coordinates `H ⊕ 𝔇_D → H ⊕ 𝔇_{D*}`.
    fn q(&self) -> CMatrix {
        let (dds, dd) = (self.g_c.nrows(), self.f_c.ncols());
        block2(&self.s, &self.f_c, &self.g_c, &zeros(dds, dd))
    }

    /// `M = W^{-1/2} X^{1/2} D_{F*}` with `W = I - X^{1/2} F F* X^{1/2}`.
    fn shortx_factor(&self, root: &CMatrix, tol: &Tolerances) -> Option<CMatrix> {
        let h = root.nrows();
        let w = identity(h) - root * &self.f * self.f.adjoint() * root;
        douglas_factor(&hermitian_part(&w), &(root * &self.d_fs), tol)
    }

    /// `G*G + D_G L* M* M L D_G`, the right side of the SHORTX and
    /// RICSHORTX forms.
    pub(crate) fn shortx_rhs(&self, root: &CMatrix, tol: &Tolerances) -> Option<CMatrix> {
        let m = self.shortx_factor(root, tol)?;
        let v = m * &self.l * &self.d_g;
        Some(hermitian_part(&(&self.gg + v.adjoint() * v)))
    }
}

/// Evaluates every KYP form and every Riccati form at `X`.
pub fn evaluate_forms(
    tau: &SystemRealization,
    candidate: &KypCandidate,
    tol: &Tolerances,
) -> Result<KypReport> {
    check_dims(tau, candidate)?;
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    let p = ParameterData::new(&t, tol)?;
    let x = candidate.x();
    let h = tau.state_dim();
    let (m, n) = (tau.input_dim(), tau.output_dim());
    let root = psd_sqrt(x, tol)?;
    let y = identity(h) - x;
    let full = t.assembled();
    let (a, b, c, d) = (tau.a(), tau.b(), tau.c(), tau.d());

    let ckyp = block_diag(x, &identity(m)) - full.adjoint() * block_diag(x, &identity(n)) * &full;
    let kyp1 = kyp_matrix(tau, candidate)?;
    let short_t = shorted_step(&full, h, &y, tol)?;

    let cross = &root * &p.d_fs * &p.l * &p.d_g;
    let ckyp1 = block2(
        &(x - &p.gg),
        &cross.adjoint(),
        &cross,
        &(identity(h) - &root * &p.f * p.f.adjoint() * &root),
    );
    let shortx = p.shortx_rhs(&root, tol);

    let q = p.q();
    let (dd, dds) = (p.f_c.ncols(), p.g_c.nrows());
    let ckypq = block_diag(x, &identity(dd)) - q.adjoint() * block_diag(x, &identity(dds)) * &q;
    let off = -(p.s.adjoint() * x * &p.f_c);
    let skypqxx = block2(
        &(x - &p.gg - p.s.adjoint() * x * &p.s),
        &off,
        &off.adjoint(),
        &(identity(dd) - p.f_c.adjoint() * x * &p.f_c),
    );
    let short_q = shorted_step(&q, h, &y, tol)?;

    let margins = vec![
        (KypForm::Ckyp, Some(min_eig(&hermitian_part(&ckyp))?)),
        (KypForm::Kyp1, Some(min_eig(&kyp1)?)),
        (
            KypForm::SkypX,
            Some(min_eig(&hermitian_part(&(&short_t - &y)))?),
        ),
        (KypForm::Ckyp1, Some(min_eig(&hermitian_part(&ckyp1))?)),
        (
            KypForm::ShortX,
            match &shortx {
                Some(rhs) => Some(min_eig(&hermitian_part(&(x - rhs)))?),
                None => None,
            },
        ),
        (KypForm::CkypQ, Some(min_eig(&hermitian_part(&ckypq))?)),
        (KypForm::SkypQXX, Some(min_eig(&hermitian_part(&skypqxx))?)),
        (
            KypForm::SkypQX,
            Some(min_eig(&hermitian_part(&(&short_q - &y)))?),
        ),
    ];

    let delta = hermitian_part(&(identity(m) - b.adjoint() * x * b - d.adjoint() * d));
    let ric_xx = douglas_factor(&delta, &(b.adjoint() * x * a + d.adjoint() * c), tol)
        .map(|k| norm(&(x - a.adjoint() * x * a - c.adjoint() * c - k.adjoint() * k)));
    let eps = hermitian_part(&(identity(dd) - p.f_c.adjoint() * x * &p.f_c));
    let ric_qxxx = douglas_factor(&eps, &(p.f_c.adjoint() * x * &p.s), tol)
        .map(|k| norm(&(x - &p.gg - p.s.adjoint() * x * &p.s - k.adjoint() * k)));
    let residuals = vec![
        (RiccatiForm::RicXX, ric_xx),
        (RiccatiForm::RicX, Some(norm(&(&y - &short_t)))),
        (RiccatiForm::RicQX, Some(norm(&(&y - &short_q)))),
        (RiccatiForm::RicQXXX, ric_qxxx),
        (RiccatiForm::RicShortX, shortx.map(|rhs| norm(&(x - rhs)))),
    ];

    let verdicts: Vec<bool> = margins
        .iter()
        .filter_map(|(_, mg)| mg.map(|v| v >= -tol.psd_tol))
        .collect();
    let feasible = verdicts.iter().all(|&v| v);
    let consistent = verdicts.windows(2).all(|w| w[0] == w[1]);
    let defined: Vec<f64> = residuals.iter().filter_map(|(_, r)| *r).collect();
    let lo = defined.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = defined.iter().cloned().fold(0.0, f64::max);
    let riccati_consistent = !(lo < tol.psd_tol && hi > 100.0 * tol.psd_tol);

    Ok(KypReport {
        margins,
        residuals,
        kernel_trivial: candidate.kernel_trivial,
        feasible,
        consistent,
        riccati_consistent,
        psd_tol: tol.psd_tol,
    })
}

/// Margin of `I - X ≤ S* (I - X)_K S` with `K = ker F*`, valid when the
/// parameter contraction `Q = [[S, F], [G, 0]]` is isometric.
pub fn isometric_q_margin(
    q_system: &SystemRealization,
    candidate: &KypCandidate,
    tol: &Tolerances,
) -> Result<f64> {
    check_dims(q_system, candidate)?;
    let q = q_system.assembled();
    let gap = norm(&(identity(q.ncols()) - q.adjoint() * &q));
    if gap > tol.zero_tol() {
        return Err(KypError::InvalidInput(format!(
            "parameter contraction is not isometric (‖I - Q*Q‖ = {gap:e})"
        )));
    }
    let h = q_system.state_dim();
    let f = q_system.b();
    let ker_fs = crate::numerics::orthogonal_complement(&range_basis(f, tol), h, tol);
    let k = Subspace::from_orthonormal(ker_fs, tol)?;
    let s = q_system.a();
    let short = shorted_complement(candidate.x(), &k, tol)?;
    min_eig(&hermitian_part(
        &(s.adjoint() * short * s - (identity(h) - candidate.x())),
    ))
}

/// Bounds on solutions of the KYP inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBounds {
    /// Every solution satisfies `X ≥ I - (D²_{P_N T})_H = G*G`.
    pub lower: CMatrix,
    pub observable: bool,
    /// For observable systems every `X` in `[I - (D²_T)_H, I]` is a solution.
    pub interval_lower: Option<CMatrix>,
    /// `I - (D²_{P_N T})_H`, the minimal solution, when it is certified by
    /// `(D²_T)_H = (D²_{P_N T})_H` on an observable system.
    pub exact_min: Option<CMatrix>,
}

pub fn solution_bounds(tau: &SystemRealization, tol: &Tolerances) -> Result<SolutionBounds> {
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    let sd = shorted_defects(&t, tol)?;
    let h = tau.state_dim();
    let observable = crate::system::classify(tau, tol).observable;
    let lower = identity(h) - &sd.pn_t_h;
    let interval_lower = observable.then(|| identity(h) - &sd.t_h);
    let exact_min =
        (observable && norm(&(&sd.t_h - &sd.pn_t_h)) <= tol.zero_tol()).then(|| lower.clone());
    Ok(SolutionBounds {
        lower,
        observable,
        interval_lower,
        exact_min,
    })
}

/// Verdicts of the uniqueness and optimality conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub defects: ShortedDefects,
    /// `(D²_T)_H = 0` and `ran (D²_{P_N T})_H^{1/2} ∩ ran (D²_{P_M T*})_H^{1/2}
    /// ⊂ ran (D²_{T*})_H^{1/2}`.
    pub uniqq: bool,
    /// `(D²_T)_H = (D²_{T*})_H = 0` and the same intersection is trivial.
    pub uniq1: bool,
    /// `(D²_T)_H = 0`, necessary for optimality of a minimal system.
    pub nesopt: bool,
    /// `(D²_{P_N T})_H = 0`, which pins the only solution to `X = I`.
    pub sufficient_optimality: bool,
    /// The same three conditions written with ranges of defect operators.
    pub range_uniqq: bool,
    pub range_uniq1: bool,
    pub range_nesopt: bool,
    /// Shorted-operator and range forms give the same verdicts.
    pub agreement: bool,
}

/// Basis, in state coordinates, of `ran D ∩ H` for a PSD square `D` acting
/// on `H ⊕ E` with `dim H = h`.
fn range_meets_state(d: &CMatrix, h: usize, tol: &Tolerances) -> Result<CMatrix> {
    let ran = range_basis(d, tol);
    let state = Subspace::leading(d.nrows(), h);
    let meet = range_intersection(&ran, state.basis(), tol)?;
    Ok(range_basis(&leading(&meet, h, meet.ncols()), tol))
}

fn included(sub: &CMatrix, sup: &CMatrix, tol: &Tolerances) -> bool {
    sub.ncols() == 0 || projection_residual(sub, sup) <= tol.range_tol()
}

pub fn uniqueness_report(tau: &SystemRealization, tol: &Tolerances) -> Result<UniquenessReport> {
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    let sd = shorted_defects(&t, tol)?;
    let h = tau.state_dim();
    let zero = |m: &CMatrix| norm(m) <= tol.zero_tol();

    let ran_pn = support_basis(&sd.pn_t_h, tol)?;
    let ran_pm = support_basis(&sd.pm_ts_k, tol)?;
    let ran_ts = support_basis(&sd.ts_k, tol)?;
    let meet = range_intersection(&ran_pn, &ran_pm, tol)?;
    let nesopt = zero(&sd.t_h);
    let uniqq = nesopt && included(&meet, &ran_ts, tol);
    let uniq1 = nesopt && zero(&sd.ts_k) && meet.ncols() == 0;

    let full = t.assembled();
    let (k, m, n) = (h, tau.input_dim(), tau.output_dim());
    let d_t = defect_operator(&full, tol)?;
    let d_ts = defect_operator(&full.adjoint(), tol)?;
    let lower = CMatrix::from_fn(n, h + m, |i, j| full[(k + i, j)]);
    let d_pn = defect_operator(&lower, tol)?;
    let right = CMatrix::from_fn(k + n, m, |i, j| full[(i, h + j)]);
    let d_pm = defect_operator(&right.adjoint(), tol)?;
    let r_t = range_meets_state(&d_t, h, tol)?;
    let r_ts = range_meets_state(&d_ts, h, tol)?;
    let r_pn = range_meets_state(&d_pn, h, tol)?;
    let r_pm = range_meets_state(&d_pm, h, tol)?;
    let r_meet = range_intersection(&r_pn, &r_pm, tol)?;
    let range_nesopt = r_t.ncols() == 0;
    let range_uniqq = range_nesopt && included(&r_meet, &r_ts, tol);
    let range_uniq1 = range_nesopt && r_ts.ncols() == 0 && r_meet.ncols() == 0;

    Ok(UniquenessReport {
        sufficient_optimality: zero(&sd.pn_t_h),
        agreement: uniqq == range_uniqq && uniq1 == range_uniq1 && nesopt == range_nesopt,
        defects: sd,
        uniqq,
        uniq1,
        nesopt,
        range_uniqq,
        range_uniq1,
        range_nesopt,
    })
}

/// `is_psd` of `L_τ(X)`, a convenience for callers that only need the verdict.
pub fn is_feasible(tau: &SystemRealization, x: &KypCandidate, tol: &Tolerances) -> Result<bool> {
    Ok(is_psd(&kyp_matrix(tau, x)?, tol)?.psd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::Blocks;
    use crate::numerics::{from_real, scalar};
    use crate::random::{contraction, isometry, seeded, unit_interval_operator};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sys(a: f64, b: f64, c: f64, d: f64) -> SystemRealization {
        SystemRealization::from_parts(scalar(a), scalar(b), scalar(c), scalar(d), "s").unwrap()
    }

    fn fix_a() -> SystemRealization {
        sys(0.0, 1.0, 1.0, 0.0)
    }

    fn fix_b() -> SystemRealization {
        let h = 0.5f64.sqrt();
        sys(0.5, h, h, 0.0)
    }

    fn fix_c() -> SystemRealization {
        sys(0.8 * 0.91f64.sqrt(), 0.6, 0.3, 0.0)
    }

    fn cand(v: f64) -> KypCandidate {
        KypCandidate::new(scalar(v), &tol()).unwrap()
    }

    #[test]
    fn unit_interval_checks() {
        assert!(check_unit_interval(&scalar(0.5), &tol()).is_ok());
        assert!(matches!(
            check_unit_interval(&scalar(1.2), &tol()),
            Err(KypError::OutsideUnitInterval { .. })
        ));
        assert!(check_unit_interval(&zeros(0, 0), &tol()).is_ok());
        assert!(!cand(0.0).kernel_trivial);
    }

    #[test]
    fn kyp_matrix_examples() {
        let a = kyp_matrix(&fix_a(), &cand(1.0)).unwrap();
        assert!(norm(&a) < 1e-15);
        let check = is_psd(&a, &tol()).unwrap();
        assert!(check.psd && check.margin.abs() < 1e-15);

        let b = eigh(&kyp_matrix(&fix_b(), &cand(1.0)).unwrap()).unwrap();
        assert!(b.values[0].abs() < 1e-12 && (b.values[1] - 0.75).abs() < 1e-12);

        let c = eigh(&kyp_matrix(&fix_c(), &cand(0.25)).unwrap()).unwrap();
        assert!(c.values[0].abs() < 1e-10);

        assert!(matches!(
            kyp_matrix(&fix_a(), &KypCandidate::identity(2)),
            Err(KypError::Dimension(_))
        ));
    }

    #[test]
    fn forms_at_fixture_points() {
        let b = evaluate_forms(&fix_b(), &cand(1.0), &tol()).unwrap();
        assert!(b.feasible && b.consistent && b.riccati_consistent);
        assert_eq!(b.defined_residuals(), 5);
        assert!(b.max_residual() < 1e-10);

        let c = evaluate_forms(&fix_c(), &cand(0.25), &tol()).unwrap();
        assert!(c.feasible && c.consistent);
        assert!(c.max_residual() < 1e-10, "{c:?}");

        let bad = evaluate_forms(&fix_c(), &cand(0.1), &tol()).unwrap();
        assert!(!bad.feasible && bad.consistent);
        for (_, m) in &bad.margins {
            assert!(m.unwrap() < 0.0);
        }
    }

    #[test]
    fn scalar_riccati_map_matches_shortx() {
        // g(x) = 0.09 + 0.5824 x / (1 - 0.36 x)
        let g = |x: f64| 0.09 + 0.5824 * x / (1.0 - 0.36 * x);
        assert!((g(0.1) - 0.15042).abs() < 1e-5);
        let r = evaluate_forms(&fix_c(), &cand(0.1), &tol()).unwrap();
        assert!((r.margin(KypForm::ShortX).unwrap() - (0.1 - g(0.1))).abs() < 1e-12);
    }

    #[test]
    fn identity_is_always_feasible() {
        let mut rng = seeded(12);
        for _ in 0..10 {
            let t = contraction(&mut rng, 5, 5, 0.97);
            let tau = SystemRealization::new(Blocks::split(&t, 3, 3), "r").unwrap();
            let r = evaluate_forms(&tau, &KypCandidate::identity(3), &tol()).unwrap();
            assert!(r.feasible && r.consistent);
        }
    }

    #[test]
    fn random_candidates_agree() {
        let mut rng = seeded(40);
        for _ in 0..20 {
            let t = contraction(&mut rng, 5, 5, 0.9);
            let tau = SystemRealization::new(Blocks::split(&t, 3, 3), "r").unwrap();
            let x =
                KypCandidate::new(unit_interval_operator(&mut rng, 3, 0.05, 1.0), &tol()).unwrap();
            let r = evaluate_forms(&tau, &x, &tol()).unwrap();
            assert!(r.consistent, "{r:?}");
        }
    }

    #[test]
    fn isometric_q_form_matches_shortx() {
        let mut rng = seeded(3);
        // h = 3, F isometry C -> C^3, G = [I_2 0] scaled, L: 𝔇_G -> ker F*
        let f = isometry(&mut rng, 3, 1);
        let g = from_real(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.6, 0.0]);
        let d_g = defect_operator(&g, &tol()).unwrap();
        let ker = crate::numerics::orthogonal_complement(&f, 3, &tol());
        let dg_basis = range_basis(&d_g, &tol());
        let l = &ker * isometry(&mut rng, 2, dg_basis.ncols()) * dg_basis.adjoint();
        let s = (identity(3) - &f * f.adjoint()) * l * &d_g;
        let q = SystemRealization::from_parts(s, f, g, zeros(2, 1), "q").unwrap();
        for _ in 0..5 {
            let x =
                KypCandidate::new(unit_interval_operator(&mut rng, 3, 0.1, 1.0), &tol()).unwrap();
            let iso = isometric_q_margin(&q, &x, &tol()).unwrap();
            let r = evaluate_forms(&q, &x, &tol()).unwrap();
            assert_eq!(iso >= -1e-10, r.verdict(KypForm::ShortX).unwrap());
        }
    }

    #[test]
    fn bounds_examples() {
        let a = solution_bounds(&fix_a(), &tol()).unwrap();
        assert!((a.lower[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((a.exact_min.unwrap()[(0, 0)].re - 1.0).abs() < 1e-12);

        let b = solution_bounds(&fix_b(), &tol()).unwrap();
        assert!((b.lower[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((b.interval_lower.unwrap()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(b.exact_min.is_none());

        let c = solution_bounds(&fix_c(), &tol()).unwrap();
        assert!((c.lower[(0, 0)].re - 0.09).abs() < 1e-12);
        assert!((c.interval_lower.unwrap()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniqueness_examples() {
        let a = uniqueness_report(&fix_a(), &tol()).unwrap();
        assert!(a.uniq1 && a.uniqq && a.nesopt && a.sufficient_optimality && a.agreement);

        let b = uniqueness_report(&fix_b(), &tol()).unwrap();
        assert!(!b.uniqq && !b.uniq1 && b.nesopt && b.agreement);

        let c = uniqueness_report(&fix_c(), &tol()).unwrap();
        assert!(c.nesopt && !c.sufficient_optimality && c.agreement);
    }
}
