//! Kreĭn shorted operators `S_K` of a PSD operator to a subspace.
//!
//! Three routes are provided and checked against each other in the tests:
//! the Schur complement with a Moore–Penrose inverse ([`shorted`]), Kreĭn's
//! range formula `S^{1/2} P_Ω S^{1/2}` ([`shorted_oracle`]), and the closed
//! form for `(I - X)_K` in terms of `X` ([`shorted_complement`]).

use crate::error::{KypError, Result};
use crate::numerics::{
    identity, is_psd, orthogonal_complement, pinv, projection_residual, projector, psd_sqrt,
    range_basis, zeros, CMatrix, Tolerances,
};

/// A subspace `K` of `C^ambient_dim`, carried as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Span of the columns of `spanning`; the basis is re-orthonormalized.
    pub fn span(spanning: &CMatrix, tol: &Tolerances) -> Self {
        Self {
            ambient_dim: spanning.nrows(),
            basis: range_basis(spanning, tol),
        }
    }

    /// Takes an already orthonormal basis, checking `U*U = I`.
    pub fn from_orthonormal(basis: CMatrix, tol: &Tolerances) -> Result<Self> {
        let gram = basis.adjoint() * &basis;
        let k = basis.ncols();
        if k > 0 && crate::numerics::norm(&(gram - identity(k))) > tol.range_tol() {
            return Err(KypError::InvalidInput(
                "subspace basis is not orthonormal".into(),
            ));
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinates(ambient_dim: usize, indices: &[usize]) -> Self {
        Self {
            ambient_dim,
            basis: crate::numerics::coordinate_basis(ambient_dim, indices),
        }
    }

    /// The first `k` coordinates of `C^ambient_dim` (e.g. the state space
    /// inside `H ⊕ M`).
    pub fn leading(ambient_dim: usize, k: usize) -> Self {
        let idx: Vec<usize> = (0..k).collect();
        Self::coordinates(ambient_dim, &idx)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projection(&self) -> CMatrix {
        projector(&self.basis)
    }

    pub fn complement(&self, tol: &Tolerances) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            basis: orthogonal_complement(&self.basis, self.ambient_dim, tol),
        }
    }
}

/// Which formula produced a [`ShortedResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortedRoute {
    SchurComplement,
    RangeOracle,
    ComplementFormula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortedResult {
    /// `S_K` in ambient coordinates.
    pub value: CMatrix,
    pub route: ShortedRoute,
    /// Whether `ran S₁₂* ⊂ ran S₂₂^{1/2}` held numerically. Always true for
    /// routes that do not use the block split.
    pub range_condition_ok: bool,
}

impl ShortedResult {
    /// `value` restricted to `K`, in the coordinates of `K`'s basis.
    pub fn on_subspace(&self, k: &Subspace) -> CMatrix {
        k.basis().adjoint() * &self.value * k.basis()
    }
}

fn check_inputs(s: &CMatrix, k: &Subspace, tol: &Tolerances) -> Result<()> {
    if s.nrows() != s.ncols() || s.nrows() != k.ambient_dim() {
        return Err(KypError::Dimension(format!(
            "shorting a {}x{} operator to a subspace of C^{}",
            s.nrows(),
            s.ncols(),
            k.ambient_dim()
        )));
    }
    let check = is_psd(s, tol)?;
    if !check.psd {
        return Err(KypError::NotPsd {
            margin: check.margin,
        });
    }
    Ok(())
}

/// Schur-complement route.
///
/// Rotates `S` into `K ⊕ K^⊥` coordinates and forms
/// `S₁₁ - (S₂₂^{-1/2} S₁₂*)* (S₂₂^{-1/2} S₁₂*)` with a Moore–Penrose
/// `S₂₂^{-1/2}`. When the range condition `ran S₁₂* ⊂ ran S₂₂^{1/2}` fails
/// numerically the value of [`shorted_oracle`] is returned instead and
/// `range_condition_ok` is false.
pub fn shorted(s: &CMatrix, k: &Subspace, tol: &Tolerances) -> Result<ShortedResult> {
    check_inputs(s, k, tol)?;
    let kb = k.basis();
    let kp = k.complement(tol);
    let kpb = kp.basis();
    let s11 = kb.adjoint() * s * kb;
    let s12 = kb.adjoint() * s * kpb;
    let s22 = kpb.adjoint() * s * kpb;

    let root22 = psd_sqrt(&s22, tol)?;
    let s21 = s12.adjoint();
    let range22 = range_basis(&root22, tol);
    let scale = crate::numerics::norm(s).max(1.0);
    let range_condition_ok = projection_residual(&s21, &range22) <= tol.range_tol() * scale;
    if !range_condition_ok {
        let mut fallback = shorted_oracle(s, k, tol)?;
        fallback.range_condition_ok = false;
        return Ok(fallback);
    }
    let m = pinv(&root22, tol) * s21;
    let reduced = s11 - m.adjoint() * m;
    let value = crate::numerics::hermitian_part(&(kb * reduced * kb.adjoint()));
    Ok(ShortedResult {
        value,
        route: ShortedRoute::SchurComplement,
        range_condition_ok,
    })
}

/// Kreĭn's range route `S_K = S^{1/2} P_Ω S^{1/2}` with
/// `Ω = ran S ⊖ S^{1/2}(K^⊥)`.
pub fn shorted_oracle(s: &CMatrix, k: &Subspace, tol: &Tolerances) -> Result<ShortedResult> {
    check_inputs(s, k, tol)?;
    let n = s.nrows();
    let root = psd_sqrt(s, tol)?;
    let ran_s = range_basis(&root, tol);
    let kp = k.complement(tol);
    let image = range_basis(&(&root * kp.basis()), tol);
    // Ω in coordinates of ran S: complement of the image inside ran S.
    let image_coords = ran_s.adjoint() * &image;
    let omega_coords = orthogonal_complement(&image_coords, ran_s.ncols(), tol);
    let omega = &ran_s * omega_coords;
    let value = if omega.ncols() == 0 {
        zeros(n, n)
    } else {
        crate::numerics::hermitian_part(&(&root * projector(&omega) * &root))
    };
    Ok(ShortedResult {
        value,
        route: ShortedRoute::RangeOracle,
        range_condition_ok: true,
    })
}

/// `(I - X)_K` for `0 ≤ X ≤ I` through the closed form
/// `P_K - P_K (W^{-1/2} X^{1/2} P_K)* (W^{-1/2} X^{1/2} P_K)`,
/// `W = I - X^{1/2} P_{K^⊥} X^{1/2}`, with Moore–Penrose `W^{-1/2}`.
pub fn shorted_complement(x: &CMatrix, k: &Subspace, tol: &Tolerances) -> Result<CMatrix> {
    let n = x.nrows();
    if x.ncols() != n || k.ambient_dim() != n {
        return Err(KypError::Dimension(format!(
            "shorted complement of a {}x{} operator to a subspace of C^{}",
            x.nrows(),
            x.ncols(),
            k.ambient_dim()
        )));
    }
    crate::kyp::check_unit_interval(x, tol)?;
    let root = psd_sqrt(x, tol)?;
    let pk = k.projection();
    let pkp = identity(n) - &pk;
    let w = identity(n) - &root * pkp * &root;
    let w_inv_root = pinv(&psd_sqrt(&w, tol)?, tol);
    let m = w_inv_root * &root * &pk;
    Ok(crate::numerics::hermitian_part(
        &(&pk - &pk * m.adjoint() * m),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{from_real, norm, scalar};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Variational oracle: `(S_K f, f) = inf_{φ ∈ K^⊥} (S(f+φ), f+φ)` for a
    /// real 2×2 `S` and `K = span{e1}`, by grid search over `φ = t e2`.
    fn variational_2x2(s: [[f64; 2]; 2], f: f64) -> f64 {
        (-40_000..=40_000)
            .map(|i| {
                let t = i as f64 * 1e-4;
                s[0][0] * f * f + 2.0 * s[0][1] * f * t + s[1][1] * t * t
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn schur_route_matches_grid_oracle() {
        let grid = variational_2x2([[2.0, 1.0], [1.0, 1.0]], 1.0);
        assert!((grid - 1.0).abs() < 1e-6);
        let s = from_real(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let k = Subspace::coordinates(2, &[0]);
        let r = shorted(&s, &k, &tol()).unwrap();
        assert_eq!(r.route, ShortedRoute::SchurComplement);
        assert!(r.range_condition_ok);
        assert!(norm(&(r.value - from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]))) < 1e-12);
    }

    #[test]
    fn identity_shorts_to_projection() {
        let k = Subspace::span(&from_real(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]), &tol());
        let r = shorted(&identity(3), &k, &tol()).unwrap();
        assert!(norm(&(r.value - k.projection())) < 1e-12);
        let o = shorted_oracle(&identity(3), &k, &tol()).unwrap();
        assert!(norm(&(o.value - k.projection())) < 1e-12);
    }

    #[test]
    fn trivial_intersection_gives_zero() {
        // rank one onto (e1+e2)/√2; ran S ∩ span{e1} = {0}
        let s = from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let k = Subspace::coordinates(2, &[0]);
        for r in [
            shorted(&s, &k, &tol()).unwrap(),
            shorted_oracle(&s, &k, &tol()).unwrap(),
        ] {
            assert!(norm(&r.value) < 1e-12);
        }
    }

    #[test]
    fn oracle_examples() {
        let s = from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let k = Subspace::coordinates(3, &[0, 2]);
        let expect = from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(norm(&(shorted_oracle(&s, &k, &tol()).unwrap().value - &expect)) < 1e-12);
        assert!(norm(&(shorted(&s, &k, &tol()).unwrap().value - &expect)) < 1e-12);
        let z = shorted_oracle(&zeros(3, 3), &k, &tol()).unwrap();
        assert!(norm(&z.value) == 0.0);
    }

    #[test]
    fn complement_formula_examples() {
        let k = Subspace::coordinates(2, &[0]);
        let at_zero = shorted_complement(&zeros(2, 2), &k, &tol()).unwrap();
        assert!(norm(&(at_zero - k.projection())) < 1e-12);
        let at_one = shorted_complement(&identity(2), &k, &tol()).unwrap();
        assert!(norm(&at_one) < 1e-12);
        let x = from_real(2, 2, &[0.25, 0.0, 0.0, 0.5]);
        let v = shorted_complement(&x, &k, &tol()).unwrap();
        assert!(norm(&(v - from_real(2, 2, &[0.75, 0.0, 0.0, 0.0]))) < 1e-12);
    }

    #[test]
    fn errors() {
        let k = Subspace::coordinates(2, &[0]);
        assert!(matches!(
            shorted(&from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]), &k, &tol()),
            Err(KypError::NotPsd { .. })
        ));
        assert!(matches!(
            shorted(&identity(3), &k, &tol()),
            Err(KypError::Dimension(_))
        ));
        assert!(shorted_complement(&scalar(2.0), &Subspace::coordinates(1, &[0]), &tol()).is_err());
    }

    #[test]
    fn aligned_range_is_fixed() {
        let s = from_real(3, 3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let k = Subspace::coordinates(3, &[0, 1]);
        let r = shorted(&s, &k, &tol()).unwrap();
        assert!(norm(&(r.value - s)) < 1e-12);
    }

    #[test]
    fn full_and_empty_subspaces() {
        let s = from_real(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let all = Subspace::coordinates(2, &[0, 1]);
        assert!(norm(&(shorted(&s, &all, &tol()).unwrap().value - &s)) < 1e-12);
        let none = Subspace::coordinates(2, &[]);
        assert!(norm(&shorted(&s, &none, &tol()).unwrap().value) < 1e-12);
        assert!(norm(&shorted_oracle(&s, &none, &tol()).unwrap().value) < 1e-12);
    }
}
