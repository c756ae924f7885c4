//! Worked examples at arbitrary dimension.
//!
//! * EX1: `ν = [[D_{F*} D_G, F], [G, 0]]` with `G*G = α FF*`. Its minimal
//!   solution is `αI`, while the adjoint system has minimal solution `I`.
//! * EX2: `ν = [[(1-α) L, F], [G, 0]]` with `G*G = FF* = αI` and `L`
//!   unitary. The only solution is `I`, reached sublinearly.
//! * FIX-A: the flip `[[0, 1], [1, 0]]`.
//! * FIX-B: EX2 with `n_H = 1`, `α = 1/2`, `L = 1`.
//! * FIX-C: EX1 with `n_H = 1`, `F = 0.6`, `α = 1/4`.

use crate::error::{KypError, Result};
use crate::numerics::{cplx, identity, psd_sqrt, scalar, zeros, CMatrix, Tolerances};
use crate::random::{contraction, isometry, seeded, uniform, unitary};
use crate::system::{classify, SystemRealization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Ex1,
    Ex2,
    FixA,
    FixB,
    FixC,
    ScalarGeneric,
}

impl FixtureKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ex1" => Some(Self::Ex1),
            "ex2" => Some(Self::Ex2),
            "fix-a" | "fixa" => Some(Self::FixA),
            "fix-b" | "fixb" => Some(Self::FixB),
            "fix-c" | "fixc" => Some(Self::FixC),
            "scalar-generic" | "scalar" => Some(Self::ScalarGeneric),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    /// `(dim H, dim M, dim N)`.
    pub dims: (usize, usize, usize),
    pub alpha: f64,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<SystemRealization> {
        let (h, m, n) = self.dims;
        match self.kind {
            FixtureKind::Ex1 => build_ex1_dims(h, m, n, self.alpha, self.seed, tol),
            FixtureKind::Ex2 => build_ex2_dims(h, m, n, self.alpha, self.seed, tol),
            FixtureKind::FixA => Ok(fix_a()),
            FixtureKind::FixB => Ok(fix_b()),
            FixtureKind::FixC => Ok(fix_c()),
            FixtureKind::ScalarGeneric => Ok(scalar_generic(self.seed)),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(KypError::InvalidInput(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn require_minimal(tau: SystemRealization, tol: &Tolerances) -> Result<SystemRealization> {
    let cls = classify(&tau, tol);
    if !cls.passive {
        return Err(KypError::NotContractive { norm: cls.norm });
    }
    if !cls.minimal {
        return Err(KypError::NotMinimal {
            controllable: cls.controllable,
            observable: cls.observable,
        });
    }
    Ok(tau)
}

pub fn fix_a() -> SystemRealization {
    SystemRealization::from_parts(scalar(0.0), scalar(1.0), scalar(1.0), scalar(0.0), "FIX-A")
        .expect("scalar blocks")
}

pub fn fix_b() -> SystemRealization {
    let r = 0.5f64.sqrt();
    SystemRealization::from_parts(scalar(0.5), scalar(r), scalar(r), scalar(0.0), "FIX-B")
        .expect("scalar blocks")
}

pub fn fix_c() -> SystemRealization {
    SystemRealization::from_parts(
        scalar(0.8 * 0.91f64.sqrt()),
        scalar(0.6),
        scalar(0.3),
        scalar(0.0),
        "FIX-C",
    )
    .expect("scalar blocks")
}

/// A seeded scalar passive system with norm 0.9.
pub fn scalar_generic(seed: u64) -> SystemRealization {
    let mut rng = seeded(seed);
    let t = contraction(&mut rng, 2, 2, 0.9);
    SystemRealization::new(
        crate::contraction::Blocks::split(&t, 1, 1),
        "scalar-generic",
    )
    .expect("2x2 split")
}

/// EX2 with explicit operators: `G = √α V`, `F = √α W*`, `L` unitary.
pub fn ex2_from(
    v: &CMatrix,
    w: &CMatrix,
    l: &CMatrix,
    alpha: f64,
    tol: &Tolerances,
) -> Result<SystemRealization> {
    check_alpha(alpha)?;
    let h = l.nrows();
    if v.ncols() != h || w.ncols() != h || l.ncols() != h {
        return Err(KypError::Dimension(format!(
            "EX2 operators V {:?}, W {:?}, L {:?}",
            v.shape(),
            w.shape(),
            l.shape()
        )));
    }
    let s = alpha.sqrt();
    let tau = SystemRealization::from_parts(
        l.scale(1.0 - alpha),
        w.adjoint().scale(s),
        v.scale(s),
        zeros(v.nrows(), w.nrows()),
        "EX2",
    )?;
    require_minimal(tau, tol)
}

pub fn build_ex2_dims(
    h: usize,
    m: usize,
    n: usize,
    alpha: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<SystemRealization> {
    check_alpha(alpha)?;
    if m < h || n < h {
        return Err(KypError::Dimension(format!(
            "EX2 needs dim M ≥ dim H and dim N ≥ dim H, got ({h}, {m}, {n})"
        )));
    }
    let mut rng = seeded(seed);
    let v = isometry(&mut rng, n, h);
    let w = isometry(&mut rng, m, h);
    let l = unitary(&mut rng, h);
    ex2_from(&v, &w, &l, alpha, tol)
}

pub fn build_ex2(h: usize, alpha: f64, seed: u64, tol: &Tolerances) -> Result<SystemRealization> {
    build_ex2_dims(h, h, h, alpha, seed, tol)
}

/// EX1 with explicit `F` and isometry `U : H → N`; `G = √α U (FF*)^{1/2}`.
pub fn ex1_from(
    f: &CMatrix,
    u: &CMatrix,
    alpha: f64,
    tol: &Tolerances,
) -> Result<SystemRealization> {
    check_alpha(alpha)?;
    let h = f.nrows();
    if u.ncols() != h {
        return Err(KypError::Dimension(format!(
            "EX1 isometry of shape {:?} for dim H = {h}",
            u.shape()
        )));
    }
    let ff = f * f.adjoint();
    let sv = crate::numerics::svd(f).singular_values;
    if sv.len() < h || sv.iter().any(|&s| s >= 1.0 || s <= tol.rank_tol) {
        return Err(KypError::InvalidInput(
            "EX1 needs a strict contraction F with ker F* = {0}".into(),
        ));
    }
    let g = u * psd_sqrt(&ff, tol)?.scale(alpha.sqrt());
    let d_fs = psd_sqrt(&(identity(h) - &ff), tol)?;
    let d_g = psd_sqrt(&(identity(h) - ff.scale(alpha)), tol)?;
    let tau = SystemRealization::from_parts(
        d_fs * d_g,
        f.clone(),
        g,
        zeros(u.nrows(), f.ncols()),
        "EX1",
    )?;
    require_minimal(tau, tol)
}

pub fn build_ex1_dims(
    h: usize,
    m: usize,
    n: usize,
    alpha: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<SystemRealization> {
    if m < h || n < h {
        return Err(KypError::Dimension(format!(
            "EX1 needs dim M ≥ dim H and dim N ≥ dim H, got ({h}, {m}, {n})"
        )));
    }
    let mut rng = seeded(seed);
    let left = unitary(&mut rng, h);
    let right = isometry(&mut rng, m, h);
    let mut s = CMatrix::zeros(h, h);
    for i in 0..h {
        s[(i, i)] = cplx(uniform(&mut rng, 0.3, 0.9));
    }
    let f = left * s * right.adjoint();
    let u = isometry(&mut rng, n, h);
    ex1_from(&f, &u, alpha, tol)
}

pub fn build_ex1(h: usize, alpha: f64, seed: u64, tol: &Tolerances) -> Result<SystemRealization> {
    build_ex1_dims(h, h, h, alpha, seed, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kyp::uniqueness_report;
    use crate::numerics::{from_real, norm};
    use crate::solver::solve_min;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn scalar_fixtures_match_closed_forms() {
        let c = ex1_from(&scalar(0.6), &scalar(1.0), 0.25, &tol()).unwrap();
        assert!(norm(&(c.assembled() - fix_c().assembled())) < 1e-15);

        let b = ex2_from(&scalar(1.0), &scalar(1.0), &scalar(1.0), 0.5, &tol()).unwrap();
        assert!(norm(&(b.assembled() - fix_b().assembled())) < 1e-15);

        let seeded_b = build_ex2(1, 0.5, 3, &tol()).unwrap();
        let moduli = |s: &SystemRealization| s.assembled().map(|z| z.norm());
        assert!(norm(&(moduli(&seeded_b) - moduli(&fix_b())).map(crate::numerics::cplx)) < 1e-14);
    }

    #[test]
    fn ex2_identities() {
        let tau = build_ex2_dims(3, 4, 5, 0.5, 11, &tol()).unwrap();
        let g = tau.c();
        let f = tau.b();
        assert!(norm(&(g.adjoint() * g - identity(3).scale(0.5))) < 1e-13);
        assert!(norm(&(f * f.adjoint() - identity(3).scale(0.5))) < 1e-13);
        let u = uniqueness_report(&tau, &tol()).unwrap();
        assert!(!u.uniqq);
    }

    #[test]
    fn ex1_matrix_fixture() {
        let f = from_real(2, 2, &[0.6, 0.0, 0.0, 0.3]);
        let tau = ex1_from(&f, &identity(2), 0.25, &tol()).unwrap();
        let (x, _) = solve_min(&tau, &tol()).unwrap();
        assert!(norm(&(x.x() - identity(2).scale(0.25))) < 1e-8);
        let u = uniqueness_report(&tau, &tol()).unwrap();
        assert!(u.nesopt && !u.sufficient_optimality);
    }

    #[test]
    fn constraint_violations() {
        assert!(build_ex2_dims(3, 2, 3, 0.5, 1, &tol()).is_err());
        assert!(build_ex1(2, 1.5, 1, &tol()).is_err());
        assert!(ex1_from(&scalar(1.0), &scalar(1.0), 0.5, &tol()).is_err());
    }

    #[test]
    fn spec_dispatch() {
        let spec = FixtureSpec {
            kind: FixtureKind::parse("EX1").unwrap(),
            dims: (2, 3, 2),
            alpha: 0.25,
            seed: 4,
        };
        let tau = spec.build(&tol()).unwrap();
        assert_eq!(
            (tau.state_dim(), tau.input_dim(), tau.output_dim()),
            (2, 3, 2)
        );
        assert!(FixtureKind::parse("nope").is_none());
    }
}
