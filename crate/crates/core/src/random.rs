//! Seeded random matrices for fixtures and tests.
//!
//! Unitaries and isometries come from the QR factorization of complex
//! Gaussian matrices with the phases of `R`'s diagonal folded into `Q`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{cplx, svd, CMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn real_gaussian(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| cplx(rng.sample(StandardNormal)))
}

pub fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn isometry(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
    assert!(
        rows >= cols,
        "an isometry C^{cols} -> C^{rows} needs rows >= cols"
    );
    if cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let qr = gaussian(rng, rows, cols).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

pub fn unitary(rng: &mut SeededRng, n: usize) -> CMatrix {
    isometry(rng, n, n)
}

/// Contraction with prescribed operator norm: `U diag(s) V*` with
/// `s₁ = norm` and the remaining singular values uniform in `[0, norm]`.
pub fn contraction(rng: &mut SeededRng, rows: usize, cols: usize, norm: f64) -> CMatrix {
    let k = rows.min(cols);
    if k == 0 {
        return CMatrix::zeros(rows, cols);
    }
    let u = isometry(rng, rows, k);
    let v = isometry(rng, cols, k);
    let mut s = CMatrix::zeros(k, k);
    s[(0, 0)] = cplx(norm);
    for i in 1..k {
        s[(i, i)] = cplx(uniform(rng, 0.0, norm));
    }
    u * s * v.adjoint()
}

/// Random matrix rescaled to the given spectral norm.
pub fn scaled(rng: &mut SeededRng, rows: usize, cols: usize, norm: f64) -> CMatrix {
    let g = gaussian(rng, rows, cols);
    let s = svd(&g).singular_values.first().copied().unwrap_or(0.0);
    if s == 0.0 {
        g
    } else {
        g.scale(norm / s)
    }
}

/// PSD matrix of the given rank with eigenvalues of order one.
pub fn psd(rng: &mut SeededRng, n: usize, rank: usize) -> CMatrix {
    let g = gaussian(rng, n, rank);
    let m = &g * g.adjoint();
    (&m + m.adjoint()).scale(0.5)
}

/// Hermitian `0 ≤ X ≤ I` with eigenvalues uniform in `[lo, hi]`.
pub fn unit_interval_operator(rng: &mut SeededRng, n: usize, lo: f64, hi: f64) -> CMatrix {
    let u = unitary(rng, n);
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = cplx(uniform(rng, lo, hi));
    }
    let m = &u * d * u.adjoint();
    (&m + m.adjoint()).scale(0.5)
}

pub fn vector(rng: &mut SeededRng, n: usize) -> CMatrix {
    gaussian(rng, n, 1)
}
