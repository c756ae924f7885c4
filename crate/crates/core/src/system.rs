//! Discrete time-invariant systems `x' = Ax + Bu`, `y = Cx + Du`.

use num_complex::Complex64;

use crate::contraction::{defect_data, Blocks};
use crate::error::{KypError, Result};
use crate::numerics::{
    defect_operator, identity, norm, range_basis, rank, solve, CMatrix, Tolerances,
};

/// A system `τ = {[[A, B], [C, D]]; H, M, N}` with a square state block.
///
/// Contractivity is not enforced here; passive-only operations check it.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRealization {
    pub blocks: Blocks,
    pub label: String,
}

impl SystemRealization {
    pub fn new(blocks: Blocks, label: impl Into<String>) -> Result<Self> {
        if blocks.dim_h() != blocks.dim_k() {
            return Err(KypError::NotSquare {
                rows: blocks.dim_k(),
                cols: blocks.dim_h(),
            });
        }
        Ok(Self {
            blocks,
            label: label.into(),
        })
    }

    pub fn from_parts(
        a: CMatrix,
        b: CMatrix,
        c: CMatrix,
        d: CMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::new(Blocks::new(a, b, c, d)?, label)
    }

    pub fn a(&self) -> &CMatrix {
        &self.blocks.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.blocks.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.blocks.c
    }

    pub fn d(&self) -> &CMatrix {
        &self.blocks.d
    }

    pub fn state_dim(&self) -> usize {
        self.blocks.dim_h()
    }

    pub fn input_dim(&self) -> usize {
        self.blocks.dim_m()
    }

    pub fn output_dim(&self) -> usize {
        self.blocks.dim_n()
    }

    pub fn assembled(&self) -> CMatrix {
        self.blocks.assembled()
    }

    pub fn is_passive(&self, tol: &Tolerances) -> bool {
        self.blocks.is_contraction(tol)
    }

    /// Fails with [`KypError::NotContractive`] unless the system is passive.
    pub fn require_passive(&self, tol: &Tolerances) -> Result<()> {
        let n = self.blocks.norm();
        if n > 1.0 + tol.psd_tol {
            return Err(KypError::NotContractive { norm: n });
        }
        Ok(())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Structural flags of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub passive: bool,
    pub isometric: bool,
    pub coisometric: bool,
    pub conservative: bool,
    pub controllable: bool,
    pub observable: bool,
    pub simple: bool,
    pub minimal: bool,
    pub norm: f64,
    pub controllable_basis: CMatrix,
    pub observable_basis: CMatrix,
}

/// Orthonormal basis of `span{ran Aⁿ R : n < dim}`.
fn krylov_span(a: &CMatrix, r: &CMatrix, tol: &Tolerances) -> CMatrix {
    let n = a.nrows();
    let mut basis = range_basis(r, tol);
    for _ in 1..n.max(1) {
        if basis.ncols() == n || basis.ncols() == 0 {
            break;
        }
        let next = a * &basis;
        let joined = CMatrix::from_fn(n, basis.ncols() * 2, |i, j| {
            if j < basis.ncols() {
                basis[(i, j)]
            } else {
                next[(i, j - basis.ncols())]
            }
        });
        let grown = range_basis(&joined, tol);
        if grown.ncols() == basis.ncols() {
            break;
        }
        basis = grown;
    }
    basis
}

/// Bases of the controllable and observable subspaces.
pub fn krylov_subspaces(tau: &SystemRealization, tol: &Tolerances) -> (CMatrix, CMatrix) {
    let ctrl = krylov_span(tau.a(), tau.b(), tol);
    let obs = krylov_span(&tau.a().adjoint(), &tau.c().adjoint(), tol);
    (ctrl, obs)
}

pub fn classify(tau: &SystemRealization, tol: &Tolerances) -> Classification {
    let t = tau.assembled();
    let n = norm(&t);
    let passive = n <= 1.0 + tol.psd_tol;
    let h = tau.state_dim();
    let (ctrl, obs) = krylov_subspaces(tau, tol);
    let vanishes = |m: &CMatrix| {
        defect_operator(m, tol)
            .map(|d| norm(&d) < tol.psd_tol)
            .unwrap_or(false)
    };
    let isometric = vanishes(&t);
    let coisometric = vanishes(&t.adjoint());
    let joined = CMatrix::from_fn(h, ctrl.ncols() + obs.ncols(), |i, j| {
        if j < ctrl.ncols() {
            ctrl[(i, j)]
        } else {
            obs[(i, j - ctrl.ncols())]
        }
    });
    let controllable = ctrl.ncols() == h;
    let observable = obs.ncols() == h;
    Classification {
        passive,
        isometric,
        coisometric,
        conservative: isometric && coisometric,
        controllable,
        observable,
        simple: rank(&joined, tol) == h,
        minimal: controllable && observable,
        norm: n,
        controllable_basis: ctrl,
        observable_basis: obs,
    }
}

/// `Θ(λ) = D + λ C (I - λA)^{-1} B`.
pub fn transfer_eval(tau: &SystemRealization, lambda: Complex64) -> Result<CMatrix> {
    let h = tau.state_dim();
    let resolvent = identity(h) - tau.a() * lambda;
    let x = solve(&resolvent, tau.b(), "transfer function resolvent I - λA")?;
    Ok(tau.d() + tau.c() * x * lambda)
}

/// `τ* = {[[A*, C*], [B*, D*]]; H, N, M}`.
pub fn adjoint(tau: &SystemRealization) -> SystemRealization {
    SystemRealization {
        blocks: tau.blocks.adjoint(),
        label: format!("{}*", tau.label),
    }
}

/// The conservative system `{[[A, D_{A*}], [D_A, -A*]]; H, 𝔇_{A*}, 𝔇_A}`
/// whose transfer function is the characteristic function of `A`.
///
/// The defect blocks are written in orthonormal coordinates of `𝔇_{A*}`
/// and `𝔇_A`.
pub fn characteristic_system(a: &CMatrix, tol: &Tolerances) -> Result<SystemRealization> {
    if a.nrows() != a.ncols() {
        return Err(KypError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = norm(a);
    if n > 1.0 + tol.psd_tol {
        return Err(KypError::NotContractive { norm: n });
    }
    let dd = defect_data(a, tol)?;
    let (u, us) = (&dd.defect_basis, &dd.codefect_basis);
    let tau = SystemRealization::from_parts(
        a.clone(),
        &dd.codefect * us,
        u.adjoint() * &dd.defect,
        -(u.adjoint() * a.adjoint() * us),
        "characteristic",
    )?;
    let cls = classify(&tau, tol);
    if !cls.conservative {
        return Err(KypError::RouteMismatch {
            what: "conservativity of the characteristic system",
            gap: norm(
                &(identity(tau.assembled().ncols()) - tau.assembled().adjoint() * tau.assembled()),
            ),
        });
    }
    Ok(tau)
}

/// Deterministic points in the disk `|λ| ≤ radius` on a Fermat spiral.
pub fn disk_grid(count: usize, radius: f64) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|j| {
            let r = radius * ((j as f64 + 0.5) / count as f64).sqrt();
            Complex64::from_polar(r, golden * j as f64)
        })
        .collect()
}

/// Largest `‖Θ(λ)‖` over the grid.
pub fn max_transfer_norm(tau: &SystemRealization, grid: &[Complex64]) -> Result<f64> {
    grid.iter()
        .map(|&l| transfer_eval(tau, l).map(|t| norm(&t)))
        .try_fold(0.0_f64, |acc, n| n.map(|n| acc.max(n)))
}
