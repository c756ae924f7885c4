//! Möbius representation `Θ(λ) = Θ(0) + D_{Θ*(0)} Z(λ) (I + Θ*(0) Z(λ))^{-1} D_{Θ(0)}`
//! and the correspondence between a passive system `τ` and the system `ν`
//! realizing its Möbius parameter `Z`.
//!
//! `Z` always acts between defect spaces and is written in the orthonormal
//! coordinates returned by [`defect_data`]: a `Z` for the contraction `T`
//! has shape `dim 𝔇_{T*} × dim 𝔇_T`.

use num_complex::Complex64;

use crate::contraction::{defect_data, md_transform, parametrize, BlockContraction, DefectData};
use crate::error::{KypError, Result};
use crate::numerics::{
    identity, norm, range_basis, solve, subspace_gap, zeros, CMatrix, Tolerances,
};
use crate::system::{classify, krylov_subspaces, transfer_eval, SystemRealization};

fn check_coordinates(t: &CMatrix, z: &CMatrix, dd: &DefectData) -> Result<()> {
    let want = (dd.codefect_basis.ncols(), dd.defect_basis.ncols());
    if z.shape() != want {
        return Err(KypError::Dimension(format!(
            "parameter of shape {:?} for a {:?} contraction with defect dimensions {:?}",
            z.shape(),
            t.shape(),
            want
        )));
    }
    Ok(())
}

fn lft(t: &CMatrix, z: &CMatrix, dd: &DefectData) -> Result<CMatrix> {
    check_coordinates(t, z, dd)?;
    let z_full = &dd.codefect_basis * z * dd.defect_basis.adjoint();
    let m = t.ncols();
    let inner = identity(m) + t.adjoint() * &z_full;
    let right = solve(&inner, &dd.defect, "I + T*Z")?;
    Ok(t + &dd.codefect * z_full * right)
}

/// `Q = T + D_{T*} Z (I + T*Z)^{-1} D_T` for `Z : 𝔇_T → 𝔇_{T*}` in coordinates.
pub fn unitary_lft(t: &CMatrix, z: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let n = norm(t);
    if n > 1.0 + tol.psd_tol {
        return Err(KypError::NotContractive { norm: n });
    }
    let dd = defect_data(t, tol)?;
    let q = lft(t, z, &dd)?;
    if norm(z) <= 1.0 + tol.psd_tol && norm(&q) > 1.0 + tol.zero_tol() {
        return Err(KypError::RouteMismatch {
            what: "contractivity of the linear-fractional transform",
            gap: norm(&q) - 1.0,
        });
    }
    Ok(q)
}

/// Möbius transform of a parameter value `Z` around the centre `Θ(0)`.
pub fn moebius_eval(theta0: &CMatrix, z: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    unitary_lft(theta0, z, tol)
}

/// `‖D_Q f‖` and `‖D_Z (I + T*Z)^{-1} D_T f‖` for `Q = unitary_lft(T, Z)`.
pub fn lft_defect_norms(
    t: &CMatrix,
    z: &CMatrix,
    f: &CMatrix,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let dd = defect_data(t, tol)?;
    let q = lft(t, z, &dd)?;
    let d_q = crate::numerics::defect_operator(&q, tol)?;
    let d_z = crate::numerics::defect_operator(z, tol)?;
    let z_full = &dd.codefect_basis * z * dd.defect_basis.adjoint();
    let inner = identity(t.ncols()) + t.adjoint() * &z_full;
    let g = solve(&inner, &(&dd.defect * f), "I + T*Z")?;
    let rhs = d_z * dd.defect_basis.adjoint() * g;
    Ok((norm(&(d_q * f)), norm(&rhs)))
}

/// `Θ(0)` together with the system `ν` realizing the Möbius parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusPair {
    pub theta0: CMatrix,
    /// `ν = {[[D_{F*} L D_G, F], [G, 0]]; H, 𝔇_{Θ(0)}, 𝔇_{Θ*(0)}}`.
    pub parameter_system: SystemRealization,
}

impl MoebiusPair {
    /// `Z(λ)`, the transfer function of the parameter system.
    pub fn z(&self, lambda: Complex64) -> Result<CMatrix> {
        transfer_eval(&self.parameter_system, lambda)
    }

    /// `Θ(λ)` rebuilt from `Θ(0)` and `Z(λ)`.
    pub fn theta(&self, lambda: Complex64, tol: &Tolerances) -> Result<CMatrix> {
        moebius_eval(&self.theta0, &self.z(lambda)?, tol)
    }
}

/// Extracts `Θ(0) = D` and the parameter system of a passive `τ`.
pub fn parameter_system(tau: &SystemRealization, tol: &Tolerances) -> Result<MoebiusPair> {
    let t = BlockContraction::new(tau.blocks.clone(), tol)?;
    let p = parametrize(&t, tol)?;
    let nu = SystemRealization::from_parts(
        p.s(tol)?,
        p.f_coords(),
        p.g_coords(),
        zeros(p.basis_dds.ncols(), p.basis_dd.ncols()),
        format!("{}/nu", tau.label),
    )?;
    Ok(MoebiusPair {
        theta0: p.d,
        parameter_system: nu,
    })
}

/// Assembles `τ' = {[[S - F Θ*(0) G, F D_{Θ(0)}], [D_{Θ*(0)} G, Θ(0)]]; H, M, N}`
/// from a parameter system `ν' = {[[S, F], [G, 0]]; H, 𝔇_{Θ(0)}, 𝔇_{Θ*(0)}}`.
///
/// When `ν'` is passive the result is checked to be passive as well.
pub fn theta_system(
    nu: &SystemRealization,
    theta0: &CMatrix,
    tol: &Tolerances,
) -> Result<SystemRealization> {
    let dd = defect_data(theta0, tol)?;
    let (u, us) = (&dd.defect_basis, &dd.codefect_basis);
    if nu.input_dim() != u.ncols() || nu.output_dim() != us.ncols() {
        return Err(KypError::Dimension(format!(
            "parameter system with input/output dimensions ({}, {}) for defect dimensions ({}, {})",
            nu.input_dim(),
            nu.output_dim(),
            u.ncols(),
            us.ncols()
        )));
    }
    if norm(nu.d()) > tol.zero_tol() {
        return Err(KypError::InvalidInput(
            "parameter system must have a zero feedthrough block".into(),
        ));
    }
    let f = nu.b() * u.adjoint();
    let g = us * nu.c();
    let blocks = if nu.is_passive(tol) {
        md_transform(theta0, nu.a(), &f, &g, tol)?
    } else {
        crate::contraction::Blocks::new(
            nu.a() - &f * theta0.adjoint() * &g,
            &f * &dd.defect,
            &dd.codefect * &g,
            theta0.clone(),
        )?
    };
    SystemRealization::new(blocks, format!("{}/theta", nu.label))
}

/// The linear-parameter realizations of `Θ` with Möbius parameter `λK`.
///
/// `τ` lives on `ran K` and is optimal; `η` lives on `ran K*` and is
/// (*)-optimal.
pub fn linear_parameter_realizations(
    theta0: &CMatrix,
    k: &CMatrix,
    tol: &Tolerances,
) -> Result<(SystemRealization, SystemRealization)> {
    let dd = defect_data(theta0, tol)?;
    check_coordinates(theta0, k, &dd)?;
    if norm(k) <= tol.zero_tol() {
        return Err(KypError::InvalidInput("K must be nonzero".into()));
    }
    if norm(k) > 1.0 + tol.psd_tol {
        return Err(KypError::NotContractive { norm: norm(k) });
    }
    let v = range_basis(k, tol);
    let r = v.ncols();
    let nu = SystemRealization::from_parts(
        zeros(r, r),
        v.adjoint() * k,
        v.clone(),
        zeros(k.nrows(), k.ncols()),
        "linear/nu",
    )?;
    let w = range_basis(&k.adjoint(), tol);
    let s = w.ncols();
    let sigma = SystemRealization::from_parts(
        zeros(s, s),
        w.adjoint(),
        k * &w,
        zeros(k.nrows(), k.ncols()),
        "linear/sigma",
    )?;
    let tau = theta_system(&nu, theta0, tol)?.with_label("optimal");
    let eta = theta_system(&sigma, theta0, tol)?.with_label("star-optimal");
    for sys in [&tau, &eta] {
        let cls = classify(sys, tol);
        if !cls.minimal {
            return Err(KypError::NotMinimal {
                controllable: cls.controllable,
                observable: cls.observable,
            });
        }
    }
    Ok((tau, eta))
}

/// Worst-case deviations found by [`verify_moebius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusCheck {
    /// `max ‖Θ_τ(λ) - moebius_eval(Θ(0), Z(λ))‖`.
    pub identity_gap: f64,
    /// `max (‖Z(λ)‖ - |λ|)`.
    pub schwarz_excess: f64,
    /// Largest gap between the controllable (observable) subspaces of `τ`
    /// and `ν`.
    pub krylov_gap: f64,
}

pub fn verify_moebius(
    tau: &SystemRealization,
    pair: &MoebiusPair,
    grid: &[Complex64],
    tol: &Tolerances,
) -> Result<MoebiusCheck> {
    let mut identity_gap: f64 = 0.0;
    let mut schwarz_excess = f64::NEG_INFINITY;
    for &l in grid {
        let z = pair.z(l)?;
        schwarz_excess = schwarz_excess.max(norm(&z) - l.norm());
        let theta = moebius_eval(&pair.theta0, &z, tol)?;
        identity_gap = identity_gap.max(norm(&(theta - transfer_eval(tau, l)?)));
    }
    let (ct, ot) = krylov_subspaces(tau, tol);
    let (cn, on) = krylov_subspaces(&pair.parameter_system, tol);
    Ok(MoebiusCheck {
        identity_gap,
        schwarz_excess: if grid.is_empty() { 0.0 } else { schwarz_excess },
        krylov_gap: subspace_gap(&ct, &cn).max(subspace_gap(&ot, &on)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::Blocks;
    use crate::numerics::{cplx, from_real, scalar};
    use crate::random::{contraction, seeded, vector};
    use crate::system::disk_grid;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn random_system(seed: u64, h: usize, m: usize, n: usize) -> SystemRealization {
        let mut rng = seeded(seed);
        let t = contraction(&mut rng, h + n, h + m, 0.95);
        SystemRealization::new(Blocks::split(&t, h, h), "r").unwrap()
    }

    #[test]
    fn moebius_eval_examples() {
        let z = from_real(2, 2, &[0.1, 0.2, -0.3, 0.4]);
        assert!(norm(&(moebius_eval(&zeros(2, 2), &z, &tol()).unwrap() - &z)) < 1e-15);

        let (t, zv) = (0.3, Complex64::new(0.2, 0.5));
        let got = moebius_eval(&scalar(t), &CMatrix::from_element(1, 1, zv), &tol()).unwrap();
        let want = (zv + t) / (cplx(1.0) + zv * t);
        assert!((got[(0, 0)] - want).norm() < 1e-14);

        let t0 = from_real(2, 2, &[0.3, 0.1, 0.0, 0.5]);
        assert!(norm(&(moebius_eval(&t0, &zeros(2, 2), &tol()).unwrap() - &t0)) < 1e-15);
    }

    #[test]
    fn unitary_lft_examples() {
        let q = unitary_lft(&scalar(0.6), &scalar(0.5), &tol()).unwrap();
        assert!((q[(0, 0)].re - (0.6 + 0.8 * 0.5 / 1.3 * 0.8)).abs() < 1e-14);
        assert!((q[(0, 0)].re - 0.84615).abs() < 1e-5);

        let mut rng = seeded(4);
        let t = contraction(&mut rng, 3, 3, 0.8);
        let dd = defect_data(&t, &tol()).unwrap();
        let z = contraction(&mut rng, 3, 3, 0.7);
        let q = unitary_lft(&t, &z, &tol()).unwrap();
        let dq = defect_data(&q, &tol()).unwrap();
        assert_eq!(dq.defect_basis.ncols(), dd.defect_basis.ncols());
        for _ in 0..5 {
            let f = vector(&mut rng, 3);
            let (a, b) = lft_defect_norms(&t, &z, &f, &tol()).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
        assert!(matches!(
            unitary_lft(&t, &zeros(2, 3), &tol()),
            Err(KypError::Dimension(_))
        ));
    }

    #[test]
    fn parameter_system_examples() {
        let h = 0.5f64.sqrt();
        let fix_b =
            SystemRealization::from_parts(scalar(0.5), scalar(h), scalar(h), scalar(0.0), "b")
                .unwrap();
        let pair = parameter_system(&fix_b, &tol()).unwrap();
        let nu = &pair.parameter_system;
        assert!((nu.a()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((nu.b()[(0, 0)].norm() - h).abs() < 1e-12);
        assert!((nu.c()[(0, 0)].norm() - h).abs() < 1e-12);
        let check = verify_moebius(&fix_b, &pair, &disk_grid(32, 0.9), &tol()).unwrap();
        assert!(check.identity_gap < 1e-10);

        let fix_a =
            SystemRealization::from_parts(scalar(0.0), scalar(1.0), scalar(1.0), scalar(0.0), "a")
                .unwrap();
        let pa = parameter_system(&fix_a, &tol()).unwrap();
        assert!(norm(&(pa.parameter_system.assembled() - fix_a.assembled())) < 1e-14);
    }

    #[test]
    fn parameter_system_rejects_active() {
        let t =
            SystemRealization::from_parts(scalar(2.0), scalar(0.0), scalar(0.0), scalar(0.0), "x")
                .unwrap();
        assert!(matches!(
            parameter_system(&t, &tol()),
            Err(KypError::NotContractive { .. })
        ));
    }

    #[test]
    fn random_moebius_identity() {
        for seed in 0..10 {
            let tau = random_system(seed, 3, 2, 2);
            let pair = parameter_system(&tau, &tol()).unwrap();
            let check = verify_moebius(&tau, &pair, &disk_grid(32, 0.9), &tol()).unwrap();
            assert!(check.identity_gap < 1e-8, "seed {seed}: {check:?}");
            assert!(check.schwarz_excess < 1e-8);
            assert!(check.krylov_gap < 1e-8);
        }
    }

    #[test]
    fn theta_system_roundtrip() {
        for seed in 20..26 {
            let tau = random_system(seed, 2, 2, 3);
            let pair = parameter_system(&tau, &tol()).unwrap();
            let back = theta_system(&pair.parameter_system, &pair.theta0, &tol()).unwrap();
            assert!(norm(&(back.assembled() - tau.assembled())) < 1e-8);
        }
        let nu = random_system(30, 2, 1, 1);
        let nu = SystemRealization::from_parts(
            nu.a().clone(),
            nu.b().clone(),
            nu.c().clone(),
            zeros(1, 1),
            "nu",
        )
        .unwrap();
        let same = theta_system(&nu, &zeros(1, 1), &tol()).unwrap();
        assert!(norm(&(same.assembled() - nu.assembled())) < 1e-14);
    }

    #[test]
    fn isometric_parameter_gives_isometric_system() {
        let nu =
            SystemRealization::from_parts(scalar(0.0), scalar(1.0), scalar(1.0), scalar(0.0), "a")
                .unwrap();
        let tau = theta_system(&nu, &scalar(0.6), &tol()).unwrap();
        assert!(classify(&tau, &tol()).isometric);
    }

    #[test]
    fn linear_parameter_examples() {
        let (tau, _) = linear_parameter_realizations(&scalar(0.0), &scalar(1.0), &tol()).unwrap();
        assert!(norm(&(tau.assembled() - from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]))) < 1e-14);

        let (tau, eta) = linear_parameter_realizations(&scalar(0.6), &scalar(0.8), &tol()).unwrap();
        let want = from_real(2, 2, &[-0.48, 0.64, 0.8, 0.6]);
        assert!(norm(&(tau.assembled() - want)) < 1e-14);
        assert!(classify(&eta, &tol()).minimal);

        let mut rng = seeded(8);
        let t0 = contraction(&mut rng, 3, 2, 0.7);
        let k = contraction(&mut rng, 3, 2, 0.9);
        let (tau, eta) = linear_parameter_realizations(&t0, &k, &tol()).unwrap();
        for sys in [&tau, &eta] {
            let pair = parameter_system(sys, &tol()).unwrap();
            for l in disk_grid(16, 0.9) {
                assert!(norm(&(pair.z(l).unwrap() - k.clone() * l)) < 1e-10);
            }
        }
        assert!(matches!(
            linear_parameter_realizations(&scalar(0.6), &scalar(0.0), &tol()),
            Err(KypError::InvalidInput(_))
        ));
    }
}
