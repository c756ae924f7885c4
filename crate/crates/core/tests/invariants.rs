use kyp_core::contraction::{parametrize, shorted_defects, synthesize, Blocks};
use kyp_core::numerics::{
    eigh, identity, loewner_margin, norm, pinv, projection_residual, psd_sqrt, range_basis,
    range_intersection, rank,
};
use kyp_core::random::{contraction, gaussian, psd, seeded, unit_interval_operator};
use kyp_core::shorted::{shorted, shorted_complement, shorted_oracle};
use kyp_core::system::{classify, disk_grid, krylov_subspaces, max_transfer_norm};
use kyp_core::{BlockContraction, Subspace, SystemRealization, Tolerances};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn psd_sqrt_squares_back(seed in any::<u64>(), n in 1usize..7, r in 0usize..7) {
        let mut rng = seeded(seed);
        let m = psd(&mut rng, n, r.min(n));
        let root = psd_sqrt(&m, &tol()).unwrap();
        prop_assert!(norm(&(&root * &root - &m)) < 1e-9 * norm(&m).max(1.0));
        prop_assert!(eigh(&root).unwrap().min() >= -1e-12);
    }

    #[test]
    fn pinv_penrose_identities(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let mut rng = seeded(seed);
        let a = gaussian(&mut rng, rows, cols);
        let p = pinv(&a, &tol());
        prop_assert!(norm(&(&a * &p * &a - &a)) < 1e-9);
        prop_assert!(norm(&(&p * &a * &p - &p)) < 1e-9);
        let ap = &a * &p;
        let pa = &p * &a;
        prop_assert!(norm(&(ap.adjoint() - &ap)) < 1e-9);
        prop_assert!(norm(&(pa.adjoint() - &pa)) < 1e-9);
    }

    #[test]
    fn intersection_lies_in_both(seed in any::<u64>(), n in 2usize..7, shared in 0usize..3) {
        let mut rng = seeded(seed);
        let common = gaussian(&mut rng, n, shared.min(n - 1));
        let extra_u = gaussian(&mut rng, n, 1);
        let extra_v = gaussian(&mut rng, n, 1);
        let u = range_basis(&nalgebra::DMatrix::from_columns(
            &common.column_iter().chain(extra_u.column_iter()).collect::<Vec<_>>(),
        ), &tol());
        let v = range_basis(&nalgebra::DMatrix::from_columns(
            &common.column_iter().chain(extra_v.column_iter()).collect::<Vec<_>>(),
        ), &tol());
        let meet = range_intersection(&u, &v, &tol()).unwrap();
        prop_assert!(meet.ncols() >= common.ncols());
        prop_assert!(projection_residual(&meet, &u) < 1e-8);
        prop_assert!(projection_residual(&meet, &v) < 1e-8);
    }

    #[test]
    fn shorted_monotone_and_superadditive(seed in any::<u64>(), n in 2usize..7, k in 1usize..6) {
        let mut rng = seeded(seed);
        let k = k.min(n - 1);
        let sub = Subspace::leading(n, k);
        let a = psd(&mut rng, n, n);
        let b = psd(&mut rng, n, n - 1);
        let sum = &a + &b;
        let sa = shorted(&a, &sub, &tol()).unwrap().value;
        let sb = shorted(&b, &sub, &tol()).unwrap().value;
        let ss = shorted(&sum, &sub, &tol()).unwrap().value;
        prop_assert!(loewner_margin(&sa, &ss).unwrap() >= -1e-9);
        prop_assert!(loewner_margin(&(&sa + &sb), &ss).unwrap() >= -1e-9);
        prop_assert!(loewner_margin(&sa, &a).unwrap() >= -1e-9);
        let oracle = shorted_oracle(&a, &sub, &tol()).unwrap().value;
        prop_assert!(norm(&(&sa - oracle)) < 1e-8);
    }

    #[test]
    fn complement_route_matches(seed in any::<u64>(), n in 2usize..7, k in 1usize..6) {
        let mut rng = seeded(seed);
        let sub = Subspace::leading(n, k.min(n - 1));
        let x = unit_interval_operator(&mut rng, n, 0.0, 1.0);
        let by_formula = shorted_complement(&x, &sub, &tol()).unwrap();
        let direct = shorted(&(identity(n) - &x), &sub, &tol()).unwrap().value;
        prop_assert!(norm(&(by_formula - direct)) < 1e-7);
    }

    #[test]
    fn parametrization_roundtrip(
        seed in any::<u64>(),
        h in 1usize..4, m in 1usize..4, k in 1usize..4, n in 1usize..4,
    ) {
        let mut rng = seeded(seed);
        let t = contraction(&mut rng, k + n, h + m, 1.0);
        let bc = BlockContraction::new(Blocks::split(&t, k, h), &tol()).unwrap();
        let p = parametrize(&bc, &tol()).unwrap();
        let back = synthesize(&p, &tol()).unwrap();
        prop_assert!(norm(&(back.assembled() - bc.assembled())) < 1e-8);
        let sd = shorted_defects(&bc, &tol()).unwrap();
        prop_assert!(loewner_margin(&sd.t_h, &sd.pn_t_h).unwrap() >= -1e-9);
        prop_assert!(loewner_margin(&sd.ts_k, &sd.pm_ts_k).unwrap() >= -1e-9);
    }

    #[test]
    fn transfer_stays_in_schur_class(seed in any::<u64>(), h in 1usize..4, m in 1usize..3, n in 1usize..3) {
        let mut rng = seeded(seed);
        let t = contraction(&mut rng, h + n, h + m, 1.0);
        let tau = SystemRealization::new(Blocks::split(&t, h, h), "p").unwrap();
        let sup = max_transfer_norm(&tau, &disk_grid(24, 0.95)).unwrap();
        prop_assert!(sup <= 1.0 + 1e-9);
    }

    #[test]
    fn krylov_ranks_stabilise(seed in any::<u64>(), h in 1usize..6) {
        let mut rng = seeded(seed);
        let t = contraction(&mut rng, h + 1, h + 1, 0.9);
        let tau = SystemRealization::new(Blocks::split(&t, h, h), "p").unwrap();
        let (ctrl, obs) = krylov_subspaces(&tau, &tol());
        prop_assert!(ctrl.ncols() <= h && obs.ncols() <= h);
        let a = tau.a();
        // The controllable subspace is A-invariant.
        prop_assert!(projection_residual(&(a * &ctrl), &ctrl) < 1e-8);
        let cls = classify(&tau, &tol());
        prop_assert_eq!(cls.controllable, rank(&ctrl, &tol()) == h);
    }
}
