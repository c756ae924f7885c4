//! 2×2 block contractions `T = [[A, B], [C, D]] : H ⊕ M → K ⊕ N`.
//!
//! Parameters `F`, `G`, `L` of the representation
//! `B = F D_D`, `C = D_{D*} G`, `A = -F D* G + D_{F*} L D_G`
//! are stored as full operators between the ambient spaces
//! (`F : M → K` vanishing off `𝔇_D`, `G : H → N` with range in `𝔇_{D*}`,
//! `L : H → K` mapping `𝔇_G` into `𝔇_{F*}` and vanishing off `𝔇_G`).
//! Orthonormal bases of the four defect spaces are kept alongside, and the
//! `*_coords` accessors express each parameter in those bases.

use crate::error::{KypError, Result};
use crate::numerics::{
    block2, defect_operator, hermitian_part, identity, leading, norm, pinv, projection_residual,
    projector, range_basis, zeros, CMatrix, Tolerances,
};
use crate::shorted::{shorted, Subspace};

/// Raw 2×2 block operator; no norm constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
}

impl Blocks {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let ok = a.nrows() == b.nrows()
            && c.nrows() == d.nrows()
            && a.ncols() == c.ncols()
            && b.ncols() == d.ncols();
        if !ok {
            return Err(KypError::Dimension(format!(
                "blocks A {:?}, B {:?}, C {:?}, D {:?} do not form a 2x2 operator",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Splits an assembled `(k+n) × (h+m)` matrix.
    pub fn split(t: &CMatrix, dim_k: usize, dim_h: usize) -> Self {
        let (rows, cols) = t.shape();
        let (n, m) = (rows - dim_k, cols - dim_h);
        Self {
            a: t.view((0, 0), (dim_k, dim_h)).into_owned(),
            b: t.view((0, dim_h), (dim_k, m)).into_owned(),
            c: t.view((dim_k, 0), (n, dim_h)).into_owned(),
            d: t.view((dim_k, dim_h), (n, m)).into_owned(),
        }
    }

    pub fn dim_h(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_m(&self) -> usize {
        self.b.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_n(&self) -> usize {
        self.c.nrows()
    }

    pub fn assembled(&self) -> CMatrix {
        block2(&self.a, &self.b, &self.c, &self.d)
    }

    /// `[[A*, C*], [B*, D*]]`.
    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.adjoint(),
            b: self.c.adjoint(),
            c: self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.assembled())
    }

    pub fn is_contraction(&self, tol: &Tolerances) -> bool {
        self.norm() <= 1.0 + tol.psd_tol
    }
}

/// A [`Blocks`] value whose assembled operator has norm at most `1 + psd_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockContraction(Blocks);

impl BlockContraction {
    pub fn new(blocks: Blocks, tol: &Tolerances) -> Result<Self> {
        let n = blocks.norm();
        if n > 1.0 + tol.psd_tol {
            return Err(KypError::NotContractive { norm: n });
        }
        Ok(Self(blocks))
    }

    pub fn from_parts(
        a: CMatrix,
        b: CMatrix,
        c: CMatrix,
        d: CMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        Self::new(Blocks::new(a, b, c, d)?, tol)
    }

    pub fn blocks(&self) -> &Blocks {
        &self.0
    }

    pub fn into_blocks(self) -> Blocks {
        self.0
    }

    pub fn assembled(&self) -> CMatrix {
        self.0.assembled()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }
}

impl std::ops::Deref for BlockContraction {
    type Target = Blocks;

    fn deref(&self) -> &Blocks {
        &self.0
    }
}

/// Defect operators of a contraction and bases of their ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectData {
    /// `D_T = (I - T*T)^{1/2}`.
    pub defect: CMatrix,
    /// `D_{T*} = (I - TT*)^{1/2}`.
    pub codefect: CMatrix,
    pub defect_basis: CMatrix,
    pub codefect_basis: CMatrix,
}

/// Defect data of any contraction matrix.
pub fn defect_data(t: &CMatrix, tol: &Tolerances) -> Result<DefectData> {
    let defect = defect_operator(t, tol)?;
    let codefect = defect_operator(&t.adjoint(), tol)?;
    Ok(DefectData {
        defect_basis: range_basis(&defect, tol),
        codefect_basis: range_basis(&codefect, tol),
        defect,
        codefect,
    })
}

pub fn defect(t: &BlockContraction, tol: &Tolerances) -> Result<DefectData> {
    defect_data(&t.assembled(), tol)
}

/// The parameters `(D, F, G, L)` of a block contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionParams {
    pub d: CMatrix,
    pub f: CMatrix,
    pub g: CMatrix,
    pub l: CMatrix,
    /// Basis of `𝔇_D ⊂ M`.
    pub basis_dd: CMatrix,
    /// Basis of `𝔇_{D*} ⊂ N`.
    pub basis_dds: CMatrix,
    /// Basis of `𝔇_G ⊂ H`.
    pub basis_dg: CMatrix,
    /// Basis of `𝔇_{F*} ⊂ K`.
    pub basis_dfs: CMatrix,
}

/// Norms in `(1, 1 + range_tol]` are roundoff from the pseudoinverses that
/// produce `L` and are scaled back to 1.
fn check_parameter_norm(name: &'static str, m: CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let n = norm(&m);
    if n > 1.0 + tol.range_tol() {
        return Err(KypError::ParameterNorm { name, norm: n });
    }
    Ok(if n > 1.0 { m.scale(1.0 / n) } else { m })
}

impl ContractionParams {
    /// Builds parameters from full operators. Each of `F`, `G`, `L` is
    /// compressed onto its defect spaces; only that part enters the
    /// parametrization.
    pub fn from_operators(
        d: CMatrix,
        f: CMatrix,
        g: CMatrix,
        l: CMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (n, m) = d.shape();
        let (k, h) = l.shape();
        if f.shape() != (k, m) || g.shape() != (n, h) {
            return Err(KypError::Dimension(format!(
                "D {:?}, F {:?}, G {:?}, L {:?} are not conformal",
                d.shape(),
                f.shape(),
                g.shape(),
                l.shape()
            )));
        }
        let d = check_parameter_norm("D", d, tol)?;
        let dd = defect_data(&d, tol)?;
        let f = check_parameter_norm("F", f * projector(&dd.defect_basis), tol)?;
        let g = check_parameter_norm("G", projector(&dd.codefect_basis) * g, tol)?;
        let basis_dg = range_basis(&defect_operator(&g, tol)?, tol);
        let basis_dfs = range_basis(&defect_operator(&f.adjoint(), tol)?, tol);
        let l = check_parameter_norm("L", projector(&basis_dfs) * l * projector(&basis_dg), tol)?;
        Ok(Self {
            d,
            f,
            g,
            l,
            basis_dd: dd.defect_basis,
            basis_dds: dd.codefect_basis,
            basis_dg,
            basis_dfs,
        })
    }

    pub fn dim_h(&self) -> usize {
        self.g.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.f.nrows()
    }

    /// `F` as a map `𝔇_D → K` in the basis of `𝔇_D`.
    pub fn f_coords(&self) -> CMatrix {
        &self.f * &self.basis_dd
    }

    /// `G` as a map `H → 𝔇_{D*}` in the basis of `𝔇_{D*}`.
    pub fn g_coords(&self) -> CMatrix {
        self.basis_dds.adjoint() * &self.g
    }

    /// `L` as a map `𝔇_G → 𝔇_{F*}` in the bases of both spaces.
    pub fn l_coords(&self) -> CMatrix {
        self.basis_dfs.adjoint() * &self.l * &self.basis_dg
    }

    pub fn d_d(&self, tol: &Tolerances) -> Result<CMatrix> {
        defect_operator(&self.d, tol)
    }

    pub fn d_ds(&self, tol: &Tolerances) -> Result<CMatrix> {
        defect_operator(&self.d.adjoint(), tol)
    }

    pub fn d_g(&self, tol: &Tolerances) -> Result<CMatrix> {
        defect_operator(&self.g, tol)
    }

    pub fn d_fs(&self, tol: &Tolerances) -> Result<CMatrix> {
        defect_operator(&self.f.adjoint(), tol)
    }

    /// `D_L² = I_H - L*L`, the square of `D_L` extended by the identity off `𝔇_G`.
    pub fn d_l_sq(&self) -> CMatrix {
        identity(self.dim_h()) - self.l.adjoint() * &self.l
    }

    /// `D_{L*}² = I_K - LL*`.
    pub fn d_ls_sq(&self) -> CMatrix {
        identity(self.dim_k()) - &self.l * self.l.adjoint()
    }

    /// `S = D_{F*} L D_G`, the state block of the parameter system.
    pub fn s(&self, tol: &Tolerances) -> Result<CMatrix> {
        Ok(self.d_fs(tol)? * &self.l * self.d_g(tol)?)
    }
}

/// Recovers `(D, F, G, L)` from a block contraction.
pub fn parametrize(t: &BlockContraction, tol: &Tolerances) -> Result<ContractionParams> {
    let d = t.d.clone();
    let d_d = defect_operator(&d, tol)?;
    let d_ds = defect_operator(&d.adjoint(), tol)?;
    let f = check_parameter_norm("F", &t.b * pinv(&d_d, tol), tol)?;
    let g = check_parameter_norm("G", pinv(&d_ds, tol) * &t.c, tol)?;
    let d_g = defect_operator(&g, tol)?;
    let d_fs = defect_operator(&f.adjoint(), tol)?;
    let core = &t.a + &f * d.adjoint() * &g;
    let l = check_parameter_norm("L", pinv(&d_fs, tol) * core * pinv(&d_g, tol), tol)?;
    Ok(ContractionParams {
        basis_dd: range_basis(&d_d, tol),
        basis_dds: range_basis(&d_ds, tol),
        basis_dg: range_basis(&d_g, tol),
        basis_dfs: range_basis(&d_fs, tol),
        d,
        f,
        g,
        l,
    })
}

/// Assembles `T` from its parameters and verifies contractivity.
pub fn synthesize(p: &ContractionParams, tol: &Tolerances) -> Result<BlockContraction> {
    for (name, m) in [("D", &p.d), ("F", &p.f), ("G", &p.g), ("L", &p.l)] {
        let n = norm(m);
        if n > 1.0 + tol.psd_tol {
            return Err(KypError::ParameterNorm { name, norm: n });
        }
    }
    let a = -(&p.f * p.d.adjoint() * &p.g) + p.s(tol)?;
    let b = &p.f * p.d_d(tol)?;
    let c = p.d_ds(tol)? * &p.g;
    BlockContraction::from_parts(a, b, c, p.d.clone(), tol)
}

/// `M_D(Q) = [[S - F D* G, F D_D], [D_{D*} G, D]]` for
/// `Q = [[S, F], [G, 0]]`, with `F : M → K` supported on `𝔇_D` and
/// `G : H → N` ranging in `𝔇_{D*}`.
///
/// Contractivity of `Q` and of the result are both checked; a mismatch is
/// reported as [`KypError::RouteMismatch`].
pub fn md_transform(
    d: &CMatrix,
    s: &CMatrix,
    f: &CMatrix,
    g: &CMatrix,
    tol: &Tolerances,
) -> Result<Blocks> {
    let (n, m) = d.shape();
    let (k, h) = s.shape();
    if f.shape() != (k, m) || g.shape() != (n, h) {
        return Err(KypError::Dimension(format!(
            "Q blocks S {:?}, F {:?}, G {:?} are not conformal with D {:?}",
            s.shape(),
            f.shape(),
            g.shape(),
            d.shape()
        )));
    }
    if norm(d) > 1.0 + tol.psd_tol {
        return Err(KypError::NotContractive { norm: norm(d) });
    }
    let dd = defect_data(d, tol)?;
    let off_dd = projection_residual(&f.adjoint(), &dd.defect_basis);
    let off_dds = projection_residual(g, &dd.codefect_basis);
    if off_dd > tol.range_tol() || off_dds > tol.range_tol() {
        return Err(KypError::Dimension(format!(
            "Q does not act between the defect spaces of D (residuals {off_dd:e}, {off_dds:e})"
        )));
    }
    let q = Blocks::new(s.clone(), f.clone(), g.clone(), zeros(n, m))?;
    let t = Blocks::new(
        s - f * d.adjoint() * g,
        f * &dd.defect,
        &dd.codefect * g,
        d.clone(),
    )?;
    let (qc, tc) = (q.is_contraction(tol), t.is_contraction(tol));
    if qc != tc {
        return Err(KypError::RouteMismatch {
            what: "contractivity of Q and M_D(Q)",
            gap: (q.norm() - t.norm()).abs(),
        });
    }
    Ok(t)
}

/// The four shorted defect operators, restricted to the state spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortedDefects {
    /// `(D²_T)_H` restricted to `H`, equal to `D_G D_L² D_G`.
    pub t_h: CMatrix,
    /// `(D²_{P_N T})_H` restricted to `H`, equal to `D_G²`.
    pub pn_t_h: CMatrix,
    /// `(D²_{T*})_K` restricted to `K`, equal to `D_{F*} D_{L*}² D_{F*}`.
    pub ts_k: CMatrix,
    /// `(D²_{P_M T*})_K` restricted to `K`, equal to `D_{F*}²`.
    pub pm_ts_k: CMatrix,
    /// Largest disagreement between the closed forms and direct shorting.
    pub route_gap: f64,
}

impl ShortedDefects {
    pub fn all(&self) -> [&CMatrix; 4] {
        [&self.t_h, &self.pn_t_h, &self.ts_k, &self.pm_ts_k]
    }
}

/// Shorted defects by the parameter closed forms, cross-checked against
/// [`shorted`] applied to the literal defect squares.
pub fn shorted_defects(t: &BlockContraction, tol: &Tolerances) -> Result<ShortedDefects> {
    let p = parametrize(t, tol)?;
    let d_g = p.d_g(tol)?;
    let d_fs = p.d_fs(tol)?;
    let closed = [
        hermitian_part(&(&d_g * p.d_l_sq() * &d_g)),
        hermitian_part(&(&d_g * &d_g)),
        hermitian_part(&(&d_fs * p.d_ls_sq() * &d_fs)),
        hermitian_part(&(&d_fs * &d_fs)),
    ];
    let direct = direct_shorted_defects(t, tol)?;
    let route_gap = closed
        .iter()
        .zip(direct.iter())
        .map(|(a, b)| norm(&(a - b)))
        .fold(0.0, f64::max);
    if route_gap > tol.zero_tol() {
        return Err(KypError::RouteMismatch {
            what: "shorted defects",
            gap: route_gap,
        });
    }
    let [t_h, pn_t_h, ts_k, pm_ts_k] = closed;
    Ok(ShortedDefects {
        t_h,
        pn_t_h,
        ts_k,
        pm_ts_k,
        route_gap,
    })
}

/// The four shorted defects computed directly from `T` with [`shorted`].
pub fn direct_shorted_defects(t: &BlockContraction, tol: &Tolerances) -> Result<[CMatrix; 4]> {
    let full = t.assembled();
    let (h, m, k, n) = (t.dim_h(), t.dim_m(), t.dim_k(), t.dim_n());
    let on_h = Subspace::leading(h + m, h);
    let on_k = Subspace::leading(k + n, k);

    let d2_t = identity(h + m) - full.adjoint() * &full;
    let lower = CMatrix::from_fn(n, h + m, |i, j| full[(k + i, j)]);
    let d2_pn_t = identity(h + m) - lower.adjoint() * &lower;
    let d2_ts = identity(k + n) - &full * full.adjoint();
    let right = CMatrix::from_fn(k + n, m, |i, j| full[(i, h + j)]);
    let d2_pm_ts = identity(k + n) - &right * right.adjoint();

    let restrict = |s: &CMatrix, sub: &Subspace, dim: usize| -> Result<CMatrix> {
        let value = shorted(&hermitian_part(s), sub, tol)?.value;
        Ok(leading(&value, dim, dim))
    };
    Ok([
        restrict(&d2_t, &on_h, h)?,
        restrict(&d2_pn_t, &on_h, h)?,
        restrict(&d2_ts, &on_k, k)?,
        restrict(&d2_pm_ts, &on_k, k)?,
    ])
}
