//! Discrete phase space: the unitary Weyl basis V_m^n, the hermitian
//! Wigner basis W_{m,n}, their coefficient grids, line marginals and MUB
//! tomography.

use crate::cnum::{float_tensor_all, max_abs_diff, root_of_unity, ExactMatrix, Scalar};
use crate::error::{Error, Result};
use crate::gf::{GfEl, GfSpec};
use crate::mub::MubSet;
use crate::weylops::GaloisHW;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

type CMat = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffKind {
    Weyl,
    Wigner,
    Ubar,
}

/// Coefficient grid. Weyl and Wigner grids are N x N indexed (m, n); the
/// ubar grid is (N+1) x N indexed (i, l).
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffGrid {
    pub kind: CoeffKind,
    pub values: CMat,
}

impl CoeffGrid {
    pub fn to_json(&self) -> Value {
        let kind = match self.kind {
            CoeffKind::Weyl => "weyl",
            CoeffKind::Wigner => "wigner",
            CoeffKind::Ubar => "ubar",
        };
        let rows: Vec<Vec<[f64; 2]>> = self
            .values
            .row_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        json!({ "kind": kind, "values": rows })
    }

    /// Largest imaginary part, for grids that should be real.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

fn check_square(x: &CMat, n: usize) -> Result<()> {
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("expected {n}x{n}, got {}x{}", x.nrows(), x.ncols())));
    }
    Ok(())
}

fn trace_dagger_product(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// x_m^n = tr(V_m^n^dagger X).
pub fn weyl_analyze(hw: &GaloisHW, x: &CMat) -> Result<CoeffGrid> {
    let n = hw.spec().n() as usize;
    check_square(x, n)?;
    let values = DMatrix::from_fn(n, n, |m, k| trace_dagger_product(&hw.v_float(m as GfEl, k as GfEl), x));
    Ok(CoeffGrid { kind: CoeffKind::Weyl, values })
}

/// Exact Weyl coefficients of an exact matrix, row-major in (m, n).
pub fn weyl_analyze_exact(hw: &GaloisHW, x: &ExactMatrix) -> Result<Vec<Scalar>> {
    let n = hw.spec().n() as usize;
    if x.rows() != n || x.cols() != n {
        return Err(Error::DimensionMismatch(format!("expected {n}x{n}")));
    }
    let mut out = Vec::with_capacity(n * n);
    for m in 0..n as GfEl {
        for k in 0..n as GfEl {
            out.push(hw.v(m, k).dagger().mul(x)?.trace()?);
        }
    }
    Ok(out)
}

/// X = (1/N) sum_{m,n} x_m^n V_m^n.
pub fn weyl_synthesize(hw: &GaloisHW, grid: &CoeffGrid) -> CMat {
    let n = hw.spec().n() as usize;
    let mut x = CMat::zeros(n, n);
    for m in 0..n {
        for k in 0..n {
            x += hw.v_float(m as GfEl, k as GfEl) * grid.values[(m, k)];
        }
    }
    x / Complex64::from(n as f64)
}

/// ubar^i_l = conj(alpha^i_l) x_l^{i l} for i < N and x_0^l for i = N.
pub fn ubar_from_weyl(mub: &MubSet, grid: &CoeffGrid) -> CoeffGrid {
    let f = mub.spec();
    let n = mub.n();
    let ord = mub.phase_order();
    let values = DMatrix::from_fn(n + 1, n, |i, l| {
        if i == n {
            grid.values[(0, l)]
        } else {
            let a = root_of_unity(ord, mub.alpha().exps[i][l] as i64).conj();
            a * grid.values[(l, f.mul(i as GfEl, l as GfEl) as usize)]
        }
    });
    CoeffGrid { kind: CoeffKind::Ubar, values }
}

/// ubar^i_l = tr(U^i_l^dagger X) computed directly.
pub fn ubar_direct(mub: &MubSet, x: &CMat) -> Result<CoeffGrid> {
    let n = mub.n();
    check_square(x, n)?;
    let values = DMatrix::from_fn(n + 1, n, |i, l| trace_dagger_product(&mub.u_monomial(i, l as GfEl).to_float(), x));
    Ok(CoeffGrid { kind: CoeffKind::Ubar, values })
}

/// Rejects matrices that are not hermitian, unit trace and positive
/// semidefinite within 1e-9.
pub fn check_density(rho: &CMat) -> Result<()> {
    let n = rho.nrows();
    if rho.ncols() != n {
        return Err(Error::NotDensityMatrix("not square".into()));
    }
    if max_abs_diff(rho, &rho.adjoint()) > 1e-9 {
        return Err(Error::NotDensityMatrix("not hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - Complex64::from(1.0)).norm() > 1e-9 {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let h = (rho + rho.adjoint()) * Complex64::from(0.5);
    let min = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-9 {
        return Err(Error::NotDensityMatrix(format!("eigenvalue {min}")));
    }
    Ok(())
}

/// p(i, k) = <e^i_k|rho|e^i_k> as an (N+1) x N table.
pub fn tomography(mub: &MubSet, rho: &CMat) -> Result<DMatrix<f64>> {
    let n = mub.n();
    check_square(rho, n).map_err(|e| Error::NotDensityMatrix(e.to_string()))?;
    check_density(rho)?;
    let rows: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|k| {
                    let e = DMatrix::from_vec(n, 1, mub.ket(i, k));
                    (e.adjoint() * rho * &e)[(0, 0)].re
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n + 1, n, |i, k| rows[i][k]))
}

/// ubar^i_l = sum_k gamma^{-k l} p(i, k).
pub fn ubar_from_probabilities(mub: &MubSet, p: &DMatrix<f64>) -> CoeffGrid {
    let f = mub.spec();
    let n = mub.n();
    let pr = f.p() as u64;
    let values = DMatrix::from_fn(n + 1, n, |i, l| {
        (0..n)
            .map(|k| root_of_unity(pr, -(f.char_exp(f.mul(k as GfEl, l as GfEl)) as i64)) * p[(i, k)])
            .sum()
    });
    CoeffGrid { kind: CoeffKind::Ubar, values }
}

/// rho = 1/N + (1/N) sum_i sum_{l>0} U^i_l ubar^i_l.
pub fn reconstruct(mub: &MubSet, p: &DMatrix<f64>) -> Result<CMat> {
    let n = mub.n();
    if p.shape() != (n + 1, n) {
        return Err(Error::DimensionMismatch(format!("expected {}x{n} probability table", n + 1)));
    }
    let r = ubar_from_probabilities(mub, p);
    let mut rho = CMat::identity(n, n);
    for i in 0..=n {
        for l in 1..n {
            rho += mub.u_monomial(i, l as GfEl).to_float() * r.values[(i, l)];
        }
    }
    Ok(rho / Complex64::from(n as f64))
}

fn projector(v: &[Complex64]) -> CMat {
    let c = DMatrix::from_column_slice(v.len(), 1, v);
    &c * c.adjoint()
}

/// The N^2 operators W_{m,n}, indexed m N + n.
#[derive(Clone, Debug)]
pub struct WignerBasis {
    pub n: usize,
    pub ops: Vec<CMat>,
    pub symmetric: bool,
}

impl WignerBasis {
    pub fn get(&self, m: GfEl, n: GfEl) -> &CMat {
        &self.ops[m as usize * self.n + n as usize]
    }
}

/// W_{m,n} = |e^N_m><e^N_m| + sum_{i<N} |e^i_{i m - n}><.| - 1.
pub fn wigner_basis(mub: &MubSet) -> WignerBasis {
    let f = mub.spec();
    let n = mub.n();
    let projs: Vec<Vec<CMat>> = (0..=n).map(|i| (0..n).map(|k| projector(&mub.ket(i, k))).collect()).collect();
    let ops = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (m, k) = ((idx / n) as GfEl, (idx % n) as GfEl);
            let mut w = projs[n][m as usize].clone() - CMat::identity(n, n);
            for (i, row) in projs.iter().enumerate().take(n) {
                w += &row[f.sub(f.mul(i as GfEl, m), k) as usize];
            }
            w
        })
        .collect();
    WignerBasis { n, ops, symmetric: mub.alpha().is_symmetric(f) }
}

/// Wigner basis built on the MUB whose symmetric phases carry the extra
/// factors gamma^{b_i l}. `b = 0` gives the standard basis.
pub fn wigner_basis_twisted(spec: std::sync::Arc<GfSpec>, b: &[GfEl]) -> Result<WignerBasis> {
    let n = spec.n() as usize;
    if b.len() != n || b[0] != 0 {
        return Err(Error::BadParameter("b must have N entries with b_0 = 0".into()));
    }
    let table = crate::mub::AlphaTable::new(&spec, true).twisted(&spec, b);
    Ok(wigner_basis(&MubSet::new(spec, table)?))
}

/// r_{m,n} = tr(rho W_{m,n}).
pub fn wigner_analyze(basis: &WignerBasis, rho: &CMat) -> Result<CoeffGrid> {
    let n = basis.n;
    check_square(rho, n)?;
    let values = DMatrix::from_fn(n, n, |m, k| (rho * &basis.ops[m * n + k]).trace());
    Ok(CoeffGrid { kind: CoeffKind::Wigner, values })
}

/// rho = (1/N) sum r_{m,n} W_{m,n}.
pub fn wigner_synthesize(basis: &WignerBasis, grid: &CoeffGrid) -> CMat {
    let n = basis.n;
    let mut x = CMat::zeros(n, n);
    for m in 0..n {
        for k in 0..n {
            x += &basis.ops[m * n + k] * grid.values[(m, k)];
        }
    }
    x / Complex64::from(n as f64)
}

/// M_{a,b,c} = (1/N) sum of W_{m,n} over the line a m = b n + c.
pub fn marginal(spec: &GfSpec, basis: &WignerBasis, a: GfEl, b: GfEl, c: GfEl) -> Result<CMat> {
    if a == 0 && b == 0 {
        return Err(Error::DegenerateLine);
    }
    let n = basis.n;
    let mut x = CMat::zeros(n, n);
    for m in 0..n as GfEl {
        for k in 0..n as GfEl {
            if spec.mul(a, m) == spec.add(spec.mul(b, k), c) {
                x += basis.get(m, k);
            }
        }
    }
    Ok(x / Complex64::from(n as f64))
}

/// The projector a marginal should equal: |e^{a/b}_{c/b}> for b != 0,
/// |e^N_{c/a}> for b = 0.
pub fn marginal_expected(mub: &MubSet, a: GfEl, b: GfEl, c: GfEl) -> Result<CMat> {
    let f = mub.spec();
    let (i, k) = if b != 0 {
        (f.div(a, b)? as usize, f.div(c, b)? as usize)
    } else if a != 0 {
        (mub.n(), f.div(c, a)? as usize)
    } else {
        return Err(Error::DegenerateLine);
    };
    Ok(projector(&mub.ket(i, k)))
}

/// Results of the Wigner-basis criteria.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerReport {
    pub w1_hermitian: bool,
    pub w2_unit_trace: bool,
    pub w3_orthogonal: bool,
    pub w4_covariant: bool,
    pub w5_marginals: bool,
    /// Parity seed and factorization; `None` when not applicable (p = 2 or
    /// non-symmetric phases).
    pub w6_parity: Option<bool>,
    /// W^2 = 1 (odd p, symmetric) or W^2 = W + 1/2 (N = 2).
    pub spectrum_ok: Option<bool>,
    pub max_residual: f64,
}

impl WignerReport {
    pub fn all_pass(&self) -> bool {
        self.w1_hermitian
            && self.w2_unit_trace
            && self.w3_orthogonal
            && self.w4_covariant
            && self.w5_marginals
            && self.w6_parity != Some(false)
            && self.spectrum_ok != Some(false)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "W1": self.w1_hermitian, "W2": self.w2_unit_trace, "W3": self.w3_orthogonal,
            "W4": self.w4_covariant, "W5": self.w5_marginals, "W6": self.w6_parity,
            "spectrum": self.spectrum_ok, "maxResidual": self.max_residual,
        })
    }
}

/// Sum_k |-k><k| as a permutation matrix.
pub fn parity(spec: &GfSpec) -> CMat {
    let n = spec.n() as usize;
    DMatrix::from_fn(n, n, |r, c| Complex64::from(f64::from(u8::from(r == spec.neg(c as GfEl) as usize))))
}

/// Tensor product of m single-digit parity operators, first factor the
/// least significant digit.
pub fn parity_product(spec: &GfSpec) -> CMat {
    let p = spec.p() as usize;
    let single = DMatrix::from_fn(p, p, |r, c| Complex64::from(f64::from(u8::from(r == (p - c) % p))));
    float_tensor_all(&vec![single; spec.m() as usize])
}

pub fn wigner_criteria(mub: &MubSet, basis: &WignerBasis) -> WignerReport {
    const TOL: f64 = 1e-10;
    let f = mub.spec();
    let n = basis.n;
    let hw = mub.hw();
    let id = CMat::identity(n, n);
    let mut worst: f64 = 0.0;
    let mut track = |r: f64| {
        worst = worst.max(r);
        r < TOL
    };
    let w1 = basis.ops.iter().all(|w| track(max_abs_diff(w, &w.adjoint())));
    let w2 = basis.ops.iter().all(|w| track((w.trace() - Complex64::from(1.0)).norm()));
    let mut w3 = true;
    for a in 0..n * n {
        for b in 0..n * n {
            let want = if a == b { n as f64 } else { 0.0 };
            w3 &= track((trace_dagger_product(&basis.ops[a], &basis.ops[b]) - Complex64::from(want)).norm());
        }
    }
    let w00 = basis.get(0, 0);
    let mut w4 = true;
    for m in 0..n as GfEl {
        for k in 0..n as GfEl {
            let v = hw.v_float(m, k);
            w4 &= track(max_abs_diff(&(&v * w00 * v.adjoint()), basis.get(m, k)));
        }
    }
    let mut w5 = true;
    for a in 0..n as GfEl {
        for b in 0..n as GfEl {
            if a == 0 && b == 0 {
                continue;
            }
            for c in 0..n as GfEl {
                let got = marginal(f, basis, a, b, c).expect("nondegenerate line");
                let want = marginal_expected(mub, a, b, c).expect("nondegenerate line");
                w5 &= track(max_abs_diff(&got, &want));
            }
        }
    }
    let odd_sym = f.p() != 2 && basis.symmetric;
    let w6 = odd_sym.then(|| {
        let r = max_abs_diff(w00, &parity(f)).max(max_abs_diff(w00, &parity_product(f)));
        track(r)
    });
    let spectrum_ok = if odd_sym {
        Some(basis.ops.iter().all(|w| track(max_abs_diff(&(w * w), &id))))
    } else if n == 2 {
        Some(basis.ops.iter().all(|w| track(max_abs_diff(&(w * w), &(w + &id * Complex64::from(0.5))))))
    } else {
        None
    };
    WignerReport {
        w1_hermitian: w1,
        w2_unit_trace: w2,
        w3_orthogonal: w3,
        w4_covariant: w4,
        w5_marginals: w5,
        w6_parity: w6,
        spectrum_ok,
        max_residual: worst,
    }
}

/// Grid of <e^i_k|W_{m,n}|e^i_k>, indexed [m][n].
pub fn mub_expectations(mub: &MubSet, basis: &WignerBasis, i: usize, k: usize) -> Vec<Vec<f64>> {
    let n = basis.n;
    let e = DMatrix::from_vec(n, 1, mub.ket(i, k));
    (0..n)
        .map(|m| (0..n).map(|j| (e.adjoint() * &basis.ops[m * n + j] * &e)[(0, 0)].re).collect())
        .collect()
}

/// Largest residual of C_i W_{i1,i2} C_i^dagger = W_{i2, i i2 - i1} over all
/// points, for one i < N. This is the relabeling that follows from the
/// displacement-operator law Gamma V_m^n = C_i Gamma V_{i m - n}^m C_i^dagger.
pub fn clifford_covariance_residual(mub: &MubSet, basis: &WignerBasis, i: usize) -> f64 {
    let f = mub.spec();
    let n = basis.n;
    let c = mub.basis_float(i);
    let mut worst: f64 = 0.0;
    for i1 in 0..n as GfEl {
        for i2 in 0..n as GfEl {
            let lhs = &c * basis.get(i1, i2) * c.adjoint();
            let rhs = basis.get(i2, f.sub(f.mul(i as GfEl, i2), i1));
            worst = worst.max(max_abs_diff(&lhs, rhs));
        }
    }
    worst
}

/// Gamma_{m,n}: 1 for m = 0, alpha_m^{n/m} otherwise, as an exponent of
/// the alpha phase order.
pub fn gamma_phase_exp(mub: &MubSet, m: GfEl, n: GfEl) -> u64 {
    if m == 0 {
        0
    } else {
        let f = mub.spec();
        let i = f.div(n, m).expect("m nonzero");
        mub.alpha().exps[i as usize][m as usize]
    }
}

/// Even-p covariance experiment: residual of the Clifford relation for
/// each i < N. Nothing is asserted about the outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceExperiment {
    pub n: usize,
    pub residuals: Vec<f64>,
}

impl CovarianceExperiment {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(|&r| r < 1e-10)
    }
}

pub fn covariance_experiment(mub: &MubSet) -> CovarianceExperiment {
    let basis = wigner_basis(mub);
    let residuals = (0..mub.n()).map(|i| clifford_covariance_residual(mub, &basis, i)).collect();
    CovarianceExperiment { n: mub.n(), residuals }
}

/// The b-twisted seed W^(b)_{0,0} for odd p:
/// (1/N) sum_{i,k} gamma^{2 b_s k} V_k^0 V_0^i V_k^0, where s = i/(2k) is the
/// basis that the term V_{2k}^i belongs to (no twist for k = 0).
pub fn twisted_seed(hw: &GaloisHW, b: &[GfEl]) -> Result<CMat> {
    let f = hw.spec();
    if f.p() == 2 {
        return Err(Error::BadParameter("twisted seed formula requires odd p".into()));
    }
    let n = f.n() as usize;
    if b.len() != n || b[0] != 0 {
        return Err(Error::BadParameter("b must have N entries with b_0 = 0".into()));
    }
    let mut w = CMat::zeros(n, n);
    for i in 0..n as GfEl {
        for k in 0..n as GfEl {
            let e = if k == 0 {
                0
            } else {
                let bs = b[f.div(i, f.add(k, k))? as usize];
                f.char_exp(f.mul(f.add(bs, bs), k)) as i64
            };
            let vk = hw.v_float(k, 0);
            w += &vk * hw.v_float(0, i) * &vk * root_of_unity(f.p() as u64, e);
        }
    }
    Ok(w / Complex64::from(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::AlphaTable;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn mub(n: u32) -> MubSet {
        MubSet::standard(Arc::new(GfSpec::of_order(n).unwrap())).unwrap()
    }

    fn random_density(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let r = &a * a.adjoint();
        let t = r.trace();
        r / t
    }

    #[test]
    fn weyl_grid_examples() {
        let m = mub(4);
        let hw = m.hw();
        let g = weyl_analyze(hw, &CMat::identity(4, 4)).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let want = if (a, b) == (0, 0) { 4.0 } else { 0.0 };
                assert!((g.values[(a, b)] - Complex64::from(want)).norm() < 1e-12);
            }
        }
        let g = weyl_analyze(hw, &hw.v_float(2, 3)).unwrap();
        assert!((g.values[(2, 3)] - Complex64::from(4.0)).norm() < 1e-12);
        assert!((g.values.norm_squared() - 16.0).abs() < 1e-9);
        let ex = weyl_analyze_exact(hw, hw.v(2, 3)).unwrap();
        assert!((ex[2 * 4 + 3].to_complex() - Complex64::from(4.0)).norm() < 1e-12);
        assert!(ex[0].to_complex().norm() < 1e-12);
        assert!(weyl_analyze(hw, &CMat::identity(3, 3)).is_err());
    }

    #[test]
    fn ubar_relabeling_matches_direct() {
        for n in [3u32, 4, 5, 8] {
            let m = mub(n);
            let x = random_density(n as usize, n as u64);
            let g = weyl_analyze(m.hw(), &x).unwrap();
            let a = ubar_from_weyl(&m, &g);
            let b = ubar_direct(&m, &x).unwrap();
            assert!(max_abs_diff(&a.values, &b.values) < 1e-10, "N={n}");
        }
    }

    #[test]
    fn tomography_round_trip() {
        let m = mub(4);
        let p = tomography(&m, &(CMat::identity(4, 4) / Complex64::from(4.0))).unwrap();
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-12));
        let rho = projector(&m.ket(2, 1));
        let p = tomography(&m, &rho).unwrap();
        for i in 0..5 {
            for k in 0..4 {
                let want = if i == 2 { f64::from(u8::from(k == 1)) } else { 0.25 };
                assert!((p[(i, k)] - want).abs() < 1e-12);
            }
        }
        assert!(max_abs_diff(&reconstruct(&m, &p).unwrap(), &rho) < 1e-9);
        let m5 = mub(5);
        let rho = random_density(5, 3);
        let p = tomography(&m5, &rho).unwrap();
        let r = ubar_from_probabilities(&m5, &p);
        for i in 0..6 {
            assert!((r.values[(i, 0)] - Complex64::from(1.0)).norm() < 1e-12);
        }
        // the probability route agrees with tr(U^dagger rho)
        assert!(max_abs_diff(&r.values, &ubar_direct(&m5, &rho).unwrap().values) < 1e-10);
        assert!((reconstruct(&m5, &p).unwrap() - &rho).norm() < 1e-9);
        assert!(matches!(tomography(&m5, &CMat::identity(5, 5)), Err(Error::NotDensityMatrix(_))));
    }

    #[test]
    fn qubit_wigner_operators() {
        let m = mub(2);
        let basis = wigner_basis(&m);
        let [sx, sy, sz] = crate::mub::paulis();
        let id = CMat::identity(2, 2);
        let half = Complex64::from(0.5);
        // The four sign patterns of (sigma_x, sigma_y, sigma_z); with
        // V_1^1 = i sigma_y and alpha^1_1 = i the sigma_y sign is reversed
        // relative to the usual listing.
        let want = [
            (0, 0, [1.0, -1.0, 1.0]),
            (0, 1, [-1.0, 1.0, 1.0]),
            (1, 0, [1.0, 1.0, -1.0]),
            (1, 1, [-1.0, -1.0, -1.0]),
        ];
        for (a, b, s) in want {
            let w = (&id + &sx * Complex64::from(s[0]) + &sy * Complex64::from(s[1]) + &sz * Complex64::from(s[2])) * half;
            assert!(max_abs_diff(basis.get(a, b), &w) < 1e-12, "W_{a}{b}");
        }
        let r = wigner_criteria(&m, &basis);
        assert!(r.all_pass() && r.spectrum_ok == Some(true) && r.w6_parity.is_none());
    }

    #[test]
    fn qubit_wigner_operators_with_b_twist() {
        let spec = Arc::new(GfSpec::of_order(2).unwrap());
        let alpha = AlphaTable::new(&spec, true).twisted(&spec, &[0, 1]);
        let m = MubSet::new(spec, alpha).unwrap();
        let basis = wigner_basis(&m);
        let [sx, sy, sz] = crate::mub::paulis();
        let id = CMat::identity(2, 2);
        let half = Complex64::from(0.5);
        let want = [
            (0, 0, [1.0, 1.0, 1.0]),
            (0, 1, [-1.0, -1.0, 1.0]),
            (1, 0, [1.0, -1.0, -1.0]),
            (1, 1, [-1.0, 1.0, -1.0]),
        ];
        for (a, b, s) in want {
            let w = (&id + &sx * Complex64::from(s[0]) + &sy * Complex64::from(s[1]) + &sz * Complex64::from(s[2])) * half;
            assert!(max_abs_diff(basis.get(a, b), &w) < 1e-12, "W_{a}{b}");
        }
        assert!(wigner_criteria(&m, &basis).all_pass());
    }

    #[test]
    fn criteria_by_dimension() {
        for n in [3u32, 5, 9] {
            let m = mub(n);
            let b = wigner_basis(&m);
            let r = wigner_criteria(&m, &b);
            assert!(r.all_pass(), "N={n}: {r:?}");
            assert_eq!(r.w6_parity, Some(true));
            assert_eq!(r.spectrum_ok, Some(true));
            // multiplicity of +1 from W^2 = 1 and tr W = 1
            let plus = (b.get(0, 0).trace().re + n as f64) / 2.0;
            assert!((plus - (n as f64 + 1.0) / 2.0).abs() < 1e-12);
        }
        for n in [4u32, 8] {
            let m = mub(n);
            let r = wigner_criteria(&m, &wigner_basis(&m));
            assert!(r.all_pass(), "N={n}");
            assert!(r.w6_parity.is_none());
        }
    }

    #[test]
    fn ergodic_and_simplex() {
        for n in [3u32, 4] {
            let b = wigner_basis(&mub(n));
            let d = n as usize;
            let s: CMat = b.ops.iter().fold(CMat::zeros(d, d), |acc, w| acc + w);
            assert!(max_abs_diff(&s, &(CMat::identity(d, d) * Complex64::from(n as f64))) < 1e-10);
            let rs = CMat::identity(d, d) / Complex64::from(n as f64);
            let face: CMat = b.ops.iter().fold(CMat::zeros(d, d), |acc, w| acc + (w - &rs));
            assert!(face.norm() < 1e-10);
        }
    }

    #[test]
    fn marginal_examples() {
        let m3 = mub(3);
        let b3 = wigner_basis(&m3);
        for k in 0..3u32 {
            let got = marginal(m3.spec(), &b3, 1, 0, k).unwrap();
            let mut want = CMat::zeros(3, 3);
            want[(k as usize, k as usize)] = Complex64::from(1.0);
            assert!(max_abs_diff(&got, &want) < 1e-12);
        }
        let m4 = mub(4);
        let b4 = wigner_basis(&m4);
        let got = marginal(m4.spec(), &b4, 2, 1, 0).unwrap();
        assert!(max_abs_diff(&got, &projector(&m4.ket(2, 0))) < 1e-12);
        assert_eq!(marginal(m4.spec(), &b4, 0, 0, 0), Err(Error::DegenerateLine));
    }

    #[test]
    fn expectation_grids() {
        let m = mub(5);
        let f = m.spec().clone();
        let b = wigner_basis(&m);
        for i in 0..=5usize {
            for k in 0..5usize {
                let g = mub_expectations(&m, &b, i, k);
                let mut ones = 0;
                for mm in 0..5u32 {
                    for nn in 0..5u32 {
                        let want = if i == 5 {
                            mm as usize == k
                        } else {
                            f.add(k as u32, nn) == f.mul(i as u32, mm)
                        };
                        assert!((g[mm as usize][nn as usize] - f64::from(u8::from(want))).abs() < 1e-10);
                        ones += usize::from(want);
                    }
                }
                assert_eq!(ones, 5);
            }
        }
    }

    #[test]
    fn clifford_covariance_odd() {
        for n in [3u32, 5, 9] {
            let m = mub(n);
            let b = wigner_basis(&m);
            for i in 0..n as usize {
                assert!(clifford_covariance_residual(&m, &b, i) < 1e-10, "N={n} i={i}");
            }
        }
    }

    #[test]
    fn covariance_experiment_runs() {
        let e = covariance_experiment(&mub(4));
        assert_eq!(e.residuals.len(), 4);
        assert!(covariance_experiment(&mub(5)).holds());
    }

    #[test]
    fn gamma_phase_square() {
        for n in [2u32, 3, 4, 5, 8, 9] {
            let m = mub(n);
            let f = m.spec();
            let ord = m.phase_order();
            let step = ord / f.p() as u64;
            for a in 0..n {
                for b in 0..n {
                    let sq = 2 * gamma_phase_exp(&m, a, b) % ord;
                    let want = step * f.char_exp(f.neg(f.mul(a, b))) as u64 % ord;
                    assert_eq!(sq, want, "N={n} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn twisted_seed_two_routes() {
        for (n, b) in [(3u32, vec![0u32, 1, 2]), (5, vec![0, 0, 1, 2, 1]), (9, vec![0, 1, 2, 0, 1, 2, 0, 1, 2])] {
            let spec = Arc::new(GfSpec::of_order(n).unwrap());
            let table = AlphaTable::new(&spec, true).twisted(&spec, &b);
            let tm = MubSet::new(spec.clone(), table).unwrap();
            let tw = wigner_basis(&tm);
            let formula = twisted_seed(tm.hw(), &b).unwrap();
            assert!(max_abs_diff(tw.get(0, 0), &formula) < 1e-10, "N={n}");
            let via = wigner_basis_twisted(spec.clone(), &b).unwrap();
            assert!(max_abs_diff(via.get(0, 0), tw.get(0, 0)) < 1e-12);
            let std = wigner_basis(&mub(n));
            assert!(std.ops.iter().all(|w| max_abs_diff(w, tw.get(0, 0)) > 1e-6));
            let zero = twisted_seed(tm.hw(), &vec![0; n as usize]).unwrap();
            assert!(max_abs_diff(&zero, &parity(&spec)) < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn weyl_and_wigner_round_trip(seed in any::<u64>(), which in 0usize..4) {
            let n = [2u32, 3, 4, 5][which];
            let m = mub(n);
            let d = n as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let x = &a + a.adjoint();
            let g = weyl_analyze(m.hw(), &x).unwrap();
            prop_assert!(max_abs_diff(&weyl_synthesize(m.hw(), &g), &x) < 1e-10);
            let b = wigner_basis(&m);
            let w = wigner_analyze(&b, &x).unwrap();
            prop_assert!(w.max_imag() < 1e-10);
            prop_assert!(max_abs_diff(&wigner_synthesize(&b, &w), &x) < 1e-10);
        }
    }
}
