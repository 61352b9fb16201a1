//! The N+1 mutually unbiased bases of GF(p^m) and their abelian operator
//! subgroups U^i_l.
//!
//! Phases are exponents of gamma_L with L = p for odd p and L = 4 for p = 2.
//! Basis N is the computational basis and basis 0 the dual basis.

use crate::cnum::{root_of_unity, CMatrix, CycloScalar, ExactMatrix, Scale};
use crate::error::{Error, Result};
use crate::gf::{GfEl, GfSpec};
use crate::weylops::{GaloisHW, Monomial};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Order of the roots of unity that carry the alpha phases.
pub fn phase_order(spec: &GfSpec) -> u64 {
    if spec.p() == 2 {
        4
    } else {
        spec.p() as u64
    }
}

/// Phase factors alpha^i_l as exponents of gamma_L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaTable {
    pub order: u64,
    pub symmetric: bool,
    /// `exps[i][l]` for i, l in 0..N.
    pub exps: Vec<Vec<u64>>,
}

impl AlphaTable {
    /// Standard choice. For odd p, `symmetric = true` gives
    /// alpha^i_l = gamma^{-(i l l)/2}; `false` gives the twist with
    /// b_i = -i/2, which for N = p reproduces U^i_l = (X Z^i)^l. For p = 2
    /// the product-of-powers-of-i formula is used and is always symmetric.
    pub fn new(spec: &GfSpec, symmetric: bool) -> Self {
        let f = spec;
        let n = f.n();
        let l_ord = phase_order(f);
        let exps: Vec<Vec<u64>> = if f.p() == 2 {
            let m = f.m();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|l| {
                            let bits: Vec<u32> = (0..m).filter(|b| l >> b & 1 == 1).map(|b| 1 << b).collect();
                            let mut e = 0u64;
                            for &a in &bits {
                                for &b in &bits {
                                    e += f.mul(f.mul(i, a), b) as u64;
                                }
                            }
                            e % 4
                        })
                        .collect()
                })
                .collect()
        } else {
            let two_inv = f.inv(2 % f.p()).expect("2 is invertible for odd p");
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|l| {
                            let x = f.mul(f.neg(f.mul(f.mul(i, l), l)), two_inv);
                            f.char_exp(x) as u64
                        })
                        .collect()
                })
                .collect()
        };
        let table = AlphaTable { order: l_ord, symmetric: true, exps };
        if symmetric || f.p() == 2 {
            table
        } else {
            let two_inv = f.inv(2).expect("odd p");
            let b: Vec<GfEl> = (0..n).map(|i| f.neg(f.mul(i, two_inv))).collect();
            let mut t = table.twisted(f, &b);
            t.symmetric = false;
            t
        }
    }

    /// alpha^i_l -> alpha^i_l gamma^{b_i l}. `b[0]` must be 0 so that
    /// alpha^0_l = 1 survives.
    pub fn twisted(&self, spec: &GfSpec, b: &[GfEl]) -> Self {
        let f = spec;
        let step = self.order / f.p() as u64;
        let exps = self
            .exps
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(l, &e)| (e + step * f.char_exp(f.mul(b[i], l as u32)) as u64) % self.order)
                    .collect()
            })
            .collect();
        let mut t = AlphaTable { order: self.order, symmetric: false, exps };
        t.symmetric = t.is_symmetric(f);
        t
    }

    pub fn is_symmetric(&self, spec: &GfSpec) -> bool {
        let n = spec.n();
        (0..n as usize).all(|i| (0..n).all(|l| self.exps[i][l as usize] == self.exps[i][spec.neg(l) as usize]))
    }

    pub fn get(&self, i: GfEl, l: GfEl) -> CycloScalar {
        CycloScalar::root(self.order, self.exps[i as usize][l as usize] as i64)
    }

    /// Checks alpha^i_0 = alpha^0_l = 1 and the group law
    /// alpha^i_k alpha^i_l = alpha^i_{k+l} gamma^{i k l}.
    pub fn verify(&self, spec: &GfSpec) -> Result<()> {
        let f = spec;
        let n = f.n();
        let step = self.order / f.p() as u64;
        for t in 0..n as usize {
            if self.exps[t][0] != 0 || self.exps[0][t] != 0 {
                return Err(Error::AxiomViolation(format!("alpha boundary condition fails at {t}")));
            }
        }
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let lhs = self.exps[i as usize][k as usize] + self.exps[i as usize][l as usize];
                    let rhs = self.exps[i as usize][f.add(k, l) as usize]
                        + step * f.char_exp(f.mul(f.mul(i, k), l)) as u64;
                    if !(lhs + self.order - rhs % self.order).is_multiple_of(self.order) {
                        return Err(Error::AxiomViolation(format!("alpha group law fails at i={i} k={k} l={l}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The complete set of N+1 mutually unbiased bases.
#[derive(Debug)]
pub struct MubSet {
    hw: GaloisHW,
    alpha: AlphaTable,
    /// `kets[i][k][l]`: exponent of gamma_L in sqrt(N) <l|e^i_k>, i < N.
    kets: Vec<Vec<Vec<u64>>>,
}

impl MubSet {
    pub fn new(spec: Arc<GfSpec>, alpha: AlphaTable) -> Result<Self> {
        alpha.verify(&spec)?;
        let f = &*spec;
        let n = f.n();
        let l_ord = alpha.order;
        let step = l_ord / f.p() as u64;
        // <l|e^i_k> = N^{-1/2} gamma^{-k l} conj(alpha^i_{-l}).
        let kets = (0..n as usize)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        (0..n)
                            .map(|l| {
                                let a = alpha.exps[i][f.neg(l) as usize];
                                (step * f.char_exp(f.neg(f.mul(k, l))) as u64 + l_ord - a) % l_ord
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(MubSet { hw: GaloisHW::new(spec), alpha, kets })
    }

    /// Default symmetric phase convention.
    pub fn standard(spec: Arc<GfSpec>) -> Result<Self> {
        let alpha = AlphaTable::new(&spec, true);
        Self::new(spec, alpha)
    }

    pub fn spec(&self) -> &GfSpec {
        self.hw.spec()
    }
    pub fn hw(&self) -> &GaloisHW {
        &self.hw
    }
    pub fn alpha(&self) -> &AlphaTable {
        &self.alpha
    }
    pub fn n(&self) -> usize {
        self.spec().n() as usize
    }
    pub fn phase_order(&self) -> u64 {
        self.alpha.order
    }

    /// Exponents of sqrt(N) <l|e^i_k> for i < N; `None` for i = N.
    pub fn ket_exps(&self, i: usize, k: usize) -> Option<&[u64]> {
        self.kets.get(i).map(|b| b[k].as_slice())
    }

    /// Ket |e^i_k> as a float vector.
    pub fn ket(&self, i: usize, k: usize) -> Vec<Complex64> {
        let n = self.n();
        match self.ket_exps(i, k) {
            Some(e) => {
                let s = 1.0 / (n as f64).sqrt();
                e.iter().map(|&x| root_of_unity(self.alpha.order, x as i64) * s).collect()
            }
            None => (0..n).map(|l| Complex64::new(f64::from(u8::from(l == k)), 0.0)).collect(),
        }
    }

    /// Basis i as an exact matrix whose columns are the kets; this is the
    /// Clifford operator C_i.
    pub fn basis(&self, i: usize) -> ExactMatrix {
        let n = self.n();
        match self.kets.get(i) {
            Some(b) => ExactMatrix::from_exponents(n, n, self.alpha.order, Scale::inv_sqrt(n as u64), |l, k| {
                Some(b[k][l] as i64)
            }),
            None => ExactMatrix::identity(n),
        }
    }

    pub fn basis_float(&self, i: usize) -> DMatrix<Complex64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |l, k| self.ket(i, k)[l])
    }

    /// C_i = sum_k |e^i_k><e^N_k|.
    pub fn clifford(&self, i: usize) -> ExactMatrix {
        self.basis(i)
    }

    /// U^i_l as a monomial over gamma_L: V^l_0 for i = N, alpha^i_l
    /// V_l^{i l} otherwise.
    pub fn u_monomial(&self, i: usize, l: GfEl) -> Monomial {
        let f = self.spec();
        let (n, l_ord) = (self.n(), self.alpha.order);
        let step = l_ord / f.p() as u64;
        let (v, phase) = if i == n {
            (self.hw.monomial(0, l), 0)
        } else {
            (self.hw.monomial(l, f.mul(i as u32, l)), self.alpha.exps[i][l as usize])
        };
        Monomial {
            order: l_ord,
            perm: v.perm,
            exps: v.exps.iter().map(|&e| (e * step + phase) % l_ord).collect(),
        }
    }

    pub fn u(&self, i: usize, l: GfEl) -> ExactMatrix {
        self.u_monomial(i, l).to_exact()
    }

    /// Z_i = sum_k |e^i_k> gamma_N^k <e^i_k|, exact.
    pub fn complementary_observable(&self, i: usize) -> Result<ExactMatrix> {
        let n = self.n();
        let d = ExactMatrix::from_exponents(n, n, n as u64, Scale::one(), |r, c| (r == c).then_some(r as i64));
        let c = self.clifford(i);
        c.mul(&d)?.mul(&c.dagger())
    }

    /// Overlap <e^i_k|e^j_l> exactly (scale 1/N or 1/sqrt(N) folded in).
    pub fn overlap(&self, i: usize, k: usize, j: usize, l: usize) -> crate::cnum::Scalar {
        let n = self.n();
        let l_ord = self.alpha.order;
        let (a, b) = (self.ket_exps(i, k), self.ket_exps(j, l));
        match (a, b) {
            (Some(a), Some(b)) => {
                let mut counts = vec![0i64; l_ord as usize];
                for x in 0..n {
                    counts[((b[x] + l_ord - a[x]) % l_ord) as usize] += 1;
                }
                crate::cnum::Scalar::Exact {
                    value: CycloScalar::from_counts(l_ord, &counts),
                    scale: Scale::rational(num_rational::Rational64::new(1, n as i64)),
                }
            }
            (None, Some(b)) => crate::cnum::Scalar::Exact {
                value: CycloScalar::root(l_ord, b[k] as i64),
                scale: Scale::inv_sqrt(n as u64),
            },
            (Some(a), None) => crate::cnum::Scalar::Exact {
                value: CycloScalar::root(l_ord, -(a[l] as i64)),
                scale: Scale::inv_sqrt(n as u64),
            },
            (None, None) => crate::cnum::Scalar::Exact {
                value: CycloScalar::from_int(i64::from(k == l)),
                scale: Scale::one(),
            },
        }
    }

    /// Exact check of |<e^i_k|e^j_l>|^2 = delta_ij delta_kl + (1-delta_ij)/N
    /// for all pairs. Returns the number of overlaps checked.
    pub fn verify_unbiased(&self) -> Result<usize> {
        let n = self.n();
        let l_ord = self.alpha.order;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let nn = CycloScalar::from_int(n as i64);
        let zero = CycloScalar::zero();
        let nsq = CycloScalar::from_int((n * n) as i64);
        let bad = pairs.par_iter().find_map_any(|&(i, j)| {
            for k in 0..n {
                let a = &self.kets[i][k];
                for l in 0..n {
                    let b = &self.kets[j][l];
                    let mut counts = vec![0i64; l_ord as usize];
                    for x in 0..n {
                        counts[((b[x] + l_ord - a[x]) % l_ord) as usize] += 1;
                    }
                    // S = N <e^i_k|e^j_l>.
                    let s = CycloScalar::from_counts(l_ord, &counts);
                    let ss = s.mul(&s.conj()).expect("same order");
                    let want = if i != j { &nn } else if k == l { &nsq } else { &zero };
                    if &ss != want {
                        return Some(format!("|<e^{i}_{k}|e^{j}_{l}>|^2 wrong"));
                    }
                }
            }
            None
        });
        // Basis N against the others is unbiased because every ket entry is
        // a root of unity times N^{-1/2}; orthonormality of basis N is trivial.
        match bad {
            Some(msg) => Err(Error::AxiomViolation(msg)),
            None => Ok(pairs.len() * n * n + 2 * n * n * n),
        }
    }

    /// U^i_l |e^i_k> = gamma^{k l} |e^i_k> for all i, k, l (exact integer
    /// bookkeeping).
    pub fn verify_eigenvalues(&self) -> Result<()> {
        let f = self.spec();
        let n = self.n();
        let l_ord = self.alpha.order;
        let step = l_ord / f.p() as u64;
        for i in 0..=n {
            for l in 0..n as u32 {
                let u = self.u_monomial(i, l);
                for k in 0..n {
                    let ev = step * f.char_exp(f.mul(k as u32, l)) as u64;
                    let ok = match self.ket_exps(i, k) {
                        Some(e) => (0..n).all(|x| (e[x] + u.exps[x]) % l_ord == (e[u.perm[x]] + ev) % l_ord),
                        None => u.perm[k] == k && u.exps[k] == ev,
                    };
                    if !ok {
                        return Err(Error::AxiomViolation(format!("U^{i}_{l} eigenvalue fails on e^{i}_{k}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// V^n_m |e^i_0> = |e^i_{i m - n}> conj(alpha^i_m) for i < N and
    /// V^n_m |e^N_0> = gamma^{m n} |e^N_m>.
    pub fn verify_shift_action(&self) -> Result<()> {
        let f = self.spec();
        let n = self.n();
        let l_ord = self.alpha.order;
        let step = l_ord / f.p() as u64;
        for m in 0..n as u32 {
            for nn in 0..n as u32 {
                let v = self.hw.monomial(m, nn);
                if v.perm[0] != m as usize || v.exps[0] != f.char_exp(f.mul(m, nn)) as u64 {
                    return Err(Error::AxiomViolation(format!("V^{nn}_{m} on e^N_0")));
                }
                for i in 0..n {
                    let e0 = &self.kets[i][0];
                    let target = f.sub(f.mul(i as u32, m), nn) as usize;
                    let et = &self.kets[i][target];
                    let a = self.alpha.exps[i][m as usize];
                    let ok = (0..n).all(|x| {
                        (e0[x] + v.exps[x] * step) % l_ord == (et[v.perm[x]] + l_ord - a) % l_ord
                    });
                    if !ok {
                        return Err(Error::AxiomViolation(format!("shift V^{nn}_{m} on basis {i}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// tr(U^i_l^dagger V_m^n) = N delta_{i l, n} delta_{l, m} conj(alpha^i_l),
    /// checked for all i < N, l, m, n.
    pub fn verify_trace_relation(&self) -> Result<()> {
        let f = self.spec();
        let n = self.n();
        let l_ord = self.alpha.order;
        let step = l_ord / f.p() as u64;
        for i in 0..n {
            for l in 0..n as u32 {
                let ud = self.u_monomial(i, l).dagger();
                for m in 0..n as u32 {
                    for nn in 0..n as u32 {
                        let v = self.hw.monomial(m, nn);
                        let v = Monomial { order: l_ord, perm: v.perm, exps: v.exps.iter().map(|e| e * step).collect() };
                        let t = ud.mul(&v).trace();
                        let want = if f.mul(i as u32, l) == nn && l == m {
                            CycloScalar::root(l_ord, -(self.alpha.exps[i][l as usize] as i64))
                                .scale_rational((n as i64).into())
                        } else {
                            CycloScalar::zero()
                        };
                        if t != want {
                            return Err(Error::AxiomViolation(format!("tr(U^{i}_{l}^+ V^{nn}_{m})")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Solves U g U^dagger = g' for all pairs, returning U normalized to be
/// unitary with det(U) real positive and the first significant entry's
/// phase in [0, 2 pi / N).
pub fn solve_intertwiner(pairs: &[(DMatrix<Complex64>, DMatrix<Complex64>)]) -> Result<DMatrix<Complex64>> {
    let Some((g0, _)) = pairs.first() else {
        return Err(Error::BadParameter("at least one generator pair is required".into()));
    };
    let n = g0.nrows();
    let nn = n * n;
    let mut stacked = DMatrix::<Complex64>::zeros(nn * pairs.len(), nn);
    let id = DMatrix::<Complex64>::identity(n, n);
    for (t, (g, gp)) in pairs.iter().enumerate() {
        if g.shape() != (n, n) || gp.shape() != (n, n) {
            return Err(Error::DimensionMismatch("generator pairs must be square of equal size".into()));
        }
        // vec(U g - g' U) = (g^T kron 1 - 1 kron g') vec(U), column-major vec.
        let block = g.transpose().kronecker(&id) - id.kronecker(gp);
        stacked.view_mut((t * nn, 0), (nn, nn)).copy_from(&block);
    }
    // Null space via the Hermitian matrix A^dagger A.
    let gram = stacked.adjoint() * &stacked;
    let eig = nalgebra::linalg::SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let null: Vec<usize> = (0..nn).filter(|&k| eig.eigenvalues[k].abs() < 1e-10 * scale).collect();
    match null.len() {
        0 => return Err(Error::NoSolution),
        1 => {}
        d => return Err(Error::NonUniqueSolution(d)),
    }
    let v = eig.eigenvectors.column(null[0]);
    let mut u = DMatrix::from_fn(n, n, |r, c| v[r + c * n]);
    let c = (u.adjoint() * &u).trace().re / n as f64;
    u /= Complex64::from(c.sqrt());
    if crate::cnum::max_abs_diff(&(u.adjoint() * &u), &id) > 1e-8 {
        return Err(Error::NoSolution);
    }
    let det = u.determinant();
    u *= Complex64::from_polar(1.0, -det.arg() / n as f64);
    let first = u.iter().find(|z| z.norm() > 1e-9).copied().expect("unitary is nonzero");
    let sector = (first.arg().rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI / n as f64)).floor();
    u *= root_of_unity(n as u64, -(sector as i64));
    Ok(u)
}

/// Pauli matrices sigma_x, sigma_y, sigma_z.
pub fn paulis() -> [DMatrix<Complex64>; 3] {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    [
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// The period-5 generator map for two qubits:
/// (sx 1, sz 1, 1 sx, 1 sz) -> (sy sy, 1 sx, sy 1, sx sx), first factor
/// on the least significant index.
pub fn n4_period5_pairs() -> Vec<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    use crate::cnum::float_tensor as t;
    let [sx, sy, sz] = paulis();
    let one = DMatrix::identity(2, 2);
    vec![
        (t(&sx, &one), t(&sy, &sy)),
        (t(&sz, &one), t(&one, &sx)),
        (t(&one, &sx), t(&sy, &one)),
        (t(&one, &sz), t(&sx, &sx)),
    ]
}

/// Largest deviation of Z_i^N from 1 and of tr(Z_i^a Z_j^b)/N from
/// delta_{a0} delta_{b0} over all i != j (float check).
pub fn complementarity_deviation(zs: &[DMatrix<Complex64>]) -> f64 {
    let n = zs[0].nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let powers: Vec<Vec<DMatrix<Complex64>>> = zs
        .iter()
        .map(|z| {
            let mut v = vec![id.clone()];
            for a in 1..=n {
                v.push(&v[a - 1] * z);
            }
            v
        })
        .collect();
    let mut worst = powers.iter().map(|p| crate::cnum::max_abs_diff(&p[n], &id)).fold(0.0, f64::max);
    for i in 0..zs.len() {
        for j in 0..zs.len() {
            if i == j {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    let t = (&powers[i][a] * &powers[j][b]).trace() / n as f64;
                    let want = if a == 0 && b == 0 { 1.0 } else { 0.0 };
                    worst = worst.max((t - want).norm());
                }
            }
        }
    }
    worst
}

impl MubSet {
    /// All Z_i as float matrices.
    pub fn complementary_observables_float(&self) -> Result<Vec<DMatrix<Complex64>>> {
        (0..=self.n()).map(|i| Ok(self.complementary_observable(i)?.to_float())).collect()
    }

    /// Whole set as JSON matrices.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "field": self.spec().to_json(),
            "phaseOrder": self.alpha.order,
            "alphaExps": self.alpha.exps,
            "bases": (0..=self.n()).map(|i| CMatrix::from(self.basis(i)).to_json()).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnum::{max_abs_diff, CheckKind};

    fn mub(n: u32) -> MubSet {
        MubSet::standard(Arc::new(GfSpec::of_order(n).unwrap())).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn n4_alpha_golden() {
        let m = mub(4);
        let conj = |i: usize| -> Vec<u64> { m.alpha().exps[i].iter().map(|e| (4 - e) % 4).collect() };
        // A1 = diag(1, -i, i, 1), A2 = diag(1, -1, -i, -i), A3 = diag(1, i, -1, i)
        assert_eq!(conj(1), vec![0, 3, 1, 0]);
        assert_eq!(conj(2), vec![0, 2, 3, 3]);
        assert_eq!(conj(3), vec![0, 1, 2, 1]);
    }

    #[test]
    fn n4_bases_golden() {
        let m = mub(4);
        let (o, i) = (c(1.0, 0.0), c(0.0, 1.0));
        let h = |rows: [[Complex64; 4]; 4]| DMatrix::from_fn(4, 4, |r, k| rows[r][k] * 0.5);
        let want = [
            h([[o, o, o, o], [o, -o, o, -o], [o, o, -o, -o], [o, -o, -o, o]]),
            h([[o, o, o, o], [-i, i, -i, i], [i, i, -i, -i], [o, -o, -o, o]]),
            h([[o, o, o, o], [-o, o, -o, o], [-i, -i, i, i], [-i, i, i, -i]]),
            h([[o, o, o, o], [i, -i, i, -i], [-o, -o, o, o], [i, -i, -i, i]]),
        ];
        for (b, w) in want.iter().enumerate() {
            assert!(max_abs_diff(&m.basis_float(b), w) < 1e-12, "basis {b}");
            assert!(max_abs_diff(&m.basis(b).to_float(), w) < 1e-12, "basis {b}");
        }
    }

    #[test]
    fn n3_alpha_and_dual() {
        let m = mub(3);
        assert_eq!(m.alpha().exps[1][1], 1);
        let f = m.basis_float(0);
        for l in 0..3 {
            for k in 0..3 {
                let want = root_of_unity(3, -((k * l) as i64)) / 3f64.sqrt();
                assert!((f[(l, k)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn alpha_tables_valid() {
        for n in [2u32, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32] {
            let f = GfSpec::of_order(n).unwrap();
            let a = AlphaTable::new(&f, true);
            a.verify(&f).unwrap();
            assert!(a.is_symmetric(&f));
            if f.p() != 2 {
                let b = AlphaTable::new(&f, false);
                b.verify(&f).unwrap();
                assert!(!b.symmetric);
            }
        }
    }

    #[test]
    fn prime_nonsymmetric_matches_xz_powers() {
        // For N = p odd, alpha^i_l = gamma^{-i l (l+1)/2}.
        let f = GfSpec::of_order(7).unwrap();
        let a = AlphaTable::new(&f, false);
        for i in 0..7u64 {
            for l in 0..7u64 {
                let want = (7 * 7 * 7 - i * l * (l + 1) / 2 % 7) % 7;
                assert_eq!(a.exps[i as usize][l as usize], want);
            }
        }
    }

    #[test]
    fn unbiased_and_eigen_all_small() {
        for n in [2u32, 3, 4, 5, 7, 8, 9, 11, 16] {
            let m = mub(n);
            m.verify_unbiased().unwrap();
            m.verify_eigenvalues().unwrap();
            m.verify_shift_action().unwrap();
            m.verify_trace_relation().unwrap();
        }
    }

    #[test]
    fn u_group_laws() {
        let m = mub(4);
        for i in 0..=4 {
            assert_eq!(m.u_monomial(i, 0), Monomial::identity(4, 4));
        }
        let u = m.u_monomial(1, 1);
        assert_eq!(u.mul(&u), Monomial::identity(4, 4));
        let m9 = mub(9);
        let f = m9.spec();
        for i in 0..=9 {
            for k in 0..9 {
                for l in 0..9 {
                    let lhs = m9.u_monomial(i, k).mul(&m9.u_monomial(i, l));
                    assert_eq!(lhs, m9.u_monomial(i, f.add(k, l)));
                }
            }
        }
        // Orthonormality of the U's.
        for i in 0..=4usize {
            for j in 0..=4usize {
                for k in 0..4u32 {
                    for l in 0..4u32 {
                        let t = m.u_monomial(i, k).dagger().mul(&m.u_monomial(j, l)).trace();
                        let f4 = m.spec();
                        let ik = if i == 4 { k } else { f4.mul(i as u32, k) };
                        let jl = if j == 4 { l } else { f4.mul(j as u32, l) };
                        // For basis N the V label is (0, l): U^N_l = V^l_0.
                        let (ai, bi) = if i == 4 { (0, k) } else { (k, ik) };
                        let (aj, bj) = if j == 4 { (0, l) } else { (l, jl) };
                        let want = if ai == aj && bi == bj { 4 } else { 0 };
                        assert_eq!(t.mul(&t.conj()).unwrap(), CycloScalar::from_int(want * want));
                    }
                }
            }
        }
    }

    #[test]
    fn exact_overlaps_agree_with_float() {
        let m = mub(8);
        for (i, k, j, l) in [(0, 1, 3, 5), (2, 2, 2, 2), (8, 3, 4, 6), (5, 0, 8, 7), (8, 1, 8, 1)] {
            let exact = m.overlap(i, k, j, l).to_complex();
            let a = m.ket(i, k);
            let b = m.ket(j, l);
            let fl: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            assert!((exact - fl).norm() < 1e-12);
        }
    }

    #[test]
    fn complementary_observables() {
        for n in [2u32, 3, 4] {
            let m = mub(n);
            let zs = m.complementary_observables_float().unwrap();
            assert!(complementarity_deviation(&zs) < 1e-9);
        }
        let m = mub(4);
        let zn = m.complementary_observable(4).unwrap();
        let want = ExactMatrix::from_exponents(4, 4, 4, Scale::one(), |r, c| (r == c).then_some(r as i64));
        assert_eq!(zn.exact_eq(&want), Some(true));
    }

    #[test]
    fn cliffords() {
        let m = mub(5);
        assert_eq!(m.clifford(5).exact_eq(&ExactMatrix::identity(5)), Some(true));
        for i in 0..=5 {
            let c = CMatrix::from(m.clifford(i));
            assert_eq!(c.check(CheckKind::Unitary).unwrap(), 0.0);
            for l in 0..5 {
                let d = m.clifford(i).dagger().mul(&m.u(i, l)).unwrap().mul(&m.clifford(i)).unwrap();
                for r in 0..5 {
                    for cc in 0..5 {
                        assert!(r == cc || d.entry(r, cc).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn intertwiners() {
        let [sx, _, sz] = paulis();
        let u = solve_intertwiner(&[(sx.clone(), sx.clone()), (sz.clone(), sz.clone())]).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        let ph = u[(0, 0)];
        assert!(max_abs_diff(&(u.clone() / ph), &id) < 1e-9);

        let u = solve_intertwiner(&n4_period5_pairs()).unwrap();
        let u5 = u.pow(5);
        let ph = u5[(0, 0)];
        assert!((ph.norm() - 1.0).abs() < 1e-9);
        assert!(max_abs_diff(&(u5 / ph), &DMatrix::identity(4, 4)) < 1e-9);

        let r = crate::weylops::RingHW::new(5).unwrap();
        let (x, z) = (r.x(), r.z());
        let xinv = x.adjoint();
        let u = solve_intertwiner(&[(x.clone(), z.clone()), (z.clone(), xinv)]).unwrap();
        assert!(max_abs_diff(&(&u * &x * u.adjoint()), &z) < 1e-9);
        // U is the Fourier matrix up to phase.
        let fourier = DMatrix::from_fn(5, 5, |a, b| root_of_unity(5, -((a * b) as i64)) / 5f64.sqrt());
        let ratio = u[(0, 0)] / fourier[(0, 0)];
        let fu = u.map(|v| v / ratio);
        let ok = max_abs_diff(&fu, &fourier) < 1e-9 || max_abs_diff(&fu, &fourier.adjoint()) < 1e-9;
        assert!(ok);

        assert_eq!(solve_intertwiner(&[(sx.clone(), sz.clone()), (sz.clone(), sz.clone())]), Err(Error::NoSolution));
        assert!(matches!(solve_intertwiner(&[(sz.clone(), sz)]), Err(Error::NonUniqueSolution(2))));
    }

    #[test]
    fn twist_permutes_kets() {
        let f = Arc::new(GfSpec::of_order(9).unwrap());
        let a = AlphaTable::new(&f, true);
        let b: Vec<GfEl> = (0..9).map(|i| (i * 4) % 9).collect();
        let t = a.twisted(&f, &b);
        let m0 = MubSet::new(f.clone(), a).unwrap();
        let m1 = MubSet::new(f.clone(), t).unwrap();
        for i in 0..9 {
            for k in 0..9u32 {
                let moved = f.sub(k, b[i]) as usize;
                assert_eq!(m1.ket_exps(i, k as usize), m0.ket_exps(i, moved));
            }
        }
    }
}
