//! Generalized Bell states and state-vector simulations of dense coding,
//! teleportation, cloning and entanglement swapping.
//!
//! Multi-q-nit registers index basis states as sum_q x_q N^q, so q-nit 0 is
//! the least significant digit. The conjugation |k*> is plain complex
//! conjugation in the computational basis, hence |k*> = |k>.

use crate::cnum::{max_abs_diff, root_of_unity};
use crate::error::{Error, Result};
use crate::gf::GfSpec;
use crate::weylops::GaloisHW;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// A pure state of `count` q-nits of dimension `n` each.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub n: usize,
    pub count: usize,
    pub amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(n: usize, count: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != n.pow(count as u32) {
            return Err(Error::SizeMismatch(amps.len(), n.pow(count as u32)));
        }
        Ok(PureState { n, count, amps })
    }

    /// Single q-nit state, normalized or rejected.
    pub fn qnit(amps: Vec<Complex64>) -> Result<Self> {
        let s = Self::new(amps.len(), 1, amps)?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// |<self|other>|^2 / (|self|^2 |other|^2).
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "local dimensions differ");
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        PureState { n: self.n, count: self.count + other.count, amps }
    }

    fn digit(&self, idx: usize, q: usize) -> usize {
        idx / self.n.pow(q as u32) % self.n
    }

    /// Applies `op` to q-nit `q`.
    pub fn apply(&self, q: usize, op: &DMatrix<Complex64>) -> Self {
        let n = self.n;
        let w = n.pow(q as u32);
        let mut out = vec![czero(); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let x = self.digit(idx, q);
            let base = idx - x * w;
            for y in 0..n {
                let m = op[(y, x)];
                if m != czero() {
                    out[base + y * w] += m * a;
                }
            }
        }
        PureState { amps: out, ..self.clone() }
    }

    /// Contracts q-nits (qa, qb) with the bra <phi| of a two-q-nit ket
    /// `phi` indexed x_a + N x_b. The remaining q-nits keep their order.
    pub fn project_pair(&self, qa: usize, qb: usize, phi: &[Complex64]) -> Self {
        let n = self.n;
        let rest: Vec<usize> = (0..self.count).filter(|&q| q != qa && q != qb).collect();
        let mut out = vec![czero(); n.pow(rest.len() as u32)];
        for (idx, a) in self.amps.iter().enumerate() {
            let (xa, xb) = (self.digit(idx, qa), self.digit(idx, qb));
            let c = phi[xa + n * xb].conj();
            if c == czero() {
                continue;
            }
            let r: usize = rest.iter().enumerate().map(|(t, &q)| self.digit(idx, q) * n.pow(t as u32)).sum();
            out[r] += c * a;
        }
        PureState { n, count: rest.len(), amps: out }
    }

    /// Contracts q-nit `q` with the bra <phi|.
    pub fn project_one(&self, q: usize, phi: &[Complex64]) -> Self {
        let n = self.n;
        let rest: Vec<usize> = (0..self.count).filter(|&t| t != q).collect();
        let mut out = vec![czero(); n.pow(rest.len() as u32)];
        for (idx, a) in self.amps.iter().enumerate() {
            let c = phi[self.digit(idx, q)].conj();
            let r: usize = rest.iter().enumerate().map(|(t, &s)| self.digit(idx, s) * n.pow(t as u32)).sum();
            out[r] += c * a;
        }
        PureState { n, count: rest.len(), amps: out }
    }

    /// Reduced density matrix of q-nit `q`.
    pub fn reduced(&self, q: usize) -> DMatrix<Complex64> {
        let n = self.n;
        let w = n.pow(q as u32);
        let mut rho = DMatrix::zeros(n, n);
        for (idx, a) in self.amps.iter().enumerate() {
            let x = self.digit(idx, q);
            let base = idx - x * w;
            for y in 0..n {
                rho[(y, x)] += self.amps[base + y * w] * a.conj();
            }
        }
        rho
    }

    pub fn scale(&self, s: Complex64) -> Self {
        PureState { amps: self.amps.iter().map(|a| a * s).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        PureState { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(), ..self.clone() }
    }
}

/// Generalized Bell states |B_{m,n}> = N^{-1/2} sum_k |k, k+m> gamma^{(k+m) n}.
#[derive(Debug)]
pub struct BellBasis {
    hw: GaloisHW,
}

impl BellBasis {
    pub fn new(spec: Arc<GfSpec>) -> Self {
        BellBasis { hw: GaloisHW::new(spec) }
    }

    pub fn spec(&self) -> &GfSpec {
        self.hw.spec()
    }

    pub fn hw(&self) -> &GaloisHW {
        &self.hw
    }

    pub fn n(&self) -> usize {
        self.spec().n() as usize
    }

    /// Amplitudes indexed first + N * second.
    pub fn state(&self, m: u32, n: u32) -> Vec<Complex64> {
        let f = self.spec();
        let d = self.n();
        let s = 1.0 / (d as f64).sqrt();
        let mut v = vec![czero(); d * d];
        for k in 0..d as u32 {
            let t = f.add(k, m);
            v[k as usize + d * t as usize] = root_of_unity(f.p() as u64, f.char_exp(f.mul(t, n)) as i64) * s;
        }
        v
    }

    pub fn pure(&self, m: u32, n: u32) -> PureState {
        PureState { n: self.n(), count: 2, amps: self.state(m, n) }
    }

    /// All N^2 Bell states as columns ordered by (m, n) row-major.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = self.n();
        let mut out = DMatrix::zeros(d * d, d * d);
        for m in 0..d {
            for n in 0..d {
                let v = self.state(m as u32, n as u32);
                out.column_mut(m * d + n).copy_from_slice(&v);
            }
        }
        out
    }

    /// Outcome distribution of a Bell measurement on q-nits (qa, qb):
    /// `probs[m][n]` and the normalized post-measurement states.
    pub fn measure(&self, psi: &PureState, qa: usize, qb: usize) -> Vec<Vec<(f64, PureState)>> {
        let d = self.n();
        (0..d as u32)
            .map(|m| {
                (0..d as u32)
                    .map(|n| {
                        let post = psi.project_pair(qa, qb, &self.state(m, n));
                        let p = post.norm_sqr();
                        let post = if p > 0.0 { post.scale(Complex64::from(1.0 / p.sqrt())) } else { post };
                        (p, post)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Result of a dense-coding run.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseCodingResult {
    pub sent: (u32, u32),
    pub decoded: (u32, u32),
    pub probability: f64,
}

/// Encodes (m, n) by applying V_m^n to q-nit 1 of |B_00> and decodes by a
/// Bell measurement.
pub fn dense_coding_sim(bell: &BellBasis, m: u32, n: u32) -> Result<DenseCodingResult> {
    let d = bell.n() as u32;
    if m >= d || n >= d {
        return Err(Error::BadParameter(format!("message ({m}, {n}) out of range")));
    }
    let psi = bell.pure(0, 0).apply(1, &bell.hw().v_float(m, n));
    let mut best = ((0, 0), -1.0);
    for a in 0..d {
        for b in 0..d {
            let p = bell.pure(a, b).inner(&psi).norm_sqr();
            if p > best.1 {
                best = ((a, b), p);
            }
        }
    }
    Ok(DenseCodingResult { sent: (m, n), decoded: best.0, probability: best.1 })
}

/// One Bell-measurement branch of teleportation.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleportBranch {
    pub m: u32,
    pub n: u32,
    pub probability: f64,
    pub fidelity: f64,
}

/// Teleports `psi` from q-nit 1 to q-nit 2 through |B_00> on q-nits (0, 2).
/// Each branch measures |B_{m,n}> on (0, 1) and corrects q-nit 2 with
/// V_m^n.
pub fn teleport_sim(bell: &BellBasis, psi: &PureState) -> Result<Vec<TeleportBranch>> {
    let d = bell.n();
    if psi.count != 1 || psi.n != d {
        return Err(Error::DimensionMismatch(format!("expected one q-nit of dimension {d}")));
    }
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm));
    }
    // sum_{k,j} |k>_0 |j>_1 |k>_2 psi_j / sqrt(N)
    let s = 1.0 / (d as f64).sqrt();
    let mut amps = vec![czero(); d * d * d];
    for k in 0..d {
        for j in 0..d {
            amps[k + d * j + d * d * k] = psi.amps[j] * s;
        }
    }
    let full = PureState { n: d, count: 3, amps };
    let mut out = Vec::with_capacity(d * d);
    for m in 0..d as u32 {
        for n in 0..d as u32 {
            let post = full.project_pair(0, 1, &bell.state(m, n));
            let p = post.norm_sqr();
            let fixed = post.apply(0, &bell.hw().v_float(m, n));
            out.push(TeleportBranch { m, n, probability: p, fidelity: fixed.fidelity(psi) });
        }
    }
    Ok(out)
}

/// Reduced states of the cloning machine.
#[derive(Clone, Debug)]
pub struct CloneResult {
    /// State of q-nits 1, 2, 3 after q-nit 0 is found in <psi*|.
    pub psi13: PureState,
    pub rho1: DMatrix<Complex64>,
    pub rho2: DMatrix<Complex64>,
    pub rho3: DMatrix<Complex64>,
    /// b_{m,n} = (1/N) sum gamma^{m n' - n m'} a_{m',n'}.
    pub b: DMatrix<Complex64>,
    /// Largest deviation of rho1 and rho3 from their closed forms.
    pub closed_form_residual: f64,
    /// Distance between the a-route and the b-route for the three-q-nit state.
    pub dual_route_residual: f64,
}

/// Double Galois-Fourier transform of the amplitude grid.
pub fn double_fourier(spec: &GfSpec, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = spec.n() as usize;
    let p = spec.p() as u64;
    DMatrix::from_fn(d, d, |m, n| {
        let mut s = czero();
        for m2 in 0..d {
            for n2 in 0..d {
                let e = spec.sub(spec.mul(m as u32, n2 as u32), spec.mul(n as u32, m2 as u32));
                s += root_of_unity(p, spec.char_exp(e) as i64) * a[(m2, n2)];
            }
        }
        s / d as f64
    })
}

/// Cerf-ansatz cloning: prepares
/// |Psi_0-3> = sum a_{mn} (1 (x) V_m^n (x) 1 (x) V_m^n^dagger) |B_00, B_00>,
/// projects q-nit 0 onto <psi*| and rescales by sqrt(N).
pub fn cerf_clone(bell: &BellBasis, a: &DMatrix<Complex64>, psi: &PureState) -> Result<CloneResult> {
    let d = bell.n();
    if a.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("amplitude grid must be {d}x{d}")));
    }
    let total: f64 = a.iter().map(Complex64::norm_sqr).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(total));
    }
    if psi.count != 1 || psi.n != d {
        return Err(Error::DimensionMismatch(format!("expected one q-nit of dimension {d}")));
    }
    let f = bell.spec();
    let hw = bell.hw();
    let seed = bell.pure(0, 0).tensor(&bell.pure(0, 0));
    let mut psi03 = PureState { n: d, count: 4, amps: vec![czero(); d.pow(4)] };
    for m in 0..d as u32 {
        for n in 0..d as u32 {
            let c = a[(m as usize, n as usize)];
            if c == czero() {
                continue;
            }
            let v = hw.v_float(m, n);
            let term = seed.apply(1, &v).apply(3, &v.adjoint());
            psi03 = psi03.add(&term.scale(c));
        }
    }
    // <psi*| = sum_k psi_k <k|, i.e. the bra of the ket with amplitudes psi*.
    let psi_star: Vec<Complex64> = psi.amps.iter().map(|z| z.conj()).collect();
    let psi13 = psi03.project_one(0, &psi_star).scale(Complex64::from((d as f64).sqrt()));

    // Dual route: sum b_{-m,-n} (V^dagger (x) 1 (x) V) |B^(21)_00, psi>, with
    // q-nit 2 first in the Bell pair.
    let b = double_fourier(f, a);
    let b00 = bell.state(0, 0);
    let mut seed2 = vec![czero(); d * d * d];
    for x1 in 0..d {
        for x2 in 0..d {
            for x3 in 0..d {
                seed2[x1 + d * x2 + d * d * x3] = b00[x2 + d * x1] * psi.amps[x3];
            }
        }
    }
    let seed2 = PureState { n: d, count: 3, amps: seed2 };
    let mut dual = PureState { n: d, count: 3, amps: vec![czero(); d.pow(3)] };
    for m in 0..d as u32 {
        for n in 0..d as u32 {
            let c = b[(f.neg(m) as usize, f.neg(n) as usize)];
            if c.norm() < 1e-15 {
                continue;
            }
            let v = hw.v_float(m, n);
            dual = dual.add(&seed2.apply(0, &v.adjoint()).apply(2, &v).scale(c));
        }
    }
    let dual_route_residual =
        psi13.amps.iter().zip(&dual.amps).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);

    let rho1 = psi13.reduced(0);
    let rho2 = psi13.reduced(1);
    let rho3 = psi13.reduced(2);
    // With V_m^n acting on q-nit 3 the coefficient of the (m, n) term is
    // b_{-m,-n}; the two coincide for p = 2.
    let b_neg = DMatrix::from_fn(d, d, |m, n| b[(f.neg(m as u32) as usize, f.neg(n as u32) as usize)]);
    let closed = |w: &DMatrix<Complex64>| {
        let mut r = DMatrix::zeros(d, d);
        for m in 0..d as u32 {
            for n in 0..d as u32 {
                let v = DMatrix::from_column_slice(d, 1, &psi.amps);
                let pv = hw.v_float(m, n) * v;
                r += &pv * pv.adjoint() * Complex64::from(w[(m as usize, n as usize)].norm_sqr());
            }
        }
        r
    };
    let closed_form_residual = max_abs_diff(&rho1, &closed(a)).max(max_abs_diff(&rho3, &closed(&b_neg)));
    Ok(CloneResult { psi13, rho1, rho2, rho3, b, closed_form_residual, dual_route_residual })
}

/// One outcome of entanglement swapping.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapOutcome {
    /// The (2,1) pair was found in B^(21)_{-m', -n'}.
    pub m: u32,
    pub n: u32,
    pub probability: f64,
    /// Fidelity of the (0,3) pair with B^(03)_{m', n'}.
    pub fidelity: f64,
}

/// Prepares |B^(01)_{m,n}, B^(23)_{-m,-n}> and performs a Bell measurement on
/// (2, 1).
pub fn swap_sim(bell: &BellBasis, m: u32, n: u32) -> Result<Vec<SwapOutcome>> {
    let f = bell.spec();
    let d = bell.n();
    if m as usize >= d || n as usize >= d {
        return Err(Error::BadParameter(format!("({m}, {n}) out of range")));
    }
    let psi = bell.pure(m, n).tensor(&bell.pure(f.neg(m), f.neg(n)));
    let mut out = Vec::with_capacity(d * d);
    for m2 in 0..d as u32 {
        for n2 in 0..d as u32 {
            let post = psi.project_pair(2, 1, &bell.state(f.neg(m2), f.neg(n2)));
            let p = post.norm_sqr();
            let target = bell.pure(m2, n2);
            out.push(SwapOutcome { m: m2, n: n2, probability: p, fidelity: post.fidelity(&target) });
        }
    }
    Ok(out)
}

/// <B^(03)_{m',n'}, B^(21)_{-m',-n'} | B^(01)_{m,n}, B^(23)_{-m,-n}>.
pub fn swap_overlap(bell: &BellBasis, m: u32, n: u32, m2: u32, n2: u32) -> Complex64 {
    let f = bell.spec();
    let d = bell.n();
    let ket = bell.pure(m, n).tensor(&bell.pure(f.neg(m), f.neg(n)));
    let b03 = bell.state(m2, n2);
    let b21 = bell.state(f.neg(m2), f.neg(n2));
    let mut bra = vec![czero(); d.pow(4)];
    for x0 in 0..d {
        for x1 in 0..d {
            for x2 in 0..d {
                for x3 in 0..d {
                    bra[x0 + d * x1 + d * d * x2 + d * d * d * x3] = b03[x0 + d * x3] * b21[x2 + d * x1];
                }
            }
        }
    }
    let bra = PureState { n: d, count: 4, amps: bra };
    bra.inner(&ket)
}
