//! The Mean King problem for prime-power N: Alice's entangled measurement
//! basis, her inference rule, and the affine-plane and Latin-square
//! combinatorics behind it.
//!
//! Two-q-nit kets are indexed x0 + N x1; q-nit 0 is Alice's (conjugated)
//! partner and q-nit 1 goes to the king's men.

use crate::bellproto::BellBasis;
use crate::error::{Error, Result};
use crate::gf::{GfEl, GfSpec};
use crate::mub::MubSet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::sync::Arc;

/// Alice's N^2 measurement states |(m,n)>, stored as the columns of a
/// unitary in (m, n) row-major order.
#[derive(Clone, Debug)]
pub struct MkBasis {
    pub n: usize,
    pub states: DMatrix<Complex64>,
}

impl MkBasis {
    pub fn state(&self, m: GfEl, n: GfEl) -> Vec<Complex64> {
        self.states.column(m as usize * self.n + n as usize).iter().copied().collect()
    }

    /// Largest entry of |G - 1| for the Gram matrix G.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.n * self.n;
        let g = self.states.adjoint() * &self.states;
        crate::cnum::max_abs_diff(&g, &DMatrix::identity(d, d))
    }
}

/// |e^{i*}_k, e^i_k>.
pub fn conj_pair(mub: &MubSet, i: usize, k: usize) -> Vec<Complex64> {
    let e = mub.ket(i, k);
    let d = e.len();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for x1 in 0..d {
        for x0 in 0..d {
            v[x0 + d * x1] = e[x0].conj() * e[x1];
        }
    }
    v
}

fn axpy(acc: &mut [Complex64], c: Complex64, v: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

fn apply_pair(op0: &DMatrix<Complex64>, op1: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let d = op0.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for x1 in 0..d {
        for x0 in 0..d {
            let a = v[x0 + d * x1];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for y1 in 0..d {
                for y0 in 0..d {
                    out[y0 + d * y1] += op0[(y0, x0)] * op1[(y1, x1)] * a;
                }
            }
        }
    }
    out
}

/// The seed N^{-1/2} sum_{i=0}^{N} |e^{i*}_0, e^i_0> - |B_00>.
pub fn mk_seed(mub: &MubSet) -> Vec<Complex64> {
    let d = mub.n();
    let s = Complex64::from(1.0 / (d as f64).sqrt());
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..=d {
        axpy(&mut v, s, &conj_pair(mub, i, 0));
    }
    let bell = BellBasis::new(Arc::new(mub.spec().clone()));
    axpy(&mut v, Complex64::from(-1.0), &bell.state(0, 0));
    v
}

/// Builds |(m,n)> = (V_m^{n*} (x) V_m^n)|(0,0)>.
pub fn mk_basis(mub: &MubSet) -> MkBasis {
    let d = mub.n();
    let seed = mk_seed(mub);
    let mut states = DMatrix::zeros(d * d, d * d);
    for m in 0..d as GfEl {
        for n in 0..d as GfEl {
            let v = mub.hw().v_float(m, n);
            let col = apply_pair(&v.map(|z| z.conj()), &v, &seed);
            states.column_mut(m as usize * d + n as usize).copy_from_slice(&col);
        }
    }
    MkBasis { n: d, states }
}

/// Builds |(m,n)> directly from the line of MUB kets through (m, n).
pub fn mk_basis_explicit(mub: &MubSet) -> MkBasis {
    let d = mub.n();
    let f = mub.spec();
    let bell = BellBasis::new(Arc::new(f.clone()));
    let b00 = bell.state(0, 0);
    let s = Complex64::from(1.0 / (d as f64).sqrt());
    let mut states = DMatrix::zeros(d * d, d * d);
    for m in 0..d as GfEl {
        for n in 0..d as GfEl {
            let mut v = vec![Complex64::new(0.0, 0.0); d * d];
            axpy(&mut v, s, &conj_pair(mub, d, m as usize));
            for i in 0..d {
                axpy(&mut v, s, &conj_pair(mub, i, mk_infer(f, i, m, n) as usize));
            }
            axpy(&mut v, Complex64::from(-1.0), &b00);
            states.column_mut(m as usize * d + n as usize).copy_from_slice(&v);
        }
    }
    MkBasis { n: d, states }
}

/// Alice's inference: k = i m - n for i < N, k = m for i = N.
pub fn mk_infer(spec: &GfSpec, i: usize, m: GfEl, n: GfEl) -> GfEl {
    if i == spec.n() as usize {
        m
    } else {
        spec.sub(spec.mul(i as GfEl, m), n)
    }
}

/// Outcome of one (i, k) intermediate result.
#[derive(Clone, Debug, PartialEq)]
pub struct MkCase {
    pub i: usize,
    pub k: GfEl,
    /// Detectors (m, n) with nonzero probability, in row-major order.
    pub firing: Vec<(GfEl, GfEl)>,
    pub probabilities: Vec<f64>,
    pub inference_correct: bool,
}

/// Exact amplitude analysis plus a Monte Carlo run of the protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct MkReport {
    pub n: usize,
    pub cases: Vec<MkCase>,
    /// Largest deviation of a firing detector's probability from 1/N.
    pub max_marginal_error: f64,
    pub trials: usize,
    pub successes: usize,
}

impl MkReport {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    pub fn all_exact_correct(&self) -> bool {
        self.cases.iter().all(|c| c.inference_correct && c.firing.len() == self.n)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "trials": self.trials,
            "successes": self.successes,
            "successRate": self.success_rate(),
            "maxMarginalError": self.max_marginal_error,
            "cases": self.cases.iter().map(|c| json!({
                "i": c.i, "k": c.k,
                "firing": c.firing.iter().map(|&(m, n)| [m, n]).collect::<Vec<_>>(),
                "probabilities": c.probabilities,
                "inferenceCorrect": c.inference_correct,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Runs the protocol for every (i, k) exactly and `trials` random rounds.
pub fn mk_protocol_sim(mub: &MubSet, trials: usize, seed: u64) -> Result<MkReport> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    let d = mub.n();
    let f = mub.spec();
    let basis = mk_basis(mub);
    let probs_of = |i: usize, k: usize| -> Vec<f64> {
        let v = DMatrix::from_vec(d * d, 1, conj_pair(mub, i, k));
        (basis.states.adjoint() * v).iter().map(Complex64::norm_sqr).collect()
    };
    let mut cases = Vec::with_capacity(d * (d + 1));
    let mut max_err: f64 = 0.0;
    for i in 0..=d {
        for k in 0..d {
            let probs = probs_of(i, k);
            let mut firing = Vec::new();
            let mut fp = Vec::new();
            for (idx, &p) in probs.iter().enumerate() {
                if p > 1e-12 {
                    firing.push(((idx / d) as GfEl, (idx % d) as GfEl));
                    fp.push(p);
                    max_err = max_err.max((p - 1.0 / d as f64).abs());
                }
            }
            let inference_correct = firing.iter().all(|&(m, n)| mk_infer(f, i, m, n) as usize == k);
            cases.push(MkCase { i, k: k as GfEl, firing, probabilities: fp, inference_correct });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0;
    for _ in 0..trials {
        let i = rng.random_range(0..=d);
        // The king's men see outcome k with probability 1/N from |B_00>.
        let k = rng.random_range(0..d);
        let probs = probs_of(i, k);
        let mut r: f64 = rng.random();
        let mut pick = probs.len() - 1;
        for (idx, &p) in probs.iter().enumerate() {
            if r < p {
                pick = idx;
                break;
            }
            r -= p;
        }
        let (m, n) = ((pick / d) as GfEl, (pick % d) as GfEl);
        if mk_infer(f, i, m, n) as usize == k {
            successes += 1;
        }
    }
    Ok(MkReport { n: d, cases, max_marginal_error: max_err, trials, successes })
}

/// Largest deviation of |<B_{m',n'}|(m,n)>| from 1/N.
pub fn bell_expansion_deviation(mub: &MubSet, basis: &MkBasis) -> f64 {
    let bell = BellBasis::new(Arc::new(mub.spec().clone()));
    let c = bell.matrix().adjoint() * &basis.states;
    let target = 1.0 / basis.n as f64;
    c.iter().map(|z| (z.norm() - target).abs()).fold(0.0, f64::max)
}

/// Pairwise inner products of the normalized pyramid edge states
/// sqrt(N/(2N+2)) (|(m,n)> + |B_00>); returns (min, max) over pairs.
pub fn pyramid_inner_products(mub: &MubSet, basis: &MkBasis) -> (f64, f64) {
    let d = basis.n;
    let bell = BellBasis::new(Arc::new(mub.spec().clone()));
    let b00 = DMatrix::from_vec(d * d, 1, bell.state(0, 0));
    let s = Complex64::from((d as f64 / (2.0 * d as f64 + 2.0)).sqrt());
    let mut edges = basis.states.clone();
    for mut col in edges.column_iter_mut() {
        col += &b00.column(0);
        col *= s;
    }
    let g = edges.adjoint() * &edges;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in 0..d * d {
        for b in 0..d * d {
            if a != b {
                let x = g[(a, b)].norm();
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo, hi)
}

/// Line a m = b n + c in canonical form: the first nonzero of (a, b) is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub a: GfEl,
    pub b: GfEl,
    pub c: GfEl,
}

impl Line {
    pub fn new(spec: &GfSpec, a: GfEl, b: GfEl, c: GfEl) -> Result<Self> {
        let lead = if a != 0 { a } else if b != 0 { b } else { return Err(Error::DegenerateLine) };
        let s = spec.inv(lead)?;
        Ok(Line { a: spec.mul(s, a), b: spec.mul(s, b), c: spec.mul(s, c) })
    }

    pub fn contains(&self, spec: &GfSpec, (m, n): (GfEl, GfEl)) -> bool {
        spec.mul(self.a, m) == spec.add(spec.mul(self.b, n), self.c)
    }
}

#[derive(Clone, Debug)]
pub struct AffinePlane {
    pub order: usize,
    pub lines: Vec<Line>,
    /// `incidence[l]` lists the points of line l.
    pub incidence: Vec<Vec<(GfEl, GfEl)>>,
}

impl AffinePlane {
    pub fn new(spec: &GfSpec) -> Self {
        let d = spec.n();
        let mut lines = Vec::with_capacity((d * d + d) as usize);
        for b in 0..d {
            for c in 0..d {
                lines.push(Line { a: 1, b, c });
            }
        }
        for c in 0..d {
            lines.push(Line { a: 0, b: 1, c });
        }
        let incidence = lines
            .iter()
            .map(|l| {
                let mut pts = Vec::new();
                for m in 0..d {
                    for n in 0..d {
                        if l.contains(spec, (m, n)) {
                            pts.push((m, n));
                        }
                    }
                }
                pts
            })
            .collect();
        AffinePlane { order: d as usize, lines, incidence }
    }

    fn point_index(&self, (m, n): (GfEl, GfEl)) -> usize {
        m as usize * self.order + n as usize
    }

    /// Checks counts and axioms A1-A3 exhaustively.
    pub fn verify(&self) -> Result<()> {
        let d = self.order;
        let npts = d * d;
        let fail = |s: String| Err(Error::AxiomViolation(s));
        if self.lines.len() != d * d + d {
            return fail(format!("{} lines, expected {}", self.lines.len(), d * d + d));
        }
        let sets: Vec<Vec<bool>> = self
            .incidence
            .iter()
            .map(|pts| {
                let mut s = vec![false; npts];
                for &p in pts {
                    s[self.point_index(p)] = true;
                }
                s
            })
            .collect();
        if let Some((l, _)) = self.incidence.iter().enumerate().find(|(_, p)| p.len() != d) {
            return fail(format!("line {:?} has {} points", self.lines[l], self.incidence[l].len()));
        }
        for p in 0..npts {
            let c = sets.iter().filter(|s| s[p]).count();
            if c != d + 1 {
                return fail(format!("point {p} lies on {c} lines"));
            }
        }
        // A1
        for p in 0..npts {
            for q in p + 1..npts {
                let c = sets.iter().filter(|s| s[p] && s[q]).count();
                if c != 1 {
                    return fail(format!("A1: points {p}, {q} share {c} lines"));
                }
            }
        }
        // A2
        let disjoint = |a: &Vec<bool>, b: &Vec<bool>| a.iter().zip(b).all(|(x, y)| !(x & y));
        for (l, s) in sets.iter().enumerate() {
            for p in (0..npts).filter(|&p| !s[p]) {
                let c = sets.iter().filter(|t| t[p] && disjoint(t, s)).count();
                if c != 1 {
                    return fail(format!("A2: point {p} off line {l} has {c} parallels"));
                }
            }
        }
        // A3
        if d < 2 || sets.len() < 2 {
            return fail("A3: fewer than two points per line or two lines".into());
        }
        Ok(())
    }
}

/// The N-1 Latin squares L_s[r][c] = s r + c for s = 1..N-1.
pub fn mols(spec: &GfSpec) -> Vec<Vec<Vec<GfEl>>> {
    let d = spec.n();
    (1..d)
        .map(|s| (0..d).map(|r| (0..d).map(|c| spec.add(spec.mul(s, r), c)).collect()).collect())
        .collect()
}

pub fn is_latin(sq: &[Vec<GfEl>]) -> bool {
    fn perm(d: usize, it: impl Iterator<Item = GfEl>) -> bool {
        let mut seen = vec![false; d];
        for x in it {
            if x as usize >= d || std::mem::replace(&mut seen[x as usize], true) {
                return false;
            }
        }
        true
    }
    let d = sq.len();
    (0..d).all(|r| perm(d, sq[r].iter().copied()) && perm(d, (0..d).map(|i| sq[i][r])))
}

/// Every ordered symbol pair occurs exactly once.
pub fn are_orthogonal(a: &[Vec<GfEl>], b: &[Vec<GfEl>]) -> bool {
    let d = a.len();
    let mut seen = vec![false; d * d];
    for r in 0..d {
        for c in 0..d {
            let idx = a[r][c] as usize * d + b[r][c] as usize;
            if seen[idx] {
                return false;
            }
            seen[idx] = true;
        }
    }
    true
}

/// Inference grid for basis i: `grid[m][n] = k`.
pub fn grid(spec: &GfSpec, i: usize) -> Vec<Vec<GfEl>> {
    let d = spec.n();
    (0..d).map(|m| (0..d).map(|n| mk_infer(spec, i, m, n)).collect()).collect()
}

/// ASCII rendering: columns are m left to right, rows are n bottom to top.
pub fn render_grid(grid: &[Vec<GfEl>]) -> String {
    let d = grid.len();
    let mut s = String::new();
    for n in (0..d).rev() {
        let row: Vec<String> = (0..d).map(|m| grid[m][n].to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
