//! Geometry of orthonormal bases and seeded numerical searches: chordal
//! Grassmann distance, the simplex picture in R^{N^2-1}, the catalog of
//! vectors unbiased to both the identity and a Hadamard matrix, MU
//! constellations and an extendability probe.
//!
//! Bases are matrices whose columns are the basis vectors.

use crate::error::{Error, Result};
use crate::hadamard::HMat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

type CM = DMatrix<Complex64>;

/// Squared chordal Grassmann distance
/// `sum_{a,b} |<e_a|f_b>|^2 (1 - |<e_a|f_b>|^2)`.
pub fn grassmann_d2(b1: &CM, b2: &CM) -> Result<f64> {
    if b1.shape() != b2.shape() {
        return Err(Error::SizeMismatch(b1.nrows(), b2.nrows()));
    }
    let g = b1.adjoint() * b2;
    Ok(g.iter().map(|z| z.norm_sqr() * (1.0 - z.norm_sqr())).sum())
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix,
/// with the phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CM {
    let g = CM::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Mean of `grassmann_d2` over `samples` Haar-random pairs.
pub fn haar_pair_mean_d2(n: usize, samples: usize, seed: u64) -> f64 {
    haar_pair_d2_stats(n, samples, seed).0
}

/// Sample mean and its standard error for `grassmann_d2` over Haar-random pairs.
pub fn haar_pair_d2_stats(n: usize, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..samples)
        .map(|_| {
            let a = haar_unitary(n, &mut rng);
            let b = haar_unitary(n, &mut rng);
            grassmann_d2(&a, &b).expect("same shape")
        })
        .collect();
    let m = samples as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

/// Traceless images `|psi_i><psi_i| - 1/N` of a set of unit vectors.
#[derive(Debug, Clone)]
pub struct BasisVectorSet {
    pub n: usize,
    pub vectors: Vec<CM>,
}

impl BasisVectorSet {
    /// Maps the columns of `b` (assumed unit vectors).
    pub fn from_columns(b: &CM) -> Self {
        let n = b.nrows();
        let id = CM::identity(n, n) / Complex64::new(n as f64, 0.0);
        let vectors = (0..b.ncols())
            .map(|j| {
                let v = b.column(j);
                v * v.adjoint() - &id
            })
            .collect();
        BasisVectorSet { n, vectors }
    }

    /// Largest deviation of the Gram matrix from `delta/2 - 1/(2N)`.
    pub fn simplex_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 0.5 } else { 0.0 } - 0.5 / self.n as f64;
                e = e.max((simplex_dot(a, b) - target).abs());
            }
        }
        e
    }

    /// Norm of the vector sum, which vanishes for a basis.
    pub fn centroid_norm(&self) -> f64 {
        let s = self.vectors.iter().fold(CM::zeros(self.n, self.n), |acc, v| acc + v);
        s.norm()
    }

    /// Largest |e_i . f_j| between the two sets.
    pub fn max_cross_dot(&self, other: &BasisVectorSet) -> f64 {
        let mut m: f64 = 0.0;
        for a in &self.vectors {
            for b in &other.vectors {
                m = m.max(simplex_dot(a, b).abs());
            }
        }
        m
    }
}

/// Euclidean product on traceless hermitian matrices, `tr(A B) / 2`.
pub fn simplex_dot(a: &CM, b: &CM) -> f64 {
    (a * b).trace().re / 2.0
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt on zero-residual problems

struct LmOutcome {
    x: Vec<f64>,
    f: f64,
}

fn levenberg_marquardt<F>(mut x: Vec<f64>, max_iter: usize, target: f64, eval: F) -> LmOutcome
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let (mut r, mut jac) = eval(&x);
    let mut f = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if f < target {
            break;
        }
        let jt = jac.transpose();
        let g = &jt * &r;
        let mut a = &jt * &jac;
        let scale = a.diagonal().max().max(1e-12);
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * scale;
        }
        let step = match a.cholesky() {
            Some(ch) => ch.solve(&(-g)),
            None => {
                lambda *= 10.0;
                continue;
            }
        };
        let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let (r2, j2) = eval(&trial);
        let f2 = r2.norm_squared();
        if f2 < f {
            x = trial;
            r = r2;
            jac = j2;
            let gain = f - f2;
            f = f2;
            lambda = (lambda / 3.0).max(1e-15);
            if step.norm() < 1e-15 || gain < 1e-32 {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    LmOutcome { x, f }
}

fn restart_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

// ---------------------------------------------------------------------------
// Vectors unbiased to the identity and to H

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub max_restarts: usize,
    /// Stop after this many consecutive restarts that add no new vector.
    pub saturation: usize,
    /// Accept when f < tol^2.
    pub tol: f64,
    pub dedup_tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_restarts: 200_000, saturation: 500, tol: 1e-10, dedup_tol: 1e-6, seed: 7 }
    }
}

#[derive(Debug, Clone)]
pub struct UnbiasedVectorCatalog {
    pub n: usize,
    pub anchor_family: String,
    pub anchor_params: Vec<f64>,
    /// Unit vectors with first component real positive.
    pub vectors: Vec<DVector<Complex64>>,
    /// Index sets of N mutually orthogonal catalog vectors.
    pub bases: Vec<Vec<usize>>,
    pub restarts: usize,
    pub since_last_new: usize,
    pub incomplete: bool,
}

impl UnbiasedVectorCatalog {
    pub fn n_v(&self) -> usize {
        self.vectors.len()
    }

    pub fn n_t(&self) -> usize {
        self.bases.len()
    }

    pub fn basis_matrix(&self, k: usize) -> CM {
        let cols: Vec<DVector<Complex64>> = self.bases[k].iter().map(|&i| self.vectors[i].clone()).collect();
        CM::from_columns(&cols)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n,
            "anchor": {"family": self.anchor_family, "params": self.anchor_params},
            "Nv": self.n_v(),
            "Nt": self.n_t(),
            "restarts": self.restarts,
            "sinceLastNew": self.since_last_new,
            "incomplete": self.incomplete,
            "vectors": self.vectors.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "bases": self.bases,
        })
    }
}

fn phase_vector(n: usize, theta: &[f64]) -> DVector<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    DVector::from_fn(n, |k, _| if k == 0 { Complex64::new(s, 0.0) } else { Complex64::from_polar(s, theta[k - 1]) })
}

/// Local descent from one start; returns the vector when it meets the tolerance.
fn unbiased_descent(hn: &CM, theta0: Vec<f64>, tol: f64) -> Option<DVector<Complex64>> {
    let n = hn.nrows();
    let hd = hn.adjoint();
    let eval = |theta: &[f64]| {
        let z = phase_vector(n, theta);
        let a = &hd * &z;
        let r = DVector::from_fn(n, |j, _| a[j].norm_sqr() - 1.0 / n as f64);
        let jac = DMatrix::from_fn(n, n - 1, |j, k| {
            let k = k + 1;
            2.0 * (a[j].conj() * hd[(j, k)] * Complex64::i() * z[k]).re
        });
        (r, jac)
    };
    let out = levenberg_marquardt(theta0, 300, tol * tol * 1e-4, eval);
    (out.f < tol * tol).then(|| phase_vector(n, &out.x))
}

fn phase_aligned_distance(u: &DVector<Complex64>, v: &DVector<Complex64>) -> f64 {
    let ip = u.dotc(v);
    let ph = if ip.norm() > 0.0 { ip / ip.norm() } else { Complex64::new(1.0, 0.0) };
    (u.map(|z| z * ph) - v).norm()
}

/// All index sets of `size` mutually orthogonal vectors, in lexicographic order.
pub fn orthogonal_cliques(vectors: &[DVector<Complex64>], size: usize, eps: f64) -> Vec<Vec<usize>> {
    let m = vectors.len();
    let adj: Vec<Vec<bool>> =
        (0..m).map(|i| (0..m).map(|j| i != j && vectors[i].dotc(&vectors[j]).norm() < eps).collect()).collect();
    let mut out = Vec::new();
    fn extend(start: usize, cur: &mut Vec<usize>, size: usize, adj: &[Vec<bool>], out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..adj.len() {
            if cur.iter().all(|&u| adj[u][v]) {
                cur.push(v);
                extend(v + 1, cur, size, adj, out);
                cur.pop();
            }
        }
    }
    extend(0, &mut Vec::new(), size, &adj, &mut out);
    out
}

/// Seeded multistart search for unit vectors unbiased to the standard basis
/// and to the columns of `h / sqrt(N)`.
pub fn unbiased_vector_search(h: &HMat, cfg: &SearchConfig) -> UnbiasedVectorCatalog {
    let n = h.n();
    let hn = h.matrix() / Complex64::new((n as f64).sqrt(), 0.0);
    let mut vectors: Vec<DVector<Complex64>> = Vec::new();
    let mut since_last_new = 0;
    let mut restarts = 0;
    const BATCH: usize = 256;
    while restarts < cfg.max_restarts && since_last_new < cfg.saturation {
        let batch = BATCH.min(cfg.max_restarts - restarts);
        let found: Vec<Option<DVector<Complex64>>> = (restarts..restarts + batch)
            .into_par_iter()
            .map(|k| {
                let mut rng = restart_rng(cfg.seed, k as u64);
                let theta0: Vec<f64> = (1..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                unbiased_descent(&hn, theta0, cfg.tol)
            })
            .collect();
        for v in found {
            restarts += 1;
            let is_new = match v {
                Some(v) if !vectors.iter().any(|u| phase_aligned_distance(u, &v) < cfg.dedup_tol) => {
                    vectors.push(v);
                    true
                }
                _ => false,
            };
            if is_new {
                since_last_new = 0;
            } else {
                since_last_new += 1;
                if since_last_new >= cfg.saturation {
                    break;
                }
            }
        }
    }
    let bases = orthogonal_cliques(&vectors, n, 1e-6);
    UnbiasedVectorCatalog {
        n,
        anchor_family: h.family().to_string(),
        anchor_params: h.params().to_vec(),
        vectors,
        bases,
        restarts,
        since_last_new,
        incomplete: since_last_new < cfg.saturation,
    }
}

// ---------------------------------------------------------------------------
// MU constellations

#[derive(Debug, Clone)]
pub struct ConstellationResult {
    pub shape: Vec<usize>,
    pub n: usize,
    pub best_penalty: f64,
    pub restarts_used: usize,
    /// Vectors of the best run, grouped by set.
    pub witness: Vec<Vec<DVector<Complex64>>>,
}

impl ConstellationResult {
    pub const SUCCESS: f64 = 1e-12;

    pub fn success(&self) -> bool {
        self.best_penalty < Self::SUCCESS
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shape": self.shape,
            "N": self.n,
            "bestPenalty": self.best_penalty,
            "success": self.success(),
            "restartsUsed": self.restarts_used,
        })
    }
}

fn constellation_eval(n: usize, shape: &[usize], x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let m: usize = shape.iter().sum();
    let vec_of = |v: usize| -> Vec<Complex64> { (0..n).map(|k| Complex64::new(x[2 * (v * n + k)], x[2 * (v * n + k) + 1])).collect() };
    let vs: Vec<Vec<Complex64>> = (0..m).map(vec_of).collect();
    let mut set_of = Vec::with_capacity(m);
    for (s, &sz) in shape.iter().enumerate() {
        set_of.extend(std::iter::repeat_n(s, sz));
    }
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    for (v, u) in vs.iter().enumerate() {
        let r = u.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0;
        let d = (0..n).flat_map(|k| [(2 * (v * n + k), 2.0 * u[k].re), (2 * (v * n + k) + 1, 2.0 * u[k].im)]).collect();
        rows.push((r, d));
    }
    for a in 0..m {
        for b in a + 1..m {
            let (u, w) = (&vs[a], &vs[b]);
            let s: Complex64 = (0..n).map(|k| u[k].conj() * w[k]).sum();
            // ds/dRe u_k = w_k, ds/dIm u_k = -i w_k, ds/dRe w_k = conj u_k, ds/dIm w_k = i conj u_k.
            let ds: Vec<(usize, Complex64)> = (0..n)
                .flat_map(|k| {
                    [
                        (2 * (a * n + k), w[k]),
                        (2 * (a * n + k) + 1, -Complex64::i() * w[k]),
                        (2 * (b * n + k), u[k].conj()),
                        (2 * (b * n + k) + 1, Complex64::i() * u[k].conj()),
                    ]
                })
                .collect();
            if set_of[a] == set_of[b] {
                rows.push((s.re, ds.iter().map(|&(i, d)| (i, d.re)).collect()));
                rows.push((s.im, ds.iter().map(|&(i, d)| (i, d.im)).collect()));
            } else {
                let r = s.norm_sqr() - 1.0 / n as f64;
                rows.push((r, ds.iter().map(|&(i, d)| (i, 2.0 * (s.conj() * d).re)).collect()));
            }
        }
    }
    let mut jac = DMatrix::zeros(rows.len(), x.len());
    let r = DVector::from_fn(rows.len(), |i, _| rows[i].0);
    for (i, (_, d)) in rows.iter().enumerate() {
        for &(j, v) in d {
            jac[(i, j)] += v;
        }
    }
    (r, jac)
}

/// Searches for sets of orthonormal vectors with the given sizes, vectors in
/// different sets unbiased. The penalty is the sum of squared residuals.
pub fn constellation_search(shape: &[usize], n: usize, restarts: usize, seed: u64) -> Result<ConstellationResult> {
    let total: usize = shape.iter().sum();
    if total > n * (n + 1) || shape.iter().any(|&s| s == 0 || s > n) {
        return Err(Error::BadParameter(format!("constellation shape {shape:?} does not fit N = {n}")));
    }
    let dim = 2 * total * n;
    let runs: Vec<(usize, f64, Vec<f64>)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = restart_rng(seed, k as u64);
            let mut x: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for v in 0..total {
                let nrm: f64 = x[2 * v * n..2 * (v + 1) * n].iter().map(|t| t * t).sum::<f64>().sqrt();
                x[2 * v * n..2 * (v + 1) * n].iter_mut().for_each(|t| *t /= nrm);
            }
            let out = levenberg_marquardt(x, 2000, 1e-26, |x| constellation_eval(n, shape, x));
            (k, out.f, out.x)
        })
        .collect();
    let best = runs.iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))).expect("at least one run");
    let restarts_used = runs.iter().filter(|r| r.1 < ConstellationResult::SUCCESS).map(|r| r.0 + 1).min().unwrap_or(runs.len());
    let mut witness = Vec::new();
    let mut v = 0;
    for &sz in shape {
        let set = (0..sz)
            .map(|i| DVector::from_fn(n, |k, _| Complex64::new(best.2[2 * ((v + i) * n + k)], best.2[2 * ((v + i) * n + k) + 1])))
            .collect();
        v += sz;
        witness.push(set);
    }
    Ok(ConstellationResult { shape: shape.to_vec(), n, best_penalty: best.1, restarts_used, witness })
}

// ---------------------------------------------------------------------------
// Extendability of MU triplets

#[derive(Debug, Clone)]
pub struct ExtendabilityReport {
    pub bases: usize,
    pub max_d2_raw: f64,
    pub max_d2_normalized: f64,
    pub best_pair: (usize, usize),
}

impl ExtendabilityReport {
    /// Which normalization lands within `tol` of `quoted`.
    pub fn matching_normalization(&self, quoted: f64, tol: f64) -> &'static str {
        match ((self.max_d2_raw - quoted).abs() <= tol, (self.max_d2_normalized - quoted).abs() <= tol) {
            (true, true) => "both",
            (true, false) => "raw",
            (false, true) => "normalized",
            (false, false) => "neither",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "bases": self.bases,
            "maxD2Raw": self.max_d2_raw,
            "maxD2Normalized": self.max_d2_normalized,
            "bestPair": [self.best_pair.0, self.best_pair.1],
            "matches093": self.matching_normalization(0.93, 0.01),
        })
    }
}

/// Largest pairwise `grassmann_d2` among the catalog bases, raw and divided by N - 1.
pub fn extendability_probe(cat: &UnbiasedVectorCatalog) -> Result<ExtendabilityReport> {
    if cat.incomplete || cat.n_t() < 2 {
        return Err(Error::IncompleteCatalog(format!(
            "{} bases after {} restarts, saturated: {}",
            cat.n_t(),
            cat.restarts,
            !cat.incomplete
        )));
    }
    let mats: Vec<CM> = (0..cat.n_t()).map(|k| cat.basis_matrix(k)).collect();
    let mut best = (0.0, (0, 1));
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let d = grassmann_d2(&mats[i], &mats[j])?;
            if d > best.0 {
                best = (d, (i, j));
            }
        }
    }
    Ok(ExtendabilityReport {
        bases: mats.len(),
        max_d2_raw: best.0,
        max_d2_normalized: best.0 / (cat.n - 1) as f64,
        best_pair: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{bjorck_c6, f6, fourier, is_biunimodular, tao_s6};
    use proptest::prelude::*;

    fn normalized(h: &HMat) -> CM {
        h.matrix() / Complex64::new((h.n() as f64).sqrt(), 0.0)
    }

    #[test]
    fn grassmann_extremes() {
        let f = normalized(&fourier(4).unwrap());
        let id = CM::identity(4, 4);
        assert!((grassmann_d2(&id, &f).unwrap() - 3.0).abs() < 1e-12);
        let mut shuffled = CM::zeros(4, 4);
        for (j, &p) in [2usize, 0, 3, 1].iter().enumerate() {
            shuffled.set_column(j, &(f.column(p) * Complex64::from_polar(1.0, j as f64)));
        }
        assert!(grassmann_d2(&f, &shuffled).unwrap().abs() < 1e-12);
        assert!(grassmann_d2(&id, &f6(0.0, 0.0).map(|h| normalized(&h)).unwrap()).is_err());
    }

    #[test]
    fn haar_mean_for_qutrits() {
        let m = haar_pair_mean_d2(3, 10_000, 11);
        // Exact mean N(N-1)/(N+1) = 1.5; the sample spread is about 0.4.
        assert!((m - 1.5).abs() < 0.02, "{m}");
    }

    #[test]
    fn simplex_map_both_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 5] {
            let u = haar_unitary(n, &mut rng);
            let set = BasisVectorSet::from_columns(&u);
            assert!(set.simplex_error() < 1e-12);
            assert!(set.centroid_norm() < 1e-12);
            let mut skew = u.clone();
            let c = skew.column(0) + skew.column(1) * Complex64::new(0.3, 0.0);
            skew.set_column(0, &(&c / Complex64::new(c.norm(), 0.0)));
            assert!(BasisVectorSet::from_columns(&skew).simplex_error() > 1e-3);
        }
    }

    #[test]
    fn mu_iff_totally_orthogonal() {
        let id = BasisVectorSet::from_columns(&CM::identity(5, 5));
        let f = BasisVectorSet::from_columns(&normalized(&fourier(5).unwrap()));
        assert!(id.max_cross_dot(&f) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = BasisVectorSet::from_columns(&haar_unitary(5, &mut rng));
        assert!(id.max_cross_dot(&r) > 1e-3);
    }

    #[test]
    fn f5_catalog_is_the_gauss_sequences() {
        let cfg = SearchConfig { saturation: 300, ..Default::default() };
        let cat = unbiased_vector_search(&fourier(5).unwrap(), &cfg);
        assert!(!cat.incomplete);
        assert_eq!(cat.n_v(), 20);
        let s = 5f64.sqrt();
        for v in &cat.vectors {
            let z: Vec<Complex64> = v.iter().map(|x| x * s).collect();
            assert!(is_biunimodular(&z, 1e-8));
        }
        // Every Gauss sequence, scaled, appears in the catalog.
        for m in 1..5 {
            for k in 0..5 {
                let g = crate::hadamard::gauss_sequence(5, m, k).unwrap();
                let v = DVector::from_fn(5, |j, _| g[j] / s);
                assert!(cat.vectors.iter().any(|u| phase_aligned_distance(u, &v) < 1e-6));
            }
        }
        assert_eq!(cat.n_t(), 4);
    }

    #[test]
    fn search_is_deterministic() {
        let cfg = SearchConfig { saturation: 50, max_restarts: 400, ..Default::default() };
        let h = bjorck_c6().unwrap();
        let a = unbiased_vector_search(&h, &cfg);
        let b = unbiased_vector_search(&h, &cfg);
        assert_eq!(a.n_v(), b.n_v());
        assert_eq!(a.restarts, b.restarts);
        for (u, v) in a.vectors.iter().zip(b.vectors.iter()) {
            assert!((u - v).norm() == 0.0);
        }
    }

    #[test]
    fn tao_has_no_triplets() {
        let cat = unbiased_vector_search(&tao_s6().unwrap(), &SearchConfig::default());
        assert!(!cat.incomplete);
        assert_eq!(cat.n_t(), 0);
    }

    #[test]
    fn constellation_quartet_in_five() {
        let r = constellation_search(&[5, 5, 5, 5], 5, 8, 1).unwrap();
        assert!(r.success(), "{}", r.best_penalty);
        assert!(constellation_search(&[7], 6, 1, 1).is_err());
    }

    #[test]
    fn probe_requires_complete_catalog() {
        let cfg = SearchConfig { max_restarts: 10, ..Default::default() };
        let cat = unbiased_vector_search(&fourier(3).unwrap(), &cfg);
        assert!(matches!(extendability_probe(&cat), Err(Error::IncompleteCatalog(_))));
    }

    #[test]
    fn prime_catalog_has_mu_bases() {
        let cat = unbiased_vector_search(&fourier(3).unwrap(), &SearchConfig { saturation: 200, ..Default::default() });
        assert_eq!(cat.n_v(), 6);
        assert_eq!(cat.n_t(), 2);
        let rep = extendability_probe(&cat).unwrap();
        assert!((rep.max_d2_normalized - 1.0).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn d2_bounded_and_symmetric(seed in 0u64..10_000, n in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = haar_unitary(n, &mut rng);
            let b = haar_unitary(n, &mut rng);
            let d = grassmann_d2(&a, &b).unwrap();
            prop_assert!(d >= -1e-12 && d <= (n - 1) as f64 + 1e-12);
            prop_assert!((d - grassmann_d2(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(((a.adjoint() * &a) - CM::identity(n, n)).norm() < 1e-12);
        }
    }
}
