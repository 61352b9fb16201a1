//! Complex Hadamard matrices: a catalog of families, dephasing, equivalence
//! testing, MU pairs, the defect, biunimodular sequences and the standard set
//! of mutually unbiased Hadamard matrices for odd N.
//!
//! Matrices are unnormalized: `H H^dagger = N 1` and every entry is unimodular.

use crate::cnum::{float_tensor, root_of_unity};
use crate::error::{Error, Result};
use crate::gf::{is_prime, GfSpec};
use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::sync::OnceLock;

type CM = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn phase(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// Tolerance used by family constructors when validating their output.
pub const BUILD_TOL: f64 = 1e-10;
/// Tolerance on sorted Haagerup phase angles.
pub const INVARIANT_TOL: f64 = 1e-7;

/// Largest violation of `H H^dagger = N 1` and of unimodularity.
pub fn hadamard_residual(h: &CM) -> f64 {
    let n = h.nrows();
    if n != h.ncols() {
        return f64::INFINITY;
    }
    let g = h * h.adjoint();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { n as f64 } else { 0.0 };
            r = r.max((g[(i, j)] - target).norm());
        }
    }
    h.iter().fold(r, |acc, z| acc.max((z.norm() - 1.0).abs()))
}

/// A complex Hadamard matrix with its family tag and lazily cached forms.
#[derive(Debug, Clone)]
pub struct HMat {
    entries: CM,
    family: String,
    params: Vec<f64>,
    warnings: Vec<String>,
    dephased: OnceLock<CM>,
    invariants: OnceLock<Vec<f64>>,
}

impl HMat {
    /// Wraps `entries`, failing if they are not Hadamard within `BUILD_TOL`.
    pub fn new(family: &str, params: Vec<f64>, entries: CM) -> Result<Self> {
        let r = hadamard_residual(&entries);
        if r > BUILD_TOL {
            return Err(Error::AxiomViolation(format!("{family} {params:?} is not Hadamard: residual {r:.3e}")));
        }
        Ok(Self::unchecked(family, params, entries))
    }

    fn unchecked(family: &str, params: Vec<f64>, entries: CM) -> Self {
        HMat {
            entries,
            family: family.to_string(),
            params,
            warnings: Vec::new(),
            dephased: OnceLock::new(),
            invariants: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CM {
        &self.entries
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn residual(&self) -> f64 {
        hadamard_residual(&self.entries)
    }

    pub fn is_hadamard(&self, tol: f64) -> bool {
        self.residual() <= tol
    }

    /// Dephased form: first row and column all equal to 1.
    pub fn dephased(&self) -> &CM {
        self.dephased.get_or_init(|| dephase_matrix(&self.entries))
    }

    /// Sorted Haagerup invariant angles in [0, 2 pi).
    pub fn invariants(&self) -> &[f64] {
        self.invariants.get_or_init(|| haagerup_angles(&self.entries))
    }

    pub fn dagger(&self) -> HMat {
        Self::unchecked(&format!("{}^dagger", self.family), self.params.clone(), self.entries.adjoint())
    }

    pub fn transpose(&self) -> HMat {
        Self::unchecked(&format!("{}^T", self.family), self.params.clone(), self.entries.transpose())
    }

    pub fn tensor(&self, other: &HMat) -> HMat {
        Self::unchecked(
            &format!("{}(x){}", self.family, other.family),
            self.params.iter().chain(other.params.iter()).copied().collect(),
            float_tensor(&self.entries, &other.entries),
        )
    }

    /// H2-reducible test: the dephased form contains an entry equal to -1.
    pub fn is_h2_reducible(&self) -> bool {
        self.dephased().iter().any(|z| (z + 1.0).norm() < 1e-8)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.n())
            .map(|i| (0..self.n()).map(|j| [self.entries[(i, j)].re, self.entries[(i, j)].im]).collect())
            .collect();
        json!({
            "family": self.family,
            "params": self.params,
            "N": self.n(),
            "entries": rows,
            "warnings": self.warnings,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::Parse(format!("hadamard json: {s}"));
        let family = v["family"].as_str().unwrap_or("custom");
        let params: Vec<f64> = v["params"]
            .as_array()
            .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
            .unwrap_or_default();
        let rows = v["entries"].as_array().ok_or_else(|| bad("missing entries"))?;
        let n = rows.len();
        let mut m = CM::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| bad("row is not an array"))?;
            if row.len() != n {
                return Err(bad("matrix is not square"));
            }
            for (j, z) in row.iter().enumerate() {
                let re = z[0].as_f64().ok_or_else(|| bad("entry"))?;
                let im = z[1].as_f64().ok_or_else(|| bad("entry"))?;
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        HMat::new(family, params, m)
    }
}

// ---------------------------------------------------------------------------
// Catalog

/// Fourier matrix `[F_N]_{jk} = gamma_N^{jk}`.
pub fn fourier(n: usize) -> Result<HMat> {
    if n == 0 {
        return Err(Error::BadParameter("fourier: N must be positive".into()));
    }
    HMat::new("fourier", vec![n as f64], CM::from_fn(n, n, |j, k| root_of_unity(n as u64, (j * k) as i64)))
}

/// Galois-Fourier matrix `gamma_p^{char(j * k)}` over GF(N).
pub fn galois_fourier(spec: &GfSpec) -> Result<HMat> {
    let n = spec.n() as usize;
    let p = spec.p() as u64;
    let m = CM::from_fn(n, n, |j, k| root_of_unity(p, spec.char_exp(spec.mul(j as u32, k as u32)) as i64));
    HMat::new("galois_fourier", vec![n as f64], m)
}

/// One-parameter N = 4 family; F4(0) is equivalent to F2 (x) F2.
pub fn f4(a: f64) -> Result<HMat> {
    let z = Complex64::from_polar(1.0, a);
    let one = c(1.0);
    let rows = [
        [one, one, one, one],
        [one, z, -one, -z],
        [one, -one, one, -one],
        [one, -z, -one, z],
    ];
    HMat::new("F4", vec![a], CM::from_fn(4, 4, |i, j| rows[i][j]))
}

fn f6_core(a: f64, b: f64) -> CM {
    let g = |k: i64| root_of_unity(6, k);
    let (z1, z2) = (phase(a), phase(b));
    let one = c(1.0);
    let rows = [
        [one, one, one, one, one, one],
        [one, g(1) * z1, g(2) * z2, g(3), g(4) * z1, g(5) * z2],
        [one, g(2), g(4), one, g(2), g(4)],
        [one, g(3) * z1, z2, g(3), z1, g(3) * z2],
        [one, g(4), g(2), one, g(4), g(2)],
        [one, g(5) * z1, g(4) * z2, g(3), g(2) * z1, g(1) * z2],
    ];
    CM::from_fn(6, 6, |i, j| rows[i][j])
}

/// Affine Fourier family F(a, b) with z1 = exp(2 pi i a), z2 = exp(2 pi i b).
pub fn f6(a: f64, b: f64) -> Result<HMat> {
    HMat::new("F6", vec![a, b], f6_core(a, b))
}

/// Transposed Fourier family.
pub fn f6t(a: f64, b: f64) -> Result<HMat> {
    HMat::new("F6T", vec![a, b], f6_core(a, b).transpose())
}

/// Dita family D(a) with z = exp(2 pi i a). Values outside (-1/8, 1/8] are
/// accepted with a warning since they repeat equivalence classes.
pub fn dita(a: f64) -> Result<HMat> {
    let z = phase(a);
    let zc = z.conj();
    let one = c(1.0);
    let rows = [
        [one, one, one, one, one, one],
        [one, -one, I, -I, -I, I],
        [one, I, -one, I * z, -I * z, -I],
        [one, -I, I * zc, -one, I, -I * zc],
        [one, -I, -I * zc, I, -one, I * zc],
        [one, I, -I, -I * z, I * z, -one],
    ];
    let mut h = HMat::new("dita", vec![a], CM::from_fn(6, 6, |i, j| rows[i][j]))?;
    if !(a > -0.125 && a <= 0.125) {
        h.warnings.push(format!("dita: a = {a} lies outside (-1/8, 1/8]; the class repeats one inside"));
    }
    Ok(h)
}

/// The unimodular root of d^2 - (1 - sqrt 3) d + 1 = 0 with positive imaginary part.
pub fn bjorck_d() -> Complex64 {
    let s3 = 3f64.sqrt();
    Complex64::new((1.0 - s3) / 2.0, (s3 / 2.0).sqrt())
}

/// Circulant matrix with `C_{ij} = row[(j - i) mod n]`.
pub fn circulant_matrix(row: &[Complex64]) -> CM {
    let n = row.len();
    CM::from_fn(n, n, |i, j| row[(j + n - i) % n])
}

/// The circulant C6.
pub fn bjorck_c6() -> Result<HMat> {
    let d = bjorck_d();
    let row = [c(1.0), I * d, -d, -I, -d.conj(), I * d.conj()];
    HMat::new("bjorck_c6", vec![], circulant_matrix(&row))
}

/// Exponents of the cube root of unity in the dephased symmetric
/// Butson(3,6) matrix found by `butson3_6_search`.
pub const TAO_EXPONENTS: [[u8; 6]; 6] = [
    [0, 0, 0, 0, 0, 0],
    [0, 0, 1, 1, 2, 2],
    [0, 1, 0, 2, 1, 2],
    [0, 1, 2, 0, 2, 1],
    [0, 2, 1, 2, 0, 1],
    [0, 2, 2, 1, 1, 0],
];

/// Tao's matrix S6.
pub fn tao_s6() -> Result<HMat> {
    HMat::new("tao_s6", vec![], CM::from_fn(6, 6, |i, j| root_of_unity(3, TAO_EXPONENTS[i][j] as i64)))
}

/// All dephased 6x6 matrices with entries in {1, w, w^2}, w = exp(2 pi i/3),
/// whose rows are pairwise orthogonal, with rows sorted lexicographically.
/// Depth-first search with row-by-row orthogonality pruning.
pub fn butson3_6_search() -> Vec<[[u8; 6]; 6]> {
    let w = |k: u8| root_of_unity(3, k as i64);
    let candidates: Vec<[u8; 6]> = (0..243u32)
        .map(|mut code| {
            let mut r = [0u8; 6];
            for e in r.iter_mut().skip(1) {
                *e = (code % 3) as u8;
                code /= 3;
            }
            r
        })
        .filter(|r| r.iter().map(|&k| w(k)).sum::<Complex64>().norm() < 1e-9)
        .collect();
    let inner = |a: &[u8; 6], b: &[u8; 6]| -> f64 {
        a.iter().zip(b.iter()).map(|(&x, &y)| w(x) * w(y).conj()).sum::<Complex64>().norm()
    };
    let mut out = Vec::new();
    fn dfs(
        start: usize,
        rows: &mut Vec<usize>,
        cand: &[[u8; 6]],
        inner: &dyn Fn(&[u8; 6], &[u8; 6]) -> f64,
        out: &mut Vec<[[u8; 6]; 6]>,
    ) {
        if rows.len() == 5 {
            let mut m = [[0u8; 6]; 6];
            for (k, &r) in rows.iter().enumerate() {
                m[k + 1] = cand[r];
            }
            m[1..].sort();
            out.push(m);
            return;
        }
        for r in start..cand.len() {
            if rows.iter().all(|&q| inner(&cand[q], &cand[r]) < 1e-9) {
                rows.push(r);
                dfs(r + 1, rows, cand, inner, out);
                rows.pop();
            }
        }
    }
    dfs(0, &mut Vec::new(), &candidates, &inner, &mut out);
    out
}

/// Diagonal `E_N = diag(exp(2 pi i j^2 / N))`.
pub fn e_diag(n: usize) -> CM {
    CM::from_diagonal(&nalgebra::DVector::from_fn(n, |j, _| root_of_unity(n as u64, (j * j) as i64)))
}

fn standard_member(n: usize, r: usize) -> CM {
    let f = CM::from_fn(n, n, |j, k| root_of_unity(n as u64, (j * k) as i64));
    let mut er = CM::identity(n, n);
    let e = e_diag(n);
    for _ in 0..r {
        er = &er * &e;
    }
    er * f
}

/// `E_p^r F_p` for an odd prime p.
pub fn standard_prime(p: usize, r: usize) -> Result<HMat> {
    if p < 3 || !is_prime(p as u64) {
        return Err(Error::BadParameter(format!("standard_prime: {p} is not an odd prime")));
    }
    HMat::new("standard_prime", vec![p as f64, r as f64], standard_member(p, r % p))
}

// ---------------------------------------------------------------------------
// Karlsson's H2-reducible family

/// How the phases z2, z3, z4 are obtained in `karlsson`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KarlssonBranch {
    /// Solve z2, z3, z4 from z1 through the Moebius constraints.
    Generic,
    /// For points where z1 and z2 are both free, for example x = (0, 0, +-1).
    /// z3 and z4 still follow from z1. The value is the angle of z2 in turns.
    FreeColumns { z2: f64 },
    /// For points where z3 and z4 are both free, for example x = (+-1, 0, 0).
    /// z1 and z2 follow from z3 and the z1 argument is ignored. Angles in turns.
    FreeRows { z3: f64, z4: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Mobius {
    alpha: Complex64,
    beta: Complex64,
}

impl Mobius {
    fn from_block(a: &[[Complex64; 2]; 2]) -> Self {
        Mobius { alpha: a[0][1] * a[0][1], beta: a[0][0] * a[0][0] }
    }

    fn degeneracy(&self) -> f64 {
        (self.alpha.norm_sqr() - self.beta.norm_sqr()).abs()
    }

    fn apply(&self, z: Complex64) -> Complex64 {
        (self.alpha * z - self.beta) / (self.beta.conj() * z - self.alpha.conj())
    }

    fn invert(&self, w: Complex64) -> Complex64 {
        (self.alpha.conj() * w - self.beta) / (self.beta.conj() * w - self.alpha)
    }
}

fn karlsson_block(x: [f64; 3]) -> [[Complex64; 2]; 2] {
    let s = 3f64.sqrt() / 2.0;
    let a11 = c(-0.5) + I * s * Complex64::new(x[0] + x[2], x[1]);
    let a12 = c(-0.5) + I * s * Complex64::new(x[0] - x[2], -x[1]);
    [[a11, a12], [a12.conj(), -a11.conj()]]
}

fn unit_sqrt(w: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, w.arg() / 2.0)
}

/// Block ansatz from unit vector `x`, phases `z = [z1, z2, z3, z4]`.
fn karlsson_assemble(x: [f64; 3], z: [Complex64; 4]) -> CM {
    let f2 = CM::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]);
    let blk = |b: [[Complex64; 2]; 2]| CM::from_fn(2, 2, |i, j| b[i][j]);
    let a = blk(karlsson_block(x));
    let b = blk(karlsson_block([-x[0], -x[1], -x[2]]));
    let dg = |t: Complex64| CM::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), t]));
    let z1 = dg(z[0]) * &f2;
    let z2 = dg(z[1]) * &f2;
    let z3 = &f2 * dg(z[2]);
    let z4 = &f2 * dg(z[3]);
    let half = c(0.5);
    let blocks = [
        [f2.clone(), z1.clone(), z2.clone()],
        [z3.clone(), &z3 * &a * &z1 * half, &z3 * &b * &z2 * half],
        [z4.clone(), &z4 * &b * &z1 * half, &z4 * &a * &z2 * half],
    ];
    let mut h = CM::zeros(6, 6);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, m) in row.iter().enumerate() {
            h.view_mut((2 * bi, 2 * bj), (2, 2)).copy_from(m);
        }
    }
    h
}

/// Karlsson's H2-reducible N = 6 family. `x` is a unit vector, `z1` the angle
/// of z1 in turns, `signs` multiply the solved square roots of (z2, z3, z4).
pub fn karlsson(x: [f64; 3], z1: f64, signs: [i8; 3], branch: KarlssonBranch) -> Result<HMat> {
    let norm2: f64 = x.iter().map(|t| t * t).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::BadParameter(format!("karlsson: |x|^2 = {norm2} differs from 1")));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::BadParameter("karlsson: signs must be +-1".into()));
    }
    let ma = Mobius::from_block(&karlsson_block(x));
    let mb = Mobius::from_block(&karlsson_block([-x[0], -x[1], -x[2]]));
    const DEG: f64 = 1e-9;
    let (da, db) = (ma.degeneracy() < DEG, mb.degeneracy() < DEG);
    let z = match branch {
        KarlssonBranch::Generic => {
            if da && db {
                return Err(Error::DegenerateMobiusPoint(x[0], x[1], x[2]));
            }
            let z1c = phase(z1);
            let w3 = ma.apply(z1c * z1c);
            let w4 = mb.apply(z1c * z1c);
            let w2 = if db { ma.invert(w4) } else { mb.invert(w3) };
            [z1c, unit_sqrt(w2), unit_sqrt(w3), unit_sqrt(w4)]
        }
        KarlssonBranch::FreeColumns { z2 } => {
            let z1c = phase(z1);
            [z1c, phase(z2), unit_sqrt(ma.apply(z1c * z1c)), unit_sqrt(mb.apply(z1c * z1c))]
        }
        KarlssonBranch::FreeRows { z3, z4 } => {
            let z3c = phase(z3);
            let w = z3c * z3c;
            [unit_sqrt(ma.invert(w)), unit_sqrt(mb.invert(w)), z3c, phase(z4)]
        }
    };
    let z = [z[0], z[1] * signs[0] as f64, z[2] * signs[1] as f64, z[3] * signs[2] as f64];
    let params = vec![x[0], x[1], x[2], z1, signs[0] as f64, signs[1] as f64, signs[2] as f64];
    let h = karlsson_assemble(x, z);
    let r = hadamard_residual(&h);
    if r > BUILD_TOL {
        return Err(Error::AxiomViolation(format!(
            "karlsson at {x:?}: residual {r:.3e}; this point may need a special branch"
        )));
    }
    Ok(HMat::unchecked("karlsson", params, h))
}

/// All eight sign choices at one parameter point, with duplicates removed by
/// comparing dephased forms.
pub fn karlsson_sign_members(x: [f64; 3], z1: f64, branch: KarlssonBranch) -> Result<Vec<HMat>> {
    let mut out: Vec<HMat> = Vec::new();
    for bits in 0..8 {
        let s = |k: usize| if bits >> k & 1 == 1 { -1 } else { 1 };
        let h = karlsson(x, z1, [s(0), s(1), s(2)], branch)?;
        if !out.iter().any(|g| max_diff(g.dephased(), h.dephased()) < 1e-9) {
            out.push(h);
        }
    }
    Ok(out)
}

fn max_diff(a: &CM, b: &CM) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Dephasing and equivalence

fn dephase_matrix(h: &CM) -> CM {
    let n = h.nrows();
    CM::from_fn(n, n, |i, j| h[(i, j)] * h[(0, 0)] / (h[(i, 0)] * h[(0, j)]))
}

/// Dephased copy of `h`.
pub fn dephase(h: &HMat) -> HMat {
    HMat::unchecked(&h.family, h.params.clone(), h.dephased().clone())
}

fn haagerup_angles(h: &CM) -> Vec<f64> {
    let n = h.nrows();
    let mut out = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = h[(i, j)] * h[(k, l)] * h[(i, l)].conj() * h[(k, j)].conj();
                    let mut t = v.arg().rem_euclid(2.0 * PI);
                    if 2.0 * PI - t < INVARIANT_TOL {
                        t = 0.0;
                    }
                    out.push(t);
                }
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Transformation `H2 = diag(d_rows) P_rows H1 P_cols diag(d_cols)`,
/// with `H2[i][j] = d_rows[i] * H1[rows[i]][cols[j]] * d_cols[j]`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub row_phases: Vec<Complex64>,
    pub col_phases: Vec<Complex64>,
}

impl Witness {
    pub fn apply(&self, h1: &CM) -> CM {
        let n = h1.nrows();
        CM::from_fn(n, n, |i, j| self.row_phases[i] * h1[(self.rows[i], self.cols[j])] * self.col_phases[j])
    }

    pub fn is_identity_permutation(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| i == r) && self.cols.iter().enumerate().all(|(i, &r)| i == r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Inequivalent,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct EquivCertificate {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Largest gap between the sorted invariant lists, when they differ.
    pub invariant_gap: Option<f64>,
    /// Description of what separated the matrices when inequivalent.
    pub reason: Option<String>,
    pub row_perms_tried: usize,
}

impl EquivCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": format!("{:?}", self.verdict).to_lowercase(),
            "witness": self.witness.as_ref().map(|w| json!({
                "rows": w.rows,
                "cols": w.cols,
                "rowPhases": w.row_phases.iter().map(|z| z.arg()).collect::<Vec<_>>(),
                "colPhases": w.col_phases.iter().map(|z| z.arg()).collect::<Vec<_>>(),
            })),
            "invariantGap": self.invariant_gap,
            "reason": self.reason,
            "rowPermsTried": self.row_perms_tried,
        })
    }
}

/// Default row-permutation budget: every permutation for N <= 6.
pub const DEFAULT_BUDGET: usize = 720;

/// Tries to extend row permutation `sigma` to a witness.
fn witness_for_rows(h1: &CM, h2: &CM, sigma: &[usize], tol: f64) -> Option<Witness> {
    let n = h1.nrows();
    for k0 in 0..n {
        // Row phases relative to column 0 of H2 matched with column k0 of H1.
        let v: Vec<Complex64> = (0..n).map(|i| h2[(i, 0)] / h1[(sigma[i], k0)]).collect();
        // ok[j][k]: column j of H2 equals column k of H1 up to one phase.
        let ok: Vec<Vec<bool>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let r0 = h2[(0, j)] / (h1[(sigma[0], k)] * v[0]);
                        (1..n).all(|i| (h2[(i, j)] / (h1[(sigma[i], k)] * v[i]) - r0).norm() < tol)
                    })
                    .collect()
            })
            .collect();
        if !ok[0][k0] {
            continue;
        }
        let mut cols = vec![usize::MAX; n];
        let mut used = vec![false; n];
        cols[0] = k0;
        used[k0] = true;
        fn assign(j: usize, ok: &[Vec<bool>], cols: &mut [usize], used: &mut [bool]) -> bool {
            if j == cols.len() {
                return true;
            }
            for k in 0..cols.len() {
                if !used[k] && ok[j][k] {
                    used[k] = true;
                    cols[j] = k;
                    if assign(j + 1, ok, cols, used) {
                        return true;
                    }
                    used[k] = false;
                }
            }
            false
        }
        if assign(1, &ok, &mut cols, &mut used) {
            let col_phases: Vec<Complex64> =
                (0..n).map(|j| h2[(0, j)] / (h1[(sigma[0], cols[j])] * v[0])).collect();
            let w = Witness { rows: sigma.to_vec(), cols, row_phases: v, col_phases };
            if max_diff(&w.apply(h1), h2) < tol {
                return Some(w);
            }
        }
    }
    None
}

/// Two-stage equivalence test under permutations and rephasings.
pub fn equivalent(h1: &HMat, h2: &HMat, budget: usize) -> Result<EquivCertificate> {
    equivalent_matrices(h1.matrix(), h2.matrix(), Some((h1.invariants(), h2.invariants())), budget)
}

fn equivalent_matrices(h1: &CM, h2: &CM, inv: Option<(&[f64], &[f64])>, budget: usize) -> Result<EquivCertificate> {
    let n = h1.nrows();
    if h2.nrows() != n {
        return Err(Error::SizeMismatch(n, h2.nrows()));
    }
    let (i1, i2);
    let (a, b) = match inv {
        Some(p) => p,
        None => {
            i1 = haagerup_angles(h1);
            i2 = haagerup_angles(h2);
            (&i1[..], &i2[..])
        }
    };
    let gap = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if gap > INVARIANT_TOL {
        return Ok(EquivCertificate {
            verdict: Verdict::Inequivalent,
            witness: None,
            invariant_gap: Some(gap),
            reason: Some("Haagerup invariant multisets differ".into()),
            row_perms_tried: 0,
        });
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).take(budget).collect();
    let total = (1..=n).product::<usize>();
    let tried = perms.len();
    let found = perms.par_iter().find_map_any(|s| witness_for_rows(h1, h2, s, 1e-8));
    let verdict = match (&found, tried >= total) {
        (Some(_), _) => Verdict::Equivalent,
        (None, true) => Verdict::Inequivalent,
        (None, false) => Verdict::Unknown,
    };
    let reason = match verdict {
        Verdict::Inequivalent => Some("exhaustive permutation search found no witness".into()),
        Verdict::Unknown => Some(format!("budget of {budget} row permutations exhausted out of {total}")),
        Verdict::Equivalent => None,
    };
    Ok(EquivCertificate { verdict, witness: found, invariant_gap: None, reason, row_perms_tried: tried })
}

/// Equivalence of unordered pairs {1, H1} and {1, H2}: H2 ~ H1 or H2 ~ H1^dagger.
pub fn unordered_pair_equivalent(h1: &HMat, h2: &HMat, budget: usize) -> Result<EquivCertificate> {
    let direct = equivalent(h1, h2, budget)?;
    if direct.verdict == Verdict::Equivalent {
        return Ok(direct);
    }
    let mut flipped = equivalent(&h1.dagger(), h2, budget)?;
    if flipped.verdict == Verdict::Inequivalent && direct.verdict == Verdict::Unknown {
        flipped.verdict = Verdict::Unknown;
        flipped.reason = direct.reason;
    }
    Ok(flipped)
}

// ---------------------------------------------------------------------------
// MU pairs and the defect

/// True iff `N^{-1/2} H1^dagger H2` has unimodular entries within `tol`.
pub fn mu_pair(h1: &CM, h2: &CM, tol: f64) -> Result<bool> {
    let n = h1.nrows();
    if h2.nrows() != n || h1.ncols() != n || h2.ncols() != n {
        return Err(Error::SizeMismatch(n, h2.nrows()));
    }
    let s = 1.0 / (n as f64).sqrt();
    Ok((h1.adjoint() * h2).iter().all(|z| (z.norm() * s - 1.0).abs() <= tol))
}

/// Rank by Gaussian elimination with full pivoting; pivots below
/// `rel * max|a|` count as zero.
pub fn real_rank(a: &DMatrix<f64>, rel: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = m.shape();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0);
        for i in rank..rows {
            for j in rank..cols {
                if m[(i, j)].abs() > best.2 {
                    best = (i, j, m[(i, j)].abs());
                }
            }
        }
        if best.2 <= rel * scale {
            break;
        }
        m.swap_rows(rank, best.0);
        m.swap_columns(rank, best.1);
        let p = m[(rank, rank)];
        for i in rank + 1..rows {
            let f = m[(i, rank)] / p;
            if f != 0.0 {
                for j in rank..cols {
                    let t = m[(rank, j)];
                    m[(i, j)] -= f * t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Real linear system of first-order unitarity for rephasings of the core
/// of the dephased matrix. Unknowns are the phases of entries (a, b), a, b >= 1.
pub fn defect_system(h: &CM) -> DMatrix<f64> {
    let h = dephase_matrix(h);
    let n = h.nrows();
    let var = |a: usize, b: usize| (a - 1) * (n - 1) + (b - 1);
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let mut m = DMatrix::<f64>::zeros(2 * pairs.len(), (n - 1) * (n - 1));
    for (r, &(i, j)) in pairs.iter().enumerate() {
        for k in 1..n {
            let t = h[(i, k)] * h[(j, k)].conj();
            if i >= 1 {
                m[(2 * r, var(i, k))] += t.re;
                m[(2 * r + 1, var(i, k))] += t.im;
            }
            if j >= 1 {
                m[(2 * r, var(j, k))] -= t.re;
                m[(2 * r + 1, var(j, k))] -= t.im;
            }
        }
    }
    m
}

/// Defect: (N-1)^2 minus the rank of `defect_system`.
pub fn defect(h: &HMat) -> Result<usize> {
    let n = h.n();
    if n < 2 {
        return Ok(0);
    }
    let sys = defect_system(h.matrix());
    let tight = real_rank(&sys, 1e-8);
    let loose = real_rank(&sys, 1e-6);
    if tight != loose {
        return Err(Error::IllConditioned { rank_tight: tight, rank_loose: loose });
    }
    Ok((n - 1) * (n - 1) - tight)
}

/// Defect of the Fourier matrix of order p^m from the closed form.
pub fn fourier_prime_power_defect(p: u64, m: u32) -> u64 {
    p.pow(m - 1) * ((p - 1) * m as u64 - p) + 1
}

// ---------------------------------------------------------------------------
// Biunimodular sequences

/// `zhat_i = N^{-1/2} sum_j gamma^{ij} z_j`.
pub fn fourier_transform(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| z.iter().enumerate().map(|(j, &zj)| root_of_unity(n as u64, (i * j) as i64) * zj).sum::<Complex64>() * s)
        .collect()
}

/// Gauss sequence `exp(2 pi i (m j^2 + k j) / N)` for odd N and gcd(m, N) = 1.
pub fn gauss_sequence(n: usize, m: i64, k: i64) -> Result<Vec<Complex64>> {
    if n.is_multiple_of(2) || n == 0 {
        return Err(Error::BadParameter(format!("gauss: N = {n} must be odd")));
    }
    if m.gcd(&(n as i64)) != 1 {
        return Err(Error::BadParameter(format!("gauss: gcd({m}, {n}) != 1")));
    }
    Ok((0..n as i64).map(|j| root_of_unity(n as u64, m * j * j + k * j)).collect())
}

/// Even-N chirp `exp(i pi (m j^2 + 2 k j) / N)` with m odd and gcd(m, N) = 1.
pub fn chirp_sequence(n: usize, m: i64, k: i64) -> Result<Vec<Complex64>> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::BadParameter(format!("chirp: N = {n} must be even")));
    }
    if m.gcd(&(n as i64)) != 1 {
        return Err(Error::BadParameter(format!("chirp: gcd({m}, {n}) != 1")));
    }
    Ok((0..n as i64).map(|j| root_of_unity(2 * n as u64, m * j * j + 2 * k * j)).collect())
}

/// Both `z` and its transform have unimodular entries within `tol`.
pub fn is_biunimodular(z: &[Complex64], tol: f64) -> bool {
    let unimod = |v: &[Complex64]| v.iter().all(|x| (x.norm() - 1.0).abs() <= tol);
    unimod(z) && unimod(&fourier_transform(z))
}

/// Circulant `C_{ij} = zhat_{(i - j) mod N}`.
pub fn biunimodular_circulant(z: &[Complex64]) -> CM {
    let zh = fourier_transform(z);
    let n = z.len();
    CM::from_fn(n, n, |i, j| zh[(i + n - j) % n])
}

/// `Gamma_a = (1/N) sum_i conj(zhat_i) zhat_{i+a}`.
pub fn autocorrelation(z: &[Complex64]) -> Vec<Complex64> {
    let zh = fourier_transform(z);
    let n = z.len();
    (0..n)
        .map(|a| (0..n).map(|i| zh[i].conj() * zh[(i + a) % n]).sum::<Complex64>() / n as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Standard MUHM and bicirculants

#[derive(Debug, Clone)]
pub struct StandardMuhm {
    pub n: usize,
    /// `E_N^r F_N` for r = 0..N-1.
    pub matrices: Vec<CM>,
    /// Offsets d = r - s for which `X_d = N^{-1/2} F^dagger E^d F` is not Hadamard.
    pub failing_offsets: Vec<usize>,
    pub pairs_checked: usize,
    pub pairs_mu: usize,
}

impl StandardMuhm {
    pub fn all_mu(&self) -> bool {
        self.pairs_mu == self.pairs_checked
    }

    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n,
            "pairsChecked": self.pairs_checked,
            "pairsMu": self.pairs_mu,
            "failingOffsets": self.failing_offsets,
            "allMu": self.all_mu(),
            "prime": is_prime(self.n as u64),
        })
    }
}

/// Builds the standard set for odd N and reports which pairs are unbiased.
pub fn standard_muhm(n: usize) -> Result<StandardMuhm> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadParameter(format!("standard_muhm: N = {n} must be odd and >= 3")));
    }
    let matrices: Vec<CM> = (0..n).map(|r| standard_member(n, r)).collect();
    let f = &matrices[0];
    let s = (n as f64).sqrt();
    let mut ed = CM::identity(n, n);
    let e = e_diag(n);
    let mut failing_offsets = Vec::new();
    for d in 1..n {
        ed = &ed * &e;
        let x = f.adjoint() * &ed * f / Complex64::new(s, 0.0);
        if hadamard_residual(&x) > 1e-9 {
            failing_offsets.push(d);
        }
    }
    let mut pairs_checked = 0;
    let mut pairs_mu = 0;
    for r in 0..n {
        for q in r + 1..n {
            pairs_checked += 1;
            if mu_pair(&matrices[r], &matrices[q], 1e-9)? {
                pairs_mu += 1;
            }
        }
    }
    Ok(StandardMuhm { n, matrices, failing_offsets, pairs_checked, pairs_mu })
}

#[derive(Debug, Clone)]
pub enum BicirculantOutcome {
    Hadamard(HMat),
    Violation { unitarity: f64, modulus: f64 },
}

/// Assembles `[[A, B], [B^dagger, -A^dagger]]` from circulant rows and tests it.
pub fn bicirculant_validate(a_row: &[Complex64; 3], b_row: &[Complex64; 3]) -> BicirculantOutcome {
    let a = circulant_matrix(a_row);
    let b = circulant_matrix(b_row);
    let mut h = CM::zeros(6, 6);
    h.view_mut((0, 0), (3, 3)).copy_from(&a);
    h.view_mut((0, 3), (3, 3)).copy_from(&b);
    h.view_mut((3, 0), (3, 3)).copy_from(&b.adjoint());
    h.view_mut((3, 3), (3, 3)).copy_from(&(-a.adjoint()));
    let g = &h * h.adjoint() - CM::identity(6, 6) * c(6.0);
    let unitarity = g.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let modulus = h.iter().fold(0.0f64, |m, z| m.max((z.norm() - 1.0).abs()));
    if unitarity <= BUILD_TOL && modulus <= BUILD_TOL {
        let params = a_row.iter().chain(b_row.iter()).map(|z| z.arg() / (2.0 * PI)).collect();
        BicirculantOutcome::Hadamard(HMat::unchecked("bicirculant", params, h))
    } else {
        BicirculantOutcome::Violation { unitarity, modulus }
    }
}

/// Names accepted by `family`.
pub const FAMILY_NAMES: [&str; 10] = [
    "fourier",
    "galois_fourier",
    "F4",
    "F6",
    "F6T",
    "dita",
    "bjorck_c6",
    "karlsson",
    "tao_s6",
    "standard_prime",
];

/// Catalog dispatch by name. Karlsson takes (x1, x2, x3, z1[, s2, s3, s4]) on
/// the generic branch.
pub fn family(name: &str, params: &[f64]) -> Result<HMat> {
    let need = |k: usize| {
        if params.len() < k {
            Err(Error::BadParameter(format!("{name} needs {k} parameters, got {}", params.len())))
        } else {
            Ok(())
        }
    };
    let as_usize = |x: f64| -> Result<usize> {
        if x < 0.0 || x.fract() != 0.0 {
            Err(Error::BadParameter(format!("{name}: {x} is not a non-negative integer")))
        } else {
            Ok(x as usize)
        }
    };
    match name {
        "fourier" => {
            need(1)?;
            fourier(as_usize(params[0])?)
        }
        "galois_fourier" => {
            need(1)?;
            galois_fourier(&GfSpec::of_order(as_usize(params[0])? as u32)?)
        }
        "F4" => {
            need(1)?;
            f4(params[0])
        }
        "F6" => {
            need(2)?;
            f6(params[0], params[1])
        }
        "F6T" => {
            need(2)?;
            f6t(params[0], params[1])
        }
        "dita" => {
            need(1)?;
            dita(params[0])
        }
        "bjorck_c6" => bjorck_c6(),
        "tao_s6" => tao_s6(),
        "standard_prime" => {
            need(2)?;
            standard_prime(as_usize(params[0])?, as_usize(params[1])?)
        }
        "karlsson" => {
            need(4)?;
            let sg = |k: usize| if params.get(k).copied().unwrap_or(1.0) < 0.0 { -1 } else { 1 };
            karlsson([params[0], params[1], params[2]], params[3], [sg(4), sg(5), sg(6)], KarlssonBranch::Generic)
        }
        _ => Err(Error::BadParameter(format!("unknown family {name}; expected one of {FAMILY_NAMES:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ident_scaled(n: usize) -> CM {
        CM::identity(n, n) * c((n as f64).sqrt())
    }

    #[test]
    fn catalog_members_are_hadamard() {
        for h in [
            fourier(5).unwrap(),
            f4(0.3).unwrap(),
            f6(0.1, 0.05).unwrap(),
            f6t(0.1, 0.05).unwrap(),
            dita(0.07).unwrap(),
            bjorck_c6().unwrap(),
            tao_s6().unwrap(),
            standard_prime(7, 3).unwrap(),
            galois_fourier(&GfSpec::of_order(9).unwrap()).unwrap(),
        ] {
            assert!(h.is_hadamard(1e-10), "{} {}", h.family(), h.residual());
        }
        let d = bjorck_d();
        assert!((d.norm() - 1.0).abs() < 1e-12);
        assert!((d * d - (1.0 - 3f64.sqrt()) * d + 1.0).norm() < 1e-12);
        assert!(dita(0.2).unwrap().warnings().len() == 1);
        assert!(dita(0.125).unwrap().warnings().is_empty());
    }

    #[test]
    fn f4_zero_is_real_and_tensor_of_f2() {
        let h = f4(0.0).unwrap();
        assert!(h.matrix().iter().all(|z| z.im.abs() < 1e-15));
        let f2 = fourier(2).unwrap();
        let cert = equivalent(&h, &f2.tensor(&f2), DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Equivalent);
        let g4 = galois_fourier(&GfSpec::of_order(4).unwrap()).unwrap();
        assert!(max_diff(g4.matrix(), f2.tensor(&f2).matrix()) < 1e-12);
    }

    #[test]
    fn tao_constant_comes_from_search() {
        let sols = butson3_6_search();
        assert_eq!(sols.len(), 12);
        assert!(sols.contains(&TAO_EXPONENTS));
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(TAO_EXPONENTS[i][j], TAO_EXPONENTS[j][i]);
            }
        }
        for s in &sols {
            let h = CM::from_fn(6, 6, |i, j| root_of_unity(3, s[i][j] as i64));
            assert!(hadamard_residual(&h) < 1e-12);
        }
    }

    #[test]
    fn dephase_is_idempotent_and_cancels_diagonals() {
        let h = f6(0.13, 0.02).unwrap();
        let d1 = dephase(&h);
        let d2 = dephase(&d1);
        assert!(max_diff(d1.matrix(), d2.matrix()) < 1e-14);
        for k in 0..6 {
            assert!((d1.matrix()[(0, k)] - 1.0).norm() < 1e-14);
            assert!((d1.matrix()[(k, 0)] - 1.0).norm() < 1e-14);
        }
        let f = fourier(5).unwrap();
        let e = CM::from_diagonal(&nalgebra::DVector::from_fn(5, |j, _| Complex64::from_polar(1.0, 0.3 * j as f64 + 1.0)));
        let ef = HMat::new("ef", vec![], e * f.matrix()).unwrap();
        assert!(max_diff(dephase(&ef).matrix(), f.matrix()) < 1e-13);
    }

    #[test]
    fn equivalence_examples() {
        let f6_00 = f6(0.0, 0.0).unwrap();
        let f23 = fourier(2).unwrap().tensor(&fourier(3).unwrap());
        let cert = equivalent(&f6_00, &f23, DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Equivalent);
        let w = cert.witness.unwrap();
        assert!(max_diff(&w.apply(f6_00.matrix()), f23.matrix()) < 1e-8);

        let tao = tao_s6().unwrap();
        let cert = equivalent(&tao, &f6_00, DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Inequivalent);
        assert!(cert.invariant_gap.unwrap() > INVARIANT_TOL);

        let cert = equivalent(&tao, &tao, DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Equivalent);
        let w = cert.witness.unwrap();
        assert!(w.is_identity_permutation());

        let c6 = bjorck_c6().unwrap();
        assert_eq!(equivalent(&c6, &f6_00, DEFAULT_BUDGET).unwrap().verdict, Verdict::Inequivalent);
        assert!(matches!(equivalent(&c6, &fourier(5).unwrap(), 1), Err(Error::SizeMismatch(6, 5))));
    }

    #[test]
    fn hidden_permutation_is_recovered() {
        let h = dita(0.05).unwrap();
        let rows = [3, 0, 5, 1, 4, 2];
        let cols = [2, 4, 0, 5, 3, 1];
        let g = CM::from_fn(6, 6, |i, j| {
            Complex64::from_polar(1.0, 0.7 * i as f64) * h.matrix()[(rows[i], cols[j])] * Complex64::from_polar(1.0, -0.2 * j as f64)
        });
        let g = HMat::new("shuffled", vec![], g).unwrap();
        let cert = equivalent(&h, &g, DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Equivalent);
        assert!(max_diff(&cert.witness.unwrap().apply(h.matrix()), g.matrix()) < 1e-8);
        let tiny = equivalent(&h, &g, 1).unwrap();
        assert!(matches!(tiny.verdict, Verdict::Equivalent | Verdict::Unknown));
    }

    #[test]
    fn mu_pair_examples() {
        let sm = standard_muhm(5).unwrap();
        assert!(sm.all_mu());
        assert_eq!(sm.pairs_checked, 10);
        for n in 2..9 {
            assert!(mu_pair(&ident_scaled(n), fourier(n).unwrap().matrix(), 1e-10).unwrap());
        }
        assert!(mu_pair(f6(0.0, 0.0).unwrap().matrix(), bjorck_c6().unwrap().matrix(), 1e-10).unwrap());
    }

    #[test]
    fn standard_muhm_reports() {
        let e3 = e_diag(3);
        assert!((e3[(2, 2)] - root_of_unity(3, 1)).norm() < 1e-14);
        let s7 = standard_muhm(7).unwrap();
        assert_eq!(s7.pairs_checked, 21);
        assert!(s7.all_mu() && s7.failing_offsets.is_empty());
        let s9 = standard_muhm(9).unwrap();
        assert!(!s9.failing_offsets.is_empty());
        assert!(!s9.all_mu());
        let s15 = standard_muhm(15).unwrap();
        assert!(!s15.failing_offsets.is_empty());
        assert!(standard_muhm(4).is_err());
    }

    #[test]
    fn defect_values() {
        assert_eq!(defect(&fourier(5).unwrap()).unwrap(), 0);
        assert_eq!(defect(&fourier(4).unwrap()).unwrap(), 1);
        assert_eq!(defect(&tao_s6().unwrap()).unwrap(), 0);
        for (p, m) in [(2u64, 2u32), (2, 3), (3, 2)] {
            let n = p.pow(m) as usize;
            assert_eq!(defect(&fourier(n).unwrap()).unwrap() as u64, fourier_prime_power_defect(p, m), "p={p} m={m}");
        }
        for p in [2, 3, 7] {
            assert_eq!(defect(&fourier(p).unwrap()).unwrap(), 0);
        }
    }

    #[test]
    fn n6_families_have_defect_four() {
        for (a, b) in [(0.0, 0.0), (0.1, 0.03), (0.17, 0.41)] {
            assert_eq!(defect(&f6(a, b).unwrap()).unwrap(), 4, "F({a},{b})");
        }
        for a in [0.0, 0.05, -0.11] {
            assert_eq!(defect(&dita(a).unwrap()).unwrap(), 4, "D({a})");
        }
        for (x, z1) in [([0.48, 0.6, 0.64], 0.11), ([-0.36, 0.48, 0.8], 0.37)] {
            let h = karlsson(x, z1, [1, 1, 1], KarlssonBranch::Generic).unwrap();
            assert_eq!(defect(&h).unwrap(), 4);
        }
    }

    #[test]
    fn karlsson_generic_and_special_points() {
        let x = [0.48, 0.6, 0.64];
        for h in karlsson_sign_members(x, 0.23, KarlssonBranch::Generic).unwrap() {
            assert!(h.is_hadamard(1e-10));
            assert!(h.is_h2_reducible());
        }
        for x in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]] {
            assert!(matches!(
                karlsson(x, 0.1, [1, 1, 1], KarlssonBranch::Generic),
                Err(Error::DegenerateMobiusPoint(..))
            ));
        }
        for x in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
            let h = karlsson(x, 0.1, [1, -1, 1], KarlssonBranch::FreeColumns { z2: 0.37 }).unwrap();
            assert!(h.is_hadamard(1e-10));
        }
        for x in [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]] {
            let h = karlsson(x, 0.0, [1, 1, 1], KarlssonBranch::FreeRows { z3: 0.21, z4: 0.6 }).unwrap();
            assert!(h.is_hadamard(1e-10));
        }
        // The Fourier matrix sits at (0, 0, 1).
        let h = karlsson([0.0, 0.0, 1.0], 0.0, [1, 1, 1], KarlssonBranch::FreeColumns { z2: 0.0 }).unwrap();
        let cert = equivalent(&h, &f6(0.0, 0.0).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Equivalent);
        assert!(karlsson([0.6, 0.0, 0.6], 0.1, [1, 1, 1], KarlssonBranch::Generic).is_err());
        assert!(!tao_s6().unwrap().is_h2_reducible());
    }

    #[test]
    fn karlsson_blocks_sum_to_minus_f2() {
        for x in [[0.48, 0.6, 0.64], [1.0, 0.0, 0.0], [0.0, -0.6, 0.8]] {
            let a = karlsson_block(x);
            let b = karlsson_block([-x[0], -x[1], -x[2]]);
            let f2 = [[1.0, 1.0], [1.0, -1.0]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[i][j] + b[i][j] + f2[i][j]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn biunimodular_gauss_and_circulants() {
        let mut count = 0;
        for m in 1..5 {
            for k in 0..5 {
                let z = gauss_sequence(5, m, k).unwrap();
                assert!(is_biunimodular(&z, 1e-12));
                let g = autocorrelation(&z);
                for (a, ga) in g.iter().enumerate() {
                    let target = if a == 0 { 1.0 } else { 0.0 };
                    assert!((ga - target).norm() < 1e-10);
                }
                assert!(hadamard_residual(&biunimodular_circulant(&z)) < 1e-10);
                count += 1;
            }
        }
        assert_eq!(count, 20);
        assert!(gauss_sequence(6, 1, 0).is_err());
        assert!(gauss_sequence(9, 3, 0).is_err());

        let mut good = 0;
        for m in [1, 5, 7, 11] {
            for k in 0..3 {
                let z = chirp_sequence(6, m, k).unwrap();
                assert!(is_biunimodular(&z, 1e-12));
                assert!(hadamard_residual(&biunimodular_circulant(&z)) < 1e-10);
                good += 1;
            }
        }
        assert_eq!(good, 12);
        let mut z = chirp_sequence(6, 1, 0).unwrap();
        z[2] *= Complex64::from_polar(1.0, 0.3);
        assert!(!is_biunimodular(&z, 1e-6));
        assert!(hadamard_residual(&biunimodular_circulant(&z)) > 1e-3);
    }

    #[test]
    fn bicirculants() {
        let w2 = root_of_unity(3, 2);
        let row = [c(1.0), w2, c(1.0)];
        match bicirculant_validate(&row, &row) {
            BicirculantOutcome::Hadamard(h) => assert!(h.is_hadamard(1e-12)),
            BicirculantOutcome::Violation { unitarity, .. } => panic!("violation {unitarity}"),
        }
        let r1 = [phase(0.1), phase(0.33), phase(0.71)];
        let r2 = [phase(0.52), phase(0.05), phase(0.9)];
        match bicirculant_validate(&r1, &r2) {
            BicirculantOutcome::Violation { unitarity, modulus } => {
                assert!(unitarity > 1e-3);
                assert!(modulus < 1e-12);
            }
            BicirculantOutcome::Hadamard(_) => panic!("random rows should fail"),
        }
        let (a, b) = (circulant_matrix(&r1), circulant_matrix(&r2));
        assert!(max_diff(&(&a * &b), &(&b * &a)) < 1e-12);
    }

    #[test]
    fn tensor_mu_lemma_and_cross_terms() {
        // Three MU bases in dimensions 2 and 3, written as scaled unitaries.
        let a = [ident_scaled(2), fourier(2).unwrap().matrix().clone(), {
            let f = fourier(2).unwrap();
            CM::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), I])) * f.matrix()
        }];
        let b = [ident_scaled(3), standard_member(3, 0), standard_member(3, 1)];
        let t: Vec<CM> = (0..3).map(|i| float_tensor(&a[i], &b[i])).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(mu_pair(&a[i], &a[j], 1e-12).unwrap());
                assert!(mu_pair(&b[i], &b[j], 1e-12).unwrap());
                assert!(mu_pair(&t[i], &t[j], 1e-12).unwrap());
            }
        }
        let x12 = float_tensor(&a[1], &b[2]);
        let x21 = float_tensor(&a[2], &b[1]);
        assert!(mu_pair(&x12, &x21, 1e-12).unwrap());
        assert!(!mu_pair(&x12, &t[1], 1e-6).unwrap());
        assert!(!mu_pair(&x21, &t[2], 1e-6).unwrap());
    }

    #[test]
    fn unordered_pair_symmetry() {
        let h = f6(0.1, 0.04).unwrap();
        let hd = h.dagger();
        let cert = unordered_pair_equivalent(&h, &hd, DEFAULT_BUDGET).unwrap();
        assert_eq!(cert.verdict, Verdict::Equivalent);
        // Invariant multiset of H^dagger is the conjugate multiset of H.
        let mut conj: Vec<f64> = h
            .invariants()
            .iter()
            .map(|t| if *t < 1e-7 { 0.0 } else { 2.0 * PI - t })
            .collect();
        conj.sort_by(|a, b| a.total_cmp(b));
        let gap = conj.iter().zip(hd.invariants()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-7);
    }

    #[test]
    fn json_roundtrip_and_dispatch() {
        let h = family("F6", &[0.1, 0.2]).unwrap();
        let back = HMat::from_json(&h.to_json()).unwrap();
        assert!(max_diff(h.matrix(), back.matrix()) < 1e-15);
        assert_eq!(back.family(), "F6");
        assert!(family("karlsson", &[0.48, 0.6, 0.64, 0.3, -1.0]).is_ok());
        assert!(family("nope", &[]).is_err());
        assert!(family("F6", &[0.1]).is_err());
        assert!(family("standard_prime", &[9.0, 1.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn f6_family_stays_hadamard_and_invariants_survive_rephasing(a in -0.5f64..0.5, b in -0.5f64..0.5, t in 0.0f64..6.0) {
            let h = f6(a, b).unwrap();
            prop_assert!(h.is_hadamard(1e-10));
            let d = CM::from_diagonal(&nalgebra::DVector::from_fn(6, |j, _| Complex64::from_polar(1.0, t * (j as f64 + 1.0))));
            let g = HMat::new("g", vec![], &d * h.matrix() * &d).unwrap();
            let gap = h.invariants().iter().zip(g.invariants()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(gap < 1e-7);
        }
    }
}
