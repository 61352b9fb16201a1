//! Arithmetic in GF(p^m) with field elements labeled by the integers
//! 0..N-1. The p-ary digits of a label are its coefficients over GF(p), so
//! addition is digit-wise mod p and multiplication is a bilinear form given
//! by the multiplication matrices.

use crate::cnum::CycloScalar;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// A field element, stored as its integer label.
pub type GfEl = u32;

const TABLE_LIMIT: u32 = 1 << 10;
const INVERSE_LIMIT: u32 = 1 << 16;

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Returns `Some((p, m))` when `n = p^m` with `p` prime and `m >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= n && !n.is_multiple_of(p) {
        p += 1;
    }
    if !n.is_multiple_of(p) {
        p = n;
    }
    let (mut r, mut m) = (n, 0);
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    (r == 1).then_some((p, m))
}

/// The finite field GF(p^m) together with its multiplication matrices.
#[derive(Clone, Debug)]
pub struct GfSpec {
    p: u32,
    m: u32,
    n: u32,
    mu: Vec<u32>,
    /// Digit vectors of p^s for s = 0..2m-1, i.e. the columns M^(s).
    powers: Vec<Vec<u32>>,
    mult_matrices: Vec<Vec<Vec<u32>>>,
    mult_inverses: Vec<Vec<Vec<u32>>>,
    dual_gens: Vec<GfEl>,
    mul_table: Option<Vec<u32>>,
    inv_table: Option<Vec<u32>>,
}

impl PartialEq for GfSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.mu == other.mu
    }
}

impl GfSpec {
    /// Builds GF(p^m). Without an override the reference constants are used
    /// for N in {4, 8, 16, 32, 27}; otherwise the lexicographically smallest
    /// irreducible (mu_0, .., mu_{m-1}).
    pub fn new(p: u32, m: u32, mu_override: Option<&[u32]>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if m == 0 {
            return Err(Error::BadParameter("m must be at least 1".into()));
        }
        let n64 = (p as u64).checked_pow(m).filter(|&n| n <= u32::MAX as u64 / 2);
        let n = n64.ok_or_else(|| Error::BadParameter(format!("{p}^{m} is too large")))? as u32;
        let mu = match mu_override {
            Some(mu) => {
                if mu.len() != m as usize || mu.iter().any(|&c| c >= p) {
                    return Err(Error::BadParameter(format!(
                        "mu must have {m} entries in 0..{p}"
                    )));
                }
                if !is_irreducible(p, mu) {
                    return Err(Error::ReduciblePolynomial(mu.to_vec(), p));
                }
                mu.to_vec()
            }
            None => default_mu(p, m),
        };
        let mut spec = GfSpec {
            p,
            m,
            n,
            mu,
            powers: Vec::new(),
            mult_matrices: Vec::new(),
            mult_inverses: Vec::new(),
            dual_gens: vec![1],
            mul_table: None,
            inv_table: None,
        };
        if m > 1 {
            spec.build_matrices()?;
        }
        if n <= TABLE_LIMIT {
            let mut t = vec![0; (n * n) as usize];
            for a in 0..n {
                for b in 0..n {
                    t[(a * n + b) as usize] = spec.mul_digits(a, b);
                }
            }
            spec.mul_table = Some(t);
        }
        if n <= INVERSE_LIMIT {
            let inv = (0..n)
                .map(|a| if a == 0 { 0 } else { spec.pow(a, (n - 2) as u64) })
                .collect();
            spec.inv_table = Some(inv);
        }
        Ok(spec)
    }

    /// Builds the field of order `n`, which must be a prime power.
    pub fn of_order(n: u32) -> Result<Self> {
        let (p, m) = prime_power(n as u64)
            .ok_or_else(|| Error::BadParameter(format!("{n} is not a prime power")))?;
        Self::new(p as u32, m, None)
    }

    fn build_matrices(&mut self) -> Result<()> {
        let (p, m) = (self.p, self.m as usize);
        let mut powers = vec![vec![0u32; m]; 2 * m - 1];
        powers[0][0] = 1;
        for s in 1..2 * m - 1 {
            let prev = powers[s - 1].clone();
            for r in 0..m {
                let shifted = if r == 0 { 0 } else { prev[r - 1] };
                powers[s][r] = (shifted + self.mu[r] * prev[m - 1]) % p;
            }
        }
        let mats: Vec<Vec<Vec<u32>>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|j| (0..m).map(|k| powers[j + k][r]).collect())
                    .collect()
            })
            .collect();
        let invs = mats
            .iter()
            .map(|mat| invert_mod_p(mat, p))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::ReduciblePolynomial(self.mu.clone(), p))?;
        // Dual generators are the rows of the inverse of the 0th matrix.
        let p_pows: Vec<u32> = (0..m as u32).map(|l| p.pow(l)).collect();
        self.dual_gens = invs[0]
            .iter()
            .map(|row| row.iter().zip(&p_pows).map(|(d, w)| d * w).sum())
            .collect();
        self.powers = powers;
        self.mult_matrices = mats;
        self.mult_inverses = invs;
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    /// Field order N = p^m.
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn mu(&self) -> &[u32] {
        &self.mu
    }
    /// The symmetric matrices M_r with (M_r)_{jk} = r-th digit of p^j * p^k.
    /// Empty for m = 1.
    pub fn mult_matrices(&self) -> &[Vec<Vec<u32>>] {
        &self.mult_matrices
    }
    pub fn mult_matrix_inverses(&self) -> &[Vec<Vec<u32>>] {
        &self.mult_inverses
    }
    /// Elements g_n with first digit of p^j * g_n equal to delta_{jn}.
    pub fn dual_gens(&self) -> &[GfEl] {
        &self.dual_gens
    }

    /// p-ary digits (i_0, .., i_{m-1}) of a label.
    pub fn digits(&self, a: GfEl) -> Vec<u32> {
        let mut d = Vec::with_capacity(self.m as usize);
        let mut r = a;
        for _ in 0..self.m {
            d.push(r % self.p);
            r /= self.p;
        }
        d
    }

    pub fn from_digits(&self, d: &[u32]) -> GfEl {
        d.iter().rev().fold(0, |acc, &x| acc * self.p + x % self.p)
    }

    pub fn add(&self, a: GfEl, b: GfEl) -> GfEl {
        if self.m == 1 {
            return (a + b) % self.p;
        }
        let (p, mut a, mut b) = (self.p, a, b);
        let (mut out, mut w) = (0, 1);
        for _ in 0..self.m {
            out += ((a % p + b % p) % p) * w;
            a /= p;
            b /= p;
            w *= p;
        }
        out
    }

    pub fn neg(&self, a: GfEl) -> GfEl {
        if self.m == 1 {
            return (self.p - a % self.p) % self.p;
        }
        let (p, mut a) = (self.p, a);
        let (mut out, mut w) = (0, 1);
        for _ in 0..self.m {
            out += ((p - a % p) % p) * w;
            a /= p;
            w *= p;
        }
        out
    }

    pub fn sub(&self, a: GfEl, b: GfEl) -> GfEl {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: GfEl, b: GfEl) -> GfEl {
        match &self.mul_table {
            Some(t) => t[(a * self.n + b) as usize],
            None => self.mul_digits(a, b),
        }
    }

    fn mul_digits(&self, a: GfEl, b: GfEl) -> GfEl {
        let p = self.p;
        if self.m == 1 {
            return (a * b) % p;
        }
        let m = self.m as usize;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut conv = vec![0u64; 2 * m - 1];
        for j in 0..m {
            if da[j] == 0 {
                continue;
            }
            for k in 0..m {
                conv[j + k] += (da[j] * db[k]) as u64;
            }
        }
        let mut out = vec![0u64; m];
        for (s, c) in conv.iter().enumerate() {
            let c = c % p as u64;
            if c == 0 {
                continue;
            }
            for r in 0..m {
                out[r] += c * self.powers[s][r] as u64;
            }
        }
        let d: Vec<u32> = out.iter().map(|x| (x % p as u64) as u32).collect();
        self.from_digits(&d)
    }

    /// Product evaluated literally as the bilinear forms a M_r b^T mod p.
    pub fn mul_bilinear(&self, a: GfEl, b: GfEl) -> GfEl {
        if self.m == 1 {
            return (a * b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let d: Vec<u32> = self
            .mult_matrices
            .iter()
            .map(|mat| {
                let mut s = 0u64;
                for (j, row) in mat.iter().enumerate() {
                    for (k, &x) in row.iter().enumerate() {
                        s += (da[j] * x * db[k]) as u64;
                    }
                }
                (s % self.p as u64) as u32
            })
            .collect();
        self.from_digits(&d)
    }

    pub fn pow(&self, a: GfEl, mut e: u64) -> GfEl {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: GfEl) -> Result<GfEl> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(match &self.inv_table {
            Some(t) => t[a as usize],
            None => self.pow(a, (self.n - 2) as u64),
        })
    }

    pub fn div(&self, a: GfEl, b: GfEl) -> Result<GfEl> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Exponent of gamma = exp(2 pi i / p) that gamma^g reduces to: the
    /// first digit of g.
    pub fn char_exp(&self, g: GfEl) -> u32 {
        g % self.p
    }

    /// Elementwise arithmetic dispatch used by the command-line front end.
    pub fn arith(&self, op: &str, a: GfEl, b: Option<GfEl>) -> Result<GfEl> {
        if a >= self.n || b.is_some_and(|b| b >= self.n) {
            return Err(Error::BadParameter(format!("operands must be < {}", self.n)));
        }
        let need = || b.ok_or_else(|| Error::BadParameter(format!("{op} needs two operands")));
        match op {
            "add" => Ok(self.add(a, need()?)),
            "sub" => Ok(self.sub(a, need()?)),
            "mul" => Ok(self.mul(a, need()?)),
            "div" => self.div(a, need()?),
            "neg" => Ok(self.neg(a)),
            "inv" => self.inv(a),
            _ => Err(Error::BadParameter(format!("unknown operation {op}"))),
        }
    }

    /// `{p, m, mu, multMatrices}`.
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "m": self.m,
            "mu": self.mu,
            "multMatrices": self.mult_matrices,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse(format!("missing integer field {k}")))
        };
        let (p, m) = (get("p")? as u32, get("m")? as u32);
        let mu: Vec<u32> = v
            .get("mu")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing mu".into()))?
            .iter()
            .map(|x| x.as_u64().map(|x| x as u32))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Parse("mu entries must be integers".into()))?;
        let spec = Self::new(p, m, Some(&mu))?;
        if let Some(mats) = v.get("multMatrices") {
            if mats != &json!(spec.mult_matrices) {
                return Err(Error::Parse("multMatrices inconsistent with mu".into()));
            }
        }
        Ok(spec)
    }
}

/// Reference constants where available, else the smallest irreducible choice.
pub fn default_mu(p: u32, m: u32) -> Vec<u32> {
    let reference: Option<Vec<u32>> = match (p, m) {
        (2, 2) => Some(vec![1, 1]),
        (2, 3) => Some(vec![1, 0, 1]),
        (2, 4) => Some(vec![1, 1, 0, 0]),
        (2, 5) => Some(vec![1, 0, 1, 0, 0]),
        (3, 3) => Some(vec![1, 2, 2]),
        _ => None,
    };
    if let Some(mu) = reference {
        return mu;
    }
    if m == 1 {
        return vec![0];
    }
    let total = (p as u64).pow(m);
    for code in 0..total {
        // Lexicographic in (mu_0, .., mu_{m-1}): mu_0 is the most significant.
        let mut mu = vec![0u32; m as usize];
        let mut r = code;
        for slot in mu.iter_mut().rev() {
            *slot = (r % p as u64) as u32;
            r /= p as u64;
        }
        if is_irreducible(p, &mu) {
            return mu;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

/// Whether x^m - sum mu_l x^l is irreducible over GF(p), by trial division
/// with every monic polynomial of degree 1..=m/2.
pub fn is_irreducible(p: u32, mu: &[u32]) -> bool {
    let m = mu.len();
    if m == 1 {
        return true;
    }
    // Coefficients low to high, monic.
    let mut f: Vec<u32> = mu.iter().map(|&c| (p - c % p) % p).collect();
    f.push(1);
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut r = code;
            for _ in 0..d {
                g.push((r % p as u64) as u32);
                r /= p as u64;
            }
            g.push(1);
            if poly_rem_is_zero(&f, &g, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(f: &[u32], g: &[u32], p: u32) -> bool {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &gc) in g.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * gc) % p) % p;
            }
        }
        r.pop();
    }
    r.iter().all(|&c| c == 0)
}

/// Gauss-Jordan inversion over GF(p); `None` when singular.
pub fn invert_mod_p(a: &[Vec<u32>], p: u32) -> Option<Vec<Vec<u32>>> {
    let n = a.len();
    let mut aug: Vec<Vec<u32>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u32> = row.iter().map(|x| x % p).collect();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    let inv_scalar = |x: u32| -> u32 {
        (1..p).find(|&y| (x * y) % p == 1).expect("nonzero element has inverse")
    };
    for col in 0..n {
        let piv = (col..n).find(|&r| aug[r][col] != 0)?;
        aug.swap(col, piv);
        let s = inv_scalar(aug[col][col]);
        for x in aug[col].iter_mut() {
            *x = (*x * s) % p;
        }
        for r in 0..n {
            if r != col && aug[r][col] != 0 {
                let f = aug[r][col];
                for c in 0..2 * n {
                    aug[r][c] = (aug[r][c] + p * p - f * aug[col][c]) % p;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Finite commutative ring with an additive character, used to validate
/// field axioms on either a genuine field or an impostor.
pub trait FiniteArith {
    fn order(&self) -> u32;
    fn add(&self, a: u32, b: u32) -> u32;
    fn mul(&self, a: u32, b: u32) -> u32;
    /// Order L of the root of unity gamma used by the character.
    fn char_order(&self) -> u64;
    /// Exponent e with character value gamma_L^e.
    fn char_exp(&self, g: u32) -> u64;
}

impl FiniteArith for GfSpec {
    fn order(&self) -> u32 {
        self.n
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        GfSpec::add(self, a, b)
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        GfSpec::mul(self, a, b)
    }
    fn char_order(&self) -> u64 {
        self.p as u64
    }
    fn char_exp(&self, g: u32) -> u64 {
        GfSpec::char_exp(self, g) as u64
    }
}

/// Integers modulo n with character gamma_n^g.
#[derive(Clone, Copy, Debug)]
pub struct ModRing {
    pub n: u32,
}

impl FiniteArith for ModRing {
    fn order(&self) -> u32 {
        self.n
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.n
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        (a * b) % self.n
    }
    fn char_order(&self) -> u64 {
        self.n as u64
    }
    fn char_exp(&self, g: u32) -> u64 {
        g as u64
    }
}

/// Outcome of [`verify_axioms`].
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub order: u32,
    /// Whether associativity/distributivity were checked on every triple.
    pub exhaustive: bool,
    pub triples_checked: u64,
    pub character_identity: bool,
}

/// Checks commutativity, associativity, distributivity, unique inverses and
/// the character identity sum_j gamma^{j*i} = N delta_{i,0}.
///
/// Triples are exhaustive for N <= 256 and otherwise a seeded sample of
/// 2^20 triples.
pub fn verify_axioms<F: FiniteArith + ?Sized>(f: &F) -> Result<AxiomReport> {
    let n = f.order();
    if n as u64 > INVERSE_LIMIT as u64 {
        return Err(Error::BadParameter(format!("order {n} exceeds 2^16")));
    }
    fn fail<T>(what: &str, t: &[u32]) -> Result<T> {
        Err(Error::AxiomViolation(format!("{what} at {t:?}")))
    }
    for a in 0..n {
        for b in 0..n {
            if f.add(a, b) != f.add(b, a) {
                return fail("additive commutativity", &[a, b]);
            }
            if f.mul(a, b) != f.mul(b, a) {
                return fail("multiplicative commutativity", &[a, b]);
            }
        }
        if f.add(a, 0) != a || f.mul(a, 1 % n) != a {
            return fail("identity", &[a]);
        }
        if (0..n).filter(|&b| f.add(a, b) == 0).count() != 1 {
            return fail("unique additive inverse", &[a]);
        }
        if a != 0 && (0..n).filter(|&b| f.mul(a, b) == 1).count() != 1 {
            return fail("unique multiplicative inverse", &[a]);
        }
    }
    let check = |a: u32, b: u32, c: u32| -> Result<()> {
        if f.add(f.add(a, b), c) != f.add(a, f.add(b, c)) {
            return fail("additive associativity", &[a, b, c]);
        }
        if f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c)) {
            return fail("multiplicative associativity", &[a, b, c]);
        }
        if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
            return fail("distributivity", &[a, b, c]);
        }
        Ok(())
    };
    let exhaustive = n <= 256;
    let mut triples = 0u64;
    if exhaustive {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    check(a, b, c)?;
                }
            }
        }
        triples = (n as u64).pow(3);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6f_61_78);
        for _ in 0..(1u64 << 20) {
            check(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))?;
            triples += 1;
        }
    }
    let l = f.char_order();
    for i in 0..n {
        let mut counts = vec![0i64; l as usize];
        for j in 0..n {
            counts[(f.char_exp(f.mul(j, i)) % l) as usize] += 1;
        }
        let s = CycloScalar::from_counts(l, &counts);
        let expected = CycloScalar::from_int(if i == 0 { n as i64 } else { 0 });
        if s != expected {
            return fail("character identity", &[i]);
        }
    }
    Ok(AxiomReport { order: n, exhaustive, triples_checked: triples, character_identity: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_tables() {
        let f = GfSpec::new(2, 2, None).unwrap();
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.add(2, 3), 1);
        assert_eq!((0..4).map(|b| f.mul(2, b)).collect::<Vec<_>>(), vec![0, 2, 3, 1]);
        assert_eq!((0..4).map(|b| f.mul(3, b)).collect::<Vec<_>>(), vec![0, 3, 1, 2]);
    }

    #[test]
    fn reference_products() {
        assert_eq!(GfSpec::new(2, 3, None).unwrap().mul(2, 4), 5);
        assert_eq!(GfSpec::new(2, 4, None).unwrap().mul(2, 8), 3);
        assert_eq!(GfSpec::new(2, 5, None).unwrap().mul(2, 16), 5);
        let f = GfSpec::new(3, 3, None).unwrap();
        assert_eq!(f.mul(3, 9), 25);
        assert_eq!(f.mul(9, 9), 8);
        assert_eq!(f.inv(3).unwrap(), 13);
        assert_eq!(f.inv(9).unwrap(), 17);
    }

    #[test]
    fn gf27_matrices_and_duals() {
        let f = GfSpec::new(3, 3, Some(&[1, 2, 2])).unwrap();
        let m = f.mult_matrices();
        assert_eq!(m[0], vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 2]]);
        assert_eq!(m[1], vec![vec![0, 1, 0], vec![1, 0, 2], vec![0, 2, 2]]);
        assert_eq!(m[2], vec![vec![0, 0, 1], vec![0, 1, 2], vec![1, 2, 0]]);
        let inv = f.mult_matrix_inverses();
        assert_eq!(inv[0], vec![vec![1, 0, 0], vec![0, 1, 1], vec![0, 1, 0]]);
        assert_eq!(inv[1], vec![vec![2, 1, 2], vec![1, 0, 0], vec![2, 0, 2]]);
        assert_eq!(inv[2], vec![vec![1, 1, 1], vec![1, 1, 0], vec![1, 0, 0]]);
        assert_eq!(f.dual_gens(), &[1, 12, 3]);
        for (n, &g) in f.dual_gens().iter().enumerate() {
            for j in 0..3 {
                assert_eq!(f.char_exp(f.mul(3u32.pow(j), g)), u32::from(j as usize == n));
            }
        }
    }

    #[test]
    fn permissible_mu_for_27() {
        let ok: Vec<u32> = (0..27)
            .filter(|&code| {
                let mu = [code % 3, (code / 3) % 3, code / 9];
                is_irreducible(3, &mu)
            })
            .collect();
        assert_eq!(ok, vec![4, 5, 11, 13, 17, 19, 23, 25]);
    }

    #[test]
    fn errors() {
        assert_eq!(GfSpec::new(4, 1, None).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            GfSpec::new(2, 2, Some(&[0, 1])),
            Err(Error::ReduciblePolynomial(..))
        ));
        let f = GfSpec::new(5, 1, None).unwrap();
        assert_eq!(f.inv(0), Err(Error::DivisionByZero));
        assert_eq!(f.arith("div", 3, Some(0)), Err(Error::DivisionByZero));
    }

    #[test]
    fn axioms() {
        for (p, m) in [(2, 1), (2, 2), (3, 2), (2, 3), (3, 3)] {
            let r = verify_axioms(&GfSpec::new(p, m, None).unwrap()).unwrap();
            assert!(r.exhaustive && r.character_identity);
        }
        let err = verify_axioms(&ModRing { n: 4 }).unwrap_err();
        assert!(matches!(err, Error::AxiomViolation(_)), "{err}");
        assert!(verify_axioms(&ModRing { n: 5 }).is_ok());
    }

    #[test]
    fn bilinear_route_matches() {
        for (p, m) in [(2, 4), (3, 3), (5, 2), (7, 2)] {
            let f = GfSpec::new(p, m, None).unwrap();
            for a in 0..f.n() {
                for b in 0..f.n() {
                    assert_eq!(f.mul(a, b), f.mul_bilinear(a, b));
                }
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let f = GfSpec::new(3, 3, None).unwrap();
        let v = f.to_json();
        assert_eq!(v["mu"], json!([1, 2, 2]));
        assert_eq!(GfSpec::from_json(&v).unwrap(), f);
    }
}
