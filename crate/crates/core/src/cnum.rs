//! Exact cyclotomic scalars of prime-power order, matrices over them with a
//! symbolic `rat * sqrt(base)` scale, and a float fallback.
//!
//! Matrices are stored row-major. The tensor product puts the first factor
//! on the least significant index: `tensor(A, B)[a + b*rows(A)]`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fmt;

/// Default absolute tolerance for float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

fn smallest_prime_factor(n: u64) -> u64 {
    if n <= 1 {
        return 1;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 1;
    }
    n
}

/// Checks `l` is 1 or a prime power and returns its prime (1 for l = 1).
fn order_prime(l: u64) -> Result<u64> {
    let q = smallest_prime_factor(l);
    let mut r = l;
    while q > 1 && r.is_multiple_of(q) {
        r /= q;
    }
    if r != 1 {
        return Err(Error::BadParameter(format!("cyclotomic order {l} is not a prime power")));
    }
    Ok(q)
}

/// Degree of the canonical representation, L - L/q.
fn degree(l: u64) -> usize {
    if l == 1 {
        1
    } else {
        (l - l / smallest_prime_factor(l)) as usize
    }
}

/// Reduces a full-length coefficient vector (length L) to canonical form.
fn reduce_full(l: u64, mut v: Vec<Rational64>) -> Vec<Rational64> {
    let d = degree(l);
    if l > 1 {
        let q = smallest_prime_factor(l) as usize;
        let step = l as usize / q;
        for k in (d..l as usize).rev() {
            let c = v[k];
            if c.is_zero() {
                continue;
            }
            v[k] = Rational64::zero();
            for j in 1..q {
                v[k - j * step] -= c;
            }
        }
    }
    v.truncate(d);
    v
}

/// An element of Q(gamma_L), gamma_L = exp(2 pi i / L), with L a prime power
/// (or 1 for the rationals), stored in canonical reduced form.
#[derive(Clone, Debug)]
pub struct CycloScalar {
    order: u64,
    coeffs: Vec<Rational64>,
}

impl CycloScalar {
    pub fn zero() -> Self {
        Self::from_rational(Rational64::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational64::from_integer(n))
    }

    pub fn from_rational(r: Rational64) -> Self {
        CycloScalar { order: 1, coeffs: vec![r] }
    }

    /// gamma_L^k. Panics when `l` is not a prime power.
    pub fn root(l: u64, k: i64) -> Self {
        let mut counts = vec![0i64; l as usize];
        counts[k.rem_euclid(l as i64) as usize] = 1;
        Self::from_counts(l, &counts)
    }

    /// sum_k counts[k] gamma_L^k for k in 0..L. Panics when `l` is not a
    /// prime power.
    pub fn from_counts(l: u64, counts: &[i64]) -> Self {
        let v = counts.iter().map(|&c| Rational64::from_integer(c)).collect();
        Self::from_coeffs(l, v).expect("prime-power order")
    }

    /// sum_k coeffs[k] gamma_L^k with `coeffs.len() <= L`.
    pub fn from_coeffs(l: u64, mut coeffs: Vec<Rational64>) -> Result<Self> {
        order_prime(l)?;
        if coeffs.len() > l as usize {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for order {l}",
                coeffs.len()
            )));
        }
        coeffs.resize(l as usize, Rational64::zero());
        Ok(CycloScalar { order: l, coeffs: reduce_full(l, coeffs) })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Canonical coefficients of gamma_L^0 .. gamma_L^{L-L/q-1}.
    pub fn coeffs(&self) -> &[Rational64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `Some(r)` when the value is the rational r.
    pub fn as_rational(&self) -> Option<Rational64> {
        self.coeffs[1..].iter().all(Zero::is_zero).then_some(self.coeffs[0])
    }

    /// Re-expresses the value in Q(gamma_L) for an order L that this order
    /// divides.
    pub fn embed(&self, l: u64) -> Result<Self> {
        if l == self.order {
            return Ok(self.clone());
        }
        if !l.is_multiple_of(self.order) || order_prime(l)? != order_prime(self.order)? && self.order != 1 {
            return Err(Error::OrderMismatch(self.order, l));
        }
        let f = (l / self.order) as usize;
        let mut coeffs = vec![Rational64::zero(); degree(l)];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * f] = *c;
        }
        Ok(CycloScalar { order: l, coeffs })
    }

    /// Smallest order into which both orders embed.
    pub fn common_order(a: u64, b: u64) -> Result<u64> {
        if a == 1 || b == 1 || order_prime(a)? == order_prime(b)? {
            Ok(a.max(b))
        } else {
            Err(Error::OrderMismatch(a, b))
        }
    }

    fn lift(&self, other: &Self) -> Result<(Self, Self)> {
        let l = Self::common_order(self.order, other.order)?;
        Ok((self.embed(l)?, other.embed(l)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.lift(other)?;
        Ok(a.add_same(&b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.lift(other)?;
        Ok(a.mul_same(&b))
    }

    pub fn neg(&self) -> Self {
        CycloScalar { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale_rational(&self, r: Rational64) -> Self {
        CycloScalar { order: self.order, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn conj(&self) -> Self {
        let l = self.order as usize;
        if l == 1 {
            return self.clone();
        }
        let mut full = vec![Rational64::zero(); l];
        for (k, c) in self.coeffs.iter().enumerate() {
            full[(l - k) % l] += c;
        }
        CycloScalar { order: self.order, coeffs: reduce_full(self.order, full) }
    }

    pub(crate) fn add_same(&self, other: &Self) -> Self {
        debug_assert_eq!(self.order, other.order);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        CycloScalar { order: self.order, coeffs }
    }

    pub(crate) fn mul_same(&self, other: &Self) -> Self {
        debug_assert_eq!(self.order, other.order);
        let l = self.order as usize;
        if l == 1 {
            return CycloScalar { order: 1, coeffs: vec![self.coeffs[0] * other.coeffs[0]] };
        }
        let mut full = vec![Rational64::zero(); l];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % l] += a * b;
                }
            }
        }
        CycloScalar { order: self.order, coeffs: reduce_full(self.order, full) }
    }

    /// Applies the canonical reduction again; a no-op on valid values.
    pub fn reduce(&self) -> Self {
        let mut full = self.coeffs.clone();
        full.resize(self.order as usize, Rational64::zero());
        CycloScalar { order: self.order, coeffs: reduce_full(self.order, full) }
    }

    pub fn to_complex(&self) -> Complex64 {
        let l = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| Complex64::from_polar(rat_f64(c), 2.0 * PI * k as f64 / l))
            .sum()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(rat_json).collect())
    }
}

impl PartialEq for CycloScalar {
    fn eq(&self, other: &Self) -> bool {
        match self.lift(other) {
            Ok((a, b)) => a.coeffs == b.coeffs,
            // Q(gamma_{q^a}) and Q(gamma_{r^b}) meet only in Q.
            Err(_) => match (self.as_rational(), other.as_rational()) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
        }
    }
}

impl fmt::Display for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| if k == 0 { format!("{c}") } else { format!("({c})g{}^{k}", self.order) })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

pub(crate) fn rat_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn rat_json(r: &Rational64) -> Value {
    if r.is_integer() {
        json!(r.to_integer())
    } else {
        json!(format!("{}/{}", r.numer(), r.denom()))
    }
}

fn parse_rat(v: &Value) -> Result<Rational64> {
    if let Some(i) = v.as_i64() {
        return Ok(Rational64::from_integer(i));
    }
    let s = v.as_str().ok_or_else(|| Error::Parse(format!("bad rational {v}")))?;
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Positive-or-signed real factor `rat * sqrt(base)` with `base` squarefree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    pub rat: Rational64,
    pub base: u64,
}

impl Scale {
    pub fn new(rat: Rational64, base: u64) -> Self {
        assert!(base >= 1, "scale base must be positive");
        let (mut rat, mut base) = (rat, base);
        let mut d = 2u64;
        while d * d <= base {
            while base % (d * d) == 0 {
                base /= d * d;
                rat *= Rational64::from_integer(d as i64);
            }
            d += 1;
        }
        Scale { rat, base }
    }

    pub fn one() -> Self {
        Scale { rat: Rational64::one(), base: 1 }
    }

    pub fn rational(r: Rational64) -> Self {
        Scale { rat: r, base: 1 }
    }

    /// sqrt(n).
    pub fn sqrt(n: u64) -> Self {
        Self::new(Rational64::one(), n)
    }

    /// 1/sqrt(n) = sqrt(n)/n.
    pub fn inv_sqrt(n: u64) -> Self {
        Self::new(Rational64::new(1, n as i64), n)
    }

    /// 0 when the scale is rational, 1 when it carries a square root.
    pub fn pow(&self) -> u32 {
        u32::from(self.base != 1)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let g = self.base.gcd(&other.base);
        let rat = self.rat * other.rat * Rational64::from_integer(g as i64);
        Scale::new(rat, (self.base / g) * (other.base / g))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.rat.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Scale::new(self.rat.recip() / Rational64::from_integer(self.base as i64), self.base))
    }

    /// The rational square of the scale.
    pub fn square(&self) -> Rational64 {
        self.rat * self.rat * Rational64::from_integer(self.base as i64)
    }

    pub fn to_f64(&self) -> f64 {
        rat_f64(&self.rat) * (self.base as f64).sqrt()
    }
}

/// Scalar result of an exact or float computation.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact { value: CycloScalar, scale: Scale },
    Float(Complex64),
}

impl Scalar {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact { value, scale } => value.to_complex() * scale.to_f64(),
            Scalar::Float(z) => *z,
        }
    }

    /// `Some(r)` when exact and equal to the rational `r`.
    pub fn as_rational(&self) -> Option<Rational64> {
        match self {
            Scalar::Exact { value, scale } if scale.base == 1 => {
                value.as_rational().map(|r| r * scale.rat)
            }
            Scalar::Exact { value, .. } if value.is_zero() => Some(Rational64::zero()),
            _ => None,
        }
    }
}

/// Dense matrix over Q(gamma_L) times a scalar `Scale`.
#[derive(Clone, Debug)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    order: u64,
    entries: Vec<CycloScalar>,
    scale: Scale,
}

impl ExactMatrix {
    /// Builds a matrix from row-major entries, embedding them all into
    /// order `l`.
    pub fn new(rows: usize, cols: usize, l: u64, entries: Vec<CycloScalar>, scale: Scale) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        order_prime(l)?;
        let entries = entries.iter().map(|e| e.embed(l)).collect::<Result<_>>()?;
        Ok(ExactMatrix { rows, cols, order: l, entries, scale })
    }

    /// Matrix whose (r, c) entry is gamma_L^{f(r, c)}, or 0 where `f` gives
    /// `None`.
    pub fn from_exponents(
        rows: usize,
        cols: usize,
        l: u64,
        scale: Scale,
        f: impl Fn(usize, usize) -> Option<i64>,
    ) -> Self {
        let zero = CycloScalar::zero().embed(l).expect("prime-power order");
        let roots: Vec<CycloScalar> = (0..l as i64).map(|k| CycloScalar::root(l, k)).collect();
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(match f(r, c) {
                    Some(e) => roots[e.rem_euclid(l as i64) as usize].clone(),
                    None => zero.clone(),
                });
            }
        }
        ExactMatrix { rows, cols, order: l, entries, scale }
    }

    /// Integer matrix.
    pub fn from_ints(rows: usize, cols: usize, vals: &[i64]) -> Result<Self> {
        let entries = vals.iter().map(|&v| CycloScalar::from_int(v)).collect();
        Self::new(rows, cols, 1, entries, Scale::one())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_exponents(n, n, 1, Scale::one(), |r, c| (r == c).then_some(0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn scale(&self) -> Scale {
        self.scale
    }
    /// Unscaled entry (r, c).
    pub fn entry(&self, r: usize, c: usize) -> &CycloScalar {
        &self.entries[r * self.cols + c]
    }
    /// Entry (r, c) including the scale.
    pub fn get(&self, r: usize, c: usize) -> Scalar {
        Scalar::Exact { value: self.entry(r, c).clone(), scale: self.scale }
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    /// Multiplies the scale by `s`.
    pub fn scaled(mut self, s: Scale) -> Self {
        self.scale = self.scale.mul(&s);
        self
    }

    pub fn embed(&self, l: u64) -> Result<Self> {
        if l == self.order {
            return Ok(self.clone());
        }
        let entries = self.entries.iter().map(|e| e.embed(l)).collect::<Result<_>>()?;
        Ok(ExactMatrix { entries, order: l, ..*self })
    }

    fn lift(&self, other: &Self) -> Result<(Self, Self)> {
        let l = CycloScalar::common_order(self.order, other.order)?;
        Ok((self.embed(l)?, other.embed(l)?))
    }

    /// Rewrites `other` on this matrix's scale when the two share a radical.
    fn rescale_to(&self, other: &Self) -> Option<Vec<CycloScalar>> {
        if self.scale == other.scale {
            return Some(other.entries.clone());
        }
        if self.scale.base != other.scale.base || self.scale.rat.is_zero() {
            return None;
        }
        let f = other.scale.rat / self.scale.rat;
        Some(other.entries.iter().map(|e| e.scale_rational(f)).collect())
    }

    /// `None` when the scales involve different radicals.
    pub fn add(&self, other: &Self) -> Result<Option<Self>> {
        self.check_same_shape(other)?;
        let (a, b) = self.lift(other)?;
        let (a, b) = if a.scale.rat.is_zero() { (b, a) } else { (a, b) };
        Ok(a.rescale_to(&b).map(|be| {
            let entries = a.entries.iter().zip(&be).map(|(x, y)| x.add_same(y)).collect();
            ExactMatrix { entries, ..a }
        }))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (a, b) = self.lift(other)?;
        let zero = CycloScalar::zero().embed(a.order)?;
        let mut entries = Vec::with_capacity(a.rows * b.cols);
        for r in 0..a.rows {
            for c in 0..b.cols {
                let mut acc = zero.clone();
                for k in 0..a.cols {
                    let x = a.entry(r, k);
                    let y = b.entry(k, c);
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    acc = acc.add_same(&x.mul_same(y));
                }
                entries.push(acc);
            }
        }
        Ok(ExactMatrix { rows: a.rows, cols: b.cols, order: a.order, entries, scale: a.scale.mul(&b.scale) })
    }

    pub fn scalar_mul(&self, s: &CycloScalar) -> Result<Self> {
        let l = CycloScalar::common_order(self.order, s.order())?;
        let a = self.embed(l)?;
        let s = s.embed(l)?;
        let entries = a.entries.iter().map(|e| e.mul_same(&s)).collect();
        Ok(ExactMatrix { entries, ..a })
    }

    pub fn dagger(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.entry(r, c).conj());
            }
        }
        ExactMatrix { rows: self.cols, cols: self.rows, entries, ..*self }
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.entry(r, c).clone());
            }
        }
        ExactMatrix { rows: self.cols, cols: self.rows, entries, ..*self }
    }

    pub fn trace(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        let mut acc = CycloScalar::zero().embed(self.order)?;
        for i in 0..self.rows {
            acc = acc.add_same(self.entry(i, i));
        }
        Ok(Scalar::Exact { value: acc, scale: self.scale })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.lift(other)?;
        let (rows, cols) = (a.rows * b.rows, a.cols * b.cols);
        let zero = CycloScalar::zero().embed(a.order)?;
        let mut entries = vec![zero; rows * cols];
        for rb in 0..b.rows {
            for cb in 0..b.cols {
                let y = b.entry(rb, cb);
                if y.is_zero() {
                    continue;
                }
                for ra in 0..a.rows {
                    for ca in 0..a.cols {
                        let (r, c) = (ra + rb * a.rows, ca + cb * a.cols);
                        entries[r * cols + c] = a.entry(ra, ca).mul_same(y);
                    }
                }
            }
        }
        Ok(ExactMatrix { rows, cols, order: a.order, entries, scale: a.scale.mul(&b.scale) })
    }

    pub fn to_float(&self) -> DMatrix<Complex64> {
        let s = self.scale.to_f64();
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.entry(r, c).to_complex() * s)
    }

    /// Exact equality; `None` when the scales involve different radicals.
    pub fn exact_eq(&self, other: &Self) -> Option<bool> {
        if self.rows != other.rows || self.cols != other.cols {
            return Some(false);
        }
        let (a, b) = self.lift(other).ok()?;
        if a.scale.rat.is_zero() || b.scale.rat.is_zero() {
            let z = |m: &Self| m.scale.rat.is_zero() || m.entries.iter().all(CycloScalar::is_zero);
            return Some(z(&a) == z(&b));
        }
        let be = a.rescale_to(&b)?;
        Some(a.entries.iter().zip(&be).all(|(x, y)| x == y))
    }
}

/// A dense complex matrix, exact or float.
#[derive(Clone, Debug)]
pub enum CMatrix {
    Exact(ExactMatrix),
    Float(DMatrix<Complex64>),
}

impl From<ExactMatrix> for CMatrix {
    fn from(m: ExactMatrix) -> Self {
        CMatrix::Exact(m)
    }
}

impl From<DMatrix<Complex64>> for CMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        CMatrix::Float(m)
    }
}

/// Property checked by [`CMatrix::check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// M^dagger M = 1.
    Unitary,
    /// M^dagger M = lambda 1 for some lambda > 0; deviation is relative.
    ScaledUnitary,
    Hermitian,
    UnimodularEntries,
}

impl CMatrix {
    pub fn rows(&self) -> usize {
        match self {
            CMatrix::Exact(m) => m.rows,
            CMatrix::Float(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            CMatrix::Exact(m) => m.cols,
            CMatrix::Float(m) => m.ncols(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CMatrix::Exact(_))
    }

    pub fn to_float(&self) -> DMatrix<Complex64> {
        match self {
            CMatrix::Exact(m) => m.to_float(),
            CMatrix::Float(m) => m.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactMatrix> {
        match self {
            CMatrix::Exact(m) => Some(m),
            CMatrix::Float(_) => None,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        match self {
            CMatrix::Exact(m) => m.entry(r, c).to_complex() * m.scale.to_f64(),
            CMatrix::Float(m) => m[(r, c)],
        }
    }

    fn float_pair(&self, other: &Self, what: &str) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let (a, b) = (self.to_float(), other.to_float());
        let ok = match what {
            "mul" => a.ncols() == b.nrows(),
            _ => a.shape() == b.shape(),
        };
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {:?} vs {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok((a, b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if let (CMatrix::Exact(a), CMatrix::Exact(b)) = (self, other) {
            match a.add(b) {
                Ok(Some(m)) => return Ok(m.into()),
                Ok(None) | Err(Error::OrderMismatch(..)) => {}
                Err(e) => return Err(e),
            }
        }
        let (a, b) = self.float_pair(other, "add")?;
        Ok((a + b).into())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if let (CMatrix::Exact(a), CMatrix::Exact(b)) = (self, other) {
            match a.mul(b) {
                Ok(m) => return Ok(m.into()),
                Err(Error::OrderMismatch(..)) => {}
                Err(e) => return Err(e),
            }
        }
        let (a, b) = self.float_pair(other, "mul")?;
        Ok((a * b).into())
    }

    pub fn scalar_mul(&self, s: &Scalar) -> Result<Self> {
        if let (CMatrix::Exact(a), Scalar::Exact { value, scale }) = (self, s) {
            if let Ok(m) = a.scalar_mul(value) {
                return Ok(m.scaled(*scale).into());
            }
        }
        Ok((self.to_float() * s.to_complex()).into())
    }

    pub fn dagger(&self) -> Self {
        match self {
            CMatrix::Exact(m) => m.dagger().into(),
            CMatrix::Float(m) => m.adjoint().into(),
        }
    }

    pub fn trace(&self) -> Result<Scalar> {
        match self {
            CMatrix::Exact(m) => m.trace(),
            CMatrix::Float(m) => {
                if !m.is_square() {
                    return Err(Error::NotSquare(m.nrows(), m.ncols()));
                }
                Ok(Scalar::Float(m.trace()))
            }
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        if let (CMatrix::Exact(a), CMatrix::Exact(b)) = (self, other) {
            if let Ok(m) = a.tensor(b) {
                return m.into();
            }
        }
        float_tensor(&self.to_float(), &other.to_float()).into()
    }

    /// Maximum deviation from the property `kind`. Exact inputs return
    /// exactly 0.0 when the property holds exactly; `tol` only affects
    /// float inputs through the sign of the returned value's comparison by
    /// the caller.
    pub fn check(&self, kind: CheckKind) -> Result<f64> {
        let square = self.rows() == self.cols();
        if !square && kind != CheckKind::UnimodularEntries {
            return Err(Error::NotSquare(self.rows(), self.cols()));
        }
        if let CMatrix::Exact(m) = self {
            if exact_check(m, kind)? {
                return Ok(0.0);
            }
            // Report the float deviation, kept strictly positive.
            return Ok(float_check(&m.to_float(), kind).max(f64::MIN_POSITIVE));
        }
        Ok(float_check(&self.to_float(), kind))
    }

    /// Whether `check(kind) <= tol`.
    pub fn satisfies(&self, kind: CheckKind, tol: f64) -> Result<bool> {
        Ok(self.check(kind)? <= tol)
    }

    pub fn to_json(&self) -> Value {
        match self {
            CMatrix::Float(m) => {
                let mut entries = Vec::with_capacity(m.len());
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        entries.push(json!([m[(r, c)].re, m[(r, c)].im]));
                    }
                }
                json!({"rows": m.nrows(), "cols": m.ncols(), "repr": "float", "entries": entries})
            }
            CMatrix::Exact(m) => json!({
                "rows": m.rows,
                "cols": m.cols,
                "repr": "exact",
                "order": m.order,
                "scalePow": m.scale.pow(),
                "scaleRat": rat_json(&m.scale.rat),
                "scaleBase": m.scale.base,
                "entries": m.entries.iter().map(CycloScalar::to_json).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let uint = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse(format!("missing integer field {k}")))
        };
        let (rows, cols) = (uint("rows")? as usize, uint("cols")? as usize);
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing entries".into()))?;
        if entries.len() != rows * cols {
            return Err(Error::Parse(format!("{} entries for {rows}x{cols}", entries.len())));
        }
        match v.get("repr").and_then(Value::as_str) {
            Some("float") => {
                let vals = entries
                    .iter()
                    .map(|e| {
                        let re = e.get(0).and_then(Value::as_f64);
                        let im = e.get(1).and_then(Value::as_f64);
                        re.zip(im).map(|(re, im)| Complex64::new(re, im))
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse("float entries must be [re, im]".into()))?;
                Ok(DMatrix::from_row_slice(rows, cols, &vals).into())
            }
            Some("exact") => {
                let l = uint("order")?;
                let rat = parse_rat(v.get("scaleRat").unwrap_or(&json!(1)))?;
                let pow = v.get("scalePow").and_then(Value::as_u64).unwrap_or(0);
                let base = match v.get("scaleBase").and_then(Value::as_u64) {
                    Some(b) => b,
                    None if pow == 0 => 1,
                    None => rows as u64,
                };
                let base = if pow.is_multiple_of(2) { 1 } else { base };
                let scale = Scale::new(rat, base);
                let vals = entries
                    .iter()
                    .map(|e| {
                        let cs = e
                            .as_array()
                            .ok_or_else(|| Error::Parse("exact entries must be lists".into()))?
                            .iter()
                            .map(parse_rat)
                            .collect::<Result<Vec<_>>>()?;
                        CycloScalar::from_coeffs(l, cs)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ExactMatrix::new(rows, cols, l, vals, scale)?.into())
            }
            other => Err(Error::Parse(format!("unknown repr {other:?}"))),
        }
    }
}

fn exact_check(m: &ExactMatrix, kind: CheckKind) -> Result<bool> {
    let n = m.rows;
    Ok(match kind {
        CheckKind::Unitary | CheckKind::ScaledUnitary => {
            let p = m.dagger().mul(m)?;
            let diag = p.entry(0, 0).clone();
            let mut ok = (0..n).all(|r| {
                (0..n).all(|c| if r == c { p.entry(r, c) == &diag } else { p.entry(r, c).is_zero() })
            });
            if kind == CheckKind::Unitary {
                // The scale of M^dagger M is rational: both factors share one radical.
                ok &= p.scale.base == 1 && diag.scale_rational(p.scale.rat) == CycloScalar::one();
            } else {
                ok &= !diag.is_zero();
            }
            ok
        }
        CheckKind::Hermitian => m.exact_eq(&m.dagger()).unwrap_or(false),
        CheckKind::UnimodularEntries => {
            let s2 = m.scale.square();
            m.entries.iter().all(|e| e.mul_same(&e.conj()).scale_rational(s2) == CycloScalar::one())
        }
    })
}

fn float_check(a: &DMatrix<Complex64>, kind: CheckKind) -> f64 {
    let maxabs = |m: &DMatrix<Complex64>| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = a.nrows();
    match kind {
        CheckKind::Unitary => maxabs(&(a.adjoint() * a - DMatrix::identity(n, n))),
        CheckKind::ScaledUnitary => {
            let p = a.adjoint() * a;
            let lambda = p.trace().re / n as f64;
            if lambda <= 0.0 {
                return f64::INFINITY;
            }
            maxabs(&(p / Complex64::from(lambda) - DMatrix::identity(n, n)))
        }
        CheckKind::Hermitian => maxabs(&(a - a.adjoint())),
        CheckKind::UnimodularEntries => a.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max),
    }
}

/// Kronecker product with the first factor on the least significant index.
pub fn float_tensor(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    DMatrix::from_fn(ar * b.nrows(), ac * b.ncols(), |r, c| a[(r % ar, c % ac)] * b[(r / ar, c / ac)])
}

/// Tensor product of a list of matrices, first factor least significant.
pub fn float_tensor_all(ms: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    ms.iter().fold(DMatrix::identity(1, 1), |acc, m| float_tensor(&acc, m))
}

/// exp(2 pi i k / n).
pub fn root_of_unity(n: u64, k: i64) -> Complex64 {
    let k = k.rem_euclid(n as i64);
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Largest entry-wise deviation between two float matrices.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Positive sign helper for rationals used by callers printing scales.
pub fn rational_sign(r: &Rational64) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}
