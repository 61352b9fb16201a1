//! The prime-distinguishing function g(N), the multiplicative companion h(N)
//! and the two-case Gauss-sum magnitude, with exact values over square roots.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Splits `n = s^2 f` with `f` squarefree; returns `(s, f)`.
pub fn squarefree_split(mut n: u64) -> (u64, u64) {
    let mut s = 1;
    let mut f = 1;
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        s *= d.pow(e / 2);
        if e % 2 == 1 {
            f *= d;
        }
        d += 1;
    }
    (s, f * n)
}

/// `sum_d c_d sqrt(d)` over squarefree `d` with nonzero rational `c_d`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RadicalValue {
    terms: BTreeMap<u64, Rational64>,
}

impl RadicalValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(r: Rational64) -> Self {
        let mut v = Self::zero();
        v.add_term(1, r);
        v
    }

    pub fn int(k: i64) -> Self {
        Self::rational(Rational64::from_integer(k))
    }

    /// `c sqrt(n)` for any positive `n`.
    pub fn sqrt_times(n: u64, c: Rational64) -> Self {
        let (s, f) = squarefree_split(n);
        let mut v = Self::zero();
        v.add_term(f, c * Rational64::from_integer(s as i64));
        v
    }

    pub fn sqrt(n: u64) -> Self {
        Self::sqrt_times(n, Rational64::from_integer(1))
    }

    fn add_term(&mut self, d: u64, c: Rational64) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(d).or_insert_with(Rational64::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&d);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<u64, Rational64> {
        &self.terms
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, (&d, c)| acc + c.to_f64().unwrap_or(f64::NAN) * (d as f64).sqrt())
    }

    pub fn scale(&self, r: Rational64) -> Self {
        let mut v = Self::zero();
        for (&d, &c) in &self.terms {
            v.add_term(d, c * r);
        }
        v
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self.terms.iter().map(|(d, c)| json!({"radicand": d, "coeff": c.to_string()})).collect::<Vec<_>>(),
            "value": self.to_f64(),
            "text": self.to_string(),
        })
    }
}

impl Add for &RadicalValue {
    type Output = RadicalValue;
    fn add(self, o: &RadicalValue) -> RadicalValue {
        let mut v = self.clone();
        for (&d, &c) in &o.terms {
            v.add_term(d, c);
        }
        v
    }
}

impl Neg for &RadicalValue {
    type Output = RadicalValue;
    fn neg(self) -> RadicalValue {
        self.scale(Rational64::from_integer(-1))
    }
}

impl Sub for &RadicalValue {
    type Output = RadicalValue;
    fn sub(self, o: &RadicalValue) -> RadicalValue {
        self + &(-o)
    }
}

impl Mul for &RadicalValue {
    type Output = RadicalValue;
    /// Uses `sqrt(a) sqrt(b) = g sqrt(ab / g^2)` with `g = gcd(a, b)`.
    fn mul(self, o: &RadicalValue) -> RadicalValue {
        let mut v = RadicalValue::zero();
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &o.terms {
                let g = a.gcd(&b);
                v.add_term(a / g * (b / g), ca * cb * Rational64::from_integer(g as i64));
            }
        }
        v
    }
}

impl fmt::Display for RadicalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&d, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match (d, a == Rational64::from_integer(1)) {
                (1, _) => write!(f, "{a}")?,
                (_, true) => write!(f, "sqrt({d})")?,
                (_, false) => write!(f, "{a}*sqrt({d})")?,
            }
        }
        Ok(())
    }
}

/// Whether the term n is dropped from the primed sum: N even with both
/// N/gcd(n, N) and n/gcd(n, N) odd.
fn omitted(n_big: u64, n: u64) -> bool {
    let g = n.gcd(&n_big);
    n_big.is_multiple_of(2) && (n_big / g) % 2 == 1 && (n / g) % 2 == 1
}

/// Exact g(N) from the primed gcd sum, N >= 2. g(1) = 0 by convention.
pub fn g_exact(n_big: u64) -> RadicalValue {
    if n_big <= 1 {
        return RadicalValue::zero();
    }
    let mut counts: BTreeMap<u64, i64> = BTreeMap::new();
    for n in 1..n_big {
        if !omitted(n_big, n) {
            *counts.entry(n.gcd(&n_big)).or_default() += 1;
        }
    }
    let mut v = RadicalValue::int(-(n_big as i64 - 1));
    for (g, k) in counts {
        v = &v + &RadicalValue::sqrt_times(g, Rational64::from_integer(k));
    }
    v
}

/// `N^{-1/2} |sum_{l=0}^{N-1} gamma_{2N}^{(N-l) l n}|` evaluated as a float sum.
pub fn gauss_magnitude(n_big: u64, n: u64) -> f64 {
    let m = 2 * n_big as u128;
    let s: Complex64 = (0..n_big as u128)
        .map(|l| {
            let e = ((n_big as u128 - l) * l % m) * (n as u128 % m) % m;
            Complex64::from_polar(1.0, 2.0 * PI * e as f64 / m as f64)
        })
        .sum();
    s.norm() / (n_big as f64).sqrt()
}

/// g(N) from the double exponential sum.
pub fn g_float(n_big: u64) -> f64 {
    (1..n_big).map(|n| gauss_magnitude(n_big, n) - 1.0).sum()
}

/// h(N) = g(N) + N + sqrt(N) - 1 for odd N, g(N) + N + sqrt(N)/2 - 1 for even N.
pub fn h(n_big: u64) -> RadicalValue {
    let half = Rational64::new(1, 2);
    let root = if n_big % 2 == 1 {
        RadicalValue::sqrt(n_big)
    } else {
        RadicalValue::sqrt_times(n_big, half)
    };
    let g = g_exact(n_big);
    &(&g + &root) + &RadicalValue::int(n_big as i64 - 1)
}

/// `(p^{m/2} - 1)(p^{(m-1)/2} - 1)` as an exact value.
pub fn g_prime_power(p: u64, m: u32) -> RadicalValue {
    let a = &RadicalValue::sqrt(p.pow(m)) - &RadicalValue::int(1);
    let b = &RadicalValue::sqrt(p.pow(m - 1)) - &RadicalValue::int(1);
    &a * &b
}

/// Prime test through the exact zero of g.
pub fn is_prime_via_g(n: u64) -> bool {
    n >= 2 && g_exact(n).is_zero()
}

#[derive(Debug, Clone)]
pub struct GaussSumCheck {
    pub n_big: u64,
    pub n: u64,
    pub value: f64,
    pub predicted: f64,
    pub zero_case: bool,
}

impl GaussSumCheck {
    pub fn ok(&self, tol: f64) -> bool {
        (self.value - self.predicted).abs() <= tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n_big,
            "n": self.n,
            "value": self.value,
            "predicted": self.predicted,
            "zeroCase": self.zero_case,
            "ok": self.ok(1e-8),
        })
    }
}

/// Compares the float magnitude with the two-case rule: 0 when the term is
/// omitted from the primed sum, sqrt(gcd(n, N)) otherwise.
pub fn gauss_sum_check(n_big: u64, n: u64) -> GaussSumCheck {
    let zero_case = omitted(n_big, n);
    let predicted = if zero_case { 0.0 } else { (n.gcd(&n_big) as f64).sqrt() };
    GaussSumCheck { n_big, n, value: gauss_magnitude(n_big, n), predicted, zero_case }
}

/// CSV rows `N,g,g/(N-1),prime` for 2 <= N <= max.
pub fn g_table_csv(max: u64) -> String {
    let mut s = String::from("N,g,g_over_N_minus_1,prime\n");
    for n in 2..=max {
        let g = g_exact(n).to_f64();
        s.push_str(&format!("{n},{g:.12},{:.12},{}\n", g / (n - 1) as f64, is_prime_via_g(n)));
    }
    s
}

/// N values up to `max` with g(N) < 0.
pub fn negative_g_values(max: u64) -> Vec<u64> {
    (2..=max).filter(|&n| g_exact(n).to_f64() < 0.0).collect()
}
