//! Integer univariate polynomials with exact square-free decomposition and
//! Sturm-sequence real root isolation.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Integer coefficients in ascending degree; the leading coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UnivariatePolynomial {
    coeffs: Vec<BigInt>,
}

impl UnivariatePolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `t - r` for an integer `r`.
    pub fn linear(r: i64) -> Self {
        Self::from_i64(&[-r, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as `i64`, if they all fit.
    pub fn coeffs_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigInt::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Content removed and leading coefficient made positive.
    pub fn primitive(&self) -> Self {
        let mut p = self.divide_content();
        if p.leading().is_some_and(Signed::is_negative) {
            p = p.neg();
        }
        p
    }

    /// Divides by the (positive) content, keeping the sign pattern.
    fn divide_content(&self) -> Self {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Pseudo-division `lc(d)^m · self = q·d + r` with `m = deg self - deg d + 1`.
    fn pseudo_div_rem(&self, d: &Self) -> (Self, Self, usize) {
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.leading().unwrap().clone();
        let mut r = self.coeffs.clone();
        let Some(rd) = self.degree() else {
            return (Self::zero(), Self::zero(), 0);
        };
        if rd < dd {
            return (Self::zero(), self.clone(), 0);
        }
        let steps = rd - dd + 1;
        let mut q = vec![BigInt::zero(); steps];
        for k in (0..steps).rev() {
            let top = r[k + dd].clone();
            for c in q.iter_mut() {
                *c *= &lc;
            }
            q[k] += &top;
            for c in r.iter_mut() {
                *c *= &lc;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &top * dc;
            }
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r), steps)
    }

    /// Quotient by a divisor known to divide exactly over the rationals,
    /// returned as a primitive integer polynomial.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r, _) = self.pseudo_div_rem(d);
        r.is_zero().then(|| q.primitive())
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.pseudo_div_rem(self).1.is_zero()
    }

    /// Primitive gcd over the rationals.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.primitive(), other.primitive());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r, _) = a.pseudo_div_rem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    /// Number of times `factor` divides `self`.
    pub fn multiplicity_of(&self, factor: &Self) -> usize {
        if factor.degree().unwrap_or(0) == 0 || self.is_zero() {
            return 0;
        }
        let mut p = self.clone();
        let mut m = 0;
        while let Some(q) = p.div_exact(factor) {
            p = q;
            m += 1;
        }
        m
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Exact sign at the dyadic rational `m / 2^k`.
    fn sign_at(&self, x: &Dyadic) -> Ordering {
        let Some(d) = self.degree() else {
            return Ordering::Equal;
        };
        let mut acc = self.coeffs[d].clone();
        let mut s_pow = BigInt::one();
        for j in (0..d).rev() {
            s_pow <<= x.k;
            acc = acc * &x.m + &self.coeffs[j] * &s_pow;
        }
        acc.sign().cmp_zero()
    }

    /// Square-free decomposition: pairs `(factor, multiplicity)` with
    /// primitive, pairwise coprime, square-free factors of positive degree.
    pub fn square_free_decomposition(&self) -> Vec<(Self, usize)> {
        let f = self.primitive();
        if f.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let mut g = f.gcd(&f.derivative());
        let mut w = f.div_exact(&g).expect("gcd divides");
        let mut out = Vec::new();
        let mut i = 1;
        while w.degree().unwrap_or(0) > 0 {
            let y = w.gcd(&g);
            let z = w.div_exact(&y).expect("gcd divides");
            if z.degree().unwrap_or(0) > 0 {
                out.push((z, i));
            }
            g = g.div_exact(&y).expect("gcd divides");
            w = y;
            i += 1;
        }
        out
    }
}

trait CmpZero {
    fn cmp_zero(self) -> Ordering;
}

impl CmpZero for num_bigint::Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            num_bigint::Sign::Minus => Ordering::Less,
            num_bigint::Sign::NoSign => Ordering::Equal,
            num_bigint::Sign::Plus => Ordering::Greater,
        }
    }
}

/// `m / 2^k`.
#[derive(Clone, Debug)]
struct Dyadic {
    m: BigInt,
    k: u32,
}

impl Dyadic {
    fn from_int(v: BigInt) -> Self {
        Self { m: v, k: 0 }
    }

    fn at_exponent(&self, k: u32) -> BigInt {
        &self.m << (k - self.k)
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        let k = a.k.max(b.k);
        Self {
            m: a.at_exponent(k) + b.at_exponent(k),
            k: k + 1,
        }
    }

    fn to_f64(&self) -> f64 {
        let bits = self.m.bits() as i64;
        let shift = (bits - 60).max(0) as u32;
        let top = (&self.m >> shift).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi(shift as i32 - self.k as i32)
    }
}

fn sturm_sequence(p: &UnivariatePolynomial) -> Vec<UnivariatePolynomial> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let n = seq.len();
        let (a, b) = (&seq[n - 2], &seq[n - 1]);
        if b.degree().unwrap_or(0) == 0 {
            break;
        }
        let (_, r, steps) = a.pseudo_div_rem(b);
        if r.is_zero() {
            break;
        }
        // lc(b)^steps scales the remainder; undo its sign before negating.
        let flip = b.leading().unwrap().is_negative() && steps % 2 == 1;
        let r = if flip { r } else { r.neg() };
        seq.push(r.divide_content());
    }
    seq
}

fn sign_changes(seq: &[UnivariatePolynomial], x: &Dyadic) -> usize {
    let mut count = 0;
    let mut last = Ordering::Equal;
    for p in seq {
        let s = p.sign_at(x);
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Real root with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

pub const ROOT_TOLERANCE: f64 = 1e-13;

fn isolate(p: &UnivariatePolynomial) -> Vec<f64> {
    let seq = sturm_sequence(p);
    let lc = p.leading().unwrap().abs();
    let max = p.coeffs.iter().map(|c| c.abs()).max().unwrap();
    let bound = BigInt::one() + max.div_ceil(&lc);
    let e = bound.bits() as u32;
    let lo = Dyadic::from_int(-(BigInt::one() << e));
    let hi = Dyadic::from_int(BigInt::one() << e);
    let mut stack = vec![(lo, hi)];
    let mut roots = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let count = sign_changes(&seq, &lo) - sign_changes(&seq, &hi);
        match count {
            0 => {}
            1 => roots.push(refine(p, &seq, lo, hi)),
            _ => {
                let mid = Dyadic::midpoint(&lo, &hi);
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Bisects an interval `(lo, hi]` holding exactly one root.
fn refine(
    p: &UnivariatePolynomial,
    seq: &[UnivariatePolynomial],
    mut lo: Dyadic,
    mut hi: Dyadic,
) -> f64 {
    for _ in 0..400 {
        if p.sign_at(&hi) == Ordering::Equal {
            return hi.to_f64();
        }
        let (a, b) = (lo.to_f64(), hi.to_f64());
        if b - a <= ROOT_TOLERANCE * b.abs().max(1.0) {
            break;
        }
        let mid = Dyadic::midpoint(&lo, &hi);
        if sign_changes(seq, &lo) - sign_changes(seq, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo.to_f64() + hi.to_f64())
}

/// All real roots with multiplicities, in ascending order.
pub fn real_roots(f: &UnivariatePolynomial) -> Vec<RealRoot> {
    let mut out: Vec<RealRoot> = f
        .square_free_decomposition()
        .into_iter()
        .flat_map(|(factor, m)| {
            isolate(&factor).into_iter().map(move |value| RealRoot {
                value,
                multiplicity: m,
            })
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

impl fmt::Display for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{a}*t")?,
                (_, true) => write!(f, "t^{i}")?,
                (_, false) => write!(f, "{a}*t^{i}")?,
            }
        }
        Ok(())
    }
}
