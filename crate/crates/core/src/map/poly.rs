//! Sparse polynomials with integer coefficients and a shared power-of-two scale.

use std::collections::BTreeMap;
use std::fmt;

/// `2^{-scale_exp} · Σ coeff · Π var_i^{e_i}` over `V` variables.
#[derive(Clone, Debug, Default, Eq)]
pub struct SparsePolynomial<const V: usize> {
    terms: BTreeMap<[u32; V], i64>,
    scale_exp: u32,
}

/// Polynomial in `(x, y, z)`.
pub type TrivariatePolynomial = SparsePolynomial<3>;
/// Polynomial in the two in-plane coordinates `(u, v)` of a planar map.
pub type BivariatePolynomial = SparsePolynomial<2>;

impl<const V: usize> SparsePolynomial<V> {
    pub fn zero(scale_exp: u32) -> Self {
        Self {
            terms: BTreeMap::new(),
            scale_exp,
        }
    }

    /// Integer polynomial (scale 0) from `(exponents, coeff)` pairs.
    pub fn from_terms(terms: impl IntoIterator<Item = ([u32; V], i64)>) -> Self {
        let mut p = Self::zero(0);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn with_scale(mut self, scale_exp: u32) -> Self {
        self.scale_exp = scale_exp;
        self
    }

    pub fn scale_exp(&self) -> u32 {
        self.scale_exp
    }

    pub fn add_term(&mut self, exps: [u32; V], coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&exps);
        }
    }

    pub fn coefficient(&self, exps: [u32; V]) -> i64 {
        self.terms.get(&exps).copied().unwrap_or(0)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = ([u32; V], i64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Sum of the integer coefficients (before scaling).
    pub fn coefficient_sum(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn scale_factor(&self) -> f64 {
        (-(self.scale_exp as f64)).exp2()
    }

    /// Drops common factors of two from the coefficients into the scale.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        if out.terms.is_empty() {
            out.scale_exp = 0;
            return out;
        }
        while out.scale_exp > 0 && out.terms.values().all(|c| c % 2 == 0) {
            for c in out.terms.values_mut() {
                *c /= 2;
            }
            out.scale_exp -= 1;
        }
        out
    }

    /// Same polynomial with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: i64) -> Self {
        let mut out = Self::zero(self.scale_exp);
        for (e, c) in self.terms() {
            out.add_term(e, c * factor);
        }
        out
    }

    fn powers(&self, p: &[f64; V]) -> [Vec<f64>; V] {
        std::array::from_fn(|i| {
            let d = self.degree_in(i) as usize;
            let mut v = Vec::with_capacity(d + 1);
            let mut acc = 1.0;
            for _ in 0..=d {
                v.push(acc);
                acc *= p[i];
            }
            v
        })
    }

    pub fn eval(&self, p: &[f64; V]) -> f64 {
        let pw = self.powers(p);
        let mut sum = 0.0;
        for (e, &c) in &self.terms {
            let mut m = c as f64;
            for i in 0..V {
                m *= pw[i][e[i] as usize];
            }
            sum += m;
        }
        sum * self.scale_factor()
    }

    /// Value and exact gradient, evaluated term by term.
    pub fn eval_with_gradient(&self, p: &[f64; V]) -> (f64, [f64; V]) {
        let pw = self.powers(p);
        let mut val = 0.0;
        let mut grad = [0.0; V];
        for (e, &c) in &self.terms {
            let c = c as f64;
            let mut m = c;
            for i in 0..V {
                m *= pw[i][e[i] as usize];
            }
            val += m;
            for (j, g) in grad.iter_mut().enumerate() {
                if e[j] == 0 {
                    continue;
                }
                let mut d = c * e[j] as f64;
                for i in 0..V {
                    let k = if i == j { e[i] - 1 } else { e[i] };
                    d *= pw[i][k as usize];
                }
                *g += d;
            }
        }
        let s = self.scale_factor();
        (val * s, grad.map(|g| g * s))
    }

    /// Exact partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.scale_exp);
        for (e, c) in self.terms() {
            if e[var] > 0 {
                let mut e2 = e;
                e2[var] -= 1;
                out.add_term(e2, c * e[var] as i64);
            }
        }
        out
    }

    /// Restriction to the hyperplane `var = 0`.
    pub fn restrict_zero(&self, var: usize) -> Self {
        let mut out = Self::zero(self.scale_exp);
        for (e, c) in self.terms() {
            if e[var] == 0 {
                out.add_term(e, c);
            }
        }
        out
    }

    /// First monomial not divisible by `var`, if any.
    pub fn non_divisible_monomial(&self, var: usize) -> Option<[u32; V]> {
        self.terms.keys().find(|e| e[var] == 0).copied()
    }

    pub fn is_divisible_by(&self, var: usize) -> bool {
        self.non_divisible_monomial(var).is_none()
    }

    /// `[e_0, .., e_{V-1}, coeff]` rows in ascending exponent order.
    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.terms()
            .map(|(e, c)| {
                let mut row: Vec<i64> = e.iter().map(|&x| x as i64).collect();
                row.push(c);
                row
            })
            .collect()
    }
}

impl<const V: usize> PartialEq for SparsePolynomial<V> {
    /// Structural equality of the normalized term maps.
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.scale_exp == b.scale_exp && a.terms == b.terms
    }
}

const NAMES: [&str; 3] = ["x", "y", "z"];

impl<const V: usize> fmt::Display for SparsePolynomial<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale_exp > 0 {
            write!(f, "2^-{} * (", self.scale_exp)?;
        }
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let sign = if *c < 0 {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(v, &d)| {
                    let name = NAMES.get(v).copied().unwrap_or("?");
                    if d == 1 {
                        name.to_string()
                    } else {
                        format!("{name}^{d}")
                    }
                })
                .collect();
            let a = c.unsigned_abs();
            match (a, mono.is_empty()) {
                (_, true) => write!(f, "{a}")?,
                (1, false) => write!(f, "{}", mono.join("*"))?,
                _ => write!(f, "{a}*{}", mono.join("*"))?,
            }
        }
        if self.scale_exp > 0 {
            write!(f, ")")?;
        }
        Ok(())
    }
}
