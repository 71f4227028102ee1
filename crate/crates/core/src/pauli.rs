//! n-qubit Pauli operators in bit-packed symplectic form.
//!
//! An operator is `i^phase · ⊗_k P_k` where the letter on qubit `k` is read
//! from the bit pair `(x_k, z_k)`: `00 → I`, `10 → X`, `11 → Y`, `01 → Z`.
//! Products and commutation checks work word-by-word on the packed bits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// Counts of X, Y and Z letters in a Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWeights {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl PauliWeights {
    pub fn total(&self) -> u32 {
        self.x + self.y + self.z
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

fn words(n: usize) -> usize {
    n.div_ceil(WORD)
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            phase: 0,
        }
    }

    pub fn from_letters(letters: &[Letter], phase_exp: u8) -> Self {
        let mut op = Self::identity(letters.len());
        for (k, &l) in letters.iter().enumerate() {
            op.set(k, l);
        }
        op.phase = phase_exp % 4;
        op
    }

    /// Operator with `letter` on every qubit listed in `support` (0-based).
    pub fn from_support(n: usize, support: &[usize], letter: Letter) -> Result<Self> {
        let mut op = Self::identity(n);
        for &q in support {
            if q >= n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: q + 1,
                });
            }
            op.set(q, letter);
        }
        Ok(op)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `e` of the `i^e` prefactor, in `0..4`.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase = phase_exp % 4;
        self
    }

    /// Multiplies the operator by `i^e`.
    pub fn times_i_pow(mut self, e: u8) -> Self {
        self.phase = (self.phase + e) % 4;
        self
    }

    pub fn negated(self) -> Self {
        self.times_i_pow(2)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1` or `-1` for Hermitian operators, `None` otherwise.
    pub fn sign(&self) -> Option<i64> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// True when every letter is `I`, whatever the phase.
    pub fn is_scalar(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn letter(&self, k: usize) -> Letter {
        let (w, b) = (k / WORD, k % WORD);
        Letter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n).map(|k| self.letter(k))
    }

    fn set(&mut self, k: usize, l: Letter) {
        let (w, b) = (k / WORD, k % WORD);
        let (xb, zb) = l.bits();
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | if xb { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if zb { mask } else { 0 };
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(())
    }

    /// Exact product `self · other` including the accumulated power of `i`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        // Write each letter as i^{xz} X^x Z^z. Moving Z^{z1} past X^{x2}
        // contributes (-1)^{z1 x2}; re-absorbing the output Y letters
        // removes i^{x3 z3}.
        let mut acc: i64 = (self.phase + other.phase) as i64;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (x3, z3) = (x1 ^ x2, z1 ^ z2);
            acc += (x1 & z1).count_ones() as i64 + (x2 & z2).count_ones() as i64
                - (x3 & z3).count_ones() as i64
                + 2 * (z1 & x2).count_ones() as i64;
            x.push(x3);
            z.push(z3);
        }
        Ok(Self {
            n: self.n,
            x,
            z,
            phase: acc.rem_euclid(4) as u8,
        })
    }

    /// Symplectic inner product test.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        let parity: u32 = (0..self.x.len())
            .map(|w| (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones())
            .sum();
        Ok(parity.is_multiple_of(2))
    }

    pub fn weights(&self) -> PauliWeights {
        let mut out = PauliWeights { x: 0, y: 0, z: 0 };
        for (&xw, &zw) in self.x.iter().zip(&self.z) {
            out.x += (xw & !zw).count_ones();
            out.y += (xw & zw).count_ones();
            out.z += (zw & !xw).count_ones();
        }
        out
    }

    /// Packed `(x, z)` words, used for GF(2) rank computations.
    pub fn symplectic_words(&self) -> (&[u64], &[u64]) {
        (&self.x, &self.z)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(Error::PauliSyntax(s.to_string()));
        }
        let letters = body
            .chars()
            .map(Letter::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::PauliSyntax(s.to_string()))?;
        Ok(Self::from_letters(&letters, phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_table() {
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("X").multiply(&p("Y")).unwrap(), p("+iZ"));
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), p("+iX"));
    }

    #[test]
    fn three_qubit_generators_product() {
        assert_eq!(p("XZI").multiply(&p("ZXX")).unwrap(), p("+YYX"));
    }

    #[test]
    fn weights_and_commutation() {
        let w = p("XZI").weights();
        assert_eq!((w.x, w.y, w.z), (1, 0, 1));
        let w = p("YYX").weights();
        assert_eq!((w.x, w.y, w.z), (1, 2, 0));
        assert_eq!(PauliOperator::identity(15).weights().total(), 0);
        assert!(p("XZI").commutes(&p("ZXX")).unwrap());
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XYZ").commutes(&PauliOperator::identity(3)).unwrap());
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(matches!(
            p("XX").multiply(&p("X")),
            Err(Error::Dimension { .. })
        ));
        assert!(p("XX").commutes(&p("XXX")).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["XZI", "-YYX", "+iZ", "-iXIZY"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("+XZ"), p("XZ"));
        assert!("XQ".parse::<PauliOperator>().is_err());
        assert!("-".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn multi_word_operators() {
        let n = 130;
        let mut a = vec![Letter::I; n];
        let mut b = vec![Letter::I; n];
        a[0] = Letter::X;
        b[0] = Letter::Z;
        a[129] = Letter::Z;
        b[129] = Letter::X;
        let prod = PauliOperator::from_letters(&a, 0)
            .multiply(&PauliOperator::from_letters(&b, 0))
            .unwrap();
        // (-iY) ⊗ (+iY)
        assert_eq!(prod.phase_exp(), 0);
        assert_eq!(prod.letter(0), Letter::Y);
        assert_eq!(prod.letter(129), Letter::Y);
        assert_eq!(prod.weights().y, 2);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(ls, ph)| {
            let letters: Vec<Letter> = ls
                .into_iter()
                .map(|l| [Letter::I, Letter::X, Letter::Y, Letter::Z][l as usize])
                .collect();
            PauliOperator::from_letters(&letters, ph)
        })
    }

    proptest! {
        #[test]
        fn associative(a in arb_pauli(70), b in arb_pauli(70), c in arb_pauli(70)) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn hermitian_commutation_sign(a in arb_pauli(9), b in arb_pauli(9)) {
            let a = a.with_phase(0);
            let b = b.with_phase(2);
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            if a.commutes(&b).unwrap() {
                prop_assert_eq!(ab, ba);
            } else {
                prop_assert_eq!(ab, ba.negated());
            }
        }

        #[test]
        fn involution(a in arb_pauli(12)) {
            let h = a.with_phase(2);
            let sq = h.multiply(&h).unwrap();
            prop_assert!(sq.is_scalar());
            prop_assert_eq!(sq.phase_exp(), 0);
        }

        #[test]
        fn weights_ignore_phase(a in arb_pauli(20), e in 0u8..4) {
            prop_assert_eq!(a.weights(), a.clone().times_i_pow(e).weights());
            prop_assert!(a.weights().total() as usize <= 20);
        }

        #[test]
        fn display_parse_round_trip(a in arb_pauli(11)) {
            let back: PauliOperator = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
