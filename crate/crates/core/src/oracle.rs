//! Brute-force trace oracles that check generated maps without weight counting.
//!
//! The dense oracle builds `ρ^{⊗n}`, the code projector `Π (I + g_i)/2` and
//! the logical operators as `2^n × 2^n` complex matrices and takes literal
//! traces. The factorized oracle sums, over the stabilizer group, products of
//! single-qubit traces `Tr[σ ρ]`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{enumerate_group, StabilizerCode, DEFAULT_GROUP_CAP};
use crate::error::{Error, Result};
use crate::map::DistillationMap;
use crate::pauli::{Letter, PauliOperator};

/// Largest qubit count handled by the dense oracle.
pub const DENSE_CAP: usize = 8;

/// `p_s` and, per logical output, `(T^x, T^y, T^z)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleTraces {
    pub p_s: f64,
    pub outputs: Vec<[f64; 3]>,
    /// Largest imaginary part seen in any trace.
    pub max_imag: f64,
}

type Dense = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn single_qubit(letter: Letter) -> [Complex64; 4] {
    match letter {
        Letter::I => [ONE, ZERO, ZERO, ONE],
        Letter::X => [ZERO, ONE, ONE, ZERO],
        Letter::Y => [ZERO, -I, I, ZERO],
        Letter::Z => [ONE, ZERO, ZERO, -ONE],
    }
}

fn density(p: &[f64; 3]) -> [Complex64; 4] {
    let [x, y, z] = *p;
    [
        Complex64::new((1.0 + z) / 2.0, 0.0),
        Complex64::new(x / 2.0, -y / 2.0),
        Complex64::new(x / 2.0, y / 2.0),
        Complex64::new((1.0 - z) / 2.0, 0.0),
    ]
}

/// Kronecker product of 2×2 factors, first factor most significant.
fn kron_all(factors: &[[Complex64; 4]]) -> Dense {
    let mut m = vec![ONE];
    let mut dim = 1;
    for f in factors {
        let nd = dim * 2;
        let mut out = vec![ZERO; nd * nd];
        for r in 0..dim {
            for c in 0..dim {
                let v = m[r * dim + c];
                for a in 0..2 {
                    for b in 0..2 {
                        out[(2 * r + a) * nd + 2 * c + b] = v * f[2 * a + b];
                    }
                }
            }
        }
        m = out;
        dim = nd;
    }
    m
}

fn matmul(a: &Dense, b: &Dense, dim: usize) -> Dense {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let v = a[i * dim + k];
            if v == ZERO {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += v * b[k * dim + j];
            }
        }
    }
    out
}

fn pauli_matrix(op: &PauliOperator) -> Dense {
    let factors: Vec<[Complex64; 4]> = op.letters().map(single_qubit).collect();
    let phase = I.powu(op.phase_exp() as u32);
    kron_all(&factors).into_iter().map(|v| v * phase).collect()
}

/// `Tr[A B]`.
fn trace_product(a: &Dense, b: &Dense, dim: usize) -> Complex64 {
    let mut s = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            s += a[i * dim + j] * b[j * dim + i];
        }
    }
    s
}

/// Dense-matrix oracle with the projector and `L̄·P` products precomputed.
pub struct DenseOracle {
    n: usize,
    dim: usize,
    projector: Dense,
    /// Per output: `[X̄P, ȲP, Z̄P]`.
    logical_projected: Vec<[Dense; 3]>,
}

impl DenseOracle {
    pub fn new(code: &StabilizerCode) -> Result<Self> {
        if code.n > DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                n: code.n,
                cap: DENSE_CAP,
            });
        }
        let dim = 1usize << code.n;
        let mut projector = kron_all(&vec![single_qubit(Letter::I); code.n]);
        for g in &code.generators {
            let gm = pauli_matrix(g);
            let half: Dense = gm
                .iter()
                .enumerate()
                .map(|(idx, v)| {
                    let diag = if idx / dim == idx % dim { ONE } else { ZERO };
                    (diag + v) * 0.5
                })
                .collect();
            projector = matmul(&half, &projector, dim);
        }
        let mut logical_projected = Vec::with_capacity(code.k);
        for i in 0..code.k {
            let ops = [
                code.logical_x[i].clone(),
                code.logical_y(i)?,
                code.logical_z[i].clone(),
            ];
            logical_projected.push(ops.map(|op| matmul(&pauli_matrix(&op), &projector, dim)));
        }
        Ok(Self {
            n: code.n,
            dim,
            projector,
            logical_projected,
        })
    }

    pub fn traces(&self, p: &[f64; 3]) -> OracleTraces {
        let rho = kron_all(&vec![density(p); self.n]);
        let ps = trace_product(&self.projector, &rho, self.dim);
        let mut max_imag = ps.im.abs();
        let outputs = self
            .logical_projected
            .iter()
            .map(|ops| {
                std::array::from_fn(|a| {
                    let t = trace_product(&ops[a], &rho, self.dim);
                    max_imag = max_imag.max(t.im.abs());
                    t.re
                })
            })
            .collect();
        OracleTraces {
            p_s: ps.re,
            outputs,
            max_imag,
        }
    }
}

/// Literal `Tr[P ρ^{⊗n}]` and `Tr[P ρ^{⊗n} L̄]` for a code with at most
/// [`DENSE_CAP`] qubits.
pub fn dense_trace_oracle(code: &StabilizerCode, p: &[f64; 3]) -> Result<OracleTraces> {
    Ok(DenseOracle::new(code)?.traces(p))
}

/// Signed operator with its letters as single-qubit matrices indices.
struct SignedString {
    sign: f64,
    letters: Vec<Letter>,
}

impl SignedString {
    fn new(op: &PauliOperator) -> Result<Self> {
        let sign = op
            .sign()
            .ok_or_else(|| Error::InvalidCode(format!("{op} is not Hermitian")))?;
        Ok(Self {
            sign: sign as f64,
            letters: op.letters().collect(),
        })
    }

    /// `sign · Π_k Tr[σ_k ρ]`, each single-qubit trace from 2×2 matrices.
    fn trace(&self, single: &[Complex64; 4]) -> Complex64 {
        self.letters
            .iter()
            .fold(Complex64::new(self.sign, 0.0), |acc, l| {
                acc * single[*l as usize]
            })
    }
}

/// Group-sum oracle with the operator products precomputed.
pub struct FactorizedOracle {
    scale: f64,
    stabilizers: Vec<SignedString>,
    /// Per output: `[X̄s, Ȳs, Z̄s]` over the group.
    logical_products: Vec<[Vec<SignedString>; 3]>,
}

impl FactorizedOracle {
    pub fn new(code: &StabilizerCode) -> Result<Self> {
        Self::with_cap(code, DEFAULT_GROUP_CAP)
    }

    pub fn with_cap(code: &StabilizerCode, cap: usize) -> Result<Self> {
        let group = enumerate_group(code, cap)?;
        let stabilizers = group
            .elements
            .iter()
            .map(SignedString::new)
            .collect::<Result<Vec<_>>>()?;
        let mut logical_products = Vec::with_capacity(code.k);
        for i in 0..code.k {
            let ops = [
                code.logical_x[i].clone(),
                code.logical_y(i)?,
                code.logical_z[i].clone(),
            ];
            let mut per = Vec::with_capacity(3);
            for op in &ops {
                per.push(
                    group
                        .elements
                        .iter()
                        .map(|s| SignedString::new(&op.multiply(s)?))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            let [x, y, z]: [Vec<SignedString>; 3] = per.try_into().ok().expect("three logicals");
            logical_products.push([x, y, z]);
        }
        Ok(Self {
            scale: (-(code.generators.len() as f64)).exp2(),
            stabilizers,
            logical_products,
        })
    }

    pub fn traces(&self, p: &[f64; 3]) -> OracleTraces {
        let rho = density(p);
        // Tr[σ ρ] for σ in I, X, Y, Z, indexed by `Letter as usize`.
        let mut single = [ZERO; 4];
        for l in [Letter::I, Letter::X, Letter::Y, Letter::Z] {
            let s = single_qubit(l);
            single[l as usize] = s[0] * rho[0] + s[1] * rho[2] + s[2] * rho[1] + s[3] * rho[3];
        }
        let sum = |ops: &[SignedString]| -> Complex64 {
            ops.iter().map(|o| o.trace(&single)).sum::<Complex64>() * self.scale
        };
        let ps = sum(&self.stabilizers);
        let mut max_imag = ps.im.abs();
        let outputs = self
            .logical_products
            .iter()
            .map(|ops| {
                std::array::from_fn(|a| {
                    let t = sum(&ops[a]);
                    max_imag = max_imag.max(t.im.abs());
                    t.re
                })
            })
            .collect();
        OracleTraces {
            p_s: ps.re,
            outputs,
            max_imag,
        }
    }
}

pub fn factorized_trace_oracle(code: &StabilizerCode, p: &[f64; 3]) -> Result<OracleTraces> {
    Ok(FactorizedOracle::new(code)?.traces(p))
}

/// Uniform point in the open unit ball: Gaussian direction, radius `U^{1/3}`.
pub fn sample_ball<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let d: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if n == 0.0 {
            continue;
        }
        let r = rng.random::<f64>().cbrt();
        if r >= 1.0 {
            continue;
        }
        return d.map(|v| v * r / n);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Dense,
    Factorized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerificationStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub status: VerificationStatus,
    pub oracle: Option<OracleKind>,
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub max_deviation: f64,
    pub worst_point: Option<[f64; 3]>,
    /// Quantity with the largest deviation, e.g. `p_s` or `T^x[0]`.
    pub worst_quantity: Option<String>,
    pub message: Option<String>,
}

fn deviations(map: &DistillationMap, traces: &OracleTraces, p: &[f64; 3]) -> (f64, String) {
    let mut worst = ((map.p_s.eval(p) - traces.p_s).abs(), "p_s".to_string());
    for (i, (out, t)) in map.outputs.iter().zip(&traces.outputs).enumerate() {
        for (a, axis) in ["x", "y", "z"].iter().enumerate() {
            let d = (out.axis(a).eval(p) - t[a]).abs();
            if d > worst.0 || d.is_nan() {
                worst = (d, format!("T^{axis}[{i}]"));
            }
        }
    }
    worst
}

type TraceFn = Box<dyn Fn(&[f64; 3]) -> OracleTraces + Sync>;

/// Compares polynomial evaluation with the strongest applicable oracle on
/// `samples` uniform points of the ball.
pub fn verify_map(
    map: &DistillationMap,
    samples: usize,
    tol: f64,
    seed: u64,
) -> VerificationReport {
    let mut report = VerificationReport {
        name: map.name.clone(),
        status: VerificationStatus::Skipped,
        oracle: None,
        samples,
        tolerance: tol,
        seed,
        max_deviation: 0.0,
        worst_point: None,
        worst_quantity: None,
        message: None,
    };
    let Some(code) = &map.code else {
        report.message = Some("no code available".into());
        return report;
    };
    let oracle: TraceFn = if code.n <= DENSE_CAP {
        match DenseOracle::new(code) {
            Ok(o) => {
                report.oracle = Some(OracleKind::Dense);
                Box::new(move |p| o.traces(p))
            }
            Err(e) => {
                report.message = Some(e.to_string());
                return report;
            }
        }
    } else {
        match FactorizedOracle::new(code) {
            Ok(o) => {
                report.oracle = Some(OracleKind::Factorized);
                Box::new(move |p| o.traces(p))
            }
            Err(e) => {
                report.message = Some(e.to_string());
                return report;
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 3]> = (0..samples).map(|_| sample_ball(&mut rng)).collect();
    let results: Vec<(f64, String, [f64; 3])> = points
        .par_iter()
        .map(|p| {
            let (d, q) = deviations(map, &oracle(p), p);
            (d, q, *p)
        })
        .collect();
    let worst = results
        .into_iter()
        .fold(None::<(f64, String, [f64; 3])>, |acc, r| match acc {
            Some(a) if !(r.0 > a.0 || r.0.is_nan()) => Some(a),
            _ => Some(r),
        });
    if let Some((d, q, p)) = worst {
        report.max_deviation = d;
        report.worst_point = Some(p);
        report.worst_quantity = Some(q);
    }
    report.status = if report.max_deviation <= tol {
        VerificationStatus::Passed
    } else {
        VerificationStatus::Failed
    };
    report
}
