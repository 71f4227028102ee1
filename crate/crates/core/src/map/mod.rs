//! Exact polynomial maps `(p_s, T^x_i, T^y_i, T^z_i)` built from stabilizer codes.
//!
//! For an input `ρ(x,y,z)^{⊗n}` every stabilizer element `s` contributes
//! `±x^{w_x} y^{w_y} z^{w_z}` to `p_s`, where the exponents are its Pauli
//! weights. The numerators `T` are built the same way from the products
//! `L̄·s` of each logical operator with the group.

mod planar;
mod poly;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use planar::{PlanarMap, Plane};
pub use poly::{BivariatePolynomial, SparsePolynomial, TrivariatePolynomial};

use crate::code::{enumerate_group, validate, ManualMapTerms, StabilizerCode, DEFAULT_GROUP_CAP};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Numerators for one logical output.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPolynomials {
    pub x: TrivariatePolynomial,
    pub y: TrivariatePolynomial,
    pub z: TrivariatePolynomial,
}

impl OutputPolynomials {
    pub fn axis(&self, var: usize) -> &TrivariatePolynomial {
        match var {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DistillationMap {
    pub name: String,
    /// Source code; `None` for hand-entered maps.
    pub code: Option<StabilizerCode>,
    pub p_s: TrivariatePolynomial,
    pub outputs: Vec<OutputPolynomials>,
    pub gauge_count: usize,
}

impl DistillationMap {
    pub fn k(&self) -> usize {
        self.outputs.len()
    }

    pub fn output(&self, index: usize) -> Result<&OutputPolynomials> {
        self.outputs.get(index).ok_or(Error::OutputIndex {
            index,
            k: self.outputs.len(),
        })
    }

    pub fn is_manual(&self) -> bool {
        self.code.is_none()
    }
}

type TermCounts = BTreeMap<[u32; 3], i64>;

fn count_terms(elements: &[PauliOperator], left: Option<&PauliOperator>) -> Result<TermCounts> {
    elements
        .par_chunks(2048)
        .map(|chunk| -> Result<TermCounts> {
            let mut counts = TermCounts::new();
            for s in chunk {
                let op = match left {
                    Some(l) => l.multiply(s)?,
                    None => s.clone(),
                };
                let sign = op
                    .sign()
                    .ok_or_else(|| Error::InvalidCode(format!("operator {op} is not Hermitian")))?;
                let w = op.weights();
                *counts.entry([w.x, w.y, w.z]).or_insert(0) += sign;
            }
            Ok(counts)
        })
        .try_reduce(TermCounts::new, |mut a, b| {
            for (e, c) in b {
                *a.entry(e).or_insert(0) += c;
            }
            Ok(a)
        })
}

fn to_poly(counts: TermCounts, scale_exp: u32) -> TrivariatePolynomial {
    SparsePolynomial::from_terms(counts).with_scale(scale_exp)
}

/// Builds the exact map of a valid code, enumerating at most `2^cap` group elements.
pub fn build_map_with_cap(code: &StabilizerCode, cap: usize) -> Result<DistillationMap> {
    let report = validate(code);
    if !report.is_valid() {
        return Err(Error::InvalidCode(report.violations.join("; ")));
    }
    let group = enumerate_group(code, cap)?;
    let scale = code.generators.len() as u32;
    let p_s = to_poly(count_terms(&group.elements, None)?, scale);
    let mut outputs = Vec::with_capacity(code.k);
    for i in 0..code.k {
        let y_bar = code.logical_y(i)?;
        let x = to_poly(
            count_terms(&group.elements, Some(&code.logical_x[i]))?,
            scale,
        );
        let y = to_poly(count_terms(&group.elements, Some(&y_bar))?, scale);
        let z = to_poly(
            count_terms(&group.elements, Some(&code.logical_z[i]))?,
            scale,
        );
        outputs.push(OutputPolynomials { x, y, z });
    }
    Ok(DistillationMap {
        name: code.name.clone(),
        code: Some(code.clone()),
        p_s,
        outputs,
        gauge_count: code.gauge_count(),
    })
}

pub fn build_map(code: &StabilizerCode) -> Result<DistillationMap> {
    build_map_with_cap(code, DEFAULT_GROUP_CAP)
}

fn rows_to_poly(rows: &[[i64; 4]], scale_exp: u32) -> Result<TrivariatePolynomial> {
    let mut p = TrivariatePolynomial::zero(scale_exp);
    for r in rows {
        if r[..3].iter().any(|&e| e < 0) {
            return Err(Error::Degenerate(format!(
                "negative exponent in monomial {r:?}"
            )));
        }
        p.add_term([r[0] as u32, r[1] as u32, r[2] as u32], r[3]);
    }
    Ok(p)
}

/// Single-output map from hand-entered monomial lists.
pub fn map_from_manual(name: &str, terms: &ManualMapTerms) -> Result<DistillationMap> {
    let s = terms.scale_exp;
    let p_s = rows_to_poly(&terms.denominator, s)?;
    if p_s.is_empty() {
        return Err(Error::Degenerate(
            "manual map has a zero denominator".into(),
        ));
    }
    Ok(DistillationMap {
        name: name.to_string(),
        code: None,
        p_s,
        outputs: vec![OutputPolynomials {
            x: rows_to_poly(&terms.numerator_x, s)?,
            y: rows_to_poly(&terms.numerator_y, s)?,
            z: rows_to_poly(&terms.numerator_z, s)?,
        }],
        gauge_count: 0,
    })
}

/// Outcome of checking whether a coordinate plane is mapped into itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneCheck {
    pub holds: bool,
    /// `(output index, [w_x, w_y, w_z])` of a monomial that breaks divisibility.
    pub witness: Option<(usize, [u32; 3])>,
}

/// The plane `c = 0` is invariant when the `c` numerator of every output is
/// divisible by `c`.
pub fn fixed_plane_check(map: &DistillationMap, plane: Plane) -> PlaneCheck {
    let var = plane.fixed_axis();
    for (i, out) in map.outputs.iter().enumerate() {
        if let Some(m) = out.axis(var).non_divisible_monomial(var) {
            return PlaneCheck {
                holds: false,
                witness: Some((i, m)),
            };
        }
    }
    PlaneCheck {
        holds: true,
        witness: None,
    }
}

/// JSON export record; also accepted as input for manual maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapExport {
    pub name: String,
    pub scale_exp: u32,
    pub gauge_count: usize,
    pub denominator: Vec<[i64; 4]>,
    pub outputs: Vec<OutputExport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputExport {
    pub numerator_x: Vec<[i64; 4]>,
    pub numerator_y: Vec<[i64; 4]>,
    pub numerator_z: Vec<[i64; 4]>,
}

fn rows_of(p: &TrivariatePolynomial) -> Vec<[i64; 4]> {
    p.terms()
        .map(|(e, c)| [e[0] as i64, e[1] as i64, e[2] as i64, c])
        .collect()
}

impl MapExport {
    pub fn from_map(map: &DistillationMap) -> Self {
        Self {
            name: map.name.clone(),
            scale_exp: map.p_s.scale_exp(),
            gauge_count: map.gauge_count,
            denominator: rows_of(&map.p_s),
            outputs: map
                .outputs
                .iter()
                .map(|o| OutputExport {
                    numerator_x: rows_of(&o.x),
                    numerator_y: rows_of(&o.y),
                    numerator_z: rows_of(&o.z),
                })
                .collect(),
        }
    }

    pub fn into_map(self) -> Result<DistillationMap> {
        let s = self.scale_exp;
        let outputs = self
            .outputs
            .iter()
            .map(|o| {
                Ok(OutputPolynomials {
                    x: rows_to_poly(&o.numerator_x, s)?,
                    y: rows_to_poly(&o.numerator_y, s)?,
                    z: rows_to_poly(&o.numerator_z, s)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DistillationMap {
            name: self.name,
            code: None,
            p_s: rows_to_poly(&self.denominator, s)?,
            outputs,
            gauge_count: self.gauge_count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::parse_code;

    fn tri(terms: &[(u32, u32, u32, i64)]) -> TrivariatePolynomial {
        TrivariatePolynomial::from_terms(terms.iter().map(|&(a, b, c, k)| ([a, b, c], k)))
    }

    fn three() -> DistillationMap {
        let c = parse_code(
            "name: 311\nn: 3\nk: 1\ngenerator: XZI\ngenerator: ZXX\nlogical_x[0]: IZZ\nlogical_z[0]: IIX\n",
        )
        .unwrap();
        build_map(&c).unwrap()
    }

    #[test]
    fn three_qubit_polynomials() {
        let m = three();
        let want_ps = tri(&[(0, 0, 0, 1), (1, 0, 1, 1), (2, 0, 1, 1), (1, 2, 0, 1)]).with_scale(2);
        assert_eq!(m.p_s, want_ps);
        let want_tx = tri(&[(0, 0, 2, 1), (1, 0, 1, 1), (0, 2, 1, -1), (1, 2, 0, 1)]).with_scale(2);
        assert_eq!(m.outputs[0].x, want_tx);
        assert!(fixed_plane_check(&m, Plane::Y0).holds);
    }

    #[test]
    fn manual_plane_witness() {
        let terms = ManualMapTerms {
            numerator_z: vec![[2, 0, 0, 1]],
            denominator: vec![[0, 0, 0, 1]],
            ..Default::default()
        };
        let m = map_from_manual("bad", &terms).unwrap();
        let check = fixed_plane_check(&m, Plane::Z0);
        assert!(!check.holds);
        assert_eq!(check.witness, Some((0, [2, 0, 0])));
    }

    #[test]
    fn invalid_code_rejected() {
        let c = parse_code("name: bad\nn: 2\nk: 1\ngenerator: XX\ngenerator: ZZ\nlogical_x[0]: XI\nlogical_z[0]: ZI\n")
            .unwrap();
        assert!(matches!(build_map(&c), Err(Error::InvalidCode(_))));
    }

    #[test]
    fn export_round_trip() {
        let m = three();
        let e = MapExport::from_map(&m);
        let json = serde_json::to_string(&e).unwrap();
        let back: MapExport = serde_json::from_str(&json).unwrap();
        let m2 = back.into_map().unwrap();
        assert_eq!(m2.p_s, m.p_s);
        assert_eq!(m2.outputs, m.outputs);
    }
}
