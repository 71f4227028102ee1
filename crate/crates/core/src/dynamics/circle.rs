//! Fixed points on the unit circle of a planar map via the substitution
//! `t = tan(θ/2)`, which turns the on-circle fixed-point condition into an
//! integer polynomial `f(t)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::univariate::{real_roots, UnivariatePolynomial};
use super::{fixed::RESIDUAL_TOL, RationalMap};
use crate::error::{Error, Result};
use crate::map::{BivariatePolynomial, PlanarMap, Plane};

/// Which in-plane coordinate carries `sin θ`; the other carries `cos θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    /// `u = sin θ`, `v = cos θ`.
    SinUCosV,
    /// `u = cos θ`, `v = sin θ`.
    CosUSinV,
}

impl Parameterization {
    pub fn for_plane(plane: Plane) -> Self {
        if plane.sin_slot() == 0 {
            Parameterization::SinUCosV
        } else {
            Parameterization::CosUSinV
        }
    }

    pub fn sin_slot(self) -> usize {
        match self {
            Parameterization::SinUCosV => 0,
            Parameterization::CosUSinV => 1,
        }
    }

    /// Parses `sin-<axis>-cos-<axis>`, e.g. `sin-x-cos-z`, against `plane`.
    pub fn parse(text: &str, plane: Plane) -> Result<Self> {
        let bad = || {
            Error::Degenerate(format!(
                "parameterization {text:?} does not fit plane {plane}"
            ))
        };
        let lower = text.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split('-').collect();
        let [a, sa, b, sb] = parts.as_slice() else {
            return Err(bad());
        };
        let (sin_axis, cos_axis) = match (*a, *b) {
            ("sin", "cos") => (*sa, *sb),
            ("cos", "sin") => (*sb, *sa),
            _ => return Err(bad()),
        };
        let [u, v] = plane.axis_names();
        match (sin_axis, cos_axis) {
            (s, c) if s == u && c == v => Ok(Parameterization::SinUCosV),
            (s, c) if s == v && c == u => Ok(Parameterization::CosUSinV),
            _ => Err(bad()),
        }
    }

    pub fn label(self, plane: Plane) -> String {
        let [u, v] = plane.axis_names();
        match self {
            Parameterization::SinUCosV => format!("sin-{u}-cos-{v}"),
            Parameterization::CosUSinV => format!("sin-{v}-cos-{u}"),
        }
    }

    pub fn point(self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        match self {
            Parameterization::SinUCosV => [s, c],
            Parameterization::CosUSinV => [c, s],
        }
    }
}

/// Which equation on the circle defines `f(t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleCondition {
    /// Image parallel to the point: `N_sin · cos θ − N_cos · sin θ = 0`.
    #[default]
    Collinear,
    /// Sine coordinate fixed: `N_sin − sin θ · D = 0`.
    SinCoordinate,
    /// Cosine coordinate fixed: `N_cos − cos θ · D = 0`.
    CosCoordinate,
}

impl fmt::Display for CircleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CircleCondition::Collinear => "collinear",
            CircleCondition::SinCoordinate => "sin-coordinate",
            CircleCondition::CosCoordinate => "cos-coordinate",
        })
    }
}

impl FromStr for CircleCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collinear" => Ok(CircleCondition::Collinear),
            "sin-coordinate" | "sin" => Ok(CircleCondition::SinCoordinate),
            "cos-coordinate" | "cos" => Ok(CircleCondition::CosCoordinate),
            other => Err(Error::Degenerate(format!(
                "unknown circle condition {other:?}"
            ))),
        }
    }
}

/// Terms `coeff · sin^a · cos^b`, keyed by `(a, b)`.
type TrigTerms = BTreeMap<(u32, u32), i64>;

fn trig_terms(
    p: &BivariatePolynomial,
    sin_slot: usize,
    shift: (u32, u32),
    sign: i64,
    out: &mut TrigTerms,
) {
    for (e, c) in p.terms() {
        let key = (e[sin_slot] + shift.0, e[1 - sin_slot] + shift.1);
        *out.entry(key).or_insert(0) += sign * c;
    }
}

/// The primitive integer polynomial whose real roots `t = tan(θ/2)` contain
/// the on-circle fixed angles of `pm`.
pub fn circle_polynomial(
    pm: &PlanarMap,
    param: Parameterization,
    condition: CircleCondition,
) -> Result<UnivariatePolynomial> {
    let s = param.sin_slot();
    let (n_sin, n_cos) = if s == 0 {
        (&pm.numerator_u, &pm.numerator_v)
    } else {
        (&pm.numerator_v, &pm.numerator_u)
    };
    let mut terms = TrigTerms::new();
    match condition {
        CircleCondition::Collinear => {
            trig_terms(n_sin, s, (0, 1), 1, &mut terms);
            trig_terms(n_cos, s, (1, 0), -1, &mut terms);
        }
        CircleCondition::SinCoordinate => {
            trig_terms(n_sin, s, (0, 0), 1, &mut terms);
            trig_terms(&pm.denominator, s, (1, 0), -1, &mut terms);
        }
        CircleCondition::CosCoordinate => {
            trig_terms(n_cos, s, (0, 0), 1, &mut terms);
            trig_terms(&pm.denominator, s, (0, 1), -1, &mut terms);
        }
    }
    terms.retain(|_, c| *c != 0);
    let degree = terms.keys().map(|(a, b)| a + b).max().unwrap_or(0);
    let sin = UnivariatePolynomial::from_i64(&[0, 2]);
    let cos = UnivariatePolynomial::from_i64(&[1, 0, -1]);
    let w = UnivariatePolynomial::from_i64(&[1, 0, 1]);
    let mut f = UnivariatePolynomial::zero();
    for ((a, b), c) in &terms {
        let term = sin
            .pow(*a)
            .mul(&cos.pow(*b))
            .mul(&w.pow(degree - a - b))
            .scale(&BigInt::from(*c));
        f = f.add(&term);
    }
    if f.is_zero() {
        return Err(Error::Degenerate(format!(
            "{condition} condition vanishes identically on the circle"
        )));
    }
    while let Some(q) = f.div_exact(&w) {
        f = q;
    }
    Ok(f.primitive())
}

/// A real root of the circle polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleRoot {
    pub t: f64,
    pub multiplicity: usize,
    /// `2·atan(t)`.
    pub theta: f64,
    /// Largest coordinate defect of the planar map at the circle point.
    pub residual: Option<f64>,
    /// The circle point is a genuine fixed point of the map.
    pub admitted: bool,
}

/// Circle polynomial with its real roots, each checked against the map.
pub fn circle_roots(
    pm: &PlanarMap,
    param: Parameterization,
    condition: CircleCondition,
) -> Result<(UnivariatePolynomial, Vec<CircleRoot>)> {
    let f = circle_polynomial(pm, param, condition)?;
    let roots = real_roots(&f)
        .into_iter()
        .map(|r| {
            let theta = 2.0 * r.value.atan();
            let p = param.point(theta);
            let residual = pm
                .evaluate(&p)
                .ok()
                .map(|e| (e.image[0] - p[0]).abs().max((e.image[1] - p[1]).abs()));
            CircleRoot {
                t: r.value,
                multiplicity: r.multiplicity,
                theta,
                residual,
                admitted: residual.is_some_and(|v| v < RESIDUAL_TOL),
            }
        })
        .collect();
    Ok((f, roots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_map;

    fn planar(name: &str) -> PlanarMap {
        load_map(name).unwrap().planar(Plane::Y0, 0).unwrap()
    }

    #[test]
    fn parameterization_parsing() {
        assert_eq!(
            Parameterization::parse("sin-x-cos-z", Plane::Y0).unwrap(),
            Parameterization::SinUCosV
        );
        assert_eq!(
            Parameterization::parse("cos-x-sin-y", Plane::Z0).unwrap(),
            Parameterization::CosUSinV
        );
        assert!(Parameterization::parse("sin-x-cos-y", Plane::Y0).is_err());
        assert_eq!(Parameterization::SinUCosV.label(Plane::Y0), "sin-x-cos-z");
    }

    #[test]
    fn three_qubit_degree_eight() {
        let f = circle_polynomial(
            &planar("311"),
            Parameterization::SinUCosV,
            CircleCondition::Collinear,
        )
        .unwrap();
        assert_eq!(
            f,
            UnivariatePolynomial::from_i64(&[-1, -2, 10, 10, 8, -6, -2, -2, 1])
        );
    }

    #[test]
    fn four_qubit_quintic_factor() {
        let quintic = UnivariatePolynomial::from_i64(&[-1, 1, 2, 6, -1, 1]);
        for cond in [
            CircleCondition::Collinear,
            CircleCondition::SinCoordinate,
            CircleCondition::CosCoordinate,
        ] {
            let f = circle_polynomial(&planar("411"), Parameterization::SinUCosV, cond).unwrap();
            assert!(quintic.divides(&f), "{cond}: {f}");
        }
    }

    #[test]
    fn six_qubit_sin_coordinate() {
        let f = circle_polynomial(
            &planar("612"),
            Parameterization::SinUCosV,
            CircleCondition::SinCoordinate,
        )
        .unwrap();
        let want = UnivariatePolynomial::linear(1)
            .pow(3)
            .mul(&UnivariatePolynomial::linear(-1).pow(5))
            .mul(&UnivariatePolynomial::from_i64(&[-1, -4, 1]))
            .mul(&UnivariatePolynomial::from_i64(&[1, -4, 1]));
        assert_eq!(f, want.primitive());
    }

    #[test]
    fn identity_is_degenerate() {
        let u = BivariatePolynomial::from_terms([([1, 0], 1)]);
        let v = BivariatePolynomial::from_terms([([0, 1], 1)]);
        let d = BivariatePolynomial::from_terms([([0, 0], 1)]);
        let pm = PlanarMap::from_parts("id", Plane::Y0, u, v, d, 1.0).unwrap();
        assert!(
            circle_polynomial(&pm, Parameterization::SinUCosV, CircleCondition::Collinear).is_err()
        );
    }
}
