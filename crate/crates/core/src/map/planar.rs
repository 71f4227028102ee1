use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::poly::{BivariatePolynomial, TrivariatePolynomial};
use super::{fixed_plane_check, DistillationMap};
use crate::error::{Error, Result};

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Coordinate plane through the origin of the Bloch ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Z0,
    Y0,
    X0,
}

impl Plane {
    /// Axis held at zero.
    pub fn fixed_axis(self) -> usize {
        match self {
            Plane::Z0 => 2,
            Plane::Y0 => 1,
            Plane::X0 => 0,
        }
    }

    /// The two in-plane axes `(u, v)` in ascending order.
    pub fn axes(self) -> [usize; 2] {
        match self {
            Plane::Z0 => [0, 1],
            Plane::Y0 => [0, 2],
            Plane::X0 => [1, 2],
        }
    }

    /// Slot (0 = u, 1 = v) that carries `sin θ` on the unit circle.
    /// z=0 uses `(cos θ, sin θ)`; y=0 and x=0 use `(sin θ, cos θ)`.
    pub fn sin_slot(self) -> usize {
        match self {
            Plane::Z0 => 1,
            Plane::Y0 | Plane::X0 => 0,
        }
    }

    pub fn axis_names(self) -> [&'static str; 2] {
        self.axes().map(|a| AXIS_NAMES[a])
    }

    pub fn embed(self, uv: [f64; 2]) -> [f64; 3] {
        let mut p = [0.0; 3];
        let [a, b] = self.axes();
        p[a] = uv[0];
        p[b] = uv[1];
        p
    }

    pub fn project(self, p: [f64; 3]) -> [f64; 2] {
        let [a, b] = self.axes();
        [p[a], p[b]]
    }

    /// Point on the unit circle at angle `theta`.
    pub fn circle_point(self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        if self.sin_slot() == 0 {
            [s, c]
        } else {
            [c, s]
        }
    }

    pub fn theta_of(self, uv: [f64; 2]) -> f64 {
        let s = self.sin_slot();
        uv[s].atan2(uv[1 - s])
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plane::Z0 => "z0",
            Plane::Y0 => "y0",
            Plane::X0 => "x0",
        })
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z0" | "z=0" | "xy" => Ok(Plane::Z0),
            "y0" | "y=0" | "xz" => Ok(Plane::Y0),
            "x0" | "x=0" | "yz" => Ok(Plane::X0),
            other => Err(Error::Degenerate(format!("unknown plane {other:?}"))),
        }
    }
}

/// Two-dimensional restriction of one output of a [`DistillationMap`].
///
/// The numerators and denominator are integer polynomials in the in-plane
/// coordinates `(u, v)`; the success probability is
/// `denominator(u, v) * p_s_factor`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarMap {
    pub name: String,
    pub plane: Plane,
    pub output_index: usize,
    pub numerator_u: BivariatePolynomial,
    pub numerator_v: BivariatePolynomial,
    pub denominator: BivariatePolynomial,
    pub p_s_factor: f64,
    pub gauge_count: usize,
    pub warning: Option<String>,
}

fn project_poly(p: &TrivariatePolynomial, plane: Plane, lift: u32) -> BivariatePolynomial {
    let [a, b] = plane.axes();
    let restricted = p.restrict_zero(plane.fixed_axis());
    let factor = 1i64 << lift;
    BivariatePolynomial::from_terms(restricted.terms().map(|(e, c)| ([e[a], e[b]], c * factor)))
}

fn content(polys: &[&BivariatePolynomial]) -> i64 {
    polys
        .iter()
        .flat_map(|p| p.terms().map(|(_, c)| c))
        .fold(0i64, |g, c| g.gcd(&c))
}

fn divide(p: &BivariatePolynomial, d: i64) -> BivariatePolynomial {
    BivariatePolynomial::from_terms(p.terms().map(|(e, c)| (e, c / d)))
}

impl PlanarMap {
    /// Assembles a planar map from integer polynomials, normalizing the
    /// shared content so the denominator's constant term is positive.
    pub fn from_parts(
        name: &str,
        plane: Plane,
        numerator_u: BivariatePolynomial,
        numerator_v: BivariatePolynomial,
        denominator: BivariatePolynomial,
        p_s_factor: f64,
    ) -> Result<Self> {
        if denominator.is_empty() {
            return Err(Error::Degenerate("planar map with zero denominator".into()));
        }
        let mut g = content(&[&numerator_u, &numerator_v, &denominator]);
        let lead = denominator.coefficient([0, 0]);
        let lead = if lead != 0 {
            lead
        } else {
            denominator.terms().next().map(|t| t.1).unwrap_or(1)
        };
        if lead < 0 {
            g = -g;
        }
        Ok(Self {
            name: name.to_string(),
            plane,
            output_index: 0,
            numerator_u: divide(&numerator_u, g),
            numerator_v: divide(&numerator_v, g),
            denominator: divide(&denominator, g),
            p_s_factor: p_s_factor * g as f64,
            gauge_count: 0,
            warning: None,
        })
    }

    pub fn numerator(&self, slot: usize) -> &BivariatePolynomial {
        if slot == 0 {
            &self.numerator_u
        } else {
            &self.numerator_v
        }
    }

    /// The same dynamics expressed in another plane, matching the angle
    /// conventions of the two planes. This is a relabeling of Pauli axes on
    /// input and output, swapping `u` and `v` when the planes place `sin θ`
    /// in different slots.
    pub fn transported_to(&self, plane: Plane) -> Self {
        let mut out = self.clone();
        out.plane = plane;
        if plane.sin_slot() != self.plane.sin_slot() {
            let swap = |p: &BivariatePolynomial| {
                BivariatePolynomial::from_terms(p.terms().map(|(e, c)| ([e[1], e[0]], c)))
            };
            out.numerator_u = swap(&self.numerator_v);
            out.numerator_v = swap(&self.numerator_u);
            out.denominator = swap(&self.denominator);
        }
        out
    }

    /// JSON record with `[w_x, w_y, w_z, coeff]` monomial rows.
    pub fn export_json(&self) -> serde_json::Value {
        let [a, b] = self.plane.axes();
        let rows = |p: &BivariatePolynomial| -> Vec<[i64; 4]> {
            p.terms()
                .map(|(e, c)| {
                    let mut r = [0i64, 0, 0, c];
                    r[a] = e[0] as i64;
                    r[b] = e[1] as i64;
                    r
                })
                .collect()
        };
        let [nu, nv] = self.plane.axis_names();
        let mut obj = serde_json::Map::new();
        obj.insert("name".into(), json!(self.name));
        obj.insert("plane".into(), json!(self.plane.to_string()));
        obj.insert("output_index".into(), json!(self.output_index));
        obj.insert("p_s_factor".into(), json!(self.p_s_factor));
        obj.insert("gauge_count".into(), json!(self.gauge_count));
        obj.insert("denominator".into(), json!(rows(&self.denominator)));
        obj.insert(format!("numerator_{nu}"), json!(rows(&self.numerator_u)));
        obj.insert(format!("numerator_{nv}"), json!(rows(&self.numerator_v)));
        if let Some(w) = &self.warning {
            obj.insert("warning".into(), json!(w));
        }
        serde_json::Value::Object(obj)
    }
}

/// Restricts output `output_index` of `map` to `plane`.
pub fn reduce_to_plane(
    map: &DistillationMap,
    plane: Plane,
    output_index: usize,
) -> Result<PlanarMap> {
    let out = map.output(output_index)?;
    let [a, b] = plane.axes();
    let scale = [&map.p_s, out.axis(a), out.axis(b)]
        .iter()
        .map(|p| p.scale_exp())
        .max()
        .unwrap_or(0);
    let lift = |p: &TrivariatePolynomial| project_poly(p, plane, scale - p.scale_exp());
    let mut pm = PlanarMap::from_parts(
        &map.name,
        plane,
        lift(out.axis(a)),
        lift(out.axis(b)),
        lift(&map.p_s),
        (-(scale as f64)).exp2(),
    )?;
    pm.output_index = output_index;
    pm.gauge_count = map.gauge_count;
    let check = fixed_plane_check(map, plane);
    if let Some((i, m)) = check.witness {
        pm.warning = Some(format!(
            "plane {plane} is not invariant: output {i} has monomial x^{} y^{} z^{} off the plane",
            m[0], m[1], m[2]
        ));
    }
    Ok(pm)
}

impl DistillationMap {
    pub fn planar(&self, plane: Plane, output_index: usize) -> Result<PlanarMap> {
        reduce_to_plane(self, plane, output_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_conventions() {
        let t = 0.3f64;
        assert_eq!(Plane::Z0.circle_point(t), [t.cos(), t.sin()]);
        assert_eq!(Plane::Y0.circle_point(t), [t.sin(), t.cos()]);
        for plane in [Plane::Z0, Plane::Y0, Plane::X0] {
            assert!((plane.theta_of(plane.circle_point(t)) - t).abs() < 1e-15);
            let p = plane.embed([0.1, 0.2]);
            assert_eq!(p[plane.fixed_axis()], 0.0);
            assert_eq!(plane.project(p), [0.1, 0.2]);
        }
        assert_eq!("y0".parse::<Plane>().unwrap(), Plane::Y0);
        assert!("w0".parse::<Plane>().is_err());
    }

    #[test]
    fn transport_swaps_slots() {
        let u = BivariatePolynomial::from_terms([([3, 0], 1)]);
        let v = BivariatePolynomial::from_terms([([0, 3], 1)]);
        let d = BivariatePolynomial::from_terms([([0, 0], 1), ([2, 0], 1)]);
        let pm = PlanarMap::from_parts("t", Plane::Z0, u, v, d, 1.0).unwrap();
        let moved = pm.transported_to(Plane::Y0);
        assert_eq!(
            moved.numerator_u,
            BivariatePolynomial::from_terms([([3, 0], 1)])
        );
        assert_eq!(
            moved.denominator,
            BivariatePolynomial::from_terms([([0, 0], 1), ([0, 2], 1)])
        );
        assert_eq!(moved.transported_to(Plane::Z0), pm);
    }

    #[test]
    fn content_normalized() {
        let u = BivariatePolynomial::from_terms([([1, 0], -4)]);
        let v = BivariatePolynomial::from_terms([([0, 1], 6)]);
        let d = BivariatePolynomial::from_terms([([0, 0], -2)]);
        let pm = PlanarMap::from_parts("c", Plane::Z0, u, v, d, 0.25).unwrap();
        assert_eq!(pm.denominator.coefficient([0, 0]), 1);
        assert_eq!(pm.numerator_u.coefficient([1, 0]), 2);
        assert_eq!(pm.p_s_factor, -0.5);
    }
}
