//! Evaluation and analysis of distillation maps as discrete dynamical systems.

mod circle;
mod fixed;
pub mod linalg;
mod univariate;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use circle::{circle_polynomial, circle_roots, CircleCondition, CircleRoot, Parameterization};
pub use fixed::{
    classify_fixed_point, convergence_order, find_fixed_points, newton_refine, residual,
    stability_of, ConvergenceOrder, FixedPointRecord, FixedPointSearch, SearchRegion, Stability,
    DEDUP_TOL, DEFAULT_GRID, MARGINAL_BAND, MAX_NEWTON_ITER, NEWTON_TOL, RESIDUAL_TOL,
};
pub use linalg::Matrix;
pub use univariate::{real_roots, RealRoot, UnivariatePolynomial, ROOT_TOLERANCE};

use crate::error::{Error, Result};
use crate::map::{DistillationMap, PlanarMap, Plane, SparsePolynomial, TrivariatePolynomial};

/// Smallest success probability treated as nonzero.
pub const EPS_DIV: f64 = 1e-300;

/// Bloch vector `(x, y, z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    pub const BALL_TOL: f64 = 1e-12;

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        norm(&self.to_array())
    }

    pub fn is_physical(self) -> bool {
        self.norm() <= 1.0 + Self::BALL_TOL
    }
}

impl From<[f64; 3]> for BlochPoint {
    fn from(p: [f64; 3]) -> Self {
        Self::new(p[0], p[1], p[2])
    }
}

pub fn norm<const D: usize>(p: &[f64; D]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Result of applying a map once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation<const D: usize> {
    pub image: [f64; D],
    /// Post-selection success probability.
    pub p_s: f64,
    /// Success probability including accepted gauge outcomes, `p_s · 2^{n_g}`.
    /// Exact only where every gauge outcome is equally likely, as in the
    /// analysis plane of the catalog codes.
    pub p_s_all: f64,
}

/// A rational map on `D` coordinates.
pub trait RationalMap<const D: usize>: Send + Sync {
    fn label(&self) -> String;

    /// Plane a two-dimensional map lives in; `None` for full Bloch-ball maps.
    fn frame(&self) -> Option<Plane>;

    fn evaluate(&self, p: &[f64; D]) -> Result<Evaluation<D>>;

    /// Exact Jacobian of the image coordinates.
    fn jacobian(&self, p: &[f64; D]) -> Result<Matrix<D>>;

    /// True when every point is mapped to itself.
    fn is_identity(&self) -> bool {
        false
    }
}

fn singular<const D: usize>(p: &[f64; D], p_s: f64) -> Error {
    Error::Singular {
        point: p.to_vec(),
        p_s,
    }
}

/// One logical output of a [`DistillationMap`] as a map on the Bloch ball.
#[derive(Clone, Debug)]
pub struct OutputMap {
    pub map: DistillationMap,
    pub index: usize,
}

impl DistillationMap {
    pub fn output_map(&self, index: usize) -> Result<OutputMap> {
        self.output(index)?;
        Ok(OutputMap {
            map: self.clone(),
            index,
        })
    }
}

fn gauge_multiplier(gauge_count: usize) -> f64 {
    (gauge_count as f64).exp2()
}

impl OutputMap {
    fn numerators(&self) -> [&TrivariatePolynomial; 3] {
        let o = &self.map.outputs[self.index];
        [&o.x, &o.y, &o.z]
    }
}

impl RationalMap<3> for OutputMap {
    fn label(&self) -> String {
        if self.map.k() > 1 {
            format!("{}[{}]", self.map.name, self.index)
        } else {
            self.map.name.clone()
        }
    }

    fn frame(&self) -> Option<Plane> {
        None
    }

    fn evaluate(&self, p: &[f64; 3]) -> Result<Evaluation<3>> {
        let p_s = self.map.p_s.eval(p);
        if !(p_s.abs() > EPS_DIV) {
            return Err(singular(p, p_s));
        }
        let t = self.numerators();
        Ok(Evaluation {
            image: std::array::from_fn(|j| t[j].eval(p) / p_s),
            p_s,
            p_s_all: p_s * gauge_multiplier(self.map.gauge_count),
        })
    }

    fn jacobian(&self, p: &[f64; 3]) -> Result<Matrix<3>> {
        let (d, gd) = self.map.p_s.eval_with_gradient(p);
        if !(d.abs() > EPS_DIV) {
            return Err(singular(p, d));
        }
        let t = self.numerators();
        Ok(std::array::from_fn(|i| {
            let (n, gn) = t[i].eval_with_gradient(p);
            std::array::from_fn(|j| (gn[j] * d - n * gd[j]) / (d * d))
        }))
    }

    fn is_identity(&self) -> bool {
        let p = &self.map.p_s;
        if p.len() != 1 || p.coefficient([0, 0, 0]) == 0 {
            return false;
        }
        let c = p.coefficient([0, 0, 0]);
        self.numerators().iter().enumerate().all(|(j, t)| {
            let mut e = [0u32; 3];
            e[j] = 1;
            **t == SparsePolynomial::from_terms([(e, c)]).with_scale(p.scale_exp())
        })
    }
}

impl RationalMap<2> for PlanarMap {
    fn label(&self) -> String {
        self.name.clone()
    }

    fn frame(&self) -> Option<Plane> {
        Some(self.plane)
    }

    fn evaluate(&self, p: &[f64; 2]) -> Result<Evaluation<2>> {
        let d = self.denominator.eval(p);
        let p_s = d * self.p_s_factor;
        if !(p_s.abs() > EPS_DIV) {
            return Err(singular(p, p_s));
        }
        Ok(Evaluation {
            image: [self.numerator_u.eval(p) / d, self.numerator_v.eval(p) / d],
            p_s,
            p_s_all: p_s * gauge_multiplier(self.gauge_count),
        })
    }

    fn jacobian(&self, p: &[f64; 2]) -> Result<Matrix<2>> {
        let (d, gd) = self.denominator.eval_with_gradient(p);
        if !((d * self.p_s_factor).abs() > EPS_DIV) {
            return Err(singular(p, d * self.p_s_factor));
        }
        let nums = [&self.numerator_u, &self.numerator_v];
        Ok(std::array::from_fn(|i| {
            let (n, gn) = nums[i].eval_with_gradient(p);
            std::array::from_fn(|j| (gn[j] * d - n * gd[j]) / (d * d))
        }))
    }

    fn is_identity(&self) -> bool {
        let d = &self.denominator;
        if d.len() != 1 || d.coefficient([0, 0]) == 0 {
            return false;
        }
        let c = d.coefficient([0, 0]);
        self.numerator_u == SparsePolynomial::from_terms([([1, 0], c)])
            && self.numerator_v == SparsePolynomial::from_terms([([0, 1], c)])
    }
}

/// Shared handle to any map on `D` coordinates.
pub type Stage<const D: usize> = Arc<dyn RationalMap<D>>;

/// Stages applied inner (first) to outer (last).
#[derive(Clone)]
pub struct ComposedMap<const D: usize> {
    stages: Vec<Stage<D>>,
    frame: Option<Plane>,
}

impl<const D: usize> std::fmt::Debug for ComposedMap<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComposedMap")
            .field("label", &self.label())
            .field("frame", &self.frame)
            .finish()
    }
}

/// Composes stages, inner first. All stages must share a frame.
pub fn compose<const D: usize>(stages: Vec<Stage<D>>) -> Result<ComposedMap<D>> {
    let first = stages
        .first()
        .ok_or_else(|| Error::Degenerate("composition needs at least one stage".into()))?;
    let frame = first.frame();
    for s in &stages[1..] {
        if s.frame() != frame {
            return Err(Error::PlaneMismatch(format!(
                "stage {} lives in {:?}, expected {:?}",
                s.label(),
                s.frame(),
                frame
            )));
        }
    }
    Ok(ComposedMap { stages, frame })
}

impl<const D: usize> ComposedMap<D> {
    pub fn stages(&self) -> &[Stage<D>] {
        &self.stages
    }
}

impl<const D: usize> RationalMap<D> for ComposedMap<D> {
    fn label(&self) -> String {
        let names: Vec<String> = self.stages.iter().map(|s| s.label()).collect();
        names.join(" -> ")
    }

    fn frame(&self) -> Option<Plane> {
        self.frame
    }

    /// The success probabilities are the product over stages along the orbit.
    fn evaluate(&self, p: &[f64; D]) -> Result<Evaluation<D>> {
        let mut ev = Evaluation {
            image: *p,
            p_s: 1.0,
            p_s_all: 1.0,
        };
        for s in &self.stages {
            let e = s.evaluate(&ev.image)?;
            ev = Evaluation {
                image: e.image,
                p_s: ev.p_s * e.p_s,
                p_s_all: ev.p_s_all * e.p_s_all,
            };
        }
        Ok(ev)
    }

    fn jacobian(&self, p: &[f64; D]) -> Result<Matrix<D>> {
        let mut j = linalg::identity::<D>();
        let mut q = *p;
        for s in &self.stages {
            j = linalg::mat_mul(&s.jacobian(&q)?, &j);
            q = s.evaluate(&q)?.image;
        }
        Ok(j)
    }

    fn is_identity(&self) -> bool {
        self.stages.iter().all(|s| s.is_identity())
    }
}

/// Orbit of repeated application.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    /// `points[0]` is the start; `points[t + 1]` is the image of `points[t]`.
    pub points: Vec<Vec<f64>>,
    /// `p_s[t]` is the success probability of the step from `points[t]`.
    pub p_s: Vec<f64>,
    pub truncated: bool,
    pub message: Option<String>,
}

pub fn iterate<const D: usize>(
    map: &dyn RationalMap<D>,
    start: [f64; D],
    rounds: usize,
) -> Trajectory {
    let mut points = vec![start.to_vec()];
    let mut p_s = Vec::with_capacity(rounds);
    let mut p = start;
    for _ in 0..rounds {
        match map.evaluate(&p) {
            Ok(e) => {
                p = e.image;
                points.push(p.to_vec());
                p_s.push(e.p_s);
            }
            Err(e) => {
                return Trajectory {
                    points,
                    p_s,
                    truncated: true,
                    message: Some(e.to_string()),
                }
            }
        }
    }
    Trajectory {
        points,
        p_s,
        truncated: false,
        message: None,
    }
}

/// Central finite-difference Jacobian, used for cross-checks.
pub fn finite_difference_jacobian<const D: usize>(
    map: &dyn RationalMap<D>,
    p: &[f64; D],
    step: f64,
) -> Result<Matrix<D>> {
    let mut j = [[0.0; D]; D];
    for col in 0..D {
        let mut a = *p;
        let mut b = *p;
        a[col] += step;
        b[col] -= step;
        let fa = map.evaluate(&a)?.image;
        let fb = map.evaluate(&b)?.image;
        for row in 0..D {
            j[row][col] = (fa[row] - fb[row]) / (2.0 * step);
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_map;

    fn planar(name: &str, plane: Plane) -> PlanarMap {
        load_map(name).unwrap().planar(plane, 0).unwrap()
    }

    #[test]
    fn five_qubit_fixes_t_state() {
        let pm = planar("513", Plane::Z0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e = pm.evaluate(&[h, h]).unwrap();
        assert!((e.image[0] - h).abs() < 1e-15 && (e.image[1] - h).abs() < 1e-15);
        assert!((pm.denominator.eval(&[h, h]) - 9.0 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn steane_denominator_at_t() {
        let pm = planar("steane", Plane::Z0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pm.denominator.eval(&[h, h]) - 4.5).abs() < 1e-14);
        let j = pm.jacobian(&[h, h]).unwrap();
        let want = [[14.0 / 9.0, -7.0 / 9.0], [-7.0 / 9.0, 14.0 / 9.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[i][k] - want[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn origin_is_fixed_with_linear_jacobian() {
        let m = load_map("311").unwrap();
        let om = m.output_map(0).unwrap();
        let e = om.evaluate(&[0.0; 3]).unwrap();
        assert_eq!(e.image, [0.0; 3]);
        assert_eq!(e.p_s, 0.25);
        let j = om.jacobian(&[0.0; 3]).unwrap();
        for (i, row) in j.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let mut ex = [0u32; 3];
                ex[k] = 1;
                let c = m.outputs[0].axis(i).coefficient(ex) as f64 / 4.0;
                assert!((v - c / 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gauge_multiplier_applies() {
        let m = load_map("15").unwrap();
        let e = m.output_map(0).unwrap().evaluate(&[0.0; 3]).unwrap();
        assert_eq!(e.p_s, 2f64.powi(-14));
        assert_eq!(e.p_s_all, 2f64.powi(-4));
    }

    #[test]
    fn composition_chain_rule() {
        let pm: Stage<2> = Arc::new(planar("steane", Plane::Z0));
        let single = compose(vec![pm.clone()]).unwrap();
        let p = [0.3, 0.4];
        assert_eq!(single.evaluate(&p).unwrap(), pm.evaluate(&p).unwrap());
        let twice = compose(vec![pm.clone(), pm.clone()]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let j1 = pm.jacobian(&[h, h]).unwrap();
        let j2 = twice.jacobian(&[h, h]).unwrap();
        let sq = linalg::mat_mul(&j1, &j1);
        for i in 0..2 {
            for k in 0..2 {
                assert!((j2[i][k] - sq[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_planes_rejected() {
        let a: Stage<2> = Arc::new(planar("steane", Plane::Z0));
        let b: Stage<2> = Arc::new(planar("311", Plane::Y0));
        assert!(matches!(compose(vec![a, b]), Err(Error::PlaneMismatch(_))));
        assert!(compose::<2>(vec![]).is_err());
    }

    #[test]
    fn iterate_truncates_at_singularity() {
        let m = load_map("311").unwrap();
        let pm = m.planar(Plane::Y0, 0).unwrap();
        // 1 + xz + x^2 z vanishes at x = 1, z = -1/2.
        let t = iterate(&pm, [1.0, -0.5], 3);
        assert!(t.truncated);
        assert_eq!(t.points.len(), 1);
        let fixed = iterate(&pm, [0.0, 0.0], 4);
        assert!(!fixed.truncated);
        assert!(fixed.points.iter().all(|p| p == &vec![0.0, 0.0]));
    }
}
