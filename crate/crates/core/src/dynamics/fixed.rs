//! Fixed points: Newton refinement, grid search, stability and convergence order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{self, eigenvalues, Matrix};
use super::{norm, RationalMap};
use crate::error::{Error, Result};
use crate::map::Plane;

pub const NEWTON_TOL: f64 = 1e-12;
pub const MAX_NEWTON_ITER: usize = 100;
pub const DEFAULT_GRID: usize = 200;
pub const DEDUP_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const MARGINAL_BAND: f64 = 1e-9;
const SPHERE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Saddle,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Saddle => "saddle",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}

/// Classification from eigenvalue moduli.
pub fn stability_of(moduli: &[f64]) -> Stability {
    if moduli.iter().any(|m| (m - 1.0).abs() <= MARGINAL_BAND) {
        Stability::Marginal
    } else if moduli.iter().all(|&m| m < 1.0) {
        Stability::Stable
    } else if moduli.iter().all(|&m| m > 1.0) {
        Stability::Unstable
    } else {
        Stability::Saddle
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub point: Vec<f64>,
    /// Largest coordinate defect `|f(p) - p|`.
    pub residual: f64,
    pub jacobian: Vec<Vec<f64>>,
    /// `[re, im]` pairs, descending modulus.
    pub eigenvalues: Vec<[f64; 2]>,
    pub stability: Stability,
    pub on_sphere: bool,
    /// Angle on the analysis circle when the point is pure and in a coordinate plane.
    pub theta: Option<f64>,
    pub plane: Option<Plane>,
}

impl FixedPointRecord {
    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e[0].hypot(e[1])).collect()
    }
}

pub fn residual<const D: usize>(map: &dyn RationalMap<D>, p: &[f64; D]) -> Result<f64> {
    let img = map.evaluate(p)?.image;
    Ok((0..D).map(|i| (img[i] - p[i]).abs()).fold(0.0, f64::max))
}

/// Newton iteration on `f(p) - p`; `None` if it fails to converge.
pub fn newton_refine<const D: usize>(
    map: &dyn RationalMap<D>,
    start: [f64; D],
) -> Option<[f64; D]> {
    let mut p = start;
    for _ in 0..MAX_NEWTON_ITER {
        let img = map.evaluate(&p).ok()?.image;
        let g: [f64; D] = std::array::from_fn(|i| img[i] - p[i]);
        if g.iter().all(|v| v.abs() < NEWTON_TOL * 1e-2) {
            return Some(p);
        }
        let mut j = map.jacobian(&p).ok()?;
        for (i, row) in j.iter_mut().enumerate() {
            row[i] -= 1.0;
        }
        let step = linalg::solve(j, g.map(|v| -v))?;
        for i in 0..D {
            p[i] += step[i];
        }
        if !p.iter().all(|v| v.is_finite()) || norm(&p) > 2.0 {
            return None;
        }
        if norm(&step) < NEWTON_TOL {
            return Some(p);
        }
    }
    None
}

fn sphere_angle<const D: usize>(
    frame: Option<Plane>,
    p: &[f64; D],
) -> (Option<f64>, Option<Plane>) {
    if D == 2 {
        let plane = frame.unwrap_or(Plane::Z0);
        return (Some(plane.theta_of([p[0], p[1]])), Some(plane));
    }
    for plane in [Plane::Z0, Plane::Y0, Plane::X0] {
        if p[plane.fixed_axis()].abs() < SPHERE_TOL {
            let [a, b] = plane.axes();
            return (Some(plane.theta_of([p[a], p[b]])), Some(plane));
        }
    }
    (None, None)
}

fn record<const D: usize>(
    map: &dyn RationalMap<D>,
    p: [f64; D],
    res: f64,
) -> Result<FixedPointRecord> {
    let j: Matrix<D> = map.jacobian(&p)?;
    let rows = linalg::to_rows(&j);
    let eig = eigenvalues(&rows);
    let moduli: Vec<f64> = eig.iter().map(|e| e.norm()).collect();
    let on_sphere = (norm(&p) - 1.0).abs() < SPHERE_TOL;
    let (theta, plane) = if on_sphere {
        sphere_angle(map.frame(), &p)
    } else {
        (None, map.frame())
    };
    Ok(FixedPointRecord {
        point: p.to_vec(),
        residual: res,
        jacobian: rows,
        eigenvalues: eig.iter().map(|e| [e.re, e.im]).collect(),
        stability: stability_of(&moduli),
        on_sphere,
        theta,
        plane: plane.or(map.frame()),
    })
}

/// Refines `p` with Newton and classifies it.
pub fn classify_fixed_point<const D: usize>(
    map: &dyn RationalMap<D>,
    p: [f64; D],
) -> Result<FixedPointRecord> {
    let refined = newton_refine(map, p)
        .filter(|q| norm(&(std::array::from_fn::<f64, D, _>(|i| q[i] - p[i]))) < 1e-6)
        .unwrap_or(p);
    let res = residual(map, &refined)?;
    if res >= RESIDUAL_TOL {
        return Err(Error::NotFixedPoint {
            point: refined.to_vec(),
            residual: res,
        });
    }
    record(map, refined, res)
}

/// Axis-aligned search box, intersected with the closed unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchRegion<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> Default for SearchRegion<D> {
    fn default() -> Self {
        Self {
            lo: [-1.0; D],
            hi: [1.0; D],
        }
    }
}

impl<const D: usize> SearchRegion<D> {
    fn seeds(&self, grid: usize) -> Vec<[f64; D]> {
        let g = grid.max(1);
        let total = g.pow(D as u32);
        (0..total)
            .filter_map(|mut idx| {
                let mut p = [0.0; D];
                for i in 0..D {
                    let k = idx % g;
                    idx /= g;
                    p[i] = if g == 1 {
                        0.5 * (self.lo[i] + self.hi[i])
                    } else {
                        self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (g - 1) as f64
                    };
                }
                (norm(&p) <= 1.0 + 1e-12).then_some(p)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointSearch {
    pub records: Vec<FixedPointRecord>,
    /// Every point is fixed; no records are produced.
    pub identity: bool,
    pub seeds: usize,
}

/// Grid-seeded Newton search. Results are sorted by coordinates and
/// de-duplicated, so output does not depend on scheduling.
pub fn find_fixed_points<const D: usize>(
    map: &dyn RationalMap<D>,
    region: &SearchRegion<D>,
    grid: usize,
) -> FixedPointSearch {
    let seeds = region.seeds(grid);
    if map.is_identity() {
        return FixedPointSearch {
            records: Vec::new(),
            identity: true,
            seeds: seeds.len(),
        };
    }
    let mut found: Vec<[f64; D]> = seeds
        .par_iter()
        .filter_map(|&s| newton_refine(map, s))
        .filter(|p| norm(p) <= 1.0 + SPHERE_TOL)
        .filter(|p| residual(map, p).is_ok_and(|r| r < RESIDUAL_TOL))
        .collect();
    found.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut unique: Vec<[f64; D]> = Vec::new();
    for p in found {
        let dup = unique
            .iter()
            .any(|q| (0..D).all(|i| (p[i] - q[i]).abs() <= DEDUP_TOL));
        if !dup {
            unique.push(p);
        }
    }
    let records = unique
        .into_iter()
        .filter_map(|p| {
            let res = residual(map, &p).ok()?;
            record(map, p, res).ok()
        })
        .collect();
    FixedPointSearch {
        records,
        identity: false,
        seeds: seeds.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceOrder {
    pub order: i64,
    /// Least-squares slope of `log |offset out|` against `log |offset in|`.
    pub slope: f64,
    /// `|offset out| / |offset in|^order` extrapolated to zero offset.
    pub prefactor: f64,
    /// `(offset in, offset out)` samples used in the fit.
    pub samples: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Offsets below this image displacement are dominated by rounding.
const NOISE_FLOOR: f64 = 1e-13;

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Local order of error suppression along `direction` from a fixed point,
/// sampled at offsets `10^-2 … 10^-5` in half-decade steps.
pub fn convergence_order<const D: usize>(
    map: &dyn RationalMap<D>,
    fp: &FixedPointRecord,
    direction: [f64; D],
) -> Result<ConvergenceOrder> {
    if fp.point.len() != D {
        return Err(Error::Dimension {
            expected: D,
            actual: fp.point.len(),
        });
    }
    let p: [f64; D] = std::array::from_fn(|i| fp.point[i]);
    let dn = norm(&direction);
    if dn == 0.0 {
        return Err(Error::Degenerate("zero direction".into()));
    }
    let d = direction.map(|v| v / dn);
    let fixed = map.evaluate(&p)?.image;
    let mut warnings = Vec::new();
    let mut samples = Vec::new();
    for k in 0..=6 {
        let h = 10f64.powf(-2.0 - 0.5 * k as f64);
        let q: [f64; D] = std::array::from_fn(|i| p[i] + h * d[i]);
        let img = map.evaluate(&q)?.image;
        let out = norm(&std::array::from_fn::<f64, D, _>(|i| img[i] - fixed[i]));
        if out < NOISE_FLOOR {
            warnings.push(format!(
                "offset {h:e} dropped: image displacement {out:e} below noise floor"
            ));
            continue;
        }
        samples.push((h, out));
    }
    if samples.len() < 2 {
        return Err(Error::Degenerate("fewer than two usable offsets".into()));
    }
    let lx: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, _) = least_squares(&lx, &ly);
    let order = slope.round() as i64;
    if (slope - order as f64).abs() > 0.1 {
        warnings.push(format!("slope {slope:.6} is not close to an integer"));
    }
    let hs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ratios: Vec<f64> = samples
        .iter()
        .map(|s| s.1 / s.0.powi(order as i32))
        .collect();
    let (_, prefactor) = least_squares(&hs, &ratios);
    Ok(ConvergenceOrder {
        order,
        slope,
        prefactor,
        samples,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_map;
    use crate::dynamics::OutputMap;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    #[test]
    fn stability_rules() {
        assert_eq!(stability_of(&[0.5, 0.2]), Stability::Stable);
        assert_eq!(stability_of(&[2.0, 0.2]), Stability::Saddle);
        assert_eq!(stability_of(&[2.0, 1.5]), Stability::Unstable);
        assert_eq!(stability_of(&[1.0 + 5e-10, 0.2]), Stability::Marginal);
    }

    #[test]
    fn steane_t_state_is_saddle() {
        let pm = load_map("steane").unwrap().planar(Plane::Z0, 0).unwrap();
        let r = classify_fixed_point(&pm, [FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(r.stability, Stability::Saddle);
        assert!((r.eigenvalues[0][0] - 7.0 / 3.0).abs() < 1e-12);
        assert!((r.eigenvalues[1][0] - 7.0 / 9.0).abs() < 1e-12);
        assert!((r.theta.unwrap() - FRAC_PI_4).abs() < 1e-12);
        let co = convergence_order(&pm, &r, [-1.0, -1.0]).unwrap();
        assert_eq!(co.order, 1);
        assert!((co.prefactor - 7.0 / 9.0).abs() < 1e-4, "{}", co.prefactor);
    }

    #[test]
    fn not_fixed_rejected() {
        let pm = load_map("steane").unwrap().planar(Plane::Z0, 0).unwrap();
        assert!(matches!(
            classify_fixed_point(&pm, [0.5, 0.1]),
            Err(Error::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn identity_map_flagged() {
        let doc = "name: id\nn: 1\nk: 1\nlogical_x[0]: X\nlogical_z[0]: Z\n";
        let code = crate::code::parse_code(doc).unwrap();
        let m = crate::map::build_map(&code).unwrap();
        let om: OutputMap = m.output_map(0).unwrap();
        let s = find_fixed_points(&om, &SearchRegion::default(), 5);
        assert!(s.identity);
        assert!(s.records.is_empty());
        let pm = m.planar(Plane::Z0, 0).unwrap();
        assert!(find_fixed_points(&pm, &SearchRegion::default(), 5).identity);
    }

    #[test]
    fn three_dimensional_search_finds_origin() {
        let om = load_map("513").unwrap().output_map(0).unwrap();
        let s = find_fixed_points(&om, &SearchRegion::default(), 7);
        assert!(s
            .records
            .iter()
            .any(|r| r.point.iter().all(|v| v.abs() < 1e-12)));
        let t = s.records.iter().find(|r| {
            (r.point[0] - FRAC_1_SQRT_2).abs() < 1e-9 && (r.point[1] - FRAC_1_SQRT_2).abs() < 1e-9
        });
        assert!(t.is_some());
    }
}
