//! Fixed angles of concatenated protocols.
//!
//! For maps that send pure states in a plane to pure states, each stage acts
//! on the unit circle as an angle map `φ`. A stage sequence (inner first)
//! composes these maps; its stable on-circle fixed points are the roots of
//! `φ(θ) − θ` with `|φ'(θ)| < 1`. Sequences sharing a prefix reuse the grid
//! images of that prefix.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{residual, EPS_DIV};
use crate::error::{Error, Result};
use crate::map::{PlanarMap, Plane};

#[derive(Clone, Debug, PartialEq)]
pub struct SurveyOptions {
    /// Open angle window in which fixed points are collected.
    pub window: (f64, f64),
    /// Points closer than this to a window edge are dropped.
    pub margin: f64,
    /// Angle samples used to bracket roots.
    pub grid: usize,
    /// Largest total number of stage sequences over all levels.
    pub sequence_cap: usize,
    pub dedup_tol: f64,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        Self {
            window: (0.0, FRAC_PI_2),
            margin: 1e-6,
            grid: 20_000,
            sequence_cap: 1 << 14,
            dedup_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyLevel {
    pub level: usize,
    pub sequences: usize,
    /// Number of distinct fixed-angle sets among the sequences.
    pub distinct_behaviors: usize,
    /// Sorted, de-duplicated stable fixed angles.
    pub thetas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaSurvey {
    pub bases: Vec<String>,
    pub plane: Plane,
    pub levels: Vec<SurveyLevel>,
    /// The sequence cap stopped the survey before `max_level`.
    pub partial: bool,
}

fn dedup_sorted(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&l| x - l > tol) {
            out.push(x);
        }
    }
    out
}

impl ThetaSurvey {
    /// Union of all levels' angles.
    pub fn all_thetas(&self) -> Vec<f64> {
        let tol = 1e-8;
        dedup_sorted(
            self.levels
                .iter()
                .flat_map(|l| l.thetas.iter().copied())
                .collect(),
            tol,
        )
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        let all = self.all_thetas();
        Some((*all.first()?, *all.last()?))
    }
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

const MAX_STAGE_DEGREE: usize = 63;

/// One stage restricted to the unit circle, with flattened coefficients.
struct CircleStage {
    sin_slot: usize,
    /// `(e_u, e_v, [c_u, c_v, c_d])` with the power-of-two scales folded in.
    terms: Vec<(usize, usize, [f64; 3])>,
    degree: [usize; 2],
}

impl CircleStage {
    fn new(pm: &PlanarMap) -> Result<Self> {
        let polys = [&pm.numerator_u, &pm.numerator_v, &pm.denominator];
        let mut merged: BTreeMap<(usize, usize), [f64; 3]> = BTreeMap::new();
        for (k, poly) in polys.iter().enumerate() {
            let s = poly.scale_factor();
            for (e, c) in poly.terms() {
                merged
                    .entry((e[0] as usize, e[1] as usize))
                    .or_insert([0.0; 3])[k] = c as f64 * s;
            }
        }
        let degree = [
            merged.keys().map(|k| k.0).max().unwrap_or(0),
            merged.keys().map(|k| k.1).max().unwrap_or(0),
        ];
        if degree.iter().any(|&d| d > MAX_STAGE_DEGREE) {
            return Err(Error::Degenerate(format!(
                "{} has degree above {MAX_STAGE_DEGREE}",
                pm.name
            )));
        }
        Ok(Self {
            sin_slot: pm.plane.sin_slot(),
            terms: merged.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
            degree,
        })
    }

    /// Image point and, if asked, its derivative along the circle.
    fn eval(&self, theta: f64, with_derivative: bool) -> Option<([f64; 2], [f64; 2])> {
        let (sn, cs) = theta.sin_cos();
        let mut p = [0.0; 2];
        p[self.sin_slot] = sn;
        p[1 - self.sin_slot] = cs;
        let mut pw = [[0.0; MAX_STAGE_DEGREE + 1]; 2];
        for i in 0..2 {
            let mut acc = 1.0;
            for slot in pw[i].iter_mut().take(self.degree[i] + 1) {
                *slot = acc;
                acc *= p[i];
            }
        }
        let mut val = [0.0; 3];
        let mut grad = [[0.0; 2]; 3];
        for &(a, b, c) in &self.terms {
            let m = pw[0][a] * pw[1][b];
            for k in 0..3 {
                val[k] += c[k] * m;
            }
            if with_derivative {
                let du = if a > 0 {
                    a as f64 * pw[0][a - 1] * pw[1][b]
                } else {
                    0.0
                };
                let dv = if b > 0 {
                    b as f64 * pw[0][a] * pw[1][b - 1]
                } else {
                    0.0
                };
                for k in 0..3 {
                    grad[k][0] += c[k] * du;
                    grad[k][1] += c[k] * dv;
                }
            }
        }
        let d = val[2];
        if !(d.abs() > EPS_DIV) {
            return None;
        }
        let q = [val[0] / d, val[1] / d];
        if !with_derivative {
            return Some((q, [0.0; 2]));
        }
        let mut dp = [0.0; 2];
        dp[self.sin_slot] = cs;
        dp[1 - self.sin_slot] = -sn;
        let dd = grad[2][0] * dp[0] + grad[2][1] * dp[1];
        let dq = std::array::from_fn(|k| {
            let dn = grad[k][0] * dp[0] + grad[k][1] * dp[1];
            (dn * d - val[k] * dd) / (d * d)
        });
        Some((q, dq))
    }

    fn angle(&self, q: [f64; 2]) -> f64 {
        q[self.sin_slot].atan2(q[1 - self.sin_slot])
    }

    /// `φ(θ)` alone.
    fn step(&self, theta: f64) -> Option<f64> {
        let (q, _) = self.eval(theta, false)?;
        (q[0] != 0.0 || q[1] != 0.0).then(|| self.angle(q))
    }

    /// `(φ(θ), φ'(θ))`.
    fn step_with_derivative(&self, theta: f64) -> Option<(f64, f64)> {
        let (q, dq) = self.eval(theta, true)?;
        let r2 = q[0] * q[0] + q[1] * q[1];
        if !(r2 > 0.0) {
            return None;
        }
        let (s, c) = (self.sin_slot, 1 - self.sin_slot);
        Some((self.angle(q), (q[c] * dq[s] - q[s] * dq[c]) / r2))
    }
}

struct Context<'a> {
    bases: &'a [PlanarMap],
    stages: Vec<CircleStage>,
    plane: Plane,
    opts: &'a SurveyOptions,
    grid: Vec<f64>,
    max_level: usize,
}

impl Context<'_> {
    fn phi(&self, seq: &[usize], theta: f64) -> Option<(f64, f64)> {
        let mut t = theta;
        let mut d = 1.0;
        for &i in seq {
            let (t2, d2) = self.stages[i].step_with_derivative(t)?;
            t = t2;
            d *= d2;
        }
        Some((t, d))
    }

    fn g(&self, seq: &[usize], theta: f64) -> Option<(f64, f64)> {
        self.phi(seq, theta)
            .map(|(t, d)| (wrap(t - theta), d - 1.0))
    }

    /// Safeguarded Newton on a bracket with `g(a) > 0 > g(b)`.
    fn refine(&self, seq: &[usize], mut a: f64, mut b: f64) -> Option<f64> {
        let mut x = 0.5 * (a + b);
        for _ in 0..100 {
            let (gx, dgx) = self.g(seq, x)?;
            if gx == 0.0 {
                return Some(x);
            }
            if gx > 0.0 {
                a = x;
            } else {
                b = x;
            }
            let newton = x - gx / dgx;
            let next = if newton.is_finite() && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if (next - x).abs() < 1e-15 || b - a < 1e-15 {
                return Some(next);
            }
            x = next;
        }
        Some(x)
    }

    /// Stable fixed angles of one sequence from its grid images.
    fn fixed_angles(&self, seq: &[usize], images: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.opts.window;
        let m = self.opts.margin;
        let mut out = Vec::new();
        for i in 0..self.grid.len() - 1 {
            let (ta, tb) = (self.grid[i], self.grid[i + 1]);
            let ga = wrap(images[i] - ta);
            let gb = wrap(images[i + 1] - tb);
            // A stable root has g decreasing through zero.
            if !(ga >= 0.0 && gb < 0.0) || ga.abs() >= 1.0 || gb.abs() >= 1.0 {
                continue;
            }
            let Some(root) = self.refine(seq, ta, tb) else {
                continue;
            };
            if root <= lo + m || root >= hi - m {
                continue;
            }
            let Some((_, d)) = self.phi(seq, root) else {
                continue;
            };
            if d.abs() >= 1.0 || !self.on_circle_fixed(seq, root) {
                continue;
            }
            out.push(root);
        }
        dedup_sorted(out, self.opts.dedup_tol)
    }

    /// The planar composition fixes the circle point itself.
    fn on_circle_fixed(&self, seq: &[usize], theta: f64) -> bool {
        let maps: Vec<crate::dynamics::Stage<2>> = seq
            .iter()
            .map(|&i| std::sync::Arc::new(self.bases[i].clone()) as crate::dynamics::Stage<2>)
            .collect();
        let Ok(c) = crate::dynamics::compose(maps) else {
            return false;
        };
        residual(&c, &self.plane.circle_point(theta)).is_ok_and(|r| r < 1e-9)
    }

    /// Depth-first over sequences extending `prefix`, whose grid images are `images`.
    fn explore(&self, prefix: Vec<usize>, images: Vec<f64>) -> Vec<(Vec<usize>, Vec<f64>)> {
        let mut out = Vec::new();
        if !prefix.is_empty() {
            out.push((prefix.clone(), self.fixed_angles(&prefix, &images)));
        }
        if prefix.len() == self.max_level {
            return out;
        }
        let child = |i: usize| {
            let next: Vec<f64> = images
                .iter()
                .map(|&t| {
                    if !t.is_finite() {
                        return f64::NAN;
                    }
                    self.stages[i].step(t).unwrap_or(f64::NAN)
                })
                .collect();
            let mut seq = prefix.clone();
            seq.push(i);
            self.explore(seq, next)
        };
        let children: Vec<Vec<(Vec<usize>, Vec<f64>)>> = if prefix.len() < 4 {
            (0..self.bases.len()).into_par_iter().map(child).collect()
        } else {
            (0..self.bases.len()).map(child).collect()
        };
        out.extend(children.into_iter().flatten());
        out
    }
}

/// Stable on-circle fixed angles of all stage sequences up to `max_level`.
pub fn concat_survey(
    bases: &[PlanarMap],
    max_level: usize,
    opts: &SurveyOptions,
) -> Result<ThetaSurvey> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Degenerate("survey needs at least one base map".into()))?;
    let plane = first.plane;
    if let Some(b) = bases.iter().find(|b| b.plane != plane) {
        return Err(Error::PlaneMismatch(format!(
            "base {} lives in {}, expected {plane}",
            b.name, b.plane
        )));
    }
    if opts.grid < 2 {
        return Err(Error::Degenerate(
            "survey grid needs at least two samples".into(),
        ));
    }
    let m = bases.len();
    let mut levels_run = 0;
    let mut total = 0usize;
    let mut partial = false;
    for level in 1..=max_level {
        let count = m.checked_pow(level as u32).unwrap_or(usize::MAX);
        if total.saturating_add(count) > opts.sequence_cap {
            partial = true;
            break;
        }
        total += count;
        levels_run = level;
    }
    let (lo, hi) = opts.window;
    let pad = 0.01;
    let grid: Vec<f64> = (0..opts.grid)
        .map(|i| lo - pad + (hi - lo + 2.0 * pad) * i as f64 / (opts.grid - 1) as f64)
        .collect();
    let ctx = Context {
        bases,
        stages: bases.iter().map(CircleStage::new).collect::<Result<_>>()?,
        plane,
        opts,
        grid: grid.clone(),
        max_level: levels_run,
    };
    let start = grid.clone();
    let results = if levels_run == 0 {
        Vec::new()
    } else {
        ctx.explore(Vec::new(), start)
    };

    let mut levels = Vec::with_capacity(levels_run);
    for level in 1..=levels_run {
        let per: Vec<&Vec<f64>> = results
            .iter()
            .filter(|(s, _)| s.len() == level)
            .map(|(_, t)| t)
            .collect();
        let behaviors: HashSet<Vec<i64>> = per
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|t| (t / opts.dedup_tol).round() as i64)
                    .collect()
            })
            .collect();
        levels.push(SurveyLevel {
            level,
            sequences: per.len(),
            distinct_behaviors: behaviors.len(),
            thetas: dedup_sorted(
                per.iter().flat_map(|t| t.iter().copied()).collect(),
                opts.dedup_tol,
            ),
        });
    }
    Ok(ThetaSurvey {
        bases: bases.iter().map(|b| b.name.clone()).collect(),
        plane,
        levels,
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_map;

    fn base(name: &str) -> PlanarMap {
        load_map(name).unwrap().planar(Plane::Y0, 0).unwrap()
    }

    fn small() -> SurveyOptions {
        SurveyOptions {
            grid: 4000,
            ..Default::default()
        }
    }

    #[test]
    fn single_base_keeps_its_angle() {
        let s = concat_survey(&[base("311")], 4, &small()).unwrap();
        let want = ((5f64.sqrt() - 1.0) / 2.0).sqrt().atan();
        for l in &s.levels {
            assert_eq!(l.thetas.len(), 1, "level {}", l.level);
            assert!((l.thetas[0] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn level_one_matches_bases() {
        let s = concat_survey(&[base("311"), base("411")], 2, &small()).unwrap();
        assert_eq!(s.levels[0].thetas.len(), 2);
        assert!((s.levels[0].thetas[1] - 0.73146).abs() < 1e-4);
        assert_eq!(s.levels[1].sequences, 4);
    }

    #[test]
    fn cap_marks_partial() {
        let opts = SurveyOptions {
            sequence_cap: 6,
            ..small()
        };
        let s = concat_survey(&[base("311"), base("411")], 5, &opts).unwrap();
        assert!(s.partial);
        assert_eq!(s.levels.len(), 2);
    }

    #[test]
    fn mixed_planes_rejected() {
        let z = load_map("steane").unwrap().planar(Plane::Z0, 0).unwrap();
        assert!(matches!(
            concat_survey(&[base("311"), z], 1, &small()),
            Err(Error::PlaneMismatch(_))
        ));
    }
}
