//! Protocol-level studies built on the dynamics: error curves, cost models,
//! concatenation surveys, box-counting dimension and flow fields.

mod fractal;
mod survey;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use fractal::{
    box_counting_dimension, BoxCounting, FitWindow, DEFAULT_MAX_EXPONENT, DEFAULT_MIN_WINDOW,
};
pub use survey::{concat_survey, SurveyLevel, SurveyOptions, ThetaSurvey};

use crate::dynamics::{norm, RationalMap};
use crate::error::{Error, Result};
use crate::map::Plane;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub eps_in: f64,
    pub eps_out: f64,
    /// Product of the success probabilities over all rounds.
    pub p_s: f64,
    pub p_s_all: f64,
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorCurve {
    pub theta: f64,
    pub plane: Plane,
    pub rounds: usize,
    pub rows: Vec<ErrorRow>,
}

/// Log-log fit of a curve over an input range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveFit {
    pub slope: f64,
    pub order: i64,
    /// `eps_out / eps_in^order` extrapolated linearly to `eps_in = 0`.
    pub prefactor: f64,
    pub points: usize,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

impl ErrorCurve {
    pub fn fit(&self, lo: f64, hi: f64) -> Result<CurveFit> {
        let rows: Vec<&ErrorRow> = self
            .rows
            .iter()
            .filter(|r| {
                !r.singular && r.eps_in >= lo && r.eps_in <= hi && r.eps_in > 0.0 && r.eps_out > 0.0
            })
            .collect();
        if rows.len() < 2 {
            return Err(Error::Degenerate(
                "fewer than two usable rows in fit range".into(),
            ));
        }
        let lx: Vec<f64> = rows.iter().map(|r| r.eps_in.ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.eps_out.ln()).collect();
        let (slope, _) = least_squares(&lx, &ly);
        let order = slope.round() as i64;
        let xs: Vec<f64> = rows.iter().map(|r| r.eps_in).collect();
        let ratios: Vec<f64> = rows
            .iter()
            .map(|r| r.eps_out / r.eps_in.powi(order as i32))
            .collect();
        let (_, prefactor) = least_squares(&xs, &ratios);
        Ok(CurveFit {
            slope,
            order,
            prefactor,
            points: rows.len(),
        })
    }
}

/// Logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Infidelity after `rounds` applications for inputs on the depolarized
/// line `(1 − 2ε)·t` toward the target `t` at angle `theta`.
pub fn error_curve(
    map: &dyn RationalMap<2>,
    theta: f64,
    eps_grid: &[f64],
    rounds: usize,
) -> Result<ErrorCurve> {
    let plane = map
        .frame()
        .ok_or_else(|| Error::Degenerate("error curves need a planar map".into()))?;
    let target = plane.circle_point(theta);
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        if !(0.0..=0.5).contains(&eps) {
            return Err(Error::Degenerate(format!("eps_in {eps} outside [0, 1/2]")));
        }
        let mut p = target.map(|v| (1.0 - 2.0 * eps) * v);
        let mut p_s = 1.0;
        let mut p_s_all = 1.0;
        let mut singular = false;
        for _ in 0..rounds {
            match map.evaluate(&p) {
                Ok(e) => {
                    p = e.image;
                    p_s *= e.p_s;
                    p_s_all *= e.p_s_all;
                }
                Err(_) => {
                    singular = true;
                    break;
                }
            }
        }
        let overlap = p[0] * target[0] + p[1] * target[1];
        rows.push(ErrorRow {
            eps_in: eps,
            eps_out: if singular {
                f64::NAN
            } else {
                (1.0 - overlap) / 2.0
            },
            p_s: if singular { f64::NAN } else { p_s },
            p_s_all: if singular { f64::NAN } else { p_s_all },
            singular,
        });
    }
    rows.sort_by(|a, b| a.eps_in.total_cmp(&b.eps_in));
    Ok(ErrorCurve {
        theta,
        plane,
        rounds,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    LinearProtocol,
    ReedMuller,
    Synthesis,
}

/// Raw-state cost model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub kind: CostKind,
    pub n: usize,
    pub k: usize,
    pub p_s: f64,
    /// Linear suppression prefactor `ε_out ≈ k′ ε_in`.
    pub k_prime: f64,
    /// Constant of the synthesis model.
    pub c: f64,
}

/// `log₃ 15`.
pub fn reed_muller_gamma() -> f64 {
    15f64.ln() / 3f64.ln()
}

impl CostModel {
    pub fn linear(n: usize, k: usize, p_s: f64, k_prime: f64) -> Self {
        Self {
            kind: CostKind::LinearProtocol,
            n,
            k,
            p_s,
            k_prime,
            c: 1.0,
        }
    }

    pub fn reed_muller() -> Self {
        Self {
            kind: CostKind::ReedMuller,
            n: 15,
            k: 1,
            p_s: 1.0,
            k_prime: 0.0,
            c: 1.0,
        }
    }

    pub fn synthesis(c: f64) -> Self {
        Self {
            kind: CostKind::Synthesis,
            n: 0,
            k: 0,
            p_s: 1.0,
            k_prime: 0.0,
            c,
        }
    }

    /// `log(1/k′) / log(n/(k·p_s))` for the linear kind.
    pub fn beta(&self) -> Result<f64> {
        if !(self.k_prime > 0.0 && self.k_prime < 1.0) {
            return Err(Error::InvalidModel(format!(
                "k' = {} gives no error suppression",
                self.k_prime
            )));
        }
        if self.k == 0 || !(self.p_s > 0.0 && self.p_s <= 1.0) {
            return Err(Error::InvalidModel("need k >= 1 and 0 < p_s <= 1".into()));
        }
        let growth = self.n as f64 / (self.k as f64 * self.p_s);
        if !(growth > 1.0) {
            return Err(Error::InvalidModel("n / (k p_s) must exceed 1".into()));
        }
        Ok((1.0 / self.k_prime).ln() / growth.ln())
    }

    pub fn gamma(&self) -> f64 {
        reed_muller_gamma()
    }
}

/// Number of raw states needed to reach `eps_tar` from `eps_in`.
pub fn cost_estimate(model: &CostModel, eps_in: f64, eps_tar: f64) -> Result<f64> {
    if !(eps_tar > 0.0 && eps_tar < 1.0) {
        return Err(Error::InvalidModel(format!(
            "target error {eps_tar} outside (0, 1)"
        )));
    }
    match model.kind {
        CostKind::LinearProtocol => {
            let beta = model.beta()?;
            if !(eps_tar <= eps_in && eps_in < 0.5) {
                return Err(Error::InvalidModel(format!(
                    "need 0 < eps_tar <= eps_in < 1/2, got {eps_tar} and {eps_in}"
                )));
            }
            Ok((eps_in / eps_tar).powf(beta))
        }
        CostKind::ReedMuller => Ok((1.0 / eps_tar).ln().powf(reed_muller_gamma())),
        CostKind::Synthesis => Ok(model.c * (1.0 / eps_tar).ln()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowRow {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub p_s: f64,
    pub singular: bool,
}

/// Displacement `f(p) − p` on a `grid × grid` lattice over `region`
/// (`[u_lo, u_hi, v_lo, v_hi]`), keeping nodes inside the unit disk.
pub fn flow_field(map: &dyn RationalMap<2>, grid: usize, region: [f64; 4]) -> Vec<FlowRow> {
    let g = grid.max(2);
    let mut rows = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let u = region[0] + (region[1] - region[0]) * i as f64 / (g - 1) as f64;
            let v = region[2] + (region[3] - region[2]) * j as f64 / (g - 1) as f64;
            if norm(&[u, v]) > 1.0 + 1e-12 {
                continue;
            }
            rows.push(match map.evaluate(&[u, v]) {
                Ok(e) => FlowRow {
                    u,
                    v,
                    du: e.image[0] - u,
                    dv: e.image[1] - v,
                    p_s: e.p_s,
                    singular: false,
                },
                Err(_) => FlowRow {
                    u,
                    v,
                    du: f64::NAN,
                    dv: f64::NAN,
                    p_s: f64::NAN,
                    singular: true,
                },
            });
        }
    }
    rows
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Shortest text that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_rows<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(&r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_flow_csv<W: Write>(out: W, plane: Plane, rows: &[FlowRow]) -> Result<()> {
    let [a, b] = plane.axis_names();
    let (da, db) = (format!("d{a}"), format!("d{b}"));
    write_rows(
        out,
        &[a, b, &da, &db, "p_s"],
        rows.iter()
            .map(|r| vec![num(r.u), num(r.v), num(r.du), num(r.dv), num(r.p_s)]),
    )
}

pub fn write_error_curve_csv<W: Write>(out: W, curve: &ErrorCurve) -> Result<()> {
    write_rows(
        out,
        &["eps_in", "eps_out", "p_s"],
        curve
            .rows
            .iter()
            .map(|r| vec![num(r.eps_in), num(r.eps_out), num(r.p_s)]),
    )
}

pub fn write_survey_csv<W: Write>(out: W, survey: &ThetaSurvey) -> Result<()> {
    write_rows(
        out,
        &["level", "theta"],
        survey.levels.iter().flat_map(|l| {
            l.thetas
                .iter()
                .map(move |t| vec![l.level.to_string(), num(*t)])
        }),
    )
}

pub fn write_box_counting_csv<W: Write>(out: W, b: &BoxCounting) -> Result<()> {
    write_rows(
        out,
        &["eps", "N"],
        b.counts.iter().map(|(e, n)| vec![num(*e), n.to_string()]),
    )
}
