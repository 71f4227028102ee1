//! Box-counting dimension of one-dimensional point sets.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_EXPONENT: u32 = 16;
pub const DEFAULT_MIN_WINDOW: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCounting {
    /// Fitted slope of `log N(ε)` against `log(1/ε)`.
    pub dimension: f64,
    pub r_squared: f64,
    /// Inclusive exponent range `j` (with `ε = 2^-j`) used in the fit.
    pub window: (u32, u32),
    /// `(ε, N(ε))` for `j = 1..=max_exponent`.
    pub counts: Vec<(f64, usize)>,
}

/// Fit over a fixed window, or `None` to pick the window of at least
/// `min_window` points with the largest R² (ties go to the longer window).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub fixed: Option<(u32, u32)>,
    pub min_window: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            fixed: None,
            min_window: DEFAULT_MIN_WINDOW,
        }
    }
}

fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    // A flat window carries no scaling information.
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        0.0
    };
    (slope, r2)
}

pub fn box_counting_dimension(
    points: &[f64],
    max_exponent: u32,
    window: FitWindow,
) -> Result<BoxCounting> {
    let finite: Vec<f64> = points.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if finite.len() < 2 || !(hi > lo) {
        return Err(Error::Degenerate(
            "box counting needs at least two distinct points".into(),
        ));
    }
    if max_exponent < 2 {
        return Err(Error::Degenerate(
            "box counting needs at least two scales".into(),
        ));
    }
    let normalized: Vec<f64> = finite.iter().map(|v| (v - lo) / (hi - lo)).collect();
    let counts: Vec<(f64, usize)> = (1..=max_exponent)
        .map(|j| {
            let boxes = 1u64 << j;
            let occupied: BTreeSet<u64> = normalized
                .iter()
                .map(|v| ((v * boxes as f64).floor() as u64).min(boxes - 1))
                .collect();
            ((-(j as f64)).exp2(), occupied.len())
        })
        .collect();
    let xs: Vec<f64> = (1..=max_exponent)
        .map(|j| j as f64 * std::f64::consts::LN_2)
        .collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();

    let candidates: Vec<(usize, usize)> = match window.fixed {
        Some((a, b)) => {
            if a < 1 || b > max_exponent || b < a + 1 {
                return Err(Error::Degenerate(format!("invalid fit window {a}..={b}")));
            }
            vec![((a - 1) as usize, b as usize)]
        }
        None => {
            let len = xs.len();
            let min = window.min_window.max(2).min(len);
            (0..len)
                .flat_map(|s| (s + min..=len).map(move |e| (s, e)))
                .collect()
        }
    };
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for (s, e) in candidates {
        let (slope, r2) = fit(&xs[s..e], &ys[s..e]);
        let better = match best {
            None => true,
            Some((_, br2, bs, be)) => {
                r2 > br2 + 1e-12 || ((r2 - br2).abs() <= 1e-12 && e - s > be - bs)
            }
        };
        if better {
            best = Some((slope, r2, s, e));
        }
    }
    let (dimension, r_squared, s, e) = best.expect("at least one window");
    Ok(BoxCounting {
        dimension,
        r_squared,
        window: (s as u32 + 1, e as u32),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_grid_is_one_dimensional() {
        let pts: Vec<f64> = (0..4096).map(|i| i as f64 / 4095.0).collect();
        let b = box_counting_dimension(&pts, 16, FitWindow::default()).unwrap();
        assert!((b.dimension - 1.0).abs() < 0.05, "{}", b.dimension);
    }

    #[test]
    fn cantor_set_dimension() {
        let mut pts = vec![0.0f64];
        for _ in 0..10 {
            pts = pts
                .iter()
                .flat_map(|&p| [p / 3.0, p / 3.0 + 2.0 / 3.0])
                .collect();
        }
        let b = box_counting_dimension(&pts, 16, FitWindow::default()).unwrap();
        let want = 2f64.ln() / 3f64.ln();
        assert!((b.dimension - want).abs() < 0.08, "{}", b.dimension);
    }

    #[test]
    fn degenerate_sets_rejected() {
        assert!(box_counting_dimension(&[0.5, 0.5], 16, FitWindow::default()).is_err());
        assert!(box_counting_dimension(&[0.5], 16, FitWindow::default()).is_err());
    }

    #[test]
    fn fixed_window() {
        let pts: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let w = FitWindow {
            fixed: Some((1, 5)),
            min_window: 4,
        };
        let b = box_counting_dimension(&pts, 10, w).unwrap();
        assert_eq!(b.window, (1, 5));
        assert!((b.dimension - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dimension_bounded(pts in proptest::collection::vec(0.0..1.0f64, 2..300)) {
            if let Ok(b) = box_counting_dimension(&pts, 16, FitWindow::default()) {
                prop_assert!(b.dimension >= -1e-9);
                prop_assert!(b.dimension <= 1.0 + 0.05);
            }
        }
    }
}
