//! Small dense linear algebra for 2×2 and 3×3 Jacobians.

use num_complex::Complex64;

pub type Matrix<const D: usize> = [[f64; D]; D];

pub fn identity<const D: usize>() -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// `a · b`.
pub fn mat_mul<const D: usize>(a: &Matrix<D>, b: &Matrix<D>) -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = (0..D).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn mat_vec<const D: usize>(a: &Matrix<D>, v: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| (0..D).map(|k| a[i][k] * v[k]).sum())
}

pub fn to_rows<const D: usize>(m: &Matrix<D>) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve<const D: usize>(mut a: Matrix<D>, mut b: [f64; D]) -> Option<[f64; D]> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..D {
        let piv = (col..D).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= scale * 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..D {
            let f = a[r][col] / a[col][col];
            for c in col..D {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; D];
    for i in (0..D).rev() {
        let s: f64 = (i + 1..D).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    // Roots of λ² + bλ + c.
    let half = -b / 2.0;
    let disc = half * half - c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { c / big } else { 0.0 };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half, s), Complex64::new(half, -s)]
    }
}

fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // Roots of λ³ + aλ² + bλ + c via the depressed cubic.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let polish = |mut x: f64| {
        for _ in 0..3 {
            let f = ((x + a) * x + b) * x + c;
            let df = (3.0 * x + 2.0 * a) * x + b;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            x -= step;
        }
        x
    };
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        let r = polish(u + v + shift);
        // Deflate: λ² + (a + r)λ + (b + (a + r) r).
        let [c1, c2] = quadratic_roots(a + r, b + (a + r) * r);
        [Complex64::new(r, 0.0), c1, c2]
    } else if p == 0.0 {
        let r = polish(shift);
        [Complex64::new(r, 0.0); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        std::array::from_fn(|k| {
            let r = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift;
            Complex64::new(polish(r), 0.0)
        })
    }
}

/// Eigenvalues of a 1×1, 2×2 or 3×3 matrix from its characteristic
/// polynomial, sorted by descending modulus.
pub fn eigenvalues(m: &[Vec<f64>]) -> Vec<Complex64> {
    let mut out = match m.len() {
        0 => Vec::new(),
        1 => vec![Complex64::new(m[0][0], 0.0)],
        2 => {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            quadratic_roots(-tr, det).to_vec()
        }
        3 => {
            let tr = m[0][0] + m[1][1] + m[2][2];
            let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2]
                - m[0][2] * m[2][0]
                + m[1][1] * m[2][2]
                - m[1][2] * m[2][1];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            cubic_roots(-tr, minors, -det).to_vec()
        }
        d => panic!("eigenvalues supports at most 3×3 matrices, got {d}×{d}"),
    };
    out.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn two_by_two() {
        let e = eigenvalues(&[vec![14.0 / 9.0, -7.0 / 9.0], vec![-7.0 / 9.0, 14.0 / 9.0]]);
        assert!(close(e[0], 7.0 / 3.0, 0.0));
        assert!(close(e[1], 7.0 / 9.0, 0.0));
        let rot = eigenvalues(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(close(rot[0], 0.0, 1.0) || close(rot[0], 0.0, -1.0));
        assert!((rot[0].im + rot[1].im).abs() < 1e-15);
    }

    #[test]
    fn three_by_three() {
        let e = eigenvalues(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, -3.0, 0.0],
            vec![0.0, 0.0, 0.5],
        ]);
        assert!(close(e[0], -3.0, 0.0));
        assert!(close(e[1], 2.0, 0.0));
        assert!(close(e[2], 0.5, 0.0));
        let r = eigenvalues(&[
            vec![0.0, -1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.25],
        ]);
        assert!((r[0].norm() - 1.0).abs() < 1e-12);
        assert!(close(r[2], 0.25, 0.0));
    }

    #[test]
    fn solves_linear_system() {
        let x = solve([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }

    proptest! {
        #[test]
        fn trace_and_determinant_preserved(v in proptest::collection::vec(-3.0..3.0f64, 9)) {
            let m: Vec<Vec<f64>> = v.chunks(3).map(|c| c.to_vec()).collect();
            let e = eigenvalues(&m);
            let tr: Complex64 = e.iter().sum();
            let det: Complex64 = e.iter().product();
            let mm = [[m[0][0], m[0][1], m[0][2]], [m[1][0], m[1][1], m[1][2]], [m[2][0], m[2][1], m[2][2]]];
            let d = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1])
                - mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0])
                + mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
            prop_assert!((tr.re - (m[0][0] + m[1][1] + m[2][2])).abs() < 1e-7);
            prop_assert!(tr.im.abs() < 1e-7);
            prop_assert!((det.re - d).abs() < 1e-6 * (1.0 + d.abs()));
        }
    }
}
