//! Graded meshes on `(0, Y]` and quadrature against power weights `y^e`.

use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 4096;
pub const DEFAULT_GRADING: f64 = 2.0;

/// Truncation length for a mode of frequency `lambda`.
///
/// `40/λ` keeps the decay `e^{-λY}` near `e^{-40}` for every mode, so the mesh
/// in the scaled variable `z = λy` does not depend on `λ`. The constant mode
/// uses `Y = 40`.
pub fn default_extent(lambda: f64) -> f64 {
    if lambda > 0.0 {
        40.0 / lambda
    } else {
        40.0
    }
}

/// `y_j = Y (j/N)^p` for `j = 1..=N`.
pub fn graded_mesh(y_max: f64, n: usize, power: f64) -> Result<Vec<f64>> {
    if !(y_max > 0.0) || n < 4 || !(power >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "graded mesh needs Y > 0, N >= 4, p >= 1 (got {y_max}, {n}, {power})"
        )));
    }
    let nf = n as f64;
    Ok((1..=n).map(|j| y_max * (j as f64 / nf).powf(power)).collect())
}

/// Default mesh for a mode of frequency `lambda`.
pub fn mode_mesh(lambda: f64) -> Vec<f64> {
    graded_mesh(default_extent(lambda), DEFAULT_POINTS, DEFAULT_GRADING).expect("static parameters")
}

/// `∫_a^b y^e dy` for `0 ≤ a < b`, accurate also for short cells far from 0.
pub fn power_moment(a: f64, b: f64, e: f64) -> f64 {
    let q = e + 1.0;
    if a > 0.0 {
        // b^q - a^q = a^q expm1(q ln(b/a))
        let d = a.powf(q) * (q * (b / a).ln()).exp_m1();
        if q.abs() < 1e-14 {
            (b / a).ln()
        } else {
            d / q
        }
    } else {
        b.powf(q) / q
    }
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// `∫ y^e ℓ(y) dy` over `nodes`, where `ℓ` is the piecewise-linear
/// interpolant of `values`.
///
/// The weight is integrated exactly on cells touching the origin and by
/// 4-point Gauss–Legendre on cells short relative to their distance from 0,
/// so piecewise-linear data is integrated to rounding for any integrable `e`.
pub fn weighted_trapezoid(nodes: &[f64], values: &[f64], e: f64) -> Result<f64> {
    if nodes.len() != values.len() || nodes.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "{} nodes vs {} values",
            nodes.len(),
            values.len()
        )));
    }
    if nodes[0] == 0.0 && e <= -1.0 {
        return Err(Error::InvalidParameter(format!("weight y^{e} is not integrable at 0")));
    }
    let mut total = 0.0;
    for (yy, vv) in nodes.windows(2).zip(values.windows(2)) {
        let (a, b) = (yy[0], yy[1]);
        let h = b - a;
        let (fa, fb) = (vv[0], vv[1]);
        if a > 0.0 && h < 0.05 * a {
            let mid = 0.5 * (a + b);
            let mut acc = 0.0;
            for (t, w) in GL4_NODES.iter().zip(&GL4_WEIGHTS) {
                let y = mid + 0.5 * h * t;
                let s = (y - a) / h;
                acc += w * y.powf(e) * (fa + (fb - fa) * s);
            }
            total += 0.5 * h * acc;
        } else {
            let m0 = power_moment(a, b, e);
            let m1 = power_moment(a, b, e + 1.0);
            total += fa * m0 + (fb - fa) / h * (m1 - a * m0);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mesh_shape() {
        let y = mode_mesh(2.0);
        assert_eq!(y.len(), DEFAULT_POINTS);
        assert_relative_eq!(*y.last().unwrap(), 20.0);
        assert!(y[0] <= 1e-4 * 20.0);
        assert!(y.windows(2).all(|w| w[1] > w[0]));
        assert!(graded_mesh(1.0, 2, 2.0).is_err());
    }

    #[test]
    fn quadrature_exact_on_linears_with_singular_weight() {
        let mut y = vec![0.0];
        y.extend(graded_mesh(3.0, 64, 2.0).unwrap());
        for &e in &[-0.6, 0.0, 0.4, 2.0] {
            let v: Vec<f64> = y.iter().map(|t| 2.0 - 0.5 * t).collect();
            let got = weighted_trapezoid(&y, &v, e).unwrap();
            let exact = 2.0 * 3f64.powf(e + 1.0) / (e + 1.0) - 0.5 * 3f64.powf(e + 2.0) / (e + 2.0);
            assert_relative_eq!(got, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn quadrature_converges_on_smooth_integrand() {
        let mut y = vec![0.0];
        y.extend(graded_mesh(40.0, 4096, 2.0).unwrap());
        let v: Vec<f64> = y.iter().map(|t| (-2.0 * t).exp()).collect();
        // ∫ y^{-1/2} e^{-2y} = Γ(1/2)/√2
        let got = weighted_trapezoid(&y, &v, -0.5).unwrap();
        assert_relative_eq!(got, (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-5);
    }

    #[test]
    fn moments() {
        assert_relative_eq!(power_moment(0.0, 2.0, 1.0), 2.0);
        assert_relative_eq!(power_moment(1.0, 1.0 + 1e-9, -3.0), 1e-9, max_relative = 1e-6);
        assert_relative_eq!(power_moment(1.0, std::f64::consts::E, -1.0), 1.0, max_relative = 1e-14);
    }
}
