//! Least-squares power-law fits on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest |log y − (intercept + slope·log x)|.
    pub max_residual: f64,
    pub n: usize,
}

impl ExponentFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Fit `log y = intercept + slope·log x`. Needs ≥ 4 points with x strictly
/// increasing and all coordinates positive.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 4 {
        return invalid(format!("need at least 4 points, got {}", points.len()));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return invalid("x values must be strictly increasing");
    }
    fit_loglog(points)
}

/// Same regression without the ordering and count requirements (x values
/// may repeat, at least two must differ).
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return invalid(format!("log-log fit needs positive finite data, got ({x}, {y})"));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return invalid("log-log fit needs at least two distinct x values");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit { slope, intercept, max_residual, n: points.len() })
}

/// Two-variable fit `log y = c + a·log u + b·log v`; returns (a, b, c, max residual).
pub fn fit_two_exponents(data: &[(f64, f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if data.len() < 4 {
        return invalid("need at least 4 points");
    }
    if data.iter().any(|(u, v, y)| !(*u > 0.0 && *v > 0.0 && *y > 0.0)) {
        return invalid("log-log fit needs positive data");
    }
    let n = data.len() as f64;
    let rows: Vec<[f64; 3]> = data.iter().map(|(u, v, y)| [u.ln(), v.ln(), y.ln()]).collect();
    let m: Vec<f64> = (0..3).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n).collect();
    let (mut suu, mut svv, mut suv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rows {
        let (u, v, y) = (r[0] - m[0], r[1] - m[1], r[2] - m[2]);
        suu += u * u;
        svv += v * v;
        suv += u * v;
        suy += u * y;
        svy += v * y;
    }
    let det = suu * svv - suv * suv;
    if det.abs() <= 1e-12 * (suu * svv).max(1e-300) {
        return invalid("regressors are collinear");
    }
    let a = (suy * svv - svy * suv) / det;
    let b = (svy * suu - suy * suv) / det;
    let c = m[2] - a * m[0] - b * m[1];
    let res = rows.iter().map(|r| (r[2] - c - a * r[0] - b * r[1]).abs()).fold(0.0, f64::max);
    Ok((a, b, c, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_laws() {
        let xs: Vec<f64> = (1..=8).map(|k| k as f64 * 1.7).collect();
        let f = fit_exponent(&xs.iter().map(|&x| (x, x)).collect::<Vec<_>>()).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        let f = fit_exponent(&xs.iter().map(|&x| (x, x.powf(-0.5))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!(f.max_residual < 1e-12);
    }

    #[test]
    fn noisy_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|k| {
                let x = 2f64.powf(k as f64 / 3.0);
                (x, 3.0 * x * x * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 0.02);
        assert!((f.intercept - 3f64.ln()).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0), (4.0, 1.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (1.0, 2.0), (3.0, 3.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn two_variable_fit() {
        let mut data = Vec::new();
        for &u in &[10.0, 20.0, 40.0, 80.0] {
            for &v in &[0.1, 0.2, 0.4] {
                data.push((u, v, 2.0 * f64::powf(u, -0.25) * f64::powf(v, 0.25)));
            }
        }
        let (a, b, c, r) = fit_two_exponents(&data).unwrap();
        assert!((a + 0.25).abs() < 1e-12 && (b - 0.25).abs() < 1e-12);
        assert!((c - 2f64.ln()).abs() < 1e-12 && r < 1e-12);
        let collinear: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|&u: &f64| (u, u.powf(-1.0 / 3.0), u)).collect();
        assert!(fit_two_exponents(&collinear).is_err());
    }
}
