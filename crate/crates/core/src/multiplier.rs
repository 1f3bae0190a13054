//! The helix multiplier `T̂(ξ) = ∫ e^{iψ(t)} φ(t) dt`,
//! `ψ(t) = −ξ₁ cos t − ξ₂ sin t − ξ₃ t`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::Cutoff;
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_exponent, ExponentFit};
use crate::quadrature::{integrate, QuadOptions};

/// Below this ratio |ξ'|/|ξ₃| the integral is taken on a deformed contour.
const CONTOUR_RATIO: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub xi: [f64; 3],
}

impl FrequencyPoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        FrequencyPoint { xi: [x1, x2, x3] }
    }

    /// |ξ'| = |(ξ₁, ξ₂)|
    pub fn perp_norm(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }

    pub fn norm(&self) -> f64 {
        (self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1] + self.xi[2] * self.xi[2]).sqrt()
    }

    /// Angle of ξ' in (−π, π].
    pub fn angle(&self) -> f64 {
        self.xi[1].atan2(self.xi[0])
    }

    pub fn scaled(&self, c: f64) -> Self {
        FrequencyPoint::new(c * self.xi[0], c * self.xi[1], c * self.xi[2])
    }
}

impl From<[f64; 3]> for FrequencyPoint {
    fn from(xi: [f64; 3]) -> Self {
        FrequencyPoint { xi }
    }
}

impl fmt::Display for FrequencyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.xi[0], self.xi[1], self.xi[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Elliptic,
    Oscillatory,
    ConicA,
    Transition,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::Elliptic => "Elliptic",
            RegionLabel::Oscillatory => "Oscillatory",
            RegionLabel::ConicA => "ConicA",
            RegionLabel::Transition => "Transition",
        };
        f.write_str(s)
    }
}

/// Every label whose defining inequality holds; `Transition` only if none do.
pub fn classify_region(xi: &FrequencyPoint) -> Result<Vec<RegionLabel>> {
    if xi.norm() == 0.0 {
        return invalid("cannot classify ξ = 0");
    }
    let rho = xi.perp_norm();
    let z = xi.xi[2].abs();
    let mut out = Vec::new();
    if rho <= 0.99 * z {
        out.push(RegionLabel::Elliptic);
    }
    if rho >= 1.01 * z {
        out.push(RegionLabel::Oscillatory);
    }
    if rho >= 0.98 * z && rho <= 1.02 * z {
        out.push(RegionLabel::ConicA);
    }
    if out.is_empty() {
        out.push(RegionLabel::Transition);
    }
    Ok(out)
}

pub fn phase(xi: &FrequencyPoint, t: f64) -> f64 {
    -xi.xi[0] * t.cos() - xi.xi[1] * t.sin() - xi.xi[2] * t
}

/// ψ'(t) = ξ₁ sin t − ξ₂ cos t − ξ₃
pub fn phase_d1(xi: &FrequencyPoint, t: f64) -> f64 {
    xi.xi[0] * t.sin() - xi.xi[1] * t.cos() - xi.xi[2]
}

/// ψ''(t) = ξ₁ cos t + ξ₂ sin t
pub fn phase_d2(xi: &FrequencyPoint, t: f64) -> f64 {
    xi.xi[0] * t.cos() + xi.xi[1] * t.sin()
}

fn phase_complex(xi: &FrequencyPoint, t: Complex64) -> Complex64 {
    -(t.cos() * xi.xi[0]) - t.sin() * xi.xi[1] - t * xi.xi[2]
}

/// Roots of ψ' in [a, b]: sign changes on 256 cells, then bisection and
/// Newton polishing to |ψ'| ≤ 1e−12·max(1, |ξ|).
pub fn critical_points(xi: &FrequencyPoint, a: f64, b: f64) -> Result<Vec<f64>> {
    if !(b > a) {
        return invalid(format!("empty interval [{a}, {b}]"));
    }
    const CELLS: usize = 256;
    let scale = xi.norm().max(1.0);
    let target = 1e-12 * scale;
    let node = |i: usize| if i == CELLS { b } else { a + (b - a) * i as f64 / CELLS as f64 };
    let vals: Vec<f64> = (0..=CELLS).map(|i| phase_d1(xi, node(i))).collect();
    let mut roots = Vec::new();
    for i in 0..=CELLS {
        if vals[i] == 0.0 {
            roots.push(node(i));
            continue;
        }
        if i < CELLS && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            roots.push(refine_root(xi, node(i), node(i + 1), vals[i], target)?);
        }
    }
    Ok(roots)
}

fn refine_root(xi: &FrequencyPoint, mut lo: f64, mut hi: f64, flo: f64, target: f64) -> Result<f64> {
    let (a0, b0) = (lo, hi);
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = phase_d1(xi, mid);
        if fm.abs() <= target || hi - lo < 1e-15 * (1.0 + mid.abs()) {
            // Newton polish; keep it only if it stays in the bracket and helps.
            let mut t = mid;
            for _ in 0..3 {
                let d2 = phase_d2(xi, t);
                if d2 == 0.0 {
                    break;
                }
                let next = t - phase_d1(xi, t) / d2;
                if next < a0 || next > b0 || phase_d1(xi, next).abs() >= phase_d1(xi, t).abs() {
                    break;
                }
                t = next;
            }
            if phase_d1(xi, t).abs() <= target {
                return Ok(t);
            }
            return Err(Error::NumericFailure(format!(
                "critical point in [{a0}, {b0}] for ξ = {xi} did not reach residual {target:.1e} (got {:.3e})",
                phase_d1(xi, t).abs()
            )));
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NumericFailure(format!("bisection stalled in [{a0}, {b0}] for ξ = {xi}")))
}

fn initial_panels(xi: &FrequencyPoint, halfwidth: f64) -> usize {
    4 + (xi.norm() * halfwidth / PI).ceil() as usize
}

/// Adaptive quadrature of T̂(ξ) with estimated absolute error ≤ `tol`.
///
/// Deep in the elliptic cone the real-axis integrand cancels to roundoff, so
/// there the path is pushed into the half plane where |e^{iψ}| ≤ 1; the result
/// then carries relative accuracy as well.
pub fn multiplier_quadrature(xi: &FrequencyPoint, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let cut = Cutoff::standard();
    let hw = cut.halfwidth;
    let (a, b) = (cut.center - hw, cut.center + hw);
    let n0 = initial_panels(xi, hw);
    let rho = xi.perp_norm();
    let z = xi.xi[2];
    let ctx = |e: Error| match e {
        Error::NumericFailure(m) => Error::NumericFailure(format!("T̂ at ξ = {xi}: {m}")),
        other => other,
    };
    if z.abs() >= 1.0 && rho < CONTOUR_RATIO * z.abs() {
        // h = 3/2 makes the path leave the endpoints at 45°, through the saddle of
        // φ·e^{iψ} there; acosh keeps Im ψ ≥ 0 along the path.
        let h = if rho == 0.0 { 1.5 } else { (z.abs() / rho).acosh().min(1.5) };
        let sigma = z.signum();
        let c0 = cut.center;
        let f = |s: f64| {
            let u = (s - c0) / hw;
            let bulge = sigma * h * (1.0 - u * u);
            let t = Complex64::new(s, -bulge);
            let dt = Complex64::new(1.0, sigma * h * 2.0 * u / hw);
            let psi = phase_complex(xi, t);
            let e = Complex64::new(-psi.im, psi.re);
            if e.re < -745.0 {
                return Complex64::new(0.0, 0.0);
            }
            cut.eval_complex(t) * e.exp() * dt
        };
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-10,
            initial_panels: n0,
            max_panels: 64 * n0 + 10_000,
        };
        return integrate(f, a, b, &opts).map(|r| r.value).map_err(ctx);
    }
    let f = |t: f64| {
        let p = phase(xi, t);
        Complex64::new(p.cos(), p.sin()) * cut.eval(t)
    };
    let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, initial_panels: n0, max_panels: 64 * n0 + 10_000 };
    integrate(f, a, b, &opts).map(|r| r.value).map_err(ctx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryPhaseResult {
    pub value: Complex64,
    /// (t_c, ψ''(t_c)) for each critical point used.
    pub critical_points: Vec<(f64, f64)>,
    /// Asymptotic order; leading order only.
    pub order: u32,
}

/// Leading-order two-point stationary phase approximation of T̂(ξ).
pub fn multiplier_stationary_phase(xi: &FrequencyPoint) -> Result<StationaryPhaseResult> {
    let rho = xi.perp_norm();
    if !(rho >= 1.01 * xi.xi[2].abs()) || xi.norm() < 10.0 {
        return Err(Error::DegeneratePhase(format!(
            "ξ = {xi} is outside the nondegenerate regime |ξ'| ≥ 1.01|ξ₃|, |ξ| ≥ 10"
        )));
    }
    let cut = Cutoff::standard();
    let roots = critical_points(xi, -PI, PI)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut cps = Vec::with_capacity(roots.len());
    for t in roots {
        let d2 = phase_d2(xi, t);
        if d2.abs() < 1e-6 * xi.norm() {
            return Err(Error::DegeneratePhase(format!(
                "ψ''({t}) = {d2:.3e} is degenerate at ξ = {xi}"
            )));
        }
        let amp = cut.eval(t) * (2.0 * PI / d2.abs()).sqrt();
        let arg = phase(xi, t) + d2.signum() * FRAC_PI_4;
        value += Complex64::from_polar(amp, arg);
        cps.push((t, d2));
    }
    Ok(StationaryPhaseResult { value, critical_points: cps, order: 1 })
}

/// Relative error |SP − quadrature| / |quadrature| at each radius along a ray.
pub fn stationary_phase_errors(direction: [f64; 3], r_values: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    let len = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
    if !(len > 0.0) {
        return invalid("direction must be nonzero");
    }
    r_values
        .iter()
        .map(|&r| {
            let xi = FrequencyPoint::new(r * direction[0] / len, r * direction[1] / len, r * direction[2] / len);
            let q = multiplier_quadrature(&xi, tol)?;
            let sp = multiplier_stationary_phase(&xi)?.value;
            Ok((r, (sp - q).norm() / q.norm()))
        })
        .collect()
}

/// |T̂(r·d̂)| at each r, with d̂ the normalized direction.
pub fn decay_samples(direction: [f64; 3], r_values: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    let len = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
    if !(len > 0.0) {
        return invalid("direction must be nonzero");
    }
    if r_values.len() < 5 {
        return invalid(format!("need at least 5 radii, got {}", r_values.len()));
    }
    if r_values[0] < 10.0 || r_values.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("radii must be increasing and ≥ 10");
    }
    let d = [direction[0] / len, direction[1] / len, direction[2] / len];
    r_values
        .iter()
        .map(|&r| {
            let xi = FrequencyPoint::new(r * d[0], r * d[1], r * d[2]);
            multiplier_quadrature(&xi, tol).map(|v| (r, v.norm()))
        })
        .collect()
}

/// Log-log slope of |T̂| along a ray.
pub fn decay_fit(direction: [f64; 3], r_values: &[f64], tol: f64) -> Result<ExponentFit> {
    let samples = decay_samples(direction, r_values, tol)?;
    fit_exponent(&samples)
}

/// `count` log-spaced radii from `r_min` to `r_max`.
pub fn log_spaced(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![r_min];
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
