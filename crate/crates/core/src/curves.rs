//! Space curves with their derivatives, the torsion determinant, and the
//! bump cutoffs φ and φ_δ.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::smooth_step;
use crate::error::{invalid, Result};
use crate::quadrature::{integrate_real, QuadOptions};

pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    /// γ(t) = (cos t, sin t, t)
    Helix,
    /// γ(t) = (t, t², t³)
    TwistedCubic,
}

impl Curve {
    pub fn interval(self) -> (f64, f64) {
        match self {
            Curve::Helix => (-PI, PI),
            Curve::TwistedCubic => (-3.0, 3.0),
        }
    }

    /// γ^{(order)}(t) for order 0..=3.
    pub fn eval(self, t: f64, order: u32) -> Result<Vec3> {
        let v = match (self, order) {
            (Curve::Helix, 0) => [t.cos(), t.sin(), t],
            (Curve::Helix, 1) => [-t.sin(), t.cos(), 1.0],
            (Curve::Helix, 2) => [-t.cos(), -t.sin(), 0.0],
            (Curve::Helix, 3) => [t.sin(), -t.cos(), 0.0],
            (Curve::TwistedCubic, 0) => [t, t * t, t * t * t],
            (Curve::TwistedCubic, 1) => [1.0, 2.0 * t, 3.0 * t * t],
            (Curve::TwistedCubic, 2) => [0.0, 2.0, 6.0 * t],
            (Curve::TwistedCubic, 3) => [0.0, 0.0, 6.0],
            (_, k) => return invalid(format!("derivative order {k} not in 0..=3")),
        };
        Ok(v)
    }

    /// det[γ'(t), γ''(t), γ'''(t)].
    pub fn torsion_det(self, t: f64) -> f64 {
        let a = self.eval(t, 1).unwrap();
        let b = self.eval(t, 2).unwrap();
        let c = self.eval(t, 3).unwrap();
        det3(&a, &b, &c)
    }
}

pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Normalized bump `c·exp(−1/(1 − u²))`, `u = (t − center)/halfwidth`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub center: f64,
    pub halfwidth: f64,
    norm: f64,
}

impl Cutoff {
    pub fn new(center: f64, halfwidth: f64) -> Result<Cutoff> {
        if !(halfwidth > 0.0) || !center.is_finite() {
            return invalid(format!("cutoff halfwidth must be positive, got {halfwidth}"));
        }
        let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-15, initial_panels: 16, max_panels: 10_000 };
        let (unit, _) = integrate_real(raw_bump, -1.0, 1.0, &opts)?;
        Ok(Cutoff { center, halfwidth, norm: 1.0 / (unit * halfwidth) })
    }

    /// The cutoff used by the multiplier: center 0, halfwidth 3.
    pub fn standard() -> &'static Cutoff {
        static STD: OnceLock<Cutoff> = OnceLock::new();
        STD.get_or_init(|| Cutoff::new(0.0, 3.0).expect("standard cutoff"))
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.norm * raw_bump((t - self.center) / self.halfwidth)
    }

    /// Analytic continuation `c·exp(−1/(1 − u²))` at complex `z`.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let u = (z - self.center) / self.halfwidth;
        let d = Complex64::new(1.0, 0.0) - u * u;
        if d.norm() < 1e-300 {
            return Complex64::new(0.0, 0.0);
        }
        let e = -d.inv();
        if e.re < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        e.exp() * self.norm
    }

    /// φ_δ: φ times a smooth step in |t − center| rising from 10δ to 20δ.
    pub fn eval_delta(&self, delta: f64, t: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < self.halfwidth / 20.0) {
            return invalid(format!(
                "δ = {delta} outside (0, {})",
                self.halfwidth / 20.0
            ));
        }
        let r = (t - self.center).abs();
        Ok(self.eval(t) * smooth_step((r - 10.0 * delta) / (10.0 * delta)))
    }
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// `α − cos t − t²/10` with `α = 1/(1+δ²)`; nonnegative on `10δ ≤ |t| ≤ π`.
pub fn alpha_cos_margin(delta: f64, t: f64) -> f64 {
    let alpha = 1.0 / (1.0 + delta * delta);
    alpha - t.cos() - t * t / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫_{-1}^{1} exp(−1/(1−u²)) du, 30-digit reference value.
    const UNIT_BUMP: f64 = 0.443993816168079437823048921171;

    #[test]
    fn closed_form_points() {
        assert_eq!(Curve::Helix.eval(0.0, 0).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(Curve::Helix.eval(0.0, 1).unwrap(), [0.0, 1.0, 1.0]);
        assert_eq!(Curve::TwistedCubic.eval(2.0, 2).unwrap(), [0.0, 2.0, 12.0]);
        assert!(Curve::Helix.eval(0.0, 4).is_err());
    }

    #[test]
    fn torsion_values() {
        assert!((Curve::Helix.torsion_det(PI / 2.0) - 1.0).abs() < 1e-15);
        for i in 0..1000 {
            let t = -PI + 2.0 * PI * (i as f64 + 0.5) / 1000.0;
            assert!((Curve::Helix.torsion_det(t) - 1.0).abs() <= 1e-12);
            let s = -3.0 + 6.0 * (i as f64 + 0.5) / 1000.0;
            assert!((Curve::TwistedCubic.torsion_det(s) - 12.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for curve in [Curve::Helix, Curve::TwistedCubic] {
            for &t in &[-1.3, 0.2, 0.9, 2.1] {
                for k in 0..3 {
                    let p = curve.eval(t + h, k).unwrap();
                    let m = curve.eval(t - h, k).unwrap();
                    let d = curve.eval(t, k + 1).unwrap();
                    for a in 0..3 {
                        let fd = (p[a] - m[a]) / (2.0 * h);
                        assert!((fd - d[a]).abs() < 1e-6 * (1.0 + d[a].abs()), "{curve:?} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn cutoff_normalization_and_support() {
        let c = Cutoff::standard();
        assert!((c.norm_constant() - 1.0 / (3.0 * UNIT_BUMP)).abs() < 1e-14);
        assert_eq!(c.eval(3.0), 0.0);
        assert_eq!(c.eval(-6.0), 0.0);
        assert!(c.eval(2.999) >= 0.0);
        // Trapezoid on a fine grid is spectrally accurate for this bump.
        let n = 6000;
        let h = 6.0 / n as f64;
        let s: f64 = (0..=n).map(|i| c.eval(-3.0 + h * i as f64)).sum::<f64>() * h;
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cutoff_is_c1() {
        let c = Cutoff::standard();
        let d = |t: f64, h: f64| (c.eval(t + h) - c.eval(t - h)) / (2.0 * h);
        for &t in &[-2.5, -1.0, 0.3, 2.0, 2.9] {
            let a = d(t, 1e-3);
            let b = d(t, 5e-4);
            let e = d(t, 2.5e-4);
            // Richardson: successive differences shrink by ~4.
            assert!((b - e).abs() <= 0.3 * (a - b).abs() + 1e-12);
        }
    }

    #[test]
    fn cutoff_complex_matches_real_axis() {
        let c = Cutoff::standard();
        for &t in &[-2.0, 0.0, 1.7] {
            let z = c.eval_complex(Complex64::new(t, 0.0));
            assert!((z.re - c.eval(t)).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn truncated_cutoff() {
        let c = Cutoff::standard();
        assert_eq!(c.eval_delta(0.1, 2.5).unwrap(), c.eval(2.5));
        assert_eq!(c.eval_delta(0.1, -2.0).unwrap(), c.eval(-2.0));
        assert_eq!(c.eval_delta(0.1, 0.5).unwrap(), 0.0);
        let v = c.eval_delta(0.1, 1.5).unwrap();
        assert!(v > 0.0 && v < c.eval(1.5));
        assert!(c.eval_delta(0.2, 0.5).is_err());
        assert!(c.eval_delta(0.0, 0.5).is_err());
    }

    #[test]
    fn alpha_cos_inequality() {
        for &delta in &[0.05, 0.1, 0.25] {
            let lo = 10.0 * delta;
            for i in 0..=20_000 {
                let t = lo + (PI - lo) * i as f64 / 20_000.0;
                assert!(alpha_cos_margin(delta, t) >= 0.0, "δ={delta} t={t}");
                assert!(alpha_cos_margin(delta, -t) >= 0.0);
            }
        }
    }
}
