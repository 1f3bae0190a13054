//! Smooth partition of the conic region A into dyadic pieces, bands and
//! angular sectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::multiplier::{multiplier_quadrature, FrequencyPoint};
use crate::rng::SeedKey;
use rand::Rng;

/// Collar width of the A cutoff in |ξ'|/ξ₃.
pub const A_COLLAR: f64 = 0.005;
pub const A_INNER: f64 = 0.98;
pub const A_OUTER: f64 = 1.02;
/// Largest admissible sector aperture.
pub const DELTA_CAP: f64 = 0.5;

/// 0 for x ≤ 0, 1 for x ≥ 1, with S(x) + S(1 − x) = 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

fn cone_ratio(xi: &FrequencyPoint) -> f64 {
    xi.perp_norm() / xi.xi[2]
}

/// Cutoff to the conic region A, as a function of q = |ξ'|/ξ₃.
pub fn conic_a_weight_q(q: f64) -> f64 {
    smooth_step((q - A_INNER) / A_COLLAR) * smooth_step((A_OUTER - q) / A_COLLAR)
}

/// 1 on 0.985 ≤ |ξ'|/ξ₃ ≤ 1.015, 0 outside [0.98, 1.02] and for ξ₃ ≤ 0.
pub fn conic_a_weight(xi: &FrequencyPoint) -> f64 {
    if xi.xi[2] <= 0.0 {
        return 0.0;
    }
    conic_a_weight_q(cone_ratio(xi))
}

/// Elliptic-side complement of the A cutoff, in q = |ξ'|/|ξ₃| (both half cones).
pub fn elliptic_weight(xi: &FrequencyPoint) -> f64 {
    if xi.xi[2] == 0.0 {
        return 0.0;
    }
    let q = xi.perp_norm() / xi.xi[2].abs();
    1.0 - smooth_step((q - A_INNER) / A_COLLAR)
}

/// Oscillatory-side complement of the A cutoff.
pub fn oscillatory_weight(xi: &FrequencyPoint) -> f64 {
    if xi.xi[2] == 0.0 {
        return if xi.perp_norm() > 0.0 { 1.0 } else { 0.0 };
    }
    let q = xi.perp_norm() / xi.xi[2].abs();
    1.0 - smooth_step((A_OUTER - q) / A_COLLAR)
}

fn dyadic_ramp(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    smooth_step((y.log2() + 0.25) / 0.5)
}

/// Dyadic cutoff in x (x = ξ₃ for pieces). Plateau [2^{1/4}λ, 2^{3/4}λ],
/// support [2^{−1/4}λ, 2^{5/4}λ]; over λ = 2, 4, 8, … the weights telescope
/// to 1 on x ≥ 2^{5/4}.
pub fn dyadic_weight(lambda: f64, x: f64) -> f64 {
    dyadic_ramp(x / lambda) - dyadic_ramp(x / (2.0 * lambda))
}

/// Lower and upper edge of the dyadic support.
pub fn dyadic_support(lambda: f64) -> (f64, f64) {
    (lambda * 2f64.powf(-0.25), lambda * 2f64.powf(1.25))
}

/// Half-width of A in the band variable w = (q − 1)λ^{2/3}.
pub fn band_extent(lambda: f64) -> f64 {
    (A_OUTER - 1.0) * lambda.powf(2.0 / 3.0)
}

fn delta_of(lambda: f64, j: i32) -> f64 {
    2f64.powf(j.unsigned_abs() as f64 / 2.0) * lambda.powf(-1.0 / 3.0)
}

/// Signed band range (−J, J), J = ceil(log₂(0.02·λ^{2/3})) clamped to ≥ 0
/// and to bands with δ ≤ 1/2.
pub fn band_range(lambda: f64) -> Result<(i32, i32)> {
    if !(lambda >= 2.0) || !lambda.is_finite() {
        return invalid(format!("λ = {lambda} must be ≥ 2"));
    }
    let w = band_extent(lambda);
    let mut j = if w <= 1.0 { 0 } else { w.log2().ceil() as i32 };
    while j > 0 && delta_of(lambda, j) > DELTA_CAP {
        j -= 1;
    }
    Ok((-j, j))
}

fn band_ramp(k: i32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    smooth_step(x.log2() - (k as f64 - 1.5))
}

/// Band weight as a function of the rescaled offset w.
pub fn band_weight_w(top: i32, j: i32, w: f64) -> f64 {
    if top == 0 {
        return 1.0;
    }
    let x = w.abs();
    if j == 0 {
        return 1.0 - band_ramp(1, x);
    }
    if (j > 0) != (w > 0.0) {
        return 0.0;
    }
    let k = j.abs();
    let upper = if k == top { 0.0 } else { band_ramp(k + 1, x) };
    band_ramp(k, x) - upper
}

pub fn band_weight(lambda: f64, j: i32, xi: &FrequencyPoint) -> Result<f64> {
    let (lo, hi) = band_range(lambda)?;
    if j < lo || j > hi {
        return invalid(format!("band j = {j} outside [{lo}, {hi}] for λ = {lambda}"));
    }
    if xi.xi[2] <= 0.0 {
        return Ok(0.0);
    }
    let w = (cone_ratio(xi) - 1.0) * lambda.powf(2.0 / 3.0);
    Ok(band_weight_w(hi, j, w))
}

/// Number of equal sectors on the full circle for aperture δ.
pub fn sector_count_for(delta: f64) -> usize {
    ((2.0 * PI / delta).round() as usize).max(1)
}

pub fn sector_count(lambda: f64, j: i32) -> Result<usize> {
    let (lo, hi) = band_range(lambda)?;
    if j < lo || j > hi {
        return invalid(format!("band j = {j} outside [{lo}, {hi}] for λ = {lambda}"));
    }
    Ok(sector_count_for(delta_of(lambda, j)))
}

/// Bookkeeping count N = round(1/δ), minimum 1.
pub fn bookkeeping_count_for(delta: f64) -> usize {
    ((1.0 / delta).round() as usize).max(1)
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Weight of sector m out of `count` equal sectors centered at 2πm/count,
/// as a function of the angle of ξ'. Neighbouring weights sum to 1.
pub fn sector_weight_angle(count: usize, m: usize, angle: f64) -> f64 {
    if count <= 1 {
        return 1.0;
    }
    let spacing = 2.0 * PI / count as f64;
    let d = wrap_angle(angle - spacing * m as f64).abs();
    smooth_step(1.0 - d / spacing)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceIndex {
    pub lambda: f64,
    pub j: i32,
    pub m: usize,
    pub delta: f64,
    pub alpha: f64,
    pub sector_count: usize,
    /// N = round(1/δ), used by the square-function bookkeeping.
    pub bookkeeping_count: usize,
}

impl PieceIndex {
    pub fn new(lambda: f64, j: i32, m: usize) -> Result<PieceIndex> {
        let (lo, hi) = band_range(lambda)?;
        if j < lo || j > hi {
            return invalid(format!("band j = {j} outside [{lo}, {hi}] for λ = {lambda}"));
        }
        let delta = delta_of(lambda, j);
        if delta > DELTA_CAP {
            return invalid(format!("δ = {delta:.4} > {DELTA_CAP} for (λ = {lambda}, j = {j})"));
        }
        let count = sector_count_for(delta);
        if m >= count {
            return invalid(format!("sector m = {m} ≥ count {count} for (λ = {lambda}, j = {j})"));
        }
        Ok(PieceIndex {
            lambda,
            j,
            m,
            delta,
            alpha: 1.0 / (1.0 + delta * delta),
            sector_count: count,
            bookkeeping_count: bookkeeping_count_for(delta),
        })
    }

    /// All sectors of band j.
    pub fn band(lambda: f64, j: i32) -> Result<Vec<PieceIndex>> {
        let first = PieceIndex::new(lambda, j, 0)?;
        (0..first.sector_count).map(|m| PieceIndex::new(lambda, j, m)).collect()
    }

    /// Sector of band j whose center is nearest to `angle`.
    pub fn nearest_sector(lambda: f64, j: i32, angle: f64) -> Result<PieceIndex> {
        let first = PieceIndex::new(lambda, j, 0)?;
        let k = first.sector_count as f64;
        let m = (angle.rem_euclid(2.0 * PI) / (2.0 * PI) * k).round() as usize % first.sector_count;
        PieceIndex::new(lambda, j, m)
    }

    pub fn top_band(&self) -> i32 {
        band_range(self.lambda).map(|r| r.1).unwrap_or(0)
    }

    /// Sector center angle.
    pub fn theta(&self) -> f64 {
        wrap_angle(2.0 * PI * self.m as f64 / self.sector_count as f64)
    }

    /// Angular spacing between sector centers.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.sector_count as f64
    }

    /// Support of the band weight in q = |ξ'|/ξ₃, intersected with A.
    pub fn q_support(&self) -> (f64, f64) {
        let (wlo, whi) = self.w_support();
        let s = self.lambda.powf(-2.0 / 3.0);
        ((1.0 + wlo * s).max(A_INNER), (1.0 + whi * s).min(A_OUTER))
    }

    /// Support of the band weight in w, before truncation by A.
    pub fn w_support(&self) -> (f64, f64) {
        let top = self.top_band();
        let ext = band_extent(self.lambda);
        if top == 0 {
            return (-ext, ext);
        }
        let k = self.j.abs();
        let (lo, hi) = if k == 0 {
            (-(2f64.powf(0.5)), 2f64.powf(0.5))
        } else {
            let hi = if k == top { ext } else { 2f64.powf(k as f64 + 0.5) };
            (2f64.powf(k as f64 - 1.5), hi)
        };
        if self.j < 0 {
            (-hi, -lo)
        } else {
            (lo, hi)
        }
    }

    /// Representative band offset w (geometric middle of the band core).
    pub fn w_center(&self) -> f64 {
        if self.j == 0 || self.top_band() == 0 {
            return 0.0;
        }
        let k = self.j.abs() as f64;
        let hi = 2f64.powf(k).min(band_extent(self.lambda));
        let lo = 2f64.powf(k - 1.0);
        self.j.signum() as f64 * (lo * hi.max(lo)).sqrt()
    }

    /// Product of the four cutoffs (A, dyadic, band, sector) at ξ.
    pub fn weight(&self, xi: &FrequencyPoint) -> f64 {
        let a = conic_a_weight(xi);
        if a == 0.0 {
            return 0.0;
        }
        let d = dyadic_weight(self.lambda, xi.xi[2]);
        if d == 0.0 {
            return 0.0;
        }
        let w = (cone_ratio(xi) - 1.0) * self.lambda.powf(2.0 / 3.0);
        let b = band_weight_w(self.top_band(), self.j, w);
        if b == 0.0 {
            return 0.0;
        }
        a * d * b * sector_weight_angle(self.sector_count, self.m, xi.angle())
    }

    /// Parameters for the audit export.
    pub fn describe(&self) -> PieceDescription {
        let (qlo, qhi) = self.q_support();
        PieceDescription {
            lambda: self.lambda,
            j: self.j,
            m: self.m,
            delta: self.delta,
            alpha: self.alpha,
            sector_count: self.sector_count,
            bookkeeping_count: self.bookkeeping_count,
            theta: self.theta(),
            angle_halfwidth: self.spacing(),
            q_support: [qlo, qhi],
            w_support: {
                let (a, b) = self.w_support();
                [a, b]
            },
            xi3_support: {
                let (a, b) = dyadic_support(self.lambda);
                [a, b]
            },
        }
    }
}

pub fn sector_weight(p: &PieceIndex, xi: &FrequencyPoint) -> f64 {
    sector_weight_angle(p.sector_count, p.m, xi.angle())
}

/// Piece multiplier: all four cutoffs times T̂(ξ).
pub fn piece_multiplier(p: &PieceIndex, xi: &FrequencyPoint, tol: f64) -> Result<Complex64> {
    let w = p.weight(xi);
    if w == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(multiplier_quadrature(xi, tol)? * w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceDescription {
    pub lambda: f64,
    pub j: i32,
    pub m: usize,
    pub delta: f64,
    pub alpha: f64,
    pub sector_count: usize,
    pub bookkeeping_count: usize,
    pub theta: f64,
    pub angle_halfwidth: f64,
    pub q_support: [f64; 2],
    pub w_support: [f64; 2],
    pub xi3_support: [f64; 2],
}

/// Every piece at scale λ (all bands, all sectors).
pub fn partition(lambda: f64) -> Result<Vec<PieceIndex>> {
    let (lo, hi) = band_range(lambda)?;
    let mut out = Vec::new();
    for j in lo..=hi {
        out.extend(PieceIndex::band(lambda, j)?);
    }
    Ok(out)
}

/// Largest |Σ_{j,m} weight − 1| over random points where the A and dyadic
/// cutoffs both equal 1.
pub fn reconstruction_error(lambda: f64, samples: usize, seed: u64) -> Result<f64> {
    let pieces = partition(lambda)?;
    let mut rng = SeedKey::piece(seed, lambda, 0, 0).rng();
    let (zlo, zhi) = (2f64.powf(0.25) * lambda, 2f64.powf(0.75) * lambda);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = rng.gen_range(0.985..=1.015);
        let z = rng.gen_range(zlo..=zhi);
        let a = rng.gen_range(-PI..PI);
        let xi = FrequencyPoint::new(q * z * a.cos(), q * z * a.sin(), z);
        let sum: f64 = pieces.iter().map(|p| p.weight(&xi)).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    Ok(worst)
}

/// Largest |Σ_k D_{2^k}(x) − 1| over random x, log-uniform in [2^{9/4}, 2^{40}].
pub fn telescoping_error(samples: usize, seed: u64) -> f64 {
    let mut rng = SeedKey::new(seed).rng();
    (0..samples)
        .map(|_| {
            let x = 2f64.powf(rng.gen_range(2.25..=40.0));
            let s: f64 = (1..=44).map(|k| dyadic_weight(2f64.powi(k), x)).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// JSON audit of the partition at scale λ.
pub fn partition_json(lambda: f64) -> Result<String> {
    let pieces: Vec<PieceDescription> = partition(lambda)?.iter().map(|p| p.describe()).collect();
    Ok(serde_json::to_string_pretty(&pieces).expect("plain data serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at_ratio(q: f64, x3: f64, angle: f64) -> FrequencyPoint {
        FrequencyPoint::new(q * x3 * angle.cos(), q * x3 * angle.sin(), x3)
    }

    #[test]
    fn smooth_step_examples() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-16);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-15);
            assert!(smooth_step(x) >= smooth_step(x - 0.01));
        }
    }

    #[test]
    fn conic_a_examples() {
        assert_eq!(conic_a_weight(&at_ratio(1.0, 10.0, 0.3)), 1.0);
        assert_eq!(conic_a_weight(&at_ratio(0.97, 10.0, 0.3)), 0.0);
        assert_eq!(conic_a_weight(&at_ratio(1.03, 10.0, 0.3)), 0.0);
        assert_eq!(conic_a_weight(&at_ratio(0.986, 10.0, 0.3)), 1.0);
        assert_eq!(conic_a_weight(&FrequencyPoint::new(1.0, 0.0, -1.0)), 0.0);
        let c = at_ratio(0.983, 10.0, 1.0);
        assert!(conic_a_weight(&c) > 0.0 && conic_a_weight(&c) < 1.0);
    }

    #[test]
    fn region_weights_complete_a() {
        for i in 0..2000 {
            let q = 0.9 + 0.2 * i as f64 / 2000.0;
            let xi = at_ratio(q, 7.0, 0.4);
            let s = elliptic_weight(&xi) + conic_a_weight(&xi) + oscillatory_weight(&xi);
            assert!((s - 1.0).abs() < 1e-14, "q = {q}");
            if q > 0.985 {
                assert_eq!(elliptic_weight(&xi), 0.0);
            }
            if q < 1.015 {
                assert_eq!(oscillatory_weight(&xi), 0.0);
            }
        }
    }

    #[test]
    fn dyadic_examples() {
        assert_eq!(dyadic_weight(8.0, 12.0), 1.0);
        assert_eq!(dyadic_weight(8.0, 3.0), 0.0);
        let s: f64 = (1..40).map(|k| dyadic_weight(2f64.powi(k), 100.0)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        let (lo, hi) = dyadic_support(8.0);
        assert_eq!(dyadic_weight(8.0, lo), 0.0);
        assert_eq!(dyadic_weight(8.0, hi), 0.0);
        assert!(lo >= 4.0 && hi <= 32.0);
    }

    #[test]
    fn band_range_examples() {
        assert_eq!(band_range(4096.0).unwrap(), (-3, 3));
        assert_eq!(band_range(8.0).unwrap(), (0, 0));
        assert_eq!(band_range(1e6).unwrap(), (-8, 8));
        assert_eq!(band_range(128.0).unwrap(), (0, 0));
        assert!(band_range(1.0).is_err());
    }

    #[test]
    fn band_examples() {
        let lam: f64 = 4096.0;
        let s = lam.powf(-2.0 / 3.0);
        assert_eq!(band_weight(lam, 0, &at_ratio(1.0, 5000.0, 0.1)).unwrap(), 1.0);
        let xi = at_ratio(1.0 + 3.0 * s, 5000.0, 0.1);
        let v = band_weight(lam, 2, &xi).unwrap();
        assert!(v > 0.0 && v <= 1.0);
        let total: f64 = (-3..=3).map(|j| band_weight(lam, j, &xi).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(band_weight(lam, 3, &at_ratio(1.0 - 3.0 * s, 5000.0, 0.1)).unwrap(), 0.0);
        assert!(band_weight(lam, 4, &xi).is_err());
    }

    #[test]
    fn band_supports_within_declared() {
        let lam = 4096.0;
        for j in -3..=3 {
            let p = PieceIndex::new(lam, j, 0).unwrap();
            let (lo, hi) = p.w_support();
            for i in 0..4000 {
                let w = -6.0 + 12.0 * i as f64 / 4000.0;
                let v = band_weight_w(3, j, w);
                // The top band is cut off by A, not by its own weight.
                let outside = if j.abs() == 3 { w.abs() < lo.abs().min(hi.abs()) } else { w < lo || w > hi };
                if outside {
                    assert_eq!(v, 0.0, "j={j} w={w}");
                }
                if j != 0 && v > 0.0 {
                    let k = j.abs() as f64;
                    assert!(w.abs() >= 2f64.powf(k - 2.0));
                    if j.abs() < 3 {
                        assert!(w.abs() <= 2f64.powf(k + 1.0));
                    }
                }
                if j == 0 {
                    assert!(v == 0.0 || w.abs() <= 2.0);
                }
            }
        }
    }

    #[test]
    fn sector_count_and_bookkeeping() {
        assert_eq!(bookkeeping_count_for(0.25), 4);
        assert_eq!(bookkeeping_count_for(0.5), 2);
        assert_eq!(bookkeeping_count_for(1.0), 1);
        let p = PieceIndex::new(8.0, 0, 0).unwrap();
        assert_eq!(p.bookkeeping_count, 2);
        assert_eq!(p.sector_count, 13);
        assert_eq!(sector_count(4096.0, 0).unwrap(), 101);
        assert_eq!(sector_count_for(2.0 * PI), 1);
    }

    #[test]
    fn sector_examples() {
        let p = PieceIndex::new(4096.0, 0, 17).unwrap();
        let th = p.theta();
        assert_eq!(sector_weight(&p, &at_ratio(1.0, 10.0, th)), 1.0);
        assert_eq!(sector_weight(&p, &at_ratio(1.0, 10.0, th + PI)), 0.0);
        let mut seed = 12345u64;
        for _ in 0..256 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let angle = (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI - PI;
            let s: f64 = (0..p.sector_count).map(|m| sector_weight_angle(p.sector_count, m, angle)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn piece_validation() {
        assert!(PieceIndex::new(4.0, 0, 0).is_err());
        assert!(PieceIndex::new(4096.0, 4, 0).is_err());
        assert!(PieceIndex::new(4096.0, 0, 101).is_err());
        let p = PieceIndex::new(4096.0, 3, 0).unwrap();
        assert!(p.alpha > 0.8 && p.alpha <= 1.0 && p.delta <= 0.5);
    }

    #[test]
    fn piece_multiplier_support() {
        let p = PieceIndex::new(64.0, 0, 0).unwrap();
        let out_dyadic = at_ratio(1.0, 20.0, 0.0);
        assert_eq!(piece_multiplier(&p, &out_dyadic, 1e-10).unwrap(), Complex64::new(0.0, 0.0));
        let out_a = at_ratio(0.9, 90.0, 0.0);
        assert_eq!(piece_multiplier(&p, &out_a, 1e-10).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn reconstruction_at_interior_points() {
        // Sum over all pieces equals A·dyadic·T̂ (= T̂ in the plateau).
        let lam = 4096.0;
        let pieces = partition(lam).unwrap();
        for (q, x3, ang) in [(1.001, 6000.0, 0.3), (0.99, 6500.0, -2.0), (1.012, 5000.0, 2.9)] {
            let xi = at_ratio(q, x3, ang);
            let t = multiplier_quadrature(&xi, 1e-12).unwrap();
            let sum: Complex64 = pieces.iter().map(|p| piece_multiplier(p, &xi, 1e-12).unwrap()).sum();
            assert!((sum - t).norm() <= 1e-10 * t.norm().max(1e-300));
        }
    }

    #[test]
    fn reconstruction_and_telescoping() {
        assert!(reconstruction_error(512.0, 500, 3).unwrap() < 1e-10);
        assert!(reconstruction_error(64.0, 500, 3).unwrap() < 1e-10);
        assert!(telescoping_error(2000, 3) < 1e-12);
    }

    #[test]
    fn partition_export_parses() {
        let s = partition_json(512.0).unwrap();
        let v: Vec<PieceDescription> = serde_json::from_str(&s).unwrap();
        assert_eq!(v.len(), partition(512.0).unwrap().len());
        assert!(v.iter().all(|d| d.q_support[0] >= A_INNER && d.q_support[1] <= A_OUTER));
    }
}
