//! Type-1 non-uniform FFT (Gaussian gridding) and lattice evaluation of T̂.
//!
//! `F(k) = Σ_j c_j e^{−i k·u_j}` for `k_a ∈ [−n_a/2, n_a/2)`, computed by
//! spreading onto a grid oversampled by 2, one FFT, and deconvolving the
//! Gaussian per axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::curves::{Curve, Cutoff};
use crate::error::{invalid, Result};
use crate::grid::{dot, fft3, GridSpec};
use crate::multiplier::{multiplier_quadrature, FrequencyPoint};

const OVERSAMPLE: usize = 2;
/// Fine grids above this many points fall back to direct quadrature.
pub const MAX_FINE_POINTS: usize = 1 << 26;

/// Half-width (in fine-grid cells) of the spreading window for accuracy `eps`.
pub fn spread_width(eps: f64) -> usize {
    let r = OVERSAMPLE as f64;
    ((-eps.ln()) / (PI * (1.0 - 0.5 / r))).ceil().clamp(2.0, 16.0) as usize
}

fn fine_size(n: usize, msp: usize) -> usize {
    (OVERSAMPLE * n).max(2 * msp + 2)
}

pub fn type1(points: &[[f64; 3]], strengths: &[Complex64], n: [usize; 3], eps: f64) -> Result<Vec<Complex64>> {
    if points.len() != strengths.len() {
        return invalid("points and strengths differ in length");
    }
    let msp = spread_width(eps);
    let m = [0, 1, 2].map(|a| fine_size(n[a], msp));
    let total = m[0] * m[1] * m[2];
    if total > MAX_FINE_POINTS {
        return invalid(format!("oversampled grid {m:?} exceeds the memory budget"));
    }
    let tau = [0, 1, 2].map(|a| {
        let r = m[a] as f64 / n[a] as f64;
        PI * msp as f64 / ((n[a] * n[a]) as f64 * r * (r - 0.5))
    });
    let width = 2 * msp + 1;
    let mut fine = vec![Complex64::new(0.0, 0.0); total];
    let mut w = [vec![0.0; width], vec![0.0; width], vec![0.0; width]];
    let mut idx = [vec![0usize; width], vec![0usize; width], vec![0usize; width]];
    for (u, c) in points.iter().zip(strengths) {
        for a in 0..3 {
            let ua = u[a].rem_euclid(2.0 * PI);
            let h = 2.0 * PI / m[a] as f64;
            let base = (ua / h).floor() as i64;
            for o in 0..width {
                let l = base + o as i64 - msp as i64;
                let x = ua - h * l as f64;
                w[a][o] = (-x * x / (4.0 * tau[a])).exp();
                idx[a][o] = l.rem_euclid(m[a] as i64) as usize;
            }
        }
        for o0 in 0..width {
            let c0 = c * w[0][o0];
            let row0 = idx[0][o0] * m[1];
            for o1 in 0..width {
                let c1 = c0 * w[1][o1];
                let row = (row0 + idx[1][o1]) * m[2];
                for o2 in 0..width {
                    fine[row + idx[2][o2]] += c1 * w[2][o2];
                }
            }
        }
    }
    fft3(&mut fine, m, FftDirection::Forward);
    let deconv: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            (0..n[a])
                .map(|i| {
                    let k = if i < n[a] / 2 { i as f64 } else { i as f64 - n[a] as f64 };
                    (PI / tau[a]).sqrt() * (k * k * tau[a]).exp() / m[a] as f64
                })
                .collect()
        })
        .collect();
    let fine_index = |a: usize, i: usize| if i < n[a] / 2 { i } else { m[a] - (n[a] - i) };
    let len = n[0] * n[1] * n[2];
    let out = (0..len)
        .into_par_iter()
        .map(|k| {
            let i2 = k % n[2];
            let i1 = (k / n[2]) % n[1];
            let i0 = k / (n[1] * n[2]);
            let f = (fine_index(0, i0) * m[1] + fine_index(1, i1)) * m[2] + fine_index(2, i2);
            fine[f] * (deconv[0][i0] * deconv[1][i1] * deconv[2][i2])
        })
        .collect();
    Ok(out)
}

/// How lattice values of T̂ are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeMethod {
    /// NUFFT when the oversampled grid fits the memory budget, else direct.
    Auto,
    Nufft,
    /// Adaptive quadrature at every requested lattice point.
    Direct,
}

/// Trapezoid step that resolves the curve's oscillation up to |ξ| ≤ xi_max.
pub fn trapezoid_nodes(xi_max: f64) -> usize {
    let h = 2.0 * PI / (1.5 * std::f64::consts::SQRT_2 * xi_max + 400.0);
    (6.0 / h).ceil() as usize
}

/// T̂ at every lattice point of `grid` (entries where `mask` is false are
/// left at zero by the direct route).
pub fn helix_lattice(grid: &GridSpec, method: LatticeMethod, tol: f64, mask: Option<&[bool]>) -> Result<Vec<Complex64>> {
    let msp = spread_width(1e-11);
    let fine: usize = (0..3).map(|a| fine_size(grid.n[a], msp)).product();
    let use_nufft = match method {
        LatticeMethod::Nufft => true,
        LatticeMethod::Direct => false,
        LatticeMethod::Auto => fine <= MAX_FINE_POINTS,
    };
    if !use_nufft {
        return (0..grid.len())
            .into_par_iter()
            .map(|i| {
                if mask.map_or(true, |m| m[i]) {
                    multiplier_quadrature(&FrequencyPoint::from(grid.frequency(i)), tol)
                } else {
                    Ok(Complex64::new(0.0, 0.0))
                }
            })
            .collect();
    }
    let cut = Cutoff::standard();
    let nodes = trapezoid_nodes(grid.max_frequency_norm());
    let (a, b) = (cut.center - cut.halfwidth, cut.center + cut.halfwidth);
    let h = (b - a) / nodes as f64;
    let mut pts = Vec::with_capacity(nodes);
    let mut str = Vec::with_capacity(nodes);
    for i in 1..nodes {
        let t = a + h * i as f64;
        let phi = cut.eval(t);
        if phi == 0.0 {
            continue;
        }
        let g = Curve::Helix.eval(t, 0)?;
        pts.push([0, 1, 2].map(|ax| 2.0 * PI / grid.extent[ax] * dot(&grid.frame[ax], &g)));
        str.push(Complex64::from_polar(h * phi, -dot(&grid.center, &g)));
    }
    type1(&pts, &str, grid.n, 1e-11)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sector_frame;

    #[test]
    fn matches_direct_sum() {
        let n = [8, 4, 16];
        let pts: Vec<[f64; 3]> = (0..37)
            .map(|j| {
                let t = j as f64 * 0.731;
                [t.sin() * 3.0, (2.0 * t).cos() * 7.0 + 1.0, t * 1.3]
            })
            .collect();
        let c: Vec<Complex64> = (0..37).map(|j| Complex64::new((j as f64).cos(), (j as f64 * 0.3).sin())).collect();
        let f = type1(&pts, &c, n, 1e-12).unwrap();
        let mut err: f64 = 0.0;
        for i0 in 0..n[0] {
            for i1 in 0..n[1] {
                for i2 in 0..n[2] {
                    let k = [i0, i1, i2]
                        .iter()
                        .zip(&n)
                        .map(|(&i, &nn)| if i < nn / 2 { i as f64 } else { i as f64 - nn as f64 })
                        .collect::<Vec<_>>();
                    let direct: Complex64 = pts
                        .iter()
                        .zip(&c)
                        .map(|(u, cj)| cj * Complex64::from_polar(1.0, -(k[0] * u[0] + k[1] * u[1] + k[2] * u[2])))
                        .sum();
                    err = err.max((direct - f[(i0 * n[1] + i1) * n[2] + i2]).norm());
                }
            }
        }
        assert!(err < 1e-9, "max error {err}");
    }

    #[test]
    fn lattice_matches_quadrature_on_adapted_grid() {
        let g = GridSpec::new([16, 8, 16], [0.4, 1.5, 3.0])
            .unwrap()
            .with_frame(sector_frame(-1.2))
            .unwrap()
            .with_center([60.0 * (-1.2f64).cos(), 60.0 * (-1.2f64).sin(), 60.0]);
        let v = helix_lattice(&g, LatticeMethod::Nufft, 1e-12, None).unwrap();
        for idx in (0..g.len()).step_by(97) {
            let q = multiplier_quadrature(&FrequencyPoint::from(g.frequency(idx)), 1e-13).unwrap();
            assert!((q - v[idx]).norm() < 1e-8, "idx {idx}: {q} vs {}", v[idx]);
        }
    }

    #[test]
    fn direct_route_respects_mask() {
        let g = GridSpec::new([4, 4, 4], [1.0; 3]).unwrap();
        let mask: Vec<bool> = (0..g.len()).map(|i| i % 3 == 0).collect();
        let v = helix_lattice(&g, LatticeMethod::Direct, 1e-12, Some(&mask)).unwrap();
        assert!(v.iter().enumerate().all(|(i, x)| (i % 3 == 0) == (x.norm() > 0.0)));
        let w = helix_lattice(&g, LatticeMethod::Nufft, 1e-12, None).unwrap();
        for i in (0..g.len()).step_by(3) {
            assert!((v[i] - w[i]).norm() < 1e-9);
        }
    }
}
