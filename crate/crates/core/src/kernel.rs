//! Physical-space kernels of the pieces and their L¹ norms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::Curve;
use crate::decomposition::{dyadic_support, wrap_angle, PieceIndex};
use crate::error::{invalid, Result};
use crate::grid::{dot, sector_frame, GridSpec, LatticeMultiplier, Representation, SpectralField, Vec3};
use crate::multiplier::FrequencyPoint;
use crate::nufft::{helix_lattice, LatticeMethod};

/// y = (x₁, x₂ + αx₃, αx₃ − x₂) with α = 1/(1 + δ²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShearMap {
    pub delta: f64,
    pub alpha: f64,
}

impl ShearMap {
    pub fn new(delta: f64) -> ShearMap {
        ShearMap { delta, alpha: 1.0 / (1.0 + delta * delta) }
    }

    pub fn forward(&self, x: Vec3) -> Vec3 {
        [x[0], x[1] + self.alpha * x[2], self.alpha * x[2] - x[1]]
    }

    pub fn inverse(&self, y: Vec3) -> Vec3 {
        [y[0], 0.5 * (y[1] - y[2]), (y[1] + y[2]) / (2.0 * self.alpha)]
    }

    /// Constant Jacobian determinant of `forward`, 2α.
    pub fn jacobian(&self) -> f64 {
        2.0 * self.alpha
    }
}

pub fn shear_coordinates(x: Vec3, delta: f64) -> Vec3 {
    ShearMap::new(delta).forward(x)
}

/// Samples of the piece's frequency support (ξ₃ × q × angle), used to
/// size grids and to check Nyquist containment.
pub fn support_samples(p: &PieceIndex) -> Vec<Vec3> {
    let (zlo, zhi) = dyadic_support(p.lambda);
    let (qlo, qhi) = p.q_support();
    let (alo, ahi, na) = if p.sector_count <= 1 {
        (-PI, PI, 64)
    } else {
        (p.theta() - p.spacing(), p.theta() + p.spacing(), 33)
    };
    let mut out = Vec::with_capacity(9 * 9 * na);
    for iz in 0..9 {
        let z = zlo + (zhi - zlo) * iz as f64 / 8.0;
        for iq in 0..9 {
            let q = qlo + (qhi - qlo) * iq as f64 / 8.0;
            for ia in 0..na {
                let a = alo + (ahi - alo) * ia as f64 / (na - 1) as f64;
                out.push([q * z * a.cos(), q * z * a.sin(), z]);
            }
        }
    }
    out
}

/// Does the lattice of `g` contain the whole frequency support of `p`?
pub fn piece_fits(p: &PieceIndex, g: &GridSpec) -> bool {
    support_samples(p).iter().all(|xi| g.contains_frequency(xi))
}

/// Lattice values of the piece multiplier (cutoffs times T̂).
pub fn piece_lattice(p: &PieceIndex, g: &GridSpec, tol: f64, method: LatticeMethod) -> Result<LatticeMultiplier> {
    if !piece_fits(p, g) {
        return invalid(format!(
            "support of piece (λ={}, j={}, m={}) exceeds the grid's frequency box",
            p.lambda, p.j, p.m
        ));
    }
    let weights: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| p.weight(&FrequencyPoint::from(g.frequency(i))))
        .collect();
    let mask: Vec<bool> = weights.iter().map(|w| *w > 0.0).collect();
    let t = helix_lattice(g, method, tol, Some(&mask))?;
    let values = t.iter().zip(&weights).map(|(v, w)| v * *w).collect();
    Ok(LatticeMultiplier { grid: g.clone(), values })
}

/// Kernel samples `K(x)·e^{−i center·x}` at the grid positions, from
/// lattice multiplier values.
pub fn kernel_from_lattice(m: &LatticeMultiplier) -> Result<SpectralField> {
    let g = &m.grid;
    let scale = (g.len() as f64).sqrt() / g.volume();
    let data = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let v = m.values[i];
            if v == Complex64::new(0.0, 0.0) {
                return v;
            }
            let xi = g.frequency(i);
            let d = [xi[0] - g.center[0], xi[1] - g.center[1], xi[2] - g.center[2]];
            v * Complex64::from_polar(scale, dot(&d, &g.origin))
        })
        .collect();
    SpectralField::from_data(g, data, Representation::Frequency)?.inverse_transform()
}

pub fn kernel_field(p: &PieceIndex, g: &GridSpec, tol: f64) -> Result<SpectralField> {
    kernel_from_lattice(&piece_lattice(p, g, tol, LatticeMethod::Auto)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelEstimate {
    pub piece: PieceIndex,
    pub l1_norm: f64,
    pub grid: GridSpec,
    /// Fraction of Σ|K| inside the central half box after centering.
    pub mass_capture: f64,
    pub axis_capture: [f64; 3],
    /// Jacobian of the sheared coordinates, reported alongside.
    pub jacobian: f64,
    pub low_confidence: bool,
}

/// Per-axis best circular half-window capture and the joint capture of the
/// product window.
pub fn mass_capture(k: &SpectralField) -> (f64, [f64; 3]) {
    let g = &k.grid;
    let n = g.n;
    let abs: Vec<f64> = k.data.iter().map(|v| v.norm()).collect();
    let total: f64 = abs.iter().sum();
    if total == 0.0 {
        return (1.0, [1.0; 3]);
    }
    let mut marg = [vec![0.0; n[0]], vec![0.0; n[1]], vec![0.0; n[2]]];
    for (idx, a) in abs.iter().enumerate() {
        let i = g.unravel(idx);
        for ax in 0..3 {
            marg[ax][i[ax]] += a;
        }
    }
    let mut start = [0usize; 3];
    let mut axis = [0.0; 3];
    for ax in 0..3 {
        let len = (n[ax] / 2).max(1);
        let mut best = -1.0;
        for s in 0..n[ax] {
            let w: f64 = (0..len).map(|o| marg[ax][(s + o) % n[ax]]).sum();
            if w > best {
                best = w;
                start[ax] = s;
            }
        }
        axis[ax] = best / total;
    }
    let inside = |ax: usize, i: usize| ((i + n[ax] - start[ax]) % n[ax]) < (n[ax] / 2).max(1);
    let captured: f64 = abs
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let i = g.unravel(*idx);
            (0..3).all(|ax| inside(ax, i[ax]))
        })
        .map(|(_, a)| a)
        .sum();
    (captured / total, axis)
}

pub fn estimate_from_kernel(p: &PieceIndex, k: &SpectralField) -> Result<KernelEstimate> {
    let l1 = k.lp_norm(1.0)?;
    let (cap, axis) = mass_capture(k);
    Ok(KernelEstimate {
        piece: *p,
        l1_norm: l1,
        grid: k.grid.clone(),
        mass_capture: cap,
        axis_capture: axis,
        jacobian: ShearMap::new(p.delta).jacobian(),
        low_confidence: cap < 0.95,
    })
}

pub fn kernel_l1_norm(p: &PieceIndex, g: &GridSpec, tol: f64) -> Result<KernelEstimate> {
    estimate_from_kernel(p, &kernel_field(p, g, tol)?)
}

/// Point of the helix the piece's kernel concentrates at: γ(θ + π/2).
pub fn kernel_focus(p: &PieceIndex) -> Vec3 {
    let t = wrap_angle(p.theta() + PI / 2.0);
    Curve::Helix.eval(t, 0).expect("order 0")
}

/// Sizing of sector-adapted piece grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PieceGridPlan {
    /// Physical periods along (generator, angular, normal) are
    /// `gen/λ`, `ang/λ`, `nrm` before any doubling.
    pub gen: f64,
    pub ang: f64,
    pub nrm: f64,
    /// Lattice span as a multiple of the support extent.
    pub margin: f64,
    pub target_capture: f64,
    pub max_points: usize,
}

impl Default for PieceGridPlan {
    fn default() -> Self {
        PieceGridPlan { gen: 128.0, ang: 512.0, nrm: 8.0, margin: 1.15, target_capture: 0.95, max_points: 1 << 22 }
    }
}

/// Grid in the sector frame of `p`, centered on its frequency support and
/// on the kernel's focus, with periods `plan·scale`.
pub fn piece_grid(p: &PieceIndex, plan: &PieceGridPlan, scale: [f64; 3]) -> Result<GridSpec> {
    let frame = sector_frame(p.theta());
    let pts = support_samples(p);
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for xi in &pts {
        for a in 0..3 {
            let c = dot(&frame[a], xi);
            lo[a] = lo[a].min(c);
            hi[a] = hi[a].max(c);
        }
    }
    let periods = [plan.gen / p.lambda * scale[0], plan.ang / p.lambda * scale[1], plan.nrm * scale[2]];
    let mut n = [0usize; 3];
    let mut center = [0.0; 3];
    for a in 0..3 {
        let span = (hi[a] - lo[a]) * plan.margin;
        let need = span * periods[a] / (2.0 * PI) + 2.0;
        n[a] = (need.ceil() as usize).next_power_of_two().max(2);
        let mid = 0.5 * (lo[a] + hi[a]);
        for c in 0..3 {
            center[c] += mid * frame[a][c];
        }
    }
    let focus = kernel_focus(p);
    let mut origin = focus;
    for a in 0..3 {
        for c in 0..3 {
            origin[c] -= 0.5 * periods[a] * frame[a][c];
        }
    }
    Ok(GridSpec::new(n, periods)?.with_frame(frame)?.with_center(center).with_origin(origin))
}

/// Kernel estimate on a piece grid, doubling the period of the worst axis
/// until the capture target is met or the point budget runs out. Returns
/// the lattice multiplier of the final grid for reuse.
pub fn adaptive_kernel_estimate(
    p: &PieceIndex,
    tol: f64,
    plan: &PieceGridPlan,
) -> Result<(KernelEstimate, LatticeMultiplier)> {
    let mut scale = [1.0; 3];
    loop {
        let g = piece_grid(p, plan, scale)?;
        let m = piece_lattice(p, &g, tol, LatticeMethod::Auto)?;
        let est = estimate_from_kernel(p, &kernel_from_lattice(&m)?)?;
        if est.mass_capture >= plan.target_capture {
            return Ok((est, m));
        }
        let worst = (0..3)
            .min_by(|&a, &b| est.axis_capture[a].total_cmp(&est.axis_capture[b]))
            .expect("three axes");
        if 2 * g.len() > plan.max_points {
            return Ok((est, m));
        }
        scale[worst] *= 2.0;
    }
}
