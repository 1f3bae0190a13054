//! Periodic 3D grids, unitary FFTs, multipliers, norms and test fields.
//!
//! A grid is a lattice in a rotated frame: sample `i` sits at
//! `origin + Σ_a (i_a L_a / n_a) e_a` and frequency index `k` at
//! `center + Σ_a (2π k_a / L_a) e_a`, `k_a ∈ [−n_a/2, n_a/2)`. Fields store
//! samples of `f(x)·e^{−i center·x}`, so a frequency-shifted lattice can host
//! a narrow band far from the origin without resolving the carrier.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::decomposition::{smooth_step, PieceIndex};
use crate::error::{invalid, Error, Result};
use crate::multiplier::FrequencyPoint;
use crate::rng::{complex_gaussian, SeedKey};

pub type Vec3 = [f64; 3];

const IDENTITY: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub extent: [f64; 3],
    /// Orthonormal rows e_0, e_1, e_2.
    pub frame: [Vec3; 3],
    pub center: Vec3,
    pub origin: Vec3,
}

impl GridSpec {
    /// n³ points on [0, L)³, unshifted. Needs n ≥ 16, a power of two.
    pub fn cubic(n: usize, extent: f64) -> Result<GridSpec> {
        if n < 16 {
            return invalid(format!("cubic grid needs n ≥ 16, got {n}"));
        }
        GridSpec::new([n; 3], [extent; 3])
    }

    /// Axis-aligned, unshifted grid with per-axis sizes (powers of two ≥ 2).
    pub fn new(n: [usize; 3], extent: [f64; 3]) -> Result<GridSpec> {
        for a in 0..3 {
            if n[a] < 2 || !n[a].is_power_of_two() {
                return invalid(format!("grid size n[{a}] = {} must be a power of two ≥ 2", n[a]));
            }
            if !(extent[a] > 0.0) || !extent[a].is_finite() {
                return invalid(format!("grid extent L[{a}] = {} must be positive", extent[a]));
            }
        }
        Ok(GridSpec { n, extent, frame: IDENTITY, center: [0.0; 3], origin: [0.0; 3] })
    }

    pub fn with_frame(mut self, frame: [Vec3; 3]) -> Result<GridSpec> {
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                if (dot(&frame[a], &frame[b]) - want).abs() > 1e-12 {
                    return invalid("grid frame must be orthonormal");
                }
            }
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn with_center(mut self, center: Vec3) -> GridSpec {
        self.center = center;
        self
    }

    pub fn with_origin(mut self, origin: Vec3) -> GridSpec {
        self.origin = origin;
        self
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.extent[0] * self.extent[1] * self.extent[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    /// Per-axis Nyquist frequency π n_a / L_a.
    pub fn nyquist(&self) -> Vec3 {
        [0, 1, 2].map(|a| PI * self.n[a] as f64 / self.extent[a])
    }

    /// Frequency spacing 2π / L_a.
    pub fn spacing(&self) -> Vec3 {
        [0, 1, 2].map(|a| 2.0 * PI / self.extent[a])
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.frame == IDENTITY
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i2 = idx % self.n[2];
        let r = idx / self.n[2];
        [r / self.n[1], r % self.n[1], i2]
    }

    /// Signed wavenumber of storage index `i` on axis `a`.
    pub fn wavenumber(&self, a: usize, i: usize) -> i64 {
        let n = self.n[a];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn wavenumbers(&self, idx: usize) -> [i64; 3] {
        let i = self.unravel(idx);
        [0, 1, 2].map(|a| self.wavenumber(a, i[a]))
    }

    /// Frame coordinates of ξ − center.
    pub fn frame_coords(&self, xi: &Vec3) -> Vec3 {
        let d = [xi[0] - self.center[0], xi[1] - self.center[1], xi[2] - self.center[2]];
        [dot(&self.frame[0], &d), dot(&self.frame[1], &d), dot(&self.frame[2], &d)]
    }

    pub fn frequency(&self, idx: usize) -> Vec3 {
        let k = self.wavenumbers(idx);
        let mut xi = self.center;
        for a in 0..3 {
            let s = 2.0 * PI * k[a] as f64 / self.extent[a];
            for c in 0..3 {
                xi[c] += s * self.frame[a][c];
            }
        }
        xi
    }

    pub fn frequencies(&self) -> Vec<Vec3> {
        (0..self.len()).into_par_iter().map(|i| self.frequency(i)).collect()
    }

    pub fn position(&self, idx: usize) -> Vec3 {
        let i = self.unravel(idx);
        let mut x = self.origin;
        for a in 0..3 {
            let s = i[a] as f64 * self.extent[a] / self.n[a] as f64;
            for c in 0..3 {
                x[c] += s * self.frame[a][c];
            }
        }
        x
    }

    /// Does the lattice box (half-open in wavenumber) contain ξ?
    pub fn contains_frequency(&self, xi: &Vec3) -> bool {
        let c = self.frame_coords(xi);
        let sp = self.spacing();
        (0..3).all(|a| {
            let k = c[a] / sp[a];
            k >= -(self.n[a] as f64) / 2.0 - 1e-9 && k <= self.n[a] as f64 / 2.0 - 1.0 + 1e-9
        })
    }

    /// Largest |ξ| over the lattice box corners.
    pub fn max_frequency_norm(&self) -> f64 {
        let sp = self.spacing();
        let mut best = 0.0f64;
        for corner in 0..8 {
            let mut xi = self.center;
            for a in 0..3 {
                let k = if corner >> a & 1 == 1 { self.n[a] as f64 / 2.0 } else { -(self.n[a] as f64) / 2.0 };
                for c in 0..3 {
                    xi[c] += k * sp[a] * self.frame[a][c];
                }
            }
            best = best.max(dot(&xi, &xi).sqrt());
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Physical,
    Frequency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub data: Vec<Complex64>,
    pub repr: Representation,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir))
}

/// In-place unnormalized 3D FFT over a row-major [n0][n1][n2] array.
pub fn fft3(data: &mut [Complex64], n: [usize; 3], dir: FftDirection) {
    assert_eq!(data.len(), n[0] * n[1] * n[2]);
    // Last axis: contiguous lines.
    if n[2] > 1 {
        let chunk = n[2] * (4096 / n[2]).max(1);
        data.par_chunks_mut(chunk).for_each(|c| plan(n[2], dir).process(c));
    }
    // Middle axis: transform each [n1][n2] plane through a transpose.
    if n[1] > 1 {
        let plane = n[1] * n[2];
        data.par_chunks_mut(plane).for_each(|p| {
            let f = plan(n[1], dir);
            let mut t = vec![Complex64::new(0.0, 0.0); plane];
            for i1 in 0..n[1] {
                for i2 in 0..n[2] {
                    t[i2 * n[1] + i1] = p[i1 * n[2] + i2];
                }
            }
            f.process(&mut t);
            for i1 in 0..n[1] {
                for i2 in 0..n[2] {
                    p[i1 * n[2] + i2] = t[i2 * n[1] + i1];
                }
            }
        });
    }
    // First axis: stride n1·n2; gather batches of columns.
    if n[0] > 1 {
        let stride = n[1] * n[2];
        let batch = 64.min(stride);
        let f = plan(n[0], dir);
        let mut buf = vec![Complex64::new(0.0, 0.0); batch * n[0]];
        let mut col = 0;
        while col < stride {
            let w = batch.min(stride - col);
            for b in 0..w {
                for i0 in 0..n[0] {
                    buf[b * n[0] + i0] = data[i0 * stride + col + b];
                }
            }
            f.process(&mut buf[..w * n[0]]);
            for b in 0..w {
                for i0 in 0..n[0] {
                    data[i0 * stride + col + b] = buf[b * n[0] + i0];
                }
            }
            col += w;
        }
    }
}

impl SpectralField {
    pub fn zeros(grid: &GridSpec, repr: Representation) -> SpectralField {
        SpectralField { grid: grid.clone(), data: vec![Complex64::new(0.0, 0.0); grid.len()], repr }
    }

    pub fn from_data(grid: &GridSpec, data: Vec<Complex64>, repr: Representation) -> Result<SpectralField> {
        if data.len() != grid.len() {
            return invalid(format!("field has {} samples, grid needs {}", data.len(), grid.len()));
        }
        Ok(SpectralField { grid: grid.clone(), data, repr })
    }

    /// Samples f(x)·e^{−i center·x} at the grid positions.
    pub fn from_fn<F: Fn(Vec3) -> Complex64 + Sync>(grid: &GridSpec, f: F) -> SpectralField {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.position(i);
                f(x) * Complex64::from_polar(1.0, -dot(&grid.center, &x))
            })
            .collect();
        SpectralField { grid: grid.clone(), data, repr: Representation::Physical }
    }

    /// e^{i ξ₀·x}.
    pub fn plane_wave(grid: &GridSpec, xi0: Vec3) -> SpectralField {
        SpectralField::from_fn(grid, |x| Complex64::from_polar(1.0, dot(&xi0, &x)))
    }

    fn expect(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(Error::InvalidState(format!("field is in {:?} representation, expected {repr:?}", self.repr)));
        }
        Ok(())
    }

    pub fn forward_transform(&self) -> Result<SpectralField> {
        self.expect(Representation::Physical)?;
        let mut out = self.clone();
        out.transform_in_place(FftDirection::Forward);
        out.repr = Representation::Frequency;
        Ok(out)
    }

    pub fn inverse_transform(&self) -> Result<SpectralField> {
        self.expect(Representation::Frequency)?;
        let mut out = self.clone();
        out.transform_in_place(FftDirection::Inverse);
        out.repr = Representation::Physical;
        Ok(out)
    }

    fn transform_in_place(&mut self, dir: FftDirection) {
        fft3(&mut self.data, self.grid.n, dir);
        let s = 1.0 / (self.grid.len() as f64).sqrt();
        self.data.par_iter_mut().for_each(|v| *v *= s);
    }

    /// ‖f‖_p on the torus; requires the physical representation.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.expect(Representation::Physical)?;
        lp_norm_slice(&self.data, p, self.grid.cell_volume())
    }

    /// ‖f̂‖ with the same cell weighting (equals the physical L² norm).
    pub fn l2_frequency(&self) -> Result<f64> {
        self.expect(Representation::Frequency)?;
        lp_norm_slice(&self.data, 2.0, self.grid.cell_volume())
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }
}

pub fn lp_norm_slice(data: &[Complex64], p: f64, cell: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(data.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if !(p >= 1.0) {
        return invalid(format!("p = {p} must lie in [1, ∞]"));
    }
    let s: f64 = if p == 2.0 {
        data.iter().map(|v| v.norm_sqr()).sum()
    } else if p == 4.0 {
        data.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum()
    } else {
        data.iter().map(|v| v.norm().powf(p)).sum()
    };
    Ok((s * cell).powf(1.0 / p))
}

/// Multiplier values cached on one grid's lattice.
#[derive(Clone, Debug)]
pub struct LatticeMultiplier {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl LatticeMultiplier {
    pub fn from_fn<F>(grid: &GridSpec, m: F) -> Result<LatticeMultiplier>
    where
        F: Fn(&FrequencyPoint) -> Result<Complex64> + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let xi = FrequencyPoint::from(grid.frequency(i));
                m(&xi).map_err(|e| match e {
                    Error::NumericFailure(msg) => Error::NumericFailure(format!("multiplier at ξ = {xi}: {msg}")),
                    Error::InvalidArgument(msg) => Error::InvalidArgument(format!("multiplier at ξ = {xi}: {msg}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LatticeMultiplier { grid: grid.clone(), values })
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Apply to a field already in frequency representation.
    pub fn apply_frequency(&self, f: &SpectralField) -> Result<SpectralField> {
        f.expect(Representation::Frequency)?;
        if f.grid != self.grid {
            return invalid("multiplier and field live on different grids");
        }
        let data = f.data.par_iter().zip(&self.values).map(|(a, m)| a * m).collect();
        Ok(SpectralField { grid: f.grid.clone(), data, repr: Representation::Frequency })
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        self.apply_frequency(&f.forward_transform()?)?.inverse_transform()
    }
}

/// inverse(m · forward(f)); the field must be physical.
pub fn apply_multiplier<F>(f: &SpectralField, m: F) -> Result<SpectralField>
where
    F: Fn(&FrequencyPoint) -> Result<Complex64> + Sync,
{
    f.expect(Representation::Physical)?;
    LatticeMultiplier::from_fn(&f.grid, m)?.apply(f)
}

/// ‖(1 − Δ)^{s/2} f‖_p.
pub fn sobolev_norm(f: &SpectralField, s: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("Sobolev exponent p = {p} must lie in (1, ∞)"));
    }
    if s == 0.0 {
        return f.lp_norm(p);
    }
    apply_multiplier(f, |xi| {
        let r2 = xi.norm() * xi.norm();
        Ok(Complex64::new((1.0 + r2).powf(s / 2.0), 0.0))
    })?
    .lp_norm(p)
}

/// Frequency support of a random test field.
#[derive(Clone, Debug, PartialEq)]
pub enum Band {
    Full,
    /// lo ≤ |ξ| ≤ hi
    Shell { lo: f64, hi: f64 },
    /// lo ≤ |ξ'| ≤ hi (any ξ₃)
    Annulus { lo: f64, hi: f64 },
    /// Per-lattice-point amplitude weights.
    Weights(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct TestField {
    pub field: SpectralField,
    /// False when the band held no lattice points and the field is zero.
    pub normalized: bool,
}

fn check_band(grid: &GridSpec, band: &Band) -> Result<()> {
    match band {
        Band::Full => Ok(()),
        Band::Weights(w) if w.len() == grid.len() => Ok(()),
        Band::Weights(w) => invalid(format!("band weights have {} entries, grid has {}", w.len(), grid.len())),
        Band::Shell { lo, hi } => {
            if !(hi >= lo && *lo >= 0.0) {
                return invalid(format!("bad shell [{lo}, {hi}]"));
            }
            let ny = grid.nyquist();
            let c = grid.frame_coords(&[0.0; 3]);
            if (0..3).any(|a| c[a].abs() + hi > ny[a]) {
                return invalid(format!("shell radius {hi} exceeds the lattice box (Nyquist {ny:?})"));
            }
            Ok(())
        }
        Band::Annulus { lo, hi } => {
            if !(hi >= lo && *lo >= 0.0) {
                return invalid(format!("bad annulus [{lo}, {hi}]"));
            }
            if !grid.is_axis_aligned() || grid.center[0] != 0.0 || grid.center[1] != 0.0 {
                return invalid("annulus bands need an axis-aligned grid centered in ξ'");
            }
            let ny = grid.nyquist();
            if *hi > ny[0] || *hi > ny[1] {
                return invalid(format!("annulus radius {hi} exceeds Nyquist {:?}", [ny[0], ny[1]]));
            }
            Ok(())
        }
    }
}

fn band_amplitude(grid: &GridSpec, band: &Band, idx: usize) -> f64 {
    match band {
        Band::Full => 1.0,
        Band::Weights(w) => w[idx],
        Band::Shell { lo, hi } => {
            let xi = grid.frequency(idx);
            let r = dot(&xi, &xi).sqrt();
            if r >= *lo && r <= *hi {
                1.0
            } else {
                0.0
            }
        }
        Band::Annulus { lo, hi } => {
            let xi = grid.frequency(idx);
            let r = xi[0].hypot(xi[1]);
            if r >= *lo && r <= *hi {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Complex Gaussian coefficients on the band, unit L² norm, physical output.
pub fn random_test_field(key: SeedKey, grid: &GridSpec, band: &Band) -> Result<TestField> {
    check_band(grid, band)?;
    let mut rng = key.rng();
    let mut spec = SpectralField::zeros(grid, Representation::Frequency);
    for idx in 0..grid.len() {
        let a = band_amplitude(grid, band, idx);
        if a != 0.0 {
            spec.data[idx] = complex_gaussian(&mut rng) * a;
        }
    }
    let norm = spec.l2_frequency()?;
    if norm == 0.0 {
        return Ok(TestField { field: spec.inverse_transform()?, normalized: false });
    }
    spec.scale(1.0 / norm);
    Ok(TestField { field: spec.inverse_transform()?, normalized: true })
}

/// Frame adapted to the sector at angle θ: generator of the cone, angular
/// direction, and cone normal.
pub fn sector_frame(theta: f64) -> [Vec3; 3] {
    let (s, c) = theta.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[c * r, s * r, r], [-s, c, 0.0], [c * r, s * r, -r]]
}

/// The slab a Knapp packet for piece `p` occupies in frequency space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KnappBox {
    pub center: Vec3,
    pub frame: [Vec3; 3],
    pub halfwidths: Vec3,
}

impl KnappBox {
    pub fn for_piece(p: &PieceIndex) -> KnappBox {
        let theta = p.theta();
        let z = 1.5 * p.lambda;
        let q = 1.0 + p.w_center() * p.lambda.powf(-2.0 / 3.0);
        let (s, c) = theta.sin_cos();
        KnappBox {
            center: [q * z * c, q * z * s, z],
            frame: sector_frame(theta),
            halfwidths: [p.lambda / 4.0, p.lambda * p.delta / 2.0, p.lambda * p.delta * p.delta / 2.0],
        }
    }

    /// Box coordinates of ξ in units of the half-widths.
    pub fn local(&self, xi: &Vec3) -> Vec3 {
        let d = [xi[0] - self.center[0], xi[1] - self.center[1], xi[2] - self.center[2]];
        [0, 1, 2].map(|a| dot(&self.frame[a], &d) / self.halfwidths[a])
    }

    /// Smoothed indicator: 1 on the inner half box, 0 outside the box.
    pub fn bump(&self, xi: &Vec3) -> f64 {
        self.local(xi).iter().map(|u| smooth_step(2.0 * (1.0 - u.abs()))).product()
    }

    pub fn corners(&self) -> Vec<Vec3> {
        (0..8)
            .map(|k| {
                let mut x = self.center;
                for a in 0..3 {
                    let s = if k >> a & 1 == 1 { 1.0 } else { -1.0 };
                    for c in 0..3 {
                        x[c] += s * self.halfwidths[a] * self.frame[a][c];
                    }
                }
                x
            })
            .collect()
    }

    pub fn fits(&self, grid: &GridSpec) -> bool {
        self.corners().iter().all(|c| grid.contains_frequency(c))
    }
}

/// Knapp packet for piece `p`: smoothed indicator of the piece's slab,
/// normalized in L⁴.
pub fn knapp_field(p: &PieceIndex, grid: &GridSpec) -> Result<SpectralField> {
    knapp_field_with_phase(p, grid, None)
}

/// Knapp packet with optional per-lattice-point phases multiplied into its
/// spectrum.
pub fn knapp_field_with_phase(p: &PieceIndex, grid: &GridSpec, phase: Option<&[Complex64]>) -> Result<SpectralField> {
    let b = KnappBox::for_piece(p);
    if !b.fits(grid) {
        return invalid(format!(
            "Knapp slab of piece (λ={}, j={}, m={}) exceeds the grid's frequency box",
            p.lambda, p.j, p.m
        ));
    }
    let mut spec = SpectralField::zeros(grid, Representation::Frequency);
    spec.data.par_iter_mut().enumerate().for_each(|(i, v)| {
        let w = b.bump(&grid.frequency(i));
        if w > 0.0 {
            *v = match phase {
                Some(ph) => ph[i] * w,
                None => Complex64::new(w, 0.0),
            };
        }
    });
    let mut f = spec.inverse_transform()?;
    let n4 = f.lp_norm(4.0)?;
    if n4 == 0.0 {
        return invalid(format!(
            "Knapp slab of piece (λ={}, j={}, m={}) contains no lattice points",
            p.lambda, p.j, p.m
        ));
    }
    f.scale(1.0 / n4);
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n: [usize; 3],
    pub extent: [f64; 3],
    pub frame: [Vec3; 3],
    pub center: Vec3,
    pub origin: Vec3,
    pub representation: Representation,
    pub seed: Option<u64>,
    pub format: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Raw little-endian complex64 samples plus a `<path>.json` header.
pub fn write_field(path: &Path, f: &SpectralField, seed: Option<u64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in &f.data {
        w.write_all(&(v.re as f32).to_le_bytes())?;
        w.write_all(&(v.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    let g = &f.grid;
    let header = FieldHeader {
        n: g.n,
        extent: g.extent,
        frame: g.frame,
        center: g.center,
        origin: g.origin,
        representation: f.repr,
        seed,
        format: "complex64-le".into(),
    };
    let text = serde_json::to_string_pretty(&header).expect("plain data serializes");
    std::fs::write(sidecar(path), text)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(SpectralField, FieldHeader)> {
    let text = std::fs::read_to_string(sidecar(path))?;
    let h: FieldHeader = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("bad field header {}: {e}", sidecar(path).display())))?;
    let grid = GridSpec::new(h.n, h.extent)?.with_frame(h.frame)?.with_center(h.center).with_origin(h.origin);
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return invalid(format!("{} holds {} bytes, header implies {}", path.display(), bytes.len(), 8 * grid.len()));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Ok((SpectralField::from_data(&grid, data, h.representation)?, h))
}
