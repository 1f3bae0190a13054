//! Operator-norm estimates for the pieces, square-function experiments and
//! the τ estimate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{
    band_range, conic_a_weight, dyadic_support, dyadic_weight, elliptic_weight, oscillatory_weight,
    sector_count_for, sector_weight_angle, PieceIndex, A_OUTER,
};
use crate::error::{invalid, Result};
use crate::fit::{fit_exponent, ExponentFit};
use crate::grid::{
    knapp_field_with_phase, random_test_field, Band, GridSpec, KnappBox, LatticeMultiplier, Representation,
    SpectralField,
};
use crate::kernel::{adaptive_kernel_estimate, piece_lattice, KernelEstimate, PieceGridPlan};
use crate::multiplier::{FrequencyPoint, RegionLabel};
use crate::nufft::{helix_lattice, LatticeMethod};
use crate::rng::SeedKey;

/// Riesz–Thorin midpoint √(l2·linf).
pub fn interpolation_bound(l2: f64, linf: f64) -> Result<f64> {
    if !(l2 >= 0.0 && linf >= 0.0) {
        return invalid(format!("norms must be nonnegative, got ({l2}, {linf})"));
    }
    Ok((l2 * linf).sqrt())
}

/// ‖S f‖₄ / ‖f‖₄, or None for a zero field.
pub fn rayleigh_l4(m: &LatticeMultiplier, f: &SpectralField) -> Result<Option<f64>> {
    let d = f.lp_norm(4.0)?;
    if d == 0.0 {
        return Ok(None);
    }
    Ok(Some(m.apply(f)?.lp_norm(4.0)? / d))
}

/// Single lattice mode at the argmax of |m|; its Rayleigh ratio is that max.
pub fn peak_mode(m: &LatticeMultiplier) -> Result<SpectralField> {
    let (idx, _) = m
        .values
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, v)| if v.norm() > bv { (i, v.norm()) } else { (bi, bv) });
    let mut spec = SpectralField::zeros(&m.grid, Representation::Frequency);
    spec.data[idx] = Complex64::new(1.0, 0.0);
    spec.inverse_transform()
}

/// Phases conj(m)/|m| (1 where m vanishes): a packet with these phases is
/// mapped by m to a spectrum with nonnegative real values, which focuses.
pub fn conjugate_phases(values: &[Complex64]) -> Vec<Complex64> {
    values
        .iter()
        .map(|v| if v.norm() > 0.0 { v.conj() / v.norm() } else { Complex64::new(1.0, 0.0) })
        .collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct L4Probe {
    pub best: f64,
    pub random: f64,
    pub knapp: Option<f64>,
    pub plane: f64,
}

/// Best L⁴ Rayleigh ratio over `trials` random fields on `support`, the
/// lattice peak mode, and the extra (Knapp-type) fields.
pub fn probe_l4(
    m: &LatticeMultiplier,
    support: &[f64],
    trials: usize,
    key: SeedKey,
    knapp: &[SpectralField],
) -> Result<L4Probe> {
    let band = Band::Weights(support.to_vec());
    let random = (0..trials as u64)
        .map(|t| {
            let f = random_test_field(key.trial(t), &m.grid, &band)?;
            if !f.normalized {
                return Ok(None);
            }
            rayleigh_l4(m, &f.field)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    let plane = if m.sup_abs() > 0.0 { m.sup_abs() } else { 0.0 };
    let mut kn: Option<f64> = None;
    for f in knapp {
        if let Some(r) = rayleigh_l4(m, f)? {
            kn = Some(kn.map_or(r, |k: f64| k.max(r)));
        }
    }
    let best = random.max(plane).max(kn.unwrap_or(0.0));
    Ok(L4Probe { best, random, knapp: kn, plane })
}

fn support_of(m: &LatticeMultiplier) -> Vec<f64> {
    m.values.iter().map(|v| if v.norm() > 0.0 { 1.0 } else { 0.0 }).collect()
}

fn piece_knapp_fields(p: &PieceIndex, m: &LatticeMultiplier) -> Result<Vec<SpectralField>> {
    if !KnappBox::for_piece(p).fits(&m.grid) {
        return Ok(Vec::new());
    }
    let phases = conjugate_phases(&m.values);
    Ok(vec![knapp_field_with_phase(p, &m.grid, None)?, knapp_field_with_phase(p, &m.grid, Some(&phases))?])
}

/// Exact L²→L² norm on the grid: sup of |piece multiplier| over the lattice.
pub fn norm_l2(p: &PieceIndex, g: &GridSpec) -> Result<f64> {
    Ok(piece_lattice(p, g, 1e-12, LatticeMethod::Auto)?.sup_abs())
}

pub fn norm_l4_lower_lattice(p: &PieceIndex, m: &LatticeMultiplier, trials: usize, seed: u64) -> Result<L4Probe> {
    let key = SeedKey::piece(seed, p.lambda, p.j, p.m);
    probe_l4(m, &support_of(m), trials, key, &piece_knapp_fields(p, m)?)
}

/// Best L⁴ Rayleigh ratio for the piece over random draws on its support,
/// its Knapp packets and the lattice peak mode.
pub fn norm_l4_lower(p: &PieceIndex, g: &GridSpec, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let m = piece_lattice(p, g, 1e-12, LatticeMethod::Auto)?;
    Ok(norm_l4_lower_lattice(p, &m, trials, seed)?.best)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormRecord {
    pub piece: PieceIndex,
    pub l2_norm: f64,
    pub linf_upper: f64,
    pub l4_lower: f64,
    pub interp_upper: f64,
    pub kernel: KernelEstimate,
    pub probe: L4Probe,
}

/// All estimates for one piece on its adapted grid.
pub fn piece_record(p: &PieceIndex, trials: usize, seed: u64, tol: f64, plan: &PieceGridPlan) -> Result<NormRecord> {
    let (kernel, m) = adaptive_kernel_estimate(p, tol, plan)?;
    let l2 = m.sup_abs();
    let probe = norm_l4_lower_lattice(p, &m, trials, seed)?;
    Ok(NormRecord {
        piece: *p,
        l2_norm: l2,
        linf_upper: kernel.l1_norm,
        l4_lower: probe.best,
        interp_upper: interpolation_bound(l2, kernel.l1_norm)?,
        kernel,
        probe,
    })
}

/// All sectors of one band on one grid, sharing a single evaluation of T̂.
pub struct BandFamily {
    pub lambda: f64,
    pub j: i32,
    pub pieces: Vec<PieceIndex>,
    pub grid: GridSpec,
    pub t_hat: Vec<Complex64>,
    /// A·dyadic·band weight per lattice point.
    pub band: Vec<f64>,
    /// Sparse (lattice index, sector weight) lists per sector.
    pub sectors: Vec<Vec<(usize, f64)>>,
}

impl BandFamily {
    pub fn new(lambda: f64, j: i32, g: &GridSpec, tol: f64) -> Result<BandFamily> {
        let pieces = PieceIndex::band(lambda, j)?;
        for p in &pieces {
            if !crate::kernel::piece_fits(p, g) {
                return invalid(format!("band (λ={lambda}, j={j}) sector m={} exceeds the grid's frequency box", p.m));
            }
        }
        let p0 = pieces[0];
        let k = p0.sector_count;
        let band: Vec<f64> = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let xi = FrequencyPoint::from(g.frequency(i));
                let mut q = p0;
                q.m = 0;
                q.sector_count = 1;
                q.weight(&xi)
            })
            .collect();
        let mask: Vec<bool> = band.iter().map(|b| *b > 0.0).collect();
        let t_hat = helix_lattice(g, LatticeMethod::Auto, tol, Some(&mask))?;
        let spacing = 2.0 * PI / k as f64;
        let mut sectors = vec![Vec::new(); k];
        for (i, b) in band.iter().enumerate() {
            if *b == 0.0 {
                continue;
            }
            let angle = FrequencyPoint::from(g.frequency(i)).angle();
            if k == 1 {
                sectors[0].push((i, 1.0));
                continue;
            }
            let lo = (angle.rem_euclid(2.0 * PI) / spacing).floor() as usize % k;
            for m in [lo, (lo + 1) % k] {
                let w = sector_weight_angle(k, m, angle);
                if w > 0.0 {
                    sectors[m].push((i, w));
                }
            }
        }
        Ok(BandFamily { lambda, j, pieces, grid: g.clone(), t_hat, band, sectors })
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    /// Band multiplier Σ_m S^{jm} on the lattice.
    pub fn band_multiplier(&self) -> LatticeMultiplier {
        let values = self.t_hat.iter().zip(&self.band).map(|(t, b)| t * *b).collect();
        LatticeMultiplier { grid: self.grid.clone(), values }
    }

    /// Knapp packets of every sector with phases conj(T̂)/|T̂| (all outputs
    /// focus at one point), or without phases.
    pub fn knapp_sum(&self, focused: bool) -> Result<SpectralField> {
        let phases = conjugate_phases(&self.t_hat);
        let boxes: Vec<KnappBox> = self.pieces.iter().map(KnappBox::for_piece).collect();
        let mut spec = SpectralField::zeros(&self.grid, Representation::Frequency);
        spec.data.par_iter_mut().enumerate().for_each(|(i, v)| {
            if self.band[i] == 0.0 {
                return;
            }
            let xi = self.grid.frequency(i);
            let w: f64 = boxes.iter().map(|b| b.bump(&xi)).sum();
            if w > 0.0 {
                *v = if focused { phases[i] * w } else { Complex64::new(w, 0.0) };
            }
        });
        spec.inverse_transform()
    }

    pub fn ratio(&self, f: &SpectralField) -> Result<SquareFunctionResult> {
        let fh = f.forward_transform()?;
        let n = self.grid.len();
        let mut total = vec![Complex64::new(0.0, 0.0); n];
        let mut square = vec![0.0f64; n];
        for sec in &self.sectors {
            let mut spec = SpectralField::zeros(&self.grid, Representation::Frequency);
            for &(i, w) in sec {
                spec.data[i] = fh.data[i] * self.t_hat[i] * w;
            }
            let g = spec.inverse_transform()?;
            total.par_iter_mut().zip(&g.data).for_each(|(t, v)| *t += v);
            square.par_iter_mut().zip(&g.data).for_each(|(s, v)| *s += v.norm_sqr());
        }
        let cell = self.grid.cell_volume();
        let lhs = (total.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * cell).powf(0.25);
        let rhs = (square.iter().map(|s| s * s).sum::<f64>() * cell).powf(0.25);
        let k = self.sector_count() as f64;
        let pointwise_max = total
            .iter()
            .zip(&square)
            .filter(|(_, s)| **s > 0.0)
            .map(|(t, s)| t.norm_sqr() / (k * s))
            .fold(0.0, f64::max);
        Ok(SquareFunctionResult { lhs, rhs, sector_count: self.sector_count(), pointwise_max })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SquareFunctionResult {
    /// ‖Σ_m S^{jm} f‖₄
    pub lhs: f64,
    /// ‖(Σ_m |S^{jm} f|²)^{1/2}‖₄
    pub rhs: f64,
    pub sector_count: usize,
    /// max_x |Σ_m g_m|² / (K·Σ_m |g_m|²), at most 1 by Cauchy–Schwarz.
    pub pointwise_max: f64,
}

impl SquareFunctionResult {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            1.0
        } else {
            self.lhs / self.rhs
        }
    }
}

pub fn square_function_ratio(lambda: f64, j: i32, g: &GridSpec, f: &SpectralField) -> Result<SquareFunctionResult> {
    BandFamily::new(lambda, j, g, 1e-12)?.ratio(f)
}

#[derive(Clone, Debug, Serialize)]
pub struct TauPoint {
    pub lambda: f64,
    pub j: i32,
    pub delta: f64,
    pub sector_count: usize,
    pub ratio: f64,
    pub random_ratio: f64,
    pub knapp_ratio: f64,
    pub runs: Vec<SquareFunctionResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TauEstimate {
    pub fit: ExponentFit,
    pub tau_hat: f64,
    pub sigma_hat: f64,
    pub points: Vec<TauPoint>,
}

/// Max lhs/rhs over random and Knapp-type fields for one band.
pub fn tau_point(fam: &BandFamily, trials: usize, seed: u64) -> Result<TauPoint> {
    let support: Vec<f64> = fam.band.iter().map(|b| if *b > 0.0 { 1.0 } else { 0.0 }).collect();
    let band = Band::Weights(support);
    let mut runs = Vec::new();
    let mut random: f64 = 0.0;
    for t in 0..trials as u64 {
        let f = random_test_field(SeedKey::piece(seed, fam.lambda, fam.j, 0).trial(t), &fam.grid, &band)?;
        if !f.normalized {
            continue;
        }
        let r = fam.ratio(&f.field)?;
        random = random.max(r.ratio());
        runs.push(r);
    }
    let mut knapp: f64 = 0.0;
    for focused in [true, false] {
        let r = fam.ratio(&fam.knapp_sum(focused)?)?;
        knapp = knapp.max(r.ratio());
        runs.push(r);
    }
    let p = fam.pieces[0];
    Ok(TauPoint {
        lambda: fam.lambda,
        j: fam.j,
        delta: p.delta,
        sector_count: fam.sector_count(),
        ratio: random.max(knapp),
        random_ratio: random,
        knapp_ratio: knapp,
        runs,
    })
}

/// Fit log(max ratio) against log δ; slope = τ̂ − 1/4, σ̂ = τ̂/3.
pub fn tau_estimate<G>(sweep: &[(f64, i32)], grid_for: G, trials: usize, seed: u64) -> Result<TauEstimate>
where
    G: Fn(f64) -> Result<GridSpec> + Sync,
{
    let mut deltas: Vec<f64> = Vec::new();
    for &(l, j) in sweep {
        let d = PieceIndex::new(l, j, 0)?.delta;
        if !deltas.iter().any(|x| (x - d).abs() < 1e-12) {
            deltas.push(d);
        }
    }
    if deltas.len() < 4 {
        return invalid(format!("τ sweep needs ≥ 4 distinct δ values, got {}", deltas.len()));
    }
    let points = sweep
        .par_iter()
        .map(|&(l, j)| {
            let fam = BandFamily::new(l, j, &grid_for(l)?, 1e-12)?;
            tau_point(&fam, trials, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = tau_fit(&points)?;
    let tau_hat = fit.slope + 0.25;
    Ok(TauEstimate { fit, tau_hat, sigma_hat: tau_hat / 3.0, points })
}

/// Fit over the best ratio per distinct δ.
pub fn tau_fit(points: &[TauPoint]) -> Result<ExponentFit> {
    let mut best: Vec<(f64, f64)> = Vec::new();
    for p in points {
        match best.iter_mut().find(|(d, _)| (d - p.delta).abs() < 1e-12) {
            Some(e) => e.1 = e.1.max(p.ratio),
            None => best.push((p.delta, p.ratio)),
        }
    }
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_exponent(&best)
}

/// Axis-aligned grid holding the S_λ shell: ξ' in a square of half-width
/// 1.02·2^{5/4}λ, ξ₃ across the dyadic support, lattice centered on it.
pub fn shell_grid(lambda: f64, n: [usize; 3]) -> Result<GridSpec> {
    let (zlo, zhi) = dyadic_support(lambda);
    let r = A_OUTER * zhi;
    let span = [2.0 * r * 1.04, 2.0 * r * 1.04, (zhi - zlo) * 1.08];
    let mut extent = [0.0; 3];
    for a in 0..3 {
        if n[a] < 4 {
            return invalid("shell grids need at least 4 points per axis");
        }
        extent[a] = 2.0 * PI * (n[a] - 2) as f64 / span[a];
    }
    Ok(GridSpec::new(n, extent)?.with_center([0.0, 0.0, 0.5 * (zlo + zhi)]))
}

fn slambda_fits(lambda: f64, g: &GridSpec) -> bool {
    let (zlo, zhi) = dyadic_support(lambda);
    (0..=8).all(|iz| {
        let z = zlo + (zhi - zlo) * iz as f64 / 8.0;
        (0..64).all(|ia| {
            let a = 2.0 * PI * ia as f64 / 64.0;
            [0.98, 1.0, A_OUTER].iter().all(|q| g.contains_frequency(&[q * z * a.cos(), q * z * a.sin(), z]))
        })
    })
}

/// Lattice multiplier of S_λ = A·dyadic·T̂.
pub fn slambda_lattice(lambda: f64, g: &GridSpec, tol: f64) -> Result<LatticeMultiplier> {
    if !(lambda >= 2.0) {
        return invalid(format!("λ = {lambda} must be ≥ 2"));
    }
    if !slambda_fits(lambda, g) {
        return invalid(format!("the S_λ shell at λ = {lambda} exceeds the grid's Nyquist box"));
    }
    let w: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let xi = FrequencyPoint::from(g.frequency(i));
            let a = conic_a_weight(&xi);
            if a == 0.0 {
                0.0
            } else {
                a * dyadic_weight(lambda, xi.xi[2])
            }
        })
        .collect();
    let mask: Vec<bool> = w.iter().map(|x| *x > 0.0).collect();
    let t = helix_lattice(g, LatticeMethod::Auto, tol, Some(&mask))?;
    Ok(LatticeMultiplier { grid: g.clone(), values: t.iter().zip(&w).map(|(v, w)| v * *w).collect() })
}

/// Best L⁴ Rayleigh ratio for the full S_λ over random fields on its
/// support, Knapp packets of the central band, and the lattice peak mode.
pub fn slambda_norm_l4_lower(lambda: f64, g: &GridSpec, trials: usize, seed: u64) -> Result<L4Probe> {
    let m = slambda_lattice(lambda, g, 1e-12)?;
    let mut knapp = Vec::new();
    if PieceIndex::new(lambda, 0, 0).is_ok() {
        let p = PieceIndex::nearest_sector(lambda, 0, -PI / 2.0)?;
        knapp = piece_knapp_fields(&p, &m)?;
    }
    let key = SeedKey::piece(seed, lambda, i32::MIN, 0);
    probe_l4(&m, &support_of(&m), trials, key, &knapp)
}

/// ‖(Σ_m |f_m|²)^{1/2}‖₄ / ‖f‖₄ for the sector family of aperture δ.
pub fn cordoba_ratio(delta: f64, g: &GridSpec, f: &SpectralField) -> Result<f64> {
    if !(delta > 0.0) {
        return invalid(format!("δ = {delta} must be positive"));
    }
    if !g.is_axis_aligned() || g.center[0] != 0.0 || g.center[1] != 0.0 {
        return invalid("sector decompositions need a grid centered at ξ' = 0");
    }
    let k = sector_count_for(delta);
    let fh = f.forward_transform()?;
    let denom = f.lp_norm(4.0)?;
    if denom == 0.0 {
        return Ok(1.0);
    }
    let angles: Vec<f64> = (0..g.len()).map(|i| FrequencyPoint::from(g.frequency(i)).angle()).collect();
    let spacing = 2.0 * PI / k as f64;
    let mut lists = vec![Vec::new(); k];
    for (i, a) in angles.iter().enumerate() {
        if fh.data[i].norm() == 0.0 {
            continue;
        }
        if k == 1 {
            lists[0].push((i, 1.0));
            continue;
        }
        let lo = (a.rem_euclid(2.0 * PI) / spacing).floor() as usize % k;
        for m in [lo, (lo + 1) % k] {
            let w = sector_weight_angle(k, m, *a);
            if w > 0.0 {
                lists[m].push((i, w));
            }
        }
    }
    let mut square = vec![0.0f64; g.len()];
    for list in lists.iter().filter(|l| !l.is_empty()) {
        let mut spec = SpectralField::zeros(g, Representation::Frequency);
        for &(i, w) in list {
            spec.data[i] = fh.data[i] * w;
        }
        let fm = spec.inverse_transform()?;
        square.par_iter_mut().zip(&fm.data).for_each(|(s, v)| *s += v.norm_sqr());
    }
    let num = (square.iter().map(|s| s * s).sum::<f64>() * g.cell_volume()).powf(0.25);
    Ok(num / denom)
}

/// Max Córdoba ratio over random annulus fields for each δ, and the fit.
pub fn cordoba_sweep(deltas: &[f64], g: &GridSpec, band: &Band, trials: usize, seed: u64) -> Result<(Vec<(f64, f64)>, ExponentFit)> {
    let mut pts = deltas
        .par_iter()
        .map(|&d| {
            let mut best: f64 = 0.0;
            for t in 0..trials as u64 {
                let key = SeedKey { seed, lambda: 0.0, j: 0, m: 0, trial: t };
                let f = random_test_field(key, g, band)?;
                if f.normalized {
                    best = best.max(cordoba_ratio(d, g, &f.field)?);
                }
            }
            Ok((d, best))
        })
        .collect::<Result<Vec<_>>>()?;
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fit = fit_exponent(&pts)?;
    Ok((pts, fit))
}

/// L⁴ lower bounds per λ for a conic region; None is the identity control.
#[derive(Clone, Debug, Serialize)]
pub struct RegionL4 {
    pub region: Option<RegionLabel>,
    pub values: Vec<(f64, f64)>,
    pub fit: ExponentFit,
}

/// Centered cubic-shaped grid holding |ξ| ≤ 2^{5/4}λ.
pub fn ball_grid(lambda: f64, n: usize) -> Result<GridSpec> {
    let (_, zhi) = dyadic_support(lambda);
    let l = PI * (n - 2) as f64 / (zhi * 1.04);
    GridSpec::new([n; 3], [l; 3])
}

/// Dyadic piece D_λ(|ξ|)·T̂ restricted to a conic region (None: no restriction).
pub fn region_lattice(region: Option<RegionLabel>, lambda: f64, g: &GridSpec, tol: f64) -> Result<LatticeMultiplier> {
    let cone: fn(&FrequencyPoint) -> f64 = match region {
        None => |_| 1.0,
        Some(RegionLabel::Elliptic) => elliptic_weight,
        Some(RegionLabel::Oscillatory) => oscillatory_weight,
        Some(RegionLabel::ConicA) => conic_a_weight,
        Some(RegionLabel::Transition) => return invalid("Transition is not a conic region"),
    };
    let w: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let xi = FrequencyPoint::from(g.frequency(i));
            let d = dyadic_weight(lambda, xi.norm());
            if d == 0.0 {
                0.0
            } else {
                d * cone(&xi)
            }
        })
        .collect();
    let mask: Vec<bool> = w.iter().map(|x| *x > 0.0).collect();
    let t = helix_lattice(g, LatticeMethod::Auto, tol, Some(&mask))?;
    Ok(LatticeMultiplier { grid: g.clone(), values: t.iter().zip(&w).map(|(v, w)| v * *w).collect() })
}

/// L⁴ lower bounds for the conically restricted, dyadically localized
/// multiplier across λ; `None` runs the identity control.
pub fn elliptic_oscillatory_l4(
    region: Option<RegionLabel>,
    lambdas: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RegionL4> {
    if let Some(r) = region {
        if r != RegionLabel::Elliptic && r != RegionLabel::Oscillatory {
            return invalid(format!("region must be Elliptic or Oscillatory, got {r}"));
        }
    }
    let values = lambdas
        .iter()
        .map(|&l| {
            let g = ball_grid(l, n)?;
            let m = match region {
                Some(_) => region_lattice(region, l, &g, 1e-12)?,
                None => LatticeMultiplier { grid: g.clone(), values: vec![Complex64::new(1.0, 0.0); g.len()] },
            };
            let support = if region.is_none() { vec![1.0; g.len()] } else { support_of(&m) };
            let probe = probe_l4(&m, &support, trials, SeedKey::piece(seed, l, -1000, 0), &[])?;
            Ok((l, probe.best))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&values)?;
    Ok(RegionL4 { region, values, fit })
}

/// sup over the lattice of (1+|ξ|²)^{s/2}·D_λ(|ξ|)·|T̂(ξ)|: the exact
/// L² → H^{s,2} norm of the dyadic piece of T on the grid.
pub fn sobolev_gain(lambda: f64, s: f64, n: usize) -> Result<f64> {
    let g = ball_grid(lambda, n)?;
    let m = region_lattice(None, lambda, &g, 1e-12)?;
    Ok((0..g.len())
        .map(|i| {
            let xi = g.frequency(i);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            (1.0 + r2).powf(s / 2.0) * m.values[i].norm()
        })
        .fold(0.0, f64::max))
}

/// Sobolev gains across λ and their power-law fit (expected slope s − 1/3).
pub fn sobolev_sweep(lambdas: &[f64], s: f64, n: usize) -> Result<(Vec<(f64, f64)>, ExponentFit)> {
    let pts = lambdas.iter().map(|&l| Ok((l, sobolev_gain(l, s, n)?))).collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&pts)?;
    Ok((pts, fit))
}

/// Band ranges of every λ in a list, flattened into (λ, j) pairs.
pub fn all_bands(lambdas: &[f64]) -> Result<Vec<(f64, i32)>> {
    let mut out = Vec::new();
    for &l in lambdas {
        let (lo, hi) = band_range(l)?;
        for j in lo..=hi {
            out.push((l, j));
        }
    }
    Ok(out)
}
