//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use conelab::curves::{alpha_cos_margin, Curve};
use conelab::decomposition::{reconstruction_error, telescoping_error};
use conelab::estimator::{
    cordoba_sweep, shell_grid, slambda_norm_l4_lower, tau_estimate, tau_point, BandFamily, SquareFunctionResult,
};
use conelab::grid::{random_test_field, Band, GridSpec};
use conelab::multiplier::{decay_fit, log_spaced, stationary_phase_errors};
use conelab::report::csv_string;
use conelab::rng::SeedKey;
use conelab::sweep::{
    kernel_fits, run_kernel_sweep, run_sweep, sweep_fits, BandSelection, PieceRecord, SweepConfig,
};
use conelab::fit::fit_exponent;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const LAMBDAS: [f64; 4] = [512.0, 1024.0, 2048.0, 4096.0];

fn c1() -> Outcome {
    let f = decay_fit([0.5, 0.0, 1.0], &log_spaced(1e2, 1e4, 33), 1e-12).unwrap();
    outcome(f.slope <= -4.0, format!("elliptic slope {:.2} (≤ −4)", f.slope))
}

fn c2() -> Outcome {
    let rs = log_spaced(1e2, 1e4, 33);
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [[1.5, 0.0, 1.0], [2.0, 0.0, 1.0]] {
        let f = decay_fit(d, &rs, 1e-12).unwrap();
        pass &= (f.slope + 0.5).abs() <= 0.05;
        parts.push(format!("{:?}: {:.4}", d, f.slope));
    }
    outcome(pass, format!("oscillatory slopes {} (−0.5 ± 0.05)", parts.join(", ")))
}

fn c3() -> Outcome {
    let e = stationary_phase_errors([1.5, 0.0, 1.0], &[1e3, 1e4, 1e5], 1e-12).unwrap();
    let monotone = e.windows(2).all(|w| w[1].1 < w[0].1);
    outcome(
        e[0].1 <= 0.05 && monotone,
        format!("rel errors {:.2e}, {:.2e}, {:.2e}", e[0].1, e[1].1, e[2].1),
    )
}

fn c4() -> Outcome {
    let worst = LAMBDAS.iter().chain(&[8.0, 64.0]).map(|&l| reconstruction_error(l, 10_000, 11).unwrap()).fold(0.0, f64::max);
    let tele = telescoping_error(10_000, 11);
    outcome(worst <= 1e-10 && tele <= 1e-12, format!("partition {worst:.2e} (≤ 1e−10), dyadic {tele:.2e} (≤ 1e−12)"))
}

fn sweep_outcomes() -> (Outcome, Outcome, Outcome) {
    let cfg = SweepConfig::default();
    let recs: Vec<PieceRecord> = run_sweep(&cfg).unwrap().iter().map(|r| PieceRecord::from_norms(r, cfg.seed)).collect();
    let f = sweep_fits(&recs).unwrap();
    let line = |prefix: &str| {
        f.fits
            .iter()
            .filter(|r| r.experiment.starts_with(prefix))
            .map(|r| format!("{} vs {} {:.3}", r.experiment, r.x_name, r.slope))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let c5 = outcome(f.criterion_pass("C5"), line("C5"));

    let k = kernel_fits(&recs).unwrap();
    let cap = &k.checks[1];
    // Domination across every band at λ = 1024. The A-truncated top bands
    // cannot reach the capture target within the grid budget; their l1 sits
    // two orders below Cδ, so they enter the domination check only.
    let all_j = SweepConfig { lambdas: vec![1024.0], bands: BandSelection::All, ..cfg.clone() };
    let extra: Vec<PieceRecord> = run_kernel_sweep(&all_j).unwrap().iter().map(|k| PieceRecord::from_kernel(k, cfg.seed)).collect();
    let worst = recs.iter().chain(&extra).map(|r| r.kernel_l1 / (k.domination_constant * r.delta)).fold(0.0, f64::max);
    let low: Vec<String> = extra.iter().filter(|r| r.mass_capture < 0.95).map(|r| format!("j={} m={} ({:.3})", r.j, r.m, r.mass_capture)).collect();
    let c6 = outcome(
        k.fits.iter().all(|r| r.pass) && worst <= 1.0 + 1e-12 && cap.pass,
        format!(
            "{}; C = {:.3}, worst l1/(Cδ) over all j at λ=1024 = {:.3}, min capture {:.3}; below-target capture outside the gated sweep: {}",
            line("C6"),
            k.domination_constant,
            worst,
            cap.value,
            if low.is_empty() { "none".to_string() } else { low.join(", ") }
        ),
    );
    let l4 = f.checks.iter().find(|c| c.name.starts_with("C7")).unwrap();
    let c7 = outcome(f.criterion_pass("C7"), format!("{}; max l4/interp {:.3}", line("C7"), l4.value));
    (c5, c6, c7)
}

fn c8() -> Outcome {
    let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0]
        .iter()
        .map(|&l| (l, slambda_norm_l4_lower(l, &shell_grid(l, [128, 128, 64]).unwrap(), 20, 1).unwrap().best))
        .collect();
    let f = fit_exponent(&pts).unwrap();
    outcome(f.slope <= -1.0 / 6.0 + 0.05, format!("S_λ L⁴ slope {:.4} (≤ −0.1167)", f.slope))
}

fn tau_grid(l: f64) -> conelab::Result<GridSpec> {
    shell_grid(l, if l <= 16.0 { [64, 64, 32] } else { [128, 128, 64] })
}

fn c9_c10() -> (Outcome, Outcome) {
    let sweep = [(8.0, 0), (16.0, 0), (32.0, 0), (64.0, 0)];
    let est = tau_estimate(&sweep, tau_grid, 20, 1).unwrap();
    let mut runs: Vec<SquareFunctionResult> = est.points.iter().flat_map(|p| p.runs.clone()).collect();
    // Ten random fields on the full lattice (not just the band support).
    let fam = BandFamily::new(32.0, 0, &tau_grid(32.0).unwrap(), 1e-12).unwrap();
    for t in 0..10 {
        let f = random_test_field(SeedKey::new(5).trial(t), &fam.grid, &Band::Full).unwrap();
        runs.push(fam.ratio(&f.field).unwrap());
    }
    runs.extend(tau_point(&fam, 2, 9).unwrap().runs);
    let cs = runs.iter().map(|r| r.lhs / ((r.sector_count as f64).sqrt() * r.rhs)).fold(0.0, f64::max);
    let pw = runs.iter().map(|r| r.pointwise_max).fold(0.0, f64::max);
    let g = GridSpec::new([256, 256, 2], [1.0, 1.0, 1.0]).unwrap();
    let ny = g.nyquist()[0];
    let (_, cf) = cordoba_sweep(&[0.25, 0.125, 0.0625, 0.03125], &g, &Band::Annulus { lo: 0.25 * ny, hi: 0.9 * ny }, 20, 1).unwrap();
    let c9 = outcome(
        cs <= 1.0 + 1e-10 && pw <= 1.0 + 1e-10 && cf.slope >= -0.05,
        format!("{} runs: max lhs/(√K rhs) {cs:.4}, pointwise {pw:.4}; Córdoba slope {:.4} (≥ −0.05)", runs.len(), cf.slope),
    );
    let s = est.fit.slope;
    let c10 = outcome(
        (-0.30..=0.0).contains(&s),
        format!("slope {s:.4} ∈ [−0.30, 0]; τ̂ = {:.4}, σ̂ = {:.4}", est.tau_hat, est.sigma_hat),
    );
    (c9, c10)
}

fn c11() -> Outcome {
    let g = GridSpec::new([32, 16, 64], [3.0, 2.0, 5.0]).unwrap();
    let f = random_test_field(SeedKey::new(3), &g, &Band::Full).unwrap().field;
    let back = f.forward_transform().unwrap().inverse_transform().unwrap();
    let round = f.data.iter().zip(&back.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let pars = (f.lp_norm(2.0).unwrap() - f.forward_transform().unwrap().l2_frequency().unwrap()).abs();

    let mut torsion: f64 = 0.0;
    for i in 0..=1000 {
        let t = -3.0 + 6.0 * i as f64 / 1000.0;
        torsion = torsion.max((Curve::Helix.torsion_det(t) - 1.0).abs());
        let u = -1.0 + 2.0 * i as f64 / 1000.0;
        torsion = torsion.max((Curve::TwistedCubic.torsion_det(u) - 12.0).abs());
    }
    let mut margin = f64::INFINITY;
    for d in [0.05, 0.1, 0.25] {
        for i in 0..=10_000 {
            let t = 10.0 * d + (PI - 10.0 * d) * i as f64 / 10_000.0;
            margin = margin.min(alpha_cos_margin(d, t)).min(alpha_cos_margin(d, -t));
        }
    }

    let cfg = SweepConfig { lambdas: vec![512.0, 1024.0], trials: 3, ..SweepConfig::default() };
    let csv = || {
        let recs: Vec<PieceRecord> = run_sweep(&cfg).unwrap().iter().map(|r| PieceRecord::from_norms(r, cfg.seed)).collect();
        csv_string(&["rerun".into()], &recs).unwrap()
    };
    let identical = csv() == csv();
    outcome(
        round <= 1e-10 && pars <= 1e-10 && torsion <= 1e-12 && margin >= 0.0 && identical,
        format!(
            "roundtrip {round:.1e}, Parseval {pars:.1e}, torsion {torsion:.1e}, min(α − cos t − t²/10) {margin:.3e}, rerun identical {identical}"
        ),
    )
}

fn report(name: &str, o: &Outcome, t: Instant) -> bool {
    println!(
        "{} criterion {name}: {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
    o.pass
}

fn main() {
    let mut ok = true;
    let t = Instant::now();
    ok &= report("1", &c1(), t);
    let t = Instant::now();
    ok &= report("2", &c2(), t);
    let t = Instant::now();
    ok &= report("3", &c3(), t);
    let t = Instant::now();
    ok &= report("4", &c4(), t);
    let t = Instant::now();
    let (c5, c6, c7) = sweep_outcomes();
    ok &= report("5", &c5, t);
    ok &= report("6", &c6, t);
    ok &= report("7", &c7, t);
    let t = Instant::now();
    ok &= report("8", &c8(), t);
    let t = Instant::now();
    let (c9, c10) = c9_c10();
    ok &= report("9", &c9, t);
    ok &= report("10", &c10, t);
    let t = Instant::now();
    ok &= report("11", &c11(), t);
    if !ok {
        std::process::exit(1);
    }
}
