//! Run configuration: TOML file, then flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use conelab::kernel::PieceGridPlan;
use conelab::sweep::{BandSelection, SectorSelection, SweepConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub directions: Vec<[f64; 3]>,
    pub rmin: f64,
    pub rmax: f64,
    pub points: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig { directions: vec![[0.5, 0.0, 1.0], [1.5, 0.0, 1.0], [2.0, 0.0, 1.0]], rmin: 1e2, rmax: 1e4, points: 33 }
    }
}

/// Experiments on the S_λ shell and on centered balls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellConfig {
    pub lambdas: Vec<f64>,
    pub n: [usize; 3],
    /// Points per axis for the |ξ| ~ λ ball grids.
    pub ball_n: usize,
    pub region_lambdas: Vec<f64>,
}

impl Default for ShellConfig {
    fn default() -> Self {
        ShellConfig {
            lambdas: vec![16.0, 32.0, 64.0, 128.0],
            n: [128, 128, 64],
            ball_n: 64,
            region_lambdas: vec![8.0, 16.0, 32.0, 64.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqfnConfig {
    pub deltas: Vec<f64>,
    pub n: usize,
    /// Bands checked against the Cauchy–Schwarz ceiling.
    pub lambdas: Vec<f64>,
}

impl Default for SqfnConfig {
    fn default() -> Self {
        SqfnConfig { deltas: vec![0.25, 0.125, 0.0625, 0.03125], n: 256, lambdas: vec![8.0, 16.0, 32.0, 64.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TauConfig {
    pub lambdas: Vec<f64>,
    pub bands: BandSelection,
    pub n_small: [usize; 3],
    pub n_large: [usize; 3],
    /// λ at or below which `n_small` is used.
    pub split: f64,
}

impl Default for TauConfig {
    fn default() -> Self {
        TauConfig {
            lambdas: vec![8.0, 16.0, 32.0, 64.0],
            bands: BandSelection::Central,
            n_small: [64, 64, 32],
            n_large: [128, 128, 64],
            split: 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevConfig {
    pub lambdas: Vec<f64>,
    pub s: Vec<f64>,
    pub n: usize,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        SobolevConfig { lambdas: vec![16.0, 32.0, 64.0, 128.0], s: vec![0.0, 1.0 / 6.0, 0.25, 1.0 / 3.0, 0.5], n: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub out: PathBuf,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub sweep: SweepConfig,
    pub decay: DecayConfig,
    pub shell: ShellConfig,
    pub sqfn: SqfnConfig,
    pub tau: TauConfig,
    pub sobolev: SobolevConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            out: PathBuf::from("results"),
            seed: 1,
            trials: 20,
            tol: 1e-10,
            sweep: SweepConfig::default(),
            decay: DecayConfig::default(),
            shell: ShellConfig::default(),
            sqfn: SqfnConfig::default(),
            tau: TauConfig::default(),
            sobolev: SobolevConfig::default(),
        }
    }
}

/// Overrides collected from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub bands: Option<BandSelection>,
    pub sectors: Option<SectorSelection>,
    pub plan: Option<PieceGridPlan>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, env_out: Option<PathBuf>) -> anyhow::Result<RunConfig> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        let file_sets_out = path.is_some() && cfg.out != RunConfig::default().out;
        if let (Some(o), false) = (env_out, file_sets_out) {
            cfg.out = o;
        }
        Ok(cfg)
    }

    /// Applies flags (which win over the file) and copies the shared seed,
    /// trial count and tolerance into the sweep section.
    pub fn apply(&mut self, command: &str, o: &Overrides) {
        self.command = command.to_string();
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if let Some(v) = o.bands {
            self.sweep.bands = v;
        }
        if let Some(v) = o.sectors {
            self.sweep.sectors = v;
        }
        if let Some(v) = o.plan {
            self.sweep.plan = v;
        }
        if let Some(ls) = &o.lambdas {
            match command {
                "tau" => self.tau.lambdas = ls.clone(),
                "sqfn" => self.sqfn.lambdas = ls.clone(),
                "sobolev" => self.sobolev.lambdas = ls.clone(),
                _ => self.sweep.lambdas = ls.clone(),
            }
        }
        self.sweep.seed = self.seed;
        self.sweep.trials = self.trials;
        self.sweep.tol = self.tol;
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("trials must be ≥ 1");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("tol must lie in (0, 1), got {}", self.tol);
        }
        let d = &self.decay;
        if !(d.rmin > 0.0 && d.rmax > d.rmin) || d.points < 4 {
            bail!("decay needs 0 < rmin < rmax and ≥ 4 points");
        }
        if d.directions.iter().any(|v| v[2] == 0.0 && v[0] == 0.0 && v[1] == 0.0) {
            bail!("decay direction must be nonzero");
        }
        for (name, ls) in [
            ("sweep", &self.sweep.lambdas),
            ("shell", &self.shell.lambdas),
            ("shell.region", &self.shell.region_lambdas),
            ("sqfn", &self.sqfn.lambdas),
            ("tau", &self.tau.lambdas),
            ("sobolev", &self.sobolev.lambdas),
        ] {
            if ls.iter().any(|l| !(*l >= 2.0 && l.is_finite())) {
                bail!("{name}: every λ must be finite and ≥ 2");
            }
        }
        if self.sqfn.deltas.iter().any(|d| !(*d > 0.0)) {
            bail!("sqfn: δ values must be positive");
        }
        self.sweep.validate().map_err(anyhow::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("seeds = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[sweep]\nlamdas = [8.0]").is_err());
        let cfg: RunConfig = toml::from_str("seed = 7\n[sweep]\nlambdas = [8.0, 16.0]").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.sweep.lambdas, vec![8.0, 16.0]);
    }

    #[test]
    fn flags_win() {
        let mut cfg: RunConfig = toml::from_str("seed = 7\ntrials = 3").unwrap();
        cfg.apply("norms", &Overrides { seed: Some(9), lambdas: Some(vec![64.0]), ..Default::default() });
        assert_eq!((cfg.seed, cfg.sweep.seed, cfg.trials, cfg.sweep.trials), (9, 9, 3, 3));
        assert_eq!(cfg.sweep.lambdas, vec![64.0]);
        cfg.apply("tau", &Overrides { lambdas: Some(vec![8.0]), ..Default::default() });
        assert_eq!(cfg.tau.lambdas, vec![8.0]);
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.sweep.lambdas = vec![4.0];
        assert!(cfg.validate().is_err());
    }
}
