//! Experiment configuration: a flat JSON document, every field overridable
//! from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use kicked_rotor::{RotorParams64, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Evolve,
    Spectrum,
    Classical,
    Fit,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalAction {
    Section,
    Diffusion,
    Island,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepRanges {
    pub k: Vec<f64>,
    pub tau: Vec<f64>,
    #[serde(rename = "M")]
    pub m: Vec<u32>,
}

/// One experiment. Unset fields fall back to mode-specific defaults when the
/// run starts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub mode: Mode,

    // rotor parameters
    pub k: f64,
    pub tau: f64,
    #[serde(rename = "M")]
    pub m_period: u32,
    pub variant: String,
    /// Classical-only alternative to (k, tau); implies k = kappa, tau = 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,

    // propagation
    pub kicks: u64,
    pub mmax: usize,
    pub record_every: u64,
    /// When > 0, also emit the distribution averaged over the last
    /// `average_window` kicks (the stationary lineshape).
    pub average_window: u64,

    // spectrum
    pub ambient: usize,
    pub d: usize,
    #[serde(rename = "M_list")]
    pub m_list: Vec<u32>,
    pub cutoff: f64,
    pub band_stat: String,

    // classical
    pub action: ClassicalAction,
    pub n_traj: usize,
    pub l0: f64,
    pub theta0: f64,
    pub seed: u64,

    // fit
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub floor: f64,

    // sweep
    pub sweep: SweepRanges,
    pub workers: usize,

    // io
    pub out: PathBuf,
    pub prefix: String,
    pub gnuplot: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Evolve,
            k: 4.0,
            tau: 2.0,
            m_period: 1,
            variant: "plain_kr".into(),
            kappa: None,
            kicks: 1000,
            mmax: 1024,
            record_every: 0,
            average_window: 0,
            ambient: 4096,
            d: 1024,
            m_list: vec![2, 5, 10, 20, 50, 100, 200],
            cutoff: 1e-20,
            band_stat: "mean".into(),
            action: ClassicalAction::Section,
            n_traj: 400,
            l0: 0.0,
            theta0: 0.0,
            seed: 1,
            input: None,
            floor: 1e-15,
            sweep: SweepRanges::default(),
            workers: 0,
            out: PathBuf::from("."),
            prefix: String::new(),
            gnuplot: false,
        }
    }
}

impl ExperimentConfig {
    /// Loads a config file; a run manifest (with the config under a
    /// `config` key) is accepted too, so any run can be replayed from its
    /// manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).context("config is not valid JSON")?;
        let config_value = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        let config: ExperimentConfig =
            serde_json::from_value(config_value).context("malformed config")?;
        Ok(config)
    }

    /// Rotor parameters for quantum modes.
    pub fn rotor_params(&self) -> Result<RotorParams64> {
        let variant: Variant = self
            .variant
            .parse()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        RotorParams64::new(self.k, self.tau, self.m_period, variant)
            .map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// Stochasticity parameter for classical modes: explicit `kappa` wins,
    /// otherwise k * tau.
    pub fn classical_kappa(&self) -> f64 {
        self.kappa.unwrap_or(self.k * self.tau)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode != Mode::Fit {
            self.rotor_params()?;
        }
        if let Some(kappa) = self.kappa {
            if !kappa.is_finite() || kappa < 0.0 {
                bail!("kappa must be finite and >= 0, got {kappa}");
            }
        }
        if self.mode == Mode::Evolve && self.mmax < 2 {
            bail!("mmax must be at least 2");
        }
        if self.mode == Mode::Spectrum {
            if self.d > self.ambient {
                bail!("d={} exceeds ambient={}", self.d, self.ambient);
            }
            if self.m_list.is_empty() {
                bail!("M_list must not be empty");
            }
            if self.cutoff <= 0.0 {
                bail!("cutoff must be positive");
            }
        }
        if self.mode == Mode::Sweep && self.sweep_combinations().is_empty() {
            bail!("sweep ranges are empty");
        }
        if self.mode == Mode::Fit && self.input.is_none() {
            bail!("fit mode needs an input file");
        }
        Ok(())
    }

    /// Cross product of the sweep ranges, falling back to the base value
    /// for any axis left empty.
    pub fn sweep_combinations(&self) -> Vec<(f64, f64, u32)> {
        let ks = if self.sweep.k.is_empty() { vec![self.k] } else { self.sweep.k.clone() };
        let taus =
            if self.sweep.tau.is_empty() { vec![self.tau] } else { self.sweep.tau.clone() };
        let ms = if self.sweep.m.is_empty() { vec![self.m_period] } else { self.sweep.m.clone() };
        let mut combos = Vec::new();
        for &k in &ks {
            for &tau in &taus {
                for &m in &ms {
                    combos.push((k, tau, m));
                }
            }
        }
        combos
    }
}
