//! Run configuration: a flat TOML file with dotted keys, validated on load,
//! defaulting to the reference parameter set.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use spinchain::dynamics::IntegratorConfig;
use spinchain::spin_model::ChainParams;
use spinchain::teleport::InputQubit;
use spinchain::Complex64;

/// Complete configuration of a run. An empty file yields the reference
/// parameters; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Rabi frequency, 2π·MHz.
    pub rabi: f64,
    pub output_dir: String,
    pub chain: ChainConfig,
    pub qubit: QubitConfig,
    pub integrator: IntegratorSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rabi: 0.1,
            output_dir: "out".into(),
            chain: ChainConfig::default(),
            qubit: QubitConfig::default(),
            integrator: IntegratorSection::default(),
            sweep: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    /// Larmor frequencies, 2π·MHz.
    pub omega: [f64; 4],
    /// First-neighbor coupling J.
    pub j1: f64,
    /// Second-neighbor coupling J'.
    pub j2: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        let p = ChainParams::reference();
        ChainConfig { omega: p.omega, j1: p.j1, j2: p.j2 }
    }
}

/// Input qubit amplitudes as [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitConfig {
    pub c0: [f64; 2],
    pub c1: [f64; 2],
}

impl Default for QubitConfig {
    fn default() -> Self {
        let q = InputQubit::reference();
        QubitConfig { c0: [q.c0.re, q.c0.im], c1: [q.c1.re, q.c1.im] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub max_phase_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hard_step: Option<f64>,
    pub max_steps: u64,
    pub samples_per_pulse: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        IntegratorSection {
            max_phase_step: c.max_phase_step,
            hard_step: c.hard_step,
            max_steps: c.max_steps,
            samples_per_pulse: c.samples_per_pulse,
        }
    }
}

/// Grid override for the sweep subcommands; each has its own default grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl SweepGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.chain_params().validate().map_err(|e| anyhow::anyhow!("chain: {e}"))?;
        self.input_qubit().map_err(|e| anyhow::anyhow!("qubit: {e}"))?;
        self.integrator_config()
            .validate()
            .map_err(|e| anyhow::anyhow!("integrator: {e}"))?;
        if !(self.rabi > 0.0 && self.rabi.is_finite()) {
            bail!("rabi must be positive, got {}", self.rabi);
        }
        if let Some(s) = &self.sweep {
            if s.points == 0 {
                bail!("sweep.points must be at least 1");
            }
            if !(s.start.is_finite() && s.stop.is_finite() && s.start > 0.0 && s.stop >= s.start)
            {
                bail!("sweep range must satisfy 0 < start <= stop");
            }
            if s.spacing == Spacing::Log && s.start <= 0.0 {
                bail!("log spacing needs a positive start");
            }
        }
        Ok(())
    }

    pub fn chain_params(&self) -> ChainParams {
        ChainParams { omega: self.chain.omega, j1: self.chain.j1, j2: self.chain.j2 }
    }

    pub fn input_qubit(&self) -> Result<InputQubit, spinchain::teleport::TeleportError> {
        InputQubit::new(
            Complex64::new(self.qubit.c0[0], self.qubit.c0[1]),
            Complex64::new(self.qubit.c1[0], self.qubit.c1[1]),
        )
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            max_phase_step: self.integrator.max_phase_step,
            hard_step: self.integrator.hard_step,
            max_steps: self.integrator.max_steps,
            samples_per_pulse: self.integrator.samples_per_pulse,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.chain_params(), ChainParams::reference());
        assert_eq!(c.rabi, 0.1);
        assert_eq!(c.input_qubit().unwrap(), InputQubit::reference());
    }

    #[test]
    fn round_trip_is_identity() {
        let mut c = RunConfig::default();
        c.chain.j2 = 0.7;
        c.rabi = 0.05;
        c.integrator.hard_step = Some(1e-5);
        c.sweep =
            Some(SweepGrid { start: 0.002, stop: 0.2, points: 60, spacing: Spacing::Log });
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn dotted_keys_accepted() {
        let c = RunConfig::parse("chain.j2 = 0.8\nqubit.c0 = [0.6, 0.0]\nqubit.c1 = [0.8, 0.0]\n")
            .unwrap();
        assert_eq!(c.chain.j2, 0.8);
        assert_eq!(c.qubit.c0, [0.6, 0.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("chain.j3 = 1.0").is_err());
        assert!(RunConfig::parse("typo = true").is_err());
    }

    #[test]
    fn bad_qubit_rejected() {
        let err = RunConfig::parse("qubit.c0 = [1.0, 0.0]\nqubit.c1 = [1.0, 0.0]")
            .unwrap_err()
            .to_string();
        assert!(err.contains("qubit"), "{err}");
        assert!(RunConfig::parse("qubit.c0 = [0.6, 0.0]\nqubit.c1 = [0.8, 0.0]").is_ok());
    }

    #[test]
    fn bad_chain_rejected() {
        assert!(RunConfig::parse("chain.omega = [0.0, 200.0, 400.0, 800.0]").is_err());
        assert!(RunConfig::parse("chain.j1 = -1.0").is_err());
    }

    #[test]
    fn grids() {
        let lin = SweepGrid { start: 0.0, stop: 1.0, points: 5, spacing: Spacing::Linear };
        assert_eq!(lin.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = SweepGrid { start: 0.002, stop: 0.2, points: 3, spacing: Spacing::Log };
        let v = log.values();
        assert!((v[1] - 0.02).abs() < 1e-12);
        assert_eq!(v.len(), 3);
    }
}
