//! Versioned TOML run configuration.

use std::path::{Path, PathBuf};

use orbitfilter::estimators::{EkfPrediction, ResamplingScheme};
use orbitfilter::scenario::ScenarioConfig;
use orbitfilter::{FilterKind, NoiseConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::BenchError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub config_version: u32,
    /// Base seed; scenario and filter seeds are derived from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub filters: Vec<FilterKind>,
    pub noise: NoiseConfig,
    /// Prior covariance diagonal (m², (m/s)²).
    pub p0_diag: [f64; 6],
    pub particle_count: usize,
    pub ensemble_count: usize,
    pub roughening_k: f64,
    pub inflation_gamma: f64,
    pub resampling: ResamplingScheme,
    pub bpf_process_noise: bool,
    pub ekf_prediction: EkfPrediction,
    /// Also write the 6-component ECI residuals per (scenario, filter).
    pub write_eci_residuals: bool,
    pub scenarios: Vec<ScenarioConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            config_version: CONFIG_VERSION,
            seed: 1,
            output_dir: PathBuf::from("out"),
            filters: FilterKind::ALL.to_vec(),
            noise: NoiseConfig::default(),
            p0_diag: [10.0, 10.0, 10.0, 0.1, 0.1, 0.1],
            particle_count: 10,
            ensemble_count: 10,
            roughening_k: 0.1,
            inflation_gamma: 0.95,
            resampling: ResamplingScheme::default(),
            bpf_process_noise: false,
            ekf_prediction: EkfPrediction::default(),
            write_eci_residuals: false,
            scenarios: ScenarioConfig::constellation(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses `path`; relative `state_file` entries resolve against the
    /// directory containing the config file.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            BenchError::Config(msg) => BenchError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for s in &mut config.scenarios {
            if let Some(f) = &s.state_file {
                if f.is_relative() {
                    s.state_file = Some(base.join(f));
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration always serialises")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.config_version != CONFIG_VERSION {
            return bad(format!(
                "unsupported config_version {} (this build reads version {CONFIG_VERSION})",
                self.config_version
            ));
        }
        if self.scenarios.is_empty() {
            return bad("at least one scenario is required".into());
        }
        if self.filters.is_empty() {
            return bad("at least one filter is required".into());
        }
        if self.particle_count < 2 || self.ensemble_count < 2 {
            return bad(format!(
                "particle_count and ensemble_count must be >= 2, got {} and {}",
                self.particle_count, self.ensemble_count
            ));
        }
        if !(self.roughening_k >= 0.0 && self.roughening_k.is_finite()) {
            return bad(format!("roughening_k must be non-negative, got {}", self.roughening_k));
        }
        if !(self.inflation_gamma > 0.0 && self.inflation_gamma <= 2.0) {
            return bad(format!("inflation_gamma must lie in (0, 2], got {}", self.inflation_gamma));
        }
        if self.p0_diag.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return bad("p0_diag entries must be finite and non-negative".into());
        }
        self.noise.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        let mut ids = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            s.validate().map_err(|e| BenchError::Config(format!("scenario {}: {e}", s.id())))?;
            let id = s.id();
            if id.is_empty() || id.contains(['/', '\\']) || id.contains("__") {
                return bad(format!("scenario id '{id}' cannot be used in file names"));
            }
            if !ids.insert(id.clone()) {
                return bad(format!("duplicate scenario id '{id}'; set distinct `name`s"));
            }
        }
        let mut seen = Vec::new();
        for f in &self.filters {
            if seen.contains(f) {
                return bad(format!("filter {f} listed twice"));
            }
            seen.push(*f);
        }
        Ok(())
    }

    /// SHA-256 of the configuration with `output_dir` cleared, so that the
    /// hash does not depend on where results are written.
    pub fn content_hash(&self) -> String {
        let canonical = RunConfig {
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        hex(&Sha256::digest(canonical.to_toml().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(c.scenarios.len(), 5);
        assert_eq!(c.filters.len(), 5);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let c = RunConfig::from_toml("config_version = 1\nfilters = [\"EKF\", \"BPF\"]\n").unwrap();
        assert_eq!(c.filters, vec![FilterKind::Ekf, FilterKind::Bpf]);
        assert_eq!(c.particle_count, 10);
        assert_eq!(c.noise, NoiseConfig::default());
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "config_version = 2",
            "config_version = 1\nfilters = []",
            "config_version = 1\nparticle_count = 1",
            "config_version = 1\nunknown_key = 3",
            "config_version = 1\nfilters = [\"KF\"]",
            "config_version = 1\nfilters = [\"EKF\", \"EKF\"]",
            "config_version = 1\n[[scenarios]]\ncadence_s = -1.0",
            "config_version = 1\n[[scenarios]]\nname = \"a\"\n[[scenarios]]\nname = \"a\"",
            "config_version = 1\n[noise]\nmeasurement_var = 0.0",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(BenchError::Config(_))), "{text}");
        }
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: PathBuf::from("/elsewhere"),
            ..a.clone()
        };
        assert_eq!(a.content_hash(), b.content_hash());
        let c = RunConfig { seed: 99, ..a.clone() };
        assert_ne!(a.content_hash(), c.content_hash());
    }
}
