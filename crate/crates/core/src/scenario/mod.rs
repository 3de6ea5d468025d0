//! Synthetic NavIC-like truth generation.
//!
//! GEO satellites sit on circular equatorial orbits over their slot
//! longitude; GSO satellites share the radius but are inclined, starting at
//! the ascending node above their equator-crossing longitude. The truth is
//! integrated with the full force model at a fine step and sampled at the
//! observation cadence, with Gaussian range noise added per sample.

mod state_file;

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{GEOSTATIONARY_RADIUS, MU_EARTH};
use crate::dynamics::{
    measure, DynamicsError, ForceModelConfig, Propagator, RangeObservation, StateVector,
};
use crate::estimators::seeded_rng;
use crate::frames::{gmst, kepler_to_cartesian, Epoch, FrameError, KeplerianElements};

pub use state_file::{load_state_file, parse_state_file, write_state_file, STATE_FILE_HEADER};

/// NavIC geostationary slot longitudes, degrees east.
pub const GEO_SLOTS_DEG: [f64; 3] = [32.5, 83.0, 131.0];
/// NavIC geosynchronous equator-crossing longitudes, degrees east.
pub const GSO_CROSSINGS_DEG: [f64; 2] = [55.0, 111.75];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: epoch {epoch} does not increase")]
    NonMonotone { line: usize, epoch: f64 },
    #[error("state file has no data rows")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SatelliteKind {
    #[serde(rename = "GEO", alias = "geo")]
    Geo,
    #[serde(rename = "GSO", alias = "gso")]
    Gso,
}

impl fmt::Display for SatelliteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SatelliteKind::Geo => "GEO",
            SatelliteKind::Gso => "GSO",
        })
    }
}

impl FromStr for SatelliteKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "geo" => Ok(SatelliteKind::Geo),
            "gso" => Ok(SatelliteKind::Gso),
            _ => Err(ScenarioError::InvalidConfig(format!("unknown satellite kind '{s}' (expected geo or gso)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Identifier used in report rows and file names; derived from the kind
    /// and longitude when empty.
    pub name: String,
    pub satellite_kind: SatelliteKind,
    pub geo_longitude_deg: f64,
    pub gso_crossing_deg: f64,
    pub gso_inclination_deg: f64,
    pub epoch_label: String,
    pub duration_s: f64,
    pub cadence_s: f64,
    pub truth_step_s: f64,
    pub obs_noise_var: f64,
    /// Offset from truth to the filters' initial estimate (m, m/s).
    pub init_perturbation: [f64; 6],
    pub seed: u64,
    pub force_model: ForceModelConfig,
    /// Read truth and observations from this state file instead of
    /// generating them.
    pub state_file: Option<std::path::PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: String::new(),
            satellite_kind: SatelliteKind::Geo,
            geo_longitude_deg: 83.0,
            gso_crossing_deg: 55.0,
            gso_inclination_deg: 29.0,
            epoch_label: "2020-03-01T00:00:00 TT".to_string(),
            duration_s: 3600.0,
            cadence_s: 24.0,
            truth_step_s: 1.0,
            obs_noise_var: 1.0,
            init_perturbation: [10.0, 10.0, 10.0, 0.1, 0.1, 0.1],
            seed: 1,
            force_model: ForceModelConfig::default(),
            state_file: None,
        }
    }
}

impl ScenarioConfig {
    pub fn geo(longitude_deg: f64) -> Self {
        Self {
            satellite_kind: SatelliteKind::Geo,
            geo_longitude_deg: longitude_deg,
            ..Self::default()
        }
    }

    pub fn gso(crossing_deg: f64) -> Self {
        Self {
            satellite_kind: SatelliteKind::Gso,
            gso_crossing_deg: crossing_deg,
            ..Self::default()
        }
    }

    /// The five NavIC-like satellites: three GEO slots and two GSO
    /// crossings, seeded 1 to 5.
    pub fn constellation() -> Vec<Self> {
        GEO_SLOTS_DEG
            .iter()
            .map(|&l| Self::geo(l))
            .chain(GSO_CROSSINGS_DEG.iter().map(|&c| Self::gso(c)))
            .zip(1..)
            .map(|(s, seed)| Self { seed, ..s })
            .collect()
    }

    /// `name`, or e.g. `GEO-83E` / `GSO-111.75E`.
    pub fn id(&self) -> String {
        if !self.name.is_empty() {
            return self.name.clone();
        }
        let lon = match self.satellite_kind {
            SatelliteKind::Geo => self.geo_longitude_deg,
            SatelliteKind::Gso => self.gso_crossing_deg,
        };
        format!("{}-{}E", self.satellite_kind, lon)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::InvalidConfig(msg));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if !(self.cadence_s > 0.0 && self.cadence_s.is_finite()) {
            return bad(format!("cadence_s must be positive, got {}", self.cadence_s));
        }
        if !(self.truth_step_s > 0.0 && self.truth_step_s <= self.cadence_s) {
            return bad(format!(
                "truth_step_s must lie in (0, cadence_s = {}], got {}",
                self.cadence_s, self.truth_step_s
            ));
        }
        if !(self.obs_noise_var >= 0.0 && self.obs_noise_var.is_finite()) {
            return bad(format!("obs_noise_var must be non-negative, got {}", self.obs_noise_var));
        }
        if self.init_perturbation.iter().any(|v| !v.is_finite()) {
            return bad("init_perturbation must be finite".to_string());
        }
        let lon_ok = |l: f64| (-180.0..=360.0).contains(&l);
        match self.satellite_kind {
            SatelliteKind::Geo if !lon_ok(self.geo_longitude_deg) => {
                bad(format!("geo_longitude_deg {} outside [-180, 360]", self.geo_longitude_deg))
            }
            SatelliteKind::Gso if !lon_ok(self.gso_crossing_deg) => {
                bad(format!("gso_crossing_deg {} outside [-180, 360]", self.gso_crossing_deg))
            }
            SatelliteKind::Gso if !(0.0..=180.0).contains(&self.gso_inclination_deg) => {
                bad(format!("gso_inclination_deg {} outside [0, 180]", self.gso_inclination_deg))
            }
            _ => Ok(()),
        }?;
        self.force_model.validate().map_err(ScenarioError::from)
    }

    /// Observation epochs 0, cadence, 2·cadence, … up to the duration.
    pub fn epochs(&self) -> Vec<Epoch> {
        let count = (self.duration_s / self.cadence_s + 1e-9).floor() as usize;
        (0..=count).map(|k| Epoch(k as f64 * self.cadence_s)).collect()
    }

    /// Greenwich sidereal angle at t₀.
    pub fn gmst0(&self) -> f64 {
        gmst(self.force_model.reference_epoch_j2000_s)
    }
}

/// Initial orbit for the configured satellite at t₀.
pub fn build_initial_elements(config: &ScenarioConfig) -> Result<KeplerianElements, ScenarioError> {
    config.validate()?;
    let theta0 = config.gmst0();
    let elements = match config.satellite_kind {
        SatelliteKind::Geo => KeplerianElements {
            semi_major_axis: GEOSTATIONARY_RADIUS,
            eccentricity: 0.0,
            inclination: 0.0,
            raan: 0.0,
            arg_perigee: 0.0,
            true_anomaly: (config.geo_longitude_deg.to_radians() + theta0).rem_euclid(std::f64::consts::TAU),
        },
        SatelliteKind::Gso => KeplerianElements {
            semi_major_axis: GEOSTATIONARY_RADIUS,
            eccentricity: 0.0,
            inclination: config.gso_inclination_deg.to_radians(),
            raan: (config.gso_crossing_deg.to_radians() + theta0).rem_euclid(std::f64::consts::TAU),
            arg_perigee: 0.0,
            true_anomaly: 0.0,
        },
    };
    elements.validate()?;
    Ok(elements)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthDataset {
    pub states: Vec<(Epoch, StateVector)>,
    pub observations: Vec<(Epoch, RangeObservation)>,
    pub meta: ScenarioConfig,
}

impl TruthDataset {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Truth at t₀ plus the configured perturbation.
    pub fn initial_estimate(&self) -> Option<StateVector> {
        let (_, s0) = self.states.first()?;
        Some(StateVector(s0.0 + nalgebra::Vector6::from(self.meta.init_perturbation)))
    }
}

/// Truth trajectory and noisy range observations on the cadence grid.
pub fn generate_truth(config: &ScenarioConfig) -> Result<TruthDataset, ScenarioError> {
    let elements = build_initial_elements(config)?;
    let mut state = kepler_to_cartesian(&elements, config.force_model.mu_earth)?;
    let propagator = Propagator::new(config.force_model, config.truth_step_s);
    let epochs = config.epochs();
    let mut rng = seeded_rng(config.seed);
    let sigma = config.obs_noise_var.sqrt();

    let mut states = Vec::with_capacity(epochs.len());
    let mut observations = Vec::with_capacity(epochs.len());
    for (k, &t) in epochs.iter().enumerate() {
        if k > 0 {
            state = propagator.advance(&state, epochs[k - 1], t)?;
        }
        let noise: f64 = rng.sample(StandardNormal);
        states.push((t, state));
        observations.push((t, RangeObservation::new(measure(&state) + sigma * noise, config.obs_noise_var)));
    }
    Ok(TruthDataset {
        states,
        observations,
        meta: config.clone(),
    })
}

/// Loads `config.state_file` when set, otherwise generates the truth.
pub fn load_truth(config: &ScenarioConfig) -> Result<TruthDataset, ScenarioError> {
    match &config.state_file {
        Some(path) => {
            config.validate()?;
            load_state_file(path, config.clone())
        }
        None => generate_truth(config),
    }
}

/// Circular-orbit speed at the geostationary radius, m/s.
pub fn geostationary_speed() -> f64 {
    (MU_EARTH / GEOSTATIONARY_RADIUS).sqrt()
}
