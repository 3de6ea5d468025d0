//! The five orbit-determination backends behind one sequential interface.
//!
//! Every estimator is initialised from the same prior (mean, covariance) and
//! the observation at t₀, then advanced one observation epoch at a time,
//! emitting one state estimate per epoch.

mod bpf;
mod ekf;
mod enkf;
mod ls;
mod ukf;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix6, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, Propagator, RangeObservation, StateVector};
use crate::frames::Epoch;
use crate::linalg::psd_sqrt;

pub use bpf::{
    bpf_init, bpf_step, effective_sample_size, resample_indices, roughen, BootstrapParticleFilter, BpfStepOutput,
    ParticleSet, ResamplingScheme, RougheningConfig,
};
pub use ekf::{ekf_predict, ekf_step, kalman_update, EkfPrediction, ExtendedKalmanFilter};
pub use enkf::{enkf_init, enkf_step, Ensemble, EnsembleKalmanFilter, EnkfStepOutput};
pub use ls::{ls_step, LeastSquares};
pub use ukf::{
    generate_sigma_points, ukf_step, ukf_step_with, ukf_weights, SigmaPointSet, UkfParams, UkfWeights,
    UnscentedKalmanFilter,
};

/// 6×6 state covariance, blockwise m², m·m/s, (m/s)².
pub type Covariance6 = Matrix6<f64>;

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("degenerate measurement geometry: D·Dᵀ = 0")]
    DegenerateGeometry,
    #[error("innovation variance is not positive ({0})")]
    NonPositiveInnovationVariance(f64),
    #[error("covariance has no positive-semidefinite square root")]
    IndefiniteCovariance,
    #[error("all particle likelihoods vanished")]
    LikelihoodUnderflow,
    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),
    #[error("estimator used before initialisation")]
    NotInitialized,
}

/// Process (Q diagonal) and measurement (R) noise assumed by the filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub process_diag: [f64; 6],
    pub measurement_var: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            process_diag: [1e-3, 1e-3, 1e-3, 1e-6, 1e-6, 1e-6],
            measurement_var: 1.0,
        }
    }
}

impl NoiseConfig {
    pub fn process_matrix(&self) -> Covariance6 {
        Covariance6::from_diagonal(&Vector6::from(self.process_diag))
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.process_diag.iter().any(|&q| !(q > 0.0) || !q.is_finite()) {
            return Err(EstimatorError::InvalidConfig("process noise diagonal must be positive".into()));
        }
        if !(self.measurement_var > 0.0) {
            return Err(EstimatorError::InvalidConfig("measurement variance must be positive".into()));
        }
        Ok(())
    }
}

/// Prior mean and covariance at t₀, shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prior {
    pub mean: StateVector,
    pub covariance: Covariance6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FilterKind {
    #[serde(rename = "LS")]
    Ls,
    #[serde(rename = "EKF")]
    Ekf,
    #[serde(rename = "UKF")]
    Ukf,
    #[serde(rename = "EnKF")]
    Enkf,
    #[serde(rename = "BPF")]
    Bpf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 5] = [
        FilterKind::Ls,
        FilterKind::Ekf,
        FilterKind::Ukf,
        FilterKind::Enkf,
        FilterKind::Bpf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Ls => "LS",
            FilterKind::Ekf => "EKF",
            FilterKind::Ukf => "UKF",
            FilterKind::Enkf => "EnKF",
            FilterKind::Bpf => "BPF",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown filter '{s}' (expected LS, EKF, UKF, EnKF or BPF)"))
    }
}

/// A sequential orbit estimator.
pub trait OrbitEstimator {
    fn kind(&self) -> FilterKind;

    /// Starts the filter at `epoch` from `prior` and processes the first
    /// observation; returns the epoch-0 estimate.
    fn initialize(&mut self, epoch: Epoch, prior: &Prior, obs: &RangeObservation) -> Result<StateVector, EstimatorError>;

    /// Advances to `epoch` and processes `obs`.
    fn step(&mut self, epoch: Epoch, obs: &RangeObservation) -> Result<StateVector, EstimatorError>;

    /// Current covariance, for filters that carry one.
    fn covariance(&self) -> Option<Covariance6> {
        None
    }
}

/// Everything needed to build any of the five estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSettings {
    pub propagator: Propagator,
    pub noise: NoiseConfig,
    pub ukf: UkfParams,
    pub ekf_prediction: EkfPrediction,
    pub ensemble_count: usize,
    pub inflation_gamma: f64,
    pub particle_count: usize,
    pub roughening: RougheningConfig,
    pub resampling: ResamplingScheme,
    pub bpf_process_noise: bool,
    pub seed: u64,
}

impl FilterSettings {
    pub fn new(propagator: Propagator, noise: NoiseConfig) -> Self {
        Self {
            propagator,
            noise,
            ukf: UkfParams::default(),
            ekf_prediction: EkfPrediction::default(),
            ensemble_count: 10,
            inflation_gamma: 0.95,
            particle_count: 10,
            roughening: RougheningConfig::default(),
            resampling: ResamplingScheme::default(),
            bpf_process_noise: false,
            seed: 0,
        }
    }
}

pub fn build_estimator(kind: FilterKind, settings: &FilterSettings) -> Box<dyn OrbitEstimator + Send> {
    match kind {
        FilterKind::Ls => Box::new(LeastSquares::new(settings.propagator)),
        FilterKind::Ekf => Box::new(ExtendedKalmanFilter::new(
            settings.propagator,
            settings.noise,
            settings.ekf_prediction,
        )),
        FilterKind::Ukf => Box::new(UnscentedKalmanFilter::new(settings.propagator, settings.noise, settings.ukf)),
        FilterKind::Enkf => Box::new(EnsembleKalmanFilter::new(
            settings.propagator,
            settings.noise,
            settings.ensemble_count,
            settings.inflation_gamma,
            settings.seed,
        )),
        FilterKind::Bpf => Box::new(BootstrapParticleFilter::new(
            settings.propagator,
            settings.noise,
            settings.particle_count,
            settings.roughening,
            settings.resampling,
            settings.seed,
        )
        .with_process_noise(settings.bpf_process_noise)),
    }
}

/// Runs an estimator over an observation stream; the first observation is
/// consumed by `initialize`.
pub fn run_estimator(
    estimator: &mut dyn OrbitEstimator,
    prior: &Prior,
    observations: &[(Epoch, RangeObservation)],
) -> Result<Vec<(Epoch, StateVector)>, EstimatorError> {
    let Some(((t0, obs0), rest)) = observations.split_first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(observations.len());
    out.push((*t0, estimator.initialize(*t0, prior, obs0)?));
    for (epoch, obs) in rest {
        out.push((*epoch, estimator.step(*epoch, obs)?));
    }
    Ok(out)
}

/// `count` draws from MVN(mean, cov).
pub(crate) fn sample_mvn(
    mean: &StateVector,
    cov: &Covariance6,
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<StateVector>, EstimatorError> {
    use rand::Rng as _;
    let root = psd_sqrt(cov).ok_or(EstimatorError::IndefiniteCovariance)?;
    Ok((0..count)
        .map(|_| {
            let z = Vector6::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            StateVector(mean.0 + root * z)
        })
        .collect())
}

/// Arithmetic mean of a set of states.
pub(crate) fn mean_state(states: &[StateVector]) -> StateVector {
    let sum = states.iter().fold(Vector6::zeros(), |acc, s| acc + s.0);
    StateVector(sum / states.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_kind_round_trip() {
        for k in FilterKind::ALL {
            assert_eq!(k.name().parse::<FilterKind>().unwrap(), k);
        }
        assert_eq!("enkf".parse::<FilterKind>().unwrap(), FilterKind::Enkf);
        assert!("kf".parse::<FilterKind>().is_err());
    }

    #[test]
    fn noise_defaults() {
        let n = NoiseConfig::default();
        assert_eq!(n.process_diag, [1e-3, 1e-3, 1e-3, 1e-6, 1e-6, 1e-6]);
        assert_eq!(n.measurement_var, 1.0);
        assert!(n.validate().is_ok());
        assert!(NoiseConfig { measurement_var: 0.0, ..n }.validate().is_err());
    }

    #[test]
    fn mvn_zero_covariance_and_determinism() {
        let mean = StateVector::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let pts = sample_mvn(&mean, &Covariance6::zeros(), 5, &mut seeded_rng(3)).unwrap();
        assert!(pts.iter().all(|p| *p == mean));
        let cov = Covariance6::identity();
        let a = sample_mvn(&mean, &cov, 5, &mut seeded_rng(3)).unwrap();
        let b = sample_mvn(&mean, &cov, 5, &mut seeded_rng(3)).unwrap();
        assert_eq!(a, b);
    }
}
