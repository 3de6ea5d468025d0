//! Ensemble Kalman filter with multiplicative covariance scaling.
//!
//! The ensemble is drawn once from the prior and then only propagated and
//! shifted. At each epoch member deviations about the ensemble mean are
//! scaled by √γ, so the sample covariance is multiplied by γ. Every member
//! is moved by the common gain applied to its own innovation against the
//! shared observation (no perturbed observations).

use nalgebra::Vector6;

use super::{mean_state, sample_mvn, seeded_rng, Covariance6, EstimatorError, FilterKind, NoiseConfig, OrbitEstimator, Prior, Rng};
use crate::dynamics::{measure, Propagator, RangeObservation, StateVector};
use crate::frames::Epoch;
use crate::linalg::symmetrize;

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<StateVector>,
    pub inflation_gamma: f64,
}

impl Ensemble {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.members.len() < 2 {
            return Err(EstimatorError::InvalidConfig(format!(
                "ensemble needs at least 2 members, got {}",
                self.members.len()
            )));
        }
        if !(self.inflation_gamma > 0.0 && self.inflation_gamma <= 2.0) {
            return Err(EstimatorError::InvalidConfig(format!(
                "inflation gamma must lie in (0, 2], got {}",
                self.inflation_gamma
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> StateVector {
        mean_state(&self.members)
    }

    /// Unbiased sample covariance (denominator N − 1).
    pub fn sample_covariance(&self) -> Covariance6 {
        let mean = self.mean().0;
        let n = self.members.len() as f64;
        let sum = self.members.iter().fold(Covariance6::zeros(), |acc, m| {
            let d = m.0 - mean;
            acc + d * d.transpose()
        });
        sum / (n - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnkfStepOutput {
    pub ensemble: Ensemble,
    pub estimate: StateVector,
    pub covariance: Covariance6,
}

/// `count` MVN(mean, cov) draws from a seeded generator.
pub fn enkf_init(
    mean: &StateVector,
    cov: &Covariance6,
    count: usize,
    inflation_gamma: f64,
    rng: &mut Rng,
) -> Result<Ensemble, EstimatorError> {
    let ens = Ensemble {
        members: sample_mvn(mean, cov, count, rng)?,
        inflation_gamma,
    };
    ens.validate()?;
    Ok(ens)
}

/// Propagates every member with `propagate`, then applies the scaled-
/// covariance analysis update for the range observation.
pub fn enkf_step<F>(
    ens: &Ensemble,
    propagate: F,
    obs: &RangeObservation,
    noise: &NoiseConfig,
) -> Result<EnkfStepOutput, EstimatorError>
where
    F: Fn(&StateVector) -> Result<StateVector, EstimatorError>,
{
    ens.validate()?;
    let members = ens.members.iter().map(propagate).collect::<Result<Vec<_>, _>>()?;
    analysis(
        Ensemble {
            members,
            inflation_gamma: ens.inflation_gamma,
        },
        obs,
        noise,
    )
}

fn analysis(ens: Ensemble, obs: &RangeObservation, noise: &NoiseConfig) -> Result<EnkfStepOutput, EstimatorError> {
    let n = ens.members.len() as f64;
    let mean = ens.mean().0;
    let scale = ens.inflation_gamma.sqrt();
    let members: Vec<StateVector> = ens
        .members
        .iter()
        .map(|m| StateVector(mean + (m.0 - mean) * scale))
        .collect();

    let predicted: Vec<f64> = members.iter().map(measure).collect();
    let y_bar = predicted.iter().sum::<f64>() / n;
    let mut p_xx = Covariance6::zeros();
    let mut p_xy = Vector6::zeros();
    let mut p_yy = 0.0;
    for (m, y) in members.iter().zip(&predicted) {
        let d = m.0 - mean;
        let e = y - y_bar;
        p_xx += d * d.transpose();
        p_xy += d * e;
        p_yy += e * e;
    }
    p_xx /= n - 1.0;
    p_xy /= n - 1.0;
    p_yy = p_yy / (n - 1.0) + noise.measurement_var;
    if !(p_yy > 0.0) || !p_yy.is_finite() {
        return Err(EstimatorError::NonPositiveInnovationVariance(p_yy));
    }
    let gain = p_xy / p_yy;
    let estimate = StateVector(mean + gain * (obs.value - y_bar));
    let updated = members
        .iter()
        .zip(&predicted)
        .map(|(m, y)| StateVector(m.0 + gain * (obs.value - y)))
        .collect();
    let covariance = symmetrize(&(p_xx - gain * gain.transpose() * p_yy));
    Ok(EnkfStepOutput {
        ensemble: Ensemble {
            members: updated,
            inflation_gamma: ens.inflation_gamma,
        },
        estimate,
        covariance,
    })
}

#[derive(Debug, Clone)]
pub struct EnsembleKalmanFilter {
    propagator: Propagator,
    noise: NoiseConfig,
    count: usize,
    gamma: f64,
    rng: Rng,
    current: Option<(Epoch, Ensemble, Covariance6)>,
}

impl EnsembleKalmanFilter {
    pub fn new(propagator: Propagator, noise: NoiseConfig, count: usize, gamma: f64, seed: u64) -> Self {
        Self {
            propagator,
            noise,
            count,
            gamma,
            rng: seeded_rng(seed),
            current: None,
        }
    }

    pub fn ensemble(&self) -> Option<&Ensemble> {
        self.current.as_ref().map(|(_, e, _)| e)
    }
}

impl OrbitEstimator for EnsembleKalmanFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Enkf
    }

    fn initialize(&mut self, epoch: Epoch, prior: &Prior, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let ens = enkf_init(&prior.mean, &prior.covariance, self.count, self.gamma, &mut self.rng)?;
        let out = analysis(ens, obs, &self.noise)?;
        self.current = Some((epoch, out.ensemble, out.covariance));
        Ok(out.estimate)
    }

    fn step(&mut self, epoch: Epoch, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (prev_epoch, ens, _) = self.current.take().ok_or(EstimatorError::NotInitialized)?;
        let propagator = self.propagator;
        let out = enkf_step(&ens, |s| Ok(propagator.advance(s, prev_epoch, epoch)?), obs, &self.noise)?;
        self.current = Some((epoch, out.ensemble, out.covariance));
        Ok(out.estimate)
    }

    fn covariance(&self) -> Option<Covariance6> {
        self.current.as_ref().map(|(_, _, p)| *p)
    }
}
