//! Extended Kalman filter with the linearised two-body transition matrix.

use nalgebra::RowVector6;
use serde::{Deserialize, Serialize};

use super::{Covariance6, EstimatorError, FilterKind, NoiseConfig, OrbitEstimator, Prior};
use crate::dynamics::{measure, measurement_jacobian, state_transition_matrix, Propagator, RangeObservation, StateVector, Stm6};
use crate::frames::Epoch;
use crate::linalg::symmetrize;

/// How the EKF moves its mean between epochs. The covariance always uses
/// the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EkfPrediction {
    /// X̂⁻ = A·X̂ with A = I + F·dt. An Euler step: at GEO with dt = 24 s it
    /// drifts by tens of metres per epoch.
    Linearized,
    /// X̂⁻ from RK4 integration of the full force model.
    #[default]
    Integrated,
}

/// X̂⁻ = A X̂, P⁻ = A P Aᵀ + Q.
pub fn ekf_predict(
    estimate: &StateVector,
    cov: &Covariance6,
    stm: &Stm6,
    process: &Covariance6,
) -> (StateVector, Covariance6) {
    (StateVector(stm * estimate.0), symmetrize(&(stm * cov * stm.transpose() + process)))
}

/// Scalar-measurement Kalman update with innovation `innovation`, Jacobian
/// row `h` and measurement variance `r`. P = (I − K H) P⁻, symmetrised.
pub fn kalman_update(
    predicted: &StateVector,
    predicted_cov: &Covariance6,
    innovation: f64,
    h: &RowVector6<f64>,
    r: f64,
) -> Result<(StateVector, Covariance6), EstimatorError> {
    let pht = predicted_cov * h.transpose();
    let s = (h * pht)[0] + r;
    if !(s > 0.0) || !s.is_finite() {
        return Err(EstimatorError::NonPositiveInnovationVariance(s));
    }
    let gain = pht / s;
    let state = StateVector(predicted.0 + gain * innovation);
    let cov = (Covariance6::identity() - gain * h) * predicted_cov;
    Ok((state, symmetrize(&cov)))
}

/// One EKF cycle on the range measurement: linear prediction through `stm`,
/// then an update with the nonlinear innovation y − h(X̂⁻).
pub fn ekf_step(
    prev_estimate: &StateVector,
    prev_cov: &Covariance6,
    stm: &Stm6,
    obs: &RangeObservation,
    noise: &NoiseConfig,
) -> Result<(StateVector, Covariance6), EstimatorError> {
    let (pred, pred_cov) = ekf_predict(prev_estimate, prev_cov, stm, &noise.process_matrix());
    range_update(&pred, &pred_cov, obs, noise.measurement_var)
}

fn range_update(
    pred: &StateVector,
    pred_cov: &Covariance6,
    obs: &RangeObservation,
    r: f64,
) -> Result<(StateVector, Covariance6), EstimatorError> {
    let h = measurement_jacobian(pred)?;
    kalman_update(pred, pred_cov, obs.value - measure(pred), &h, r)
}

#[derive(Debug, Clone)]
pub struct ExtendedKalmanFilter {
    propagator: Propagator,
    noise: NoiseConfig,
    prediction: EkfPrediction,
    current: Option<(Epoch, StateVector, Covariance6)>,
}

impl ExtendedKalmanFilter {
    pub fn new(propagator: Propagator, noise: NoiseConfig, prediction: EkfPrediction) -> Self {
        Self {
            propagator,
            noise,
            prediction,
            current: None,
        }
    }
}

impl OrbitEstimator for ExtendedKalmanFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Ekf
    }

    fn initialize(&mut self, epoch: Epoch, prior: &Prior, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (x, p) = range_update(&prior.mean, &prior.covariance, obs, self.noise.measurement_var)?;
        self.current = Some((epoch, x, p));
        Ok(x)
    }

    fn step(&mut self, epoch: Epoch, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (prev_epoch, x, p) = self.current.ok_or(EstimatorError::NotInitialized)?;
        let stm = state_transition_matrix(&x, epoch - prev_epoch, self.propagator.config.mu_earth)?;
        let (x, p) = match self.prediction {
            EkfPrediction::Linearized => ekf_step(&x, &p, &stm, obs, &self.noise)?,
            EkfPrediction::Integrated => {
                let (_, pred_cov) = ekf_predict(&x, &p, &stm, &self.noise.process_matrix());
                let pred = self.propagator.advance(&x, prev_epoch, epoch)?;
                range_update(&pred, &pred_cov, obs, self.noise.measurement_var)?
            }
        };
        self.current = Some((epoch, x, p));
        Ok(x)
    }

    fn covariance(&self) -> Option<Covariance6> {
        self.current.map(|(_, _, p)| p)
    }
}
