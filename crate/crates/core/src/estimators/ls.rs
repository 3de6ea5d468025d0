//! Per-epoch least-squares correction of a propagated state.
//!
//! With one scalar range per epoch the normal matrix DᵀD (D = H·A) has rank
//! one, so the correction uses the Moore–Penrose pseudo-inverse
//! D⁺ = Dᵀ / (D·Dᵀ), i.e. the minimum-norm state change that zeroes the
//! linearised innovation.

use super::{EstimatorError, FilterKind, OrbitEstimator, Prior};
use crate::dynamics::{measure, measurement_jacobian, state_transition_matrix, Propagator, RangeObservation, StateVector, Stm6};
use crate::frames::Epoch;

/// X̂ = X̃ + D⁺ (y − h(X̃)) with D = H(X̃)·A.
pub fn ls_step(predicted: &StateVector, stm: &Stm6, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
    let h = measurement_jacobian(predicted)?;
    let d = h * stm;
    let ddt = d.norm_squared();
    if !(ddt > 0.0) {
        return Err(EstimatorError::DegenerateGeometry);
    }
    let innovation = obs.value - measure(predicted);
    Ok(StateVector(predicted.0 + d.transpose() * (innovation / ddt)))
}

/// Sequential LS: propagate the previous estimate with RK4, then correct it
/// with the pseudo-inverse of the one-step design row.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    propagator: Propagator,
    current: Option<(Epoch, StateVector)>,
}

impl LeastSquares {
    pub fn new(propagator: Propagator) -> Self {
        Self {
            propagator,
            current: None,
        }
    }
}

impl OrbitEstimator for LeastSquares {
    fn kind(&self) -> FilterKind {
        FilterKind::Ls
    }

    fn initialize(&mut self, epoch: Epoch, prior: &Prior, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let est = ls_step(&prior.mean, &Stm6::identity(), obs)?;
        self.current = Some((epoch, est));
        Ok(est)
    }

    fn step(&mut self, epoch: Epoch, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (prev_epoch, prev) = self.current.ok_or(EstimatorError::NotInitialized)?;
        let predicted = self.propagator.advance(&prev, prev_epoch, epoch)?;
        let stm = state_transition_matrix(&prev, epoch - prev_epoch, self.propagator.config.mu_earth)?;
        let est = ls_step(&predicted, &stm, obs)?;
        self.current = Some((epoch, est));
        Ok(est)
    }
}
