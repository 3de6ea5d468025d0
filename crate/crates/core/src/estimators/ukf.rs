//! Unscented Kalman filter, non-augmented with additive process and
//! measurement noise.
//!
//! With α = 1e-3 the zeroth weights are of order −10⁶ while the sigma-point
//! offsets are a few thousandths of a standard deviation, so the textbook
//! sums Σ wᵢ χᵢ lose every significant digit at GEO radius. Moments are
//! therefore accumulated as offsets from the centre point:
//!
//! ```text
//! dᵢ = χᵢ − χ₀,  d̄ = Σᵢ₌₁ wᵢ dᵢ,  x̄ = χ₀ + d̄
//! P  = Σᵢ₌₁ wᵢ dᵢ dᵢᵀ + (w₀ᶜ − w₀ᵐ − 1) d̄ d̄ᵀ
//! ```
//!
//! which is algebraically identical to Σ wᵢᶜ (χᵢ − x̄)(χᵢ − x̄)ᵀ when the mean
//! weights sum to one, and w₀ᶜ − w₀ᵐ − 1 = β − α² is formed analytically.

use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use super::{Covariance6, EstimatorError, FilterKind, NoiseConfig, OrbitEstimator, Prior};
use crate::dynamics::{measure, Propagator, RangeObservation, StateVector};
use crate::frames::Epoch;
use crate::linalg::{psd_sqrt, symmetrize};

pub const STATE_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UkfParams {
    pub alpha: f64,
    /// Prior-distribution weight; 2 is optimal for Gaussian priors.
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UkfParams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta: 2.0,
            kappa: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UkfWeights {
    pub lambda: f64,
    pub w_mean: Vec<f64>,
    pub w_cov: Vec<f64>,
    /// w_cov[0] − w_mean[0] − 1, evaluated as β − α².
    pub spread_correction: f64,
}

/// Scaled unscented-transform weights for dimension `l`.
pub fn ukf_weights(l: usize, params: &UkfParams) -> Result<UkfWeights, EstimatorError> {
    let UkfParams { alpha, beta, kappa } = *params;
    if !(alpha > 0.0 && alpha <= 1.0) || l == 0 {
        return Err(EstimatorError::InvalidConfig(format!(
            "UKF needs alpha in (0, 1] and L >= 1, got alpha={alpha}, L={l}"
        )));
    }
    let lf = l as f64;
    let lambda = alpha * alpha * (lf + kappa) - lf;
    let scale = lf + lambda;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(EstimatorError::InvalidConfig(format!("L + lambda = {scale} must be positive")));
    }
    let w0 = lambda / scale;
    let wi = 1.0 / (2.0 * scale);
    let mut w_mean = vec![wi; 2 * l + 1];
    let mut w_cov = w_mean.clone();
    w_mean[0] = w0;
    w_cov[0] = w0 + (1.0 - alpha * alpha + beta);
    Ok(UkfWeights {
        lambda,
        w_mean,
        w_cov,
        spread_correction: beta - alpha * alpha,
    })
}

/// Sigma points together with their offsets from the centre point. Offsets
/// are kept separately so freshly generated sets carry the exact square-root
/// columns rather than differences of GEO-sized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPointSet {
    pub points: Vec<StateVector>,
    pub offsets: Vec<Vector6<f64>>,
    pub weights: UkfWeights,
    pub params: UkfParams,
}

impl SigmaPointSet {
    pub fn dim(&self) -> usize {
        (self.points.len() - 1) / 2
    }

    pub fn lambda(&self) -> f64 {
        self.weights.lambda
    }

    /// Weighted mean Σ wᵢᵐ χᵢ.
    pub fn mean(&self) -> StateVector {
        self.moments().0
    }

    /// Weighted spread Σ wᵢᶜ (χᵢ − x̄)(χᵢ − x̄)ᵀ.
    pub fn covariance(&self) -> Covariance6 {
        self.moments().1
    }

    pub fn moments(&self) -> (StateVector, Covariance6) {
        centered_moments(&self.points[0], &self.offsets, &self.weights)
    }

    /// Maps every point through `f`; offsets of the image are measured from
    /// the image of the centre point.
    pub fn map<F>(&self, f: F) -> Result<SigmaPointSet, EstimatorError>
    where
        F: Fn(&StateVector) -> Result<StateVector, EstimatorError>,
    {
        let points = self.points.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        let center = points[0].0;
        let offsets = points[1..].iter().map(|p| p.0 - center).collect();
        Ok(SigmaPointSet {
            points,
            offsets,
            weights: self.weights.clone(),
            params: self.params,
        })
    }
}

/// 2L+1 points: the mean and mean ± columns of √((L+λ)P), using the
/// symmetric PSD square root.
pub fn generate_sigma_points(
    mean: &StateVector,
    cov: &Covariance6,
    params: &UkfParams,
) -> Result<SigmaPointSet, EstimatorError> {
    let weights = ukf_weights(STATE_DIM, params)?;
    let scaled = cov * (STATE_DIM as f64 + weights.lambda);
    let root = psd_sqrt(&scaled).ok_or(EstimatorError::IndefiniteCovariance)?;
    let offsets: Vec<Vector6<f64>> = root
        .column_iter()
        .map(|c| c.into_owned())
        .chain(root.column_iter().map(|c| -c))
        .collect();
    let mut points = Vec::with_capacity(2 * STATE_DIM + 1);
    points.push(*mean);
    points.extend(offsets.iter().map(|d| StateVector(mean.0 + d)));
    Ok(SigmaPointSet {
        points,
        offsets,
        weights,
        params: *params,
    })
}

fn centered_moments(center: &StateVector, offsets: &[Vector6<f64>], w: &UkfWeights) -> (StateVector, Covariance6) {
    let d_bar = offsets
        .iter()
        .zip(&w.w_mean[1..])
        .fold(Vector6::zeros(), |acc, (d, wi)| acc + d * *wi);
    let mut cov = d_bar * d_bar.transpose() * w.spread_correction;
    for (d, wi) in offsets.iter().zip(&w.w_cov[1..]) {
        cov += d * d.transpose() * *wi;
    }
    (StateVector(center.0 + d_bar), symmetrize(&cov))
}

/// Unscented predict/update with user-supplied dynamics `f` and scalar
/// measurement `h`. Q is added to the predicted covariance and R to the
/// innovation variance.
#[allow(clippy::too_many_arguments)]
pub fn ukf_step_with<F, H>(
    mean: &StateVector,
    cov: &Covariance6,
    params: &UkfParams,
    f: F,
    h: H,
    y: f64,
    process: &Covariance6,
    r: f64,
) -> Result<(StateVector, Covariance6), EstimatorError>
where
    F: Fn(&StateVector) -> Result<StateVector, EstimatorError>,
    H: Fn(&StateVector) -> f64,
{
    let sigma = generate_sigma_points(mean, cov, params)?.map(f)?;
    let w = &sigma.weights;
    let (x_prior, p_model) = sigma.moments();
    let p_prior = p_model + process;

    let y0 = h(&sigma.points[0]);
    let dx = &sigma.offsets;
    let dy: Vec<f64> = sigma.points[1..].iter().map(|p| h(p) - y0).collect();
    let wi = &w.w_mean[1..];
    let d_bar = dx.iter().zip(wi).fold(Vector6::zeros(), |acc, (d, w)| acc + d * *w);
    let e_bar: f64 = dy.iter().zip(wi).map(|(e, w)| e * w).sum();
    let y_prior = y0 + e_bar;

    let mut p_yy = w.spread_correction * e_bar * e_bar + r;
    let mut p_xy = d_bar * (w.spread_correction * e_bar);
    for ((d, e), wc) in dx.iter().zip(&dy).zip(&w.w_cov[1..]) {
        p_yy += wc * e * e;
        p_xy += d * (wc * e);
    }
    if !(p_yy > 0.0) || !p_yy.is_finite() {
        return Err(EstimatorError::NonPositiveInnovationVariance(p_yy));
    }
    let gain = p_xy / p_yy;
    let x_post = StateVector(x_prior.0 + gain * (y - y_prior));
    let p_post = p_prior - gain * gain.transpose() * p_yy;
    Ok((x_post, symmetrize(&p_post)))
}

/// One UKF cycle on the geocentric range: sigma points moved by `propagate`,
/// predicted observations from [`measure`].
pub fn ukf_step<F>(
    mean: &StateVector,
    cov: &Covariance6,
    params: &UkfParams,
    propagate: F,
    obs: &RangeObservation,
    noise: &NoiseConfig,
) -> Result<(StateVector, Covariance6), EstimatorError>
where
    F: Fn(&StateVector) -> Result<StateVector, EstimatorError>,
{
    ukf_step_with(
        mean,
        cov,
        params,
        propagate,
        measure,
        obs.value,
        &noise.process_matrix(),
        noise.measurement_var,
    )
}

#[derive(Debug, Clone)]
pub struct UnscentedKalmanFilter {
    propagator: Propagator,
    noise: NoiseConfig,
    params: UkfParams,
    current: Option<(Epoch, StateVector, Covariance6)>,
}

impl UnscentedKalmanFilter {
    pub fn new(propagator: Propagator, noise: NoiseConfig, params: UkfParams) -> Self {
        Self {
            propagator,
            noise,
            params,
            current: None,
        }
    }
}

impl OrbitEstimator for UnscentedKalmanFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Ukf
    }

    fn initialize(&mut self, epoch: Epoch, prior: &Prior, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (x, p) = ukf_step_with(
            &prior.mean,
            &prior.covariance,
            &self.params,
            |s| Ok(*s),
            measure,
            obs.value,
            &Covariance6::zeros(),
            self.noise.measurement_var,
        )?;
        self.current = Some((epoch, x, p));
        Ok(x)
    }

    fn step(&mut self, epoch: Epoch, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (prev_epoch, x, p) = self.current.ok_or(EstimatorError::NotInitialized)?;
        let propagator = self.propagator;
        let (x, p) = ukf_step(
            &x,
            &p,
            &self.params,
            |s| Ok(propagator.advance(s, prev_epoch, epoch)?),
            obs,
            &self.noise,
        )?;
        self.current = Some((epoch, x, p));
        Ok(x)
    }

    fn covariance(&self) -> Option<Covariance6> {
        self.current.map(|(_, _, p)| p)
    }
}
