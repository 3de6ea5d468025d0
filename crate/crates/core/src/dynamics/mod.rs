//! Perturbed two-body dynamics, RK4 propagation, the linearised transition
//! matrix and the geocentric-range observation model.

mod ephemeris;
mod forces;
mod integrator;
mod observation;

use std::fmt;

use nalgebra::{Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;
use crate::frames::Epoch;

pub use ephemeris::{moon_position, sun_position};
pub use forces::{
    kepler_acceleration, srp_acceleration, third_body_acceleration, total_acceleration, zonal_acceleration,
};
pub use integrator::{propagate, rk4_step, Propagator};
pub use observation::{measure, measurement_jacobian, state_transition_matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("position vector has zero length")]
    SingularPosition,
    #[error("satellite coincides with a perturbing body")]
    CoincidentBody,
    #[error("invalid integration step {0} s")]
    InvalidStep(f64),
    #[error("invalid propagation interval [{start}, {end}]")]
    InvalidInterval { start: f64, end: f64 },
    #[error("propagation diverged (non-finite state) at t = {0} s")]
    Divergence(f64),
    #[error("invalid force model configuration: {0}")]
    InvalidConfig(String),
}

/// ECI position (m) and velocity (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector(pub Vector6<f64>);

impl StateVector {
    pub fn new(x: f64, y: f64, z: f64, vx: f64, vy: f64, vz: f64) -> Self {
        Self(Vector6::new(x, y, z, vx, vy, vz))
    }

    pub fn from_parts(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self(Vector6::new(
            position.x, position.y, position.z, velocity.x, velocity.y, velocity.z,
        ))
    }

    pub fn position(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn velocity(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn as_vector(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Specific orbital energy v²/2 − μ/r.
    pub fn specific_energy(&self, mu: f64) -> f64 {
        self.velocity().norm_squared() / 2.0 - mu / self.position().norm()
    }

    /// Specific angular momentum r × v.
    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.position().cross(&self.velocity())
    }
}

impl From<Vector6<f64>> for StateVector {
    fn from(v: Vector6<f64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.0;
        write!(
            f,
            "r=({:.3}, {:.3}, {:.3}) m v=({:.6}, {:.6}, {:.6}) m/s",
            v[0], v[1], v[2], v[3], v[4], v[5]
        )
    }
}

/// Zonal geopotential coefficients; zero disables a term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZonalCoefficients {
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
}

impl Default for ZonalCoefficients {
    fn default() -> Self {
        Self {
            j2: constants::J2,
            j3: constants::J3,
            j4: constants::J4,
        }
    }
}

impl ZonalCoefficients {
    pub const ZERO: ZonalCoefficients = ZonalCoefficients { j2: 0.0, j3: 0.0, j4: 0.0 };
}

/// Force model selection and constants.
///
/// `reference_epoch_j2000_s` anchors scenario time (seconds since t₀) to
/// the analytic Sun/Moon ephemerides; it is seconds since J2000 (TT).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForceModelConfig {
    pub mu_earth: f64,
    pub zonal_coefficients: ZonalCoefficients,
    pub earth_radius: f64,
    pub enable_sun: bool,
    pub enable_moon: bool,
    pub enable_srp: bool,
    pub srp_area_to_mass: f64,
    pub srp_reflectivity: f64,
    pub mu_sun: f64,
    pub mu_moon: f64,
    pub reference_epoch_j2000_s: f64,
}

/// 2020-03-01T00:00:00 TT.
pub const DEFAULT_REFERENCE_EPOCH_J2000_S: f64 = 7364.5 * 86400.0;

impl Default for ForceModelConfig {
    fn default() -> Self {
        Self {
            mu_earth: constants::MU_EARTH,
            zonal_coefficients: ZonalCoefficients::default(),
            earth_radius: constants::EARTH_RADIUS,
            enable_sun: true,
            enable_moon: true,
            enable_srp: true,
            srp_area_to_mass: 0.02,
            srp_reflectivity: 1.5,
            mu_sun: constants::MU_SUN,
            mu_moon: constants::MU_MOON,
            reference_epoch_j2000_s: DEFAULT_REFERENCE_EPOCH_J2000_S,
        }
    }
}

impl ForceModelConfig {
    /// Point-mass Earth only.
    pub fn two_body() -> Self {
        Self {
            zonal_coefficients: ZonalCoefficients::ZERO,
            enable_sun: false,
            enable_moon: false,
            enable_srp: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidConfig(msg));
        if !(self.mu_earth > 0.0) {
            return bad(format!("mu_earth must be positive, got {}", self.mu_earth));
        }
        if !(self.earth_radius > 0.0) {
            return bad(format!("earth_radius must be positive, got {}", self.earth_radius));
        }
        if !(self.srp_area_to_mass >= 0.0) {
            return bad(format!("srp_area_to_mass must be non-negative, got {}", self.srp_area_to_mass));
        }
        if !(1.0..=2.0).contains(&self.srp_reflectivity) {
            return bad(format!("srp_reflectivity must lie in [1, 2], got {}", self.srp_reflectivity));
        }
        if !(self.mu_sun >= 0.0 && self.mu_moon >= 0.0) {
            return bad("third-body gravitational parameters must be non-negative".into());
        }
        let z = self.zonal_coefficients;
        if ![z.j2, z.j3, z.j4, self.reference_epoch_j2000_s].iter().all(|v| v.is_finite()) {
            return bad("zonal coefficients and reference epoch must be finite".into());
        }
        Ok(())
    }

    pub fn has_perturbations(&self) -> bool {
        self.zonal_coefficients != ZonalCoefficients::ZERO || self.enable_sun || self.enable_moon || self.enable_srp
    }

    fn j2000_seconds(&self, epoch: Epoch) -> f64 {
        self.reference_epoch_j2000_s + epoch.seconds()
    }
}

/// Linearised one-step state transition matrix.
pub type Stm6 = Matrix6<f64>;

/// A scalar geocentric-range measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeObservation {
    pub value: f64,
    pub variance: f64,
}

impl RangeObservation {
    pub fn new(value: f64, variance: f64) -> Self {
        Self { value, variance }
    }
}
