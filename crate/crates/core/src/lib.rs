//! Statistical orbit determination for geostationary and geosynchronous
//! satellites.
//!
//! The crate is organised around a single 6-dimensional ECI state
//! ([`StateVector`]) shared by every module:
//!
//! - [`frames`]: scenario time, Keplerian conversion and the RSW frame.
//! - [`dynamics`]: perturbed two-body force model, RK4 propagation, the
//!   linearised transition matrix and the geocentric-range observation.
//! - [`estimators`]: least squares, EKF, UKF, EnKF and a bootstrap particle
//!   filter behind one sequential interface.
//! - [`stats`]: radial RMSE and the Henze-Zirkler multivariate normality test.
//! - [`scenario`]: synthetic NavIC-like truth generation and the columnar
//!   state-file format.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod constants;
pub mod dynamics;
pub mod estimators;
pub mod frames;
pub mod linalg;
pub mod scenario;
pub mod stats;

pub use dynamics::{ForceModelConfig, RangeObservation, StateVector, Stm6};
pub use estimators::{Covariance6, FilterKind, NoiseConfig};
pub use frames::{Epoch, KeplerianElements, RswVector};
