//! Scenario time, Keplerian-to-Cartesian conversion and the RSW frame.
//!
//! Everything here works in a single generic ECI frame. Time is measured in
//! seconds relative to the scenario reference epoch; the algorithms only ever
//! depend on differences of epochs.

use std::fmt;
use std::ops::{Add, Sub};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::EARTH_RADIUS;
use crate::dynamics::StateVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("invalid Keplerian elements: {0}")]
    InvalidElements(String),
    #[error("degenerate orbit state: position and velocity are parallel or zero")]
    DegenerateState,
}

/// Seconds since the scenario reference epoch t₀.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epoch(pub f64);

impl Epoch {
    pub const ZERO: Epoch = Epoch(0.0);

    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl Add<f64> for Epoch {
    type Output = Epoch;
    fn add(self, dt: f64) -> Epoch {
        Epoch(self.0 + dt)
    }
}

impl Sub for Epoch {
    type Output = f64;
    fn sub(self, other: Epoch) -> f64 {
        self.0 - other.0
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t0{:+}s", self.0)
    }
}

/// Classical orbital elements. Distances in meters, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerianElements {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee: f64,
    pub true_anomaly: f64,
}

impl KeplerianElements {
    pub fn validate(&self) -> Result<(), FrameError> {
        let all = [
            self.semi_major_axis,
            self.eccentricity,
            self.inclination,
            self.raan,
            self.arg_perigee,
            self.true_anomaly,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(FrameError::InvalidElements("non-finite element".into()));
        }
        if self.semi_major_axis <= 0.0 {
            return Err(FrameError::InvalidElements(format!(
                "semi-major axis must be positive, got {}",
                self.semi_major_axis
            )));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(FrameError::InvalidElements(format!(
                "eccentricity must lie in [0, 1), got {}",
                self.eccentricity
            )));
        }
        if self.semi_major_axis <= EARTH_RADIUS {
            return Err(FrameError::InvalidElements(format!(
                "semi-major axis {} m is inside the Earth",
                self.semi_major_axis
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.inclination) {
            return Err(FrameError::InvalidElements(format!(
                "inclination must lie in [0, pi], got {}",
                self.inclination
            )));
        }
        Ok(())
    }
}

/// A vector resolved in the radial / along-track / cross-track frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RswVector {
    pub radial: f64,
    pub along_track: f64,
    pub cross_track: f64,
}

impl RswVector {
    pub fn norm(&self) -> f64 {
        (self.radial * self.radial + self.along_track * self.along_track + self.cross_track * self.cross_track)
            .sqrt()
    }
}

/// Orthonormal RSW triad of a reference orbit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RswBasis {
    pub radial: Vector3<f64>,
    pub along_track: Vector3<f64>,
    pub cross_track: Vector3<f64>,
}

/// Converts closed-orbit elements into an ECI position/velocity state.
pub fn kepler_to_cartesian(elements: &KeplerianElements, mu: f64) -> Result<StateVector, FrameError> {
    elements.validate()?;
    if !(mu > 0.0) {
        return Err(FrameError::InvalidElements(format!("mu must be positive, got {mu}")));
    }
    let KeplerianElements {
        semi_major_axis: a,
        eccentricity: e,
        inclination: i,
        raan,
        arg_perigee: w,
        true_anomaly: nu,
    } = *elements;

    let p = a * (1.0 - e * e);
    let r = p / (1.0 + e * nu.cos());
    let sqrt_mu_p = (mu / p).sqrt();

    // perifocal frame
    let r_pf = Vector3::new(r * nu.cos(), r * nu.sin(), 0.0);
    let v_pf = Vector3::new(-sqrt_mu_p * nu.sin(), sqrt_mu_p * (e + nu.cos()), 0.0);

    let (so, co) = raan.sin_cos();
    let (si, ci) = i.sin_cos();
    let (sw, cw) = w.sin_cos();
    let rot = nalgebra::Matrix3::new(
        co * cw - so * sw * ci,
        -co * sw - so * cw * ci,
        so * si,
        so * cw + co * sw * ci,
        -so * sw + co * cw * ci,
        -co * si,
        sw * si,
        cw * si,
        ci,
    );
    Ok(StateVector::from_parts(rot * r_pf, rot * v_pf))
}

/// RSW triad: R̂ along position, Ŵ along angular momentum, Ŝ = Ŵ × R̂.
pub fn rsw_basis(state: &StateVector) -> Result<RswBasis, FrameError> {
    let r = state.position();
    let v = state.velocity();
    let r_norm = r.norm();
    let h = r.cross(&v);
    let h_norm = h.norm();
    if !(r_norm > 0.0) || !(h_norm > 1e-12 * r_norm * v.norm()) || !h_norm.is_finite() {
        return Err(FrameError::DegenerateState);
    }
    let radial = r / r_norm;
    let cross_track = h / h_norm;
    let along_track = cross_track.cross(&radial);
    Ok(RswBasis {
        radial,
        along_track,
        cross_track,
    })
}

/// Resolves an ECI vector in the RSW frame of `reference`.
pub fn eci_to_rsw(reference: &StateVector, eci_vec: &Vector3<f64>) -> Result<RswVector, FrameError> {
    let basis = rsw_basis(reference)?;
    Ok(basis.project(eci_vec))
}

/// Greenwich mean sidereal angle in radians, [0, 2π), for a time given in
/// seconds since J2000. UT1 is taken equal to the supplied time scale.
pub fn gmst(seconds_since_j2000: f64) -> f64 {
    let d = seconds_since_j2000 / 86400.0;
    let t = d / 36525.0;
    let deg = 280.460_618_37 + 360.985_647_366_29 * d + 0.000_387_933 * t * t - t * t * t / 38_710_000.0;
    deg.rem_euclid(360.0).to_radians()
}

/// East longitude in radians, (−π, π], of an ECI position at the given
/// sidereal angle.
pub fn longitude(position: &Vector3<f64>, gmst_rad: f64) -> f64 {
    let lon = (position.y.atan2(position.x) - gmst_rad).rem_euclid(std::f64::consts::TAU);
    if lon > std::f64::consts::PI {
        lon - std::f64::consts::TAU
    } else {
        lon
    }
}

impl RswBasis {
    pub fn project(&self, eci_vec: &Vector3<f64>) -> RswVector {
        RswVector {
            radial: self.radial.dot(eci_vec),
            along_track: self.along_track.dot(eci_vec),
            cross_track: self.cross_track.dot(eci_vec),
        }
    }
}
