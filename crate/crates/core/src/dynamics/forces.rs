//! Acceleration terms of the perturbed two-body model.

use nalgebra::Vector3;

use super::{moon_position, sun_position, DynamicsError, ForceModelConfig, StateVector};
use crate::constants::{AU, SOLAR_PRESSURE_1AU};
use crate::frames::Epoch;

/// Central-body term −μ r / |r|³.
pub fn kepler_acceleration(r: &Vector3<f64>, mu: f64) -> Result<Vector3<f64>, DynamicsError> {
    let rn = r.norm();
    if rn == 0.0 {
        return Err(DynamicsError::SingularPosition);
    }
    Ok(-mu / (rn * rn * rn) * r)
}

/// J2, J3 and J4 zonal accelerations with the ECI z-axis as spin axis.
pub fn zonal_acceleration(r: &Vector3<f64>, config: &ForceModelConfig) -> Result<Vector3<f64>, DynamicsError> {
    let rn = r.norm();
    if rn == 0.0 {
        return Err(DynamicsError::SingularPosition);
    }
    let coeffs = config.zonal_coefficients;
    let mu = config.mu_earth;
    let re = config.earth_radius;
    let (x, y, z) = (r.x, r.y, r.z);
    let r2 = rn * rn;
    let s2 = z * z / r2;
    let mut acc = Vector3::zeros();

    if coeffs.j2 != 0.0 {
        let k = -1.5 * coeffs.j2 * mu * re * re / (r2 * r2 * rn);
        acc += Vector3::new(k * x * (1.0 - 5.0 * s2), k * y * (1.0 - 5.0 * s2), k * z * (3.0 - 5.0 * s2));
    }
    if coeffs.j3 != 0.0 {
        let k = -2.5 * coeffs.j3 * mu * re.powi(3) / (r2 * r2 * r2 * rn);
        let xy = 3.0 * z - 7.0 * z * s2;
        let zz = 6.0 * z * z - 7.0 * z * z * s2 - 0.6 * r2;
        acc += Vector3::new(k * x * xy, k * y * xy, k * zz);
    }
    if coeffs.j4 != 0.0 {
        let k = 1.875 * coeffs.j4 * mu * re.powi(4) / (r2 * r2 * r2 * rn);
        let xy = 1.0 - 14.0 * s2 + 21.0 * s2 * s2;
        let zz = 5.0 - 70.0 / 3.0 * s2 + 21.0 * s2 * s2;
        acc += Vector3::new(k * x * xy, k * y * xy, k * z * zz);
    }
    Ok(acc)
}

/// Differential point-mass attraction of a third body.
pub fn third_body_acceleration(
    r_sat: &Vector3<f64>,
    r_body: &Vector3<f64>,
    mu_body: f64,
) -> Result<Vector3<f64>, DynamicsError> {
    let rel = r_body - r_sat;
    let d = rel.norm();
    let rb = r_body.norm();
    if d == 0.0 || rb == 0.0 {
        return Err(DynamicsError::CoincidentBody);
    }
    Ok(mu_body * (rel / (d * d * d) - r_body / (rb * rb * rb)))
}

/// Cannonball solar radiation pressure, always illuminated.
pub fn srp_acceleration(
    r_sat: &Vector3<f64>,
    r_sun: &Vector3<f64>,
    config: &ForceModelConfig,
) -> Result<Vector3<f64>, DynamicsError> {
    if config.srp_area_to_mass == 0.0 {
        return Ok(Vector3::zeros());
    }
    let away = r_sat - r_sun;
    let d = away.norm();
    if d == 0.0 {
        return Err(DynamicsError::CoincidentBody);
    }
    let pressure = SOLAR_PRESSURE_1AU * (AU / d).powi(2);
    Ok(pressure * config.srp_reflectivity * config.srp_area_to_mass / d * away)
}

/// Central term plus every enabled perturbation.
pub fn total_acceleration(
    state: &StateVector,
    epoch: Epoch,
    config: &ForceModelConfig,
) -> Result<Vector3<f64>, DynamicsError> {
    let r = state.position();
    let mut acc = kepler_acceleration(&r, config.mu_earth)?;
    if !config.has_perturbations() {
        return Ok(acc);
    }
    acc += zonal_acceleration(&r, config)?;
    let t = config.j2000_seconds(epoch);
    if config.enable_sun || config.enable_srp {
        let sun = sun_position(t);
        if config.enable_sun {
            acc += third_body_acceleration(&r, &sun, config.mu_sun)?;
        }
        if config.enable_srp {
            acc += srp_acceleration(&r, &sun, config)?;
        }
    }
    if config.enable_moon {
        acc += third_body_acceleration(&r, &moon_position(t), config.mu_moon)?;
    }
    Ok(acc)
}
