//! Geocentric-range observation, its Jacobian, and the linearised
//! two-body transition matrix.

use nalgebra::{Matrix3, RowVector6};

use super::{DynamicsError, StateVector, Stm6};

/// Geocentric range |r|.
pub fn measure(state: &StateVector) -> f64 {
    state.position().norm()
}

/// ∂|r|/∂x = (x/r, y/r, z/r, 0, 0, 0).
pub fn measurement_jacobian(state: &StateVector) -> Result<RowVector6<f64>, DynamicsError> {
    let r = state.position();
    let rn = r.norm();
    if rn == 0.0 {
        return Err(DynamicsError::SingularPosition);
    }
    let u = r / rn;
    Ok(RowVector6::new(u.x, u.y, u.z, 0.0, 0.0, 0.0))
}

/// A = I + F·dt with F the two-body Jacobian: identity velocity coupling in
/// the upper-right block and the gravity gradient in the lower-left block.
pub fn state_transition_matrix(state: &StateVector, dt: f64, mu: f64) -> Result<Stm6, DynamicsError> {
    let r = state.position();
    let rn = r.norm();
    if rn == 0.0 {
        return Err(DynamicsError::SingularPosition);
    }
    let r3 = rn.powi(3);
    let r5 = rn.powi(5);
    let gradient = Matrix3::from_fn(|i, j| {
        let diag = if i == j { -mu / r3 } else { 0.0 };
        diag + 3.0 * mu * r[i] * r[j] / r5
    });
    let mut a = Stm6::identity();
    a.fixed_view_mut::<3, 3>(0, 3).fill_diagonal(dt);
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&(gradient * dt));
    Ok(a)
}
