//! Classical fourth-order Runge-Kutta propagation.

use nalgebra::Vector6;

use super::{total_acceleration, DynamicsError, ForceModelConfig, StateVector};
use crate::frames::Epoch;

fn derivative(state: &StateVector, epoch: Epoch, config: &ForceModelConfig) -> Result<Vector6<f64>, DynamicsError> {
    let v = state.velocity();
    let a = total_acceleration(state, epoch, config)?;
    Ok(Vector6::new(v.x, v.y, v.z, a.x, a.y, a.z))
}

/// One RK4 step of ẋ = (v, a(x, t)).
pub fn rk4_step(
    state: &StateVector,
    epoch: Epoch,
    dt: f64,
    config: &ForceModelConfig,
) -> Result<StateVector, DynamicsError> {
    let next = StateVector(state.0 + rk4_increment(state, epoch, dt, config)?);
    if !next.is_finite() {
        return Err(DynamicsError::Divergence((epoch + dt).seconds()));
    }
    Ok(next)
}

fn rk4_increment(
    state: &StateVector,
    epoch: Epoch,
    dt: f64,
    config: &ForceModelConfig,
) -> Result<Vector6<f64>, DynamicsError> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(DynamicsError::InvalidStep(dt));
    }
    let x = state.0;
    let k1 = derivative(state, epoch, config)?;
    let k2 = derivative(&StateVector(x + k1 * (dt / 2.0)), epoch + dt / 2.0, config)?;
    let k3 = derivative(&StateVector(x + k2 * (dt / 2.0)), epoch + dt / 2.0, config)?;
    let k4 = derivative(&StateVector(x + k3 * dt), epoch + dt, config)?;
    Ok((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Integrates from `t0` to `t_end` with fixed step `dt`, returning every
/// step including both endpoints. The last step is shortened when the span
/// is not a multiple of `dt`.
///
/// Increments are accumulated with Kahan compensation: at GEO radius one
/// ulp of position is ~7e-9 m, and plain summation over a few hundred steps
/// hides the RK4 truncation error below dt ≈ 15 s.
pub fn propagate(
    state: &StateVector,
    t0: Epoch,
    t_end: Epoch,
    dt: f64,
    config: &ForceModelConfig,
) -> Result<Vec<(Epoch, StateVector)>, DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::InvalidStep(dt));
    }
    if !(t_end > t0) || !t_end.seconds().is_finite() {
        return Err(DynamicsError::InvalidInterval {
            start: t0.seconds(),
            end: t_end.seconds(),
        });
    }
    let grid = step_grid(t0, t_end, dt);
    let mut out = Vec::with_capacity(grid.len());
    let mut current = *state;
    let mut carry = Vector6::zeros();
    out.push((t0, current));
    for pair in grid.windows(2) {
        let y = rk4_increment(&current, pair[0], pair[1] - pair[0], config)? - carry;
        let next = current.0 + y;
        carry = (next - current.0) - y;
        current = StateVector(next);
        if !current.is_finite() {
            return Err(DynamicsError::Divergence(pair[1].seconds()));
        }
        out.push((pair[1], current));
    }
    Ok(out)
}

/// Epochs t0, t0+dt, …, t_end. Multiples of `dt` are computed from the
/// start to avoid accumulating roundoff; a remainder below 1e-9·dt is
/// absorbed into the last full step.
fn step_grid(t0: Epoch, t_end: Epoch, dt: f64) -> Vec<Epoch> {
    let span = t_end - t0;
    let ratio = span / dt;
    let mut full = ratio.floor() as usize;
    if ratio - full as f64 > 1.0 - 1e-9 {
        full += 1;
    }
    let mut grid: Vec<Epoch> = (0..=full).map(|i| t0 + i as f64 * dt).collect();
    let last = *grid.last().unwrap();
    if (t_end - last).abs() <= 1e-9 * dt {
        *grid.last_mut().unwrap() = t_end;
    } else {
        grid.push(t_end);
    }
    grid
}

/// Fixed-step propagator used by the estimators to move a state between
/// observation epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    pub config: ForceModelConfig,
    pub step: f64,
}

impl Propagator {
    pub fn new(config: ForceModelConfig, step: f64) -> Self {
        Self { config, step }
    }

    /// State at `to` starting from `state` at `from`.
    pub fn advance(&self, state: &StateVector, from: Epoch, to: Epoch) -> Result<StateVector, DynamicsError> {
        if to == from {
            return Ok(*state);
        }
        let samples = propagate(state, from, to, self.step, &self.config)?;
        Ok(samples.last().map(|(_, s)| *s).unwrap_or(*state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::MU_EARTH;
    use crate::frames::{kepler_to_cartesian, KeplerianElements};

    fn circular_state(a: f64, inc: f64) -> StateVector {
        kepler_to_cartesian(
            &KeplerianElements {
                semi_major_axis: a,
                eccentricity: 0.0,
                inclination: inc,
                raan: 0.3,
                arg_perigee: 0.0,
                true_anomaly: 1.1,
            },
            MU_EARTH,
        )
        .unwrap()
    }

    /// Closed-form circular motion r(t) = r₀ cos nt + (v₀/n) sin nt.
    fn circular_oracle(s0: &StateVector, t: f64) -> StateVector {
        let r0 = s0.position();
        let v0 = s0.velocity();
        let n = (MU_EARTH / r0.norm().powi(3)).sqrt();
        let (sn, cn) = (n * t).sin_cos();
        StateVector::from_parts(r0 * cn + v0 * (sn / n), -r0 * (n * sn) + v0 * cn)
    }

    #[test]
    fn sample_counts() {
        let s = circular_state(42_164_000.0, 0.0);
        let two = ForceModelConfig::two_body();
        let out = propagate(&s, Epoch(0.0), Epoch(3600.0), 24.0, &two).unwrap();
        assert_eq!(out.len(), 151);
        assert_eq!(out.last().unwrap().0, Epoch(3600.0));
        let out = propagate(&s, Epoch(0.0), Epoch(10.0), 24.0, &two).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].0, Epoch(10.0));
        let out = propagate(&s, Epoch(0.0), Epoch(50.0), 24.0, &two).unwrap();
        assert_eq!(out.iter().map(|(t, _)| t.0).collect::<Vec<_>>(), vec![0.0, 24.0, 48.0, 50.0]);
    }

    #[test]
    fn rejects_bad_steps() {
        let s = circular_state(42_164_000.0, 0.0);
        let two = ForceModelConfig::two_body();
        assert!(rk4_step(&s, Epoch(0.0), 0.0, &two).is_err());
        assert!(rk4_step(&s, Epoch(0.0), f64::NAN, &two).is_err());
        assert!(propagate(&s, Epoch(0.0), Epoch(0.0), 24.0, &two).is_err());
        assert!(propagate(&s, Epoch(0.0), Epoch(10.0), -1.0, &two).is_err());
    }

    #[test]
    fn full_period_returns_to_start() {
        let a = 42_164_000.0;
        let s = circular_state(a, 0.0);
        let period = 2.0 * std::f64::consts::PI * (a.powi(3) / MU_EARTH).sqrt();
        let out = propagate(&s, Epoch(0.0), Epoch(period), 24.0, &ForceModelConfig::two_body()).unwrap();
        let end = out.last().unwrap().1;
        assert!((end.position() - s.position()).norm() < 1e-3);
    }

    #[test]
    fn tiny_step_is_first_order() {
        let s = circular_state(42_164_000.0, 0.5);
        let next = rk4_step(&s, Epoch(0.0), 1e-6, &ForceModelConfig::two_body()).unwrap();
        let moved = (next.position() - s.position()).norm();
        assert!((moved - s.velocity().norm() * 1e-6).abs() < 1e-9);
    }

    #[test]
    fn one_hour_matches_kepler_and_conserves() {
        let two = ForceModelConfig::two_body();
        for inc in [0.0, 29f64.to_radians()] {
            let s = circular_state(42_164_169.0, inc);
            let out = propagate(&s, Epoch(0.0), Epoch(3600.0), 24.0, &two).unwrap();
            let e0 = s.specific_energy(MU_EARTH);
            let h0 = s.angular_momentum();
            for (t, st) in &out {
                let truth = circular_oracle(&s, t.0);
                assert!((st.position() - truth.position()).amax() < 1e-3);
                assert!(((st.specific_energy(MU_EARTH) - e0) / e0).abs() < 1e-10);
                let dh = st.angular_momentum() - h0;
                for k in 0..3 {
                    assert!(dh[k].abs() < 1e-10 * h0.norm());
                }
            }
        }
    }

    #[test]
    fn convergence_order_near_four() {
        let two = ForceModelConfig::two_body();
        let s = circular_state(42_164_169.0, 0.2);
        let truth = circular_oracle(&s, 3600.0);
        let err = |dt: f64| {
            let out = propagate(&s, Epoch(0.0), Epoch(3600.0), dt, &two).unwrap();
            (out.last().unwrap().1.position() - truth.position()).norm()
        };
        let ratio = err(24.0) / err(12.0);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn propagator_advance_matches_propagate() {
        let s = circular_state(42_164_169.0, 0.2);
        let p = Propagator::new(ForceModelConfig::default(), 24.0);
        let a = p.advance(&s, Epoch(0.0), Epoch(48.0)).unwrap();
        let b = propagate(&s, Epoch(0.0), Epoch(48.0), 24.0, &p.config).unwrap();
        assert_eq!(a, b.last().unwrap().1);
        assert_eq!(p.advance(&s, Epoch(5.0), Epoch(5.0)).unwrap(), s);
    }
}
