//! Residual analytics: RSW residual series, radial RMSE and the
//! Henze-Zirkler multivariate normality test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, LogNormal};
use thiserror::Error;

use crate::dynamics::StateVector;
use crate::frames::{eci_to_rsw, Epoch, FrameError, RswVector};
use crate::linalg::condition_number;

/// Sample covariances with a larger condition number are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("trajectories do not share an epoch grid ({0})")]
    MismatchedGrids(String),
    #[error("empty series")]
    EmptySeries,
    #[error("insufficient sample: {m} rows for dimension {n} (need m > n)")]
    InsufficientSample { m: usize, n: usize },
    #[error("non-finite sample value")]
    NonFinite,
    #[error("epochs are not strictly increasing at index {0}")]
    NonMonotone(usize),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Predicted-minus-actual position errors in the actual orbit's RSW frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialResidualSeries {
    pub epochs: Vec<Epoch>,
    pub residuals_rsw: Vec<RswVector>,
}

impl RadialResidualSeries {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn radial(&self) -> Vec<f64> {
        self.residuals_rsw.iter().map(|r| r.radial).collect()
    }

    pub fn radial_rmse(&self) -> Result<f64, StatsError> {
        rmse(&self.radial())
    }
}

fn check_grids(predicted: &[(Epoch, StateVector)], actual: &[(Epoch, StateVector)]) -> Result<(), StatsError> {
    if predicted.len() != actual.len() {
        return Err(StatsError::MismatchedGrids(format!(
            "{} predicted vs {} actual samples",
            predicted.len(),
            actual.len()
        )));
    }
    for (i, ((tp, _), (ta, _))) in predicted.iter().zip(actual).enumerate() {
        if tp != ta {
            return Err(StatsError::MismatchedGrids(format!("index {i}: {tp} vs {ta}")));
        }
        if i > 0 && !(actual[i].0 > actual[i - 1].0) {
            return Err(StatsError::NonMonotone(i));
        }
    }
    Ok(())
}

/// Per-epoch `eci_to_rsw(actual, r_pred − r_act)`.
pub fn radial_residuals(
    predicted: &[(Epoch, StateVector)],
    actual: &[(Epoch, StateVector)],
) -> Result<RadialResidualSeries, StatsError> {
    check_grids(predicted, actual)?;
    let residuals_rsw = predicted
        .iter()
        .zip(actual)
        .map(|((_, p), (_, a))| eci_to_rsw(a, &(p.position() - a.position())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RadialResidualSeries {
        epochs: actual.iter().map(|(t, _)| *t).collect(),
        residuals_rsw,
    })
}

/// √(Σ eᵢ² / count).
pub fn rmse(series: &[f64]) -> Result<f64, StatsError> {
    if series.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    Ok((series.iter().map(|e| e * e).sum::<f64>() / series.len() as f64).sqrt())
}

/// One row per epoch holding the 6-component ECI state residual
/// (predicted − actual): metres then m/s.
pub fn residual_matrix(
    predicted: &[(Epoch, StateVector)],
    actual: &[(Epoch, StateVector)],
) -> Result<DMatrix<f64>, StatsError> {
    check_grids(predicted, actual)?;
    Ok(DMatrix::from_fn(actual.len(), 6, |i, j| predicted[i].1 .0[j] - actual[i].1 .0[j]))
}

/// Henze-Zirkler smoothing parameter (1/√2)·(m(2n+1)/4)^(1/(n+4)).
pub fn hz_beta(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (m * (2.0 * n + 1.0) / 4.0).powf(1.0 / (n + 4.0)) / std::f64::consts::SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HzResult {
    /// T = m·D.
    pub statistic: f64,
    pub d_stat: f64,
    pub beta: f64,
    pub p_value: f64,
    pub sample_size: usize,
    pub dimension: usize,
    pub singular_covariance: bool,
}

impl HzResult {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Henze-Zirkler test of multivariate normality on the rows of `samples`.
///
/// The covariance uses denominator m. A numerically singular covariance
/// yields the limiting value D = 4 (T = 4m) and p = 0. The p-value comes
/// from the lognormal approximation of the null distribution of T.
pub fn hz_test(samples: &DMatrix<f64>) -> Result<HzResult, StatsError> {
    let (m, n) = samples.shape();
    if m <= n || n == 0 {
        return Err(StatsError::InsufficientSample { m, n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let beta = hz_beta(m, n);
    let mean: DVector<f64> = samples.row_mean().transpose();
    let centered = DMatrix::from_fn(m, n, |i, j| samples[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / m as f64;

    let singular = HzResult {
        statistic: 4.0 * m as f64,
        d_stat: 4.0,
        beta,
        p_value: 0.0,
        sample_size: m,
        dimension: n,
        singular_covariance: true,
    };
    if !(condition_number(&cov) <= SINGULAR_CONDITION) {
        return Ok(singular);
    }
    let Some(chol) = cov.cholesky() else {
        return Ok(singular);
    };
    // Whitened rows zᵢ = L⁻¹(xᵢ − x̄): Mahalanobis distances become Euclidean.
    let z = chol
        .l()
        .solve_lower_triangular(&centered.transpose())
        .ok_or(StatsError::NonFinite)?;

    let b2 = beta * beta;
    let nf = n as f64;
    let mf = m as f64;
    let mut pair_sum = 0.0;
    for j in 0..m {
        for k in 0..m {
            let djk = (z.column(j) - z.column(k)).norm_squared();
            pair_sum += (-0.5 * b2 * djk).exp();
        }
    }
    let centre_sum: f64 = (0..m)
        .map(|j| (-b2 / (2.0 * (1.0 + b2)) * z.column(j).norm_squared()).exp())
        .sum();
    let d_stat = pair_sum / (mf * mf) - 2.0 * (1.0 + b2).powf(-nf / 2.0) * centre_sum / mf
        + (1.0 + 2.0 * b2).powf(-nf / 2.0);
    let statistic = mf * d_stat;

    Ok(HzResult {
        statistic,
        d_stat,
        beta,
        p_value: hz_p_value(statistic, beta, n),
        sample_size: m,
        dimension: n,
        singular_covariance: false,
    })
}

/// Upper tail of the lognormal matched to the first two null moments of T.
fn hz_p_value(statistic: f64, beta: f64, n: usize) -> f64 {
    let p = n as f64;
    let b2 = beta * beta;
    let b4 = b2 * b2;
    let b8 = b4 * b4;
    let a = 1.0 + 2.0 * b2;
    let wb = (1.0 + b2) * (1.0 + 3.0 * b2);
    let mu = 1.0 - a.powf(-p / 2.0) * (1.0 + p * b2 / a + p * (p + 2.0) * b4 / (2.0 * a * a));
    let si2 = 2.0 * (1.0 + 4.0 * b2).powf(-p / 2.0)
        + 2.0 * a.powf(-p) * (1.0 + 2.0 * p * b4 / (a * a) + 3.0 * p * (p + 2.0) * b8 / (4.0 * a.powi(4)))
        - 4.0 * wb.powf(-p / 2.0) * (1.0 + 3.0 * p * b4 / (2.0 * wb) + p * (p + 2.0) * b8 / (2.0 * wb * wb));
    let pmu = (mu.powi(4) / (si2 + mu * mu)).sqrt().ln();
    let psi = ((si2 + mu * mu) / (mu * mu)).ln().sqrt();
    if statistic <= 0.0 {
        return 1.0;
    }
    match LogNormal::new(pmu, psi) {
        Ok(dist) => dist.sf(statistic).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::seeded_rng;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn geo_traj(count: usize) -> Vec<(Epoch, StateVector)> {
        (0..count)
            .map(|k| {
                let th = 7.29e-5 * 24.0 * k as f64;
                let (s, c) = th.sin_cos();
                (
                    Epoch(24.0 * k as f64),
                    StateVector::new(42_164_169.0 * c, 42_164_169.0 * s, 0.0, -3074.66 * s, 3074.66 * c, 0.0),
                )
            })
            .collect()
    }

    fn normal_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = seeded_rng(seed);
        DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn identical_trajectories_give_zero_residuals() {
        let t = geo_traj(151);
        let series = radial_residuals(&t, &t).unwrap();
        assert_eq!(series.len(), 151);
        assert!(series.residuals_rsw.iter().all(|r| r.norm() == 0.0));
        assert_eq!(residual_matrix(&t, &t).unwrap(), DMatrix::zeros(151, 6));
    }

    #[test]
    fn radial_offset_lands_in_radial_component() {
        let mut act = geo_traj(5);
        // on-axis so that r + 5·R̂ is exactly representable
        act[3].1 = StateVector::new(0.0, 42_164_169.0, 0.0, -3074.66, 0.0, 0.0);
        let mut pred = act.clone();
        let r_hat = act[3].1.position().normalize();
        pred[3].1 = StateVector::from_parts(act[3].1.position() + r_hat * 5.0, act[3].1.velocity());
        let s = radial_residuals(&pred, &act).unwrap();
        let r = s.residuals_rsw[3];
        assert!((r.radial - 5.0).abs() < 1e-9);
        assert!(r.along_track.abs() < 1e-9 && r.cross_track.abs() < 1e-9);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = geo_traj(5);
        assert!(matches!(radial_residuals(&a[..4], &a), Err(StatsError::MismatchedGrids(_))));
        let mut b = a.clone();
        b[2].0 = Epoch(49.0);
        assert!(matches!(residual_matrix(&b, &a), Err(StatsError::MismatchedGrids(_))));
    }

    #[test]
    fn rmse_examples() {
        assert!((rmse(&[2.0; 17]).unwrap() - 2.0).abs() < 1e-15);
        assert!((rmse(&[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((rmse(&[1.5, -1.5, 1.5, -1.5]).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(rmse(&[]), Err(StatsError::EmptySeries));
    }

    #[test]
    fn hz_beta_examples() {
        assert!((hz_beta(150, 6) - 1.3130).abs() < 1e-3);
        assert!((hz_beta(150, 6) - 487.5f64.powf(0.1) / 2f64.sqrt()).abs() < 1e-14);
        assert!((hz_beta(50, 2) - 62.5f64.powf(1.0 / 6.0) / 2f64.sqrt()).abs() < 1e-14);
        assert!((hz_beta(50, 2) - 1.4086).abs() < 1e-3);
    }

    #[test]
    fn hz_rejects_small_samples() {
        assert_eq!(hz_test(&DMatrix::zeros(6, 6)), Err(StatsError::InsufficientSample { m: 6, n: 6 }));
        let mut x = normal_matrix(20, 3, 1);
        x[(4, 1)] = f64::NAN;
        assert_eq!(hz_test(&x), Err(StatsError::NonFinite));
    }

    #[test]
    fn hz_singular_branch() {
        let row = [1.0, -2.0, 3.0, 0.5, 0.1, 7.0];
        let x = DMatrix::from_fn(40, 6, |_, j| row[j]);
        let r = hz_test(&x).unwrap();
        assert!(r.singular_covariance);
        assert_eq!(r.statistic, 160.0);
        assert_eq!(r.p_value, 0.0);

        // rank-deficient but not constant
        let mut x = normal_matrix(40, 3, 2);
        for i in 0..40 {
            x[(i, 2)] = x[(i, 0)] - 2.0 * x[(i, 1)];
        }
        assert!(hz_test(&x).unwrap().singular_covariance);
    }

    #[test]
    fn hz_gaussian_sample_not_rejected_exponential_is() {
        let x = normal_matrix(150, 6, 3);
        let r = hz_test(&x).unwrap();
        assert!(r.statistic >= 0.0 && (0.0..=1.0).contains(&r.p_value));
        assert!(!r.singular_covariance);

        let mut rng = seeded_rng(4);
        let e = DMatrix::from_fn(150, 6, |_, _| -(1.0 - rng.random::<f64>()).ln());
        assert!(hz_test(&e).unwrap().p_value < 0.05);
    }

    #[test]
    fn hz_matches_direct_mahalanobis_evaluation() {
        // brute-force evaluation with an explicit inverse
        let x = normal_matrix(30, 3, 5);
        let (m, n) = x.shape();
        let mean = x.row_mean();
        let c = DMatrix::from_fn(m, n, |i, j| x[(i, j)] - mean[j]);
        let s_inv = (c.transpose() * &c / m as f64).try_inverse().unwrap();
        let b = hz_beta(m, n);
        let mut d = 0.0;
        for j in 0..m {
            for k in 0..m {
                let diff = (x.row(j) - x.row(k)).transpose();
                d += (-b * b / 2.0 * (diff.transpose() * &s_inv * &diff)[0]).exp() / (m * m) as f64;
            }
            let dj = c.row(j).transpose();
            d -= 2.0 * (1.0 + b * b).powf(-(n as f64) / 2.0) / m as f64
                * (-b * b / (2.0 * (1.0 + b * b)) * (dj.transpose() * &s_inv * &dj)[0]).exp();
        }
        d += (1.0 + 2.0 * b * b).powf(-(n as f64) / 2.0);
        let r = hz_test(&x).unwrap();
        assert!((r.d_stat - d).abs() < 1e-12 * d.abs().max(1.0));
        assert!((r.statistic - m as f64 * d).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hz_affine_invariant(seed in 0u64..1000, entries in prop::array::uniform9(-2.0..2.0f64), shift in prop::array::uniform3(-1e3..1e3f64)) {
            let x = normal_matrix(25, 3, seed);
            let a = nalgebra::Matrix3::from_row_slice(&entries) + nalgebra::Matrix3::identity() * 3.0;
            prop_assume!(a.determinant().abs() > 0.1);
            let shift = Vector3::from(shift);
            let y = DMatrix::from_fn(25, 3, |i, j| {
                let row = Vector3::new(x[(i, 0)], x[(i, 1)], x[(i, 2)]);
                (a * row + shift)[j]
            });
            let rx = hz_test(&x).unwrap();
            let ry = hz_test(&y).unwrap();
            prop_assert!((rx.d_stat - ry.d_stat).abs() <= 1e-9 * rx.d_stat.abs());
        }

        #[test]
        fn rmse_sign_and_permutation_invariant(v in prop::collection::vec(-1e3..1e3f64, 1..40), flips in prop::collection::vec(any::<bool>(), 40)) {
            let base = rmse(&v).unwrap();
            let flipped: Vec<f64> = v.iter().zip(&flips).map(|(x, f)| if *f { -x } else { *x }).collect();
            let mut rev = flipped.clone();
            rev.reverse();
            prop_assert!((rmse(&rev).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        }

        #[test]
        fn hz_beta_matches_formula(m in 2usize..5000, n in 1usize..12) {
            let oracle = 0.5f64.sqrt() * ((m * (2 * n + 1)) as f64 / 4.0).powf(1.0 / (n as f64 + 4.0));
            prop_assert!((hz_beta(m, n) - oracle).abs() <= 1e-14 * oracle);
        }
    }
}
