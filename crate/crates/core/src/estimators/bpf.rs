//! Bootstrap particle filter with roughening.
//!
//! Each epoch: propagate particles with RK4, weight them by the Gaussian
//! range likelihood, resample, roughen, and report the mean of the roughened
//! particles. Likelihoods are handled in log space with max-subtraction so
//! km-scale innovations against a 1 m² measurement variance do not
//! underflow to all-zero weights.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{mean_state, sample_mvn, seeded_rng, Covariance6, EstimatorError, FilterKind, NoiseConfig, OrbitEstimator, Prior, Rng};
use crate::dynamics::{measure, Propagator, RangeObservation, StateVector};
use crate::frames::Epoch;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<StateVector>,
    /// Normalised weights wⁱ.
    pub weights: Vec<f64>,
    /// Normalised relative likelihoods qⁱ of the last measurement update.
    pub likelihoods: Vec<f64>,
    pub rng_seed: u64,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Σ wⁱ Xⁱ.
    pub fn weighted_mean(&self) -> StateVector {
        let sum = self
            .particles
            .iter()
            .zip(&self.weights)
            .fold(nalgebra::Vector6::zeros(), |acc, (p, w)| acc + p.0 * *w);
        StateVector(sum)
    }

    pub fn effective_sample_size(&self) -> f64 {
        effective_sample_size(&self.weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RougheningConfig {
    /// Tuning constant K.
    pub tuning_k: f64,
    /// State dimension n in the N^(−1/n) factor.
    pub state_dim: usize,
}

impl Default for RougheningConfig {
    fn default() -> Self {
        Self {
            tuning_k: 0.1,
            state_dim: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingScheme {
    #[default]
    Multinomial,
    Systematic,
}

/// 1 / Σ wᵢ² for normalised weights, evaluated as (Σ vᵢ)² / Σ vᵢ² with
/// vᵢ = wᵢ / max w so that equal weights give exactly N.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let max = weights.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return 0.0;
    }
    let (sum, sq) = weights.iter().fold((0.0, 0.0), |(s, q), w| {
        let v = w / max;
        (s + v, q + v * v)
    });
    sum * sum / sq
}

/// Normalises log-weights with max-subtraction.
fn normalize_log_weights(log_w: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(EstimatorError::LikelihoodUnderflow);
    }
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(EstimatorError::LikelihoodUnderflow);
    }
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Gaussian log-likelihood of each particle's range, up to a constant.
fn log_likelihoods(particles: &[StateVector], obs: &RangeObservation, r: f64) -> Vec<f64> {
    particles
        .iter()
        .map(|p| {
            let nu = obs.value - measure(p);
            let l = -0.5 * nu * nu / r;
            if l.is_nan() {
                f64::NEG_INFINITY
            } else {
                l
            }
        })
        .collect()
}

/// Draws `N` prior particles and weights them against the first observation.
pub fn bpf_init(
    mean: &StateVector,
    cov: &Covariance6,
    count: usize,
    obs0: &RangeObservation,
    noise: &NoiseConfig,
    rng: &mut Rng,
    rng_seed: u64,
) -> Result<ParticleSet, EstimatorError> {
    if count < 2 {
        return Err(EstimatorError::InvalidConfig(format!("particle filter needs at least 2 particles, got {count}")));
    }
    let particles = sample_mvn(mean, cov, count, rng)?;
    let weights = normalize_log_weights(&log_likelihoods(&particles, obs0, noise.measurement_var))?;
    Ok(ParticleSet {
        particles,
        likelihoods: weights.clone(),
        weights,
        rng_seed,
    })
}

/// `N` ancestor indices drawn in proportion to `weights`.
pub fn resample_indices(weights: &[f64], scheme: ResamplingScheme, rng: &mut Rng) -> Vec<usize> {
    let n = weights.len();
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let pick = |u: f64| cumulative.partition_point(|&c| c <= u * acc).min(n - 1);
    match scheme {
        ResamplingScheme::Multinomial => (0..n).map(|_| pick(rng.random::<f64>())).collect(),
        ResamplingScheme::Systematic => {
            let start = rng.random::<f64>() / n as f64;
            (0..n).map(|i| pick(start + i as f64 / n as f64)).collect()
        }
    }
}

/// Adds N(0, (K·M(m)·N^(−1/n))²) noise per dimension m, where M(m) is the
/// largest pairwise spread of that coordinate across the particles.
pub fn roughen(particles: &mut [StateVector], config: &RougheningConfig, rng: &mut Rng) {
    let n = particles.len();
    if n == 0 {
        return;
    }
    let factor = config.tuning_k * (n as f64).powf(-1.0 / config.state_dim as f64);
    let sigma: Vec<f64> = (0..6)
        .map(|m| {
            let (lo, hi) = particles
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0[m]), hi.max(p.0[m])));
            factor * (hi - lo)
        })
        .collect();
    for p in particles.iter_mut() {
        for (m, s) in sigma.iter().enumerate() {
            if *s > 0.0 {
                p.0[m] += s * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpfStepOutput {
    /// Roughened particles with weights reset to 1/N.
    pub particles: ParticleSet,
    /// Mean of the roughened particles.
    pub estimate: StateVector,
    /// Normalised wⁱ ∝ wⁱ₋₁·qⁱ before resampling.
    pub posterior_weights: Vec<f64>,
    /// N_eff of `posterior_weights`.
    pub effective_sample_size: f64,
}

/// One bootstrap cycle: propagate, weight, resample, roughen, average.
///
/// With `process` set, every propagated particle also receives a
/// MVN(0, Q) draw, i.e. particles are sampled from the full transition
/// density rather than moved deterministically.
///
/// Resampling draws from the posterior weights wⁱ ∝ wⁱ₋₁·qⁱ; since weights
/// are reset to 1/N after every resample this equals drawing from qⁱ on all
/// but the first step, where it also carries the t₀ observation.
pub fn bpf_step<F>(
    ps: &ParticleSet,
    propagate: F,
    obs: &RangeObservation,
    noise: &NoiseConfig,
    rough: &RougheningConfig,
    scheme: ResamplingScheme,
    process: Option<&Covariance6>,
    rng: &mut Rng,
) -> Result<BpfStepOutput, EstimatorError>
where
    F: Fn(&StateVector) -> Result<StateVector, EstimatorError>,
{
    let mut propagated = ps.particles.iter().map(propagate).collect::<Result<Vec<_>, _>>()?;
    if let Some(q) = process {
        let noise = sample_mvn(&StateVector(nalgebra::Vector6::zeros()), q, propagated.len(), rng)?;
        for (p, w) in propagated.iter_mut().zip(noise) {
            p.0 += w.0;
        }
    }
    let log_q = log_likelihoods(&propagated, obs, noise.measurement_var);
    let likelihoods = normalize_log_weights(&log_q)?;
    let log_w: Vec<f64> = ps.weights.iter().zip(&log_q).map(|(w, q)| w.ln() + q).collect();
    let posterior_weights = normalize_log_weights(&log_w)?;
    let effective = effective_sample_size(&posterior_weights);

    let mut particles: Vec<StateVector> = resample_indices(&posterior_weights, scheme, rng)
        .into_iter()
        .map(|i| propagated[i])
        .collect();
    roughen(&mut particles, rough, rng);
    let estimate = mean_state(&particles);
    let n = particles.len();
    Ok(BpfStepOutput {
        particles: ParticleSet {
            particles,
            weights: vec![1.0 / n as f64; n],
            likelihoods,
            rng_seed: ps.rng_seed,
        },
        estimate,
        posterior_weights,
        effective_sample_size: effective,
    })
}

#[derive(Debug, Clone)]
pub struct BootstrapParticleFilter {
    propagator: Propagator,
    noise: NoiseConfig,
    count: usize,
    roughening: RougheningConfig,
    scheme: ResamplingScheme,
    process_noise: bool,
    seed: u64,
    rng: Rng,
    current: Option<(Epoch, ParticleSet)>,
    neff_history: Vec<f64>,
}

impl BootstrapParticleFilter {
    pub fn new(
        propagator: Propagator,
        noise: NoiseConfig,
        count: usize,
        roughening: RougheningConfig,
        scheme: ResamplingScheme,
        seed: u64,
    ) -> Self {
        Self {
            propagator,
            noise,
            count,
            roughening,
            scheme,
            process_noise: false,
            seed,
            rng: seeded_rng(seed),
            current: None,
            neff_history: Vec::new(),
        }
    }

    /// Adds MVN(0, Q) noise to every propagated particle.
    pub fn with_process_noise(mut self, enabled: bool) -> Self {
        self.process_noise = enabled;
        self
    }

    pub fn particles(&self) -> Option<&ParticleSet> {
        self.current.as_ref().map(|(_, p)| p)
    }

    /// N_eff before resampling, one entry per processed epoch.
    pub fn neff_history(&self) -> &[f64] {
        &self.neff_history
    }
}

impl OrbitEstimator for BootstrapParticleFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Bpf
    }

    fn initialize(&mut self, epoch: Epoch, prior: &Prior, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let ps = bpf_init(
            &prior.mean,
            &prior.covariance,
            self.count,
            obs,
            &self.noise,
            &mut self.rng,
            self.seed,
        )?;
        let estimate = ps.weighted_mean();
        self.neff_history = vec![ps.effective_sample_size()];
        self.current = Some((epoch, ps));
        Ok(estimate)
    }

    fn step(&mut self, epoch: Epoch, obs: &RangeObservation) -> Result<StateVector, EstimatorError> {
        let (prev_epoch, ps) = self.current.take().ok_or(EstimatorError::NotInitialized)?;
        let propagator = self.propagator;
        let q = self.noise.process_matrix();
        let out = bpf_step(
            &ps,
            |s| Ok(propagator.advance(s, prev_epoch, epoch)?),
            obs,
            &self.noise,
            &self.roughening,
            self.scheme,
            self.process_noise.then_some(&q),
            &mut self.rng,
        )?;
        self.neff_history.push(out.effective_sample_size);
        self.current = Some((epoch, out.particles));
        Ok(out.estimate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector6;

    fn geo() -> StateVector {
        StateVector::new(42_164_169.0, 0.0, 0.0, 0.0, 3074.666, 0.0)
    }

    fn p0() -> Covariance6 {
        Covariance6::from_diagonal(&Vector6::new(10.0, 10.0, 10.0, 0.1, 0.1, 0.1))
    }

    #[test]
    fn neff_examples() {
        assert_eq!(effective_sample_size(&[0.1; 10]), 10.0);
        let mut w = vec![0.0; 10];
        w[3] = 1.0;
        assert_eq!(effective_sample_size(&w), 1.0);
        let mut w = vec![0.0; 10];
        w[0] = 0.5;
        w[1] = 0.5;
        assert_eq!(effective_sample_size(&w), 2.0);
    }

    #[test]
    fn identical_particles_get_uniform_weights() {
        let ps = bpf_init(&geo(), &Covariance6::zeros(), 10, &RangeObservation::new(4.2e7, 1.0), &NoiseConfig::default(), &mut seeded_rng(0), 0).unwrap();
        assert!(ps.weights.iter().all(|&w| (w - 0.1).abs() < 1e-15));
    }

    #[test]
    fn matching_particle_gets_largest_weight() {
        let mut rng = seeded_rng(9);
        let ps = bpf_init(&geo(), &p0(), 10, &RangeObservation::new(0.0, 1.0), &NoiseConfig::default(), &mut rng, 9).unwrap();
        let target = measure(&ps.particles[4]);
        let log_w = log_likelihoods(&ps.particles, &RangeObservation::new(target, 1.0), 1.0);
        let w = normalize_log_weights(&log_w).unwrap();
        let best = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 4);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn km_scale_innovations_do_not_underflow() {
        let ps = bpf_init(&geo(), &p0(), 10, &RangeObservation::new(42_164_169.0 + 5e3, 1.0), &NoiseConfig::default(), &mut seeded_rng(1), 1).unwrap();
        assert!((ps.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(ps.weights.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn non_finite_likelihoods_rejected() {
        assert_eq!(normalize_log_weights(&[f64::NEG_INFINITY; 4]), Err(EstimatorError::LikelihoodUnderflow));
    }

    #[test]
    fn degenerate_set_is_not_roughened() {
        let mut particles = vec![geo(); 10];
        roughen(&mut particles, &RougheningConfig::default(), &mut seeded_rng(2));
        assert!(particles.iter().all(|p| *p == geo()));

        let ps = ParticleSet {
            particles: vec![geo(); 10],
            weights: vec![0.1; 10],
            likelihoods: vec![0.1; 10],
            rng_seed: 0,
        };
        let obs = RangeObservation::new(measure(&geo()) + 3.0, 1.0);
        let out = bpf_step(&ps, |s| Ok(*s), &obs, &NoiseConfig::default(), &RougheningConfig::default(), ResamplingScheme::Multinomial, None, &mut seeded_rng(3)).unwrap();
        assert!((out.estimate.0 - geo().0).norm() < 1e-6);
    }

    #[test]
    fn systematic_resampling_keeps_counts_close() {
        let w = [0.5, 0.25, 0.125, 0.125];
        let idx = resample_indices(&w, ResamplingScheme::Systematic, &mut seeded_rng(4));
        let counts: Vec<usize> = (0..4).map(|k| idx.iter().filter(|&&i| i == k).count()).collect();
        assert_eq!(counts.iter().sum::<usize>(), 4);
        for (c, w) in counts.iter().zip(w) {
            assert!((*c as f64 - 4.0 * w).abs() < 1.0);
        }
    }

    #[test]
    fn zero_weight_particles_never_drawn() {
        let w = [0.0, 0.7, 0.0, 0.3];
        let mut rng = seeded_rng(5);
        for scheme in [ResamplingScheme::Multinomial, ResamplingScheme::Systematic] {
            for _ in 0..200 {
                assert!(resample_indices(&w, scheme, &mut rng).iter().all(|&i| i == 1 || i == 3));
            }
        }
    }

    #[test]
    fn step_weights_normalized_and_deterministic() {
        let prop = Propagator::new(crate::dynamics::ForceModelConfig::default(), 24.0);
        let prior = Prior { mean: geo(), covariance: p0() };
        let run = || {
            let mut f = BootstrapParticleFilter::new(prop, NoiseConfig::default(), 10, RougheningConfig::default(), ResamplingScheme::Multinomial, 21);
            let mut truth = geo();
            let mut out = vec![f.initialize(Epoch(0.0), &prior, &RangeObservation::new(measure(&truth), 1.0)).unwrap()];
            for k in 1..=20 {
                let (t0, t1) = (Epoch(24.0 * (k - 1) as f64), Epoch(24.0 * k as f64));
                truth = prop.advance(&truth, t0, t1).unwrap();
                out.push(f.step(t1, &RangeObservation::new(measure(&truth), 1.0)).unwrap());
                let ps = f.particles().unwrap();
                assert!((ps.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!((ps.likelihoods.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            assert!(f.neff_history().iter().all(|&n| (1.0 - 1e-12..=10.0 + 1e-9).contains(&n)));
            out
        };
        assert_eq!(run(), run());
    }
}
