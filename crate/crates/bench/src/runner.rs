//! Scenario × filter execution.

use nalgebra::{DMatrix, Vector6};
use orbitfilter::dynamics::Propagator;
use orbitfilter::estimators::{build_estimator, run_estimator, FilterSettings, Prior, RougheningConfig};
use orbitfilter::scenario::{load_truth, TruthDataset};
use orbitfilter::stats::{hz_test, radial_residuals, residual_matrix, HzResult, RadialResidualSeries};
use orbitfilter::{Covariance6, Epoch, FilterKind, RangeObservation, StateVector};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::BenchError;

/// Filters whose ECI residuals go through the normality test.
pub const HZ_FILTERS: [FilterKind; 3] = [FilterKind::Ekf, FilterKind::Ukf, FilterKind::Enkf];

#[derive(Debug, Clone, PartialEq)]
pub struct RmseRow {
    pub scenario: String,
    pub filter: FilterKind,
    pub radial_rmse_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HzRow {
    pub scenario: String,
    pub filter: FilterKind,
    pub result: HzResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub id: String,
    pub truth_seed: u64,
    pub samples: usize,
    pub observation_sha256: String,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub scenario: String,
    pub filter: FilterKind,
    pub filter_seed: u64,
    pub estimates: Vec<(Epoch, StateVector)>,
    pub residuals: RadialResidualSeries,
    pub eci_residuals: DMatrix<f64>,
    pub radial_rmse_m: f64,
    pub hz: Option<HzResult>,
    /// Hash of the observation stream this cell consumed.
    pub observation_sha256: String,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config_hash: String,
    pub seed: u64,
    pub scenarios: Vec<ScenarioSummary>,
    pub cells: Vec<CellResult>,
}

impl BenchReport {
    /// One row per (scenario, filter), in configuration order.
    pub fn rmse_rows(&self) -> Vec<RmseRow> {
        self.cells
            .iter()
            .map(|c| RmseRow {
                scenario: c.scenario.clone(),
                filter: c.filter,
                radial_rmse_m: c.radial_rmse_m,
            })
            .collect()
    }

    pub fn hz_rows(&self) -> Vec<HzRow> {
        self.cells
            .iter()
            .filter_map(|c| {
                c.hz.map(|result| HzRow {
                    scenario: c.scenario.clone(),
                    filter: c.filter,
                    result,
                })
            })
            .collect()
    }

    pub fn cell(&self, scenario: &str, filter: FilterKind) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.scenario == scenario && c.filter == filter)
    }
}

/// SplitMix64 finaliser, used to derive independent seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn truth_seed(run_seed: u64, scenario_seed: u64) -> u64 {
    mix(mix(run_seed) ^ scenario_seed)
}

pub fn filter_seed(truth_seed: u64, filter: FilterKind) -> u64 {
    mix(truth_seed ^ (0x100 + filter as u64))
}

pub fn observation_hash(observations: &[(Epoch, RangeObservation)]) -> String {
    let mut h = Sha256::new();
    for (t, o) in observations {
        h.update(t.seconds().to_le_bytes());
        h.update(o.value.to_le_bytes());
        h.update(o.variance.to_le_bytes());
    }
    hex(&h.finalize())
}

fn run_cell(
    config: &RunConfig,
    id: &str,
    data: &TruthDataset,
    seed: u64,
    filter: FilterKind,
) -> Result<CellResult, BenchError> {
    let fail = |message: String| BenchError::Filter {
        scenario: id.to_string(),
        filter,
        message,
    };
    let meta = &data.meta;
    let mut settings = FilterSettings::new(Propagator::new(meta.force_model, meta.cadence_s), config.noise);
    settings.ekf_prediction = config.ekf_prediction;
    settings.ensemble_count = config.ensemble_count;
    settings.inflation_gamma = config.inflation_gamma;
    settings.particle_count = config.particle_count;
    settings.roughening = RougheningConfig {
        tuning_k: config.roughening_k,
        ..RougheningConfig::default()
    };
    settings.resampling = config.resampling;
    settings.bpf_process_noise = config.bpf_process_noise;
    settings.seed = filter_seed(seed, filter);

    let prior = Prior {
        mean: data.initial_estimate().ok_or_else(|| fail("empty dataset".into()))?,
        covariance: Covariance6::from_diagonal(&Vector6::from(config.p0_diag)),
    };
    log::debug!("{id}/{filter}: start (seed {})", settings.seed);
    let mut estimator = build_estimator(filter, &settings);
    let estimates = run_estimator(estimator.as_mut(), &prior, &data.observations).map_err(|e| fail(e.to_string()))?;
    let residuals = radial_residuals(&estimates, &data.states).map_err(|e| fail(e.to_string()))?;
    let eci_residuals = residual_matrix(&estimates, &data.states).map_err(|e| fail(e.to_string()))?;
    let radial_rmse_m = residuals.radial_rmse().map_err(|e| fail(e.to_string()))?;
    let hz = if HZ_FILTERS.contains(&filter) {
        Some(hz_test(&eci_residuals).map_err(|e| fail(format!("HZ test: {e}")))?)
    } else {
        None
    };
    log::info!("{id}/{filter}: radial RMSE {radial_rmse_m:.4} m");
    Ok(CellResult {
        scenario: id.to_string(),
        filter,
        filter_seed: settings.seed,
        estimates,
        residuals,
        eci_residuals,
        radial_rmse_m,
        hz,
        observation_sha256: observation_hash(&data.observations),
    })
}

/// Runs every configured (scenario, filter) cell on a pool of `jobs`
/// threads (0 = one per core). Results come back in configuration order
/// regardless of scheduling.
pub fn run_benchmark(config: &RunConfig, jobs: usize) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Runtime(format!("thread pool: {e}")))?;

    pool.install(|| {
        let datasets = config
            .scenarios
            .par_iter()
            .map(|s| {
                let seed = truth_seed(config.seed, s.seed);
                let scenario = orbitfilter::scenario::ScenarioConfig { seed, ..s.clone() };
                let data = load_truth(&scenario).map_err(|e| BenchError::Scenario {
                    scenario: s.id(),
                    message: e.to_string(),
                })?;
                if data.len() < 2 {
                    return Err(BenchError::Scenario {
                        scenario: s.id(),
                        message: format!("needs at least 2 epochs, got {}", data.len()),
                    });
                }
                log::info!("{}: {} epochs", s.id(), data.len());
                Ok((s.id(), seed, data))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let jobs: Vec<(usize, FilterKind)> = (0..datasets.len())
            .flat_map(|i| config.filters.iter().map(move |f| (i, *f)))
            .collect();
        let cells = jobs
            .par_iter()
            .map(|&(i, f)| {
                let (id, seed, data) = &datasets[i];
                run_cell(config, id, data, *seed, f)
            })
            .collect::<Result<Vec<_>, _>>()?;

        let scenarios: Vec<ScenarioSummary> = datasets
            .iter()
            .map(|(id, seed, data)| ScenarioSummary {
                id: id.clone(),
                truth_seed: *seed,
                samples: data.len(),
                observation_sha256: observation_hash(&data.observations),
            })
            .collect();
        for c in &cells {
            let s = scenarios.iter().find(|s| s.id == c.scenario).expect("cell of a known scenario");
            if s.observation_sha256 != c.observation_sha256 {
                return Err(BenchError::Runtime(format!(
                    "{} / {} consumed a different observation stream",
                    c.scenario, c.filter
                )));
            }
        }
        Ok(BenchReport {
            config_hash: config.content_hash(),
            seed: config.seed,
            scenarios,
            cells,
        })
    })
}
