use orbitfilter::constants::MU_EARTH;
use orbitfilter::dynamics::measure;
use orbitfilter::frames::{gmst, longitude};
use orbitfilter::scenario::{generate_truth, ScenarioConfig, SatelliteKind};
use orbitfilter::ForceModelConfig;

#[test]
fn one_hour_gives_151_samples_and_is_deterministic() {
    let cfg = ScenarioConfig::gso(111.75);
    let a = generate_truth(&cfg).unwrap();
    assert_eq!(a.len(), 151);
    assert_eq!(a.observations.len(), 151);
    assert_eq!(a, generate_truth(&cfg).unwrap());
    let other = generate_truth(&ScenarioConfig { seed: cfg.seed + 1, ..cfg }).unwrap();
    assert_eq!(a.states, other.states);
    assert_ne!(a.observations, other.observations);
}

#[test]
fn geo_stays_over_its_slot() {
    for &slot in &orbitfilter::scenario::GEO_SLOTS_DEG {
        let cfg = ScenarioConfig::geo(slot);
        let data = generate_truth(&cfg).unwrap();
        let t0 = cfg.force_model.reference_epoch_j2000_s;
        for (t, s) in &data.states {
            let lon = longitude(&s.position(), gmst(t0 + t.seconds())).to_degrees();
            assert!((lon - slot).abs() < 0.1, "slot {slot} at {t}: {lon}");
        }
    }
}

#[test]
fn two_body_circular_keeps_radius() {
    for kind in [SatelliteKind::Geo, SatelliteKind::Gso] {
        let cfg = ScenarioConfig {
            satellite_kind: kind,
            force_model: ForceModelConfig::two_body(),
            ..ScenarioConfig::default()
        };
        let data = generate_truth(&cfg).unwrap();
        let r0 = data.states[0].1.position().norm();
        for (_, s) in &data.states {
            assert!((s.position().norm() - r0).abs() < 1e-3);
        }
        let v = data.states[0].1.velocity().norm();
        assert!((v - (MU_EARTH / r0).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn observation_noise_has_configured_variance() {
    let cfg = ScenarioConfig {
        duration_s: 24.0 * 10_000.0,
        truth_step_s: 24.0,
        obs_noise_var: 4.0,
        force_model: ForceModelConfig::two_body(),
        seed: 11,
        ..ScenarioConfig::default()
    };
    let data = generate_truth(&cfg).unwrap();
    assert_eq!(data.len(), 10_001);
    let e: Vec<f64> = data.states.iter().zip(&data.observations).map(|((_, s), (_, o))| o.value - measure(s)).collect();
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (e.len() - 1) as f64;
    assert!((var / 4.0 - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn initial_estimate_applies_perturbation() {
    let data = generate_truth(&ScenarioConfig { duration_s: 48.0, ..ScenarioConfig::default() }).unwrap();
    let d = data.initial_estimate().unwrap().0 - data.states[0].1 .0;
    for (k, expect) in [10.0, 10.0, 10.0, 0.1, 0.1, 0.1].iter().enumerate() {
        assert!((d[k] - expect).abs() < 1e-6);
    }
}
