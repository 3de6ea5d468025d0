use orbitfilter::scenario::ScenarioConfig;
use orbitfilter::FilterKind;
use orbitfilter_bench::runner::{filter_seed, truth_seed};
use orbitfilter_bench::RunConfig;
use proptest::prelude::*;

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        any::<u64>(),
        2usize..200,
        2usize..200,
        0.0..1.0f64,
        0.5..1.0f64,
        prop::sample::subsequence(FilterKind::ALL.to_vec(), 1..=5),
        prop::collection::vec((any::<bool>(), -180.0..360.0f64, 0u64..1000), 1..4),
    )
        .prop_map(|(seed, particles, members, k, gamma, filters, scen)| RunConfig {
            seed,
            particle_count: particles,
            ensemble_count: members,
            roughening_k: k,
            inflation_gamma: gamma,
            filters,
            scenarios: scen
                .into_iter()
                .enumerate()
                .map(|(i, (geo, lon, s))| ScenarioConfig {
                    name: format!("sat{i}"),
                    seed: s,
                    ..if geo { ScenarioConfig::geo(lon) } else { ScenarioConfig::gso(lon) }
                })
                .collect(),
            ..RunConfig::default()
        })
}

proptest! {
    #[test]
    fn toml_round_trip_preserves_config_and_hash(cfg in arb_config()) {
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.content_hash(), cfg.content_hash());
    }

    #[test]
    fn hash_ignores_output_dir(cfg in arb_config(), dir in "[a-z]{1,12}") {
        let moved = RunConfig { output_dir: dir.into(), ..cfg.clone() };
        prop_assert_eq!(moved.content_hash(), cfg.content_hash());
    }

    #[test]
    fn derived_seeds_are_distinct(run in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_ne!(truth_seed(run, a), truth_seed(run, b));
        let t = truth_seed(run, a);
        let seeds: std::collections::HashSet<u64> = FilterKind::ALL.iter().map(|&f| filter_seed(t, f)).collect();
        prop_assert_eq!(seeds.len(), 5);
    }
}

#[test]
fn default_config_is_the_constellation() {
    let cfg = RunConfig::default();
    assert!(cfg.validate().is_ok());
    assert_eq!(cfg.scenarios.len(), 5);
    assert_eq!(cfg.filters, FilterKind::ALL.to_vec());
    let seeds: Vec<u64> = cfg.scenarios.iter().map(|s| s.seed).collect();
    assert_eq!(seeds, [1, 2, 3, 4, 5]);
}

#[test]
fn shipped_example_config_matches_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/constellation.toml");
    let cfg = RunConfig::load(&path).unwrap();
    let defaults = RunConfig {
        write_eci_residuals: true,
        ..RunConfig::default()
    };
    assert_eq!(cfg, defaults);
}
