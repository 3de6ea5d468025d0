use nalgebra::DMatrix;
use orbitfilter::estimators::seeded_rng;
use orbitfilter::stats::hz_test;
use rand::Rng;
use rand_distr::StandardNormal;

fn rejection_rate(reps: u64, draw: impl Fn(&mut orbitfilter::estimators::Rng) -> f64) -> f64 {
    let mut rejected = 0;
    for rep in 0..reps {
        let mut rng = seeded_rng(10_000 + rep);
        let x = DMatrix::from_fn(150, 6, |_, _| draw(&mut rng));
        if hz_test(&x).unwrap().p_value < 0.05 {
            rejected += 1;
        }
    }
    rejected as f64 / reps as f64
}

#[test]
fn size_at_five_percent() {
    let rate = rejection_rate(1000, |r| r.sample(StandardNormal));
    assert!((0.03..=0.07).contains(&rate), "size {rate}");
}

#[test]
fn power_against_exponential_marginals() {
    let rate = rejection_rate(200, |r| -(1.0 - r.random::<f64>()).ln());
    assert!(rate > 0.95, "power {rate}");
}
