//! Sampled correlations against the exact engine over many seeds.

use apsim_core::protocols::{run_pair, EngineKind, ExperimentConfig, Protocol};

#[test]
fn sampled_correlations_within_four_sigma() {
    let exact = run_pair(&ExperimentConfig::new(Protocol::Pair), 30.0).unwrap();
    let mut cfg = ExperimentConfig::new(Protocol::Pair);
    cfg.engine = EngineKind::Mc;
    cfg.mc_trials = 10_000;
    let (mut inside, mut total) = (0, 0);
    for seed in 0..100 {
        cfg.seed = seed;
        let mc = run_pair(&cfg, 30.0).unwrap();
        for (a, b) in exact.arms.iter().zip(&mc.arms) {
            for (e, m) in a.e_table.iter().zip(&b.e_table) {
                assert_eq!(e.settings, m.settings);
                assert!(m.stderr > 0.0);
                total += 1;
                if (m.value - e.value).abs() <= 4.0 * m.stderr {
                    inside += 1;
                }
            }
        }
    }
    let frac = inside as f64 / total as f64;
    assert!(frac >= 0.99, "{inside}/{total} within 4 sigma");
}
