use std::f64::consts::FRAC_PI_4;

use mzi_fisher::fisher::Resolution;
use mzi_fisher::montecarlo::{crb_experiment, CrbConfig};
use mzi_fisher::states::InterferometerInput;

fn config(shots: u64, seed: u64) -> CrbConfig {
    CrbConfig {
        input: InterferometerInput::balanced(2.0).unwrap(),
        true_phase: FRAC_PI_4,
        shots,
        n_res: Resolution::Finite(20),
        repeats: 200,
        seed,
    }
}

#[test]
fn repeated_runs_are_identical() {
    let a = crb_experiment(&config(500, 7)).unwrap();
    let b = crb_experiment(&config(500, 7)).unwrap();
    assert_eq!(a, b);
    let c = crb_experiment(&config(500, 8)).unwrap();
    assert_ne!(a.estimates, c.estimates);
}

#[test]
fn efficiency_near_one_at_moderate_shot_counts() {
    for shots in [1_000, 10_000] {
        let run = crb_experiment(&config(shots, 42)).unwrap();
        assert_eq!(run.excluded(), 0);
        assert!(
            (0.85..=1.3).contains(&run.variance_ratio),
            "v = {shots}: ratio {}",
            run.variance_ratio
        );
        assert!((run.mean_estimate - FRAC_PI_4).abs() < 5.0 * run.crb_prediction.sqrt());
    }
}
