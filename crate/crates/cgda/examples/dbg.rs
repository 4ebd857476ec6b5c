use cgda::model::generalize;
use cgda::scenario::{builtin_paint, generate_demonstrations};
use cgda::strategies::{execute_scenario, StrategyKind};

fn main() {
    let scenario = builtin_paint();
    let demos = generate_demonstrations(&scenario).unwrap();
    let action = generalize(&demos, 10.0).unwrap();
    for seed in 100u64..106 {
        let ie = execute_scenario(&action, &scenario, Some(StrategyKind::Ie), Some(seed)).unwrap();
        let iet = execute_scenario(&action, &scenario, Some(StrategyKind::Iet), Some(seed)).unwrap();
        // duplicate effect: count near-identical waypoint pairs in IE's plan
        let mut dupes = 0;
        let wps = &ie.motor_trajectory;
        for i in 0..wps.len() {
            for j in i + 1..wps.len() {
                let maxd = wps[i]
                    .iter()
                    .zip(&wps[j])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if maxd < 5.0 {
                    dupes += 1;
                }
            }
        }
        println!(
            "seed {seed}: IE painted={:.3} evals={} dup_pairs={dupes} | IET painted={:.3} evals={}",
            ie.final_features[0], ie.total_evaluations, iet.final_features[0], iet.total_evaluations
        );
    }
}
