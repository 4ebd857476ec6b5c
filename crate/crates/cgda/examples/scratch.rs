use cgda::evolution::EvolutionConfig;
use cgda::model::generalize;
use cgda::scenario::{builtin_iron, builtin_paint, generate_demonstrations};
use cgda::strategies::{run_fte, run_iet, run_oet, RunConfig, StrategyConfig, StrategyKind};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "iron".into());
    let seeds: Vec<u64> = std::env::args()
        .nth(2)
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![100, 101, 102, 103, 104]);

    let (scenario, t_min) = if which == "paint" {
        (builtin_paint(), 10.0)
    } else {
        (builtin_iron(), 3.0)
    };
    let demos = generate_demonstrations(&scenario).unwrap();
    let action = generalize(&demos, t_min).unwrap();
    println!("action m={} n={}", action.m(), action.n());
    for i in 0..action.m() {
        println!(
            "  {}: {:?}",
            action.feature_names[i],
            action
                .feature_row(i)
                .iter()
                .map(|v| (v * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
    }

    for seed in seeds {
        let rc = |kind| RunConfig {
            strategy: StrategyConfig {
                strategy: kind,
                ..scenario.strategy.clone()
            },
            evolution: EvolutionConfig::default(),
            seed,
            perturbations: scenario.perturbations.clone(),
        };
        let t0 = Instant::now();
        let fte = run_fte(&action, scenario.build_world().unwrap(), &rc(StrategyKind::Fte)).unwrap();
        let t_fte = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let iet = run_iet(&action, scenario.build_world().unwrap(), &rc(StrategyKind::Iet)).unwrap();
        let t_iet = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let oet = run_oet(
            &action,
            scenario.build_world().unwrap(),
            &rc(StrategyKind::Oet),
        )
        .unwrap();
        let t_oet = t0.elapsed().as_secs_f64();

        let peak = |r: &cgda::strategies::ExecutionReport| {
            if action.m() == 4 {
                r.feature_trace
                    .iter()
                    .map(|s| s.values[3])
                    .fold(0.0f64, f64::max)
            } else {
                r.final_features[0]
            }
        };
        println!("seed {seed}:");
        println!(
            "  FTE evals={} reason={:?} disc={:.4} rit_mean={:.4}s wall={:.2}s peak/painted={:.3}",
            fte.total_evaluations, fte.termination_reason, fte.final_discrepancy, fte.mean_rit(), t_fte, peak(&fte)
        );
        println!(
            "  IET evals={} reason={:?} disc={:.4} rit_mean={:.4}s wall={:.2}s peak/painted={:.3} replay={}",
            iet.total_evaluations, iet.termination_reason, iet.final_discrepancy, iet.mean_rit(), t_iet, peak(&iet), iet.replay_steps
        );
        println!(
            "  OET evals={} reason={:?} disc={:.4} rit_mean={:.4}s wall={:.2}s peak/painted={:.3} moves={} goals={:?}",
            oet.total_evaluations, oet.termination_reason, oet.final_discrepancy, oet.mean_rit(), t_oet, peak(&oet), oet.motor_trajectory.len(), oet.goal_trace
        );
    }
}
