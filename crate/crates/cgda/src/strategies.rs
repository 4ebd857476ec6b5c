//! Execution strategies: turning a generalized action into joint commands.
//!
//! Offline strategies plan entirely in mental simulation and then move:
//! - FTE evolves one genome holding every waypoint of the trajectory;
//! - IE evolves each waypoint independently from the initial world;
//! - IET evolves each waypoint after mentally replaying the waypoints
//!   already planned.
//!
//! The online strategy OET interleaves perception, localization against the
//! goal trajectory, a short evolution burst for the next goal, and one motor
//! execution per loop iteration, so the wait between movements stays small
//! and independent of the action length.
//!
//! Every run logs a zero-move reference event at start; the first interval
//! of the RIT series therefore measures planning time for the offline
//! strategies.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    initialize_population, run_until_termination, scale_budget, EvolutionConfig, StopReason,
};
use crate::model::{resample_observation, FeatureTrajectory, ObservedTrajectory, Sample};
use crate::recognition::{discrepancy, goal_discrepancy, FeatureWeights};
use crate::scenario::{Now, PerturbationEvent, PerturbationSchedule, Scenario};
use crate::simenv::{
    mental_execution, motor_execution, sensor_perception, simulate_final_features, MotorEvent,
    PerceptionVector, TraceRecorder, World,
};

pub const REPORT_SCHEMA: &str = "cgda.report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Fte,
    Ie,
    Iet,
    Oet,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Fte => "fte",
            StrategyKind::Ie => "ie",
            StrategyKind::Iet => "iet",
            StrategyKind::Oet => "oet",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fte" => Ok(StrategyKind::Fte),
            "ie" => Ok(StrategyKind::Ie),
            "iet" => Ok(StrategyKind::Iet),
            "oet" => Ok(StrategyKind::Oet),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy `{other}` (expected fte, ie, iet or oet)"
            ))),
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Strategy-level settings from the scenario's `strategy` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub strategy: StrategyKind,
    /// Maximum OET outer-loop iterations.
    pub otc: u32,
    /// Final-goal acceptance distance in normalized feature units.
    pub goal_epsilon: f64,
    /// Norm order p used by localization.
    pub localization_norm_order: f64,
    /// Use unit feature weights instead of range normalization.
    pub raw_weights: bool,
    pub seed: Option<u64>,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            strategy: StrategyKind::Oet,
            otc: 50,
            goal_epsilon: 0.02,
            localization_norm_order: 2.0,
            raw_weights: false,
            seed: None,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.otc < 1 {
            return Err(Error::Config("otc must be >= 1".into()));
        }
        if !(self.goal_epsilon > 0.0) {
            return Err(Error::Config("goal_epsilon must be > 0".into()));
        }
        if !(self.localization_norm_order >= 1.0) {
            return Err(Error::Config(
                "localization_norm_order must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Everything a single strategy run needs. Perturbation events fire on the
/// live world for every strategy; only OET perceives their effects.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub strategy: StrategyConfig,
    pub evolution: EvolutionConfig,
    pub seed: u64,
    pub perturbations: Vec<PerturbationEvent>,
}

impl RunConfig {
    pub fn new(strategy: StrategyConfig, evolution: EvolutionConfig, seed: u64) -> Self {
        RunConfig {
            strategy,
            evolution,
            seed,
            perturbations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    Budget,
    Stalled,
    GoalReached,
}

impl From<StopReason> for TerminationReason {
    fn from(r: StopReason) -> Self {
        match r {
            StopReason::Converged => TerminationReason::Converged,
            StopReason::Budget => TerminationReason::Budget,
            StopReason::Stalled => TerminationReason::Stalled,
        }
    }
}

/// Wall-clock measurements. Everything in here is excluded from the
/// byte-identical determinism guarantee of reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TimingBlock {
    /// Real seconds between consecutive motor events.
    pub rit_series: Vec<f64>,
    /// Real seconds of each motor event since run start.
    pub wall_events: Vec<f64>,
}

/// Per-run record: evaluations, discrepancy, traces and timing.
///
/// Serialized field order keeps `timing` last so the deterministic payload
/// can be compared byte-for-byte after dropping that one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub schema: String,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub genome_len: usize,
    pub total_evaluations: u64,
    /// Waypoints mentally replayed by IET prefix re-execution; not fitness
    /// evaluations.
    pub replay_steps: u64,
    /// DTW discrepancy between the executed feature trace and the action.
    pub final_discrepancy: f64,
    /// Distance from the final features to the last intermediate goal.
    pub final_goal_discrepancy: f64,
    pub final_features: Vec<f64>,
    pub termination_reason: TerminationReason,
    /// Localization indices over time (OET only; empty otherwise).
    pub goal_trace: Vec<usize>,
    /// Joint waypoints executed on the live world.
    pub motor_trajectory: Vec<Vec<f64>>,
    /// Live feature samples at 10 Hz of simulated time.
    pub feature_trace: Vec<Sample>,
    /// Simulated clock at each motor event (reference event included).
    pub motor_events_sim: Vec<f64>,
    pub sim_duration: f64,
    pub action: FeatureTrajectory,
    pub evolution: EvolutionConfig,
    pub strategy_config: StrategyConfig,
    pub timing: TimingBlock,
}

impl ExecutionReport {
    /// Whether the run ended with the final goal achieved.
    pub fn goal_achieved(&self) -> bool {
        self.termination_reason == TerminationReason::GoalReached
            || self.final_goal_discrepancy <= self.strategy_config.goal_epsilon
    }

    /// Mean of the RIT series; the per-run scalar aggregated by benchmarks.
    pub fn mean_rit(&self) -> f64 {
        if self.timing.rit_series.is_empty() {
            0.0
        } else {
            self.timing.rit_series.iter().sum::<f64>() / self.timing.rit_series.len() as f64
        }
    }
}

/// Consecutive differences of motor-event wall timestamps.
pub fn measure_rit(event_log: &[MotorEvent]) -> Vec<f64> {
    event_log.windows(2).map(|w| w[1].wall - w[0].wall).collect()
}

/// Finds the intermediate goal closest to the perceived features, scanning
/// the window [j_prev, n-1]. Ties break toward the smallest index; the
/// window never lets localization move backwards even if an earlier goal is
/// closer (the erased-paint case).
pub fn localize(
    perception: &PerceptionVector,
    action: &FeatureTrajectory,
    j_prev: usize,
    norm_order: f64,
    weights: &FeatureWeights,
) -> Result<usize> {
    let n = action.n();
    if j_prev >= n {
        return Err(Error::InvalidArgument(format!(
            "j_prev {j_prev} outside goal range 0..{n}"
        )));
    }
    if perception.values.len() != action.m() {
        return Err(Error::DimensionMismatch {
            context: "localization features",
            expected: action.m(),
            actual: perception.values.len(),
        });
    }
    let mut best = (j_prev, f64::INFINITY);
    for j in j_prev..n {
        let goal = action.goal(j);
        let d = weighted_p_norm(&perception.values, &goal, weights, norm_order);
        if d < best.1 {
            best = (j, d);
        }
    }
    Ok(best.0)
}

fn weighted_p_norm(p: &[f64], x: &[f64], weights: &FeatureWeights, order: f64) -> f64 {
    let sum: f64 = p
        .iter()
        .zip(x)
        .zip(weights.as_slice())
        .map(|((a, b), w)| (w * (a - b)).abs().powf(order))
        .sum();
    sum.powf(1.0 / order)
}

fn feature_weights(action: &FeatureTrajectory, cfg: &StrategyConfig) -> Result<FeatureWeights> {
    if cfg.raw_weights {
        FeatureWeights::uniform(action.m())
    } else {
        FeatureWeights::from_action(action)
    }
}

fn check_world(
    action: &FeatureTrajectory,
    world: &World,
    rc: &RunConfig,
) -> Result<FeatureWeights> {
    rc.strategy.validate()?;
    rc.evolution.validate()?;
    let names = world.env.feature_names();
    if names != action.feature_names {
        return Err(Error::FeatureMismatch(format!(
            "world features {:?} do not match action features {:?}",
            names, action.feature_names
        )));
    }
    feature_weights(action, &rc.strategy)
}

/// Splits a flat genome into per-waypoint joint vectors.
fn decode(genes: &[f64], dof: usize) -> Vec<Vec<f64>> {
    genes.chunks(dof).map(|c| c.to_vec()).collect()
}

/// Resamples a live feature trace like an observed action; traces shorter
/// than one interval collapse to their final sample.
fn observation_from_trace(samples: &[Sample], t: f64) -> Result<ObservedTrajectory> {
    let duration = samples.last().map(|s| s.t).unwrap_or(0.0);
    if duration < t {
        let last = samples
            .last()
            .ok_or_else(|| Error::InvalidArgument("empty feature trace".into()))?;
        let values = last.values.iter().map(|&v| vec![v]).collect();
        return ObservedTrajectory::from_values(t, values);
    }
    resample_observation(samples, t)
}

struct RunOutput {
    genome_len: usize,
    total_evaluations: u64,
    replay_steps: u64,
    termination_reason: TerminationReason,
    goal_trace: Vec<usize>,
    motor_trajectory: Vec<Vec<f64>>,
}

fn build_report(
    action: &FeatureTrajectory,
    world: &World,
    rc: &RunConfig,
    weights: &FeatureWeights,
    recorder: TraceRecorder,
    out: RunOutput,
) -> Result<ExecutionReport> {
    let feature_trace = recorder.into_samples();
    let observed = observation_from_trace(&feature_trace, action.t_min)?;
    let final_discrepancy = discrepancy(&observed, action, weights)?;
    let final_features = feature_trace
        .last()
        .map(|s| s.values.clone())
        .unwrap_or_default();
    let final_goal_discrepancy =
        goal_discrepancy(&final_features, &action.goal(action.n() - 1), weights)?;
    Ok(ExecutionReport {
        schema: REPORT_SCHEMA.into(),
        strategy: rc.strategy.strategy,
        seed: rc.seed,
        genome_len: out.genome_len,
        total_evaluations: out.total_evaluations,
        replay_steps: out.replay_steps,
        final_discrepancy,
        final_goal_discrepancy,
        final_features,
        termination_reason: out.termination_reason,
        goal_trace: out.goal_trace,
        motor_trajectory: out.motor_trajectory,
        feature_trace,
        motor_events_sim: world.event_log.iter().map(|e| e.sim).collect(),
        sim_duration: world.clock,
        action: action.clone(),
        evolution: rc.evolution.clone(),
        strategy_config: rc.strategy.clone(),
        timing: TimingBlock {
            rit_series: measure_rit(&world.event_log),
            wall_events: world.event_log.iter().map(|e| e.wall).collect(),
        },
    })
}

fn log_run_start(world: &mut World) -> Result<()> {
    let here = world.joints.clone();
    motor_execution(world, &here, None)
}

/// Executes planned waypoints on the live world, firing due perturbations
/// before each movement. Offline strategies never perceive these changes;
/// they simply execute into the changed world.
fn motor_phase(
    world: &mut World,
    recorder: &mut TraceRecorder,
    waypoints: &[Vec<f64>],
    schedule: &mut PerturbationSchedule,
) -> Result<()> {
    for (k, wp) in waypoints.iter().enumerate() {
        let now = Now {
            wall_seconds: world.wall_elapsed(),
            motor_executions: k as u32,
        };
        schedule.apply_due(world, now)?;
        motor_execution(world, wp, Some(recorder))?;
    }
    Ok(())
}

/// Full Trajectory Evolution: one genome of DoF*n parameters scored by the
/// DTW discrepancy of its whole mental trajectory, motor-executed waypoint
/// by waypoint once planning terminates.
pub fn run_fte(
    action: &FeatureTrajectory,
    mut world: World,
    rc: &RunConfig,
) -> Result<ExecutionReport> {
    let weights = check_world(action, &world, rc)?;
    let dof = world.arm.dof;
    let genome_len = dof * action.n();
    let mut recorder = TraceRecorder::start(&world);
    log_run_start(&mut world)?;

    let snapshot = world.snapshot();
    let t_min = action.t_min;
    let mut fitness = |genes: &[f64]| -> Result<f64> {
        let observed = mental_execution(&snapshot, &decode(genes, dof), t_min)?;
        discrepancy(&observed, action, &weights)
    };
    let mut pop = initialize_population(&rc.evolution, genome_len, rc.seed, Some(&mut fitness))?;
    let outcome = run_until_termination(&mut pop, &rc.evolution, 0, &mut fitness)?;
    let waypoints = decode(&pop.best().expect("population evaluated").genes, dof);

    let mut schedule = PerturbationSchedule::new(rc.perturbations.clone());
    motor_phase(&mut world, &mut recorder, &waypoints, &mut schedule)?;
    recorder.finish(&world);
    build_report(
        action,
        &world,
        rc,
        &weights,
        recorder,
        RunOutput {
            genome_len,
            total_evaluations: pop.eval_count(),
            replay_steps: 0,
            termination_reason: outcome.reason.into(),
            goal_trace: Vec::new(),
            motor_trajectory: waypoints,
        },
    )
}

/// Individual Evolution: each waypoint evolved independently against its own
/// goal, always from the initial world snapshot. Joint positions for later
/// goals therefore ignore what earlier waypoints already achieved.
pub fn run_ie(
    action: &FeatureTrajectory,
    mut world: World,
    rc: &RunConfig,
) -> Result<ExecutionReport> {
    let weights = check_world(action, &world, rc)?;
    let (recorder, out) = run_per_goal(action, &mut world, rc, &weights, false)?;
    build_report(action, &world, rc, &weights, recorder, out)
}

/// Incrementally Evolved Trajectories: like IE, but every fitness evaluation
/// first replays the already-planned prefix on a fresh snapshot, so each
/// goal is evolved with awareness of what the trajectory has achieved.
pub fn run_iet(
    action: &FeatureTrajectory,
    mut world: World,
    rc: &RunConfig,
) -> Result<ExecutionReport> {
    let weights = check_world(action, &world, rc)?;
    let (recorder, out) = run_per_goal(action, &mut world, rc, &weights, true)?;
    build_report(action, &world, rc, &weights, recorder, out)
}

fn run_per_goal(
    action: &FeatureTrajectory,
    world: &mut World,
    rc: &RunConfig,
    weights: &FeatureWeights,
    replay_prefix: bool,
) -> Result<(TraceRecorder, RunOutput)> {
    let dof = world.arm.dof;
    let n = action.n();
    let mut recorder = TraceRecorder::start(world);
    log_run_start(world)?;

    let initial = world.snapshot();
    let scaled = scale_budget(&rc.evolution, n as u32)?;
    // One initialization for the whole run; each goal burst re-evaluates the
    // population against its own fitness, charged as the burst's first cycle.
    let mut pop = initialize_population(&rc.evolution, dof, rc.seed, None)?;
    let mut planned: Vec<Vec<f64>> = Vec::with_capacity(n);
    let replayed = Cell::new(0u64);
    let mut last_reason = StopReason::Budget;
    for j in 0..n {
        let goal = action.goal(j);
        let prefix: Vec<Vec<f64>> = if replay_prefix {
            planned.clone()
        } else {
            Vec::new()
        };
        let mut fitness = |genes: &[f64]| -> Result<f64> {
            let mut waypoints = prefix.clone();
            waypoints.push(genes.to_vec());
            replayed.set(replayed.get() + prefix.len() as u64);
            let features = simulate_final_features(&initial, &waypoints)?;
            goal_discrepancy(&features, &goal, weights)
        };
        pop.evaluate_all(&mut fitness)?;
        let outcome = run_until_termination(&mut pop, &scaled, 1, &mut fitness)?;
        last_reason = outcome.reason;
        planned.push(pop.best().expect("population evaluated").genes.clone());
    }

    let mut schedule = PerturbationSchedule::new(rc.perturbations.clone());
    motor_phase(world, &mut recorder, &planned, &mut schedule)?;
    recorder.finish(world);
    Ok((
        recorder,
        RunOutput {
            genome_len: dof,
            total_evaluations: pop.eval_count(),
            replay_steps: replayed.get(),
            termination_reason: last_reason.into(),
            goal_trace: Vec::new(),
            motor_trajectory: planned,
        },
    ))
}

/// Online Evolved Trajectories: perceive, localize, evolve the next goal
/// briefly, move, repeat. The population persists across iterations; due
/// perturbations apply between iterations; the loop runs at most `otc`
/// times and stops early once the final goal is reached.
pub fn run_oet(
    action: &FeatureTrajectory,
    mut world: World,
    rc: &RunConfig,
) -> Result<ExecutionReport> {
    let weights = check_world(action, &world, rc)?;
    let dof = world.arm.dof;
    let n = action.n();
    let mut recorder = TraceRecorder::start(&world);
    log_run_start(&mut world)?;

    let mut schedule = PerturbationSchedule::new(rc.perturbations.clone());
    let scaled = scale_budget(&rc.evolution, rc.strategy.otc)?;
    let mut pop = initialize_population(&rc.evolution, dof, rc.seed, None)?;
    let mut goal_trace = Vec::new();
    let mut motor_trajectory: Vec<Vec<f64>> = Vec::new();
    let mut j_prev = 0usize;
    let mut reason = TerminationReason::Budget;

    for _ in 0..rc.strategy.otc {
        let now = Now {
            wall_seconds: world.wall_elapsed(),
            motor_executions: motor_trajectory.len() as u32,
        };
        schedule.apply_due(&mut world, now)?;
        let perception = sensor_perception(&world);
        let j = localize(
            &perception,
            action,
            j_prev,
            rc.strategy.localization_norm_order,
            &weights,
        )?;
        goal_trace.push(j);
        if j == n - 1 {
            let d = goal_discrepancy(&perception.values, &action.goal(n - 1), &weights)?;
            if d <= rc.strategy.goal_epsilon {
                reason = TerminationReason::GoalReached;
                break;
            }
        }
        // Evolve the goal after the localized one, clamped at the end.
        let target = action.goal((j + 1).min(n - 1));
        let snapshot = world.snapshot();
        let mut fitness = |genes: &[f64]| -> Result<f64> {
            let features = simulate_final_features(&snapshot, &[genes.to_vec()])?;
            goal_discrepancy(&features, &target, &weights)
        };
        pop.evaluate_all(&mut fitness)?;
        run_until_termination(&mut pop, &scaled, 1, &mut fitness)?;
        let best = pop.best().expect("population evaluated").genes.clone();
        motor_execution(&mut world, &best, Some(&mut recorder))?;
        motor_trajectory.push(best);
        j_prev = j;
    }

    recorder.finish(&world);
    build_report(
        action,
        &world,
        rc,
        &weights,
        recorder,
        RunOutput {
            genome_len: dof,
            total_evaluations: pop.eval_count(),
            replay_steps: 0,
            termination_reason: reason,
            goal_trace,
            motor_trajectory,
        },
    )
}

/// Builds the world from the scenario and dispatches to the configured (or
/// overridden) strategy. Seed priority: explicit argument, then the strategy
/// block, then the evolution block.
pub fn execute_scenario(
    action: &FeatureTrajectory,
    scenario: &Scenario,
    strategy: Option<StrategyKind>,
    seed: Option<u64>,
) -> Result<ExecutionReport> {
    scenario.validate()?;
    let kind = strategy.unwrap_or(scenario.strategy.strategy);
    let seed = seed
        .or(scenario.strategy.seed)
        .unwrap_or(scenario.evolution.seed);
    let mut strategy_cfg = scenario.strategy.clone();
    strategy_cfg.strategy = kind;
    strategy_cfg.seed = Some(seed);
    let rc = RunConfig {
        strategy: strategy_cfg,
        evolution: scenario.evolution.clone(),
        seed,
        perturbations: scenario.perturbations.clone(),
    };
    let world = scenario.build_world()?;
    match kind {
        StrategyKind::Fte => run_fte(action, world, &rc),
        StrategyKind::Ie => run_ie(action, world, &rc),
        StrategyKind::Iet => run_iet(action, world, &rc),
        StrategyKind::Oet => run_oet(action, world, &rc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generalize;
    use crate::scenario::{builtin_paint, generate_demonstrations};
    use proptest::prelude::*;

    fn tiny_rc(kind: StrategyKind, seed: u64) -> RunConfig {
        RunConfig::new(
            StrategyConfig {
                strategy: kind,
                otc: 8,
                ..Default::default()
            },
            EvolutionConfig {
                pop_size: 6,
                tournament_size: 3,
                tc: 12,
                tcf: 6,
                ..Default::default()
            },
            seed,
        )
    }

    fn tiny_paint_setup() -> (FeatureTrajectory, Scenario) {
        let mut scenario = builtin_paint();
        // Short demos for fast unit tests.
        for profile in &mut scenario.demos {
            profile.duration = 30.0;
        }
        let demos = generate_demonstrations(&scenario).unwrap();
        let action = generalize(&demos, 10.0).unwrap();
        (action, scenario)
    }

    #[test]
    fn rit_is_consecutive_differences() {
        let mk = |wall: f64| MotorEvent { wall, sim: 0.0 };
        assert_eq!(measure_rit(&[mk(0.0), mk(4.0), mk(8.0)]), vec![4.0, 4.0]);
        assert_eq!(measure_rit(&[mk(3.0)]), Vec::<f64>::new());
        assert_eq!(measure_rit(&[]), Vec::<f64>::new());
    }

    #[test]
    fn localize_picks_exact_match() {
        let action = FeatureTrajectory::new(
            vec!["painted".into()],
            vec!["fraction".into()],
            1.0,
            5.0,
            vec![vec![0.1, 0.3, 0.5, 0.7, 0.9]],
        )
        .unwrap();
        let w = FeatureWeights::uniform(1).unwrap();
        let p = PerceptionVector {
            t: 0.0,
            values: vec![0.7],
        };
        assert_eq!(localize(&p, &action, 0, 2.0, &w).unwrap(), 3);
        // The window never returns below j_prev even when an earlier goal is
        // closer.
        let p = PerceptionVector {
            t: 0.0,
            values: vec![0.1],
        };
        assert_eq!(localize(&p, &action, 2, 2.0, &w).unwrap(), 2);
    }

    #[test]
    fn localize_rejects_bad_window() {
        let action = FeatureTrajectory::new(
            vec!["painted".into()],
            vec!["fraction".into()],
            1.0,
            2.0,
            vec![vec![0.0, 1.0]],
        )
        .unwrap();
        let w = FeatureWeights::uniform(1).unwrap();
        let p = PerceptionVector {
            t: 0.0,
            values: vec![0.5],
        };
        assert!(localize(&p, &action, 2, 2.0, &w).is_err());
    }

    proptest! {
        #[test]
        fn localize_matches_window_scan(
            goals in proptest::collection::vec(0.0f64..1.0, 3..10),
            probe in 0.0f64..1.0,
            j_prev_frac in 0.0f64..1.0,
        ) {
            let n = goals.len();
            let action = FeatureTrajectory::new(
                vec!["painted".into()],
                vec!["fraction".into()],
                1.0,
                n as f64,
                vec![goals.clone()],
            ).unwrap();
            let w = FeatureWeights::uniform(1).unwrap();
            let j_prev = ((n - 1) as f64 * j_prev_frac) as usize;
            let p = PerceptionVector { t: 0.0, values: vec![probe] };
            let got = localize(&p, &action, j_prev, 2.0, &w).unwrap();

            // Independent scan.
            let mut want = j_prev;
            let mut best = f64::INFINITY;
            for j in j_prev..n {
                let d = (probe - goals[j]).abs();
                if d < best {
                    best = d;
                    want = j;
                }
            }
            prop_assert_eq!(got, want);
            prop_assert!(got >= j_prev && got < n);
        }
    }

    #[test]
    fn genome_lengths_per_strategy() {
        let (action, scenario) = tiny_paint_setup();
        let dof = scenario.world.arm.dof;
        let n = action.n();

        let fte = run_fte(
            &action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Fte, 5),
        )
        .unwrap();
        assert_eq!(fte.genome_len, dof * n);

        let ie = run_ie(
            &action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Ie, 5),
        )
        .unwrap();
        assert_eq!(ie.genome_len, dof);
        assert_eq!(ie.replay_steps, 0);

        let iet = run_iet(
            &action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Iet, 5),
        )
        .unwrap();
        assert_eq!(iet.genome_len, dof);
        assert!(iet.replay_steps > 0);
    }

    #[test]
    fn ie_and_iet_agree_on_first_goal() {
        // Goal 0 has an empty prefix, so IET behaves exactly like IE there.
        let (action, scenario) = tiny_paint_setup();
        let ie = run_ie(
            &action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Ie, 9),
        )
        .unwrap();
        let iet = run_iet(
            &action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Iet, 9),
        )
        .unwrap();
        assert_eq!(ie.motor_trajectory[0], iet.motor_trajectory[0]);
    }

    #[test]
    fn fte_converges_immediately_on_trivial_action() {
        // An action equal to the initial features everywhere: candidates
        // that never touch the wall already have zero discrepancy. Start the
        // arm away from the wall so such candidates are common.
        let (_, mut scenario) = tiny_paint_setup();
        scenario.world.initial_joints = None;
        let action = FeatureTrajectory::new(
            vec!["painted".into()],
            vec!["fraction".into()],
            10.0,
            30.0,
            vec![vec![0.0, 0.0, 0.0]],
        )
        .unwrap();
        let rc = RunConfig::new(
            StrategyConfig {
                strategy: StrategyKind::Fte,
                ..Default::default()
            },
            EvolutionConfig::default(),
            3,
        );
        let report = run_fte(&action, scenario.build_world().unwrap(), &rc).unwrap();
        assert_eq!(report.termination_reason, TerminationReason::Converged);
        assert_eq!(report.total_evaluations, 10);
        assert!(report.final_discrepancy <= rc.evolution.fitness_epsilon);
    }

    #[test]
    fn offline_runs_log_reference_plus_n_motor_events() {
        let (action, scenario) = tiny_paint_setup();
        let n = action.n();
        let report = run_fte(
            &action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Fte, 2),
        )
        .unwrap();
        assert_eq!(report.motor_events_sim.len(), n + 1);
        assert_eq!(report.timing.rit_series.len(), n);
        assert_eq!(report.motor_trajectory.len(), n);
    }

    #[test]
    fn oet_respects_otc_and_goal_window() {
        let (action, scenario) = tiny_paint_setup();
        let rc = tiny_rc(StrategyKind::Oet, 4);
        let report = run_oet(&action, scenario.build_world().unwrap(), &rc).unwrap();
        assert!(report.motor_trajectory.len() <= rc.strategy.otc as usize);
        assert_eq!(
            report.timing.rit_series.len(),
            report.motor_events_sim.len() - 1
        );
        assert!(report.goal_trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn execute_scenario_is_deterministic_modulo_timing() {
        let (action, scenario) = tiny_paint_setup();
        let strip = |r: &ExecutionReport| {
            let mut v = serde_json::to_value(r).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            serde_json::to_string(&v).unwrap()
        };
        let a = execute_scenario(&action, &scenario, Some(StrategyKind::Oet), Some(11)).unwrap();
        let b = execute_scenario(&action, &scenario, Some(StrategyKind::Oet), Some(11)).unwrap();
        assert_eq!(strip(&a), strip(&b));
        let c = execute_scenario(&action, &scenario, Some(StrategyKind::Oet), Some(12)).unwrap();
        assert_ne!(strip(&a), strip(&c));
    }

    #[test]
    fn feature_mismatch_is_rejected() {
        let (_, scenario) = tiny_paint_setup();
        let iron_action = FeatureTrajectory::new(
            ["x", "y", "z", "f_z"].map(String::from).to_vec(),
            ["meter", "meter", "meter", "newton"]
                .map(String::from)
                .to_vec(),
            3.0,
            9.0,
            vec![vec![0.5; 3]; 4],
        )
        .unwrap();
        let out = run_fte(
            &iron_action,
            scenario.build_world().unwrap(),
            &tiny_rc(StrategyKind::Fte, 1),
        );
        assert!(matches!(out, Err(Error::FeatureMismatch(_))));
    }
}
