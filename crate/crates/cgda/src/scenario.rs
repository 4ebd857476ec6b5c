//! Declarative experiment descriptions: which world to build, how to
//! synthesize demonstrations, which strategy and budgets to run, and timed
//! environment perturbations emulating dynamic environments or human
//! intervention.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::model::{write_demo_csv, Demonstration};
use crate::simenv::{
    inverse_kinematics, ArmModel, Environment, IronWorld, PaintWorld, TraceRecorder, World,
    SUBSTEP_HZ,
};
use crate::strategies::StrategyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Paint,
    Iron,
    Custom,
}

/// World construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct WorldConfig {
    pub arm: ArmModel,
    pub initial_joints: Option<Vec<f64>>,
    pub paint: Option<PaintWorld>,
    pub iron: Option<IronWorld>,
}

impl WorldConfig {
    fn environment(&self, action: ActionKind) -> Result<Environment> {
        match action {
            ActionKind::Paint => Ok(Environment::Paint(
                self.paint.clone().unwrap_or_default(),
            )),
            ActionKind::Iron => Ok(Environment::Iron(self.iron.clone().unwrap_or_default())),
            ActionKind::Custom => match (&self.paint, &self.iron) {
                (Some(p), None) => Ok(Environment::Paint(p.clone())),
                (None, Some(i)) => Ok(Environment::Iron(i.clone())),
                _ => Err(Error::Config(
                    "custom action needs exactly one of world.paint / world.iron".into(),
                )),
            },
        }
    }

    pub fn build(&self, action: ActionKind) -> Result<World> {
        let joints = self
            .initial_joints
            .clone()
            .unwrap_or_else(|| vec![0.0; self.arm.dof]);
        World::new(self.arm.clone(), self.environment(action)?, joints)
    }
}

/// A scripted end-effector path, swept at constant speed over `duration`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoProfile {
    pub id: String,
    pub duration: f64,
    pub path: Vec<[f64; 3]>,
}

/// When a perturbation fires. Exactly one trigger kind per event.
///
/// Serialized as a single-key mapping (`{after_motor_execution: 5}`) so the
/// YAML stays plain for non-Rust readers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TriggerRepr", into = "TriggerRepr")]
pub enum Trigger {
    /// Real seconds since the run started. Nondeterministic across machines.
    AtWallSeconds(f64),
    /// Fires once at least this many motor executions have completed. The
    /// deterministic benchmark default.
    AfterMotorExecution(u32),
}

#[derive(Serialize, Deserialize, Default)]
#[serde(default)]
struct TriggerRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    at_wall_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    after_motor_execution: Option<u32>,
}

impl From<Trigger> for TriggerRepr {
    fn from(t: Trigger) -> Self {
        match t {
            Trigger::AtWallSeconds(s) => TriggerRepr {
                at_wall_seconds: Some(s),
                after_motor_execution: None,
            },
            Trigger::AfterMotorExecution(m) => TriggerRepr {
                at_wall_seconds: None,
                after_motor_execution: Some(m),
            },
        }
    }
}

impl TryFrom<TriggerRepr> for Trigger {
    type Error = String;

    fn try_from(r: TriggerRepr) -> std::result::Result<Self, String> {
        match (r.at_wall_seconds, r.after_motor_execution) {
            (Some(s), None) => Ok(Trigger::AtWallSeconds(s)),
            (None, Some(m)) => Ok(Trigger::AfterMotorExecution(m)),
            _ => Err("trigger needs exactly one of at_wall_seconds / after_motor_execution".into()),
        }
    }
}

/// Rectangle on the wall plane: [y0, z0, y1, z1].
pub type WallRect = [f64; 4];

/// Serialized as a single-key mapping, like [`Trigger`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OpRepr", into = "OpRepr")]
pub enum PerturbationOp {
    ErasePaintRegion { rect: WallRect },
    PaintRegion { rect: WallRect },
    MoveBoard { dz: f64 },
    FreezeJoint { joint: usize, degrees: f64 },
}

#[derive(Serialize, Deserialize)]
struct FreezeRepr {
    joint: usize,
    degrees: f64,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(default)]
struct OpRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    erase_paint_region: Option<WallRect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paint_region: Option<WallRect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    move_board: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    freeze_joint: Option<FreezeRepr>,
}

impl From<PerturbationOp> for OpRepr {
    fn from(op: PerturbationOp) -> Self {
        let mut r = OpRepr::default();
        match op {
            PerturbationOp::ErasePaintRegion { rect } => r.erase_paint_region = Some(rect),
            PerturbationOp::PaintRegion { rect } => r.paint_region = Some(rect),
            PerturbationOp::MoveBoard { dz } => r.move_board = Some(dz),
            PerturbationOp::FreezeJoint { joint, degrees } => {
                r.freeze_joint = Some(FreezeRepr { joint, degrees })
            }
        }
        r
    }
}

impl TryFrom<OpRepr> for PerturbationOp {
    type Error = String;

    fn try_from(r: OpRepr) -> std::result::Result<Self, String> {
        let count = r.erase_paint_region.is_some() as u8
            + r.paint_region.is_some() as u8
            + r.move_board.is_some() as u8
            + r.freeze_joint.is_some() as u8;
        if count != 1 {
            return Err("perturbation op needs exactly one operation key".into());
        }
        if let Some(rect) = r.erase_paint_region {
            Ok(PerturbationOp::ErasePaintRegion { rect })
        } else if let Some(rect) = r.paint_region {
            Ok(PerturbationOp::PaintRegion { rect })
        } else if let Some(dz) = r.move_board {
            Ok(PerturbationOp::MoveBoard { dz })
        } else {
            let f = r.freeze_joint.unwrap();
            Ok(PerturbationOp::FreezeJoint {
                joint: f.joint,
                degrees: f.degrees,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationEvent {
    pub trigger: Trigger,
    pub op: PerturbationOp,
}

/// A complete experiment description. Loading is total: an accepted file
/// round-trips (load, serialize, load) to an identical structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub action: ActionKind,
    #[serde(default)]
    pub world: WorldConfig,
    #[serde(default)]
    pub demos: Vec<DemoProfile>,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub perturbations: Vec<PerturbationEvent>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let scenario: Scenario = serde_yaml::from_str(&fs::read_to_string(path)?)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_yaml::to_string(self)?)?;
        Ok(())
    }

    pub fn build_world(&self) -> Result<World> {
        self.world.build(self.action)
    }

    pub fn validate(&self) -> Result<()> {
        self.world.arm.validate()?;
        self.world.environment(self.action)?.validate()?;
        self.evolution.validate()?;
        self.strategy.validate()?;
        for profile in &self.demos {
            if !(profile.duration > 0.0) {
                return Err(Error::Config(format!(
                    "demo profile {} needs a positive duration",
                    profile.id
                )));
            }
            if profile.path.len() < 2 {
                return Err(Error::Config(format!(
                    "demo profile {} needs at least 2 waypoints",
                    profile.id
                )));
            }
        }
        self.validate_perturbations()
    }

    fn validate_perturbations(&self) -> Result<()> {
        let env = self.world.environment(self.action)?;
        let mut last_wall = f64::NEG_INFINITY;
        let mut last_motor = -1i64;
        for (k, event) in self.perturbations.iter().enumerate() {
            match event.trigger {
                Trigger::AtWallSeconds(s) => {
                    if !(s >= 0.0) {
                        return Err(Error::Config(format!(
                            "perturbation {k}: wall trigger must be >= 0, got {s}"
                        )));
                    }
                    if s < last_wall {
                        return Err(Error::Config(format!(
                            "perturbation {k}: wall triggers must be sorted"
                        )));
                    }
                    last_wall = s;
                }
                Trigger::AfterMotorExecution(m) => {
                    if (m as i64) < last_motor {
                        return Err(Error::Config(format!(
                            "perturbation {k}: motor triggers must be sorted"
                        )));
                    }
                    last_motor = m as i64;
                }
            }
            match &event.op {
                PerturbationOp::ErasePaintRegion { rect }
                | PerturbationOp::PaintRegion { rect } => {
                    let paint = match &env {
                        Environment::Paint(p) => p,
                        _ => {
                            return Err(Error::Config(format!(
                                "perturbation {k}: paint op on a non-paint world"
                            )))
                        }
                    };
                    let [y0, z0, y1, z1] = *rect;
                    let inside = y0 < y1
                        && z0 < z1
                        && y0 >= paint.origin_y
                        && z0 >= paint.origin_z
                        && y1 <= paint.origin_y + paint.width
                        && z1 <= paint.origin_z + paint.height;
                    if !inside {
                        return Err(Error::Config(format!(
                            "perturbation {k}: rect {rect:?} outside the wall"
                        )));
                    }
                }
                PerturbationOp::MoveBoard { .. } => {
                    if !matches!(env, Environment::Iron(_)) {
                        return Err(Error::Config(format!(
                            "perturbation {k}: move_board on a non-iron world"
                        )));
                    }
                }
                PerturbationOp::FreezeJoint { joint, degrees } => {
                    let (lo, hi) = self.world.arm.joint_bounds;
                    if *joint >= self.world.arm.dof || !(lo..=hi).contains(degrees) {
                        return Err(Error::Config(format!(
                            "perturbation {k}: freeze_joint({joint}, {degrees}) invalid"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl PerturbationOp {
    fn apply(&self, world: &mut World) -> Result<()> {
        match self {
            PerturbationOp::ErasePaintRegion { rect } => match &mut world.env {
                Environment::Paint(p) => {
                    p.erase_rect(rect[0], rect[1], rect[2], rect[3]);
                    Ok(())
                }
                _ => Err(Error::Config("erase_paint_region on non-paint world".into())),
            },
            PerturbationOp::PaintRegion { rect } => match &mut world.env {
                Environment::Paint(p) => {
                    p.paint_rect(rect[0], rect[1], rect[2], rect[3]);
                    Ok(())
                }
                _ => Err(Error::Config("paint_region on non-paint world".into())),
            },
            PerturbationOp::MoveBoard { dz } => match &mut world.env {
                Environment::Iron(i) => {
                    i.board_height += dz;
                    Ok(())
                }
                _ => Err(Error::Config("move_board on non-iron world".into())),
            },
            PerturbationOp::FreezeJoint { joint, degrees } => {
                world.freeze_joint(*joint, *degrees)
            }
        }
    }
}

/// Point in run time used to decide which perturbations are due.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Now {
    pub wall_seconds: f64,
    pub motor_executions: u32,
}

/// Owns the one-shot bookkeeping for a scenario's perturbation list.
#[derive(Debug, Clone)]
pub struct PerturbationSchedule {
    events: Vec<PerturbationEvent>,
    applied: Vec<bool>,
}

impl PerturbationSchedule {
    pub fn new(events: Vec<PerturbationEvent>) -> Self {
        let applied = vec![false; events.len()];
        PerturbationSchedule { events, applied }
    }

    /// Applies every not-yet-applied event whose trigger is due, in list
    /// order. Returns the indices applied by this call.
    pub fn apply_due(&mut self, world: &mut World, now: Now) -> Result<Vec<usize>> {
        let mut fired = Vec::new();
        for (k, event) in self.events.iter().enumerate() {
            if self.applied[k] {
                continue;
            }
            let due = match event.trigger {
                Trigger::AtWallSeconds(s) => now.wall_seconds >= s,
                Trigger::AfterMotorExecution(m) => now.motor_executions >= m,
            };
            if due {
                event.op.apply(world)?;
                self.applied[k] = true;
                fired.push(k);
            }
        }
        Ok(fired)
    }

    pub fn all_applied(&self) -> bool {
        self.applied.iter().all(|&a| a)
    }
}

/// Synthesizes one demonstration per profile by sweeping the end-effector
/// along the scripted path at constant speed on a fresh world, recording
/// features at 10 Hz.
pub fn generate_demonstrations(scenario: &Scenario) -> Result<Vec<Demonstration>> {
    if scenario.demos.is_empty() {
        return Err(Error::InvalidArgument(
            "scenario defines no demo profiles".into(),
        ));
    }
    scenario.validate()?;
    scenario
        .demos
        .iter()
        .map(|profile| run_profile(scenario, profile))
        .collect()
}

/// Writes demonstrations as `<id>.csv` files into a directory.
pub fn write_demonstrations(dir: &Path, demos: &[Demonstration]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for demo in demos {
        write_demo_csv(&dir.join(format!("{}.csv", demo.id)), demo)?;
    }
    Ok(())
}

fn run_profile(scenario: &Scenario, profile: &DemoProfile) -> Result<Demonstration> {
    let mut world = scenario.build_world()?;
    let pts = &profile.path;
    // Cumulative arc length along the path.
    let mut cum = Vec::with_capacity(pts.len());
    let mut total = 0.0;
    cum.push(0.0);
    for pair in pts.windows(2) {
        let d = (0..3)
            .map(|k| (pair[1][k] - pair[0][k]).powi(2))
            .sum::<f64>()
            .sqrt();
        total += d;
        cum.push(total);
    }
    if total == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "demo profile {} has zero path length",
            profile.id
        )));
    }

    let ik_at = |world: &World, index: usize, pos: [f64; 3]| {
        inverse_kinematics(&world.arm, pos).map_err(|e| match e {
            Error::UnreachableWaypoint { x, y, z, reason, .. } => Error::UnreachableWaypoint {
                index,
                x,
                y,
                z,
                reason: format!("demo profile {}: {reason}", profile.id),
            },
            other => other,
        })
    };

    world.joints = ik_at(&world, 0, pts[0])?;
    world.step_environment();
    let mut rec = TraceRecorder::start(&world);
    let steps = (profile.duration * SUBSTEP_HZ).ceil() as usize;
    for k in 1..=steps {
        let t = profile.duration * k as f64 / steps as f64;
        let s = total * t / profile.duration;
        let (pos, wp_index) = point_along(pts, &cum, s);
        world.joints = ik_at(&world, wp_index, pos)?;
        world.clock = t;
        world.step_environment();
        rec.maybe_record(&world);
    }
    rec.finish(&world);
    Demonstration::new(
        profile.id.clone(),
        world.env.feature_names(),
        world.env.feature_units(),
        rec.into_samples(),
    )
}

/// Position at arc length `s`, plus the index of the segment-end waypoint
/// (used in unreachability errors).
fn point_along(pts: &[[f64; 3]], cum: &[f64], s: f64) -> ([f64; 3], usize) {
    let total = *cum.last().unwrap();
    if s >= total {
        return (*pts.last().unwrap(), pts.len() - 1);
    }
    let mut seg = 0;
    while cum[seg + 1] <= s || cum[seg + 1] == cum[seg] {
        seg += 1;
    }
    let f = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    let mut pos = [0.0; 3];
    for k in 0..3 {
        pos[k] = pts[seg][k] + (pts[seg + 1][k] - pts[seg][k]) * f;
    }
    (pos, seg + 1)
}

// ---------------------------------------------------------------------------
// Built-in benchmark scenarios
// ---------------------------------------------------------------------------

/// Wall patch used by the paint benchmark: a 0.40 m x 0.10 m panel placed
/// where the whole surface is reachable by the default arm.
fn bench_paint_world() -> PaintWorld {
    let mut p = PaintWorld::default();
    p.wall_x = 0.6;
    p.origin_y = -0.10;
    p.origin_z = 0.25;
    p.width = 0.40;
    p.height = 0.10;
    p.cols = 100;
    p.rows = 100;
    p.brush_radius = 0.03;
    p.paint_reach = 0.02;
    p
}

fn paint_profiles() -> Vec<DemoProfile> {
    let wx = 0.6;
    let (z_top, z_bot) = (0.325, 0.275);
    let (y_lo, y_hi) = (-0.10, 0.30);

    // Two-row serpentine.
    let raster = DemoProfile {
        id: "raster_rows".into(),
        duration: 126.0,
        path: vec![
            [wx, y_lo, z_top],
            [wx, y_hi, z_top],
            [wx, y_hi, z_bot],
            [wx, y_lo, z_bot],
        ],
    };

    // Vertical zigzag advancing across the panel. Strokes overshoot the
    // panel's z extent so the chords between columns still reach the edges.
    let mut zig_path = Vec::new();
    let columns = [-0.07, -0.02, 0.03, 0.08, 0.13, 0.18, 0.23, 0.27];
    let (zig_hi, zig_lo) = (0.34, 0.26);
    for (k, &y) in columns.iter().enumerate() {
        let (a, b) = if k % 2 == 0 { (zig_hi, zig_lo) } else { (zig_lo, zig_hi) };
        zig_path.push([wx, y, a]);
        zig_path.push([wx, y, b]);
    }
    let zigzag = DemoProfile {
        id: "zigzag_columns".into(),
        duration: 129.6,
        path: zig_path,
    };

    // Perimeter loop, then a dive towards the center.
    let spiral = DemoProfile {
        id: "spiral_loop".into(),
        duration: 132.0,
        path: vec![
            [wx, -0.08, 0.328],
            [wx, 0.28, 0.328],
            [wx, 0.28, 0.272],
            [wx, -0.08, 0.272],
            [wx, -0.08, 0.328],
            [wx, 0.10, 0.30],
        ],
    };

    // Two strokes with a seeded random wiggle; the jitter is small enough
    // that the brush bands still overlap into full coverage.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut wiggle_path = Vec::new();
    let stroke = |base_z: f64, reverse: bool, rng: &mut ChaCha8Rng, out: &mut Vec<[f64; 3]>| {
        let n = 21;
        for k in 0..n {
            let frac = k as f64 / (n - 1) as f64;
            let y = if reverse {
                y_hi - (y_hi - y_lo) * frac
            } else {
                y_lo + (y_hi - y_lo) * frac
            };
            let z = base_z + rng.gen_range(-0.004..=0.004);
            out.push([wx, y, z]);
        }
    };
    stroke(z_top, false, &mut rng, &mut wiggle_path);
    stroke(z_bot, true, &mut rng, &mut wiggle_path);
    let wiggle = DemoProfile {
        id: "random_wiggle".into(),
        duration: 133.2,
        path: wiggle_path,
    };

    vec![raster, zigzag, spiral, wiggle]
}

/// Paint benchmark: mean demo duration 130.2 s, so t_min = 10 s slices the
/// action into 13 intermediate goals. The arm starts at the brush-on-wall
/// pose the demonstrations start from.
///
/// Mid-execution, a hand wipes a stripe of fresh paint off the wall (30% of
/// the panel). Offline plans keep executing as if nothing happened; online
/// perception notices and repaints.
pub fn builtin_paint() -> Scenario {
    let arm = ArmModel::default();
    let start =
        inverse_kinematics(&arm, [0.6, -0.10, 0.325]).expect("wall start pose is reachable");
    Scenario {
        action: ActionKind::Paint,
        world: WorldConfig {
            arm,
            initial_joints: Some(start),
            paint: Some(bench_paint_world()),
            iron: None,
        },
        demos: paint_profiles(),
        evolution: EvolutionConfig::default(),
        strategy: StrategyConfig {
            otc: 33,
            ..Default::default()
        },
        perturbations: vec![PerturbationEvent {
            trigger: Trigger::AfterMotorExecution(5),
            op: PerturbationOp::ErasePaintRegion {
                rect: [0.02, 0.25, 0.14, 0.35],
            },
        }],
    }
}

/// The erased-wall recovery scenario: same paint world and erase event, but
/// with an online budget generous enough that the run is expected to repaint
/// the stripe and finish the whole action.
pub fn builtin_paint_perturbed() -> Scenario {
    let mut scenario = builtin_paint();
    scenario.evolution.tc = 900;
    scenario.evolution.tcf = 225;
    scenario.strategy.otc = 30;
    scenario
}

fn iron_profiles() -> Vec<DemoProfile> {
    let mk = |id: &str, duration: f64, path: Vec<[f64; 3]>| DemoProfile {
        id: id.into(),
        duration,
        path,
    };
    // Hover, descend to 3 cm penetration (30 N on the padded board), slide
    // diagonally while pressed, ascend outward. The slides and ascents move
    // in x and y so every Cartesian feature varies across the goals.
    vec![
        mk(
            "press_center",
            27.4,
            vec![
                [0.50, 0.00, 0.26],
                [0.50, 0.00, 0.12],
                [0.53, 0.10, 0.12],
                [0.57, 0.10, 0.26],
            ],
        ),
        mk(
            "press_left",
            28.0,
            vec![
                [0.48, 0.04, 0.27],
                [0.48, 0.04, 0.12],
                [0.52, 0.12, 0.12],
                [0.56, 0.12, 0.27],
            ],
        ),
        mk(
            "press_right",
            28.4,
            vec![
                [0.52, -0.04, 0.28],
                [0.52, -0.04, 0.12],
                [0.54, 0.06, 0.12],
                [0.58, 0.06, 0.28],
            ],
        ),
        mk(
            "press_near",
            28.6,
            vec![
                [0.46, 0.08, 0.26],
                [0.46, 0.08, 0.12],
                [0.51, 0.15, 0.12],
                [0.55, 0.15, 0.26],
            ],
        ),
    ]
}

/// Iron benchmark: mean demo duration 28.1 s, so t_min = 3 s slices the
/// action into 9 intermediate goals over 4 features (x, y, z, F_z). The arm
/// starts at the demonstrations' mean hover pose, like the recorded action.
///
/// The board settles 8 mm after the first motor execution: a dynamic
/// environment that offline plans cannot see. Online perception reads the
/// changed contact force and compensates.
pub fn builtin_iron() -> Scenario {
    let arm = ArmModel::default();
    let start =
        inverse_kinematics(&arm, [0.49, 0.02, 0.26]).expect("hover start pose is reachable");
    Scenario {
        action: ActionKind::Iron,
        world: WorldConfig {
            arm,
            initial_joints: Some(start),
            paint: None,
            iron: Some(IronWorld::default()),
        },
        demos: iron_profiles(),
        evolution: EvolutionConfig::default(),
        strategy: StrategyConfig {
            otc: 25,
            ..Default::default()
        },
        perturbations: vec![PerturbationEvent {
            trigger: Trigger::AfterMotorExecution(0),
            op: PerturbationOp::MoveBoard { dz: -0.012 },
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generalize;

    #[test]
    fn builtin_scenarios_validate() {
        builtin_paint().validate().unwrap();
        builtin_iron().validate().unwrap();
        builtin_paint_perturbed().validate().unwrap();
    }

    #[test]
    fn shipped_scenario_files_match_builtins() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("..")
            .join("..")
            .join("scenarios");
        for (file, builtin) in [
            ("paint.yaml", builtin_paint()),
            ("iron.yaml", builtin_iron()),
            ("paint_recovery.yaml", builtin_paint_perturbed()),
        ] {
            let loaded = Scenario::load(&dir.join(file)).unwrap();
            assert_eq!(loaded, builtin, "{file} drifted from the builtin");
        }
    }

    #[test]
    fn yaml_round_trip_is_identity() {
        for scenario in [builtin_paint(), builtin_iron(), builtin_paint_perturbed()] {
            let text = serde_yaml::to_string(&scenario).unwrap();
            let back: Scenario = serde_yaml::from_str(&text).unwrap();
            assert_eq!(back, scenario);
            let again: Scenario =
                serde_yaml::from_str(&serde_yaml::to_string(&back).unwrap()).unwrap();
            assert_eq!(again, scenario);
        }
    }

    #[test]
    fn paint_demos_cover_the_wall() {
        let scenario = builtin_paint();
        let demos = generate_demonstrations(&scenario).unwrap();
        assert_eq!(demos.len(), 4);
        for demo in &demos {
            let last = demo.samples().last().unwrap();
            assert_eq!(
                last.values[0], 1.0,
                "demo {} final painted fraction {}",
                demo.id, last.values[0]
            );
        }
    }

    #[test]
    fn paint_demo_durations_give_thirteen_goals() {
        let scenario = builtin_paint();
        let demos = generate_demonstrations(&scenario).unwrap();
        let mean = demos.iter().map(|d| d.duration()).sum::<f64>() / demos.len() as f64;
        assert!((mean - 130.2).abs() < 1e-9, "mean duration {mean}");
        let action = generalize(&demos, 10.0).unwrap();
        assert_eq!(action.n(), 13);
        assert_eq!(action.m(), 1);
        // Painted fraction goals never decrease.
        let row = action.feature_row(0);
        assert!(row.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn iron_demos_hit_target_force() {
        let scenario = builtin_iron();
        let demos = generate_demonstrations(&scenario).unwrap();
        let mean = demos.iter().map(|d| d.duration()).sum::<f64>() / demos.len() as f64;
        assert!((mean - 28.1).abs() < 1e-9);
        for demo in &demos {
            let peak = demo
                .samples()
                .iter()
                .map(|s| s.values[3])
                .fold(0.0f64, f64::max);
            assert!(
                (peak - 30.0).abs() <= 3.0,
                "demo {} peak force {peak} outside 30 N +/- 10%",
                demo.id
            );
        }
        let action = generalize(&demos, 3.0).unwrap();
        assert_eq!((action.m(), action.n()), (4, 9));
    }

    #[test]
    fn generation_rejects_empty_profile_list() {
        let mut scenario = builtin_paint();
        scenario.demos.clear();
        assert!(matches!(
            generate_demonstrations(&scenario),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn generation_names_unreachable_waypoint() {
        let mut scenario = builtin_paint();
        scenario.demos = vec![DemoProfile {
            id: "bad".into(),
            duration: 10.0,
            path: vec![[0.6, 0.0, 0.3], [1.8, 0.0, 0.3]],
        }];
        match generate_demonstrations(&scenario) {
            Err(Error::UnreachableWaypoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected UnreachableWaypoint, got {other:?}"),
        }
    }

    #[test]
    fn no_due_events_leaves_world_unchanged() {
        let scenario = builtin_paint_perturbed();
        let mut world = scenario.build_world().unwrap();
        let before = world.clone();
        let mut schedule = PerturbationSchedule::new(scenario.perturbations.clone());
        let fired = schedule
            .apply_due(
                &mut world,
                Now {
                    wall_seconds: 0.0,
                    motor_executions: 4,
                },
            )
            .unwrap();
        assert!(fired.is_empty());
        assert_eq!(world, before);
    }

    #[test]
    fn erase_drop_matches_grid_recount() {
        let scenario = builtin_paint_perturbed();
        let mut world = scenario.build_world().unwrap();
        // Paint everything, then erase the stripe.
        let (total, rect) = match &mut world.env {
            Environment::Paint(p) => {
                p.paint_rect(
                    p.origin_y,
                    p.origin_z,
                    p.origin_y + p.width,
                    p.origin_z + p.height,
                );
                ((p.rows * p.cols) as f64, [0.02, 0.25, 0.14, 0.35])
            }
            _ => unreachable!(),
        };
        let before = world.features()[0];
        assert_eq!(before, 1.0);

        // Independent recount of painted cells inside the rect.
        let expected_drop = match &world.env {
            Environment::Paint(p) => {
                let mut count = 0;
                for row in 0..p.rows {
                    for col in 0..p.cols {
                        let cy = p.origin_y + (col as f64 + 0.5) * p.width / p.cols as f64;
                        let cz = p.origin_z + (row as f64 + 0.5) * p.height / p.rows as f64;
                        if p.is_painted(row, col)
                            && cy >= rect[0]
                            && cy <= rect[2]
                            && cz >= rect[1]
                            && cz <= rect[3]
                        {
                            count += 1;
                        }
                    }
                }
                count as f64 / total
            }
            _ => unreachable!(),
        };

        let mut schedule = PerturbationSchedule::new(scenario.perturbations.clone());
        let fired = schedule
            .apply_due(
                &mut world,
                Now {
                    wall_seconds: 0.0,
                    motor_executions: 5,
                },
            )
            .unwrap();
        assert_eq!(fired, vec![0]);
        let after = world.features()[0];
        assert!((before - after - expected_drop).abs() < 1e-12);
        // Roughly the 30% stripe.
        assert!(expected_drop > 0.25 && expected_drop < 0.35);

        // Events fire once.
        let fired_again = schedule
            .apply_due(
                &mut world,
                Now {
                    wall_seconds: 100.0,
                    motor_executions: 50,
                },
            )
            .unwrap();
        assert!(fired_again.is_empty());
        assert!(schedule.all_applied());
    }

    #[test]
    fn move_board_shifts_contact() {
        let scenario = builtin_iron();
        let mut world = scenario.build_world().unwrap();
        let probe = |w: &World, z: f64| match &w.env {
            Environment::Iron(i) => i.contact_force(z),
            _ => unreachable!(),
        };
        let z0 = match &world.env {
            Environment::Iron(i) => i.board_height,
            _ => unreachable!(),
        };
        assert!(probe(&world, z0 - 0.01) > 0.0);
        PerturbationOp::MoveBoard { dz: -0.05 }.apply(&mut world).unwrap();
        assert_eq!(probe(&world, z0 - 0.01), 0.0);
        assert!(probe(&world, z0 - 0.06) > 0.0);
    }

    #[test]
    fn perturbation_validation_catches_bad_rects() {
        let mut scenario = builtin_paint_perturbed();
        scenario.perturbations[0].op = PerturbationOp::ErasePaintRegion {
            rect: [0.02, 0.25, 5.0, 0.35],
        };
        assert!(scenario.validate().is_err());

        let mut scenario = builtin_iron();
        scenario.perturbations = vec![PerturbationEvent {
            trigger: Trigger::AfterMotorExecution(1),
            op: PerturbationOp::ErasePaintRegion {
                rect: [0.0, 0.0, 0.1, 0.1],
            },
        }];
        assert!(scenario.validate().is_err());
    }
}
