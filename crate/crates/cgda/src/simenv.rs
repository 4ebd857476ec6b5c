//! Deterministic simulated worlds: a kinematic arm in front of either a
//! paintable wall or an ironing board.
//!
//! Kinematic convention (all angles in degrees):
//! - the arm base sits at (0, 0, `base_height`);
//! - joint 1 yaws about the world +z axis, its link stays horizontal;
//! - joints 2..dof pitch about the arm's local +y axis, accumulating along
//!   the chain, with positive pitch lowering the tip;
//! - link k extends along the chain direction after joint k.
//!
//! With all joints at zero the arm points along +x, fully extended, so the
//! tip sits at (sum of link lengths, 0, base_height).
//!
//! Worlds are plain values: cloning one yields a snapshot whose mutation
//! never touches the original. Mental execution runs on such snapshots and
//! leaves the live world bit-identical.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{resample_observation, ObservedTrajectory, Sample};

/// Environment stepping rate during joint motion.
pub const SUBSTEP_HZ: f64 = 100.0;
/// Feature sampling rate for recorded traces.
pub const RECORD_HZ: f64 = 10.0;

/// Serial-chain arm: one yaw joint followed by pitch joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmModel {
    pub dof: usize,
    pub link_lengths: Vec<f64>,
    /// Per-joint limits in degrees, the same pair for every joint.
    pub joint_bounds: (f64, f64),
    /// Degrees per second.
    pub max_joint_speed: f64,
    pub base_height: f64,
}

impl Default for ArmModel {
    fn default() -> Self {
        ArmModel {
            dof: 3,
            link_lengths: vec![0.3, 0.3, 0.2],
            joint_bounds: (-15.0, 100.0),
            max_joint_speed: 5.0,
            base_height: 0.55,
        }
    }
}

impl ArmModel {
    pub fn validate(&self) -> Result<()> {
        if self.dof < 1 {
            return Err(Error::Config("arm needs at least 1 joint".into()));
        }
        if self.link_lengths.len() != self.dof {
            return Err(Error::Config(format!(
                "arm has {} links for {} joints",
                self.link_lengths.len(),
                self.dof
            )));
        }
        if self.link_lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Config("link lengths must be positive".into()));
        }
        let (lo, hi) = self.joint_bounds;
        if !(lo < hi) {
            return Err(Error::Config(format!("joint bounds ({lo}, {hi}) need lo < hi")));
        }
        if !(self.max_joint_speed > 0.0) {
            return Err(Error::Config("max joint speed must be positive".into()));
        }
        Ok(())
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    fn check_joints(&self, joints: &[f64]) -> Result<()> {
        if joints.len() != self.dof {
            return Err(Error::DimensionMismatch {
                context: "joint vector",
                expected: self.dof,
                actual: joints.len(),
            });
        }
        let (lo, hi) = self.joint_bounds;
        for (k, &q) in joints.iter().enumerate() {
            if !(lo..=hi).contains(&q) || !q.is_finite() {
                return Err(Error::JointOutOfBounds {
                    joint: k,
                    value: q,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// Tip position of the serial chain, in meters.
pub fn forward_kinematics(arm: &ArmModel, joints: &[f64]) -> Result<[f64; 3]> {
    arm.check_joints(joints)?;
    let yaw = joints[0].to_radians();
    let (sy, cy) = yaw.sin_cos();
    let mut pos = [0.0, 0.0, arm.base_height];
    let mut pitch = 0.0f64;
    for (k, &len) in arm.link_lengths.iter().enumerate() {
        if k > 0 {
            pitch += joints[k].to_radians();
        }
        let (sp, cp) = pitch.sin_cos();
        pos[0] += len * cy * cp;
        pos[1] += len * sy * cp;
        pos[2] -= len * sp;
    }
    Ok(pos)
}

/// Closed-form inverse kinematics for the default 3-joint chain. Prefers the
/// elbow branch whose joints fall inside the bounds.
pub fn inverse_kinematics(arm: &ArmModel, target: [f64; 3]) -> Result<Vec<f64>> {
    if arm.dof != 3 {
        return Err(Error::Config(format!(
            "analytic inverse kinematics supports the 3-joint chain, arm has {}",
            arm.dof
        )));
    }
    let unreachable = |reason: &str| Error::UnreachableWaypoint {
        index: 0,
        x: target[0],
        y: target[1],
        z: target[2],
        reason: reason.into(),
    };
    let (l1, l2, l3) = (
        arm.link_lengths[0],
        arm.link_lengths[1],
        arm.link_lengths[2],
    );
    let yaw = target[1].atan2(target[0]).to_degrees();
    let rho = target[0].hypot(target[1]);
    let u = rho - l1;
    let v = arm.base_height - target[2]; // positive is below the shoulder
    let r2 = u * u + v * v;
    let cos_elbow = (r2 - l2 * l2 - l3 * l3) / (2.0 * l2 * l3);
    if cos_elbow.abs() > 1.0 {
        return Err(unreachable("outside the reachable annulus"));
    }
    let elbow = cos_elbow.acos();
    for theta3 in [elbow, -elbow] {
        let wrist = (l3 * theta3.sin()).atan2(l2 + l3 * theta3.cos());
        let theta2 = v.atan2(u) - wrist;
        let joints = vec![yaw, theta2.to_degrees(), theta3.to_degrees()];
        if arm.check_joints(&joints).is_ok() {
            return Ok(joints);
        }
    }
    Err(unreachable("both elbow branches violate joint bounds"))
}

/// Paintable wall: a vertical plane at `x = wall_x`, carrying a cell grid
/// over a rectangle in the (y, z) plane. The brush paints every cell whose
/// center lies within `brush_radius` of the tip projection whenever the tip
/// is within `paint_reach` of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaintWorld {
    pub wall_x: f64,
    pub origin_y: f64,
    pub origin_z: f64,
    pub width: f64,
    pub height: f64,
    pub cols: usize,
    pub rows: usize,
    pub brush_radius: f64,
    pub paint_reach: f64,
    #[serde(skip)]
    cells: Vec<bool>,
    #[serde(skip)]
    painted: usize,
}

impl Default for PaintWorld {
    // Grid cells stay empty until the world is built; see [`World::new`].
    fn default() -> Self {
        PaintWorld {
            wall_x: 0.6,
            origin_y: -0.5,
            origin_z: 0.0,
            width: 1.0,
            height: 1.0,
            cols: 100,
            rows: 100,
            brush_radius: 0.05,
            paint_reach: 0.02,
            cells: Vec::new(),
            painted: 0,
        }
    }
}

impl PaintWorld {
    pub fn reset(&mut self) {
        self.cells = vec![false; self.rows * self.cols];
        self.painted = 0;
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || !(self.width > 0.0) || !(self.height > 0.0) {
            return Err(Error::Config("paint grid must be non-degenerate".into()));
        }
        if !(self.brush_radius > 0.0) || !(self.paint_reach > 0.0) {
            return Err(Error::Config("brush radius and paint reach must be positive".into()));
        }
        Ok(())
    }

    pub fn painted_fraction(&self) -> f64 {
        self.painted as f64 / (self.rows * self.cols) as f64
    }

    pub fn painted_cells(&self) -> usize {
        self.painted
    }

    pub fn is_painted(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    fn cell_w(&self) -> f64 {
        self.width / self.cols as f64
    }

    fn cell_h(&self) -> f64 {
        self.height / self.rows as f64
    }

    /// Paints the disc around (y, z) on the wall plane.
    pub fn deposit(&mut self, y: f64, z: f64) {
        let r = self.brush_radius;
        let (cw, ch) = (self.cell_w(), self.cell_h());
        let c_lo = (((y - r - self.origin_y) / cw).floor().max(0.0)) as usize;
        let c_hi = ((((y + r - self.origin_y) / cw).ceil()).max(0.0) as usize).min(self.cols);
        let r_lo = (((z - r - self.origin_z) / ch).floor().max(0.0)) as usize;
        let r_hi = ((((z + r - self.origin_z) / ch).ceil()).max(0.0) as usize).min(self.rows);
        for row in r_lo..r_hi {
            let cz = self.origin_z + (row as f64 + 0.5) * ch;
            for col in c_lo..c_hi {
                let cy = self.origin_y + (col as f64 + 0.5) * cw;
                let idx = row * self.cols + col;
                if !self.cells[idx] && (cy - y).hypot(cz - z) <= r {
                    self.cells[idx] = true;
                    self.painted += 1;
                }
            }
        }
    }

    /// Unpaints every painted cell whose center falls in the (y, z)
    /// rectangle. Returns the number of cells erased.
    pub fn erase_rect(&mut self, y0: f64, z0: f64, y1: f64, z1: f64) -> usize {
        self.set_rect(y0, z0, y1, z1, false)
    }

    /// Paints every cell whose center falls in the rectangle.
    pub fn paint_rect(&mut self, y0: f64, z0: f64, y1: f64, z1: f64) -> usize {
        self.set_rect(y0, z0, y1, z1, true)
    }

    fn set_rect(&mut self, y0: f64, z0: f64, y1: f64, z1: f64, value: bool) -> usize {
        let mut flipped = 0;
        for row in 0..self.rows {
            let cz = self.origin_z + (row as f64 + 0.5) * self.cell_h();
            if cz < z0 || cz > z1 {
                continue;
            }
            for col in 0..self.cols {
                let cy = self.origin_y + (col as f64 + 0.5) * self.cell_w();
                if cy < y0 || cy > y1 {
                    continue;
                }
                let idx = row * self.cols + col;
                if self.cells[idx] != value {
                    self.cells[idx] = value;
                    flipped += 1;
                    if value {
                        self.painted += 1;
                    } else {
                        self.painted -= 1;
                    }
                }
            }
        }
        flipped
    }
}

/// Ironing board: a horizontal plane exerting a linear penalty force on the
/// tip. F_z = stiffness * max(0, board_height - z_tip).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IronWorld {
    pub board_height: f64,
    pub stiffness: f64,
}

impl Default for IronWorld {
    // Padded board: 30 N at 3 cm penetration.
    fn default() -> Self {
        IronWorld {
            board_height: 0.15,
            stiffness: 1000.0,
        }
    }
}

impl IronWorld {
    pub fn validate(&self) -> Result<()> {
        if !(self.stiffness > 0.0) {
            return Err(Error::Config("board stiffness must be positive".into()));
        }
        Ok(())
    }

    pub fn contact_force(&self, z_tip: f64) -> f64 {
        self.stiffness * (self.board_height - z_tip).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Paint(PaintWorld),
    Iron(IronWorld),
}

impl Environment {
    pub fn feature_names(&self) -> Vec<String> {
        match self {
            Environment::Paint(_) => vec!["painted".into()],
            Environment::Iron(_) => ["x", "y", "z", "f_z"].map(String::from).to_vec(),
        }
    }

    pub fn feature_units(&self) -> Vec<String> {
        match self {
            Environment::Paint(_) => vec!["fraction".into()],
            Environment::Iron(_) => ["meter", "meter", "meter", "newton"]
                .map(String::from)
                .to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Environment::Paint(p) => p.validate(),
            Environment::Iron(i) => i.validate(),
        }
    }

    fn initialize(&mut self) {
        if let Environment::Paint(p) = self {
            p.reset();
        }
    }
}

/// One motor-execution log entry. `wall` is seconds of real time since the
/// world was created; `sim` is the simulated clock at completion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorEvent {
    pub wall: f64,
    pub sim: f64,
}

/// Current feature vector of a world, timestamped with its simulated clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionVector {
    pub t: f64,
    pub values: Vec<f64>,
}

/// The live (or mentally simulated) environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub arm: ArmModel,
    pub joints: Vec<f64>,
    pub clock: f64,
    pub env: Environment,
    pub event_log: Vec<MotorEvent>,
    frozen: Vec<Option<f64>>,
    run_start: Instant,
}

impl World {
    pub fn new(arm: ArmModel, mut env: Environment, initial_joints: Vec<f64>) -> Result<Self> {
        arm.validate()?;
        env.validate()?;
        env.initialize();
        arm.check_joints(&initial_joints)?;
        let dof = arm.dof;
        Ok(World {
            arm,
            joints: initial_joints,
            clock: 0.0,
            env,
            event_log: Vec::new(),
            frozen: vec![None; dof],
            run_start: Instant::now(),
        })
    }

    /// Real seconds elapsed since the world was created.
    pub fn wall_elapsed(&self) -> f64 {
        self.run_start.elapsed().as_secs_f64()
    }

    /// Value-semantics copy for mental execution.
    pub fn snapshot(&self) -> World {
        self.clone()
    }

    pub fn tip_position(&self) -> [f64; 3] {
        forward_kinematics(&self.arm, &self.joints).expect("joints kept within bounds")
    }

    /// Pins a joint: subsequent commands cannot move it off `degrees`.
    pub fn freeze_joint(&mut self, joint: usize, degrees: f64) -> Result<()> {
        if joint >= self.arm.dof {
            return Err(Error::InvalidArgument(format!(
                "cannot freeze joint {joint} of a {}-joint arm",
                self.arm.dof
            )));
        }
        let (lo, hi) = self.arm.joint_bounds;
        if !(lo..=hi).contains(&degrees) {
            return Err(Error::JointOutOfBounds {
                joint,
                value: degrees,
                lo,
                hi,
            });
        }
        self.frozen[joint] = Some(degrees);
        self.joints[joint] = degrees;
        Ok(())
    }

    /// Current feature vector; what a sensor would report.
    pub fn features(&self) -> Vec<f64> {
        let tip = self.tip_position();
        match &self.env {
            Environment::Paint(p) => vec![p.painted_fraction()],
            Environment::Iron(i) => vec![tip[0], tip[1], tip[2], i.contact_force(tip[2])],
        }
    }

    /// One environment step at the current pose: paint deposition happens
    /// here. Iron contact force is stateless and computed on read.
    pub(crate) fn step_environment(&mut self) {
        let tip = self.tip_position();
        if let Environment::Paint(p) = &mut self.env {
            if (tip[0] - p.wall_x).abs() <= p.paint_reach {
                p.deposit(tip[1], tip[2]);
            }
        }
    }

    /// Moves joints linearly to `target` at the arm speed cap, stepping the
    /// environment at SUBSTEP_HZ. No event is logged; callers that represent
    /// motor execution log separately.
    fn drive_to(&mut self, target: &[f64], mut recorder: Option<&mut TraceRecorder>) -> Result<()> {
        self.arm.check_joints(target)?;
        let mut target = target.to_vec();
        for (k, f) in self.frozen.iter().enumerate() {
            if let Some(deg) = f {
                target[k] = *deg;
            }
        }
        let travel = target
            .iter()
            .zip(&self.joints)
            .map(|(t, c)| (t - c).abs())
            .fold(0.0f64, f64::max)
            / self.arm.max_joint_speed;
        if travel == 0.0 {
            return Ok(());
        }
        let steps = (travel * SUBSTEP_HZ).ceil() as usize;
        let start = self.joints.clone();
        let t0 = self.clock;
        let (lo, hi) = self.arm.joint_bounds;
        for k in 1..=steps {
            let frac = k as f64 / steps as f64;
            for (i, q) in self.joints.iter_mut().enumerate() {
                // Clamp away interpolation rounding at the bounds.
                *q = (start[i] + (target[i] - start[i]) * frac).clamp(lo, hi);
            }
            self.clock = t0 + travel * frac;
            self.step_environment();
            if let Some(rec) = recorder.as_deref_mut() {
                rec.maybe_record(self);
            }
        }
        Ok(())
    }
}

/// Samples world features at RECORD_HZ of simulated time.
#[derive(Debug, Clone)]
pub struct TraceRecorder {
    t0: f64,
    next: f64,
    samples: Vec<Sample>,
}

impl TraceRecorder {
    /// Starts a trace at the world's current state (sample at relative t=0).
    pub fn start(world: &World) -> Self {
        let mut rec = TraceRecorder {
            t0: world.clock,
            next: 0.0,
            samples: Vec::new(),
        };
        rec.force_record(world);
        rec
    }

    pub(crate) fn maybe_record(&mut self, world: &World) {
        if world.clock - self.t0 + 1e-12 >= self.next {
            self.force_record(world);
        }
    }

    fn force_record(&mut self, world: &World) {
        let t = world.clock - self.t0;
        if let Some(last) = self.samples.last() {
            if t <= last.t {
                return;
            }
        }
        self.samples.push(Sample::new(t, world.features()));
        self.next = ((t * RECORD_HZ).floor() + 1.0) / RECORD_HZ;
    }

    /// Ensures the final state is part of the trace.
    pub fn finish(&mut self, world: &World) {
        self.force_record(world);
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}

/// Applies a joint command to the live world and logs the motor event.
pub fn motor_execution(
    world: &mut World,
    target: &[f64],
    recorder: Option<&mut TraceRecorder>,
) -> Result<()> {
    let wall = world.run_start.elapsed().as_secs_f64();
    world.drive_to(target, recorder)?;
    world.event_log.push(MotorEvent {
        wall,
        sim: world.clock,
    });
    Ok(())
}

/// Executes a waypoint sequence on a snapshot and reports the feature
/// trajectory it produces, sampled at interval `t_interval`. The live world
/// is untouched; no motor events are logged.
pub fn mental_execution(
    snapshot: &World,
    waypoints: &[Vec<f64>],
    t_interval: f64,
) -> Result<ObservedTrajectory> {
    let mut world = snapshot.snapshot();
    let mut rec = TraceRecorder::start(&world);
    for wp in waypoints {
        world.drive_to(wp, Some(&mut rec))?;
    }
    rec.finish(&world);
    let duration = world.clock - snapshot.clock;
    if duration < t_interval {
        // Too short to slice: a single column with the current features.
        let values = world.features().into_iter().map(|v| vec![v]).collect();
        return ObservedTrajectory::from_values(t_interval, values);
    }
    resample_observation(rec.samples(), t_interval)
}

/// Executes waypoints on a snapshot and returns only the resulting feature
/// vector. The per-goal strategies use this as their fitness input.
pub fn simulate_final_features(snapshot: &World, waypoints: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut world = snapshot.snapshot();
    for wp in waypoints {
        world.drive_to(wp, None)?;
    }
    Ok(world.features())
}

/// Reads the world's current feature vector.
pub fn sensor_perception(world: &World) -> PerceptionVector {
    PerceptionVector {
        t: world.clock,
        values: world.features(),
    }
}
