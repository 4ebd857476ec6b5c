//! Feature-space action representation.
//!
//! An action is modelled as a trajectory in an m-dimensional space of scalar
//! features (painted fraction, end-effector position, contact force, ...).
//! Recorded demonstrations are sliced into `n` intermediate goals, each goal
//! being the per-interval mean of all demonstration samples that fall in it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ACTION_SCHEMA: &str = "cgda.action/1";

/// One timestamped feature sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(t: f64, values: Vec<f64>) -> Self {
        Sample { t, values }
    }
}

/// Raw feature samples from one recorded demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub id: String,
    pub feature_names: Vec<String>,
    pub feature_units: Vec<String>,
    samples: Vec<Sample>,
}

impl Demonstration {
    /// Validates: at least 2 samples, timestamps strictly increasing and
    /// starting at 0, every sample carrying exactly m values.
    pub fn new(
        id: impl Into<String>,
        feature_names: Vec<String>,
        feature_units: Vec<String>,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        let id = id.into();
        let m = feature_names.len();
        if m == 0 {
            return Err(Error::InvalidArgument(format!("demo {id}: no features")));
        }
        if feature_units.len() != m {
            return Err(Error::DimensionMismatch {
                context: "feature units",
                expected: m,
                actual: feature_units.len(),
            });
        }
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "demo {id}: needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples[0].t != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "demo {id}: first timestamp must be 0, got {}",
                samples[0].t
            )));
        }
        for (k, pair) in samples.windows(2).enumerate() {
            if pair[1].t <= pair[0].t {
                return Err(Error::InvalidArgument(format!(
                    "demo {id}: timestamps not strictly increasing at sample {}",
                    k + 1
                )));
            }
        }
        for (k, s) in samples.iter().enumerate() {
            if s.values.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "demo sample width",
                    expected: m,
                    actual: s.values.len(),
                });
            }
            if k > 0 && !s.t.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "demo {id}: non-finite timestamp at sample {k}"
                )));
            }
        }
        Ok(Demonstration {
            id,
            feature_names,
            feature_units,
            samples,
        })
    }

    pub fn m(&self) -> usize {
        self.feature_names.len()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Duration in seconds (timestamps start at 0).
    pub fn duration(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }
}

/// Generalized action: m features by n intermediate goals. Column j is the
/// j-th goal the execution stage has to achieve in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryRepr", into = "TrajectoryRepr")]
pub struct FeatureTrajectory {
    pub feature_names: Vec<String>,
    pub feature_units: Vec<String>,
    pub t_min: f64,
    pub d_time: f64,
    values: Vec<Vec<f64>>, // m rows, each of length n
}

/// Wire form of [`FeatureTrajectory`]; deserialization re-validates.
#[derive(Serialize, Deserialize)]
struct TrajectoryRepr {
    feature_names: Vec<String>,
    feature_units: Vec<String>,
    t_min: f64,
    d_time: f64,
    values: Vec<Vec<f64>>,
}

impl From<FeatureTrajectory> for TrajectoryRepr {
    fn from(x: FeatureTrajectory) -> Self {
        TrajectoryRepr {
            feature_names: x.feature_names,
            feature_units: x.feature_units,
            t_min: x.t_min,
            d_time: x.d_time,
            values: x.values,
        }
    }
}

impl TryFrom<TrajectoryRepr> for FeatureTrajectory {
    type Error = String;

    fn try_from(r: TrajectoryRepr) -> std::result::Result<Self, String> {
        FeatureTrajectory::new(r.feature_names, r.feature_units, r.t_min, r.d_time, r.values)
            .map_err(|e| e.to_string())
    }
}

impl FeatureTrajectory {
    pub fn new(
        feature_names: Vec<String>,
        feature_units: Vec<String>,
        t_min: f64,
        d_time: f64,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = feature_names.len();
        if m == 0 || values.len() != m {
            return Err(Error::DimensionMismatch {
                context: "feature trajectory rows",
                expected: m.max(1),
                actual: values.len(),
            });
        }
        if feature_units.len() != m {
            return Err(Error::DimensionMismatch {
                context: "feature units",
                expected: m,
                actual: feature_units.len(),
            });
        }
        let n = values[0].len();
        if n == 0 {
            return Err(Error::InvalidArgument("trajectory has no goals".into()));
        }
        for row in &values {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "feature trajectory columns",
                    expected: n,
                    actual: row.len(),
                });
            }
        }
        let expected_n = compute_goal_count(d_time, t_min)?;
        if n != expected_n {
            return Err(Error::InvalidArgument(format!(
                "goal count {n} inconsistent with floor({d_time}/{t_min}) = {expected_n}"
            )));
        }
        Ok(FeatureTrajectory {
            feature_names,
            feature_units,
            t_min,
            d_time,
            values,
        })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.values[0].len()
    }

    /// Row of goal values for feature `i`.
    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Goal column j as an m-vector.
    pub fn goal(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Per-feature value range across all goals (max - min).
    pub fn feature_ranges(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| {
                let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .collect()
    }
}

/// Feature samples observed from an execution, resampled at interval `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTrajectory {
    pub t: f64,
    values: Vec<Vec<f64>>, // m rows, each of length n'
}

impl ObservedTrajectory {
    pub fn from_values(t: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() || values[0].is_empty() {
            return Err(Error::InvalidArgument("empty observed trajectory".into()));
        }
        let n = values[0].len();
        for row in &values {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "observed trajectory columns",
                    expected: n,
                    actual: row.len(),
                });
            }
        }
        Ok(ObservedTrajectory { t, values })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn n_prime(&self) -> usize {
        self.values[0].len()
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Number of intermediate goals an action of duration `d_time` is sliced
/// into, with at least `t_min` seconds between goals: floor(d_time / t_min).
pub fn compute_goal_count(d_time: f64, t_min: f64) -> Result<usize> {
    if !(t_min > 0.0) || !d_time.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "goal count needs d_time finite and t_min > 0 (got d_time={d_time}, t_min={t_min})"
        )));
    }
    if d_time < t_min {
        return Err(Error::InvalidArgument(format!(
            "action duration {d_time} s shorter than goal interval {t_min} s"
        )));
    }
    Ok((d_time / t_min).floor() as usize)
}

/// Maps a sample timestamp to its goal interval. A sample at time `t` in a
/// record of duration `d` lands in interval floor(n*t/d), clamped to n-1, so
/// records of unequal length stay commensurable.
fn interval_of(t: f64, duration: f64, n: usize) -> usize {
    let idx = ((n as f64) * t / duration).floor() as isize;
    idx.clamp(0, n as isize - 1) as usize
}

/// Per-interval mean over a set of sample streams. Every stream is scaled to
/// its own duration before binning. Errors if any interval receives no
/// samples.
fn interval_means(
    streams: &[(&[Sample], f64)],
    m: usize,
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut sums = vec![vec![0.0f64; n]; m];
    let mut counts = vec![0usize; n];
    for (samples, duration) in streams {
        for s in *samples {
            let j = interval_of(s.t, *duration, n);
            counts[j] += 1;
            for i in 0..m {
                sums[i][j] += s.values[i];
            }
        }
    }
    if let Some(j) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyInterval {
            interval: j,
            total: n,
        });
    }
    for row in &mut sums {
        for (j, v) in row.iter_mut().enumerate() {
            *v /= counts[j] as f64;
        }
    }
    Ok(sums)
}

/// Generalizes a set of demonstrations into a feature trajectory.
///
/// The action duration is the mean of the demo durations; each goal value is
/// the arithmetic mean of every sample (from every demo) falling in that
/// goal's interval.
pub fn generalize(demos: &[Demonstration], t_min: f64) -> Result<FeatureTrajectory> {
    let first = demos
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot generalize an empty demo list".into()))?;
    let m = first.m();
    for d in demos {
        if d.feature_names != first.feature_names {
            return Err(Error::FeatureMismatch(format!(
                "demo {} features {:?} differ from {:?}",
                d.id, d.feature_names, first.feature_names
            )));
        }
    }
    let d_time = demos.iter().map(|d| d.duration()).sum::<f64>() / demos.len() as f64;
    let n = compute_goal_count(d_time, t_min)?;
    let streams: Vec<(&[Sample], f64)> =
        demos.iter().map(|d| (d.samples(), d.duration())).collect();
    let values = interval_means(&streams, m, n)?;
    FeatureTrajectory::new(
        first.feature_names.clone(),
        first.feature_units.clone(),
        t_min,
        d_time,
        values,
    )
}

/// Resamples a timestamped stream into an observed trajectory with interval
/// `t`, using the same interval-mean rule as [`generalize`].
pub fn resample_observation(samples: &[Sample], t: f64) -> Result<ObservedTrajectory> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no observation samples".into()));
    }
    let m = samples[0].values.len();
    for s in samples {
        if s.values.len() != m {
            return Err(Error::DimensionMismatch {
                context: "observation sample width",
                expected: m,
                actual: s.values.len(),
            });
        }
    }
    let o_time = samples.last().unwrap().t;
    let n = compute_goal_count(o_time, t)?;
    let values = interval_means(&[(samples, o_time)], m, n)?;
    ObservedTrajectory::from_values(t, values)
}

fn unit_for_feature(name: &str) -> &'static str {
    match name {
        "painted" => "fraction",
        "x" | "y" | "z" => "meter",
        "f_z" => "newton",
        _ => "scalar",
    }
}

/// Loads every `*.csv` demonstration in a directory, sorted by file name.
///
/// Format: header `t,<name1>,...,<namem>`, one decimal-seconds row per
/// sample, UTF-8, LF line endings.
pub fn load_demonstrations(dir: &Path) -> Result<Vec<Demonstration>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "csv").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no demo CSV files in {}",
            dir.display()
        )));
    }
    let mut demos = Vec::new();
    for path in &files {
        demos.push(read_demo_csv(path)?);
    }
    let names = demos[0].feature_names.clone();
    for d in &demos[1..] {
        if d.feature_names != names {
            return Err(Error::FeatureMismatch(format!(
                "demo {} columns {:?} differ from {:?}",
                d.id, d.feature_names, names
            )));
        }
    }
    Ok(demos)
}

/// Parses a single demo CSV file.
pub fn read_demo_csv(path: &Path) -> Result<Demonstration> {
    let parse_err = |line: usize, message: String| Error::Parse {
        file: path.to_path_buf(),
        line,
        message,
    };
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(parse_err(1, "empty file".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("t") {
        return Err(parse_err(
            1,
            format!("header must be `t,<feature>...`, got {headers:?}"),
        ));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let units = names.iter().map(|n| unit_for_feature(n).to_owned()).collect();
    let m = names.len();
    let mut samples = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2; // header is line 1
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() != m + 1 {
            return Err(parse_err(
                line,
                format!("expected {} columns, got {}", m + 1, record.len()),
            ));
        }
        let mut fields = record.iter();
        let t: f64 = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|e| parse_err(line, format!("bad timestamp: {e}")))?;
        if let Some(prev) = samples.last().map(|s: &Sample| s.t) {
            if t <= prev {
                return Err(parse_err(
                    line,
                    format!("timestamp {t} not greater than previous {prev}"),
                ));
            }
        }
        let mut values = Vec::with_capacity(m);
        for f in fields {
            values.push(
                f.parse::<f64>()
                    .map_err(|e| parse_err(line, format!("bad value `{f}`: {e}")))?,
            );
        }
        samples.push(Sample::new(t, values));
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "demo".into());
    Demonstration::new(id, names, units, samples).map_err(|e| match e {
        Error::InvalidArgument(msg) => parse_err(1, msg),
        other => other,
    })
}

/// Writes a demonstration in the demo CSV format.
pub fn write_demo_csv(path: &Path, demo: &Demonstration) -> Result<()> {
    let mut out = String::from("t");
    for name in &demo.feature_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for s in demo.samples() {
        out.push_str(&format_float(s.t));
        for v in &s.values {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub(crate) fn format_float(v: f64) -> String {
    // Shortest round-trippable decimal form.
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    let mut s = serde_json::to_string(&v).unwrap_or_else(|_| v.to_string());
    if s == "null" {
        s = v.to_string();
    }
    s
}

#[derive(Serialize, Deserialize)]
struct ActionFile {
    schema: String,
    feature_names: Vec<String>,
    feature_units: Vec<String>,
    t_min: f64,
    d_time: f64,
    values: Vec<Vec<f64>>,
}

/// Writes an action to JSON (row-major m x n `values`).
pub fn write_action(path: &Path, action: &FeatureTrajectory) -> Result<()> {
    let file = ActionFile {
        schema: ACTION_SCHEMA.to_string(),
        feature_names: action.feature_names.clone(),
        feature_units: action.feature_units.clone(),
        t_min: action.t_min,
        d_time: action.d_time,
        values: action.values().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Reads an action from JSON, checking the schema version.
pub fn read_action(path: &Path) -> Result<FeatureTrajectory> {
    let file: ActionFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.schema != ACTION_SCHEMA {
        return Err(Error::SchemaVersion {
            found: file.schema,
            expected: ACTION_SCHEMA,
        });
    }
    FeatureTrajectory::new(
        file.feature_names,
        file.feature_units,
        file.t_min,
        file.d_time,
        file.values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn demo(id: &str, samples: Vec<(f64, f64)>) -> Demonstration {
        Demonstration::new(
            id,
            vec!["painted".into()],
            vec!["fraction".into()],
            samples
                .into_iter()
                .map(|(t, v)| Sample::new(t, vec![v]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn goal_count_paper_values() {
        assert_eq!(compute_goal_count(130.2, 10.0).unwrap(), 13);
        assert_eq!(compute_goal_count(28.1, 3.0).unwrap(), 9);
        assert_eq!(compute_goal_count(10.0, 10.0).unwrap(), 1);
    }

    #[test]
    fn goal_count_rejects_bad_inputs() {
        assert!(compute_goal_count(5.0, 10.0).is_err());
        assert!(compute_goal_count(10.0, 0.0).is_err());
        assert!(compute_goal_count(10.0, -1.0).is_err());
    }

    #[test]
    fn generalize_single_interval_mean() {
        let d = demo("a", vec![(0.0, 2.0), (1.0, 4.0)]);
        let x = generalize(&[d], 1.0).unwrap();
        assert_eq!(x.n(), 1);
        assert_eq!(x.feature_row(0), &[3.0]);
    }

    #[test]
    fn generalize_constant_demos() {
        let demos = vec![
            demo("a", (0..40).map(|k| (k as f64 * 0.5, 7.5)).collect()),
            demo("b", (0..50).map(|k| (k as f64 * 0.4, 7.5)).collect()),
        ];
        let x = generalize(&demos, 3.0).unwrap();
        assert!(x.feature_row(0).iter().all(|&v| (v - 7.5).abs() < 1e-12));
    }

    #[test]
    fn generalize_rejects_empty_list() {
        assert!(matches!(
            generalize(&[], 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn generalize_names_empty_interval() {
        // Two samples far apart with small t_min: middle intervals are empty.
        let d = demo("a", vec![(0.0, 1.0), (10.0, 2.0)]);
        match generalize(&[d], 1.0) {
            Err(Error::EmptyInterval { interval, total }) => {
                assert!(interval > 0 && interval < total);
            }
            other => panic!("expected EmptyInterval, got {other:?}"),
        }
    }

    #[test]
    fn generalize_rejects_mismatched_features() {
        let a = demo("a", vec![(0.0, 1.0), (1.0, 2.0)]);
        let b = Demonstration::new(
            "b",
            vec!["force".into()],
            vec!["newton".into()],
            vec![Sample::new(0.0, vec![1.0]), Sample::new(1.0, vec![2.0])],
        )
        .unwrap();
        assert!(matches!(
            generalize(&[a, b], 1.0),
            Err(Error::FeatureMismatch(_))
        ));
    }

    #[test]
    fn demonstration_invariants() {
        let names = vec!["painted".to_string()];
        let units = vec!["fraction".to_string()];
        // too few samples
        assert!(
            Demonstration::new("x", names.clone(), units.clone(), vec![Sample::new(0.0, vec![1.0])])
                .is_err()
        );
        // does not start at zero
        assert!(Demonstration::new(
            "x",
            names.clone(),
            units.clone(),
            vec![Sample::new(1.0, vec![1.0]), Sample::new(2.0, vec![1.0])]
        )
        .is_err());
        // non-monotone
        assert!(Demonstration::new(
            "x",
            names,
            units,
            vec![
                Sample::new(0.0, vec![1.0]),
                Sample::new(2.0, vec![1.0]),
                Sample::new(1.5, vec![1.0])
            ]
        )
        .is_err());
    }

    #[test]
    fn resample_column_counts() {
        let samples: Vec<Sample> = (0..=130)
            .map(|k| Sample::new(k as f64, vec![k as f64]))
            .collect();
        let o = resample_observation(&samples, 10.0).unwrap();
        assert_eq!(o.n_prime(), 13);
    }

    #[test]
    fn resample_singleton_intervals() {
        // One sample per interval: columns are exactly those samples.
        let samples = vec![
            Sample::new(0.0, vec![1.0]),
            Sample::new(1.0, vec![5.0]),
            Sample::new(2.0, vec![9.0]),
        ];
        let o = resample_observation(&samples, 1.0).unwrap();
        // duration 2.0 -> n' = 2; sample at t=2 folds into the last interval.
        assert_eq!(o.n_prime(), 2);
        assert_eq!(o.feature_row(0), &[1.0, 7.0]);
    }

    // Independent brute-force binning oracle used by the property tests.
    fn oracle_bin_means(samples: &[Sample], duration: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let mut sum = 0.0;
                let mut count = 0usize;
                for s in samples {
                    let mut idx = ((n as f64) * s.t / duration).floor() as isize;
                    if idx < 0 {
                        idx = 0;
                    }
                    if idx > n as isize - 1 {
                        idx = n as isize - 1;
                    }
                    if idx as usize == j {
                        sum += s.values[0];
                        count += 1;
                    }
                }
                sum / count as f64
            })
            .collect()
    }

    proptest! {
        #[test]
        fn resample_matches_binning_oracle(
            raw in proptest::collection::vec((0.01f64..0.15, -50.0f64..50.0), 20..120),
            t in 0.5f64..3.0,
        ) {
            // Build a strictly increasing stream from positive increments.
            let mut samples = vec![Sample::new(0.0, vec![raw[0].1])];
            let mut clock = 0.0;
            for (dt, v) in &raw {
                clock += dt;
                samples.push(Sample::new(clock, vec![*v]));
            }
            prop_assume!(clock >= t);
            let o = resample_observation(&samples, t).unwrap();
            let expect = oracle_bin_means(&samples, clock, o.n_prime());
            for (got, want) in o.feature_row(0).iter().zip(&expect) {
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }

        #[test]
        fn generalize_is_demo_order_invariant(
            seed_vals in proptest::collection::vec(0.0f64..10.0, 30..60),
            perm_seed in 0u64..1000,
        ) {
            let mk = |vals: &[f64], step: f64, id: &str| {
                demo(
                    id,
                    vals.iter()
                        .enumerate()
                        .map(|(k, v)| (k as f64 * step, *v))
                        .collect(),
                )
            };
            let demos = vec![
                mk(&seed_vals, 0.5, "a"),
                mk(&seed_vals, 0.43, "b"),
                mk(&seed_vals, 0.61, "c"),
            ];
            let mut shuffled = demos.clone();
            // cheap deterministic shuffle
            shuffled.rotate_left((perm_seed % 3) as usize);
            let t_min = 2.0;
            let x1 = generalize(&demos, t_min).unwrap();
            let x2 = generalize(&shuffled, t_min).unwrap();
            prop_assert_eq!(x1.n(), x2.n());
            for (a, b) in x1.feature_row(0).iter().zip(x2.feature_row(0)) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let d = demo("trip", vec![(0.0, 0.5), (0.5, 1.5), (1.0, 2.5)]);
        let path = dir.path().join("trip.csv");
        write_demo_csv(&path, &d).unwrap();
        let loaded = load_demonstrations(dir.path()).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].samples(), d.samples());
        assert_eq!(loaded[0].feature_names, d.feature_names);

        // Inconsistent column count across files
        std::fs::write(dir.path().join("bad.csv"), "t,painted,extra\n0,1,2\n1,2,3\n").unwrap();
        assert!(matches!(
            load_demonstrations(dir.path()),
            Err(Error::FeatureMismatch(_))
        ));
        std::fs::remove_file(dir.path().join("bad.csv")).unwrap();

        // Non-monotone timestamps
        std::fs::write(dir.path().join("mono.csv"), "t,painted\n0,1\n2,2\n1,3\n").unwrap();
        match load_demonstrations(dir.path()) {
            Err(Error::Parse { file, line, .. }) => {
                assert!(file.ends_with("mono.csv"));
                assert_eq!(line, 4);
            }
            other => panic!("expected Parse error, got {other:?}"),
        }
        std::fs::remove_file(dir.path().join("mono.csv")).unwrap();

        // Empty file
        std::fs::write(dir.path().join("empty.csv"), "").unwrap();
        assert!(matches!(
            load_demonstrations(dir.path()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn action_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let x = FeatureTrajectory::new(
            vec!["x".into(), "f_z".into()],
            vec!["meter".into(), "newton".into()],
            3.0,
            28.1,
            vec![(0..9).map(|k| k as f64 * 0.1).collect(), vec![30.0; 9]],
        )
        .unwrap();
        let path = dir.path().join("action.json");
        write_action(&path, &x).unwrap();
        let back = read_action(&path).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn action_json_schema_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"schema":"cgda.action/99","feature_names":["a"],"feature_units":["scalar"],"t_min":1.0,"d_time":1.0,"values":[[1.0]]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_action(&path),
            Err(Error::SchemaVersion { .. })
        ));
    }
}
