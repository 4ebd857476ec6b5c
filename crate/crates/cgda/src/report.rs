//! Benchmark harness and report artifacts: per-run report JSON, aggregated
//! CSV tables, and SVG goal-achievement plots.
//!
//! Deterministic metrics (evaluations, discrepancy, success) land in
//! `bench.csv`, which reproduces byte-for-byte across reruns with the same
//! config. Wall-clock RIT statistics go to `bench_timing.csv` instead, since
//! real time never reproduces exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    format_float, generalize, load_demonstrations, read_action, write_action, FeatureTrajectory,
};
use crate::scenario::{generate_demonstrations, write_demonstrations, Scenario};
use crate::strategies::{
    execute_scenario, ExecutionReport, StrategyKind, REPORT_SCHEMA,
};

pub const BENCH_SCHEMA: &str = "cgda.bench/1";
pub const BENCH_TIMING_SCHEMA: &str = "cgda.bench-timing/1";

/// Writes an execution report as JSON.
pub fn write_report(path: &Path, report: &ExecutionReport) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

/// Reads a report back, checking the schema version.
pub fn read_report(path: &Path) -> Result<ExecutionReport> {
    let report: ExecutionReport = serde_json::from_str(&fs::read_to_string(path)?)?;
    if report.schema != REPORT_SCHEMA {
        return Err(Error::SchemaVersion {
            found: report.schema,
            expected: REPORT_SCHEMA,
        });
    }
    Ok(report)
}

/// Benchmark description: which scenario, which slicing interval, which
/// strategies, and the seed base from which run k derives seed base+k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Scenario path, relative to the config file's directory.
    pub scenario: PathBuf,
    pub t_min: f64,
    pub strategies: Vec<StrategyKind>,
    #[serde(default)]
    pub base_seed: u64,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<BenchConfig> {
        let cfg: BenchConfig = serde_yaml::from_str(&fs::read_to_string(path)?)?;
        if cfg.strategies.is_empty() {
            return Err(Error::Config("bench config lists no strategies".into()));
        }
        if !(cfg.t_min > 0.0) {
            return Err(Error::Config("bench t_min must be positive".into()));
        }
        Ok(cfg)
    }
}

/// Mean and standard deviation over repeats (population sigma; zero for a
/// single repeat).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatPair {
    pub mean: f64,
    pub std: f64,
}

impl StatPair {
    pub fn from_samples(samples: &[f64]) -> StatPair {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        StatPair {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub strategy: StrategyKind,
    pub repeats: usize,
    pub evaluations: StatPair,
    pub discrepancy: StatPair,
    pub rit: StatPair,
    /// Painted fraction for paint actions; absolute peak-force error in
    /// newtons for force actions; final goal distance otherwise.
    pub success: StatPair,
    pub success_metric: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    pub repeats: usize,
}

/// The action-specific success figure of one run.
pub fn success_metric(report: &ExecutionReport) -> (String, f64) {
    let names = &report.action.feature_names;
    if names.len() == 1 && names[0] == "painted" {
        return ("painted_fraction".into(), report.final_features[0]);
    }
    if let Some(fi) = names.iter().position(|n| n == "f_z") {
        let target = report
            .action
            .feature_row(fi)
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let peak = report
            .feature_trace
            .iter()
            .map(|s| s.values[fi])
            .fold(f64::NEG_INFINITY, f64::max);
        return ("peak_force_error_n".into(), (peak - target).abs());
    }
    ("final_goal_distance".into(), report.final_goal_discrepancy)
}

/// Full benchmark: synthesize demos, generalize through the CSV path, run
/// every configured strategy `repeats` times with derived seeds, and write
/// the per-run reports, the aggregate tables and the goal plot into
/// `out_dir`. Runs execute serially so RIT measurements stay uncontended.
pub fn run_bench(
    config: &BenchConfig,
    config_dir: &Path,
    repeats: usize,
    out_dir: &Path,
) -> Result<BenchTable> {
    if repeats < 1 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let scenario = Scenario::load(&config_dir.join(&config.scenario))?;
    fs::create_dir_all(out_dir)?;

    let demos = generate_demonstrations(&scenario)?;
    let demo_dir = out_dir.join("demos");
    write_demonstrations(&demo_dir, &demos)?;
    let loaded = load_demonstrations(&demo_dir)?;
    let action = generalize(&loaded, config.t_min)?;
    write_action(&out_dir.join("action.json"), &action)?;

    let mut rows = Vec::new();
    let mut first_reports = Vec::new();
    for &kind in &config.strategies {
        let mut evals = Vec::new();
        let mut discs = Vec::new();
        let mut rits = Vec::new();
        let mut successes = Vec::new();
        let mut metric_name = String::new();
        for k in 0..repeats {
            let seed = config.base_seed + k as u64;
            let report = execute_scenario(&action, &scenario, Some(kind), Some(seed))?;
            write_report(&out_dir.join(format!("report_{kind}_{seed}.json")), &report)?;
            evals.push(report.total_evaluations as f64);
            discs.push(report.final_discrepancy);
            rits.push(report.mean_rit());
            let (name, value) = success_metric(&report);
            metric_name = name;
            successes.push(value);
            if k == 0 {
                first_reports.push((kind, report));
            }
        }
        rows.push(BenchRow {
            strategy: kind,
            repeats,
            evaluations: StatPair::from_samples(&evals),
            discrepancy: StatPair::from_samples(&discs),
            rit: StatPair::from_samples(&rits),
            success: StatPair::from_samples(&successes),
            success_metric: metric_name,
        });
    }

    let table = BenchTable { rows, repeats };
    fs::write(out_dir.join("bench.csv"), bench_csv(&table))?;
    fs::write(out_dir.join("bench_timing.csv"), timing_csv(&table))?;
    let refs: Vec<(StrategyKind, &ExecutionReport)> =
        first_reports.iter().map(|(k, r)| (*k, r)).collect();
    fs::write(out_dir.join("goals.svg"), goal_plot_svg(&action, &refs))?;
    Ok(table)
}

/// Deterministic metrics only; reruns reproduce this file exactly.
pub fn bench_csv(table: &BenchTable) -> String {
    let mut out = format!("# {BENCH_SCHEMA}\n");
    out.push_str(
        "strategy,repeats,evaluations_mean,evaluations_std,discrepancy_mean,discrepancy_std,success_metric,success_mean,success_std\n",
    );
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.strategy,
            row.repeats,
            format_float(row.evaluations.mean),
            format_float(row.evaluations.std),
            format_float(row.discrepancy.mean),
            format_float(row.discrepancy.std),
            row.success_metric,
            format_float(row.success.mean),
            format_float(row.success.std),
        ));
    }
    out
}

/// Wall-clock RIT statistics, kept out of the deterministic table.
pub fn timing_csv(table: &BenchTable) -> String {
    let mut out = format!("# {BENCH_TIMING_SCHEMA}\n");
    out.push_str("strategy,repeats,rit_mean_s,rit_std_s\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.strategy,
            row.repeats,
            format_float(row.rit.mean),
            format_float(row.rit.std),
        ));
    }
    out
}

const PLOT_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct PanelScale {
    lo: f64,
    hi: f64,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmax: f64,
}

impl PanelScale {
    fn x(&self, v: f64) -> f64 {
        self.x0 + self.w * (v / self.xmax.max(1.0))
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.hi - self.lo).max(1e-9);
        self.y0 + self.h - self.h * ((v - self.lo) / span)
    }
}

fn svg_header(width: usize, height: usize) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

/// Per-feature plot of one run: executed feature values after each motor
/// event against the action's intermediate goals. Goal markers carry the
/// `goal-marker` class; the raw series are embedded as a data comment so
/// plots diff cleanly in regression tests.
pub fn report_plot_svg(report: &ExecutionReport) -> Result<String> {
    if report.feature_trace.is_empty() {
        return Err(Error::InvalidArgument(
            "report has an empty feature trace".into(),
        ));
    }
    let action = &report.action;
    let m = action.m();
    let n = action.n();

    // Feature values right after each proper motor event (the reference
    // event at index 0 is skipped).
    let executed: Vec<Vec<f64>> = report
        .motor_events_sim
        .iter()
        .skip(1)
        .map(|&t_event| {
            let mut last = &report.feature_trace[0];
            for s in &report.feature_trace {
                if s.t <= t_event + 1e-9 {
                    last = s;
                } else {
                    break;
                }
            }
            last.values.clone()
        })
        .collect();

    let panel_h = 140.0;
    let margin = 40.0;
    let width = 720usize;
    let height = (m as f64 * (panel_h + margin) + margin) as usize;
    let mut svg = svg_header(width, height);

    let mut data = String::from("<!--data\n");
    for i in 0..m {
        let name = &action.feature_names[i];
        let goals = action.feature_row(i);
        data.push_str(&format!(
            "goals,{name},{}\n",
            goals.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",")
        ));
        let series: Vec<String> = executed.iter().map(|v| format_float(v[i])).collect();
        data.push_str(&format!("executed,{name},{}\n", series.join(",")));
    }
    data.push_str("-->\n");
    svg.push_str(&data);

    for i in 0..m {
        let goals = action.feature_row(i);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &g in goals {
            lo = lo.min(g);
            hi = hi.max(g);
        }
        for e in &executed {
            lo = lo.min(e[i]);
            hi = hi.max(e[i]);
        }
        let scale = PanelScale {
            lo,
            hi,
            x0: 60.0,
            y0: margin + i as f64 * (panel_h + margin),
            w: width as f64 - 100.0,
            h: panel_h,
            xmax: (n.max(executed.len()).saturating_sub(1)) as f64,
        };
        svg.push_str(&format!(
            "<text x=\"10\" y=\"{}\" font-size=\"12\">{} ({})</text>\n",
            scale.y0 - 8.0,
            action.feature_names[i],
            action.feature_units[i],
        ));
        // Reference goal markers.
        for (j, &g) in goals.iter().enumerate() {
            svg.push_str(&format!(
                "<circle class=\"goal-marker\" cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"none\" stroke=\"#444\"/>\n",
                scale.x(j as f64),
                scale.y(g),
            ));
        }
        // Executed series.
        if !executed.is_empty() {
            let pts: Vec<String> = executed
                .iter()
                .enumerate()
                .map(|(k, v)| format!("{:.1},{:.1}", scale.x(k as f64), scale.y(v[i])))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                PLOT_COLORS[0],
                pts.join(" ")
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Goal-achievement comparison across strategies: feature 0's goals as
/// markers plus one executed polyline per strategy.
pub fn goal_plot_svg(action: &FeatureTrajectory, runs: &[(StrategyKind, &ExecutionReport)]) -> String {
    let n = action.n();
    let goals = action.feature_row(0);
    let width = 720usize;
    let height = 300usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &g in goals {
        lo = lo.min(g);
        hi = hi.max(g);
    }
    let mut series: Vec<(StrategyKind, Vec<f64>)> = Vec::new();
    for (kind, report) in runs {
        let vals: Vec<f64> = report
            .motor_events_sim
            .iter()
            .skip(1)
            .map(|&t_event| {
                let mut last = &report.feature_trace[0];
                for s in &report.feature_trace {
                    if s.t <= t_event + 1e-9 {
                        last = s;
                    } else {
                        break;
                    }
                }
                last.values[0]
            })
            .collect();
        for &v in &vals {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        series.push((*kind, vals));
    }
    let xmax = series
        .iter()
        .map(|(_, s)| s.len())
        .chain([n])
        .max()
        .unwrap_or(1)
        .saturating_sub(1);
    let scale = PanelScale {
        lo,
        hi,
        x0: 60.0,
        y0: 40.0,
        w: width as f64 - 100.0,
        h: height as f64 - 80.0,
        xmax: xmax as f64,
    };

    let mut svg = svg_header(width, height);
    let mut data = String::from("<!--data\n");
    data.push_str(&format!(
        "goals,{},{}\n",
        action.feature_names[0],
        goals.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",")
    ));
    for (kind, vals) in &series {
        data.push_str(&format!(
            "executed,{kind},{}\n",
            vals.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",")
        ));
    }
    data.push_str("-->\n");
    svg.push_str(&data);

    for (j, &g) in goals.iter().enumerate() {
        svg.push_str(&format!(
            "<circle class=\"goal-marker\" cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"none\" stroke=\"#444\"/>\n",
            scale.x(j as f64),
            scale.y(g),
        ));
    }
    for (idx, (kind, vals)) in series.iter().enumerate() {
        if vals.is_empty() {
            continue;
        }
        let pts: Vec<String> = vals
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{:.1},{:.1}", scale.x(k as f64), scale.y(*v)))
            .collect();
        let color = PLOT_COLORS[idx % PLOT_COLORS.len()];
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{kind}</text>\n",
            width - 60,
            40 + idx * 16,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"60\" y=\"{}\" font-size=\"12\">{} per goal index</text>\n",
        height - 12,
        action.feature_names[0],
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Recognition entry point used by the CLI: discrepancy of an observed
/// sample stream against an action, at interval `t` (the action's own
/// slicing interval by default).
pub fn recognize_stream(
    action_path: &Path,
    observed_path: &Path,
    t: Option<f64>,
) -> Result<(f64, usize)> {
    let action = read_action(action_path)?;
    let demo = crate::model::read_demo_csv(observed_path)?;
    if demo.feature_names != action.feature_names {
        return Err(Error::FeatureMismatch(format!(
            "observed features {:?} do not match action features {:?}",
            demo.feature_names, action.feature_names
        )));
    }
    let t = t.unwrap_or(action.t_min);
    let observed = crate::model::resample_observation(demo.samples(), t)?;
    let weights = crate::recognition::FeatureWeights::from_action(&action)?;
    let d = crate::recognition::discrepancy(&observed, &action, &weights)?;
    Ok((d, observed.n_prime()))
}
