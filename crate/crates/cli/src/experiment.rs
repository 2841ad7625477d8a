//! Batch driver: seeded Monte-Carlo sweeps, CSV artifacts and aggregation.
//!
//! Determinism contract: the results, trace, frontier and summary files are
//! byte-identical for identical (config, root seed). Wall-clock measurements
//! go to a separate `timings.csv` that is excluded from that contract.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use srmec::ao::{evaluate_alpha_sweep, AoSettings, PhaseSolver, Trace};
use srmec::model::{PhaseMode, SystemConfig};
use srmec::schemes::{run_scheme, SchemeId};
use srmec::seed;

use crate::config::{Figure, FullConfig};

/// First line of every deterministic CSV artifact.
pub const SCHEMA_VERSION: &str = "# srmec csv schema v1";

const RESULT_HEADER: &str = "figure,sweep_param,sweep_value,trial,seed,scheme,phase_mode,status,\
objective,sum_done_p,sum_done_s,sum_local_bits,sum_sensed_p,sum_sensed_s,mean_beta,iterations,\
converged,c4_user_all,c4_ris_all,error";

#[derive(Debug, Clone)]
struct ResultRow {
    sweep_idx: usize,
    trial: usize,
    scheme_rank: usize,
    figure: &'static str,
    sweep_param: &'static str,
    sweep_value: String,
    seed: u64,
    scheme: &'static str,
    phase_mode: String,
    outcome: RowOutcome,
}

#[derive(Debug, Clone)]
enum RowOutcome {
    Ok {
        objective: f64,
        sum_done_p: f64,
        sum_done_s: f64,
        sum_local: f64,
        sum_sensed_p: f64,
        sum_sensed_s: f64,
        mean_beta: f64,
        iterations: usize,
        converged: bool,
        c4_user_all: bool,
        c4_ris_all: bool,
    },
    Error(String),
}

impl ResultRow {
    fn to_csv(&self) -> String {
        let mut line = format!(
            "{},{},{},{},{},{},{},",
            self.figure,
            self.sweep_param,
            self.sweep_value,
            self.trial,
            self.seed,
            self.scheme,
            self.phase_mode
        );
        match &self.outcome {
            RowOutcome::Ok {
                objective,
                sum_done_p,
                sum_done_s,
                sum_local,
                sum_sensed_p,
                sum_sensed_s,
                mean_beta,
                iterations,
                converged,
                c4_user_all,
                c4_ris_all,
            } => {
                let _ = write!(
                    line,
                    "ok,{objective},{sum_done_p},{sum_done_s},{sum_local},{sum_sensed_p},{sum_sensed_s},{mean_beta},{iterations},{converged},{c4_user_all},{c4_ris_all},"
                );
            }
            RowOutcome::Error(msg) => {
                let clean = msg.replace([',', '\n'], ";");
                let _ = write!(line, "error,,,,,,,,,,,{clean}");
            }
        }
        line
    }
}

fn phase_mode_name(mode: PhaseMode) -> String {
    match mode {
        PhaseMode::Continuous => "continuous".into(),
        PhaseMode::Discrete { bits } => format!("b{bits}"),
    }
}

fn scheme_rank(s: SchemeId) -> usize {
    SchemeId::ALL.iter().position(|x| *x == s).unwrap()
}

fn fmt_float(v: f64) -> String {
    format!("{v}")
}

struct JobOutput {
    rows: Vec<ResultRow>,
    timings: Vec<String>,
    traces: Vec<(String, String)>,
    frontier: Option<String>,
}

/// Runs the configured experiment and writes all artifacts into
/// `spec.out_dir`, then aggregates them into `summary.csv`.
pub fn run_experiment(full: &FullConfig) -> Result<()> {
    full.validate()?;
    let spec = &full.spec;
    let out_dir = &spec.out_dir;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let figure = spec.figure;
    let schemes = spec.effective_schemes();

    let outputs: Vec<JobOutput> = if figure == Figure::Fig4 {
        run_alpha_jobs(full)?
    } else {
        let sweep = sweep_values(full);
        let jobs: Vec<(usize, usize)> = (0..sweep.len())
            .flat_map(|si| (0..spec.trials).map(move |t| (si, t)))
            .collect();
        jobs.par_iter()
            .map(|&(sweep_idx, trial)| run_point_job(full, &schemes, &sweep, sweep_idx, trial))
            .collect::<Result<Vec<_>>>()?
    };

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut timings: Vec<String> = Vec::new();
    let mut traces: Vec<(String, String)> = Vec::new();
    let mut frontier: Vec<String> = Vec::new();
    for out in outputs {
        rows.extend(out.rows);
        timings.extend(out.timings);
        traces.extend(out.traces);
        frontier.extend(out.frontier);
    }
    rows.sort_by(|a, b| {
        (a.sweep_idx, a.trial, a.scheme_rank).cmp(&(b.sweep_idx, b.trial, b.scheme_rank))
    });
    timings.sort();
    traces.sort_by(|a, b| a.0.cmp(&b.0));
    frontier.sort();

    let mut results_text = format!("{SCHEMA_VERSION}\n{RESULT_HEADER}\n");
    for row in &rows {
        results_text.push_str(&row.to_csv());
        results_text.push('\n');
    }
    fs::write(out_dir.join("results.csv"), results_text)?;

    let mut timing_text =
        String::from("# wall-clock timings; excluded from reproducibility checks\n");
    timing_text.push_str("figure,sweep_param,sweep_value,trial,scheme,wall_ms\n");
    for t in &timings {
        timing_text.push_str(t);
        timing_text.push('\n');
    }
    fs::write(out_dir.join("timings.csv"), timing_text)?;

    for (name, text) in &traces {
        fs::write(out_dir.join(name), text)?;
    }

    if figure == Figure::Fig4 {
        let mut text = format!("{SCHEMA_VERSION}\ntrial,seed,frontier_user,frontier_ris,frontier_total\n");
        for f in &frontier {
            text.push_str(f);
            text.push('\n');
        }
        fs::write(out_dir.join("frontier.csv"), text)?;
    }

    summarize(out_dir)?;
    Ok(())
}

fn sweep_values(full: &FullConfig) -> Vec<(String, f64)> {
    let spec = &full.spec;
    match spec.figure {
        Figure::Fig3 => vec![("baseline".to_string(), full.system.n as f64)],
        Figure::Fig5 => spec.n_list.iter().map(|&n| (n.to_string(), n as f64)).collect(),
        Figure::Fig6 | Figure::Fig7 => {
            spec.e_max_list.iter().map(|&e| (fmt_float(e), e)).collect()
        }
        Figure::Fig4 => spec.alpha_list.iter().map(|&a| (fmt_float(a), a)).collect(),
        Figure::Custom => {
            if !spec.n_list.is_empty() {
                spec.n_list.iter().map(|&n| (n.to_string(), n as f64)).collect()
            } else if !spec.e_max_list.is_empty() {
                spec.e_max_list.iter().map(|&e| (fmt_float(e), e)).collect()
            } else {
                spec.alpha_list.iter().map(|&a| (fmt_float(a), a)).collect()
            }
        }
    }
}

fn sweep_param(full: &FullConfig) -> &'static str {
    match full.spec.figure {
        Figure::Fig3 => "point",
        Figure::Fig4 => "alpha",
        Figure::Fig5 => "n",
        Figure::Fig6 | Figure::Fig7 => "e_max",
        Figure::Custom => {
            if !full.spec.n_list.is_empty() {
                "n"
            } else if !full.spec.e_max_list.is_empty() {
                "e_max"
            } else {
                "alpha"
            }
        }
    }
}

/// Applies one sweep value to a copy of the system config.
fn apply_sweep(system: &SystemConfig, param: &str, value: f64) -> SystemConfig {
    let mut cfg = system.clone();
    match param {
        "n" => cfg.n = value as usize,
        "e_max" => cfg.e_max = vec![value; cfg.k],
        "alpha" => cfg.alpha = value,
        _ => {}
    }
    cfg
}

fn ao_settings_for(full: &FullConfig, scheme: SchemeId, run_seed: u64) -> AoSettings {
    let mut s = full.ao.clone();
    s.seed = run_seed;
    if scheme == SchemeId::ProposedSdr && matches!(s.phase_solver, PhaseSolver::Element) {
        s.phase_solver = PhaseSolver::Sdr(full.sdr.clone());
    }
    s
}

fn run_point_job(
    full: &FullConfig,
    schemes: &[SchemeId],
    sweep: &[(String, f64)],
    sweep_idx: usize,
    trial: usize,
) -> Result<JobOutput> {
    let spec = &full.spec;
    let figure = spec.figure.name();
    let param = sweep_param(full);
    let (sweep_label, sweep_value) = &sweep[sweep_idx];
    let cfg = apply_sweep(&full.system, param, *sweep_value);
    let trial_seed = seed::trial_seed(spec.seed, sweep_idx as u64, trial as u64);

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut traces = Vec::new();
    let channels = srmec::channels::sample_channels(&full.geometry, &full.fading, &cfg, trial_seed);

    for &scheme in schemes {
        let rank = scheme_rank(scheme);
        let run_seed = seed::stream_seed(trial_seed, rank as u64);
        let base = ResultRow {
            sweep_idx,
            trial,
            scheme_rank: rank,
            figure,
            sweep_param: param,
            sweep_value: sweep_label.clone(),
            seed: trial_seed,
            scheme: scheme.name(),
            phase_mode: phase_mode_name(cfg.phase_mode),
            outcome: RowOutcome::Error(String::new()),
        };
        match &channels {
            Err(e) => {
                rows.push(ResultRow { outcome: RowOutcome::Error(e.to_string()), ..base });
            }
            Ok(ch) => {
                let settings = ao_settings_for(full, scheme, run_seed);
                let started = std::time::Instant::now();
                match run_scheme(scheme, &cfg, ch, &settings) {
                    Ok(out) => {
                        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
                        timings.push(format!(
                            "{figure},{param},{sweep_label},{trial},{},{wall_ms}",
                            scheme.name()
                        ));
                        if spec.figure == Figure::Fig3 {
                            traces.push((
                                format!("trace_{}_t{}.csv", scheme.name(), trial),
                                trace_csv(&out.trace, cfg.k),
                            ));
                        }
                        let m = &out.metrics;
                        rows.push(ResultRow {
                            outcome: RowOutcome::Ok {
                                objective: m.objective,
                                sum_done_p: m.done_p.iter().sum(),
                                sum_done_s: m.done_s.iter().sum(),
                                sum_local: m.local_bits(&cfg).iter().sum(),
                                sum_sensed_p: m.sensed_p.iter().sum(),
                                sum_sensed_s: m.sensed_s.iter().sum(),
                                mean_beta: out.state.beta.iter().sum::<f64>() / cfg.k as f64,
                                iterations: out.iterations,
                                converged: out.converged,
                                c4_user_all: m.c4_user_ok.iter().all(|&b| b),
                                c4_ris_all: m.c4_ris_ok.iter().all(|&b| b),
                            },
                            ..base
                        });
                    }
                    Err(e) => {
                        rows.push(ResultRow { outcome: RowOutcome::Error(e.to_string()), ..base });
                    }
                }
            }
        }
    }
    Ok(JobOutput { rows, timings, traces, frontier: None })
}

fn run_alpha_jobs(full: &FullConfig) -> Result<Vec<JobOutput>> {
    let spec = &full.spec;
    let trials: Vec<usize> = (0..spec.trials).collect();
    trials
        .par_iter()
        .map(|&trial| {
            let figure = spec.figure.name();
            let trial_seed = seed::trial_seed(spec.seed, 0, trial as u64);
            let run_seed = seed::stream_seed(trial_seed, scheme_rank(SchemeId::Proposed) as u64);
            let cfg = full.system.clone();
            let channels =
                srmec::channels::sample_channels(&full.geometry, &full.fading, &cfg, trial_seed)?;
            let mut settings = full.ao.clone();
            settings.seed = run_seed;
            let started = std::time::Instant::now();
            let sweep = evaluate_alpha_sweep(&cfg, &channels, &spec.alpha_list, &settings)?;
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut rows = Vec::new();
            for (idx, pt) in sweep.points.iter().enumerate() {
                rows.push(ResultRow {
                    sweep_idx: idx,
                    trial,
                    scheme_rank: 0,
                    figure,
                    sweep_param: "alpha",
                    sweep_value: fmt_float(pt.alpha),
                    seed: trial_seed,
                    scheme: SchemeId::Proposed.name(),
                    phase_mode: phase_mode_name(cfg.phase_mode),
                    outcome: RowOutcome::Ok {
                        objective: pt.done_p + pt.done_s,
                        sum_done_p: pt.done_p,
                        sum_done_s: pt.done_s,
                        sum_local: f64::NAN,
                        sum_sensed_p: pt.sensed_p,
                        sum_sensed_s: pt.sensed_s,
                        mean_beta: pt.mean_beta,
                        iterations: pt.iterations,
                        converged: pt.converged,
                        c4_user_all: pt.done_p <= pt.sensed_p,
                        c4_ris_all: pt.done_s <= pt.sensed_s,
                    },
                });
            }
            let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
            let frontier = Some(format!(
                "{trial},{trial_seed},{},{},{}",
                opt(sweep.frontier_user),
                opt(sweep.frontier_ris),
                opt(sweep.frontier_total)
            ));
            let timing = format!("{figure},alpha,all,{trial},proposed,{wall_ms}");
            Ok(JobOutput { rows, timings: vec![timing], traces: Vec::new(), frontier })
        })
        .collect()
}

fn trace_csv(trace: &Trace, k: usize) -> String {
    let mut text = format!("{SCHEMA_VERSION}\niter,f1,objective");
    for i in 0..k {
        let _ = write!(text, ",done_p_{i}");
    }
    for i in 0..k {
        let _ = write!(text, ",done_s_{i}");
    }
    for i in 0..k {
        let _ = write!(text, ",local_{i}");
    }
    text.push('\n');
    for row in &trace.rows {
        let _ = write!(text, "{},{},{}", row.iter, row.f1, row.objective);
        for v in row.done_p.iter().chain(row.done_s.iter()).chain(row.local.iter()) {
            let _ = write!(text, ",{v}");
        }
        text.push('\n');
    }
    text
}

/// Aggregated metric columns of `results.csv`, in schema order.
const METRICS: [(&str, usize); 8] = [
    ("objective", 8),
    ("sum_done_p", 9),
    ("sum_done_s", 10),
    ("sum_local_bits", 11),
    ("sum_sensed_p", 12),
    ("sum_sensed_s", 13),
    ("mean_beta", 14),
    ("iterations", 15),
];

/// Reads `results.csv` in a directory and writes `summary.csv` with the mean
/// and sample standard deviation per (sweep value, scheme, metric).
pub fn summarize(dir: &Path) -> Result<()> {
    let path = dir.join("results.csv");
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut groups: Vec<(String, String, String, String)> = Vec::new();
    let mut values: std::collections::BTreeMap<usize, Vec<Vec<f64>>> =
        std::collections::BTreeMap::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("figure,") || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 19 || fields[7] != "ok" {
            continue;
        }
        let key = (
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
            fields[5].to_string(),
        );
        let gi = match groups.iter().position(|g| *g == key) {
            Some(i) => i,
            None => {
                groups.push(key);
                values.insert(groups.len() - 1, vec![Vec::new(); METRICS.len()]);
                groups.len() - 1
            }
        };
        let slot = values.get_mut(&gi).unwrap();
        for (mi, (_, col)) in METRICS.iter().enumerate() {
            if let Ok(v) = fields[*col].parse::<f64>() {
                if v.is_finite() {
                    slot[mi].push(v);
                }
            }
        }
    }
    if groups.is_empty() {
        bail!("no data rows found in {}", path.display());
    }

    let mut out = format!("{SCHEMA_VERSION}\nfigure,sweep_param,sweep_value,scheme,metric,mean,std,count\n");
    for (gi, key) in groups.iter().enumerate() {
        let slot = &values[&gi];
        for (mi, (name, _)) in METRICS.iter().enumerate() {
            let vals = &slot[mi];
            if vals.is_empty() {
                continue;
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{name},{mean},{std},{}",
                key.0,
                key.1,
                key.2,
                key.3,
                vals.len()
            );
        }
    }
    fs::write(dir.join("summary.csv"), out)?;
    Ok(())
}

/// Parsed view of one summary row, for tests and trend checks.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub figure: String,
    pub sweep_param: String,
    pub sweep_value: String,
    pub scheme: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

pub fn read_summary(dir: &Path) -> Result<Vec<SummaryRow>> {
    let text = fs::read_to_string(dir.join("summary.csv"))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("figure,") || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            continue;
        }
        rows.push(SummaryRow {
            figure: f[0].into(),
            sweep_param: f[1].into(),
            sweep_value: f[2].into(),
            scheme: f[3].into(),
            metric: f[4].into(),
            mean: f[5].parse()?,
            std: f[6].parse()?,
            count: f[7].parse()?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summarize_means_and_std() {
        let dir = std::env::temp_dir().join(format!("srmec-summarize-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let mut text = format!("{SCHEMA_VERSION}\n{RESULT_HEADER}\n");
        for (trial, obj) in [(0, 1.0), (1, 2.0), (2, 3.0)] {
            text.push_str(&format!(
                "fig5,n,16,{trial},7,proposed,continuous,ok,{obj},{obj},0,0,0,0,0.5,3,true,true,true,\n"
            ));
        }
        fs::write(dir.join("results.csv"), text).unwrap();
        summarize(&dir).unwrap();
        let rows = read_summary(&dir).unwrap();
        let obj = rows.iter().find(|r| r.metric == "objective").unwrap();
        assert_eq!(obj.mean, 2.0);
        assert!((obj.std - 1.0).abs() < 1e-12);
        assert_eq!(obj.count, 3);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn summarize_single_row_and_equal_rows() {
        let dir = std::env::temp_dir().join(format!("srmec-summarize1-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let mut text = format!("{SCHEMA_VERSION}\n{RESULT_HEADER}\n");
        text.push_str("fig5,n,16,0,7,proposed,continuous,ok,5,5,0,0,0,0,0.5,3,true,true,true,\n");
        text.push_str("fig5,n,32,0,7,proposed,continuous,ok,4,4,0,0,0,0,0.5,3,true,true,true,\n");
        text.push_str("fig5,n,32,1,7,proposed,continuous,ok,4,4,0,0,0,0,0.5,3,true,true,true,\n");
        fs::write(dir.join("results.csv"), text).unwrap();
        summarize(&dir).unwrap();
        let rows = read_summary(&dir).unwrap();
        let single = rows
            .iter()
            .find(|r| r.sweep_value == "16" && r.metric == "objective")
            .unwrap();
        assert_eq!(single.mean, 5.0);
        assert_eq!(single.std, 0.0);
        let equal = rows
            .iter()
            .find(|r| r.sweep_value == "32" && r.metric == "objective")
            .unwrap();
        assert_eq!(equal.std, 0.0);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn summarize_empty_is_an_error() {
        let dir = std::env::temp_dir().join(format!("srmec-summarize2-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("results.csv"), format!("{SCHEMA_VERSION}\n{RESULT_HEADER}\n")).unwrap();
        assert!(summarize(&dir).is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
