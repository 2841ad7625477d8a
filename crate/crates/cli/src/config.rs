//! Flat `key = value` configuration files.
//!
//! An empty file reproduces the baseline scenario exactly; every key
//! overrides one field of the system, geometry, fading or experiment
//! parameters. Unknown keys are errors. `#` starts a comment. dB and dBm
//! conversions happen here and only here.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use srmec::ao::{AoSettings, ObjectiveKind, PhaseSolver};
use srmec::channels::{FadingParams, Geometry};
use srmec::model::{PhaseMode, SystemConfig};
use srmec::schemes::SchemeId;
use srmec::sdr::SdrSettings;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid value for '{key}': {msg}")]
    Value { key: String, msg: String },
    #[error("unknown key '{key}' at line {line}")]
    UnknownKey { key: String, line: usize },
    #[error(transparent)]
    Validation(#[from] srmec::Error),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Which experiment family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Convergence traces at a single operating point.
    Fig3,
    /// Time-allocation sweep with sensing-cap frontier.
    Fig4,
    /// Sweep over the number of reflecting elements.
    Fig5,
    /// Sweep over the energy budget.
    Fig6,
    /// Energy-budget sweep reporting partition and RIS throughput trends.
    Fig7,
    /// Sweep axes taken verbatim from the config.
    Custom,
}

impl Figure {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            "fig7" => Ok(Figure::Fig7),
            "custom" => Ok(Figure::Custom),
            other => Err(ConfigError::Value {
                key: "figure".into(),
                msg: format!("expected fig3|fig4|fig5|fig6|fig7|custom, got '{other}'"),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Custom => "custom",
        }
    }
}

/// Batch description: sweep axis, Monte-Carlo counts, seeds and outputs.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub figure: Figure,
    pub n_list: Vec<usize>,
    pub e_max_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeId>,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    fn defaults() -> Self {
        ExperimentSpec {
            figure: Figure::Fig5,
            n_list: vec![20, 40, 60, 80, 100],
            e_max_list: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            alpha_list: vec![0.1, 0.2, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9],
            trials: 50,
            seed: 1,
            schemes: Vec::new(),
            out_dir: PathBuf::from("results"),
        }
    }

    /// Scheme list actually used: an explicit list wins, otherwise the
    /// figure's customary set.
    pub fn effective_schemes(&self) -> Vec<SchemeId> {
        if !self.schemes.is_empty() {
            return self.schemes.clone();
        }
        match self.figure {
            Figure::Fig3 => vec![SchemeId::Proposed, SchemeId::ProposedSdr],
            Figure::Fig4 => vec![SchemeId::Proposed],
            Figure::Fig5 => vec![
                SchemeId::Proposed,
                SchemeId::ProposedSdr,
                SchemeId::WithoutSr,
                SchemeId::RandomPhase,
                SchemeId::WithoutRis,
                SchemeId::LocalOnly,
            ],
            Figure::Fig6 => vec![
                SchemeId::Proposed,
                SchemeId::WithoutSr,
                SchemeId::RandomPhase,
                SchemeId::WithoutRis,
                SchemeId::LocalOnly,
                SchemeId::RandomBeta,
            ],
            Figure::Fig7 => vec![SchemeId::Proposed, SchemeId::WithoutSr],
            Figure::Custom => vec![SchemeId::Proposed],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(ConfigError::Value { key: "trials".into(), msg: "must be >= 1".into() });
        }
        let sweep_len = match self.figure {
            Figure::Fig3 => 1,
            Figure::Fig4 => self.alpha_list.len(),
            Figure::Fig5 => self.n_list.len(),
            Figure::Fig6 | Figure::Fig7 => self.e_max_list.len(),
            Figure::Custom => {
                let filled = [
                    !self.n_list.is_empty(),
                    !self.e_max_list.is_empty(),
                    !self.alpha_list.is_empty(),
                ];
                if filled.iter().filter(|&&x| x).count() != 1 {
                    return Err(ConfigError::Value {
                        key: "figure".into(),
                        msg: "custom figure needs exactly one nonempty sweep list".into(),
                    });
                }
                1
            }
        };
        if sweep_len == 0 {
            return Err(ConfigError::Value {
                key: "figure".into(),
                msg: "sweep list is empty".into(),
            });
        }
        Ok(())
    }
}

/// Everything a run needs, assembled from defaults plus overrides.
#[derive(Debug, Clone)]
pub struct FullConfig {
    pub system: SystemConfig,
    pub geometry: Geometry,
    pub fading: FadingParams,
    pub spec: ExperimentSpec,
    pub ao: AoSettings,
    pub sdr: SdrSettings,
}

impl FullConfig {
    pub fn defaults() -> Self {
        FullConfig {
            system: SystemConfig::baseline(),
            geometry: Geometry::baseline(),
            fading: FadingParams::baseline(),
            spec: ExperimentSpec::defaults(),
            ao: AoSettings { max_iters: 200, rel_tol: 1e-4, ..Default::default() },
            sdr: SdrSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.geometry.validate(self.system.k)?;
        self.fading.validate()?;
        self.ao.validate()?;
        self.spec.validate()?;
        Ok(())
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|e| ConfigError::Value { key: key.into(), msg: e.to_string() })
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|e| ConfigError::Value { key: key.into(), msg: e.to_string() })
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.trim()
        .parse::<u64>()
        .map_err(|e| ConfigError::Value { key: key.into(), msg: e.to_string() })
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_f64(key, x)).collect()
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|x| parse_usize(key, x)).collect()
}

fn parse_point(key: &str, v: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 2 {
        return Err(ConfigError::Value { key: key.into(), msg: format!("expected 'x,y', got '{v}'") });
    }
    Ok([parse_f64(key, parts[0])?, parse_f64(key, parts[1])?])
}

fn parse_points(key: &str, v: &str) -> Result<Vec<[f64; 2]>> {
    v.split(';').map(|p| parse_point(key, p)).collect()
}

/// Scalar broadcast to K entries, or an explicit comma list of length K.
fn parse_per_user(key: &str, v: &str, k: usize) -> Result<Vec<f64>> {
    let vals = parse_f64_list(key, v)?;
    if vals.len() == 1 {
        Ok(vec![vals[0]; k])
    } else if vals.len() == k {
        Ok(vals)
    } else {
        Err(ConfigError::Value {
            key: key.into(),
            msg: format!("expected 1 or {k} comma-separated values, got {}", vals.len()),
        })
    }
}

pub fn parse_phase_mode(v: &str) -> Result<PhaseMode> {
    let v = v.trim();
    if v == "continuous" {
        return Ok(PhaseMode::Continuous);
    }
    if let Some(bits) = v.strip_prefix('b') {
        let bits: u32 = bits.parse().map_err(|_| ConfigError::Value {
            key: "phase_mode".into(),
            msg: format!("expected 'continuous' or 'b<bits>', got '{v}'"),
        })?;
        if bits < 1 {
            return Err(ConfigError::Value {
                key: "phase_mode".into(),
                msg: "discrete mode needs bits >= 1".into(),
            });
        }
        return Ok(PhaseMode::Discrete { bits });
    }
    Err(ConfigError::Value {
        key: "phase_mode".into(),
        msg: format!("expected 'continuous' or 'b<bits>', got '{v}'"),
    })
}

pub fn parse_phase_solver(v: &str, sdr: &SdrSettings) -> Result<PhaseSolver> {
    match v.trim() {
        "element" => Ok(PhaseSolver::Element),
        "sdr" => Ok(PhaseSolver::Sdr(sdr.clone())),
        other => Err(ConfigError::Value {
            key: "phase_solver".into(),
            msg: format!("expected element|sdr, got '{other}'"),
        }),
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parses file contents over the defaults. Later keys override earlier ones;
/// shape-changing keys (`k`, `m`, `n`) rebuild the per-user vectors by
/// broadcast before per-user overrides apply.
pub fn parse_config_str(text: &str) -> Result<FullConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                msg: format!("expected 'key = value', got '{stripped}'"),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(ConfigError::Parse { line, msg: format!("empty value for '{key}'") });
        }
        pairs.push((line, key, value));
    }

    let mut cfg = FullConfig::defaults();
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (line, key, value) in pairs {
        map.insert(key, (line, value));
    }
    let explicit_lists: Vec<&str> = ["n_list", "e_max_list", "alpha_list"]
        .into_iter()
        .filter(|k| map.contains_key(*k))
        .collect();

    // Shape first, so later per-user values broadcast to the right length.
    if let Some((_, v)) = map.remove("k") {
        let k = parse_usize("k", &v)?;
        let sys = &mut cfg.system;
        sys.k = k;
        sys.v_p = vec![sys.v_p[0]; k];
        sys.v_s = vec![sys.v_s[0]; k];
        sys.p_sense = vec![sys.p_sense[0]; k];
        sys.e_max = vec![sys.e_max[0]; k];
    }

    for (key, (line, v)) in map {
        let key_str = key.as_str();
        match key_str {
            "m" => cfg.system.m = parse_usize(key_str, &v)?,
            "n" => cfg.system.n = parse_usize(key_str, &v)?,
            "q" => cfg.system.q = parse_f64(key_str, &v)?,
            "bandwidth" => cfg.system.bandwidth = parse_f64(key_str, &v)?,
            "noise_power" => cfg.system.noise_power = parse_f64(key_str, &v)?,
            "noise_power_dbm" => {
                cfg.system.noise_power = db_to_linear(parse_f64(key_str, &v)?) * 1e-3
            }
            "t" => cfg.system.t = parse_f64(key_str, &v)?,
            "alpha" => cfg.system.alpha = parse_f64(key_str, &v)?,
            "v_p" => cfg.system.v_p = parse_per_user(key_str, &v, cfg.system.k)?,
            "v_s" => cfg.system.v_s = parse_per_user(key_str, &v, cfg.system.k)?,
            "p_sense" => cfg.system.p_sense = parse_per_user(key_str, &v, cfg.system.k)?,
            "e_max" => cfg.system.e_max = parse_per_user(key_str, &v, cfg.system.k)?,
            "kappa_l" => cfg.system.kappa_l = parse_f64(key_str, &v)?,
            "cycles_per_bit" => cfg.system.cycles_per_bit = parse_f64(key_str, &v)?,
            "phase_mode" => cfg.system.phase_mode = parse_phase_mode(&v)?,
            "bs_pos" => cfg.geometry.bs = parse_point(key_str, &v)?,
            "ris_pos" => cfg.geometry.ris = parse_points(key_str, &v)?,
            "user_center" => cfg.geometry.user_center = parse_points(key_str, &v)?,
            "user_radius" => cfg.geometry.user_radius = parse_f64(key_str, &v)?,
            "beta0" => cfg.fading.beta0 = parse_f64(key_str, &v)?,
            "beta0_db" => cfg.fading.beta0 = db_to_linear(parse_f64(key_str, &v)?),
            "alpha_ub" => cfg.fading.alpha_ub = parse_f64(key_str, &v)?,
            "alpha_ur" => cfg.fading.alpha_ur = parse_f64(key_str, &v)?,
            "alpha_rb" => cfg.fading.alpha_rb = parse_f64(key_str, &v)?,
            "k1" => cfg.fading.k1 = parse_f64(key_str, &v)?,
            "k2" => cfg.fading.k2 = parse_f64(key_str, &v)?,
            "figure" => cfg.spec.figure = Figure::parse(&v)?,
            "n_list" => cfg.spec.n_list = parse_usize_list(key_str, &v)?,
            "e_max_list" => cfg.spec.e_max_list = parse_f64_list(key_str, &v)?,
            "alpha_list" => cfg.spec.alpha_list = parse_f64_list(key_str, &v)?,
            "trials" => cfg.spec.trials = parse_usize(key_str, &v)?,
            "seed" => cfg.spec.seed = parse_u64(key_str, &v)?,
            "schemes" => {
                cfg.spec.schemes = v
                    .split(',')
                    .map(|s| SchemeId::parse(s.trim()).map_err(ConfigError::from))
                    .collect::<Result<Vec<_>>>()?
            }
            "out_dir" => cfg.spec.out_dir = PathBuf::from(v),
            "max_iters" => cfg.ao.max_iters = parse_usize(key_str, &v)?,
            "rel_tol" => cfg.ao.rel_tol = parse_f64(key_str, &v)?,
            "phase_sweeps" => cfg.ao.phase_sweeps = parse_usize(key_str, &v)?,
            "monitor" => {
                cfg.ao.monitor = match v.trim() {
                    "surrogate" => ObjectiveKind::Surrogate,
                    "objective" => ObjectiveKind::TrueObjective,
                    other => {
                        return Err(ConfigError::Value {
                            key: key.clone(),
                            msg: format!("expected surrogate|objective, got '{other}'"),
                        })
                    }
                }
            }
            "phase_solver" => cfg.ao.phase_solver = parse_phase_solver(&v, &cfg.sdr)?,
            "sdr_trials" => cfg.sdr.trials = parse_usize(key_str, &v)?,
            "admm_rho" => cfg.sdr.admm.rho = parse_f64(key_str, &v)?,
            "admm_max_iters" => cfg.sdr.admm.max_iters = parse_usize(key_str, &v)?,
            "admm_tol" => cfg.sdr.admm.tol = parse_f64(key_str, &v)?,
            _ => return Err(ConfigError::UnknownKey { key, line }),
        }
    }

    // An SDR solver choice made before sdr_* overrides needs the final values.
    if let PhaseSolver::Sdr(_) = cfg.ao.phase_solver {
        cfg.ao.phase_solver = PhaseSolver::Sdr(cfg.sdr.clone());
    }
    // A custom figure sweeps whichever list the file actually set; the other
    // default lists must not count as sweep axes.
    if cfg.spec.figure == Figure::Custom {
        if !explicit_lists.contains(&"n_list") {
            cfg.spec.n_list.clear();
        }
        if !explicit_lists.contains(&"e_max_list") {
            cfg.spec.e_max_list.clear();
        }
        if !explicit_lists.contains(&"alpha_list") {
            cfg.spec.alpha_list.clear();
        }
    }

    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<FullConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
    parse_config_str(&text)
}
