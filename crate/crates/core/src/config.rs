//! Experiment configuration: flat `key=value` files plus flag overrides.
//!
//! Defaults follow the reference protocol: T = 20, alpha = 0.2, k = 3,
//! five replicate seeds. Every entry is validated where it is applied,
//! with errors naming the offending key and its file line or flag.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::behavior::BehaviorKind;
use crate::engine::SimConfig;
use crate::graph::LabeledDigraph;
use crate::io::{self, IoError};
use crate::netgen::{self, NetConfig, NetgenError, Preset};
use crate::recommend::RecommenderKind;

pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const DEFAULT_N: usize = 2000;
pub const DEFAULT_AVG_OUT_DEGREE: f64 = 5.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{location}: {msg}")]
    Entry { location: String, msg: String },
    #[error("{0}")]
    Incomplete(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn entry_err(location: &Location, msg: impl Into<String>) -> ConfigError {
    ConfigError::Entry {
        location: location.to_string(),
        msg: msg.into(),
    }
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone)]
pub enum Location {
    File { path: PathBuf, line: usize },
    Flag(&'static str),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::File { path, line } => write!(f, "{}:{}", path.display(), line),
            Location::Flag(name) => write!(f, "{name}"),
        }
    }
}

/// Everything a command needs: simulation parameters, network source,
/// replicate seeds, and emit options.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub sim: SimConfig,
    /// Replicate seeds; `None` means the command's default applies.
    pub seeds: Option<Vec<u64>>,
    pub out_dir: Option<PathBuf>,
    pub emit_recs: bool,
    pub snapshot_at: Vec<usize>,
    pub preset: Option<Preset>,
    pub n: usize,
    pub avg_out_degree: f64,
    pub s_m: Option<f64>,
    pub h_m: Option<f64>,
    pub h_maj: Option<f64>,
    pub tolerance: f64,
    pub edges: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            sim: SimConfig::default(),
            seeds: None,
            out_dir: None,
            emit_recs: false,
            snapshot_at: Vec::new(),
            preset: None,
            n: DEFAULT_N,
            avg_out_degree: DEFAULT_AVG_OUT_DEGREE,
            s_m: None,
            h_m: None,
            h_maj: None,
            tolerance: netgen::DEFAULT_TOLERANCE,
            edges: None,
            labels: None,
        }
    }
}

fn parse_number<T: std::str::FromStr>(
    key: &str,
    value: &str,
    location: &Location,
) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| entry_err(location, format!("{key}: bad value '{value}': {e}")))
}

fn parse_list<T: std::str::FromStr>(
    key: &str,
    value: &str,
    location: &Location,
) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Result<Vec<T>, _> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<T>)
        .collect();
    let items =
        items.map_err(|e| entry_err(location, format!("{key}: bad value '{value}': {e}")))?;
    if items.is_empty() {
        return Err(entry_err(location, format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str, location: &Location) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(entry_err(
            location,
            format!("{key}: expected a boolean, got '{other}'"),
        )),
    }
}

impl ExperimentSpec {
    /// Seeds for multi-seed replication (five by default, since desk-scale
    /// graphs are noisier than production-scale ones).
    pub fn replicate_seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| DEFAULT_SEEDS.to_vec())
    }

    /// Seeds for one-off generation; a single default seed unless set.
    pub fn generate_seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![1])
    }

    /// Applies one setting, validating range and key name.
    pub fn apply(
        &mut self,
        key: &str,
        value: &str,
        location: &Location,
    ) -> Result<(), ConfigError> {
        match key {
            "T" => {
                let t: usize = parse_number(key, value, location)?;
                if t < 1 {
                    return Err(entry_err(location, "T: must be >= 1"));
                }
                self.sim.iterations = t;
            }
            "alpha" => {
                let a: f64 = parse_number(key, value, location)?;
                if !(a > 0.0 && a <= 1.0) {
                    return Err(entry_err(location, format!("alpha: {a} outside (0, 1]")));
                }
                self.sim.alpha = a;
            }
            "k" => {
                let k: usize = parse_number(key, value, location)?;
                if k < 1 {
                    return Err(entry_err(location, "k: must be >= 1"));
                }
                self.sim.k = k;
            }
            "recommender" => {
                self.sim.recommender = value
                    .parse::<RecommenderKind>()
                    .map_err(|e| entry_err(location, format!("recommender: {e}")))?;
            }
            "behavior" => {
                self.sim.behavior = value
                    .parse::<BehaviorKind>()
                    .map_err(|e| entry_err(location, format!("behavior: {e}")))?;
            }
            "seed" => {
                self.seeds = Some(vec![parse_number(key, value, location)?]);
            }
            "seeds" => {
                self.seeds = Some(parse_list(key, value, location)?);
            }
            "als.d" => {
                let d: usize = parse_number(key, value, location)?;
                if d < 1 {
                    return Err(entry_err(location, "als.d: must be >= 1"));
                }
                self.sim.als.d = d;
            }
            "als.lambda" => {
                let l: f64 = parse_number(key, value, location)?;
                if l <= 0.0 {
                    return Err(entry_err(location, "als.lambda: must be > 0"));
                }
                self.sim.als.lambda = l;
            }
            "als.conf_alpha" => {
                let c: f64 = parse_number(key, value, location)?;
                if c < 0.0 {
                    return Err(entry_err(location, "als.conf_alpha: must be >= 0"));
                }
                self.sim.als.conf_alpha = c;
            }
            "als.sweeps" => {
                let s: usize = parse_number(key, value, location)?;
                if s < 1 {
                    return Err(entry_err(location, "als.sweeps: must be >= 1"));
                }
                self.sim.als.sweeps = s;
            }
            "sls.max_iters" => {
                let m: usize = parse_number(key, value, location)?;
                if m < 1 {
                    return Err(entry_err(location, "sls.max_iters: must be >= 1"));
                }
                self.sim.sls.max_iters = m;
            }
            "sls.tol" => {
                let t: f64 = parse_number(key, value, location)?;
                if t <= 0.0 {
                    return Err(entry_err(location, "sls.tol: must be > 0"));
                }
                self.sim.sls.tol = t;
            }
            "percentiles" => {
                let pcts: Vec<f64> = parse_list(key, value, location)?;
                if pcts.iter().any(|&p| !(p > 0.0 && p <= 100.0)) {
                    return Err(entry_err(
                        location,
                        "percentiles: values must be in (0, 100]",
                    ));
                }
                let mut fracs: Vec<f64> = pcts.iter().map(|p| p / 100.0).collect();
                fracs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                self.sim.percentiles = fracs;
            }
            "preset" => {
                self.preset = Some(
                    value
                        .parse::<Preset>()
                        .map_err(|e| entry_err(location, format!("preset: {e}")))?,
                );
            }
            "n" => {
                let n: usize = parse_number(key, value, location)?;
                if n < 10 {
                    return Err(entry_err(location, "n: must be >= 10"));
                }
                self.n = n;
            }
            "avg_out_degree" => {
                let d: f64 = parse_number(key, value, location)?;
                if d < 1.0 {
                    return Err(entry_err(location, "avg_out_degree: must be >= 1"));
                }
                self.avg_out_degree = d;
            }
            "s_m" => {
                let s: f64 = parse_number(key, value, location)?;
                if !(s > 0.0 && s <= 0.5) {
                    return Err(entry_err(location, format!("s_m: {s} outside (0, 0.5]")));
                }
                self.s_m = Some(s);
            }
            "h_m" => {
                self.h_m = Some(parse_number(key, value, location)?);
            }
            "h_M" => {
                self.h_maj = Some(parse_number(key, value, location)?);
            }
            "tolerance" => {
                let t: f64 = parse_number(key, value, location)?;
                if t <= 0.0 {
                    return Err(entry_err(location, "tolerance: must be > 0"));
                }
                self.tolerance = t;
            }
            "edges" => self.edges = Some(PathBuf::from(value)),
            "labels" => self.labels = Some(PathBuf::from(value)),
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "emit_recs" => self.emit_recs = parse_bool(key, value, location)?,
            "snapshot_at" => {
                self.snapshot_at = parse_list(key, value, location)?;
            }
            other => {
                return Err(entry_err(location, format!("unknown key '{other}'")));
            }
        }
        Ok(())
    }

    /// Parses a `key=value` file and applies every entry in order.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text, path)
    }

    /// Same grammar as the config file, from an in-memory string.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let location = Location::File {
                path: origin.to_path_buf(),
                line: idx + 1,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(entry_err(&location, format!("malformed line '{raw}'")));
            };
            self.apply(key.trim(), value.trim(), &location)?;
        }
        Ok(())
    }

    /// Resolves which network the commands should run on.
    pub fn network_source(&self) -> Result<NetworkSource, ConfigError> {
        let has_files = self.edges.is_some() || self.labels.is_some();
        let has_targets = self.s_m.is_some() || self.h_m.is_some() || self.h_maj.is_some();
        if has_files {
            if self.preset.is_some() || has_targets {
                return Err(ConfigError::Incomplete(
                    "edges/labels conflict with preset or s_m/h_m/h_M targets".into(),
                ));
            }
            let (Some(edges), Some(labels)) = (self.edges.clone(), self.labels.clone()) else {
                return Err(ConfigError::Incomplete(
                    "loading a graph needs both edges and labels".into(),
                ));
            };
            return Ok(NetworkSource::Files { edges, labels });
        }
        if let Some(preset) = self.preset {
            if has_targets {
                return Err(ConfigError::Incomplete(
                    "preset conflicts with explicit s_m/h_m/h_M targets".into(),
                ));
            }
            return Ok(NetworkSource::Preset {
                preset,
                n: self.n,
                avg_out_degree: self.avg_out_degree,
                tolerance: self.tolerance,
            });
        }
        if has_targets {
            let s_m = self
                .s_m
                .ok_or_else(|| ConfigError::Incomplete("explicit targets need s_m".into()))?;
            return Ok(NetworkSource::Targets {
                n: self.n,
                avg_out_degree: self.avg_out_degree,
                s_m,
                h_m: self.h_m.unwrap_or(0.0),
                h_maj: self.h_maj.unwrap_or(0.0),
                tolerance: self.tolerance,
            });
        }
        Err(ConfigError::Incomplete(
            "no network specified: give a preset, s_m/h_m targets, or edges+labels".into(),
        ))
    }
}

/// Where the graph for a run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    Preset {
        preset: Preset,
        n: usize,
        avg_out_degree: f64,
        tolerance: f64,
    },
    Targets {
        n: usize,
        avg_out_degree: f64,
        s_m: f64,
        h_m: f64,
        h_maj: f64,
        tolerance: f64,
    },
    Files {
        edges: PathBuf,
        labels: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Netgen(#[from] NetgenError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl NetworkSource {
    /// The generation config for sources that synthesize a graph.
    pub fn net_config(&self, seed: u64) -> Option<NetConfig> {
        match *self {
            NetworkSource::Preset {
                preset,
                n,
                avg_out_degree,
                tolerance,
            } => {
                let mut config = preset.config(n, avg_out_degree, seed);
                config.tolerance = tolerance;
                Some(config)
            }
            NetworkSource::Targets {
                n,
                avg_out_degree,
                s_m,
                h_m,
                h_maj,
                tolerance,
            } => Some(NetConfig {
                n_nodes: n,
                avg_out_degree,
                s_m_target: s_m,
                h_m_target: h_m,
                h_maj_target: h_maj,
                tolerance,
                rng_seed: seed,
            }),
            NetworkSource::Files { .. } => None,
        }
    }

    /// Builds or loads the run graph; generation streams derive from `seed`.
    pub fn materialize(&self, seed: u64) -> Result<LabeledDigraph, BuildError> {
        match self {
            NetworkSource::Files { edges, labels } => Ok(io::load_graph(edges, labels)?.graph),
            _ => {
                let config = self.net_config(seed).expect("generated source");
                Ok(netgen::build_network(&config)?)
            }
        }
    }
}
