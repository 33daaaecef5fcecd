//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment. Every key has a default; unknown
//! keys are rejected. A resolved configuration can be echoed back to text
//! and re-read to reproduce the run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mcnn::fdref::FdGridSpec;
use mcnn::sampling::{test_grid, SamplingPlan};
use mcnn::training::{TrainConfig, TrainMode};
use mcnn::{LawId, MaterialProps, MlpArch};

use crate::CliError;

/// Epoch budget of the reduced schedule for the multi-law network.
pub const FAST_MCNN_EPOCHS: usize = 20_000;
/// Single-law budgets are divided by this factor under the reduced schedule.
pub const FAST_PINN_DIVISOR: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Mcnn,
    Pinn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: ModeKind,
    pub law: Option<LawId>,
    pub epochs: Option<usize>,
    pub points_per_law: Option<usize>,
    pub learning_rate: f64,
    pub seed: u64,
    pub log_every: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub interior_fraction: f64,
    pub top_fraction: f64,
    pub bottom_fraction: f64,
    pub initial_fraction: f64,
    pub grad_clip: Option<f64>,
    pub props: MaterialProps,
    pub fd_dx: f64,
    pub fd_dt: f64,
    pub fd_t_end: f64,
    pub test_nx: usize,
    pub test_nt: usize,
    pub settlement_times: Vec<f64>,
    pub fast: bool,
    pub out_dir: PathBuf,
    pub label: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let plan = SamplingPlan::default();
        let fd = FdGridSpec::default();
        Self {
            mode: ModeKind::Mcnn,
            law: None,
            epochs: None,
            points_per_law: None,
            learning_rate: 5e-4,
            seed: 42,
            log_every: 100,
            hidden_layers: 5,
            hidden_width: 50,
            interior_fraction: plan.interior_fraction,
            top_fraction: plan.top_fraction,
            bottom_fraction: plan.bottom_fraction,
            initial_fraction: plan.initial_fraction,
            grad_clip: None,
            props: MaterialProps::default(),
            fd_dx: fd.dx,
            fd_dt: fd.dt,
            fd_t_end: fd.t_end,
            test_nx: 100,
            test_nt: 100,
            settlement_times: vec![0.1, 0.25, 0.5, 1.0],
            fast: false,
            out_dir: PathBuf::from("out"),
            label: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A real number, also accepting a simple fraction such as `1/3`.
fn parse_real(key: &str, value: &str) -> Result<f64, CliError> {
    let parsed = match value.split_once('/') {
        Some((a, b)) => a
            .trim()
            .parse::<f64>()
            .ok()
            .zip(b.trim().parse::<f64>().ok())
            .map(|(a, b)| a / b),
        None => value.parse::<f64>().ok(),
    };
    parsed
        .filter(|v| v.is_finite())
        .ok_or_else(|| config_err(format!("{key}: expected a number, got {value:?}")))
}

fn parse_count(key: &str, value: &str) -> Result<usize, CliError> {
    value.parse().map_err(|_| {
        config_err(format!(
            "{key}: expected a non-negative integer, got {value:?}"
        ))
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

fn optional<T>(
    value: &str,
    parse: impl FnOnce(&str) -> Result<T, CliError>,
) -> Result<Option<T>, CliError> {
    if value.is_empty() || value == "auto" || value == "none" {
        Ok(None)
    } else {
        parse(value).map(Some)
    }
}

pub fn parse_law(value: &str) -> Result<LawId, CliError> {
    value
        .parse::<usize>()
        .ok()
        .and_then(|k| LawId::from_index(k).ok())
        .ok_or_else(|| config_err(format!("law must be 1, 2 or 3, got {value:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "mode" => {
                self.mode = match v {
                    "mcnn" => ModeKind::Mcnn,
                    "pinn" => ModeKind::Pinn,
                    _ => return Err(config_err(format!("mode must be mcnn or pinn, got {v:?}"))),
                }
            }
            "law" => self.law = optional(v, parse_law)?,
            "epochs" => self.epochs = optional(v, |s| parse_count("epochs", s))?,
            "points_per_law" => {
                self.points_per_law = optional(v, |s| parse_count("points_per_law", s))?
            }
            "learning_rate" => self.learning_rate = parse_real("learning_rate", v)?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| config_err(format!("seed: bad integer {v:?}")))?
            }
            "log_every" => self.log_every = parse_count("log_every", v)?,
            "hidden_layers" => self.hidden_layers = parse_count("hidden_layers", v)?,
            "hidden_width" => self.hidden_width = parse_count("hidden_width", v)?,
            "interior_fraction" => self.interior_fraction = parse_real("interior_fraction", v)?,
            "top_fraction" => self.top_fraction = parse_real("top_fraction", v)?,
            "bottom_fraction" => self.bottom_fraction = parse_real("bottom_fraction", v)?,
            "initial_fraction" => self.initial_fraction = parse_real("initial_fraction", v)?,
            "grad_clip" => self.grad_clip = optional(v, |s| parse_real("grad_clip", s))?,
            "gamma_hat" => self.props.gamma_hat = parse_real("gamma_hat", v)?,
            "mu_hat" => self.props.mu_hat = parse_real("mu_hat", v)?,
            "phi0" => self.props.phi0 = parse_real("phi0", v)?,
            "j_bar" => self.props.j_bar = parse_real("j_bar", v)?,
            "fd_dx" => self.fd_dx = parse_real("fd_dx", v)?,
            "fd_dt" => self.fd_dt = parse_real("fd_dt", v)?,
            "fd_t_end" => self.fd_t_end = parse_real("fd_t_end", v)?,
            "test_nx" => self.test_nx = parse_count("test_nx", v)?,
            "test_nt" => self.test_nt = parse_count("test_nt", v)?,
            "settlement_times" => {
                self.settlement_times = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_real("settlement_times", s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "fast" => self.fast = parse_bool("fast", v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "label" => self.label = (!v.is_empty()).then(|| v.to_string()),
            other => return Err(config_err(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` pairs, e.g. from the command line.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| config_err(format!("override {pair:?} is not of the form key=value")))?;
        self.set(k, v)
    }

    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(config_err(format!("line {}: duplicate key {k:?}", n + 1)));
            }
            cfg.set(k, v).map_err(|e| match e {
                CliError::Config(m) => config_err(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn train_mode(&self) -> Result<TrainMode, CliError> {
        match (self.mode, self.law) {
            (ModeKind::Mcnn, _) => Ok(TrainMode::Mcnn),
            (ModeKind::Pinn, Some(law)) => Ok(TrainMode::SingleLaw(law)),
            (ModeKind::Pinn, None) => Err(config_err("mode = pinn requires a law (1, 2 or 3)")),
        }
    }

    pub fn label_for(&self, mode: TrainMode) -> String {
        self.label.clone().unwrap_or_else(|| mode.to_string())
    }

    /// Epochs for `mode`: explicit value, else the reference schedule,
    /// reduced when `fast` is set.
    pub fn epochs_for(&self, mode: TrainMode) -> usize {
        self.epochs.unwrap_or_else(|| match (self.fast, mode) {
            (false, m) => m.default_epochs(),
            (true, TrainMode::Mcnn) => FAST_MCNN_EPOCHS,
            (true, m) => m.default_epochs() / FAST_PINN_DIVISOR,
        })
    }

    /// Training configuration for `mode`; `seed` feeds the initialisation
    /// and `seed + 1` the collocation sampling.
    pub fn train_config(&self, mode: TrainMode, seed: u64) -> Result<TrainConfig, CliError> {
        let mut c = TrainConfig::for_mode(mode, seed);
        c.arch = MlpArch::new(self.hidden_layers, self.hidden_width);
        c.plan = SamplingPlan {
            per_law_total: self.points_per_law.unwrap_or(mode.default_points_per_law()),
            interior_fraction: self.interior_fraction,
            top_fraction: self.top_fraction,
            bottom_fraction: self.bottom_fraction,
            initial_fraction: self.initial_fraction,
            seed: seed.wrapping_add(1),
        };
        c.epochs = self.epochs_for(mode);
        c.learning_rate = self.learning_rate;
        c.log_every = self.log_every;
        c.props = self.props;
        c.grad_clip = self.grad_clip;
        c.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(c)
    }

    pub fn test_points(&self) -> Result<Vec<(f64, f64)>, CliError> {
        test_grid(self.test_nx, self.test_nt).map_err(|e| config_err(e.to_string()))
    }

    /// Reference-solver grid; snapshots at the evaluation grid times plus
    /// any extra settlement times.
    pub fn fd_spec(&self) -> Result<FdGridSpec, CliError> {
        let mut times: Vec<f64> = (0..self.test_nt)
            .map(|j| mcnn::sampling::grid_time(j, self.test_nt))
            .collect();
        for &t in &self.settlement_times {
            if !times.contains(&t) {
                times.push(t);
            }
        }
        times.sort_by(f64::total_cmp);
        times.retain(|&t| t <= self.fd_t_end);
        let spec = FdGridSpec {
            dx: self.fd_dx,
            dt: self.fd_dt,
            t_end: self.fd_t_end,
            snapshot_times: times,
        };
        spec.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.props
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        self.test_points()?;
        self.fd_spec()?;
        if self
            .settlement_times
            .iter()
            .any(|&t| !(t > 0.0 && t <= 1.0))
        {
            return Err(config_err("settlement_times must lie in (0, 1]"));
        }
        let mode = self.train_mode()?;
        self.train_config(mode, self.seed)?;
        Ok(())
    }

    /// Every key with its value, in a form [`RunConfig::parse_str`] accepts.
    /// `out_dir` is left out so that a run directory can be moved or
    /// compared byte-for-byte with another.
    pub fn echo(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".to_string());
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv(
            "mode",
            match self.mode {
                ModeKind::Mcnn => "mcnn",
                ModeKind::Pinn => "pinn",
            }
            .into(),
        );
        kv("law", opt(self.law.map(|l| l.index().to_string())));
        kv("epochs", opt(self.epochs.map(|e| e.to_string())));
        kv(
            "points_per_law",
            opt(self.points_per_law.map(|e| e.to_string())),
        );
        kv("learning_rate", format!("{:e}", self.learning_rate));
        kv("seed", self.seed.to_string());
        kv("log_every", self.log_every.to_string());
        kv("hidden_layers", self.hidden_layers.to_string());
        kv("hidden_width", self.hidden_width.to_string());
        kv("interior_fraction", self.interior_fraction.to_string());
        kv("top_fraction", self.top_fraction.to_string());
        kv("bottom_fraction", self.bottom_fraction.to_string());
        kv("initial_fraction", self.initial_fraction.to_string());
        kv(
            "grad_clip",
            self.grad_clip.map_or("none".into(), |c| c.to_string()),
        );
        kv("gamma_hat", self.props.gamma_hat.to_string());
        kv("mu_hat", self.props.mu_hat.to_string());
        kv("phi0", self.props.phi0.to_string());
        kv("j_bar", self.props.j_bar.to_string());
        kv("fd_dx", self.fd_dx.to_string());
        kv("fd_dt", format!("{:e}", self.fd_dt));
        kv("fd_t_end", self.fd_t_end.to_string());
        kv("test_nx", self.test_nx.to_string());
        kv("test_nt", self.test_nt.to_string());
        kv(
            "settlement_times",
            self.settlement_times
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("fast", self.fast.to_string());
        kv("label", self.label.clone().unwrap_or_default());
        s
    }
}
