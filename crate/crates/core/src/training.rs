//! Adam optimisation and the two training drivers: one network over all
//! three laws, or one network per law.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::constitutive::{LawId, MaterialProps};
use crate::error::{Error, Result};
use crate::mlp::{init_params, loss_gradient, Activation, MlpArch, ParamVector};
use crate::physics::{batch_loss, ConsolidationLoss};
use crate::sampling::{sample_training_set, SamplingPlan};

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(len: usize, learning_rate: f64) -> Self {
        Self {
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// Bias-corrected Adam update applied in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grad.len() != params.len() {
            return Err(Error::ShapeMismatch {
                expected: self.first_moment.len(),
                found: grad.len(),
            });
        }
        if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index });
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.first_moment.iter_mut())
            .zip(self.second_moment.iter_mut())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(
    state: &AdamState,
    params: &ParamVector,
    grad: &ParamVector,
) -> Result<(AdamState, ParamVector)> {
    let mut next = state.clone();
    let mut p = params.clone();
    next.step(p.as_mut_slice(), grad.as_slice())?;
    Ok((next, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// One network, all three laws selected by the one-hot input.
    Mcnn,
    /// A conventional PINN trained on a single law.
    SingleLaw(LawId),
}

impl TrainMode {
    pub fn laws(self) -> Vec<LawId> {
        match self {
            TrainMode::Mcnn => LawId::ALL.to_vec(),
            TrainMode::SingleLaw(law) => vec![law],
        }
    }

    /// Reference epoch budget: 10^5 for the multi-law network; 5*10^4,
    /// 2*10^4 and 10^4 for single-law networks of laws 1, 2 and 3.
    pub fn default_epochs(self) -> usize {
        match self {
            TrainMode::Mcnn => 100_000,
            TrainMode::SingleLaw(LawId::SaintVenantKirchhoff) => 50_000,
            TrainMode::SingleLaw(LawId::ModifiedSaintVenantKirchhoff) => 20_000,
            TrainMode::SingleLaw(LawId::NeoHookean) => 10_000,
        }
    }

    /// Training points per law: 1000 when shared across three laws, 3000
    /// for a single-law network so both see the same total.
    pub fn default_points_per_law(self) -> usize {
        match self {
            TrainMode::Mcnn => 1000,
            TrainMode::SingleLaw(_) => 3000,
        }
    }

    pub fn method_name(self) -> &'static str {
        match self {
            TrainMode::Mcnn => "mcnn",
            TrainMode::SingleLaw(_) => "pinn",
        }
    }
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainMode::Mcnn => write!(f, "mcnn"),
            TrainMode::SingleLaw(law) => write!(f, "pinn-law{}", law.index()),
        }
    }
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mcnn" {
            return Ok(TrainMode::Mcnn);
        }
        s.strip_prefix("pinn-law")
            .and_then(|k| k.parse::<usize>().ok())
            .map(|k| LawId::from_index(k).map(TrainMode::SingleLaw))
            .unwrap_or_else(|| Err(Error::InvalidConfig(format!("unknown training mode {s:?}"))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub arch: MlpArch,
    pub plan: SamplingPlan,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Seed for weight initialisation; the collocation set uses `plan.seed`.
    pub seed: u64,
    pub log_every: usize,
    pub props: MaterialProps,
    /// Rescale the gradient to at most this Euclidean norm. Off by default.
    pub grad_clip: Option<f64>,
}

impl TrainConfig {
    /// Reference settings for `mode`: 5x50 tanh network, Adam at 5e-4.
    pub fn for_mode(mode: TrainMode, seed: u64) -> Self {
        Self {
            mode,
            arch: MlpArch::default(),
            plan: SamplingPlan {
                per_law_total: mode.default_points_per_law(),
                seed: seed.wrapping_add(1),
                ..SamplingPlan::default()
            },
            epochs: mode.default_epochs(),
            learning_rate: 5e-4,
            seed,
            log_every: 100,
            props: MaterialProps::default(),
            grad_clip: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        self.plan.validate()?;
        self.props.validate()?;
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidConfig("log_every must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "grad_clip {c} must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub params: ParamVector,
    /// `(epoch, loss)` every `log_every` epochs, plus the loss after the
    /// final update at `epoch = epochs`.
    pub history: Vec<(usize, f64)>,
    pub wall_time: Duration,
}

pub fn train(config: &TrainConfig) -> Result<TrainReport> {
    train_with(config, |_, _| {})
}

/// Full-batch training; `observer` sees every logged `(epoch, loss)`.
pub fn train_with(
    config: &TrainConfig,
    mut observer: impl FnMut(usize, f64),
) -> Result<TrainReport> {
    config.validate()?;
    let start = Instant::now();
    let set = sample_training_set(&config.plan, &config.mode.laws())?;
    let loss = ConsolidationLoss::new(config.props);
    let mut params = init_params(&config.arch, config.seed);
    let mut adam = AdamState::new(params.len(), config.learning_rate);
    let mut history = Vec::with_capacity(config.epochs / config.log_every + 2);
    let diverged = |epoch| {
        move |e: Error| Error::Diverged {
            epoch,
            source: Box::new(e),
        }
    };

    for epoch in 0..config.epochs {
        let (value, mut grad) =
            loss_gradient(&params, &config.arch, &set.samples, &loss).map_err(diverged(epoch))?;
        if epoch % config.log_every == 0 {
            history.push((epoch, value));
            observer(epoch, value);
        }
        if let Some(max_norm) = config.grad_clip {
            let norm = grad.as_slice().iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > max_norm {
                let k = max_norm / norm;
                grad.as_mut_slice().iter_mut().for_each(|g| *g *= k);
            }
        }
        adam.step(params.as_mut_slice(), grad.as_slice())
            .map_err(diverged(epoch))?;
    }
    let last = batch_loss(&params, &config.arch, &set.samples, &config.props)
        .map_err(diverged(config.epochs))?;
    history.push((config.epochs, last));
    observer(config.epochs, last);
    Ok(TrainReport {
        params,
        history,
        wall_time: start.elapsed(),
    })
}

pub fn write_history_csv(path: &Path, history: &[(usize, f64)]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "epoch,loss")?;
    for (epoch, loss) in history {
        writeln!(w, "{epoch},{loss:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

mod checkpoint {
    use super::*;

    const MAGIC: &str = "# mcnn checkpoint";
    const VERSION: u32 = 1;

    /// Trained parameters plus the metadata needed to rebuild the network.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Checkpoint {
        pub arch: MlpArch,
        pub mode: TrainMode,
        pub seed: u64,
        pub epochs: usize,
        pub params: ParamVector,
    }

    /// Text header, a `---` separator, then one parameter per line with
    /// 17 significant digits.
    pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
        ckpt.params.check(&ckpt.arch)?;
        let mut w = BufWriter::new(fs::File::create(path)?);
        let a = &ckpt.arch;
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "format_version={VERSION}")?;
        writeln!(w, "input_dim={}", a.input_dim)?;
        writeln!(w, "hidden_layers={}", a.hidden_layers)?;
        writeln!(w, "hidden_width={}", a.hidden_width)?;
        writeln!(w, "activation={}", a.activation.name())?;
        writeln!(w, "output_dim={}", a.output_dim)?;
        writeln!(w, "mode={}", ckpt.mode)?;
        writeln!(w, "seed={}", ckpt.seed)?;
        writeln!(w, "epochs={}", ckpt.epochs)?;
        writeln!(w, "param_count={}", ckpt.params.len())?;
        writeln!(w, "---")?;
        for v in ckpt.params.as_slice() {
            writeln!(w, "{v:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }

    fn bad(msg: impl Into<String>) -> Error {
        Error::Checkpoint(msg.into())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing checkpoint magic line"));
        }
        let mut header = std::collections::HashMap::new();
        for line in lines.by_ref() {
            if line == "---" {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("bad header line {line:?}")))?;
            header.insert(k.to_string(), v.to_string());
        }
        let field = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| bad(format!("missing header field {k}")))
        };
        let number = |k: &str| -> Result<u64> {
            field(k)?
                .parse::<u64>()
                .map_err(|_| bad(format!("header field {k} is not an integer")))
        };

        let version = number("format_version")?;
        if version != u64::from(VERSION) {
            return Err(bad(format!("unsupported format version {version}")));
        }
        if field("activation")? != Activation::Tanh.name() {
            return Err(bad(format!(
                "unsupported activation {}",
                field("activation")?
            )));
        }
        let arch = MlpArch {
            input_dim: number("input_dim")? as usize,
            hidden_layers: number("hidden_layers")? as usize,
            hidden_width: number("hidden_width")? as usize,
            activation: Activation::Tanh,
            output_dim: number("output_dim")? as usize,
        };
        arch.validate().map_err(|e| bad(e.to_string()))?;
        let mode: TrainMode = field("mode")?
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        let count = number("param_count")? as usize;
        if count != arch.param_count() {
            return Err(bad(format!(
                "param_count {count} does not match architecture ({})",
                arch.param_count()
            )));
        }
        let values = lines
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad parameter value {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(bad(format!(
                "expected {count} parameters, found {}",
                values.len()
            )));
        }
        Ok(Checkpoint {
            arch,
            mode,
            seed: number("seed")?,
            epochs: number("epochs")? as usize,
            params: ParamVector::from_vec(values),
        })
    }
}
