//! History windows and the encoders that map them to a context vector.

mod parallel;
mod recurrent;
mod window;

pub use parallel::ParallelEncoder;
pub use recurrent::{GruEncoder, GruTrace};
pub use window::HistoryWindow;

use serde::{Deserialize, Serialize};

use crate::error::check_width;
use crate::nn::{MlpBatchTrace, MlpTrace, Scalar};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderVariant {
    /// Shared per-step embedding applied to every row independently, then a
    /// combiner over the temporally ordered concatenation.
    Parallel,
    /// Single-layer GRU run oldest to newest; the context is the final state.
    Recurrent,
    /// No encoder: the context is the current observation (forces `H = 1`).
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub variant: EncoderVariant,
    pub window_length: usize,
    pub embed_width: usize,
    pub combiner_hidden_widths: Vec<usize>,
    pub context_width: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            variant: EncoderVariant::Parallel,
            window_length: 5,
            embed_width: 64,
            combiner_hidden_widths: vec![128],
            context_width: 128,
        }
    }
}

impl EncoderConfig {
    /// Effective window length; `variant = none` always sees one step.
    pub fn window_length(&self) -> usize {
        match self.variant {
            EncoderVariant::None => 1,
            _ => self.window_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 {
            return Err(Error::config("encoder window_length must be at least 1"));
        }
        if self.variant != EncoderVariant::None
            && (self.embed_width == 0
                || self.context_width == 0
                || self.combiner_hidden_widths.contains(&0))
        {
            return Err(Error::config("encoder widths must be positive"));
        }
        Ok(())
    }
}

/// Parameter layout and evaluation for one encoder instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    config: EncoderConfig,
    obs_width: usize,
    kind: EncoderKind,
}

#[derive(Debug, Clone, PartialEq)]
enum EncoderKind {
    Parallel(ParallelEncoder),
    Recurrent(GruEncoder),
    Passthrough,
}

/// Intermediate values of one [`Encoder::forward_trace`] call.
#[derive(Debug, Clone)]
pub enum EncoderTrace<T> {
    Parallel {
        embeddings: Vec<MlpTrace<T>>,
        combiner: MlpTrace<T>,
    },
    Recurrent(recurrent::GruTrace<T>),
    Passthrough(Vec<T>),
}

impl<T: Scalar> EncoderTrace<T> {
    pub fn context(&self) -> &[T] {
        match self {
            EncoderTrace::Parallel { combiner, .. } => combiner.output(),
            EncoderTrace::Recurrent(trace) => trace.final_hidden(),
            EncoderTrace::Passthrough(obs) => obs,
        }
    }
}

/// Intermediate values of one [`Encoder::forward_batch`] call.
#[derive(Debug, Clone)]
pub enum EncoderBatchTrace<T> {
    Parallel {
        embed: MlpBatchTrace<T>,
        combiner: MlpBatchTrace<T>,
    },
    Recurrent {
        traces: Vec<recurrent::GruTrace<T>>,
        contexts: Vec<T>,
    },
    Passthrough(Vec<T>),
}

impl<T: Scalar> EncoderBatchTrace<T> {
    /// Contexts as a row-major `windows x context_width` matrix.
    pub fn contexts(&self) -> &[T] {
        match self {
            EncoderBatchTrace::Parallel { combiner, .. } => combiner.output(),
            EncoderBatchTrace::Recurrent { contexts, .. } => contexts,
            EncoderBatchTrace::Passthrough(contexts) => contexts,
        }
    }
}

impl Encoder {
    pub fn new(config: EncoderConfig, obs_width: usize) -> Result<Self> {
        config.validate()?;
        if obs_width == 0 {
            return Err(Error::config("observation width must be positive"));
        }
        let kind = match config.variant {
            EncoderVariant::Parallel => EncoderKind::Parallel(ParallelEncoder::new(
                obs_width,
                config.window_length,
                config.embed_width,
                &config.combiner_hidden_widths,
                config.context_width,
            )?),
            EncoderVariant::Recurrent => {
                EncoderKind::Recurrent(GruEncoder::new(obs_width, config.context_width))
            }
            EncoderVariant::None => EncoderKind::Passthrough,
        };
        Ok(Self {
            config,
            obs_width,
            kind,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn obs_width(&self) -> usize {
        self.obs_width
    }

    pub fn window_length(&self) -> usize {
        self.config.window_length()
    }

    pub fn context_width(&self) -> usize {
        match &self.kind {
            EncoderKind::Parallel(p) => p.context_width(),
            EncoderKind::Recurrent(g) => g.hidden_width(),
            EncoderKind::Passthrough => self.obs_width,
        }
    }

    pub fn param_count(&self) -> usize {
        match &self.kind {
            EncoderKind::Parallel(p) => p.param_count(),
            EncoderKind::Recurrent(g) => g.param_count(),
            EncoderKind::Passthrough => 0,
        }
    }

    pub fn parallel(&self) -> Option<&ParallelEncoder> {
        match &self.kind {
            EncoderKind::Parallel(p) => Some(p),
            _ => None,
        }
    }

    pub fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        match &self.kind {
            EncoderKind::Parallel(p) => p.init(seed),
            EncoderKind::Recurrent(g) => g.init(seed),
            EncoderKind::Passthrough => Vec::new(),
        }
    }

    fn check(&self, params_len: usize, window: &HistoryWindow<impl Scalar>) -> Result<()> {
        check_width("encoder parameters", self.param_count(), params_len)?;
        check_width("window row", self.obs_width, window.width())?;
        if window.window_length() != self.window_length() {
            return Err(Error::contract(format!(
                "window has {} rows, encoder expects {}",
                window.window_length(),
                self.window_length()
            )));
        }
        Ok(())
    }

    pub fn encode<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>) -> Result<Vec<T>> {
        self.check(params.len(), window)?;
        match &self.kind {
            EncoderKind::Parallel(p) => p.encode(params, window),
            EncoderKind::Recurrent(g) => g.encode(params, window),
            EncoderKind::Passthrough => Ok(window.current().to_vec()),
        }
    }

    pub fn forward_trace<T: Scalar>(
        &self,
        params: &[T],
        window: &HistoryWindow<T>,
    ) -> Result<EncoderTrace<T>> {
        self.check(params.len(), window)?;
        match &self.kind {
            EncoderKind::Parallel(p) => p.forward_trace(params, window),
            EncoderKind::Recurrent(g) => Ok(EncoderTrace::Recurrent(g.forward_trace(params, window))),
            EncoderKind::Passthrough => Ok(EncoderTrace::Passthrough(window.current().to_vec())),
        }
    }

    /// Accumulates parameter gradients into `param_grads` and returns the
    /// gradient with respect to the window, flat and row-major.
    pub fn backward<T: Scalar>(
        &self,
        params: &[T],
        trace: &EncoderTrace<T>,
        upstream: &[T],
        param_grads: &mut [T],
    ) -> Result<Vec<T>> {
        check_width("encoder parameters", self.param_count(), params.len())?;
        check_width("encoder parameter gradient", self.param_count(), param_grads.len())?;
        check_width("encoder upstream gradient", self.context_width(), upstream.len())?;
        match (&self.kind, trace) {
            (EncoderKind::Parallel(p), EncoderTrace::Parallel { embeddings, combiner }) => {
                p.backward(params, embeddings, combiner, upstream, param_grads)
            }
            (EncoderKind::Recurrent(g), EncoderTrace::Recurrent(t)) => {
                Ok(g.backward(params, t, upstream, param_grads))
            }
            (EncoderKind::Passthrough, EncoderTrace::Passthrough(_)) => Ok(upstream.to_vec()),
            _ => Err(Error::contract("encoder trace does not match the encoder variant")),
        }
    }

    /// Encodes many windows at once.
    pub fn forward_batch<T: Scalar>(
        &self,
        params: &[T],
        windows: &[HistoryWindow<T>],
    ) -> Result<EncoderBatchTrace<T>> {
        for window in windows {
            self.check(params.len(), window)?;
        }
        match &self.kind {
            EncoderKind::Parallel(p) => {
                let (embed, combiner) = p.forward_batch(params, windows)?;
                Ok(EncoderBatchTrace::Parallel { embed, combiner })
            }
            EncoderKind::Recurrent(g) => {
                let traces: Vec<_> = windows.iter().map(|w| g.forward_trace(params, w)).collect();
                let contexts = traces.iter().flat_map(|t| t.final_hidden().iter().copied()).collect();
                Ok(EncoderBatchTrace::Recurrent { traces, contexts })
            }
            EncoderKind::Passthrough => Ok(EncoderBatchTrace::Passthrough(
                windows.iter().flat_map(|w| w.current().iter().copied()).collect(),
            )),
        }
    }

    /// Accumulates parameter gradients for a batch; `upstream` is the
    /// `windows x context_width` gradient matrix. Window gradients are not
    /// formed.
    pub fn backward_batch<T: Scalar>(
        &self,
        params: &[T],
        trace: &EncoderBatchTrace<T>,
        upstream: &[T],
        param_grads: &mut [T],
    ) -> Result<()> {
        check_width("encoder parameters", self.param_count(), params.len())?;
        check_width("encoder parameter gradient", self.param_count(), param_grads.len())?;
        check_width("encoder upstream gradient", trace.contexts().len(), upstream.len())?;
        match (&self.kind, trace) {
            (EncoderKind::Parallel(p), EncoderBatchTrace::Parallel { embed, combiner }) => {
                p.backward_batch(params, embed, combiner, upstream, param_grads)
            }
            (EncoderKind::Recurrent(g), EncoderBatchTrace::Recurrent { traces, .. }) => {
                let c = g.hidden_width();
                for (t, u) in traces.iter().zip(upstream.chunks_exact(c)) {
                    g.backward(params, t, u, param_grads);
                }
                Ok(())
            }
            (EncoderKind::Passthrough, EncoderBatchTrace::Passthrough(_)) => Ok(()),
            _ => Err(Error::contract("encoder trace does not match the encoder variant")),
        }
    }

    /// Convenience wrapper returning `(parameter gradients, window gradient)`.
    pub fn encode_backward<T: Scalar>(
        &self,
        params: &[T],
        window: &HistoryWindow<T>,
        upstream: &[T],
    ) -> Result<(Vec<T>, Vec<T>)> {
        let trace = self.forward_trace(params, window)?;
        let mut grads = vec![T::zero(); params.len()];
        let window_grad = self.backward(params, &trace, upstream, &mut grads)?;
        Ok((grads, window_grad))
    }
}
