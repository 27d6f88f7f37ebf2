use crate::encoder::{Encoder, EncoderBatchTrace, EncoderConfig, EncoderTrace, HistoryWindow};
use crate::envs::ActionBounds;
use crate::error::check_width;
use crate::nn::{derive_seed, MlpBatchTrace, MlpSpec, MlpTrace, OutputActivation, Scalar};
use crate::Result;

/// Policy network: its own history encoder followed by a tanh head whose
/// output is rescaled to the action bounds.
///
/// Parameter layout: encoder parameters, then head parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorNetwork {
    encoder: Encoder,
    head: MlpSpec,
    bounds: ActionBounds,
}

#[derive(Debug, Clone)]
pub struct ActorTrace<T> {
    encoder: EncoderTrace<T>,
    head: MlpTrace<T>,
    action: Vec<T>,
}

impl<T> ActorTrace<T> {
    pub fn action(&self) -> &[T] {
        &self.action
    }
}

/// Batched actor pass; actions are a row-major `windows x action_width` matrix.
#[derive(Debug, Clone)]
pub struct ActorBatchTrace<T> {
    encoder: EncoderBatchTrace<T>,
    head: MlpBatchTrace<T>,
    actions: Vec<T>,
}

impl<T> ActorBatchTrace<T> {
    pub fn actions(&self) -> &[T] {
        &self.actions
    }
}

impl ActorNetwork {
    pub fn new(encoder: EncoderConfig, obs_width: usize, hidden: &[usize], bounds: ActionBounds) -> Result<Self> {
        let encoder = Encoder::new(encoder, obs_width)?;
        let head = MlpSpec::relu(encoder.context_width(), hidden, bounds.width(), OutputActivation::Tanh)?;
        Ok(Self { encoder, head, bounds })
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn head(&self) -> &MlpSpec {
        &self.head
    }

    pub fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    pub fn action_width(&self) -> usize {
        self.bounds.width()
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.head.param_count()
    }

    pub fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        let mut params = self.encoder.init(derive_seed(seed, 1));
        params.extend(self.head.init::<T>(derive_seed(seed, 2)));
        params
    }

    fn split<'a, T>(&self, params: &'a [T]) -> (&'a [T], &'a [T]) {
        params.split_at(self.encoder.param_count())
    }

    fn scale<T: Scalar>(&self, squashed: &[T]) -> Vec<T> {
        squashed
            .iter()
            .zip(self.bounds.low.iter().zip(&self.bounds.high))
            .map(|(u, (l, h))| T::lit((h + l) / 2.0) + T::lit((h - l) / 2.0) * *u)
            .collect()
    }

    pub fn act<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>) -> Result<Vec<T>> {
        check_width("actor parameters", self.param_count(), params.len())?;
        let (enc, head) = self.split(params);
        let context = self.encoder.encode(enc, window)?;
        Ok(self.scale(&self.head.forward(head, &context)?))
    }

    pub fn forward_trace<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>) -> Result<ActorTrace<T>> {
        check_width("actor parameters", self.param_count(), params.len())?;
        let (enc, head) = self.split(params);
        let encoder = self.encoder.forward_trace(enc, window)?;
        let head = self.head.forward_trace(head, encoder.context())?;
        let action = self.scale(head.output());
        Ok(ActorTrace { encoder, head, action })
    }

    pub fn forward_batch<T: Scalar>(&self, params: &[T], windows: &[HistoryWindow<T>]) -> Result<ActorBatchTrace<T>> {
        check_width("actor parameters", self.param_count(), params.len())?;
        let (enc, head) = self.split(params);
        let encoder = self.encoder.forward_batch(enc, windows)?;
        let head = self.head.forward_batch(head, encoder.contexts(), windows.len())?;
        let actions = head
            .output()
            .chunks_exact(self.action_width())
            .flat_map(|row| self.scale(row))
            .collect();
        Ok(ActorBatchTrace { encoder, head, actions })
    }

    /// Batched [`ActorNetwork::backward`]; `upstream` is `windows x action_width`.
    pub fn backward_batch<T: Scalar>(
        &self,
        params: &[T],
        trace: &ActorBatchTrace<T>,
        upstream: &[T],
        grads: &mut [T],
    ) -> Result<()> {
        check_width("actor upstream gradient", trace.actions.len(), upstream.len())?;
        check_width("actor parameter gradient", self.param_count(), grads.len())?;
        let (enc, head) = self.split(params);
        let (enc_grads, head_grads) = grads.split_at_mut(self.encoder.param_count());
        let half: Vec<T> = self
            .bounds
            .low
            .iter()
            .zip(&self.bounds.high)
            .map(|(l, h)| T::lit((h - l) / 2.0))
            .collect();
        let squashed_grad: Vec<T> = upstream
            .chunks_exact(self.action_width())
            .flat_map(|row| row.iter().zip(&half).map(|(g, s)| *g * *s))
            .collect();
        let context_grad = self
            .head
            .backward_batch(head, &trace.head, &squashed_grad, Some(head_grads), true)?
            .expect("input gradient requested");
        self.encoder.backward_batch(enc, &trace.encoder, &context_grad, enc_grads)
    }

    /// Accumulates `d(upstream . action)/d(params)` into `grads`.
    pub fn backward<T: Scalar>(&self, params: &[T], trace: &ActorTrace<T>, upstream: &[T], grads: &mut [T]) -> Result<()> {
        check_width("actor upstream gradient", self.action_width(), upstream.len())?;
        check_width("actor parameter gradient", self.param_count(), grads.len())?;
        let (enc, head) = self.split(params);
        let (enc_grads, head_grads) = grads.split_at_mut(self.encoder.param_count());
        let squashed_grad: Vec<T> = upstream
            .iter()
            .zip(self.bounds.low.iter().zip(&self.bounds.high))
            .map(|(g, (l, h))| *g * T::lit((h - l) / 2.0))
            .collect();
        let context_grad = self.head.backward(head, &trace.head, &squashed_grad, head_grads)?;
        self.encoder.backward(enc, &trace.encoder, &context_grad, enc_grads)?;
        Ok(())
    }
}

/// Q network: its own history encoder, then a head over `context ⊕ action`.
///
/// Parameter layout: encoder parameters, then head parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticNetwork {
    encoder: Encoder,
    head: MlpSpec,
    action_width: usize,
}

#[derive(Debug, Clone)]
pub struct CriticTrace<T> {
    encoder: EncoderTrace<T>,
    head: MlpTrace<T>,
}

impl<T: Scalar> CriticTrace<T> {
    pub fn value(&self) -> T {
        self.head.output()[0]
    }
}

#[derive(Debug, Clone)]
pub struct CriticBatchTrace<T> {
    encoder: EncoderBatchTrace<T>,
    head: MlpBatchTrace<T>,
}

impl<T> CriticBatchTrace<T> {
    /// One Q value per window.
    pub fn values(&self) -> &[T] {
        self.head.output()
    }
}

impl CriticNetwork {
    pub fn new(encoder: EncoderConfig, obs_width: usize, hidden: &[usize], action_width: usize) -> Result<Self> {
        let encoder = Encoder::new(encoder, obs_width)?;
        let head = MlpSpec::relu(encoder.context_width() + action_width, hidden, 1, OutputActivation::Identity)?;
        Ok(Self {
            encoder,
            head,
            action_width,
        })
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn head(&self) -> &MlpSpec {
        &self.head
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.head.param_count()
    }

    pub fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        let mut params = self.encoder.init(derive_seed(seed, 1));
        params.extend(self.head.init::<T>(derive_seed(seed, 2)));
        params
    }

    fn split<'a, T>(&self, params: &'a [T]) -> (&'a [T], &'a [T]) {
        params.split_at(self.encoder.param_count())
    }

    fn head_input<T: Scalar>(&self, context: &[T], action: &[T]) -> Result<Vec<T>> {
        check_width("critic action", self.action_width, action.len())?;
        let mut input = Vec::with_capacity(context.len() + action.len());
        input.extend_from_slice(context);
        input.extend_from_slice(action);
        Ok(input)
    }

    pub fn q<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>, action: &[T]) -> Result<T> {
        check_width("critic parameters", self.param_count(), params.len())?;
        let (enc, head) = self.split(params);
        let context = self.encoder.encode(enc, window)?;
        Ok(self.head.forward(head, &self.head_input(&context, action)?)?[0])
    }

    pub fn forward_trace<T: Scalar>(
        &self,
        params: &[T],
        window: &HistoryWindow<T>,
        action: &[T],
    ) -> Result<CriticTrace<T>> {
        check_width("critic parameters", self.param_count(), params.len())?;
        let (enc, head) = self.split(params);
        let encoder = self.encoder.forward_trace(enc, window)?;
        let head = self
            .head
            .forward_trace(head, &self.head_input(encoder.context(), action)?)?;
        Ok(CriticTrace { encoder, head })
    }

    /// Accumulates `upstream * dQ/d(params)` into `grads` and returns
    /// `upstream * dQ/d(action)`.
    pub fn backward<T: Scalar>(&self, params: &[T], trace: &CriticTrace<T>, upstream: T, grads: &mut [T]) -> Result<Vec<T>> {
        check_width("critic parameter gradient", self.param_count(), grads.len())?;
        let (enc, head) = self.split(params);
        let (enc_grads, head_grads) = grads.split_at_mut(self.encoder.param_count());
        let input_grad = self.head.backward(head, &trace.head, &[upstream], head_grads)?;
        let context_width = self.encoder.context_width();
        self.encoder
            .backward(enc, &trace.encoder, &input_grad[..context_width], enc_grads)?;
        Ok(input_grad[context_width..].to_vec())
    }

    /// `upstream * dQ/d(action)`, without touching parameter gradients.
    pub fn action_gradient<T: Scalar>(&self, params: &[T], trace: &CriticTrace<T>, upstream: T) -> Result<Vec<T>> {
        let (_, head) = self.split(params);
        let input_grad = self.head.input_gradient(head, &trace.head, &[upstream])?;
        Ok(input_grad[self.encoder.context_width()..].to_vec())
    }

    /// `actions` is a row-major `windows x action_width` matrix.
    pub fn forward_batch<T: Scalar>(
        &self,
        params: &[T],
        windows: &[HistoryWindow<T>],
        actions: &[T],
    ) -> Result<CriticBatchTrace<T>> {
        check_width("critic parameters", self.param_count(), params.len())?;
        check_width("critic actions", windows.len() * self.action_width, actions.len())?;
        let (enc, head) = self.split(params);
        let encoder = self.encoder.forward_batch(enc, windows)?;
        let context_width = self.encoder.context_width();
        let mut input = Vec::with_capacity(windows.len() * (context_width + self.action_width));
        for (c, a) in encoder
            .contexts()
            .chunks_exact(context_width)
            .zip(actions.chunks_exact(self.action_width))
        {
            input.extend_from_slice(c);
            input.extend_from_slice(a);
        }
        let head = self.head.forward_batch(head, &input, windows.len())?;
        Ok(CriticBatchTrace { encoder, head })
    }

    /// Accumulates `sum_i upstream[i] * dQ_i/d(params)` into `grads`.
    pub fn backward_batch<T: Scalar>(
        &self,
        params: &[T],
        trace: &CriticBatchTrace<T>,
        upstream: &[T],
        grads: &mut [T],
    ) -> Result<()> {
        check_width("critic parameter gradient", self.param_count(), grads.len())?;
        let (enc, head) = self.split(params);
        let (enc_grads, head_grads) = grads.split_at_mut(self.encoder.param_count());
        let input_grad = self
            .head
            .backward_batch(head, &trace.head, upstream, Some(head_grads), true)?
            .expect("input gradient requested");
        let context_width = self.encoder.context_width();
        let context_grad: Vec<T> = input_grad
            .chunks_exact(context_width + self.action_width)
            .flat_map(|row| row[..context_width].iter().copied())
            .collect();
        self.encoder.backward_batch(enc, &trace.encoder, &context_grad, enc_grads)
    }

    /// `upstream[i] * dQ_i/d(action_i)` as a `windows x action_width` matrix.
    pub fn action_gradient_batch<T: Scalar>(
        &self,
        params: &[T],
        trace: &CriticBatchTrace<T>,
        upstream: &[T],
    ) -> Result<Vec<T>> {
        let (_, head) = self.split(params);
        let input_grad = self
            .head
            .backward_batch(head, &trace.head, upstream, None, true)?
            .expect("input gradient requested");
        let context_width = self.encoder.context_width();
        Ok(input_grad
            .chunks_exact(context_width + self.action_width)
            .flat_map(|row| row[context_width..].iter().copied())
            .collect())
    }
}
