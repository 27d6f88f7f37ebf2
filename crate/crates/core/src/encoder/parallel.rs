use super::{EncoderTrace, HistoryWindow};
use crate::nn::{derive_seed, MlpBatchTrace, MlpSpec, MlpTrace, OutputActivation, Scalar};
use crate::Result;

/// Shared per-step embedding followed by a combiner over the concatenation.
///
/// `context = combiner([embed(o_{t-H+1}), ..., embed(o_t)])`. The embedding
/// (`n -> d -> d`) sees one row at a time and is the same network for every
/// slot; the combiner (`H*d -> hidden.. -> c`) keeps slot order, so the
/// context is position aware.
///
/// Parameter layout: embedding parameters, then combiner parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelEncoder {
    window_length: usize,
    embed: MlpSpec,
    combiner: MlpSpec,
}

impl ParallelEncoder {
    pub fn new(
        obs_width: usize,
        window_length: usize,
        embed_width: usize,
        combiner_hidden: &[usize],
        context_width: usize,
    ) -> Result<Self> {
        let embed = MlpSpec::relu(obs_width, &[embed_width], embed_width, OutputActivation::Identity)?;
        let combiner = MlpSpec::relu(
            window_length * embed_width,
            combiner_hidden,
            context_width,
            OutputActivation::Identity,
        )?;
        Ok(Self {
            window_length,
            embed,
            combiner,
        })
    }

    pub fn embed_spec(&self) -> &MlpSpec {
        &self.embed
    }

    pub fn combiner_spec(&self) -> &MlpSpec {
        &self.combiner
    }

    pub fn context_width(&self) -> usize {
        self.combiner.output_width()
    }

    pub fn param_count(&self) -> usize {
        self.embed.param_count() + self.combiner.param_count()
    }

    pub(super) fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        let mut params = self.embed.init(derive_seed(seed, 1));
        params.extend(self.combiner.init::<T>(derive_seed(seed, 2)));
        params
    }

    fn split<'a, T>(&self, params: &'a [T]) -> (&'a [T], &'a [T]) {
        params.split_at(self.embed.param_count())
    }

    /// Embeds a single window row.
    pub fn embed_row<T: Scalar>(&self, params: &[T], row: &[T]) -> Result<Vec<T>> {
        self.embed.forward(self.split(params).0, row)
    }

    /// Maps the concatenated per-step embeddings (temporal order) to the context.
    pub fn combine<T: Scalar>(&self, params: &[T], embeddings: &[T]) -> Result<Vec<T>> {
        self.combiner.forward(self.split(params).1, embeddings)
    }

    pub(super) fn encode<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>) -> Result<Vec<T>> {
        let mut concat = Vec::with_capacity(self.combiner.input_width());
        for row in window.rows() {
            concat.extend(self.embed_row(params, row)?);
        }
        self.combine(params, &concat)
    }

    pub(super) fn forward_trace<T: Scalar>(
        &self,
        params: &[T],
        window: &HistoryWindow<T>,
    ) -> Result<EncoderTrace<T>> {
        let (embed_params, combiner_params) = self.split(params);
        let embeddings = window
            .rows()
            .map(|row| self.embed.forward_trace(embed_params, row))
            .collect::<Result<Vec<_>>>()?;
        let mut concat = Vec::with_capacity(self.combiner.input_width());
        for trace in &embeddings {
            concat.extend_from_slice(trace.output());
        }
        let combiner = self.combiner.forward_trace(combiner_params, &concat)?;
        Ok(EncoderTrace::Parallel {
            embeddings,
            combiner,
        })
    }

    /// The shared embedding's gradient is the sum of the per-slot contributions.
    pub(super) fn backward<T: Scalar>(
        &self,
        params: &[T],
        embeddings: &[MlpTrace<T>],
        combiner: &MlpTrace<T>,
        upstream: &[T],
        param_grads: &mut [T],
    ) -> Result<Vec<T>> {
        let (embed_params, combiner_params) = self.split(params);
        let (embed_grads, combiner_grads) = param_grads.split_at_mut(self.embed.param_count());
        let concat_grad = self
            .combiner
            .backward(combiner_params, combiner, upstream, combiner_grads)?;
        let d = self.embed.output_width();
        let mut window_grad = Vec::with_capacity(self.window_length * self.embed.input_width());
        for (slot, trace) in embeddings.iter().enumerate() {
            let row_grad = self.embed.backward(
                embed_params,
                trace,
                &concat_grad[slot * d..(slot + 1) * d],
                embed_grads,
            )?;
            window_grad.extend(row_grad);
        }
        Ok(window_grad)
    }

    pub(super) fn forward_batch<T: Scalar>(
        &self,
        params: &[T],
        windows: &[HistoryWindow<T>],
    ) -> Result<(MlpBatchTrace<T>, MlpBatchTrace<T>)> {
        let (embed_params, combiner_params) = self.split(params);
        let mut stacked = Vec::with_capacity(windows.len() * self.window_length * self.embed.input_width());
        for window in windows {
            stacked.extend_from_slice(window.as_flat());
        }
        let embed = self
            .embed
            .forward_batch(embed_params, &stacked, windows.len() * self.window_length)?;
        // Row-major `(B*H) x d` is already `B x (H*d)` in slot order.
        let combiner = self
            .combiner
            .forward_batch(combiner_params, embed.output(), windows.len())?;
        Ok((embed, combiner))
    }

    pub(super) fn backward_batch<T: Scalar>(
        &self,
        params: &[T],
        embed: &MlpBatchTrace<T>,
        combiner: &MlpBatchTrace<T>,
        upstream: &[T],
        param_grads: &mut [T],
    ) -> Result<()> {
        let (embed_params, combiner_params) = self.split(params);
        let (embed_grads, combiner_grads) = param_grads.split_at_mut(self.embed.param_count());
        let concat_grad = self
            .combiner
            .backward_batch(combiner_params, combiner, upstream, Some(combiner_grads), true)?
            .expect("input gradient requested");
        self.embed
            .backward_batch(embed_params, embed, &concat_grad, Some(embed_grads), false)?;
        Ok(())
    }
}
