use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{axpy, dot, Scalar};
use crate::error::check_width;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Tanh,
}

/// Shape and activations of a dense network.
///
/// Parameter layout, layer by layer: the `out x in` weight matrix in row-major
/// order followed by the `out` biases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMlpSpec")]
pub struct MlpSpec {
    layer_widths: Vec<usize>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
}

#[derive(Deserialize)]
struct RawMlpSpec {
    layer_widths: Vec<usize>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
}

impl TryFrom<RawMlpSpec> for MlpSpec {
    type Error = Error;

    fn try_from(raw: RawMlpSpec) -> Result<Self> {
        MlpSpec::new(raw.layer_widths, raw.hidden_activation, raw.output_activation)
    }
}

impl MlpSpec {
    pub fn new(
        layer_widths: Vec<usize>,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layer_widths.len() < 2 {
            return Err(Error::config(format!(
                "an MLP needs at least an input and an output width, got {layer_widths:?}"
            )));
        }
        if layer_widths.contains(&0) {
            return Err(Error::config(format!(
                "MLP widths must be positive, got {layer_widths:?}"
            )));
        }
        Ok(Self {
            layer_widths,
            hidden_activation,
            output_activation,
        })
    }

    /// Input width, hidden widths, output width; relu hidden layers.
    pub fn relu(
        input: usize,
        hidden: &[usize],
        output: usize,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input);
        widths.extend_from_slice(hidden);
        widths.push(output);
        Self::new(widths, HiddenActivation::Relu, output_activation)
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn input_width(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_widths.last().expect("validated non-empty")
    }

    pub fn num_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// `(offset, fan_in, fan_out)` for each layer.
    pub(super) fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.layer_widths.windows(2).scan(0usize, |offset, w| {
            let start = *offset;
            *offset += w[0] * w[1] + w[1];
            Some((start, w[0], w[1]))
        })
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    ///
    /// Draws are made in `f64` and rounded, so the `f32` and `f64` parameter
    /// sets produced from one seed agree to single precision.
    pub fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![T::zero(); self.param_count()];
        for (offset, fan_in, fan_out) in self.layers() {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut params[offset..offset + fan_in * fan_out] {
                *w = T::lit(rng.random_range(-limit..limit));
            }
        }
        params
    }

    pub(super) fn check_params<T>(&self, params: &[T]) -> Result<()> {
        check_width("MLP parameters", self.param_count(), params.len())
    }

    pub fn forward<T: Scalar>(&self, params: &[T], input: &[T]) -> Result<Vec<T>> {
        self.check_params(params)?;
        check_width("MLP input", self.input_width(), input.len())?;
        let mut current = input.to_vec();
        let last = self.num_layers() - 1;
        for (k, (offset, fan_in, fan_out)) in self.layers().enumerate() {
            current = self.apply_layer(params, offset, fan_in, fan_out, &current, k == last);
        }
        Ok(current)
    }

    /// Forward pass that keeps every layer's activations for [`MlpSpec::backward`].
    pub fn forward_trace<T: Scalar>(&self, params: &[T], input: &[T]) -> Result<MlpTrace<T>> {
        self.check_params(params)?;
        check_width("MLP input", self.input_width(), input.len())?;
        let mut activations = Vec::with_capacity(self.num_layers() + 1);
        activations.push(input.to_vec());
        let last = self.num_layers() - 1;
        for (k, (offset, fan_in, fan_out)) in self.layers().enumerate() {
            let next = self.apply_layer(params, offset, fan_in, fan_out, &activations[k], k == last);
            activations.push(next);
        }
        Ok(MlpTrace { activations })
    }

    fn apply_layer<T: Scalar>(
        &self,
        params: &[T],
        offset: usize,
        fan_in: usize,
        fan_out: usize,
        input: &[T],
        is_output: bool,
    ) -> Vec<T> {
        let weights = &params[offset..offset + fan_in * fan_out];
        let biases = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        weights
            .chunks_exact(fan_in)
            .zip(biases)
            .map(|(row, b)| {
                let z = dot(row, input) + *b;
                if is_output {
                    match self.output_activation {
                        OutputActivation::Identity => z,
                        OutputActivation::Tanh => z.tanh(),
                    }
                } else {
                    match self.hidden_activation {
                        HiddenActivation::Relu => z.max(T::zero()),
                        HiddenActivation::Tanh => z.tanh(),
                    }
                }
            })
            .collect()
    }

    /// Reverse-mode pass. Parameter gradients are ACCUMULATED into
    /// `param_grads`; the gradient with respect to the input is returned.
    pub fn backward<T: Scalar>(
        &self,
        params: &[T],
        trace: &MlpTrace<T>,
        upstream: &[T],
        param_grads: &mut [T],
    ) -> Result<Vec<T>> {
        check_width("MLP parameter gradient", self.param_count(), param_grads.len())?;
        self.backward_impl(params, trace, upstream, Some(param_grads))
    }

    /// Gradient with respect to the input only.
    pub fn input_gradient<T: Scalar>(&self, params: &[T], trace: &MlpTrace<T>, upstream: &[T]) -> Result<Vec<T>> {
        self.backward_impl(params, trace, upstream, None)
    }

    fn backward_impl<T: Scalar>(
        &self,
        params: &[T],
        trace: &MlpTrace<T>,
        upstream: &[T],
        mut param_grads: Option<&mut [T]>,
    ) -> Result<Vec<T>> {
        self.check_params(params)?;
        check_width("MLP upstream gradient", self.output_width(), upstream.len())?;
        if trace.activations.len() != self.num_layers() + 1 {
            return Err(Error::contract("MLP trace does not belong to this spec"));
        }

        let output = trace.output();
        let mut delta: Vec<T> = match self.output_activation {
            OutputActivation::Identity => upstream.to_vec(),
            OutputActivation::Tanh => upstream
                .iter()
                .zip(output)
                .map(|(g, y)| *g * (T::one() - *y * *y))
                .collect(),
        };

        let layers: Vec<_> = self.layers().collect();
        for (k, &(offset, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            let input = &trace.activations[k];
            let w_end = offset + fan_in * fan_out;
            if let Some(grads) = param_grads.as_deref_mut() {
                let (grad_w, grad_b) = grads[offset..w_end + fan_out].split_at_mut(fan_in * fan_out);
                for ((g_row, gb), d) in grad_w.chunks_exact_mut(fan_in).zip(grad_b).zip(&delta) {
                    axpy(*d, input, g_row);
                    *gb = *gb + *d;
                }
            }

            let weights = &params[offset..w_end];
            let mut input_grad = vec![T::zero(); fan_in];
            for (row, d) in weights.chunks_exact(fan_in).zip(&delta) {
                axpy(*d, row, &mut input_grad);
            }
            if k > 0 {
                for (g, a) in input_grad.iter_mut().zip(input) {
                    *g = match self.hidden_activation {
                        HiddenActivation::Relu => {
                            if *a > T::zero() {
                                *g
                            } else {
                                T::zero()
                            }
                        }
                        HiddenActivation::Tanh => *g * (T::one() - *a * *a),
                    };
                }
            }
            delta = input_grad;
        }
        Ok(delta)
    }
}

/// Activations recorded by [`MlpSpec::forward_trace`]: the input followed by
/// each layer's post-activation output.
#[derive(Debug, Clone)]
pub struct MlpTrace<T> {
    activations: Vec<Vec<T>>,
}

impl<T> MlpTrace<T> {
    pub fn output(&self) -> &[T] {
        self.activations.last().expect("trace holds at least the input")
    }

    pub fn input(&self) -> &[T] {
        &self.activations[0]
    }
}

/// A spec bundled with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub spec: MlpSpec,
    pub params: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn init(spec: MlpSpec, seed: u64) -> Self {
        let params = spec.init(seed);
        Self { spec, params }
    }

    pub fn from_params(spec: MlpSpec, params: Vec<T>) -> Result<Self> {
        spec.check_params(&params)?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::contract("MLP parameters must be finite"));
        }
        Ok(Self { spec, params })
    }

    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        self.spec.forward(&self.params, input)
    }

    /// Returns `(parameter gradients, input gradient)` for `upstream`
    /// contracted with the Jacobian at `input`.
    pub fn backward(&self, input: &[T], upstream: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let trace = self.spec.forward_trace(&self.params, input)?;
        let mut grads = vec![T::zero(); self.params.len()];
        let input_grad = self.spec.backward(&self.params, &trace, upstream, &mut grads)?;
        Ok((grads, input_grad))
    }
}
