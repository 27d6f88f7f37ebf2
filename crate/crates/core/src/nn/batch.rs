//! Row-batched forward and backward passes for [`MlpSpec`].
//!
//! A batch is a row-major `rows x width` matrix. Results equal the
//! single-row passes up to floating-point summation order.

use super::mlp::{HiddenActivation, MlpSpec, OutputActivation};
use super::{accumulate_rows, axpy, Scalar};
use crate::error::check_width;
use crate::{Error, Result};

/// Activations of a batched forward pass: the input matrix followed by each
/// layer's post-activation output matrix.
#[derive(Debug, Clone)]
pub struct MlpBatchTrace<T> {
    rows: usize,
    activations: Vec<Vec<T>>,
}

impl<T> MlpBatchTrace<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn input(&self) -> &[T] {
        &self.activations[0]
    }

    pub fn output(&self) -> &[T] {
        self.activations.last().expect("trace holds at least the input")
    }
}

fn transpose<T: Scalar>(m: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut t = vec![T::zero(); m.len()];
    for (r, row) in m.chunks_exact(cols).enumerate() {
        for (c, v) in row.iter().enumerate() {
            t[c * rows + r] = *v;
        }
    }
    t
}

impl MlpSpec {
    fn activate<T: Scalar>(&self, z: T, is_output: bool) -> T {
        if is_output {
            match self.output_activation() {
                OutputActivation::Identity => z,
                OutputActivation::Tanh => z.tanh(),
            }
        } else {
            match self.hidden_activation() {
                HiddenActivation::Relu => z.max(T::zero()),
                HiddenActivation::Tanh => z.tanh(),
            }
        }
    }

    pub fn forward_batch<T: Scalar>(&self, params: &[T], inputs: &[T], rows: usize) -> Result<MlpBatchTrace<T>> {
        self.check_params(params)?;
        check_width("MLP batch input", rows * self.input_width(), inputs.len())?;
        let mut activations = Vec::with_capacity(self.num_layers() + 1);
        activations.push(inputs.to_vec());
        let last = self.num_layers() - 1;
        for (k, (offset, fan_in, fan_out)) in self.layers().enumerate() {
            let w_end = offset + fan_in * fan_out;
            let weights_t = transpose(&params[offset..w_end], fan_out, fan_in);
            let biases = &params[w_end..w_end + fan_out];
            let mut out = vec![T::zero(); rows * fan_out];
            for (x, y) in activations[k].chunks_exact(fan_in).zip(out.chunks_exact_mut(fan_out)) {
                y.copy_from_slice(biases);
                accumulate_rows(x, &weights_t, y);
                for v in y.iter_mut() {
                    *v = self.activate(*v, k == last);
                }
            }
            activations.push(out);
        }
        Ok(MlpBatchTrace { rows, activations })
    }

    /// Batched reverse pass. Parameter gradients (summed over rows) are
    /// accumulated into `param_grads` when given; the input-gradient matrix is
    /// returned when `want_input_grad` is set.
    pub fn backward_batch<T: Scalar>(
        &self,
        params: &[T],
        trace: &MlpBatchTrace<T>,
        upstream: &[T],
        mut param_grads: Option<&mut [T]>,
        want_input_grad: bool,
    ) -> Result<Option<Vec<T>>> {
        self.check_params(params)?;
        let rows = trace.rows;
        check_width("MLP batch upstream gradient", rows * self.output_width(), upstream.len())?;
        if let Some(grads) = param_grads.as_deref() {
            check_width("MLP parameter gradient", self.param_count(), grads.len())?;
        }
        if trace.activations.len() != self.num_layers() + 1 {
            return Err(Error::contract("MLP trace does not belong to this spec"));
        }

        let mut delta: Vec<T> = match self.output_activation() {
            OutputActivation::Identity => upstream.to_vec(),
            OutputActivation::Tanh => upstream
                .iter()
                .zip(trace.output())
                .map(|(g, y)| *g * (T::one() - *y * *y))
                .collect(),
        };

        let layers: Vec<_> = self.layers().collect();
        for (k, &(offset, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            let input = &trace.activations[k];
            let w_end = offset + fan_in * fan_out;
            if let Some(grads) = param_grads.as_deref_mut() {
                let mut grad_w_t = vec![T::zero(); fan_in * fan_out];
                let (grad_w, grad_b) = grads[offset..w_end + fan_out].split_at_mut(fan_in * fan_out);
                let mut column = vec![T::zero(); rows];
                for (i, g_col) in grad_w_t.chunks_exact_mut(fan_out).enumerate() {
                    for (c, x) in column.iter_mut().zip(input.chunks_exact(fan_in)) {
                        *c = x[i];
                    }
                    accumulate_rows(&column, &delta, g_col);
                }
                for d in delta.chunks_exact(fan_out) {
                    axpy(T::one(), d, grad_b);
                }
                for (i, g_col) in grad_w_t.chunks_exact(fan_out).enumerate() {
                    for (o, g) in g_col.iter().enumerate() {
                        grad_w[o * fan_in + i] = grad_w[o * fan_in + i] + *g;
                    }
                }
            }
            if k == 0 && !want_input_grad {
                return Ok(None);
            }

            let weights = &params[offset..w_end];
            let mut input_grad = vec![T::zero(); rows * fan_in];
            for (d, g) in delta.chunks_exact(fan_out).zip(input_grad.chunks_exact_mut(fan_in)) {
                accumulate_rows(d, weights, g);
            }
            if k > 0 {
                for (g, a) in input_grad.iter_mut().zip(input) {
                    *g = match self.hidden_activation() {
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
        Ok(Some(delta))
    }
}
