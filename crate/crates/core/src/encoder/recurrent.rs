use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HistoryWindow;
use crate::nn::{axpy, dot, Scalar};
use crate::Result;

/// Single-layer GRU baseline encoder.
///
/// Per step, from the zero initial state:
///
/// ```text
/// z  = sigmoid(Wz x + Uz h + bz)
/// r  = sigmoid(Wr x + Ur h + br)
/// n  = tanh(Wn x + Un (r * h) + bn)
/// h' = (1 - z) * n + z * h
/// ```
///
/// Parameter layout: `W` (3c x n, gate rows z, r, n), `U` (3c x c), `b` (3c).
#[derive(Debug, Clone, PartialEq)]
pub struct GruEncoder {
    input_width: usize,
    hidden_width: usize,
}

#[derive(Debug, Clone)]
pub struct GruTrace<T> {
    inputs: Vec<Vec<T>>,
    /// `hidden[t]` is the state before step `t`; the last entry is the output.
    hidden: Vec<Vec<T>>,
    update: Vec<Vec<T>>,
    reset: Vec<Vec<T>>,
    candidate: Vec<Vec<T>>,
}

impl<T: Scalar> GruTrace<T> {
    pub fn final_hidden(&self) -> &[T] {
        self.hidden.last().expect("trace has the initial state")
    }
}

fn gate_row<T>(m: &[T], width: usize, hidden: usize, gate: usize, i: usize) -> &[T] {
    let start = (gate * hidden + i) * width;
    &m[start..start + width]
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

impl GruEncoder {
    pub fn new(input_width: usize, hidden_width: usize) -> Self {
        Self {
            input_width,
            hidden_width,
        }
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn param_count(&self) -> usize {
        let c = self.hidden_width;
        3 * c * self.input_width + 3 * c * c + 3 * c
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let c = self.hidden_width;
        let w = 3 * c * self.input_width;
        let u = w + 3 * c * c;
        (0, w, u)
    }

    pub(super) fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        let (n, c) = (self.input_width, self.hidden_width);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![T::zero(); self.param_count()];
        let (_, u_off, b_off) = self.offsets();
        let w_limit = (6.0 / (n + c) as f64).sqrt();
        let u_limit = (6.0 / (2 * c) as f64).sqrt();
        for p in &mut params[..u_off] {
            *p = T::lit(rng.random_range(-w_limit..w_limit));
        }
        for p in &mut params[u_off..b_off] {
            *p = T::lit(rng.random_range(-u_limit..u_limit));
        }
        params
    }

    pub(super) fn encode<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>) -> Result<Vec<T>> {
        Ok(self.forward_trace(params, window).final_hidden().to_vec())
    }

    pub(super) fn forward_trace<T: Scalar>(&self, params: &[T], window: &HistoryWindow<T>) -> GruTrace<T> {
        let (n, c) = (self.input_width, self.hidden_width);
        let (_, u_off, b_off) = self.offsets();
        let w = &params[..u_off];
        let u = &params[u_off..b_off];
        let b = &params[b_off..];

        let mut trace = GruTrace {
            inputs: Vec::new(),
            hidden: vec![vec![T::zero(); c]],
            update: Vec::new(),
            reset: Vec::new(),
            candidate: Vec::new(),
        };
        for x in window.rows() {
            let h = trace.hidden.last().expect("initial state").clone();
            let z: Vec<T> = (0..c)
                .map(|i| sigmoid(dot(gate_row(w, n, c, 0, i), x) + dot(gate_row(u, c, c, 0, i), &h) + b[i]))
                .collect();
            let r: Vec<T> = (0..c)
                .map(|i| sigmoid(dot(gate_row(w, n, c, 1, i), x) + dot(gate_row(u, c, c, 1, i), &h) + b[c + i]))
                .collect();
            let rh: Vec<T> = r.iter().zip(&h).map(|(a, b)| *a * *b).collect();
            let cand: Vec<T> = (0..c)
                .map(|i| (dot(gate_row(w, n, c, 2, i), x) + dot(gate_row(u, c, c, 2, i), &rh) + b[2 * c + i]).tanh())
                .collect();
            let next: Vec<T> = (0..c)
                .map(|i| (T::one() - z[i]) * cand[i] + z[i] * h[i])
                .collect();
            trace.inputs.push(x.to_vec());
            trace.update.push(z);
            trace.reset.push(r);
            trace.candidate.push(cand);
            trace.hidden.push(next);
        }
        trace
    }

    /// Backpropagation through time; returns the flat window gradient.
    pub(super) fn backward<T: Scalar>(
        &self,
        params: &[T],
        trace: &GruTrace<T>,
        upstream: &[T],
        grads: &mut [T],
    ) -> Vec<T> {
        let (n, c) = (self.input_width, self.hidden_width);
        let (_, u_off, b_off) = self.offsets();
        let w = &params[..u_off];
        let u = &params[u_off..b_off];
        let (gw, rest) = grads.split_at_mut(u_off);
        let (gu, gb) = rest.split_at_mut(b_off - u_off);
        let one = T::one();

        let steps = trace.inputs.len();
        let mut window_grad = vec![T::zero(); steps * n];
        let mut dh = upstream.to_vec();
        for t in (0..steps).rev() {
            let x = &trace.inputs[t];
            let h = &trace.hidden[t];
            let z = &trace.update[t];
            let r = &trace.reset[t];
            let cand = &trace.candidate[t];
            let rh: Vec<T> = r.iter().zip(h).map(|(a, b)| *a * *b).collect();

            let mut dh_prev: Vec<T> = dh.iter().zip(z).map(|(g, zi)| *g * *zi).collect();
            let da_n: Vec<T> = (0..c)
                .map(|i| dh[i] * (one - z[i]) * (one - cand[i] * cand[i]))
                .collect();
            let da_z: Vec<T> = (0..c)
                .map(|i| dh[i] * (h[i] - cand[i]) * z[i] * (one - z[i]))
                .collect();

            let mut d_rh = vec![T::zero(); c];
            for i in 0..c {
                let row = (2 * c + i) * c;
                axpy(da_n[i], &u[row..row + c], &mut d_rh);
            }
            let da_r: Vec<T> = (0..c)
                .map(|i| d_rh[i] * h[i] * r[i] * (one - r[i]))
                .collect();
            for i in 0..c {
                dh_prev[i] = dh_prev[i] + d_rh[i] * r[i];
            }

            let dx = &mut window_grad[t * n..(t + 1) * n];
            for (gate, (da, hidden_input)) in [(&da_z, h), (&da_r, h), (&da_n, &rh)].into_iter().enumerate() {
                for i in 0..c {
                    let g = da[i];
                    let wr = (gate * c + i) * n;
                    let ur = (gate * c + i) * c;
                    axpy(g, x, &mut gw[wr..wr + n]);
                    axpy(g, hidden_input, &mut gu[ur..ur + c]);
                    gb[gate * c + i] = gb[gate * c + i] + g;
                    axpy(g, &w[wr..wr + n], dx);
                    if gate < 2 {
                        axpy(g, &u[ur..ur + c], &mut dh_prev);
                    }
                }
            }
            dh = dh_prev;
        }
        window_grad
    }
}
