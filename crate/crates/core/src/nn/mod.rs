//! Dense feed-forward networks with hand-written reverse-mode gradients.
//!
//! Parameters live in flat slices whose layout is owned by a spec type
//! ([`MlpSpec`] here, the encoder layouts elsewhere). Keeping parameters flat
//! lets Adam, polyak averaging, checkpointing and the finite-difference oracle
//! treat every network the same way.
//!
//! All numerics are generic over [`Scalar`] so the same code runs in single
//! precision for training and in double precision for gradient checks.

mod adam;
mod batch;
pub mod checkpoint;
mod gradcheck;
mod mlp;
mod polyak;

pub use adam::{AdamConfig, AdamState};
pub use batch::MlpBatchTrace;
pub use gradcheck::{finite_diff_gradients, relative_error};
pub use mlp::{HiddenActivation, Mlp, MlpSpec, MlpTrace, OutputActivation};
pub use polyak::polyak_update;

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type for parameters and activations.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Dot product with eight independent accumulators so the loop vectorizes.
/// The summation order is fixed, which keeps results bit-stable.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let a_chunks = a.chunks_exact(8);
    let b_chunks = b.chunks_exact(8);
    let a_tail = a_chunks.remainder();
    let b_tail = b_chunks.remainder();
    for (ca, cb) in a_chunks.zip(b_chunks) {
        for k in 0..8 {
            acc[k] = acc[k] + ca[k] * cb[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in a_tail.iter().zip(b_tail) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

/// `out += sum_k coeffs[k] * matrix_row_k`, where `matrix` holds
/// `coeffs.len()` rows of width `out.len()`. Columns are processed in blocks
/// held in registers, four matrix rows at a time.
pub(crate) fn accumulate_rows<T: Scalar>(coeffs: &[T], matrix: &[T], out: &mut [T]) {
    const BLOCK: usize = 16;
    let n = out.len();
    debug_assert_eq!(matrix.len(), coeffs.len() * n);
    let quads = coeffs.len() / 4;
    let (head_coeffs, tail_coeffs) = coeffs.split_at(quads * 4);
    let (head_rows, tail_rows) = matrix.split_at(quads * 4 * n);
    let mut start = 0;
    while start + BLOCK <= n {
        let mut acc = [T::zero(); BLOCK];
        acc.copy_from_slice(&out[start..start + BLOCK]);
        for (c, rows) in head_coeffs.chunks_exact(4).zip(head_rows.chunks_exact(4 * n)) {
            let w0 = &rows[start..start + BLOCK];
            let w1 = &rows[n + start..n + start + BLOCK];
            let w2 = &rows[2 * n + start..2 * n + start + BLOCK];
            let w3 = &rows[3 * n + start..3 * n + start + BLOCK];
            for k in 0..BLOCK {
                acc[k] = acc[k] + (c[0] * w0[k] + c[1] * w1[k]) + (c[2] * w2[k] + c[3] * w3[k]);
            }
        }
        for (c, row) in tail_coeffs.iter().zip(tail_rows.chunks_exact(n)) {
            let w = &row[start..start + BLOCK];
            for k in 0..BLOCK {
                acc[k] = acc[k] + *c * w[k];
            }
        }
        out[start..start + BLOCK].copy_from_slice(&acc);
        start += BLOCK;
    }
    if start < n {
        for (c, row) in coeffs.iter().zip(matrix.chunks_exact(n)) {
            if *c != T::zero() {
                axpy(*c, &row[start..], &mut out[start..]);
            }
        }
    }
}

/// Mixes a stream index into a base seed (splitmix64 finalizer), giving
/// decorrelated seeds for the sub-networks and RNG streams of one run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Casts a slice between scalar types.
pub fn cast_slice<A: Scalar, B: Scalar>(values: &[A]) -> Vec<B> {
    values.iter().map(|v| B::lit(v.as_f64())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_sum_on_odd_lengths() {
        for len in [0usize, 1, 7, 8, 9, 23] {
            let a: Vec<f64> = (0..len).map(|i| i as f64 * 0.5 - 3.0).collect();
            let b: Vec<f64> = (0..len).map(|i| 1.0 + i as f64).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!((dot(&a, &b) - naive).abs() < 1e-9);
        }
    }
}
