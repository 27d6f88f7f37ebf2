//! Central-difference gradient oracle.

use super::Scalar;

/// Central differences `(f(p + eps e_i) - f(p - eps e_i)) / (2 eps)` for
/// every coordinate `i` of `params`.
pub fn finite_diff_gradients<T, F>(mut function: F, params: &[T], epsilon: T) -> Vec<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    assert!(epsilon > T::zero(), "finite-difference epsilon must be positive");
    let mut probe = params.to_vec();
    let two_eps = epsilon + epsilon;
    (0..params.len())
        .map(|i| {
            let original = probe[i];
            probe[i] = original + epsilon;
            let plus = function(&probe);
            probe[i] = original - epsilon;
            let minus = function(&probe);
            probe[i] = original;
            (plus - minus) / two_eps
        })
        .collect()
}

/// `||a - b|| / max(||a||, ||b||)` in the Euclidean norm, 0 when both are zero.
pub fn relative_error<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_error needs equal lengths");
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x.as_f64() - y.as_f64()));
    let scale = norm(&mut a.iter().map(|x| x.as_f64())).max(norm(&mut b.iter().map(|x| x.as_f64())));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
