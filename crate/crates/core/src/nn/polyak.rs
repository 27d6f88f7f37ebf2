use super::Scalar;
use crate::error::check_width;
use crate::{Error, Result};

/// `target <- tau * source + (1 - tau) * target`, element-wise.
///
/// `tau == 0` and `tau == 1` are exact: the target is left untouched or
/// becomes a bitwise copy of the source.
pub fn polyak_update<T: Scalar>(target: &mut [T], source: &[T], tau: T) -> Result<()> {
    check_width("polyak source", target.len(), source.len())?;
    if !(tau >= T::zero() && tau <= T::one()) {
        return Err(Error::contract(format!(
            "polyak tau must lie in [0, 1], got {tau:?}"
        )));
    }
    if tau == T::zero() {
        return Ok(());
    }
    if tau == T::one() {
        target.copy_from_slice(source);
        return Ok(());
    }
    let keep = T::one() - tau;
    for (t, s) in target.iter_mut().zip(source) {
        *t = tau * *s + keep * *t;
    }
    Ok(())
}
