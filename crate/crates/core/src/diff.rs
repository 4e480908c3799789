//! Central finite differences with one level of Richardson extrapolation.

use std::ops::{Mul, Sub};

use crate::error::Result;
use crate::linalg::{c, C};

/// Default step for derivatives of computed (flow-derived) scalars.
pub const DEFAULT_STEP: f64 = 1e-4;

fn central<T, F>(f: &mut F, h: f64) -> Result<T>
where
    T: Sub<Output = T> + Mul<C, Output = T>,
    F: FnMut(f64) -> Result<T>,
{
    let plus = f(h)?;
    let minus = f(-h)?;
    Ok((plus - minus) * c(0.5 / h))
}

/// Derivative at 0 of `f`, from central differences at `h` and `h/2`
/// combined as `(4 D(h/2) − D(h))/3`.
pub fn richardson<T, F>(mut f: F, h: f64) -> Result<T>
where
    T: Sub<Output = T> + Mul<C, Output = T>,
    F: FnMut(f64) -> Result<T>,
{
    let coarse = central(&mut f, h)?;
    let fine = central(&mut f, 0.5 * h)?;
    Ok(fine * c(4.0 / 3.0) - coarse * c(1.0 / 3.0))
}

/// Plain central difference, used where the caller controls the step budget.
pub fn central_difference<T, F>(mut f: F, h: f64) -> Result<T>
where
    T: Sub<Output = T> + Mul<C, Output = T>,
    F: FnMut(f64) -> Result<T>,
{
    central(&mut f, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_fourth_order() {
        let d: C = richardson(|t| Ok(C::new(0.3 + t, 0.2).exp()), 1e-2).unwrap();
        let exact = C::new(0.3, 0.2).exp();
        assert!((d - exact).norm() < 1e-9);
        let plain: C = central_difference(|t| Ok(C::new(0.3 + t, 0.2).exp()), 1e-2).unwrap();
        assert!((plain - exact).norm() > 1e-6);
    }
}
