//! Central differences with one Richardson step.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::{Result, C64};

/// Default step for a parameter at `x`: `1e-4 max(1, |x|)`.
pub fn default_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1.0)
}

/// `(4 D(h/2) - D(h)) / 3` for vector-valued `f`, with `D` the central
/// difference quotient.
pub fn richardson_vec(mut f: impl FnMut(f64) -> Result<Vec<C64>>, x: f64, h: f64) -> Result<Vec<C64>> {
    let mut central = |h: f64| -> Result<Vec<C64>> {
        let plus = f(x + h)?;
        let minus = f(x - h)?;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect())
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

pub fn richardson_scalar(mut f: impl FnMut(f64) -> Result<C64>, x: f64, h: f64) -> Result<C64> {
    Ok(richardson_vec(|s| Ok(alloc::vec![f(s)?]), x, h)?[0])
}

pub fn richardson_matrix(mut f: impl FnMut(f64) -> Result<Matrix>, x: f64, h: f64) -> Result<Matrix> {
    let mut shape = (0, 0);
    let v = richardson_vec(
        |s| {
            let m = f(s)?;
            shape = (m.rows(), m.cols());
            Ok(m.as_slice().to_vec())
        },
        x,
        h,
    )?;
    let (rows, cols) = shape;
    Ok(Matrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_low_degree_and_accurate_on_exp() {
        let d = richardson_scalar(|x| Ok(C64::new(x * x * x - 2.0 * x, 0.0)), 0.7, 1e-2).unwrap();
        assert!((d.re - (3.0 * 0.49 - 2.0)).abs() < 1e-12);
        let d = richardson_scalar(|x| Ok(C64::new(x.exp(), x.sin())), 0.3, default_step(0.3)).unwrap();
        assert!((d - C64::new(0.3f64.exp(), 0.3f64.cos())).norm() < 1e-10);
    }

    #[test]
    fn matrix_shape_kept() {
        let m = richardson_matrix(
            |x| Ok(Matrix::from_fn(2, 3, |i, j| C64::new(x * (i + 2 * j) as f64, 0.0))),
            1.0,
            1e-3,
        )
        .unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert!((m[(1, 2)].re - 5.0).abs() < 1e-10);
    }
}
