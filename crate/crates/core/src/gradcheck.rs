//! Central finite differences for checking analytic derivatives.
//!
//! Each derivative is a Richardson extrapolation of central differences at
//! steps `h` and `h/2`, with `h = max(1e-3 |x_i|, 1e-5)`. The extrapolated
//! rule has `O(h^4)` truncation error, which allows a step large enough to
//! keep rounding noise small where the derivative is tiny next to the value
//! being differenced. Errors are reported norm-wise:
//! `max_i |a_i - b_i| / max_i |b_i|`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::model::{DifferentiableCost, Point};

pub fn step_for(xi: f64) -> f64 {
    (1e-3 * xi.abs()).max(1e-5)
}

fn extrapolated<T, F>(f: F, h: f64) -> Result<T>
where
    F: Fn(f64) -> Result<T>,
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let wide = (f(h)? - f(-h)?) * (1.0 / (2.0 * h));
    let narrow = (f(0.5 * h)? - f(-0.5 * h)?) * (1.0 / h);
    Ok(narrow * (4.0 / 3.0) - wide * (1.0 / 3.0))
}

/// Finite-difference derivative of a scalar function.
pub fn derivative_1d(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    extrapolated(|d| Ok(f(x + d)), step_for(x)).expect("infallible")
}

/// Finite-difference gradient from function values.
pub fn gradient<C: DifferentiableCost + ?Sized>(f: &C, x: &Point) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        g[i] = extrapolated(
            |d| {
                let mut xp = x.clone();
                xp[i] += d;
                f.value(&xp)
            },
            step_for(x[i]),
        )?;
    }
    Ok(g)
}

/// Finite-difference Hessian from the analytic gradient, symmetrised.
pub fn hessian<C: DifferentiableCost + ?Sized>(f: &C, x: &Point) -> Result<DMatrix<f64>> {
    let k = x.len();
    let mut h = DMatrix::zeros(k, k);
    for j in 0..k {
        let col = extrapolated(
            |d| {
                let mut xp = x.clone();
                xp[j] += d;
                f.gradient(&xp)
            },
            step_for(x[j]),
        )?;
        h.set_column(j, &col);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Norm-wise relative error of `approx` against `reference`.
pub fn relative_error<'a>(
    approx: impl IntoIterator<Item = &'a f64>,
    reference: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (a, b) in approx.into_iter().zip(reference) {
        diff = diff.max((a - b).abs());
        scale = scale.max(b.abs());
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Worst of the gradient and Hessian errors of `f` at `x`.
pub fn check_derivatives<C: DifferentiableCost + ?Sized>(f: &C, x: &Point) -> Result<f64> {
    let g = f.gradient(x)?;
    let g_fd = gradient(f, x)?;
    let mut h = f.hessian(x)?;
    h.fill_upper_triangle_with_lower_triangle();
    let h_fd = hessian(f, x)?;
    Ok(relative_error(g.iter(), g_fd.iter()).max(relative_error(h.iter(), h_fd.iter())))
}
