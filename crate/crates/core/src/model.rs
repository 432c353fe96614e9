//! Cost-function interface and the second-order Taylor model built from it.
//!
//! Every optimiser in this crate works against [`DifferentiableCost`] and the
//! local [`QuadraticModel`]
//!
//! ```text
//! m(x) = f0 + g0'(x - x0) + 1/2 (x - x0)' H0 (x - x0)
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point in the optimisation space.
pub type Point = DVector<f64>;

/// A twice-differentiable cost on `R^K`.
///
/// Implementations must be pure. `hessian` only needs to fill the lower
/// triangle; [`taylor_at`] mirrors it before building a model.
pub trait DifferentiableCost: Sync {
    fn dimension(&self) -> usize;

    fn value(&self, x: &Point) -> Result<f64>;

    fn gradient(&self, x: &Point) -> Result<DVector<f64>>;

    fn hessian(&self, x: &Point) -> Result<DMatrix<f64>>;
}

impl<C: DifferentiableCost + ?Sized> DifferentiableCost for &C {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &Point) -> Result<DVector<f64>> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &Point) -> Result<DMatrix<f64>> {
        (**self).hessian(x)
    }
}

/// How the predicted change in the improvement ratio is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    /// `g'p + 1/2 p'Hp`, the change predicted by the quadratic model.
    #[default]
    Model,
    /// `g'p + p'Hp`, as written in the QuAnCO listing (no one-half factor).
    Paper,
}

/// Second-order Taylor model of a cost around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    center: Point,
    f0: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl QuadraticModel {
    /// Builds a model, validating shapes, finiteness and symmetry of `hess`.
    pub fn new(center: Point, f0: f64, grad: DVector<f64>, hess: DMatrix<f64>) -> Result<Self> {
        let k = center.len();
        if k == 0 {
            return Err(Error::InvalidArgument("model dimension must be at least 1".into()));
        }
        check_dim(k, grad.len())?;
        check_dim(k, hess.nrows())?;
        check_dim(k, hess.ncols())?;
        if !center.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("model center"));
        }
        if !f0.is_finite() {
            return Err(Error::NonFinite("model value"));
        }
        if !grad.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("model gradient"));
        }
        if !hess.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("model Hessian"));
        }
        let scale = hess.amax().max(f64::MIN_POSITIVE);
        let mut asym = 0.0f64;
        for j in 0..k {
            for i in (j + 1)..k {
                asym = asym.max((hess[(i, j)] - hess[(j, i)]).abs() / scale);
            }
        }
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { center, f0, grad, hess })
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn grad(&self) -> &DVector<f64> {
        &self.grad
    }

    pub fn hess(&self) -> &DMatrix<f64> {
        &self.hess
    }

    /// `g'p + 1/2 p'Hp` without dimension checks.
    pub(crate) fn change_along(&self, p: &DVector<f64>) -> f64 {
        self.grad.dot(p) + 0.5 * quad_form(&self.hess, p)
    }
}

pub(crate) fn quad_form(h: &DMatrix<f64>, p: &DVector<f64>) -> f64 {
    // symmetric, so p'Hp = sum_j p_j (H col_j . p)
    let mut acc = 0.0;
    for (j, &pj) in p.iter().enumerate() {
        if pj != 0.0 {
            acc += pj * h.column(j).dot(p);
        }
    }
    acc
}

/// Evaluates the model at `x`.
pub fn eval_model(m: &QuadraticModel, x: &Point) -> Result<f64> {
    check_dim(m.dimension(), x.len())?;
    let p = x - &m.center;
    Ok(m.f0 + m.change_along(&p))
}

/// Predicted change of the cost along step `p`, in the requested mode.
pub fn model_decrease(m: &QuadraticModel, p: &DVector<f64>, mode: RhoMode) -> Result<f64> {
    check_dim(m.dimension(), p.len())?;
    let linear = m.grad.dot(p);
    let curvature = quad_form(&m.hess, p);
    Ok(match mode {
        RhoMode::Model => linear + 0.5 * curvature,
        RhoMode::Paper => linear + curvature,
    })
}

/// Packages value, gradient and Hessian of `f` at `x0` into a model.
///
/// The lower triangle of the returned Hessian is mirrored into the upper one.
/// Non-finite derivatives are reported as [`Error::Domain`].
pub fn taylor_at<C: DifferentiableCost + ?Sized>(f: &C, x0: &Point) -> Result<QuadraticModel> {
    check_dim(f.dimension(), x0.len())?;
    let f0 = f.value(x0)?;
    let grad = f.gradient(x0)?;
    let mut hess = f.hessian(x0)?;
    check_dim(x0.len(), grad.len())?;
    check_dim(x0.len(), hess.nrows())?;
    if !f0.is_finite() || grad.iter().any(|v| !v.is_finite()) || hess.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite derivative values at model center".into()));
    }
    hess.fill_upper_triangle_with_lower_triangle();
    QuadraticModel::new(x0.clone(), f0, grad, hess)
}

/// `1/2 x'Ax + b'x + c` as a [`DifferentiableCost`]; handy for tests and docs.
#[derive(Debug, Clone)]
pub struct QuadraticCost {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticCost {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        check_dim(b.len(), a.nrows())?;
        check_dim(b.len(), a.ncols())?;
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, b, c })
    }
}

impl DifferentiableCost for QuadraticCost {
    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        check_dim(self.dimension(), x.len())?;
        Ok(0.5 * quad_form(&self.a, x) + self.b.dot(x) + self.c)
    }

    fn gradient(&self, x: &Point) -> Result<DVector<f64>> {
        check_dim(self.dimension(), x.len())?;
        Ok(&self.a * x + &self.b)
    }

    fn hessian(&self, x: &Point) -> Result<DMatrix<f64>> {
        check_dim(self.dimension(), x.len())?;
        Ok(self.a.clone())
    }
}
