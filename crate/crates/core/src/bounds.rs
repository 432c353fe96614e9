//! Removal of bound constraints by an element-wise change of variables.
//!
//! Each coordinate gets a smooth map `eta_k: R -> (a_k, b_k)`:
//!
//! | bounds            | `eta(y)`                    |
//! |-------------------|-----------------------------|
//! | none              | `y`                         |
//! | lower `a`         | `a + e^y`                   |
//! | upper `b`         | `b - e^y`                   |
//! | box `[a, b]`      | `a + (b - a) / (1 + e^-y)`  |
//!
//! [`TransformedCost`] wraps a cost on `x` and exposes `F(y) = f(eta(y))` with
//! chain-rule derivatives, so unconstrained optimisers can run in `y`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::model::{DifferentiableCost, Point};

/// Beyond this `|y|` the exponentials are evaluated at the threshold instead.
pub const SATURATION_THRESHOLD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Free,
    Lower(f64),
    Upper(f64),
    Boxed(f64, f64),
}

/// Per-coordinate lower/upper bounds; infinite entries mean "unbounded".
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidArgument("bound spec needs at least one coordinate".into()));
        }
        for (k, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if a.is_nan() || b.is_nan() || a == f64::INFINITY || b == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!("invalid bounds [{a}, {b}] at coordinate {k}")));
            }
            if a >= b {
                return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}] at coordinate {k}")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(k: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; k], upper: vec![f64::INFINITY; k] }
    }

    /// `x_k >= a` for every coordinate.
    pub fn lower_only(k: usize, a: f64) -> Self {
        Self { lower: vec![a; k], upper: vec![f64::INFINITY; k] }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn kind(&self, k: usize) -> Kind {
        match (self.lower[k].is_finite(), self.upper[k].is_finite()) {
            (false, false) => Kind::Free,
            (true, false) => Kind::Lower(self.lower[k]),
            (false, true) => Kind::Upper(self.upper[k]),
            (true, true) => Kind::Boxed(self.lower[k], self.upper[k]),
        }
    }
}

/// Output of [`eta`]: the mapped point and whether any coordinate saturated.
#[derive(Debug, Clone, PartialEq)]
pub struct Mapped {
    pub x: Point,
    pub saturated: bool,
}

fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

// (eta, eta', eta'', saturated)
fn eval_kind(kind: Kind, y: f64) -> (f64, f64, f64, bool) {
    if matches!(kind, Kind::Free) {
        return (y, 1.0, 0.0, false);
    }
    let mut saturated = y.abs() > SATURATION_THRESHOLD;
    let y = y.clamp(-SATURATION_THRESHOLD, SATURATION_THRESHOLD);
    let (mut x, d1, d2) = match kind {
        Kind::Free => unreachable!(),
        Kind::Lower(a) => {
            let e = y.exp();
            (a + e, e, e)
        }
        Kind::Upper(b) => {
            let e = y.exp();
            (b - e, -e, -e)
        }
        Kind::Boxed(a, b) => {
            let s = logistic(y);
            let w = b - a;
            let d1 = w * s * (1.0 - s);
            (a + w * s, d1, d1 * (1.0 - 2.0 * s))
        }
    };
    // keep the image strictly inside the open interval
    let (lo, hi) = match kind {
        Kind::Lower(a) => (a, f64::INFINITY),
        Kind::Upper(b) => (f64::NEG_INFINITY, b),
        Kind::Boxed(a, b) => (a, b),
        Kind::Free => unreachable!(),
    };
    if x <= lo {
        x = lo.next_up();
        saturated = true;
    } else if x >= hi {
        x = hi.next_down();
        saturated = true;
    }
    (x, d1, d2, saturated)
}

/// Maps `y` into the feasible box.
pub fn eta(spec: &BoundSpec, y: &Point) -> Result<Mapped> {
    check_dim(spec.dimension(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("transformed coordinates"));
    }
    let mut saturated = false;
    let x = DVector::from_fn(y.len(), |k, _| {
        let (x, _, _, sat) = eval_kind(spec.kind(k), y[k]);
        saturated |= sat;
        x
    });
    if saturated {
        log::debug!("bound transform saturated at |y| > {SATURATION_THRESHOLD}");
    }
    Ok(Mapped { x, saturated })
}

/// Element-wise first and second derivatives of `eta` at `y`.
pub fn eta_derivatives(spec: &BoundSpec, y: &Point) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim(spec.dimension(), y.len())?;
    let mut d1 = DVector::zeros(y.len());
    let mut d2 = DVector::zeros(y.len());
    for k in 0..y.len() {
        let (_, a, b, _) = eval_kind(spec.kind(k), y[k]);
        d1[k] = a;
        d2[k] = b;
    }
    Ok((d1, d2))
}

/// Inverse of [`eta`]; `x` must lie strictly inside the bounds.
pub fn eta_inverse(spec: &BoundSpec, x: &Point) -> Result<Point> {
    check_dim(spec.dimension(), x.len())?;
    let mut y = DVector::zeros(x.len());
    for k in 0..x.len() {
        let xk = x[k];
        let not_interior = Error::NotInterior { index: k, value: xk };
        if !xk.is_finite() {
            return Err(not_interior);
        }
        y[k] = match spec.kind(k) {
            Kind::Free => xk,
            Kind::Lower(a) if xk > a => (xk - a).ln(),
            Kind::Upper(b) if xk < b => (b - xk).ln(),
            Kind::Boxed(a, b) if xk > a && xk < b => ((xk - a) / (b - xk)).ln(),
            _ => return Err(not_interior),
        };
    }
    Ok(y)
}

/// `F(y) = f(eta(y))` with chain-rule gradient and Hessian.
#[derive(Debug, Clone)]
pub struct TransformedCost<C> {
    inner: C,
    bounds: BoundSpec,
}

impl<C: DifferentiableCost> TransformedCost<C> {
    pub fn new(inner: C, bounds: BoundSpec) -> Result<Self> {
        check_dim(inner.dimension(), bounds.dimension())?;
        Ok(Self { inner, bounds })
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }

    pub fn bounds(&self) -> &BoundSpec {
        &self.bounds
    }

    /// Maps a `y`-space point back to the original variables.
    pub fn to_original(&self, y: &Point) -> Result<Point> {
        Ok(eta(&self.bounds, y)?.x)
    }

    /// Maps a strictly interior original point into `y`-space.
    pub fn to_transformed(&self, x: &Point) -> Result<Point> {
        eta_inverse(&self.bounds, x)
    }
}

/// `eta'(y) o g_f(eta(y))`.
pub fn transformed_gradient<C: DifferentiableCost>(tc: &TransformedCost<C>, y: &Point) -> Result<DVector<f64>> {
    let x = eta(&tc.bounds, y)?.x;
    let (d1, _) = eta_derivatives(&tc.bounds, y)?;
    Ok(d1.component_mul(&tc.inner.gradient(&x)?))
}

/// `diag(eta'' o g_f) + (eta' eta'^T) o H_f`, evaluated at `eta(y)`.
pub fn transformed_hessian<C: DifferentiableCost>(tc: &TransformedCost<C>, y: &Point) -> Result<DMatrix<f64>> {
    let x = eta(&tc.bounds, y)?.x;
    let (d1, d2) = eta_derivatives(&tc.bounds, y)?;
    let g = tc.inner.gradient(&x)?;
    let mut h = tc.inner.hessian(&x)?;
    h.fill_upper_triangle_with_lower_triangle();
    let k = y.len();
    for j in 0..k {
        for i in 0..k {
            h[(i, j)] *= d1[i] * d1[j];
        }
        h[(j, j)] += d2[j] * g[j];
    }
    Ok(h)
}

impl<C: DifferentiableCost> DifferentiableCost for TransformedCost<C> {
    fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    fn value(&self, y: &Point) -> Result<f64> {
        self.inner.value(&eta(&self.bounds, y)?.x)
    }

    fn gradient(&self, y: &Point) -> Result<DVector<f64>> {
        transformed_gradient(self, y)
    }

    fn hessian(&self, y: &Point) -> Result<DMatrix<f64>> {
        transformed_hessian(self, y)
    }
}
