//! Classical trust-region Newton with a spherical trust region.
//!
//! The sub-problem `min m(p) s.t. |p| <= radius` is solved exactly from an
//! eigendecomposition of the Hessian: either the interior Newton step, or the
//! boundary step `p(nu) = -(H + nu I)^-1 g` with the multiplier found by a
//! safeguarded Newton iteration on `1/|p(nu)| - 1/radius`, or (hard case) the
//! shifted step plus a component along the lowest eigenvector.
//!
//! Radius updates, acceptance and stopping mirror [`crate::quanco`] so the
//! two drivers differ only in the trust-region geometry and sub-problem solver.

use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{symmetric_eigen, Eigen};
use crate::model::{model_decrease, taylor_at, DifferentiableCost, Point, QuadraticModel, RhoMode};
use crate::trace::{ConvergenceReason, IterationRecord, OptimizationTrace};

const SECULAR_TOL: f64 = 1e-10;
const SECULAR_MAX_ITER: usize = 100;
/// Relative tolerance for "step lies on the trust-region boundary".
pub const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TrnConfig {
    pub r0: f64,
    pub r_max: f64,
    pub max_iter: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub rho_mode: RhoMode,
}

impl Default for TrnConfig {
    fn default() -> Self {
        Self { r0: 1.0, r_max: 10.0, max_iter: 100, eps1: 1e-10, eps2: 1e-10, rho_mode: RhoMode::Model }
    }
}

impl TrnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0 <= self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < r0 <= r_max, got {} and {}", self.r0, self.r_max)));
        }
        if !(self.eps1 >= 0.0 && self.eps2 >= 0.0) {
            return Err(Error::InvalidArgument("convergence thresholds must be non-negative".into()));
        }
        Ok(())
    }
}

/// Solution of the spherical sub-problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereStep {
    pub step: DVector<f64>,
    /// Lagrange multiplier `nu >= 0`; zero for interior steps.
    pub multiplier: f64,
    pub on_boundary: bool,
    pub hard_case: bool,
}

/// Minimises the model over the ball `|p| <= radius`.
pub fn solve_sphere_subproblem(m: &QuadraticModel, radius: f64) -> Result<SphereStep> {
    let eig = symmetric_eigen(m.hess())?;
    solve_with_eigen(m.grad(), &eig, radius)
}

/// As [`solve_sphere_subproblem`], reusing a decomposition of the Hessian.
pub fn solve_with_eigen(g: &DVector<f64>, eig: &Eigen, radius: f64) -> Result<SphereStep> {
    check_dim(eig.values.len(), g.len())?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("trust radius must be positive, got {radius}")));
    }
    let lam = &eig.values;
    let ghat = eig.vectors.tr_mul(g);
    let gnorm = g.norm();
    let lam_min = eig.min_value();
    let lam_scale = lam.amax().max(1.0);
    let compose = |coef: &DVector<f64>| &eig.vectors * coef;

    // coefficients of p(nu) in the eigenbasis, skipping directions in `skip`
    let coeffs = |nu: f64, skip: &[bool]| {
        DVector::from_fn(lam.len(), |i, _| if skip[i] { 0.0 } else { -ghat[i] / (lam[i] + nu) })
    };
    let none = vec![false; lam.len()];

    if lam_min > 0.0 {
        let c = coeffs(0.0, &none);
        if c.norm() <= radius {
            return Ok(SphereStep { step: compose(&c), multiplier: 0.0, on_boundary: false, hard_case: false });
        }
    }

    let nu_lo = (-lam_min).max(0.0);
    let eig_tol = 1e-12 * lam_scale;
    let lowest: Vec<bool> = lam.iter().map(|&l| l <= lam_min + eig_tol).collect();
    let orthogonal = lam
        .iter()
        .enumerate()
        .filter(|(i, _)| lowest[*i])
        .all(|(i, _)| ghat[i].abs() <= 1e-12 * gnorm.max(f64::MIN_POSITIVE));

    if orthogonal {
        let c = coeffs(nu_lo, &lowest);
        let pnorm = c.norm();
        if pnorm <= radius {
            if lam_min >= 0.0 {
                // singular PSD Hessian with g off its null space: interior minimiser
                return Ok(SphereStep { step: compose(&c), multiplier: 0.0, on_boundary: false, hard_case: false });
            }
            let tau = (radius * radius - pnorm * pnorm).max(0.0).sqrt();
            let v = lowest.iter().position(|&b| b).expect("lowest eigenspace is non-empty");
            let mut step = compose(&c);
            step += eig.vectors.column(v) * tau;
            return Ok(SphereStep { step, multiplier: nu_lo, on_boundary: true, hard_case: true });
        }
    }

    let nu = secular_root(&ghat, lam, radius, nu_lo, gnorm)?;
    let c = coeffs(nu, &none);
    Ok(SphereStep { step: compose(&c), multiplier: nu, on_boundary: true, hard_case: false })
}

/// Root of `phi(nu) = 1/|p(nu)| - 1/radius` on `(nu_lo, nu_hi]`.
fn secular_root(ghat: &DVector<f64>, lam: &DVector<f64>, radius: f64, nu_lo: f64, gnorm: f64) -> Result<f64> {
    let eval = |nu: f64| {
        let mut s2 = 0.0;
        let mut s3 = 0.0;
        for (g, l) in ghat.iter().zip(lam.iter()) {
            let d = l + nu;
            if d <= 0.0 {
                return (f64::NEG_INFINITY, f64::INFINITY);
            }
            s2 += g * g / (d * d);
            s3 += g * g / (d * d * d);
        }
        let norm = s2.sqrt();
        (1.0 / norm - 1.0 / radius, s3 / (norm * norm * norm))
    };
    let mut lo = nu_lo;
    let mut hi = nu_lo + gnorm / radius + f64::EPSILON * (1.0 + nu_lo);
    let (phi_lo, _) = eval(lo);
    let mut nu = if phi_lo.is_finite() { lo } else { 0.5 * (lo + hi) };
    for _ in 0..SECULAR_MAX_ITER {
        let (phi, dphi) = eval(nu);
        if phi.is_finite() && phi.abs() * radius <= SECULAR_TOL {
            return Ok(nu);
        }
        if phi < 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        let newton = nu - phi / dphi;
        nu = if phi.is_finite() && dphi.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi.max(1.0) {
            return Ok(hi);
        }
    }
    log::debug!("secular equation hit the iteration cap; using the feasible bracket end");
    Ok(hi)
}

/// Runs trust-region Newton from `x0`.
pub fn trn_minimize<C: DifferentiableCost + ?Sized>(f: &C, x0: &Point, cfg: &TrnConfig) -> Result<OptimizationTrace> {
    cfg.validate()?;
    check_dim(f.dimension(), x0.len())?;
    let mut x = x0.clone();
    let mut fx = f.value(&x)?;
    let f_initial = fx;
    let mut radius = cfg.r0;
    let mut cached: Option<(QuadraticModel, Eigen)> = None;
    let mut records = Vec::with_capacity(cfg.max_iter);
    let mut reason = ConvergenceReason::MaxIterations;

    for k in 0..cfg.max_iter {
        let t_start = Instant::now();
        let mut t_deriv = Duration::ZERO;
        let mut t_solve = Duration::ZERO;
        if cached.is_none() {
            let t = Instant::now();
            let model = taylor_at(f, &x)?;
            t_deriv = t.elapsed();
            let t = Instant::now();
            let eig = symmetric_eigen(model.hess())?;
            t_solve += t.elapsed();
            cached = Some((model, eig));
        }
        let (model, eig) = cached.as_ref().expect("model was just built");
        let t = Instant::now();
        let sub = solve_with_eigen(model.grad(), eig, radius)?;
        t_solve += t.elapsed();
        let p = sub.step;
        let step_norm = p.norm();
        let predicted = model_decrease(model, &p, cfg.rho_mode)?;

        if step_norm == 0.0 {
            reason = ConvergenceReason::ZeroStep;
            records.push(record(k, fx, fx, f64::NAN, predicted, false, radius, 0.0, t_deriv, t_solve, t_start));
            break;
        }

        let x_trial = &x + &p;
        let f_trial = f.value(&x_trial)?;
        let actual = f_trial - fx;
        let rho = if predicted == 0.0 { f64::NAN } else { actual / predicted };
        let used_radius = radius;
        let accepted = rho >= 0.25 && f_trial <= fx;
        if accepted {
            x = x_trial;
            fx = f_trial;
            cached = None;
            if rho > 0.75 && step_norm >= (1.0 - BOUNDARY_TOL) * radius {
                radius = (2.0 * radius).min(cfg.r_max);
            }
        } else {
            radius /= 4.0;
        }
        records.push(record(k, fx, f_trial, rho, predicted, accepted, used_radius, step_norm, t_deriv, t_solve, t_start));

        // a rejected trial's change is noise, but the model's prediction is not
        if accepted && actual.abs() <= cfg.eps1 {
            reason = ConvergenceReason::ActualChange;
            break;
        }
        if predicted.abs() <= cfg.eps2 {
            reason = ConvergenceReason::PredictedChange;
            break;
        }
        if radius < f64::MIN_POSITIVE {
            reason = ConvergenceReason::RadiusCollapsed;
            break;
        }
    }

    Ok(OptimizationTrace {
        f_initial,
        records,
        final_point: x,
        converged: reason != ConvergenceReason::MaxIterations,
        reason,
    })
}

#[allow(clippy::too_many_arguments)]
fn record(
    iter: usize,
    f: f64,
    f_trial: f64,
    rho: f64,
    predicted: f64,
    accepted: bool,
    radius: f64,
    step_norm: f64,
    t_deriv: Duration,
    t_solve: Duration,
    t_start: Instant,
) -> IterationRecord {
    IterationRecord {
        iter,
        f,
        f_trial,
        rho,
        predicted,
        accepted,
        radius_norm: radius,
        step_norm,
        time_derivatives: t_deriv,
        time_qubo_build: Duration::ZERO,
        time_solver: t_solve,
        time_total: t_start.elapsed(),
    }
}
