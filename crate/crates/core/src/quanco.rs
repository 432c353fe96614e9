//! Trust-region Newton with a rectangular trust region whose sub-problem is
//! binarised into a QUBO and handed to an [`IsingSolver`].
//!
//! Each iteration builds the second-order model at `x`, restricts it to the
//! `2^M`-point-per-axis grid over the current box, minimises the resulting
//! QUBO, decodes the step and applies the usual ratio test. Rejections shrink
//! the box by 4; accepted high-ratio steps that touch the box boundary double
//! it, capped at `r_max`.

use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::ising::{solver_registry, IsingSolver, SolverParams};
use crate::model::{model_decrease, taylor_at, DifferentiableCost, Point, QuadraticModel, RhoMode};
use crate::subproblem::{build_qubo, decode_step, TrustBox, MAX_BITS_PER_DIM};
use crate::trace::{ConvergenceReason, IterationRecord, OptimizationTrace};
use crate::trn::BOUNDARY_TOL;

/// Which QUBO back-end to use and how to configure it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub name: String,
    pub params: SolverParams,
}

impl SolverSpec {
    pub fn exact() -> Self {
        Self { name: "exact".into(), params: SolverParams::default() }
    }

    pub fn annealing(samples: usize) -> Self {
        Self { name: "sa".into(), params: SolverParams { samples: Some(samples), ..Default::default() } }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuancoConfig {
    pub bits_per_dim: usize,
    /// Initial box half-widths.
    pub r0: DVector<f64>,
    pub r_max: DVector<f64>,
    pub max_iter: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub rho_mode: RhoMode,
    pub solver: SolverSpec,
    /// Master seed for stochastic solvers; ignored by deterministic ones.
    pub seed: u64,
}

impl QuancoConfig {
    /// Defaults for a `k`-dimensional problem: one bit per axis, unit box,
    /// `r_max = 10 r0`, exact solver.
    pub fn new(r0: DVector<f64>) -> Self {
        let r_max = &r0 * 10.0;
        Self {
            bits_per_dim: 1,
            r0,
            r_max,
            max_iter: 100,
            eps1: 1e-10,
            eps2: 1e-10,
            rho_mode: RhoMode::Model,
            solver: SolverSpec::exact(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.r0.len(), self.r_max.len())?;
        if self.bits_per_dim == 0 || self.bits_per_dim > MAX_BITS_PER_DIM {
            return Err(Error::InvalidArgument(format!(
                "bits per dimension must be in 1..={MAX_BITS_PER_DIM}, got {}",
                self.bits_per_dim
            )));
        }
        let ok = self.r0.iter().zip(self.r_max.iter()).all(|(a, b)| *a > 0.0 && a <= b && b.is_finite());
        if !ok {
            return Err(Error::InvalidArgument("need 0 < r0 <= r_max componentwise".into()));
        }
        if !(self.eps1 >= 0.0 && self.eps2 >= 0.0) {
            return Err(Error::InvalidArgument("convergence thresholds must be non-negative".into()));
        }
        Ok(())
    }

    fn build_solver(&self) -> Result<Box<dyn IsingSolver>> {
        let mut params = self.solver.params.clone();
        params.seed = Some(params.seed.unwrap_or(self.seed));
        solver_registry(&self.solver.name, &params)
    }
}

/// Predicted change of the model along `p`.
pub fn expected_improvement(m: &QuadraticModel, p: &DVector<f64>, mode: RhoMode) -> Result<f64> {
    model_decrease(m, p, mode)
}

/// True when `p` touches the box face: `max_k |p_k| / r_k` is within `1e-8` of 1.
pub fn boundary_test(p: &DVector<f64>, r: &DVector<f64>) -> bool {
    let ratio = p.iter().zip(r.iter()).map(|(pk, rk)| pk.abs() / rk).fold(0.0, f64::max);
    (1.0 - BOUNDARY_TOL..=1.0).contains(&ratio)
}

/// Runs the optimiser with the solver named in `cfg`.
pub fn quanco_minimize<C: DifferentiableCost + ?Sized>(f: &C, x0: &Point, cfg: &QuancoConfig) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let solver = cfg.build_solver()?;
    quanco_minimize_with(f, x0, cfg, solver.as_ref())
}

/// Runs the optimiser with a caller-supplied solver; `cfg.solver` is ignored.
pub fn quanco_minimize_with<C: DifferentiableCost + ?Sized>(
    f: &C,
    x0: &Point,
    cfg: &QuancoConfig,
    solver: &dyn IsingSolver,
) -> Result<OptimizationTrace> {
    cfg.validate()?;
    check_dim(f.dimension(), x0.len())?;
    check_dim(x0.len(), cfg.r0.len())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("starting point"));
    }
    let mut x = x0.clone();
    let mut fx = f.value(&x)?;
    let f_initial = fx;
    let mut r = cfg.r0.clone();
    let mut model: Option<QuadraticModel> = None;
    let mut records = Vec::with_capacity(cfg.max_iter);
    let mut reason = ConvergenceReason::MaxIterations;

    for k in 0..cfg.max_iter {
        let t_start = Instant::now();
        let mut t_deriv = Duration::ZERO;
        if model.is_none() {
            let t = Instant::now();
            model = Some(taylor_at(f, &x)?);
            t_deriv = t.elapsed();
        }
        let m = model.as_ref().expect("model was just built");

        let t = Instant::now();
        let qubo = build_qubo(m, &TrustBox::new(x.clone(), r.clone())?, cfg.bits_per_dim)?;
        let t_build = t.elapsed();

        let t = Instant::now();
        let sol = solver
            .solve(&qubo, k as u64)
            .map_err(|e| Error::Solver { iteration: k, source: Box::new(e) })?;
        let t_solve = t.elapsed();

        let p = decode_step(&qubo, &sol.best_bits)?;
        let step_norm = p.norm();
        let predicted = expected_improvement(m, &p, cfg.rho_mode)?;
        let used_radius = r.norm();

        let x_trial = &x + &p;
        let f_trial = f.value(&x_trial)?;
        let actual = f_trial - fx;
        let rho = if predicted == 0.0 { f64::NAN } else { actual / predicted };
        let accepted = rho >= 0.25 && f_trial <= fx;
        if accepted {
            x = x_trial;
            fx = f_trial;
            model = None;
            if rho > 0.75 && boundary_test(&p, &r) {
                r.zip_apply(&cfg.r_max, |ri, cap| *ri = (2.0 * *ri).min(cap));
            }
        } else {
            r /= 4.0;
        }
        records.push(IterationRecord {
            iter: k,
            f: fx,
            f_trial,
            rho,
            predicted,
            accepted,
            radius_norm: used_radius,
            step_norm,
            time_derivatives: t_deriv,
            time_qubo_build: t_build,
            time_solver: t_solve,
            time_total: t_start.elapsed(),
        });

        // a rejected trial's change is noise, but the model's prediction is not
        if accepted && actual.abs() <= cfg.eps1 {
            reason = ConvergenceReason::ActualChange;
            break;
        }
        if predicted.abs() <= cfg.eps2 {
            reason = ConvergenceReason::PredictedChange;
            break;
        }
        if r.iter().all(|v| *v < f64::MIN_POSITIVE) {
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
