//! Per-iteration records shared by the trust-region drivers.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceReason {
    /// `|f(x + p) - f(x)| <= eps1` on an accepted step.
    ActualChange,
    /// `|predicted change| <= eps2` on any step.
    PredictedChange,
    /// The sub-problem returned the zero step.
    ZeroStep,
    /// The trust region shrank below the smallest normal float.
    RadiusCollapsed,
    MaxIterations,
}

impl ConvergenceReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ActualChange => "actual_change",
            Self::PredictedChange => "predicted_change",
            Self::ZeroStep => "zero_step",
            Self::RadiusCollapsed => "radius_collapsed",
            Self::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// Cost at the iterate after this iteration's accept/reject decision.
    pub f: f64,
    /// Cost at the proposed point.
    pub f_trial: f64,
    /// Improvement ratio; NaN when the predicted change is zero.
    pub rho: f64,
    pub predicted: f64,
    pub accepted: bool,
    /// Euclidean norm of the trust-region size used this iteration.
    pub radius_norm: f64,
    pub step_norm: f64,
    pub time_derivatives: Duration,
    pub time_qubo_build: Duration,
    pub time_solver: Duration,
    pub time_total: Duration,
}

impl IterationRecord {
    /// Everything outside the three measured phases (mostly the trial evaluation).
    pub fn time_other(&self) -> Duration {
        self.time_total
            .saturating_sub(self.time_derivatives + self.time_qubo_build + self.time_solver)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub f_initial: f64,
    pub records: Vec<IterationRecord>,
    pub final_point: Point,
    pub converged: bool,
    pub reason: ConvergenceReason,
}

impl OptimizationTrace {
    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(self.f_initial, |r| r.f)
    }

    /// Cost after `iter + 1` iterations, held constant after termination.
    pub fn value_after(&self, iter: usize) -> f64 {
        if self.records.is_empty() {
            return self.f_initial;
        }
        self.records[iter.min(self.records.len() - 1)].f
    }

    /// True when the iterate's cost never increases.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.f_initial;
        for r in &self.records {
            if r.f > prev {
                return false;
            }
            prev = r.f;
        }
        true
    }

    /// Same path as `other`, ignoring wall-clock timings.
    pub fn same_path(&self, other: &Self) -> bool {
        let strip = |r: &IterationRecord| {
            (r.iter, r.f.to_bits(), r.f_trial.to_bits(), r.rho.to_bits(), r.predicted.to_bits(), r.accepted, r.radius_norm.to_bits(), r.step_norm.to_bits())
        };
        self.f_initial.to_bits() == other.f_initial.to_bits()
            && self.final_point == other.final_point
            && self.converged == other.converged
            && self.reason == other.reason
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| strip(a) == strip(b))
    }
}
