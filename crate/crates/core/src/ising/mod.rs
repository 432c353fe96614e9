//! QUBO minimisation back-ends.
//!
//! Every back-end implements [`IsingSolver`]. The `stream` argument lets a
//! caller that solves many QUBOs (one per trust-region iteration) ask for an
//! independent, reproducible random stream each time; deterministic solvers
//! ignore it.

mod anneal;
mod exact;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subproblem::Qubo;

pub use anneal::{beta_schedule, sa_solve, SaConfig, SimulatedAnnealing};
pub use exact::{exact_solve, ExactSolver, DEFAULT_MAX_BITS};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_bits: Vec<bool>,
    /// `z'Qz` of `best_bits`, excluding the QUBO offset.
    pub best_energy: f64,
    pub samples_drawn: usize,
    pub solver_wall_time: Duration,
}

pub trait IsingSolver: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, qubo: &Qubo, stream: u64) -> Result<SolveResult>;
}

/// Names accepted by [`solver_registry`].
pub const SOLVER_NAMES: &[&str] = &["exact", "sa"];

/// Optional overrides applied on top of each solver's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub max_bits: Option<usize>,
    pub samples: Option<usize>,
    pub sweeps: Option<usize>,
    pub beta_initial: Option<f64>,
    pub beta_final: Option<f64>,
    pub seed: Option<u64>,
    pub random_order: Option<bool>,
}

/// Builds a solver by name.
pub fn solver_registry(name: &str, params: &SolverParams) -> Result<Box<dyn IsingSolver>> {
    match name {
        "exact" => Ok(Box::new(ExactSolver::new(params.max_bits.unwrap_or(DEFAULT_MAX_BITS)))),
        "sa" => {
            let d = SaConfig::default();
            let cfg = SaConfig {
                beta_initial: params.beta_initial.unwrap_or(d.beta_initial),
                beta_final: params.beta_final.unwrap_or(d.beta_final),
                sweeps: params.sweeps.unwrap_or(d.sweeps),
                num_samples: params.samples.unwrap_or(d.num_samples),
                seed: params.seed.unwrap_or(d.seed),
                random_order: params.random_order.unwrap_or(d.random_order),
            };
            Ok(Box::new(SimulatedAnnealing::new(cfg)?))
        }
        other => Err(Error::UnknownSolver { name: other.to_string(), known: SOLVER_NAMES.join(", ") }),
    }
}

/// Local fields `h_i = Q_ii + sum_{j != i} 2 Q_ij z_j` for symmetric `Q`, so
/// flipping bit `i` changes the energy by `(1 - 2 z_i) h_i`.
pub(crate) fn local_fields(qubo: &Qubo, z: &[bool]) -> Vec<f64> {
    let n = qubo.size();
    let mut h: Vec<f64> = (0..n).map(|i| qubo.row(i)[i]).collect();
    for (j, _) in z.iter().enumerate().filter(|(_, &b)| b) {
        let row = qubo.row(j);
        for (i, hi) in h.iter_mut().enumerate() {
            if i != j {
                *hi += 2.0 * row[i];
            }
        }
    }
    h
}

/// Applies the field update for a flip of bit `j` that has already happened.
#[inline]
pub(crate) fn update_fields(h: &mut [f64], row: &[f64], j: usize, now_set: bool) {
    let s = if now_set { 2.0 } else { -2.0 };
    let hj = h[j];
    for (hi, &q) in h.iter_mut().zip(row) {
        *hi += s * q;
    }
    h[j] = hj;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subproblem::qubo_energy;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn registry_knows_its_solvers() {
        assert_eq!(solver_registry("exact", &SolverParams::default()).unwrap().name(), "exact");
        let sa = solver_registry("sa", &SolverParams { samples: Some(100), ..Default::default() }).unwrap();
        assert_eq!(sa.name(), "sa");
        let q = Qubo::from_matrix(DMatrix::from_element(3, 3, -1.0), 0.0).unwrap();
        assert_eq!(sa.solve(&q, 0).unwrap().samples_drawn, 100);
        match solver_registry("dwave", &SolverParams::default()) {
            Err(Error::UnknownSolver { known, .. }) => assert_eq!(known, "exact, sa"),
            _ => panic!("expected unknown-solver error"),
        }
    }

    #[test]
    fn incremental_fields_track_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 24;
        let q = Qubo::from_matrix(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)), 0.0).unwrap();
        let mut z: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let mut h = local_fields(&q, &z);
        let mut e = qubo_energy(&q, &z).unwrap();
        for _ in 0..2000 {
            let j = rng.random_range(0..n);
            let de = if z[j] { -h[j] } else { h[j] };
            z[j] = !z[j];
            e += de;
            update_fields(&mut h, q.row(j), j, z[j]);
            let fresh = qubo_energy(&q, &z).unwrap();
            assert!((e - fresh).abs() <= 1e-9 * fresh.abs().max(1.0));
        }
        let fresh_h = local_fields(&q, &z);
        for (a, b) in h.iter().zip(&fresh_h) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
