use std::time::Instant;

use super::{local_fields, update_fields, IsingSolver, SolveResult};
use crate::error::{Error, Result};
use crate::subproblem::{qubo_energy, Qubo};

pub const DEFAULT_MAX_BITS: usize = 28;

// full field/energy recomputation interval, bounds floating-point drift
const RESYNC_EVERY: u64 = 1 << 16;

/// Exhaustive minimiser over all `2^n` bit patterns.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolver {
    pub max_bits: usize,
}

impl ExactSolver {
    pub fn new(max_bits: usize) -> Self {
        Self { max_bits: max_bits.min(63) }
    }
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_BITS)
    }
}

impl IsingSolver for ExactSolver {
    fn name(&self) -> &str {
        "exact"
    }

    fn solve(&self, qubo: &Qubo, _stream: u64) -> Result<SolveResult> {
        exact_solve_capped(qubo, self.max_bits)
    }
}

/// Global minimum with the default size cap.
pub fn exact_solve(qubo: &Qubo) -> Result<SolveResult> {
    exact_solve_capped(qubo, DEFAULT_MAX_BITS)
}

/// Walks the reflected Gray code so consecutive patterns differ in one bit,
/// updating energy and local fields in `O(n)` per step. Ties go to the
/// lexicographically smallest pattern (bit 0 most significant).
fn exact_solve_capped(qubo: &Qubo, cap: usize) -> Result<SolveResult> {
    let n = qubo.size();
    if n > cap.min(63) {
        return Err(Error::SizeCapExceeded { bits: n, cap });
    }
    let start = Instant::now();
    let tie_tol = 1e-12 * qubo.coefficients().iter().map(|v| v.abs()).sum::<f64>();

    let mut z = vec![false; n];
    let mut h = local_fields(qubo, &z);
    let mut energy = 0.0;
    // key orders patterns lexicographically: bit i of z is bit (n-1-i) of key
    let mut key: u64 = 0;
    let mut best_energy = 0.0;
    let mut best_key: u64 = 0;

    let total: u64 = 1 << n;
    for step in 1..total {
        let j = step.trailing_zeros() as usize;
        energy += if z[j] { -h[j] } else { h[j] };
        z[j] = !z[j];
        key ^= 1 << (n - 1 - j);
        update_fields(&mut h, qubo.row(j), j, z[j]);

        if step % RESYNC_EVERY == 0 {
            h = local_fields(qubo, &z);
            energy = qubo_energy(qubo, &z)?;
        }
        if energy < best_energy - tie_tol || (energy <= best_energy + tie_tol && key < best_key) {
            best_energy = energy;
            best_key = key;
        }
    }

    let best_bits: Vec<bool> = (0..n).map(|i| best_key >> (n - 1 - i) & 1 == 1).collect();
    let best_energy = qubo_energy(qubo, &best_bits)?;
    Ok(SolveResult { best_bits, best_energy, samples_drawn: 1, solver_wall_time: start.elapsed() })
}
