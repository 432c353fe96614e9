use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{local_fields, update_fields, IsingSolver, SolveResult};
use crate::error::{Error, Result};
use crate::subproblem::{qubo_energy, Qubo};

/// Metropolis simulated annealing settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    pub beta_initial: f64,
    pub beta_final: f64,
    pub sweeps: usize,
    pub num_samples: usize,
    pub seed: u64,
    /// Visit bits in a fresh random order each sweep instead of `0..n`.
    pub random_order: bool,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self { beta_initial: 0.1, beta_final: 3.0, sweeps: 100, num_samples: 10, seed: 0, random_order: false }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_initial > 0.0 && self.beta_initial < self.beta_final && self.beta_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < beta_initial < beta_final, got {} and {}",
                self.beta_initial, self.beta_final
            )));
        }
        if self.sweeps == 0 || self.num_samples == 0 {
            return Err(Error::InvalidArgument("sweeps and num_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inverse temperature for each sweep, geometric from `beta_initial` to
/// `beta_final` (log-beta linear in the sweep index).
pub fn beta_schedule(cfg: &SaConfig) -> Vec<f64> {
    if cfg.sweeps == 1 {
        return vec![cfg.beta_final];
    }
    let ratio = cfg.beta_final / cfg.beta_initial;
    let last = (cfg.sweeps - 1) as f64;
    (0..cfg.sweeps).map(|t| cfg.beta_initial * ratio.powf(t as f64 / last)).collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn sample_seed(master: u64, stream: u64, sample: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ sample)
}

#[derive(Debug, Clone)]
pub struct SimulatedAnnealing {
    cfg: SaConfig,
}

impl SimulatedAnnealing {
    pub fn new(cfg: SaConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &SaConfig {
        &self.cfg
    }
}

impl IsingSolver for SimulatedAnnealing {
    fn name(&self) -> &str {
        "sa"
    }

    fn solve(&self, qubo: &Qubo, stream: u64) -> Result<SolveResult> {
        run(qubo, &self.cfg, stream)
    }
}

/// Best of `num_samples` independent annealing chains.
pub fn sa_solve(qubo: &Qubo, cfg: &SaConfig) -> Result<SolveResult> {
    cfg.validate()?;
    run(qubo, cfg, 0)
}

fn run(qubo: &Qubo, cfg: &SaConfig, stream: u64) -> Result<SolveResult> {
    let start = Instant::now();
    let betas = beta_schedule(cfg);
    let chains: Vec<(f64, Vec<bool>)> = (0..cfg.num_samples as u64)
        .into_par_iter()
        .map(|s| anneal_chain(qubo, &betas, cfg.random_order, sample_seed(cfg.seed, stream, s)))
        .collect();
    // min by energy, ties by sample index (collect preserves index order)
    let (_, best_bits) = chains
        .into_iter()
        .reduce(|best, c| if c.0 < best.0 { c } else { best })
        .expect("num_samples >= 1");
    let best_energy = qubo_energy(qubo, &best_bits)?;
    Ok(SolveResult { best_bits, best_energy, samples_drawn: cfg.num_samples, solver_wall_time: start.elapsed() })
}

fn anneal_chain(qubo: &Qubo, betas: &[f64], random_order: bool, seed: u64) -> (f64, Vec<bool>) {
    let n = qubo.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut h = local_fields(qubo, &z);
    let mut energy = qubo_energy(qubo, &z).expect("length matches");
    let mut best_energy = energy;
    let mut best = z.clone();
    let mut order: Vec<usize> = (0..n).collect();

    for &beta in betas {
        if random_order {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let delta = if z[i] { -h[i] } else { h[i] };
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                z[i] = !z[i];
                energy += delta;
                update_fields(&mut h, qubo.row(i), i, z[i]);
                if energy < best_energy {
                    best_energy = energy;
                    best.copy_from_slice(&z);
                }
            }
        }
    }
    (best_energy, best)
}
