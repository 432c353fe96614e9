use super::{single_cost, Biomass, BiomassProblem};
use crate::error::Result;

/// Smallest feed rate on the bracketing grid.
pub const FEED_FLOOR: f64 = 1e-4;
/// Largest feed rate searched.
pub const FEED_CAP: f64 = 1e4;
const GRID_FACTOR: f64 = 1.2;
const GOLDEN_TOL: f64 = 1e-10;

/// Best single-biomass feed rate and its cost.
///
/// Scans `x` on a geometric grid over `[1e-4, 1e4]`, then refines the best
/// bracket by golden-section search. Returns `(0, 0)` when no feed rate on
/// the grid turns a profit.
pub fn univariate_optimum(b: &Biomass, revenue: f64) -> Result<(f64, f64)> {
    let phi = |x: f64| single_cost(b, revenue, x);
    let mut grid = Vec::with_capacity(110);
    let mut x = FEED_FLOOR;
    while x < FEED_CAP {
        grid.push(x);
        x *= GRID_FACTOR;
    }
    grid.push(FEED_CAP);

    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(phi(x)?);
    }
    let (best, &f_best) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    if !(f_best < 0.0) {
        return Ok((0.0, 0.0));
    }
    if best == grid.len() - 1 {
        log::warn!("univariate optimum sits at the feed cap {FEED_CAP}");
        return Ok((FEED_CAP, f_best));
    }
    let lo = if best == 0 { grid[0] } else { grid[best - 1] };
    let hi = grid[best + 1];
    let (x_star, f_star) = golden_section(&phi, lo, hi)?;
    // the grid point itself may be better if the bracket is not unimodal
    if f_star <= f_best {
        Ok((x_star, f_star))
    } else {
        Ok((grid[best], f_best))
    }
}

fn golden_section(phi: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = phi(c)?;
    let mut fd = phi(d)?;
    while b - a > GOLDEN_TOL * (a.abs() + b.abs()) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Global minimum of a biomass problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueMinimum {
    /// Index of the biomass fed at the optimum.
    pub index: usize,
    /// Its feed rate (0 when nothing is worth feeding).
    pub feed: f64,
    pub f_min: f64,
}

/// Every local minimum feeds a single biomass, so the global minimum is the
/// best of the per-biomass optima. Ties go to the smallest index.
pub fn true_minimum(p: &BiomassProblem) -> Result<TrueMinimum> {
    let mut best = TrueMinimum { index: 0, feed: 0.0, f_min: f64::INFINITY };
    for (k, b) in p.biomasses().iter().enumerate() {
        let (x, f) = univariate_optimum(b, p.revenue())?;
        if f < best.f_min {
            best = TrueMinimum { index: k, feed: x, f_min: f };
        }
    }
    Ok(best)
}
