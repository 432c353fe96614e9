#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use quanco::model::eval_model;
use quanco::{QuadraticModel, TrustBox};
use rand::Rng;

pub fn uniform_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

pub fn symmetric<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

/// `B'B + shift I`, positive definite for `shift > 0`.
pub fn spd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    b.transpose() * &b + DMatrix::identity(n, n) * shift
}

pub fn random_model<R: Rng>(rng: &mut R, k: usize) -> QuadraticModel {
    let c = uniform_vec(rng, k, -2.0, 2.0);
    let g = uniform_vec(rng, k, -3.0, 3.0);
    QuadraticModel::new(c, rng.random_range(-1.0..1.0), g, symmetric(rng, k) * 4.0).unwrap()
}

pub fn random_box<R: Rng>(rng: &mut R, center: &DVector<f64>) -> TrustBox {
    let r = uniform_vec(rng, center.len(), 0.1, 2.0);
    TrustBox::new(center.clone(), r).unwrap()
}

/// Every grid point of the box with `2^bits` levels per coordinate, as
/// (per-coordinate integers, step).
pub fn grid_points(tb: &TrustBox, bits: usize) -> Vec<(Vec<u64>, DVector<f64>)> {
    let k = tb.dimension();
    let levels = (1u64 << bits) - 1;
    let r = &tb.half_width;
    let total = (levels + 1).pow(k as u32);
    (0..total)
        .map(|mut idx| {
            let n: Vec<u64> = (0..k)
                .map(|_| {
                    let v = idx % (levels + 1);
                    idx /= levels + 1;
                    v
                })
                .collect();
            let p = DVector::from_fn(k, |i, _| -r[i] + 2.0 * r[i] / levels as f64 * n[i] as f64);
            (n, p)
        })
        .collect()
}

/// Bit vector in column-stacked order (bit `m` of coordinate `k` at `m K + k`).
pub fn bits_from_integers(n: &[u64], bits: usize) -> Vec<bool> {
    let k = n.len();
    let mut z = vec![false; k * bits];
    for (i, &v) in n.iter().enumerate() {
        for m in 0..bits {
            z[m * k + i] = (v >> m) & 1 == 1;
        }
    }
    z
}

/// Minimum of the model over the grid by direct evaluation.
pub fn grid_minimum(m: &QuadraticModel, tb: &TrustBox, bits: usize) -> (Vec<u64>, f64) {
    let mut best = (Vec::new(), f64::INFINITY);
    for (n, p) in grid_points(tb, bits) {
        let v = eval_model(m, &(m.center() + &p)).unwrap();
        if v < best.1 {
            best = (n, v);
        }
    }
    best
}
