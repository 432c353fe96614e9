//! Biomass selection for a single biogas reactor.
//!
//! Feeding `x_k` units per day of biomass `k` into a reactor of unit volume
//! costs `c_k x_k` and produces `x_k Y_k(X)` of methane sold at price `r`,
//! where `X = sum x_k` and the retention time is `1/X`. The cost
//!
//! ```text
//! f(x) = sum_k x_k (c_k - r Y_k(X))
//! ```
//!
//! is non-convex with a dense Hessian, yet every minimum uses a single
//! biomass, so the global minimum follows from `K` one-dimensional searches
//! (see [`true_minimum`]).

mod generate;
mod io;
mod oracle;
mod yields;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::model::{DifferentiableCost, Point};
use crate::trace::OptimizationTrace;

pub use generate::{generate_problem, generate_with_stats, GenerationStats, MvnGenConfig, MAX_REJECTION_RATE, REJECTION_WINDOW};
pub use io::{read_problem, write_problem, BiomassRecord, ProblemFile, SCHEMA_TAG};
pub use oracle::{true_minimum, univariate_optimum, TrueMinimum, FEED_CAP, FEED_FLOOR};
pub use yields::{big_yield, yield_curve, Variant, YieldParams};

/// Methane price used throughout, per Nm^3.
pub const DEFAULT_REVENUE: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biomass {
    /// Cost per unit volume of feed.
    pub cost: f64,
    /// Methane per unit volume at infinite retention time.
    pub g0: f64,
    pub curve: YieldParams,
}

impl Biomass {
    pub fn new(cost: f64, g0: f64, curve: YieldParams) -> Result<Self> {
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(Error::Domain(format!("biomass cost must be non-negative, got {cost}")));
        }
        if !(g0 > 0.0 && g0.is_finite()) {
            return Err(Error::Domain(format!("biomass g0 must be positive, got {g0}")));
        }
        curve.validate()?;
        Ok(Self { cost, g0, curve })
    }

    /// `(Y, Y', Y'')` at total feed `x`.
    pub fn yield_at(&self, total_feed: f64) -> Result<(f64, f64, f64)> {
        big_yield(self.g0, &self.curve, total_feed)
    }

    /// `c / (r G0)`.
    pub fn cost_margin(&self, revenue: f64) -> f64 {
        self.cost / (revenue * self.g0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiomassProblem {
    biomasses: Vec<Biomass>,
    revenue: f64,
}

impl BiomassProblem {
    pub fn new(biomasses: Vec<Biomass>, revenue: f64) -> Result<Self> {
        if biomasses.is_empty() {
            return Err(Error::InvalidArgument("a problem needs at least one biomass".into()));
        }
        if !(revenue > 0.0 && revenue.is_finite()) {
            return Err(Error::Domain(format!("revenue must be positive, got {revenue}")));
        }
        Ok(Self { biomasses, revenue })
    }

    pub fn biomasses(&self) -> &[Biomass] {
        &self.biomasses
    }

    pub fn revenue(&self) -> f64 {
        self.revenue
    }

    pub fn len(&self) -> usize {
        self.biomasses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.biomasses.is_empty()
    }

    /// The shared yield family, if all biomasses use the same one.
    pub fn variant(&self) -> Option<Variant> {
        let v = self.biomasses[0].curve.variant();
        self.biomasses.iter().all(|b| b.curve.variant() == v).then_some(v)
    }

    fn total_feed(&self, x: &Point) -> Result<f64> {
        check_dim(self.len(), x.len())?;
        if x.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("feed rates must be finite and non-negative".into()));
        }
        let total = x.sum();
        if total > 0.0 {
            Ok(total)
        } else {
            Err(Error::Domain("total feed must be positive".into()))
        }
    }

    fn yields(&self, total: f64) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let k = self.len();
        let mut y = DVector::zeros(k);
        let mut y1 = DVector::zeros(k);
        let mut y2 = DVector::zeros(k);
        for (i, b) in self.biomasses.iter().enumerate() {
            (y[i], y1[i], y2[i]) = b.yield_at(total)?;
        }
        Ok((y, y1, y2))
    }

    fn costs(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.biomasses.iter().map(|b| b.cost))
    }

    /// Cost of feeding only biomass `k` at rate `x`.
    pub fn single_cost(&self, k: usize, x: f64) -> Result<f64> {
        let b = self.biomasses.get(k).ok_or_else(|| Error::InvalidArgument(format!("no biomass {k}")))?;
        single_cost(b, self.revenue, x)
    }
}

pub(crate) fn single_cost(b: &Biomass, revenue: f64, x: f64) -> Result<f64> {
    let (y, _, _) = b.yield_at(x)?;
    Ok(x * (b.cost - revenue * y))
}

impl DifferentiableCost for BiomassProblem {
    fn dimension(&self) -> usize {
        self.len()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let total = self.total_feed(x)?;
        let mut f = 0.0;
        for (b, xi) in self.biomasses.iter().zip(x.iter()) {
            let (y, _, _) = b.yield_at(total)?;
            f += xi * (b.cost - self.revenue * y);
        }
        Ok(f)
    }

    fn gradient(&self, x: &Point) -> Result<DVector<f64>> {
        let total = self.total_feed(x)?;
        let (y, y1, _) = self.yields(total)?;
        let r = self.revenue;
        let shared = r * x.dot(&y1);
        Ok(self.costs() - y * r - DVector::from_element(self.len(), shared))
    }

    fn hessian(&self, x: &Point) -> Result<DMatrix<f64>> {
        let total = self.total_feed(x)?;
        let (_, y1, y2) = self.yields(total)?;
        let r = self.revenue;
        let curvature = x.dot(&y2);
        let k = self.len();
        Ok(DMatrix::from_fn(k, k, |i, j| -r * (y1[i] + y1[j] + curvature)))
    }
}

/// `x0 = 1/(10K)` for every biomass, a ten-day retention time.
pub fn initial_point(k: usize) -> Result<Point> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one biomass".into()));
    }
    Ok(DVector::from_element(k, 1.0 / (10.0 * k as f64)))
}

/// Progress summary of a run against the known minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// `(f_final - f_min) / (f_init - f_min)`; 0 when undefined.
    pub normalized_cost: f64,
    pub suboptimality: f64,
    /// False when `f_init <= f_min` so the ratio is undefined.
    pub defined: bool,
}

pub fn normalized_cost(f_initial: f64, f_final: f64, f_min: f64) -> RunMetrics {
    let suboptimality = f_final - f_min;
    let span = f_initial - f_min;
    if span > 0.0 {
        RunMetrics { normalized_cost: suboptimality / span, suboptimality, defined: true }
    } else {
        RunMetrics { normalized_cost: 0.0, suboptimality, defined: false }
    }
}

pub fn trace_metrics(trace: &OptimizationTrace, f_min: f64) -> RunMetrics {
    normalized_cost(trace.f_initial, trace.final_value(), f_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{check_derivatives, derivative_1d};
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn sample_problem(variant: Variant, k: usize, seed: u64) -> BiomassProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let biomasses = (0..k)
            .map(|_| {
                let g0 = rng.random_range(40.0..120.0);
                let alpha = rng.random_range(0.1..0.6);
                let curve = match variant {
                    Variant::Cone => YieldParams::Cone { k: rng.random_range(0.05..0.3), n: rng.random_range(1.0..3.0) },
                    Variant::Exponential => YieldParams::Exponential { tau: rng.random_range(3.0..20.0) },
                    Variant::Cauchy => YieldParams::Cauchy { tau: rng.random_range(3.0..20.0) },
                };
                Biomass::new(alpha * DEFAULT_REVENUE * g0, g0, curve).unwrap()
            })
            .collect();
        BiomassProblem::new(biomasses, DEFAULT_REVENUE).unwrap()
    }

    #[test]
    fn break_even_and_linearity() {
        let curve = YieldParams::Exponential { tau: 5.0 };
        let x = 0.2;
        let (y, _, _) = big_yield(10.0, &curve, x).unwrap();
        let b = Biomass::new(DEFAULT_REVENUE * y, 10.0, curve).unwrap();
        let p = BiomassProblem::new(vec![b], DEFAULT_REVENUE).unwrap();
        assert_relative_eq!(p.value(&dvector![x]).unwrap(), 0.0, epsilon = 1e-12);

        let p = sample_problem(Variant::Cone, 4, 1);
        let x = dvector![0.01, 0.02, 0.0, 0.05];
        let doubled = BiomassProblem::new(
            p.biomasses().iter().map(|b| Biomass { cost: 2.0 * b.cost, ..*b }).collect(),
            p.revenue(),
        )
        .unwrap();
        assert_relative_eq!(
            doubled.value(&x).unwrap() - p.value(&x).unwrap(),
            x.dot(&p.costs()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn one_dimensional_gradient() {
        let p = sample_problem(Variant::Cauchy, 1, 3);
        for x in [0.01, 0.08, 0.5] {
            let g = p.gradient(&dvector![x]).unwrap()[0];
            let b = p.biomasses()[0];
            let (y, y1, _) = b.yield_at(x).unwrap();
            assert_relative_eq!(g, b.cost - p.revenue() * (y + x * y1), max_relative = 1e-12);
            assert_relative_eq!(g, derivative_1d(|s| p.single_cost(0, s).unwrap(), x), max_relative = 1e-6);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for variant in Variant::ALL {
            let p = sample_problem(variant, 6, 17);
            for _ in 0..30 {
                let x = DVector::from_fn(6, |_, _| rng.random_range(0.001..0.1));
                let err = check_derivatives(&p, &x).unwrap();
                assert!(err <= 1e-5, "{variant}: {err}");
            }
        }
    }

    #[test]
    fn hessian_is_dense_and_symmetric() {
        let p = sample_problem(Variant::Cone, 7, 2);
        let h = p.hessian(&DVector::from_element(7, 0.014)).unwrap();
        assert!(h.iter().all(|v| *v != 0.0));
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn tiny_feed_hessian_drops_curvature_term() {
        let p = sample_problem(Variant::Exponential, 3, 4);
        let x = DVector::from_element(3, 1e-9);
        let total = x.sum();
        let (_, y1, _) = p.yields(total).unwrap();
        let h = p.hessian(&x).unwrap();
        let r = p.revenue();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(h[(i, j)], -r * (y1[i] + y1[j]), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn domain_errors() {
        let p = sample_problem(Variant::Cone, 2, 5);
        assert!(matches!(p.value(&dvector![0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(p.value(&dvector![-0.1, 0.3]), Err(Error::Domain(_))));
        assert!(p.value(&dvector![0.1]).is_err());
        assert!(Biomass::new(-1.0, 1.0, YieldParams::Cauchy { tau: 1.0 }).is_err());
        assert!(Biomass::new(1.0, 0.0, YieldParams::Cauchy { tau: 1.0 }).is_err());
        assert!(BiomassProblem::new(vec![], 6.0).is_err());
    }

    #[test]
    fn starting_point() {
        assert_eq!(initial_point(1).unwrap(), dvector![0.1]);
        let x = initial_point(10).unwrap();
        assert!(x.iter().all(|v| (*v - 0.01).abs() < 1e-18));
        for k in [1, 3, 7, 20, 2000] {
            assert_relative_eq!(1.0 / initial_point(k).unwrap().sum(), 10.0, max_relative = 1e-12);
        }
        assert!(initial_point(0).is_err());
    }

    #[test]
    fn metric_definitions() {
        assert_eq!(normalized_cost(10.0, 2.0, 2.0).normalized_cost, 0.0);
        assert_eq!(normalized_cost(10.0, 10.0, 2.0).normalized_cost, 1.0);
        assert_eq!(normalized_cost(10.0, 6.0, 2.0).normalized_cost, 0.5);
        assert_eq!(normalized_cost(10.0, 6.0, 2.0).suboptimality, 4.0);
        let m = normalized_cost(2.0, 2.0, 2.0);
        assert!(!m.defined);
        assert_eq!(m.normalized_cost, 0.0);
    }
}
