use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::oracle::univariate_optimum;
use super::{Biomass, BiomassProblem, Variant, YieldParams, DEFAULT_REVENUE};
use crate::error::{Error, Result};
use crate::linalg::psd_cholesky;

/// Draws per window used to judge the rejection rate.
pub const REJECTION_WINDOW: usize = 10_000;
/// Generation aborts when a full window rejects more than this fraction.
pub const MAX_REJECTION_RATE: f64 = 0.99;

/// Multivariate normal over transformed biomass parameters.
///
/// Coordinates are `(logit alpha, ln g0, ln n, ln k)` for the cone curve and
/// `(logit alpha, ln g0, ln tau)` otherwise, where `alpha = c / (r g0)` is the
/// cost margin. Biomasses whose best single-feed rate falls outside
/// `rejection_interval` are redrawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MvnGenConfig {
    pub variant: Variant,
    pub mean: Vec<f64>,
    /// Row-major square matrix.
    pub covariance: Vec<Vec<f64>>,
    #[serde(default = "default_interval")]
    pub rejection_interval: [f64; 2],
    #[serde(default = "default_revenue")]
    pub revenue: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_interval() -> [f64; 2] {
    [0.01, 100.0]
}

fn default_revenue() -> f64 {
    DEFAULT_REVENUE
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl MvnGenConfig {
    /// Synthetic defaults, not fitted to any real data set.
    pub fn synthetic(variant: Variant) -> Self {
        let (mean, sd): (Vec<f64>, Vec<f64>) = match variant {
            // a wide spread in the cone rate gives competing single-biomass minima
            Variant::Cone => (vec![logit(0.35), 80f64.ln(), 2.5f64.ln(), 0.12f64.ln()], vec![0.6, 0.5, 0.3, 1.4]),
            Variant::Exponential => (vec![logit(0.35), 80f64.ln(), 8f64.ln()], vec![0.6, 0.5, 0.8]),
            Variant::Cauchy => (vec![logit(0.35), 80f64.ln(), 10f64.ln()], vec![0.6, 0.5, 0.8]),
        };
        let covariance =
            (0..sd.len()).map(|i| (0..sd.len()).map(|j| if i == j { sd[i] * sd[i] } else { 0.0 }).collect()).collect();
        Self { variant, mean, covariance, rejection_interval: default_interval(), revenue: DEFAULT_REVENUE, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn arity(&self) -> usize {
        match self.variant {
            Variant::Cone => 4,
            Variant::Exponential | Variant::Cauchy => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.arity();
        if self.mean.len() != d || self.covariance.len() != d || self.covariance.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidArgument(format!("{} generator needs a {d}-vector mean and {d}x{d} covariance", self.variant)));
        }
        let [lo, hi] = self.rejection_interval;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::InvalidArgument(format!("bad rejection interval [{lo}, {hi}]")));
        }
        if !(self.revenue > 0.0) {
            return Err(Error::InvalidArgument("revenue must be positive".into()));
        }
        Ok(())
    }

    fn covariance_matrix(&self) -> Result<DMatrix<f64>> {
        let d = self.arity();
        let c = DMatrix::from_fn(d, d, |i, j| self.covariance[i][j]);
        let asym = (&c - c.transpose()).amax();
        if asym > 1e-12 * c.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(c)
    }

    fn biomass_from(&self, theta: &DVector<f64>) -> Result<Biomass> {
        let alpha = 1.0 / (1.0 + (-theta[0]).exp());
        let g0 = theta[1].exp();
        let curve = match self.variant {
            Variant::Cone => YieldParams::Cone { n: theta[2].exp(), k: theta[3].exp() },
            Variant::Exponential => YieldParams::Exponential { tau: theta[2].exp() },
            Variant::Cauchy => YieldParams::Cauchy { tau: theta[2].exp() },
        };
        Biomass::new(alpha * self.revenue * g0, g0, curve)
    }
}

/// Draw counts from a generator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationStats {
    pub drawn: usize,
    pub accepted: usize,
}

/// `k` independent biomasses from `cfg`, deterministic in `cfg.seed`.
pub fn generate_problem(cfg: &MvnGenConfig, k: usize) -> Result<BiomassProblem> {
    generate_with_stats(cfg, k).map(|(p, _)| p)
}

pub fn generate_with_stats(cfg: &MvnGenConfig, k: usize) -> Result<(BiomassProblem, GenerationStats)> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one biomass".into()));
    }
    cfg.validate()?;
    let chol = psd_cholesky(&cfg.covariance_matrix()?)?;
    let mean = DVector::from_column_slice(&cfg.mean);
    let d = mean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [lo, hi] = cfg.rejection_interval;

    let mut out = Vec::with_capacity(k);
    let mut stats = GenerationStats { drawn: 0, accepted: 0 };
    let mut window_accepted = 0;
    while out.len() < k {
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let theta = &mean + &chol * z;
        stats.drawn += 1;
        let b = cfg.biomass_from(&theta)?;
        let (x_star, _) = univariate_optimum(&b, cfg.revenue)?;
        if (lo..=hi).contains(&x_star) {
            out.push(b);
            stats.accepted += 1;
            window_accepted += 1;
        }
        if stats.drawn % REJECTION_WINDOW == 0 {
            if (window_accepted as f64) < (1.0 - MAX_REJECTION_RATE) * REJECTION_WINDOW as f64 {
                return Err(Error::DegenerateGenerator { accepted: window_accepted, drawn: REJECTION_WINDOW });
            }
            window_accepted = 0;
        }
    }
    Ok((BiomassProblem::new(out, cfg.revenue)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_covariance_repeats_the_mean() {
        let mut cfg = MvnGenConfig::synthetic(Variant::Cone);
        cfg.covariance = vec![vec![0.0; 4]; 4];
        let p = generate_problem(&cfg, 5).unwrap();
        let first = p.biomasses()[0];
        assert!(p.biomasses().iter().all(|b| *b == first));
        assert!((first.cost_margin(cfg.revenue) - 0.35).abs() < 1e-12);
        match first.curve {
            YieldParams::Cone { n, k } => assert!((n - 2.5).abs() < 1e-12 && (k - 0.12).abs() < 1e-14),
            other => panic!("unexpected curve {other:?}"),
        }
    }

    #[test]
    fn deterministic_in_seed() {
        for v in Variant::ALL {
            let cfg = MvnGenConfig::synthetic(v).with_seed(4);
            assert_eq!(generate_problem(&cfg, 30).unwrap(), generate_problem(&cfg, 30).unwrap());
            assert_ne!(generate_problem(&cfg, 30).unwrap(), generate_problem(&cfg.clone().with_seed(5), 30).unwrap());
        }
    }

    #[test]
    fn optima_fall_inside_interval() {
        for v in Variant::ALL {
            let cfg = MvnGenConfig::synthetic(v).with_seed(1);
            let (p, stats) = generate_with_stats(&cfg, 200).unwrap();
            assert!(stats.accepted as f64 >= 0.5 * stats.drawn as f64, "{v}: {stats:?}");
            for b in p.biomasses() {
                let (x, _) = univariate_optimum(b, p.revenue()).unwrap();
                assert!((0.01..=100.0).contains(&x));
            }
        }
    }

    #[test]
    fn unprofitable_config_aborts() {
        let mut cfg = MvnGenConfig::synthetic(Variant::Exponential);
        cfg.mean[0] = logit(0.999_999);
        cfg.covariance = vec![vec![0.0; 3]; 3];
        assert!(matches!(generate_problem(&cfg, 1), Err(Error::DegenerateGenerator { .. })));
    }

    #[test]
    fn malformed_configs() {
        let mut cfg = MvnGenConfig::synthetic(Variant::Cauchy);
        cfg.mean.push(0.0);
        assert!(generate_problem(&cfg, 1).is_err());
        let mut cfg = MvnGenConfig::synthetic(Variant::Cauchy);
        cfg.covariance[0][1] = 0.3;
        assert!(matches!(generate_problem(&cfg, 1), Err(Error::NotSymmetric(_))));
        assert!(generate_problem(&MvnGenConfig::synthetic(Variant::Cone), 0).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = MvnGenConfig::synthetic(Variant::Cone).with_seed(12);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: MvnGenConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        let minimal: MvnGenConfig =
            serde_json::from_str(r#"{"variant":"cauchy","mean":[0,4,2],"covariance":[[1,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
        assert_eq!(minimal.rejection_interval, [0.01, 100.0]);
        assert_eq!(minimal.revenue, 6.0);
    }
}
