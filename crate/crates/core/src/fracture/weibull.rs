use statrs::distribution::{Continuous, ContinuousCDF, Weibull};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Coefficient of variation of a Weibull law with shape k.
fn weibull_cv(k: f64) -> f64 {
    let ratio_m1 = (ln_gamma(1.0 + 2.0 / k) - 2.0 * ln_gamma(1.0 + 1.0 / k)).exp_m1();
    ratio_m1.max(0.0).sqrt()
}

/// Scale λ and shape k of the (untruncated) Weibull law with the given mean
/// and standard deviation. The coefficient of variation is monotone in k, so
/// k is found by bisection in ln k.
pub fn weibull_fit(n_mu: f64, n_sigma: f64) -> Result<(f64, f64)> {
    if !(n_mu > 0.0 && n_sigma > 0.0) {
        return Err(Error::domain(format!(
            "Weibull fit needs positive mean and deviation, got {n_mu}, {n_sigma}"
        )));
    }
    let cv = n_sigma / n_mu;
    let (mut lo, mut hi) = (0.05f64.ln(), 1e5f64.ln());
    let f = |lk: f64| weibull_cv(lk.exp()) - cv;
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(Error::domain(format!(
            "coefficient of variation {cv} not bracketed by Weibull shapes in [0.05, 1e5]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let k = (0.5 * (lo + hi)).exp();
    let lambda = n_mu / gamma(1.0 + 1.0 / k);
    Ok((lambda, k))
}

/// Distribution of the number of CNTs per bundle: a Weibull law fitted to
/// (N_μ, N_σ), truncated to [N_min, N_max] and renormalised.
#[derive(Debug, Clone)]
pub struct BundleStatistics {
    pub n_mu: f64,
    pub n_sigma: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub lambda: f64,
    pub k: f64,
    dist: Option<Weibull>,
    mass: f64,
}

impl BundleStatistics {
    pub fn fit(n_mu: f64, n_sigma: f64, n_min: f64, n_max: f64) -> Result<Self> {
        if !(n_min >= 1.0 && n_max >= n_min) {
            return Err(Error::domain(format!(
                "bundle size bounds [{n_min}, {n_max}] invalid"
            )));
        }
        if n_min == n_max {
            return Ok(Self::degenerate(n_min));
        }
        let (lambda, k) = weibull_fit(n_mu, n_sigma)?;
        let dist = Weibull::new(k, lambda).map_err(|e| Error::domain(e.to_string()))?;
        let mass = dist.cdf(n_max) - dist.cdf(n_min);
        if !(mass > 1e-12) {
            return Err(Error::domain(format!(
                "Weibull law (lambda={lambda}, k={k}) has no mass on [{n_min}, {n_max}]"
            )));
        }
        Ok(Self {
            n_mu,
            n_sigma,
            n_min,
            n_max,
            lambda,
            k,
            dist: Some(dist),
            mass,
        })
    }

    /// All bundles hold exactly `n` CNTs.
    pub fn degenerate(n: f64) -> Self {
        Self {
            n_mu: n,
            n_sigma: 0.0,
            n_min: n,
            n_max: n,
            lambda: n,
            k: f64::INFINITY,
            dist: None,
            mass: 1.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.dist.is_none()
    }

    /// Renormalised density on [N_min, N_max].
    pub fn pdf(&self, n: f64) -> f64 {
        match &self.dist {
            Some(d) if n >= self.n_min && n <= self.n_max => d.pdf(n) / self.mass,
            _ => 0.0,
        }
    }

    /// Probability mass of the untruncated law inside [N_min, N_max].
    pub fn retained_mass(&self) -> f64 {
        self.mass
    }
}
