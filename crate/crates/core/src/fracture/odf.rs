use std::f64::consts::FRAC_PI_2;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveTolerance};

/// Planar orientation density g(θ) ∝ sin^(2p−1)θ · cos^(2q−1)θ on [θ_min, θ_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarOdf {
    pub p: f64,
    pub q: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    norm: f64,
}

fn tight() -> AdaptiveTolerance {
    AdaptiveTolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 4000,
    }
}

impl PlanarOdf {
    pub fn new(p: f64, q: f64, theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(p >= 0.5 && q >= 0.5) || !p.is_finite() || !q.is_finite() {
            return Err(Error::domain(format!(
                "orientation shape parameters p={p}, q={q} must be >= 1/2"
            )));
        }
        if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= FRAC_PI_2) {
            return Err(Error::domain(format!(
                "orientation bounds [{theta_min}, {theta_max}] must satisfy 0 <= min < max <= pi/2"
            )));
        }
        let mut odf = Self {
            p,
            q,
            theta_min,
            theta_max,
            norm: 1.0,
        };
        odf.norm = if theta_min == 0.0 && theta_max == FRAC_PI_2 {
            // ∫₀^{π/2} sin^(2p−1) cos^(2q−1) = B(p, q)/2
            0.5 * (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)).exp()
        } else {
            integrate_adaptive(|t| odf.kernel(t), theta_min, theta_max, tight())?
        };
        Ok(odf)
    }

    /// p = q = 1/2 on [0, π/2]: every in-plane angle equally likely.
    pub fn random() -> Self {
        Self::new(0.5, 0.5, 0.0, FRAC_PI_2).unwrap()
    }

    fn kernel(&self, theta: f64) -> f64 {
        let s = theta.sin().max(0.0);
        let c = theta.cos().max(0.0);
        let a = 2.0 * self.p - 1.0;
        let b = 2.0 * self.q - 1.0;
        let sp = if a == 0.0 { 1.0 } else { s.powf(a) };
        let cp = if b == 0.0 { 1.0 } else { c.powf(b) };
        sp * cp
    }

    /// Density value; zero outside the support.
    pub fn density(&self, theta: f64) -> f64 {
        if theta < self.theta_min || theta > self.theta_max {
            0.0
        } else {
            self.kernel(theta) / self.norm
        }
    }

    /// Density with a domain check on θ.
    pub fn planar_odf(&self, theta: f64) -> Result<f64> {
        if theta < self.theta_min || theta > self.theta_max {
            return Err(Error::domain(format!(
                "angle {theta} outside [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        Ok(self.density(theta))
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.theta_min, self.theta_max)
    }

    /// Mean and standard deviation of θ.
    pub fn moments(&self) -> Result<(f64, f64)> {
        let (a, b) = self.bounds();
        let mean = integrate_adaptive(|t| t * self.density(t), a, b, tight())?;
        let var = integrate_adaptive(|t| (t - mean).powi(2) * self.density(t), a, b, tight())?;
        Ok((mean, var.max(0.0).sqrt()))
    }
}

/// Finds (p, q) ≥ 1/2 on [0, π/2] whose θ mean and standard deviation equal
/// the targets. Projected Newton iteration in (ln p, ln q) with a
/// finite-difference Jacobian.
pub fn fit_pq(theta_mu: f64, theta_sigma: f64) -> Result<(f64, f64)> {
    if !(0.0..=FRAC_PI_2).contains(&theta_mu) || !(theta_sigma > 0.0) {
        return Err(Error::domain(format!(
            "target mean {theta_mu} must lie in [0, pi/2] and deviation {theta_sigma} be positive"
        )));
    }
    let residual = |x: [f64; 2]| -> Result<[f64; 2]> {
        let odf = PlanarOdf::new(x[0].exp(), x[1].exp(), 0.0, FRAC_PI_2)?;
        let (m, s) = odf.moments()?;
        Ok([m - theta_mu, s - theta_sigma])
    };
    let floor = 0.5f64.ln();
    let project = |x: [f64; 2]| [x[0].max(floor), x[1].max(floor)];
    // a Gaussian-like start: tan²θ* = (2p−1)/(2q−1), variance ≈ 1/(4(p+q−1))
    let total = (1.0 / (4.0 * theta_sigma * theta_sigma) + 1.0).max(1.0);
    let t2 = theta_mu.tan().powi(2);
    let p0 = (0.5 + (total - 1.0) * t2 / (1.0 + t2)).max(0.5);
    let q0 = (total - p0).max(0.5);
    let mut x = project([p0.ln(), q0.ln()]);
    let mut r = residual(x)?;
    for _ in 0..100 {
        let rn = r[0].abs().max(r[1].abs());
        if rn < 1e-10 {
            return Ok((x[0].exp(), x[1].exp()));
        }
        let h = 1e-6;
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            xp[k] += h;
            let mut xm = x;
            xm[k] -= h;
            let rp = residual(xp)?;
            let rm = residual(xm)?;
            for i in 0..2 {
                jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = project([x[0] + step * dx[0], x[1] + step * dx[1]]);
            if let Ok(rt) = residual(trial) {
                if rt[0].abs().max(rt[1].abs()) < rn {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let rn = r[0].abs().max(r[1].abs());
    if rn < 1e-8 {
        return Ok((x[0].exp(), x[1].exp()));
    }
    Err(Error::domain(format!(
        "no p, q >= 1/2 reproduce mean {theta_mu} and deviation {theta_sigma} (closest miss {rn:e})"
    )))
}
