use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::odf::PlanarOdf;
use super::packing::PackingTable;
use super::weibull::BundleStatistics;
use crate::error::{Error, Result};
use crate::homogenize::{AgglomerationParams, FillerGeometry};
use crate::quadrature::{integrate_piecewise, AdaptiveTolerance};

/// Embedment length at which a fibre stops pulling out and breaks instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedmentCriterion {
    /// Pull-out while l < L_cθ. The force balance already equates the
    /// fibre strength with the friction over one embedded side, so L_cθ is
    /// the one-sided critical embedment.
    #[default]
    CriticalLength,
    /// Pull-out while l < L_cθ/2.
    HalfCriticalLength,
}

/// Strength entering the rupture work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuptureStrength {
    /// σ_ult for every orientation.
    #[default]
    Nominal,
    /// The inclined strength σ_ultθ.
    Oblique,
}

/// Micromechanical inputs of the bridging model, SI units (Pa, m, J/m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractureParams {
    pub g0: f64,
    pub sigma_ult: f64,
    pub tau_int: f64,
    pub a_const: f64,
    pub mu_snub: f64,
    pub e_cnt: f64,
    pub geom: FillerGeometry,
    pub f_p: f64,
    pub embedment: EmbedmentCriterion,
    pub rupture: RuptureStrength,
}

impl Default for FractureParams {
    /// MWCNT/epoxy reference values.
    fn default() -> Self {
        Self {
            g0: 133.0,
            sigma_ult: 35e9,
            tau_int: 47e6,
            a_const: 0.083,
            mu_snub: 0.0,
            e_cnt: 700e9,
            geom: FillerGeometry {
                length: 3.21e-6,
                diameter: 10.35e-9,
                interphase_thickness: 31e-9,
            },
            f_p: 0.01,
            embedment: EmbedmentCriterion::CriticalLength,
            rupture: RuptureStrength::Nominal,
        }
    }
}

impl FractureParams {
    pub fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        let positive = [
            ("G0", self.g0),
            ("sigma_ult", self.sigma_ult),
            ("tau_int", self.tau_int),
            ("E_cnt", self.e_cnt),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.a_const >= 0.0) || !(self.mu_snub >= 0.0) {
            return Err(Error::domain("A and mu must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.f_p) {
            return Err(Error::domain(format!(
                "filler fraction {} outside [0, 1)",
                self.f_p
            )));
        }
        Ok(())
    }

    pub fn with_fraction(&self, f_p: f64) -> Self {
        Self { f_p, ..*self }
    }

    pub fn cnt_section(&self) -> BundleSection {
        BundleSection::of(1.0, 1.0, self.geom.diameter)
    }
}

/// Cross-section area and perimeter of a single CNT or an equivalent bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleSection {
    pub area: f64,
    pub perimeter: f64,
}

impl BundleSection {
    fn of(n: f64, ratio: f64, d: f64) -> Self {
        Self {
            area: n * (PI * d * d / 4.0),
            perimeter: PI * ratio * d,
        }
    }

    /// N CNTs packed in their enclosing circle: A = N·A_cnt, P = π·R(N)·D.
    pub fn bundle(n: f64, diameter: f64, table: &PackingTable) -> Result<Self> {
        let (r, _) = table.packing_ratio(n)?;
        Ok(Self::of(n, r, diameter))
    }
}

/// σ_ultθ = σ_ult(1 − A tanθ), clamped at zero.
pub fn oblique_strength(theta: f64, params: &FractureParams) -> f64 {
    (params.sigma_ult * (1.0 - params.a_const * theta.tan())).max(0.0)
}

fn critical_length_for(theta: f64, params: &FractureParams, s: BundleSection) -> f64 {
    s.area * oblique_strength(theta, params)
        / (s.perimeter * params.tau_int * (params.mu_snub * theta).exp())
}

/// L_cθ from A·σ_ultθ = L_cθ·P·τ·e^{μθ}, for a bundle of `n` CNTs.
pub fn critical_length(
    theta: f64,
    params: &FractureParams,
    n: f64,
    table: &PackingTable,
) -> Result<f64> {
    Ok(critical_length_for(
        theta,
        params,
        section(params, n, table)?,
    ))
}

fn section(params: &FractureParams, n: f64, table: &PackingTable) -> Result<BundleSection> {
    if n == 1.0 {
        Ok(params.cnt_section())
    } else {
        BundleSection::bundle(n, params.geom.diameter, table)
    }
}

fn switch_length(theta: f64, params: &FractureParams, s: BundleSection) -> f64 {
    let lc = critical_length_for(theta, params, s);
    match params.embedment {
        EmbedmentCriterion::CriticalLength => lc,
        EmbedmentCriterion::HalfCriticalLength => 0.5 * lc,
    }
}

fn rupture_work(theta: f64, params: &FractureParams, s: BundleSection) -> f64 {
    let sigma = match params.rupture {
        RuptureStrength::Nominal => params.sigma_ult,
        RuptureStrength::Oblique => oblique_strength(theta, params),
    };
    s.area * sigma * sigma * params.geom.length / (2.0 * params.e_cnt)
}

fn pullout_work(l: f64, theta: f64, params: &FractureParams, s: BundleSection) -> f64 {
    0.5 * l * l * params.tau_int * s.perimeter * (params.mu_snub * theta).exp()
}

/// Work of fracture of one fibre (or bundle of `n`) with embedment `l` at angle θ.
pub fn work_of_fracture(
    l: f64,
    theta: f64,
    n: f64,
    params: &FractureParams,
    table: &PackingTable,
) -> Result<f64> {
    if !(0.0..=0.5 * params.geom.length).contains(&l) {
        return Err(Error::domain(format!("embedment {l} outside [0, L/2]")));
    }
    let s = section(params, n, table)?;
    Ok(if l < switch_length(theta, params, s) {
        pullout_work(l, theta, params, s)
    } else {
        rupture_work(theta, params, s)
    })
}

/// ∫₀^{L/2} W(l, θ) dl split into its pull-out and rupture parts.
fn embedment_integral(theta: f64, params: &FractureParams, s: BundleSection) -> (f64, f64) {
    let half = 0.5 * params.geom.length;
    let sw = switch_length(theta, params, s);
    let lp = sw.min(half);
    let pull = params.tau_int * s.perimeter * (params.mu_snub * theta).exp() * lp.powi(3) / 6.0;
    let rup = (half - sw).max(0.0) * rupture_work(theta, params, s);
    (pull, rup)
}

/// Angles in (θ_min, θ_max) where the θ-integrand has a kink or jump.
fn kinks(params: &FractureParams, odf: &PlanarOdf, s: BundleSection) -> Vec<f64> {
    let (lo, hi) = odf.bounds();
    let mut pts = vec![lo];
    let mut upper = hi;
    if params.a_const > 0.0 {
        let clamp = (1.0 / params.a_const).atan();
        if clamp > lo && clamp < hi {
            pts.push(clamp);
            upper = clamp;
        }
    }
    // switch length is decreasing in θ; locate where it crosses L/2
    let half = 0.5 * params.geom.length;
    let f = |t: f64| switch_length(t, params, s) - half;
    if f(lo) > 0.0 && f(upper) < 0.0 {
        let (mut a, mut b) = (lo, upper);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        pts.push(0.5 * (a + b));
    }
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn theta_tolerance() -> AdaptiveTolerance {
    AdaptiveTolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 4000,
    }
}

/// Pull-out and rupture contributions to the bridging energy, J/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub pullout: f64,
    pub rupture: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.pullout + self.rupture
    }
}

fn bridging_parts(
    params: &FractureParams,
    odf: &PlanarOdf,
    s: BundleSection,
) -> Result<EnergyParts> {
    params.validate()?;
    let pts = kinks(params, odf, s);
    let pref = 2.0 * params.f_p / (s.area * params.geom.length);
    let weight = |t: f64| t.cos() * odf.density(t);
    let tol = theta_tolerance();
    let pull = integrate_piecewise(
        |t| weight(t) * embedment_integral(t, params, s).0,
        &pts,
        tol,
    )?;
    // either part may be negligible next to the other; accuracy is judged on the sum
    let floor = AdaptiveTolerance {
        abs: tol.rel * pull.abs(),
        ..tol
    };
    let rup = integrate_piecewise(
        |t| weight(t) * embedment_integral(t, params, s).1,
        &pts,
        floor,
    )?;
    let pull = if rup.abs() > pull.abs() {
        integrate_piecewise(
            |t| weight(t) * embedment_integral(t, params, s).0,
            &pts,
            AdaptiveTolerance {
                abs: tol.rel * rup.abs(),
                ..tol
            },
        )?
    } else {
        pull
    };
    Ok(EnergyParts {
        pullout: pref * pull,
        rupture: pref * rup,
    })
}

/// Bridging energy of well-dispersed CNTs, G_PF in J/m².
pub fn fracture_energy_uniform(params: &FractureParams, odf: &PlanarOdf) -> Result<f64> {
    Ok(bridging_parts(params, odf, params.cnt_section())?.total())
}

/// Bridging energy when every CNT sits in a bundle of `n`.
pub fn fracture_energy_bundle(
    n: f64,
    params: &FractureParams,
    odf: &PlanarOdf,
    table: &PackingTable,
) -> Result<f64> {
    Ok(fracture_energy_bundle_parts(n, params, odf, table)?.total())
}

pub fn fracture_energy_bundle_parts(
    n: f64,
    params: &FractureParams,
    odf: &PlanarOdf,
    table: &PackingTable,
) -> Result<EnergyParts> {
    if !(n >= 1.0) {
        return Err(Error::domain(format!("bundle size {n} below one")));
    }
    bridging_parts(params, odf, section(params, n, table)?)
}

/// Bundle energy averaged over the truncated Weibull law of bundle sizes.
pub fn fracture_energy_agglomerated(
    params: &FractureParams,
    odf: &PlanarOdf,
    stats: &BundleStatistics,
    table: &PackingTable,
) -> Result<f64> {
    if stats.is_degenerate() {
        return fracture_energy_bundle(stats.n_min, params, odf, table);
    }
    if stats.n_max > table.max_n() {
        return Err(Error::domain(format!(
            "N_max = {} exceeds the packing table range ({})",
            stats.n_max,
            table.max_n()
        )));
    }
    let (lo, hi) = (stats.n_min, stats.n_max);
    let mut pts = vec![lo, hi];
    pts.extend(table.nodes().iter().copied().filter(|&n| n > lo && n < hi));
    for k in [-8.0, -5.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0, 8.0] {
        let n = stats.n_mu + k * stats.n_sigma;
        if n > lo && n < hi {
            pts.push(n);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut failure = None;
    let tol = AdaptiveTolerance {
        abs: 0.0,
        rel: 1e-10,
        max_intervals: 2000,
    };
    let value = integrate_piecewise(
        |n| match fracture_energy_bundle(n, params, odf, table) {
            Ok(g) => g * stats.pdf(n),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &pts,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Matrix toughness plus the bridging contributions of dispersed and
/// bundled CNTs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractureEnergy {
    pub g0: f64,
    pub g_pf: f64,
    pub g_pf_agg: f64,
    pub zeta: f64,
    pub g_c: f64,
}

pub fn total_fracture_energy(
    params: &FractureParams,
    odf: &PlanarOdf,
    agg: &AgglomerationParams,
    stats: &BundleStatistics,
    table: &PackingTable,
) -> Result<FractureEnergy> {
    agg.validate()?;
    let g_pf = fracture_energy_uniform(params, odf)?;
    let g_pf_agg = if agg.zeta > 0.0 {
        fracture_energy_agglomerated(params, odf, stats, table)?
    } else {
        0.0
    };
    let g_c = params.g0 + (1.0 - agg.zeta) * g_pf + agg.zeta * g_pf_agg;
    Ok(FractureEnergy {
        g0: params.g0,
        g_pf,
        g_pf_agg,
        zeta: agg.zeta,
        g_c,
    })
}

/// Filler volume fraction from its mass fraction and the two densities.
pub fn mass_to_volume_fraction(mass_fraction: f64, rho_filler: f64, rho_matrix: f64) -> f64 {
    let vf = mass_fraction / rho_filler;
    let vm = (1.0 - mass_fraction) / rho_matrix;
    vf / (vf + vm)
}
