//! Quadrature rules shared by the micromechanics modules.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).unwrap();
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// Gauss-Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveTolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-12,
            max_intervals: 2000,
        }
    }
}

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs, rel*|I|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: AdaptiveTolerance,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|s| s.2).sum();
        let err: f64 = intervals.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) || err < 64.0 * f64::EPSILON * total.abs() {
            return Ok(total);
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "adaptive quadrature on [{a}, {b}] stalled with error estimate {err:e} (value {total:e})"
            )));
        }
        // intervals at floating-point resolution cannot be bisected further
        let splittable = |s: &(f64, f64, f64, f64)| s.1 - s.0 > 1e-14 * (s.0.abs() + s.1.abs());
        let Some((idx, _)) = intervals
            .iter()
            .enumerate()
            .filter(|(_, s)| splittable(s))
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
        else {
            return Ok(total);
        };
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over consecutive sub-intervals split at `breaks`.
///
/// The relative tolerance applies to the whole integral, so pieces that
/// contribute negligibly are not refined on their own account.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    tol: AdaptiveTolerance,
) -> Result<f64> {
    let pieces: Vec<(f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    let crude: f64 = pieces
        .iter()
        .map(|&(a, b)| gk15(&mut f, a, b).0.abs())
        .sum();
    let floor = tol.abs.max(tol.rel * crude / pieces.len().max(1) as f64);
    let local = AdaptiveTolerance { abs: floor, ..tol };
    let mut total = 0.0;
    for (a, b) in pieces {
        total += integrate_adaptive(&mut f, a, b, local)?;
    }
    Ok(total)
}
