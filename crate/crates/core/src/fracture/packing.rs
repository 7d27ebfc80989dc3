use std::path::Path;

use crate::error::{Error, Result};

/// Bundled table shipped with the crate.
pub const DEFAULT_TABLE: &str = include_str!("../../data/packing.txt");

/// Enclosing-circle ratio R = D_ed/D_cnt and packing density ρ_A for N
/// equal circles packed in a circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingTable {
    n: Vec<f64>,
    ratio: Vec<f64>,
    density: Vec<f64>,
    slopes: Vec<f64>,
}

impl Default for PackingTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled packing table")
    }
}

impl PackingTable {
    /// Rows of (N, ρ_A); R follows from R = sqrt(N/ρ_A).
    pub fn from_density(rows: &[(f64, f64)]) -> Result<Self> {
        let rows: Vec<_> = rows
            .iter()
            .map(|&(n, rho)| (n, (n / rho).sqrt(), rho))
            .collect();
        Self::from_rows(&rows)
    }

    /// Rows of (N, R, ρ_A).
    pub fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::domain("packing table needs at least two rows"));
        }
        let (n, rest): (Vec<f64>, Vec<(f64, f64)>) =
            rows.iter().map(|&(a, b, c)| (a, (b, c))).unzip();
        let (ratio, density): (Vec<f64>, Vec<f64>) = rest.into_iter().unzip();
        if n[0] != 1.0 || ratio[0] != 1.0 || density[0] != 1.0 {
            return Err(Error::domain(
                "packing table must start with N=1, R=1, rho=1",
            ));
        }
        for w in n.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain(
                    "packing table N column must be strictly increasing",
                ));
            }
        }
        for w in ratio.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain(
                    "packing table R column must be strictly increasing",
                ));
            }
        }
        for (i, (&ni, (&ri, &di))) in n.iter().zip(ratio.iter().zip(&density)).enumerate() {
            if !(di > 0.0 && di <= 1.0) {
                return Err(Error::domain(format!(
                    "packing density {di} in row {i} outside (0, 1]"
                )));
            }
            let implied = (ni / di).sqrt();
            if (implied - ri).abs() > 5e-3 * ri {
                return Err(Error::domain(format!(
                    "row N={ni}: R={ri} inconsistent with sqrt(N/rho)={implied:.4}"
                )));
            }
        }
        let slopes = pchip_slopes(&n, &density);
        Ok(Self {
            n,
            ratio,
            density,
            slopes,
        })
    }

    /// Whitespace-separated text with `#` comments; two columns (N, ρ_A)
    /// or three columns (N, R, ρ_A).
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut two_col = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse).collect();
            let vals =
                vals.map_err(|e| Error::domain(format!("packing table line {}: {e}", lineno + 1)))?;
            let is_two = match vals.len() {
                2 => true,
                3 => false,
                k => {
                    return Err(Error::domain(format!(
                        "packing table line {}: {k} columns",
                        lineno + 1
                    )))
                }
            };
            if *two_col.get_or_insert(is_two) != is_two {
                return Err(Error::domain(format!(
                    "packing table line {}: mixed column counts",
                    lineno + 1
                )));
            }
            rows.push(if is_two {
                (vals[0], (vals[0] / vals[1]).sqrt(), vals[1])
            } else {
                (vals[0], vals[1], vals[2])
            });
        }
        Self::from_rows(&rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn max_n(&self) -> f64 {
        *self.n.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.n
    }

    /// (R, ρ_A) at a possibly non-integer bundle size. Tabulated sizes return
    /// the tabulated pair; in between, ρ_A is interpolated with a
    /// shape-preserving cubic and R = sqrt(N/ρ_A).
    pub fn packing_ratio(&self, n: f64) -> Result<(f64, f64)> {
        if !(n >= 1.0 && n <= self.max_n()) {
            return Err(Error::domain(format!(
                "bundle size {n} outside the table range [1, {}]",
                self.max_n()
            )));
        }
        let k = match self.n.binary_search_by(|v| v.total_cmp(&n)) {
            Ok(i) => return Ok((self.ratio[i], self.density[i])),
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.n[k], self.n[k + 1]);
        let h = x1 - x0;
        let t = (n - x0) / h;
        let (y0, y1) = (self.density[k], self.density[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t).powi(2);
        let h10 = t * (1.0 - t).powi(2);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let rho = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        Ok(((n / rho).sqrt(), rho))
    }
}

/// Fritsch-Carlson derivative estimates for monotone piecewise-cubic Hermite
/// interpolation.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}
