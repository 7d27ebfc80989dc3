//! Interior Eshelby tensors for prolate spheroids and spheres in an isotropic matrix.

use crate::error::{Error, Result};
use crate::tensor::{voigt_index, Mat6};

/// Below this distance from κ = 1 the sphere closed form is used.
pub const SPHERE_BRANCH: f64 = 1e-4;

/// Eshelby tensor in the engineering Voigt convention, symmetry axis x3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EshelbyTensor {
    m: Mat6,
    pub kappa: f64,
    pub nu_m: f64,
}

impl EshelbyTensor {
    pub fn matrix(&self) -> &Mat6 {
        &self.m
    }

    /// Tensor component S_ijkl (indices 0..3).
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let a = voigt_index(i, j);
        let b = voigt_index(k, l);
        let row_factor = if a < 3 { 1.0 } else { 2.0 };
        self.m[(a, b)] / row_factor
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > -1.0 && nu < 0.5 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "matrix Poisson ratio {nu} outside (-1, 0.5)"
        )))
    }
}

fn from_components(
    s1111: f64,
    s1122: f64,
    s1133: f64,
    s3311: f64,
    s3333: f64,
    s1212: f64,
    s1313: f64,
) -> Mat6 {
    let mut m = Mat6::zeros();
    m[(0, 0)] = s1111;
    m[(1, 1)] = s1111;
    m[(0, 1)] = s1122;
    m[(1, 0)] = s1122;
    m[(0, 2)] = s1133;
    m[(1, 2)] = s1133;
    m[(2, 0)] = s3311;
    m[(2, 1)] = s3311;
    m[(2, 2)] = s3333;
    m[(3, 3)] = 2.0 * s1313;
    m[(4, 4)] = 2.0 * s1313;
    m[(5, 5)] = 2.0 * s1212;
    m
}

pub fn eshelby_sphere(nu_m: f64) -> Result<EshelbyTensor> {
    check_nu(nu_m)?;
    let d = 15.0 * (1.0 - nu_m);
    let a = (7.0 - 5.0 * nu_m) / d;
    let b = (5.0 * nu_m - 1.0) / d;
    let c = (4.0 - 5.0 * nu_m) / d;
    Ok(EshelbyTensor {
        m: from_components(a, b, b, b, a, c, c),
        kappa: 1.0,
        nu_m,
    })
}

/// Prolate spheroid with aspect ratio κ = length/diameter ≥ 1 along x3.
pub fn eshelby_spheroid(kappa: f64, nu_m: f64) -> Result<EshelbyTensor> {
    check_nu(nu_m)?;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!(
            "aspect ratio must be positive and finite, got {kappa}"
        )));
    }
    if (kappa - 1.0).abs() < SPHERE_BRANCH {
        return Ok(EshelbyTensor {
            kappa,
            ..eshelby_sphere(nu_m)?
        });
    }
    if kappa < 1.0 {
        return Err(Error::domain(format!(
            "oblate spheroids (aspect ratio {kappa} < 1) are not supported"
        )));
    }
    let nu = nu_m;
    let k2 = kappa * kappa;
    let x = k2 - 1.0;
    let g = kappa / x.powf(1.5) * (kappa * x.sqrt() - kappa.acosh());
    let f = 1.0 / (1.0 - nu);
    let q = 1.0 - 2.0 * nu;
    let s3333 = 0.5 * f * (q + (3.0 * k2 - 1.0) / x - (q + 3.0 * k2 / x) * g);
    let s1111 = 3.0 * k2 / (8.0 * (1.0 - nu) * x) + 0.25 * f * (q - 9.0 / (4.0 * x)) * g;
    let s1122 = 0.25 * f * (k2 / (2.0 * x) - (q + 3.0 / (4.0 * x)) * g);
    let s1133 = 0.5 * f * (-k2 / x + 0.5 * (3.0 * k2 / x - q) * g);
    let s3311 = 0.5 * f * (-q - 1.0 / x + (q + 3.0 / (2.0 * x)) * g);
    let s1212 = 0.25 * f * (k2 / (2.0 * x) + (q - 3.0 / (4.0 * x)) * g);
    let s1313 = 0.25 * f * (q - (k2 + 1.0) / x - 0.5 * (q - 3.0 * (k2 + 1.0) / x) * g);
    Ok(EshelbyTensor {
        m: from_components(s1111, s1122, s1133, s3311, s3333, s1212, s1313),
        kappa,
        nu_m,
    })
}
