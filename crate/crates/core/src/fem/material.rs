use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::StiffnessTensor;

/// In-plane stiffness for plane strain: rows/columns (11, 22, 12) of the 3D
/// engineering-Voigt stiffness, acting on (ε11, ε22, γ12).
pub fn plane_strain_reduce(c: &StiffnessTensor) -> Matrix3<f64> {
    let idx = [0, 1, 5];
    let m = c.matrix();
    Matrix3::from_fn(|i, j| m[(idx[i], idx[j])])
}

/// Phase-field material in mm / N / MPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFieldMaterial {
    /// Plane-strain stiffness in MPa.
    pub c: [[f64; 3]; 3],
    /// Critical energy release rate in N/mm.
    pub g_c: f64,
    /// Regularisation length in mm.
    pub ell: f64,
    /// Residual stiffness in the degradation function.
    pub k_res: f64,
}

impl PhaseFieldMaterial {
    /// `c` is the 3D stiffness in Pa; `g_c` in J/m².
    pub fn from_si(c: &StiffnessTensor, g_c_si: f64, ell_mm: f64, k_res: f64) -> Result<Self> {
        let c2 = plane_strain_reduce(c) * 1e-6;
        let mut arr = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                arr[i][j] = 0.5 * (c2[(i, j)] + c2[(j, i)]);
            }
        }
        let m = Self {
            c: arr,
            g_c: g_c_si * 1e-3,
            ell: ell_mm,
            k_res,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn isotropic(e_mpa: f64, nu: f64, g_c: f64, ell: f64, k_res: f64) -> Result<Self> {
        let c = StiffnessTensor::isotropic(e_mpa * 1e6, nu)?;
        Self::from_si(&c, g_c * 1e3, ell, k_res)
    }

    pub fn validate(&self) -> Result<()> {
        let m = Matrix3::from_fn(|i, j| self.c[i][j]);
        if m.cholesky().is_none() {
            return Err(Error::domain(
                "plane-strain stiffness is not positive definite",
            ));
        }
        if !(self.g_c > 0.0) || !(self.ell > 0.0) || !(self.k_res >= 0.0) || !self.k_res.is_finite()
        {
            return Err(Error::domain(format!(
                "phase-field parameters need G_c > 0, l > 0, k >= 0 (got {}, {}, {})",
                self.g_c, self.ell, self.k_res
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn stress(&self, e: &[f64; 3]) -> [f64; 3] {
        let c = &self.c;
        [
            c[0][0] * e[0] + c[0][1] * e[1] + c[0][2] * e[2],
            c[1][0] * e[0] + c[1][1] * e[1] + c[1][2] * e[2],
            c[2][0] * e[0] + c[2][1] * e[1] + c[2][2] * e[2],
        ]
    }

    /// Degradation g(φ) = (1 − φ)² + k.
    #[inline]
    pub fn degradation(&self, phi: f64) -> f64 {
        (1.0 - phi).powi(2) + self.k_res
    }

    /// Effective in-plane Young's modulus (plane-strain compliance based).
    pub fn plane_modulus(&self) -> f64 {
        let m = Matrix3::from_fn(|i, j| self.c[i][j]);
        let s = m.try_inverse().unwrap_or_else(Matrix3::zeros);
        1.0 / s[(0, 0)].max(s[(1, 1)]).max(f64::MIN_POSITIVE)
    }
}

/// Undegraded elastic energy density ψ = ½ εᵀ C ε.
#[inline]
pub fn element_energy_density(mat: &PhaseFieldMaterial, e: &[f64; 3]) -> f64 {
    let s = mat.stress(e);
    0.5 * (s[0] * e[0] + s[1] * e[1] + s[2] * e[2])
}

/// History update H ← max(H, ψ).
#[inline]
pub fn update_history(h: &mut f64, psi: f64) {
    if psi > *h {
        *h = psi;
    }
}
