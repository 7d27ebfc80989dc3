//! Bilinear quadrilateral kinematics with 2 × 2 Gauss quadrature.

const G: f64 = 0.577_350_269_189_625_8; // 1/√3

pub const GAUSS_2X2: [(f64, f64); 4] = [(-G, -G), (G, -G), (G, G), (-G, G)];

/// Reference corner coordinates, counter-clockwise.
const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

pub fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    CORNERS.map(|(a, b)| 0.25 * (1.0 + a * xi) * (1.0 + b * eta))
}

/// Physical shape-function gradients and the Jacobian determinant.
pub fn shape_gradients(xy: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([[f64; 2]; 4], f64) {
    let dref = CORNERS.map(|(a, b)| [0.25 * a * (1.0 + b * eta), 0.25 * b * (1.0 + a * xi)]);
    let mut j = [[0.0; 2]; 2];
    for k in 0..4 {
        for r in 0..2 {
            j[r][0] += dref[k][r] * xy[k][0];
            j[r][1] += dref[k][r] * xy[k][1];
        }
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [
        [j[1][1] / det, -j[0][1] / det],
        [-j[1][0] / det, j[0][0] / det],
    ];
    let grad = dref.map(|d| {
        [
            inv[0][0] * d[0] + inv[0][1] * d[1],
            inv[1][0] * d[0] + inv[1][1] * d[1],
        ]
    });
    (grad, det)
}

/// Precomputed data at one integration point.
#[derive(Debug, Clone, Copy)]
pub struct GaussPoint {
    pub n: [f64; 4],
    pub grad: [[f64; 2]; 4],
    /// Weight times Jacobian determinant (area measure).
    pub dv: f64,
}

impl GaussPoint {
    /// Small strain (ε11, ε22, γ12) from element displacements ordered
    /// (ux0, uy0, ux1, ...).
    #[inline]
    pub fn strain(&self, ue: &[f64; 8]) -> [f64; 3] {
        let mut e = [0.0; 3];
        for k in 0..4 {
            let (gx, gy) = (self.grad[k][0], self.grad[k][1]);
            let (ux, uy) = (ue[2 * k], ue[2 * k + 1]);
            e[0] += gx * ux;
            e[1] += gy * uy;
            e[2] += gy * ux + gx * uy;
        }
        e
    }

    #[inline]
    pub fn value(&self, ve: &[f64; 4]) -> f64 {
        self.n.iter().zip(ve).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn gradient(&self, ve: &[f64; 4]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..4 {
            g[0] += self.grad[k][0] * ve[k];
            g[1] += self.grad[k][1] * ve[k];
        }
        g
    }

    /// Bᵀσ contribution for node k.
    #[inline]
    pub fn bt_sigma(&self, k: usize, s: &[f64; 3]) -> [f64; 2] {
        let (gx, gy) = (self.grad[k][0], self.grad[k][1]);
        [gx * s[0] + gy * s[2], gy * s[1] + gx * s[2]]
    }

    /// Columns of B for node k: strain produced by unit ux and unit uy.
    #[inline]
    pub fn b_columns(&self, k: usize) -> [[f64; 3]; 2] {
        let (gx, gy) = (self.grad[k][0], self.grad[k][1]);
        [[gx, 0.0, gy], [0.0, gy, gx]]
    }
}

pub fn element_gauss_points(xy: &[[f64; 2]; 4]) -> [GaussPoint; 4] {
    GAUSS_2X2.map(|(xi, eta)| {
        let (grad, det) = shape_gradients(xy, xi, eta);
        GaussPoint {
            n: shape_values(xi, eta),
            grad,
            dv: det,
        }
    })
}
