//! Fourth-order tensors in 6×6 contracted notation.
//!
//! Public matrices use the engineering Voigt convention: index order
//! (11, 22, 33, 23, 13, 12) and shear strains stored as γ = 2ε. A stiffness
//! maps engineering strain to stress; a concentration or Eshelby tensor maps
//! engineering strain to engineering strain. Rotations are carried out in the
//! orthonormal Mandel basis, where a rotation is an orthogonal 6×6 matrix, and
//! converted back afterwards.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix6};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

pub type Mat6 = Matrix6<f64>;

const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

/// Index of the contracted component holding tensor index pair (i, j).
pub fn voigt_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => unreachable!("tensor index out of range"),
    }
}

pub fn voigt_pair(k: usize) -> (usize, usize) {
    VOIGT_PAIRS[k]
}

fn mandel_scale(k: usize) -> f64 {
    if k < 3 {
        1.0
    } else {
        SQRT_2
    }
}

/// Engineering stiffness → Mandel stiffness.
pub fn stiffness_to_mandel(c: &Mat6) -> Mat6 {
    Mat6::from_fn(|i, j| c[(i, j)] * mandel_scale(i) * mandel_scale(j))
}

pub fn stiffness_from_mandel(m: &Mat6) -> Mat6 {
    Mat6::from_fn(|i, j| m[(i, j)] / (mandel_scale(i) * mandel_scale(j)))
}

/// Engineering strain-to-strain map → Mandel.
pub fn strain_map_to_mandel(a: &Mat6) -> Mat6 {
    Mat6::from_fn(|i, j| a[(i, j)] * mandel_scale(j) / mandel_scale(i))
}

pub fn strain_map_from_mandel(m: &Mat6) -> Mat6 {
    Mat6::from_fn(|i, j| m[(i, j)] * mandel_scale(i) / mandel_scale(j))
}

/// Orthogonal 6×6 Mandel representation of a 3×3 rotation.
pub fn mandel_rotation(r: &Matrix3<f64>) -> Mat6 {
    let mut q = Mat6::zeros();
    for (ii, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        for (jj, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
            let mut v = if jj < 3 {
                r[(i, k)] * r[(j, l)]
            } else {
                r[(i, k)] * r[(j, l)] + r[(i, l)] * r[(j, k)]
            };
            v *= mandel_scale(ii) / mandel_scale(jj);
            q[(ii, jj)] = v;
        }
    }
    q
}

/// Filler orientation: polar angle θ from the global x3 axis and azimuth γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub gamma: f64,
    pub theta: f64,
}

impl Orientation {
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        if !(0.0..=2.0 * PI).contains(&gamma) || !(0.0..=PI / 2.0).contains(&theta) {
            return Err(Error::domain(format!(
                "orientation (gamma={gamma}, theta={theta}) outside [0, 2pi] x [0, pi/2]"
            )));
        }
        Ok(Self { gamma, theta })
    }

    /// R = Rz(γ)·Ry(θ); its columns are the local axes in the global frame,
    /// so the filler axis x3' lands on (sinθ cosγ, sinθ sinγ, cosθ).
    pub fn rotation(&self) -> Matrix3<f64> {
        let (sg, cg) = self.gamma.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        let rz = Matrix3::new(cg, -sg, 0.0, sg, cg, 0.0, 0.0, 0.0, 1.0);
        let ry = Matrix3::new(ct, 0.0, st, 0.0, 1.0, 0.0, -st, 0.0, ct);
        rz * ry
    }
}

/// Elastic stiffness in engineering Voigt notation (units follow the inputs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessTensor {
    m: Mat6,
}

impl StiffnessTensor {
    pub fn from_matrix(m: Mat6) -> Self {
        Self { m }
    }

    pub fn isotropic(e: f64, nu: f64) -> Result<Self> {
        isotropic_stiffness(e, nu)
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.m
    }

    pub fn compliance(&self) -> Result<Mat6> {
        self.m.try_inverse().ok_or_else(|| Error::Singular {
            phase: "stiffness".into(),
        })
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m.symmetric_part().cholesky().is_some()
    }

    /// Largest |C_ij − C_ji| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.m.amax().max(f64::MIN_POSITIVE);
        (self.m - self.m.transpose()).amax() / scale
    }

    pub fn symmetrized(&self) -> Self {
        Self {
            m: self.m.symmetric_part(),
        }
    }

    pub fn rotated(&self, o: Orientation) -> Self {
        rotate_stiffness(self, o)
    }
}

impl fmt::Display for StiffnessTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..6 {
            let row: Vec<String> = (0..6)
                .map(|j| format!("{:12.5e}", self.m[(i, j)]))
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Strain concentration (engineering strain → engineering strain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationTensor {
    m: Mat6,
}

impl ConcentrationTensor {
    pub fn identity() -> Self {
        Self {
            m: Mat6::identity(),
        }
    }

    pub fn from_matrix(m: Mat6) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.m
    }

    pub fn rotated(&self, o: Orientation) -> Self {
        let q = mandel_rotation(&o.rotation());
        let a = strain_map_to_mandel(&self.m);
        Self {
            m: strain_map_from_mandel(&(q * a * q.transpose())),
        }
    }
}

pub fn isotropic_stiffness(e: f64, nu: f64) -> Result<StiffnessTensor> {
    if !(e > 0.0) || !(nu > -1.0 && nu < 0.5) {
        return Err(Error::domain(format!(
            "isotropic stiffness needs E > 0 and -1 < nu < 0.5, got E={e}, nu={nu}"
        )));
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut m = Mat6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = lambda;
        }
        m[(i, i)] = lambda + 2.0 * mu;
        m[(i + 3, i + 3)] = mu;
    }
    Ok(StiffnessTensor { m })
}

/// Takes a stiffness expressed in the filler frame to the global frame.
pub fn rotate_stiffness(c: &StiffnessTensor, o: Orientation) -> StiffnessTensor {
    let q = mandel_rotation(&o.rotation());
    let cm = stiffness_to_mandel(&c.m);
    StiffnessTensor {
        m: stiffness_from_mandel(&(q * cm * q.transpose())),
    }
}

/// Orientation distribution over γ ∈ [0, 2π], θ ∈ [0, π/2], normalised
/// against the measure sinθ dθ dγ.
#[derive(Clone)]
pub enum Odf3d {
    Uniform,
    Tabulated(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Odf3d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Odf3d::Uniform => write!(f, "Uniform"),
            Odf3d::Tabulated(_) => write!(f, "Tabulated(..)"),
        }
    }
}

impl Odf3d {
    /// Wraps a density and checks its normalisation by quadrature.
    pub fn tabulated<F>(density: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let odf = Odf3d::Tabulated(Arc::new(density));
        let total = odf.normalization(64);
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "orientation density integrates to {total}, expected 1"
            )));
        }
        Ok(odf)
    }

    pub fn density(&self, gamma: f64, theta: f64) -> f64 {
        match self {
            Odf3d::Uniform => 1.0 / (2.0 * PI),
            Odf3d::Tabulated(f) => f(gamma, theta),
        }
    }

    /// ∫∫ Ω sinθ dθ dγ with an n×n Gauss rule.
    pub fn normalization(&self, n: usize) -> f64 {
        let gs = gauss_legendre_on(n, 0.0, 2.0 * PI);
        let ts = gauss_legendre_on(n, 0.0, PI / 2.0);
        let mut total = 0.0;
        for &(g, wg) in &gs {
            for &(t, wt) in &ts {
                total += wg * wt * self.density(g, t) * t.sin();
            }
        }
        total
    }

    fn weighted_points(&self, n: usize) -> Vec<(Orientation, f64)> {
        let gs = gauss_legendre_on(n, 0.0, 2.0 * PI);
        let ts = gauss_legendre_on(n, 0.0, PI / 2.0);
        let mut pts = Vec::with_capacity(n * n);
        for &(g, wg) in &gs {
            for &(t, wt) in &ts {
                let w = wg * wt * self.density(g, t) * t.sin();
                pts.push((Orientation { gamma: g, theta: t }, w));
            }
        }
        pts
    }
}

/// Quadrature order and order-doubling convergence check for orientational averages.
#[derive(Debug, Clone, Copy)]
pub struct AverageOptions {
    pub order: usize,
    pub tolerance: f64,
    pub check_convergence: bool,
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self {
            order: 32,
            tolerance: 1e-8,
            check_convergence: true,
        }
    }
}

fn relative_change(a: &[Mat6], b: &[Mat6]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / y.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// ∫∫ F(γ, θ) Ω(γ, θ) sinθ dθ dγ by tensor-product Gauss-Legendre quadrature.
pub fn orientational_average<F>(f: F, odf: &Odf3d, opts: AverageOptions) -> Result<Mat6>
where
    F: Fn(Orientation) -> Mat6,
{
    let eval = |n: usize| {
        odf.weighted_points(n)
            .into_iter()
            .fold(Mat6::zeros(), |acc, (o, w)| acc + f(o) * w)
    };
    let base = eval(opts.order);
    if opts.check_convergence {
        let fine = eval(2 * opts.order);
        let change = relative_change(&[base], &[fine]);
        if change > opts.tolerance {
            return Err(Error::Quadrature(format!(
                "orientational average changed by {change:e} when doubling the order from {}",
                opts.order
            )));
        }
    }
    Ok(base)
}

/// Averages of Q·X·Qᵀ for several Mandel-basis tensors at once, sharing the
/// rotation evaluations.
pub fn average_rotated_mandel(xs: &[Mat6], odf: &Odf3d, opts: AverageOptions) -> Result<Vec<Mat6>> {
    let eval = |n: usize| {
        let mut out = vec![Mat6::zeros(); xs.len()];
        for (o, w) in odf.weighted_points(n) {
            let q = mandel_rotation(&o.rotation());
            let qt = q.transpose();
            for (acc, x) in out.iter_mut().zip(xs) {
                *acc += (q * x * qt) * w;
            }
        }
        out
    };
    let base = eval(opts.order);
    if opts.check_convergence {
        let fine = eval(2 * opts.order);
        let change = relative_change(&base, &fine);
        if change > opts.tolerance {
            return Err(Error::Quadrature(format!(
                "orientational average changed by {change:e} when doubling the order from {}",
                opts.order
            )));
        }
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn transversely_isotropic() -> StiffnessTensor {
        // axis x3, roughly a stiff fibre
        let mut m = Mat6::zeros();
        let (c11, c12, c13, c33, c44) = (20.0, 8.0, 6.0, 200.0, 5.0);
        m[(0, 0)] = c11;
        m[(1, 1)] = c11;
        m[(0, 1)] = c12;
        m[(1, 0)] = c12;
        m[(0, 2)] = c13;
        m[(2, 0)] = c13;
        m[(1, 2)] = c13;
        m[(2, 1)] = c13;
        m[(2, 2)] = c33;
        m[(3, 3)] = c44;
        m[(4, 4)] = c44;
        m[(5, 5)] = 0.5 * (c11 - c12);
        StiffnessTensor::from_matrix(m)
    }

    fn to_full(c: &Mat6) -> [[[[f64; 3]; 3]; 3]; 3] {
        let mut t = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[i][j][k][l] = c[(voigt_index(i, j), voigt_index(k, l))];
                    }
                }
            }
        }
        t
    }

    // Direct index-by-index transformation of the full fourth-order tensor.
    fn rotate_full(c: &Mat6, r: &Matrix3<f64>) -> Mat6 {
        let t = to_full(c);
        let mut out = Mat6::zeros();
        for a in 0..6 {
            for b in 0..6 {
                let (i, j) = voigt_pair(a);
                let (k, l) = voigt_pair(b);
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        for rr in 0..3 {
                            for ss in 0..3 {
                                s += r[(i, p)]
                                    * r[(j, q)]
                                    * r[(k, rr)]
                                    * r[(l, ss)]
                                    * t[p][q][rr][ss];
                            }
                        }
                    }
                }
                out[(a, b)] = s;
            }
        }
        out
    }

    #[test]
    fn lame_oracle() {
        let c = isotropic_stiffness(2.5e9, 0.28).unwrap();
        let nu: f64 = 0.28;
        let lambda = 2.5e9 * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = 2.5e9 / (2.0 * (1.0 + nu));
        assert!((c.matrix()[(0, 0)] - (lambda + 2.0 * mu)).abs() < 1e-3);
        assert!((c.matrix()[(3, 3)] - mu).abs() < 1e-3);
        assert!((c.matrix()[(0, 0)] / 1e9 - 3.196).abs() < 5e-4);
        assert!((c.matrix()[(3, 3)] / 1e9 - 0.9766).abs() < 5e-5);
    }

    #[test]
    fn zero_poisson_is_diagonal() {
        let c = isotropic_stiffness(1.0, 0.0).unwrap();
        let expected = Mat6::from_diagonal(&nalgebra::Vector6::new(1.0, 1.0, 1.0, 0.5, 0.5, 0.5));
        assert!((c.matrix() - expected).amax() < 1e-15);
    }

    #[test]
    fn cnt_stiffness_positive_definite() {
        assert!(isotropic_stiffness(700e9, 0.3)
            .unwrap()
            .is_positive_definite());
    }

    #[test]
    fn rejects_bad_poisson() {
        assert!(isotropic_stiffness(1.0, 0.5).is_err());
        assert!(isotropic_stiffness(1.0, -1.0).is_err());
        assert!(isotropic_stiffness(-1.0, 0.2).is_err());
    }

    #[test]
    fn identity_rotation() {
        let c = transversely_isotropic();
        let r = rotate_stiffness(&c, Orientation::new(0.0, 0.0).unwrap());
        assert!((r.matrix() - c.matrix()).amax() < 1e-12);
    }

    #[test]
    fn mandel_rotation_matches_full_tensor_rule() {
        let c = transversely_isotropic();
        let o = Orientation::new(1.1, 0.7).unwrap();
        let fast = rotate_stiffness(&c, o);
        let slow = rotate_full(c.matrix(), &o.rotation());
        assert!((fast.matrix() - slow).amax() < 1e-10 * c.matrix().amax());
    }

    #[test]
    fn composed_rotations() {
        // θ = π/2 about y, then a quarter turn about z, against the composed 3×3 matrix
        let c = transversely_isotropic();
        let a = Orientation::new(0.0, PI / 2.0).unwrap();
        let b = Orientation::new(PI / 2.0, 0.0).unwrap();
        let stepwise = rotate_stiffness(&rotate_stiffness(&c, a), b);
        let composed = rotate_full(c.matrix(), &(b.rotation() * a.rotation()));
        assert!((stepwise.matrix() - composed).amax() < 1e-10 * c.matrix().amax());
        // the fibre axis now lies along global x2
        assert!((stepwise.matrix()[(1, 1)] - 200.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_odf_normalised() {
        assert!((Odf3d::Uniform.normalization(32) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_integrand_average() {
        let m = *transversely_isotropic().matrix();
        let avg = orientational_average(|_| m, &Odf3d::Uniform, AverageOptions::default()).unwrap();
        assert!((avg - m).amax() < 1e-10 * m.amax());
    }

    #[test]
    fn uniform_average_is_isotropic() {
        let c = transversely_isotropic();
        let avg = orientational_average(
            |o| *rotate_stiffness(&c, o).matrix(),
            &Odf3d::Uniform,
            AverageOptions::default(),
        )
        .unwrap();
        let (_, _, residual) =
            crate::homogenize::isotropic_projection(&StiffnessTensor::from_matrix(avg));
        assert!(residual < 1e-6, "residual {residual}");
    }

    #[test]
    fn tabulated_odf_must_be_normalised() {
        assert!(Odf3d::tabulated(|_, _| 1.0).is_err());
        let ok = Odf3d::tabulated(|_, _| 1.0 / (2.0 * PI)).unwrap();
        assert!((ok.normalization(16) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_preserves_symmetry_and_definiteness(g in 0.0..2.0 * PI, t in 0.0..PI / 2.0) {
            let c = transversely_isotropic();
            let r = rotate_stiffness(&c, Orientation::new(g, t).unwrap());
            prop_assert!(r.asymmetry() < 1e-12);
            prop_assert!(r.is_positive_definite());
            let iso = isotropic_stiffness(3.0, 0.25).unwrap();
            let ri = rotate_stiffness(&iso, Orientation::new(g, t).unwrap());
            prop_assert!((ri.matrix() - iso.matrix()).amax() < 1e-12 * iso.matrix().amax());
        }

        #[test]
        fn average_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let c1 = *transversely_isotropic().matrix();
            let c2 = *isotropic_stiffness(5.0, 0.1).unwrap().matrix();
            let opts = AverageOptions { check_convergence: false, ..Default::default() };
            let f = |m: Mat6| move |o: Orientation| *rotate_stiffness(&StiffnessTensor::from_matrix(m), o).matrix();
            let lhs = orientational_average(f(c1 * a + c2 * b), &Odf3d::Uniform, opts).unwrap();
            let rhs = orientational_average(f(c1), &Odf3d::Uniform, opts).unwrap() * a
                + orientational_average(f(c2), &Odf3d::Uniform, opts).unwrap() * b;
            prop_assert!((lhs - rhs).amax() < 1e-10 * (1.0 + rhs.amax()));
        }
    }
}
