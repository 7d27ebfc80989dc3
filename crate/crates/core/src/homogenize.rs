//! Effective stiffness of CNT/matrix composites with soft penetrable
//! interphases, and the two-step bundle model for agglomeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eshelby::{eshelby_sphere, eshelby_spheroid, EshelbyTensor};
use crate::tensor::{
    average_rotated_mandel, isotropic_stiffness, stiffness_from_mandel, stiffness_to_mandel,
    strain_map_from_mandel, strain_map_to_mandel, AverageOptions, ConcentrationTensor, Mat6, Odf3d,
    StiffnessTensor,
};

/// Relative stiffness contrast under which a phase is treated as matrix.
pub const CONTRAST_EPS: f64 = 1e-10;

/// Filler dimensions in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillerGeometry {
    pub length: f64,
    pub diameter: f64,
    pub interphase_thickness: f64,
}

impl FillerGeometry {
    pub fn new(length: f64, diameter: f64, interphase_thickness: f64) -> Result<Self> {
        let g = Self {
            length,
            diameter,
            interphase_thickness,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.diameter > 0.0) {
            return Err(Error::domain("filler length and diameter must be positive"));
        }
        if !(self.interphase_thickness >= 0.0) {
            return Err(Error::domain("interphase thickness must be non-negative"));
        }
        if self.aspect_ratio() < 1.0 - crate::eshelby::SPHERE_BRANCH {
            return Err(Error::domain(format!(
                "aspect ratio {} below 1; only prolate fillers are supported",
                self.aspect_ratio()
            )));
        }
        Ok(())
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.length / self.diameter
    }

    /// Diameter of the sphere with the filler's volume.
    pub fn equivalent_diameter(&self) -> f64 {
        self.diameter * self.aspect_ratio().cbrt()
    }

    pub fn eta(&self) -> f64 {
        self.interphase_thickness / self.equivalent_diameter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropicPhase {
    pub e: f64,
    pub nu: f64,
}

impl IsotropicPhase {
    pub fn new(e: f64, nu: f64) -> Self {
        Self { e, nu }
    }

    pub fn stiffness(&self) -> Result<StiffnessTensor> {
        isotropic_stiffness(self.e, self.nu)
    }

    pub fn bulk(&self) -> f64 {
        self.e / (3.0 * (1.0 - 2.0 * self.nu))
    }

    pub fn shear(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }
}

/// Matrix, filler and interphase moduli plus the filler volume fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSet {
    pub matrix: IsotropicPhase,
    pub filler: IsotropicPhase,
    pub interphase: IsotropicPhase,
    pub f_p: f64,
}

impl PhaseSet {
    pub fn with_fraction(&self, f_p: f64) -> Self {
        Self { f_p, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgglomerationParams {
    pub chi: f64,
    pub zeta: f64,
}

impl AgglomerationParams {
    pub fn new(chi: f64, zeta: f64) -> Result<Self> {
        let a = Self { chi, zeta };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0 && self.chi <= 1.0) {
            return Err(Error::domain(format!("chi = {} outside (0, 1]", self.chi)));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(Error::domain(format!(
                "zeta = {} outside [0, 1]",
                self.zeta
            )));
        }
        Ok(())
    }
}

/// Ratio of the equivalent-sphere surface to the filler surface.
pub fn sphericity(kappa: f64) -> f64 {
    if kappa <= 1.0 {
        return 1.0;
    }
    let phi = (1.0 / kappa).acos();
    let t = phi.tan();
    2.0 * kappa.powf(2.0 / 3.0) * t / (t + kappa * kappa * phi)
}

/// Volume fraction of penetrable soft interphase around the fillers.
pub fn interphase_volume_fraction(f_p: f64, geom: &FillerGeometry) -> Result<f64> {
    if !(0.0..1.0).contains(&f_p) {
        return Err(Error::domain(format!(
            "filler fraction {f_p} outside [0, 1)"
        )));
    }
    if f_p == 0.0 || geom.interphase_thickness == 0.0 {
        return Ok(0.0);
    }
    let n = sphericity(geom.aspect_ratio());
    let eta = geom.eta();
    let r = f_p / (1.0 - f_p);
    let bracket = eta / n
        + (2.0 + 3.0 * r / (n * n)) * eta * eta
        + 4.0 / 3.0 * (1.0 + 3.0 * r / n) * eta.powi(3);
    Ok((1.0 - f_p) * (1.0 - (-6.0 * r * bracket).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeFractions {
    pub matrix: f64,
    pub interphase: f64,
    pub filler: f64,
}

pub fn volume_fractions(f_p: f64, geom: &FillerGeometry) -> Result<VolumeFractions> {
    let f_i = interphase_volume_fraction(f_p, geom)?;
    let f_m = 1.0 - f_p - f_i;
    if f_m < 0.0 {
        return Err(Error::domain(format!(
            "matrix fraction {f_m} negative (f_p={f_p}, f_i={f_i})"
        )));
    }
    Ok(VolumeFractions {
        matrix: f_m,
        interphase: f_i,
        filler: f_p,
    })
}

/// Dilute strain concentration A = I + S·T with T = −(S + M)⁻¹ and
/// M = (C_α − C_m)⁻¹·C_m.
pub fn dilute_concentration(
    c_m: &StiffnessTensor,
    c_phase: &StiffnessTensor,
    s: &EshelbyTensor,
    phase: &str,
) -> Result<ConcentrationTensor> {
    let diff = c_phase.matrix() - c_m.matrix();
    if diff.norm() < CONTRAST_EPS * c_m.matrix().norm() {
        return Ok(ConcentrationTensor::identity());
    }
    let singular = || Error::Singular {
        phase: phase.to_string(),
    };
    let m = diff.try_inverse().ok_or_else(singular)? * c_m.matrix();
    let t = -(s.matrix() + m).try_inverse().ok_or_else(singular)?;
    Ok(ConcentrationTensor::from_matrix(
        Mat6::identity() + s.matrix() * t,
    ))
}

/// Double-inclusion estimate for filler + interphase in the matrix.
pub fn double_inclusion_effective(
    phases: &PhaseSet,
    geom: &FillerGeometry,
    odf: &Odf3d,
) -> Result<StiffnessTensor> {
    double_inclusion_with(phases, geom, odf, AverageOptions::default())
}

pub fn double_inclusion_with(
    phases: &PhaseSet,
    geom: &FillerGeometry,
    odf: &Odf3d,
    opts: AverageOptions,
) -> Result<StiffnessTensor> {
    geom.validate()?;
    let fr = volume_fractions(phases.f_p, geom)?;
    let c_m = phases.matrix.stiffness()?;
    let c_p = phases.filler.stiffness()?;
    let c_i = phases.interphase.stiffness()?;
    let s = eshelby_spheroid(geom.aspect_ratio(), phases.matrix.nu)?;
    let a_p = dilute_concentration(&c_m, &c_p, &s, "filler")?;
    let a_i = dilute_concentration(&c_m, &c_i, &s, "interphase")?;
    let id = Mat6::identity();
    let norm = (id * fr.matrix + a_i.matrix() * fr.interphase + a_p.matrix() * fr.filler)
        .try_inverse()
        .ok_or_else(|| Error::Singular {
            phase: "normalisation".into(),
        })?;
    let a_p = a_p.matrix() * norm;
    let a_i = a_i.matrix() * norm;

    let local = [
        stiffness_to_mandel(&(c_i.matrix() * a_i)),
        stiffness_to_mandel(&(c_p.matrix() * a_p)),
        strain_map_to_mandel(&a_i),
        strain_map_to_mandel(&a_p),
    ];
    let avg = average_rotated_mandel(&local, odf, opts)?;
    let num = c_m.matrix() * fr.matrix
        + stiffness_from_mandel(&avg[0]) * fr.interphase
        + stiffness_from_mandel(&avg[1]) * fr.filler;
    let den = id * fr.matrix
        + strain_map_from_mandel(&avg[2]) * fr.interphase
        + strain_map_from_mandel(&avg[3]) * fr.filler;
    let den_inv = den.try_inverse().ok_or_else(|| Error::Singular {
        phase: "averaged concentration".into(),
    })?;
    Ok(StiffnessTensor::from_matrix(num * den_inv).symmetrized())
}

/// (f_bundles, f_matrix): filler fractions inside bundles and in the
/// surrounding matrix.
pub fn agglomeration_partition(f_p: f64, agg: &AgglomerationParams) -> Result<(f64, f64)> {
    agg.validate()?;
    let f_b = agg.zeta / agg.chi * f_p;
    let f_m = if agg.chi < 1.0 {
        (1.0 - agg.zeta) / (1.0 - agg.chi) * f_p
    } else if agg.zeta == 1.0 {
        0.0
    } else {
        return Err(Error::domain("chi = 1 requires zeta = 1"));
    };
    if f_b > 1.0 || f_m > 1.0 {
        return Err(Error::domain(format!(
            "agglomeration puts filler fraction above one (bundles {f_b}, matrix {f_m})"
        )));
    }
    Ok((f_b, f_m))
}

/// Step-1 media of the bundle model.
#[derive(Debug, Clone, Copy)]
pub struct TwoStepMedia {
    pub bundles: StiffnessTensor,
    pub surrounding: StiffnessTensor,
    pub effective: StiffnessTensor,
}

pub fn two_step_effective(
    phases: &PhaseSet,
    geom: &FillerGeometry,
    agg: &AgglomerationParams,
    odf: &Odf3d,
) -> Result<StiffnessTensor> {
    Ok(two_step_media(phases, geom, agg, odf)?.effective)
}

pub fn two_step_media(
    phases: &PhaseSet,
    geom: &FillerGeometry,
    agg: &AgglomerationParams,
    odf: &Odf3d,
) -> Result<TwoStepMedia> {
    let (f_b, f_mx) = agglomeration_partition(phases.f_p, agg)?;
    let c_b = double_inclusion_effective(&phases.with_fraction(f_b), geom, odf)?;
    if agg.chi == 1.0 {
        return Ok(TwoStepMedia {
            bundles: c_b,
            surrounding: c_b,
            effective: c_b,
        });
    }
    let c_m = double_inclusion_effective(&phases.with_fraction(f_mx), geom, odf)?;
    let (_, nu_m, _) = isotropic_projection(&c_m);
    let s_b = eshelby_sphere(nu_m)?;
    let a_dil = dilute_concentration(&c_m, &c_b, &s_b, "bundle")?;
    let id = Mat6::identity();
    let a = a_dil.matrix()
        * (id * (1.0 - agg.chi) + a_dil.matrix() * agg.chi)
            .try_inverse()
            .ok_or_else(|| Error::Singular {
                phase: "bundle".into(),
            })?;
    let c = c_m.matrix() + (c_b.matrix() - c_m.matrix()) * a * agg.chi;
    Ok(TwoStepMedia {
        bundles: c_b,
        surrounding: c_m,
        effective: StiffnessTensor::from_matrix(c).symmetrized(),
    })
}

/// Closest isotropic (E, ν) and the relative Frobenius distance to it.
pub fn isotropic_projection(c: &StiffnessTensor) -> (f64, f64, f64) {
    let m = c.matrix();
    let diag = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let off = m[(0, 1)] + m[(0, 2)] + m[(1, 2)];
    let shear = m[(3, 3)] + m[(4, 4)] + m[(5, 5)];
    let k = (diag + 2.0 * off) / 9.0;
    let g = (diag - off + 3.0 * shear) / 15.0;
    let e = 9.0 * k * g / (3.0 * k + g);
    let nu = (3.0 * k - 2.0 * g) / (2.0 * (3.0 * k + g));
    let residual = match isotropic_stiffness(e, nu) {
        Ok(iso) => (m - iso.matrix()).norm() / m.norm(),
        Err(_) => f64::INFINITY,
    };
    (e, nu, residual)
}

/// Reuss and Voigt Young's moduli of the three-phase mixture.
pub fn voigt_reuss_bounds(phases: &PhaseSet, geom: &FillerGeometry) -> Result<(f64, f64)> {
    let fr = volume_fractions(phases.f_p, geom)?;
    let parts = [
        (fr.matrix, phases.matrix),
        (fr.interphase, phases.interphase),
        (fr.filler, phases.filler),
    ];
    let kv: f64 = parts.iter().map(|(f, p)| f * p.bulk()).sum();
    let gv: f64 = parts.iter().map(|(f, p)| f * p.shear()).sum();
    let kr = 1.0 / parts.iter().map(|(f, p)| f / p.bulk()).sum::<f64>();
    let gr = 1.0 / parts.iter().map(|(f, p)| f / p.shear()).sum::<f64>();
    let e = |k: f64, g: f64| 9.0 * k * g / (3.0 * k + g);
    Ok((e(kr, gr), e(kv, gv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_phases(f_p: f64) -> (PhaseSet, FillerGeometry) {
        let phases = PhaseSet {
            matrix: IsotropicPhase::new(2.5e9, 0.28),
            filler: IsotropicPhase::new(700e9, 0.3),
            interphase: IsotropicPhase::new(2.17e9, 0.28),
            f_p,
        };
        (
            phases,
            FillerGeometry::new(3.21e-6, 10.35e-9, 31e-9).unwrap(),
        )
    }

    #[test]
    fn sphericity_limits() {
        assert_eq!(sphericity(1.0), 1.0);
        assert!((sphericity(1.0 + 1e-9) - 1.0).abs() < 1e-6);
        let n = sphericity(310.0);
        assert!(n > 0.0 && n < 1.0);
        // direct evaluation with the surface-area definition: sphere of equal
        // volume vs prolate spheroid surface
        let (a, c) = (0.5_f64, 155.0_f64);
        let e = (1.0 - a * a / (c * c)).sqrt();
        let spheroid_area = 2.0 * std::f64::consts::PI * a * a * (1.0 + c / (a * e) * e.asin());
        let r_eq = (a * a * c).cbrt();
        let sphere_area = 4.0 * std::f64::consts::PI * r_eq * r_eq;
        assert!((n - sphere_area / spheroid_area).abs() < 1e-10, "{n}");
        let mut prev = 1.0;
        for i in 1..=1000 {
            let v = sphericity(i as f64);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn interphase_fraction_zero_cases() {
        let (_, geom) = table_phases(0.01);
        assert_eq!(interphase_volume_fraction(0.0, &geom).unwrap(), 0.0);
        let thin = FillerGeometry {
            interphase_thickness: 0.0,
            ..geom
        };
        assert_eq!(interphase_volume_fraction(0.01, &thin).unwrap(), 0.0);
        assert!(interphase_volume_fraction(1.0, &geom).is_err());
    }

    #[test]
    fn interphase_fraction_table_values() {
        // independent evaluation of the closed form with the intermediate
        // quantities written out separately
        let (_, geom) = table_phases(0.01);
        let f = 0.01_f64;
        let kappa: f64 = 3.21e-6 / 10.35e-9;
        let phi = (1.0 / kappa).acos();
        let n = 2.0 * kappa.powf(2.0 / 3.0) * phi.tan() / (phi.tan() + kappa.powi(2) * phi);
        let eta = 31e-9 / (10.35e-9 * kappa.powf(1.0 / 3.0));
        let a1 = eta / n;
        let a2 = (2.0 + 3.0 * f / (n.powi(2) * (1.0 - f))) * eta.powi(2);
        let a3 = 4.0 / 3.0 * (1.0 + 3.0 * f / (n * (1.0 - f))) * eta.powi(3);
        let want = (1.0 - f) * (1.0 - (-6.0 * f / (1.0 - f) * (a1 + a2 + a3)).exp());
        let got = interphase_volume_fraction(f, &geom).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.1669).abs() < 1e-3);
    }

    #[test]
    fn dilute_identity_branch() {
        let c = isotropic_stiffness(3.0, 0.3).unwrap();
        let s = eshelby_sphere(0.3).unwrap();
        let a = dilute_concentration(&c, &c, &s, "x").unwrap();
        assert_eq!(*a.matrix(), Mat6::identity());
    }

    #[test]
    fn dilute_matches_classical_form() {
        let c_m = isotropic_stiffness(2.5, 0.28).unwrap();
        for (e, nu) in [(2.5e6, 0.3), (7.0, 0.1), (1e-9, 0.2)] {
            let c_p = isotropic_stiffness(e, nu).unwrap();
            for s in [
                eshelby_sphere(0.28).unwrap(),
                eshelby_spheroid(20.0, 0.28).unwrap(),
            ] {
                let a = dilute_concentration(&c_m, &c_p, &s, "p").unwrap();
                let classical = (Mat6::identity()
                    + s.matrix() * c_m.compliance().unwrap() * (c_p.matrix() - c_m.matrix()))
                .try_inverse()
                .unwrap();
                assert!((a.matrix() - classical).amax() < 1e-8 * classical.amax());
                assert!(a.matrix().iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn rigid_sphere_dilute_closed_form() {
        let nu = 0.28;
        let c_m = isotropic_stiffness(1.0, nu).unwrap();
        let c_p = isotropic_stiffness(1e6, nu).unwrap();
        let s = eshelby_sphere(nu).unwrap();
        let a = dilute_concentration(&c_m, &c_p, &s, "p").unwrap();
        // volumetric concentration (3K_m + 4G_m) / (3K_p + 4G_m)
        let km = 1.0 / (3.0 * (1.0 - 2.0 * nu));
        let gm = 1.0 / (2.0 * (1.0 + nu));
        let kp = 1e6 * km;
        let vol = (3.0 * km + 4.0 * gm) / (3.0 * kp + 4.0 * gm);
        let got = a.matrix()[(0, 0)] + 2.0 * a.matrix()[(0, 1)];
        assert!((got - vol).abs() < 1e-9);
    }

    #[test]
    fn identity_mixture() {
        let p = IsotropicPhase::new(2.5e9, 0.28);
        let phases = PhaseSet {
            matrix: p,
            filler: p,
            interphase: p,
            f_p: 0.03,
        };
        let geom = FillerGeometry::new(1e-6, 1e-8, 1e-8).unwrap();
        let c = double_inclusion_effective(&phases, &geom, &Odf3d::Uniform).unwrap();
        let cm = p.stiffness().unwrap();
        assert!((c.matrix() - cm.matrix()).norm() / cm.matrix().norm() < 1e-10);
    }

    #[test]
    fn no_filler_no_interphase() {
        let (phases, geom) = table_phases(0.0);
        let cm = phases.matrix.stiffness().unwrap();
        let c = double_inclusion_effective(&phases, &geom, &Odf3d::Uniform).unwrap();
        assert!((c.matrix() - cm.matrix()).norm() / cm.matrix().norm() < 1e-10);
        let (phases, geom) = table_phases(0.01);
        let thin = FillerGeometry {
            interphase_thickness: 0.0,
            ..geom
        };
        let soft_filler = PhaseSet {
            filler: phases.matrix,
            ..phases
        };
        let c = double_inclusion_effective(&soft_filler, &thin, &Odf3d::Uniform).unwrap();
        assert!((c.matrix() - cm.matrix()).norm() / cm.matrix().norm() < 1e-10);
    }

    #[test]
    fn stiffness_gain_at_half_percent() {
        let (phases, geom) = table_phases(0.005);
        let c = double_inclusion_effective(&phases, &geom, &Odf3d::Uniform).unwrap();
        let (e, _, residual) = isotropic_projection(&c);
        assert!(residual < 1e-4);
        assert!((e / 2.5e9 - 1.2193).abs() < 2e-3, "{}", e / 2.5e9);
        assert!(c.is_positive_definite());
    }

    #[test]
    fn partition_values() {
        let agg = AgglomerationParams::new(0.2, 0.4).unwrap();
        let (b, m) = agglomeration_partition(0.01, &agg).unwrap();
        assert!((b - 0.02).abs() < 1e-15 && (m - 0.0075).abs() < 1e-15);
        let same = AgglomerationParams::new(0.3, 0.3).unwrap();
        let (b, m) = agglomeration_partition(0.01, &same).unwrap();
        assert!((b - 0.01).abs() < 1e-15 && (m - 0.01).abs() < 1e-15);
        let all = AgglomerationParams::new(0.3, 1.0).unwrap();
        assert_eq!(agglomeration_partition(0.01, &all).unwrap().1, 0.0);
        assert!(AgglomerationParams::new(0.2, 1.5).is_err());
        assert!(
            agglomeration_partition(0.5, &AgglomerationParams::new(0.1, 0.9).unwrap()).is_err()
        );
    }

    #[test]
    fn two_step_degenerates_to_single_step() {
        let (phases, geom) = table_phases(0.01);
        let agg = AgglomerationParams::new(0.2, 0.2).unwrap();
        let one = double_inclusion_effective(&phases, &geom, &Odf3d::Uniform).unwrap();
        let two = two_step_effective(&phases, &geom, &agg, &Odf3d::Uniform).unwrap();
        assert!((one.matrix() - two.matrix()).norm() / one.matrix().norm() < 1e-6);
        let (p0, _) = table_phases(0.0);
        let z = two_step_effective(
            &p0,
            &geom,
            &AgglomerationParams::new(0.2, 0.4).unwrap(),
            &Odf3d::Uniform,
        )
        .unwrap();
        let cm = p0.matrix.stiffness().unwrap();
        assert!((z.matrix() - cm.matrix()).norm() / cm.matrix().norm() < 1e-10);
    }

    #[test]
    fn agglomeration_lowers_stiffness() {
        let (phases, geom) = table_phases(0.01);
        let mut prev = f64::INFINITY;
        for zeta in [0.2, 0.4, 0.6, 0.8] {
            let agg = AgglomerationParams::new(0.2, zeta).unwrap();
            let (e, _, _) = isotropic_projection(
                &two_step_effective(&phases, &geom, &agg, &Odf3d::Uniform).unwrap(),
            );
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn projection_of_isotropic_input() {
        let c = isotropic_stiffness(2.5e9, 0.28).unwrap();
        let (e, nu, r) = isotropic_projection(&c);
        assert!((e / 2.5e9 - 1.0).abs() < 1e-12 && (nu - 0.28).abs() < 1e-12 && r < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn bounded_and_monotone(f in 0.0f64..0.05) {
            let (phases, geom) = table_phases(f);
            let opts = AverageOptions { check_convergence: false, ..Default::default() };
            let c = double_inclusion_with(&phases, &geom, &Odf3d::Uniform, opts).unwrap();
            let (e, _, _) = isotropic_projection(&c);
            let (lo, hi) = voigt_reuss_bounds(&phases, &geom).unwrap();
            prop_assert!(e >= lo * (1.0 - 1e-12) && e <= hi);
            let c2 = double_inclusion_with(&phases.with_fraction(f + 0.002), &geom, &Odf3d::Uniform, opts).unwrap();
            prop_assert!(isotropic_projection(&c2).0 >= e);
            let fi = interphase_volume_fraction(f, &geom).unwrap();
            prop_assert!(fi + f < 1.0);
        }
    }
}
