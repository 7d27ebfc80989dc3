//! Run configuration: one TOML file, sections named after the usual
//! symbols of the micromechanics literature.
//!
//! Micromechanical inputs are SI (m, Pa, J/m²); the plate problems are in
//! millimetres. Omitted keys take the MWCNT/epoxy reference values.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::{
    BenchmarkCase, BenchmarkSpec, HoledPlate, NotchedPlate, Refinement, SolverOptions,
};
use crate::fracture::{
    BundleStatistics, EmbedmentCriterion, FractureParams, PlanarOdf, RuptureStrength,
};
use crate::homogenize::{AgglomerationParams, FillerGeometry, IsotropicPhase, PhaseSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    #[default]
    Uniform,
    Agglomerated,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompositeSection {
    /// CNT length, m.
    pub L_cnt: f64,
    /// CNT outer diameter, m.
    pub D_cnt: f64,
    /// CNT volume fraction.
    pub f_cnt: f64,
    pub E_cnt: f64,
    pub nu_cnt: f64,
    pub E_m: f64,
    pub nu_m: f64,
    /// Interphase thickness, m.
    pub t: f64,
    pub E_i: f64,
    /// Interphase Poisson ratio; the matrix value when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_i: Option<f64>,
    pub dispersion: Dispersion,
}

impl Default for CompositeSection {
    fn default() -> Self {
        Self {
            L_cnt: 3.21e-6,
            D_cnt: 10.35e-9,
            f_cnt: 0.01,
            E_cnt: 700e9,
            nu_cnt: 0.3,
            E_m: 2.5e9,
            nu_m: 0.28,
            t: 31e-9,
            E_i: 2.17e9,
            nu_i: None,
            dispersion: Dispersion::Uniform,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgglomerationSection {
    pub chi: f64,
    pub zeta: f64,
    pub N_mu: f64,
    /// Standard deviation of the bundle size; 0.1·N_mu when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub N_sigma: Option<f64>,
    pub N_min: f64,
    pub N_max: f64,
}

impl Default for AgglomerationSection {
    fn default() -> Self {
        Self {
            chi: 0.2,
            zeta: 0.4,
            N_mu: 10.0,
            N_sigma: None,
            N_min: 1.0,
            N_max: 50.0,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FractureSection {
    pub sigma_cnt: f64,
    pub tau_cnt: f64,
    pub A: f64,
    pub G_0: f64,
    /// Snubbing friction coefficient.
    pub mu: f64,
    /// Orientation density shape; p = q = 1/2 is random in plane.
    pub p: f64,
    pub q: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub embedment: EmbedmentCriterion,
    pub rupture: RuptureStrength,
}

impl Default for FractureSection {
    fn default() -> Self {
        Self {
            sigma_cnt: 35e9,
            tau_cnt: 47e6,
            A: 0.083,
            G_0: 133.0,
            mu: 0.0,
            p: 0.5,
            q: 0.5,
            theta_min: 0.0,
            theta_max: FRAC_PI_2,
            embedment: EmbedmentCriterion::CriticalLength,
            rupture: RuptureStrength::Nominal,
        }
    }
}

/// One sweep axis, optionally repeated for each value of a series key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted config key, or `kappa` for the aspect ratio L_cnt/D_cnt.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
    /// Explicit axis values; overrides start/stop/count.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub series: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series_values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: "composite.f_cnt".into(),
            start: 0.0,
            stop: 0.02,
            count: 11,
            log: false,
            values: Vec::new(),
            series: String::new(),
            series_values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub case: BenchmarkCase,
    /// Phase-field length in mm; the case default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    pub h_ratio: f64,
    pub coarse_size: f64,
    pub refinement: Refinement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_displacement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub max_cutbacks: u32,
    /// Out-of-plane thickness in metres.
    pub thickness: f64,
    /// Stop once the reaction falls below this fraction of the peak; 0 runs
    /// the full schedule.
    pub stop_below_peak: f64,
    /// Write a VTK snapshot every this many steps (0: final state only).
    pub snapshot_every: usize,
    /// Residual stiffness of fully broken material.
    pub k_res: f64,
    pub notched: NotchedPlate,
    pub holed: HoledPlate,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let b = BenchmarkSpec::new(BenchmarkCase::SenTension);
        Self {
            case: b.case,
            ell: None,
            h_ratio: b.h_ratio,
            coarse_size: b.coarse_size,
            refinement: b.refinement,
            max_displacement: None,
            steps: None,
            max_cutbacks: b.max_cutbacks,
            thickness: b.thickness,
            stop_below_peak: b.stop_below_peak.unwrap_or(0.0),
            snapshot_every: 0,
            k_res: 1e-6,
            notched: b.notched,
            holed: b.holed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub composite: CompositeSection,
    pub agglomeration: AgglomerationSection,
    pub fracture: FractureSection,
    pub sweep: SweepSection,
    pub simulation: SimulationSection,
    pub solver: SolverOptions,
}

fn check(ok: bool, path: &str, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, msg()))
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    check(v > 0.0 && v.is_finite(), path, || {
        format!("must be positive and finite, got {v}")
    })
}

fn poisson(path: &str, v: f64) -> Result<()> {
    check(v > -1.0 && v < 0.5, path, || {
        format!("Poisson ratio must lie in (-1, 0.5), got {v}")
    })
}

impl RunConfig {
    /// Reads a file, applies `key=value` overrides and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_error(&e))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| parse_error(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Returns a copy with one dotted key replaced (used by sweeps).
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self> {
        let mut table = self.to_table();
        if key == "kappa" {
            set_path(
                &mut table,
                "composite.L_cnt",
                toml::Value::Float(value * self.composite.D_cnt),
            )?;
        } else {
            set_path(&mut table, key, toml::Value::Float(value))?;
        }
        Self::from_table(table)
    }

    fn to_table(&self) -> toml::Table {
        match toml::Value::try_from(self) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("config serialises to a table"),
        }
    }

    /// Canonical TOML of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.composite;
        positive("composite.L_cnt", c.L_cnt)?;
        positive("composite.D_cnt", c.D_cnt)?;
        check(c.L_cnt >= c.D_cnt, "composite.L_cnt", || {
            "must not be shorter than D_cnt".into()
        })?;
        check((0.0..1.0).contains(&c.f_cnt), "composite.f_cnt", || {
            format!("must lie in [0, 1), got {}", c.f_cnt)
        })?;
        positive("composite.E_cnt", c.E_cnt)?;
        positive("composite.E_m", c.E_m)?;
        positive("composite.E_i", c.E_i)?;
        poisson("composite.nu_cnt", c.nu_cnt)?;
        poisson("composite.nu_m", c.nu_m)?;
        if let Some(nu) = c.nu_i {
            poisson("composite.nu_i", nu)?;
        }
        check(c.t >= 0.0 && c.t.is_finite(), "composite.t", || {
            format!("must be non-negative, got {}", c.t)
        })?;

        let a = &self.agglomeration;
        check(a.chi > 0.0 && a.chi <= 1.0, "agglomeration.chi", || {
            format!("must lie in (0, 1], got {}", a.chi)
        })?;
        check((0.0..=1.0).contains(&a.zeta), "agglomeration.zeta", || {
            format!("must lie in [0, 1], got {}", a.zeta)
        })?;
        check(a.N_min >= 1.0, "agglomeration.N_min", || {
            format!("must be at least 1, got {}", a.N_min)
        })?;
        check(a.N_max > a.N_min, "agglomeration.N_max", || {
            format!("must exceed N_min, got {}", a.N_max)
        })?;
        positive("agglomeration.N_mu", a.N_mu)?;
        positive("agglomeration.N_sigma", self.n_sigma())?;

        let f = &self.fracture;
        positive("fracture.sigma_cnt", f.sigma_cnt)?;
        positive("fracture.tau_cnt", f.tau_cnt)?;
        check(f.A >= 0.0, "fracture.A", || {
            format!("must be non-negative, got {}", f.A)
        })?;
        check(f.G_0 >= 0.0, "fracture.G_0", || {
            format!("must be non-negative, got {}", f.G_0)
        })?;
        check(f.mu >= 0.0, "fracture.mu", || {
            format!("must be non-negative, got {}", f.mu)
        })?;
        check(f.p >= 0.5, "fracture.p", || {
            format!("must be at least 1/2, got {}", f.p)
        })?;
        check(f.q >= 0.5, "fracture.q", || {
            format!("must be at least 1/2, got {}", f.q)
        })?;
        check(
            0.0 <= f.theta_min && f.theta_min < f.theta_max && f.theta_max <= FRAC_PI_2,
            "fracture.theta_max",
            || {
                format!(
                    "need 0 <= theta_min < theta_max <= pi/2, got [{}, {}]",
                    f.theta_min, f.theta_max
                )
            },
        )?;

        let s = &self.sweep;
        if s.values.is_empty() {
            check(s.count >= 1, "sweep.count", || "must be at least 1".into())?;
            check(
                s.start.is_finite() && s.stop.is_finite(),
                "sweep.start",
                || "range must be finite".into(),
            )?;
            if s.log {
                check(s.start > 0.0 && s.stop > 0.0, "sweep.log", || {
                    "log spacing needs a positive range".into()
                })?;
            }
        }
        self.check_sweep_key("sweep.parameter", &s.parameter)?;
        if !s.series.is_empty() {
            self.check_sweep_key("sweep.series", &s.series)?;
            check(!s.series_values.is_empty(), "sweep.series_values", || {
                "series needs at least one value".into()
            })?;
        }

        let m = &self.simulation;
        if let Some(l) = m.ell {
            positive("simulation.ell", l)?;
        }
        check(m.h_ratio >= 1.0, "simulation.h_ratio", || {
            format!("must be at least 1, got {}", m.h_ratio)
        })?;
        positive("simulation.coarse_size", m.coarse_size)?;
        positive("simulation.thickness", m.thickness)?;
        check(
            (0.0..1.0).contains(&m.stop_below_peak),
            "simulation.stop_below_peak",
            || format!("must lie in [0, 1), got {}", m.stop_below_peak),
        )?;
        check(m.k_res >= 0.0 && m.k_res < 1.0, "simulation.k_res", || {
            format!("must lie in [0, 1), got {}", m.k_res)
        })?;
        if let Some(steps) = m.steps {
            check(steps > 0, "simulation.steps", || "must be positive".into())?;
        }

        let o = &self.solver;
        check(o.rtol > 0.0, "solver.rtol", || {
            format!("must be positive, got {}", o.rtol)
        })?;
        check(o.max_iterations > 0, "solver.max_iterations", || {
            "must be positive".into()
        })?;
        check(o.refresh_interval > 0, "solver.refresh_interval", || {
            "must be positive".into()
        })?;
        Ok(())
    }

    fn check_sweep_key(&self, field: &str, key: &str) -> Result<()> {
        if key == "kappa" {
            return Ok(());
        }
        let table = self.to_table();
        let mut parts = key.split('.');
        let section = parts.next().unwrap_or_default();
        let name = parts.next().unwrap_or_default();
        let known = ["composite", "agglomeration", "fracture"];
        if !known.contains(&section) || parts.next().is_some() {
            return Err(Error::config(
                field,
                format!("`{key}` is not a sweepable micromechanics key"),
            ));
        }
        let sec = table
            .get(section)
            .and_then(|v| v.as_table())
            .cloned()
            .unwrap_or_default();
        let optional = ["nu_i", "N_sigma"];
        match sec.get(name) {
            Some(toml::Value::Float(_) | toml::Value::Integer(_)) => Ok(()),
            None if optional.contains(&name) => Ok(()),
            _ => {
                let names: Vec<&str> = sec.keys().map(String::as_str).chain(optional).collect();
                Err(Error::config(
                    field,
                    format!("`{key}` is not a numeric key{}", suggestion(name, &names)),
                ))
            }
        }
    }

    pub fn n_sigma(&self) -> f64 {
        self.agglomeration
            .N_sigma
            .unwrap_or(0.1 * self.agglomeration.N_mu)
    }

    pub fn geometry(&self) -> Result<FillerGeometry> {
        let c = &self.composite;
        FillerGeometry::new(c.L_cnt, c.D_cnt, c.t)
    }

    pub fn phases(&self) -> PhaseSet {
        let c = &self.composite;
        PhaseSet {
            matrix: IsotropicPhase::new(c.E_m, c.nu_m),
            filler: IsotropicPhase::new(c.E_cnt, c.nu_cnt),
            interphase: IsotropicPhase::new(c.E_i, c.nu_i.unwrap_or(c.nu_m)),
            f_p: c.f_cnt,
        }
    }

    /// Agglomeration state for the configured dispersion (ζ = 0 when
    /// uniform).
    pub fn agglomeration(&self) -> Result<AgglomerationParams> {
        let zeta = match self.composite.dispersion {
            Dispersion::Uniform => 0.0,
            Dispersion::Agglomerated => self.agglomeration.zeta,
        };
        AgglomerationParams::new(self.agglomeration.chi, zeta)
    }

    pub fn fracture_params(&self) -> Result<FractureParams> {
        let f = &self.fracture;
        let p = FractureParams {
            g0: f.G_0,
            sigma_ult: f.sigma_cnt,
            tau_int: f.tau_cnt,
            a_const: f.A,
            mu_snub: f.mu,
            e_cnt: self.composite.E_cnt,
            geom: self.geometry()?,
            f_p: self.composite.f_cnt,
            embedment: f.embedment,
            rupture: f.rupture,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn odf(&self) -> Result<PlanarOdf> {
        let f = &self.fracture;
        PlanarOdf::new(f.p, f.q, f.theta_min, f.theta_max)
    }

    pub fn bundle_statistics(&self) -> Result<BundleStatistics> {
        let a = &self.agglomeration;
        BundleStatistics::fit(a.N_mu, self.n_sigma(), a.N_min, a.N_max)
    }

    /// Plate problem settings with the case defaults filled in.
    pub fn benchmark(&self) -> BenchmarkSpec {
        let m = &self.simulation;
        let base = BenchmarkSpec::new(m.case);
        BenchmarkSpec {
            ell: m.ell.unwrap_or(base.ell),
            h_ratio: m.h_ratio,
            coarse_size: m.coarse_size,
            refinement: m.refinement,
            notched: m.notched,
            holed: m.holed.clone(),
            max_displacement: m.max_displacement.unwrap_or(base.max_displacement),
            steps: m.steps.unwrap_or(base.steps),
            max_cutbacks: m.max_cutbacks,
            thickness: m.thickness,
            stop_below_peak: (m.stop_below_peak > 0.0).then_some(m.stop_below_peak),
            ..base
        }
    }

    /// Axis values of the sweep in order.
    pub fn sweep_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        if !s.values.is_empty() {
            return s.values.clone();
        }
        if s.count == 1 {
            return vec![s.start];
        }
        (0..s.count)
            .map(|k| {
                let t = k as f64 / (s.count - 1) as f64;
                if s.log {
                    (s.start.ln() + t * (s.stop.ln() - s.start.ln())).exp()
                } else {
                    s.start + t * (s.stop - s.start)
                }
            })
            .collect()
    }
}

fn suggestion(word: &str, candidates: &[&str]) -> String {
    candidates
        .iter()
        .map(|c| (strsim::jaro_winkler(word, c), *c))
        .filter(|(s, _)| *s > 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| format!("; did you mean `{c}`?"))
        .unwrap_or_default()
}

/// Turns a TOML or serde error into a config error, adding a nearest-key
/// hint for unknown fields.
fn parse_error(e: &toml::de::Error) -> Error {
    let msg = e.message().to_string();
    let mut path = String::from("<config>");
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some((field, tail)) = rest.split_once('`') {
            path = field.to_string();
            let expected: Vec<&str> = tail.split('`').skip(1).step_by(2).collect();
            let hint = suggestion(field, &expected);
            return Error::config(
                path,
                format!(
                    "unknown key{hint} (expected one of {})",
                    expected.join(", ")
                ),
            );
        }
    }
    if let Some(span) = e.span() {
        path = format!("<config> byte {}", span.start);
    }
    Error::config(path, msg)
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "malformed dotted key"));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{p}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Applies one `section.key=value` override. The value is read as a TOML
/// literal and falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must look like section.key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    set_path(table, key, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_values() {
        let c = RunConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(c.composite.f_cnt, 0.01);
        assert_eq!(c.agglomeration.chi, 0.2);
        assert_eq!(c.agglomeration.zeta, 0.4);
        assert_eq!(c.fracture.G_0, 133.0);
        assert_eq!(c.n_sigma(), 1.0);
        assert_eq!(c.phases().interphase.nu, 0.28);
    }

    #[test]
    fn zeta_out_of_range_names_the_field() {
        let e = RunConfig::from_toml_str("[agglomeration]\nzeta = 1.5\n", &[]).unwrap_err();
        assert!(
            matches!(&e, Error::Config { path, .. } if path == "agglomeration.zeta"),
            "{e}"
        );
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let e = RunConfig::from_toml_str("[agglomeration]\nzetta = 0.3\n", &[]).unwrap_err();
        let s = e.to_string();
        assert!(
            s.contains("zetta") && s.contains("did you mean `zeta`"),
            "{s}"
        );
    }

    #[test]
    fn overrides_and_hash() {
        let a = RunConfig::from_toml_str("", &["composite.f_cnt=0.02".into()]).unwrap();
        assert_eq!(a.composite.f_cnt, 0.02);
        let b = RunConfig::from_toml_str("[composite]\nf_cnt = 0.02\n", &[]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig::default().hash());
        let c = RunConfig::from_toml_str("", &["simulation.case=\"holed_plate\"".into()]).unwrap();
        assert_eq!(c.simulation.case, BenchmarkCase::HoledPlate);
        let d = RunConfig::from_toml_str("", &["simulation.case=sen_shear".into()]).unwrap();
        assert_eq!(d.simulation.case, BenchmarkCase::SenShear);
    }

    #[test]
    fn kappa_sweep_moves_the_length() {
        let c = RunConfig::default().with_value("kappa", 100.0).unwrap();
        assert!((c.composite.L_cnt - 100.0 * 10.35e-9).abs() < 1e-20);
    }

    #[test]
    fn bad_sweep_key_is_rejected() {
        let e = RunConfig::from_toml_str("[sweep]\nparameter = \"composite.f_cntt\"\n", &[])
            .unwrap_err();
        assert!(e.to_string().contains("f_cnt"), "{e}");
    }

    #[test]
    fn canonical_round_trip() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml_str(&c.canonical(), &[]).unwrap();
        assert_eq!(c, back);
    }
}
