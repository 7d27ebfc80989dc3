//! Fracture energy of CNT composites: fibre pull-out and rupture bridging,
//! planar orientation statistics, and bundles of agglomerated CNTs.

mod energy;
mod odf;
mod packing;
mod weibull;

pub use energy::{
    critical_length, fracture_energy_agglomerated, fracture_energy_bundle,
    fracture_energy_bundle_parts, fracture_energy_uniform, mass_to_volume_fraction,
    oblique_strength, total_fracture_energy, work_of_fracture, BundleSection, EmbedmentCriterion,
    EnergyParts, FractureEnergy, FractureParams, RuptureStrength,
};
pub use odf::{fit_pq, PlanarOdf};
pub use packing::{PackingTable, DEFAULT_TABLE};
pub use weibull::{weibull_fit, BundleStatistics};
