//! Energy-to-structure pipeline: popularity selection, Cauchy–Schwarz
//! intersection, the paths-of-length-three extraction, and the chain that turns
//! many energetic dilates into a set with a small sum-product expansion.

mod intersection;
mod paths;
mod popularity;
mod structure;

pub use intersection::{cs_intersection, CsIntersection, IntersectionFamily, ProductFamily, SetFamily};
pub use paths::{bsg_extract, bsg_extract_with_cap, BsgCertificate, BSG_SIZE_CAP};
pub use popularity::{popularity_select, popularity_level_set, PopularitySelection};
pub use structure::{energy_to_structure, StructureCertificate};
