//! Exact-arithmetic toolkit for cyclic difference families and the Steiner
//! systems they develop into.
//!
//! The pipeline: base blocks over `Z_m` (or `Z_m ∪ {∞}` for 1-rotational
//! families) are verified by difference counting, developed into full
//! designs, fingerprinted with the grid-profile invariant, and classified
//! up to isomorphism with exact automorphism-group orders. Everything is
//! integer arithmetic; no floating point appears anywhere.

pub mod catalog;
pub mod design;
pub mod diffam;
pub mod invar;
pub mod isomorph;
pub mod modarith;

pub use design::{
    DesignError, DesignReport, DevelopmentOrigin, Incidence, LineTable, PointMap, SteinerDesign,
};
pub use diffam::{
    brute_force_families, mirror_vectors, BaseBlock, DifferenceFamily, FamilyError, FamilyKind,
    FamilyReport, MirrorVector, MultiplierSpec,
};
pub use invar::{expected_mass, grid_profile, profile_digest, profiles, GridProfile, ProfileSet};
pub use isomorph::{
    affine_automorphisms, are_isomorphic, automorphism_group_order, verify_automorphism,
    AutReport, IsoError, PreparedDesign, SearchBudget, SearchStrategy,
};
pub use modarith::{CyclicGroup, ModArithError, Point};
