//! Minimizing-movement (flat flow) simulation of area-preserving curvature flow
//! and two-phase Mullins-Sekerka flow on the flat torus `[0,1)²`.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: lifted polygonal curves on the torus, perimeter, area,
//!   discrete curvature, signed distance and covering diagnostics.
//! * [`catalog`]: the finite catalog of critical perimeters for a given area
//!   and perimeter cap, and the classifier that matches a near-critical set to
//!   a union of equal disks, complements of equal disks, or parallel strips.
//! * [`field`]: periodic grids, exact-coverage rasterization, the spectral
//!   Poisson solver and both dissipation functionals.
//! * [`flow`]: one implicit step of each flow and the outer time loop.
//! * [`analysis`]: convergence-rate fits and verification reports.

pub mod analysis;
pub mod catalog;
pub mod field;
pub mod flow;
pub mod geometry;

pub use catalog::{
    build_reference, classify, enumerate_catalog, perimeter_gap_bound_check, CatalogEntry,
    ClassificationResult, PerimeterCatalog, ReferenceConfig, ReferenceKind, Verdict,
};
pub use field::{GridField, DissipationKind, DissipationReport};
pub use flow::{FlowConfig, FlowKind, FlowState, StepReport};
pub use geometry::{ClosedCurve, PeriodVector, RegionBoundary, TorusPoint, Vec2};
