//! One implicit step of each flow and the outer time loop.
//!
//! Both steppers move the vertices of `E_k` along fixed outward normals by
//! offsets `ψ`, solve the Euler-Lagrange equation of the step for `ψ` and the
//! multiplier `λ` under the area constraint, and then tidy the polygon.

mod linalg;
mod maintenance;
mod mcf;
mod ms;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{DissipationReport, FieldError};
use crate::geometry::{GeometryError, RegionBoundary};

pub use maintenance::{project_area, topology_check};
pub use mcf::{mcf_step, MAX_MCF_STEP};
pub use ms::ms_step;
pub use run::{prepare_initial, run_flow, FlowRun, RunFailure};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("initial area {area} is more than 1e-4 away from the target {target}")]
    InitialArea { area: f64, target: f64 },
    #[error("inner solver stopped after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error(
        "topology event: curves {curves:?} came within {distance:e} of each other (threshold {threshold:e})"
    )]
    Topology {
        distance: f64,
        threshold: f64,
        curves: (usize, usize),
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    /// area-preserving mean curvature flow
    #[serde(rename = "MCF")]
    Mcf,
    /// two-phase Mullins-Sekerka flow
    #[serde(rename = "MS")]
    Ms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub kind: FlowKind,
    /// time step
    pub h: f64,
    /// target area
    pub area: f64,
    /// grid size for rasterization and the Poisson solver
    pub grid: usize,
    /// vertices per unit of boundary length
    pub vertex_target: usize,
    /// sup-norm tolerance on the Euler-Lagrange residual
    pub el_tolerance: f64,
    pub max_inner_iters: usize,
    /// initial damping of the inner iteration
    pub damping: f64,
    pub max_time: f64,
    /// stop once the residual at the start of a step stays below this for
    /// ten consecutive steps
    pub stop_tolerance: Option<f64>,
    /// keep every `sample_every`-th state
    pub sample_every: usize,
}

impl FlowConfig {
    /// Defaults for the given flow: grid 256, tolerance `1e-6` (MCF) or
    /// `1e-4` (MS), 500 inner iterations, damping 0.5, final time 1.
    pub fn new(kind: FlowKind, h: f64, area: f64) -> Self {
        FlowConfig {
            kind,
            h,
            area,
            grid: 256,
            vertex_target: 256,
            el_tolerance: match kind {
                FlowKind::Mcf => 1e-6,
                FlowKind::Ms => 1e-4,
            },
            max_inner_iters: 500,
            damping: 0.5,
            max_time: 1.0,
            stop_tolerance: None,
            sample_every: 10,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |s: &str| Err(FlowError::InvalidConfig(s.to_string()));
        if !(self.h > 0.0) || !self.h.is_finite() {
            return bad("h must be positive");
        }
        if !(self.area > 0.0 && self.area < 1.0) {
            return bad("area must lie in (0, 1)");
        }
        if !(self.el_tolerance > 0.0) {
            return bad("el_tolerance must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if self.vertex_target == 0 || self.max_inner_iters == 0 || self.sample_every == 0 {
            return bad("vertex_target, max_inner_iters and sample_every must be positive");
        }
        if !(self.max_time >= 0.0) {
            return bad("max_time must be non-negative");
        }
        crate::field::GridField::zeros(self.grid).map(|_| ())?;
        Ok(())
    }

    /// Vertex spacing maintained by the steppers: the configured density,
    /// but never coarser than 0.9 grid cells so that rasterization stays
    /// valid after the spacing drifts by up to a factor of two.
    pub fn target_spacing(&self) -> f64 {
        (1.0 / self.vertex_target as f64).min(0.9 / self.grid as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub region: RegionBoundary,
    pub time: f64,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// index of the state produced by this step
    pub step: usize,
    /// time of the state produced by this step
    pub time: f64,
    pub perimeter_before: f64,
    pub perimeter_after: f64,
    pub area_after: f64,
    pub dissipation: DissipationReport,
    pub lambda: f64,
    /// residual of the accepted iterate
    pub el_residual: f64,
    /// residual of `E_k` itself as a candidate, i.e. at zero offset
    pub el_residual_start: f64,
    pub inner_iters: usize,
    /// realized normal offset per vertex of `E_k`
    pub normal_displacement: Vec<f64>,
    /// objective value of each accepted inner iterate
    pub objective_trace: Vec<f64>,
    pub accepted: bool,
}

impl StepReport {
    pub fn max_displacement(&self) -> f64 {
        self.normal_displacement
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One step of the configured flow.
pub fn step(state: &FlowState, cfg: &FlowConfig) -> Result<(FlowState, StepReport), FlowError> {
    match cfg.kind {
        FlowKind::Mcf => mcf_step(state, cfg),
        FlowKind::Ms => ms_step(state, cfg),
    }
}
