//! Experiment configuration files.
//!
//! A config is a JSON object with exactly one initial shape. Unknown keys are
//! rejected so that a typo never silently falls back to a default.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use flatflow_core::catalog::DEFAULT_EPSILON0;
use flatflow_core::flow::{FlowConfig, FlowKind};
use flatflow_core::geometry::{shapes, snapshot, PeriodVector, RegionBoundary, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub enum InitialShape {
    Disk {
        r: f64,
        #[serde(default = "center")]
        center: [f64; 2],
    },
    Disks {
        r: f64,
        centers: Vec<[f64; 2]>,
    },
    ComplementDisk {
        r: f64,
        #[serde(default = "center")]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default = "center")]
        center: [f64; 2],
    },
    /// straight strip along the primitive direction `period`
    Strip {
        #[serde(default = "horizontal")]
        period: [i64; 2],
        offset: f64,
        width: f64,
    },
    /// `r + amplitude · cos(mode · (θ − phase))`
    PerturbedDisk {
        r: f64,
        mode: u32,
        amplitude: f64,
        #[serde(default = "center")]
        center: [f64; 2],
        /// draw the phase from the seed instead of using 0
        #[serde(default)]
        random_phase: bool,
    },
    /// horizontal strip `offset < y < offset + width` with both boundaries
    /// displaced by `amplitude · sin(2π mode (x − shift))`
    PerturbedStrip {
        offset: f64,
        width: f64,
        mode: u32,
        amplitude: f64,
        #[serde(default)]
        random_phase: bool,
    },
    PolygonFile {
        path: PathBuf,
    },
}

fn center() -> [f64; 2] {
    [0.5, 0.5]
}

fn horizontal() -> [i64; 2] {
    [1, 0]
}

/// Per-run overrides of a sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub h: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub vertices: Option<usize>,
    #[serde(rename = "T")]
    pub max_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub flow: FlowKind,
    pub initial: InitialShape,
    /// target area; defaults to the area of the initial shape
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_grid", alias = "n")]
    pub grid: usize,
    /// vertices of generated initial curves
    #[serde(default = "default_vertices")]
    pub vertices: usize,
    /// vertices per unit boundary length maintained during the flow
    #[serde(default = "default_vertex_target")]
    pub vertex_target: usize,
    #[serde(default)]
    pub el_tolerance: Option<f64>,
    #[serde(default = "default_inner")]
    pub max_inner_iters: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_time", rename = "T")]
    pub max_time: f64,
    #[serde(default)]
    pub stop_tolerance: Option<f64>,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    /// perimeter cap `M` of the catalog used for classification
    #[serde(default = "default_max_perimeter")]
    pub max_perimeter: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// amplitudes of the perturbation family for `verify-alexandrov`
    #[serde(default = "default_family")]
    pub family_eps: Vec<f64>,
    /// distances for `persistence`
    #[serde(default = "default_persistence")]
    pub persistence_eps: Vec<f64>,
    /// largest time step of `persistence`; each run uses `min(cap, eps)`
    #[serde(default = "default_persistence_cap")]
    pub persistence_h_cap: f64,
    #[serde(default)]
    pub sweep: Vec<SweepPoint>,
}

fn default_h() -> f64 {
    1e-3
}
fn default_grid() -> usize {
    256
}
fn default_vertices() -> usize {
    512
}
fn default_vertex_target() -> usize {
    256
}
fn default_inner() -> usize {
    500
}
fn default_damping() -> f64 {
    0.5
}
fn default_time() -> f64 {
    1.0
}
fn default_sample_every() -> usize {
    10
}
fn default_epsilon0() -> f64 {
    DEFAULT_EPSILON0
}
fn default_max_perimeter() -> f64 {
    6.0
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_family() -> Vec<f64> {
    vec![0.04, 0.02, 0.01, 0.005]
}
fn default_persistence() -> Vec<f64> {
    vec![0.04, 0.01, 0.0025]
}
fn default_persistence_cap() -> f64 {
    flatflow_core::flow::MAX_MCF_STEP
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field_error(field, format!("{v} must be positive")))
    }
}

/// Parses and validates a config. Relative polygon paths stay relative; see
/// [`load_config`] for resolving them against the config's directory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file and resolves a relative polygon path against the
/// directory of the file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let InitialShape::PolygonFile { path: p } = &mut cfg.initial {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
        if !p.exists() {
            return Err(field_error("initial.polygonFile.path", format!("{} does not exist", p.display())));
        }
    }
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(m) = self.m {
            if !(m > 0.0 && m < 1.0) {
                return Err(field_error("m", format!("{m} is not in (0, 1)")));
            }
        }
        positive("h", self.h)?;
        positive("damping", self.damping)?;
        if self.damping > 1.0 {
            return Err(field_error("damping", "must be at most 1"));
        }
        if !(self.max_time >= 0.0) {
            return Err(field_error("T", "must be non-negative"));
        }
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return Err(field_error("grid", format!("{} is not a power of two ≥ 8", self.grid)));
        }
        if self.vertices < flatflow_core::geometry::MIN_VERTICES {
            return Err(field_error("vertices", "too few vertices"));
        }
        for (name, v) in [
            ("vertex_target", self.vertex_target),
            ("max_inner_iters", self.max_inner_iters),
            ("sample_every", self.sample_every),
        ] {
            if v == 0 {
                return Err(field_error(name, "must be positive"));
            }
        }
        if let Some(t) = self.el_tolerance {
            positive("el_tolerance", t)?;
        }
        if let Some(t) = self.stop_tolerance {
            positive("stop_tolerance", t)?;
        }
        positive("epsilon0", self.epsilon0)?;
        positive("max_perimeter", self.max_perimeter)?;
        positive("persistence_h_cap", self.persistence_h_cap)?;
        for e in self.family_eps.iter().chain(&self.persistence_eps) {
            positive("family_eps/persistence_eps", *e)?;
        }
        self.validate_shape()
    }

    fn validate_shape(&self) -> Result<(), CliError> {
        let radius = |r: f64| {
            if r > 0.0 && r < 0.5 {
                Ok(())
            } else {
                Err(field_error("initial.r", format!("{r} is not in (0, 1/2)")))
            }
        };
        match &self.initial {
            InitialShape::Disk { r, .. } | InitialShape::ComplementDisk { r, .. } => radius(*r),
            InitialShape::Disks { r, centers } => {
                if centers.is_empty() {
                    return Err(field_error("initial.centers", "empty"));
                }
                radius(*r)
            }
            InitialShape::Ellipse { a, b, .. } => {
                radius(*a)?;
                radius(*b)
            }
            InitialShape::Strip { period, width, .. } => {
                if PeriodVector::new(period[0], period[1]).gcd() != 1 {
                    return Err(field_error("initial.period", "must be primitive"));
                }
                if !(*width > 0.0 && *width < 1.0 / PeriodVector::new(period[0], period[1]).length()) {
                    return Err(field_error("initial.width", format!("{width} does not fit")));
                }
                Ok(())
            }
            InitialShape::PerturbedDisk { r, amplitude, mode, .. } => {
                radius(*r)?;
                if *mode == 0 || !(amplitude.abs() < *r) {
                    return Err(field_error("initial.amplitude", "mode must be ≥ 1 and |amplitude| < r"));
                }
                Ok(())
            }
            InitialShape::PerturbedStrip { width, mode, .. } => {
                if *mode == 0 || !(*width > 0.0 && *width < 1.0) {
                    return Err(field_error("initial.width", "mode must be ≥ 1 and width in (0, 1)"));
                }
                Ok(())
            }
            InitialShape::PolygonFile { .. } => Ok(()),
        }
    }

    /// Flow parameters; the target area is `m`, or the area of `initial`.
    pub fn flow_config(&self, initial: &RegionBoundary) -> FlowConfig {
        let mut f = FlowConfig::new(self.flow, self.h, self.m.unwrap_or_else(|| initial.area()));
        f.grid = self.grid;
        f.vertex_target = self.vertex_target;
        if let Some(t) = self.el_tolerance {
            f.el_tolerance = t;
        }
        f.max_inner_iters = self.max_inner_iters;
        f.damping = self.damping;
        f.max_time = self.max_time;
        f.stop_tolerance = self.stop_tolerance;
        f.sample_every = self.sample_every;
        f
    }

    /// The initial set, with phases drawn from `seed` where requested.
    pub fn build_initial(&self) -> Result<RegionBoundary, CliError> {
        self.build_shape(&self.initial)
    }

    pub fn build_shape(&self, shape: &InitialShape) -> Result<RegionBoundary, CliError> {
        let n = self.vertices;
        let v = |p: [f64; 2]| Vec2::new(p[0], p[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let region = match shape {
            InitialShape::Disk { r, center } => shapes::disk(v(*center), *r, n)?,
            InitialShape::Disks { r, centers } => {
                let cs: Vec<Vec2> = centers.iter().map(|&c| v(c)).collect();
                shapes::disks(&cs, *r, n)?
            }
            InitialShape::ComplementDisk { r, center } => shapes::complement_disk(v(*center), *r, n)?,
            InitialShape::Ellipse { a, b, center } => shapes::ellipse(v(*center), *a, *b, n)?,
            InitialShape::Strip {
                period,
                offset,
                width,
            } => {
                let p = PeriodVector::new(period[0], period[1]);
                let nu = p.as_vec().normalized().perp_left();
                shapes::slanted_strip(p, nu * *offset, *width, n)?
            }
            InitialShape::PerturbedDisk {
                r,
                mode,
                amplitude,
                center,
                random_phase,
            } => {
                let phase = if *random_phase { rng.gen::<f64>() * 2.0 * PI } else { 0.0 };
                let (r, k, a) = (*r, *mode as f64, *amplitude);
                let c = shapes::polar_curve(v(*center), n, move |t| r + a * (k * (t - phase)).cos());
                RegionBoundary::new(vec![c])?
            }
            InitialShape::PerturbedStrip {
                offset,
                width,
                mode,
                amplitude,
                random_phase,
            } => {
                let shift = if *random_phase { rng.gen::<f64>() } else { 0.0 };
                shapes::perturbed_strip(*offset, offset + width, *amplitude, *mode, n)?
                    .translated(Vec2::new(shift, 0.0))
            }
            InitialShape::PolygonFile { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                snapshot::read_region(&text)?
            }
        };
        Ok(region)
    }

    /// The config with one sweep point's overrides applied.
    pub fn with_overrides(&self, p: &SweepPoint) -> ExperimentConfig {
        let mut c = self.clone();
        c.sweep.clear();
        if let Some(h) = p.h {
            c.h = h;
        }
        if let Some(g) = p.grid {
            c.grid = g;
        }
        if let Some(s) = p.seed {
            c.seed = s;
        }
        if let Some(n) = p.vertices {
            c.vertices = n;
        }
        if let Some(t) = p.max_time {
            c.max_time = t;
        }
        c
    }
}
