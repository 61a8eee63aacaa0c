use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{discrete_reference_perimeter, AnalysisError, TimeSeries, VerificationReport};
use crate::catalog::{
    build_reference, classify, ClassificationResult, PerimeterCatalog, ReferenceConfig, Verdict,
};
use crate::field::rasterize;
use crate::flow::FlowState;
use crate::geometry::{hausdorff_gap, region_curvature_profile, DistanceOracle, RegionBoundary};

/// Reference polygons get this many vertices per grid cell of the raster.
const REFERENCE_VERTICES_PER_CELL: usize = 4;
/// Components of a disk-like limit must agree in area to this tolerance.
const COMPONENT_AREA_TOL: f64 = 1e-3;
/// Boundary components closer than this many grid cells are flagged.
const ZERO_WIDTH_CELLS: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub verdict: Verdict,
    pub classification: ClassificationResult,
    pub reference: ReferenceConfig,
    /// `|E(t) Δ E_∞|` measured by exact-coverage rasterization
    pub symmetric_difference: TimeSeries,
    pub hausdorff: TimeSeries,
    /// `|P(E(t)) − P_∞|` against the polygonal reference perimeter
    pub perimeter_gap: TimeSeries,
    pub deviation: TimeSeries,
    /// areas of the final components (holes for complement limits)
    pub component_areas: Vec<f64>,
    /// smallest distance between different boundary components of the final
    /// state, when below `1/8`
    pub min_separation: Option<f64>,
    /// two boundary components came within `4/n`; a strip limit might be
    /// developing a component of zero width
    pub zero_width_suspected: bool,
    pub report: VerificationReport,
}

/// Smallest distance between vertices of one boundary curve and any other
/// curve, searched up to `radius`.
fn min_separation(region: &RegionBoundary, radius: f64) -> Option<f64> {
    if region.curves().len() < 2 {
        return None;
    }
    let oracle = DistanceOracle::new(region);
    let best = region
        .curves()
        .par_iter()
        .enumerate()
        .map(|(ci, c)| {
            c.vertices()
                .iter()
                .flat_map(|&p| oracle.segments_within(p, radius))
                .filter(|hit| hit.curve != ci)
                .map(|hit| hit.distance)
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    best.is_finite().then_some(best)
}

/// Builds `E_∞` from the last state and measures every sampled state
/// against it.
pub fn detect_limit(
    states: &[FlowState],
    catalog: &PerimeterCatalog,
    epsilon0: f64,
    grid: usize,
) -> Result<LimitReport, AnalysisError> {
    let last = states
        .last()
        .ok_or(AnalysisError::TooFewSamples { needed: 1, got: 0 })?;
    let classification = classify(&last.region, epsilon0, catalog)?;
    if classification.verdict == Verdict::Unclassified {
        return Err(AnalysisError::Unclassified {
            step: last.step,
            perimeter: classification.perimeter,
            deviation: classification.deviation_l2_sq,
        });
    }
    let reference = build_reference(&classification, &last.region)?;
    let p_inf = discrete_reference_perimeter(&classification, &last.region)
        .unwrap_or(classification.perimeter);
    let ref_grid = rasterize(&reference.to_region(REFERENCE_VERTICES_PER_CELL * grid)?, grid)?;

    let measured = states
        .par_iter()
        .map(|st| -> Result<(f64, f64, f64, f64), AnalysisError> {
            let l1 = rasterize(&st.region, grid)?.difference(&ref_grid)?.l1_norm();
            let haus = hausdorff_gap(&st.region, &reference, grid);
            let dev = region_curvature_profile(&st.region)?.deviation_l2_sq;
            Ok((l1, haus, (st.region.perimeter() - p_inf).abs(), dev))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let times: Vec<f64> = states.iter().map(|s| s.time).collect();
    let column = |label: &str, f: fn(&(f64, f64, f64, f64)) -> f64| {
        TimeSeries::new(label, times.clone(), measured.iter().map(f).collect())
    };
    let symmetric_difference = column("symmetric_difference", |m| m.0)?;
    let hausdorff = column("hausdorff", |m| m.1)?;
    let perimeter_gap = column("perimeter_gap", |m| m.2)?;
    let deviation = column("deviation", |m| m.3)?;

    let mut report = VerificationReport::new();
    let component_areas: Vec<f64> = match classification.verdict {
        Verdict::Strips { .. } => Vec::new(),
        Verdict::ComplementDisks { .. } => reference
            .area_mismatch
            .iter()
            .map(|d| d + (1.0 - last.region.area()) / reference.count as f64)
            .collect(),
        _ => reference
            .area_mismatch
            .iter()
            .map(|d| d + last.region.area() / reference.count as f64)
            .collect(),
    };
    if component_areas.is_empty() {
        report.skip(
            "component_areas_equal",
            "strip limits may have components of different areas",
        );
    } else {
        let lo = component_areas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = component_areas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        report.check_le(
            "component_areas_equal",
            "disk-like limits consist of components with the same area",
            hi - lo,
            COMPONENT_AREA_TOL,
        );
    }

    // all boundary curves of the late states share one turning class
    let t_half = 0.5 * last.time;
    let mut mixed = 0usize;
    for st in states.iter().filter(|s| s.time >= t_half) {
        let classes: Vec<i32> = st
            .region
            .curves()
            .iter()
            .filter_map(|c| c.winding_class().ok())
            .collect();
        if classes.len() != st.region.curves().len() || classes.windows(2).any(|w| w[0] != w[1]) {
            mixed += 1;
        }
    }
    report.push(
        "late_turning_equal",
        "late boundary components share one turning number",
        mixed == 0,
        -(mixed as f64),
    );

    let cell = 1.0 / grid as f64;
    let separation = min_separation(&last.region, 0.125);
    let zero_width_suspected = separation.is_some_and(|d| d < ZERO_WIDTH_CELLS * cell);
    Ok(LimitReport {
        verdict: classification.verdict,
        classification,
        reference,
        symmetric_difference,
        hausdorff,
        perimeter_gap,
        deviation,
        component_areas,
        min_separation: separation,
        zero_width_suspected,
        report,
    })
}
