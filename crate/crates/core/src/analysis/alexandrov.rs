use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{fit_line, AnalysisError, LineFit, VerificationReport};
use crate::catalog::{classify, reference_perimeter, ClassificationResult, PerimeterCatalog, Verdict};
use crate::flow::FlowState;
use crate::geometry::RegionBoundary;

/// Gap and deviation both below this make a state exactly critical.
const CRITICAL_TOL: f64 = 1e-6;
/// Deviation below which the gap/deviation ratio is not meaningful.
const MIN_DEVIATION: f64 = 1e-12;
/// A ratio may exceed the median by at most this factor.
const RATIO_SPREAD: f64 = 10.0;
/// Accepted deviation of the log-log slope from 1.
const SLOPE_TOL: f64 = 0.15;

const ANCHOR_GAP: &str = "perimeter gap to the catalog is bounded by the squared curvature deviation";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlexandrovSample {
    pub step: usize,
    pub time: f64,
    pub verdict: Verdict,
    pub perimeter: f64,
    pub reference_perimeter: f64,
    pub gap: f64,
    pub deviation: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlexandrovReport {
    pub report: VerificationReport,
    pub samples: Vec<AlexandrovSample>,
}

/// Perimeter of the critical polygonal configuration matching `result`.
///
/// For disks and holes this is the regular polygon with each curve's vertex
/// count and the equal share of the area, `2√(N a tan(π/N))`, which is the
/// least perimeter an `N`-gon of area `a` can have; it tends to the catalog
/// value `2√(π a)` as `N → ∞`. Straight strips are already exact.
pub fn discrete_reference_perimeter(
    result: &ClassificationResult,
    region: &RegionBoundary,
) -> Option<f64> {
    let m = region.area();
    let polygon = |share: f64| -> f64 {
        region
            .curves()
            .iter()
            .map(|c| {
                let n = c.len() as f64;
                2.0 * (n * (PI / n).tan() * share).sqrt()
            })
            .sum()
    };
    match result.verdict {
        Verdict::Disks { count } => Some(polygon(m / count as f64)),
        Verdict::ComplementDisks { count } => Some(polygon((1.0 - m) / count as f64)),
        Verdict::Strips { count, period } => Some(reference_perimeter(
            crate::catalog::ReferenceKind::Strips,
            count,
            Some(period),
            m,
        )),
        Verdict::Unclassified => None,
    }
}

fn sample(
    region: &RegionBoundary,
    step: usize,
    time: f64,
    catalog: &PerimeterCatalog,
    epsilon0: f64,
) -> Result<(AlexandrovSample, f64), String> {
    let result = classify(region, epsilon0, catalog).map_err(|e| e.to_string())?;
    let reference =
        discrete_reference_perimeter(&result, region).ok_or_else(|| "unclassified".to_string())?;
    let catalog_value = result
        .matched_entry
        .map(|e| e.perimeter)
        .ok_or_else(|| "no catalog entry".to_string())?;
    let gap = result.perimeter - reference;
    let deviation = result.deviation_l2_sq;
    Ok((
        AlexandrovSample {
            step,
            time,
            verdict: result.verdict,
            perimeter: result.perimeter,
            reference_perimeter: reference,
            gap,
            deviation,
            ratio: if deviation > MIN_DEVIATION { gap / deviation } else { f64::NAN },
        },
        catalog_value,
    ))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Adds the critical-state and ratio-spread checks for `samples`.
fn ratio_checks(report: &mut VerificationReport, samples: &[AlexandrovSample]) {
    let mut ratios = Vec::new();
    for s in samples {
        if s.deviation <= MIN_DEVIATION {
            let worst = s.gap.abs().max(s.deviation);
            report
                .check_le(&format!("critical_state_{}", s.step), ANCHOR_GAP, worst, CRITICAL_TOL)
                .detail = Some(format!("gap {:e}, deviation {:e}", s.gap, s.deviation));
        } else {
            ratios.push(s.ratio);
        }
    }
    if ratios.is_empty() {
        report.skip("gap_ratio_bounded", "no state with a measurable deviation");
        return;
    }
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let med = median(&mut ratios);
    report
        .check_le("gap_ratio_bounded", ANCHOR_GAP, max, RATIO_SPREAD * med)
        .detail = Some(format!("max ratio {max:e}, median {med:e}"));
}

/// Gap/deviation ratio over the sampled states of a run. States outside the
/// window `P ≤ P(E) ≤ P' − δ₀` above their matched catalog value `P`, and
/// states that do not classify, are skipped with a reason.
pub fn verify_alexandrov_along_flow(
    states: &[FlowState],
    catalog: &PerimeterCatalog,
    epsilon0: f64,
) -> AlexandrovReport {
    let mut report = VerificationReport::new();
    let mut samples = Vec::new();
    let delta0 = catalog.delta0();
    for st in states {
        let name = format!("state_{}", st.step);
        match sample(&st.region, st.step, st.time, catalog, epsilon0) {
            Err(reason) => report.skip(name, reason),
            Ok((s, catalog_value)) => {
                let upper = catalog.next_above(catalog_value).map_or(f64::INFINITY, |p| p - delta0);
                if s.perimeter > upper {
                    report.skip(
                        name,
                        format!("perimeter {} above the window bound {upper}", s.perimeter),
                    );
                } else if s.gap < -CRITICAL_TOL {
                    report.skip(name, format!("perimeter below its reference by {:e}", -s.gap));
                } else {
                    samples.push(s);
                }
            }
        }
    }
    ratio_checks(&mut report, &samples);
    AlexandrovReport { report, samples }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub samples: Vec<AlexandrovSample>,
    /// `log gap` against `log deviation`
    pub fit: LineFit,
    pub report: VerificationReport,
}

/// Log-log slope of the perimeter gap against the curvature deviation over a
/// family of near-critical sets, ordered as given.
pub fn alexandrov_scaling(
    family: &[RegionBoundary],
    catalog: &PerimeterCatalog,
    epsilon0: f64,
) -> Result<ScalingReport, AnalysisError> {
    let mut samples = Vec::with_capacity(family.len());
    for (i, region) in family.iter().enumerate() {
        let (s, _) = sample(region, i, 0.0, catalog, epsilon0).map_err(|reason| {
            AnalysisError::Precondition(format!("family member {i}: {reason}"))
        })?;
        if !(s.gap > 0.0 && s.deviation > MIN_DEVIATION) {
            return Err(AnalysisError::Precondition(format!(
                "family member {i} has gap {:e} and deviation {:e}",
                s.gap, s.deviation
            )));
        }
        samples.push(s);
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.deviation.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.gap.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let mut report = VerificationReport::new();
    report
        .check_le("quadratic_law_slope", ANCHOR_GAP, (fit.slope - 1.0).abs(), SLOPE_TOL)
        .detail = Some(format!("slope {}", fit.slope));
    ratio_checks(&mut report, &samples);
    Ok(ScalingReport {
        samples,
        fit,
        report,
    })
}
