use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_line, AnalysisError, LineFit, VerificationReport};
use crate::catalog::{ReferenceConfig, ReferenceKind};
use crate::flow::{run_flow, FlowConfig, FlowKind, MAX_MCF_STEP};
use crate::geometry::{hausdorff_gap, RegionBoundary};

/// Steps taken when `eps = 0`, where the flow should not move at all.
const STEPS_AT_ZERO: usize = 10;
/// Slack on the initial-distance precondition.
const PRECONDITION_TOL: f64 = 1e-9;
/// Smallest accepted log-log exponent of the sup distance in `eps`.
const MIN_EXPONENT: f64 = 0.4;
/// Largest accepted ratio between the extreme fitted constants.
const MAX_CONSTANT_SPREAD: f64 = 3.0;

const ANCHOR: &str = "a set starting near a strip stays within C√ε of it for a time ε";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub eps: f64,
    pub h: f64,
    pub steps: usize,
    /// `sup_{E₀ Δ F} dist(·, ∂F)`
    pub initial_sup: f64,
    /// largest `sup_{E(t) Δ F} dist(·, ∂F)` over the states produced by the
    /// flow, excluding the initial state
    pub max_sup: f64,
    /// `max_sup / √eps`; `None` for `eps = 0`
    pub c_emp: Option<f64>,
    pub report: VerificationReport,
}

fn check_strip(strip: &ReferenceConfig, eps: f64) -> Result<(), AnalysisError> {
    if strip.kind != ReferenceKind::Strips {
        return Err(AnalysisError::Precondition(format!(
            "reference must be a strip configuration, got {}",
            strip.kind.label()
        )));
    }
    // the ε-neighborhoods of different boundary lines must stay apart
    let spacing = 1.0 / strip.period.map_or(1.0, |p| p.length());
    let total: f64 = strip.strips.iter().map(|b| b.width).sum();
    let thinnest = strip
        .strips
        .iter()
        .map(|b| b.width)
        .fold(spacing - total, f64::min);
    if thinnest <= 2.0 * eps {
        return Err(AnalysisError::Precondition(format!(
            "strip boundaries {thinnest} apart are within 2ε = {}",
            2.0 * eps
        )));
    }
    Ok(())
}

/// Runs the curvature flow for a time `eps` from a set whose symmetric
/// difference with the strip configuration `strip` lies within `eps` of its
/// boundary, and records how far the evolved sets get from that boundary.
///
/// For `eps = 0` the flow is run for ten steps of `cfg.h` instead.
pub fn distance_persistence_check(
    initial: &RegionBoundary,
    strip: &ReferenceConfig,
    cfg: &FlowConfig,
    eps: f64,
) -> Result<PersistenceReport, AnalysisError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(AnalysisError::Precondition(format!("eps = {eps} must be non-negative")));
    }
    if cfg.kind != FlowKind::Mcf {
        return Err(AnalysisError::Precondition("distance persistence concerns the curvature flow".into()));
    }
    check_strip(strip, eps)?;
    if eps > 0.0 && cfg.h > eps.min(MAX_MCF_STEP) {
        return Err(AnalysisError::Precondition(format!(
            "h = {} exceeds min(h₀, ε) = {}",
            cfg.h,
            eps.min(MAX_MCF_STEP)
        )));
    }
    let initial_sup = hausdorff_gap(initial, strip, cfg.grid);
    if initial_sup > eps + PRECONDITION_TOL {
        return Err(AnalysisError::Precondition(format!(
            "initial set reaches {initial_sup} from the strip boundary, more than ε = {eps}"
        )));
    }

    let mut run_cfg = cfg.clone();
    run_cfg.max_time = if eps > 0.0 { eps } else { STEPS_AT_ZERO as f64 * cfg.h };
    run_cfg.stop_tolerance = None;
    run_cfg.sample_every = 1;
    let run = run_flow(initial, &run_cfg).map_err(|f| AnalysisError::Run {
        step: f.step,
        error: f.error,
    })?;
    let max_sup = run
        .samples
        .par_iter()
        .filter(|s| s.step > 0)
        .map(|s| hausdorff_gap(&s.region, strip, cfg.grid))
        .reduce(|| 0.0, f64::max);

    let mut report = VerificationReport::new();
    let c_emp = if eps > 0.0 {
        report.skip(
            "sup_distance_bounded",
            "the constant is only meaningful across an eps sweep",
        );
        Some(max_sup / eps.sqrt())
    } else {
        report.check_le("stays_on_strip", ANCHOR, max_sup, cfg.el_tolerance);
        None
    };
    Ok(PersistenceReport {
        eps,
        h: cfg.h,
        steps: run.reports.len(),
        initial_sup,
        max_sup,
        c_emp,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSweep {
    pub runs: Vec<PersistenceReport>,
    /// `log max_sup` against `log eps`
    pub fit: LineFit,
    /// largest over smallest `C_emp`
    pub constant_spread: f64,
    pub report: VerificationReport,
}

/// [`distance_persistence_check`] for every `eps > 0` in `eps_values`, with
/// time step `min(cfg.h, eps)` and the initial set built by `initial`.
pub fn persistence_sweep(
    eps_values: &[f64],
    initial: impl Fn(f64) -> Result<RegionBoundary, AnalysisError> + Sync,
    strip: &ReferenceConfig,
    cfg: &FlowConfig,
) -> Result<PersistenceSweep, AnalysisError> {
    if eps_values.len() < 2 || eps_values.iter().any(|&e| !(e > 0.0)) {
        return Err(AnalysisError::InvalidArgument(
            "a sweep needs at least two positive eps values".into(),
        ));
    }
    let runs = eps_values
        .par_iter()
        .map(|&eps| {
            let mut c = cfg.clone();
            c.h = cfg.h.min(eps);
            distance_persistence_check(&initial(eps)?, strip, &c, eps)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = runs.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = runs.iter().map(|r| r.max_sup.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let cs: Vec<f64> = runs.iter().filter_map(|r| r.c_emp).collect();
    let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cs.iter().cloned().fold(0.0, f64::max);
    let constant_spread = hi / lo;
    let mut report = VerificationReport::new();
    report
        .push("scaling_exponent", ANCHOR, fit.slope >= MIN_EXPONENT, fit.slope - MIN_EXPONENT)
        .detail = Some(format!("exponent {}", fit.slope));
    report
        .check_le("constant_spread", ANCHOR, constant_spread, MAX_CONSTANT_SPREAD)
        .detail = Some(format!("C_emp from {lo} to {hi}"));
    Ok(PersistenceSweep {
        runs,
        fit,
        constant_spread,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::StripBand;
    use crate::geometry::{shapes, PeriodVector};

    fn flat() -> ReferenceConfig {
        ReferenceConfig::strips(
            PeriodVector::new(1, 0),
            vec![StripBand {
                offset: 0.35,
                width: 0.3,
            }],
        )
        .unwrap()
    }

    #[test]
    fn exact_strip_does_not_move() {
        let f = shapes::strip(0.35, 0.65, 256).unwrap();
        let cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, 0.3);
        let r = distance_persistence_check(&f, &flat(), &cfg, 0.0).unwrap();
        assert_eq!(r.steps, 10);
        assert!(r.report.all_passed(), "{r:?}");
    }

    #[test]
    fn preconditions() {
        let e = shapes::perturbed_strip(0.35, 0.65, 0.02, 1, 256).unwrap();
        let mut cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, 0.3);
        assert!(matches!(
            distance_persistence_check(&e, &flat(), &cfg, 0.01),
            Err(AnalysisError::Precondition(_))
        ));
        cfg.h = 0.03;
        assert!(matches!(
            distance_persistence_check(&e, &flat(), &cfg, 0.02),
            Err(AnalysisError::Precondition(_))
        ));
        cfg.h = 0.02;
        let r = distance_persistence_check(&e, &flat(), &cfg, 0.02).unwrap();
        assert_eq!(r.steps, 1);
        assert!((r.initial_sup - 0.02).abs() < 1e-4);
        assert!(r.max_sup < r.initial_sup);
    }
}
