use super::{AnalysisError, TimeSeries, VerificationReport};
use crate::flow::{FlowConfig, FlowKind, StepReport};

/// Slack allowed per step, in units of the inner tolerance.
const STEP_SLACK: f64 = 10.0;
/// Slack allowed per step in the summed budget, in units of the tolerance.
const BUDGET_SLACK: f64 = 10.0;

/// Weight of the dissipation in the step objective: `1/h` for the curvature
/// flow and `h/2` for Mullins-Sekerka (its dissipation is `∫|∇U|²` with
/// `U = O(1/h)`).
fn dissipation_weight(cfg: &FlowConfig) -> f64 {
    match cfg.kind {
        FlowKind::Mcf => 1.0 / cfg.h,
        FlowKind::Ms => 0.5 * cfg.h,
    }
}

/// Per-step and summed checks over the reports of a completed run. Failures
/// are recorded with the worst offending step, never returned as errors.
pub fn verify_flow_invariants(reports: &[StepReport], cfg: &FlowConfig) -> VerificationReport {
    let mut out = VerificationReport::new();
    if reports.is_empty() {
        out.skip("all", "no steps were taken");
        return out;
    }
    let tol = cfg.el_tolerance;
    let w = dissipation_weight(cfg);

    let worst = |f: &dyn Fn(&StepReport) -> f64| {
        reports
            .iter()
            .map(|r| (f(r), r.step))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    };
    let step_detail = |s: usize| Some(format!("worst at step {s}"));

    let (slack, s) = worst(&|r| {
        r.perimeter_before + STEP_SLACK * tol - (r.perimeter_after + w * r.dissipation.value)
    });
    out.push(
        "energy_comparison",
        "each step lowers perimeter plus weighted dissipation",
        slack >= 0.0,
        slack,
    )
    .detail = step_detail(s);

    let (slack, s) = worst(&|r| r.perimeter_before + STEP_SLACK * tol - r.perimeter_after);
    out.push(
        "perimeter_monotone",
        "the perimeter is non-increasing",
        slack >= 0.0,
        slack,
    )
    .detail = step_detail(s);

    let (slack, s) = worst(&|r| tol - (r.area_after - cfg.area).abs());
    out.push("area_preserved", "the area is preserved", slack >= 0.0, slack)
        .detail = step_detail(s);

    let (slack, s) = worst(&|r| tol - r.el_residual);
    out.push(
        "inner_converged",
        "each step solves its Euler-Lagrange equation",
        slack >= 0.0,
        slack,
    )
    .detail = step_detail(s);

    let p0 = reports[0].perimeter_before;
    let pf = reports.last().unwrap().perimeter_after;
    let spent: f64 = reports.iter().map(|r| w * r.dissipation.value).sum();
    let slack = p0 - pf + BUDGET_SLACK * tol * reports.len() as f64 - spent;
    out.push(
        "dissipation_budget",
        "summed weighted dissipation is bounded by the perimeter drop",
        slack >= 0.0,
        slack,
    )
    .detail = Some(format!("spent {spent:e}, drop {:e}", p0 - pf));
    out
}

/// Perimeter at time 0 and after every step.
pub fn perimeter_series(reports: &[StepReport]) -> Result<TimeSeries, AnalysisError> {
    let first = reports.first().ok_or(AnalysisError::TooFewSamples { needed: 1, got: 0 })?;
    let t0 = first.time - first_step_length(reports);
    let mut times = vec![t0];
    let mut values = vec![first.perimeter_before];
    for r in reports {
        times.push(r.time);
        values.push(r.perimeter_after);
    }
    TimeSeries::new("perimeter", times, values)
}

fn first_step_length(reports: &[StepReport]) -> f64 {
    match reports {
        [a, b, ..] => b.time - a.time,
        [a] => a.time,
        [] => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::run_flow;
    use crate::geometry::{shapes, Vec2};

    fn disk_run() -> (Vec<StepReport>, FlowConfig) {
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.25, 400).unwrap();
        let mut cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, e.area());
        cfg.max_time = 0.02;
        (run_flow(&e, &cfg).unwrap().reports, cfg)
    }

    #[test]
    fn stationary_disk_passes() {
        let (reports, cfg) = disk_run();
        let r = verify_flow_invariants(&reports, &cfg);
        assert!(r.all_passed(), "{r:?}");
        let p = perimeter_series(&reports).unwrap();
        assert_eq!(p.len(), reports.len() + 1);
        assert!(p.times()[0].abs() < 1e-15);
    }

    #[test]
    fn corrupted_perimeter_is_named() {
        let (mut reports, cfg) = disk_run();
        reports[5].perimeter_after += 1e-3;
        let r = verify_flow_invariants(&reports, &cfg);
        let failed: Vec<_> = r.failed().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"perimeter_monotone"), "{failed:?}");
        assert!(failed.contains(&"energy_comparison"));
        assert_eq!(
            r.get("perimeter_monotone").unwrap().detail.as_deref(),
            Some("worst at step 6")
        );
    }
}
