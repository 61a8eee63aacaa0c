use super::linalg::solve_cyclic_tridiagonal;
use super::maintenance::{
    area_gradient, curvature_and_weights, finish_step, local_curvature, neighbors, shift_to_area,
    zero_offsets, Frame, Offsets,
};
use super::{FlowConfig, FlowError, FlowState, StepReport};
use crate::field::{DissipationKind, DissipationReport};
use crate::geometry::{DistanceOracle, RegionBoundary, Vec2};

/// Largest time step for which the inner Newton iteration is supported.
pub const MAX_MCF_STEP: f64 = 0.05;

/// Finite-difference step for the curvature Jacobian.
const FD_STEP: f64 = 1e-7;

/// Residual data of one iterate.
struct Evaluation {
    region: RegionBoundary,
    /// `sd/h + κ` per vertex
    value: Offsets,
    /// `∂ sd / ∂ψ` per vertex
    sd_slope: Offsets,
    lambda: f64,
    residual: f64,
}

fn evaluate(
    oracle: &DistanceOracle,
    frames: &[Frame],
    psi: &Offsets,
    region: RegionBoundary,
    h: f64,
) -> Evaluation {
    let mut value = Vec::with_capacity(frames.len());
    let mut sd_slope = Vec::with_capacity(frames.len());
    let mut weights = Vec::with_capacity(frames.len());
    for (f, s) in frames.iter().zip(psi) {
        let q = f.positions(s);
        let (kappa, w) = curvature_and_weights(&q, f.period.as_vec());
        let mut v = Vec::with_capacity(q.len());
        let mut slope = Vec::with_capacity(q.len());
        for (i, &p) in q.iter().enumerate() {
            let sd = oracle.signed_distance(p);
            let g = match oracle.nearest(p) {
                Some(n) if n.distance > 1e-12 => {
                    let dir = (p - n.point) * (1.0 / n.distance);
                    sd.signum() * dir.dot(f.normals[i])
                }
                _ => 1.0,
            };
            v.push(sd / h + kappa[i]);
            // the slope of sd along the normal never drops far below one for
            // offsets small compared to the curvature radius
            slope.push(g.max(0.5));
        }
        value.push(v);
        sd_slope.push(slope);
        weights.push(w);
    }
    let (num, den) = value
        .iter()
        .flatten()
        .zip(weights.iter().flatten())
        .fold((0.0, 0.0), |(a, b), (v, w)| (a + v * w, b + w));
    let lambda = num / den;
    let residual = value
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max((v - lambda).abs()));
    Evaluation {
        region,
        value,
        sd_slope,
        lambda,
        residual,
    }
}

/// `P(Γ_ψ) + (1/h) ∫_{Γ_ψ Δ E} dist(x, ∂E) dx`, the distance integral
/// written in normal coordinates over `E_k`.
fn objective(region: &RegionBoundary, dissipation: f64, h: f64) -> f64 {
    region.perimeter() + dissipation / h
}

/// `Σ w_i (ψ_i²/2 + κ_i ψ_i³/3)`: the normal-coordinate value of
/// `∫_{FΔE} dist(x, ∂E) dx`, the area element at normal distance `t` being
/// `(1 + κ t) ds`.
pub(crate) fn normal_dissipation(psi: &Offsets, kappa0: &Offsets, w0: &Offsets) -> f64 {
    psi.iter()
        .flatten()
        .zip(kappa0.iter().flatten())
        .zip(w0.iter().flatten())
        .map(|((s, k), w)| w * (0.5 * s * s + k * s * s * s / 3.0))
        .sum()
}

/// Newton direction `(dψ, dλ)` for the bordered system
/// `[J  -1; gᵀ 0] (dψ, dλ) = (-(r - λ), -(A - m))`.
fn newton_direction(
    frames: &[Frame],
    psi: &Offsets,
    ev: &Evaluation,
    lambda: f64,
    area_defect: f64,
    h: f64,
) -> Option<(Offsets, f64)> {
    let mut x1 = Vec::with_capacity(frames.len());
    let mut x2 = Vec::with_capacity(frames.len());
    let mut g_x1 = 0.0;
    let mut g_x2 = 0.0;
    for (c, f) in frames.iter().enumerate() {
        let q = f.positions(&psi[c]);
        let period = f.period.as_vec();
        let n = q.len();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        for i in 0..n {
            let (a, cc) = neighbors(&q, period, i);
            let b = q[i];
            let ip = (i + n - 1) % n;
            let inx = (i + 1) % n;
            let d = |v: Vec2| v * FD_STEP;
            let dk = |pa: Vec2, pb: Vec2, pc: Vec2| {
                (local_curvature(a + pa, b + pb, cc + pc) - local_curvature(a - pa, b - pb, cc - pc))
                    / (2.0 * FD_STEP)
            };
            sub[i] = dk(d(f.normals[ip]), Vec2::ZERO, Vec2::ZERO);
            diag[i] = dk(Vec2::ZERO, d(f.normals[i]), Vec2::ZERO) + ev.sd_slope[c][i] / h;
            sup[i] = dk(Vec2::ZERO, Vec2::ZERO, d(f.normals[inx]));
        }
        let rhs: Vec<f64> = ev.value[c].iter().map(|v| -(v - lambda)).collect();
        let ones = vec![1.0; n];
        let a1 = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let a2 = solve_cyclic_tridiagonal(&sub, &diag, &sup, &ones)?;
        let g = area_gradient(&q, &f.normals, period);
        g_x1 += g.iter().zip(&a1).map(|(a, b)| a * b).sum::<f64>();
        g_x2 += g.iter().zip(&a2).map(|(a, b)| a * b).sum::<f64>();
        x1.push(a1);
        x2.push(a2);
    }
    if !(g_x2.abs() > 0.0) {
        return None;
    }
    let d_lambda = (-area_defect - g_x1) / g_x2;
    let d_psi = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + d_lambda * v).collect())
        .collect();
    Some((d_psi, d_lambda))
}

/// One minimizing-movement step of area-preserving curvature flow.
///
/// Solves `sd_E(x)/h + κ(x) = λ` on the new boundary by damped Newton on the
/// normal offsets with the multiplier as an extra unknown and the area
/// constraint as the bordering row. Every iterate is shifted back to the
/// target area exactly.
pub fn mcf_step(state: &FlowState, cfg: &FlowConfig) -> Result<(FlowState, StepReport), FlowError> {
    cfg.validate()?;
    if cfg.h > MAX_MCF_STEP {
        return Err(FlowError::InvalidConfig(format!(
            "curvature-flow step h = {} exceeds {MAX_MCF_STEP}",
            cfg.h
        )));
    }
    let h = cfg.h;
    let e = &state.region;
    let frames = Frame::of(e);
    let oracle = DistanceOracle::new(e);
    let (kappa0, w0): (Offsets, Offsets) = frames
        .iter()
        .map(|f| curvature_and_weights(&f.base, f.period.as_vec()))
        .unzip();

    let mut psi = zero_offsets(&frames);
    let start = evaluate(&oracle, &frames, &psi, e.clone(), h);
    let el_residual_start = start.residual;

    let region = shift_to_area(&frames, &mut psi, cfg.area)?;
    let mut ev = evaluate(&oracle, &frames, &psi, region, h);
    let mut lambda = ev.lambda;
    let mut omega = cfg.damping;
    let mut iters = 0usize;
    let mut trace = vec![objective(&ev.region, normal_dissipation(&psi, &kappa0, &w0), h)];
    while ev.residual > cfg.el_tolerance {
        if iters >= cfg.max_inner_iters {
            return Err(FlowError::NotConverged {
                iterations: iters,
                residual: ev.residual,
            });
        }
        iters += 1;
        let defect = ev.region.area() - cfg.area;
        let Some((d_psi, d_lambda)) = newton_direction(&frames, &psi, &ev, lambda, defect, h) else {
            return Err(FlowError::NotConverged {
                iterations: iters,
                residual: ev.residual,
            });
        };
        // backtrack on the residual
        loop {
            let mut trial: Offsets = psi
                .iter()
                .zip(&d_psi)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + omega * v).collect())
                .collect();
            let accepted = shift_to_area(&frames, &mut trial, cfg.area)
                .ok()
                .map(|region| evaluate(&oracle, &frames, &trial, region, h))
                .filter(|t| t.residual.is_finite() && t.residual < ev.residual);
            if let Some(t) = accepted {
                psi = trial;
                lambda += omega * d_lambda;
                ev = t;
                trace.push(objective(&ev.region, normal_dissipation(&psi, &kappa0, &w0), h));
                omega = (2.0 * omega).min(1.0);
                break;
            }
            omega *= 0.5;
            if omega < 1e-6 {
                return Err(FlowError::NotConverged {
                    iterations: iters,
                    residual: ev.residual,
                });
            }
        }
    }

    let dissipation = normal_dissipation(&psi, &kappa0, &w0);
    let perimeter_before = e.perimeter();
    let lambda_ls = ev.lambda;
    let el_residual = ev.residual;
    let region = finish_step(ev.region, cfg.target_spacing(), cfg.area, 2.0 * h)?;
    let perimeter_after = region.perimeter();
    let area_after = region.area();
    let accepted = perimeter_after <= perimeter_before + cfg.el_tolerance
        && (area_after - cfg.area).abs() <= cfg.el_tolerance;
    let report = StepReport {
        step: state.step + 1,
        time: (state.step + 1) as f64 * h,
        perimeter_before,
        perimeter_after,
        area_after,
        dissipation: DissipationReport {
            value: dissipation,
            kind: DissipationKind::Mcf,
            h_used: Some(h),
            hm1_norm_sq: None,
            mean_removed: 0.0,
        },
        lambda: lambda_ls,
        el_residual,
        el_residual_start,
        inner_iters: iters,
        normal_displacement: psi.into_iter().flatten().collect(),
        objective_trace: trace,
        accepted,
    };
    Ok((
        FlowState {
            region,
            time: report.time,
            step: report.step,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{prepare_initial, FlowKind};
    use crate::geometry::{region_curvature_profile, shapes};
    use std::f64::consts::PI;

    fn state(region: RegionBoundary) -> FlowState {
        FlowState {
            region,
            time: 0.0,
            step: 0,
        }
    }

    #[test]
    fn disk_is_a_fixed_point() {
        let m = PI * 0.0625;
        for h in [1e-4, 1e-3, 1e-2] {
            let cfg = FlowConfig::new(FlowKind::Mcf, h, m);
            let s = prepare_initial(&shapes::disk(Vec2::new(0.5, 0.5), 0.25, 512).unwrap(), &cfg).unwrap();
            let (_, r) = mcf_step(&s, &cfg).unwrap();
            assert!(r.max_displacement() <= 1e-6, "{}", r.max_displacement());
            assert!((r.lambda - 4.0).abs() <= 1e-4, "{}", r.lambda);
        }
    }

    #[test]
    fn strip_is_a_fixed_point() {
        let cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, 0.3);
        let s = prepare_initial(&shapes::strip(0.2, 0.5, 300).unwrap(), &cfg).unwrap();
        let (_, r) = mcf_step(&s, &cfg).unwrap();
        assert!(r.max_displacement() <= 1e-6);
        assert!(r.lambda.abs() <= 1e-6);
    }

    #[test]
    fn perturbed_disk_loses_perimeter_and_keeps_area() {
        let e = shapes::perturbed_disk(Vec2::new(0.5, 0.5), 0.2, 0.05, 3, 400).unwrap();
        let cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, e.area());
        let s = prepare_initial(&e, &cfg).unwrap();
        let (next, r) = mcf_step(&s, &cfg).unwrap();
        assert!(r.perimeter_after < r.perimeter_before);
        assert!((next.region.area() - cfg.area).abs() <= 1e-8);
        assert!(r.el_residual <= cfg.el_tolerance);
        assert!(r.perimeter_after + r.dissipation.value / cfg.h <= r.perimeter_before + 10.0 * cfg.el_tolerance);
    }

    #[test]
    fn velocity_tracks_curvature_deviation() {
        let e = shapes::perturbed_disk(Vec2::new(0.5, 0.5), 0.2, 0.03, 3, 400).unwrap();
        let mut cfg = FlowConfig::new(FlowKind::Mcf, 1e-4, e.area());
        cfg.el_tolerance = 1e-6;
        let s = prepare_initial(&e, &cfg).unwrap();
        let prof = region_curvature_profile(&s.region).unwrap();
        let (_, r) = mcf_step(&s, &cfg).unwrap();
        let v: Vec<f64> = r.normal_displacement.iter().map(|p| p / cfg.h).collect();
        let target: Vec<f64> = prof.kappa.iter().map(|k| prof.mean - k).collect();
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let (mv, mt) = (mean(&v), mean(&target));
        let cov: f64 = v.iter().zip(&target).map(|(a, b)| (a - mv) * (b - mt)).sum();
        let sv: f64 = v.iter().map(|a| (a - mv).powi(2)).sum();
        let st: f64 = target.iter().map(|b| (b - mt).powi(2)).sum();
        let corr = cov / (sv * st).sqrt();
        assert!(corr >= 0.99, "{corr}");
    }

    #[test]
    fn rejects_large_steps() {
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.2, 400).unwrap();
        let cfg = FlowConfig::new(FlowKind::Mcf, 0.1, e.area());
        assert!(matches!(mcf_step(&state(e), &cfg), Err(FlowError::InvalidConfig(_))));
    }
}
