use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Fewest samples a rate fit accepts.
const MIN_FIT_SAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(
        label: impl Into<String>,
        times: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, AnalysisError> {
        if times.len() != values.len() {
            return Err(AnalysisError::InvalidSeries(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(AnalysisError::InvalidSeries(format!(
                "times not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(AnalysisError::InvalidSeries("non-finite entry".into()));
        }
        Ok(TimeSeries {
            times,
            values,
            label: label.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Leading part of the series, up to but excluding the first sample
    /// whose value is at or below `floor`.
    pub fn above(&self, floor: f64) -> TimeSeries {
        let k = self
            .values
            .iter()
            .position(|&v| v <= floor)
            .unwrap_or(self.values.len());
        TimeSeries {
            times: self.times[..k].to_vec(),
            values: self.values[..k].to_vec(),
            label: self.label.clone(),
        }
    }

    /// Samples with `t0 ≤ t ≤ t1`.
    pub fn window(&self, t0: f64, t1: f64) -> TimeSeries {
        let (times, values) = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(t, v)| (*t, *v))
            .unzip();
        TimeSeries {
            times,
            values,
            label: self.label.clone(),
        }
    }
}

/// Least-squares line `y = slope · x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::InvalidSeries("x and y lengths differ".into()));
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(AnalysisError::InvalidSeries("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    // a flat series fitted exactly counts as a perfect fit
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1.0);
    let r_squared = if ss_tot <= (1e-14 * scale).powi(2) * n {
        if ss_res <= (1e-12 * scale).powi(2) * n {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Exponential decay `value ≈ exp(intercept − rate · t)` fitted on a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Least-squares line through `(t, ln v)` over the trailing `tail_fraction`
/// of the samples.
pub fn fit_exponential_rate(
    series: &TimeSeries,
    tail_fraction: f64,
) -> Result<RateFit, AnalysisError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "tail fraction {tail_fraction} outside (0, 1]"
        )));
    }
    let n = series.len();
    let k = ((n as f64 * tail_fraction).ceil() as usize).min(n);
    if k < MIN_FIT_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            needed: MIN_FIT_SAMPLES,
            got: k,
        });
    }
    let times = &series.times[n - k..];
    let values = &series.values[n - k..];
    let logs = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| {
            if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(AnalysisError::NonPositive { time: t, value: v })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let line = fit_line(times, &logs)?;
    Ok(RateFit {
        rate: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        window: (times[0], times[k - 1]),
    })
}

/// Rate fit on the part of a decaying series before it first comes within
/// `plateau_factor` of its final value, i.e. before discretization and
/// round-off floors take over.
pub fn fit_decay(
    series: &TimeSeries,
    plateau_factor: f64,
    tail_fraction: f64,
) -> Result<RateFit, AnalysisError> {
    let (_, last) = series
        .last()
        .ok_or(AnalysisError::TooFewSamples { needed: 1, got: 0 })?;
    fit_exponential_rate(&series.above(plateau_factor * last), tail_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sampled(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> TimeSeries {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries::new("s", times, values).unwrap()
    }

    #[test]
    fn exact_exponential() {
        let s = sampled(|t| (-2.0 * t).exp(), 40, 0.05);
        let fit = fit_exponential_rate(&s, 0.5).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9, "{}", fit.rate);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.window, (s.times()[20], s.times()[39]));
    }

    #[test]
    fn constant_series() {
        let s = sampled(|_| 0.3, 20, 0.1);
        let fit = fit_exponential_rate(&s, 1.0).unwrap();
        assert!(fit.rate.abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn too_few_tail_samples() {
        let s = sampled(|t| (-t).exp(), 12, 0.1);
        assert!(matches!(
            fit_exponential_rate(&s, 0.3),
            Err(AnalysisError::TooFewSamples { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn non_positive_tail() {
        let s = sampled(|t| 1.0 - t, 20, 0.1);
        assert!(matches!(
            fit_exponential_rate(&s, 0.5),
            Err(AnalysisError::NonPositive { .. })
        ));
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::new("a", vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TimeSeries::new("a", vec![0.0, 1.0], vec![1.0]).is_err());
        let s = sampled(|t| (-t).exp(), 10, 1.0);
        assert_eq!(s.above((-4.5f64).exp()).len(), 5);
        assert_eq!(s.window(2.0, 4.0).len(), 3);
    }

    #[test]
    fn decay_fit_stops_at_plateau() {
        // exact exponential until it hits a floor of 1e-8 near t = 6.14
        let s = sampled(|t| (-3.0 * t).exp().max(1e-8), 100, 0.1);
        let fit = fit_decay(&s, 10.0, 0.5).unwrap();
        assert!(fit.window.1 < 5.4, "{:?}", fit.window);
        assert!((fit.rate - 3.0).abs() < 1e-9, "{}", fit.rate);
        assert!(fit.r_squared > 1.0 - 1e-12);
        // the unwindowed tail sits on the floor
        assert!(fit_exponential_rate(&s, 0.3).unwrap().rate.abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn r_squared_in_unit_interval(ys in proptest::collection::vec(-5.0f64..5.0, 5..30)) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let fit = fit_line(&xs, &ys).unwrap();
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }

        #[test]
        fn recovers_rate(rate in 0.1f64..20.0, c in -3.0f64..3.0) {
            let s = sampled(|t| (c - rate * t).exp(), 30, 0.01);
            let fit = fit_exponential_rate(&s, 1.0).unwrap();
            prop_assert!((fit.rate - rate).abs() < 1e-8 * rate.max(1.0));
            prop_assert!((fit.intercept - c).abs() < 1e-8);
        }
    }
}
