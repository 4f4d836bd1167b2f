use crate::metrics::{evaluate_metric, MetricError};
use crate::model::QaRun;

use super::{ThresholdCriterion, ThresholdSpec};

/// Concrete threshold value of `c` over the units of `run`.
pub fn resolve_threshold(c: &ThresholdCriterion, run: &QaRun) -> Result<f64, MetricError> {
    if let ThresholdSpec::Explicit(v) = c.threshold {
        return Ok(v);
    }
    let values = run
        .unit_ids
        .iter()
        .map(|u| evaluate_metric(&c.selector, u, run))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(summarize(c.threshold, values))
}

pub(crate) fn summarize(spec: ThresholdSpec, mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    match spec {
        ThresholdSpec::Explicit(v) => v,
        ThresholdSpec::Mean => values.iter().sum::<f64>() / values.len() as f64,
        ThresholdSpec::Median => {
            values.sort_by(f64::total_cmp);
            let mid = values.len() / 2;
            if values.len() % 2 == 1 {
                values[mid]
            } else {
                (values[mid - 1] + values[mid]) / 2.0
            }
        }
        ThresholdSpec::Quantile(q) => {
            values.sort_by(f64::total_cmp);
            quantile(&values, q)
        }
    }
}

/// Linear interpolation between order statistics of sorted `values`
/// (position `(n - 1) * q`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
