//! Metric selectors and their evaluation for a unit within a run.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{QaRun, RunId, UnitId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Content,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityFilter {
    All,
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentHandling {
    Exclude,
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Raw,
    /// Extrapolated to full inspection coverage.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMetric {
    ClassLength,
    MeanMethodLength,
    Cyclomatic,
    StatementLoc,
    WastePerLine,
}

impl ProductMetric {
    pub fn field_name(self) -> &'static str {
        match self {
            ProductMetric::ClassLength => "class_length_loc",
            ProductMetric::MeanMethodLength => "mean_method_length",
            ProductMetric::Cyclomatic => "cyclomatic",
            ProductMetric::StatementLoc => "statement_loc",
            ProductMetric::WastePerLine => "waste_per_line",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InspectionSelector {
    pub measure: Measure,
    pub severity: SeverityFilter,
    pub comments: CommentHandling,
    pub scaling: Scaling,
}

impl InspectionSelector {
    /// Raw defect content over all severities, comments excluded.
    pub const fn content_all() -> Self {
        Self {
            measure: Measure::Content,
            severity: SeverityFilter::All,
            comments: CommentHandling::Exclude,
            scaling: Scaling::Raw,
        }
    }
}

/// Names one metric: either an inspection-derived variant or a stored
/// product metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSelector {
    Inspection(InspectionSelector),
    Product(ProductMetric),
}

impl MetricSelector {
    pub const fn content_all() -> Self {
        MetricSelector::Inspection(InspectionSelector::content_all())
    }
}

impl fmt::Display for MetricSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSelector::Product(p) => f.write_str(p.field_name()),
            MetricSelector::Inspection(s) => {
                let measure = match s.measure {
                    Measure::Content => "content",
                    Measure::Density => "density",
                };
                let severity = match s.severity {
                    SeverityFilter::All => "all",
                    SeverityFilter::High => "high",
                    SeverityFilter::Medium => "medium",
                    SeverityFilter::Low => "low",
                };
                write!(f, "{measure}({severity}")?;
                if s.comments == CommentHandling::Include {
                    f.write_str(",+comments")?;
                }
                if s.scaling == Scaling::Scaled {
                    f.write_str(",scaled")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("unit {unit} is not part of run {run}")]
    UnitNotInRun { unit: UnitId, run: RunId },

    #[error("unit {unit} has no {record} record in run {run}")]
    MissingRecord {
        unit: UnitId,
        run: RunId,
        record: &'static str,
    },

    #[error("unit {unit} has no value for {field} in run {run}")]
    MissingMetric {
        unit: UnitId,
        run: RunId,
        field: &'static str,
    },

    #[error("{selector} is undefined for unit {unit} in run {run}: {reason}")]
    UndefinedMetric {
        unit: UnitId,
        run: RunId,
        selector: MetricSelector,
        reason: &'static str,
    },
}

/// Value of `sel` for `unit` in `run`.
///
/// Content sums the defects passing the severity filter (plus comments when
/// included); scaling divides content by the inspection coverage rate;
/// density divides the (possibly scaled) content by `class_length_loc`.
pub fn evaluate_metric(sel: &MetricSelector, unit: &UnitId, run: &QaRun) -> Result<f64, MetricError> {
    if !run.contains(unit) {
        return Err(MetricError::UnitNotInRun {
            unit: unit.clone(),
            run: run.run_id.clone(),
        });
    }
    let missing_record = |record| MetricError::MissingRecord {
        unit: unit.clone(),
        run: run.run_id.clone(),
        record,
    };

    match sel {
        MetricSelector::Product(metric) => {
            let rec = run.product(unit).ok_or_else(|| missing_record("product"))?;
            let missing = || MetricError::MissingMetric {
                unit: unit.clone(),
                run: run.run_id.clone(),
                field: metric.field_name(),
            };
            Ok(match metric {
                ProductMetric::ClassLength => f64::from(rec.class_length_loc),
                ProductMetric::MeanMethodLength => rec.mean_method_length,
                ProductMetric::Cyclomatic => rec.cyclomatic,
                ProductMetric::StatementLoc => f64::from(rec.statement_loc.ok_or_else(missing)?),
                ProductMetric::WastePerLine => rec.waste_per_line.ok_or_else(missing)?,
            })
        }
        MetricSelector::Inspection(s) => {
            let rec = run.inspection(unit).ok_or_else(|| missing_record("inspection"))?;
            let defects = match s.severity {
                SeverityFilter::All => rec.total_defects(),
                SeverityFilter::High => rec.defects_high,
                SeverityFilter::Medium => rec.defects_medium,
                SeverityFilter::Low => rec.defects_low,
            };
            let mut content = f64::from(defects);
            if s.comments == CommentHandling::Include {
                content += f64::from(rec.comments);
            }
            if s.scaling == Scaling::Scaled {
                content /= rec.coverage_rate;
            }
            match s.measure {
                Measure::Content => Ok(content),
                Measure::Density => {
                    let product = run.product(unit).ok_or_else(|| missing_record("product"))?;
                    if product.class_length_loc == 0 {
                        return Err(MetricError::UndefinedMetric {
                            unit: unit.clone(),
                            run: run.run_id.clone(),
                            selector: *sel,
                            reason: "class_length_loc is 0",
                        });
                    }
                    Ok(content / f64::from(product.class_length_loc))
                }
            }
        }
    }
}

/// Every inspection selector variant, in enum order.
pub fn all_inspection_selectors() -> Vec<InspectionSelector> {
    let mut out = Vec::with_capacity(32);
    for measure in [Measure::Content, Measure::Density] {
        for severity in [
            SeverityFilter::All,
            SeverityFilter::High,
            SeverityFilter::Medium,
            SeverityFilter::Low,
        ] {
            for comments in [CommentHandling::Exclude, CommentHandling::Include] {
                for scaling in [Scaling::Raw, Scaling::Scaled] {
                    out.push(InspectionSelector {
                        measure,
                        severity,
                        comments,
                        scaling,
                    });
                }
            }
        }
    }
    out
}
