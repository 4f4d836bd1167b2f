//! Applying selection rules to a run.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::metrics::{evaluate_metric, MetricError};
use crate::model::{QaRun, RunId, UnitId};
use crate::rules::{resolve_threshold, Direction, RuleForm, RuleId, SelectionRule, TopN};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedUnit {
    pub unit_id: UnitId,
    pub value: f64,
}

/// Units picked by one rule in one run.
///
/// `selected` follows ranking order for top-N rules and unit-id order
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub rule_id: RuleId,
    pub run_id: RunId,
    pub selected: Vec<UnitId>,
    /// Full ranking of the run, for single top-N rules.
    pub ranking: Option<Vec<RankedUnit>>,
}

impl Selection {
    pub fn unit_set(&self) -> BTreeSet<&UnitId> {
        self.selected.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PrioritizeError {
    #[error("rule {rule}: {source}")]
    Metric {
        rule: RuleId,
        #[source]
        source: MetricError,
    },
    #[error("cannot combine selections from runs {0} and {1}")]
    RunMismatch(RunId, RunId),
}

/// Rank every unit of `run` by the ranking's metric. Large sorts
/// descending, small ascending, ties by ascending unit id.
pub fn rank_units(ranking: &TopN, run: &QaRun) -> Result<Vec<RankedUnit>, MetricError> {
    let mut ranked = run
        .unit_ids
        .iter()
        .map(|u| {
            evaluate_metric(&ranking.selector, u, run).map(|value| RankedUnit {
                unit_id: u.clone(),
                value,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by(|a, b| {
        let by_value = match ranking.direction {
            Direction::Large => b.value.total_cmp(&a.value),
            Direction::Small => a.value.total_cmp(&b.value),
        };
        by_value.then_with(|| a.unit_id.cmp(&b.unit_id))
    });
    Ok(ranked)
}

/// Units satisfying one threshold criterion, in unit-id order.
fn select_by_criteria(form: &[crate::rules::ThresholdCriterion], run: &QaRun) -> Result<Vec<UnitId>, MetricError> {
    let mut selected: BTreeSet<&UnitId> = run.unit_ids.iter().collect();
    for criterion in form {
        let threshold = resolve_threshold(criterion, run)?;
        let mut keep = BTreeSet::new();
        for unit in &run.unit_ids {
            let value = evaluate_metric(&criterion.selector, unit, run)?;
            if criterion.direction.accepts(value, threshold) && selected.contains(unit) {
                keep.insert(unit);
            }
        }
        selected = keep;
    }
    Ok(selected.into_iter().cloned().collect())
}

pub fn apply_rule(rule: &SelectionRule, run: &QaRun) -> Result<Selection, PrioritizeError> {
    let wrap = |source| PrioritizeError::Metric {
        rule: rule.id.clone(),
        source,
    };
    let (selected, ranking) = match &rule.form {
        RuleForm::Conjunctive(criteria) => (select_by_criteria(criteria, run).map_err(wrap)?, None),
        RuleForm::TopN(t) => {
            let ranked = rank_units(t, run).map_err(wrap)?;
            let take = (t.n as usize).min(ranked.len());
            let selected = ranked[..take].iter().map(|r| r.unit_id.clone()).collect();
            (selected, Some(ranked))
        }
        RuleForm::Union(parts) => {
            let mut union = BTreeSet::new();
            for t in parts {
                let ranked = rank_units(t, run).map_err(wrap)?;
                union.extend(ranked.into_iter().take(t.n as usize).map(|r| r.unit_id));
            }
            (union.into_iter().collect(), None)
        }
    };
    Ok(Selection {
        rule_id: rule.id.clone(),
        run_id: run.run_id.clone(),
        selected,
        ranking,
    })
}

/// Units picked by either selection, in unit-id order.
pub fn combine_union(a: &Selection, b: &Selection) -> Result<Selection, PrioritizeError> {
    if a.run_id != b.run_id {
        return Err(PrioritizeError::RunMismatch(a.run_id.clone(), b.run_id.clone()));
    }
    let units: BTreeSet<&UnitId> = a.selected.iter().chain(&b.selected).collect();
    let (first, second) = if a.rule_id <= b.rule_id { (a, b) } else { (b, a) };
    Ok(Selection {
        rule_id: RuleId::new(format!("{}+{}", first.rule_id, second.rule_id)),
        run_id: a.run_id.clone(),
        selected: units.into_iter().cloned().collect(),
        ranking: None,
    })
}
