//! Retrospective evaluation of selections against test-defect ground truth.
//!
//! Quality categories compare the selected set `S` with the defect-prone set
//! `D` (units with at least one test defect):
//!
//! | category | condition                  | effective |
//! |----------|----------------------------|-----------|
//! | A        | `S = D`                    | yes       |
//! | B        | `S ⊋ D`                    | yes       |
//! | C        | `0 < |S ∩ D| < |D|`        | no        |
//! | D        | `S ∩ D = ∅`, `D ≠ ∅`       | no        |
//!
//! When `D` is empty there is nothing to find: an empty selection is A, any
//! other selection is B, and the result is flagged as degenerate.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Dataset, QaRun, RunId, UnitId};
use crate::prioritize::{apply_rule, PrioritizeError, Selection};
use crate::rules::{Assumption, RuleForm, RuleId, SelectionRule, SignificanceEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    A,
    B,
    C,
    D,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::A, Category::B, Category::C, Category::D];

    pub fn is_effective(self) -> bool {
        matches!(self, Category::A | Category::B)
    }

    pub fn letter(self) -> char {
        match self {
            Category::A => 'A',
            Category::B => 'B',
            Category::C => 'C',
            Category::D => 'D',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'A' => Some(Category::A),
            'B' => Some(Category::B),
            'C' => Some(Category::C),
            'D' => Some(Category::D),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

pub fn categorize<T: Ord>(selected: &BTreeSet<T>, defect_prone: &BTreeSet<T>) -> Category {
    if defect_prone.is_empty() {
        return if selected.is_empty() { Category::A } else { Category::B };
    }
    let hits = selected.intersection(defect_prone).count();
    if hits == defect_prone.len() {
        if selected.len() == hits {
            Category::A
        } else {
            Category::B
        }
    } else if hits == 0 {
        Category::D
    } else {
        Category::C
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub rule_id: RuleId,
    pub run_id: RunId,
    pub run_order: u32,
    pub category: Category,
    pub effective: bool,
    /// Share of the run's test defects inside the selection.
    pub effectiveness: f64,
    /// |selected| / |units|.
    pub effort_fraction: f64,
    pub selected_count: usize,
    pub defect_prone_count: usize,
    /// No test defects in the run: category and effectiveness are vacuous.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("run {run}: no test record for unit {unit}")]
    MissingTestRecord { run: RunId, unit: UnitId },
    #[error("selection belongs to run {selection}, not run {run}")]
    RunMismatch { selection: RunId, run: RunId },
    #[error(transparent)]
    Prioritize(#[from] PrioritizeError),
    #[error("rule {0} is not a ranking rule")]
    NotRanking(RuleId),
    #[error("no evaluations given")]
    NoEvaluations,
    #[error("assumption {assumption} already has run {run} in its history")]
    DuplicateRun { assumption: String, run: RunId },
}

fn test_defects(run: &QaRun) -> Result<Vec<(&UnitId, u32)>, EvalError> {
    run.unit_ids
        .iter()
        .map(|u| {
            run.test(u)
                .map(|t| (u, t.test_defects))
                .ok_or_else(|| EvalError::MissingTestRecord {
                    run: run.run_id.clone(),
                    unit: u.clone(),
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effectiveness {
    pub value: f64,
    /// The run had no test defects; `value` is 1.0 by convention.
    pub degenerate: bool,
}

pub fn effectiveness(selection: &Selection, run: &QaRun) -> Result<Effectiveness, EvalError> {
    check_run(selection, run)?;
    let defects = test_defects(run)?;
    let chosen = selection.unit_set();
    let total: u64 = defects.iter().map(|(_, d)| u64::from(*d)).sum();
    if total == 0 {
        return Ok(Effectiveness {
            value: 1.0,
            degenerate: true,
        });
    }
    let found: u64 = defects
        .iter()
        .filter(|(u, _)| chosen.contains(u))
        .map(|(_, d)| u64::from(*d))
        .sum();
    Ok(Effectiveness {
        value: found as f64 / total as f64,
        degenerate: false,
    })
}

fn check_run(selection: &Selection, run: &QaRun) -> Result<(), EvalError> {
    if selection.run_id != run.run_id {
        return Err(EvalError::RunMismatch {
            selection: selection.run_id.clone(),
            run: run.run_id.clone(),
        });
    }
    Ok(())
}

pub fn evaluate_selection(selection: &Selection, run: &QaRun) -> Result<EvaluationResult, EvalError> {
    check_run(selection, run)?;
    let defects = test_defects(run)?;
    let prone: BTreeSet<&UnitId> = defects.iter().filter(|(_, d)| *d > 0).map(|(u, _)| *u).collect();
    let chosen = selection.unit_set();
    let category = categorize(&chosen, &prone);
    let eff = effectiveness(selection, run)?;
    let units = run.unit_ids.len();
    Ok(EvaluationResult {
        rule_id: selection.rule_id.clone(),
        run_id: run.run_id.clone(),
        run_order: run.order_index,
        category,
        effective: category.is_effective(),
        effectiveness: eff.value,
        effort_fraction: if units == 0 {
            0.0
        } else {
            chosen.len() as f64 / units as f64
        },
        selected_count: chosen.len(),
        defect_prone_count: prone.len(),
        degenerate: eff.degenerate,
    })
}

pub fn evaluate_rule(rule: &SelectionRule, run: &QaRun) -> Result<EvaluationResult, EvalError> {
    let selection = apply_rule(rule, run)?;
    evaluate_selection(&selection, run)
}

/// Evaluate every rule on every run of `dataset`.
///
/// Output is ordered by run chronology, then rule order, regardless of how
/// the work is scheduled across threads.
pub fn evaluate_all(rules: &[SelectionRule], dataset: &Dataset) -> Result<Vec<EvaluationResult>, EvalError> {
    let runs = dataset.runs_in_order();
    let jobs: Vec<(&QaRun, &SelectionRule)> = runs
        .iter()
        .flat_map(|run| rules.iter().map(move |rule| (*run, rule)))
        .collect();
    jobs.par_iter().map(|(run, rule)| evaluate_rule(rule, run)).collect()
}

/// Effectiveness of a ranking rule at each N, for N in ascending order.
pub fn effectiveness_curve(rule: &SelectionRule, run: &QaRun, ns: &[u32]) -> Result<Vec<(u32, f64)>, EvalError> {
    if matches!(rule.form, RuleForm::Conjunctive(_)) {
        return Err(EvalError::NotRanking(rule.id.clone()));
    }
    let ns: BTreeSet<u32> = ns.iter().copied().filter(|n| *n > 0).collect();
    ns.into_iter()
        .map(|n| {
            let form = rule.form.with_n(n).expect("ranking rule");
            let variant = SelectionRule {
                id: rule.id.clone(),
                assumption_id: rule.assumption_id.clone(),
                form,
            };
            let selection = apply_rule(&variant, run)?;
            Ok((n, effectiveness(&selection, run)?.value))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendClass {
    /// Effective in every run.
    Acceptable,
    /// Effective in some runs.
    Potential,
    /// Effective in none.
    NonAcceptable,
}

impl TrendClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendClass::Acceptable => "acceptable",
            TrendClass::Potential => "potential",
            TrendClass::NonAcceptable => "non_acceptable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendResult {
    pub rule_id: RuleId,
    pub per_run: Vec<(RunId, Category)>,
    /// Category letters in run order, e.g. `AB`.
    pub signature: String,
    pub classification: TrendClass,
}

/// Classify a rule across runs. Input order does not matter; evaluations
/// are sorted by run chronology first.
pub fn trend_classify(rule_id: &RuleId, evaluations: &[EvaluationResult]) -> Result<TrendResult, EvalError> {
    if evaluations.is_empty() {
        return Err(EvalError::NoEvaluations);
    }
    let mut evals: Vec<&EvaluationResult> = evaluations.iter().collect();
    evals.sort_by(|a, b| a.run_order.cmp(&b.run_order).then_with(|| a.run_id.cmp(&b.run_id)));
    let effective = evals.iter().filter(|e| e.category.is_effective()).count();
    let classification = if effective == evals.len() {
        TrendClass::Acceptable
    } else if effective == 0 {
        TrendClass::NonAcceptable
    } else {
        TrendClass::Potential
    };
    Ok(TrendResult {
        rule_id: rule_id.clone(),
        per_run: evals.iter().map(|e| (e.run_id.clone(), e.category)).collect(),
        signature: evals.iter().map(|e| e.category.letter()).collect(),
        classification,
    })
}

/// How an assumption's validity in a run follows from its rules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityPolicy {
    /// At least one derived rule was effective.
    #[default]
    Existential,
    /// More than half of the derived rules were effective.
    Majority,
}

/// Validity of an assumption in one run from its rules' evaluations.
/// Degenerate evaluations never count; if all are degenerate the run is
/// reported as degenerate.
pub fn assumption_validity(evaluations: &[&EvaluationResult], policy: ValidityPolicy) -> RunValidity {
    let counted: Vec<&&EvaluationResult> = evaluations.iter().filter(|e| !e.degenerate).collect();
    if counted.is_empty() {
        return RunValidity {
            valid: false,
            degenerate: true,
        };
    }
    let effective = counted.iter().filter(|e| e.effective).count();
    let valid = match policy {
        ValidityPolicy::Existential => effective >= 1,
        ValidityPolicy::Majority => effective * 2 > counted.len(),
    };
    RunValidity {
        valid,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunValidity {
    pub valid: bool,
    pub degenerate: bool,
}

/// Record one run in an assumption's history. Valid runs raise the level
/// by one; invalid runs leave it unchanged.
pub fn update_significance(
    assumption: &mut Assumption,
    run_id: &RunId,
    validity: RunValidity,
) -> Result<u32, EvalError> {
    if assumption.history.iter().any(|e| &e.run_id == run_id) {
        return Err(EvalError::DuplicateRun {
            assumption: assumption.id.to_string(),
            run: run_id.clone(),
        });
    }
    let valid = validity.valid && !validity.degenerate;
    assumption.history.push(SignificanceEntry {
        run_id: run_id.clone(),
        valid,
        degenerate: validity.degenerate,
    });
    if valid {
        assumption.significance_level += 1;
    }
    Ok(assumption.significance_level)
}
