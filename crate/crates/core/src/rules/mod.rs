//! Assumptions and the selection rules derived from them.
//!
//! A rule is either a conjunction of threshold criteria, a top-N ranking
//! over one metric, or the union of several top-N rankings evaluated at the
//! same N.

mod catalog;
mod threshold;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::metrics::MetricSelector;
use crate::model::RunId;

pub use catalog::{
    builtin_catalog, generate_rules, AssumptionCatalog, AssumptionFamily, CatalogError, Factor, FamilyForm,
    InspectionFactor, BUILTIN_CATALOGS,
};
pub use threshold::{quantile, resolve_threshold};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_type!(RuleId);
id_type!(AssumptionId);

/// `high`/`low` are accepted as aliases of `large`/`small`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[serde(alias = "high")]
    Large,
    #[serde(alias = "low")]
    Small,
}

impl Direction {
    /// `large` is strictly above the threshold, `small` at or below it, so
    /// the two directions partition any run.
    pub fn accepts(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::Large => value > threshold,
            Direction::Small => value <= threshold,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Large => "large",
            Direction::Small => "small",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSpec {
    Explicit(f64),
    #[default]
    Mean,
    Median,
    Quantile(f64),
}

impl ThresholdSpec {
    fn rank(&self) -> (u8, f64) {
        match *self {
            ThresholdSpec::Explicit(v) => (0, v),
            ThresholdSpec::Mean => (1, 0.0),
            ThresholdSpec::Median => (2, 0.0),
            ThresholdSpec::Quantile(q) => (3, q),
        }
    }

    fn validate(&self) -> Result<(), RuleError> {
        match *self {
            ThresholdSpec::Explicit(v) if !(v.is_finite() && v >= 0.0) => {
                Err(RuleError::InvalidThreshold(format!("explicit value {v}")))
            }
            ThresholdSpec::Quantile(q) if !(q > 0.0 && q < 1.0) => {
                Err(RuleError::InvalidThreshold(format!("quantile {q} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

impl Eq for ThresholdSpec {}

impl Ord for ThresholdSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, x) = self.rank();
        let (b, y) = other.rank();
        a.cmp(&b).then(x.total_cmp(&y))
    }
}

impl PartialOrd for ThresholdSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdSpec::Explicit(v) => write!(f, "{v}"),
            ThresholdSpec::Mean => f.write_str("mean"),
            ThresholdSpec::Median => f.write_str("median"),
            ThresholdSpec::Quantile(q) => write!(f, "q{q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ThresholdCriterion {
    pub selector: MetricSelector,
    pub direction: Direction,
    #[serde(default)]
    pub threshold: ThresholdSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TopN {
    pub selector: MetricSelector,
    pub direction: Direction,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleForm {
    Conjunctive(Vec<ThresholdCriterion>),
    TopN(TopN),
    /// Units picked by any of the rankings.
    Union(Vec<TopN>),
}

impl RuleForm {
    pub fn validate(&self) -> Result<(), RuleError> {
        match self {
            RuleForm::Conjunctive(criteria) => {
                if criteria.is_empty() {
                    return Err(RuleError::EmptyConjunction);
                }
                criteria.iter().try_for_each(|c| c.threshold.validate())
            }
            RuleForm::TopN(t) => check_n(t.n),
            RuleForm::Union(parts) => {
                if parts.len() < 2 {
                    return Err(RuleError::DegenerateUnion(parts.len()));
                }
                parts.iter().try_for_each(|t| check_n(t.n))
            }
        }
    }

    /// N of a ranking rule; `None` for conjunctive rules.
    pub fn top_n(&self) -> Option<u32> {
        match self {
            RuleForm::Conjunctive(_) => None,
            RuleForm::TopN(t) => Some(t.n),
            RuleForm::Union(parts) => parts.first().map(|t| t.n),
        }
    }

    /// Same ranking family evaluated at a different N.
    pub fn with_n(&self, n: u32) -> Option<RuleForm> {
        match self {
            RuleForm::Conjunctive(_) => None,
            RuleForm::TopN(t) => Some(RuleForm::TopN(TopN { n, ..*t })),
            RuleForm::Union(parts) => Some(RuleForm::Union(parts.iter().map(|t| TopN { n, ..*t }).collect())),
        }
    }
}

fn check_n(n: u32) -> Result<(), RuleError> {
    if n == 0 {
        Err(RuleError::ZeroN)
    } else {
        Ok(())
    }
}

impl fmt::Display for RuleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleForm::Conjunctive(criteria) => {
                for (i, c) in criteria.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    write!(f, "{} {} [{}]", c.direction.as_str(), c.selector, c.threshold)?;
                }
                Ok(())
            }
            RuleForm::TopN(t) => write!(f, "top-{} {} {}", t.n, t.direction.as_str(), t.selector),
            RuleForm::Union(parts) => {
                let n = parts.first().map_or(0, |t| t.n);
                write!(f, "top-{n} ")?;
                for (i, t) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{} {}", t.direction.as_str(), t.selector)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub id: RuleId,
    pub assumption_id: AssumptionId,
    pub form: RuleForm,
}

impl SelectionRule {
    pub fn new(assumption_id: AssumptionId, form: RuleForm) -> Self {
        let id = rule_id_for(&assumption_id, &form);
        Self {
            id,
            assumption_id,
            form,
        }
    }

    pub fn label(&self) -> String {
        self.form.to_string()
    }

    /// Checks form invariants and that `id` matches the content.
    pub fn validate(&self) -> Result<(), RuleError> {
        self.form.validate()?;
        let expected = rule_id_for(&self.assumption_id, &self.form);
        if expected != self.id {
            return Err(RuleError::IdMismatch {
                found: self.id.clone(),
                expected,
            });
        }
        Ok(())
    }
}

/// Content-derived rule id: first 16 hex digits of SHA-256 over the
/// canonical JSON of (assumption id, form).
pub fn rule_id_for(assumption: &AssumptionId, form: &RuleForm) -> RuleId {
    let canonical = serde_json::to_string(&(assumption, form)).expect("rule form serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    RuleId(format!("r{}", &hex::encode(digest)[..16]))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleError {
    #[error("conjunctive rule has no criteria")]
    EmptyConjunction,
    #[error("top-N rule needs n >= 1")]
    ZeroN,
    #[error("union rule needs at least two rankings, found {0}")]
    DegenerateUnion(usize),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("rule id {found} does not match its content (expected {expected})")]
    IdMismatch { found: RuleId, expected: RuleId },
}

/// Identity and wording of an assumption, as carried in rule files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionSpec {
    pub id: AssumptionId,
    pub family: String,
    pub description: String,
}

/// One row of an assumption's significance history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignificanceEntry {
    pub run_id: RunId,
    pub valid: bool,
    /// The run had no defect-prone units, so validity was not assessable.
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub id: AssumptionId,
    pub family: String,
    pub description: String,
    pub significance_level: u32,
    pub history: Vec<SignificanceEntry>,
}

impl Assumption {
    pub fn fresh(spec: &AssumptionSpec) -> Self {
        Self {
            id: spec.id.clone(),
            family: spec.family.clone(),
            description: spec.description.clone(),
            significance_level: 0,
            history: Vec::new(),
        }
    }

    pub fn valid_runs(&self) -> u32 {
        self.history.iter().filter(|e| e.valid).count() as u32
    }
}

/// Output of rule generation and input to prioritization/evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub catalog: String,
    pub assumptions: Vec<AssumptionSpec>,
    pub rules: Vec<SelectionRule>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: &RuleId) -> Option<&SelectionRule> {
        self.rules.iter().find(|r| &r.id == id)
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        self.rules.iter().try_for_each(SelectionRule::validate)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("rule set serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, RuleSetError> {
        let set: RuleSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RuleSetError {
    #[error("rule file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rule(#[from] RuleError),
}
