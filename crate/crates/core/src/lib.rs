//! Inspection-guided test prioritization.
//!
//! Datasets of QA runs ([`model`], [`dataset`]) feed metric selectors
//! ([`metrics`]) used by selection rules ([`rules`]). Rules pick units to
//! test ([`prioritize`]) and are judged afterwards against test defects
//! ([`evaluate`]). Outcomes accumulate in an on-disk store ([`store`]) and
//! are summarized by [`report`]. [`extract`] derives product metrics from
//! source files.

pub mod dataset;
pub mod evaluate;
pub mod extract;
pub mod metrics;
pub mod model;
pub mod prioritize;
pub mod report;
pub mod rules;
pub mod store;

pub use dataset::{load_dataset, IngestError};
pub use evaluate::{categorize, evaluate_all, Category, EvaluationResult, TrendClass};
pub use model::{Dataset, QaRun, RunId, UnitId};
pub use prioritize::{apply_rule, combine_union, Selection};
pub use rules::{builtin_catalog, generate_rules, RuleSet, SelectionRule};
pub use store::ExperienceBase;
