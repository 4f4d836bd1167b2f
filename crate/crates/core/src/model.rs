//! Domain types for code units, QA runs and their measurement records,
//! plus structural validation of a [`Dataset`].
//!
//! A dataset is a catalog of code units and an ordered list of QA runs. Each
//! run lists the units it covers together with one inspection record, one
//! product-metrics record and (once testing happened) one test record per
//! unit. Validation never fails; it reports every broken invariant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
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

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Identifier of a code unit (class or module).
    UnitId
);
string_id!(
    /// Identifier of a QA run.
    RunId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Class,
    Module,
}

impl UnitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Class => "class",
            UnitKind::Module => "module",
        }
    }
}

impl std::str::FromStr for UnitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "class" => Ok(UnitKind::Class),
            "module" => Ok(UnitKind::Module),
            other => Err(format!("unknown unit kind `{other}` (expected class or module)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeUnit {
    pub id: UnitId,
    pub name: String,
    pub kind: UnitKind,
}

/// Inspection outcome for one unit in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionRecord {
    pub unit_id: UnitId,
    pub run_id: RunId,
    pub defects_high: u32,
    pub defects_medium: u32,
    pub defects_low: u32,
    pub comments: u32,
    /// Fraction of the unit that was inspected, in (0, 1].
    pub coverage_rate: f64,
}

impl InspectionRecord {
    pub fn total_defects(&self) -> u32 {
        self.defects_high + self.defects_medium + self.defects_low
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMetricsRecord {
    pub unit_id: UnitId,
    pub run_id: RunId,
    pub class_length_loc: u32,
    pub mean_method_length: f64,
    pub cyclomatic: f64,
    pub statement_loc: Option<u32>,
    pub waste_per_line: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub unit_id: UnitId,
    pub run_id: RunId,
    pub test_defects: u32,
}

/// One inspection-then-test cycle over a set of units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRun {
    pub run_id: RunId,
    pub order_index: u32,
    pub unit_ids: Vec<UnitId>,
    pub inspection_records: Vec<InspectionRecord>,
    pub product_records: Vec<ProductMetricsRecord>,
    pub test_records: Vec<TestRecord>,
}

impl QaRun {
    pub fn contains(&self, unit: &UnitId) -> bool {
        self.unit_ids.contains(unit)
    }

    pub fn inspection(&self, unit: &UnitId) -> Option<&InspectionRecord> {
        self.inspection_records.iter().find(|r| &r.unit_id == unit)
    }

    pub fn product(&self, unit: &UnitId) -> Option<&ProductMetricsRecord> {
        self.product_records.iter().find(|r| &r.unit_id == unit)
    }

    pub fn test(&self, unit: &UnitId) -> Option<&TestRecord> {
        self.test_records.iter().find(|r| &r.unit_id == unit)
    }

    /// Units with at least one test defect, or `None` if any unit of the run
    /// lacks a test record.
    pub fn defect_prone_units(&self) -> Option<BTreeSet<UnitId>> {
        let mut prone = BTreeSet::new();
        for unit in &self.unit_ids {
            if self.test(unit)?.test_defects > 0 {
                prone.insert(unit.clone());
            }
        }
        Some(prone)
    }

    pub fn has_test_data(&self) -> bool {
        self.unit_ids.iter().all(|u| self.test(u).is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub context_name: String,
    pub runs: Vec<QaRun>,
    pub units: Vec<CodeUnit>,
}

impl Dataset {
    pub fn run(&self, id: &RunId) -> Option<&QaRun> {
        self.runs.iter().find(|r| &r.run_id == id)
    }

    pub fn unit(&self, id: &UnitId) -> Option<&CodeUnit> {
        self.units.iter().find(|u| &u.id == id)
    }

    /// Runs sorted by chronology.
    pub fn runs_in_order(&self) -> Vec<&QaRun> {
        let mut runs: Vec<&QaRun> = self.runs.iter().collect();
        runs.sort_by_key(|r| r.order_index);
        runs
    }
}

/// Which invariant a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NoRuns,
    EmptyUnitId,
    DuplicateCatalogUnit,
    DuplicateRunId,
    NonIncreasingOrder,
    EmptyRun,
    DuplicateRunUnit,
    UnknownUnit,
    RecordRunMismatch,
    RecordForUnlistedUnit,
    DuplicateInspectionRecord,
    DuplicateProductRecord,
    DuplicateTestRecord,
    MissingInspectionRecord,
    MissingProductRecord,
    CoverageOutOfRange,
    InvalidProductValue,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::NoRuns => "no runs",
            ViolationKind::EmptyUnitId => "empty unit id",
            ViolationKind::DuplicateCatalogUnit => "duplicate unit in catalog",
            ViolationKind::DuplicateRunId => "duplicate run id",
            ViolationKind::NonIncreasingOrder => "run order not strictly increasing",
            ViolationKind::EmptyRun => "run lists no units",
            ViolationKind::DuplicateRunUnit => "unit listed twice in run",
            ViolationKind::UnknownUnit => "unit absent from catalog",
            ViolationKind::RecordRunMismatch => "record run id differs from its run",
            ViolationKind::RecordForUnlistedUnit => "record for unit not listed in run",
            ViolationKind::DuplicateInspectionRecord => "duplicate inspection record",
            ViolationKind::DuplicateProductRecord => "duplicate product record",
            ViolationKind::DuplicateTestRecord => "duplicate test record",
            ViolationKind::MissingInspectionRecord => "missing inspection record",
            ViolationKind::MissingProductRecord => "missing product record",
            ViolationKind::CoverageOutOfRange => "coverage_rate outside (0, 1]",
            ViolationKind::InvalidProductValue => "product metric out of range",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub run_id: Option<RunId>,
    pub unit_id: Option<UnitId>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let run = self.run_id.as_ref().map_or("-", |r| r.as_str());
        let unit = self.unit_id.as_ref().map_or("-", |u| u.as_str());
        write!(f, "run {run}, unit {unit}: {}", self.kind)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Sorted list of violations; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, run: Option<&RunId>, unit: Option<&UnitId>, kind: ViolationKind, detail: impl Into<String>) {
        self.0.push(Violation {
            run_id: run.cloned(),
            unit_id: unit.cloned(),
            kind,
            detail: detail.into(),
        });
    }
}

/// Check every dataset invariant. The report is sorted, so it does not
/// depend on record order.
pub fn validate_dataset(d: &Dataset) -> ValidationReport {
    let mut out = Collector(Vec::new());

    let mut catalog = BTreeSet::new();
    for unit in &d.units {
        if unit.id.as_str().is_empty() {
            out.push(None, None, ViolationKind::EmptyUnitId, "catalog");
        } else if !catalog.insert(&unit.id) {
            out.push(None, Some(&unit.id), ViolationKind::DuplicateCatalogUnit, "");
        }
    }

    if d.runs.is_empty() {
        out.push(None, None, ViolationKind::NoRuns, "");
    }

    let mut run_ids = BTreeSet::new();
    for run in &d.runs {
        if !run_ids.insert(&run.run_id) {
            out.push(Some(&run.run_id), None, ViolationKind::DuplicateRunId, "");
        }
    }

    // Chronology: distinct order indices, so sorting gives a strict order.
    let mut orders: BTreeMap<u32, Vec<&RunId>> = BTreeMap::new();
    for run in &d.runs {
        orders.entry(run.order_index).or_default().push(&run.run_id);
    }
    for (order, ids) in &orders {
        if ids.len() > 1 {
            let mut ids = ids.clone();
            ids.sort();
            for id in &ids[1..] {
                out.push(
                    Some(id),
                    None,
                    ViolationKind::NonIncreasingOrder,
                    format!("order_index {order} shared with run {}", ids[0]),
                );
            }
        }
    }

    for run in &d.runs {
        validate_run(run, &catalog, &mut out);
    }

    let mut violations = out.0;
    violations.sort();
    ValidationReport { violations }
}

fn validate_run(run: &QaRun, catalog: &BTreeSet<&UnitId>, out: &mut Collector) {
    let rid = Some(&run.run_id);
    if run.unit_ids.is_empty() {
        out.push(rid, None, ViolationKind::EmptyRun, "");
    }

    let mut listed = BTreeSet::new();
    for unit in &run.unit_ids {
        if unit.as_str().is_empty() {
            out.push(rid, None, ViolationKind::EmptyUnitId, "run unit list");
            continue;
        }
        if !listed.insert(unit) {
            out.push(rid, Some(unit), ViolationKind::DuplicateRunUnit, "");
        }
        if !catalog.contains(unit) {
            out.push(rid, Some(unit), ViolationKind::UnknownUnit, "");
        }
    }

    let mut check_records = |units: Vec<(&UnitId, &RunId)>, dup: ViolationKind, what: &str| {
        let mut seen: BTreeSet<UnitId> = BTreeSet::new();
        for (unit, record_run) in units {
            if record_run != &run.run_id {
                out.push(
                    rid,
                    Some(unit),
                    ViolationKind::RecordRunMismatch,
                    format!("{what} record carries run {record_run}"),
                );
            }
            if !listed.contains(unit) {
                out.push(rid, Some(unit), ViolationKind::RecordForUnlistedUnit, what);
            }
            if !seen.insert(unit.clone()) {
                out.push(rid, Some(unit), dup, "");
            }
        }
        seen
    };

    let inspected = check_records(
        run.inspection_records.iter().map(|r| (&r.unit_id, &r.run_id)).collect(),
        ViolationKind::DuplicateInspectionRecord,
        "inspection",
    );
    let measured = check_records(
        run.product_records.iter().map(|r| (&r.unit_id, &r.run_id)).collect(),
        ViolationKind::DuplicateProductRecord,
        "product",
    );
    check_records(
        run.test_records.iter().map(|r| (&r.unit_id, &r.run_id)).collect(),
        ViolationKind::DuplicateTestRecord,
        "test",
    );

    for unit in &listed {
        if !inspected.contains(*unit) {
            out.push(rid, Some(unit), ViolationKind::MissingInspectionRecord, "");
        }
        if !measured.contains(*unit) {
            out.push(rid, Some(unit), ViolationKind::MissingProductRecord, "");
        }
    }

    for r in &run.inspection_records {
        if !(r.coverage_rate > 0.0 && r.coverage_rate <= 1.0) {
            out.push(
                rid,
                Some(&r.unit_id),
                ViolationKind::CoverageOutOfRange,
                format!("coverage_rate = {}", r.coverage_rate),
            );
        }
    }

    for r in &run.product_records {
        let mut bad = |field: &str, value: f64| {
            out.push(
                rid,
                Some(&r.unit_id),
                ViolationKind::InvalidProductValue,
                format!("{field} = {value}"),
            );
        };
        if !(r.mean_method_length.is_finite() && r.mean_method_length >= 0.0) {
            bad("mean_method_length", r.mean_method_length);
        }
        if !(r.cyclomatic.is_finite() && r.cyclomatic >= 1.0) {
            bad("cyclomatic", r.cyclomatic);
        }
        if let Some(w) = r.waste_per_line {
            if !(w.is_finite() && w >= 0.0) {
                bad("waste_per_line", w);
            }
        }
    }
}
