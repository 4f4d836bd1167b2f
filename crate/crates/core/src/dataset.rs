//! Reading and writing dataset directories.
//!
//! Layout:
//!
//! ```text
//! dataset.meta                  context_name=<name>
//! units.csv                     unit_id,name,kind            (optional)
//! run_<order>.inspection.csv    unit_id,kind,defects_high,defects_medium,defects_low,comments,coverage_rate
//! run_<order>.product.csv       unit_id,class_length_loc,mean_method_length,cyclomatic,statement_loc,waste_per_line
//! run_<order>.test.csv          unit_id,test_defects         (optional)
//! ```
//!
//! The run id is the `<order>` token. Without `units.csv` the unit catalog
//! is built from the inspection files, using the unit id as its name.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::model::{
    validate_dataset, CodeUnit, Dataset, InspectionRecord, ProductMetricsRecord, QaRun, RunId, TestRecord, UnitId,
    UnitKind, ValidationReport,
};

pub const META_FILE: &str = "dataset.meta";
pub const UNITS_FILE: &str = "units.csv";

pub const INSPECTION_HEADER: [&str; 7] = [
    "unit_id",
    "kind",
    "defects_high",
    "defects_medium",
    "defects_low",
    "comments",
    "coverage_rate",
];
pub const PRODUCT_HEADER: [&str; 6] = [
    "unit_id",
    "class_length_loc",
    "mean_method_length",
    "cyclomatic",
    "statement_loc",
    "waste_per_line",
];
pub const TEST_HEADER: [&str; 2] = ["unit_id", "test_defects"];
const UNITS_HEADER: [&str; 3] = ["unit_id", "name", "kind"];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: row {row}, column {column}: {message}")]
    Malformed {
        file: PathBuf,
        row: u64,
        column: String,
        message: String,
    },

    #[error("dataset has no runs")]
    NoRuns,

    #[error("dataset failed validation:\n{0}")]
    Invalid(ValidationReport),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Default)]
struct RunFiles {
    inspection: Option<PathBuf>,
    product: Option<PathBuf>,
    test: Option<PathBuf>,
}

/// Load and validate a dataset directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset, IngestError> {
    let dataset = read_dataset(dir.as_ref())?;
    if dataset.runs.is_empty() {
        return Err(IngestError::NoRuns);
    }
    let report = validate_dataset(&dataset);
    if !report.is_valid() {
        return Err(IngestError::Invalid(report));
    }
    Ok(dataset)
}

/// Parse a dataset directory without validating it.
pub fn read_dataset(dir: &Path) -> Result<Dataset, IngestError> {
    let meta_path = dir.join(META_FILE);
    if !meta_path.is_file() {
        return Err(IngestError::MissingFile(meta_path));
    }
    let context_name = read_meta(&meta_path)?;

    let mut runs: BTreeMap<u32, RunFiles> = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    for entry in entries {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some((order, kind)) = parse_run_file_name(name) else {
            continue;
        };
        let files = runs.entry(order).or_default();
        let slot = match kind {
            "inspection" => &mut files.inspection,
            "product" => &mut files.product,
            _ => &mut files.test,
        };
        *slot = Some(entry.path());
    }

    let explicit_units = {
        let path = dir.join(UNITS_FILE);
        if path.is_file() {
            Some(read_units(&path)?)
        } else {
            None
        }
    };
    let mut derived_units: Vec<CodeUnit> = Vec::new();

    let mut out_runs = Vec::with_capacity(runs.len());
    for (order, files) in runs {
        let run_id = RunId::new(order.to_string());
        let inspection_path = files
            .inspection
            .ok_or_else(|| IngestError::MissingFile(dir.join(format!("run_{order}.inspection.csv"))))?;
        let product_path = files
            .product
            .ok_or_else(|| IngestError::MissingFile(dir.join(format!("run_{order}.product.csv"))))?;

        let (unit_ids, inspection_records) = read_inspection(&inspection_path, &run_id, &mut derived_units)?;
        let product_records = read_product(&product_path, &run_id)?;
        let test_records = match files.test {
            Some(p) => read_test(&p, &run_id)?,
            None => Vec::new(),
        };
        out_runs.push(QaRun {
            run_id,
            order_index: order,
            unit_ids,
            inspection_records,
            product_records,
            test_records,
        });
    }

    Ok(Dataset {
        context_name,
        runs: out_runs,
        units: explicit_units.unwrap_or(derived_units),
    })
}

/// `run_<order>.<kind>.csv` → (order, kind).
fn parse_run_file_name(name: &str) -> Option<(u32, &str)> {
    let rest = name.strip_prefix("run_")?.strip_suffix(".csv")?;
    let (order, kind) = rest.split_once('.')?;
    if !matches!(kind, "inspection" | "product" | "test") {
        return None;
    }
    if order.is_empty() || !order.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((order.parse().ok()?, kind))
}

fn read_meta(path: &Path) -> Result<String, IngestError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut context = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(IngestError::Malformed {
                file: path.to_owned(),
                row: i as u64 + 1,
                column: "-".into(),
                message: "expected key=value".into(),
            });
        };
        if key.trim() == "context_name" {
            context = Some(value.trim().to_owned());
        }
    }
    context.ok_or_else(|| IngestError::Malformed {
        file: path.to_owned(),
        row: 0,
        column: "context_name".into(),
        message: "missing context_name key".into(),
    })
}

/// Row-oriented CSV reader that reports positions as (line, column name).
struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn open(path: &Path, expected: &[&str]) -> Result<Self, IngestError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(bytes.as_slice());
        let malformed = |row: u64, column: &str, message: String| IngestError::Malformed {
            file: path.to_owned(),
            row,
            column: column.to_owned(),
            message,
        };
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| malformed(1, "-", e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(malformed(
                1,
                "-",
                format!("header must be `{}`, found `{}`", expected.join(","), header.join(",")),
            ));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let row = e.position().map_or(0, |p| p.line());
                malformed(row, "-", e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record));
        }
        Ok(Self {
            path: path.to_owned(),
            header,
            rows,
        })
    }

    fn err(&self, row: u64, col: usize, message: impl Into<String>) -> IngestError {
        IngestError::Malformed {
            file: self.path.clone(),
            row,
            column: self.header[col].clone(),
            message: message.into(),
        }
    }

    fn text(&self, row: u64, rec: &csv::StringRecord, col: usize) -> Result<String, IngestError> {
        let v = rec.get(col).unwrap_or("");
        if v.is_empty() {
            return Err(self.err(row, col, "empty value"));
        }
        Ok(v.to_owned())
    }

    fn parse<T: std::str::FromStr>(
        &self,
        row: u64,
        rec: &csv::StringRecord,
        col: usize,
        what: &str,
    ) -> Result<T, IngestError> {
        let v = rec.get(col).unwrap_or("");
        v.parse()
            .map_err(|_| self.err(row, col, format!("`{v}` is not {what}")))
    }

    fn optional<T: std::str::FromStr>(
        &self,
        row: u64,
        rec: &csv::StringRecord,
        col: usize,
        what: &str,
    ) -> Result<Option<T>, IngestError> {
        if rec.get(col).unwrap_or("").is_empty() {
            Ok(None)
        } else {
            self.parse(row, rec, col, what).map(Some)
        }
    }
}

const COUNT: &str = "a nonnegative integer";
const REAL: &str = "a number";

fn read_units(path: &Path) -> Result<Vec<CodeUnit>, IngestError> {
    let t = Table::open(path, &UNITS_HEADER)?;
    let mut units = Vec::with_capacity(t.rows.len());
    for (row, rec) in &t.rows {
        let kind = rec.get(2).unwrap_or("");
        units.push(CodeUnit {
            id: t.text(*row, rec, 0)?.into(),
            name: rec.get(1).unwrap_or("").to_owned(),
            kind: kind.parse().map_err(|m: String| t.err(*row, 2, m))?,
        });
    }
    Ok(units)
}

fn read_inspection(
    path: &Path,
    run_id: &RunId,
    catalog: &mut Vec<CodeUnit>,
) -> Result<(Vec<UnitId>, Vec<InspectionRecord>), IngestError> {
    let t = Table::open(path, &INSPECTION_HEADER)?;
    let mut unit_ids = Vec::new();
    let mut records = Vec::new();
    for (row, rec) in &t.rows {
        let row = *row;
        let unit_id: UnitId = t.text(row, rec, 0)?.into();
        let kind: UnitKind = rec.get(1).unwrap_or("").parse().map_err(|m: String| t.err(row, 1, m))?;
        match catalog.iter().find(|u| u.id == unit_id) {
            Some(existing) if existing.kind != kind => {
                return Err(t.err(
                    row,
                    1,
                    format!("unit {unit_id} was declared as {} earlier", existing.kind.as_str()),
                ));
            }
            Some(_) => {}
            None => catalog.push(CodeUnit {
                id: unit_id.clone(),
                name: unit_id.to_string(),
                kind,
            }),
        }
        if !unit_ids.contains(&unit_id) {
            unit_ids.push(unit_id.clone());
        }
        records.push(InspectionRecord {
            unit_id,
            run_id: run_id.clone(),
            defects_high: t.parse(row, rec, 2, COUNT)?,
            defects_medium: t.parse(row, rec, 3, COUNT)?,
            defects_low: t.parse(row, rec, 4, COUNT)?,
            comments: t.parse(row, rec, 5, COUNT)?,
            coverage_rate: t.parse(row, rec, 6, REAL)?,
        });
    }
    Ok((unit_ids, records))
}

fn read_product(path: &Path, run_id: &RunId) -> Result<Vec<ProductMetricsRecord>, IngestError> {
    let t = Table::open(path, &PRODUCT_HEADER)?;
    let mut records = Vec::new();
    for (row, rec) in &t.rows {
        let row = *row;
        records.push(ProductMetricsRecord {
            unit_id: t.text(row, rec, 0)?.into(),
            run_id: run_id.clone(),
            class_length_loc: t.parse(row, rec, 1, COUNT)?,
            mean_method_length: t.parse(row, rec, 2, REAL)?,
            cyclomatic: t.parse(row, rec, 3, REAL)?,
            statement_loc: t.optional(row, rec, 4, COUNT)?,
            waste_per_line: t.optional(row, rec, 5, REAL)?,
        });
    }
    Ok(records)
}

fn read_test(path: &Path, run_id: &RunId) -> Result<Vec<TestRecord>, IngestError> {
    let t = Table::open(path, &TEST_HEADER)?;
    let mut records = Vec::new();
    for (row, rec) in &t.rows {
        records.push(TestRecord {
            unit_id: t.text(*row, rec, 0)?.into(),
            run_id: run_id.clone(),
            test_defects: t.parse(*row, rec, 1, COUNT)?,
        });
    }
    Ok(records)
}

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), WriteError> {
    fs::write(path, bytes).map_err(|source| WriteError::Io {
        path: path.to_owned(),
        source,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Render the product CSV for a set of records.
pub fn product_csv(records: &[ProductMetricsRecord]) -> Result<Vec<u8>, WriteError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PRODUCT_HEADER)?;
    for r in records {
        w.write_record([
            r.unit_id.to_string(),
            r.class_length_loc.to_string(),
            r.mean_method_length.to_string(),
            r.cyclomatic.to_string(),
            opt(r.statement_loc),
            opt(r.waste_per_line),
        ])?;
    }
    w.into_inner().map_err(|e| WriteError::Csv(e.into_error().into()))
}

/// Write the canonical form of `d` into `dir` (created if missing).
pub fn save_dataset(d: &Dataset, dir: impl AsRef<Path>) -> Result<(), WriteError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| WriteError::Io {
        path: dir.to_owned(),
        source,
    })?;
    write_file(
        &dir.join(META_FILE),
        format!("context_name={}\n", d.context_name).as_bytes(),
    )?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(UNITS_HEADER)?;
    for u in &d.units {
        w.write_record([u.id.as_str(), u.name.as_str(), u.kind.as_str()])?;
    }
    write_file(&dir.join(UNITS_FILE), &finish(w)?)?;

    for run in &d.runs {
        let order = run.order_index;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(INSPECTION_HEADER)?;
        for r in &run.inspection_records {
            let kind = d.unit(&r.unit_id).map_or(UnitKind::Class, |u| u.kind);
            w.write_record([
                r.unit_id.to_string(),
                kind.as_str().to_owned(),
                r.defects_high.to_string(),
                r.defects_medium.to_string(),
                r.defects_low.to_string(),
                r.comments.to_string(),
                r.coverage_rate.to_string(),
            ])?;
        }
        write_file(&dir.join(format!("run_{order}.inspection.csv")), &finish(w)?)?;
        write_file(
            &dir.join(format!("run_{order}.product.csv")),
            &product_csv(&run.product_records)?,
        )?;
        if !run.test_records.is_empty() {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(TEST_HEADER)?;
            for r in &run.test_records {
                w.write_record([r.unit_id.to_string(), r.test_defects.to_string()])?;
            }
            write_file(&dir.join(format!("run_{order}.test.csv")), &finish(w)?)?;
        }
    }
    Ok(())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, WriteError> {
    w.into_inner().map_err(|e| WriteError::Csv(e.into_error().into()))
}
