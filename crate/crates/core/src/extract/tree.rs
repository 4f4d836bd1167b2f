//! Extraction over a directory of source files.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use super::{extract_metrics, ExtractError, SourceUnitMetrics};
use crate::model::{ProductMetricsRecord, RunId, UnitId};

pub const SOURCE_EXTENSIONS: &[&str] = &[
    "java", "c", "h", "cc", "cpp", "cxx", "hh", "hpp", "hxx", "cs", "js", "jsx", "ts", "tsx", "go", "rs", "kt", "kts",
    "scala", "swift", "groovy", "php", "dart",
];

/// How per-method complexities fold into the unit's `cyclomatic` field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CyclomaticAggregation {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedUnit {
    pub unit_id: UnitId,
    /// Relative paths of the merged files, sorted.
    pub files: Vec<String>,
    pub metrics: SourceUnitMetrics,
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn source_files(root: &Path) -> Result<Vec<PathBuf>, ExtractError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| ExtractError::Io {
            path: e.path().unwrap_or(root).display().to_string(),
            source: e.into(),
        })?;
        let is_source = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| SOURCE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if entry.file_type().is_file() && is_source {
            files.push(entry.into_path());
        }
    }
    files.sort();
    Ok(files)
}

/// Read a `file_path,unit_id` mapping. Paths are relative to the source
/// root, with `/` separators.
pub fn load_mapping(path: &Path) -> Result<HashMap<String, UnitId>, ExtractError> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ExtractError::Mapping {
            path: shown.clone(),
            row: 0,
            message: e.to_string(),
        })?;
    let header_ok = reader
        .headers()
        .map(|h| h.iter().collect::<Vec<_>>() == ["file_path", "unit_id"])
        .unwrap_or(false);
    if !header_ok {
        return Err(ExtractError::Mapping {
            path: shown,
            row: 1,
            message: "expected header file_path,unit_id".into(),
        });
    }
    let mut map = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i as u64 + 2;
        let row = row.map_err(|e| ExtractError::Mapping {
            path: shown.clone(),
            row: row_no,
            message: e.to_string(),
        })?;
        let (file, unit) = (row.get(0).unwrap_or(""), row.get(1).unwrap_or(""));
        if file.is_empty() || unit.is_empty() {
            return Err(ExtractError::Mapping {
                path: shown,
                row: row_no,
                message: "empty field".into(),
            });
        }
        map.insert(file.replace('\\', "/"), UnitId::from(unit));
    }
    Ok(map)
}

/// Extract every source file below `root` and merge files that map to the
/// same unit. Files are processed in parallel; output is sorted by unit id.
pub fn extract_tree(
    root: &Path,
    mapping: Option<&HashMap<String, UnitId>>,
) -> Result<Vec<ExtractedUnit>, ExtractError> {
    let files = source_files(root)?;
    let per_file = files
        .par_iter()
        .map(|path| {
            let rel = relative(root, path);
            let text = fs::read_to_string(path).map_err(|source| ExtractError::Io {
                path: rel.clone(),
                source,
            })?;
            let metrics = extract_metrics(&rel, &text)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let unit = mapping
                .and_then(|m| m.get(&rel).cloned())
                .unwrap_or_else(|| UnitId::new(stem));
            Ok((unit, rel, metrics))
        })
        .collect::<Result<Vec<_>, ExtractError>>()?;

    let mut grouped: BTreeMap<UnitId, Vec<(String, SourceUnitMetrics)>> = BTreeMap::new();
    for (unit, rel, metrics) in per_file {
        grouped.entry(unit).or_default().push((rel, metrics));
    }
    Ok(grouped
        .into_iter()
        .map(|(unit_id, mut parts)| {
            parts.sort_by(|a, b| a.0.cmp(&b.0));
            let loc = parts.iter().map(|(_, m)| m.loc).sum();
            let files: Vec<String> = parts.iter().map(|(f, _)| f.clone()).collect();
            let methods = parts.into_iter().flat_map(|(_, m)| m.methods).collect();
            ExtractedUnit {
                metrics: SourceUnitMetrics::from_methods(unit_id.as_str(), loc, methods),
                unit_id,
                files,
            }
        })
        .collect())
}

/// Product records for extracted units. A unit without methods gets
/// complexity 1.
pub fn records_for(
    units: &[ExtractedUnit],
    run_id: &RunId,
    aggregation: CyclomaticAggregation,
) -> Vec<ProductMetricsRecord> {
    units
        .iter()
        .map(|u| {
            let cc = match aggregation {
                CyclomaticAggregation::Max => f64::from(u.metrics.cyclomatic_max),
                CyclomaticAggregation::Mean => u.metrics.cyclomatic_mean,
            };
            ProductMetricsRecord {
                unit_id: u.unit_id.clone(),
                run_id: run_id.clone(),
                class_length_loc: u32::try_from(u.metrics.loc).unwrap_or(u32::MAX),
                mean_method_length: u.metrics.mean_method_length,
                cyclomatic: cc.max(1.0),
                statement_loc: None,
                waste_per_line: None,
            }
        })
        .collect()
}
