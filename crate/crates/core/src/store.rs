//! Persistent experience base: assumptions with significance histories, the
//! rule catalog and an append-only evaluation log.
//!
//! Layout of a store directory:
//!
//! ```text
//! context.json            context name, validity policy, creation time
//! assumptions.json        assumptions with significance histories
//! rules.json              registered selection rules
//! evaluations.log.json    one evaluation per line, append-only
//! LOCK                    present while a writer holds the store
//! ```
//!
//! Every write stages complete `*.pending` files, then publishes a `COMMIT`
//! marker naming them, then renames them into place. Opening a store rolls
//! a published commit forward and discards unpublished staging files, so an
//! interrupted write leaves either the old or the new state.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::evaluate::{assumption_validity, update_significance, EvalError, EvaluationResult, ValidityPolicy};
use crate::model::RunId;
use crate::rules::{Assumption, AssumptionId, RuleId, RuleSet, SelectionRule};

pub const CONTEXT_FILE: &str = "context.json";
pub const ASSUMPTIONS_FILE: &str = "assumptions.json";
pub const RULES_FILE: &str = "rules.json";
pub const LOG_FILE: &str = "evaluations.log.json";
pub const LOCK_FILE: &str = "LOCK";
const COMMIT_FILE: &str = "COMMIT";
const PENDING_SUFFIX: &str = ".pending";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("store is locked by another writer ({0}); remove it if no writer is running")]
    Locked(PathBuf),
    #[error("store failed consistency checks:\n  {}", .0.join("\n  "))]
    Corrupt(Vec<String>),
    #[error("no evaluations to record")]
    EmptyRecord,
    #[error("rule {rule} already has an evaluation for run {run}")]
    DuplicateRun { rule: RuleId, run: RunId },
    #[error("evaluation for run {found} passed while recording run {expected}")]
    RunMismatch { expected: RunId, found: RunId },
    #[error("rule {0} is not registered in the store")]
    UnknownRule(RuleId),
    #[error("rule {0} is already registered with different content")]
    RuleConflict(RuleId),
    #[error("store belongs to context `{store}`, dataset is `{dataset}`")]
    ContextMismatch { store: String, dataset: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreContext {
    pub context_name: String,
    #[serde(default)]
    pub validity_policy: ValidityPolicy,
    /// Seconds since the Unix epoch when the store was created.
    #[serde(default)]
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub assumption_id: AssumptionId,
    #[serde(flatten)]
    pub result: EvaluationResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperienceBase {
    root: PathBuf,
    pub context: StoreContext,
    pub assumptions: Vec<Assumption>,
    pub rules: Vec<SelectionRule>,
    pub log: Vec<LogEntry>,
}

/// Exclusive writer lock, released on drop.
struct WriterLock(PathBuf);

impl WriterLock {
    fn acquire(root: &Path, wait: Duration) -> Result<Self, StoreError> {
        let path = root.join(LOCK_FILE);
        let start = std::time::Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    let _ = writeln!(f, "{}", std::process::id());
                    return Ok(Self(path));
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    if start.elapsed() >= wait {
                        return Err(StoreError::Locked(path));
                    }
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(io_err(&path)(e)),
            }
        }
    }
}

impl Drop for WriterLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

const LOCK_WAIT: Duration = Duration::from_secs(2);

fn pending_path(root: &Path, name: &str) -> PathBuf {
    root.join(format!("{name}{PENDING_SUFFIX}"))
}

fn sync_dir(root: &Path) {
    // Not supported on every platform; best effort.
    if let Ok(dir) = File::open(root) {
        let _ = dir.sync_all();
    }
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))?;
    f.sync_all().map_err(io_err(path))
}

/// Stage all files, publish the commit marker, then move files into place.
fn commit(root: &Path, files: &[(&str, Vec<u8>)]) -> Result<(), StoreError> {
    for (name, bytes) in files {
        write_synced(&pending_path(root, name), bytes)?;
    }
    let names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
    let marker_tmp = root.join(format!("{COMMIT_FILE}.tmp"));
    write_synced(&marker_tmp, names.join("\n").as_bytes())?;
    let marker = root.join(COMMIT_FILE);
    fs::rename(&marker_tmp, &marker).map_err(io_err(&marker))?;
    sync_dir(root);
    roll_forward(root)
}

fn roll_forward(root: &Path) -> Result<(), StoreError> {
    let marker = root.join(COMMIT_FILE);
    let listing = fs::read_to_string(&marker).map_err(io_err(&marker))?;
    for name in listing.lines().filter(|l| !l.is_empty()) {
        let pending = pending_path(root, name);
        if pending.exists() {
            let target = root.join(name);
            fs::rename(&pending, &target).map_err(io_err(&target))?;
        }
    }
    sync_dir(root);
    fs::remove_file(&marker).map_err(io_err(&marker))
}

fn needs_recovery(root: &Path) -> Result<bool, StoreError> {
    if root.join(COMMIT_FILE).exists() || root.join(format!("{COMMIT_FILE}.tmp")).exists() {
        return Ok(true);
    }
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        if entry.file_name().to_string_lossy().ends_with(PENDING_SUFFIX) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Finish a published commit or drop an unpublished one. Caller holds the lock.
fn recover(root: &Path) -> Result<(), StoreError> {
    if root.join(COMMIT_FILE).exists() {
        roll_forward(root)?;
    }
    let _ = fs::remove_file(root.join(format!("{COMMIT_FILE}.tmp")));
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        if entry.file_name().to_string_lossy().ends_with(PENDING_SUFFIX) {
            fs::remove_file(entry.path()).map_err(io_err(&entry.path()))?;
        }
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("store documents serialize");
    bytes.push(b'\n');
    bytes
}

fn log_bytes(log: &[LogEntry]) -> Vec<u8> {
    let mut out = Vec::new();
    for entry in log {
        serde_json::to_writer(&mut out, entry).expect("log entries serialize");
        out.push(b'\n');
    }
    out
}

impl ExperienceBase {
    /// Open the store at `path`, creating an empty one if the directory has
    /// no store yet.
    pub fn open_or_init(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = path.as_ref().to_owned();
        fs::create_dir_all(&root).map_err(io_err(&root))?;

        if needs_recovery(&root)? {
            let _lock = WriterLock::acquire(&root, LOCK_WAIT)?;
            recover(&root)?;
        }

        let context_path = root.join(CONTEXT_FILE);
        if !context_path.exists() {
            let _lock = WriterLock::acquire(&root, LOCK_WAIT)?;
            if !context_path.exists() {
                let context = StoreContext {
                    context_name: String::new(),
                    validity_policy: ValidityPolicy::default(),
                    created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                };
                commit(
                    &root,
                    &[
                        (ASSUMPTIONS_FILE, pretty(&Vec::<Assumption>::new())),
                        (RULES_FILE, pretty(&Vec::<SelectionRule>::new())),
                        (LOG_FILE, Vec::new()),
                        (CONTEXT_FILE, pretty(&context)),
                    ],
                )?;
            }
        }

        let store = Self::load(&root)?;
        let failures = store.consistency_failures();
        if !failures.is_empty() {
            return Err(StoreError::Corrupt(failures));
        }
        Ok(store)
    }

    fn load(root: &Path) -> Result<Self, StoreError> {
        let context = read_json(&root.join(CONTEXT_FILE))?;
        let assumptions = read_json(&root.join(ASSUMPTIONS_FILE))?;
        let rules = read_json(&root.join(RULES_FILE))?;
        let log_path = root.join(LOG_FILE);
        let text = fs::read_to_string(&log_path).map_err(io_err(&log_path))?;
        let mut log = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            log.push(serde_json::from_str(line).map_err(|e| StoreError::Parse {
                path: log_path.clone(),
                message: format!("line {}: {e}", i + 1),
            })?);
        }
        Ok(Self {
            root: root.to_owned(),
            context,
            assumptions,
            rules,
            log,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn rule(&self, id: &RuleId) -> Option<&SelectionRule> {
        self.rules.iter().find(|r| &r.id == id)
    }

    pub fn assumption(&self, id: &AssumptionId) -> Option<&Assumption> {
        self.assumptions.iter().find(|a| &a.id == id)
    }

    /// Runs present in the log, in chronological order.
    pub fn runs(&self) -> Vec<(u32, RunId)> {
        let runs: BTreeSet<(u32, RunId)> = self
            .log
            .iter()
            .map(|e| (e.result.run_order, e.result.run_id.clone()))
            .collect();
        runs.into_iter().collect()
    }

    /// Every failed consistency check; empty when the store is sound.
    pub fn consistency_failures(&self) -> Vec<String> {
        let mut failures = Vec::new();

        let mut rule_ids = BTreeMap::new();
        for rule in &self.rules {
            if rule_ids.insert(&rule.id, rule).is_some() {
                failures.push(format!("rule {} registered twice", rule.id));
            }
            if let Err(e) = rule.validate() {
                failures.push(format!("rule {}: {e}", rule.id));
            }
        }
        let mut assumption_ids = BTreeSet::new();
        for a in &self.assumptions {
            if !assumption_ids.insert(&a.id) {
                failures.push(format!("assumption {} listed twice", a.id));
            }
        }
        for rule in &self.rules {
            if !assumption_ids.contains(&rule.assumption_id) {
                failures.push(format!(
                    "rule {} references unknown assumption {}",
                    rule.id, rule.assumption_id
                ));
            }
        }

        let mut seen = BTreeSet::new();
        for (i, entry) in self.log.iter().enumerate() {
            let r = &entry.result;
            match rule_ids.get(&r.rule_id) {
                None => failures.push(format!("log line {} references unknown rule {}", i + 1, r.rule_id)),
                Some(rule) if rule.assumption_id != entry.assumption_id => failures.push(format!(
                    "log line {}: rule {} belongs to assumption {}, not {}",
                    i + 1,
                    r.rule_id,
                    rule.assumption_id,
                    entry.assumption_id
                )),
                Some(_) => {}
            }
            if !seen.insert((&r.rule_id, &r.run_id)) {
                failures.push(format!(
                    "log line {}: duplicate evaluation of rule {} in run {}",
                    i + 1,
                    r.rule_id,
                    r.run_id
                ));
            }
        }

        let derived = self.derived_histories();
        for a in &self.assumptions {
            let stored: BTreeMap<&RunId, (bool, bool)> =
                a.history.iter().map(|e| (&e.run_id, (e.valid, e.degenerate))).collect();
            let expected = derived.get(&a.id).cloned().unwrap_or_default();
            let expected: BTreeMap<&RunId, (bool, bool)> = expected.iter().map(|(k, v)| (k, *v)).collect();
            if stored != expected || stored.len() != a.history.len() {
                failures.push(format!(
                    "assumption {}: significance history does not match the evaluation log",
                    a.id
                ));
            }
            if a.significance_level != a.valid_runs() {
                failures.push(format!(
                    "assumption {}: significance level {} but {} valid runs",
                    a.id,
                    a.significance_level,
                    a.valid_runs()
                ));
            }
        }
        failures
    }

    /// Per assumption, per run: (valid, degenerate) recomputed from the log.
    fn derived_histories(&self) -> BTreeMap<AssumptionId, BTreeMap<RunId, (bool, bool)>> {
        let mut grouped: BTreeMap<(&AssumptionId, &RunId), Vec<&EvaluationResult>> = BTreeMap::new();
        for entry in &self.log {
            grouped
                .entry((&entry.assumption_id, &entry.result.run_id))
                .or_default()
                .push(&entry.result);
        }
        let mut out: BTreeMap<AssumptionId, BTreeMap<RunId, (bool, bool)>> = BTreeMap::new();
        for ((aid, run), evals) in grouped {
            let v = assumption_validity(&evals, self.context.validity_policy);
            out.entry(aid.clone())
                .or_default()
                .insert(run.clone(), (v.valid && !v.degenerate, v.degenerate));
        }
        out
    }

    /// Bind an unnamed store to a context, or check that names agree.
    pub fn ensure_context(&mut self, name: &str) -> Result<(), StoreError> {
        if self.context.context_name == name {
            return Ok(());
        }
        if !self.context.context_name.is_empty() {
            return Err(StoreError::ContextMismatch {
                store: self.context.context_name.clone(),
                dataset: name.to_owned(),
            });
        }
        let _lock = WriterLock::acquire(&self.root, LOCK_WAIT)?;
        let mut context = self.context.clone();
        context.context_name = name.to_owned();
        commit(&self.root, &[(CONTEXT_FILE, pretty(&context))])?;
        self.context = context;
        Ok(())
    }

    /// Add the rules and assumptions of `set` that the store does not hold
    /// yet. Returns the number of new rules.
    pub fn register_rules(&mut self, set: &RuleSet) -> Result<usize, StoreError> {
        let mut rules = self.rules.clone();
        let mut assumptions = self.assumptions.clone();
        let mut added = 0;
        for spec in &set.assumptions {
            if !assumptions.iter().any(|a| a.id == spec.id) {
                assumptions.push(Assumption::fresh(spec));
            }
        }
        for rule in &set.rules {
            match rules.iter().find(|r| r.id == rule.id) {
                Some(existing) if existing == rule => {}
                Some(_) => return Err(StoreError::RuleConflict(rule.id.clone())),
                None => {
                    if !assumptions.iter().any(|a| a.id == rule.assumption_id) {
                        assumptions.push(Assumption {
                            id: rule.assumption_id.clone(),
                            family: String::new(),
                            description: String::new(),
                            significance_level: 0,
                            history: Vec::new(),
                        });
                    }
                    rules.push(rule.clone());
                    added += 1;
                }
            }
        }
        if added == 0 && assumptions.len() == self.assumptions.len() {
            return Ok(0);
        }
        let _lock = WriterLock::acquire(&self.root, LOCK_WAIT)?;
        commit(
            &self.root,
            &[(RULES_FILE, pretty(&rules)), (ASSUMPTIONS_FILE, pretty(&assumptions))],
        )?;
        self.rules = rules;
        self.assumptions = assumptions;
        Ok(added)
    }

    /// Append one run's evaluations and update significance levels. Either
    /// everything is written or the store is left untouched.
    pub fn record_run_evaluations(
        &mut self,
        run_id: &RunId,
        evaluations: &[EvaluationResult],
    ) -> Result<(), StoreError> {
        if evaluations.is_empty() {
            return Err(StoreError::EmptyRecord);
        }
        let mut fresh = BTreeSet::new();
        let mut by_assumption: BTreeMap<AssumptionId, Vec<&EvaluationResult>> = BTreeMap::new();
        let mut entries = Vec::with_capacity(evaluations.len());
        for e in evaluations {
            if &e.run_id != run_id {
                return Err(StoreError::RunMismatch {
                    expected: run_id.clone(),
                    found: e.run_id.clone(),
                });
            }
            let rule = self
                .rule(&e.rule_id)
                .ok_or_else(|| StoreError::UnknownRule(e.rule_id.clone()))?;
            let duplicate = !fresh.insert(&e.rule_id)
                || self
                    .log
                    .iter()
                    .any(|l| l.result.rule_id == e.rule_id && &l.result.run_id == run_id);
            if duplicate {
                return Err(StoreError::DuplicateRun {
                    rule: e.rule_id.clone(),
                    run: run_id.clone(),
                });
            }
            by_assumption.entry(rule.assumption_id.clone()).or_default().push(e);
            entries.push(LogEntry {
                assumption_id: rule.assumption_id.clone(),
                result: e.clone(),
            });
        }

        let mut assumptions = self.assumptions.clone();
        for (aid, evals) in &by_assumption {
            let assumption = assumptions
                .iter_mut()
                .find(|a| &a.id == aid)
                .expect("registered rules reference registered assumptions");
            let validity = assumption_validity(evals, self.context.validity_policy);
            update_significance(assumption, run_id, validity)?;
        }

        let mut log = self.log.clone();
        log.extend(entries);

        let _lock = WriterLock::acquire(&self.root, LOCK_WAIT)?;
        commit(
            &self.root,
            &[(LOG_FILE, log_bytes(&log)), (ASSUMPTIONS_FILE, pretty(&assumptions))],
        )?;
        self.log = log;
        self.assumptions = assumptions;
        Ok(())
    }

    /// Logged evaluations of one rule.
    pub fn evaluations_of(&self, rule: &RuleId) -> Vec<EvaluationResult> {
        self.log
            .iter()
            .filter(|e| &e.result.rule_id == rule)
            .map(|e| e.result.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::Category;
    use crate::rules::{builtin_catalog, generate_rules};

    fn result(rule: &RuleId, run: &str, order: u32, category: Category) -> EvaluationResult {
        EvaluationResult {
            rule_id: rule.clone(),
            run_id: run.into(),
            run_order: order,
            category,
            effective: category.is_effective(),
            effectiveness: if category.is_effective() { 1.0 } else { 0.0 },
            effort_fraction: 0.5,
            selected_count: 2,
            defect_prone_count: 2,
            degenerate: false,
        }
    }

    fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
        fs::read_dir(root)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect()
    }

    fn seeded() -> (tempfile::TempDir, ExperienceBase, RuleSet) {
        let tmp = tempfile::tempdir().unwrap();
        let mut eb = ExperienceBase::open_or_init(tmp.path()).unwrap();
        let set = generate_rules(&builtin_catalog("casestudy2").unwrap()).unwrap();
        assert_eq!(eb.register_rules(&set).unwrap(), 40);
        (tmp, eb, set)
    }

    #[test]
    fn empty_directory_gives_empty_store() {
        let tmp = tempfile::tempdir().unwrap();
        let eb = ExperienceBase::open_or_init(tmp.path()).unwrap();
        assert!(eb.assumptions.is_empty());
        assert!(eb.log.is_empty());
        assert!(!tmp.path().join(LOCK_FILE).exists());
        assert_eq!(ExperienceBase::open_or_init(tmp.path()).unwrap(), eb);
    }

    #[test]
    fn record_updates_significance_and_reloads() {
        let (tmp, mut eb, set) = seeded();
        let a1: Vec<&SelectionRule> = set.rules.iter().filter(|r| r.assumption_id.as_str() == "A1").collect();
        let run1: Vec<_> = a1.iter().map(|r| result(&r.id, "1", 1, Category::C)).collect();
        let mut run1 = run1;
        run1[0].category = Category::B;
        run1[0].effective = true;
        eb.record_run_evaluations(&"1".into(), &run1).unwrap();
        let run2: Vec<_> = a1.iter().map(|r| result(&r.id, "2", 2, Category::D)).collect();
        eb.record_run_evaluations(&"2".into(), &run2).unwrap();

        let a = eb.assumption(&"A1".into()).unwrap();
        assert_eq!(a.significance_level, 1);
        assert_eq!(a.history.len(), 2);
        let reloaded = ExperienceBase::open_or_init(tmp.path()).unwrap();
        assert_eq!(reloaded, eb);
        assert_eq!(reloaded.runs().len(), 2);
    }

    #[test]
    fn duplicate_run_is_rejected_without_touching_files() {
        let (tmp, mut eb, set) = seeded();
        let evals = vec![result(&set.rules[0].id, "1", 1, Category::A)];
        eb.record_run_evaluations(&"1".into(), &evals).unwrap();
        let before = snapshot(tmp.path());
        assert!(matches!(
            eb.record_run_evaluations(&"1".into(), &evals),
            Err(StoreError::DuplicateRun { .. })
        ));
        assert_eq!(snapshot(tmp.path()), before);
        assert!(matches!(
            eb.record_run_evaluations(&"2".into(), &[]),
            Err(StoreError::EmptyRecord)
        ));
        assert_eq!(snapshot(tmp.path()), before);
    }

    #[test]
    fn unknown_rule_in_log_is_corruption() {
        let (tmp, mut eb, set) = seeded();
        eb.record_run_evaluations(&"1".into(), &[result(&set.rules[0].id, "1", 1, Category::A)])
            .unwrap();
        let log_path = tmp.path().join(LOG_FILE);
        let text = fs::read_to_string(&log_path).unwrap();
        fs::write(&log_path, text.replace(set.rules[0].id.as_str(), "rdeadbeefdeadbeef")).unwrap();
        match ExperienceBase::open_or_init(tmp.path()) {
            Err(StoreError::Corrupt(f)) => assert!(f.iter().any(|m| m.contains("unknown rule"))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tampered_significance_is_corruption() {
        let (tmp, mut eb, set) = seeded();
        eb.record_run_evaluations(&"1".into(), &[result(&set.rules[0].id, "1", 1, Category::A)])
            .unwrap();
        let mut assumptions = eb.assumptions.clone();
        assumptions[0].significance_level = 5;
        fs::write(tmp.path().join(ASSUMPTIONS_FILE), pretty(&assumptions)).unwrap();
        assert!(matches!(
            ExperienceBase::open_or_init(tmp.path()),
            Err(StoreError::Corrupt(_))
        ));
    }

    #[test]
    fn published_commit_rolls_forward() {
        let (tmp, mut eb, set) = seeded();
        let mut next = eb.clone();
        let evals = vec![result(&set.rules[0].id, "1", 1, Category::A)];
        next.record_run_evaluations(&"1".into(), &evals).unwrap();
        // Rebuild the staged state of that commit on top of the old files.
        let new_log = fs::read(tmp.path().join(LOG_FILE)).unwrap();
        let new_assumptions = fs::read(tmp.path().join(ASSUMPTIONS_FILE)).unwrap();
        fs::write(tmp.path().join(LOG_FILE), log_bytes(&eb.log)).unwrap();
        fs::write(tmp.path().join(ASSUMPTIONS_FILE), pretty(&eb.assumptions)).unwrap();
        fs::write(pending_path(tmp.path(), LOG_FILE), &new_log).unwrap();
        fs::write(pending_path(tmp.path(), ASSUMPTIONS_FILE), &new_assumptions).unwrap();
        fs::write(tmp.path().join(COMMIT_FILE), format!("{LOG_FILE}\n{ASSUMPTIONS_FILE}")).unwrap();
        // Crash after the log moved but before assumptions did.
        fs::rename(pending_path(tmp.path(), LOG_FILE), tmp.path().join(LOG_FILE)).unwrap();

        let recovered = ExperienceBase::open_or_init(tmp.path()).unwrap();
        assert_eq!(recovered.log, next.log);
        assert_eq!(recovered.assumptions, next.assumptions);
        assert!(!tmp.path().join(COMMIT_FILE).exists());
        eb = recovered;
        assert!(eb.consistency_failures().is_empty());
    }

    #[test]
    fn unpublished_staging_is_discarded() {
        let (tmp, eb, _) = seeded();
        fs::write(pending_path(tmp.path(), LOG_FILE), b"garbage").unwrap();
        fs::write(tmp.path().join("COMMIT.tmp"), b"evaluations.log.json").unwrap();
        let reopened = ExperienceBase::open_or_init(tmp.path()).unwrap();
        assert_eq!(reopened, eb);
        assert!(!pending_path(tmp.path(), LOG_FILE).exists());
    }

    #[test]
    fn held_lock_blocks_writers() {
        let (tmp, mut eb, set) = seeded();
        fs::write(tmp.path().join(LOCK_FILE), b"999").unwrap();
        let err = eb
            .record_run_evaluations(&"1".into(), &[result(&set.rules[0].id, "1", 1, Category::A)])
            .unwrap_err();
        assert!(matches!(err, StoreError::Locked(_)));
        assert!(eb.log.is_empty());
    }

    #[test]
    fn context_binding() {
        let (_tmp, mut eb, _) = seeded();
        eb.ensure_context("jseq").unwrap();
        eb.ensure_context("jseq").unwrap();
        assert!(matches!(
            eb.ensure_context("other"),
            Err(StoreError::ContextMismatch { .. })
        ));
    }
}
