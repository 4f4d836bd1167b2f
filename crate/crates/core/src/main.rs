use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use inquest::dataset::{self, IngestError};
use inquest::evaluate::{evaluate_all, trend_classify, Category, EvaluationResult};
use inquest::extract::{self, CyclomaticAggregation};
use inquest::prioritize::apply_rule;
use inquest::report::{build_report, render_csv, render_markdown};
use inquest::rules::{builtin_catalog, generate_rules, AssumptionCatalog, RuleForm, RuleId, RuleSet};
use inquest::store::ExperienceBase;
use inquest::{Dataset, RunId};

#[derive(Parser)]
#[command(name = "inquest", version, about = "Inspection-guided test prioritization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset directory and summarize it.
    Ingest { dir: PathBuf },
    /// Derive product metrics from a source tree.
    ExtractMetrics {
        src_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// CSV with columns file_path,unit_id overriding file stems.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Aggregate::Max)]
        aggregate: Aggregate,
        #[arg(long, default_value = "1")]
        run: String,
    },
    /// Expand an assumption catalog into selection rules.
    GenerateRules {
        /// Catalog JSON file, or `builtin:<name>` (table1, casestudy2).
        #[arg(long)]
        catalog: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply rules to one run and list the selected units.
    Prioritize {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        run: String,
        /// Only this rule.
        #[arg(long)]
        rule: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Judge every rule on every run against test defects.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Record the evaluations in this experience base.
        #[arg(long, env = "INQUEST_STORE")]
        store: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Classify stored rules by their category across runs.
    Trend {
        #[arg(long, env = "INQUEST_STORE")]
        store: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize an experience base.
    Report {
        #[arg(long, env = "INQUEST_STORE")]
        store: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Aggregate {
    Max,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load(dir: &Path) -> Result<Dataset> {
    match dataset::load_dataset(dir) {
        Ok(d) => Ok(d),
        Err(IngestError::Invalid(report)) => {
            for v in &report.violations {
                eprintln!("{v}");
            }
            bail!("{}: {} violation(s)", dir.display(), report.len())
        }
        Err(e) => Err(e.into()),
    }
}

fn load_rules(path: &Path) -> Result<RuleSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    RuleSet::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn load_catalog(spec: &str) -> Result<AssumptionCatalog> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return Ok(AssumptionCatalog::from_json(&text)?);
    }
    let name = spec.strip_prefix("builtin:").unwrap_or(spec);
    let name = name.strip_suffix(".json").unwrap_or(name);
    builtin_catalog(name).with_context(|| format!("no catalog file or builtin catalog named {spec}"))
}

fn open_store(path: &Path) -> Result<ExperienceBase> {
    if !path.is_dir() {
        bail!("no experience base at {}", path.display());
    }
    Ok(ExperienceBase::open_or_init(path)?)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { dir } => {
            let d = load(&dir)?;
            println!("context {}", d.context_name);
            println!("{} units, {} runs", d.units.len(), d.runs.len());
            for run in d.runs_in_order() {
                let inspected: u32 = run.inspection_records.iter().map(|r| r.total_defects()).sum();
                let tested: u32 = run.test_records.iter().map(|r| r.test_defects).sum();
                let tests = if run.has_test_data() {
                    format!("{tested} test defects")
                } else {
                    "no test data".to_owned()
                };
                println!(
                    "run {}: {} units, {} inspection defects, {}",
                    run.run_id,
                    run.unit_ids.len(),
                    inspected,
                    tests
                );
            }
        }
        Command::ExtractMetrics {
            src_dir,
            out,
            mapping,
            aggregate,
            run,
        } => {
            let mapping = mapping.as_deref().map(extract::load_mapping).transpose()?;
            let units = extract::extract_tree(&src_dir, mapping.as_ref())?;
            let aggregation = match aggregate {
                Aggregate::Max => CyclomaticAggregation::Max,
                Aggregate::Mean => CyclomaticAggregation::Mean,
            };
            let records = extract::records_for(&units, &RunId::new(run), aggregation);
            emit(Some(&out), &dataset::product_csv(&records)?)?;
            println!("{} units", records.len());
        }
        Command::GenerateRules { catalog, out } => {
            let set = generate_rules(&load_catalog(&catalog)?)?;
            emit(Some(&out), set.to_json().as_bytes())?;
            println!("{} rules", set.len());
        }
        Command::Prioritize {
            dataset,
            rules,
            run,
            rule,
            out,
        } => {
            let d = load(&dataset)?;
            let set = load_rules(&rules)?;
            let run_id = RunId::new(run);
            let qa_run = d.run(&run_id).with_context(|| format!("dataset has no run {run_id}"))?;
            let chosen: Vec<_> = match rule {
                Some(id) => vec![set
                    .rule(&RuleId::new(id.clone()))
                    .with_context(|| format!("no rule {id}"))?],
                None => set.rules.iter().collect(),
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["rule_id", "run_id", "rank", "unit_id", "metric_value"])?;
            for r in chosen {
                let selection = apply_rule(r, qa_run)?;
                let values: BTreeMap<_, _> = match (&r.form, &selection.ranking) {
                    (RuleForm::TopN(_), Some(ranking)) => {
                        ranking.iter().map(|u| (u.unit_id.clone(), u.value)).collect()
                    }
                    _ => BTreeMap::new(),
                };
                for (rank, unit) in selection.selected.iter().enumerate() {
                    let value = values.get(unit).map(f64::to_string).unwrap_or_default();
                    w.write_record([
                        r.id.as_str(),
                        run_id.as_str(),
                        &(rank + 1).to_string(),
                        unit.as_str(),
                        &value,
                    ])?;
                }
            }
            emit(out.as_deref(), &w.into_inner().map_err(|e| e.into_error())?)?;
        }
        Command::Evaluate {
            dataset,
            rules,
            store,
            out,
            jobs,
        } => {
            let d = load(&dataset)?;
            let set = load_rules(&rules)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                pool = pool.num_threads(n.max(1));
            }
            let pool = pool.build()?;
            let results = pool.install(|| evaluate_all(&set.rules, &d))?;

            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "rule_id",
                "run_id",
                "category",
                "effective",
                "effectiveness",
                "effort_fraction",
            ])?;
            for r in &results {
                w.write_record([
                    r.rule_id.as_str(),
                    r.run_id.as_str(),
                    &r.category.letter().to_string(),
                    &r.effective.to_string(),
                    &r.effectiveness.to_string(),
                    &r.effort_fraction.to_string(),
                ])?;
            }
            emit(out.as_deref(), &w.into_inner().map_err(|e| e.into_error())?)?;
            summarize(&d, &results);

            if let Some(path) = store {
                fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut eb = ExperienceBase::open_or_init(&path)?;
                eb.ensure_context(&d.context_name)?;
                eb.register_rules(&set)?;
                for run in d.runs_in_order() {
                    let of_run: Vec<EvaluationResult> =
                        results.iter().filter(|r| r.run_id == run.run_id).cloned().collect();
                    eb.record_run_evaluations(&run.run_id, &of_run)?;
                }
                eprintln!("recorded {} evaluations in {}", results.len(), path.display());
            }
        }
        Command::Trend { store, out } => {
            let eb = open_store(&store)?;
            let mut by_rule: BTreeMap<RuleId, Vec<EvaluationResult>> = BTreeMap::new();
            for entry in &eb.log {
                by_rule
                    .entry(entry.result.rule_id.clone())
                    .or_default()
                    .push(entry.result.clone());
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["rule_id", "signature", "classification"])?;
            for (rule, evals) in &by_rule {
                let t = trend_classify(rule, evals)?;
                w.write_record([rule.as_str(), &t.signature, t.classification.as_str()])?;
            }
            emit(out.as_deref(), &w.into_inner().map_err(|e| e.into_error())?)?;
        }
        Command::Report { store, format, out } => {
            let eb = open_store(&store)?;
            let bundle = build_report(&eb);
            let text = match format {
                Format::Markdown => render_markdown(&bundle),
                Format::Csv => render_csv(&bundle),
            };
            emit(out.as_deref(), text.as_bytes())?;
        }
    }
    Ok(())
}

/// Category counts per run, on stderr.
fn summarize(d: &Dataset, results: &[EvaluationResult]) {
    eprintln!("run\tA\tB\tC\tD\ttotal");
    for run in d.runs_in_order() {
        let mut counts = [0usize; 4];
        for r in results.iter().filter(|r| r.run_id == run.run_id) {
            let i = Category::ALL.iter().position(|c| *c == r.category).unwrap_or(0);
            counts[i] += 1;
        }
        let [a, b, c, dd] = counts;
        eprintln!("{}\t{a}\t{b}\t{c}\t{dd}\t{}", run.run_id, counts.iter().sum::<usize>());
    }
}
