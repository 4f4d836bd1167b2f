//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.
//!
//! Expected values come from oracles written here against the raw fixture
//! files, never from the library under test.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use inquest::evaluate::{
    categorize, effectiveness, effectiveness_curve, evaluate_rule, update_significance, Category, RunValidity,
};
use inquest::extract::extract_metrics;
use inquest::metrics::{MetricSelector, ProductMetric};
use inquest::model::{InspectionRecord, ProductMetricsRecord, TestRecord};
use inquest::prioritize::{apply_rule, combine_union};
use inquest::rules::{
    builtin_catalog, generate_rules, Assumption, AssumptionSpec, Direction, RuleForm, RuleSet, SelectionRule,
    ThresholdCriterion, ThresholdSpec, TopN,
};
use inquest::{load_dataset, QaRun, UnitId};

type Outcome = Result<String, String>;

/// (id, name, check, time bound)
type Criterion = (&'static str, &'static str, fn() -> Outcome, Option<Duration>);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

/// Minimal CSV reader for the fixtures: header plus comma-separated rows,
/// no quoting.
fn read_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(str::to_owned))
                .collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("bad {col} in {row:?}"))
}

// ---------------------------------------------------------------- AC1

fn ac1() -> Outcome {
    let expected_families = [
        ("I-II", 16),
        ("III", 2),
        ("IV", 2),
        ("V-VI", 2),
        ("VII-VIII", 32),
        ("IX-X", 32),
        ("XI-XIV", 32),
    ];
    let table1 = generate_rules(&builtin_catalog("table1").ok_or("no table1 catalog")?).map_err(|e| e.to_string())?;
    let mut per_family: BTreeMap<String, usize> = BTreeMap::new();
    for r in &table1.rules {
        let family = r.assumption_id.as_str().split(':').next().unwrap_or_default();
        *per_family.entry(family.to_owned()).or_default() += 1;
    }
    for (family, n) in expected_families {
        let got = per_family.get(family).copied().unwrap_or(0);
        ensure!(got == n, "family {family}: {got} rules, expected {n}");
    }
    ensure!(
        per_family.len() == expected_families.len(),
        "unexpected families {per_family:?}"
    );
    ensure!(table1.len() == 118, "table1 has {} rules", table1.len());

    let cs2 =
        generate_rules(&builtin_catalog("casestudy2").ok_or("no casestudy2 catalog")?).map_err(|e| e.to_string())?;
    ensure!(cs2.len() == 40, "casestudy2 has {} rules", cs2.len());
    let assumptions: BTreeSet<&str> = cs2.rules.iter().map(|r| r.assumption_id.as_str()).collect();
    ensure!(
        assumptions.len() == 10,
        "casestudy2 has {} assumptions",
        assumptions.len()
    );
    for a in &assumptions {
        let ns: BTreeSet<u32> = cs2
            .rules
            .iter()
            .filter(|r| r.assumption_id.as_str() == *a)
            .filter_map(|r| r.form.top_n())
            .collect();
        ensure!(ns == BTreeSet::from([3, 5, 8, 10]), "assumption {a}: N values {ns:?}");
    }
    Ok("118 = 16+2+2+2+32+32+32; 40 = 10 x {3,5,8,10}".into())
}

// ---------------------------------------------------------------- AC2

#[derive(Clone)]
struct OracleUnit {
    id: String,
    content: f64,
    method_length: f64,
    test_defects: u32,
}

fn casestudy1_oracle(run: u32) -> Vec<OracleUnit> {
    let dir = fixtures().join("casestudy1");
    let insp = read_rows(&dir.join(format!("run_{run}.inspection.csv")));
    let prod = read_rows(&dir.join(format!("run_{run}.product.csv")));
    let test = read_rows(&dir.join(format!("run_{run}.test.csv")));
    insp.iter()
        .map(|r| {
            let id = r["unit_id"].clone();
            let p = prod.iter().find(|p| p["unit_id"] == id).expect("product row");
            let t = test.iter().find(|t| t["unit_id"] == id).expect("test row");
            OracleUnit {
                content: num(r, "defects_high") + num(r, "defects_medium") + num(r, "defects_low"),
                method_length: num(p, "mean_method_length"),
                test_defects: num(t, "test_defects") as u32,
                id,
            }
        })
        .collect()
}

/// The unique subset whose members satisfy `pred` and whose non-members do
/// not, found by enumerating every subset.
fn brute_force_selection(units: &[OracleUnit], pred: impl Fn(&OracleUnit) -> bool) -> BTreeSet<String> {
    let mut found = Vec::new();
    for mask in 0u32..(1 << units.len()) {
        let consistent = units.iter().enumerate().all(|(i, u)| (mask >> i & 1 == 1) == pred(u));
        if consistent {
            found.push(
                units
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, u)| u.id.clone())
                    .collect(),
            );
        }
    }
    assert_eq!(found.len(), 1, "exactly one consistent subset");
    found.pop().unwrap()
}

fn set_category(s: &BTreeSet<String>, d: &BTreeSet<String>) -> char {
    if d.is_empty() {
        return if s.is_empty() { 'A' } else { 'B' };
    }
    let inter = s.intersection(d).count();
    if s == d {
        'A'
    } else if inter == d.len() {
        'B'
    } else if inter > 0 {
        'C'
    } else {
        'D'
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn find_rule<'a>(set: &'a RuleSet, form: &RuleForm) -> Option<&'a SelectionRule> {
    set.rules.iter().find(|r| &r.form == form)
}

fn ac2() -> Outcome {
    let d = load_dataset(fixtures().join("casestudy1")).map_err(|e| e.to_string())?;
    let table1 = generate_rules(&builtin_catalog("table1").unwrap()).map_err(|e| e.to_string())?;
    let content = ThresholdCriterion {
        selector: MetricSelector::content_all(),
        direction: Direction::Large,
        threshold: ThresholdSpec::Mean,
    };
    let short_methods = ThresholdCriterion {
        selector: MetricSelector::Product(ProductMetric::MeanMethodLength),
        direction: Direction::Small,
        threshold: ThresholdSpec::Mean,
    };
    let single = find_rule(&table1, &RuleForm::Conjunctive(vec![content.clone()]))
        .ok_or("large content(all) rule not in table1 set")?;
    let both = find_rule(&table1, &RuleForm::Conjunctive(vec![content, short_methods]))
        .ok_or("large content(all) & small method length rule not in table1 set")?;

    let mut signatures = (String::new(), String::new());
    for run in d.runs_in_order() {
        let order = run.order_index;
        let units = casestudy1_oracle(order);
        let content_mean = mean(units.iter().map(|u| u.content));
        let length_mean = mean(units.iter().map(|u| u.method_length));
        let defect_prone: BTreeSet<String> = units
            .iter()
            .filter(|u| u.test_defects > 0)
            .map(|u| u.id.clone())
            .collect();
        let oracle_single = brute_force_selection(&units, |u| u.content > content_mean);
        let oracle_both = brute_force_selection(&units, |u| u.content > content_mean && u.method_length <= length_mean);

        for (rule, oracle, sig) in [
            (single, &oracle_single, &mut signatures.0),
            (both, &oracle_both, &mut signatures.1),
        ] {
            let selection = apply_rule(rule, run).map_err(|e| e.to_string())?;
            let got: BTreeSet<String> = selection.selected.iter().map(|u| u.to_string()).collect();
            ensure!(
                &got == oracle,
                "run {order} rule {}: selected {got:?}, oracle {oracle:?}",
                rule.label()
            );
            let eval = evaluate_rule(rule, run).map_err(|e| e.to_string())?;
            let expected = set_category(oracle, &defect_prone);
            ensure!(
                eval.category.letter() == expected,
                "run {order} rule {}: category {:?}, oracle {expected}",
                rule.label(),
                eval.category
            );
            sig.push(expected);
        }

        let want = |ids: &[&str]| ids.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        match order {
            1 => ensure!(oracle_single == want(&["I", "III"]), "run 1 oracle {oracle_single:?}"),
            _ => ensure!(oracle_single == want(&["VI", "VII"]), "run 2 oracle {oracle_single:?}"),
        }
    }
    ensure!(signatures.0 == "AB", "large content(all) signature {}", signatures.0);
    ensure!(
        signatures.1 == "AA",
        "large content(all) & small method length signature {}",
        signatures.1
    );
    Ok("large content(all): AB; with small mean method length: AA".into())
}

// ---------------------------------------------------------------- AC3

fn ac3() -> Outcome {
    let mut checked = 0u64;
    for n in 0..=8u32 {
        let all = 1u32 << n;
        let members = |mask: u32| -> BTreeSet<u32> { (0..n).filter(|i| mask >> i & 1 == 1).collect() };
        for d in 0..all {
            let dset = members(d);
            for s in 0..all {
                let sset = members(s);
                let expected = if d == 0 {
                    if s == 0 {
                        'A'
                    } else {
                        'B'
                    }
                } else {
                    let fires = [s == d, s & d == d && s != d, s & d != 0 && s & d != d, s & d == 0];
                    let count = fires.iter().filter(|f| **f).count();
                    ensure!(count == 1, "|U|={n} S={s:b} D={d:b}: {count} categories fire");
                    ['A', 'B', 'C', 'D'][fires.iter().position(|f| *f).unwrap()]
                };
                let got = categorize(&sset, &dset).letter();
                ensure!(got == expected, "|U|={n} S={s:b} D={d:b}: got {got}, oracle {expected}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (S, D) pairs agree"))
}

// ---------------------------------------------------------------- AC4

fn random_run(rng: &mut ChaCha8Rng) -> QaRun {
    let size = rng.gen_range(1..=15usize);
    let ids: Vec<UnitId> = (0..size).map(|i| UnitId::new(format!("u{i:02}"))).collect();
    let all_clean = rng.gen_bool(0.05);
    let constant_metric = rng.gen_bool(0.1);
    let mut run = QaRun {
        run_id: "r".into(),
        order_index: 1,
        unit_ids: ids.clone(),
        inspection_records: Vec::new(),
        product_records: Vec::new(),
        test_records: Vec::new(),
    };
    for id in ids {
        let defects = if constant_metric { 3 } else { rng.gen_range(0..30) };
        run.inspection_records.push(InspectionRecord {
            unit_id: id.clone(),
            run_id: "r".into(),
            defects_high: defects / 3,
            defects_medium: defects - defects / 3,
            defects_low: 0,
            comments: rng.gen_range(0..5),
            coverage_rate: rng.gen_range(1..=10) as f64 / 10.0,
        });
        run.product_records.push(ProductMetricsRecord {
            unit_id: id.clone(),
            run_id: "r".into(),
            class_length_loc: rng.gen_range(1..2000),
            mean_method_length: rng.gen_range(1..60) as f64,
            cyclomatic: rng.gen_range(1..20) as f64,
            statement_loc: Some(rng.gen_range(0..5000)),
            waste_per_line: Some(rng.gen_range(0..100) as f64 / 100.0),
        });
        let test_defects = if all_clean || rng.gen_bool(0.5) {
            0
        } else {
            rng.gen_range(1..10)
        };
        run.test_records.push(TestRecord {
            unit_id: id,
            run_id: "r".into(),
            test_defects,
        });
    }
    run
}

fn ac4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e57_2010);
    let selectors = [
        MetricSelector::content_all(),
        MetricSelector::Product(ProductMetric::ClassLength),
        MetricSelector::Product(ProductMetric::StatementLoc),
        MetricSelector::Product(ProductMetric::WastePerLine),
    ];
    let mut evaluations = 0;
    for trial in 0..200 {
        let run = random_run(&mut rng);
        let size = run.unit_ids.len() as u32;
        let selector = selectors[rng.gen_range(0..selectors.len())];
        let direction = if rng.gen_bool(0.5) {
            Direction::Large
        } else {
            Direction::Small
        };
        let rule = SelectionRule::new(
            "random".into(),
            RuleForm::TopN(TopN {
                selector,
                direction,
                n: 1,
            }),
        );
        let ns: Vec<u32> = (1..=size + 2).collect();
        let curve = effectiveness_curve(&rule, &run, &ns).map_err(|e| e.to_string())?;
        for pair in curve.windows(2) {
            ensure!(pair[0].1 <= pair[1].1, "trial {trial}: curve decreases {curve:?}");
        }
        let at_all = curve.iter().find(|(n, _)| *n == size).map(|(_, e)| *e);
        ensure!(
            at_all == Some(1.0),
            "trial {trial}: effectiveness at N=|U| is {at_all:?}"
        );

        for n in 1..=size {
            let variant = SelectionRule::new("random".into(), rule.form.with_n(n).unwrap());
            let eval = evaluate_rule(&variant, &run).map_err(|e| e.to_string())?;
            if matches!(eval.category, Category::A | Category::B) {
                ensure!(
                    eval.effectiveness == 1.0,
                    "trial {trial} N={n}: {:?} with effectiveness {}",
                    eval.category,
                    eval.effectiveness
                );
            }
            evaluations += 1;
        }
    }
    Ok(format!("200 runs, {evaluations} top-N evaluations"))
}

// ---------------------------------------------------------------- AC5

struct SynthModule {
    id: String,
    defects: f64,
    comments: f64,
    coverage: f64,
    statement_loc: f64,
    waste: f64,
    test_defects: u32,
}

fn synthetic_oracle() -> Vec<SynthModule> {
    let dir = fixtures().join("synthetic12");
    let insp = read_rows(&dir.join("run_1.inspection.csv"));
    let prod = read_rows(&dir.join("run_1.product.csv"));
    let test = read_rows(&dir.join("run_1.test.csv"));
    insp.iter()
        .map(|r| {
            let id = r["unit_id"].clone();
            let p = prod.iter().find(|p| p["unit_id"] == id).unwrap();
            let t = test.iter().find(|t| t["unit_id"] == id).unwrap();
            SynthModule {
                defects: num(r, "defects_high") + num(r, "defects_medium") + num(r, "defects_low"),
                comments: num(r, "comments"),
                coverage: num(r, "coverage_rate"),
                statement_loc: num(p, "statement_loc"),
                waste: num(p, "waste_per_line"),
                test_defects: num(t, "test_defects") as u32,
                id,
            }
        })
        .collect()
}

/// Ids ranked by `key`, largest first when `large`, ties by id.
fn oracle_ranking(modules: &[SynthModule], key: impl Fn(&SynthModule) -> f64, large: bool) -> Vec<String> {
    let mut keyed: Vec<(f64, &str)> = modules.iter().map(|m| (key(m), m.id.as_str())).collect();
    keyed.sort_by(|a, b| {
        let by_value = if large {
            b.0.partial_cmp(&a.0)
        } else {
            a.0.partial_cmp(&b.0)
        };
        by_value.unwrap().then(a.1.cmp(b.1))
    });
    keyed.into_iter().map(|(_, id)| id.to_owned()).collect()
}

fn ac5() -> Outcome {
    let modules = synthetic_oracle();
    let total: u32 = modules.iter().map(|m| m.test_defects).sum();
    let defects_of = |ids: &BTreeSet<String>| -> u32 {
        modules
            .iter()
            .filter(|m| ids.contains(&m.id))
            .map(|m| m.test_defects)
            .sum()
    };
    let rankings: BTreeMap<&str, Vec<Vec<String>>> = BTreeMap::from([
        ("A1", vec![oracle_ranking(&modules, |m| m.defects + m.comments, true)]),
        (
            "A2",
            vec![oracle_ranking(
                &modules,
                |m| (m.defects + m.comments) / m.coverage,
                true,
            )],
        ),
        ("A3", vec![oracle_ranking(&modules, |m| m.defects, true)]),
        ("A4", vec![oracle_ranking(&modules, |m| m.defects / m.coverage, true)]),
        ("A5", vec![oracle_ranking(&modules, |m| m.statement_loc, false)]),
        ("A6", vec![oracle_ranking(&modules, |m| m.statement_loc, true)]),
        ("A7", vec![oracle_ranking(&modules, |m| m.waste, false)]),
        ("A8", vec![oracle_ranking(&modules, |m| m.waste, true)]),
        (
            "A9",
            vec![
                oracle_ranking(&modules, |m| m.defects + m.comments, true),
                oracle_ranking(&modules, |m| m.statement_loc, true),
            ],
        ),
        (
            "A10",
            vec![
                oracle_ranking(&modules, |m| m.defects, true),
                oracle_ranking(&modules, |m| m.statement_loc, true),
            ],
        ),
    ]);

    let d = load_dataset(fixtures().join("synthetic12")).map_err(|e| e.to_string())?;
    let run = &d.runs[0];
    let set = generate_rules(&builtin_catalog("casestudy2").unwrap()).map_err(|e| e.to_string())?;
    let ns = [3u32, 5, 8, 10];
    let mut shown = Vec::new();
    for (assumption, ranks) in &rankings {
        let rule = set
            .rules
            .iter()
            .find(|r| r.assumption_id.as_str() == *assumption)
            .ok_or_else(|| format!("no rule for {assumption}"))?;
        let curve = effectiveness_curve(rule, run, &ns).map_err(|e| e.to_string())?;
        let expected: Vec<(u32, f64)> = ns
            .iter()
            .map(|&n| {
                let picked: BTreeSet<String> = ranks.iter().flat_map(|r| r.iter().take(n as usize).cloned()).collect();
                (n, defects_of(&picked) as f64 / total as f64)
            })
            .collect();
        ensure!(curve == expected, "{assumption}: curve {curve:?}, oracle {expected:?}");
        if *assumption == "A1" {
            shown = curve;
        }
    }

    let top3 = |assumption: &str| {
        set.rules
            .iter()
            .find(|r| r.assumption_id.as_str() == assumption && r.form.top_n() == Some(3))
            .ok_or_else(|| format!("no top-3 rule for {assumption}"))
    };
    let a1 = apply_rule(top3("A1")?, run).map_err(|e| e.to_string())?;
    let a6 = apply_rule(top3("A6")?, run).map_err(|e| e.to_string())?;
    let shared = a1.unit_set().intersection(&a6.unit_set()).count();
    ensure!(shared == 2, "A1 and A6 top-3 share {shared} modules");
    let union = combine_union(&a1, &a6).map_err(|e| e.to_string())?;
    ensure!(union.len() == 4, "union has {} modules", union.len());
    let e = effectiveness(&union, run).map_err(|e| e.to_string())?;
    let union_ids: BTreeSet<String> = union.selected.iter().map(|u| u.to_string()).collect();
    ensure!(
        e.value == defects_of(&union_ids) as f64 / total as f64,
        "union effectiveness {}",
        e.value
    );

    let pts: Vec<String> = shown.iter().map(|(n, e)| format!("{n}:{e:.3}")).collect();
    Ok(format!(
        "10 curves match oracle (A1 {}); A1 top-3 | A6 top-3 = 4 modules",
        pts.join(" ")
    ))
}

// ---------------------------------------------------------------- AC6

fn ac6() -> Outcome {
    let mut a = Assumption::fresh(&AssumptionSpec {
        id: "X".into(),
        family: "X".into(),
        description: String::new(),
    });
    let valid = RunValidity {
        valid: true,
        degenerate: false,
    };
    let invalid = RunValidity {
        valid: false,
        degenerate: false,
    };
    let steps = [("1", valid, 1u32), ("2", valid, 2), ("3", invalid, 2)];
    for (run, validity, expected) in steps {
        let level = update_significance(&mut a, &run.into(), validity).map_err(|e| e.to_string())?;
        ensure!(level == expected, "after run {run}: level {level}, expected {expected}");
        ensure!(
            a.significance_level == expected,
            "stored level {}",
            a.significance_level
        );
    }
    ensure!(a.history.len() == 3, "history length {}", a.history.len());
    ensure!(
        update_significance(&mut a, &"2".into(), valid).is_err(),
        "duplicate run accepted"
    );
    Ok("levels 1, 2, 2; history length 3".into())
}

// ---------------------------------------------------------------- AC7

struct Expected {
    file: &'static str,
    loc: usize,
    /// (length, cyclomatic) per method in source order.
    methods: &'static [(usize, u32)],
}

const SNIPPETS: &[Expected] = &[
    Expected {
        file: "Account.java",
        loc: 22,
        methods: &[(6, 2), (9, 4), (3, 2)],
    },
    Expected {
        file: "queue.c",
        loc: 20,
        methods: &[(8, 2), (7, 5)],
    },
    Expected {
        file: "shapes.rs",
        loc: 23,
        methods: &[(3, 1), (7, 3), (7, 4)],
    },
    Expected {
        file: "server.go",
        loc: 9,
        methods: &[(8, 3)],
    },
];

/// Insert a blank line and a comment line after every line, plus a block
/// comment holding decision keywords at the top.
fn pad_with_comments(text: &str) -> String {
    let mut out = String::from("/* if (a && b) || c ? d : e;\n   while for case catch */\n");
    for line in text.lines() {
        out.push_str(line);
        out.push_str("\n\n    // if && || ? case\n");
    }
    out
}

fn ac7() -> Outcome {
    let dir = fixtures().join("snippets");
    for e in SNIPPETS {
        let text = std::fs::read_to_string(dir.join(e.file)).map_err(|err| format!("{}: {err}", e.file))?;
        let m = extract_metrics(e.file, &text).map_err(|err| err.to_string())?;
        let got: Vec<(usize, u32)> = m.methods.iter().map(|x| (x.length, x.cyclomatic)).collect();
        ensure!(m.loc == e.loc, "{}: loc {}, expected {}", e.file, m.loc, e.loc);
        ensure!(
            got == e.methods,
            "{}: methods {got:?}, expected {:?}",
            e.file,
            e.methods
        );
        ensure!(
            m.method_count == e.methods.len(),
            "{}: method_count {}",
            e.file,
            m.method_count
        );
        let max = e.methods.iter().map(|x| x.1).max().unwrap();
        ensure!(
            m.cyclomatic_max == max,
            "{}: cyclomatic_max {}",
            e.file,
            m.cyclomatic_max
        );
        let mean_len = e.methods.iter().map(|x| x.0).sum::<usize>() as f64 / e.methods.len() as f64;
        ensure!(
            m.mean_method_length == mean_len,
            "{}: mean method length {}",
            e.file,
            m.mean_method_length
        );

        let padded = extract_metrics(e.file, &pad_with_comments(&text)).map_err(|err| err.to_string())?;
        let padded_cc: Vec<u32> = padded.methods.iter().map(|x| x.cyclomatic).collect();
        let cc: Vec<u32> = e.methods.iter().map(|x| x.1).collect();
        ensure!(
            padded_cc == cc,
            "{}: cyclomatic changed to {padded_cc:?} by comments",
            e.file
        );
        ensure!(
            padded.loc == e.loc,
            "{}: loc changed to {} by comments",
            e.file,
            padded.loc
        );
    }
    Ok(format!(
        "{} files match hand counts; comment padding inert",
        SNIPPETS.len()
    ))
}

// ---------------------------------------------------------------- AC8

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_inquest"))
        .args(args)
        .env_remove("INQUEST_STORE")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "inquest {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn pipeline(jobs: usize) -> Result<Vec<(String, Vec<u8>)>, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    let data = fixtures().join("casestudy1").to_string_lossy().into_owned();
    let (rules, store) = (p("rules.json"), p("store"));
    let jobs = jobs.to_string();

    cli(&["ingest", &data])?;
    cli(&["generate-rules", "--catalog", "builtin:table1", "--out", &rules])?;
    let mut outputs = vec![(
        "rules.json".to_owned(),
        std::fs::read(&rules).map_err(|e| e.to_string())?,
    )];
    outputs.push((
        "prioritize".into(),
        cli(&["prioritize", "--dataset", &data, "--rules", &rules, "--run", "2"])?,
    ));
    outputs.push((
        "evaluate".into(),
        cli(&[
            "evaluate",
            "--dataset",
            &data,
            "--rules",
            &rules,
            "--store",
            &store,
            "--jobs",
            &jobs,
        ])?,
    ));
    outputs.push(("trend".into(), cli(&["trend", "--store", &store])?));
    outputs.push((
        "report.md".into(),
        cli(&["report", "--store", &store, "--format", "markdown"])?,
    ));
    outputs.push((
        "report.csv".into(),
        cli(&["report", "--store", &store, "--format", "csv"])?,
    ));
    for file in ["evaluations.log.json", "assumptions.json", "rules.json"] {
        let bytes = std::fs::read(tmp.path().join("store").join(file)).map_err(|e| e.to_string())?;
        outputs.push((format!("store/{file}"), bytes));
    }
    Ok(outputs)
}

fn ac8() -> Outcome {
    let first = pipeline(4)?;
    let second = pipeline(4)?;
    let serial = pipeline(1)?;
    let wide = pipeline(8)?;
    for (label, other) in [("repeat", &second), ("--jobs 1", &serial), ("--jobs 8", &wide)] {
        for ((name, a), (_, b)) in first.iter().zip(other.iter()) {
            ensure!(a == b, "{name} differs between --jobs 4 and {label}");
        }
    }
    let report = String::from_utf8_lossy(&first.iter().find(|(n, _)| n == "report.md").unwrap().1).into_owned();
    ensure!(report.contains("| 118 |"), "report lacks 118-rule run totals");
    Ok(format!(
        "{} outputs byte-identical across 4 executions (jobs 1, 4, 4, 8)",
        first.len()
    ))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1", "rule-count reproduction", ac1, Some(Duration::from_secs(1))),
        (
            "AC2",
            "casestudy1 fixture categories",
            ac2,
            Some(Duration::from_secs(1)),
        ),
        (
            "AC3",
            "category classifier equivalence",
            ac3,
            Some(Duration::from_secs(10)),
        ),
        ("AC4", "effectiveness properties", ac4, Some(Duration::from_secs(10))),
        ("AC5", "synthetic curves and union", ac5, None),
        ("AC6", "significance semantics", ac6, None),
        ("AC7", "extractor sanity", ac7, Some(Duration::from_secs(1))),
        ("AC8", "pipeline determinism", ac8, None),
    ];
    let mut failed = 0;
    for (id, name, check, bound) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, bound) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail} ({} ms)", elapsed.as_millis()),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL {name}: {why} ({} ms)", elapsed.as_millis());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
