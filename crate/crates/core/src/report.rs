//! Summaries of an experience base as markdown or CSV.
//!
//! Output depends only on the stored rules, assumptions and log; nothing
//! time-dependent is rendered.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::evaluate::{trend_classify, Category, EvaluationResult, TrendClass};
use crate::model::RunId;
use crate::rules::{AssumptionId, RuleId};
use crate::store::ExperienceBase;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_id: RunId,
    pub run_order: u32,
    /// Rule counts per category, in A, B, C, D order.
    pub counts: [usize; 4],
    /// Evaluations whose run had no test defects.
    pub degenerate: usize,
}

impl RunSummary {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TrendBoxes {
    pub acceptable: usize,
    pub potential: usize,
    pub non_acceptable: usize,
}

impl TrendBoxes {
    pub fn total(&self) -> usize {
        self.acceptable + self.potential + self.non_acceptable
    }
}

/// Effectiveness of an assumption's ranking rules over N in one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub assumption_id: AssumptionId,
    pub run_id: RunId,
    pub points: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestRule {
    pub signature: String,
    pub rule_id: RuleId,
    pub assumption_id: AssumptionId,
    pub label: String,
    pub mean_effort: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceRow {
    pub assumption_id: AssumptionId,
    pub level: u32,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub context_name: String,
    pub runs: Vec<RunSummary>,
    pub trends: TrendBoxes,
    pub curves: Vec<Curve>,
    /// Rules effective in every run, by signature then effort.
    pub best_rules: Vec<BestRule>,
    pub significance: Vec<SignificanceRow>,
}

fn category_index(c: Category) -> usize {
    match c {
        Category::A => 0,
        Category::B => 1,
        Category::C => 2,
        Category::D => 3,
    }
}

pub fn build_report(eb: &ExperienceBase) -> ReportBundle {
    let mut runs: BTreeMap<(u32, RunId), RunSummary> = BTreeMap::new();
    let mut by_rule: BTreeMap<&RuleId, Vec<EvaluationResult>> = BTreeMap::new();
    for entry in &eb.log {
        let r = &entry.result;
        let summary = runs
            .entry((r.run_order, r.run_id.clone()))
            .or_insert_with(|| RunSummary {
                run_id: r.run_id.clone(),
                run_order: r.run_order,
                counts: [0; 4],
                degenerate: 0,
            });
        summary.counts[category_index(r.category)] += 1;
        summary.degenerate += usize::from(r.degenerate);
        by_rule.entry(&r.rule_id).or_default().push(r.clone());
    }

    let mut trends = TrendBoxes::default();
    let mut best_rules = Vec::new();
    for (rule_id, evals) in &by_rule {
        let Ok(trend) = trend_classify(rule_id, evals) else {
            continue;
        };
        match trend.classification {
            TrendClass::Acceptable => trends.acceptable += 1,
            TrendClass::Potential => trends.potential += 1,
            TrendClass::NonAcceptable => trends.non_acceptable += 1,
        }
        if trend.classification == TrendClass::Acceptable {
            let rule = eb.rule(rule_id);
            best_rules.push(BestRule {
                signature: trend.signature,
                rule_id: (*rule_id).clone(),
                assumption_id: rule
                    .map(|r| r.assumption_id.clone())
                    .unwrap_or_else(|| AssumptionId::new("")),
                label: rule.map(|r| r.label()).unwrap_or_default(),
                mean_effort: evals.iter().map(|e| e.effort_fraction).sum::<f64>() / evals.len() as f64,
            });
        }
    }
    best_rules.sort_by(|a, b| {
        a.signature
            .cmp(&b.signature)
            .then_with(|| a.mean_effort.total_cmp(&b.mean_effort))
            .then_with(|| a.rule_id.cmp(&b.rule_id))
    });

    let mut curve_points: BTreeMap<(AssumptionId, u32, RunId), Vec<(u32, f64)>> = BTreeMap::new();
    for entry in &eb.log {
        let r = &entry.result;
        if let Some(n) = eb.rule(&r.rule_id).and_then(|rule| rule.form.top_n()) {
            curve_points
                .entry((entry.assumption_id.clone(), r.run_order, r.run_id.clone()))
                .or_default()
                .push((n, r.effectiveness));
        }
    }
    let curves = curve_points
        .into_iter()
        .map(|((assumption_id, _, run_id), mut points)| {
            points.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.total_cmp(&b.1)));
            Curve {
                assumption_id,
                run_id,
                points,
            }
        })
        .collect();

    let significance = eb
        .assumptions
        .iter()
        .filter(|a| !a.history.is_empty())
        .map(|a| SignificanceRow {
            assumption_id: a.id.clone(),
            level: a.significance_level,
            runs: a.history.len(),
        })
        .collect();

    ReportBundle {
        context_name: eb.context.context_name.clone(),
        runs: runs.into_values().collect(),
        trends,
        curves,
        best_rules,
        significance,
    }
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

pub fn render_markdown(r: &ReportBundle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Selection rule report: {}\n", r.context_name);

    out.push_str(
        "## Categories per run\n\n| run | A | B | C | D | total | degenerate |\n|---|---|---|---|---|---|---|\n",
    );
    for s in &r.runs {
        let [a, b, c, d] = s.counts;
        let _ = writeln!(
            out,
            "| {} | {a} | {b} | {c} | {d} | {} | {} |",
            s.run_id,
            s.total(),
            s.degenerate
        );
    }

    let t = &r.trends;
    out.push_str("\n## Trend\n\n| acceptable | potential | non_acceptable | total |\n|---|---|---|---|\n");
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} |",
        t.acceptable,
        t.potential,
        t.non_acceptable,
        t.total()
    );

    if !r.curves.is_empty() {
        out.push_str("\n## Effectiveness by N\n\n| assumption | run | N | effectiveness |\n|---|---|---|---|\n");
        for c in &r.curves {
            for (n, e) in &c.points {
                let _ = writeln!(out, "| {} | {} | {n} | {} |", c.assumption_id, c.run_id, pct(*e));
            }
        }
    }

    out.push_str("\n## Rules effective in every run\n\n");
    if r.best_rules.is_empty() {
        out.push_str("none\n");
    } else {
        out.push_str("| signature | rule | assumption | mean effort | criteria |\n|---|---|---|---|---|\n");
        for b in &r.best_rules {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                b.signature,
                b.rule_id,
                b.assumption_id,
                pct(b.mean_effort),
                b.label.replace('|', "\\|")
            );
        }
    }

    out.push_str("\n## Significance\n\n| assumption | level | runs |\n|---|---|---|\n");
    for s in &r.significance {
        let _ = writeln!(out, "| {} | {} | {} |", s.assumption_id, s.level, s.runs);
    }
    out
}

/// Long-format CSV: `section,subject,run_id,key,value`.
pub fn render_csv(r: &ReportBundle) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |fields: [&str; 5]| w.write_record(fields).expect("writing to memory");
    row(["section", "subject", "run_id", "key", "value"]);
    for s in &r.runs {
        for (c, n) in Category::ALL.iter().zip(s.counts) {
            row([
                "categories",
                "",
                s.run_id.as_str(),
                &c.letter().to_string(),
                &n.to_string(),
            ]);
        }
        row([
            "categories",
            "",
            s.run_id.as_str(),
            "degenerate",
            &s.degenerate.to_string(),
        ]);
    }
    let t = &r.trends;
    for (k, v) in [
        ("acceptable", t.acceptable),
        ("potential", t.potential),
        ("non_acceptable", t.non_acceptable),
    ] {
        row(["trend", "", "", k, &v.to_string()]);
    }
    for c in &r.curves {
        for (n, e) in &c.points {
            row([
                "curve",
                c.assumption_id.as_str(),
                c.run_id.as_str(),
                &n.to_string(),
                &format!("{e:.6}"),
            ]);
        }
    }
    for b in &r.best_rules {
        row(["best_rule", b.rule_id.as_str(), "", "signature", &b.signature]);
        row([
            "best_rule",
            b.rule_id.as_str(),
            "",
            "mean_effort",
            &format!("{:.6}", b.mean_effort),
        ]);
    }
    for s in &r.significance {
        row([
            "significance",
            s.assumption_id.as_str(),
            "",
            "level",
            &s.level.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}
