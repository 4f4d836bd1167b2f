//! Systematic rule generation from assumption templates.
//!
//! A catalog lists assumption families. Each family crosses a set of
//! direction combinations (one direction per factor) with the selector
//! variants of every factor. Every direction combination becomes its own
//! assumption, identified as `<family>:<dir>+<dir>` (or just `<family>` when
//! the family has a single combination). Threshold families produce
//! conjunctive rules; top-N families produce one ranking rule per N, or a
//! union of rankings when they have several factors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::metrics::{
    CommentHandling, InspectionSelector, Measure, MetricSelector, ProductMetric, Scaling, SeverityFilter,
};

use super::{
    AssumptionId, AssumptionSpec, Direction, RuleForm, RuleId, RuleSet, SelectionRule, ThresholdCriterion,
    ThresholdSpec, TopN,
};

/// Catalogs shipped with the library, by name.
pub const BUILTIN_CATALOGS: &[(&str, &str)] = &[
    ("table1", include_str!("../../catalogs/table1.json")),
    ("casestudy2", include_str!("../../catalogs/casestudy2.json")),
];

pub fn builtin_catalog(name: &str) -> Option<AssumptionCatalog> {
    BUILTIN_CATALOGS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, json)| serde_json::from_str(json).expect("bundled catalog parses"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCatalog {
    pub name: String,
    pub families: Vec<AssumptionFamily>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionFamily {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub directions: Vec<Vec<Direction>>,
    pub factors: Vec<Factor>,
    #[serde(default)]
    pub form: FamilyForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Inspection(InspectionFactor),
    Product(Vec<ProductMetric>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionFactor {
    pub measures: Vec<Measure>,
    pub severities: Vec<SeverityFilter>,
    #[serde(default = "default_comments")]
    pub comments: Vec<CommentHandling>,
    #[serde(default = "default_scalings")]
    pub scalings: Vec<Scaling>,
}

fn default_comments() -> Vec<CommentHandling> {
    vec![CommentHandling::Exclude]
}

fn default_scalings() -> Vec<Scaling> {
    vec![Scaling::Raw]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyForm {
    Threshold(ThresholdSpec),
    TopN(Vec<u32>),
}

impl Default for FamilyForm {
    fn default() -> Self {
        FamilyForm::Threshold(ThresholdSpec::Mean)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog has no assumption families")]
    Empty,
    #[error("assumption family with empty id")]
    EmptyFamilyId,
    #[error("duplicate assumption family id `{0}`")]
    DuplicateFamily(String),
    #[error("duplicate assumption id `{0}`")]
    DuplicateAssumption(String),
    #[error("family `{0}` lists no direction combinations")]
    NoDirections(String),
    #[error("family `{family}`: direction combination has {found} entries, expected one per factor ({expected})")]
    DirectionArity {
        family: String,
        expected: usize,
        found: usize,
    },
    #[error("family `{0}` lists no factors")]
    NoFactors(String),
    #[error("family `{0}` has a factor with an empty value set")]
    EmptyFactor(String),
    #[error("family `{0}` lists no top-N values")]
    NoTopN(String),
    #[error("family `{family}`: {reason}")]
    InvalidRule { family: String, reason: String },
    #[error("rule id collision on {0}")]
    IdCollision(RuleId),
    #[error("catalog is not valid JSON: {0}")]
    Json(String),
}

impl AssumptionCatalog {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::Json(e.to_string()))
    }
}

impl Factor {
    fn selectors(&self) -> Vec<MetricSelector> {
        match self {
            Factor::Product(metrics) => metrics.iter().map(|m| MetricSelector::Product(*m)).collect(),
            Factor::Inspection(f) => {
                let mut out = Vec::new();
                for &measure in &f.measures {
                    for &severity in &f.severities {
                        for &comments in &f.comments {
                            for &scaling in &f.scalings {
                                out.push(MetricSelector::Inspection(InspectionSelector {
                                    measure,
                                    severity,
                                    comments,
                                    scaling,
                                }));
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

fn cartesian(sets: &[Vec<MetricSelector>]) -> Vec<Vec<MetricSelector>> {
    sets.iter().fold(vec![Vec::new()], |acc, set| {
        acc.iter()
            .flat_map(|prefix| {
                set.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.push(*s);
                    next
                })
            })
            .collect()
    })
}

fn assumption_id(family: &AssumptionFamily, combo: &[Direction]) -> AssumptionId {
    if family.directions.len() == 1 {
        AssumptionId::new(family.id.clone())
    } else {
        let dirs: Vec<&str> = combo.iter().map(|d| d.as_str()).collect();
        AssumptionId::new(format!("{}:{}", family.id, dirs.join("+")))
    }
}

/// Expand a catalog into its full, deduplicated rule set.
///
/// Assumptions appear in catalog order; rules within an assumption are
/// sorted by their form.
pub fn generate_rules(catalog: &AssumptionCatalog) -> Result<RuleSet, CatalogError> {
    if catalog.families.is_empty() {
        return Err(CatalogError::Empty);
    }

    let mut family_ids = BTreeSet::new();
    let mut assumption_ids = BTreeSet::new();
    let mut assumptions = Vec::new();
    let mut by_id: BTreeMap<RuleId, (AssumptionId, RuleForm)> = BTreeMap::new();
    let mut rules = Vec::new();

    for family in &catalog.families {
        if family.id.is_empty() {
            return Err(CatalogError::EmptyFamilyId);
        }
        if !family_ids.insert(family.id.as_str()) {
            return Err(CatalogError::DuplicateFamily(family.id.clone()));
        }
        if family.directions.is_empty() {
            return Err(CatalogError::NoDirections(family.id.clone()));
        }
        if family.factors.is_empty() {
            return Err(CatalogError::NoFactors(family.id.clone()));
        }
        let selector_sets: Vec<Vec<MetricSelector>> = family.factors.iter().map(Factor::selectors).collect();
        if selector_sets.iter().any(Vec::is_empty) {
            return Err(CatalogError::EmptyFactor(family.id.clone()));
        }
        if let FamilyForm::TopN(ns) = &family.form {
            if ns.is_empty() {
                return Err(CatalogError::NoTopN(family.id.clone()));
            }
        }
        let combos = cartesian(&selector_sets);

        for directions in &family.directions {
            if directions.len() != family.factors.len() {
                return Err(CatalogError::DirectionArity {
                    family: family.id.clone(),
                    expected: family.factors.len(),
                    found: directions.len(),
                });
            }
            let aid = assumption_id(family, directions);
            if !assumption_ids.insert(aid.clone()) {
                return Err(CatalogError::DuplicateAssumption(aid.to_string()));
            }
            let dir_words: Vec<&str> = directions.iter().map(|d| d.as_str()).collect();
            assumptions.push(AssumptionSpec {
                id: aid.clone(),
                family: family.id.clone(),
                description: if family.description.is_empty() {
                    dir_words.join(" + ")
                } else {
                    format!("{} [{}]", family.description, dir_words.join(" + "))
                },
            });

            let mut forms = BTreeSet::new();
            for selectors in &combos {
                match &family.form {
                    FamilyForm::Threshold(spec) => {
                        let criteria = selectors
                            .iter()
                            .zip(directions)
                            .map(|(s, d)| ThresholdCriterion {
                                selector: *s,
                                direction: *d,
                                threshold: *spec,
                            })
                            .collect();
                        forms.insert(RuleForm::Conjunctive(criteria));
                    }
                    FamilyForm::TopN(ns) => {
                        for &n in ns {
                            let parts: Vec<TopN> = selectors
                                .iter()
                                .zip(directions)
                                .map(|(s, d)| TopN {
                                    selector: *s,
                                    direction: *d,
                                    n,
                                })
                                .collect();
                            forms.insert(if parts.len() == 1 {
                                RuleForm::TopN(parts[0])
                            } else {
                                RuleForm::Union(parts)
                            });
                        }
                    }
                }
            }

            for form in forms {
                form.validate().map_err(|e| CatalogError::InvalidRule {
                    family: family.id.clone(),
                    reason: e.to_string(),
                })?;
                let rule = SelectionRule::new(aid.clone(), form);
                match by_id.get(&rule.id) {
                    Some((a, f)) if *a == rule.assumption_id && *f == rule.form => continue,
                    Some(_) => return Err(CatalogError::IdCollision(rule.id)),
                    None => {
                        by_id.insert(rule.id.clone(), (rule.assumption_id.clone(), rule.form.clone()));
                        rules.push(rule);
                    }
                }
            }
        }
    }

    Ok(RuleSet {
        catalog: catalog.name.clone(),
        assumptions,
        rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_by_family(set: &RuleSet) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for rule in &set.rules {
            let family = set
                .assumptions
                .iter()
                .find(|a| a.id == rule.assumption_id)
                .unwrap()
                .family
                .clone();
            match out.last_mut() {
                Some((f, n)) if *f == family => *n += 1,
                _ => out.push((family, 1)),
            }
        }
        out
    }

    #[test]
    fn table1_yields_118_with_family_breakdown() {
        let set = generate_rules(&builtin_catalog("table1").unwrap()).unwrap();
        assert_eq!(set.len(), 118);
        let counts: Vec<usize> = count_by_family(&set).into_iter().map(|(_, n)| n).collect();
        assert_eq!(counts, vec![16, 2, 2, 2, 32, 32, 32]);
    }

    #[test]
    fn casestudy2_yields_40() {
        let set = generate_rules(&builtin_catalog("casestudy2").unwrap()).unwrap();
        assert_eq!(set.len(), 40);
        assert_eq!(set.assumptions.len(), 10);
        for a in &set.assumptions {
            let ns: Vec<u32> = set
                .rules
                .iter()
                .filter(|r| r.assumption_id == a.id)
                .filter_map(|r| r.form.top_n())
                .collect();
            assert_eq!(ns, vec![3, 5, 8, 10], "assumption {}", a.id);
        }
    }

    #[test]
    fn singleton_catalog_gives_one_rule() {
        let cat = AssumptionCatalog {
            name: "one".into(),
            families: vec![AssumptionFamily {
                id: "X".into(),
                description: String::new(),
                directions: vec![vec![Direction::Large]],
                factors: vec![Factor::Product(vec![ProductMetric::Cyclomatic])],
                form: FamilyForm::default(),
            }],
        };
        let set = generate_rules(&cat).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.assumptions[0].id.as_str(), "X");
    }

    #[test]
    fn catalog_errors() {
        let empty = AssumptionCatalog {
            name: "e".into(),
            families: vec![],
        };
        assert_eq!(generate_rules(&empty), Err(CatalogError::Empty));

        let mut cat = builtin_catalog("table1").unwrap();
        let dup = cat.families[0].clone();
        cat.families.push(dup);
        assert!(matches!(generate_rules(&cat), Err(CatalogError::DuplicateFamily(_))));

        let mut cat = builtin_catalog("table1").unwrap();
        cat.families[0].directions = vec![vec![Direction::Large, Direction::Small]];
        assert!(matches!(generate_rules(&cat), Err(CatalogError::DirectionArity { .. })));

        // "A" with one combination collides with an explicitly named "A" elsewhere.
        let mut cat = builtin_catalog("table1").unwrap();
        cat.families[1].id = "I-II:large".into();
        cat.families[1].directions.truncate(1);
        assert!(matches!(
            generate_rules(&cat),
            Err(CatalogError::DuplicateAssumption(_))
        ));
    }

    #[test]
    fn deterministic_and_injective() {
        let cat = builtin_catalog("table1").unwrap();
        let a = generate_rules(&cat).unwrap();
        let b = generate_rules(&cat).unwrap();
        assert_eq!(a, b);
        let ids: BTreeSet<_> = a.rules.iter().map(|r| &r.id).collect();
        assert_eq!(ids.len(), a.len());
        for (i, r) in a.rules.iter().enumerate() {
            for s in &a.rules[i + 1..] {
                assert!(r.assumption_id != s.assumption_id || r.form != s.form);
            }
        }
    }

    #[test]
    fn duplicate_factor_values_are_deduplicated() {
        let cat = AssumptionCatalog {
            name: "dups".into(),
            families: vec![AssumptionFamily {
                id: "X".into(),
                description: String::new(),
                directions: vec![vec![Direction::Large]],
                factors: vec![Factor::Product(vec![
                    ProductMetric::Cyclomatic,
                    ProductMetric::Cyclomatic,
                ])],
                form: FamilyForm::TopN(vec![3, 3, 5]),
            }],
        };
        assert_eq!(generate_rules(&cat).unwrap().len(), 2);
    }

    #[test]
    fn rule_set_json_round_trip() {
        let set = generate_rules(&builtin_catalog("casestudy2").unwrap()).unwrap();
        let back = RuleSet::from_json(&set.to_json()).unwrap();
        assert_eq!(back, set);
    }
}
