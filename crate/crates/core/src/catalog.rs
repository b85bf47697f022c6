//! Rule catalogs and the end-to-end analysis producing a threat report.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformance::{unheld_assets, validate_diagram};
use crate::dsl::{parse_query, ParseError, Span};
use crate::eval::{evaluate_query, MatchTuple};
use crate::flows::Uniqueness;
use crate::io::parse_catalog_document;
use crate::model::{ContentSpecification, Diagram};
use crate::rule_check::check_query_full;
use crate::violation::{Subject, Violation};

/// Lowest and highest allowed impact and likelihood.
pub const SCORE_RANGE: std::ops::RangeInclusive<i64> = 1..=5;

/// One anti-pattern with its threat metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub threat_type: String,
    pub impact: i64,
    pub likelihood: i64,
    /// Rule text in the anti-pattern language.
    pub pattern: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("malformed catalog: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("rule id `{0}` is used more than once")]
    DuplicateRuleId(String),
    #[error("rule `{rule}`: {field} {value} is outside 1..=5")]
    RangeError {
        rule: String,
        field: &'static str,
        value: i64,
    },
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::Syntax(_) => "SYNTAX_ERROR",
            CatalogError::DuplicateRuleId(_) => "DUPLICATE_RULE_ID",
            CatalogError::RangeError { .. } => "RANGE_ERROR",
        }
    }
}

/// Parses a catalog and checks ids and score ranges. Rule texts are parsed
/// later, by [`analyze`], so one bad rule does not reject the catalog.
pub fn load_catalog(text: &str) -> Result<Vec<Rule>, CatalogError> {
    let rules = parse_catalog_document(text)?.rules;
    let mut seen = BTreeSet::new();
    for rule in &rules {
        if !seen.insert(rule.id.as_str()) {
            return Err(CatalogError::DuplicateRuleId(rule.id.clone()));
        }
        for (field, value) in [("impact", rule.impact), ("likelihood", rule.likelihood)] {
            if !SCORE_RANGE.contains(&value) {
                return Err(CatalogError::RangeError {
                    rule: rule.id.clone(),
                    field,
                    value,
                });
            }
        }
    }
    Ok(rules)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub uniqueness: Uniqueness,
    /// Worker threads for rule-level parallelism; `None` uses the global
    /// pool. The report does not depend on this.
    pub jobs: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("the model does not conform to the specification ({} violation(s))", .0.len())]
    ModelNotConforming(Vec<Violation>),
    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleStatus {
    Matched,
    NotMatched,
    RuleInvalid,
}

impl RuleStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleStatus::Matched => "matched",
            RuleStatus::NotMatched => "not_matched",
            RuleStatus::RuleInvalid => "rule_invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleReport {
    pub rule_id: String,
    pub title: String,
    pub threat_type: String,
    pub impact: i64,
    pub likelihood: i64,
    /// impact × likelihood; a ranking aid only.
    pub risk: i64,
    pub status: RuleStatus,
    pub matches: Vec<MatchTuple>,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub flow_uniqueness: Uniqueness,
    /// Input name to content digest; filled in by the caller.
    pub inputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreatReport {
    pub metadata: ReportMetadata,
    /// Non-fatal findings about the model, such as unheld assets.
    pub model_warnings: Vec<Violation>,
    /// One entry per rule, sorted by rule id.
    pub rules: Vec<RuleReport>,
}

impl ThreatReport {
    pub fn matched(&self) -> impl Iterator<Item = &RuleReport> {
        self.rules
            .iter()
            .filter(|r| r.status == RuleStatus::Matched)
    }
}

/// Converts a parse error into a finding on the rule text.
pub fn parse_violation(e: &ParseError) -> Violation {
    Violation::error(
        e.code,
        Subject::rule(Span::new(e.offset, e.offset)),
        "syntax",
        e.to_string(),
    )
}

/// Parses, checks and evaluates every rule against a conforming diagram.
pub fn analyze(
    diagram: &Diagram,
    spec: &ContentSpecification,
    rules: &[Rule],
    options: &AnalyzeOptions,
) -> Result<ThreatReport, AnalyzeError> {
    let violations = validate_diagram(diagram, spec);
    if !violations.is_empty() {
        return Err(AnalyzeError::ModelNotConforming(violations));
    }
    let mut order: Vec<&Rule> = rules.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let run = || -> Vec<RuleReport> {
        order
            .par_iter()
            .map(|rule| analyze_rule(diagram, spec, rule, options.uniqueness))
            .collect()
    };
    let entries = match options.jobs {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| AnalyzeError::ThreadPool(e.to_string()))?
            .install(run),
    };
    Ok(ThreatReport {
        metadata: ReportMetadata {
            tool_version: crate::VERSION.to_owned(),
            flow_uniqueness: options.uniqueness,
            inputs: BTreeMap::new(),
        },
        model_warnings: unheld_assets(diagram),
        rules: entries,
    })
}

fn analyze_rule(
    diagram: &Diagram,
    spec: &ContentSpecification,
    rule: &Rule,
    mode: Uniqueness,
) -> RuleReport {
    let mut entry = RuleReport {
        rule_id: rule.id.clone(),
        title: rule.title.clone(),
        threat_type: rule.threat_type.clone(),
        impact: rule.impact,
        likelihood: rule.likelihood,
        risk: rule.impact * rule.likelihood,
        status: RuleStatus::RuleInvalid,
        matches: Vec::new(),
        violations: Vec::new(),
        warnings: Vec::new(),
    };
    let query = match parse_query(&rule.pattern) {
        Ok(q) => q,
        Err(e) => {
            entry.violations.push(parse_violation(&e));
            return entry;
        }
    };
    let check = check_query_full(&query, spec);
    entry.warnings = check.warnings;
    if !check.violations.is_empty() {
        entry.violations = check.violations;
        return entry;
    }
    entry.matches = evaluate_query(&query, diagram, spec, mode)
        .into_iter()
        .collect();
    entry.status = if entry.matches.is_empty() {
        RuleStatus::NotMatched
    } else {
        RuleStatus::Matched
    };
    entry
}
