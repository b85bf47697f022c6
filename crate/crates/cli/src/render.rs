//! Human-readable output.

use std::fmt::Write;

use adfd_core::catalog::{parse_violation, Rule, RuleReport, RuleStatus};
use adfd_core::{
    check_query_full, parse_query, Category, ContentSpecification, Diagram, MatchTuple,
    ThreatReport, Violation,
};
use serde::Serialize;

/// Static check outcome of one catalog rule.
#[derive(Debug, Clone, Serialize)]
pub struct CheckedRule {
    pub rule_id: String,
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl CheckedRule {
    pub fn check(rule: &Rule, spec: &ContentSpecification) -> Self {
        let (violations, warnings) = match parse_query(&rule.pattern) {
            Err(e) => (vec![parse_violation(&e)], Vec::new()),
            Ok(q) => {
                let r = check_query_full(&q, spec);
                (r.violations, r.warnings)
            }
        };
        CheckedRule {
            rule_id: rule.id.clone(),
            passed: violations.is_empty(),
            violations,
            warnings,
        }
    }
}

pub fn spec_summary(spec: &ContentSpecification) -> String {
    let counts: Vec<String> = Category::ALL
        .iter()
        .map(|&c| format!("{} {c} types", spec.types(c).count()))
        .collect();
    format!(
        "specification OK: {}, {} property keys\n",
        counts.join(", "),
        spec.keys().len()
    )
}

fn findings(out: &mut String, label: &str, vs: &[Violation]) {
    for v in vs {
        let _ = writeln!(out, "{label}: {v}");
    }
}

pub fn model_findings(d: &Diagram, violations: &[Violation], warnings: &[Violation]) -> String {
    let mut out = String::new();
    findings(&mut out, "error", violations);
    findings(&mut out, "warning", warnings);
    let size: Vec<String> = Category::ALL
        .iter()
        .map(|&c| format!("{} {c}s", d.count(c)))
        .collect();
    if violations.is_empty() {
        let _ = writeln!(out, "model conforms: {}", size.join(", "));
    } else {
        let _ = writeln!(out, "model does not conform: {} violation(s)", violations.len());
    }
    out
}

pub fn check_results(rules: &[CheckedRule]) -> String {
    let mut out = String::new();
    for r in rules {
        let _ = writeln!(out, "{} {}", if r.passed { "PASS" } else { "FAIL" }, r.rule_id);
        for v in &r.violations {
            let _ = writeln!(out, "  error: {v}");
        }
        for v in &r.warnings {
            let _ = writeln!(out, "  warning: {v}");
        }
    }
    let failed = rules.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} rule(s) checked, {failed} failed", rules.len());
    out
}

/// One match as `focus: {affected, ...}`; `_` stands for a combined match.
pub fn match_line(t: &MatchTuple) -> String {
    let focus = t
        .focus
        .as_ref()
        .map_or_else(|| "_".to_owned(), ToString::to_string);
    let affected: Vec<String> = t.affected.iter().map(ToString::to_string).collect();
    format!("{focus}: {{{}}}", affected.join(", "))
}

fn rule_entry(out: &mut String, r: &RuleReport) {
    let _ = writeln!(
        out,
        "{} {} [{}] risk {} (impact {}, likelihood {}): {}",
        r.rule_id,
        r.title,
        r.threat_type,
        r.risk,
        r.impact,
        r.likelihood,
        r.status.as_str()
    );
    for t in &r.matches {
        let _ = writeln!(out, "  match {}", match_line(t));
    }
    for v in &r.violations {
        let _ = writeln!(out, "  error: {v}");
    }
    for v in &r.warnings {
        let _ = writeln!(out, "  warning: {v}");
    }
}

pub fn report(report: &ThreatReport) -> String {
    let mut out = String::new();
    let m = &report.metadata;
    let _ = writeln!(
        out,
        "adfd {} threat report, flow uniqueness: {}",
        m.tool_version, m.flow_uniqueness
    );
    for (name, digest) in &m.inputs {
        let _ = writeln!(out, "input {name} {digest}");
    }
    findings(&mut out, "model warning", &report.model_warnings);
    for r in &report.rules {
        rule_entry(&mut out, r);
    }
    let count = |s| report.rules.iter().filter(|r| r.status == s).count();
    let _ = writeln!(
        out,
        "{} rule(s): {} matched, {} not matched, {} invalid",
        report.rules.len(),
        count(RuleStatus::Matched),
        count(RuleStatus::NotMatched),
        count(RuleStatus::RuleInvalid)
    );
    out
}
