//! Serializable report documents and plain-text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::format::BoxFile;
use crate::functional::BoundTriple;
use crate::scalar::Scalar;
use crate::scenario::{BranchRecord, CrossCheck, Evaluation, FunctionalName, ScenarioReport};
use crate::table::{word_string, BoxTable};

pub const DECIMAL_DIGITS: u32 = 12;

/// Exact value with a display-only decimal annotation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotated {
    pub exact: Scalar,
    pub decimal: String,
}

impl Annotated {
    pub fn new(exact: &Scalar) -> Self {
        Annotated {
            exact: exact.clone(),
            decimal: exact.to_decimal(DECIMAL_DIGITS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationEntry {
    pub functional: FunctionalName,
    pub value: Annotated,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

impl EvaluationEntry {
    fn from_evaluation(e: &Evaluation) -> Self {
        let verdict = match (e.exceeds_local, e.exceeds_quantum) {
            (Some(_), Some(true)) => Some("exceeds quantum bound".to_string()),
            (Some(true), _) => Some("exceeds local bound, within quantum bound".to_string()),
            (Some(false), _) => Some("within local bound".to_string()),
            _ => None,
        };
        EvaluationEntry {
            functional: e.functional,
            value: Annotated::new(&e.value),
            bounds: e.bounds.clone(),
            verdict,
        }
    }
}

fn evaluation_entries(evals: &[Evaluation]) -> Vec<EvaluationEntry> {
    evals.iter().map(EvaluationEntry::from_evaluation).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub outcomes: Vec<u8>,
    pub probability: Annotated,
    pub selected: bool,
    pub allowed: Vec<Option<bool>>,
    #[serde(rename = "box")]
    pub table: Option<BoxFile>,
    pub evaluations: Vec<EvaluationEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionedEntry {
    pub condition: Vec<Option<u8>>,
    pub probability: Annotated,
    #[serde(rename = "box")]
    pub table: Option<BoxFile>,
    pub evaluations: Vec<EvaluationEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupEntry {
    pub label: String,
    pub branches: Vec<Vec<u8>>,
    pub probability: Annotated,
    #[serde(rename = "box")]
    pub table: Option<BoxFile>,
}

/// Machine-readable form of a [`ScenarioReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub scenario: String,
    pub parties: Vec<String>,
    pub branches: Vec<BranchEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioned: Option<ConditionedEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupEntry>,
    pub checks: Vec<CrossCheck>,
}

impl ReportDocument {
    pub fn from_report(report: &ScenarioReport) -> Self {
        let boxed = |t: &Option<BoxTable>| t.as_ref().map(BoxFile::from_table);
        ReportDocument {
            scenario: report.name.clone(),
            parties: report.parties.clone(),
            branches: report
                .branches
                .iter()
                .map(|b: &BranchRecord| BranchEntry {
                    outcomes: b.outcomes.clone(),
                    probability: Annotated::new(&b.probability),
                    selected: b.selected,
                    allowed: b.allowed.clone(),
                    table: boxed(&b.table),
                    evaluations: evaluation_entries(&b.evaluations),
                })
                .collect(),
            conditioned: report.conditioned.as_ref().map(|c| ConditionedEntry {
                condition: c.condition.clone(),
                probability: Annotated::new(&c.probability),
                table: boxed(&c.table),
                evaluations: evaluation_entries(&c.evaluations),
            }),
            groups: report
                .groups
                .iter()
                .map(|g| GroupEntry {
                    label: g.label.clone(),
                    branches: g.branches.clone(),
                    probability: Annotated::new(&g.probability),
                    table: boxed(&g.table),
                })
                .collect(),
            checks: report.checks.clone(),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn outcome_string(bits: &[u8]) -> String {
    if bits.is_empty() {
        "-".to_string()
    } else {
        bits.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

fn push_evaluations(out: &mut String, evals: &[EvaluationEntry], indent: &str) {
    for e in evals {
        let name = match e.functional {
            FunctionalName::Gsi => "GSI",
            FunctionalName::Ch => "CH",
        };
        let _ = write!(
            out,
            "{indent}{name} = {} (≈ {})",
            e.value.exact, e.value.decimal
        );
        if let Some(b) = &e.bounds {
            let _ = write!(
                out,
                "  bounds {} / {} / {}",
                b.local, b.quantum, b.algebraic
            );
        }
        if let Some(v) = &e.verdict {
            let _ = write!(out, "  [{v}]");
        }
        out.push('\n');
    }
}

/// Human-readable rendering of a report.
pub fn render_table(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", doc.scenario);
    let _ = writeln!(out, "parties:  {}", doc.parties.join(" "));
    out.push('\n');
    let _ = writeln!(
        out,
        "{:<10} {:<16} {:<16} {:<8} box",
        "outcomes", "probability", "decimal", "selected"
    );
    for b in &doc.branches {
        let _ = writeln!(
            out,
            "{:<10} {:<16} {:<16} {:<8} {}",
            outcome_string(&b.outcomes),
            b.probability.exact.to_string(),
            b.probability.decimal,
            if b.selected { "yes" } else { "no" },
            if b.table.is_some() {
                "present"
            } else {
                "empty"
            }
        );
        push_evaluations(&mut out, &b.evaluations, "           ");
    }
    if let Some(c) = &doc.conditioned {
        let cond: Vec<String> = c
            .condition
            .iter()
            .map(|b| b.map_or("*".to_string(), |b| b.to_string()))
            .collect();
        out.push('\n');
        let _ = writeln!(
            out,
            "conditioned on b' = {}: probability {} (≈ {})",
            cond.join(""),
            c.probability.exact,
            c.probability.decimal
        );
        push_evaluations(&mut out, &c.evaluations, "  ");
        if let Some(t) = &c.table {
            if let Ok(table) = t.to_quasi_table() {
                out.push_str(&render_box(&table));
            }
        }
    }
    if !doc.groups.is_empty() {
        out.push('\n');
        out.push_str("groups:\n");
        for g in &doc.groups {
            let _ = writeln!(
                out,
                "  {:<32} {:<10} {} branch(es)",
                g.label,
                g.probability.exact.to_string(),
                g.branches.len()
            );
        }
    }
    out.push('\n');
    out.push_str(&render_checks(&doc.checks));
    out
}

pub fn render_checks(checks: &[CrossCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(
            out,
            "{} {}\n       expected: {}\n       computed: {}",
            if c.pass { "[PASS]" } else { "[FAIL]" },
            c.name,
            c.expected,
            c.computed
        );
    }
    out
}

/// Inputs down the side, outputs across the top; zero entries print as `·`.
pub fn render_box(table: &BoxTable) -> String {
    let n = table.parties();
    let cells: Vec<String> = table
        .probs()
        .iter()
        .map(|p| {
            if p.is_zero() {
                "·".to_string()
            } else {
                p.to_string()
            }
        })
        .collect();
    let width = cells
        .iter()
        .map(|c| c.chars().count())
        .chain(std::iter::once(n))
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    let _ = write!(out, "{:>w$} |", "x \\ a", w = n.max(5));
    for a in 0..table.words() {
        let _ = write!(out, " {:>width$}", word_string(a, n));
    }
    out.push('\n');
    for x in 0..table.words() {
        let _ = write!(out, "{:>w$} |", word_string(x, n), w = n.max(5));
        for a in 0..table.words() {
            let _ = write!(out, " {:>width$}", cells[table.index(x, a)]);
        }
        out.push('\n');
    }
    out
}
