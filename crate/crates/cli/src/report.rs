//! Analysis reports: a machine-readable document plus a human rendering
//! that lays systems out as a context-by-content probability matrix.
//!
//! Machine output is canonical JSON (sorted maps, fractions in lowest
//! terms, no timestamps), so identical inputs and flags always produce
//! byte-identical reports.

use std::collections::BTreeMap;

use cbd_core::coupling::Coupling;
use cbd_core::cyclic::CriterionReport;
use cbd_core::model::{direct_influences, System, Verdict};
use cbd_core::rational::format_rational;
use cbd_core::reduce::{ReductionTrace, StepKind};
use serde::{Deserialize, Serialize};

use crate::format::SystemDocument;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfluenceEntry {
    pub content: String,
    pub context_a: String,
    pub context_b: String,
    pub distance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionEntry {
    pub context: String,
    pub probability: String,
}

/// One atom of a witness coupling: its probability and the outcome of
/// every variable, keyed `content@context`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessAtom {
    pub probability: String,
    pub values: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionDocument {
    pub dropped_variables: usize,
    pub dropped_contexts: usize,
    pub variables_after: usize,
    pub contexts_after: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormDocument {
    pub a: Vec<String>,
    pub b: String,
    pub max_a: String,
    pub noncontextual: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub samples: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<String>,
    pub grid_points: usize,
    pub noncontextual: usize,
    pub contextual: usize,
    pub lp_checked: usize,
    pub lp_agreements: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// The single machine-output shape shared by every subcommand; fields not
/// meaningful for a command are omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_expectations: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistently_connected: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_influences: Option<Vec<InfluenceEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_probabilities: Option<Vec<DetectionEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessAtom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headline: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDocument>,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        ReportDocument { command: command.to_string(), ..Default::default() }
    }
}

pub fn verdict_string(contextual: bool) -> String {
    if contextual { "contextual" } else { "noncontextual" }.to_string()
}

pub fn influence_entries(system: &System) -> Vec<InfluenceEntry> {
    direct_influences(system)
        .iter()
        .map(|((content, a, b), distance)| InfluenceEntry {
            content: content.name().to_string(),
            context_a: a.name().to_string(),
            context_b: b.name().to_string(),
            distance: format_rational(distance),
        })
        .collect()
}

pub fn detection_entries(system: &System) -> Vec<DetectionEntry> {
    system
        .bunches
        .iter()
        .map(|bunch| DetectionEntry {
            context: bunch.context.name().to_string(),
            probability: format_rational(&bunch.detection_probability()),
        })
        .collect()
}

pub fn witness_atoms(coupling: &Coupling) -> Vec<WitnessAtom> {
    coupling
        .atoms()
        .iter()
        .map(|(assignment, p)| WitnessAtom {
            probability: format_rational(p),
            values: coupling
                .variables()
                .iter()
                .zip(assignment)
                .map(|(var, outcome)| (var.to_string(), outcome.symbol().to_string()))
                .collect(),
        })
        .collect()
}

pub fn step_string(kind: &StepKind) -> String {
    match kind {
        StepKind::DropDeterministicVariable(var) => {
            format!("drop deterministic variable {var}")
        }
        StepKind::DropSmallContext(context) => format!("drop context {context}"),
    }
}

pub fn reduction_document(
    trace: &ReductionTrace,
    reduced: &System,
    include_steps: bool,
) -> ReductionDocument {
    let dropped_variables = trace
        .steps
        .iter()
        .filter(|s| matches!(s.kind, StepKind::DropDeterministicVariable(_)))
        .count();
    ReductionDocument {
        dropped_variables,
        dropped_contexts: trace.len() - dropped_variables,
        variables_after: reduced.variable_count(),
        contexts_after: reduced.bunches.len(),
        steps: include_steps
            .then(|| trace.steps.iter().map(|s| step_string(&s.kind)).collect()),
    }
}

/// Fills the analysis fields shared by `analyze` and `demo`: verdict,
/// method, criterion sides, influences, detection probabilities, witness.
pub fn fill_analysis(
    report: &mut ReportDocument,
    system: &System,
    verdict: &Verdict,
    criterion: Option<&CriterionReport>,
    include_witness: bool,
) {
    report.verdict = Some(verdict_string(verdict.contextual));
    report.method = Some(verdict.method.to_string());
    report.lhs = verdict.lhs.as_ref().map(format_rational);
    report.rhs = verdict.rhs.as_ref().map(format_rational);
    report.product_expectations = criterion
        .map(|c| c.product_expectations.iter().map(format_rational).collect());
    let influences = influence_entries(system);
    report.consistently_connected = Some(influences.iter().all(|e| e.distance == "0"));
    report.direct_influences = Some(influences);
    report.detection_probabilities = Some(detection_entries(system));
    if include_witness {
        report.witness = verdict.witness.as_ref().map(witness_atoms);
    }
}

/// Canonical machine rendering: pretty JSON plus a trailing newline.
pub fn render_machine(report: &ReportDocument) -> String {
    let mut text =
        serde_json::to_string_pretty(report).expect("report serialization is total");
    text.push('\n');
    text
}

/// Lays the system out with contexts as rows and contents as columns; each
/// cell holds the variable's P(+1), or a dot where a content is not
/// measured. A final column gives each context's detection probability
/// (the chance that at least one variable equals +1).
pub fn render_system_matrix(system: &System) -> String {
    let mut header: Vec<String> = vec![String::new()];
    header.extend(system.contents.iter().map(|q| q.name().to_string()));
    header.push("P(detect)".to_string());

    let mut rows: Vec<Vec<String>> = vec![header];
    for bunch in &system.bunches {
        let mut row = vec![bunch.context.name().to_string()];
        for content in &system.contents {
            if bunch.contents.contains(content) {
                let marginal =
                    bunch.single_marginal(content).expect("content is in the bunch");
                row.push(format_rational(&marginal.plus));
            } else {
                row.push(".".to_string());
            }
        }
        row.push(format_rational(&bunch.detection_probability()));
        rows.push(row);
    }

    let columns = rows[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::from("P(+1) by context (rows) and content (columns):\n");
    for row in &rows {
        let line: Vec<String> =
            row.iter().zip(&widths).map(|(cell, w)| format!("{cell:>w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Human rendering of an analysis: matrix, reduction summary, method and
/// verdict, then influence and witness detail.
pub fn render_human_analysis(
    system: &System,
    report: &ReportDocument,
    verdict: &Verdict,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "system: {} contents, {} contexts, {} variables\n",
        system.contents.len(),
        system.bunches.len(),
        system.variable_count()
    ));
    out.push_str(&render_system_matrix(system));

    if let Some(reduction) = &report.reduction {
        out.push_str(&format!(
            "reduction: dropped {} deterministic variables and {} small contexts, leaving {} variables in {} contexts\n",
            reduction.dropped_variables,
            reduction.dropped_contexts,
            reduction.variables_after,
            reduction.contexts_after
        ));
        if let Some(steps) = &reduction.steps {
            for (i, step) in steps.iter().enumerate() {
                out.push_str(&format!("  step {}: {}\n", i + 1, step));
            }
        }
    }

    if let Some(method) = &report.method {
        out.push_str(&format!("method: {method}\n"));
    }
    if let Some(expectations) = &report.product_expectations {
        out.push_str(&format!("product expectations: {}\n", expectations.join(", ")));
    }
    if let (Some(lhs), Some(rhs)) = (&report.lhs, &report.rhs) {
        let relation = if verdict.contextual { ">" } else { "<=" };
        out.push_str(&format!("criterion: lhs = {lhs} {relation} rhs = {rhs}\n"));
    }
    match report.consistently_connected {
        Some(true) => out.push_str("consistently connected: yes\n"),
        Some(false) => {
            out.push_str("consistently connected: no; direct influences:\n");
            for entry in report.direct_influences.iter().flatten() {
                if entry.distance != "0" {
                    out.push_str(&format!(
                        "  {}: |{} - {}| = {}\n",
                        entry.content, entry.context_a, entry.context_b, entry.distance
                    ));
                }
            }
        }
        None => {}
    }
    if let Some(verdict_text) = &report.verdict {
        out.push_str(&format!("verdict: {}\n", verdict_text.to_uppercase()));
    }
    if let Some(witness) = &report.witness {
        out.push_str(&render_witness(witness));
    }
    out
}

fn render_witness(atoms: &[WitnessAtom]) -> String {
    let mut out = String::from("witness coupling (a joint distribution with multimaximal pair couplings):\n");
    let Some(first) = atoms.first() else {
        return out;
    };
    let variables: Vec<&String> = first.values.keys().collect();
    out.push_str(&format!("  variables: {}\n", variables.iter().map(|v| v.as_str()).collect::<Vec<_>>().join("  ")));
    for atom in atoms {
        let symbols: String = variables.iter().map(|v| atom.values[*v].as_str()).collect();
        out.push_str(&format!("  {}  {}\n", symbols, atom.probability));
    }
    out
}

pub fn render_closed_form(doc: &ClosedFormDocument) -> String {
    format!(
        "closed form: a = ({}), b = {}; max a = {} {} b -> {}\n",
        doc.a.join(", "),
        doc.b,
        doc.max_a,
        if doc.noncontextual { "<=" } else { ">" },
        if doc.noncontextual { "noncontextual" } else { "contextual" }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_system;

    fn two_context_system() -> System {
        parse_system(
            r#"{
  "contents": ["q1", "q2"],
  "contexts": [
    {"name": "c1", "contents": ["q1", "q2"],
     "table": {"++": "1/2", "--": "1/2"}},
    {"name": "c2", "contents": ["q2"], "table": {"+": "1/4", "-": "3/4"}}
  ]
}"#,
        )
        .unwrap()
    }

    #[test]
    fn matrix_lists_marginals_and_detection() {
        let rendered = render_system_matrix(&two_context_system());
        let lines: Vec<&str> = rendered.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].contains("q1") && lines[1].contains("P(detect)"));
        assert!(lines[2].starts_with("c1") || lines[2].contains("c1"));
        assert!(lines[2].contains("1/2"));
        assert!(lines[3].contains('.') && lines[3].contains("1/4"));
    }

    #[test]
    fn machine_rendering_is_byte_stable_and_round_trips() {
        let mut report = ReportDocument::new("analyze");
        report.verdict = Some("noncontextual".into());
        report.consistently_connected = Some(false);
        report.direct_influences = Some(influence_entries(&two_context_system()));
        let once = render_machine(&report);
        let twice = render_machine(&report);
        assert_eq!(once, twice);
        let reparsed: ReportDocument = serde_json::from_str(&once).unwrap();
        assert_eq!(reparsed, report);
    }

    #[test]
    fn influence_entries_cover_shared_contents_only() {
        let entries = influence_entries(&two_context_system());
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].content, "q2");
        // |P(c1: q2=+) - P(c2: q2=+)| = |1/2 - 1/4| contributes 2 * 1/4.
        assert_eq!(entries[0].distance, "1/2");
    }

    #[test]
    fn detection_entries_follow_context_order() {
        let entries = detection_entries(&two_context_system());
        assert_eq!(
            entries.iter().map(|e| e.context.as_str()).collect::<Vec<_>>(),
            ["c1", "c2"]
        );
        assert_eq!(entries[0].probability, "1/2");
        assert_eq!(entries[1].probability, "1/4");
    }
}
