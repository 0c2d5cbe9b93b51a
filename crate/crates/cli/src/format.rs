//! The `.sys` document format: a JSON object describing a content-context
//! system with exact probabilities.
//!
//! ```json
//! {
//!   "contents": ["q1", "q2"],
//!   "contexts": [
//!     {"name": "c1", "contents": ["q1", "q2"],
//!      "table": {"++": "1/2", "--": "1/2"}}
//!   ]
//! }
//! ```
//!
//! Table keys are outcome strings over `+`/`-`, one symbol per content in
//! the context's own order; values are probability strings, either exact
//! fractions (`"97/2000"`) or terminating decimals (`"0.0485"`). Anything
//! that would lose exactness is rejected. Serialization is canonical:
//! fractions in lowest terms, zero entries dropped, two-space indentation,
//! so equal systems always produce byte-identical documents.

use std::collections::BTreeMap;

use cbd_core::model::{validate_system, Bunch, ContentId, ContextId, ModelError, System, Violation};
use cbd_core::rational::{format_rational, parse_rational, ParseRationalError};
use cbd_core::Outcome;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub contents: Vec<String>,
    pub contexts: Vec<ContextDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDocument {
    pub name: String,
    pub contents: Vec<String>,
    pub table: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    /// Structural JSON failure; the message carries line and column.
    #[error("document parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("context {context}, entry {key:?}: outcome strings use only '+' and '-'")]
    OutcomeString { context: String, key: String },
    #[error("context {context}, entry {key:?}: {source}")]
    Probability { context: String, key: String, source: ParseRationalError },
    #[error("{0}")]
    Table(#[from] ModelError),
    #[error("invalid system: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub fn parse_document(text: &str) -> Result<SystemDocument, FormatError> {
    Ok(serde_json::from_str(text)?)
}

/// Builds the system a document describes and checks every structural
/// invariant; all violations are reported together.
pub fn document_to_system(doc: &SystemDocument) -> Result<System, FormatError> {
    let contents: Vec<ContentId> = doc.contents.iter().map(ContentId::new).collect();
    let mut bunches = Vec::with_capacity(doc.contexts.len());
    for ctx in &doc.contexts {
        let mut table = BTreeMap::new();
        for (key, value) in &ctx.table {
            let assignment = key
                .chars()
                .map(Outcome::from_symbol)
                .collect::<Option<Vec<Outcome>>>()
                .ok_or_else(|| FormatError::OutcomeString {
                    context: ctx.name.clone(),
                    key: key.clone(),
                })?;
            let probability = parse_rational(value).map_err(|source| {
                FormatError::Probability { context: ctx.name.clone(), key: key.clone(), source }
            })?;
            table.insert(assignment, probability);
        }
        bunches.push(Bunch::new(
            ContextId::new(&ctx.name),
            ctx.contents.iter().map(ContentId::new).collect(),
            table,
        )?);
    }
    let system = System::new(contents, bunches);
    let violations = validate_system(&system);
    if !violations.is_empty() {
        return Err(FormatError::Invalid(violations));
    }
    Ok(system)
}

/// Canonical document for a system. The inverse of [`document_to_system`]
/// up to dropped zero entries and fraction normalization.
pub fn system_to_document(system: &System, description: Option<String>) -> SystemDocument {
    SystemDocument {
        description,
        contents: system.contents.iter().map(|q| q.name().to_string()).collect(),
        contexts: system
            .bunches
            .iter()
            .map(|bunch| ContextDocument {
                name: bunch.context.name().to_string(),
                contents: bunch.contents.iter().map(|q| q.name().to_string()).collect(),
                table: bunch
                    .table
                    .iter()
                    .map(|(assignment, p)| {
                        let key: String = assignment.iter().map(|o| o.symbol()).collect();
                        (key, format_rational(p))
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Pretty-printed JSON with a trailing newline; byte-stable for equal
/// documents.
pub fn render_document(doc: &SystemDocument) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serialization is total");
    text.push('\n');
    text
}

pub fn parse_system(text: &str) -> Result<System, FormatError> {
    document_to_system(&parse_document(text)?)
}
