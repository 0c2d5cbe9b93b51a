//! Content-context systems of binary random variables.
//!
//! A *system* is a set of measured properties (*contents*), a list of
//! measurement circumstances (*contexts*), and, for every context, the joint
//! distribution (*bunch*) of the +1/-1 variables recorded in it. A variable
//! is identified by its content together with its context; variables from
//! different contexts are stochastically unrelated — no cross-context joint
//! exists until a coupling is constructed explicitly.
//!
//! All distributions are tables of exact rational probabilities. Assignments
//! absent from a table have probability zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::coupling::Coupling;
use crate::rational::{format_rational, Rational};

/// A value of a binary random variable.
///
/// `Minus` sorts before `Plus`, which fixes the canonical enumeration order
/// of assignments everywhere in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Minus,
    Plus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Outcome> {
        match c {
            '+' => Some(Outcome::Plus),
            '-' => Some(Outcome::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A joint ±1 assignment to an ordered list of variables.
pub type Assignment = Vec<Outcome>;

/// All `2^len` assignments in canonical (lexicographic, `-` before `+`) order.
pub fn assignments(len: usize) -> impl Iterator<Item = Assignment> {
    assert!(len < usize::BITS as usize);
    (0..1usize << len).map(move |bits| {
        (0..len)
            .map(|j| {
                if bits >> (len - 1 - j) & 1 == 1 {
                    Outcome::Plus
                } else {
                    Outcome::Minus
                }
            })
            .collect()
    })
}

pub fn assignment_string(a: &[Outcome]) -> String {
    a.iter().map(|o| o.symbol()).collect()
}

/// The measured property labeling a random variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentId(pub String);

impl ContentId {
    pub fn new(name: impl Into<String>) -> Self {
        ContentId(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The circumstances under which a measurement is made.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextId(pub String);

impl ContextId {
    pub fn new(name: impl Into<String>) -> Self {
        ContextId(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("content {content} not present in bunch for context {context}")]
    UnknownContent { context: ContextId, content: ContentId },
    #[error("content {content} repeated in requested subset")]
    RepeatedContent { content: ContentId },
    #[error("empty subset: expectation needs at least one variable")]
    EmptySubset,
    #[error("assignment of length {got} does not match the {expected} contents of context {context}")]
    AssignmentLength { context: ContextId, expected: usize, got: usize },
    #[error("context {context} not present in system")]
    UnknownContext { context: ContextId },
}

/// The joint distribution of all variables sharing one context.
///
/// `table` maps assignments (ordered by `contents`) to probabilities; missing
/// assignments have probability zero. Zero entries are dropped on
/// construction, so two bunches describing the same distribution compare
/// equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bunch {
    pub context: ContextId,
    pub contents: Vec<ContentId>,
    pub table: BTreeMap<Assignment, Rational>,
}

/// The distribution of a single ±1 variable, as unnormalized masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marginal {
    pub plus: Rational,
    pub minus: Rational,
}

impl Marginal {
    pub fn new(plus: Rational, minus: Rational) -> Self {
        Marginal { plus, minus }
    }

    /// `<v> = P(+1) - P(-1)`.
    pub fn expectation(&self) -> Rational {
        &self.plus - &self.minus
    }

    pub fn deterministic_value(&self) -> Option<Outcome> {
        if self.plus.is_one() && self.minus.is_zero() {
            Some(Outcome::Plus)
        } else if self.minus.is_one() && self.plus.is_zero() {
            Some(Outcome::Minus)
        } else {
            None
        }
    }
}

impl Bunch {
    /// Builds a bunch, dropping explicit zero entries. An empty bunch (no
    /// contents) is normalized to the single empty assignment with
    /// probability 1.
    pub fn new(
        context: ContextId,
        contents: Vec<ContentId>,
        table: BTreeMap<Assignment, Rational>,
    ) -> Result<Self, ModelError> {
        let mut cleaned = BTreeMap::new();
        for (a, p) in table {
            if a.len() != contents.len() {
                return Err(ModelError::AssignmentLength {
                    context,
                    expected: contents.len(),
                    got: a.len(),
                });
            }
            if !p.is_zero() {
                cleaned.insert(a, p);
            }
        }
        if contents.is_empty() && cleaned.is_empty() {
            cleaned.insert(Vec::new(), Rational::one());
        }
        Ok(Bunch { context, contents, table: cleaned })
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn probability(&self, assignment: &[Outcome]) -> Rational {
        self.table.get(assignment).cloned().unwrap_or_else(Rational::zero)
    }

    fn positions(&self, subset: &[ContentId]) -> Result<Vec<usize>, ModelError> {
        let mut seen = BTreeSet::new();
        subset
            .iter()
            .map(|q| {
                if !seen.insert(q.clone()) {
                    return Err(ModelError::RepeatedContent { content: q.clone() });
                }
                self.contents.iter().position(|c| c == q).ok_or_else(|| ModelError::UnknownContent {
                    context: self.context.clone(),
                    content: q.clone(),
                })
            })
            .collect()
    }

    /// Exact marginal distribution over `subset`, in the order given.
    pub fn marginal(&self, subset: &[ContentId]) -> Result<Bunch, ModelError> {
        let idx = self.positions(subset)?;
        let mut table: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (a, p) in &self.table {
            let projected: Assignment = idx.iter().map(|&i| a[i]).collect();
            *table.entry(projected).or_insert_with(Rational::zero) += p;
        }
        Bunch::new(self.context.clone(), subset.to_vec(), table)
    }

    /// Expectation of the product of the selected ±1 variables.
    pub fn expectation(&self, subset: &[ContentId]) -> Result<Rational, ModelError> {
        if subset.is_empty() {
            return Err(ModelError::EmptySubset);
        }
        let idx = self.positions(subset)?;
        let mut total = Rational::zero();
        for (a, p) in &self.table {
            let negatives = idx.iter().filter(|&&i| a[i] == Outcome::Minus).count();
            if negatives % 2 == 0 {
                total += p;
            } else {
                total -= p;
            }
        }
        Ok(total)
    }

    /// Distribution of one variable of the bunch.
    pub fn single_marginal(&self, content: &ContentId) -> Result<Marginal, ModelError> {
        let idx = self.positions(std::slice::from_ref(content))?[0];
        let mut plus = Rational::zero();
        let mut minus = Rational::zero();
        for (a, p) in &self.table {
            match a[idx] {
                Outcome::Plus => plus += p,
                Outcome::Minus => minus += p,
            }
        }
        Ok(Marginal::new(plus, minus))
    }

    /// Probability that at least one variable of the bunch equals +1,
    /// i.e. `1 - Prob[every variable = -1]`.
    pub fn detection_probability(&self) -> Rational {
        let all_minus: Assignment = vec![Outcome::Minus; self.contents.len()];
        Rational::one() - self.probability(&all_minus)
    }

    /// The constant value of a variable whose marginal is concentrated on a
    /// single outcome, if any.
    pub fn is_deterministic(&self, content: &ContentId) -> Result<Option<Outcome>, ModelError> {
        Ok(self.single_marginal(content)?.deterministic_value())
    }
}

/// A content-context system: contents, contexts in order, one bunch each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    pub contents: Vec<ContentId>,
    pub bunches: Vec<Bunch>,
}

impl System {
    pub fn new(contents: Vec<ContentId>, bunches: Vec<Bunch>) -> Self {
        System { contents, bunches }
    }

    pub fn contexts(&self) -> impl Iterator<Item = &ContextId> {
        self.bunches.iter().map(|b| &b.context)
    }

    pub fn bunch(&self, context: &ContextId) -> Option<&Bunch> {
        self.bunches.iter().find(|b| &b.context == context)
    }

    /// Contexts containing `content`, in system order.
    pub fn contexts_of(&self, content: &ContentId) -> Vec<&ContextId> {
        self.bunches
            .iter()
            .filter(|b| b.contents.contains(content))
            .map(|b| &b.context)
            .collect()
    }

    /// Total number of variables (sum of bunch sizes).
    pub fn variable_count(&self) -> usize {
        self.bunches.iter().map(|b| b.len()).sum()
    }

    /// The subsystem formed by the listed contexts, keeping only the
    /// contents that still occur in them.
    pub fn subsystem(&self, contexts: &[ContextId]) -> System {
        let bunches: Vec<Bunch> = self
            .bunches
            .iter()
            .filter(|b| contexts.contains(&b.context))
            .cloned()
            .collect();
        let contents = self
            .contents
            .iter()
            .filter(|q| bunches.iter().any(|b| b.contents.contains(q)))
            .cloned()
            .collect();
        System { contents, bunches }
    }
}

/// A structural defect found by [`validate_system`]. Violations are data,
/// not faults: an invalid system can be built and inspected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyContentName,
    EmptyContextName { position: usize },
    DuplicateContent { content: ContentId },
    DuplicateContext { context: ContextId },
    UnknownContent { context: ContextId, content: ContentId },
    DuplicateBunchContent { context: ContextId, content: ContentId },
    AssignmentLength { context: ContextId, expected: usize, got: usize },
    ProbabilityOutOfRange { context: ContextId, assignment: Assignment, value: Rational },
    NotNormalized { context: ContextId, total: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyContentName => write!(f, "empty content name"),
            Violation::EmptyContextName { position } => {
                write!(f, "empty context name at position {position}")
            }
            Violation::DuplicateContent { content } => {
                write!(f, "duplicate content {content}")
            }
            Violation::DuplicateContext { context } => {
                write!(f, "duplicate context {context}")
            }
            Violation::UnknownContent { context, content } => {
                write!(f, "bunch {context} references unknown content {content}")
            }
            Violation::DuplicateBunchContent { context, content } => {
                write!(f, "bunch {context} lists content {content} twice")
            }
            Violation::AssignmentLength { context, expected, got } => {
                write!(f, "bunch {context} has an assignment of length {got}, expected {expected}")
            }
            Violation::ProbabilityOutOfRange { context, assignment, value } => write!(
                f,
                "bunch {context} entry {} has probability out of range: {}",
                assignment_string(assignment),
                format_rational(value)
            ),
            Violation::NotNormalized { context, total } => {
                write!(f, "bunch {context} not normalized: probabilities sum to {}", format_rational(total))
            }
        }
    }
}

/// Checks every structural invariant of a system and reports the defects.
/// An empty result means the system is valid.
pub fn validate_system(system: &System) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut seen_contents = BTreeSet::new();
    for content in &system.contents {
        if content.name().is_empty() {
            violations.push(Violation::EmptyContentName);
        }
        if !seen_contents.insert(content.clone()) {
            violations.push(Violation::DuplicateContent { content: content.clone() });
        }
    }

    let mut seen_contexts = BTreeSet::new();
    for (position, bunch) in system.bunches.iter().enumerate() {
        let context = bunch.context.clone();
        if context.name().is_empty() {
            violations.push(Violation::EmptyContextName { position });
        }
        if !seen_contexts.insert(context.clone()) {
            violations.push(Violation::DuplicateContext { context: context.clone() });
        }

        let mut seen_bunch_contents = BTreeSet::new();
        for content in &bunch.contents {
            if !seen_bunch_contents.insert(content.clone()) {
                violations.push(Violation::DuplicateBunchContent {
                    context: context.clone(),
                    content: content.clone(),
                });
            }
            if !system.contents.contains(content) {
                violations.push(Violation::UnknownContent {
                    context: context.clone(),
                    content: content.clone(),
                });
            }
        }

        let mut total = Rational::zero();
        let mut lengths_ok = true;
        for (assignment, value) in &bunch.table {
            if assignment.len() != bunch.contents.len() {
                violations.push(Violation::AssignmentLength {
                    context: context.clone(),
                    expected: bunch.contents.len(),
                    got: assignment.len(),
                });
                lengths_ok = false;
                continue;
            }
            if value.is_negative() || *value > Rational::one() {
                violations.push(Violation::ProbabilityOutOfRange {
                    context: context.clone(),
                    assignment: assignment.clone(),
                    value: value.clone(),
                });
            }
            total += value;
        }
        if lengths_ok && !total.is_one() {
            violations.push(Violation::NotNormalized { context, total });
        }
    }

    violations
}

/// Map from (content, context, context) to the direct-influence distance
/// `|<R_q^c> - <R_q^c'>|`. The two contexts are ordered by their position
/// in the system.
pub type InfluenceMap = BTreeMap<(ContentId, ContextId, ContextId), Rational>;

/// Decides consistent connectedness: true iff every content has identical
/// single-variable marginals in all contexts where it occurs. The returned
/// map holds the distance for every content and unordered context pair.
pub fn consistent_connectedness(system: &System) -> (bool, InfluenceMap) {
    let map = direct_influences(system);
    let consistent = map.values().all(|d| d.is_zero());
    (consistent, map)
}

pub fn direct_influences(system: &System) -> InfluenceMap {
    let mut map = InfluenceMap::new();
    for content in &system.contents {
        let holders: Vec<&Bunch> = system
            .bunches
            .iter()
            .filter(|b| b.contents.contains(content))
            .collect();
        for i in 0..holders.len() {
            for j in i + 1..holders.len() {
                let ei = holders[i]
                    .single_marginal(content)
                    .expect("content is in bunch")
                    .expectation();
                let ej = holders[j]
                    .single_marginal(content)
                    .expect("content is in bunch")
                    .expectation();
                map.insert(
                    (content.clone(), holders[i].context.clone(), holders[j].context.clone()),
                    (ei - ej).abs(),
                );
            }
        }
    }
    map
}

/// Which decision procedure produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    CyclicCriterion,
    CouplingLp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::CyclicCriterion => f.write_str("cyclic-criterion"),
            Method::CouplingLp => f.write_str("coupling-lp"),
        }
    }
}

/// The outcome of a contextuality analysis.
///
/// `witness` is only ever present on noncontextual verdicts produced by the
/// coupling route; `lhs`/`rhs` are only present on cyclic-criterion verdicts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub contextual: bool,
    pub method: Method,
    pub lhs: Option<Rational>,
    pub rhs: Option<Rational>,
    pub witness: Option<Coupling>,
    pub direct_influences: InfluenceMap,
}
