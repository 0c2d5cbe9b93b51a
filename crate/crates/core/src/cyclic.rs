//! Cyclic systems: structure detection and the rank-n noncontextuality
//! criterion.
//!
//! A cyclic system of rank n has 2n binary variables: n contents and n
//! contexts arranged so context `c_i` measures exactly `{q_i, q_{i+1}}`
//! (indices wrapping), and every content occurs in exactly two contexts.
//! Such a system is noncontextual iff
//!
//! ```text
//! max over odd sign vectors of sum_i lambda_i <R_i^i R_{i+1}^i>
//!     <= n - 2 + sum_i |<R_{i+1}^i> - <R_{i+1}^{i+1}>|
//! ```
//!
//! where an odd sign vector is a ±1 vector with an odd number of -1 entries.
//! The right-hand side absorbs the direct influences, so the criterion
//! applies to inconsistently connected systems as well.

use num::{Signed, Zero};
use thiserror::Error;

use crate::model::{
    direct_influences, ContentId, ContextId, InfluenceMap, Method, System, Verdict,
};
use crate::rational::{rat_int, Rational};

/// A detected cyclic arrangement: context `contexts[i]` measures
/// `{contents[i], contents[(i+1) % n]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicLayout {
    pub contents: Vec<ContentId>,
    pub contexts: Vec<ContextId>,
}

impl CyclicLayout {
    pub fn new(contents: Vec<ContentId>, contexts: Vec<ContextId>) -> Result<Self, CyclicError> {
        if contents.len() != contexts.len() || contents.len() < 2 {
            return Err(CyclicError::MalformedLayout);
        }
        Ok(CyclicLayout { contents, contexts })
    }

    pub fn rank(&self) -> usize {
        self.contents.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CyclicError {
    #[error("layout must pair n >= 2 contents with n contexts")]
    MalformedLayout,
    #[error("layout does not match system: {0}")]
    LayoutMismatch(String),
}

/// Both sides of the rank-n criterion, with the per-context terms they were
/// assembled from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionReport {
    /// Maximum of the odd-signed combinations of the product expectations.
    pub lhs: Rational,
    /// `n - 2` plus the summed direct-influence distances.
    pub rhs: Rational,
    /// `<R_i^i R_{i+1}^i>` for each context of the cycle.
    pub product_expectations: Vec<Rational>,
    /// `|<R_{i+1}^i> - <R_{i+1}^{i+1}>|` for each content of the cycle.
    pub influence_terms: Vec<Rational>,
}

/// Finds the cyclic arrangement of a system, if there is one.
///
/// Returns a layout iff every context has exactly two contents, every
/// content occurs in exactly two contexts, and the incidence graph is a
/// single cycle. The starting point and orientation are canonical: the
/// lexicographically smallest content comes first, followed by its
/// smaller-named context.
pub fn detect_cycle(system: &System) -> Option<CyclicLayout> {
    if system.bunches.len() < 2 || system.contents.is_empty() {
        return None;
    }
    for bunch in &system.bunches {
        if bunch.len() != 2 || bunch.contents[0] == bunch.contents[1] {
            return None;
        }
    }
    for content in &system.contents {
        if system.contexts_of(content).len() != 2 {
            return None;
        }
    }
    if system.contents.len() != system.bunches.len() {
        return None;
    }

    let start = system.contents.iter().min()?.clone();
    let mut first_contexts = system.contexts_of(&start);
    first_contexts.sort();

    let mut contents = vec![start.clone()];
    let mut contexts = Vec::new();
    let mut current_content = start.clone();
    let mut current_context = first_contexts[0].clone();
    loop {
        contexts.push(current_context.clone());
        let bunch = system.bunch(&current_context)?;
        let next_content = bunch
            .contents
            .iter()
            .find(|q| **q != current_content)?
            .clone();
        if next_content == start {
            break;
        }
        contents.push(next_content.clone());
        let next_context = system
            .contexts_of(&next_content)
            .into_iter()
            .find(|c| **c != current_context)?
            .clone();
        current_content = next_content;
        current_context = next_context;
    }

    // A disconnected union of cycles never traverses every content.
    if contents.len() != system.contents.len() {
        return None;
    }
    Some(CyclicLayout { contents, contexts })
}

/// Maximum of `sum_i lambda_i x_i` over all ±1 vectors `lambda` with an odd
/// number of -1 entries.
///
/// Closed form: the sum of |x_i| when the number of strictly negative
/// entries is odd, otherwise that sum minus twice the smallest |x_i|.
pub fn odd_sign_max(values: &[Rational]) -> Rational {
    assert!(!values.is_empty(), "odd_sign_max needs at least one value");
    let mut total = Rational::zero();
    let mut smallest: Option<Rational> = None;
    let mut negatives = 0usize;
    for x in values {
        if x.is_negative() {
            negatives += 1;
        }
        let magnitude = x.abs();
        if smallest.as_ref().is_none_or(|s| magnitude < *s) {
            smallest = Some(magnitude.clone());
        }
        total += magnitude;
    }
    if negatives % 2 == 1 {
        total
    } else {
        total - rat_int(2) * smallest.expect("nonempty")
    }
}

/// Evaluates the rank-n criterion for `system` under `layout`.
///
/// The verdict is contextual iff lhs > rhs; equality counts as
/// noncontextual. `direct_influences` on the verdict covers the whole
/// system, with the cycle's own terms also listed in the report.
pub fn cyclic_criterion(
    system: &System,
    layout: &CyclicLayout,
) -> Result<(Verdict, CriterionReport), CyclicError> {
    let n = layout.rank();
    check_layout(system, layout)?;

    let mut product_expectations = Vec::with_capacity(n);
    let mut influence_terms = Vec::with_capacity(n);
    for i in 0..n {
        let here = &layout.contents[i];
        let next = &layout.contents[(i + 1) % n];
        let context = &layout.contexts[i];
        let next_context = &layout.contexts[(i + 1) % n];
        let bunch = system.bunch(context).expect("checked");
        let next_bunch = system.bunch(next_context).expect("checked");

        let product = bunch
            .expectation(&[here.clone(), next.clone()])
            .expect("layout contents are in the bunch");
        product_expectations.push(product);

        let e_here = bunch.single_marginal(next).expect("checked").expectation();
        let e_next = next_bunch.single_marginal(next).expect("checked").expectation();
        influence_terms.push((e_here - e_next).abs());
    }

    let lhs = odd_sign_max(&product_expectations);
    let rhs = influence_terms
        .iter()
        .fold(rat_int(n as i64 - 2), |acc, d| acc + d);

    let report = CriterionReport {
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        product_expectations,
        influence_terms,
    };
    let verdict = Verdict {
        contextual: lhs > rhs,
        method: Method::CyclicCriterion,
        lhs: Some(lhs),
        rhs: Some(rhs),
        witness: None,
        direct_influences: cycle_influences(system),
    };
    Ok((verdict, report))
}

fn cycle_influences(system: &System) -> InfluenceMap {
    direct_influences(system)
}

fn check_layout(system: &System, layout: &CyclicLayout) -> Result<(), CyclicError> {
    let n = layout.rank();
    if n < 2 {
        return Err(CyclicError::MalformedLayout);
    }
    for i in 0..n {
        let context = &layout.contexts[i];
        let Some(bunch) = system.bunch(context) else {
            return Err(CyclicError::LayoutMismatch(format!("context {context} not in system")));
        };
        let a = &layout.contents[i];
        let b = &layout.contents[(i + 1) % n];
        let matches = bunch.len() == 2
            && bunch.contents.contains(a)
            && bunch.contents.contains(b)
            && a != b;
        if !matches {
            return Err(CyclicError::LayoutMismatch(format!(
                "context {context} does not measure exactly {{{a}, {b}}}"
            )));
        }
    }
    Ok(())
}
