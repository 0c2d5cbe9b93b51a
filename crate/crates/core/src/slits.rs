//! Builders and closed-form analysis for slit systems.
//!
//! A slit experiment measures, for every open/closed arrangement of the
//! slits (the context), one ±1 variable per slit: "did the particle pass
//! through this slit and hit the detector?". The single physical constraint
//! is that a particle cannot reach the detector through a closed slit, so
//! closed-slit variables are -1 with certainty.
//!
//! The double-slit family is parameterized by five detection probabilities
//! and is noncontextual for every allowed parameter choice, which the
//! closed form here decides without solving anything. Triple-slit systems
//! escape that: [`paper_triple_slit_example`] is a contextual one.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Assignment, Bunch, ContentId, ContextId, Outcome, System};
use crate::rational::{rat, rat_int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlitError {
    #[error("probabilities must lie in [0,1] and the both-open cells must sum to at most 1")]
    ParameterRange,
    #[error("context {0} is missing from the supplied tables")]
    MissingContext(ContextId),
    #[error("context {0}: closed slits must read -1 with probability 1")]
    ClosedSlitNotCertain(ContextId),
    #[error("context {0}: table is not a probability distribution over its variables")]
    MalformedTable(ContextId),
}

/// The five free cells of the double-slit probability tables.
///
/// `left_only`/`right_only` fill the single-open-slit contexts; the other
/// three fill the both-open context, split by which slit(s) the detected
/// particle passed through. All five lie in [0,1] and the both-open cells
/// sum to at most 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleSlitParams {
    left_only: Rational,
    right_only: Rational,
    via_left: Rational,
    via_right: Rational,
    via_both: Rational,
}

impl DoubleSlitParams {
    pub fn new(
        left_only: Rational,
        right_only: Rational,
        via_left: Rational,
        via_right: Rational,
        via_both: Rational,
    ) -> Result<Self, SlitError> {
        let unit = |x: &Rational| !x.is_negative() && *x <= rat_int(1);
        let all_unit = [&left_only, &right_only, &via_left, &via_right, &via_both]
            .into_iter()
            .all(unit);
        if !all_unit || &via_left + &via_right + &via_both > rat_int(1) {
            return Err(SlitError::ParameterRange);
        }
        Ok(DoubleSlitParams { left_only, right_only, via_left, via_right, via_both })
    }

    /// Detection probability when only the left slit is open.
    pub fn left_only(&self) -> &Rational {
        &self.left_only
    }

    /// Detection probability when only the right slit is open.
    pub fn right_only(&self) -> &Rational {
        &self.right_only
    }

    /// Both slits open: detected, having passed through the left slit only.
    pub fn via_left(&self) -> &Rational {
        &self.via_left
    }

    /// Both slits open: detected, having passed through the right slit only.
    pub fn via_right(&self) -> &Rational {
        &self.via_right
    }

    /// Both slits open: detected, having passed through both slits.
    pub fn via_both(&self) -> &Rational {
        &self.via_both
    }
}

fn entry(symbols: &str, p: Rational) -> (Assignment, Rational) {
    (
        symbols
            .chars()
            .map(|c| Outcome::from_symbol(c).expect("outcome symbol"))
            .collect(),
        p,
    )
}

fn bunch(name: &str, contents: [&str; 2], rows: Vec<(Assignment, Rational)>) -> Bunch {
    Bunch::new(
        ContextId::new(name),
        contents.into_iter().map(ContentId::new).collect(),
        rows.into_iter().collect(),
    )
    .expect("table arity matches contents")
}

/// The 4-content, 4-context double-slit system for the given parameters.
///
/// Contents are `q_o.` (left slit open), `q_.o` (right open), `q_x.` (left
/// closed), `q_.x` (right closed); contexts `c_ox`, `c_xx`, `c_xo`, `c_oo`
/// name the left/right arrangement. Closed-slit variables are -1 with
/// certainty, which fixes all tables except the five parameter cells.
pub fn build_double_slit(params: &DoubleSlitParams) -> System {
    let one = rat_int(1);
    let p = params.left_only.clone();
    let q = params.right_only.clone();
    let via_neither = &one - &params.via_left - &params.via_right - &params.via_both;
    System::new(
        ["q_o.", "q_.o", "q_x.", "q_.x"].into_iter().map(ContentId::new).collect(),
        vec![
            bunch("c_ox", ["q_o.", "q_.x"], vec![
                entry("+-", p.clone()),
                entry("--", &one - &p),
            ]),
            bunch("c_xx", ["q_x.", "q_.x"], vec![entry("--", one.clone())]),
            bunch("c_xo", ["q_x.", "q_.o"], vec![
                entry("-+", q.clone()),
                entry("--", &one - &q),
            ]),
            bunch("c_oo", ["q_o.", "q_.o"], vec![
                entry("++", params.via_both.clone()),
                entry("+-", params.via_left.clone()),
                entry("-+", params.via_right.clone()),
                entry("--", via_neither),
            ]),
        ],
    )
}

/// The double-slit noncontextuality decision in closed form.
///
/// The four `a` values are the absolute odd-signed combinations of the
/// system's product expectations and `b` the bound they are compared to;
/// both are at half the scale of the general cyclic criterion's sides. The
/// system is noncontextual iff `max(a1..a4) <= b`, which holds for every
/// allowed parameter choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormReport {
    pub a1: Rational,
    pub a2: Rational,
    pub a3: Rational,
    pub a4: Rational,
    pub b: Rational,
    pub noncontextual: bool,
}

impl ClosedFormReport {
    pub fn max_a(&self) -> &Rational {
        [&self.a1, &self.a2, &self.a3, &self.a4]
            .into_iter()
            .max()
            .expect("four values")
    }
}

pub fn closed_form_double_slit(params: &DoubleSlitParams) -> ClosedFormReport {
    let one = rat_int(1);
    let p = &params.left_only;
    let q = &params.right_only;
    let open_sum = &params.via_left + &params.via_right;
    let a1 = (&one + p - q - &open_sum).abs();
    let a2 = (&one - p - q - &open_sum).abs();
    let a3 = (&one - p + q - &open_sum).abs();
    let a4 = (&one - p - q + &open_sum).abs();
    let b = &one
        + (p - &params.via_left - &params.via_both).abs()
        + (q - &params.via_right - &params.via_both).abs();
    let noncontextual = *[&a1, &a2, &a3, &a4].into_iter().max().expect("four values") <= b;
    ClosedFormReport { a1, a2, a3, a4, b, noncontextual }
}

/// Checks that the closed form and the general cyclic criterion agree on
/// the built system. True for every valid parameter choice.
pub fn verify_closed_form_equivalence(params: &DoubleSlitParams) -> bool {
    let system = build_double_slit(params);
    let layout = crate::cyclic::detect_cycle(&system).expect("double-slit systems are cyclic");
    let (verdict, _) = crate::cyclic::cyclic_criterion(&system, &layout)
        .expect("layout comes from detect_cycle");
    let closed = closed_form_double_slit(params);
    closed.noncontextual == !verdict.contextual
}

/// Open/closed state of the three slits, left to right; `true` is open.
pub type SlitPattern = [bool; 3];

pub type BunchTable = BTreeMap<Assignment, Rational>;

/// The content measured at `slit` (0-based, left to right) in state `open`.
pub fn triple_slit_content(slit: usize, open: bool) -> ContentId {
    assert!(slit < 3, "three slits");
    let mut name: Vec<char> = vec!['.'; 3];
    name[slit] = if open { 'o' } else { 'x' };
    ContentId::new(format!("q_{}", name.into_iter().collect::<String>()))
}

pub fn triple_slit_context(pattern: SlitPattern) -> ContextId {
    let name: String = pattern.iter().map(|open| if *open { 'o' } else { 'x' }).collect();
    ContextId::new(format!("c_{name}"))
}

/// Bunch tables for a triple-slit system.
///
/// `Full` carries one table per slit arrangement, each over that context's
/// three variables in slit order; closed slits must be -1 with certainty.
/// `Reduced` carries the four-context form that the full system reduces to:
/// the three one-slit-closed contexts with their deterministic variable
/// already deleted (tables over the two open slits in slit order) and the
/// all-open context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TripleSlitSpec {
    Full(BTreeMap<SlitPattern, BunchTable>),
    Reduced {
        middle_closed: BunchTable,
        right_closed: BunchTable,
        left_closed: BunchTable,
        all_open: BunchTable,
    },
}

/// The eight arrangements in presentation order: all-closed down to
/// all-open.
pub const FULL_PATTERN_ORDER: [SlitPattern; 8] = [
    [false, false, false],
    [true, false, false],
    [false, true, false],
    [false, false, true],
    [true, false, true],
    [true, true, false],
    [false, true, true],
    [true, true, true],
];

fn checked_bunch(
    context: ContextId,
    contents: Vec<ContentId>,
    table: &BunchTable,
) -> Result<Bunch, SlitError> {
    let mut total = Rational::zero();
    for (assignment, p) in table {
        if assignment.len() != contents.len() || p.is_negative() {
            return Err(SlitError::MalformedTable(context));
        }
        total += p;
    }
    if !total.is_one() {
        return Err(SlitError::MalformedTable(context));
    }
    let bunch = Bunch::new(context.clone(), contents, table.clone())
        .map_err(|_| SlitError::MalformedTable(context))?;
    Ok(bunch)
}

/// Builds the 6-content, 8-context full system or the 3-content, 4-context
/// reduced system, depending on the [`TripleSlitSpec`] form.
pub fn build_triple_slit(spec: &TripleSlitSpec) -> Result<System, SlitError> {
    match spec {
        TripleSlitSpec::Full(tables) => {
            let contents = vec![
                triple_slit_content(0, true),
                triple_slit_content(1, true),
                triple_slit_content(2, true),
                triple_slit_content(2, false),
                triple_slit_content(1, false),
                triple_slit_content(0, false),
            ];
            let mut bunches = Vec::new();
            for pattern in FULL_PATTERN_ORDER {
                let context = triple_slit_context(pattern);
                let Some(table) = tables.get(&pattern) else {
                    return Err(SlitError::MissingContext(context));
                };
                for (assignment, p) in table {
                    let closed_certain = assignment.len() == 3
                        && (p.is_zero()
                            || pattern
                                .iter()
                                .zip(assignment)
                                .all(|(open, o)| *open || *o == Outcome::Minus));
                    if !closed_certain {
                        if assignment.len() == 3 {
                            return Err(SlitError::ClosedSlitNotCertain(context));
                        }
                        return Err(SlitError::MalformedTable(context));
                    }
                }
                let bunch_contents = (0..3)
                    .map(|slit| triple_slit_content(slit, pattern[slit]))
                    .collect();
                bunches.push(checked_bunch(context, bunch_contents, table)?);
            }
            Ok(System::new(contents, bunches))
        }
        TripleSlitSpec::Reduced { middle_closed, right_closed, left_closed, all_open } => {
            let open = |slit| triple_slit_content(slit, true);
            let bunches = vec![
                checked_bunch(
                    triple_slit_context([true, false, true]),
                    vec![open(0), open(2)],
                    middle_closed,
                )?,
                checked_bunch(
                    triple_slit_context([true, true, false]),
                    vec![open(0), open(1)],
                    right_closed,
                )?,
                checked_bunch(
                    triple_slit_context([false, true, true]),
                    vec![open(1), open(2)],
                    left_closed,
                )?,
                checked_bunch(
                    triple_slit_context([true, true, true]),
                    vec![open(0), open(1), open(2)],
                    all_open,
                )?,
            ];
            Ok(System::new(vec![open(0), open(1), open(2)], bunches))
        }
    }
}

/// The contextual triple-slit example, in reduced four-context form.
///
/// The three two-variable contexts on their own form a consistently
/// connected, noncontextual rank-3 cyclic system, yet the whole system is
/// contextual: the all-open context's first and third variables coincide
/// with probability 999/1000, their counterparts in the middle-closed
/// context with 49901/50000, while the connecting marginals agree exactly —
/// so no coupling can keep every content-sharing pair maximally equal.
pub fn paper_triple_slit_example() -> System {
    let spec = paper_triple_slit_spec();
    build_triple_slit(&spec).expect("tables are valid")
}

/// The reduced-form [`TripleSlitSpec`] behind [`paper_triple_slit_example`].
pub fn paper_triple_slit_spec() -> TripleSlitSpec {
    TripleSlitSpec::Reduced {
        middle_closed: [
            entry("++", rat(1, 100000)),
            entry("+-", rat(99, 100000)),
            entry("-+", rat(99, 100000)),
            entry("--", rat(99801, 100000)),
        ]
        .into(),
        right_closed: [
            entry("++", rat(1, 1000000)),
            entry("+-", rat(999, 1000000)),
            entry("-+", rat(1999, 1000000)),
            entry("--", rat(997001, 1000000)),
        ]
        .into(),
        left_closed: [
            entry("++", rat(1, 1000000)),
            entry("+-", rat(1999, 1000000)),
            entry("-+", rat(999, 1000000)),
            entry("--", rat(997001, 1000000)),
        ]
        .into(),
        all_open: [
            entry("---", rat(19, 20)),
            entry("-+-", rat(97, 2000)),
            entry("--+", rat(1, 4000)),
            entry("-++", rat(1, 4000)),
            entry("+--", rat(1, 4000)),
            entry("+-+", rat(1, 4000)),
            entry("++-", rat(1, 4000)),
            entry("+++", rat(1, 4000)),
        ]
        .into(),
    }
}

/// The same example as an 8-context full system: the deterministic closed
/// variables are reinstated and the four extra contexts carry no-detection
/// tables. Its reduction is exactly [`paper_triple_slit_example`].
pub fn paper_triple_slit_full_example() -> System {
    let TripleSlitSpec::Reduced { middle_closed, right_closed, left_closed, all_open } =
        paper_triple_slit_spec()
    else {
        unreachable!("paper_triple_slit_spec() is reduced-form");
    };
    let insert_minus = |table: &BunchTable, at: usize| -> BunchTable {
        table
            .iter()
            .map(|(assignment, p)| {
                let mut full = assignment.clone();
                full.insert(at, Outcome::Minus);
                (full, p.clone())
            })
            .collect()
    };
    let nothing_detected: BunchTable = [entry("---", rat_int(1))].into();
    let tables: BTreeMap<SlitPattern, BunchTable> = [
        ([false, false, false], nothing_detected.clone()),
        ([true, false, false], nothing_detected.clone()),
        ([false, true, false], nothing_detected.clone()),
        ([false, false, true], nothing_detected),
        ([true, false, true], insert_minus(&middle_closed, 1)),
        ([true, true, false], insert_minus(&right_closed, 2)),
        ([false, true, true], insert_minus(&left_closed, 0)),
        ([true, true, true], all_open),
    ]
    .into();
    build_triple_slit(&TripleSlitSpec::Full(tables)).expect("tables are valid")
}

/// `value / 2^16` drawn uniformly from {0, 1, ..., 2^16} by rejection on
/// raw generator output, so the stream depends only on the seed.
fn dyadic(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let raw = rng.next_u64() & 0x1_ffff;
        if raw <= 1 << 16 {
            return rat(raw as i64, 1 << 16);
        }
    }
}

/// Deterministic pseudo-random parameter tuples covering the valid region,
/// as dyadic rationals with denominator 2^16. Every eighth tuple pins the
/// both-open table to total detection (`via_left+via_right+via_both = 1`)
/// to exercise the boundary.
pub fn sample_double_slit_params(count: usize, seed: u64) -> Vec<DoubleSlitParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let left_only = dyadic(&mut rng);
        let right_only = dyadic(&mut rng);
        let (via_left, via_right, via_both) = if out.len() % 8 == 7 {
            let (l, r) = loop {
                let l = dyadic(&mut rng);
                let r = dyadic(&mut rng);
                if &l + &r <= rat_int(1) {
                    break (l, r);
                }
            };
            let both = rat_int(1) - &l - &r;
            (l, r, both)
        } else {
            loop {
                let l = dyadic(&mut rng);
                let r = dyadic(&mut rng);
                let b = dyadic(&mut rng);
                if &l + &r + &b <= rat_int(1) {
                    break (l, r, b);
                }
            }
        };
        out.push(
            DoubleSlitParams::new(left_only, right_only, via_left, via_right, via_both)
                .expect("sampled inside the region"),
        );
    }
    out
}
