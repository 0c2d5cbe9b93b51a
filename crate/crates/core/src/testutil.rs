//! Constructors shared by the unit tests of several modules.

use std::collections::BTreeMap;

use crate::model::{Assignment, Bunch, ContentId, ContextId, Outcome, System};
use crate::rational::{rat, rat_int, Rational};

pub(crate) fn pair_bunch(
    ctx: &str,
    a: &str,
    b: &str,
    probs: [(char, char, Rational); 4],
) -> Bunch {
    let table: BTreeMap<Assignment, Rational> = probs
        .into_iter()
        .map(|(x, y, p)| {
            (
                vec![Outcome::from_symbol(x).unwrap(), Outcome::from_symbol(y).unwrap()],
                p,
            )
        })
        .collect();
    Bunch::new(
        ContextId::new(ctx),
        vec![ContentId::new(a), ContentId::new(b)],
        table,
    )
    .unwrap()
}

/// A bunch whose two variables are perfectly correlated (`sign > 0`) or
/// perfectly anticorrelated (`sign < 0`), with uniform marginals.
pub(crate) fn uniform_correlated(ctx: &str, a: &str, b: &str, sign: i64) -> Bunch {
    let half = rat(1, 2);
    if sign > 0 {
        pair_bunch(ctx, a, b, [
            ('+', '+', half.clone()),
            ('-', '-', half),
            ('+', '-', rat_int(0)),
            ('-', '+', rat_int(0)),
        ])
    } else {
        pair_bunch(ctx, a, b, [
            ('+', '-', half.clone()),
            ('-', '+', half),
            ('+', '+', rat_int(0)),
            ('-', '-', rat_int(0)),
        ])
    }
}

/// The rank-4 system with product expectations (1, 1, 1, -1) and uniform
/// marginals: maximally contextual, lhs 4 against rhs 2.
pub(crate) fn pr_box() -> System {
    System::new(
        vec![
            ContentId::new("q1"),
            ContentId::new("q2"),
            ContentId::new("q3"),
            ContentId::new("q4"),
        ],
        vec![
            uniform_correlated("c1", "q1", "q2", 1),
            uniform_correlated("c2", "q2", "q3", 1),
            uniform_correlated("c3", "q3", "q4", 1),
            uniform_correlated("c4", "q4", "q1", -1),
        ],
    )
}
