//! Generators and independent oracles shared by the integration tests.

use std::collections::BTreeMap;

use cbd_core::model::{assignments, Assignment, Bunch, ContentId, ContextId, System};
use cbd_core::rational::{rat, Rational};
use num::Zero;
use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

/// Maximum of the odd-signed combinations by full enumeration: every ±1
/// vector with an odd number of -1 entries.
pub fn odd_sign_max_brute(values: &[Rational]) -> Rational {
    (0u32..1 << values.len())
        .filter(|mask| mask.count_ones() % 2 == 1)
        .map(|mask| {
            values
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, x)| {
                    if mask >> i & 1 == 1 {
                        acc - x
                    } else {
                        acc + x
                    }
                })
        })
        .max()
        .expect("nonempty")
}

/// A valid cyclic system of the given rank with random rational bunches
/// (weights 0..=8 over each context's four assignments).
pub fn random_cyclic_system(rng: &mut ChaCha8Rng, rank: usize) -> System {
    let contents: Vec<ContentId> =
        (1..=rank).map(|i| ContentId::new(format!("q{i}"))).collect();
    let bunches = (0..rank)
        .map(|i| {
            let table = random_table(rng, 2, None);
            Bunch::new(
                ContextId::new(format!("c{i}")),
                vec![contents[i].clone(), contents[(i + 1) % rank].clone()],
                table,
            )
            .expect("table arity is 2")
        })
        .collect();
    System::new(contents, bunches)
}

/// A valid system with at most 10 variables: 2-5 contents, 2-4 contexts of
/// arity 1-3, random rational tables. Roughly a third of the bunches get a
/// planted deterministic variable so reductions have something to do.
pub fn random_small_system(rng: &mut ChaCha8Rng) -> System {
    let n_contents = 2 + (rng.next_u64() % 4) as usize;
    let contents: Vec<ContentId> =
        (1..=n_contents).map(|i| ContentId::new(format!("q{i}"))).collect();
    let n_contexts = 2 + (rng.next_u64() % 3) as usize;
    let mut bunches = Vec::new();
    let mut budget = 10usize;
    for ci in 0..n_contexts {
        let max_arity = budget.min(3).min(n_contents);
        if max_arity == 0 {
            break;
        }
        let arity = 1 + rng.next_u64() as usize % max_arity;
        budget -= arity;

        let mut pool: Vec<usize> = (0..n_contents).collect();
        for i in 0..arity {
            let j = i + rng.next_u64() as usize % (pool.len() - i);
            pool.swap(i, j);
        }
        let chosen: Vec<ContentId> =
            pool[..arity].iter().map(|&i| contents[i].clone()).collect();

        let planted = if rng.next_u64().is_multiple_of(3) {
            Some((rng.next_u64() as usize % arity, rng.next_u64().is_multiple_of(2)))
        } else {
            None
        };
        let table = random_table(rng, arity, planted);
        bunches.push(
            Bunch::new(ContextId::new(format!("c{}", ci + 1)), chosen, table)
                .expect("table arity matches"),
        );
    }
    let used: Vec<ContentId> = contents
        .into_iter()
        .filter(|q| bunches.iter().any(|b: &Bunch| b.contents.contains(q)))
        .collect();
    System::new(used, bunches)
}

/// A random normalized table over `arity` variables; `planted` optionally
/// pins (position, plus?) to a constant value.
fn random_table(
    rng: &mut ChaCha8Rng,
    arity: usize,
    planted: Option<(usize, bool)>,
) -> BTreeMap<Assignment, Rational> {
    let cells = 1usize << arity;
    let mut weights: Vec<u64> = (0..cells).map(|_| rng.next_u64() % 9).collect();
    if let Some((pos, plus)) = planted {
        for (idx, w) in weights.iter_mut().enumerate() {
            if (idx >> (arity - 1 - pos) & 1 == 1) != plus {
                *w = 0;
            }
        }
    }
    if weights.iter().all(|w| *w == 0) {
        let idx = match planted {
            Some((pos, true)) => 1 << (arity - 1 - pos),
            _ => 0,
        };
        weights[idx] = 1;
    }
    let total: u64 = weights.iter().sum();
    assignments(arity)
        .zip(&weights)
        .filter(|(_, &w)| w > 0)
        .map(|(a, &w)| (a, rat(w as i64, total as i64)))
        .collect()
}

/// The rank-4 system with product expectations (1, 1, 1, -1) and uniform
/// marginals.
pub fn pr_box() -> System {
    let half = rat(1, 2);
    let correlated = |ctx: &str, a: &str, b: &str, sign: i64| {
        let table: BTreeMap<Assignment, Rational> = assignments(2)
            .filter(|assignment| {
                let equal = assignment[0] == assignment[1];
                if sign > 0 {
                    equal
                } else {
                    !equal
                }
            })
            .map(|assignment| (assignment, half.clone()))
            .collect();
        Bunch::new(
            ContextId::new(ctx),
            vec![ContentId::new(a), ContentId::new(b)],
            table,
        )
        .expect("table arity is 2")
    };
    System::new(
        ["q1", "q2", "q3", "q4"].into_iter().map(ContentId::new).collect(),
        vec![
            correlated("c1", "q1", "q2", 1),
            correlated("c2", "q2", "q3", 1),
            correlated("c3", "q3", "q4", 1),
            correlated("c4", "q4", "q1", -1),
        ],
    )
}

/// A random rational in [-limit, limit] with denominator up to 16.
pub fn random_rational(rng: &mut ChaCha8Rng, limit: i64) -> Rational {
    let numerator = (rng.next_u64() % (2 * limit as u64 + 1)) as i64 - limit;
    let denominator = 1 + (rng.next_u64() % 16) as i64;
    rat(numerator, denominator)
}
