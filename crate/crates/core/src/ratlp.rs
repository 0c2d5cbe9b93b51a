//! Exact rational linear feasibility solver.
//!
//! Decides whether `A x = b, x >= 0` has a solution, by phase-1 simplex over
//! exact rationals: one artificial variable per row, minimize their sum,
//! feasible iff the optimum is exactly zero. Pivoting uses Bland's
//! smallest-index rule, so the solver terminates on every input without any
//! numerical tolerance. Duplicate or linearly dependent rows are fine; they
//! just leave an artificial variable basic at level zero.
//!
//! The tableau is dense. That is deliberate: the instances this crate builds
//! have at most a few hundred columns, and exactness matters more than
//! scalability here.

use num::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

/// `equalities` are (coefficient row, right-hand side) pairs; every variable
/// is additionally constrained nonnegative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityProblem {
    pub num_vars: usize,
    pub equalities: Vec<(Vec<Rational>, Rational)>,
}

impl FeasibilityProblem {
    pub fn new(num_vars: usize, equalities: Vec<(Vec<Rational>, Rational)>) -> Self {
        for (row, _) in &equalities {
            assert_eq!(row.len(), num_vars, "coefficient row length mismatch");
        }
        FeasibilityProblem { num_vars, equalities }
    }

    /// Exact check that `x` satisfies every equality and is nonnegative.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.equalities.iter().all(|(row, rhs)| {
            let mut acc = Rational::zero();
            for (a, v) in row.iter().zip(x) {
                if !a.is_zero() && !v.is_zero() {
                    acc += a * v;
                }
            }
            acc == *rhs
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub solution: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance too large: pivot budget of {budget} exhausted")]
    PivotBudgetExhausted { budget: u64 },
}

pub const DEFAULT_PIVOT_BUDGET: u64 = 1_000_000;

pub fn solve_feasibility(problem: &FeasibilityProblem) -> Result<FeasibilityResult, SolveError> {
    solve_feasibility_with_budget(problem, DEFAULT_PIVOT_BUDGET)
}

pub fn solve_feasibility_with_budget(
    problem: &FeasibilityProblem,
    budget: u64,
) -> Result<FeasibilityResult, SolveError> {
    let n = problem.num_vars;
    let m = problem.equalities.len();

    if m == 0 {
        let solution = vec![Rational::zero(); n];
        return Ok(FeasibilityResult { feasible: true, solution: Some(solution) });
    }

    // Tableau rows: [structural columns | artificial columns | rhs], with
    // rows flipped so every rhs is nonnegative. Initial basis: artificials.
    let width = n + m + 1;
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, (coeffs, rhs)) in problem.equalities.iter().enumerate() {
        let flip = rhs.is_negative();
        let mut row = Vec::with_capacity(width);
        for a in coeffs {
            row.push(if flip { -a.clone() } else { a.clone() });
        }
        for j in 0..m {
            row.push(if j == i { Rational::from_integer(1.into()) } else { Rational::zero() });
        }
        row.push(if flip { -rhs.clone() } else { rhs.clone() });
        rows.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase-1 objective: minimize the sum of artificials. Reduced costs for
    // the initial basis: r_j = c_j - sum_i T[i][j] (artificial costs are 1).
    let mut reduced: Vec<Rational> = vec![Rational::zero(); n + m];
    let mut objective = Rational::zero();
    for row in &rows {
        for (j, value) in row.iter().take(n + m).enumerate() {
            if !value.is_zero() {
                reduced[j] -= value;
            }
        }
        objective += &row[width - 1];
    }
    for cost in reduced[n..n + m].iter_mut() {
        *cost += Rational::from_integer(1.into());
    }

    let mut pivots: u64 = 0;
    // Bland: entering column = smallest index with negative reduced cost.
    while let Some(entering) = reduced.iter().position(|r| r.is_negative()) {
        // Ratio test; ties broken by the smallest basic variable index.
        let mut leaving: Option<(usize, Rational)> = None;
        for (i, row) in rows.iter().enumerate() {
            let a = &row[entering];
            if a.is_positive() {
                let ratio = &row[width - 1] / a;
                let better = match &leaving {
                    None => true,
                    Some((best_i, best)) => {
                        ratio < *best || (ratio == *best && basis[i] < basis[*best_i])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        // The phase-1 objective is bounded below by zero, so an improving
        // column always has a blocking row.
        let (pivot_row, _) = leaving.expect("phase-1 objective cannot be unbounded");

        pivots += 1;
        if pivots > budget {
            return Err(SolveError::PivotBudgetExhausted { budget });
        }

        pivot(&mut rows, &mut reduced, &mut objective, pivot_row, entering, width);
        basis[pivot_row] = entering;
    }

    if !objective.is_zero() {
        return Ok(FeasibilityResult { feasible: false, solution: None });
    }

    let mut solution = vec![Rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            solution[var] = rows[i][width - 1].clone();
        }
    }
    assert!(
        problem.is_satisfied_by(&solution),
        "internal error: phase-1 solution failed re-substitution"
    );
    Ok(FeasibilityResult { feasible: true, solution: Some(solution) })
}

fn pivot(
    rows: &mut [Vec<Rational>],
    reduced: &mut [Rational],
    objective: &mut Rational,
    pivot_row: usize,
    entering: usize,
    width: usize,
) {
    let inv = {
        let a = rows[pivot_row][entering].clone();
        for value in rows[pivot_row].iter_mut() {
            if !value.is_zero() {
                *value /= &a;
            }
        }
        a
    };
    debug_assert!(inv.is_positive());

    let (before, rest) = rows.split_at_mut(pivot_row);
    let (pivot_slice, after) = rest.split_first_mut().expect("pivot row exists");
    for row in before.iter_mut().chain(after.iter_mut()) {
        eliminate(row, pivot_slice, entering, width);
    }

    let factor = std::mem::replace(&mut reduced[entering], Rational::zero());
    if !factor.is_zero() {
        *objective += &factor * &pivot_slice[width - 1];
        for (j, r) in reduced.iter_mut().enumerate() {
            let p = &pivot_slice[j];
            if !p.is_zero() {
                *r -= &factor * p;
            }
        }
        reduced[entering] = Rational::zero();
    }
}

fn eliminate(row: &mut [Rational], pivot_row: &[Rational], entering: usize, width: usize) {
    let factor = std::mem::replace(&mut row[entering], Rational::zero());
    if factor.is_zero() {
        return;
    }
    for j in 0..width {
        if j == entering {
            continue;
        }
        let p = &pivot_row[j];
        if !p.is_zero() {
            row[j] -= &factor * p;
        }
    }
}
