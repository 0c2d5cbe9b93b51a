//! Multimaximal couplings and the LP-based noncontextuality decision.
//!
//! A coupling of a system is a single joint distribution over all of its
//! variables whose marginal on each context reproduces that context's bunch.
//! It is multimaximal when every pair of content-sharing variables takes
//! equal values with the largest probability their two marginals allow:
//! `min(P1(+), P2(+)) + min(P1(-), P2(-))`. A system is noncontextual iff a
//! multimaximal coupling exists, which is a linear feasibility question over
//! the 2^K atom probabilities of the joint.
//!
//! Multimaximality is imposed on every content-sharing pair, not only on
//! adjacent pairs of some ordering; for systems whose contents each occur in
//! two contexts the readings coincide.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{
    assignments, direct_influences, Assignment, Bunch, ContentId, ContextId, Marginal, Method,
    Outcome, System, Verdict,
};
use crate::ratlp::{solve_feasibility, FeasibilityProblem, SolveError};
use crate::rational::Rational;

/// Largest total variable count the exact solver will enumerate atoms for.
pub const DEFAULT_VARIABLE_CAP: usize = 20;

/// One random variable of a system: a content measured in a context.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VariableRef {
    pub content: ContentId,
    pub context: ContextId,
}

impl VariableRef {
    pub fn new(content: ContentId, context: ContextId) -> Self {
        VariableRef { content, context }
    }
}

impl fmt::Display for VariableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.content, self.context)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CouplingError {
    #[error("system has {variables} variables; the exact atom enumeration is capped at {cap}")]
    CapExceeded { variables: usize, cap: usize },
    #[error("variable {0} is not part of the coupling")]
    UnknownVariable(VariableRef),
    #[error("atom assignment length {got} does not match the {expected} coupling variables")]
    AssignmentLength { got: usize, expected: usize },
    #[error("atom probabilities must be nonnegative and sum to 1")]
    InvalidDistribution,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A joint distribution over every variable of a system.
///
/// Atoms are keyed by full ±1 assignments in variable order; zero-probability
/// atoms are not stored. The probabilities always sum to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling {
    variables: Vec<VariableRef>,
    atoms: BTreeMap<Assignment, Rational>,
}

impl Coupling {
    pub fn new(
        variables: Vec<VariableRef>,
        atoms: BTreeMap<Assignment, Rational>,
    ) -> Result<Self, CouplingError> {
        let mut total = Rational::zero();
        let mut kept = BTreeMap::new();
        for (assignment, p) in atoms {
            if assignment.len() != variables.len() {
                return Err(CouplingError::AssignmentLength {
                    got: assignment.len(),
                    expected: variables.len(),
                });
            }
            if p.is_negative() {
                return Err(CouplingError::InvalidDistribution);
            }
            if !p.is_zero() {
                total += &p;
                kept.insert(assignment, p);
            }
        }
        if !total.is_one() {
            return Err(CouplingError::InvalidDistribution);
        }
        Ok(Coupling { variables, atoms: kept })
    }

    /// Views a single bunch as the (trivial) coupling of a one-context system.
    pub fn from_bunch(bunch: &Bunch) -> Result<Self, CouplingError> {
        let variables = bunch
            .contents
            .iter()
            .map(|q| VariableRef::new(q.clone(), bunch.context.clone()))
            .collect();
        Coupling::new(variables, bunch.table.clone())
    }

    pub fn variables(&self) -> &[VariableRef] {
        &self.variables
    }

    pub fn atoms(&self) -> &BTreeMap<Assignment, Rational> {
        &self.atoms
    }

    fn position(&self, var: &VariableRef) -> Result<usize, CouplingError> {
        self.variables
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| CouplingError::UnknownVariable(var.clone()))
    }

    /// Projects the joint onto `refs`, in the given order.
    pub fn marginal(
        &self,
        refs: &[VariableRef],
    ) -> Result<BTreeMap<Assignment, Rational>, CouplingError> {
        let positions: Vec<usize> =
            refs.iter().map(|r| self.position(r)).collect::<Result<_, _>>()?;
        let mut projected: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (assignment, p) in &self.atoms {
            let key: Assignment = positions.iter().map(|&i| assignment[i]).collect();
            *projected.entry(key).or_insert_with(Rational::zero) += p;
        }
        Ok(projected)
    }

    /// The distribution of a single variable of the coupling.
    pub fn single_marginal(&self, var: &VariableRef) -> Result<Marginal, CouplingError> {
        let i = self.position(var)?;
        let mut plus = Rational::zero();
        let mut minus = Rational::zero();
        for (assignment, p) in &self.atoms {
            match assignment[i] {
                Outcome::Plus => plus += p,
                Outcome::Minus => minus += p,
            }
        }
        Ok(Marginal::new(plus, minus))
    }
}

/// `Prob[v1 = v2]` under the coupling.
pub fn coincidence_probability(
    coupling: &Coupling,
    v1: &VariableRef,
    v2: &VariableRef,
) -> Result<Rational, CouplingError> {
    let i = coupling.position(v1)?;
    let j = coupling.position(v2)?;
    let mut total = Rational::zero();
    for (assignment, p) in &coupling.atoms {
        if assignment[i] == assignment[j] {
            total += p;
        }
    }
    Ok(total)
}

/// The largest value `Prob[X = Y]` can take over joints of two ±1 variables
/// with marginals `m1` and `m2`.
pub fn multimaximal_target(m1: &Marginal, m2: &Marginal) -> Rational {
    let plus = if m1.plus <= m2.plus { m1.plus.clone() } else { m2.plus.clone() };
    let minus = if m1.minus <= m2.minus { m1.minus.clone() } else { m2.minus.clone() };
    plus + minus
}

/// A content-sharing pair of variables together with the coincidence
/// probability a multimaximal coupling must give it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTarget {
    pub pair: (VariableRef, VariableRef),
    pub target: Rational,
}

/// Every unordered pair of variables sharing a content, in content order
/// then context order, with its multimaximal coincidence target.
pub fn pair_targets(system: &System) -> Vec<PairTarget> {
    let mut targets = Vec::new();
    for content in &system.contents {
        let contexts = system.contexts_of(content);
        for i in 0..contexts.len() {
            for j in i + 1..contexts.len() {
                let m1 = system
                    .bunch(contexts[i])
                    .expect("context came from the system")
                    .single_marginal(content)
                    .expect("content is in this bunch");
                let m2 = system
                    .bunch(contexts[j])
                    .expect("context came from the system")
                    .single_marginal(content)
                    .expect("content is in this bunch");
                targets.push(PairTarget {
                    pair: (
                        VariableRef::new(content.clone(), contexts[i].clone()),
                        VariableRef::new(content.clone(), contexts[j].clone()),
                    ),
                    target: multimaximal_target(&m1, &m2),
                });
            }
        }
    }
    targets
}

/// The multimaximal-coupling feasibility program of a system.
///
/// Decision variables are the 2^K atom probabilities of the joint, ordered
/// like [`assignments`]`(K)` over the variable list. Equalities come in
/// three groups, in order: one row per assignment of each context's bunch
/// (the coupling property), one row per content-sharing pair (the
/// multimaximal coincidence targets), and the total-mass row. Redundant rows
/// are kept; the exact solver is indifferent to them.
#[derive(Clone, Debug)]
pub struct FeasibilityProgram {
    pub variables: Vec<VariableRef>,
    pub pair_targets: Vec<PairTarget>,
    pub problem: FeasibilityProblem,
}

impl FeasibilityProgram {
    pub fn num_atoms(&self) -> usize {
        1 << self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.problem.equalities.len()
    }
}

pub fn build_feasibility_program(system: &System) -> Result<FeasibilityProgram, CouplingError> {
    build_feasibility_program_with_cap(system, DEFAULT_VARIABLE_CAP)
}

pub fn build_feasibility_program_with_cap(
    system: &System,
    cap: usize,
) -> Result<FeasibilityProgram, CouplingError> {
    let mut variables = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for bunch in &system.bunches {
        let start = variables.len();
        for content in &bunch.contents {
            variables.push(VariableRef::new(content.clone(), bunch.context.clone()));
        }
        blocks.push((start..variables.len()).collect());
    }
    let k = variables.len();
    if k > cap {
        return Err(CouplingError::CapExceeded { variables: k, cap });
    }
    let num_atoms = 1usize << k;

    let mut equalities = Vec::new();
    for (bunch, positions) in system.bunches.iter().zip(&blocks) {
        let m = bunch.len();
        let mut rows = vec![vec![Rational::zero(); num_atoms]; 1 << m];
        let local_of = |atom: usize| {
            positions
                .iter()
                .fold(0usize, |acc, &p| acc << 1 | atom >> (k - 1 - p) & 1)
        };
        for (atom, local) in (0..num_atoms).map(|atom| (atom, local_of(atom))) {
            rows[local][atom] = Rational::one();
        }
        for (row, assignment) in rows.into_iter().zip(assignments(m)) {
            equalities.push((row, bunch.probability(&assignment)));
        }
    }

    let pair_targets = pair_targets(system);
    for pt in &pair_targets {
        let i = variables
            .iter()
            .position(|v| *v == pt.pair.0)
            .expect("pair variables come from the system");
        let j = variables
            .iter()
            .position(|v| *v == pt.pair.1)
            .expect("pair variables come from the system");
        let mut row = vec![Rational::zero(); num_atoms];
        for (atom, cell) in row.iter_mut().enumerate() {
            if atom >> (k - 1 - i) & 1 == atom >> (k - 1 - j) & 1 {
                *cell = Rational::one();
            }
        }
        equalities.push((row, pt.target.clone()));
    }

    equalities.push((vec![Rational::one(); num_atoms], Rational::one()));

    Ok(FeasibilityProgram {
        variables,
        pair_targets,
        problem: FeasibilityProblem::new(num_atoms, equalities),
    })
}

/// Why a claimed witness coupling fails to certify noncontextuality.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessDefect {
    #[error("coupling variables do not match the system's variables")]
    VariableSetMismatch,
    #[error("coupling marginal onto context {0} differs from its bunch")]
    BunchMismatch(ContextId),
    #[error("coincidence probability for {0} and {1} misses its maximum")]
    PairBelowMaximum(VariableRef, VariableRef),
}

/// Re-substitution check that `coupling` certifies `system` noncontextual:
/// every bunch is reproduced exactly under marginalization and every
/// content-sharing pair meets its multimaximal target exactly.
///
/// Independent of the LP encoding; works directly on the atom map.
pub fn verify_witness(system: &System, coupling: &Coupling) -> Result<(), WitnessDefect> {
    let expected: Vec<VariableRef> = system
        .bunches
        .iter()
        .flat_map(|bunch| {
            bunch
                .contents
                .iter()
                .map(|q| VariableRef::new(q.clone(), bunch.context.clone()))
        })
        .collect();
    if coupling.variables != expected {
        return Err(WitnessDefect::VariableSetMismatch);
    }
    for bunch in &system.bunches {
        let refs: Vec<VariableRef> = bunch
            .contents
            .iter()
            .map(|q| VariableRef::new(q.clone(), bunch.context.clone()))
            .collect();
        let marginal = coupling.marginal(&refs).expect("refs are coupling variables");
        if marginal != bunch.table {
            return Err(WitnessDefect::BunchMismatch(bunch.context.clone()));
        }
    }
    for pt in pair_targets(system) {
        let observed = coincidence_probability(coupling, &pt.pair.0, &pt.pair.1)
            .expect("pair variables are coupling variables");
        if observed != pt.target {
            return Err(WitnessDefect::PairBelowMaximum(pt.pair.0, pt.pair.1));
        }
    }
    Ok(())
}

/// Decides noncontextuality by solving the multimaximal-coupling
/// feasibility program exactly.
///
/// On feasible instances the verdict carries a witness coupling, already
/// re-checked against the system by [`verify_witness`].
pub fn is_noncontextual_lp(system: &System) -> Result<Verdict, CouplingError> {
    is_noncontextual_lp_with_cap(system, DEFAULT_VARIABLE_CAP)
}

pub fn is_noncontextual_lp_with_cap(
    system: &System,
    cap: usize,
) -> Result<Verdict, CouplingError> {
    let program = build_feasibility_program_with_cap(system, cap)?;
    let result = solve_feasibility(&program.problem)?;
    let witness = match result.solution {
        Some(solution) => {
            let k = program.variables.len();
            let atoms: BTreeMap<Assignment, Rational> = assignments(k)
                .zip(solution)
                .filter(|(_, p)| !p.is_zero())
                .collect();
            let coupling = Coupling::new(program.variables.clone(), atoms)?;
            assert_eq!(
                verify_witness(system, &coupling),
                Ok(()),
                "solver produced a coupling that fails re-substitution"
            );
            Some(coupling)
        }
        None => None,
    };
    Ok(Verdict {
        contextual: !result.feasible,
        method: Method::CouplingLp,
        lhs: None,
        rhs: None,
        witness,
        direct_influences: direct_influences(system),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{cyclic_criterion, detect_cycle};
    use crate::rational::{rat, rat_int};
    use crate::slits::{build_double_slit, paper_triple_slit_example, DoubleSlitParams};
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn content(name: &str) -> ContentId {
        ContentId::new(name)
    }

    fn context(name: &str) -> ContextId {
        ContextId::new(name)
    }

    fn var(q: &str, c: &str) -> VariableRef {
        VariableRef::new(content(q), context(c))
    }

    #[test]
    fn target_of_identical_uniform_marginals_is_one() {
        let uniform = Marginal::new(rat(1, 2), rat(1, 2));
        assert_eq!(multimaximal_target(&uniform, &uniform), rat_int(1));
    }

    #[test]
    fn target_of_three_tenths_and_half() {
        let m1 = Marginal::new(rat(3, 10), rat(7, 10));
        let m2 = Marginal::new(rat(1, 2), rat(1, 2));
        assert_eq!(multimaximal_target(&m1, &m2), rat(4, 5));
    }

    #[test]
    fn target_with_deterministic_minus_is_complement() {
        let p = rat(3, 7);
        let m1 = Marginal::new(rat_int(0), rat_int(1));
        let m2 = Marginal::new(p.clone(), rat_int(1) - &p);
        assert_eq!(multimaximal_target(&m1, &m2), rat_int(1) - &p);
        assert_eq!(multimaximal_target(&m2, &m1), rat_int(1) - &p);
    }

    #[test]
    fn target_is_one_exactly_for_identical_marginals() {
        for num in 0..=6i64 {
            for other in 0..=6i64 {
                let m1 = Marginal::new(rat(num, 6), rat(6 - num, 6));
                let m2 = Marginal::new(rat(other, 6), rat(6 - other, 6));
                let target = multimaximal_target(&m1, &m2);
                assert_eq!(target == rat_int(1), m1 == m2, "({num}/6, {other}/6)");
                assert_eq!(target, multimaximal_target(&m2, &m1));
            }
        }
    }

    #[test]
    fn double_slit_program_shape() {
        let params =
            DoubleSlitParams::new(rat(1, 2), rat(1, 2), rat(1, 4), rat(1, 4), rat_int(0)).unwrap();
        let program = build_feasibility_program(&build_double_slit(&params)).unwrap();
        assert_eq!(program.variables.len(), 8);
        assert_eq!(program.num_atoms(), 256);
        assert_eq!(program.pair_targets.len(), 4);
        // 4 contexts x 4 assignments, 4 pair rows, 1 mass row.
        assert_eq!(program.num_rows(), 21);
    }

    #[test]
    fn reduced_triple_slit_program_shape() {
        let program = build_feasibility_program(&paper_triple_slit_example()).unwrap();
        assert_eq!(program.variables.len(), 9);
        assert_eq!(program.num_atoms(), 512);
        assert_eq!(program.pair_targets.len(), 9);
        assert_eq!(program.num_rows(), 4 + 4 + 4 + 8 + 9 + 1);
    }

    #[test]
    fn cap_is_enforced() {
        let params =
            DoubleSlitParams::new(rat(1, 2), rat(1, 2), rat(1, 4), rat(1, 4), rat_int(0)).unwrap();
        let system = build_double_slit(&params);
        assert_eq!(
            build_feasibility_program_with_cap(&system, 7).unwrap_err(),
            CouplingError::CapExceeded { variables: 8, cap: 7 }
        );
        assert!(matches!(
            is_noncontextual_lp_with_cap(&system, 7),
            Err(CouplingError::CapExceeded { .. })
        ));
    }

    #[test]
    fn single_context_system_is_trivially_noncontextual() {
        let system = paper_triple_slit_example();
        let one_context = system.subsystem(&[context("c_ooo")]);
        let program = build_feasibility_program(&one_context).unwrap();
        assert_eq!(program.pair_targets.len(), 0);
        let verdict = is_noncontextual_lp(&one_context).unwrap();
        assert!(!verdict.contextual);
        let witness = verdict.witness.expect("feasible");
        let bunch = one_context.bunch(&context("c_ooo")).unwrap();
        assert_eq!(&witness, &Coupling::from_bunch(bunch).unwrap());
    }

    #[test]
    fn boundary_double_slit_is_feasible() {
        let params =
            DoubleSlitParams::new(rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat_int(0)).unwrap();
        let verdict = is_noncontextual_lp(&build_double_slit(&params)).unwrap();
        assert!(!verdict.contextual);
        assert!(verdict.witness.is_some());
        assert_eq!(verdict.method, Method::CouplingLp);
        assert_eq!(verdict.lhs, None);
    }

    #[test]
    fn paper_double_slit_witness_passes_re_substitution() {
        let params =
            DoubleSlitParams::new(rat(1, 2), rat(1, 2), rat(1, 4), rat(1, 4), rat_int(0)).unwrap();
        let system = build_double_slit(&params);
        let verdict = is_noncontextual_lp(&system).unwrap();
        let witness = verdict.witness.expect("noncontextual");
        assert_eq!(verify_witness(&system, &witness), Ok(()));
        let total: Rational = witness.atoms().values().sum();
        assert_eq!(total, rat_int(1));
    }

    #[test]
    fn pr_box_is_contextual_by_lp() {
        let verdict = is_noncontextual_lp(&crate::testutil::pr_box()).unwrap();
        assert!(verdict.contextual);
        assert!(verdict.witness.is_none());
    }

    #[test]
    fn paper_triple_slit_is_contextual() {
        let verdict = is_noncontextual_lp(&paper_triple_slit_example()).unwrap();
        assert!(verdict.contextual);
    }

    #[test]
    fn triple_slit_marginals_and_coincidences_contradict() {
        let system = paper_triple_slit_example();
        let full = Coupling::from_bunch(system.bunch(&context("c_ooo")).unwrap()).unwrap();
        let first = var("q_o..", "c_ooo");
        let third = var("q_..o", "c_ooo");
        assert_eq!(full.single_marginal(&first).unwrap().plus, rat(1, 1000));
        assert_eq!(full.single_marginal(&third).unwrap().plus, rat(1, 1000));
        assert_eq!(
            coincidence_probability(&full, &first, &third).unwrap(),
            rat(999, 1000)
        );

        let closed = Coupling::from_bunch(system.bunch(&context("c_oxo")).unwrap()).unwrap();
        let first = var("q_o..", "c_oxo");
        let third = var("q_..o", "c_oxo");
        assert_eq!(closed.single_marginal(&first).unwrap().plus, rat(1, 1000));
        assert_eq!(
            coincidence_probability(&closed, &first, &third).unwrap(),
            rat(49901, 50000)
        );
    }

    #[test]
    fn coincidence_of_a_variable_with_itself_is_one() {
        let system = paper_triple_slit_example();
        let coupling = Coupling::from_bunch(system.bunch(&context("c_ooo")).unwrap()).unwrap();
        let v = var("q_.o.", "c_ooo");
        assert_eq!(coincidence_probability(&coupling, &v, &v).unwrap(), rat_int(1));
    }

    #[test]
    fn unknown_variable_is_reported() {
        let system = paper_triple_slit_example();
        let coupling = Coupling::from_bunch(system.bunch(&context("c_ooo")).unwrap()).unwrap();
        let stranger = var("q_o..", "c_oxo");
        assert_eq!(
            coincidence_probability(&coupling, &stranger, &stranger).unwrap_err(),
            CouplingError::UnknownVariable(stranger)
        );
    }

    #[test]
    fn coupling_rejects_bad_distributions() {
        let vars = vec![var("q", "c")];
        let short: BTreeMap<Assignment, Rational> = [(vec![], rat_int(1))].into();
        assert!(matches!(
            Coupling::new(vars.clone(), short),
            Err(CouplingError::AssignmentLength { got: 0, expected: 1 })
        ));
        let deficient: BTreeMap<Assignment, Rational> =
            [(vec![Outcome::Plus], rat(1, 2))].into();
        assert_eq!(
            Coupling::new(vars, deficient).unwrap_err(),
            CouplingError::InvalidDistribution
        );
    }

    fn random_cyclic_system(rng: &mut ChaCha8Rng, rank: usize) -> System {
        let contents: Vec<ContentId> =
            (1..=rank).map(|i| content(&format!("q{i}"))).collect();
        let bunches = (0..rank)
            .map(|i| {
                let mut weights: Vec<u64> = (0..4).map(|_| rng.next_u64() % 9).collect();
                if weights.iter().all(|w| *w == 0) {
                    weights[0] = 1;
                }
                let total: u64 = weights.iter().sum();
                let table: BTreeMap<Assignment, Rational> = assignments(2)
                    .zip(&weights)
                    .map(|(a, &w)| (a, rat(w as i64, total as i64)))
                    .collect();
                Bunch::new(
                    context(&format!("c{i}")),
                    vec![contents[i].clone(), contents[(i + 1) % rank].clone()],
                    table,
                )
                .unwrap()
            })
            .collect();
        System::new(contents, bunches)
    }

    #[test]
    fn lp_agrees_with_rank_three_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let system = random_cyclic_system(&mut rng, 3);
            let layout = detect_cycle(&system).expect("constructed cyclic");
            let (criterion, _) = cyclic_criterion(&system, &layout).unwrap();
            let lp = is_noncontextual_lp(&system).unwrap();
            assert_eq!(criterion.contextual, lp.contextual, "{system:?}");
            if let Some(witness) = &lp.witness {
                assert_eq!(verify_witness(&system, witness), Ok(()));
            }
        }
    }
}
