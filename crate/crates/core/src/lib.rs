//! Deciding contextuality of content-context systems of binary random
//! variables, exactly.
//!
//! A *system* is a family of ±1 random variables, each identified by what it
//! measures (its content) and the circumstances of the measurement (its
//! context). Variables sharing a context are jointly distributed (a bunch);
//! variables sharing a content across contexts are not, and the question is
//! whether a single joint distribution — a coupling — can reproduce every
//! bunch while making every content-sharing pair coincide with the largest
//! probability their marginals allow. If so, the system is noncontextual.
//!
//! Two decision routes are provided:
//!
//! - [`cyclic::cyclic_criterion`] evaluates the closed-form inequality that
//!   settles the question for cyclic systems (every context two contents,
//!   every content two contexts, arranged in a single cycle);
//! - [`coupling::is_noncontextual_lp`] decides any small system by solving
//!   the coupling feasibility problem with an exact rational simplex.
//!
//! [`reduce`] shrinks systems without changing their verdict, and [`slits`]
//! builds the n-slit detection systems this toolkit was written to analyze:
//! double-slit systems are noncontextual at every allowed parameter choice
//! (decidable in closed form via [`slits::closed_form_double_slit`]), while
//! [`slits::paper_triple_slit_example`] shows three slits suffice for
//! contextuality.
//!
//! All arithmetic is exact: probabilities are arbitrary-precision rationals
//! and every verdict, witness, and report value is computed without
//! rounding.

pub mod coupling;
pub mod cyclic;
pub mod model;
pub mod ratlp;
pub mod rational;
pub mod reduce;
pub mod slits;

#[cfg(test)]
pub(crate) mod testutil;

pub use coupling::{
    build_feasibility_program, coincidence_probability, is_noncontextual_lp, multimaximal_target,
    verify_witness, Coupling, CouplingError, VariableRef,
};
pub use cyclic::{cyclic_criterion, detect_cycle, odd_sign_max, CriterionReport, CyclicLayout};
pub use model::{
    consistent_connectedness, direct_influences, validate_system, Bunch, ContentId, ContextId,
    Method, Outcome, System, Verdict,
};
pub use rational::{format_rational, parse_rational, Rational};
pub use reduce::{drop_deterministic_variables, drop_small_contexts, reduce_fixpoint, ReductionTrace};
pub use slits::{
    build_double_slit, build_triple_slit, closed_form_double_slit, paper_triple_slit_example,
    sample_double_slit_params, verify_closed_form_equivalence, ClosedFormReport, DoubleSlitParams,
    TripleSlitSpec,
};
