//! Contextuality-preserving system reductions.
//!
//! Two transformations leave a system's contextuality verdict unchanged:
//! deleting a variable that equals a constant with probability 1, and
//! deleting a context holding at most one variable. Iterating both to a
//! fixpoint shrinks slit systems drastically — the double-slit system
//! collapses to its single both-open context, whose noncontextuality is
//! immediate.

use std::collections::BTreeSet;

use crate::coupling::VariableRef;
use crate::model::{ContentId, ContextId, System};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    DropDeterministicVariable(VariableRef),
    DropSmallContext(ContextId),
}

/// One reduction step with the systems on either side of it. Every step
/// strictly decreases the variable count or the context count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub before: System,
    pub after: System,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    fn extend(&mut self, other: ReductionTrace) {
        self.steps.extend(other.steps);
    }
}

/// `system` without the variable `content`-in-`context`; the bunch is
/// marginalized onto its remaining contents and contents left with no
/// variable anywhere are dropped from the content list.
fn remove_variable(system: &System, context: &ContextId, content: &ContentId) -> System {
    let bunches: Vec<_> = system
        .bunches
        .iter()
        .map(|bunch| {
            if bunch.context != *context {
                return bunch.clone();
            }
            let remaining: Vec<ContentId> =
                bunch.contents.iter().filter(|q| *q != content).cloned().collect();
            bunch.marginal(&remaining).expect("remaining contents are in the bunch")
        })
        .collect();
    prune_contents(system, bunches)
}

fn remove_context(system: &System, context: &ContextId) -> System {
    let bunches: Vec<_> =
        system.bunches.iter().filter(|b| b.context != *context).cloned().collect();
    prune_contents(system, bunches)
}

fn prune_contents(system: &System, bunches: Vec<crate::model::Bunch>) -> System {
    let used: BTreeSet<&ContentId> = bunches.iter().flat_map(|b| &b.contents).collect();
    let contents: Vec<ContentId> =
        system.contents.iter().filter(|q| used.contains(q)).cloned().collect();
    System::new(contents, bunches)
}

/// Deletes every variable that is constant with probability 1 (at either
/// value), one trace step per variable, scanning contexts in system order.
pub fn drop_deterministic_variables(system: &System) -> (System, ReductionTrace) {
    let mut current = system.clone();
    let mut trace = ReductionTrace::default();
    loop {
        let found = current.bunches.iter().find_map(|bunch| {
            bunch.contents.iter().find_map(|content| {
                bunch
                    .is_deterministic(content)
                    .expect("content is in its own bunch")
                    .map(|_| (bunch.context.clone(), content.clone()))
            })
        });
        let Some((context, content)) = found else {
            return (current, trace);
        };
        let after = remove_variable(&current, &context, &content);
        trace.steps.push(ReductionStep {
            kind: StepKind::DropDeterministicVariable(VariableRef::new(content, context)),
            before: current,
            after: after.clone(),
        });
        current = after;
    }
}

/// Deletes every context holding at most one variable, one trace step per
/// context, in system order.
pub fn drop_small_contexts(system: &System) -> (System, ReductionTrace) {
    let mut current = system.clone();
    let mut trace = ReductionTrace::default();
    loop {
        let found = current
            .bunches
            .iter()
            .find(|bunch| bunch.len() <= 1)
            .map(|bunch| bunch.context.clone());
        let Some(context) = found else {
            return (current, trace);
        };
        let after = remove_context(&current, &context);
        trace.steps.push(ReductionStep {
            kind: StepKind::DropSmallContext(context),
            before: current,
            after: after.clone(),
        });
        current = after;
    }
}

/// Alternates the two passes until neither changes the system. Terminates
/// because every step removes a variable or a context.
pub fn reduce_fixpoint(system: &System) -> (System, ReductionTrace) {
    let mut current = system.clone();
    let mut trace = ReductionTrace::default();
    loop {
        let (next, dropped_vars) = drop_deterministic_variables(&current);
        let (next, dropped_contexts) = drop_small_contexts(&next);
        let done = dropped_vars.is_empty() && dropped_contexts.is_empty();
        trace.extend(dropped_vars);
        trace.extend(dropped_contexts);
        current = next;
        if done {
            return (current, trace);
        }
    }
}
