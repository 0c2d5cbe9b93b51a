//! Bundled demonstration systems: the two slit systems at their headline
//! parameter points and a PR box, the standard maximally contextual
//! rank-4 cyclic system.

use std::collections::BTreeMap;

use cbd_core::model::{Bunch, ContentId, ContextId, System};
use cbd_core::rational::{rat, rat_int, Rational};
use cbd_core::slits::DoubleSlitParams;
use cbd_core::Outcome;

/// The double-slit parameter point used by the demo and the bundled file:
/// each slit alone detects with probability 1/2, and with both open each
/// single-slit path contributes 1/4 with no both-slits path.
pub fn demo_double_slit_params() -> DoubleSlitParams {
    DoubleSlitParams::new(rat(1, 2), rat(1, 2), rat(1, 4), rat(1, 4), rat_int(0))
        .expect("parameters are in range")
}

/// One-line description embedded in emitted double-slit documents.
pub fn double_slit_description(params: &DoubleSlitParams) -> String {
    use cbd_core::rational::format_rational;
    format!(
        "double-slit detection system at p={}, q={}, p'={}, q'={}, r'={}",
        format_rational(params.left_only()),
        format_rational(params.right_only()),
        format_rational(params.via_left()),
        format_rational(params.via_right()),
        format_rational(params.via_both())
    )
}

/// A PR box: four contents in a cycle of four pair contexts, perfectly
/// correlated in three and perfectly anticorrelated in the fourth, every
/// marginal uniform. Product expectations (1, 1, 1, -1) put the cyclic
/// criterion at lhs 4 against rhs 2.
pub fn pr_box_system() -> System {
    let contents: Vec<ContentId> = (1..=4).map(|i| ContentId::new(format!("q{i}"))).collect();
    let bunches = (0..4)
        .map(|i| {
            let correlated = i < 3;
            let half = rat(1, 2);
            let table: BTreeMap<Vec<Outcome>, Rational> = if correlated {
                [
                    (vec![Outcome::Plus, Outcome::Plus], half.clone()),
                    (vec![Outcome::Minus, Outcome::Minus], half),
                ]
                .into()
            } else {
                [
                    (vec![Outcome::Plus, Outcome::Minus], half.clone()),
                    (vec![Outcome::Minus, Outcome::Plus], half),
                ]
                .into()
            };
            Bunch::new(
                ContextId::new(format!("c{}", i + 1)),
                vec![contents[i].clone(), contents[(i + 1) % 4].clone()],
                table,
            )
            .expect("table arity matches")
        })
        .collect();
    System::new(contents, bunches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cbd_core::coupling::is_noncontextual_lp;
    use cbd_core::cyclic::{cyclic_criterion, detect_cycle};
    use cbd_core::slits::closed_form_double_slit;

    #[test]
    fn pr_box_is_maximally_contextual() {
        let system = pr_box_system();
        let layout = detect_cycle(&system).expect("rank-4 cycle");
        let (verdict, report) = cyclic_criterion(&system, &layout).unwrap();
        assert!(verdict.contextual);
        assert_eq!(report.lhs, rat_int(4));
        assert_eq!(report.rhs, rat_int(2));
        assert!(is_noncontextual_lp(&system).unwrap().contextual);
    }

    #[test]
    fn demo_double_slit_point_is_noncontextual() {
        assert!(closed_form_double_slit(&demo_double_slit_params()).noncontextual);
    }
}
