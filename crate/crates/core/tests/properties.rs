//! Invariants over generated terms, specifications and measures.

mod common;

use std::collections::BTreeSet;

use bnformat::dyadic::{inverse_formula, inverse_tss, transform_formula, transform_tss};
use bnformat::lts::{property_implies, universe_size, Bounds};
use bnformat::spec_file::{parse_spec_file, render_tss};
use bnformat::strat::{check_strat_conditions, StratStatus};
use bnformat::term::{enumerate_closed_terms, in_universe};
use bnformat::tss::{instantiate_template, Affine, ITerm, Ix, Template};
use bnformat::{DyadicKind, PropertyId, Term};
use common::*;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn match_recovers_an_instance(p in open_term(3), theta in subst(2)) {
        laws::matching(&p, &theta)?;
    }

    #[test]
    fn unifier_equates_and_is_idempotent(t in open_term(3), u in open_term(3)) {
        laws::unification(&t, &u)?;
    }

    #[test]
    fn unify_succeeds_on_instances(t in open_term(3), theta in subst(2)) {
        laws::unify_instance(&t, &theta)?;
    }

    #[test]
    fn match_agrees_with_unify_on_closed_subjects(p in open_term(3), s in closed_term(3)) {
        laws::match_vs_unify(&p, &s)?;
    }

    #[test]
    fn alpha_variance_is_an_equivalence(t in open_term(3), r1 in renaming(), r2 in renaming()) {
        laws::alpha_equivalence(&t, &r1, &r2)?;
    }

    #[test]
    fn measures_terminate(m in measure(), o in closed_term(3)) {
        laws::measure_termination(&m, &o)?;
    }

    #[test]
    fn derivation_is_monotone_in_bounds(r in tss(2), h in 0usize..3) {
        laws::derivation_monotone(&r, h)?;
    }

    #[test]
    fn enumeration_is_monotone_and_counted(h in 0usize..4) {
        let sig = signature();
        let a: BTreeSet<Term> = enumerate_closed_terms(&sig, h, 1).unwrap().into_iter().collect();
        let b: BTreeSet<Term> = enumerate_closed_terms(&sig, h + 1, 1).unwrap().into_iter().collect();
        prop_assert!(a.is_subset(&b));
        prop_assert_eq!(a.len() as u128, universe_size(&sig, h, 1));
        prop_assert!(a.iter().all(|t| t.height() <= h && in_universe(&sig, t, h, 1)));
    }

    #[test]
    fn template_instances_extend(n in 1u64..12, start in 1u64..4) {
        let x = ITerm::Var(bnformat::term::name("x"));
        let tpl = Template {
            name: "T".into(),
            start,
            families: vec![],
            premises: vec![bnformat::Formula::new(
                vec![ITerm::Pow("g".into(), Affine::index(Ix::I, 0), Box::new(x.clone()))],
                vec![ITerm::Fam("l".into(), Affine::index(Ix::I, 0)), x.clone()],
            )],
            conclusion: bnformat::Formula::new(
                vec![ITerm::App("f".into(), vec![x.clone()])],
                vec![ITerm::Fam("l".into(), Affine::constant(1)), x],
            ),
        };
        let a = instantiate_template(&tpl, n).unwrap();
        let b = instantiate_template(&tpl, n + 1).unwrap();
        prop_assert_eq!(&b[..a.len()], &a[..]);
        prop_assert_eq!(b.len() as u64, (n + 1).saturating_sub(start));
    }

    #[test]
    fn dyadic_formulas_round_trip(f in formula(3), k in 0usize..6) {
        let kind = DyadicKind::IDENTITIES[k];
        let d = transform_formula(&f, kind);
        prop_assert_eq!(inverse_formula(&d, kind).unwrap(), f);
    }

    #[test]
    fn dyadic_specifications_round_trip(r in tss(3), k in 0usize..6) {
        let d = transform_tss(&r, DyadicKind::IDENTITIES[k]).unwrap();
        prop_assert_eq!(inverse_tss(&d).unwrap(), r);
    }

    #[test]
    fn render_then_parse_is_identity(r in tss(3)) {
        let text = render_tss(&r);
        let back = parse_spec_file(&text).unwrap();
        prop_assert_eq!(back.tss, r);
    }

    #[test]
    fn symbolic_pass_has_no_bounded_counterexample(r in tss(2), m in measure()) {
        let small = check_strat_conditions(&r, &m, Bounds::new(2, 1, 50));
        if small.status == StratStatus::PassSymbolic {
            let wide = check_strat_conditions(&r, &m, Bounds::new(3, 1, 50));
            prop_assert_ne!(wide.status, StratStatus::Fail);
        }
    }
}

#[test]
fn implication_is_a_partial_order() {
    let all = PropertyId::ALL;
    for &p in &all {
        assert!(property_implies(p, p));
        for &q in &all {
            if p != q {
                assert!(!(property_implies(p, q) && property_implies(q, p)), "{p} and {q}");
            }
            for &r in &all {
                if property_implies(p, q) && property_implies(q, r) {
                    assert!(property_implies(p, r), "{p} {q} {r}");
                }
            }
        }
    }
}
