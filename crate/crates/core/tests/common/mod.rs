//! Generators shared by the property suites and the acceptance run.
#![allow(dead_code)]

use bnformat::strat::{MTerm, StratMeasure};
use bnformat::term::{name, Subst};
use bnformat::tss::{Formula, Rule, Tss};
use bnformat::{Signature, Term};
use proptest::prelude::*;

pub const VARS: [&str; 3] = ["x", "y", "z"];

/// Two constants and two unary symbols: 30 closed terms up to height 3.
pub fn signature() -> Signature {
    let mut sig = Signature::new();
    for (s, a) in [("c", 0), ("d", 0), ("f", 1), ("g", 1)] {
        sig.add(s, a).unwrap();
    }
    sig
}

fn grow(leaf: BoxedStrategy<Term>, height: u32) -> BoxedStrategy<Term> {
    leaf.prop_recursive(height, 16, 2, |inner| {
        prop_oneof![inner.clone().prop_map(|t| Term::app("f", vec![t])), inner.prop_map(|t| Term::app("g", vec![t])),]
    })
    .boxed()
}

pub fn closed_term(height: u32) -> BoxedStrategy<Term> {
    grow(prop_oneof![Just(Term::constant("c")), Just(Term::constant("d"))].boxed(), height)
}

pub fn open_term(height: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        2 => prop::sample::select(&VARS[..]).prop_map(Term::var),
        1 => Just(Term::constant("c")),
        1 => Just(Term::constant("d")),
    ];
    grow(leaf.boxed(), height)
}

pub fn formula(height: u32) -> impl Strategy<Value = Formula<Term>> {
    (open_term(height), open_term(height), open_term(height)).prop_map(|(s, l, t)| Formula::triadic(s, l, t))
}

pub fn rule(height: u32) -> impl Strategy<Value = (Vec<Formula<Term>>, Formula<Term>)> {
    (prop::collection::vec(formula(height), 0..=2), formula(height))
}

/// Finite triadic specifications with at most six rules.
pub fn tss(height: u32) -> impl Strategy<Value = Tss> {
    prop::collection::vec(rule(height), 0..=6).prop_map(|rs| {
        let mut tss = Tss::new(signature());
        for (i, (prem, concl)) in rs.into_iter().enumerate() {
            tss.rules.push(Rule::new(&format!("R{i}"), prem, concl));
        }
        tss
    })
}

/// A substitution over the shared variables.
pub fn subst(height: u32) -> impl Strategy<Value = Subst> {
    prop::collection::vec((prop::sample::select(&VARS[..]), open_term(height)), 0..=3)
        .prop_map(|bs| bs.into_iter().map(|(v, t)| (name(v), t)).collect())
}

/// Injective renaming of the shared variables onto fresh names.
pub fn renaming() -> impl Strategy<Value = Vec<(String, String)>> {
    Just(VARS.iter().map(|v| v.to_string()).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|targets| VARS.iter().zip(targets).map(|(v, t)| (v.to_string(), format!("{t}'"))).collect())
}

pub fn rename(t: &Term, map: &[(String, String)]) -> Term {
    t.rename(&|v| map.iter().find(|(a, _)| a.as_str() == &**v).map_or_else(|| v.clone(), |(_, b)| name(b)))
}

/// Measures with unary patterns. Recursive calls may be ill-formed on
/// purpose: on a proper subterm, on the pattern itself, or on a larger term.
pub fn measure() -> impl Strategy<Value = StratMeasure> {
    let p = || Term::var("p");
    let patterns = vec![
        Term::constant("c"),
        Term::constant("d"),
        Term::app("f", vec![p()]),
        Term::app("g", vec![p()]),
        Term::app("f", vec![Term::app("g", vec![p()])]),
        p(),
    ];
    let clause = (prop::sample::select(patterns), 0u64..4, 0usize..4);
    prop::collection::vec(clause, 1..=5).prop_map(move |cs| {
        let mut m = StratMeasure::new("S");
        for (pat, n, call) in cs {
            let mut expr = vec![MTerm::Nat(n)];
            let vars = pat.vars();
            let arg = match call {
                0 => None,
                1 if !vars.is_empty() => Some(p()),
                2 => Some(pat.clone()),
                3 => Some(Term::app("f", vec![pat.clone()])),
                _ => None,
            };
            if let Some(a) = arg {
                expr.push(MTerm::Call(vec![a]));
            }
            m = m.clause(vec![pat], expr);
        }
        m
    })
}

/// Invariant checks shared by the property suites and the acceptance run.
pub mod laws {
    use bnformat::lts::{derive_lts, Bounds};
    use bnformat::strat::StratMeasure;
    use bnformat::term::{alpha_variant, match_term, name, unify};
    use bnformat::{Subst, Term, Tss};
    use proptest::prelude::*;
    use proptest::test_runner::TestCaseError;

    use super::rename;

    pub fn matching(p: &Term, theta: &Subst) -> Result<(), TestCaseError> {
        let s = p.apply(theta);
        let sigma = match_term(p, &s).ok_or_else(|| TestCaseError::fail("an instance must match its pattern"))?;
        prop_assert_eq!(p.apply(&sigma), s);
        prop_assert!(sigma.domain().is_subset(&p.vars()));
        Ok(())
    }

    pub fn unification(t: &Term, u: &Term) -> Result<(), TestCaseError> {
        if let Some(sigma) = unify(t, u) {
            let (a, b) = (t.apply(&sigma), u.apply(&sigma));
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.apply(&sigma), a);
        }
        prop_assert_eq!(unify(t, u).is_some(), unify(u, t).is_some());
        Ok(())
    }

    pub fn unify_instance(t: &Term, theta: &Subst) -> Result<(), TestCaseError> {
        let s = t.apply(theta);
        let ground: Subst = s.vars().into_iter().map(|v| (v, Term::constant("c"))).collect();
        let closed = s.apply(&ground);
        let sigma = match_term(t, &closed).ok_or_else(|| TestCaseError::fail("a closed instance must match"))?;
        prop_assert_eq!(t.apply(&sigma), closed.clone());
        let mgu = unify(t, &closed).ok_or_else(|| TestCaseError::fail("a closed instance must unify"))?;
        prop_assert_eq!(t.apply(&mgu), closed);
        Ok(())
    }

    pub fn match_vs_unify(p: &Term, s: &Term) -> Result<(), TestCaseError> {
        prop_assert_eq!(match_term(p, s).is_some(), unify(p, s).is_some());
        Ok(())
    }

    pub fn alpha_equivalence(t: &Term, r1: &[(String, String)], r2: &[(String, String)]) -> Result<(), TestCaseError> {
        let u = rename(t, r1);
        let back: Vec<(String, String)> = r2.iter().map(|(a, b)| (b.clone(), format!("{a}2"))).collect();
        let w = rename(&u, &back);
        prop_assert!(alpha_variant(t, t));
        prop_assert!(alpha_variant(t, &u) && alpha_variant(&u, t));
        prop_assert!(alpha_variant(&u, &w));
        prop_assert!(alpha_variant(t, &w));
        let merged = t.rename(&|_| name("x"));
        prop_assert_eq!(alpha_variant(t, &merged), t.vars().len() <= 1);
        Ok(())
    }

    pub fn measure_termination(m: &StratMeasure, o: &Term) -> Result<(), TestCaseError> {
        let r = m.eval(std::slice::from_ref(o));
        if m.problems().is_empty() {
            prop_assert!(r.is_ok(), "well-formed measure failed on {}: {:?}", o, r);
        }
        Ok(())
    }

    pub fn derivation_monotone(r: &Tss, h: usize) -> Result<(), TestCaseError> {
        let small = derive_lts(r, Bounds::new(h, 1, 50)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let big = derive_lts(r, Bounds::new(h + 1, 1, 50)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(small.transitions.is_subset(&big.transitions));
        Ok(())
    }
}
