//! Formulae, rules, indexed rule templates and whole specifications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::dyadic::DyadicKind;
use crate::term::{match_tuple, name, show_tuple, Name, Signature, Subst, Term};
use crate::verdict::{Outcome, Verdict, Witness};

/// A transition formula stored as a (source, target) pair of term tuples.
/// A triadic `t -l-> t'` is kept as source `[t]`, target `[l, t']`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula<T> {
    pub source: Vec<T>,
    pub target: Vec<T>,
}

impl<T> Formula<T> {
    pub fn new(source: Vec<T>, target: Vec<T>) -> Self {
        Formula { source, target }
    }

    pub fn components(&self) -> impl Iterator<Item = &T> {
        self.source.iter().chain(self.target.iter())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Formula<U> {
        Formula { source: self.source.iter().map(&f).collect(), target: self.target.iter().map(&f).collect() }
    }

    pub fn try_map<U, E>(&self, f: impl Fn(&T) -> Result<U, E>) -> Result<Formula<U>, E> {
        Ok(Formula {
            source: self.source.iter().map(&f).collect::<Result<_, _>>()?,
            target: self.target.iter().map(&f).collect::<Result<_, _>>()?,
        })
    }
}

impl Formula<Term> {
    /// `t -l-> t'` in the triadic layout.
    pub fn triadic(t: Term, l: Term, t2: Term) -> Self {
        Formula { source: vec![t], target: vec![l, t2] }
    }

    pub fn apply(&self, sigma: &Subst) -> Self {
        self.map(|t| t.apply(sigma))
    }

    pub fn is_closed(&self) -> bool {
        self.components().all(Term::is_closed)
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.components().for_each(|t| t.collect_vars(&mut out));
        out
    }
}

impl fmt::Display for Formula<Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", show_tuple(&self.source), show_tuple(&self.target))
    }
}

/// Triadic or dyadic reading of every formula in a specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Triadic,
    Dyadic(DyadicKind),
}

impl Shape {
    pub fn arities(self) -> (usize, usize) {
        match self {
            Shape::Triadic => (1, 2),
            Shape::Dyadic(k) => k.arities(),
        }
    }
}

/// Which template index an index expression refers to: the template's own
/// `i`, or the `j` of a premise family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ix {
    I,
    J,
}

impl fmt::Display for Ix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ix::I => "i",
            Ix::J => "j",
        })
    }
}

/// `var + offset`, or a plain constant when `var` is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub var: Option<Ix>,
    pub offset: i64,
}

impl Affine {
    pub fn constant(c: i64) -> Self {
        Affine { var: None, offset: c }
    }

    pub fn index(ix: Ix, offset: i64) -> Self {
        Affine { var: Some(ix), offset }
    }

    fn eval(&self, env: &IxEnv) -> Result<Affine, TssError> {
        match self.var.and_then(|ix| env.get(ix)) {
            None => Ok(*self),
            Some(v) => {
                let n = v as i64 + self.offset;
                if n < 0 {
                    return Err(TssError::NegativeIndex(self.to_string(), v));
                }
                Ok(Affine::constant(n))
            }
        }
    }

    fn value(&self) -> Option<i64> {
        self.var.is_none().then_some(self.offset)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.var, self.offset) {
            (None, c) => write!(f, "{c}"),
            (Some(ix), 0) => write!(f, "{ix}"),
            (Some(ix), c) if c > 0 => write!(f, "{ix}+{c}"),
            (Some(ix), c) => write!(f, "{ix}-{}", -c),
        }
    }
}

/// A term that may mention template indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ITerm {
    Var(Name),
    /// A variable whose name is subscripted by an index, such as `y_i`.
    IVar(Name, Ix),
    App(Name, Vec<ITerm>),
    Fam(Name, Affine),
    /// `g^n(t)`.
    Pow(Name, Affine, Box<ITerm>),
}

impl ITerm {
    pub fn from_term(t: &Term) -> ITerm {
        match t {
            Term::Var(v) => ITerm::Var(v.clone()),
            Term::Fam(l, i) => ITerm::Fam(l.clone(), Affine::constant(*i as i64)),
            Term::App(f, args) => ITerm::App(f.clone(), args.iter().map(ITerm::from_term).collect()),
        }
    }

    pub fn mentions(&self, ix: Ix) -> bool {
        match self {
            ITerm::Var(_) => false,
            ITerm::IVar(_, k) => *k == ix,
            ITerm::App(_, args) => args.iter().any(|a| a.mentions(ix)),
            ITerm::Fam(_, a) => a.var == Some(ix),
            ITerm::Pow(_, a, t) => a.var == Some(ix) || t.mentions(ix),
        }
    }

    /// Whether `ix` occurs in a family index or an exponent, as opposed to
    /// only in variable subscripts.
    pub fn mentions_structurally(&self, ix: Ix) -> bool {
        match self {
            ITerm::Var(_) | ITerm::IVar(..) => false,
            ITerm::App(_, args) => args.iter().any(|a| a.mentions_structurally(ix)),
            ITerm::Fam(_, a) => a.var == Some(ix),
            ITerm::Pow(_, a, t) => a.var == Some(ix) || t.mentions_structurally(ix),
        }
    }

    pub fn affines(&self, out: &mut Vec<Affine>) {
        match self {
            ITerm::Var(_) | ITerm::IVar(..) => {}
            ITerm::App(_, args) => args.iter().for_each(|a| a.affines(out)),
            ITerm::Fam(_, a) => out.push(*a),
            ITerm::Pow(_, a, t) => {
                out.push(*a);
                t.affines(out);
            }
        }
    }

    /// Substitutes the indices bound in `env`, keeping the others symbolic.
    pub fn bind(&self, env: &IxEnv) -> Result<ITerm, TssError> {
        Ok(match self {
            ITerm::Var(_) => self.clone(),
            ITerm::IVar(v, ix) => match env.get(*ix) {
                Some(n) => ITerm::Var(name(&format!("{v}_{n}"))),
                None => self.clone(),
            },
            ITerm::App(f, args) => ITerm::App(f.clone(), args.iter().map(|a| a.bind(env)).collect::<Result<_, _>>()?),
            ITerm::Fam(l, a) => ITerm::Fam(l.clone(), a.eval(env)?),
            ITerm::Pow(g, a, t) => {
                let a = a.eval(env)?;
                let t = t.bind(env)?;
                match a.value() {
                    Some(n) => {
                        let mut acc = t;
                        for _ in 0..n {
                            acc = ITerm::App(g.clone(), vec![acc]);
                        }
                        acc
                    }
                    None => ITerm::Pow(g.clone(), a, Box::new(t)),
                }
            }
        })
    }

    /// Converts to a plain term once every index is bound.
    pub fn to_term(&self) -> Result<Term, TssError> {
        match self {
            ITerm::Var(v) => Ok(Term::Var(v.clone())),
            ITerm::IVar(v, ix) => Err(TssError::UnboundIndex(format!("{v}_{ix}"))),
            ITerm::App(f, args) => Ok(Term::App(f.clone(), args.iter().map(ITerm::to_term).collect::<Result<_, _>>()?)),
            ITerm::Fam(l, a) => match a.value() {
                Some(n) if n >= 0 && n < u32::MAX as i64 - 1 => Ok(Term::Fam(l.clone(), n as u32)),
                Some(n) => Err(TssError::NegativeIndex(n.to_string(), 0)),
                None => Err(TssError::UnboundIndex(format!("{l}({a})"))),
            },
            ITerm::Pow(g, a, _) => Err(TssError::UnboundIndex(format!("{g}^({a})"))),
        }
    }

    pub fn instantiate(&self, env: &IxEnv) -> Result<Term, TssError> {
        self.bind(env)?.to_term()
    }
}

impl fmt::Display for ITerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ITerm::Var(v) => write!(f, "{v}"),
            ITerm::IVar(v, ix) => write!(f, "{v}_{ix}"),
            ITerm::Fam(l, a) => match a.value() {
                Some(n) => write!(f, "{l}{n}"),
                None => write!(f, "{l}({a})"),
            },
            ITerm::App(g, args) if args.is_empty() => write!(f, "{g}"),
            ITerm::App(g, args) => {
                write!(f, "{g}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            ITerm::Pow(g, a, t) => match (a.value(), a.offset) {
                (Some(n), _) => write!(f, "{g}^{n}({t})"),
                (None, 0) => write!(f, "{g}^{}({t})", a.var.unwrap()),
                (None, _) => write!(f, "{g}^({a})({t})"),
            },
        }
    }
}

/// Bindings for the template indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IxEnv {
    pub i: Option<u64>,
    pub j: Option<u64>,
}

impl IxEnv {
    pub fn i(i: u64) -> Self {
        IxEnv { i: Some(i), j: None }
    }

    fn get(&self, ix: Ix) -> Option<u64> {
        match ix {
            Ix::I => self.i,
            Ix::J => self.j,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TssError {
    #[error("index expression `{0}` is negative at index {1}")]
    NegativeIndex(String, u64),
    #[error("index in `{0}` is not bound")]
    UnboundIndex(String),
    #[error("index upper bound must be at least 1")]
    ZeroBound,
    #[error("the specification is already dyadic")]
    AlreadyDyadic,
    #[error("the specification is not dyadic")]
    NotDyadic,
    #[error("inverse reconstruction is only defined for identity kinds, not {0}")]
    NotInvertible(DyadicKind),
}

/// A transition rule. `families` holds premise families `{ v_j -> w_j | j }`
/// whose members differ structurally in `j`; such a rule has infinitely many
/// premises and can never fire on a finite derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<Formula<Term>>,
    pub families: Vec<Formula<ITerm>>,
    pub conclusion: Formula<Term>,
}

impl Rule {
    pub fn new(name: &str, premises: Vec<Formula<Term>>, conclusion: Formula<Term>) -> Self {
        Rule { name: name.to_string(), premises, families: Vec::new(), conclusion }
    }

    pub fn source(&self) -> &[Term] {
        &self.conclusion.source
    }

    pub fn is_axiom(&self) -> bool {
        self.premises.is_empty() && self.families.is_empty()
    }

    /// Members `j` of the premise families, for `j` in `0..=upto`.
    pub fn family_members(&self, upto: u64) -> Vec<Formula<Term>> {
        let mut out = Vec::new();
        for fam in &self.families {
            for j in 0..=upto {
                let env = IxEnv { i: None, j: Some(j) };
                if let Ok(f) = fam.try_map(|t| t.instantiate(&env)) {
                    out.push(f);
                }
            }
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        for fam in &self.families {
            parts.push(format!("{{ {} -> {} | j }}", show_ituple(&fam.source), show_ituple(&fam.target)));
        }
        write!(f, "{}: {} |- {}", self.name, parts.join(", "), self.conclusion)
    }
}

pub fn show_ituple(ts: &[ITerm]) -> String {
    if ts.len() == 1 {
        ts[0].to_string()
    } else {
        let parts: Vec<String> = ts.iter().map(ITerm::to_string).collect();
        format!("({})", parts.join(", "))
    }
}

/// A countable family of rules indexed by `i >= start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub start: u64,
    pub premises: Vec<Formula<ITerm>>,
    pub families: Vec<Formula<ITerm>>,
    pub conclusion: Formula<ITerm>,
}

impl Template {
    pub fn formulas(&self) -> impl Iterator<Item = &Formula<ITerm>> {
        self.premises.iter().chain(self.families.iter()).chain(std::iter::once(&self.conclusion))
    }

    pub fn instance_name(&self, i: u64) -> String {
        format!("{}{}", self.name, i)
    }

    /// The rule for index `i`.
    pub fn instance(&self, i: u64) -> Result<Rule, TssError> {
        let env = IxEnv::i(i);
        let premises =
            self.premises.iter().map(|p| p.try_map(|t| t.instantiate(&env))).collect::<Result<Vec<_>, _>>()?;
        let mut families = Vec::new();
        let mut extra = Vec::new();
        for fam in &self.families {
            let bound = fam.try_map(|t| t.bind(&env))?;
            if bound.components().any(|t| t.mentions_structurally(Ix::J)) {
                families.push(bound);
            } else {
                // Members differ only in variable names, so one representative suffices.
                let env_j = IxEnv { i: Some(i), j: Some(0) };
                extra.push(fam.try_map(|t| t.instantiate(&env_j))?);
            }
        }
        let mut premises = premises;
        premises.extend(extra);
        let conclusion = self.conclusion.try_map(|t| t.instantiate(&env))?;
        Ok(Rule { name: self.instance_name(i), premises, families, conclusion })
    }

    /// Largest absolute offset and concrete index mentioned in the template.
    pub fn index_extent(&self) -> i64 {
        let mut affs = Vec::new();
        for f in self.formulas() {
            f.components().for_each(|t| t.affines(&mut affs));
        }
        affs.iter().map(|a| a.offset.abs()).max().unwrap_or(0)
    }
}

/// Instances `start..upper` of a template, in index order.
pub fn instantiate_template(tpl: &Template, upper: u64) -> Result<Vec<Rule>, TssError> {
    if upper == 0 {
        return Err(TssError::ZeroBound);
    }
    (tpl.start..upper).map(|i| tpl.instance(i)).collect()
}

/// A transition system specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tss {
    pub signature: Signature,
    pub shape: Shape,
    pub rules: Vec<Rule>,
    pub templates: Vec<Template>,
}

impl Tss {
    pub fn new(signature: Signature) -> Self {
        Tss { signature, shape: Shape::Triadic, rules: Vec::new(), templates: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.templates.is_empty()
    }

    /// Plain rules followed by the template instances below `upper`.
    pub fn instantiated_rules(&self, upper: u64) -> Result<Vec<Rule>, TssError> {
        let mut out = self.rules.clone();
        for tpl in &self.templates {
            for i in tpl.start..upper {
                out.push(tpl.instance(i)?);
            }
        }
        Ok(out)
    }

    /// Largest concrete family index or offset anywhere in the rules.
    pub fn index_extent(&self) -> i64 {
        let mut m = 0i64;
        for r in &self.rules {
            for f in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
                for t in f.components() {
                    if let Some(i) = t.max_index() {
                        m = m.max(i as i64);
                    }
                }
            }
        }
        for t in &self.templates {
            m = m.max(t.index_extent()).max(t.start as i64);
        }
        m
    }

    /// Ground subterms appearing in rules, smallest first.
    pub fn ground_subterms(&self) -> BTreeSet<Term> {
        fn walk(t: &Term, out: &mut BTreeSet<Term>) {
            if t.is_closed() {
                out.insert(t.clone());
            }
            if let Term::App(_, args) = t {
                args.iter().for_each(|a| walk(a, out));
            }
        }
        let mut out = BTreeSet::new();
        for r in &self.rules {
            for f in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
                f.components().for_each(|t| walk(t, &mut out));
            }
        }
        out
    }
}

/// Closed-formula matching against a rule conclusion.
pub fn unifies_with_rule(tr: &Formula<Term>, rule: &Rule) -> Option<Subst> {
    let mut sigma = Subst::new();
    let ok = match_tuple(&rule.conclusion.source, &tr.source, &mut sigma)
        && match_tuple(&rule.conclusion.target, &tr.target, &mut sigma);
    ok.then_some(sigma)
}

/// Arity, naming and shape checks. Every violation becomes a witness.
pub fn validate_tss(tss: &Tss) -> Verdict {
    let mut witnesses = Vec::new();
    let (sa, ta) = tss.shape.arities();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let names = tss.rules.iter().map(|r| r.name.as_str()).chain(tss.templates.iter().map(|t| t.name.as_str()));
    for n in names {
        *seen.entry(n).or_default() += 1;
    }
    for (n, c) in seen {
        if c > 1 {
            witnesses.push(Witness::new(Some(n), vec![], format!("rule name `{n}` is used {c} times")));
        }
    }
    let shape_check = |rule: &str, pos: &str, src: usize, tgt: usize, out: &mut Vec<Witness>| {
        if src != sa || tgt != ta {
            out.push(Witness::new(Some(rule), vec![], format!("{pos} has shape {src}/{tgt}, expected {sa}/{ta}")));
        }
    };
    for r in &tss.rules {
        let all = r.premises.iter().chain(std::iter::once(&r.conclusion));
        for (k, f) in all.enumerate() {
            let pos = if k == r.premises.len() { "conclusion".to_string() } else { format!("premise {}", k + 1) };
            shape_check(&r.name, &pos, f.source.len(), f.target.len(), &mut witnesses);
            for t in f.components() {
                if !tss.signature.well_formed(t) {
                    witnesses.push(Witness::new(Some(&r.name), vec![t.to_string()], format!("{pos}: ill-formed term")));
                }
            }
        }
        for f in &r.families {
            shape_check(&r.name, "premise family", f.source.len(), f.target.len(), &mut witnesses);
        }
    }
    for tpl in &tss.templates {
        for (k, f) in tpl.formulas().enumerate() {
            shape_check(&tpl.name, &format!("formula {}", k + 1), f.source.len(), f.target.len(), &mut witnesses);
            let mut affs = Vec::new();
            f.components().for_each(|t| t.affines(&mut affs));
            for a in affs {
                if a.var == Some(Ix::I) && tpl.start as i64 + a.offset < 0 {
                    witnesses.push(Witness::new(
                        Some(&tpl.name),
                        vec![a.to_string()],
                        format!("index expression is negative at i = {}", tpl.start),
                    ));
                }
                if a.var.is_none() && a.offset < 0 {
                    witnesses.push(Witness::new(
                        Some(&tpl.name),
                        vec![a.to_string()],
                        "negative constant index".into(),
                    ));
                }
            }
        }
        if let Ok(rule) = tpl.instance(tpl.start) {
            for f in rule.premises.iter().chain(std::iter::once(&rule.conclusion)) {
                for t in f.components() {
                    if !tss.signature.well_formed(t) {
                        witnesses.push(Witness::new(Some(&tpl.name), vec![t.to_string()], "ill-formed term".into()));
                    }
                }
            }
        }
    }
    let outcome = if witnesses.is_empty() { Outcome::Pass } else { Outcome::Fail };
    Verdict::new("validate", outcome).with_witnesses(witnesses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(i: u32) -> Term {
        Term::fam("l", i)
    }

    fn x() -> Term {
        Term::var("x")
    }

    fn f(t: Term) -> Term {
        Term::app("f", vec![t])
    }

    fn g(t: Term) -> Term {
        Term::app("g", vec![t])
    }

    fn restricted_support_template() -> Template {
        // g^i(x) -l(i)-> x  |-  f(x) -l(i)-> x
        let gi = ITerm::Pow(name("g"), Affine::index(Ix::I, 0), Box::new(ITerm::Var(name("x"))));
        let li = ITerm::Fam(name("l"), Affine::index(Ix::I, 0));
        let xv = ITerm::Var(name("x"));
        let fx = ITerm::App(name("f"), vec![xv.clone()]);
        Template {
            name: "R".into(),
            start: 0,
            premises: vec![Formula::new(vec![gi], vec![li.clone(), xv.clone()])],
            families: vec![],
            conclusion: Formula::new(vec![fx], vec![li, xv]),
        }
    }

    #[test]
    fn template_expansion_matches_power_oracle() {
        let rules = instantiate_template(&restricted_support_template(), 3).unwrap();
        assert_eq!(rules.len(), 3);
        for (i, r) in rules.iter().enumerate() {
            assert_eq!(r.name, format!("R{i}"));
            assert_eq!(r.premises[0].source[0], Term::power("g", i, x()));
            assert_eq!(r.premises[0].target[0], l(i as u32));
            assert_eq!(r.conclusion, Formula::triadic(f(x()), l(i as u32), x()));
        }
        let one = instantiate_template(&restricted_support_template(), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].premises[0].source[0], x());
    }

    #[test]
    fn zero_bound_rejected() {
        assert_eq!(instantiate_template(&restricted_support_template(), 0), Err(TssError::ZeroBound));
    }

    #[test]
    fn negative_index_rejected() {
        let mut tpl = restricted_support_template();
        tpl.conclusion.target[0] = ITerm::Fam(name("l"), Affine::index(Ix::I, -1));
        assert!(matches!(tpl.instance(0), Err(TssError::NegativeIndex(..))));
        assert!(tpl.instance(1).is_ok());
    }

    #[test]
    fn unify_with_rule_examples() {
        let r1 = Rule::new("R1", vec![Formula::triadic(g(x()), l(1), x())], Formula::triadic(f(x()), l(1), x()));
        let s = unifies_with_rule(&Formula::triadic(f(l(1)), l(1), l(1)), &r1).unwrap();
        assert_eq!(s.get("x"), Some(&l(1)));
        assert!(unifies_with_rule(&Formula::triadic(f(l(1)), l(2), l(1)), &r1).is_none());
        let ax = Rule::new("L", vec![], Formula::triadic(g(l(1)), l(1), l(1)));
        assert_eq!(unifies_with_rule(&Formula::triadic(g(l(1)), l(1), l(1)), &ax), Some(Subst::new()));
    }

    #[test]
    fn validate_reports_arity() {
        let mut tss = Tss::new(Signature::sigma0());
        let bad = Term::app("f", vec![x(), x()]);
        tss.rules.push(Rule::new("bad", vec![], Formula::triadic(bad, l(1), x())));
        let v = validate_tss(&tss);
        assert_eq!(v.outcome, Outcome::Fail);
        assert_eq!(v.witnesses[0].rule.as_deref(), Some("bad"));
        assert_eq!(validate_tss(&Tss::new(Signature::sigma0())).outcome, Outcome::Pass);
    }

    #[test]
    fn family_premise_with_subscripted_target_collapses() {
        let mut tpl = restricted_support_template();
        tpl.premises.clear();
        tpl.families.push(Formula::new(
            vec![ITerm::Var(name("x"))],
            vec![ITerm::Fam(name("l"), Affine::constant(1)), ITerm::IVar(name("y"), Ix::J)],
        ));
        let r = tpl.instance(2).unwrap();
        assert!(r.families.is_empty());
        assert_eq!(r.premises.len(), 1);
        assert_eq!(r.premises[0].target[1], Term::var("y_0"));
    }
}
