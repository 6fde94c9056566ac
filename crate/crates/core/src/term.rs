//! First-order terms, substitutions, matching, unification and bounded
//! enumeration of closed terms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Interned-ish identifier shared between terms.
pub type Name = Arc<str>;

/// Family index used in measure patterns to match any member of the family.
pub const ANY_INDEX: u32 = u32::MAX;

/// Family index standing for "some member not otherwise mentioned" in
/// symbolic case splits.
pub(crate) const OTHER_INDEX: u32 = u32::MAX - 1;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A function or constant symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbol {
    pub name: Name,
    pub arity: usize,
    /// Declared in the `labels` block rather than the `signature` block.
    #[serde(default)]
    pub label: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("signature has no constants, so no closed terms exist")]
    NoConstants,
    #[error("label bound must be at least 1 when the signature has an indexed family")]
    ZeroLabelBound,
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(Name),
    #[error("symbol `{0}` collides with the indexed family `{1}`")]
    FamilyCollision(Name, Name),
}

/// A finite set of symbols plus an optional indexed constant family
/// `name(0)`, `name(1)`, ...
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: IndexMap<Name, Symbol>,
    family: Option<Name>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// The reference signature: unary `f` and `g` plus the family `l`.
    pub fn sigma0() -> Self {
        let mut sig = Signature::new();
        sig.add("f", 1).unwrap();
        sig.add("g", 1).unwrap();
        sig.set_family("l").unwrap();
        sig
    }

    pub fn add(&mut self, sym: &str, arity: usize) -> Result<(), TermError> {
        self.add_symbol(Symbol { name: name(sym), arity, label: false })
    }

    pub fn add_symbol(&mut self, sym: Symbol) -> Result<(), TermError> {
        if self.symbols.contains_key(&sym.name) {
            return Err(TermError::DuplicateSymbol(sym.name));
        }
        if let Some(fam) = &self.family {
            if collides(fam, &sym.name) {
                return Err(TermError::FamilyCollision(sym.name, fam.clone()));
            }
        }
        self.symbols.insert(sym.name.clone(), sym);
        Ok(())
    }

    pub fn set_family(&mut self, fam: &str) -> Result<(), TermError> {
        let fam = name(fam);
        for sym in self.symbols.keys() {
            if collides(&fam, sym) {
                return Err(TermError::FamilyCollision(sym.clone(), fam));
            }
        }
        self.family = Some(fam);
        Ok(())
    }

    pub fn family(&self) -> Option<&Name> {
        self.family.as_ref()
    }

    pub fn symbol(&self, sym: &str) -> Option<&Symbol> {
        self.symbols.get(sym)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }

    pub fn has_constants(&self) -> bool {
        self.family.is_some() || self.symbols.values().any(|s| s.arity == 0)
    }

    /// Splits `l12` into `("l", 12)` when `l` is the family name.
    pub fn family_member(&self, ident: &str) -> Option<u32> {
        let fam = self.family.as_deref()?;
        let digits = ident.strip_prefix(fam)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if digits.len() > 1 && digits.starts_with('0') {
            return None;
        }
        digits.parse().ok()
    }

    /// Whether `t` is built from symbols of this signature with correct
    /// arities, ignoring variables.
    pub fn well_formed(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::Fam(f, _) => self.family.as_ref() == Some(f),
            Term::App(f, args) => {
                self.symbols.get(f).is_some_and(|s| s.arity == args.len()) && args.iter().all(|a| self.well_formed(a))
            }
        }
    }
}

fn collides(fam: &str, sym: &str) -> bool {
    sym == fam || sym.strip_prefix(fam).is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

/// A first-order term. Family members `l(i)` are kept apart from ordinary
/// constants so that their index can be inspected.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    App(Name, Vec<Term>),
    Fam(Name, u32),
}

impl Term {
    pub fn var(v: &str) -> Term {
        Term::Var(name(v))
    }

    pub fn constant(c: &str) -> Term {
        Term::App(name(c), Vec::new())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(name(f), args)
    }

    pub fn fam(f: &str, i: u32) -> Term {
        Term::Fam(name(f), i)
    }

    /// `f` applied `n` times to `t`.
    pub fn power(f: &str, n: usize, t: Term) -> Term {
        (0..n).fold(t, |acc, _| Term::App(name(f), vec![acc]))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Fam(..) => true,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    /// Height with constants and variables at height 0.
    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) | Term::Fam(..) => 0,
            Term::App(_, args) => args.iter().map(|a| a.height() + 1).max().unwrap_or(0),
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Fam(..) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Largest family index occurring in the term.
    pub fn max_index(&self) -> Option<u32> {
        match self {
            Term::Var(_) => None,
            Term::Fam(_, i) => Some(*i),
            Term::App(_, args) => args.iter().filter_map(Term::max_index).max(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Fam(..) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn occurs(&self, v: &str) -> bool {
        match self {
            Term::Var(w) => &**w == v,
            Term::Fam(..) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Whether `sub` occurs in `self` (reflexively).
    pub fn contains(&self, sub: &Term) -> bool {
        self == sub
            || match self {
                Term::App(_, args) => args.iter().any(|a| a.contains(sub)),
                _ => false,
            }
    }

    pub fn apply(&self, sigma: &Subst) -> Term {
        match self {
            Term::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Fam(..) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(sigma)).collect()),
        }
    }

    pub fn rename(&self, f: &impl Fn(&Name) -> Name) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::Fam(..) => self.clone(),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.rename(f)).collect()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Term::Var(_) => 0,
            _ => 1,
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::App(f, xs), Term::App(g, ys)) => f.cmp(g).then(xs.len().cmp(&ys.len())).then_with(|| xs.cmp(ys)),
            (Term::Fam(f, i), Term::Fam(g, j)) => f.cmp(g).then(i.cmp(j)),
            (Term::App(f, xs), Term::Fam(g, _)) => {
                f.cmp(g).then(if xs.is_empty() { Ordering::Less } else { Ordering::Greater })
            }
            (Term::Fam(f, _), Term::App(g, ys)) => {
                f.cmp(g).then(if ys.is_empty() { Ordering::Greater } else { Ordering::Less })
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Fam(l, ANY_INDEX) => write!(f, "{l}(_)"),
            Term::Fam(l, OTHER_INDEX) => write!(f, "{l}(?)"),
            Term::Fam(l, i) => write!(f, "{l}{i}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Renders a tuple of terms; a single term is printed bare.
pub fn show_tuple(ts: &[Term]) -> String {
    if ts.len() == 1 {
        ts[0].to_string()
    } else {
        let parts: Vec<String> = ts.iter().map(Term::to_string).collect();
        format!("({})", parts.join(", "))
    }
}

/// Finite map from variable names to terms.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subst(BTreeMap<Name, Term>);

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Name, t: Term) -> Option<Term> {
        self.0.insert(v, t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.0.keys().cloned().collect()
    }

    pub fn restrict(&self, vars: &BTreeSet<Name>) -> Subst {
        Subst(self.0.iter().filter(|(v, _)| vars.contains(*v)).map(|(v, t)| (v.clone(), t.clone())).collect())
    }
}

impl FromIterator<(Name, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        Subst(iter.into_iter().collect())
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (v, t)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn apply_subst(sigma: &Subst, t: &Term) -> Term {
    t.apply(sigma)
}

/// Finds the minimal `σ` with `σ(pattern) = subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Subst> {
    let mut sigma = Subst::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

/// Extends `sigma` so that `sigma(pattern) = subject`. On failure `sigma`
/// may hold partial bindings.
pub fn match_into(pattern: &Term, subject: &Term, sigma: &mut Subst) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => match sigma.get(v) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(v.clone(), subject.clone());
                true
            }
        },
        (Term::Fam(f, i), Term::Fam(g, j)) => f == g && (i == j || *i == ANY_INDEX),
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, sigma))
        }
        _ => false,
    }
}

/// Componentwise matching of tuples under one substitution.
pub fn match_tuple(patterns: &[Term], subjects: &[Term], sigma: &mut Subst) -> bool {
    patterns.len() == subjects.len() && patterns.iter().zip(subjects).all(|(p, s)| match_into(p, s, sigma))
}

/// Most general unifier with occurs check. The result is idempotent.
pub fn unify(t: &Term, u: &Term) -> Option<Subst> {
    unify_tuple(std::slice::from_ref(t), std::slice::from_ref(u))
}

pub fn unify_tuple(ts: &[Term], us: &[Term]) -> Option<Subst> {
    if ts.len() != us.len() {
        return None;
    }
    let mut sigma = Subst::new();
    let mut stack: Vec<(Term, Term)> = ts.iter().cloned().zip(us.iter().cloned()).collect();
    while let Some((a, b)) = stack.pop() {
        let a = walk(&a, &sigma);
        let b = walk(&b, &sigma);
        match (&a, &b) {
            _ if a == b => {}
            (Term::Var(v), _) => bind(v, &b, &mut sigma)?,
            (_, Term::Var(v)) => bind(v, &a, &mut sigma)?,
            (Term::Fam(f, i), Term::Fam(g, j)) => {
                if f != g || (i != j && *i != ANY_INDEX && *j != ANY_INDEX) {
                    return None;
                }
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            _ => return None,
        }
    }
    Some(sigma)
}

fn walk(t: &Term, sigma: &Subst) -> Term {
    t.apply(sigma)
}

fn bind(v: &Name, t: &Term, sigma: &mut Subst) -> Option<()> {
    if t.occurs(v) {
        return None;
    }
    let single: Subst = [(v.clone(), t.clone())].into_iter().collect();
    for bound in sigma.0.values_mut() {
        *bound = bound.apply(&single);
    }
    sigma.insert(v.clone(), t.clone());
    Some(())
}

/// True iff a bijective variable renaming carries `t` to `u`.
pub fn alpha_variant(t: &Term, u: &Term) -> bool {
    alpha_variant_tuple(std::slice::from_ref(t), std::slice::from_ref(u))
}

pub fn alpha_variant_tuple(ts: &[Term], us: &[Term]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    ts.len() == us.len() && ts.iter().zip(us).all(|(t, u)| alpha_walk(t, u, &mut fwd, &mut bwd))
}

fn alpha_walk(t: &Term, u: &Term, fwd: &mut BTreeMap<Name, Name>, bwd: &mut BTreeMap<Name, Name>) -> bool {
    match (t, u) {
        (Term::Var(x), Term::Var(y)) => {
            let a = fwd.entry(x.clone()).or_insert_with(|| y.clone()).clone();
            let b = bwd.entry(y.clone()).or_insert_with(|| x.clone()).clone();
            a == *y && b == *x
        }
        (Term::Fam(f, i), Term::Fam(g, j)) => f == g && i == j,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_walk(x, y, fwd, bwd))
        }
        _ => false,
    }
}

/// The closed terms of height at most `max_height` whose family indices are
/// below `label_bound`, in ascending term order.
pub fn enumerate_closed_terms(sig: &Signature, max_height: usize, label_bound: u32) -> Result<Vec<Term>, TermError> {
    if !sig.has_constants() || (sig.family.is_some() && label_bound == 0 && !sig.symbols().any(|s| s.arity == 0)) {
        return Err(TermError::NoConstants);
    }
    if sig.family.is_some() && label_bound == 0 {
        return Err(TermError::ZeroLabelBound);
    }
    let mut levels: Vec<Vec<Term>> = Vec::new();
    let mut base: Vec<Term> =
        sig.symbols().filter(|s| s.arity == 0).map(|s| Term::App(s.name.clone(), vec![])).collect();
    if let Some(fam) = &sig.family {
        base.extend((0..label_bound).map(|i| Term::Fam(fam.clone(), i)));
    }
    levels.push(base);
    for h in 1..=max_height {
        let below: Vec<Term> = levels.iter().flatten().cloned().collect();
        let mut level = Vec::new();
        for sym in sig.symbols().filter(|s| s.arity > 0) {
            let mut args = Vec::with_capacity(sym.arity);
            product_with_height(&below, sym.arity, h - 1, &mut args, &mut |args| {
                level.push(Term::App(sym.name.clone(), args.to_vec()));
            });
        }
        levels.push(level);
    }
    let mut all: Vec<Term> = levels.into_iter().flatten().collect();
    all.sort();
    Ok(all)
}

/// Calls `emit` for every argument vector over `pool` whose maximal height is
/// exactly `h`.
fn product_with_height(pool: &[Term], arity: usize, h: usize, args: &mut Vec<Term>, emit: &mut impl FnMut(&[Term])) {
    if args.len() == arity {
        if args.iter().map(Term::height).max() == Some(h) {
            emit(args);
        }
        return;
    }
    for t in pool {
        args.push(t.clone());
        product_with_height(pool, arity, h, args, emit);
        args.pop();
    }
}

/// Membership in the bounded universe without enumerating it.
pub fn in_universe(sig: &Signature, t: &Term, max_height: usize, label_bound: u32) -> bool {
    t.is_closed() && t.height() <= max_height && t.max_index().is_none_or(|i| i < label_bound) && sig.well_formed(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(i: u32) -> Term {
        Term::fam("l", i)
    }

    fn f(t: Term) -> Term {
        Term::app("f", vec![t])
    }

    fn g(t: Term) -> Term {
        Term::app("g", vec![t])
    }

    fn x() -> Term {
        Term::var("x")
    }

    #[test]
    fn match_examples() {
        assert_eq!(match_term(&f(x()), &f(l(1))), Some([(name("x"), l(1))].into_iter().collect()));
        assert_eq!(match_term(&g(x()), &g(l(1))), Some([(name("x"), l(1))].into_iter().collect()));
        assert_eq!(match_term(&f(x()), &g(l(1))), None);
    }

    #[test]
    fn match_respects_repeated_variables() {
        let p = Term::app("h", vec![x(), x()]);
        assert!(match_term(&p, &Term::app("h", vec![l(0), l(0)])).is_some());
        assert!(match_term(&p, &Term::app("h", vec![l(0), l(1)])).is_none());
    }

    #[test]
    fn unify_examples() {
        let y = Term::var("y");
        assert_eq!(unify(&f(x()), &f(g(y.clone()))), Some([(name("x"), g(y))].into_iter().collect()));
        assert_eq!(unify(&x(), &f(x())), None);
        assert_eq!(unify(&g(x()), &g(l(1))), Some([(name("x"), l(1))].into_iter().collect()));
    }

    #[test]
    fn unifier_is_idempotent() {
        let (y, z) = (Term::var("y"), Term::var("z"));
        let t = Term::app("h", vec![x(), f(y.clone())]);
        let u = Term::app("h", vec![g(y.clone()), f(z.clone())]);
        let s = unify(&t, &u).unwrap();
        assert_eq!(t.apply(&s), u.apply(&s));
        for (_, bound) in s.iter() {
            assert_eq!(bound.apply(&s), *bound);
        }
    }

    #[test]
    fn apply_examples() {
        let s: Subst = [(name("x"), l(1))].into_iter().collect();
        assert_eq!(f(x()).apply(&s), f(l(1)));
        assert_eq!(f(x()).apply(&Subst::new()), f(x()));
        assert_eq!(g(Term::var("y")).apply(&s), g(Term::var("y")));
    }

    #[test]
    fn alpha_examples() {
        let y = Term::var("y");
        assert!(alpha_variant(&f(x()), &f(y.clone())));
        let plus = |a: Term, b: Term| Term::app("plus", vec![a, b]);
        assert!(alpha_variant(&plus(x(), y.clone()), &plus(x(), y.clone())));
        assert!(!alpha_variant(&f(x()), &g(x())));
        assert!(!alpha_variant(&plus(x(), y.clone()), &plus(x(), x())));
        assert!(!alpha_variant(&plus(x(), x()), &plus(x(), y)));
    }

    #[test]
    fn enumerate_height_zero_and_one() {
        let sig = Signature::sigma0();
        assert_eq!(enumerate_closed_terms(&sig, 0, 2).unwrap(), vec![l(0), l(1)]);
        let got: BTreeSet<Term> = enumerate_closed_terms(&sig, 1, 2).unwrap().into_iter().collect();
        let want: BTreeSet<Term> = [l(0), l(1), f(l(0)), f(l(1)), g(l(0)), g(l(1))].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn enumerate_without_constants_fails() {
        let mut sig = Signature::new();
        sig.add("f", 1).unwrap();
        assert_eq!(enumerate_closed_terms(&sig, 3, 1), Err(TermError::NoConstants));
    }

    #[test]
    fn enumerate_matches_counting_oracle() {
        // |U_h| = b + 2|U_{h-1}| for two unary symbols over b family members.
        let sig = Signature::sigma0();
        for b in 1..4u32 {
            let mut expected = b as usize;
            for h in 0..5 {
                assert_eq!(enumerate_closed_terms(&sig, h, b).unwrap().len(), expected);
                expected = b as usize + 2 * expected;
            }
        }
    }

    #[test]
    fn family_collisions_rejected() {
        let mut sig = Signature::sigma0();
        assert!(matches!(sig.add("l3", 0), Err(TermError::FamilyCollision(..))));
        assert!(sig.add("lx", 0).is_ok());
        assert_eq!(sig.family_member("l12"), Some(12));
        assert_eq!(sig.family_member("l"), None);
        assert_eq!(sig.family_member("l01"), None);
    }

    #[test]
    fn ordering_is_name_then_arity_then_args() {
        let a = Term::constant("a");
        let fa = Term::app("a", vec![l(0)]);
        assert!(a < fa);
        assert!(f(l(0)) < f(l(1)));
        assert!(f(l(9)) < g(l(0)));
        assert!(x() < a);
    }

    #[test]
    fn universe_membership() {
        let sig = Signature::sigma0();
        assert!(in_universe(&sig, &f(l(1)), 1, 2));
        assert!(!in_universe(&sig, &f(l(2)), 1, 2));
        assert!(!in_universe(&sig, &f(f(l(0))), 1, 2));
        assert!(!in_universe(&sig, &f(x()), 3, 3));
    }
}
