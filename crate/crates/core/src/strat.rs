//! Partial strict stratification measures: evaluation, the two conditions,
//! the restricted support map and junk rules.
//!
//! Measures map origins to naturals. A measure is an ordered list of clauses
//! `pattern => n + S(sub) + ...`; the first clause whose pattern matches
//! decides the value, and the value is undefined when no clause matches or a
//! recursive call is undefined.
//!
//! The conditions are checked symbolically by case analysis on open source
//! tuples, with a bounded exhaustive search over small closed terms as a
//! falsifier. Template instances beyond an analysed index range are covered
//! by two observations: a measure built from linear patterns cannot tell apart
//! family indices it does not mention, and `g^m(x)` is an instance of `g^n(x)`
//! whenever `m >= n`.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lts::{universe_size, Bounds};
use crate::term::{
    alpha_variant_tuple, enumerate_closed_terms, match_tuple, name, show_tuple, unify_tuple, Name, Signature, Subst,
    Term, OTHER_INDEX,
};
use crate::tss::{Formula, ITerm, Ix, Rule, Shape, Tss, TssError};
use crate::verdict::{Outcome, Verdict};

const SPLIT_DEPTH: usize = 10;
const STEP_BUDGET: usize = 200_000;
/// Substitutions tried per rule by the bounded falsifier.
pub const FALSIFY_BUDGET: u64 = 50_000;
const MAX_WITNESSES: usize = 16;

/// One summand of a measure expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MTerm {
    Nat(u64),
    Call(Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub pattern: Vec<Term>,
    pub expr: Vec<MTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratMeasure {
    pub name: String,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StratError {
    #[error("measure `{0}` recursed deeper than the size of `{1}`")]
    DepthExceeded(String, String),
}

impl StratMeasure {
    pub fn new(name: &str) -> Self {
        StratMeasure { name: name.to_string(), clauses: Vec::new() }
    }

    pub fn clause(mut self, pattern: Vec<Term>, expr: Vec<MTerm>) -> Self {
        self.clauses.push(Clause { pattern, expr });
        self
    }

    /// Tuple length of the patterns, if there are any.
    pub fn arity(&self) -> Option<usize> {
        self.clauses.first().map(|c| c.pattern.len())
    }

    /// `S(o)`, or `None` for an undefined value.
    pub fn eval(&self, o: &[Term]) -> Result<Option<u64>, StratError> {
        let limit = o.iter().map(Term::size).sum::<usize>() + 1;
        self.eval_at(o, 0, limit, o)
    }

    fn eval_at(&self, o: &[Term], depth: usize, limit: usize, root: &[Term]) -> Result<Option<u64>, StratError> {
        if depth > limit {
            return Err(StratError::DepthExceeded(self.name.clone(), show_tuple(root)));
        }
        for c in &self.clauses {
            let mut sigma = Subst::new();
            if !match_tuple(&c.pattern, o, &mut sigma) {
                continue;
            }
            let mut total = 0u64;
            for e in &c.expr {
                match e {
                    MTerm::Nat(n) => total = total.saturating_add(*n),
                    MTerm::Call(args) => {
                        let sub: Vec<Term> = args.iter().map(|a| a.apply(&sigma)).collect();
                        match self.eval_at(&sub, depth + 1, limit, root)? {
                            Some(v) => total = total.saturating_add(v),
                            None => return Ok(None),
                        }
                    }
                }
            }
            return Ok(Some(total));
        }
        Ok(None)
    }

    /// Static problems that would break termination or the checks: arity
    /// mismatches and recursive calls that are not on subterms of the pattern.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some(n) = self.arity() else { return out };
        for c in &self.clauses {
            let shown = self.show_clause(c);
            if c.pattern.len() != n {
                out.push(format!("`{shown}`: pattern has {} components, expected {n}", c.pattern.len()));
                continue;
            }
            for e in &c.expr {
                let MTerm::Call(args) = e else { continue };
                if args.len() != n {
                    out.push(format!("`{shown}`: call has {} components, expected {n}", args.len()));
                    continue;
                }
                let inside = args.iter().zip(&c.pattern).all(|(a, p)| p.contains(a));
                let strict = args.iter().zip(&c.pattern).any(|(a, p)| a != p);
                if !inside || !strict {
                    out.push(format!("`{shown}`: recursive call must be on proper subterms of the pattern"));
                }
            }
        }
        out
    }

    pub fn show_clause(&self, c: &Clause) -> String {
        let rhs: Vec<String> = c
            .expr
            .iter()
            .map(|e| match e {
                MTerm::Nat(n) => n.to_string(),
                MTerm::Call(args) => {
                    let parts: Vec<String> = args.iter().map(Term::to_string).collect();
                    format!("{}({})", self.name, parts.join(", "))
                }
            })
            .collect();
        let rhs = if rhs.is_empty() { "0".to_string() } else { rhs.join(" + ") };
        format!("{} => {rhs}", show_tuple(&c.pattern))
    }

    fn indices(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.clauses.iter().flat_map(|c| c.pattern.iter()).for_each(|t| all_concrete_indices(t, &mut out));
        out
    }

    fn is_linear(&self) -> bool {
        self.clauses.iter().all(|c| {
            let mut seen = BTreeSet::new();
            c.pattern.iter().all(|t| linear_walk(t, &mut seen))
        })
    }

    fn height(&self) -> usize {
        self.clauses.iter().flat_map(|c| c.pattern.iter()).map(Term::height).max().unwrap_or(0)
    }
}

impl fmt::Display for StratMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "strat {} {{", self.name)?;
        for c in &self.clauses {
            writeln!(f, "  {};", self.show_clause(c))?;
        }
        write!(f, "}}")
    }
}

fn all_concrete_indices(t: &Term, out: &mut BTreeSet<u32>) {
    match t {
        Term::Fam(_, i) if *i < OTHER_INDEX => {
            out.insert(*i);
        }
        Term::App(_, args) => args.iter().for_each(|a| all_concrete_indices(a, out)),
        _ => {}
    }
}

fn linear_walk(t: &Term, seen: &mut BTreeSet<Name>) -> bool {
    match t {
        Term::Var(v) => seen.insert(v.clone()),
        Term::Fam(..) => true,
        Term::App(_, args) => args.iter().all(|a| linear_walk(a, seen)),
    }
}

fn tuple_vars(ts: &[Term]) -> Vec<Name> {
    let mut out = Vec::new();
    fn walk(t: &Term, out: &mut Vec<Name>) {
        match t {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Fam(..) => {}
            Term::App(_, args) => args.iter().for_each(|a| walk(a, out)),
        }
    }
    ts.iter().for_each(|t| walk(t, &mut out));
    out
}

/// Three-valued answer of a symbolic check, with a closed witness tuple when
/// one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Res {
    Yes,
    No(Vec<Term>),
    Unknown,
}

/// `c + sum of k * S(atom)` for atoms whose value needs a further case split.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Lin {
    c: u64,
    atoms: BTreeMap<Vec<Term>, u64>,
}

impl Lin {
    fn add(&mut self, other: Lin) {
        self.c = self.c.saturating_add(other.c);
        for (a, k) in other.atoms {
            *self.atoms.entry(a).or_default() += k;
        }
    }
}

/// Symbolic evaluation of a measure on open tuples.
struct Sym<'a> {
    m: &'a StratMeasure,
    sig: &'a Signature,
    apart: Vec<Vec<Term>>,
    indices: BTreeSet<u32>,
    other: u32,
    linear: bool,
    filler: Term,
    fresh: Cell<usize>,
    steps: Cell<usize>,
}

impl<'a> Sym<'a> {
    fn new(m: &'a StratMeasure, tss: &'a Tss) -> Self {
        let apart = m
            .clauses
            .iter()
            .map(|c| c.pattern.iter().map(|t| t.rename(&|v| name(&format!("{v}#")))).collect())
            .collect();
        let indices = m.indices();
        let other = (0..).find(|i| !indices.contains(i)).unwrap_or(0);
        let sig = &tss.signature;
        let ground = tss
            .ground_subterms()
            .into_iter()
            .filter(|t| sig.well_formed(t))
            .min_by(|a, b| a.height().cmp(&b.height()).then(a.cmp(b)));
        let filler = ground.unwrap_or_else(|| smallest_constant(sig));
        Sym { m, sig, apart, indices, other, linear: m.is_linear(), filler, fresh: Cell::new(0), steps: Cell::new(0) }
    }

    fn tick(&self) -> bool {
        self.steps.set(self.steps.get() + 1);
        self.steps.get() <= STEP_BUDGET
    }

    fn eval(&self, shape: &[Term]) -> Option<Lin> {
        for (k, c) in self.m.clauses.iter().enumerate() {
            let mut sigma = Subst::new();
            if match_tuple(&c.pattern, shape, &mut sigma) {
                let mut lin = Lin::default();
                for e in &c.expr {
                    match e {
                        MTerm::Nat(n) => lin.c = lin.c.saturating_add(*n),
                        MTerm::Call(args) => {
                            let sub: Vec<Term> = args.iter().map(|a| a.apply(&sigma)).collect();
                            lin.add(self.eval(&sub)?);
                        }
                    }
                }
                return Some(lin);
            }
            if unify_tuple(&self.apart[k], shape).is_some() {
                return Some(Lin { c: 0, atoms: [(shape.to_vec(), 1)].into_iter().collect() });
            }
        }
        None
    }

    /// A variable of `shape` that the first unifying clause instantiates.
    fn split_var(&self, shape: &[Term]) -> Option<Name> {
        for (k, c) in self.m.clauses.iter().enumerate() {
            let mut sigma = Subst::new();
            if match_tuple(&c.pattern, shape, &mut sigma) {
                return None;
            }
            if let Some(mgu) = unify_tuple(&self.apart[k], shape) {
                return tuple_vars(shape).into_iter().find(|v| mgu.get(v).is_some_and(|t| !t.is_var()));
            }
        }
        None
    }

    /// Cases for a variable: constants, the family members the measure
    /// mentions plus one stand-in for all others, then compound terms.
    fn cases(&self) -> Vec<Term> {
        let mut out: Vec<Term> =
            self.sig.symbols().filter(|s| s.arity == 0).map(|s| Term::App(s.name.clone(), vec![])).collect();
        if let Some(fam) = self.sig.family() {
            out.extend(self.indices.iter().map(|&i| Term::Fam(fam.clone(), i)));
            out.push(Term::Fam(fam.clone(), OTHER_INDEX));
        }
        for s in self.sig.symbols().filter(|s| s.arity > 0) {
            let args = (0..s.arity)
                .map(|_| {
                    let n = self.fresh.get();
                    self.fresh.set(n + 1);
                    Term::Var(name(&format!("_{n}")))
                })
                .collect();
            out.push(Term::App(s.name.clone(), args));
        }
        out
    }

    fn close(&self, ts: &[Term]) -> Vec<Term> {
        ts.iter().map(|t| self.close_term(t)).collect()
    }

    fn close_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(_) => self.filler.clone(),
            Term::Fam(l, OTHER_INDEX) => Term::Fam(l.clone(), self.other),
            Term::Fam(..) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.close_term(a)).collect()),
        }
    }

    /// Condition (i) for every closed instance of `shape`. `top` is the rule
    /// source specialised along the same case splits.
    fn covered(&self, top: &[Term], shape: &[Term], hyps: &mut Vec<Vec<Term>>, depth: usize) -> Res {
        if !self.linear || !self.tick() {
            return Res::Unknown;
        }
        for (k, c) in self.m.clauses.iter().enumerate() {
            let mut sigma = Subst::new();
            if match_tuple(&c.pattern, shape, &mut sigma) {
                hyps.push(shape.to_vec());
                let mut acc = Res::Yes;
                for e in &c.expr {
                    let MTerm::Call(args) = e else { continue };
                    let sub: Vec<Term> = args.iter().map(|a| a.apply(&sigma)).collect();
                    if hyps.iter().any(|h| alpha_variant_tuple(h, &sub)) {
                        continue;
                    }
                    match self.covered(top, &sub, hyps, depth + 1) {
                        Res::Yes => {}
                        Res::No(w) => {
                            acc = Res::No(w);
                            break;
                        }
                        Res::Unknown => acc = Res::Unknown,
                    }
                }
                hyps.pop();
                return acc;
            }
            if unify_tuple(&self.apart[k], shape).is_some() {
                let Some(v) = self.split_var(shape) else { return Res::Unknown };
                if depth >= SPLIT_DEPTH {
                    return Res::Unknown;
                }
                hyps.push(shape.to_vec());
                let mut acc = Res::Yes;
                for case in self.cases() {
                    let theta: Subst = [(v.clone(), case)].into_iter().collect();
                    let top2: Vec<Term> = top.iter().map(|t| t.apply(&theta)).collect();
                    let shape2: Vec<Term> = shape.iter().map(|t| t.apply(&theta)).collect();
                    match self.covered(&top2, &shape2, hyps, depth + 1) {
                        Res::Yes => {}
                        Res::No(w) => {
                            acc = Res::No(w);
                            break;
                        }
                        Res::Unknown => acc = Res::Unknown,
                    }
                }
                hyps.pop();
                return acc;
            }
        }
        Res::No(self.close(top))
    }

    /// Condition (ii) for one premise source `v` of a rule with source `s`.
    /// A witness is the closed tuple `s ++ v`.
    fn decreases(&self, s: &[Term], v: &[Term], depth: usize) -> Res {
        if !self.linear || !self.tick() {
            return Res::Unknown;
        }
        let Some(lv) = self.eval(v) else { return Res::Yes };
        let Some(ls) = self.eval(s) else { return Res::Yes };
        let dominated = lv.atoms.iter().all(|(a, k)| ls.atoms.get(a).copied().unwrap_or(0) >= *k);
        if ls.c > lv.c && dominated {
            return Res::Yes;
        }
        if lv.atoms.is_empty() && ls.atoms.is_empty() {
            let mut w = self.close(s);
            w.extend(self.close(v));
            return Res::No(w);
        }
        if depth >= SPLIT_DEPTH {
            return Res::Unknown;
        }
        let var = lv.atoms.keys().chain(ls.atoms.keys()).find_map(|a| self.split_var(a));
        let Some(var) = var else { return Res::Unknown };
        let mut acc = Res::Yes;
        for case in self.cases() {
            let theta: Subst = [(var.clone(), case)].into_iter().collect();
            let s2: Vec<Term> = s.iter().map(|t| t.apply(&theta)).collect();
            let v2: Vec<Term> = v.iter().map(|t| t.apply(&theta)).collect();
            match self.decreases(&s2, &v2, depth + 1) {
                Res::Yes => {}
                Res::No(w) => return Res::No(w),
                Res::Unknown => acc = Res::Unknown,
            }
        }
        acc
    }

    /// Whether some closing substitution makes the measure defined on every
    /// goal at once.
    fn satisfiable(&self, goals: Vec<Vec<Term>>, seen: &mut Vec<Vec<Term>>, depth: usize) -> Res {
        if !self.linear || !self.tick() {
            return Res::Unknown;
        }
        let mut atoms: Vec<Vec<Term>> = Vec::new();
        for g in &goals {
            let Some(lin) = self.eval(g) else { return Res::No(Vec::new()) };
            for a in lin.atoms.into_keys() {
                if !atoms.contains(&a) {
                    atoms.push(a);
                }
            }
        }
        if atoms.is_empty() {
            return Res::Yes;
        }
        let flat: Vec<Term> = atoms.concat();
        // A goal set that recurs after a measure step has a smaller witness
        // whenever it has one at all.
        if seen.iter().any(|s| alpha_variant_tuple(s, &flat)) {
            return Res::No(Vec::new());
        }
        if depth >= SPLIT_DEPTH {
            return Res::Unknown;
        }
        let Some(var) = atoms.iter().find_map(|a| self.split_var(a)) else { return Res::Unknown };
        seen.push(flat);
        let mut acc = Res::No(Vec::new());
        for case in self.cases() {
            let theta: Subst = [(var.clone(), case)].into_iter().collect();
            let next = atoms.iter().map(|a| a.iter().map(|t| t.apply(&theta)).collect()).collect();
            match self.satisfiable(next, seen, depth + 1) {
                Res::Yes => {
                    acc = Res::Yes;
                    break;
                }
                Res::No(_) => {}
                Res::Unknown => acc = Res::Unknown,
            }
        }
        seen.pop();
        acc
    }
}

fn smallest_constant(sig: &Signature) -> Term {
    let mut cs: Vec<Term> = sig.symbols().filter(|s| s.arity == 0).map(|s| Term::App(s.name.clone(), vec![])).collect();
    if let Some(fam) = sig.family() {
        cs.push(Term::Fam(fam.clone(), 0));
    }
    cs.into_iter().min().unwrap_or_else(|| Term::constant("?"))
}

/// How a tuple of template terms depends on an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dep {
    Free,
    /// Only variable names change with the index.
    Renamed,
    /// The index occurs in family members.
    Member,
    /// The index occurs in an exponent.
    Tower,
}

fn dep_term(t: &ITerm, ix: Ix) -> Dep {
    match t {
        ITerm::Var(_) => Dep::Free,
        ITerm::IVar(_, k) if *k == ix => Dep::Renamed,
        ITerm::IVar(..) => Dep::Free,
        ITerm::App(_, args) => args.iter().map(|a| dep_term(a, ix)).max().unwrap_or(Dep::Free),
        ITerm::Fam(_, a) if a.var == Some(ix) => Dep::Member,
        ITerm::Fam(..) => Dep::Free,
        ITerm::Pow(_, a, _) if a.var == Some(ix) => Dep::Tower,
        ITerm::Pow(_, _, inner) => dep_term(inner, ix),
    }
}

fn dep_of<'t>(ts: impl IntoIterator<Item = &'t ITerm>, ix: Ix) -> Dep {
    ts.into_iter().map(|t| dep_term(t, ix)).max().unwrap_or(Dep::Free)
}

/// Every tower over `ix` sits on a variable occurring once in the tuple, so
/// that raising the index yields an instance of the tuple.
fn towers_monotone(ts: &[&ITerm], ix: Ix) -> bool {
    fn count(t: &ITerm, out: &mut BTreeMap<String, usize>) {
        match t {
            ITerm::Var(v) => *out.entry(v.to_string()).or_default() += 1,
            ITerm::IVar(v, k) => *out.entry(format!("{v}_{k}")).or_default() += 1,
            ITerm::App(_, args) => args.iter().for_each(|a| count(a, out)),
            ITerm::Fam(..) => {}
            ITerm::Pow(_, _, inner) => count(inner, out),
        }
    }
    fn bases<'t>(t: &'t ITerm, ix: Ix, out: &mut Vec<&'t ITerm>) {
        match t {
            ITerm::App(_, args) => args.iter().for_each(|a| bases(a, ix, out)),
            ITerm::Pow(_, a, inner) if a.var == Some(ix) => out.push(inner),
            ITerm::Pow(_, _, inner) => bases(inner, ix, out),
            _ => {}
        }
    }
    let mut counts = BTreeMap::new();
    ts.iter().for_each(|t| count(t, &mut counts));
    let mut bs = Vec::new();
    ts.iter().for_each(|t| bases(t, ix, &mut bs));
    bs.iter().all(|b| match b {
        ITerm::Var(v) => counts.get(&v.to_string()) == Some(&1),
        ITerm::IVar(v, k) => counts.get(&format!("{v}_{k}")) == Some(&1),
        _ => false,
    })
}

/// A rule examined by the checks: a plain rule or one template instance.
#[derive(Debug, Clone)]
pub struct Unit {
    pub rule: Rule,
    /// Template position and index, for template instances.
    pub template: Option<(usize, u64)>,
    /// Members `0..=hi` of the rule's premise families.
    pub members: Vec<Formula<Term>>,
}

impl Unit {
    pub fn name(&self) -> &str {
        &self.rule.name
    }

    pub fn source(&self) -> &[Term] {
        self.rule.source()
    }

    /// Premise sources, family members included.
    pub fn premise_sources(&self) -> Vec<Vec<Term>> {
        self.rule.premises.iter().chain(self.members.iter()).map(|p| p.source.clone()).collect()
    }
}

/// The rules and template instances analysed for a measure, with the index
/// range examined for each template.
#[derive(Debug, Clone)]
pub struct Plan {
    pub units: Vec<Unit>,
    /// `(start, hi)` per template; instances above `hi` behave like `hi`.
    pub ranges: Vec<(u64, u64)>,
    pub horizon: u64,
}

impl Plan {
    pub fn new(tss: &Tss, m: &StratMeasure) -> Result<Plan, TssError> {
        let concrete = m.indices().into_iter().max().unwrap_or(0) as i64;
        let horizon = (m.height() as i64).max(concrete).max(tss.index_extent()) as u64 + 2;
        let mut units = Vec::new();
        for r in &tss.rules {
            units.push(Unit { rule: r.clone(), template: None, members: r.family_members(horizon + 2) });
        }
        let mut ranges = Vec::new();
        for (k, tpl) in tss.templates.iter().enumerate() {
            let hi = horizon.max(tpl.start) + 2;
            ranges.push((tpl.start, hi));
            for i in tpl.start..=hi {
                let rule = tpl.instance(i)?;
                let members = rule.family_members(hi);
                units.push(Unit { rule, template: Some((k, i)), members });
            }
        }
        Ok(Plan { units, ranges, horizon })
    }

    pub fn unit(&self, tpl: usize, i: u64) -> Option<&Unit> {
        self.units.iter().find(|u| u.template == Some((tpl, i)))
    }
}

/// Overall result of the stratification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StratStatus {
    PassSymbolic,
    PassBoundedOnly,
    Fail,
}

impl fmt::Display for StratStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StratStatus::PassSymbolic => "PASS-SYMBOLIC",
            StratStatus::PassBoundedOnly => "PASS-BOUNDED-ONLY",
            StratStatus::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone)]
pub struct StratCheck {
    pub status: StratStatus,
    pub verdict: Verdict,
    /// Term height the bounded falsifier managed to cover for every rule.
    pub height_used: usize,
}

fn dyadic_arity(tss: &Tss) -> usize {
    match tss.shape {
        Shape::Triadic => 1,
        Shape::Dyadic(k) => k.arities().0,
    }
}

/// Arity and well-formedness of a measure against a specification.
pub fn measure_problems(tss: &Tss, m: &StratMeasure) -> Vec<String> {
    let mut out = m.problems();
    let n = dyadic_arity(tss);
    if let Some(a) = m.arity() {
        if a != n {
            out.push(format!("measure `{}` takes {a}-tuples but sources have {n} components", m.name));
        }
    }
    out
}

/// Checks conditions (i) and (ii) of a partial strict stratification,
/// symbolically where possible and by bounded search over closed terms.
pub fn check_strat_conditions(tss: &Tss, m: &StratMeasure, bounds: Bounds) -> StratCheck {
    let mut v = Verdict::pass("strat");
    let problems = measure_problems(tss, m);
    if !problems.is_empty() {
        v.outcome = Outcome::Fail;
        for p in problems {
            v.witness(None, vec![], p);
        }
        return StratCheck { status: StratStatus::Fail, verdict: v.with_summary("ill-formed measure"), height_used: 0 };
    }
    let plan = match Plan::new(tss, m) {
        Ok(p) => p,
        Err(e) => {
            v.outcome = Outcome::Fail;
            v.witness(None, vec![], e.to_string());
            return StratCheck { status: StratStatus::Fail, verdict: v, height_used: 0 };
        }
    };
    let sym = Sym::new(m, tss);
    if !sym.linear {
        v.note("measure has non-linear patterns; only the bounded search applies");
    }
    let mut undecided = false;
    let mut symbolic_fail = Vec::new();

    let mut checked_sources: Vec<Vec<Term>> = Vec::new();
    for u in &plan.units {
        let s = u.source();
        if !checked_sources.iter().any(|c| c == s) {
            checked_sources.push(s.to_vec());
            match sym.covered(s, s, &mut Vec::new(), 0) {
                Res::Yes => {}
                Res::No(w) => symbolic_fail.push((u.name().to_string(), "(i)", w)),
                Res::Unknown => {
                    undecided = true;
                    v.note(format!("[{}] condition (i) undecided for source {}", u.name(), show_tuple(s)));
                }
            }
        }
        for p in u.premise_sources() {
            match sym.decreases(s, &p, 0) {
                Res::Yes => {}
                Res::No(w) => symbolic_fail.push((u.name().to_string(), "(ii)", w)),
                Res::Unknown => {
                    undecided = true;
                    v.note(format!("[{}] condition (ii) undecided for premise source {}", u.name(), show_tuple(&p)));
                }
            }
        }
    }
    // Instances and members beyond the analysed range.
    for note in tail_gaps(tss, &plan, &sym) {
        undecided = true;
        v.note(note);
    }

    let (bounded, height_used) = falsify(tss, m, &plan, bounds);
    if height_used < bounds.height {
        v.note(format!("bounded search reached height {height_used} (requested {})", bounds.height));
    }
    let mut witnesses: Vec<Found> = Vec::new();
    for (rule, cond, w) in symbolic_fail {
        if let Some(found) = confirm(m, cond, &w, dyadic_arity(tss)) {
            if !witnesses.iter().any(|(r, c, t, _)| *r == rule && *c == cond && *t == w) {
                witnesses.push((rule, cond, w, found));
            }
        } else {
            undecided = true;
        }
    }
    for b in bounded {
        if witnesses.len() >= MAX_WITNESSES {
            break;
        }
        if !witnesses.iter().any(|(r, c, t, _)| *r == b.0 && *c == b.1 && *t == b.2) {
            witnesses.push(b);
        }
    }
    witnesses.truncate(MAX_WITNESSES);
    let status = if !witnesses.is_empty() {
        StratStatus::Fail
    } else if undecided {
        StratStatus::PassBoundedOnly
    } else {
        StratStatus::PassSymbolic
    };
    for (rule, cond, w, msg) in witnesses {
        v.witness(Some(&rule), w.iter().map(Term::to_string).collect(), format!("condition {cond}: {msg}"));
    }
    v.outcome = match status {
        StratStatus::PassSymbolic => Outcome::Pass,
        StratStatus::PassBoundedOnly => Outcome::Inconclusive,
        StratStatus::Fail => Outcome::Fail,
    };
    let summary = match status {
        StratStatus::PassSymbolic => format!("{} is a partial strict stratification", m.name),
        StratStatus::PassBoundedOnly => format!("no counterexample for {} up to height {height_used}", m.name),
        StratStatus::Fail => format!("{} is not a partial strict stratification", m.name),
    };
    StratCheck { status, verdict: v.with_summary(summary), height_used }
}

/// Re-evaluates a symbolic counterexample on closed terms.
fn confirm(m: &StratMeasure, cond: &str, w: &[Term], n: usize) -> Option<String> {
    if cond == "(i)" {
        return matches!(m.eval(w), Ok(None)).then(|| format!("S{} is undefined", show_tuple_paren(w)));
    }
    let (s, v) = w.split_at(n.min(w.len()));
    let (Ok(Some(a)), Ok(Some(b))) = (m.eval(s), m.eval(v)) else { return None };
    (b >= a).then(|| format!("S{} = {b} is not below S{} = {a}", show_tuple_paren(v), show_tuple_paren(s)))
}

fn show_tuple_paren(ts: &[Term]) -> String {
    let s = show_tuple(ts);
    if ts.len() == 1 {
        format!("({s})")
    } else {
        s
    }
}

/// Notes for template instances above the analysed range, and family
/// members above it, whose conditions do not follow from the representative.
fn tail_gaps(tss: &Tss, plan: &Plan, sym: &Sym) -> Vec<String> {
    let mut out = Vec::new();
    for (k, tpl) in tss.templates.iter().enumerate() {
        let (_, hi) = plan.ranges[k];
        let Some(rep) = plan.unit(k, hi) else { continue };
        let src: Vec<&ITerm> = tpl.conclusion.source.iter().collect();
        let d = dep_of(src.iter().copied(), Ix::I);
        if d == Dep::Tower && !towers_monotone(&src, Ix::I) {
            out.push(format!("[{}] condition (i) checked only for i <= {hi}", tpl.name));
        }
        let plain = tpl
            .premises
            .iter()
            .chain(tpl.families.iter().filter(|f| !f.components().any(|t| t.mentions_structurally(Ix::J))));
        for (p, prem) in plain.enumerate() {
            let vs: Vec<&ITerm> = prem.source.iter().collect();
            let joint = dep_of(vs.iter().copied().chain(src.iter().copied()), Ix::I);
            if joint <= Dep::Member {
                continue;
            }
            let junk_rep = dep_of(vs.iter().copied(), Ix::I) < Dep::Tower || towers_monotone(&vs, Ix::I);
            let v_rep = &rep.rule.premises[p].source;
            if junk_rep && matches!(sym.satisfiable(vec![v_rep.clone()], &mut Vec::new(), 0), Res::No(_)) {
                continue;
            }
            out.push(format!("[{}] condition (ii) checked only for i <= {hi}", tpl.name));
        }
    }
    for u in &plan.units {
        for fam in &u.rule.families {
            let vs: Vec<&ITerm> = fam.source.iter().collect();
            let d = dep_of(vs.iter().copied(), Ix::J);
            if d <= Dep::Member {
                continue;
            }
            let Ok(top) = fam.try_map(|t| t.instantiate(&crate::tss::IxEnv { i: None, j: Some(plan.horizon + 2) }))
            else {
                continue;
            };
            if towers_monotone(&vs, Ix::J)
                && matches!(sym.satisfiable(vec![top.source], &mut Vec::new(), 0), Res::No(_))
            {
                continue;
            }
            out.push(format!(
                "[{}] condition (ii) checked only for family members j <= {}",
                u.name(),
                plan.horizon + 2
            ));
        }
    }
    out
}

/// Largest height whose universe keeps `vars` substitutions within budget.
fn affordable_height(sig: &Signature, vars: usize, bounds: Bounds) -> Option<usize> {
    (0..=bounds.height).rev().find(|&h| {
        let n = universe_size(sig, h, bounds.labels);
        n.checked_pow(vars as u32).is_some_and(|c| c <= FALSIFY_BUDGET as u128)
    })
}

type Found = (String, &'static str, Vec<Term>, String);

/// Exhaustive search for violations of (i) and (ii) over small closed terms.
fn falsify(tss: &Tss, m: &StratMeasure, plan: &Plan, bounds: Bounds) -> (Vec<Found>, usize) {
    let mut found: Vec<Found> = Vec::new();
    let mut used = bounds.height;
    let mut cache: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
    for u in &plan.units {
        let s = u.source().to_vec();
        let prems = u.premise_sources();
        let mut all = s.clone();
        prems.iter().for_each(|p| all.extend(p.iter().cloned()));
        let vars = tuple_vars(&all);
        let Some(h) = affordable_height(&tss.signature, vars.len(), bounds) else {
            used = 0;
            continue;
        };
        used = used.min(h);
        if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(h) {
            match enumerate_closed_terms(&tss.signature, h, bounds.labels) {
                Ok(mut t) => {
                    t.sort_by(|a, b| a.size().cmp(&b.size()).then(a.cmp(b)));
                    e.insert(t);
                }
                Err(_) => return (found, 0),
            }
        }
        let universe = &cache[&h];
        let mut seen_i = BTreeSet::new();
        for_each_subst(&vars, universe, &mut |sigma| {
            if found.len() >= MAX_WITNESSES {
                return false;
            }
            let cs: Vec<Term> = s.iter().map(|t| t.apply(sigma)).collect();
            let vs_ = m.eval(&cs).ok().flatten();
            match vs_ {
                None => {
                    if seen_i.insert(cs.clone()) {
                        let msg = format!("S{} is undefined", show_tuple_paren(&cs));
                        found.push((u.name().to_string(), "(i)", cs, msg));
                    }
                }
                Some(a) => {
                    for p in &prems {
                        let cv: Vec<Term> = p.iter().map(|t| t.apply(sigma)).collect();
                        if let Ok(Some(b)) = m.eval(&cv) {
                            if b >= a {
                                let msg = format!(
                                    "S{} = {b} is not below S{} = {a}",
                                    show_tuple_paren(&cv),
                                    show_tuple_paren(&cs)
                                );
                                let mut w = cs.clone();
                                w.extend(cv);
                                found.push((u.name().to_string(), "(ii)", w, msg));
                                return found.len() < MAX_WITNESSES;
                            }
                        }
                    }
                }
            }
            true
        });
    }
    (found, used)
}

/// Calls `f` on every substitution of `vars` over `universe` until it
/// returns false.
fn for_each_subst(vars: &[Name], universe: &[Term], f: &mut impl FnMut(&Subst) -> bool) {
    fn go(vars: &[Name], universe: &[Term], sigma: &mut Subst, f: &mut impl FnMut(&Subst) -> bool) -> bool {
        let Some((v, rest)) = vars.split_first() else { return f(sigma) };
        for t in universe {
            sigma.insert(v.clone(), t.clone());
            if !go(rest, universe, sigma, f) {
                return false;
            }
        }
        true
    }
    go(vars, universe, &mut Subst::new(), f);
}

/// Whether a premise source can reach a defined measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reach {
    Yes,
    No,
    Unknown,
}

/// Decides `exists sigma. S(sigma(v))` defined: symbolically, then by a
/// bounded search when the symbolic answer is open.
pub fn reachable(tss: &Tss, m: &StratMeasure, v: &[Term], bounds: Bounds) -> Reach {
    let sym = Sym::new(m, tss);
    reach_with(&sym, tss, m, v, bounds)
}

fn reach_with(sym: &Sym, tss: &Tss, m: &StratMeasure, v: &[Term], bounds: Bounds) -> Reach {
    match sym.satisfiable(vec![v.to_vec()], &mut Vec::new(), 0) {
        Res::Yes => Reach::Yes,
        Res::No(_) => Reach::No,
        Res::Unknown => {
            let vars = tuple_vars(v);
            let Some(h) = affordable_height(&tss.signature, vars.len(), bounds) else { return Reach::Unknown };
            let Ok(universe) = enumerate_closed_terms(&tss.signature, h, bounds.labels) else { return Reach::Unknown };
            let mut hit = false;
            for_each_subst(&vars, &universe, &mut |sigma| {
                let cv: Vec<Term> = v.iter().map(|t| t.apply(sigma)).collect();
                hit = matches!(m.eval(&cv), Ok(Some(_)));
                !hit
            });
            if hit {
                Reach::Yes
            } else {
                Reach::Unknown
            }
        }
    }
}

/// Template instances from some index on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tail {
    pub template: String,
    pub from: u64,
}

/// Premise source of a template instance beyond the analysed range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailReach {
    /// Every instance from `from` on has an unreachable premise source.
    Junk {
        from: u64,
    },
    /// The instances keep a reachable premise source.
    Live,
    Unknown,
}

/// Rules with a premise source on which the measure is never defined.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JunkSet {
    /// Junk rules and template instances within the analysed ranges.
    pub rules: Vec<String>,
    /// Templates whose instances are all junk from some index on.
    pub tails: Vec<Tail>,
    /// Rules whose premise sources could not be decided.
    pub undecided: Vec<String>,
}

impl JunkSet {
    /// Entries as displayed in reports, with tails as `R(i >= 2)`.
    pub fn describe(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.rules.iter().filter(|r| !self.tails.iter().any(|t| in_tail(r, t))).cloned().collect();
        out.extend(self.tails.iter().map(|t| format!("{}(i >= {})", t.template, t.from)));
        out
    }

    /// Whether the named rule or instance is junk.
    pub fn contains(&self, rule: &str) -> bool {
        self.rules.iter().any(|r| r == rule) || self.tails.iter().any(|t| in_tail(rule, t))
    }
}

fn in_tail(rule: &str, t: &Tail) -> bool {
    rule.strip_prefix(t.template.as_str()).and_then(|d| d.parse::<u64>().ok()).is_some_and(|i| i >= t.from)
}

/// Reachability of every premise source, shared by the support map, the
/// junk set and the S-types.
#[derive(Debug, Clone)]
pub struct Reachability {
    pub plan: Plan,
    /// Per unit, per premise source (family members included), in order.
    pub premises: Vec<Vec<Reach>>,
    /// Per template: the tail behaviour of the instance premises.
    pub tails: Vec<TailReach>,
}

impl Reachability {
    pub fn compute(tss: &Tss, m: &StratMeasure, bounds: Bounds) -> Result<Reachability, TssError> {
        let plan = Plan::new(tss, m)?;
        let sym = Sym::new(m, tss);
        let premises = plan
            .units
            .iter()
            .map(|u| u.premise_sources().iter().map(|v| reach_with(&sym, tss, m, v, bounds)).collect())
            .collect();
        let mut tails = Vec::new();
        for (k, tpl) in tss.templates.iter().enumerate() {
            let (_, hi) = plan.ranges[k];
            let rep = plan.unit(k, hi).expect("every template has its representative instance");
            let mut tail = TailReach::Live;
            let plain = tpl
                .premises
                .iter()
                .chain(tpl.families.iter().filter(|f| !f.components().any(|t| t.mentions_structurally(Ix::J))));
            for (p, prem) in plain.enumerate() {
                let vs: Vec<&ITerm> = prem.source.iter().collect();
                let monotone = dep_of(vs.iter().copied(), Ix::I) < Dep::Tower || towers_monotone(&vs, Ix::I);
                let r = reach_with(&sym, tss, m, &rep.rule.premises[p].source, bounds);
                if r == Reach::No && monotone {
                    let from = first_junk_from(&plan, k, p, tss, m, &sym, bounds);
                    tail = TailReach::Junk { from };
                    break;
                }
                if r == Reach::Unknown || (r == Reach::No && !monotone) {
                    tail = TailReach::Unknown;
                }
            }
            tails.push(tail);
        }
        Ok(Reachability { plan, premises, tails })
    }

    pub fn junk(&self, tss: &Tss) -> JunkSet {
        let mut out = JunkSet::default();
        for (u, rs) in self.plan.units.iter().zip(&self.premises) {
            if rs.contains(&Reach::No) {
                out.rules.push(u.name().to_string());
            } else if rs.contains(&Reach::Unknown) {
                out.undecided.push(u.name().to_string());
            }
        }
        for (k, t) in self.tails.iter().enumerate() {
            if let TailReach::Junk { from } = t {
                out.tails.push(Tail { template: tss.templates[k].name.clone(), from: *from });
            }
        }
        out
    }
}

/// Smallest index from which the instances in the analysed range stay junk
/// through the representative.
fn first_junk_from(plan: &Plan, k: usize, p: usize, tss: &Tss, m: &StratMeasure, sym: &Sym, bounds: Bounds) -> u64 {
    let (start, hi) = plan.ranges[k];
    let mut from = hi;
    for i in (start..=hi).rev() {
        let Some(u) = plan.unit(k, i) else { break };
        if reach_with(sym, tss, m, &u.rule.premises[p].source, bounds) == Reach::No {
            from = i;
        } else {
            break;
        }
    }
    from
}

/// The junk rules of a dyadic specification.
pub fn detect_junk_rules(tss: &Tss, m: &StratMeasure, bounds: Bounds) -> Result<JunkSet, TssError> {
    Ok(Reachability::compute(tss, m, bounds)?.junk(tss))
}

/// The S-restricted support map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportMap {
    pub map: BTreeMap<Vec<Term>, BTreeSet<Vec<Term>>>,
    /// Sources whose image includes a premise source that could not be
    /// decided.
    pub uncertain: BTreeSet<Vec<Term>>,
    /// Sources whose image is infinite, with the template responsible.
    pub infinite: BTreeMap<Vec<Term>, String>,
}

impl SupportMap {
    pub fn get(&self, s: &[Term]) -> Option<&BTreeSet<Vec<Term>>> {
        self.map.get(s)
    }

    pub fn show(&self, s: &[Term]) -> String {
        match self.map.get(s) {
            Some(img) if !img.is_empty() => {
                let parts: Vec<String> = img.iter().map(|v| show_tuple(v)).collect();
                format!("{{{}}}", parts.join(", "))
            }
            _ => "∅".into(),
        }
    }
}

/// `eta(s)`: the premise sources of rules with source `s` on which the
/// measure can be defined.
pub fn restricted_support(tss: &Tss, m: &StratMeasure, bounds: Bounds) -> Result<SupportMap, TssError> {
    Ok(support_from(tss, &Reachability::compute(tss, m, bounds)?))
}

pub fn support_from(tss: &Tss, reach: &Reachability) -> SupportMap {
    let mut out = SupportMap::default();
    for (u, rs) in reach.plan.units.iter().zip(&reach.premises) {
        let img = out.map.entry(u.source().to_vec()).or_default();
        for (v, r) in u.premise_sources().into_iter().zip(rs) {
            match r {
                Reach::No => {}
                Reach::Yes => {
                    img.insert(v);
                }
                Reach::Unknown => {
                    img.insert(v);
                    out.uncertain.insert(u.source().to_vec());
                }
            }
        }
    }
    // Live template tails whose premise sources vary with the index while
    // the source does not contribute infinitely many support terms.
    for (k, tpl) in tss.templates.iter().enumerate() {
        if reach.tails[k] != TailReach::Live && reach.tails[k] != TailReach::Unknown {
            continue;
        }
        let src_dep = dep_of(tpl.conclusion.source.iter(), Ix::I);
        if src_dep > Dep::Free {
            continue;
        }
        let varying = tpl.premises.iter().any(|p| dep_of(p.source.iter(), Ix::I) > Dep::Free);
        if varying {
            let (_, hi) = reach.plan.ranges[k];
            if let Some(rep) = reach.plan.unit(k, hi) {
                out.infinite.insert(rep.source().to_vec(), tpl.name.clone());
            }
        }
    }
    // Family members whose sources vary with `j`.
    for u in &reach.plan.units {
        for fam in &u.rule.families {
            if dep_of(fam.source.iter(), Ix::J) > Dep::Free {
                let n = u.members.len();
                let live = reach.premises[reach.plan.units.iter().position(|x| std::ptr::eq(x, u)).unwrap()]
                    .iter()
                    .skip(u.rule.premises.len())
                    .take(n)
                    .any(|r| *r != Reach::No);
                if live {
                    out.infinite.insert(u.source().to_vec(), u.name().to_string());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{transform_tss, DyadicKind};
    use crate::tss::{Affine, Template};

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

    fn p() -> Term {
        Term::var("p")
    }

    fn any_l() -> Term {
        Term::fam("l", crate::term::ANY_INDEX)
    }

    /// The stratification example: axiom L and template R(i), start 1.
    fn ex6() -> Tss {
        let mut tss = Tss::new(Signature::sigma0());
        tss.rules.push(Rule::new("L", vec![], Formula::triadic(g(l(1)), l(1), l(1))));
        let xv = ITerm::Var(name("x"));
        let l1 = ITerm::Fam(name("l"), Affine::constant(1));
        let li = ITerm::Fam(name("l"), Affine::index(Ix::I, 0));
        tss.templates.push(Template {
            name: "R".into(),
            start: 1,
            premises: vec![Formula::new(
                vec![ITerm::Pow(name("g"), Affine::index(Ix::I, 0), Box::new(xv.clone()))],
                vec![li, xv.clone()],
            )],
            families: vec![],
            conclusion: Formula::new(vec![ITerm::App(name("f"), vec![xv.clone()])], vec![l1, xv]),
        });
        transform_tss(&tss, DyadicKind::D1).unwrap()
    }

    fn s0() -> StratMeasure {
        StratMeasure::new("S0").clause(vec![g(l(1))], vec![MTerm::Nat(0)]).clause(vec![f(p())], vec![MTerm::Nat(1)])
    }

    fn subst_measure() -> StratMeasure {
        let (p0, p1, q, b) = (Term::var("p0"), Term::var("p1"), Term::var("q"), Term::var("b"));
        let bin = |op: &str| {
            (
                vec![Term::app(op, vec![p0.clone(), p1.clone()]), q.clone()],
                vec![MTerm::Nat(1), MTerm::Call(vec![p0.clone(), q.clone()]), MTerm::Call(vec![p1.clone(), q.clone()])],
            )
        };
        let mut m = StratMeasure::new("Ssub")
            .clause(vec![Term::fam("a", crate::term::ANY_INDEX), q.clone()], vec![MTerm::Nat(1)]);
        let (pat, e) = bin("send");
        m = m.clause(pat, e);
        m = m.clause(
            vec![Term::app("recv", vec![b, p()]), q.clone()],
            vec![MTerm::Nat(1), MTerm::Call(vec![p(), q.clone()])],
        );
        for op in ["sum", "par"] {
            let (pat, e) = bin(op);
            m = m.clause(pat, e);
        }
        m
    }

    #[test]
    fn eval_examples() {
        let m = s0();
        assert_eq!(m.eval(&[g(l(1))]), Ok(Some(0)));
        assert_eq!(m.eval(&[f(l(1))]), Ok(Some(1)));
        assert_eq!(m.eval(&[l(1)]), Ok(None));
        assert_eq!(StratMeasure::new("E").eval(&[l(1)]), Ok(None));
        let a = |i| Term::fam("a", i);
        let send = Term::app("send", vec![a(0), a(1)]);
        assert_eq!(subst_measure().eval(&[send, a(2)]), Ok(Some(3)));
    }

    #[test]
    fn depth_guard_trips_on_ill_formed_measure() {
        let m = StratMeasure::new("Loop").clause(vec![p()], vec![MTerm::Call(vec![p()])]);
        assert!(matches!(m.eval(&[l(0)]), Err(StratError::DepthExceeded(..))));
        assert_eq!(m.problems().len(), 1);
        assert!(s0().problems().is_empty());
        assert!(subst_measure().problems().is_empty());
    }

    #[test]
    fn ex6_passes_symbolically() {
        let c = check_strat_conditions(&ex6(), &s0(), Bounds::default());
        assert_eq!(c.status, StratStatus::PassSymbolic, "{}", c.verdict);
        assert_eq!(c.height_used, 3);
    }

    #[test]
    fn flat_measure_fails_condition_ii() {
        let m =
            StratMeasure::new("S").clause(vec![g(p())], vec![MTerm::Nat(0)]).clause(vec![f(p())], vec![MTerm::Nat(0)]);
        let c = check_strat_conditions(&ex6(), &m, Bounds::default());
        assert_eq!(c.status, StratStatus::Fail);
        let w = c.verdict.witnesses.iter().find(|w| w.message.starts_with("condition (ii)")).unwrap();
        assert_eq!(w.rule.as_deref(), Some("R1"));
        assert_eq!(w.terms, ["f(l1)", "g(l1)"]);
    }

    #[test]
    fn uncovered_source_fails_condition_i() {
        let mut sig = Signature::sigma0();
        sig.add("h", 1).unwrap();
        let mut tss = Tss::new(sig);
        tss.rules.push(Rule::new("H", vec![], Formula::triadic(Term::app("h", vec![x()]), x(), x())));
        let tss = transform_tss(&tss, DyadicKind::D1).unwrap();
        let c = check_strat_conditions(&tss, &s0(), Bounds::default());
        assert_eq!(c.status, StratStatus::Fail);
        assert_eq!(c.verdict.witnesses[0].terms, ["h(l0)"]);
        assert!(c.verdict.witnesses[0].message.starts_with("condition (i)"));
    }

    #[test]
    fn ex6_support_and_junk() {
        let tss = ex6();
        let eta = restricted_support(&tss, &s0(), Bounds::default()).unwrap();
        assert_eq!(eta.show(&[f(x())]), "{g(x)}");
        assert_eq!(eta.show(&[g(l(1))]), "∅");
        assert!(eta.infinite.is_empty() && eta.uncertain.is_empty());
        let junk = detect_junk_rules(&tss, &s0(), Bounds::default()).unwrap();
        assert_eq!(junk.tails, [Tail { template: "R".into(), from: 2 }]);
        assert!(junk.contains("R2") && junk.contains("R40") && !junk.contains("R1") && !junk.contains("L"));
        assert_eq!(junk.describe(), ["R(i >= 2)"]);
    }

    #[test]
    fn axioms_have_empty_support() {
        let mut tss = Tss::new(Signature::sigma0());
        tss.rules.push(Rule::new("A", vec![], Formula::triadic(f(x()), l(0), x())));
        let tss = transform_tss(&tss, DyadicKind::D1).unwrap();
        let m = StratMeasure::new("S").clause(vec![f(p())], vec![MTerm::Nat(0)]);
        let eta = restricted_support(&tss, &m, Bounds::default()).unwrap();
        assert!(eta.map.values().all(BTreeSet::is_empty));
        assert!(detect_junk_rules(&tss, &m, Bounds::default()).unwrap().rules.is_empty());
    }

    #[test]
    fn structural_measure_needs_induction() {
        // S(l(_)) = 0, S(f(p)) = 1 + S(p), S(g(p)) = 1 + S(p): total, and
        // congruence premises decrease.
        let m = StratMeasure::new("S")
            .clause(vec![any_l()], vec![MTerm::Nat(0)])
            .clause(vec![f(p())], vec![MTerm::Nat(1), MTerm::Call(vec![p()])])
            .clause(vec![g(p())], vec![MTerm::Nat(1), MTerm::Call(vec![p()])]);
        let mut tss = Tss::new(Signature::sigma0());
        let y = Term::var("y");
        tss.rules.push(Rule::new(
            "F",
            vec![Formula::triadic(x(), l(0), y.clone())],
            Formula::triadic(f(x()), l(0), f(y.clone())),
        ));
        tss.rules.push(Rule::new(
            "G",
            vec![Formula::triadic(f(x()), l(0), y.clone())],
            Formula::triadic(g(f(x())), l(0), y),
        ));
        let tss = transform_tss(&tss, DyadicKind::D1).unwrap();
        let c = check_strat_conditions(&tss, &m, Bounds::default());
        assert_eq!(c.status, StratStatus::PassSymbolic, "{}", c.verdict);
    }
}
