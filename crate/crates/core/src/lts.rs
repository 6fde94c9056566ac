//! Bounded least-fixpoint derivation of provable transitions, the twelve
//! branching properties and their implication order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{transform_formula, transform_tss, DyadicKind, Proj};
use crate::term::{
    enumerate_closed_terms, in_universe, match_into, match_tuple, show_tuple, Name, Signature, Subst, Term, TermError,
};
use crate::tss::{Formula, Rule, Shape, Tss, TssError};

/// Largest closed-term universe the engine will materialise.
pub const MAX_UNIVERSE: u128 = 2_000_000;
/// Largest number of origins a single source pattern may expand to.
pub const MAX_ORIGINS: usize = 4_000_000;

/// Height bound, family-index bound and round limit for a derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub height: usize,
    pub labels: u32,
    pub rounds: usize,
}

impl Bounds {
    pub const fn new(height: usize, labels: u32, rounds: usize) -> Self {
        Bounds { height, labels, rounds }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::new(3, 3, 50)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h={}, b={}, rounds={}", self.height, self.labels, self.rounds)
    }
}

impl FromStr for Bounds {
    type Err = String;

    /// `h,b,rounds`, for instance `3,3,50`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected `height,labels,rounds`, got `{s}`"));
        }
        let num = |p: &str| p.parse::<u64>().map_err(|_| format!("`{p}` is not a natural number"));
        let (h, b, r) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if b == 0 {
            return Err("label bound must be at least 1".into());
        }
        Ok(Bounds::new(h as usize, b as u32, r as usize))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtsError {
    #[error("derivation did not saturate within {0} rounds")]
    NotSaturated(usize),
    #[error("universe too large to enumerate: {0} terms at height {1}")]
    UniverseTooLarge(u128, usize),
    #[error("too many origins: a source pattern expands to more than {0} origins")]
    TooManyOrigins(usize),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Tss(#[from] TssError),
}

/// Number of closed terms of height at most `h` with indices below `b`:
/// `C_0 = consts` and `C_h = consts + sum over f of C_{h-1}^arity(f)`.
pub fn universe_size(sig: &Signature, h: usize, b: u32) -> u128 {
    let consts =
        sig.symbols().filter(|s| s.arity == 0).count() as u128 + if sig.family().is_some() { b as u128 } else { 0 };
    let mut cur = consts;
    for _ in 0..h {
        cur = sig
            .symbols()
            .filter(|s| s.arity > 0)
            .fold(consts, |acc, s| acc.saturating_add(cur.saturating_pow(s.arity as u32)));
    }
    cur
}

/// A finite set of closed transitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lts {
    #[serde(skip)]
    pub shape: Shape,
    #[serde(serialize_with = "ser_transitions")]
    pub transitions: BTreeSet<Formula<Term>>,
    pub saturated: bool,
    pub dropped: usize,
    pub rounds: usize,
}

fn ser_transitions<S: serde::Serializer>(ts: &BTreeSet<Formula<Term>>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(ts.len()))?;
    for t in ts {
        let row: Vec<String> = t.components().map(Term::to_string).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl Lts {
    pub fn empty(shape: Shape) -> Self {
        Lts { shape, transitions: BTreeSet::new(), saturated: true, dropped: 0, rounds: 0 }
    }

    pub fn from_triadic(ts: impl IntoIterator<Item = Formula<Term>>) -> Self {
        Lts { transitions: ts.into_iter().collect(), ..Lts::empty(Shape::Triadic) }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Re-reads every triadic transition under `kind`.
    pub fn transform(&self, kind: DyadicKind) -> BTreeSet<Formula<Term>> {
        self.transitions.iter().map(|f| transform_formula(f, kind)).collect()
    }

    /// One line per transition, tab-separated.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.transitions {
            let cols: Vec<String> = match self.shape {
                Shape::Triadic => t.components().map(Term::to_string).collect(),
                Shape::Dyadic(_) => vec![show_tuple(&t.source), show_tuple(&t.target)],
            };
            out.push_str(&cols.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lts serializes")
    }
}

/// Out-degree of every source tuple in a set of formulae.
pub fn out_degrees(ts: &BTreeSet<Formula<Term>>) -> BTreeMap<Vec<Term>, usize> {
    let mut out: BTreeMap<Vec<Term>, BTreeSet<&Vec<Term>>> = BTreeMap::new();
    for t in ts {
        out.entry(t.source.clone()).or_default().insert(&t.target);
    }
    out.into_iter().map(|(k, v)| (k, v.len())).collect()
}

/// Result of a demand-driven derivation.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub lts: Lts,
    /// Origins whose transitions may be incomplete because a premise origin
    /// or a conclusion fell outside the universe.
    pub tainted: HashSet<Vec<Term>>,
}

impl Derivation {
    pub fn out_degree(&self, origin: &[Term]) -> usize {
        self.lts.transitions.iter().filter(|t| t.source == origin).count()
    }
}

struct Activation {
    rule: usize,
    sigma: Subst,
    origin: u32,
    born: usize,
    /// Premise origins when they are all closed after matching the source.
    keys: Option<Vec<u32>>,
}

/// Saturation state. Origins are interned so that facts, demands and
/// dependencies are indexed by small integers.
struct Engine<'a> {
    sig: &'a Signature,
    bounds: Bounds,
    rules: Vec<Rule>,
    universe: Option<Vec<Term>>,
    ids: HashMap<Vec<Term>, u32>,
    tuples: Vec<Vec<Term>>,
    facts: Vec<HashMap<Vec<Term>, usize>>,
    demanded: Vec<bool>,
    pending: Vec<u32>,
    open_done: HashSet<Vec<Term>>,
    /// `dependents[d]` lists the origins with a premise at origin `d`.
    dependents: Vec<Vec<u32>>,
    dep_seen: HashSet<(u32, u32)>,
    tainted: Vec<bool>,
    activations: Vec<Activation>,
    dropped: usize,
}

impl<'a> Engine<'a> {
    fn new(tss: &'a Tss, bounds: Bounds) -> Result<Self, LtsError> {
        let rules =
            tss.instantiated_rules(bounds.labels as u64)?.into_iter().filter(|r| r.families.is_empty()).collect();
        Ok(Engine {
            sig: &tss.signature,
            bounds,
            rules,
            universe: None,
            ids: HashMap::new(),
            tuples: Vec::new(),
            facts: Vec::new(),
            demanded: Vec::new(),
            pending: Vec::new(),
            open_done: HashSet::new(),
            dependents: Vec::new(),
            dep_seen: HashSet::new(),
            tainted: Vec::new(),
            activations: Vec::new(),
            dropped: 0,
        })
    }

    fn universe(&mut self) -> Result<&[Term], LtsError> {
        if self.universe.is_none() {
            let n = universe_size(self.sig, self.bounds.height, self.bounds.labels);
            if n > MAX_UNIVERSE {
                return Err(LtsError::UniverseTooLarge(n, self.bounds.height));
            }
            self.universe = Some(enumerate_closed_terms(self.sig, self.bounds.height, self.bounds.labels)?);
        }
        Ok(self.universe.as_deref().unwrap())
    }

    fn contains(&self, t: &Term) -> bool {
        in_universe(self.sig, t, self.bounds.height, self.bounds.labels)
    }

    fn intern(&mut self, tuple: Vec<Term>) -> u32 {
        if let Some(&id) = self.ids.get(&tuple) {
            return id;
        }
        let id = self.tuples.len() as u32;
        self.ids.insert(tuple.clone(), id);
        self.tuples.push(tuple);
        self.facts.push(HashMap::new());
        self.demanded.push(false);
        self.dependents.push(Vec::new());
        self.tainted.push(false);
        id
    }

    fn demand(&mut self, origin: u32) {
        if !self.demanded[origin as usize] {
            self.demanded[origin as usize] = true;
            self.pending.push(origin);
        }
    }

    fn depend(&mut self, origin: u32, on: u32) {
        if self.dep_seen.insert((origin, on)) {
            self.dependents[on as usize].push(origin);
        }
        self.demand(on);
    }

    fn activate(&mut self, origin: u32, round: usize) {
        for ri in 0..self.rules.len() {
            let rule = &self.rules[ri];
            let mut sigma = Subst::new();
            if !match_tuple(rule.source(), &self.tuples[origin as usize], &mut sigma) {
                continue;
            }
            let srcs: Vec<Vec<Term>> =
                rule.premises.iter().map(|p| p.source.iter().map(|t| t.apply(&sigma)).collect()).collect();
            let mut keys = None;
            if srcs.iter().all(|s| s.iter().all(Term::is_closed)) {
                if !srcs.iter().all(|s| s.iter().all(|t| self.contains(t))) {
                    self.tainted[origin as usize] = true;
                    continue;
                }
                let ks: Vec<u32> = srcs.into_iter().map(|s| self.intern(s)).collect();
                for &k in &ks {
                    self.depend(origin, k);
                }
                keys = Some(ks);
            }
            self.activations.push(Activation { rule: ri, sigma, origin, born: round, keys });
        }
    }

    fn run(&mut self) -> Result<usize, LtsError> {
        let mut round = 0;
        // Origins that gained transitions in the previous round.
        let mut changed: Vec<bool> = Vec::new();
        loop {
            if round >= self.bounds.rounds {
                return Err(LtsError::NotSaturated(self.bounds.rounds));
            }
            for origin in std::mem::take(&mut self.pending) {
                self.activate(origin, round);
            }
            changed.resize(self.tuples.len(), false);
            let mut fresh: Vec<(u32, Vec<Term>)> = Vec::new();
            for k in 0..self.activations.len() {
                let act = &self.activations[k];
                let full = act.born == round;
                if !full && round == 0 {
                    continue;
                }
                if !full && act.keys.as_ref().is_some_and(|ks| !ks.iter().any(|&k| changed[k as usize])) {
                    continue;
                }
                let (rule, sigma, origin) = (act.rule, act.sigma.clone(), act.origin);
                self.join(k, rule, 0, sigma, full, round, origin, &mut fresh)?;
            }
            changed.iter_mut().for_each(|c| *c = false);
            changed.resize(self.tuples.len(), false);
            let mut added = 0;
            for (src, tgt) in fresh {
                if let std::collections::hash_map::Entry::Vacant(e) = self.facts[src as usize].entry(tgt) {
                    e.insert(round);
                    changed[src as usize] = true;
                    added += 1;
                }
            }
            if added == 0 && self.pending.is_empty() {
                return Ok(round + 1);
            }
            round += 1;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn join(
        &mut self,
        act: usize,
        ri: usize,
        k: usize,
        sigma: Subst,
        used_delta: bool,
        round: usize,
        origin: u32,
        out: &mut Vec<(u32, Vec<Term>)>,
    ) -> Result<(), LtsError> {
        let rule = &self.rules[ri];
        if k == rule.premises.len() {
            if used_delta {
                let target: Vec<Term> = rule.conclusion.target.iter().map(|t| t.apply(&sigma)).collect();
                self.emit(origin, target, out)?;
            }
            return Ok(());
        }
        let premise_target = rule.premises[k].target.clone();
        let sources: Vec<(u32, Subst)> = if let Some(keys) = &self.activations[act].keys {
            vec![(keys[k], sigma)]
        } else {
            let src: Vec<Term> = rule.premises[k].source.iter().map(|t| t.apply(&sigma)).collect();
            if src.iter().all(Term::is_closed) {
                if !src.iter().all(|t| self.contains(t)) {
                    self.tainted[origin as usize] = true;
                    return Ok(());
                }
                let id = self.intern(src);
                self.depend(origin, id);
                vec![(id, sigma)]
            } else {
                self.demand_open(&src, origin)?;
                let mut hits = Vec::new();
                for (id, tuple) in self.tuples.iter().enumerate() {
                    if self.facts[id].is_empty() {
                        continue;
                    }
                    let mut s = sigma.clone();
                    if match_tuple(&src, tuple, &mut s) {
                        hits.push((id as u32, s));
                    }
                }
                for &(id, _) in &hits {
                    self.depend(origin, id);
                }
                hits
            }
        };
        for (key, s0) in sources {
            let hits: Vec<(Vec<Term>, usize)> =
                self.facts[key as usize].iter().filter(|(_, &r)| r < round).map(|(t, &r)| (t.clone(), r)).collect();
            for (tgt, stamp) in hits {
                let mut s = s0.clone();
                if match_tuple(&premise_target, &tgt, &mut s) {
                    let delta = used_delta || stamp + 1 == round;
                    self.join(act, ri, k + 1, s, delta, round, origin, out)?;
                }
            }
        }
        Ok(())
    }

    /// Demands every universe instance of an open premise source.
    fn demand_open(&mut self, src: &[Term], origin: u32) -> Result<(), LtsError> {
        if !self.open_done.insert(src.to_vec()) {
            return Ok(());
        }
        let universe = self.universe()?.to_vec();
        for (_, inst) in instances(self.sig, src, &universe, self.bounds)? {
            let id = self.intern(inst);
            self.depend(origin, id);
        }
        Ok(())
    }

    fn emit(&mut self, origin: u32, target: Vec<Term>, out: &mut Vec<(u32, Vec<Term>)>) -> Result<(), LtsError> {
        let closings: Vec<Vec<Term>> = if target.iter().all(Term::is_closed) {
            vec![target]
        } else {
            let universe = self.universe()?.to_vec();
            let mut free = BTreeSet::new();
            target.iter().for_each(|t| t.collect_vars(&mut free));
            let mut sigmas = vec![Subst::new()];
            for v in free {
                let mut next = Vec::with_capacity(sigmas.len() * universe.len());
                for s in &sigmas {
                    for u in &universe {
                        let mut s2 = s.clone();
                        s2.insert(v.clone(), u.clone());
                        next.push(s2);
                    }
                }
                if next.len() > MAX_ORIGINS {
                    return Err(LtsError::TooManyOrigins(MAX_ORIGINS));
                }
                sigmas = next;
            }
            sigmas.iter().map(|s| target.iter().map(|t| t.apply(s)).collect()).collect()
        };
        for tgt in closings {
            if tgt.iter().all(|t| self.contains(t)) {
                out.push((origin, tgt));
            } else {
                self.dropped += 1;
                self.tainted[origin as usize] = true;
            }
        }
        Ok(())
    }

    fn finish(mut self, shape: Shape, rounds: usize) -> Derivation {
        // Taint flows from premise origins to the origins that depend on them.
        let mut stack: Vec<u32> = (0..self.tuples.len() as u32).filter(|&i| self.tainted[i as usize]).collect();
        while let Some(d) = stack.pop() {
            for &o in &self.dependents[d as usize] {
                if !self.tainted[o as usize] {
                    self.tainted[o as usize] = true;
                    stack.push(o);
                }
            }
        }
        let mut transitions = BTreeSet::new();
        for (id, tgts) in self.facts.drain(..).enumerate() {
            for t in tgts.into_keys() {
                transitions.insert(Formula::new(self.tuples[id].clone(), t));
            }
        }
        Derivation {
            tainted: self.tainted.iter().zip(&self.tuples).filter(|(f, _)| **f).map(|(_, t)| t.clone()).collect(),
            lts: Lts { shape, transitions, saturated: true, dropped: self.dropped, rounds },
        }
    }
}

/// Closed instances of a source pattern whose components lie in the universe.
pub fn instances(
    sig: &Signature,
    pattern: &[Term],
    universe: &[Term],
    bounds: Bounds,
) -> Result<Vec<(Subst, Vec<Term>)>, LtsError> {
    let mut partial = vec![Subst::new()];
    for comp in pattern {
        let mut next = Vec::new();
        for s in &partial {
            let c = comp.apply(s);
            if c.is_closed() {
                if in_universe(sig, &c, bounds.height, bounds.labels) {
                    next.push(s.clone());
                }
            } else {
                for u in universe {
                    let mut s2 = s.clone();
                    if match_into(&c, u, &mut s2) {
                        next.push(s2);
                    }
                }
            }
            if next.len() > MAX_ORIGINS {
                return Err(LtsError::TooManyOrigins(MAX_ORIGINS));
            }
        }
        partial = next;
    }
    Ok(partial.into_iter().map(|s| (s.clone(), pattern.iter().map(|t| t.apply(&s)).collect())).collect())
}

/// Upper bound on the closed instances of a source pattern: each distinct
/// variable at depth `d` ranges over terms of height at most `h - d`.
pub fn instance_estimate(sig: &Signature, pattern: &[Term], bounds: Bounds) -> u128 {
    fn walk(t: &Term, depth: usize, seen: &mut BTreeSet<Name>, sig: &Signature, b: Bounds, acc: &mut u128) {
        match t {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    let n = if depth > b.height { 0 } else { universe_size(sig, b.height - depth, b.labels) };
                    *acc = acc.saturating_mul(n);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| walk(a, depth + 1, seen, sig, b, acc)),
            _ => {}
        }
    }
    let mut acc = 1u128;
    let mut seen = BTreeSet::new();
    pattern.iter().for_each(|t| walk(t, 0, &mut seen, sig, bounds, &mut acc));
    acc
}

/// Origins of the universe that match the source of some rule.
pub fn rule_origins(tss: &Tss, bounds: Bounds) -> Result<BTreeSet<Vec<Term>>, LtsError> {
    let rules = tss.instantiated_rules(bounds.labels as u64)?;
    let n = universe_size(&tss.signature, bounds.height, bounds.labels);
    if n > MAX_UNIVERSE {
        return Err(LtsError::UniverseTooLarge(n, bounds.height));
    }
    let sources: BTreeSet<&[Term]> = rules.iter().map(|r| r.source()).collect();
    let estimate =
        sources.iter().map(|s| instance_estimate(&tss.signature, s, bounds)).fold(0u128, u128::saturating_add);
    if estimate > MAX_ORIGINS as u128 {
        return Err(LtsError::TooManyOrigins(MAX_ORIGINS));
    }
    let universe = enumerate_closed_terms(&tss.signature, bounds.height, bounds.labels)?;
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    for r in &rules {
        if !seen.insert(r.source().to_vec()) {
            continue;
        }
        for (_, o) in instances(&tss.signature, r.source(), &universe, bounds)? {
            out.insert(o);
            if out.len() > MAX_ORIGINS {
                return Err(LtsError::TooManyOrigins(MAX_ORIGINS));
            }
        }
    }
    Ok(out)
}

/// Derives the transitions of the given origins and of everything they
/// depend on.
pub fn derive_from(
    tss: &Tss,
    bounds: Bounds,
    origins: impl IntoIterator<Item = Vec<Term>>,
) -> Result<Derivation, LtsError> {
    let mut engine = Engine::new(tss, bounds)?;
    for o in origins {
        if o.iter().all(|t| engine.contains(t)) {
            let id = engine.intern(o);
            engine.demand(id);
        }
    }
    let rounds = engine.run()?;
    Ok(engine.finish(tss.shape, rounds))
}

/// The least set of transitions closed under the rules, restricted to the
/// bounded universe.
pub fn derive_lts(tss: &Tss, bounds: Bounds) -> Result<Lts, LtsError> {
    if tss.is_empty() {
        return Ok(Lts::empty(tss.shape));
    }
    let origins = rule_origins(tss, bounds)?;
    Ok(derive_from(tss, bounds, origins)?.lts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileEntry {
    pub origin: String,
    pub small: usize,
    pub big: usize,
}

/// Out-degrees of the same origins derived at two bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub kind: String,
    pub small: Bounds,
    pub big: Bounds,
    pub entries: Vec<ProfileEntry>,
    /// Origins left out because their transitions were truncated at the
    /// smaller bound.
    pub truncated: usize,
    /// Height of the origin components. Lower than `small.height` when the
    /// full origin set is too large to enumerate.
    pub origin_height: usize,
    pub stable: bool,
}

impl Profile {
    pub fn entry(&self, origin: &str) -> Option<&ProfileEntry> {
        self.entries.iter().find(|e| e.origin == origin)
    }

    pub fn grows(&self) -> bool {
        self.entries.iter().any(|e| e.big > e.small)
    }
}

/// Compares dyadic out-degrees at `small` and `big` for the rule origins of
/// the smaller universe. If those cannot be enumerated, origins are drawn
/// from the highest lower height that can; the derivations still run at
/// `small` and `big`.
pub fn branching_profile(tss: &Tss, kind: DyadicKind, small: Bounds, big: Bounds) -> Result<Profile, LtsError> {
    let dyadic = match tss.shape {
        Shape::Triadic => transform_tss(tss, kind)?,
        Shape::Dyadic(k) if k == kind => tss.clone(),
        Shape::Dyadic(_) => return Err(TssError::AlreadyDyadic.into()),
    };
    let mut origin_height = small.height;
    let origins = loop {
        if dyadic.is_empty() {
            break BTreeSet::new();
        }
        match rule_origins(&dyadic, Bounds { height: origin_height, ..small }) {
            Ok(o) => break o,
            Err(LtsError::UniverseTooLarge(..) | LtsError::TooManyOrigins(_)) if origin_height > 0 => {
                origin_height -= 1
            }
            Err(e) => return Err(e),
        }
    };
    let (lo, hi) = std::thread::scope(|s| {
        let hi = s.spawn(|| derive_from(&dyadic, big, origins.iter().cloned()));
        let lo = derive_from(&dyadic, small, origins.iter().cloned());
        (lo, hi.join().expect("derivation thread panicked"))
    });
    let (lo, hi) = (lo?, hi?);
    let deg_lo = out_degrees(&lo.lts.transitions);
    let deg_hi = out_degrees(&hi.lts.transitions);
    let mut entries = Vec::new();
    let mut truncated = 0;
    for o in &origins {
        if lo.tainted.contains(o) {
            truncated += 1;
            continue;
        }
        entries.push(ProfileEntry {
            origin: show_tuple(o),
            small: deg_lo.get(o).copied().unwrap_or(0),
            big: deg_hi.get(o).copied().unwrap_or(0),
        });
    }
    let stable = entries.iter().all(|e| e.small == e.big);
    Ok(Profile { kind: kind.to_string(), small, big, entries, truncated, origin_height, stable })
}

/// The twelve bounded-nondeterminism properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PropertyId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
    X,
    XI,
    XII,
}

use PropertyId::*;

/// Cover edges of the implication order, stronger property first.
pub const HASSE: [(PropertyId, PropertyId); 12] = [
    (I, VII),
    (VII, VI),
    (I, XII),
    (XII, IV),
    (III, X),
    (X, IV),
    (III, IX),
    (IX, V),
    (II, VIII),
    (VIII, VI),
    (II, XI),
    (XI, V),
];

impl PropertyId {
    pub const ALL: [PropertyId; 12] = [I, II, III, IV, V, VI, VII, VIII, IX, X, XI, XII];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn roman(self) -> &'static str {
        ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii"][self.index()]
    }

    pub fn name(self) -> &'static str {
        [
            "finitely branching",
            "finite folding",
            "finite bundling",
            "image finite",
            "source finite",
            "label finite",
            "initials finite",
            "finals finite",
            "heads finite",
            "tails finite",
            "antecedents finite",
            "consequents finite",
        ][self.index()]
    }

    pub fn kind(self) -> DyadicKind {
        [
            DyadicKind::D1,
            DyadicKind::D2,
            DyadicKind::D3,
            DyadicKind::D4,
            DyadicKind::D5,
            DyadicKind::D6,
            DyadicKind::D1P1,
            DyadicKind::D2P1,
            DyadicKind::D3P1,
            DyadicKind::D3P2,
            DyadicKind::D2P2,
            DyadicKind::D1P2,
        ][self.index()]
    }

    pub fn for_kind(kind: DyadicKind) -> PropertyId {
        *PropertyId::ALL.iter().find(|p| p.kind() == kind).expect("every kind names a property")
    }

    /// Properties directly below this one in the order.
    pub fn covers(self) -> Vec<PropertyId> {
        HASSE.iter().filter(|(a, _)| *a == self).map(|(_, b)| *b).collect()
    }

    pub fn is_derived(self) -> bool {
        matches!(self, I | II | III)
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.roman())
    }
}

impl FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().trim_start_matches('(').trim_end_matches(')').to_ascii_lowercase();
        PropertyId::ALL.iter().copied().find(|p| p.roman() == key).ok_or_else(|| format!("unknown property `{s}`"))
    }
}

fn closure() -> [[bool; 12]; 12] {
    let mut m = [[false; 12]; 12];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = true;
    }
    for (a, b) in HASSE {
        m[a.index()][b.index()] = true;
    }
    for k in 0..12 {
        for i in 0..12 {
            for j in 0..12 {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    m
}

/// Whether `p` implies `q`, that is, `q` lies below `p`.
pub fn property_implies(p: PropertyId, q: PropertyId) -> bool {
    closure()[p.index()][q.index()]
}

/// A conjunction of one or two properties.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Conjunction(pub Vec<PropertyId>);

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(" ∧ "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0} is elementary; only (i), (ii) and (iii) have equivalence classes")]
pub struct NotDerived(pub PropertyId);

/// The four conjunctions equivalent to a derived property `d`:
/// `d`, `a ∧ b'`, `b ∧ a'` and `a ∧ b`, where `a` is the second-projection
/// child of `d`, `b` the first-projection child, and primes denote the
/// elementary property each child covers.
pub fn equivalence_class(d: PropertyId) -> Result<Vec<Conjunction>, NotDerived> {
    if !d.is_derived() {
        return Err(NotDerived(d));
    }
    let kids = d.covers();
    let a = *kids.iter().find(|p| p.kind().prj() == Proj::P2).expect("derived properties have a second projection");
    let b = *kids.iter().find(|p| p.kind().prj() == Proj::P1).expect("derived properties have a first projection");
    let a1 = a.covers()[0];
    let b1 = b.covers()[0];
    Ok(vec![Conjunction(vec![d]), Conjunction(vec![a, b1]), Conjunction(vec![b, a1]), Conjunction(vec![a, b])])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub property: PropertyId,
    pub max: usize,
    pub witness: Option<String>,
}

/// Largest branching set of `prop` over a triadic LTS, with an origin that
/// attains it.
pub fn check_property(lts: &Lts, prop: PropertyId) -> PropertyReport {
    let degs = out_degrees(&lts.transform(prop.kind()));
    let mut best: Option<(&Vec<Term>, usize)> = None;
    for (o, &d) in &degs {
        if best.is_none_or(|(_, m)| d > m) {
            best = Some((o, d));
        }
    }
    PropertyReport { property: prop, max: best.map_or(0, |(_, d)| d), witness: best.map(|(o, _)| show_tuple(o)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::transform_tss;
    use crate::term::name;
    use crate::tss::{Affine, ITerm, Ix, Template};

    fn l(i: u32) -> Term {
        Term::fam("l", i)
    }

    fn f(t: Term) -> Term {
        Term::app("f", vec![t])
    }

    fn g(t: Term) -> Term {
        Term::app("g", vec![t])
    }

    fn restricted_support() -> Tss {
        let mut tss = Tss::new(Signature::sigma0());
        tss.rules.push(Rule::new("L", vec![], Formula::triadic(g(l(1)), l(1), l(1))));
        let x = ITerm::Var(name("x"));
        let li = ITerm::Fam(name("l"), Affine::index(Ix::I, 0));
        tss.templates.push(Template {
            name: "R".into(),
            start: 1,
            premises: vec![Formula::new(
                vec![ITerm::Pow(name("g"), Affine::index(Ix::I, 0), Box::new(x.clone()))],
                vec![li.clone(), x.clone()],
            )],
            families: vec![],
            conclusion: Formula::new(vec![ITerm::App(name("f"), vec![x.clone()])], vec![li, x]),
        });
        tss
    }

    #[test]
    fn restricted_support_derives_two_transitions() {
        let lts = derive_lts(&restricted_support(), Bounds::default()).unwrap();
        let want: BTreeSet<_> =
            [Formula::triadic(g(l(1)), l(1), l(1)), Formula::triadic(f(l(1)), l(1), l(1))].into_iter().collect();
        assert_eq!(lts.transitions, want);
        assert!(lts.saturated);
        assert_eq!(check_property(&lts, I).max, 1);
    }

    #[test]
    fn empty_tss_gives_empty_lts() {
        let lts = derive_lts(&Tss::new(Signature::sigma0()), Bounds::default()).unwrap();
        assert!(lts.is_empty() && lts.saturated);
        for p in PropertyId::ALL {
            assert_eq!(check_property(&lts, p).max, 0);
        }
    }

    #[test]
    fn universe_size_matches_enumeration() {
        let mut sig = Signature::sigma0();
        sig.add("c", 0).unwrap();
        sig.add("h", 2).unwrap();
        for h in 0..3 {
            for b in 1..3 {
                let n = enumerate_closed_terms(&sig, h, b).unwrap().len() as u128;
                assert_eq!(universe_size(&sig, h, b), n, "h={h} b={b}");
            }
        }
    }

    #[test]
    fn axiom_with_free_label_grows_with_universe() {
        let mut sig = Signature::sigma0();
        sig.add("c", 0).unwrap();
        let mut tss = Tss::new(sig);
        let c = Term::constant("c");
        tss.rules.push(Rule::new("ax", vec![], Formula::triadic(c.clone(), Term::var("y"), c.clone())));
        let p = branching_profile(&tss, DyadicKind::D1, Bounds::new(0, 1, 10), Bounds::new(1, 1, 10)).unwrap();
        let e = p.entry("c").unwrap();
        assert_eq!((e.small, e.big), (2, 6));
        assert!(!p.stable);
    }

    #[test]
    fn non_saturation_is_an_error() {
        let mut tss = Tss::new(Signature::sigma0());
        let x = Term::var("x");
        tss.rules.push(Rule::new("ax", vec![], Formula::triadic(l(0), l(0), l(0))));
        tss.rules.push(Rule::new(
            "up",
            vec![Formula::triadic(x.clone(), l(0), l(0))],
            Formula::triadic(f(x), l(0), l(0)),
        ));
        assert_eq!(derive_lts(&tss, Bounds::new(3, 1, 2)), Err(LtsError::NotSaturated(2)));
        assert_eq!(derive_lts(&tss, Bounds::new(3, 1, 10)).unwrap().len(), 4);
    }

    #[test]
    fn dyadic_derivation_agrees_on_example() {
        let tss = restricted_support();
        let tri = derive_lts(&tss, Bounds::default()).unwrap();
        for kind in DyadicKind::IDENTITIES {
            let d = derive_lts(&transform_tss(&tss, kind).unwrap(), Bounds::default()).unwrap();
            assert_eq!(d.transitions, tri.transform(kind), "{kind}");
        }
    }

    #[test]
    fn lattice_examples() {
        assert!(property_implies(I, IV));
        assert!(!property_implies(IV, I));
        assert!(property_implies(VII, VII));
        assert!(property_implies(III, V));
        assert!(!property_implies(VII, XII));
    }

    #[test]
    fn class_of_i_and_iii() {
        let show = |d| equivalence_class(d).unwrap().iter().map(|c| c.to_string()).collect::<Vec<_>>();
        assert_eq!(show(I), ["(i)", "(xii) ∧ (vi)", "(vii) ∧ (iv)", "(xii) ∧ (vii)"]);
        assert_eq!(show(III), ["(iii)", "(x) ∧ (v)", "(ix) ∧ (iv)", "(x) ∧ (ix)"]);
        assert_eq!(equivalence_class(IV), Err(NotDerived(IV)));
    }

    #[test]
    fn star_family_cardinalities() {
        let p = |i: u32| Term::fam("l", 100 + i);
        let lts = Lts::from_triadic((1..=10).map(|i| Formula::triadic(p(0), l(i), p(i))));
        assert_eq!(check_property(&lts, I).max, 10);
        assert_eq!(check_property(&lts, I).witness.as_deref(), Some("l100"));
        assert_eq!(check_property(&lts, IV).max, 1);
        assert_eq!(check_property(&lts, VI).max, 1);
    }

    #[test]
    fn bounds_parse() {
        assert_eq!("4, 2, 9".parse::<Bounds>(), Ok(Bounds::new(4, 2, 9)));
        assert!("4,0,9".parse::<Bounds>().is_err());
        assert!("4,2".parse::<Bounds>().is_err());
    }

    #[test]
    fn estimate_counts_variables_by_depth() {
        let sig = Signature::sigma0();
        let b = Bounds::new(3, 2, 50);
        let x = Term::var("x");
        // C_h for sigma0 with two labels: 2, 6, 14, 30.
        assert_eq!(instance_estimate(&sig, std::slice::from_ref(&x), b), 30);
        assert_eq!(instance_estimate(&sig, &[f(x.clone())], b), 14);
        assert_eq!(instance_estimate(&sig, &[f(x.clone()), x.clone()], b), 14);
        assert_eq!(instance_estimate(&sig, &[g(x.clone()), Term::var("y")], b), 14 * 30);
        assert_eq!(instance_estimate(&sig, &[l(1)], b), 1);
    }

    #[test]
    fn profile_lowers_origin_height_when_needed() {
        let mut sig = Signature::new();
        for (s, a) in [("c", 0), ("d", 0), ("h", 3)] {
            sig.add(s, a).unwrap();
        }
        let mut tss = Tss::new(sig);
        let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
        let src = Term::app("h", vec![x.clone(), y.clone(), z.clone()]);
        tss.rules.push(Rule::new("A", vec![], Formula::triadic(src, Term::constant("c"), x)));
        let p = branching_profile(&tss, DyadicKind::D4, Bounds::new(3, 1, 50), Bounds::new(4, 1, 50)).unwrap();
        assert_eq!(p.origin_height, 2);
        assert!(p.stable && !p.entries.is_empty());
    }
}
