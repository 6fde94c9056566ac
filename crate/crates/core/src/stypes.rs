//! S-types, uniformity, finite inhabitation, the bounded nondeterminism
//! format and the end-to-end rule format verdict. Also the older η-types
//! with label-set images, kept as a comparison baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::dyadic::{transform_tss, DyadicKind};
use crate::lts::Bounds;
use crate::strat::{check_strat_conditions, support_from, Reachability, StratMeasure, SupportMap, TailReach};
use crate::term::{alpha_variant_tuple, show_tuple, Name, Term, ANY_INDEX};
use crate::tss::{Formula, ITerm, Ix, IxEnv, Rule, Tss, TssError};
use crate::verdict::{Outcome, SupportEntry, TypeEntry, Verdict};

const MAX_WITNESSES: usize = 16;
/// Template instances and family members sampled by the syntactic checks.
const SAMPLE: u64 = 3;

/// `⟨s, ψ⟩`: a source with the premise targets of each support term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SType {
    pub source: Vec<Term>,
    pub psi: BTreeMap<Vec<Term>, BTreeSet<Vec<Term>>>,
}

fn show_set<T>(items: impl IntoIterator<Item = T>, show: impl Fn(T) -> String) -> String {
    let parts: Vec<String> = items.into_iter().map(show).collect();
    if parts.is_empty() {
        "∅".into()
    } else {
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let psi = show_set(&self.psi, |(v, ws)| format!("{} ↦ {}", show_tuple(v), show_set(ws, |w| show_tuple(w))));
        write!(f, "⟨{}, {psi}⟩", show_tuple(&self.source))
    }
}

/// Why a rule has no S-type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoType {
    OutsideSupport(Vec<Term>),
    InfinitePsi(Vec<Term>),
}

impl fmt::Display for NoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoType::OutsideSupport(v) => write!(f, "premise source {} is outside the support", show_tuple(v)),
            NoType::InfinitePsi(v) => write!(f, "infinitely many premise targets for source {}", show_tuple(v)),
        }
    }
}

/// The S-type of a dyadic rule under a support map.
pub fn compute_stype(rule: &Rule, eta: &SupportMap) -> Result<SType, NoType> {
    let s = rule.source();
    let empty = BTreeSet::new();
    let img = eta.get(s).unwrap_or(&empty);
    for p in &rule.premises {
        if !img.contains(&p.source) {
            return Err(NoType::OutsideSupport(p.source.clone()));
        }
    }
    if let Some(fam) = rule.families.first() {
        if fam.source.iter().any(|t| t.mentions_structurally(Ix::J)) {
            // Members have pairwise distinct sources, so some member lies
            // outside any finite support.
            let member = (0..=img.len() as u64 + 1)
                .filter_map(|j| member_source(fam, j))
                .find(|v| !img.contains(v))
                .unwrap_or_default();
            return Err(NoType::OutsideSupport(member));
        }
        let v = member_source(fam, 0).unwrap_or_default();
        if !img.contains(&v) {
            return Err(NoType::OutsideSupport(v));
        }
        return Err(NoType::InfinitePsi(v));
    }
    let psi = img
        .iter()
        .map(|v| {
            let ws = rule.premises.iter().filter(|p| &p.source == v).map(|p| p.target.clone()).collect();
            (v.clone(), ws)
        })
        .collect();
    Ok(SType { source: s.to_vec(), psi })
}

fn member_source(fam: &Formula<ITerm>, j: u64) -> Option<Vec<Term>> {
    let env = IxEnv { i: None, j: Some(j) };
    fam.source.iter().map(|t| t.instantiate(&env)).collect::<Result<Vec<_>, _>>().ok()
}

/// Plain rules plus the first few instances of each template, with the
/// first few members of each premise family turned into premises.
pub fn sample_rules(tss: &Tss) -> Result<Vec<Rule>, TssError> {
    let expand = |mut r: Rule| {
        let members = r.family_members(SAMPLE);
        r.premises.extend(members);
        r.families.clear();
        r
    };
    let mut out: Vec<Rule> = tss.rules.iter().cloned().map(expand).collect();
    for tpl in &tss.templates {
        for i in tpl.start..=tpl.start + SAMPLE {
            out.push(expand(tpl.instance(i)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformityMode {
    Sources,
    PremiseTargets,
}

impl fmt::Display for UniformityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UniformityMode::Sources => "sources",
            UniformityMode::PremiseTargets => "premise targets",
        })
    }
}

fn failed_expansion(check: &str, e: TssError) -> Verdict {
    let mut v = Verdict::new(check, Outcome::Fail);
    v.witness(None, vec![], e.to_string());
    v
}

/// Fails when two sources, or two targets of premises with the same source,
/// are alpha-variants without being equal.
pub fn check_uniformity(tss: &Tss, mode: UniformityMode) -> Verdict {
    let check = match mode {
        UniformityMode::Sources => "uniform-sources",
        UniformityMode::PremiseTargets => "uniform-premise-targets",
    };
    let rules = match sample_rules(tss) {
        Ok(r) => r,
        Err(e) => return failed_expansion(check, e),
    };
    // (rule, key the pair must share, the terms compared)
    let mut items: Vec<(&str, Vec<Term>, Vec<Term>)> = Vec::new();
    for r in &rules {
        match mode {
            UniformityMode::Sources => items.push((&r.name, vec![], r.source().to_vec())),
            UniformityMode::PremiseTargets => {
                items.extend(r.premises.iter().map(|p| (r.name.as_str(), p.source.clone(), p.target.clone())))
            }
        }
    }
    let mut v = Verdict::pass(check);
    let mut seen = BTreeSet::new();
    for (a, (ra, ka, ta)) in items.iter().enumerate() {
        for (rb, kb, tb) in &items[a + 1..] {
            if ka != kb || ta == tb || !alpha_variant_tuple(ta, tb) {
                continue;
            }
            let key = if ta < tb { (ta.clone(), tb.clone()) } else { (tb.clone(), ta.clone()) };
            if !seen.insert(key) || v.witnesses.len() >= MAX_WITNESSES {
                continue;
            }
            v.outcome = Outcome::Fail;
            let what = match mode {
                UniformityMode::Sources => "sources".to_string(),
                UniformityMode::PremiseTargets => format!("premise targets for source {}", show_tuple(ka)),
            };
            v.witness(
                Some(ra),
                vec![show_tuple(ta), show_tuple(tb)],
                format!("{what} of {ra} and {rb} differ only in variable names"),
            );
        }
    }
    let summary = match v.outcome {
        Outcome::Pass => format!("uniform in the {mode}"),
        _ => format!("not uniform in the {mode}"),
    };
    v.with_summary(summary)
}

fn tuple_vars<'a>(ts: impl IntoIterator<Item = &'a Term>) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    ts.into_iter().for_each(|t| t.collect_vars(&mut out));
    out
}

fn show_vars(vs: &BTreeSet<Name>) -> Vec<String> {
    vs.iter().map(|v| v.to_string()).collect()
}

/// Variables of premise sources must occur in the source, and variables of
/// the target in the source or in premise targets.
pub fn check_bn_format(tss: &Tss) -> Verdict {
    let rules = match sample_rules(tss) {
        Ok(r) => r,
        Err(e) => return failed_expansion("bn-format", e),
    };
    let mut v = Verdict::pass("bn-format");
    for r in &rules {
        let src = tuple_vars(r.source());
        let prem_src = tuple_vars(r.premises.iter().flat_map(|p| p.source.iter()));
        let loose: BTreeSet<Name> = prem_src.difference(&src).cloned().collect();
        if !loose.is_empty() {
            v.witness(Some(&r.name), show_vars(&loose), "(i) premise source variables missing from the source");
        }
        let mut bound = src.clone();
        bound.extend(tuple_vars(r.premises.iter().flat_map(|p| p.target.iter())));
        let free: BTreeSet<Name> = tuple_vars(&r.conclusion.target).difference(&bound).cloned().collect();
        if !free.is_empty() {
            v.witness(
                Some(&r.name),
                show_vars(&free),
                "(ii) target variables bound by neither the source nor premise targets",
            );
        }
    }
    if v.witnesses.is_empty() {
        v.with_summary("every rule is in bounded nondeterminism format")
    } else {
        v.outcome = Outcome::Fail;
        v.witnesses.truncate(MAX_WITNESSES);
        v.with_summary("some rules are not in bounded nondeterminism format")
    }
}

/// Behaviour of the S-types of template instances above the analysed range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailClass {
    /// No instance from `from` on has an S-type.
    Vacuous {
        from: u64,
    },
    /// Distinct indices give distinct S-types.
    Injective {
        from: u64,
    },
    /// Every instance from `from` on has this S-type.
    Constant {
        from: u64,
        stype: SType,
    },
    Undecided {
        from: u64,
        reason: String,
    },
}

impl TailClass {
    pub fn from(&self) -> u64 {
        match self {
            TailClass::Vacuous { from }
            | TailClass::Injective { from }
            | TailClass::Constant { from, .. }
            | TailClass::Undecided { from, .. } => *from,
        }
    }
}

/// S-types of all analysed rules and template instances.
#[derive(Debug, Clone)]
pub struct TypeTable {
    pub rows: Vec<(String, Result<SType, NoType>)>,
    pub tails: Vec<(String, TailClass)>,
}

impl TypeTable {
    pub fn compute(tss: &Tss, reach: &Reachability, eta: &SupportMap) -> TypeTable {
        let rows = reach.plan.units.iter().map(|u| (u.name().to_string(), compute_stype(&u.rule, eta))).collect();
        let mut tails = Vec::new();
        for (k, tpl) in tss.templates.iter().enumerate() {
            let (start, hi) = reach.plan.ranges[k];
            let class = match &reach.tails[k] {
                TailReach::Junk { from } => TailClass::Vacuous { from: *from },
                TailReach::Unknown => {
                    TailClass::Undecided { from: hi, reason: "reachability of premise sources is undecided".into() }
                }
                TailReach::Live => {
                    let at = |i: u64| reach.plan.unit(k, i).map(|u| compute_stype(&u.rule, eta));
                    match (at(hi.saturating_sub(1).max(start)), at(hi)) {
                        (Some(Ok(a)), Some(Ok(b))) if a == b => TailClass::Constant { from: hi, stype: b },
                        (Some(Ok(_)), Some(Ok(_))) => TailClass::Injective { from: hi },
                        (Some(Err(_)), Some(Err(e)))
                            if !tpl.families.is_empty() || matches!(e, NoType::InfinitePsi(_)) =>
                        {
                            TailClass::Vacuous { from: hi }
                        }
                        _ => TailClass::Undecided {
                            from: hi,
                            reason: "the S-types near the range end do not settle".into(),
                        },
                    }
                }
            };
            tails.push((tpl.name.clone(), class));
        }
        TypeTable { rows, tails }
    }

    pub fn get(&self, rule: &str) -> Option<&Result<SType, NoType>> {
        self.rows.iter().find(|(r, _)| r == rule).map(|(_, t)| t)
    }

    /// Report entries: one per analysed rule, plus one per template tail.
    pub fn entries(&self) -> Vec<TypeEntry> {
        let mut out: Vec<TypeEntry> = self
            .rows
            .iter()
            .map(|(r, t)| match t {
                Ok(st) => TypeEntry { rule: r.clone(), stype: Some(st.to_string()), reason: None },
                Err(e) => TypeEntry { rule: r.clone(), stype: None, reason: Some(e.to_string()) },
            })
            .collect();
        for (name, class) in &self.tails {
            let rule = format!("{name}(i >= {})", class.from());
            let (stype, reason) = match class {
                TailClass::Vacuous { .. } => (None, "no instance has an S-type".to_string()),
                TailClass::Injective { .. } => (None, "a distinct S-type per instance".to_string()),
                TailClass::Constant { stype, .. } => (Some(stype.to_string()), "shared by every instance".to_string()),
                TailClass::Undecided { reason, .. } => (None, reason.clone()),
            };
            out.push(TypeEntry { rule, stype, reason: Some(reason) });
        }
        out
    }
}

/// Every S-type must be the S-type of finitely many rules.
pub fn check_finitely_inhabited(table: &TypeTable) -> Verdict {
    let mut v = Verdict::pass("finitely-inhabited");
    let mut groups: BTreeMap<&SType, Vec<&str>> = BTreeMap::new();
    for (r, t) in &table.rows {
        if let Ok(st) = t {
            groups.entry(st).or_default().push(r);
        }
    }
    for (st, rules) in &groups {
        if rules.len() > 1 {
            v.note(format!("{st} is shared by {}", rules.join(", ")));
        }
    }
    for (name, class) in &table.tails {
        match class {
            TailClass::Constant { from, stype } => {
                v.outcome = Outcome::Fail;
                v.witness(
                    Some(name),
                    vec![stype.to_string()],
                    format!("every instance from i = {from} on has this S-type, so it is infinitely inhabited"),
                );
            }
            TailClass::Undecided { reason, .. } => {
                v.outcome = v.outcome.combine(Outcome::Inconclusive);
                v.witness(Some(name), vec![], reason.clone());
            }
            TailClass::Vacuous { from } => v.note(format!("{name}: no instance from i = {from} on has an S-type")),
            TailClass::Injective { from } => {
                v.note(format!("{name}: instances from i = {from} on have distinct S-types"))
            }
        }
    }
    let summary = match v.outcome {
        Outcome::Pass => "every S-type is finitely inhabited",
        Outcome::Fail => "some S-type is infinitely inhabited",
        Outcome::Inconclusive => "finite inhabitation undecided",
    };
    v.with_summary(summary)
}

fn support_entries(eta: &SupportMap) -> Vec<SupportEntry> {
    eta.map
        .iter()
        .map(|(s, img)| SupportEntry { source: show_tuple(s), support: img.iter().map(|v| show_tuple(v)).collect() })
        .collect()
}

fn support_verdict(eta: &SupportMap) -> Verdict {
    let mut v = Verdict::pass("support");
    for (s, origin) in &eta.infinite {
        v.outcome = Outcome::Fail;
        v.witness(Some(origin), vec![show_tuple(s)], "the restricted support of this source is infinite");
    }
    for s in &eta.uncertain {
        v.outcome = v.outcome.combine(Outcome::Inconclusive);
        v.witness(None, vec![show_tuple(s)], "membership in the restricted support could not be decided");
    }
    v.payload.support = support_entries(eta);
    let summary = match v.outcome {
        Outcome::Pass => "the restricted support is finite",
        Outcome::Fail => "the restricted support is not finite",
        Outcome::Inconclusive => "the restricted support is only partly decided",
    };
    v.with_summary(summary)
}

/// Transforms a triadic specification and checks the rule format for the
/// given dyadic reading and measure.
pub fn check_rule_format(tss: &Tss, kind: DyadicKind, m: &StratMeasure, bounds: Bounds) -> Verdict {
    let mut root = Verdict::pass("rule-format");
    let d = match transform_tss(tss, kind) {
        Ok(d) => d,
        Err(e) => {
            root.outcome = Outcome::Fail;
            root.witness(None, vec![], e.to_string());
            return root.with_summary(format!("cannot read the specification as {kind}"));
        }
    };
    let strat = check_strat_conditions(&d, m, bounds);
    root.outcome = root.outcome.combine(strat.verdict.outcome);
    root.push_child(strat.verdict);

    let reach = match Reachability::compute(&d, m, bounds) {
        Ok(r) => r,
        Err(e) => {
            root.outcome = Outcome::Fail;
            root.witness(None, vec![], e.to_string());
            return root;
        }
    };
    let junk = reach.junk(&d);
    let mut jv = Verdict::pass("junk").with_summary(match junk.describe().len() {
        0 => "no junk rules".to_string(),
        n => format!("{n} junk rule group(s)"),
    });
    jv.payload.junk = junk.describe();
    for r in &junk.undecided {
        jv.note(format!("{r}: premise sources not fully decided"));
    }
    root.push_child(jv);

    let eta = support_from(&d, &reach);
    let sv = support_verdict(&eta);
    root.outcome = root.outcome.combine(sv.outcome);
    root.push_child(sv);

    let table = TypeTable::compute(&d, &reach, &eta);
    let mut tv = Verdict::pass("stypes").with_summary(format!(
        "{} of {} analysed rules have an S-type",
        table.rows.iter().filter(|(_, t)| t.is_ok()).count(),
        table.rows.len()
    ));
    tv.payload.types = table.entries();
    root.push_child(tv);

    for child in [
        check_uniformity(&d, UniformityMode::Sources),
        check_uniformity(&d, UniformityMode::PremiseTargets),
        check_finitely_inhabited(&table),
        check_bn_format(&d),
    ] {
        root.outcome = root.outcome.combine(child.outcome);
        root.push_child(child);
    }
    root.payload.types = table.entries();
    root.payload.support = support_entries(&eta);
    root.payload.junk = junk.describe();
    let summary = match root.outcome {
        Outcome::Pass => format!("R is {kind}-finite: {}", kind.property().name()),
        Outcome::Fail => format!("R does not meet the {kind} rule format"),
        Outcome::Inconclusive => format!("the {kind} rule format could not be decided"),
    };
    root.with_summary(summary)
}

/// A user-supplied support map for the η-type baseline.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EtaMap {
    pub name: String,
    pub entries: BTreeMap<Term, Vec<Term>>,
}

impl EtaMap {
    pub fn new(name: &str) -> Self {
        EtaMap { name: name.to_string(), entries: BTreeMap::new() }
    }

    pub fn with(mut self, source: Term, image: Vec<Term>) -> Self {
        self.entries.insert(source, image);
        self
    }

    pub fn image(&self, source: &Term) -> &[Term] {
        self.entries.get(source).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl fmt::Display for EtaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eta {} {{", self.name)?;
        for (s, img) in &self.entries {
            let parts: Vec<String> = img.iter().map(Term::to_string).collect();
            writeln!(f, "  {s} => {{{}}};", parts.join(", "))?;
        }
        write!(f, "}}")
    }
}

/// `⟨t, ψ⟩` with ψ giving the labels of the premises from each support term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EtaType {
    pub source: Term,
    pub psi: BTreeMap<Term, BTreeSet<Term>>,
}

impl fmt::Display for EtaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let psi = show_set(&self.psi, |(u, ls)| format!("{u} ↦ {}", show_set(ls, |l| l.to_string())));
        write!(f, "⟨{}, {psi}⟩", self.source)
    }
}

/// η-type of a triadic rule, or why it has none.
pub fn compute_eta_type(rule: &Rule, eta: &EtaMap) -> Result<EtaType, String> {
    let t = &rule.conclusion.source[0];
    let mut psi: BTreeMap<Term, BTreeSet<Term>> = eta.image(t).iter().map(|u| (u.clone(), BTreeSet::new())).collect();
    for p in &rule.premises {
        if let Some(ls) = psi.get_mut(&p.source[0]) {
            ls.insert(p.target[0].clone());
        }
    }
    for fam in &rule.families {
        let fixed = !fam.source.iter().any(|t| t.mentions_structurally(Ix::J));
        let varying_label = fam.target[0].mentions_structurally(Ix::J);
        let first = member_source(fam, 0).unwrap_or_default();
        if fixed && varying_label && psi.contains_key(&first[0]) {
            return Err(format!("infinitely many labels for premise source {}", first[0]));
        }
        for j in 0..=(eta.image(t).len() as u64 + SAMPLE) {
            let env = IxEnv { i: None, j: Some(j) };
            let Ok(member) = fam.try_map(|x| x.instantiate(&env)) else { continue };
            if let Some(ls) = psi.get_mut(&member.source[0]) {
                ls.insert(member.target[0].clone());
            }
        }
    }
    Ok(EtaType { source: t.clone(), psi })
}

/// The η-type format: every η-type must be finitely inhabited. Labels must
/// be closed and the η images may not use index wildcards.
pub fn legacy_eta_check(tss: &Tss, eta: &EtaMap, m: &StratMeasure, bounds: Bounds) -> Verdict {
    let mut v = Verdict::pass("legacy-eta");
    for (s, img) in &eta.entries {
        if img.iter().chain([s]).any(|t| t.max_index() == Some(ANY_INDEX) || has_any(t)) {
            v.outcome = Outcome::Fail;
            v.witness(None, vec![s.to_string()], "η entries must name concrete terms");
        }
    }
    let unlabelled =
        tss.rules.iter().find(|r| r.premises.iter().chain([&r.conclusion]).any(|f| !f.target[0].is_closed()));
    if let Some(r) = unlabelled {
        v.outcome = Outcome::Fail;
        v.witness(Some(&r.name), vec![], "η-types need closed labels");
    }
    if v.outcome == Outcome::Fail {
        return v.with_summary("unsuitable input for η-types");
    }
    let strat = check_strat_conditions(
        &match transform_tss(tss, DyadicKind::D1) {
            Ok(d) => d,
            Err(e) => return failed_expansion("legacy-eta", e),
        },
        m,
        bounds,
    );
    v.outcome = v.outcome.combine(strat.verdict.outcome);
    v.push_child(strat.verdict);

    let hi = (tss.index_extent().max(0) as u64 + 2) + 2;
    let mut rows: Vec<(String, Result<EtaType, String>)> = Vec::new();
    for r in &tss.rules {
        rows.push((r.name.clone(), compute_eta_type(r, eta)));
    }
    for tpl in &tss.templates {
        let top = hi.max(tpl.start + 2);
        let mut reps = Vec::new();
        for i in tpl.start..=top {
            let r = match tpl.instance(i) {
                Ok(r) => r,
                Err(e) => return failed_expansion("legacy-eta", e),
            };
            let t = compute_eta_type(&r, eta);
            if i + 1 >= top {
                reps.push(t.clone());
            }
            rows.push((r.name.clone(), t));
        }
        match (&reps[0], &reps[1]) {
            (Ok(a), Ok(b)) if a == b => {
                v.outcome = Outcome::Fail;
                v.witness(
                    Some(&tpl.name),
                    vec![b.to_string()],
                    format!("every instance from i = {top} on has this η-type"),
                );
            }
            (Ok(_), Ok(_)) => v.note(format!("{}: instances from i = {top} on have distinct η-types", tpl.name)),
            (Err(_), Err(_)) => v.note(format!("{}: no instance from i = {top} on has an η-type", tpl.name)),
            _ => {
                v.outcome = v.outcome.combine(Outcome::Inconclusive);
                v.witness(Some(&tpl.name), vec![], "the η-types near the range end do not settle");
            }
        }
    }
    v.payload.types = rows
        .iter()
        .map(|(r, t)| match t {
            Ok(e) => TypeEntry { rule: r.clone(), stype: Some(e.to_string()), reason: None },
            Err(e) => TypeEntry { rule: r.clone(), stype: None, reason: Some(e.clone()) },
        })
        .collect();
    let summary = match v.outcome {
        Outcome::Pass => "every η-type is finitely inhabited",
        Outcome::Fail => "some η-type is infinitely inhabited",
        Outcome::Inconclusive => "η-type inhabitation undecided",
    };
    v.with_summary(summary)
}

fn has_any(t: &Term) -> bool {
    match t {
        Term::Fam(_, i) => *i == ANY_INDEX,
        Term::Var(_) => false,
        Term::App(_, args) => args.iter().any(has_any),
    }
}
