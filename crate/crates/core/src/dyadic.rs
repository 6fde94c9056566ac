//! Dyadic transformations and projections of triadic formulae, rules and
//! specifications, plus their inverses.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::term::Term;
use crate::tss::{Formula, Rule, Shape, Template, Tss, TssError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Proj {
    Id,
    P1,
    P2,
}

/// One of the twelve readings `D_k^prj` of a triadic formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DyadicKind {
    k: u8,
    prj: Proj,
}

// Positions inside the triadic triple (t, l, t').
const T: usize = 0;
const L: usize = 1;
const T2: usize = 2;

impl DyadicKind {
    pub const D1: DyadicKind = DyadicKind { k: 1, prj: Proj::Id };
    pub const D2: DyadicKind = DyadicKind { k: 2, prj: Proj::Id };
    pub const D3: DyadicKind = DyadicKind { k: 3, prj: Proj::Id };
    pub const D4: DyadicKind = DyadicKind { k: 4, prj: Proj::Id };
    pub const D5: DyadicKind = DyadicKind { k: 5, prj: Proj::Id };
    pub const D6: DyadicKind = DyadicKind { k: 6, prj: Proj::Id };
    pub const D1P1: DyadicKind = DyadicKind { k: 1, prj: Proj::P1 };
    pub const D1P2: DyadicKind = DyadicKind { k: 1, prj: Proj::P2 };
    pub const D2P1: DyadicKind = DyadicKind { k: 2, prj: Proj::P1 };
    pub const D2P2: DyadicKind = DyadicKind { k: 2, prj: Proj::P2 };
    pub const D3P1: DyadicKind = DyadicKind { k: 3, prj: Proj::P1 };
    pub const D3P2: DyadicKind = DyadicKind { k: 3, prj: Proj::P2 };

    pub const ALL: [DyadicKind; 12] = [
        Self::D1,
        Self::D2,
        Self::D3,
        Self::D4,
        Self::D5,
        Self::D6,
        Self::D1P1,
        Self::D1P2,
        Self::D2P1,
        Self::D2P2,
        Self::D3P1,
        Self::D3P2,
    ];

    pub const IDENTITIES: [DyadicKind; 6] = [Self::D1, Self::D2, Self::D3, Self::D4, Self::D5, Self::D6];

    pub fn new(k: u8, prj: Proj) -> Option<Self> {
        let legal = match prj {
            Proj::Id => (1..=6).contains(&k),
            _ => (1..=3).contains(&k),
        };
        legal.then_some(DyadicKind { k, prj })
    }

    pub fn k(self) -> u8 {
        self.k
    }

    pub fn prj(self) -> Proj {
        self.prj
    }

    pub fn is_identity(self) -> bool {
        self.prj == Proj::Id
    }

    /// Triadic positions forming the source and the target.
    fn layout(self) -> (&'static [usize], &'static [usize]) {
        match (self.k, self.prj) {
            (1, Proj::Id) => (&[T], &[L, T2]),
            (2, Proj::Id) => (&[T2], &[L, T]),
            (3, Proj::Id) => (&[L], &[T, T2]),
            (4, _) => (&[T, L], &[T2]),
            (5, _) => (&[T2, L], &[T]),
            (6, _) => (&[T, T2], &[L]),
            (1, Proj::P1) => (&[T], &[L]),
            (1, Proj::P2) => (&[T], &[T2]),
            (2, Proj::P1) => (&[T2], &[L]),
            (2, Proj::P2) => (&[T2], &[T]),
            (3, Proj::P1) => (&[L], &[T]),
            (3, Proj::P2) => (&[L], &[T2]),
            _ => unreachable!("kinds are validated on construction"),
        }
    }

    /// Source and target tuple lengths.
    pub fn arities(self) -> (usize, usize) {
        let (s, t) = self.layout();
        (s.len(), t.len())
    }

    /// The property that finite branching of this reading expresses.
    pub fn property(self) -> crate::lts::PropertyId {
        crate::lts::PropertyId::for_kind(self)
    }
}

impl fmt::Display for DyadicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.prj {
            Proj::Id => "id",
            Proj::P1 => "p1",
            Proj::P2 => "p2",
        };
        write!(f, "d{}.{p}", self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dyadic kind `{0}` (expected d1.id .. d6.id, d1.p1, d1.p2, d2.p1, d2.p2, d3.p1 or d3.p2)")]
pub struct KindParseError(pub String);

impl FromStr for DyadicKind {
    type Err = KindParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || KindParseError(s.to_string());
        let rest = s.strip_prefix('d').ok_or_else(err)?;
        let (k, p) = rest.split_once('.').ok_or_else(err)?;
        let k: u8 = k.parse().map_err(|_| err())?;
        let prj = match p {
            "id" => Proj::Id,
            "p1" | "pi1" => Proj::P1,
            "p2" | "pi2" => Proj::P2,
            _ => return Err(err()),
        };
        DyadicKind::new(k, prj).ok_or_else(err)
    }
}

fn triple<T: Clone>(f: &Formula<T>) -> [T; 3] {
    assert!(f.source.len() == 1 && f.target.len() == 2, "triadic formula expected");
    [f.source[0].clone(), f.target[0].clone(), f.target[1].clone()]
}

/// Rearranges a triadic formula according to `kind`.
pub fn transform_formula<T: Clone>(f: &Formula<T>, kind: DyadicKind) -> Formula<T> {
    let tr = triple(f);
    let (s, t) = kind.layout();
    Formula { source: s.iter().map(|&p| tr[p].clone()).collect(), target: t.iter().map(|&p| tr[p].clone()).collect() }
}

/// Rebuilds the triadic formula from a formula produced by an identity kind.
pub fn inverse_formula<T: Clone>(f: &Formula<T>, kind: DyadicKind) -> Result<Formula<T>, TssError> {
    if !kind.is_identity() {
        return Err(TssError::NotInvertible(kind));
    }
    let (s, t) = kind.layout();
    let mut slots: [Option<T>; 3] = [None, None, None];
    for (&p, v) in s.iter().chain(t.iter()).zip(f.source.iter().chain(f.target.iter())) {
        slots[p] = Some(v.clone());
    }
    let [a, b, c] = slots.map(|v| v.expect("identity layouts cover all three positions"));
    Ok(Formula { source: vec![a], target: vec![b, c] })
}

/// `Tr_k(o, d1, d2)` for `k` in 1..=3.
pub fn tr_inverse(o: Term, d1: Term, d2: Term, k: u8) -> Formula<Term> {
    match k {
        1 => Formula::triadic(o, d1, d2),
        2 => Formula::triadic(d2, d1, o),
        3 => Formula::triadic(d1, o, d2),
        _ => panic!("Tr_k is defined for k in 1..=3, got {k}"),
    }
}

pub fn transform_rule(r: &Rule, kind: DyadicKind) -> Rule {
    Rule {
        name: r.name.clone(),
        premises: r.premises.iter().map(|p| transform_formula(p, kind)).collect(),
        families: r.families.iter().map(|p| transform_formula(p, kind)).collect(),
        conclusion: transform_formula(&r.conclusion, kind),
    }
}

fn transform_template(t: &Template, kind: DyadicKind) -> Template {
    Template {
        name: t.name.clone(),
        start: t.start,
        premises: t.premises.iter().map(|p| transform_formula(p, kind)).collect(),
        families: t.families.iter().map(|p| transform_formula(p, kind)).collect(),
        conclusion: transform_formula(&t.conclusion, kind),
    }
}

/// Applies `kind` to every rule and template of a triadic specification.
pub fn transform_tss(tss: &Tss, kind: DyadicKind) -> Result<Tss, TssError> {
    if tss.shape != Shape::Triadic {
        return Err(TssError::AlreadyDyadic);
    }
    Ok(Tss {
        signature: tss.signature.clone(),
        shape: Shape::Dyadic(kind),
        rules: tss.rules.iter().map(|r| transform_rule(r, kind)).collect(),
        templates: tss.templates.iter().map(|t| transform_template(t, kind)).collect(),
    })
}

/// Reconstructs the triadic specification from an identity-kind transform.
pub fn inverse_tss(tss: &Tss) -> Result<Tss, TssError> {
    let Shape::Dyadic(kind) = tss.shape else {
        return Err(TssError::NotDyadic);
    };
    let inv = |f: &Formula<Term>| inverse_formula(f, kind);
    let rules = tss
        .rules
        .iter()
        .map(|r| {
            Ok(Rule {
                name: r.name.clone(),
                premises: r.premises.iter().map(inv).collect::<Result<_, TssError>>()?,
                families: r.families.iter().map(|f| inverse_formula(f, kind)).collect::<Result<_, _>>()?,
                conclusion: inv(&r.conclusion)?,
            })
        })
        .collect::<Result<_, TssError>>()?;
    let templates = tss
        .templates
        .iter()
        .map(|t| {
            Ok(Template {
                name: t.name.clone(),
                start: t.start,
                premises: t.premises.iter().map(|f| inverse_formula(f, kind)).collect::<Result<_, _>>()?,
                families: t.families.iter().map(|f| inverse_formula(f, kind)).collect::<Result<_, _>>()?,
                conclusion: inverse_formula(&t.conclusion, kind)?,
            })
        })
        .collect::<Result<_, TssError>>()?;
    Ok(Tss { signature: tss.signature.clone(), shape: Shape::Triadic, rules, templates })
}
