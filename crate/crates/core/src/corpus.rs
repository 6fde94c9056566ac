//! Worked examples with their expected verdicts.
//!
//! Each case is a spec file `corpus/<name>.tss` next to `corpus/<name>.expected`,
//! a JSON document naming the dyadic kind, the measure and the outcome.

use serde::Deserialize;
use thiserror::Error;

use crate::dyadic::DyadicKind;
use crate::lts::Bounds;
use crate::spec_file::{parse_spec_file, ParseError, SpecFile};
use crate::strat::StratMeasure;
use crate::stypes::{check_rule_format, legacy_eta_check};
use crate::verdict::{Outcome, Verdict};

macro_rules! registry {
    ($($name:literal),* $(,)?) => {
        &[$(($name,
            include_str!(concat!("../../../corpus/", $name, ".tss")),
            include_str!(concat!("../../../corpus/", $name, ".expected")))),*]
    };
}

static REGISTRY: &[(&str, &str, &str)] = registry![
    "ex6_stratification",
    "family_premises",
    "restricted_support",
    "targets",
    "ex5_uniform_targets",
    "ex5_uniform_targets_renamed",
    "sigma0_axiom_fx",
    "axiom_any_label",
    "axiom_any_target",
    "projection_label",
    "projection_target",
    "ccs_plus",
    "microchocs_subst",
    "microchocs_send",
    "microchocs_recv",
    "microchocs_tau",
];

/// The four MicroCHOCS relations in one triadic system, distinguished by
/// label shape. Not a registry case: it exists for derivations.
pub const MICROCHOCS_FULL: &str = include_str!("../../../corpus/microchocs_full.tss");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown example `{0}`")]
    UnknownName(String),
    #[error("{name}.tss:{source}")]
    Parse { name: String, source: ParseError },
    #[error("{name}.expected: {message}")]
    Expected { name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct LegacyExpectation {
    pub eta: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Expected {
    pub kind: String,
    pub strat: String,
    pub outcome: Outcome,
    #[serde(default)]
    pub summary: Option<String>,
    /// Checks that must fail when the outcome is `fail`.
    #[serde(default)]
    pub failing: Vec<String>,
    #[serde(default)]
    pub legacy: Option<LegacyExpectation>,
    pub note: String,
}

/// A parsed example ready for the pipeline.
#[derive(Debug, Clone)]
pub struct ExampleCase {
    pub name: &'static str,
    pub text: &'static str,
    pub spec: SpecFile,
    pub kind: DyadicKind,
    pub expected: Expected,
    pub bounds: Bounds,
}

impl ExampleCase {
    pub fn measure(&self) -> &StratMeasure {
        self.spec.measure(&self.expected.strat).expect("validated on load")
    }

    pub fn run(&self) -> Verdict {
        check_rule_format(&self.spec.tss, self.kind, self.measure(), self.bounds)
    }

    pub fn run_legacy(&self) -> Option<Verdict> {
        let l = self.expected.legacy.as_ref()?;
        let eta = self.spec.eta(&l.eta).expect("validated on load");
        Some(legacy_eta_check(&self.spec.tss, eta, self.measure(), self.bounds))
    }

    /// Compares a verdict of [`ExampleCase::run`] with the expectation.
    pub fn mismatch(&self, v: &Verdict) -> Option<String> {
        let e = &self.expected;
        if v.outcome != e.outcome {
            return Some(format!("{}: expected {}, got {}", self.name, e.outcome, v.outcome));
        }
        if let Some(s) = &e.summary {
            if v.summary.as_deref() != Some(s) {
                return Some(format!("{}: expected summary {s:?}, got {:?}", self.name, v.summary));
            }
        }
        for c in &e.failing {
            if v.find(c).map(|c| c.outcome) != Some(Outcome::Fail) {
                return Some(format!("{}: expected check {c} to fail", self.name));
            }
        }
        None
    }
}

/// Names of all registered examples, in registry order.
pub fn example_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _, _)| *n)
}

pub fn load_example(name: &str) -> Result<ExampleCase, CorpusError> {
    let &(name, text, expected) =
        REGISTRY.iter().find(|(n, _, _)| *n == name).ok_or_else(|| CorpusError::UnknownName(name.to_string()))?;
    let spec = parse_spec_file(text).map_err(|source| CorpusError::Parse { name: name.into(), source })?;
    let bad = |message: String| CorpusError::Expected { name: name.into(), message };
    let expected: Expected = serde_json::from_str(expected).map_err(|e| bad(e.to_string()))?;
    let kind = expected.kind.parse().map_err(|_| bad(format!("unknown kind `{}`", expected.kind)))?;
    if spec.measure(&expected.strat).is_none() {
        return Err(bad(format!("no measure named `{}`", expected.strat)));
    }
    if let Some(l) = &expected.legacy {
        if spec.eta(&l.eta).is_none() {
            return Err(bad(format!("no support map named `{}`", l.eta)));
        }
    }
    Ok(ExampleCase { name, text, spec, kind, expected, bounds: Bounds::default() })
}

pub fn load_all() -> Result<Vec<ExampleCase>, CorpusError> {
    example_names().map(load_example).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_loads() {
        let all = load_all().unwrap();
        assert_eq!(all.len(), 16);
        assert!(parse_spec_file(MICROCHOCS_FULL).is_ok());
    }

    #[test]
    fn unknown_name() {
        let e = load_example("nope").unwrap_err();
        assert_eq!(e.to_string(), "unknown example `nope`");
    }

    #[test]
    fn ex6_golden_parse() {
        let c = load_example("ex6_stratification").unwrap();
        assert_eq!(c.kind, DyadicKind::D1);
        assert_eq!(c.spec.tss.rules[0].name, "L");
        assert_eq!(c.spec.tss.rules[0].conclusion.to_string(), "g(l1) -> (l1, l1)");
        assert_eq!(c.spec.tss.templates[0].name, "R");
        assert_eq!(c.spec.tss.templates[0].start, 1);
        assert_eq!(c.measure().to_string(), "strat S0 {\n  g(l1) => 0;\n  f(p) => 1;\n}");
    }
}
