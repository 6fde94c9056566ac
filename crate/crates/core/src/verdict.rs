//! Structured outcomes shared by every check.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
}

impl Outcome {
    /// Process exit status for a verdict with this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 2,
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Outcome) -> Outcome {
        self.max(other)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    pub terms: Vec<String>,
    pub message: String,
}

impl Witness {
    pub fn new(rule: Option<&str>, terms: Vec<String>, message: String) -> Self {
        Witness { rule: rule.map(str::to_string), terms, message }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = &self.rule {
            write!(f, "[{r}] ")?;
        }
        f.write_str(&self.message)?;
        if !self.terms.is_empty() {
            write!(f, ": {}", self.terms.join(", "))?;
        }
        Ok(())
    }
}

/// A rule's S-type (or η-type) as it appears in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeEntry {
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stype: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportEntry {
    pub source: String,
    pub support: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Payload {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<TypeEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub support: Vec<SupportEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub junk: Vec<String>,
}

impl Payload {
    pub fn is_empty(&self) -> bool {
        self.types.is_empty() && self.support.is_empty() && self.junk.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Payload::is_empty")]
    pub payload: Payload,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Verdict>,
}

impl Verdict {
    pub fn new(check: &str, outcome: Outcome) -> Self {
        Verdict {
            check: check.to_string(),
            outcome,
            summary: None,
            witnesses: Vec::new(),
            notes: Vec::new(),
            payload: Payload::default(),
            children: Vec::new(),
        }
    }

    pub fn pass(check: &str) -> Self {
        Verdict::new(check, Outcome::Pass)
    }

    pub fn with_witnesses(mut self, w: Vec<Witness>) -> Self {
        self.witnesses = w;
        self
    }

    pub fn with_summary(mut self, s: impl Into<String>) -> Self {
        self.summary = Some(s.into());
        self
    }

    pub fn witness(&mut self, rule: Option<&str>, terms: Vec<String>, message: impl Into<String>) {
        self.witnesses.push(Witness::new(rule, terms, message.into()));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn push_child(&mut self, child: Verdict) {
        self.outcome = self.outcome.combine(child.outcome);
        self.children.push(child);
    }

    /// Depth-first search for a sub-verdict by check name.
    pub fn find(&self, check: &str) -> Option<&Verdict> {
        if self.check == check {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(check))
    }

    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }

    fn render(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        out.push_str(&format!("{pad}{}: {}", self.check, self.outcome));
        if let Some(s) = &self.summary {
            out.push_str(&format!(" ({s})"));
        }
        out.push('\n');
        for w in &self.witnesses {
            out.push_str(&format!("{pad}  - {w}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("{pad}  note: {n}\n"));
        }
        for s in &self.payload.support {
            out.push_str(&format!("{pad}  eta({}) = {{{}}}\n", s.source, s.support.join(", ")));
        }
        for t in &self.payload.types {
            match (&t.stype, &t.reason) {
                (Some(st), _) => out.push_str(&format!("{pad}  {}: {st}\n", t.rule)),
                (None, Some(r)) => out.push_str(&format!("{pad}  {}: no valid type ({r})\n", t.rule)),
                (None, None) => out.push_str(&format!("{pad}  {}: no valid type\n", t.rule)),
            }
        }
        if !self.payload.junk.is_empty() {
            out.push_str(&format!("{pad}  junk: {}\n", self.payload.junk.join(", ")));
        }
        for c in &self.children {
            c.render(depth + 1, out);
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(0, &mut s);
        f.write_str(s.trim_end())
    }
}
