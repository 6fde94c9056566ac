//! Workloads for the engine benchmarks.

use bnformat::corpus::{load_example, ExampleCase};
use bnformat::lts::Bounds;

/// Corpus cases timed by the rule-format benchmark.
pub const CHECKED: [&str; 4] = ["ex6_stratification", "ccs_plus", "microchocs_send", "microchocs_subst"];

/// Cases derived in full at the given bounds.
pub const DERIVED: [(&str, Bounds); 3] = [
    ("ex6_stratification", Bounds::new(3, 3, 50)),
    ("microchocs_tau", Bounds::new(3, 3, 50)),
    ("microchocs_send", Bounds::new(2, 3, 50)),
];

pub fn case(name: &str) -> ExampleCase {
    load_example(name).unwrap_or_else(|e| panic!("{e}"))
}
