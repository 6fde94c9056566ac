//! Checking rule formats of transition system specifications for finiteness
//! properties of the induced transition relations.

pub mod corpus;
pub mod dyadic;
pub mod lts;
pub mod spec_file;
pub mod strat;
pub mod stypes;
pub mod term;
pub mod tss;
pub mod verdict;

pub use dyadic::{DyadicKind, Proj};
pub use lts::{Bounds, Lts, LtsError, PropertyId};
pub use term::{Name, Signature, Subst, Term};
pub use tss::{Formula, Rule, Shape, Template, Tss, TssError};
pub use verdict::{Outcome, Verdict, Witness};
