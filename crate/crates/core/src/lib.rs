//! Two elementary cellular automata interacting on one row through a
//! three-color global rule, scored by compression and sorted into Wolfram
//! classes, plus the sweep and aggregation tooling around it.

pub mod aggregate;
pub mod cli;
pub mod complexity;
pub mod debruijn;
pub mod eca;
pub mod error;
pub mod global_rule;
pub mod sweep;

pub use complexity::{ClassScore, LabeledRuleSet, Scorer, Thresholds, WolframClass};
pub use eca::{Configuration, EcaRule, EvolutionGrid, LocalRule};
pub use error::{Error, Result};
pub use global_rule::{GlobalRule, MixedAssignment};
