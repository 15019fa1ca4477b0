//! Abstract visual reasoning over 3x3 progressive matrices: problem
//! generation, rendering and perception, rule induction from solved samples,
//! and a rule-pool solver.

pub mod corpus;
pub mod domain;
pub mod error;
pub mod generator;
pub mod harness;
pub mod induction;
pub mod perception;
pub mod render;
pub mod solver;

pub use domain::{AttributeKind, Code, Configuration, Panel, Problem, RuleKind};
pub use error::ContractViolation;
pub use induction::{Rule, RulePool};
