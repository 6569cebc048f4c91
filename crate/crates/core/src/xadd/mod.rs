//! Linear extended algebraic decision diagrams.
//!
//! A [`DiagramStore`] owns every node and decision. Decisions are either
//! boolean variables or canonical linear tests `expr > 0`; leaves are affine
//! expressions. All operations return interned, ordered, reduced nodes.

mod apply;
mod io;
mod maxparam;
mod reduce;
mod store;
mod subst;

use std::fmt;

use crate::lp::LpError;

pub use apply::BinOp;
pub use io::named_values;
pub use reduce::{CasePartition, Path, Region};
pub use store::{Assignment, BoolId, ContVar, DecId, Decision, DiagramStore, Node, NodeId, Test};

#[derive(Clone, Debug, PartialEq)]
pub enum XaddError {
    /// A node's decision does not precede its children's decisions.
    OrderingViolation,
    /// A product of two non-constant leaves was requested.
    NonLinearResult,
    UnassignedVariable(String),
    /// A continuous variable was declared without a finite, nonempty box.
    UnboundedVariable(String),
    /// A variable was redeclared with different bounds.
    ConflictingBounds(String),
    UnknownVariable(String),
    /// A probability leaf is non-constant or outside `[0, 1]`.
    InvalidProbability(String),
    InfeasibleRegion,
    Lp(LpError),
    /// Malformed diagram text.
    Syntax {
        line: usize,
        msg: String,
    },
}

impl fmt::Display for XaddError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XaddError::OrderingViolation => write!(f, "decision order violated"),
            XaddError::NonLinearResult => write!(f, "product of two non-constant leaves is not linear"),
            XaddError::UnassignedVariable(v) => write!(f, "variable `{}` is unassigned", v),
            XaddError::UnboundedVariable(v) => write!(f, "variable `{}` needs finite bounds lo < hi", v),
            XaddError::ConflictingBounds(v) => write!(f, "variable `{}` redeclared with different bounds", v),
            XaddError::UnknownVariable(v) => write!(f, "unknown variable `{}`", v),
            XaddError::InvalidProbability(m) => write!(f, "invalid probability: {}", m),
            XaddError::InfeasibleRegion => write!(f, "region is empty"),
            XaddError::Lp(e) => write!(f, "lp: {}", e),
            XaddError::Syntax { line, msg } => write!(f, "line {}: {}", line, msg),
        }
    }
}

impl std::error::Error for XaddError {}

impl From<LpError> for XaddError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::InfeasibleRegion => XaddError::InfeasibleRegion,
            e => XaddError::Lp(e),
        }
    }
}

#[cfg(test)]
mod tests;
