//! Second-order logic kernel: structures, formulas and combinators.

pub mod combinators;
mod formula;
mod structure;
pub mod text;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use combinators::{Fresh, RelExpr};
pub use formula::{Formula, FreeVars, Pred, Term};
pub use structure::{element_name, RelStructure, Relation, Tuple, EMPTY, IDENTITY};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SoError {
    #[error("universe must contain at least one element")]
    EmptyUniverse,
    #[error("element {element} outside universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("symbol '{0}' is already defined")]
    Redefined(String),
    #[error("symbol '{0}' has arity zero")]
    ZeroArity(String),
    #[error("arity mismatch for '{symbol}': expected {expected}, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound symbol '{0}'")]
    Unbound(String),
    #[error("syntax error: {0}")]
    Syntax(String),
}

/// Variable bindings: first-order variables to elements, second-order
/// variables to sets of tuples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Environment {
    pub fo: BTreeMap<String, usize>,
    pub so: BTreeMap<String, (usize, BTreeSet<Tuple>)>,
}

impl Environment {
    pub fn bind_so(
        &mut self,
        var: &str,
        arity: usize,
        set: BTreeSet<Tuple>,
    ) -> Result<(), SoError> {
        if let Some(bad) = set.iter().find(|t| t.len() != arity) {
            return Err(SoError::ArityMismatch {
                symbol: var.to_string(),
                expected: arity,
                found: bad.len(),
            });
        }
        self.so.insert(var.to_string(), (arity, set));
        Ok(())
    }
}
