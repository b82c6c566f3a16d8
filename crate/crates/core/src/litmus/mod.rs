//! Litmus tests: parsing, unfolding into event structures, and generators.

mod ast;
mod build;
mod parse;

use thiserror::Error;

pub use ast::{Clause, CmpOp, Cond, Expr, LitmusTest, Span, Stmt};
pub use build::{build, build_with, BuildOptions, Built, DEFAULT_EVENT_CAP};
pub use parse::parse;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LitmusError {
    #[error("{span}: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{span}: '{text}' is not an integer")]
    NonInteger { span: Span, text: String },
    #[error("{span}: unknown location '{name}' (locations are declared in the init block)")]
    UnknownLocation { span: Span, name: String },
    #[error("{span}: register '{name}' is never loaded")]
    UndefinedRegister { span: Span, name: String },
    #[error("a test needs at least one thread")]
    NoThreads,
    #[error("event structure exceeds {limit} events")]
    TooManyEvents { limit: usize },
    #[error("store buffering needs at least 2 threads, got {0}")]
    TooFewThreads(usize),
}

/// The litmus files shipped in the repository's `litmus/` directory.
pub mod corpus {
    pub const LB_CTRL: &str = include_str!("../../../../litmus/LB+ctrl.lisa");
    pub const LB_FALSE_DEP: &str = include_str!("../../../../litmus/LB+false-dep.lisa");
    pub const SB: &str = include_str!("../../../../litmus/SB.lisa");
    pub const MP: &str = include_str!("../../../../litmus/MP.lisa");
    pub const CORR: &str = include_str!("../../../../litmus/CoRR.lisa");
    pub const JCTC1: &str = include_str!("../../../../litmus/JCTC1.lisa");
    pub const JCTC2: &str = include_str!("../../../../litmus/JCTC2.lisa");
    pub const JCTC3: &str = include_str!("../../../../litmus/JCTC3.lisa");
    pub const JCTC4: &str = include_str!("../../../../litmus/JCTC4.lisa");

    pub const ALL: [(&str, &str); 9] = [
        ("LB+ctrl", LB_CTRL),
        ("LB+false-dep", LB_FALSE_DEP),
        ("SB", SB),
        ("MP", MP),
        ("CoRR", CORR),
        ("JCTC1", JCTC1),
        ("JCTC2", JCTC2),
        ("JCTC3", JCTC3),
        ("JCTC4", JCTC4),
    ];
}

/// The `n`-thread store-buffering test: thread `i` stores `x{i} = 1` and
/// then loads the location written by the previous thread (cyclically). The
/// outcome asks whether every load can read 0.
pub fn gen_store_buffer(n: usize) -> Result<LitmusTest, LitmusError> {
    if n < 2 {
        return Err(LitmusError::TooFewThreads(n));
    }
    let loc = |i: usize| format!("x{}", i + 1);
    let span = Span::default();
    let threads = (0..n)
        .map(|i| {
            vec![
                Stmt::Store {
                    loc: loc(i),
                    value: Expr::Const(1),
                    span,
                },
                Stmt::Load {
                    reg: format!("r{}", i + 1),
                    loc: loc((i + n - 1) % n),
                    span,
                },
            ]
        })
        .collect();
    Ok(LitmusTest {
        name: format!("SB{n}"),
        init: (0..n).map(|i| (loc(i), 0)).collect(),
        threads,
        outcome: (0..n)
            .map(|i| Clause {
                thread: i,
                reg: format!("r{}", i + 1),
                value: 0,
            })
            .collect(),
    })
}
