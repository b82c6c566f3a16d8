//! Quantified Boolean formulas: translation from second-order sentences,
//! solvers, and QCIR / QDIMACS exchange formats.

pub mod cegar;
pub mod circuit;
pub mod expand;
pub mod external;
pub mod qcir;
pub mod qdimacs;
pub mod translate;

use std::cell::Cell;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use circuit::{Circuit, Lit, Node, Quant, VarId, VarInfo};
pub use translate::{translate, translate_with, SoBlock, TranslateOptions, Translation};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30 * 60);
pub const DEFAULT_MEM_CAP: usize = 3 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub timeout: Option<Duration>,
    /// Bytes the solver may add to the process: the larger of its own
    /// estimate and the growth of the resident set since solving began.
    pub mem_cap: Option<usize>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            timeout: Some(DEFAULT_TIMEOUT),
            mem_cap: Some(DEFAULT_MEM_CAP),
        }
    }
}

impl Limits {
    pub fn none() -> Self {
        Limits {
            timeout: None,
            mem_cap: None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("timed out after {0:?}")]
    Timeout(Duration),
    #[error("memory cap of {cap} bytes exceeded (using {used})")]
    MemoryCap { used: usize, cap: usize },
}

/// Resident set size of this process, where the platform reports it.
pub fn resident_bytes() -> Option<usize> {
    let statm = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: usize = statm.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * 4096)
}

/// A running limit check.
#[derive(Debug)]
pub(crate) struct Budget {
    start: Instant,
    limits: Limits,
    base_rss: Option<usize>,
    calls: Cell<u32>,
    rss_growth: Cell<usize>,
}

impl Budget {
    pub(crate) fn new(limits: Limits) -> Self {
        Budget {
            start: Instant::now(),
            limits,
            base_rss: limits.mem_cap.and_then(|_| resident_bytes()),
            calls: Cell::new(0),
            rss_growth: Cell::new(0),
        }
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        self.limits.timeout.map(|t| self.start + t)
    }

    pub(crate) fn check_time(&self) -> Result<(), SolveError> {
        match self.limits.timeout {
            Some(t) if self.start.elapsed() >= t => Err(SolveError::Timeout(t)),
            _ => Ok(()),
        }
    }

    pub(crate) fn check_mem(&self, estimate: usize) -> Result<(), SolveError> {
        let Some(cap) = self.limits.mem_cap else {
            return Ok(());
        };
        let calls = self.calls.get().wrapping_add(1);
        self.calls.set(calls);
        if let (Some(base), 0) = (self.base_rss, calls % 32) {
            if let Some(now) = resident_bytes() {
                self.rss_growth.set(now.saturating_sub(base));
            }
        }
        let used = estimate.max(self.rss_growth.get());
        if used > cap {
            return Err(SolveError::MemoryCap { used, cap });
        }
        Ok(())
    }

    pub(crate) fn timeout_error(&self) -> SolveError {
        SolveError::Timeout(self.limits.timeout.unwrap_or_default())
    }
}

/// Truth value of a closed circuit, with values for the outermost
/// existential variables when it is true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub value: bool,
    pub witness: BTreeMap<VarId, bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    /// Exhaustive expansion of quantifier blocks. Exponential; for small
    /// instances and cross-checking.
    Expansion,
    /// Counterexample-guided abstraction refinement over incremental SAT.
    #[default]
    Cegar,
}

/// Decides a closed circuit.
pub fn solve(
    engine: Engine,
    circuit: &mut Circuit,
    root: Lit,
    limits: Limits,
) -> Result<Solution, SolveError> {
    match engine {
        Engine::Expansion => expand::solve(circuit, root, limits),
        Engine::Cegar => cegar::solve(circuit, root, limits),
    }
}
