//! End-to-end check of a litmus test under a memory model.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::events::{EsError, EventStructure};
use crate::litmus::{build_with, BuildOptions, LitmusError, LitmusTest};
use crate::models::{gen, Model, ModelOptions, ModelSentence};
use crate::oracle::{self, OracleError};
use crate::qbf::external::{self, ExternalError};
use crate::qbf::{self, Engine, Limits, SolveError, TranslateOptions, Translation};
use crate::so::{RelStructure, SoError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Allowed,
    Forbidden,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Allowed => "Allowed",
            Verdict::Forbidden => "Forbidden",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    Embedded(Engine),
    Oracle {
        budget: u64,
    },
    /// Prenex QDIMACS handed to a solver process.
    External {
        solver: PathBuf,
    },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Embedded(Engine::Cegar)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub model: ModelOptions,
    pub build: BuildOptions,
    pub backend: Backend,
    pub limits: Limits,
    pub translate: TranslateOptions,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Litmus(#[from] LitmusError),
    #[error(transparent)]
    Events(#[from] EsError),
    #[error(transparent)]
    Formula(#[from] SoError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    External(#[from] ExternalError),
}

/// The execution behind an Allowed verdict.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Execution {
    pub events: Vec<String>,
    pub rf: Vec<(String, String)>,
    pub co: Vec<(String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub test: String,
    pub model: String,
    pub params: BTreeMap<String, String>,
    pub verdict: Verdict,
    pub events: usize,
    pub bool_vars: usize,
    pub gates: usize,
    pub build_time: Duration,
    pub translate_time: Duration,
    pub solve_time: Duration,
    pub execution: Option<Execution>,
    /// Set when no execution can produce the outcome for syntactic reasons.
    pub unreachable: bool,
}

/// A test lowered to the structure and sentence handed to a backend.
pub struct Prepared {
    pub es: EventStructure,
    pub rs: RelStructure,
    pub sentence: ModelSentence,
    pub unreachable: bool,
    pub build_time: Duration,
}

pub fn prepare(
    test: &LitmusTest,
    model: Model,
    opts: &CheckOptions,
) -> Result<Prepared, CheckError> {
    let t0 = Instant::now();
    let built = build_with(test, &opts.build)?;
    let rs = built.es.to_rel_structure()?;
    let sentence = gen(model, &rs, &opts.model)?;
    Ok(Prepared {
        es: built.es,
        rs,
        sentence,
        unreachable: built.outcome_unreachable,
        build_time: t0.elapsed(),
    })
}

fn decode(t: &Translation, es: &EventStructure, witness: &BTreeMap<u32, bool>) -> Execution {
    let value = |v: u32| witness.get(&v).copied().unwrap_or(false);
    let name = |i: usize| es.events[i].name.clone();
    let mut ex = Execution::default();
    for b in &t.blocks {
        if !b.vars.iter().all(|v| witness.contains_key(v)) {
            continue;
        }
        let tuples = t.decode(b, value);
        let prefix = b.name.split('#').next().unwrap_or("");
        match prefix {
            "X" if ex.events.is_empty() && b.arity == 1 => {
                ex.events = tuples.iter().map(|t| name(t[0])).collect()
            }
            "Yrf" if ex.rf.is_empty() => {
                ex.rf = tuples.iter().map(|t| (name(t[0]), name(t[1]))).collect()
            }
            "Yco" if ex.co.is_empty() => {
                ex.co = tuples.iter().map(|t| (name(t[0]), name(t[1]))).collect()
            }
            _ => {}
        }
    }
    // Witness relations are unconstrained outside the configuration.
    let inside = |a: &String| ex.events.contains(a);
    ex.rf.retain(|(a, b)| inside(a) && inside(b));
    ex.co.retain(|(a, b)| inside(a) && inside(b));
    ex
}

/// Stack for the recursive translation and solving passes.
pub const SOLVER_STACK: usize = 1 << 30;

/// Runs `f` on a thread with a [`SOLVER_STACK`]-sized stack.
pub fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(SOLVER_STACK)
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

pub fn check(test: &LitmusTest, model: Model, opts: &CheckOptions) -> Result<Report, CheckError> {
    with_big_stack(|| check_here(test, model, opts))
}

fn check_here(test: &LitmusTest, model: Model, opts: &CheckOptions) -> Result<Report, CheckError> {
    let p = prepare(test, model, opts)?;
    let mut report = Report {
        test: test.name.clone(),
        model: model.id().to_string(),
        params: p.sentence.params.clone(),
        verdict: Verdict::Forbidden,
        events: p.es.len(),
        bool_vars: 0,
        gates: 0,
        build_time: p.build_time,
        translate_time: Duration::ZERO,
        solve_time: Duration::ZERO,
        execution: None,
        unreachable: p.unreachable,
    };
    if p.unreachable {
        return Ok(report);
    }
    match &opts.backend {
        Backend::Oracle { budget } => {
            let t0 = Instant::now();
            let ok = oracle::check_with_budget(&p.rs, &p.sentence.sentence, *budget)?;
            report.solve_time = t0.elapsed();
            report.verdict = if ok {
                Verdict::Allowed
            } else {
                Verdict::Forbidden
            };
        }
        Backend::Embedded(engine) => {
            let t0 = Instant::now();
            let mut t = qbf::translate_with(&p.rs, &p.sentence.sentence, opts.translate)?;
            report.translate_time = t0.elapsed();
            report.bool_vars = t.circuit.num_vars();
            report.gates = t.circuit.num_nodes();
            let t1 = Instant::now();
            let sol = qbf::solve(*engine, &mut t.circuit, t.root, opts.limits)?;
            report.solve_time = t1.elapsed();
            if sol.value {
                report.verdict = Verdict::Allowed;
                report.execution = Some(decode(&t, &p.es, &sol.witness));
            }
        }
        Backend::External { solver } => {
            let t0 = Instant::now();
            let t = qbf::translate_with(&p.rs, &p.sentence.sentence, opts.translate)?;
            let text = qbf::qdimacs::write_qdimacs(&t.circuit, t.root);
            report.translate_time = t0.elapsed();
            report.bool_vars = t.circuit.num_vars();
            report.gates = t.circuit.num_nodes();
            let t1 = Instant::now();
            let ok = external::solve_qdimacs(solver, &text, opts.limits.timeout)?;
            report.solve_time = t1.elapsed();
            report.verdict = if ok {
                Verdict::Allowed
            } else {
                Verdict::Forbidden
            };
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Qcir,
    Qdimacs,
}

impl EmitFormat {
    pub fn extension(self) -> &'static str {
        match self {
            EmitFormat::Qcir => "qcir",
            EmitFormat::Qdimacs => "qdimacs",
        }
    }
}

/// Sidecar record describing an emitted instance.
#[derive(Clone, Debug, Serialize)]
pub struct EmitMeta {
    pub test: String,
    pub model: String,
    pub format: EmitFormat,
    pub params: BTreeMap<String, String>,
    pub events: usize,
    /// Boolean variables of the translation.
    pub variables: usize,
    pub gates: usize,
    /// Variables declared in the emitted file, auxiliaries included.
    pub file_variables: usize,
    pub clauses: Option<usize>,
    /// Quantifier alternation of the instance, outermost first.
    pub quantifiers: Vec<String>,
    pub unreachable: bool,
    pub millis: u128,
}

pub struct Emitted {
    pub text: String,
    pub meta: EmitMeta,
}

/// Builds the QBF instance deciding `test` under `model` without solving it.
/// An outcome no execution can reach is emitted as the constant false.
pub fn emit(
    test: &LitmusTest,
    model: Model,
    opts: &CheckOptions,
    format: EmitFormat,
) -> Result<Emitted, CheckError> {
    with_big_stack(|| emit_here(test, model, opts, format))
}

fn emit_here(
    test: &LitmusTest,
    model: Model,
    opts: &CheckOptions,
    format: EmitFormat,
) -> Result<Emitted, CheckError> {
    let t0 = Instant::now();
    let p = prepare(test, model, opts)?;
    let mut t = qbf::translate_with(&p.rs, &p.sentence.sentence, opts.translate)?;
    if p.unreachable {
        t.root = qbf::Lit::FALSE;
    }
    let quantifiers = t
        .circuit
        .quantifier_prefix(t.root)
        .iter()
        .map(|q| format!("{q:?}").to_lowercase())
        .collect();
    let (text, file_variables, clauses) = match format {
        EmitFormat::Qcir => {
            let (text, vars) = qbf::qcir::write_qcir_counted(&t.circuit, t.root);
            (text, vars, None)
        }
        EmitFormat::Qdimacs => {
            let q = qbf::qdimacs::prenex_cnf(&t.circuit, t.root);
            (q.to_text(), q.num_vars, Some(q.clauses.len()))
        }
    };
    Ok(Emitted {
        text,
        meta: EmitMeta {
            test: test.name.clone(),
            model: model.id().to_string(),
            format,
            params: p.sentence.params.clone(),
            events: p.es.len(),
            variables: t.circuit.num_vars(),
            gates: t.circuit.num_nodes(),
            file_variables,
            clauses,
            quantifiers,
            unreachable: p.unreachable,
            millis: t0.elapsed().as_millis(),
        },
    })
}
