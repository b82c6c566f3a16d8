use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use somm_core::check::{CheckError, Execution, Report, Verdict};
use somm_core::litmus::LitmusError;
use somm_core::qbf::external::ExternalError;
use somm_core::qbf::SolveError;

/// Failure classes scripts can tell apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Io,
    Parse,
    EventCap,
    InvalidStructure,
    Formula,
    Timeout,
    MemoryCap,
    OracleBudget,
    SolverUnavailable,
    SolverFailure,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub kind: ErrorKind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }
}

impl From<&ExternalError> for Failure {
    fn from(e: &ExternalError) -> Self {
        let kind = match e {
            ExternalError::NotConfigured => ErrorKind::SolverUnavailable,
            ExternalError::Timeout(_) => ErrorKind::Timeout,
            ExternalError::Io(_) | ExternalError::UnexpectedExit { .. } => ErrorKind::SolverFailure,
        };
        Failure::new(kind, e.to_string())
    }
}

impl From<&CheckError> for Failure {
    fn from(e: &CheckError) -> Self {
        let kind = match e {
            CheckError::Litmus(LitmusError::TooManyEvents { .. }) => ErrorKind::EventCap,
            CheckError::Litmus(_) => ErrorKind::Parse,
            CheckError::Events(_) => ErrorKind::InvalidStructure,
            CheckError::Formula(_) => ErrorKind::Formula,
            CheckError::Solve(SolveError::Timeout(_)) => ErrorKind::Timeout,
            CheckError::Solve(SolveError::MemoryCap { .. }) => ErrorKind::MemoryCap,
            CheckError::Oracle(somm_core::oracle::OracleError::Infeasible(_)) => {
                ErrorKind::OracleBudget
            }
            CheckError::Oracle(_) => ErrorKind::Formula,
            CheckError::External(x) => return Failure::from(x),
        };
        Failure::new(kind, e.to_string())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Millis {
    pub build: u128,
    pub translate: u128,
    pub solve: u128,
    pub total: u128,
}

/// One line of `--format machine` output for `check`. Every key is always
/// present; fields that do not apply are null.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub schema: u32,
    pub input: String,
    pub test: Option<String>,
    pub model: String,
    pub backend: String,
    pub status: &'static str,
    pub verdict: Option<Verdict>,
    pub unreachable: Option<bool>,
    pub events: Option<usize>,
    pub variables: Option<usize>,
    pub gates: Option<usize>,
    pub params: BTreeMap<String, String>,
    pub millis: Option<Millis>,
    pub execution: Option<Execution>,
    pub error: Option<Failure>,
}

pub const SCHEMA: u32 = 1;

fn ms(d: Duration) -> u128 {
    d.as_millis()
}

impl CheckRecord {
    pub fn new(input: &str, model: &str, backend: &str) -> Self {
        CheckRecord {
            schema: SCHEMA,
            input: input.to_string(),
            test: None,
            model: model.to_string(),
            backend: backend.to_string(),
            status: "error",
            verdict: None,
            unreachable: None,
            events: None,
            variables: None,
            gates: None,
            params: BTreeMap::new(),
            millis: None,
            execution: None,
            error: None,
        }
    }

    pub fn with_report(mut self, r: &Report) -> Self {
        self.test = Some(r.test.clone());
        self.status = match r.verdict {
            Verdict::Allowed => "allowed",
            Verdict::Forbidden => "forbidden",
        };
        self.verdict = Some(r.verdict);
        self.unreachable = Some(r.unreachable);
        self.events = Some(r.events);
        self.variables = Some(r.bool_vars);
        self.gates = Some(r.gates);
        self.params = r.params.clone();
        self.millis = Some(Millis {
            build: ms(r.build_time),
            translate: ms(r.translate_time),
            solve: ms(r.solve_time),
            total: ms(r.build_time + r.translate_time + r.solve_time),
        });
        self.execution = r.execution.clone();
        self
    }

    pub fn with_error(mut self, f: Failure) -> Self {
        self.status = "error";
        self.error = Some(f);
        self
    }
}

pub fn human_report(r: &Report, backend: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} under {}: {}", r.test, r.model, r.verdict);
    if r.unreachable {
        let _ = writeln!(s, "  no control path satisfies the final condition");
    }
    let _ = writeln!(
        s,
        "  backend {backend}, {} events, {} variables, {} gates",
        r.events, r.bool_vars, r.gates
    );
    if !r.params.is_empty() {
        let ps: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "  params {}", ps.join(" "));
    }
    let _ = writeln!(
        s,
        "  time build {} ms, translate {} ms, solve {} ms",
        ms(r.build_time),
        ms(r.translate_time),
        ms(r.solve_time)
    );
    if let Some(ex) = &r.execution {
        let _ = writeln!(s, "  execution {{{}}}", ex.events.join(", "));
        let pairs = |ps: &[(String, String)]| {
            ps.iter()
                .map(|(a, b)| format!("{a}->{b}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        if !ex.rf.is_empty() {
            let _ = writeln!(s, "  rf {}", pairs(&ex.rf));
        }
        if !ex.co.is_empty() {
            let _ = writeln!(s, "  co {}", pairs(&ex.co));
        }
    }
    s
}

pub const CHECK_CSV_HEADER: [&str; 7] = [
    "test",
    "model",
    "backend",
    "verdict",
    "events",
    "variables",
    "millis",
];
