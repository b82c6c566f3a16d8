use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, ValueEnum};
use somm_core::check::{Backend, CheckOptions};
use somm_core::litmus::{BuildOptions, DEFAULT_EVENT_CAP};
use somm_core::models::{Justify, Model, ModelOptions};
use somm_core::oracle;
use somm_core::qbf::external::{self, ExternalError};
use somm_core::qbf::{Engine, Limits, DEFAULT_MEM_CAP, DEFAULT_TIMEOUT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Embedded,
    Oracle,
    EmitQcir,
    EmitQdimacs,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Cegar,
    Expansion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum JustifyKind {
    /// The write is the justifying event.
    Source,
    /// The justified read must itself be a write.
    Target,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
    Csv,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse()
}

fn positive_secs(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(Duration::from_secs_f64(v))
    } else {
        Err("must be positive".into())
    }
}

pub fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("'{s}' is not a positive integer")),
    }
}

fn values(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| format!("'{v}' is not an integer"))
        })
        .collect()
}

/// Options shared by every subcommand that runs the pipeline.
#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Memory model: sc, ra, c11 or jr.
    #[arg(long, short, value_parser = parse_model)]
    pub model: Model,
    #[arg(long, value_enum, default_value = "embedded")]
    pub backend: BackendKind,
    /// Algorithm of the embedded solver.
    #[arg(long, value_enum, default_value = "cegar")]
    pub engine: EngineKind,
    /// Solver time limit in seconds.
    #[arg(long, value_parser = positive_secs)]
    pub timeout: Option<Duration>,
    /// Solver memory limit in MB.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub mem_cap: Option<u64>,
    /// Largest event structure the frontend may build.
    #[arg(long, default_value_t = DEFAULT_EVENT_CAP, value_parser = positive)]
    pub event_cap: usize,
    /// Extra values for every location's domain, comma separated.
    #[arg(long, value_parser = values)]
    pub values: Option<Vec<i64>>,
    /// Closure bound for jr.
    #[arg(long)]
    pub jr_n: Option<usize>,
    /// Which side of a justification must be a write in jr.
    #[arg(long, value_enum, default_value = "source")]
    pub justify: JustifyKind,
    /// Work budget of the oracle backend, in clause evaluations.
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub oracle_budget: u64,
    #[arg(long, value_enum, default_value = "human")]
    pub format: Format,
    /// Same as `--format machine`.
    #[arg(long)]
    pub machine: bool,
}

/// Everything one run needs, resolved from the command line.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: Model,
    pub check: CheckOptions,
}

impl RunArgs {
    pub fn format(&self) -> Format {
        if self.machine {
            Format::Machine
        } else {
            self.format
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, ExternalError> {
        let engine = match self.engine {
            EngineKind::Cegar => Engine::Cegar,
            EngineKind::Expansion => Engine::Expansion,
        };
        let backend = match self.backend {
            BackendKind::Oracle => Backend::Oracle {
                budget: self.oracle_budget,
            },
            BackendKind::External => Backend::External {
                solver: external_solver()?,
            },
            _ => Backend::Embedded(engine),
        };
        let check = CheckOptions {
            model: ModelOptions {
                jr_n: self.jr_n,
                jr_justify: match self.justify {
                    JustifyKind::Source => Justify::WriteSource,
                    JustifyKind::Target => Justify::WriteTarget,
                },
                ..ModelOptions::default()
            },
            build: BuildOptions {
                extra_values: self.values.clone().unwrap_or_default(),
                event_cap: self.event_cap,
            },
            backend,
            limits: Limits {
                timeout: Some(self.timeout.unwrap_or(DEFAULT_TIMEOUT)),
                mem_cap: Some(
                    self.mem_cap
                        .map_or(DEFAULT_MEM_CAP, |mb| mb as usize * (1 << 20)),
                ),
            },
            translate: Default::default(),
        };
        Ok(RunConfig {
            model: self.model,
            check,
        })
    }
}

pub fn external_solver() -> Result<PathBuf, ExternalError> {
    external::solver_from_env().ok_or(ExternalError::NotConfigured)
}
