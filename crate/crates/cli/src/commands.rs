use std::io::{self, Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;
use somm_core::check::{self, with_big_stack, EmitFormat, Emitted, Report, Verdict};
use somm_core::events::EventStructure;
use somm_core::litmus::{build_with, gen_store_buffer, parse, BuildOptions, LitmusTest};
use somm_core::models::{gen, Model, ModelOptions};
use somm_core::qbf::{self, qcir, qdimacs, Engine, Limits};
use somm_core::so::text::{dump_formula, dump_structure};

use crate::config::{BackendKind, EngineKind, Format, RunArgs};
use crate::output::{human_report, CheckRecord, ErrorKind, Failure, CHECK_CSV_HEADER};
use crate::DumpKind;

const ALLOWED: u8 = 0;
const FORBIDDEN: u8 = 1;
const ERROR: u8 = 2;

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::new(ErrorKind::Io, format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn load_test(path: &Path) -> Result<LitmusTest, Failure> {
    let text = read_input(path)?;
    parse(&text).map_err(|e| Failure::new(ErrorKind::Parse, format!("{}: {e}", path.display())))
}

fn backend_label(b: BackendKind) -> &'static str {
    match b {
        BackendKind::Embedded => "embedded",
        BackendKind::Oracle => "oracle",
        BackendKind::EmitQcir => "emit-qcir",
        BackendKind::EmitQdimacs => "emit-qdimacs",
        BackendKind::External => "external",
    }
}

fn emit_format(b: BackendKind) -> EmitFormat {
    match b {
        BackendKind::EmitQdimacs => EmitFormat::Qdimacs,
        _ => EmitFormat::Qcir,
    }
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string(v).expect("records serialize"));
}

fn report_failure(f: &Failure) {
    eprintln!(
        "error [{}]: {}",
        serde_json::to_value(f.kind)
            .unwrap()
            .as_str()
            .unwrap_or("?"),
        f.message
    );
}

fn run_check(input: &Path, run: &RunArgs) -> Result<Report, Failure> {
    if matches!(
        run.backend,
        BackendKind::EmitQcir | BackendKind::EmitQdimacs
    ) {
        return Err(Failure::new(
            ErrorKind::Usage,
            "emit backends produce instances rather than verdicts; use `somm emit`",
        ));
    }
    let cfg = run.resolve().map_err(|e| Failure::from(&e))?;
    let test = load_test(input)?;
    check::check(&test, cfg.model, &cfg.check).map_err(|e| Failure::from(&e))
}

pub fn check(input: &Path, run: &RunArgs) -> u8 {
    let backend = backend_label(run.backend);
    let result = run_check(input, run);
    let record = CheckRecord::new(&input.display().to_string(), run.model.id(), backend);
    let code = match &result {
        Ok(r) if r.verdict == Verdict::Allowed => ALLOWED,
        Ok(_) => FORBIDDEN,
        Err(_) => ERROR,
    };
    match run.format() {
        Format::Machine => {
            let record = match result {
                Ok(r) => record.with_report(&r),
                Err(f) => record.with_error(f),
            };
            print_json(&record);
        }
        Format::Human => match &result {
            Ok(r) => print!("{}", human_report(r, backend)),
            Err(f) => report_failure(f),
        },
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout());
            let _ = w.write_record(CHECK_CSV_HEADER);
            let row: Vec<String> = match &result {
                Ok(r) => vec![
                    r.test.clone(),
                    r.model.clone(),
                    backend.into(),
                    r.verdict.to_string(),
                    r.events.to_string(),
                    r.bool_vars.to_string(),
                    (r.build_time + r.translate_time + r.solve_time)
                        .as_millis()
                        .to_string(),
                ],
                Err(f) => {
                    let kind = serde_json::to_value(f.kind).unwrap();
                    vec![
                        String::new(),
                        run.model.id().into(),
                        backend.into(),
                        format!("error:{}", kind.as_str().unwrap_or("?")),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]
                }
            };
            let _ = w.write_record(&row);
            let _ = w.flush();
            if let Err(f) = &result {
                report_failure(f);
            }
        }
    }
    code
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "+-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "test".into()
    } else {
        s
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_instance(e: &Emitted, out: &Path) -> Result<(), Failure> {
    let io_err =
        |p: &Path, err: io::Error| Failure::new(ErrorKind::Io, format!("{}: {err}", p.display()));
    std::fs::write(out, &e.text).map_err(|err| io_err(out, err))?;
    let side = sidecar_path(out);
    let meta = serde_json::to_string_pretty(&e.meta).expect("metadata serializes");
    std::fs::write(&side, meta + "\n").map_err(|err| io_err(&side, err))
}

#[derive(Serialize)]
struct EmitRecord<'a> {
    schema: u32,
    path: Option<String>,
    sidecar: Option<String>,
    meta: Option<&'a check::EmitMeta>,
    error: Option<Failure>,
}

pub fn emit(input: &Path, run: &RunArgs, out: Option<&Path>) -> u8 {
    let result = (|| -> Result<(Emitted, PathBuf), Failure> {
        let cfg = run.resolve().map_err(|e| Failure::from(&e))?;
        let test = load_test(input)?;
        let format = emit_format(run.backend);
        let e = check::emit(&test, cfg.model, &cfg.check, format).map_err(|e| Failure::from(&e))?;
        let path = out.map(Path::to_path_buf).unwrap_or_else(|| {
            PathBuf::from(format!(
                "{}.{}.{}",
                sanitize(&test.name),
                cfg.model.id(),
                format.extension()
            ))
        });
        write_instance(&e, &path)?;
        Ok((e, path))
    })();
    let machine = run.format() == Format::Machine;
    match result {
        Ok((e, path)) => {
            if machine {
                print_json(&EmitRecord {
                    schema: crate::output::SCHEMA,
                    path: Some(path.display().to_string()),
                    sidecar: Some(sidecar_path(&path).display().to_string()),
                    meta: Some(&e.meta),
                    error: None,
                });
            } else {
                println!(
                    "wrote {} ({} events, {} variables, quantifiers [{}]) and {}",
                    path.display(),
                    e.meta.events,
                    e.meta.variables,
                    e.meta.quantifiers.join(" "),
                    sidecar_path(&path).display()
                );
            }
            0
        }
        Err(f) => {
            if machine {
                print_json(&EmitRecord {
                    schema: crate::output::SCHEMA,
                    path: None,
                    sidecar: None,
                    meta: None,
                    error: Some(f),
                });
            } else {
                report_failure(&f);
            }
            ERROR
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct BenchRow {
    n: usize,
    events: Option<usize>,
    variables: Option<usize>,
    verdict: String,
    millis: Option<u128>,
}

fn bench_one(n: usize, run: &RunArgs, out_dir: &Path) -> BenchRow {
    let mut row = BenchRow {
        n,
        events: None,
        variables: None,
        verdict: String::new(),
        millis: None,
    };
    let result = (|| -> Result<(), Failure> {
        let cfg = run.resolve().map_err(|e| Failure::from(&e))?;
        let test =
            gen_store_buffer(n).map_err(|e| Failure::new(ErrorKind::Usage, e.to_string()))?;
        match run.backend {
            BackendKind::EmitQcir | BackendKind::EmitQdimacs => {
                let format = emit_format(run.backend);
                let e = check::emit(&test, cfg.model, &cfg.check, format)
                    .map_err(|e| Failure::from(&e))?;
                let path = out_dir.join(format!("sb{n}.{}.{}", cfg.model.id(), format.extension()));
                write_instance(&e, &path)?;
                row.events = Some(e.meta.events);
                row.variables = Some(e.meta.variables);
                row.millis = Some(e.meta.millis);
                row.verdict = "emitted".into();
            }
            _ => {
                let r =
                    check::check(&test, cfg.model, &cfg.check).map_err(|e| Failure::from(&e))?;
                row.events = Some(r.events);
                row.variables = Some(r.bool_vars);
                row.millis = Some((r.build_time + r.translate_time + r.solve_time).as_millis());
                row.verdict = r.verdict.to_string();
            }
        }
        Ok(())
    })();
    if let Err(f) = result {
        row.verdict = serde_json::to_value(f.kind)
            .unwrap()
            .as_str()
            .unwrap_or("error")
            .to_string();
    }
    row
}

pub fn bench(from: usize, to: usize, workers: usize, out_dir: Option<&Path>, run: &RunArgs) -> u8 {
    if to < from {
        report_failure(&Failure::new(
            ErrorKind::Usage,
            format!("empty range {from}..={to}"),
        ));
        return ERROR;
    }
    if let Err(f) = run.resolve() {
        report_failure(&Failure::from(&f));
        return ERROR;
    }
    let out_dir = out_dir.unwrap_or(Path::new("."));
    let ns: Vec<usize> = (from..=to).collect();
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; ns.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.min(ns.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&n) = ns.get(i) else { break };
                let row = bench_one(n, run, out_dir);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<BenchRow> = rows.into_inner().unwrap().into_iter().flatten().collect();
    if run.format() == Format::Machine {
        for r in &rows {
            print_json(r);
        }
    } else {
        let mut w = csv::Writer::from_writer(io::stdout());
        let _ = w.write_record(["n", "events", "variables", "verdict", "millis"]);
        for r in &rows {
            let opt = |v: Option<String>| v.unwrap_or_default();
            let _ = w.write_record([
                r.n.to_string(),
                opt(r.events.map(|v| v.to_string())),
                opt(r.variables.map(|v| v.to_string())),
                r.verdict.clone(),
                opt(r.millis.map(|v| v.to_string())),
            ]);
        }
        let _ = w.flush();
    }
    0
}

#[derive(Serialize)]
struct ViolationRecord {
    axiom: String,
    number: Option<usize>,
    witness: Vec<String>,
}

#[derive(Serialize)]
struct ValidateRecord {
    schema: u32,
    input: String,
    events: Option<usize>,
    ok: bool,
    violations: Vec<ViolationRecord>,
    error: Option<Failure>,
}

fn load_structure(input: &Path, dump: bool) -> Result<EventStructure, Failure> {
    if dump {
        let text = read_input(input)?;
        EventStructure::from_json(&text).map_err(|e| Failure::new(ErrorKind::Parse, e.to_string()))
    } else {
        let test = load_test(input)?;
        build_with(&test, &BuildOptions::default())
            .map(|b| b.es)
            .map_err(|e| Failure::from(&check::CheckError::from(e)))
    }
}

pub fn validate(input: &Path, dump: bool, machine: bool) -> u8 {
    let mut rec = ValidateRecord {
        schema: crate::output::SCHEMA,
        input: input.display().to_string(),
        events: None,
        ok: false,
        violations: Vec::new(),
        error: None,
    };
    let code = match load_structure(input, dump) {
        Ok(es) => {
            let name = |i: usize| {
                es.events
                    .get(i)
                    .map_or_else(|| i.to_string(), |e| e.name.clone())
            };
            rec.events = Some(es.len());
            rec.violations = es
                .validate_axioms()
                .iter()
                .map(|v| ViolationRecord {
                    axiom: v.axiom.to_string(),
                    number: v.axiom.number(),
                    witness: v.witness.iter().map(|&i| name(i)).collect(),
                })
                .collect();
            rec.ok = rec.violations.is_empty();
            if rec.ok {
                0
            } else {
                1
            }
        }
        Err(f) => {
            rec.error = Some(f);
            ERROR
        }
    };
    if machine {
        print_json(&rec);
    } else if let Some(f) = &rec.error {
        report_failure(f);
    } else if rec.ok {
        println!("OK ({} events)", rec.events.unwrap_or(0));
    } else {
        for v in &rec.violations {
            println!("{} violated by {}", v.axiom, v.witness.join(", "));
        }
    }
    code
}

pub fn dump(input: &Path, what: DumpKind, model: Option<Model>, jr_n: Option<usize>) -> u8 {
    let result = (|| -> Result<String, Failure> {
        let es = load_structure(input, false)?;
        let rs = || {
            es.to_rel_structure()
                .map_err(|e| Failure::from(&check::CheckError::from(e)))
        };
        Ok(match what {
            DumpKind::Json => es.to_json(),
            DumpKind::Dot => es.to_dot(),
            DumpKind::Structure => dump_structure(&rs()?),
            DumpKind::Sentence => {
                let model = model
                    .ok_or_else(|| Failure::new(ErrorKind::Usage, "--as sentence needs --model"))?;
                let opts = ModelOptions {
                    jr_n,
                    ..ModelOptions::default()
                };
                let s = gen(model, &rs()?, &opts)
                    .map_err(|e| Failure::new(ErrorKind::Formula, e.to_string()))?;
                dump_formula(&s.sentence)
            }
        })
    })();
    match result {
        Ok(text) => {
            let mut out = io::stdout();
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            0
        }
        Err(f) => {
            report_failure(&f);
            ERROR
        }
    }
}

pub fn solve(input: &Path, engine: EngineKind, timeout: Option<f64>) -> u8 {
    let engine = match engine {
        EngineKind::Cegar => Engine::Cegar,
        EngineKind::Expansion => Engine::Expansion,
    };
    let limits = Limits {
        timeout: timeout.filter(|t| *t > 0.0).map(Duration::from_secs_f64),
        ..Limits::default()
    };
    let result = read_input(input).and_then(|text| {
        with_big_stack(move || {
            let (mut c, root) = if text.trim_start().starts_with("#QCIR") {
                qcir::read_qcir(&text).map_err(|e| Failure::new(ErrorKind::Parse, e.to_string()))?
            } else {
                qdimacs::read_qdimacs(&text)
                    .map_err(|e| Failure::new(ErrorKind::Parse, e.to_string()))?
            };
            qbf::solve(engine, &mut c, root, limits)
                .map(|s| s.value)
                .map_err(|e| Failure::from(&check::CheckError::from(e)))
        })
    });
    match result {
        Ok(v) => {
            println!("{v}");
            if v {
                10
            } else {
                20
            }
        }
        Err(f) => {
            report_failure(&f);
            ERROR
        }
    }
}
