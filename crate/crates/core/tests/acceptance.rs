//! Release acceptance suite. Runs each criterion in turn and prints one
//! PASS or FAIL line per criterion, then exits non-zero if any failed.
//!
//! Set `SOMM_QBF_SOLVER` to a QDIMACS solver (exit 10 true, 20 false) to
//! include the external cross-check of the store-buffering family.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use common::corpus::{frontend_tests, small_structures};
use common::formulas::{self, embedded, SMALL};
use common::reference;
use somm_core::check::{
    check, emit, prepare, Backend, CheckError, CheckOptions, EmitFormat, Verdict,
};
use somm_core::events::{Axiom, Event, EventStructure};
use somm_core::litmus::{build, corpus, gen_store_buffer, parse, LitmusTest};
use somm_core::models::Model;
use somm_core::oracle::{self, OracleError};
use somm_core::qbf::{self, external, translate, Engine, Limits, Node, Quant};
use somm_core::so::text::{parse_formula, parse_structure};
use somm_core::so::{Formula, Pred, RelStructure, Term};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(
    test: &LitmusTest,
    model: Model,
    opts: &CheckOptions,
) -> Result<(Verdict, Duration), String> {
    let start = Instant::now();
    let r = check(test, model, opts).map_err(|e| format!("{} {model}: {e}", test.name))?;
    Ok((r.verdict, start.elapsed()))
}

fn expect_within(
    test: &LitmusTest,
    model: Model,
    want: Verdict,
    limit: Duration,
) -> Result<Duration, String> {
    let opts = CheckOptions {
        limits: Limits {
            timeout: Some(limit),
            ..Limits::default()
        },
        ..CheckOptions::default()
    };
    let (got, took) = run(test, model, &opts)?;
    ensure(got == want, || {
        format!("{} {model}: {got}, expected {want}", test.name)
    })?;
    ensure(took < limit, || {
        format!("{} {model}: took {took:?}", test.name)
    })?;
    Ok(took)
}

fn classic_tests() -> Outcome {
    let limit = Duration::from_secs(60);
    let lb = parse(corpus::LB_CTRL).unwrap();
    let mut slowest = Duration::ZERO;
    for model in Model::ALL {
        slowest = slowest.max(expect_within(&lb, model, Verdict::Forbidden, limit)?);
    }
    let fd = parse(corpus::LB_FALSE_DEP).unwrap();
    slowest = slowest.max(expect_within(&fd, Model::Jr, Verdict::Allowed, limit)?);
    Ok(format!("5 instances, slowest {slowest:.2?}"))
}

fn jctc() -> Outcome {
    let limit = Duration::from_secs(30 * 60);
    let cases = [
        (corpus::JCTC1, Verdict::Allowed),
        (corpus::JCTC2, Verdict::Allowed),
        (corpus::JCTC3, Verdict::Forbidden),
        (corpus::JCTC4, Verdict::Forbidden),
    ];
    let mut times = Vec::new();
    for (text, want) in cases {
        let t = parse(text).unwrap();
        let took = expect_within(&t, Model::Jr, want, limit)?;
        times.push(format!("{} {want} {took:.2?}", t.name));
    }
    Ok(times.join(", "))
}

fn store_buffer() -> Outcome {
    let mut notes = Vec::new();
    for n in 2..=5 {
        let t = gen_store_buffer(n).unwrap();
        let opts = CheckOptions::default();
        let (sc, _) = run(&t, Model::Sc, &opts)?;
        let (ra, _) = run(&t, Model::Ra, &opts)?;
        ensure(sc == Verdict::Forbidden && ra == Verdict::Allowed, || {
            format!("SB({n}): sc {sc}, ra {ra}")
        })?;
        if n <= 3 {
            let es = build(&t).unwrap().es;
            ensure(!reference::sc(&es) && reference::ra(&es), || {
                format!("SB({n}) disagrees with direct semantics")
            })?;
            notes.push(format!("SB({n}) matches direct semantics"));
            let oracle_opts = CheckOptions {
                backend: Backend::Oracle {
                    budget: oracle::DEFAULT_BUDGET,
                },
                ..CheckOptions::default()
            };
            for (model, want) in [(Model::Sc, sc), (Model::Ra, ra)] {
                match check(&t, model, &oracle_opts) {
                    Ok(r) => ensure(r.verdict == want, || {
                        format!("SB({n}) {model}: oracle {}", r.verdict)
                    })?,
                    Err(CheckError::Oracle(OracleError::Infeasible(_))) => {
                        notes.push(format!("oracle over budget on SB({n}) {model}"));
                    }
                    Err(e) => return Err(format!("SB({n}) {model} oracle: {e}")),
                }
            }
        }
    }
    match external::solver_from_env() {
        Some(solver) => {
            let opts = CheckOptions {
                backend: Backend::External { solver },
                ..CheckOptions::default()
            };
            for n in 2..=5 {
                let t = gen_store_buffer(n).unwrap();
                for (model, want) in [
                    (Model::Sc, Verdict::Forbidden),
                    (Model::Ra, Verdict::Allowed),
                ] {
                    let (got, _) = run(&t, model, &opts)?;
                    ensure(got == want, || {
                        format!("SB({n}) {model}: external solver says {got}")
                    })?;
                }
            }
            notes.push("external solver agrees for n <= 5".into());
        }
        None => notes.push("external check skipped, SOMM_QBF_SOLVER unset".into()),
    }
    let start = Instant::now();
    let e = emit(
        &gen_store_buffer(25).unwrap(),
        Model::Sc,
        &CheckOptions::default(),
        EmitFormat::Qcir,
    )
    .map_err(|e| format!("SB(25): {e}"))?;
    let took = start.elapsed();
    ensure(e.meta.events == 100, || {
        format!("SB(25) has {} events", e.meta.events)
    })?;
    ensure(took < Duration::from_secs(60), || {
        format!("SB(25) emission took {took:?}")
    })?;
    notes.push(format!(
        "SB(25) {} events, {} variables, QCIR in {took:.2?}",
        e.meta.events, e.meta.variables
    ));
    Ok(notes.join("; "))
}

fn differential() -> Outcome {
    let mut compared = 0;
    let mut skipped = 0;
    let mut seed = 0;
    while compared < 600 {
        let (rs, f) = formulas::pair(seed, SMALL);
        seed += 1;
        let expect = match oracle::check(&rs, &f) {
            Ok(v) => v,
            Err(OracleError::Infeasible(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(format!("seed {}: {e}", seed - 1)),
        };
        let got = embedded(&rs, &f, Engine::Cegar);
        ensure(got == expect, || {
            format!("seed {}: embedded {got}, oracle {expect}", seed - 1)
        })?;
        compared += 1;
    }
    Ok(format!(
        "{compared} pairs agree, {skipped} over oracle budget"
    ))
}

fn formula_three() -> Outcome {
    let rs =
        parse_structure("(structure 3 (rel ord 2 (0 1) (0 2)) (rel conflict 2 (1 2)))").unwrap();
    let f = parse_formula(
        "(exists-so X 1 (and (forall x (forall y (-> (and (ord x y) (X y)) (X x)))) \
         (forall x (forall y (-> (and (X x) (X y)) (not (conflict x y)))))))",
    )
    .unwrap();
    let mut t = translate(&rs, &f).map_err(|e| e.to_string())?;
    let c = &t.circuit;
    ensure(c.num_vars() == 3, || format!("{} variables", c.num_vars()))?;
    ensure(!c.has_universal(t.root), || {
        "universal quantifier present".into()
    })?;
    let Node::Quant(Quant::Exists, vars, body) = c.node(t.root).clone() else {
        return Err("root is not an existential block".into());
    };
    ensure(vars.len() == 3, || {
        format!("block binds {} variables", vars.len())
    })?;
    for bits in 0u32..8 {
        let a: Vec<bool> = (0..3).map(|i| bits >> i & 1 == 1).collect();
        let (x1, x2, x3) = (a[0], a[1], a[2]);
        let want = (!x2 || x1) && (!x3 || x1) && !(x2 && x3);
        ensure(c.eval(body, &a) == want, || {
            format!("body differs at {a:?}")
        })?;
    }
    let v = qbf::solve(Engine::Cegar, &mut t.circuit, t.root, Limits::none())
        .map_err(|e| e.to_string())?
        .value;
    ensure(v, || "verdict false".into())?;
    Ok("3 variables, no universal, body matches on all 8 assignments, true".into())
}

fn structural_laws() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 64,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(1usize..=5, 1usize..=3), |(size, arity)| {
            let rs = RelStructure::new(size).unwrap();
            let args: Vec<Term> = (0..arity).map(|i| Term::var(format!("x{i}"))).collect();
            let mut body = Formula::atom(Pred::var("X"), args);
            for i in (0..arity).rev() {
                body = Formula::forall(format!("x{i}"), body);
            }
            let t = translate(&rs, &Formula::exists_so("X", arity, body)).unwrap();
            prop_assert_eq!(t.circuit.num_vars(), size.pow(arity as u32));
            Ok(())
        })
        .map_err(|e| format!("variable count: {e}"))?;
    let tests = frontend_tests();
    for test in &tests {
        for model in [Model::Sc, Model::Ra, Model::Cpp] {
            let p = prepare(test, model, &CheckOptions::default()).map_err(|e| e.to_string())?;
            let t = translate(&p.rs, &p.sentence.sentence).map_err(|e| e.to_string())?;
            ensure(!t.circuit.has_universal(t.root), || {
                format!("{} {model} has a universal", test.name)
            })?;
        }
    }
    Ok(format!(
        "64 variable-count cases, {} tests without universals",
        tests.len()
    ))
}

fn jr_bound_check() -> Outcome {
    let verdict = |t: &LitmusTest, n: usize| -> Result<Verdict, String> {
        let mut opts = CheckOptions::default();
        opts.model.jr_n = Some(n);
        Ok(run(t, Model::Jr, &opts)?.0)
    };
    let cases = small_structures(3);
    ensure(!cases.is_empty(), || "no structures".into())?;
    for (t, size) in &cases {
        let base = verdict(t, *size)?;
        for n in [size + 1, 1 << size] {
            let v = verdict(t, n)?;
            ensure(v == base, || {
                format!("{}: n={size} gives {base}, n={n} gives {v}", t.name)
            })?;
        }
    }
    Ok(format!(
        "{} structures stable at n = |A|, |A|+1, 2^|A|",
        cases.len()
    ))
}

fn bare(events: Vec<Event>) -> EventStructure {
    let mut es = EventStructure {
        events,
        ..Default::default()
    };
    es.close_po();
    es
}

fn reads(n: usize) -> Vec<Event> {
    (0..n)
        .map(|i| Event::read(format!("r{i}"), Some(0), "x", i as i64))
        .collect()
}

fn both_ways(es: &mut EventStructure, a: usize, b: usize) {
    es.conflict.insert((a, b));
    es.conflict.insert((b, a));
}

fn violators() -> Vec<(Axiom, EventStructure)> {
    let mut rw = Event::read("rw", Some(0), "x", 0);
    rw.write = true;
    let mut justifies = bare(reads(2));
    justifies.justifies.insert((0, 1));
    let mut asym = bare(reads(2));
    asym.conflict.insert((0, 1));
    let mut refl = bare(reads(1));
    refl.conflict.insert((0, 0));
    let mut forward = bare(reads(3));
    forward.po.insert((1, 2));
    both_ways(&mut forward, 0, 1);
    let mut preds = bare(reads(3));
    preds.po.insert((2, 1));
    both_ways(&mut preds, 0, 1);
    let mut trans = bare(reads(3));
    both_ways(&mut trans, 0, 1);
    both_ways(&mut trans, 1, 2);
    vec![
        (Axiom::ReadWriteDisjoint, bare(vec![rw])),
        (Axiom::JustifiesWriteToRead, justifies),
        (Axiom::ConflictSymmetric, asym),
        (Axiom::ConflictIrreflexive, refl),
        (Axiom::ConflictPropagates, forward),
        (Axiom::ConflictSharesPredecessors, preds),
        (Axiom::ConflictTransitive, trans),
    ]
}

fn axiom_suite() -> Outcome {
    let tests = frontend_tests();
    for t in &tests {
        let es = build(t).map_err(|e| e.to_string())?.es;
        let v = es.validate_axioms();
        ensure(v.is_empty(), || format!("{}: {}", t.name, v[0]))?;
    }
    let cases = violators();
    for (axiom, es) in &cases {
        let found: BTreeSet<Axiom> = es.validate_axioms().iter().map(|v| v.axiom).collect();
        ensure(found == BTreeSet::from([*axiom]), || {
            format!("violator for {axiom} trips {found:?}")
        })?;
    }
    Ok(format!(
        "{} frontend structures valid, {} violators each trip only their axiom",
        tests.len(),
        cases.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("classic tests", classic_tests),
        ("JCTC 1-4 under jr", jctc),
        ("store-buffer family", store_buffer),
        ("differential soundness", differential),
        ("three-event example", formula_three),
        ("structural laws", structural_laws),
        ("jr bound check", jr_bound_check),
        ("axiom suite", axiom_suite),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({why}) [{took:.1?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
