//! The embedded pipeline against independent semantics: the enumeration
//! oracle for raw sentences, and direct set-based definitions for the
//! memory models.

mod common;

use common::formulas::{self, embedded, SMALL};
use common::random::{self, Shape};
use common::reference;
use somm_core::check::{check, CheckOptions, Verdict};
use somm_core::litmus::{build, corpus, parse, LitmusTest};
use somm_core::models::Model;
use somm_core::oracle;
use somm_core::qbf::{self, translate_with, Engine, Limits, TranslateOptions};

#[test]
fn random_sentences_match_the_oracle() {
    let (mut truths, mut universal) = (0, 0);
    for seed in 0..600 {
        let (rs, f) = formulas::pair(seed, SMALL);
        let expect = oracle::check(&rs, &f).unwrap();
        for engine in [Engine::Cegar, Engine::Expansion] {
            assert_eq!(embedded(&rs, &f, engine), expect, "seed {seed} {engine:?}");
        }
        truths += expect as usize;
        universal += f.has_universal_so() as usize;
    }
    // The sample must exercise both answers and both kinds of set quantifier.
    assert!((100..500).contains(&truths), "{truths} true of 600");
    assert!(
        universal >= 100,
        "{universal} with a universal set quantifier"
    );
}

#[test]
fn memo_does_not_change_verdicts() {
    for seed in 1000..1300 {
        let (rs, f) = formulas::pair(seed, SMALL);
        let verdict = |memo| {
            let mut t = translate_with(&rs, &f, TranslateOptions { memo }).unwrap();
            qbf::solve(Engine::Cegar, &mut t.circuit, t.root, Limits::none())
                .unwrap()
                .value
        };
        assert_eq!(verdict(true), verdict(false), "seed {seed}");
    }
}

fn verdict(test: &LitmusTest, model: Model) -> bool {
    let r = check(test, model, &CheckOptions::default()).unwrap();
    r.verdict == Verdict::Allowed
}

fn reference_verdict(es: &somm_core::events::EventStructure, model: Model) -> bool {
    match model {
        Model::Sc => reference::sc(es),
        Model::Ra => reference::ra(es),
        Model::Cpp => reference::cpp(es),
        Model::Jr => reference::jr(es, es.len()),
    }
}

#[test]
fn small_corpus_tests_match_direct_semantics() {
    for (name, text) in corpus::ALL.iter().take(5) {
        let test = parse(text).unwrap();
        let es = build(&test).unwrap().es;
        for model in Model::ALL {
            assert_eq!(
                verdict(&test, model),
                reference_verdict(&es, model),
                "{name} {model}"
            );
        }
    }
}

#[test]
fn random_programs_match_direct_semantics() {
    let shape = Shape {
        threads: 2,
        stmts: 2,
        locations: 2,
    };
    for (test, es) in random::structures(7, 40, shape, 10) {
        for model in Model::ALL {
            assert_eq!(
                verdict(&test, model),
                reference_verdict(&es, model),
                "{} {model}",
                test.name
            );
        }
    }
}
