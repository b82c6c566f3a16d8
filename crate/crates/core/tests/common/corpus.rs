//! The tests the frontend is exercised on: the shipped corpus, the
//! store-buffering family and seeded random programs.
#![allow(dead_code)]

use std::collections::BTreeSet;

use somm_core::litmus::{corpus, gen_store_buffer, parse, LitmusTest};

use super::random::{self, Shape};

pub fn frontend_tests() -> Vec<LitmusTest> {
    let mut out: Vec<LitmusTest> = corpus::ALL.iter().map(|(_, t)| parse(t).unwrap()).collect();
    out.extend((2..=5).map(|n| gen_store_buffer(n).unwrap()));
    let shape = Shape {
        threads: 3,
        stmts: 3,
        locations: 2,
    };
    out.extend(
        random::structures(11, 30, shape, 24)
            .into_iter()
            .map(|(t, _)| t),
    );
    out
}

/// Distinct frontend structures with at most `max` events, with the test
/// that produced each and its size.
pub fn small_structures(max: usize) -> Vec<(LitmusTest, usize)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for threads in 1..=2 {
        let shape = Shape {
            threads,
            stmts: 2,
            locations: 1,
        };
        for (t, es) in random::structures(100 * threads as u64, 60, shape, max) {
            if seen.insert(es.to_json()) {
                out.push((t, es.len()));
            }
        }
    }
    out
}
