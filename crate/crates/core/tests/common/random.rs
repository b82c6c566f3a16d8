//! Seeded random litmus programs for differential testing.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use somm_core::events::EventStructure;
use somm_core::litmus::{build, Clause, CmpOp, Cond, Expr, LitmusTest, Span, Stmt};

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub threads: usize,
    pub stmts: usize,
    pub locations: usize,
}

fn stmt(
    rng: &mut ChaCha8Rng,
    locs: &[String],
    regs: &mut Vec<String>,
    depth: usize,
    tid: usize,
) -> Stmt {
    let span = Span::default();
    let loc = locs.choose(rng).unwrap().clone();
    match rng.gen_range(0..if depth > 0 && !regs.is_empty() { 4 } else { 3 }) {
        0 => {
            let reg = format!("r{tid}_{}", regs.len());
            regs.push(reg.clone());
            Stmt::Load { reg, loc, span }
        }
        1 if !regs.is_empty() && rng.gen_bool(0.4) => Stmt::Store {
            loc,
            value: Expr::Reg(regs.choose(rng).unwrap().clone()),
            span,
        },
        1 | 2 => Stmt::Store {
            loc,
            value: Expr::Const(rng.gen_range(1..=2)),
            span,
        },
        _ => {
            let reg = regs.choose(rng).unwrap().clone();
            let mut inner = regs.clone();
            let then = vec![stmt(rng, locs, &mut inner, depth - 1, tid)];
            let els = if rng.gen_bool(0.5) {
                vec![stmt(rng, locs, &mut inner.clone(), depth - 1, tid)]
            } else {
                vec![]
            };
            Stmt::If {
                cond: Cond {
                    reg,
                    op: if rng.gen_bool(0.7) {
                        CmpOp::Eq
                    } else {
                        CmpOp::Ne
                    },
                    rhs: Expr::Const(rng.gen_range(0..=1)),
                },
                then,
                els,
                span,
            }
        }
    }
}

pub fn program(seed: u64, shape: Shape) -> LitmusTest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs: Vec<String> = ["x", "y", "z"][..shape.locations]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut threads = Vec::new();
    let mut outcome = Vec::new();
    for t in 0..shape.threads {
        let mut regs = Vec::new();
        let len = rng.gen_range(1..=shape.stmts);
        let body: Vec<Stmt> = (0..len)
            .map(|_| stmt(&mut rng, &locs, &mut regs, 1, t))
            .collect();
        // Only registers loaded at top level are guaranteed defined.
        let top: Vec<String> = body
            .iter()
            .filter_map(|s| match s {
                Stmt::Load { reg, .. } => Some(reg.clone()),
                _ => None,
            })
            .collect();
        for reg in top {
            if rng.gen_bool(0.5) {
                outcome.push(Clause {
                    thread: t,
                    reg,
                    value: rng.gen_range(0..=1),
                });
            }
        }
        threads.push(body);
    }
    LitmusTest {
        name: format!("random{seed}"),
        init: locs.iter().map(|l| (l.clone(), 0)).collect(),
        threads,
        outcome,
    }
}

/// Event structures from random programs with at most `max_events` events.
pub fn structures(
    seed: u64,
    count: usize,
    shape: Shape,
    max_events: usize,
) -> Vec<(LitmusTest, EventStructure)> {
    let mut out = Vec::new();
    let mut s = seed;
    while out.len() < count {
        s += 1;
        let t = program(s, shape);
        let Ok(b) = build(&t) else { continue };
        if b.es.len() <= max_events && !b.outcome_unreachable {
            out.push((t, b.es));
        }
    }
    out
}
