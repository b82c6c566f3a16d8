//! Unfolding a litmus test into an event structure.
//!
//! Every load forks one read per value in the location's domain. Events of a
//! thread form a tree under `≤`; two distinct events of the same thread that
//! are `≤`-incomparable lie on different branches and are in conflict.
//! Initialisation writes sit below every thread event.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Expr, LitmusTest, Stmt};
use super::LitmusError;
use crate::events::{Event, EventStructure};

pub const DEFAULT_EVENT_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Extra values added to every location's domain.
    pub extra_values: Vec<i64>,
    pub event_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            extra_values: Vec::new(),
            event_cap: DEFAULT_EVENT_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Built {
    pub es: EventStructure,
    /// Some thread constrained by the final condition has no path that
    /// satisfies it.
    pub outcome_unreachable: bool,
    /// Threads with a satisfying path that has no events; such a thread
    /// places no constraint on the outcome and has no final events.
    pub vacuous_threads: Vec<usize>,
    pub domains: BTreeMap<String, BTreeSet<i64>>,
}

pub fn build(test: &LitmusTest) -> Result<Built, LitmusError> {
    build_with(test, &BuildOptions::default())
}

pub fn build_with(test: &LitmusTest, opts: &BuildOptions) -> Result<Built, LitmusError> {
    let mut domains: BTreeMap<String, BTreeSet<i64>> = test
        .init
        .iter()
        .map(|(loc, &v)| {
            let mut d: BTreeSet<i64> = opts.extra_values.iter().copied().collect();
            d.insert(v);
            (loc.clone(), d)
        })
        .collect();
    for t in &test.threads {
        stored_constants(t, &mut domains);
    }
    // Grow domains until every written value can also be read.
    loop {
        let built = unfold(test, &domains, opts.event_cap)?;
        let mut grew = false;
        for e in built.es.events.iter().filter(|e| e.write) {
            let (Some(loc), Some(v)) = (&e.location, e.value) else {
                continue;
            };
            grew |= domains.get_mut(loc).expect("declared location").insert(v);
        }
        if !grew {
            return Ok(Built { domains, ..built });
        }
    }
}

fn stored_constants(stmts: &[Stmt], domains: &mut BTreeMap<String, BTreeSet<i64>>) {
    for s in stmts {
        match s {
            Stmt::Store {
                loc,
                value: Expr::Const(v),
                ..
            } => {
                domains.get_mut(loc).expect("declared location").insert(*v);
            }
            Stmt::If { then, els, .. } => {
                stored_constants(then, domains);
                stored_constants(els, domains);
            }
            _ => {}
        }
    }
}

struct Unfolder<'a> {
    test: &'a LitmusTest,
    domains: &'a BTreeMap<String, BTreeSet<i64>>,
    cap: usize,
    es: EventStructure,
    thread: usize,
    counter: usize,
    satisfied: bool,
    vacuous: bool,
}

impl Unfolder<'_> {
    fn push(&mut self, mut ev: Event, parent: Option<usize>) -> Result<usize, LitmusError> {
        if self.es.events.len() >= self.cap {
            return Err(LitmusError::TooManyEvents { limit: self.cap });
        }
        let id = self.es.events.len();
        ev.name = format!("t{}_{}", self.thread, self.counter);
        self.counter += 1;
        self.es.events.push(ev);
        if let Some(p) = parent {
            self.es.po.insert((p, id));
        }
        Ok(id)
    }

    /// Runs the continuation `stack` (top of stack is the next statement).
    fn run(
        &mut self,
        mut stack: Vec<&Stmt>,
        regs: BTreeMap<String, i64>,
        mut last: Option<usize>,
    ) -> Result<(), LitmusError> {
        while let Some(stmt) = stack.pop() {
            match stmt {
                Stmt::Store { loc, value, .. } => {
                    let v = match value {
                        Expr::Const(c) => *c,
                        Expr::Reg(r) => regs.get(r).copied().unwrap_or(0),
                    };
                    last = Some(self.push(Event::write("", Some(self.thread), loc, v), last)?);
                }
                Stmt::Load { reg, loc, .. } => {
                    for &v in &self.domains[loc] {
                        let id = self.push(Event::read("", Some(self.thread), loc, v), last)?;
                        let mut regs = regs.clone();
                        regs.insert(reg.clone(), v);
                        self.run(stack.clone(), regs, Some(id))?;
                    }
                    return Ok(());
                }
                Stmt::If {
                    cond, then, els, ..
                } => {
                    let r = regs.get(&cond.reg).copied().unwrap_or(0);
                    let rhs = match &cond.rhs {
                        Expr::Const(c) => *c,
                        Expr::Reg(q) => regs.get(q).copied().unwrap_or(0),
                    };
                    let branch = if cond.op.eval(r, rhs) { then } else { els };
                    stack.extend(branch.iter().rev());
                }
            }
        }
        let ok = self
            .test
            .clauses_for(self.thread)
            .all(|c| regs.get(&c.reg).copied().unwrap_or(0) == c.value);
        if ok {
            self.satisfied = true;
            match last {
                Some(leaf) => self.es.events[leaf].is_final = true,
                None => self.vacuous = true,
            }
        }
        Ok(())
    }
}

fn unfold(
    test: &LitmusTest,
    domains: &BTreeMap<String, BTreeSet<i64>>,
    cap: usize,
) -> Result<Built, LitmusError> {
    let mut u = Unfolder {
        test,
        domains,
        cap,
        es: EventStructure::default(),
        thread: 0,
        counter: 0,
        satisfied: false,
        vacuous: false,
    };
    let mut vacuous_threads = Vec::new();
    for (loc, &v) in &test.init {
        if u.es.events.len() >= cap {
            return Err(LitmusError::TooManyEvents { limit: cap });
        }
        u.es.events
            .push(Event::write(format!("init_{loc}"), None, loc, v));
    }
    let inits = test.init.len();
    let mut outcome_unreachable = false;
    for (t, stmts) in test.threads.iter().enumerate() {
        u.thread = t;
        u.counter = 0;
        u.satisfied = false;
        u.vacuous = false;
        let start = u.es.events.len();
        u.run(stmts.iter().rev().collect(), BTreeMap::new(), None)?;
        outcome_unreachable |= !u.satisfied;
        if u.vacuous {
            vacuous_threads.push(t);
            for e in &mut u.es.events[start..] {
                e.is_final = false;
            }
        }
        for e in start..u.es.events.len() {
            for i in 0..inits {
                u.es.po.insert((i, e));
            }
        }
    }
    let mut es = u.es;
    es.close_po();
    let n = es.len();
    for a in 0..n {
        for b in 0..n {
            let same_thread =
                es.events[a].thread.is_some() && es.events[a].thread == es.events[b].thread;
            if a != b && same_thread && !es.le(a, b) && !es.le(b, a) {
                es.conflict.insert((a, b));
            }
        }
    }
    for w in (0..n).filter(|&w| es.events[w].write) {
        for r in (0..n).filter(|&r| es.events[r].read) {
            let (ew, er) = (&es.events[w], &es.events[r]);
            if ew.location == er.location && ew.value == er.value {
                es.justifies.insert((w, r));
            }
        }
    }
    es.derive_sloc();
    Ok(Built {
        es,
        outcome_unreachable,
        vacuous_threads,
        domains: domains.clone(),
    })
}
