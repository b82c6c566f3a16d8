//! Direct set-theoretic semantics of the four memory models, written
//! without any second-order machinery. Used as the independent oracle for
//! generated sentences and solver verdicts.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use somm_core::events::EventStructure;

pub type Set = u64;

fn members(s: Set, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |i| s & (1 << i) != 0)
}

pub fn is_valid(es: &EventStructure, s: Set) -> bool {
    let n = es.len();
    for a in members(s, n) {
        for b in 0..n {
            if es.le(b, a) && s & (1 << b) == 0 {
                return false;
            }
            if s & (1 << b) != 0 && es.in_conflict(a, b) {
                return false;
            }
        }
    }
    true
}

pub fn is_final(es: &EventStructure, s: Set) -> bool {
    let n = es.len();
    is_valid(es, s)
        && (0..n).all(|a| {
            !es.events[a].is_final
                || s & (1 << a) != 0
                || members(s, n).any(|b| es.events[b].is_final && es.in_conflict(a, b))
        })
}

pub fn configurations(es: &EventStructure) -> Vec<Set> {
    assert!(es.len() < 64);
    // Grow downward-closed conflict-free sets one event at a time.
    let mut seen = BTreeSet::new();
    let mut todo = vec![0u64];
    while let Some(s) = todo.pop() {
        if !seen.insert(s) {
            continue;
        }
        for e in 0..es.len() {
            let t = s | (1 << e);
            if t != s && is_valid(es, t) && !seen.contains(&t) {
                todo.push(t);
            }
        }
    }
    seen.into_iter().collect()
}

/// Relation over event indices as a boolean matrix.
#[derive(Clone)]
struct Rel {
    n: usize,
    m: Vec<bool>,
}

impl Rel {
    fn new(n: usize) -> Self {
        Rel {
            n,
            m: vec![false; n * n],
        }
    }
    fn get(&self, a: usize, b: usize) -> bool {
        self.m[a * self.n + b]
    }
    fn set(&mut self, a: usize, b: usize) {
        self.m[a * self.n + b] = true;
    }
    fn closure(&mut self) {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                if self.get(i, k) {
                    for j in 0..n {
                        if self.get(k, j) {
                            self.set(i, j);
                        }
                    }
                }
            }
        }
    }
    fn acyclic(&self) -> bool {
        let mut c = self.clone();
        c.closure();
        (0..self.n).all(|i| !c.get(i, i))
    }
}

/// A candidate execution: a configuration with reads-from and a coherence
/// order (total per location on the configuration's writes).
pub struct Candidate {
    pub x: Set,
    pub rf: Vec<(usize, usize)>,
    pub co: Vec<(usize, usize)>,
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Calls `visit` on every candidate over `x`; stops early when it returns true.
pub fn any_candidate(
    es: &EventStructure,
    x: Set,
    mut visit: impl FnMut(&Candidate) -> bool,
) -> bool {
    let n = es.len();
    let reads: Vec<usize> = members(x, n).filter(|&r| es.events[r].read).collect();
    let mut choices: Vec<Vec<usize>> = Vec::new();
    for &r in &reads {
        let ws: Vec<usize> = members(x, n)
            .filter(|&w| es.events[w].write && es.justifies.contains(&(w, r)))
            .collect();
        if ws.is_empty() {
            return false;
        }
        choices.push(ws);
    }
    let mut by_loc: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for w in members(x, n).filter(|&w| es.events[w].write) {
        by_loc
            .entry(es.events[w].location.clone().unwrap_or_default())
            .or_default()
            .push(w);
    }
    let orders: Vec<Vec<Vec<usize>>> = by_loc.values().map(|ws| permutations(ws)).collect();

    let mut rf_idx = vec![0usize; reads.len()];
    loop {
        let rf: Vec<(usize, usize)> = reads
            .iter()
            .zip(&rf_idx)
            .map(|(&r, &i)| (choices_at(&choices, r, &reads, i), r))
            .collect();
        let mut co_idx = vec![0usize; orders.len()];
        loop {
            let mut co = Vec::new();
            for (l, &i) in co_idx.iter().enumerate() {
                let order = &orders[l][i];
                for a in 0..order.len() {
                    for b in a + 1..order.len() {
                        co.push((order[a], order[b]));
                    }
                }
            }
            if visit(&Candidate {
                x,
                rf: rf.clone(),
                co,
            }) {
                return true;
            }
            if !bump(&mut co_idx, |l| orders[l].len()) {
                break;
            }
        }
        if !bump(&mut rf_idx, |k| choices[k].len()) {
            return false;
        }
    }
}

fn choices_at(choices: &[Vec<usize>], r: usize, reads: &[usize], i: usize) -> usize {
    let k = reads.iter().position(|&q| q == r).unwrap();
    choices[k][i]
}

fn bump(idx: &mut [usize], len: impl Fn(usize) -> usize) -> bool {
    for (k, i) in idx.iter_mut().enumerate() {
        *i += 1;
        if *i < len(k) {
            return true;
        }
        *i = 0;
    }
    false
}

fn strict_po(es: &EventStructure) -> Rel {
    let mut r = Rel::new(es.len());
    for &(a, b) in &es.po {
        if a != b {
            r.set(a, b);
        }
    }
    r
}

pub fn sc_consistent(es: &EventStructure, c: &Candidate) -> bool {
    let mut r = strict_po(es);
    for &(a, b) in c.co.iter().chain(&c.rf) {
        r.set(a, b);
    }
    for &(w, rd) in &c.rf {
        for &(w1, w2) in &c.co {
            if w1 == w {
                r.set(rd, w2);
            }
        }
    }
    r.acyclic()
}

/// Least happens-before: `(< ∪ rf)+`.
fn hb(es: &EventStructure, c: &Candidate) -> Rel {
    let mut r = strict_po(es);
    for &(a, b) in &c.rf {
        r.set(a, b);
    }
    r.closure();
    r
}

pub fn ra_consistent(es: &EventStructure, c: &Candidate) -> bool {
    let h = hb(es, c);
    let n = es.len();
    if (0..n).any(|i| h.get(i, i)) {
        return false;
    }
    if c.co.iter().any(|&(a, b)| h.get(b, a)) {
        return false;
    }
    // rf⁻¹; co; hb must be irreflexive: read r from w, w co z, z hb r.
    !c.rf
        .iter()
        .any(|&(w, r)| c.co.iter().any(|&(w1, z)| w1 == w && h.get(z, r)))
}

pub fn racy(es: &EventStructure, c: &Candidate) -> bool {
    let h = hb(es, c);
    let n = es.len();
    let xs: Vec<usize> = members(c.x, n).collect();
    xs.iter().any(|&a| {
        xs.iter().any(|&b| {
            a != b
                && es.sloc.contains(&(a, b))
                && (es.events[a].write || es.events[b].write)
                && !h.get(a, b)
                && !h.get(b, a)
        })
    })
}

pub fn sc(es: &EventStructure) -> bool {
    configurations(es)
        .into_iter()
        .filter(|&x| is_final(es, x))
        .any(|x| any_candidate(es, x, |c| sc_consistent(es, c)))
}

pub fn ra(es: &EventStructure) -> bool {
    configurations(es)
        .into_iter()
        .filter(|&x| is_final(es, x))
        .any(|x| any_candidate(es, x, |c| ra_consistent(es, c)))
}

/// C++ with release-acquire consistency and catch-fire races.
pub fn cpp(es: &EventStructure) -> bool {
    configurations(es).into_iter().any(|x| {
        let fin = is_final(es, x);
        any_candidate(es, x, |c| ra_consistent(es, c) && (fin || racy(es, c)))
    })
}

/// Whether every new read of `q` is justified by a write in `p`.
pub fn justifies(es: &EventStructure, p: Set, q: Set) -> bool {
    let n = es.len();
    members(q & !p, n)
        .filter(|&y| es.events[y].read)
        .all(|y| members(p, n).any(|x| es.events[x].write && es.justifies.contains(&(x, y))))
}

pub struct Jr<'a> {
    es: &'a EventStructure,
    configs: Vec<Set>,
    n: usize,
    aj_reach: HashMap<Set, BTreeSet<Set>>,
}

impl<'a> Jr<'a> {
    pub fn new(es: &'a EventStructure, n: usize) -> Self {
        Jr {
            es,
            configs: configurations(es),
            n,
            aj_reach: HashMap::new(),
        }
    }

    fn aj(&self, p: Set, q: Set) -> bool {
        p & !q == 0 && justifies(self.es, p, q)
    }

    /// Configurations reachable from `p` in at most `n` `aj` steps (`p`
    /// included).
    fn reach_aj(&mut self, p: Set) -> BTreeSet<Set> {
        if let Some(r) = self.aj_reach.get(&p) {
            return r.clone();
        }
        let mut frontier: BTreeSet<Set> = [p].into();
        let mut all = frontier.clone();
        for _ in 0..self.n {
            let next: BTreeSet<Set> = frontier
                .iter()
                .flat_map(|&a| {
                    self.configs
                        .iter()
                        .copied()
                        .filter(move |&b| b != a)
                        .map(move |b| (a, b))
                })
                .filter(|&(a, b)| self.aj(a, b))
                .map(|(_, b)| b)
                .filter(|b| !all.contains(b))
                .collect();
            if next.is_empty() {
                break;
            }
            all.extend(next.iter().copied());
            frontier = next;
        }
        self.aj_reach.insert(p, all.clone());
        all
    }

    fn aej(&mut self, p: Set, q: Set) -> bool {
        if p & !q != 0 {
            return false;
        }
        for x in self.reach_aj(p) {
            let ok = self
                .reach_aj(x)
                .into_iter()
                .any(|y| justifies(self.es, y, q));
            if !ok {
                return false;
            }
        }
        true
    }

    /// Whether some final configuration is reachable from the empty set in
    /// at most `n` `aej` steps.
    pub fn allowed(&mut self) -> bool {
        let mut frontier: BTreeSet<Set> = [0].into();
        let mut all = frontier.clone();
        for _ in 0..self.n {
            let mut next = BTreeSet::new();
            for &a in &frontier {
                for b in self.configs.clone() {
                    if !all.contains(&b) && self.aej(a, b) {
                        next.insert(b);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            all.extend(next.iter().copied());
            frontier = next;
        }
        all.into_iter().any(|x| is_final(self.es, x))
    }
}

pub fn jr(es: &EventStructure, n: usize) -> bool {
    Jr::new(es, n).allowed()
}
