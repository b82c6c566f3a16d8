use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{vocab, EventStructure};
use crate::so::text::parse_formula;
use crate::so::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    /// 1: no event is both a read and a write.
    ReadWriteDisjoint,
    /// 2: `justifies ⊆ write × read`.
    JustifiesWriteToRead,
    /// 3: conflict is symmetric.
    ConflictSymmetric,
    /// 4: conflict is irreflexive.
    ConflictIrreflexive,
    /// 5: conflict propagates forward along `≤`.
    ConflictPropagates,
    /// 6: immediately conflicting events share their strict predecessors.
    ConflictSharesPredecessors,
    /// 7: immediate conflict united with identity is transitive.
    ConflictTransitive,
    PoReflexive,
    PoAntisymmetric,
    PoTransitive,
}

impl Axiom {
    pub const SEVEN: [Axiom; 7] = [
        Axiom::ReadWriteDisjoint,
        Axiom::JustifiesWriteToRead,
        Axiom::ConflictSymmetric,
        Axiom::ConflictIrreflexive,
        Axiom::ConflictPropagates,
        Axiom::ConflictSharesPredecessors,
        Axiom::ConflictTransitive,
    ];

    pub fn number(self) -> Option<usize> {
        Self::SEVEN.iter().position(|&a| a == self).map(|i| i + 1)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::ReadWriteDisjoint => "read/write disjoint",
            Axiom::JustifiesWriteToRead => "justifies relates writes to reads",
            Axiom::ConflictSymmetric => "conflict symmetric",
            Axiom::ConflictIrreflexive => "conflict irreflexive",
            Axiom::ConflictPropagates => "conflict propagates along program order",
            Axiom::ConflictSharesPredecessors => "immediate conflict shares predecessors",
            Axiom::ConflictTransitive => "immediate conflict transitive up to identity",
            Axiom::PoReflexive => "program order reflexive",
            Axiom::PoAntisymmetric => "program order antisymmetric",
            Axiom::PoTransitive => "program order transitive",
        };
        match self.number() {
            Some(n) => write!(f, "axiom {n} ({name})"),
            None => f.write_str(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {:?}", self.axiom, self.witness)
    }
}

pub(super) fn validate(es: &EventStructure) -> Vec<Violation> {
    let n = es.len();
    let mut out = BTreeSet::new();
    let mut flag = |axiom, witness: Vec<usize>| {
        out.insert(Violation { axiom, witness });
    };

    let succ: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).filter(|&b| es.le(a, b)).collect())
        .collect();
    let pred_strict: Vec<Vec<usize>> = (0..n)
        .map(|b| (0..n).filter(|&a| es.lt(a, b)).collect())
        .collect();

    for (i, e) in es.events.iter().enumerate() {
        if e.read && e.write {
            flag(Axiom::ReadWriteDisjoint, vec![i]);
        }
        if !es.le(i, i) {
            flag(Axiom::PoReflexive, vec![i]);
        }
    }
    for &(w, r) in &es.justifies {
        if !(es.events[w].write && es.events[r].read) {
            flag(Axiom::JustifiesWriteToRead, vec![w, r]);
        }
    }
    for &(a, b) in &es.po {
        if a != b && es.le(b, a) {
            flag(Axiom::PoAntisymmetric, vec![a.min(b), a.max(b)]);
        }
        for &c in &succ[b] {
            if !es.le(a, c) {
                flag(Axiom::PoTransitive, vec![a, b, c]);
            }
        }
    }
    for &(x, y) in &es.conflict {
        if !es.in_conflict(y, x) {
            flag(Axiom::ConflictSymmetric, vec![x, y]);
        }
        if x == y {
            flag(Axiom::ConflictIrreflexive, vec![x]);
        }
        for &z in &succ[y] {
            if !es.in_conflict(x, z) {
                flag(Axiom::ConflictPropagates, vec![x, y, z]);
            }
        }
    }
    let immediate: BTreeSet<(usize, usize)> = es
        .conflict
        .iter()
        .copied()
        .filter(|&(x, y)| es.immediate_conflict(x, y))
        .collect();
    for &(x, y) in &immediate {
        for &z in &pred_strict[y] {
            if !es.lt(z, x) {
                flag(Axiom::ConflictSharesPredecessors, vec![x, y, z]);
            }
        }
        for &(_, z) in immediate.range((y, 0)..(y + 1, 0)) {
            if x != z && !immediate.contains(&(x, z)) {
                flag(Axiom::ConflictTransitive, vec![x, y, z]);
            }
        }
    }
    out.into_iter().collect()
}

/// The seven axioms as first-order sentences over the event-structure
/// vocabulary, for checking with a model checker.
pub fn axiom_sentences() -> Vec<(Axiom, Formula)> {
    let (le, lt, cf) = (vocab::PO, vocab::STRICT_PO, vocab::CONFLICT);
    // Immediate conflict between u and v, with a bound helper variable w.
    let icf = |u: &str, v: &str, w: &str| {
        format!(
            "(and ({cf} {u} {v}) (forall {w} (and (-> ({lt} {w} {u}) (not ({cf} {w} {v}))) \
             (-> ({lt} {w} {v}) (not ({cf} {u} {w}))))))"
        )
    };
    let texts = [
        (
            Axiom::ReadWriteDisjoint,
            "(forall x (or (not (read x)) (not (write x))))".to_string(),
        ),
        (
            Axiom::JustifiesWriteToRead,
            "(forall x (forall y (-> (justifies x y) (and (write x) (read y)))))".to_string(),
        ),
        (
            Axiom::ConflictSymmetric,
            format!("(forall x (forall y (<-> ({cf} x y) ({cf} y x))))"),
        ),
        (
            Axiom::ConflictIrreflexive,
            format!("(forall x (not ({cf} x x)))"),
        ),
        (
            Axiom::ConflictPropagates,
            format!("(forall x (forall y (forall z (-> (and ({cf} x y) ({le} y z)) ({cf} x z)))))"),
        ),
        (
            Axiom::ConflictSharesPredecessors,
            format!(
                "(forall x (forall y (forall z (-> (and {} ({lt} z y)) ({lt} z x)))))",
                icf("x", "y", "w")
            ),
        ),
        (
            Axiom::ConflictTransitive,
            format!(
                "(forall x (forall y (forall z (-> (and {} {}) (or {} (= x z))))))",
                icf("x", "y", "w"),
                icf("y", "z", "w"),
                icf("x", "z", "w")
            ),
        ),
    ];
    texts
        .into_iter()
        .map(|(a, t)| (a, parse_formula(&t).expect("axiom text is well formed")))
        .collect()
}
