//! Event structures: data model, axioms, configuration macros, conversion to
//! relational structures, and DOT export.

mod axioms;
mod config;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::so::{RelStructure, SoError};

pub use axioms::{axiom_sentences, Axiom, Violation};
pub use config::{max_config_size, max_config_weight, mk_final_config, mk_valid_config};

/// Relation names of the event-structure vocabulary.
pub mod vocab {
    pub const FINAL: &str = "final";
    pub const READ: &str = "read";
    pub const WRITE: &str = "write";
    pub const CONFLICT: &str = "conflict";
    pub const JUSTIFIES: &str = "justifies";
    pub const SLOC: &str = "sloc";
    pub const PO: &str = "<=";
    pub const STRICT_PO: &str = "<";
}

#[derive(Debug, Error)]
pub enum EsError {
    #[error("event structure has no events")]
    Empty,
    #[error("event structure violates {} axiom(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error("event index {0} out of range")]
    BadIndex(usize),
    #[error(transparent)]
    So(#[from] SoError),
    #[error("malformed event-structure dump: {0}")]
    Dump(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    /// Thread index; `None` for initialisation writes.
    #[serde(default)]
    pub thread: Option<usize>,
    #[serde(default)]
    pub read: bool,
    #[serde(default)]
    pub write: bool,
    #[serde(default, rename = "final")]
    pub is_final: bool,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub value: Option<i64>,
}

impl Event {
    pub fn read(name: impl Into<String>, thread: Option<usize>, loc: &str, value: i64) -> Self {
        Event {
            name: name.into(),
            thread,
            read: true,
            write: false,
            is_final: false,
            location: Some(loc.to_string()),
            value: Some(value),
        }
    }

    pub fn write(name: impl Into<String>, thread: Option<usize>, loc: &str, value: i64) -> Self {
        Event {
            write: true,
            read: false,
            ..Event::read(name, thread, loc, value)
        }
    }

    pub fn is_access(&self) -> bool {
        self.read || self.write
    }

    pub fn label(&self) -> String {
        let kind = match (self.read, self.write) {
            (true, false) => "R",
            (false, true) => "W",
            (true, true) => "RW",
            (false, false) => "-",
        };
        match (&self.location, self.value) {
            (Some(l), Some(v)) => format!("{kind} {l}={v}"),
            _ => kind.to_string(),
        }
    }
}

pub type Pairs = BTreeSet<(usize, usize)>;

/// A finite event structure. `po` is the reflexive program order `≤`; the
/// strict order `<` is derived from it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventStructure {
    pub events: Vec<Event>,
    pub po: Pairs,
    pub conflict: Pairs,
    pub justifies: Pairs,
    pub sloc: Pairs,
}

impl EventStructure {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.po.contains(&(a, b))
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.le(a, b)
    }

    pub fn in_conflict(&self, a: usize, b: usize) -> bool {
        self.conflict.contains(&(a, b))
    }

    pub fn strict_po(&self) -> Pairs {
        self.po.iter().copied().filter(|(a, b)| a != b).collect()
    }

    /// `conflict(x, y)` with no strictly earlier event on either side already
    /// in conflict with the other.
    pub fn immediate_conflict(&self, x: usize, y: usize) -> bool {
        self.in_conflict(x, y)
            && !(0..self.len()).any(|z| {
                (self.lt(z, x) && self.in_conflict(z, y))
                    || (self.lt(z, y) && self.in_conflict(x, z))
            })
    }

    /// Adds the reflexive pairs and closes `po` transitively.
    pub fn close_po(&mut self) {
        for i in 0..self.len() {
            self.po.insert((i, i));
        }
        loop {
            let extra: Vec<_> = self
                .po
                .iter()
                .flat_map(|&(a, b)| self.po.range((b, 0)..(b + 1, 0)).map(move |&(_, c)| (a, c)))
                .filter(|p| !self.po.contains(p))
                .collect();
            if extra.is_empty() {
                break;
            }
            self.po.extend(extra);
        }
    }

    /// Recomputes `sloc` as "same location" over memory accesses.
    pub fn derive_sloc(&mut self) {
        self.sloc.clear();
        for (i, a) in self.events.iter().enumerate() {
            for (j, b) in self.events.iter().enumerate() {
                if a.is_access()
                    && b.is_access()
                    && a.location.is_some()
                    && a.location == b.location
                {
                    self.sloc.insert((i, j));
                }
            }
        }
    }

    pub fn validate_axioms(&self) -> Vec<Violation> {
        axioms::validate(self)
    }

    /// Whether `set` is conflict-free and `≤`-downward closed.
    pub fn is_configuration(&self, set: &BTreeSet<usize>) -> bool {
        let conflict_free = set
            .iter()
            .all(|&a| set.iter().all(|&b| !self.in_conflict(a, b)));
        let closed = self
            .po
            .iter()
            .all(|&(a, b)| !set.contains(&b) || set.contains(&a));
        conflict_free && closed
    }

    pub fn to_rel_structure(&self) -> Result<RelStructure, EsError> {
        if self.is_empty() {
            return Err(EsError::Empty);
        }
        let violations = self.validate_axioms();
        if !violations.is_empty() {
            return Err(EsError::Invalid(violations));
        }
        let mut rs = RelStructure::new(self.len())?;
        for (i, e) in self.events.iter().enumerate() {
            if rs.constant(&e.name).is_none() && !e.name.is_empty() {
                rs.add_constant(&e.name, i)?;
            }
        }
        let unary = |pick: fn(&Event) -> bool| -> Vec<Vec<usize>> {
            self.events
                .iter()
                .enumerate()
                .filter(|(_, e)| pick(e))
                .map(|(i, _)| vec![i])
                .collect()
        };
        let binary =
            |pairs: &Pairs| -> Vec<Vec<usize>> { pairs.iter().map(|&(a, b)| vec![a, b]).collect() };
        rs.add_relation(vocab::FINAL, 1, unary(|e| e.is_final))?;
        rs.add_relation(vocab::READ, 1, unary(|e| e.read))?;
        rs.add_relation(vocab::WRITE, 1, unary(|e| e.write))?;
        rs.add_relation(vocab::CONFLICT, 2, binary(&self.conflict))?;
        rs.add_relation(vocab::JUSTIFIES, 2, binary(&self.justifies))?;
        rs.add_relation(vocab::SLOC, 2, binary(&self.sloc))?;
        rs.add_relation(vocab::PO, 2, binary(&self.po))?;
        rs.add_relation(vocab::STRICT_PO, 2, binary(&self.strict_po()))?;
        Ok(rs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("event structures always serialise")
    }

    /// Reads a structure written by [`EventStructure::to_json`]. `po` is
    /// taken as given (not closed) so malformed inputs can be validated.
    pub fn from_json(text: &str) -> Result<Self, EsError> {
        let es: EventStructure = serde_json::from_str(text)?;
        let n = es.len();
        for &(a, b) in es
            .po
            .iter()
            .chain(&es.conflict)
            .chain(&es.justifies)
            .chain(&es.sloc)
        {
            if a >= n || b >= n {
                return Err(EsError::BadIndex(a.max(b)));
            }
        }
        Ok(es)
    }

    /// Graphviz rendering: program order as solid edges (transitive
    /// reduction), immediate conflict as dashed red edges, justification as
    /// dotted blue edges.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph events {\n  node [shape=box];\n");
        for (i, e) in self.events.iter().enumerate() {
            let shape = if e.is_final { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  e{i} [label=\"{}: {}\"{shape}];", e.name, e.label());
        }
        for &(a, b) in &self.po {
            let covered = a != b && !(0..self.len()).any(|c| self.lt(a, c) && self.lt(c, b));
            if covered {
                let _ = writeln!(out, "  e{a} -> e{b};");
            }
        }
        for &(a, b) in &self.conflict {
            if a < b && self.immediate_conflict(a, b) {
                let _ = writeln!(
                    out,
                    "  e{a} -> e{b} [dir=none, style=dashed, color=red, constraint=false];"
                );
            }
        }
        for &(a, b) in &self.justifies {
            let _ = writeln!(
                out,
                "  e{a} -> e{b} [style=dotted, color=blue, constraint=false];"
            );
        }
        out.push_str("}\n");
        out
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::lb_false_dep;
    use super::*;

    #[test]
    fn lb_false_dep_structure_is_valid() {
        assert_eq!(lb_false_dep().validate_axioms(), vec![]);
    }

    #[test]
    fn lb_false_dep_relational_view() {
        let es = lb_false_dep();
        let rs = es.to_rel_structure().unwrap();
        assert_eq!(rs.size(), 9);
        let just = rs.relation(vocab::JUSTIFIES).unwrap();
        // e and g both write x=1 and justify b.
        assert!(just.contains(&[6, 3]));
        assert!(just.contains(&[8, 3]));
        let lt = rs.relation(vocab::STRICT_PO).unwrap();
        assert!(lt.contains(&[0, 4]));
        assert!(!lt.contains(&[4, 4]));
        assert!(rs.relation(vocab::PO).unwrap().contains(&[4, 4]));
        assert_eq!(rs.constant("g"), Some(8));
    }

    #[test]
    fn overview_three_events() {
        let mut es = EventStructure {
            events: vec![
                Event::write("one", None, "x", 0),
                Event::read("two", Some(0), "x", 0),
                Event::read("three", Some(0), "x", 1),
            ],
            ..Default::default()
        };
        es.po.extend([(0, 1), (0, 2)]);
        es.close_po();
        es.conflict.extend([(1, 2), (2, 1)]);
        es.justifies.insert((0, 1));
        es.derive_sloc();
        let rs = es.to_rel_structure().unwrap();
        assert_eq!(rs.size(), 3);
        let lt: Vec<_> = rs
            .relation(vocab::STRICT_PO)
            .unwrap()
            .tuples
            .iter()
            .cloned()
            .collect();
        assert_eq!(lt, vec![vec![0, 1], vec![0, 2]]);
        assert!(rs.relation(vocab::CONFLICT).unwrap().contains(&[1, 2]));
    }

    #[test]
    fn empty_structure_rejected() {
        assert!(matches!(
            EventStructure::default().to_rel_structure(),
            Err(EsError::Empty)
        ));
    }

    #[test]
    fn invalid_structure_rejected() {
        let mut es = lb_false_dep();
        es.conflict.insert((4, 4));
        assert!(matches!(es.to_rel_structure(), Err(EsError::Invalid(_))));
    }

    #[test]
    fn json_round_trip() {
        let es = lb_false_dep();
        let back = EventStructure::from_json(&es.to_json()).unwrap();
        assert_eq!(back, es);
        assert!(EventStructure::from_json(
            "{\"events\": [], \"po\": [[0, 3]], \"conflict\": [], \"justifies\": [], \"sloc\": []}"
        )
        .is_err());
    }

    #[test]
    fn dot_mentions_every_event() {
        let dot = lb_false_dep().to_dot();
        for i in 0..9 {
            assert!(dot.contains(&format!("e{i} [label")));
        }
        assert!(dot.contains("e2 -> e3 [dir=none"));
        assert!(!dot.contains("e2 -> e4 [dir=none"));
    }

    #[test]
    fn configurations() {
        let es = lb_false_dep();
        assert!(es.is_configuration(&[0, 1, 3, 4].into_iter().collect()));
        assert!(!es.is_configuration(&[0, 1, 2, 3].into_iter().collect()));
        assert!(!es.is_configuration(&[0, 1, 4].into_iter().collect()));
    }
}
