//! Finite relational structures.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SoError;

/// Name of the built-in identity relation.
pub const IDENTITY: &str = "=";
/// Name of the built-in empty unary relation.
pub const EMPTY: &str = "empty";

pub type Tuple = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Tuple>,
}

impl Relation {
    pub fn new(arity: usize) -> Self {
        Relation {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }
}

/// A finite relational structure over the universe `0..size`.
///
/// Every element `i` is denoted by the constant `a{i}`; further constants may
/// alias elements. The relations `=` and `empty` are always present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelStructure {
    size: usize,
    constants: BTreeMap<String, usize>,
    relations: BTreeMap<String, Relation>,
}

pub fn element_name(e: usize) -> String {
    format!("a{e}")
}

impl RelStructure {
    pub fn new(size: usize) -> Result<Self, SoError> {
        if size == 0 {
            return Err(SoError::EmptyUniverse);
        }
        let mut constants = BTreeMap::new();
        for e in 0..size {
            constants.insert(element_name(e), e);
        }
        let mut identity = Relation::new(2);
        identity.tuples.extend((0..size).map(|e| vec![e, e]));
        let mut relations = BTreeMap::new();
        relations.insert(IDENTITY.to_string(), identity);
        relations.insert(EMPTY.to_string(), Relation::new(1));
        Ok(RelStructure {
            size,
            constants,
            relations,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn add_constant(&mut self, name: &str, element: usize) -> Result<(), SoError> {
        if element >= self.size {
            return Err(SoError::ElementOutOfRange {
                element,
                size: self.size,
            });
        }
        if let Some(&old) = self.constants.get(name) {
            if old != element {
                return Err(SoError::Redefined(name.to_string()));
            }
        }
        self.constants.insert(name.to_string(), element);
        Ok(())
    }

    /// Adds (or replaces) a relation. The built-ins `=` and `empty` are fixed.
    pub fn add_relation<I>(&mut self, name: &str, arity: usize, tuples: I) -> Result<(), SoError>
    where
        I: IntoIterator<Item = Tuple>,
    {
        if name == IDENTITY || name == EMPTY {
            return Err(SoError::Redefined(name.to_string()));
        }
        if arity == 0 {
            return Err(SoError::ZeroArity(name.to_string()));
        }
        let mut rel = Relation::new(arity);
        for t in tuples {
            if t.len() != arity {
                return Err(SoError::ArityMismatch {
                    symbol: name.to_string(),
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(&e) = t.iter().find(|&&e| e >= self.size) {
                return Err(SoError::ElementOutOfRange {
                    element: e,
                    size: self.size,
                });
            }
            rel.tuples.insert(t);
        }
        self.relations.insert(name.to_string(), rel);
        Ok(())
    }

    /// All tuples of `A^k` in lexicographic order.
    pub fn tuples(&self, arity: usize) -> impl Iterator<Item = Tuple> + '_ {
        let count = self.size.pow(arity as u32);
        (0..count).map(move |mut idx| {
            let mut t = vec![0; arity];
            for slot in t.iter_mut().rev() {
                *slot = idx % self.size;
                idx /= self.size;
            }
            t
        })
    }

    /// Position of `tuple` in the lexicographic enumeration of `A^k`.
    pub fn tuple_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &e| acc * self.size + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_present() {
        let s = RelStructure::new(3).unwrap();
        let id = s.relation(IDENTITY).unwrap();
        assert_eq!(id.tuples.len(), 3);
        assert!(id.contains(&[2, 2]));
        assert!(!id.contains(&[0, 1]));
        assert!(s.relation(EMPTY).unwrap().tuples.is_empty());
        assert_eq!(s.constant("a2"), Some(2));
    }

    #[test]
    fn rejects_bad_tuples() {
        let mut s = RelStructure::new(2).unwrap();
        assert!(matches!(
            s.add_relation("r", 2, vec![vec![0]]),
            Err(SoError::ArityMismatch { .. })
        ));
        assert!(matches!(
            s.add_relation("r", 1, vec![vec![5]]),
            Err(SoError::ElementOutOfRange { .. })
        ));
        assert!(s.add_relation("=", 2, vec![]).is_err());
        assert!(RelStructure::new(0).is_err());
    }

    #[test]
    fn tuple_enumeration_is_lexicographic() {
        let s = RelStructure::new(3).unwrap();
        let all: Vec<_> = s.tuples(2).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        for (i, t) in all.iter().enumerate() {
            assert_eq!(s.tuple_index(t), i);
        }
    }
}
