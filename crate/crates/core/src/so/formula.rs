//! Second-order formula syntax.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{RelStructure, SoError};

/// A first-order term: a variable or a constant symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
}

/// A predicate: a second-order variable or a relation symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pred {
    Var(String),
    Rel(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

impl Pred {
    pub fn var(name: impl Into<String>) -> Self {
        Pred::Var(name.into())
    }

    pub fn rel(name: impl Into<String>) -> Self {
        Pred::Rel(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Pred::Var(n) | Pred::Rel(n) => n,
        }
    }
}

/// Second-order formula. `And(vec![])` is true and `Or(vec![])` is false.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(Pred, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Nand(Box<Formula>, Box<Formula>),
    ForallFo(String, Box<Formula>),
    ExistsFo(String, Box<Formula>),
    ForallSo(String, usize, Box<Formula>),
    ExistsSo(String, usize, Box<Formula>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub fo: BTreeSet<String>,
    pub so: BTreeMap<String, usize>,
}

impl FreeVars {
    pub fn is_empty(&self) -> bool {
        self.fo.is_empty() && self.so.is_empty()
    }
}

impl Formula {
    pub fn truth() -> Self {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Self {
        Formula::Or(Vec::new())
    }

    pub fn atom(pred: Pred, args: Vec<Term>) -> Self {
        Formula::Atom(pred, args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Self {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Self {
        Formula::Or(fs)
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn nand(a: Formula, b: Formula) -> Self {
        Formula::Nand(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForallFo(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::ExistsFo(var.into(), Box::new(body))
    }

    pub fn forall_so(var: impl Into<String>, arity: usize, body: Formula) -> Self {
        Formula::ForallSo(var.into(), arity, Box::new(body))
    }

    pub fn exists_so(var: impl Into<String>, arity: usize, body: Formula) -> Self {
        Formula::ExistsSo(var.into(), arity, Box::new(body))
    }

    /// Free first-order variables and free second-order variables (with the
    /// arity of their first occurrence).
    pub fn free_vars(&self) -> FreeVars {
        let mut out = FreeVars::default();
        let mut fo_bound = Vec::new();
        let mut so_bound = Vec::new();
        self.collect_free(&mut fo_bound, &mut so_bound, &mut out);
        out
    }

    fn collect_free(&self, fo: &mut Vec<String>, so: &mut Vec<String>, out: &mut FreeVars) {
        match self {
            Formula::Atom(p, args) => {
                if let Pred::Var(v) = p {
                    if !so.contains(v) {
                        out.so.entry(v.clone()).or_insert(args.len());
                    }
                }
                for t in args {
                    if let Term::Var(v) = t {
                        if !fo.contains(v) {
                            out.fo.insert(v.clone());
                        }
                    }
                }
            }
            Formula::Not(a) => a.collect_free(fo, so, out),
            Formula::And(xs) | Formula::Or(xs) => {
                for x in xs {
                    x.collect_free(fo, so, out);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Nand(a, b) => {
                a.collect_free(fo, so, out);
                b.collect_free(fo, so, out);
            }
            Formula::ForallFo(v, body) | Formula::ExistsFo(v, body) => {
                fo.push(v.clone());
                body.collect_free(fo, so, out);
                fo.pop();
            }
            Formula::ForallSo(v, _, body) | Formula::ExistsSo(v, _, body) => {
                so.push(v.clone());
                body.collect_free(fo, so, out);
                so.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Checks that the formula is a sentence over the vocabulary of `rs`:
    /// every constant and relation exists and every atom has the right arity.
    pub fn check_sentence(&self, rs: &RelStructure) -> Result<(), SoError> {
        let mut fo = Vec::new();
        let mut so = Vec::new();
        self.check_scoped(rs, &mut fo, &mut so)
    }

    fn check_scoped(
        &self,
        rs: &RelStructure,
        fo: &mut Vec<String>,
        so: &mut Vec<(String, usize)>,
    ) -> Result<(), SoError> {
        match self {
            Formula::Atom(p, args) => {
                let expected = match p {
                    Pred::Var(v) => so
                        .iter()
                        .rev()
                        .find(|(n, _)| n == v)
                        .map(|(_, k)| *k)
                        .ok_or_else(|| SoError::Unbound(v.clone()))?,
                    Pred::Rel(r) => {
                        rs.relation(r)
                            .ok_or_else(|| SoError::Unbound(r.clone()))?
                            .arity
                    }
                };
                if expected != args.len() {
                    return Err(SoError::ArityMismatch {
                        symbol: p.name().to_string(),
                        expected,
                        found: args.len(),
                    });
                }
                for t in args {
                    match t {
                        Term::Var(v) if !fo.contains(v) => return Err(SoError::Unbound(v.clone())),
                        Term::Const(c) if rs.constant(c).is_none() => {
                            return Err(SoError::Unbound(c.clone()))
                        }
                        _ => {}
                    }
                }
                Ok(())
            }
            Formula::Not(a) => a.check_scoped(rs, fo, so),
            Formula::And(xs) | Formula::Or(xs) => {
                xs.iter().try_for_each(|x| x.check_scoped(rs, fo, so))
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Nand(a, b) => {
                a.check_scoped(rs, fo, so)?;
                b.check_scoped(rs, fo, so)
            }
            Formula::ForallFo(v, body) | Formula::ExistsFo(v, body) => {
                fo.push(v.clone());
                let r = body.check_scoped(rs, fo, so);
                fo.pop();
                r
            }
            Formula::ForallSo(v, k, body) | Formula::ExistsSo(v, k, body) => {
                if *k == 0 {
                    return Err(SoError::ZeroArity(v.clone()));
                }
                so.push((v.clone(), *k));
                let r = body.check_scoped(rs, fo, so);
                so.pop();
                r
            }
        }
    }

    /// Rewrites every connective into `Nand`. Constants become
    /// `Nand`-combinations of a fixed tautology.
    pub fn to_nand(&self) -> Formula {
        fn nand(a: Formula, b: Formula) -> Formula {
            Formula::nand(a, b)
        }
        fn neg(a: Formula) -> Formula {
            nand(a.clone(), a)
        }
        fn conj(a: Formula, b: Formula) -> Formula {
            neg(nand(a, b))
        }
        fn disj(a: Formula, b: Formula) -> Formula {
            nand(neg(a), neg(b))
        }
        // x = x is valid over every structure; used for the empty connectives.
        fn top() -> Formula {
            let x = "top#x".to_string();
            Formula::forall(
                x.clone(),
                Formula::atom(Pred::rel("="), vec![Term::Var(x.clone()), Term::Var(x)]),
            )
        }
        match self {
            Formula::Atom(..) => self.clone(),
            Formula::Not(a) => neg(a.to_nand()),
            Formula::And(xs) => {
                let mut it = xs.iter().map(|x| x.to_nand());
                match it.next() {
                    None => top(),
                    Some(first) => it.fold(first, conj),
                }
            }
            Formula::Or(xs) => {
                let mut it = xs.iter().map(|x| x.to_nand());
                match it.next() {
                    None => neg(top()),
                    Some(first) => it.fold(first, disj),
                }
            }
            Formula::Implies(a, b) => nand(a.to_nand(), neg(b.to_nand())),
            Formula::Iff(a, b) => {
                let (a, b) = (a.to_nand(), b.to_nand());
                conj(nand(a.clone(), neg(b.clone())), nand(b, neg(a)))
            }
            Formula::Nand(a, b) => nand(a.to_nand(), b.to_nand()),
            Formula::ForallFo(v, body) => Formula::forall(v.clone(), body.to_nand()),
            Formula::ExistsFo(v, body) => Formula::exists(v.clone(), body.to_nand()),
            Formula::ForallSo(v, k, body) => Formula::forall_so(v.clone(), *k, body.to_nand()),
            Formula::ExistsSo(v, k, body) => Formula::exists_so(v.clone(), *k, body.to_nand()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Formula::Atom(..) => 0,
            Formula::Not(a) => a.size(),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().map(Formula::size).sum(),
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Nand(a, b) => {
                a.size() + b.size()
            }
            Formula::ForallFo(_, b)
            | Formula::ExistsFo(_, b)
            | Formula::ForallSo(_, _, b)
            | Formula::ExistsSo(_, _, b) => b.size(),
        }
    }

    /// True when the formula has a universal second-order quantifier in a
    /// positive position or an existential one in a negative position.
    pub fn has_universal_so(&self) -> bool {
        self.so_polarity_scan(true)
    }

    fn so_polarity_scan(&self, positive: bool) -> bool {
        match self {
            Formula::Atom(..) => false,
            Formula::Not(a) => a.so_polarity_scan(!positive),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(|x| x.so_polarity_scan(positive)),
            Formula::Implies(a, b) => a.so_polarity_scan(!positive) || b.so_polarity_scan(positive),
            Formula::Iff(a, b) => {
                a.so_polarity_scan(true)
                    || a.so_polarity_scan(false)
                    || b.so_polarity_scan(true)
                    || b.so_polarity_scan(false)
            }
            Formula::Nand(a, b) => a.so_polarity_scan(!positive) || b.so_polarity_scan(!positive),
            Formula::ForallFo(_, b) | Formula::ExistsFo(_, b) => b.so_polarity_scan(positive),
            Formula::ForallSo(_, _, b) => positive || b.so_polarity_scan(positive),
            Formula::ExistsSo(_, _, b) => !positive || b.so_polarity_scan(positive),
        }
    }
}
