//! Second-order model checking to QBF.
//!
//! First-order quantifiers are expanded over the universe into conjunctions
//! and disjunctions. A second-order quantifier over `X` of arity `k` becomes
//! a quantifier gate over `|A|^k` fresh variables, one per tuple in
//! lexicographic order. Atoms over relation symbols fold to constants: true
//! exactly for member tuples.

use rustc_hash::FxHashMap;
use std::rc::Rc;

use super::circuit::{Circuit, Lit, Quant, VarId, VarInfo};
use crate::so::{Formula, Pred, RelStructure, SoError, Term};

#[derive(Clone, Copy, Debug)]
pub struct TranslateOptions {
    /// Reuse the result for a subformula met again under the same bindings
    /// of its free variables.
    pub memo: bool,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions { memo: true }
    }
}

/// One second-order quantifier of the source formula and its variables.
#[derive(Clone, Debug)]
pub struct SoBlock {
    pub name: String,
    pub arity: usize,
    pub quant: Quant,
    pub vars: Vec<VarId>,
}

#[derive(Clone, Debug)]
pub struct Translation {
    pub circuit: Circuit,
    pub root: Lit,
    pub blocks: Vec<SoBlock>,
}

impl Translation {
    /// The tuples a block's variables stand for under `value`.
    pub fn decode(&self, block: &SoBlock, value: impl Fn(VarId) -> bool) -> Vec<Vec<usize>> {
        block
            .vars
            .iter()
            .filter(|&&v| value(v))
            .filter_map(|&v| {
                self.circuit
                    .var_info(v)
                    .origin
                    .as_ref()
                    .map(|(_, t)| t.clone())
            })
            .collect()
    }
}

type Free = Rc<(Vec<String>, Vec<String>)>;

struct Translator<'a> {
    rs: &'a RelStructure,
    c: Circuit,
    fo: Vec<(String, usize)>,
    so: Vec<(String, usize, Rc<[VarId]>)>,
    blocks: Vec<SoBlock>,
    /// Keyed on the formula and the values of its free variables: element
    /// for first-order ones, first boolean variable for second-order ones.
    memo: Option<FxHashMap<(usize, Vec<u32>), Lit>>,
    free: FxHashMap<usize, Free>,
}

fn key_of(f: &Formula) -> usize {
    f as *const Formula as usize
}

impl<'a> Translator<'a> {
    fn free_of(&mut self, f: &Formula) -> Free {
        if let Some(fv) = self.free.get(&key_of(f)) {
            return fv.clone();
        }
        let (mut fo, mut so): (Vec<String>, Vec<String>) = match f {
            Formula::Atom(p, args) => (
                args.iter()
                    .filter_map(|t| match t {
                        Term::Var(v) => Some(v.clone()),
                        Term::Const(_) => None,
                    })
                    .collect(),
                match p {
                    Pred::Var(v) => vec![v.clone()],
                    Pred::Rel(_) => vec![],
                },
            ),
            Formula::Not(a) => {
                let x = self.free_of(a);
                (x.0.clone(), x.1.clone())
            }
            Formula::And(xs) | Formula::Or(xs) => {
                let mut fo = Vec::new();
                let mut so = Vec::new();
                for x in xs {
                    let fv = self.free_of(x);
                    fo.extend(fv.0.iter().cloned());
                    so.extend(fv.1.iter().cloned());
                }
                (fo, so)
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Nand(a, b) => {
                let (x, y) = (self.free_of(a), self.free_of(b));
                (
                    x.0.iter().chain(&y.0).cloned().collect(),
                    x.1.iter().chain(&y.1).cloned().collect(),
                )
            }
            Formula::ForallFo(v, b) | Formula::ExistsFo(v, b) => {
                let x = self.free_of(b);
                (
                    x.0.iter().filter(|n| *n != v).cloned().collect(),
                    x.1.clone(),
                )
            }
            Formula::ForallSo(v, _, b) | Formula::ExistsSo(v, _, b) => {
                let x = self.free_of(b);
                (
                    x.0.clone(),
                    x.1.iter().filter(|n| *n != v).cloned().collect(),
                )
            }
        };
        fo.sort();
        fo.dedup();
        so.sort();
        so.dedup();
        let fv: Free = Rc::new((fo, so));
        self.free.insert(key_of(f), fv.clone());
        fv
    }

    fn fo_value(&self, name: &str) -> Result<usize, SoError> {
        self.fo
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, e)| *e)
            .ok_or_else(|| SoError::Unbound(name.to_string()))
    }

    fn term(&self, t: &Term) -> Result<usize, SoError> {
        match t {
            Term::Var(v) => self.fo_value(v),
            Term::Const(c) => self
                .rs
                .constant(c)
                .ok_or_else(|| SoError::Unbound(c.clone())),
        }
    }

    fn so_binding(&self, name: &str) -> Option<(usize, &Rc<[VarId]>)> {
        self.so
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .map(|(_, k, b)| (*k, b))
    }

    fn go(&mut self, f: &Formula) -> Result<Lit, SoError> {
        let key = match (&self.memo, f) {
            (_, Formula::Atom(..)) | (None, _) => None,
            (Some(_), _) => {
                let fv = self.free_of(f);
                let mut vals = Vec::with_capacity(fv.0.len() + fv.1.len());
                for v in &fv.0 {
                    vals.push(self.fo_value(v)? as u32);
                }
                for v in &fv.1 {
                    let first = self
                        .so_binding(v)
                        .and_then(|(_, b)| b.first().copied())
                        .ok_or_else(|| SoError::Unbound(v.clone()))?;
                    vals.push(first);
                }
                Some((key_of(f), vals))
            }
        };
        if let (Some(k), Some(memo)) = (&key, &self.memo) {
            if let Some(&l) = memo.get(k) {
                return Ok(l);
            }
        }
        let out = self.build(f)?;
        if let (Some(k), Some(memo)) = (key, &mut self.memo) {
            memo.insert(k, out);
        }
        Ok(out)
    }

    fn build(&mut self, f: &Formula) -> Result<Lit, SoError> {
        Ok(match f {
            Formula::Atom(p, args) => {
                let tuple = args
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<Result<Vec<_>, _>>()?;
                match p {
                    Pred::Rel(r) => {
                        let rel = self
                            .rs
                            .relation(r)
                            .ok_or_else(|| SoError::Unbound(r.clone()))?;
                        if rel.arity != tuple.len() {
                            return Err(SoError::ArityMismatch {
                                symbol: r.clone(),
                                expected: rel.arity,
                                found: tuple.len(),
                            });
                        }
                        if rel.contains(&tuple) {
                            Lit::TRUE
                        } else {
                            Lit::FALSE
                        }
                    }
                    Pred::Var(v) => {
                        let (k, b) = self
                            .so_binding(v)
                            .ok_or_else(|| SoError::Unbound(v.clone()))?;
                        if k != tuple.len() {
                            return Err(SoError::ArityMismatch {
                                symbol: v.clone(),
                                expected: k,
                                found: tuple.len(),
                            });
                        }
                        let var = b[self.rs.tuple_index(&tuple)];
                        self.c.var(var)
                    }
                }
            }
            Formula::Not(a) => !self.go(a)?,
            Formula::And(xs) => {
                let mut kids = Vec::with_capacity(xs.len());
                for x in xs {
                    let l = self.go(x)?;
                    if l == Lit::FALSE {
                        return Ok(Lit::FALSE);
                    }
                    kids.push(l);
                }
                self.c.and(kids)
            }
            Formula::Or(xs) => {
                let mut kids = Vec::with_capacity(xs.len());
                for x in xs {
                    let l = self.go(x)?;
                    if l == Lit::TRUE {
                        return Ok(Lit::TRUE);
                    }
                    kids.push(l);
                }
                self.c.or(kids)
            }
            Formula::Implies(a, b) => {
                let a = self.go(a)?;
                if a == Lit::FALSE {
                    return Ok(Lit::TRUE);
                }
                let b = self.go(b)?;
                self.c.implies(a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = (self.go(a)?, self.go(b)?);
                self.c.iff(a, b)
            }
            Formula::Nand(a, b) => {
                let a = self.go(a)?;
                if a == Lit::FALSE {
                    return Ok(Lit::TRUE);
                }
                let b = self.go(b)?;
                !self.c.and([a, b])
            }
            Formula::ForallFo(v, body) | Formula::ExistsFo(v, body) => {
                let is_all = matches!(f, Formula::ForallFo(..));
                let stop = if is_all { Lit::FALSE } else { Lit::TRUE };
                let mut kids = Vec::with_capacity(self.rs.size());
                for e in 0..self.rs.size() {
                    self.fo.push((v.clone(), e));
                    let l = self.go(body);
                    self.fo.pop();
                    let l = l?;
                    if l == stop {
                        return Ok(stop);
                    }
                    kids.push(l);
                }
                if is_all {
                    self.c.and(kids)
                } else {
                    self.c.or(kids)
                }
            }
            Formula::ForallSo(v, k, body) | Formula::ExistsSo(v, k, body) => {
                let quant = if matches!(f, Formula::ForallSo(..)) {
                    Quant::Forall
                } else {
                    Quant::Exists
                };
                if *k == 0 {
                    return Err(SoError::ZeroArity(v.clone()));
                }
                let tuples: Vec<Vec<usize>> = self.rs.tuples(*k).collect();
                let vars: Vec<VarId> = tuples
                    .into_iter()
                    .map(|t| {
                        self.c.new_var(VarInfo {
                            origin: Some((v.clone(), t)),
                            copy_of: None,
                        })
                    })
                    .collect();
                self.blocks.push(SoBlock {
                    name: v.clone(),
                    arity: *k,
                    quant,
                    vars: vars.clone(),
                });
                self.so.push((v.clone(), *k, vars.clone().into()));
                let b = self.go(body);
                self.so.pop();
                self.c.quant(quant, &vars, b?)
            }
        })
    }
}

pub fn translate(rs: &RelStructure, f: &Formula) -> Result<Translation, SoError> {
    translate_with(rs, f, TranslateOptions::default())
}

pub fn translate_with(
    rs: &RelStructure,
    f: &Formula,
    opts: TranslateOptions,
) -> Result<Translation, SoError> {
    f.check_sentence(rs)?;
    let mut t = Translator {
        rs,
        c: Circuit::new(),
        fo: Vec::new(),
        so: Vec::new(),
        blocks: Vec::new(),
        memo: opts.memo.then(FxHashMap::default),
        free: FxHashMap::default(),
    };
    let root = t.go(f)?;
    Ok(Translation {
        circuit: t.c,
        root,
        blocks: t.blocks,
    })
}
