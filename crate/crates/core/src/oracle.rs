//! Reference model checker: direct enumeration of the satisfaction relation.
//!
//! Each semantic clause is mirrored one-to-one. Second-order quantifiers
//! enumerate every subset of `A^k`, by increasing cardinality and then
//! lexicographically. Work is metered in clause evaluations so an
//! over-budget query reports [`OracleError::Infeasible`] instead of running
//! forever.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::so::{Environment, Formula, Pred, RelStructure, SoError, Term, Tuple};

pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle infeasible: work budget of {0} clause evaluations exceeded")]
    Infeasible(u64),
    #[error(transparent)]
    Formula(#[from] SoError),
}

struct Checker<'a> {
    rs: &'a RelStructure,
    fo: Vec<(String, usize)>,
    so: Vec<(String, usize, Vec<bool>)>,
    budget: u64,
    spent: u64,
}

/// Decides `rs ⊨ f` for a sentence `f`.
pub fn check(rs: &RelStructure, f: &Formula) -> Result<bool, OracleError> {
    check_with_budget(rs, f, DEFAULT_BUDGET)
}

pub fn check_with_budget(rs: &RelStructure, f: &Formula, budget: u64) -> Result<bool, OracleError> {
    f.check_sentence(rs)?;
    check_in(rs, f, &Environment::default(), budget)
}

/// Decides `rs ⊨ f [env]`; `env` must bind every free variable of `f`.
pub fn check_in(
    rs: &RelStructure,
    f: &Formula,
    env: &Environment,
    budget: u64,
) -> Result<bool, OracleError> {
    let mut c = Checker {
        rs,
        fo: env.fo.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        so: Vec::new(),
        budget,
        spent: 0,
    };
    for (name, (arity, set)) in &env.so {
        let mut bits = vec![false; rs.size().pow(*arity as u32)];
        for t in set {
            bits[rs.tuple_index(t)] = true;
        }
        c.so.push((name.clone(), *arity, bits));
    }
    c.eval(f)
}

/// Like [`check`], but for `∃X^k φ` also returns the first witness set in
/// enumeration order (smallest cardinality, then lexicographic).
pub fn witness(
    rs: &RelStructure,
    var: &str,
    arity: usize,
    body: &Formula,
    budget: u64,
) -> Result<Option<BTreeSet<Tuple>>, OracleError> {
    Formula::exists_so(var, arity, body.clone()).check_sentence(rs)?;
    let mut c = Checker {
        rs,
        fo: Vec::new(),
        so: Vec::new(),
        budget,
        spent: 0,
    };
    let m = rs.size().pow(arity as u32);
    let all: Vec<Tuple> = rs.tuples(arity).collect();
    let mut found = None;
    c.for_each_subset(var, arity, m, &mut |c| {
        if c.eval(body)? {
            let bits = &c.so.last().unwrap().2;
            found = Some(
                (0..m)
                    .filter(|&i| bits[i])
                    .map(|i| all[i].clone())
                    .collect(),
            );
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(found)
}

impl Checker<'_> {
    fn tick(&mut self) -> Result<(), OracleError> {
        self.spent += 1;
        if self.spent > self.budget {
            return Err(OracleError::Infeasible(self.budget));
        }
        Ok(())
    }

    fn term(&self, t: &Term) -> Result<usize, OracleError> {
        match t {
            Term::Var(v) => self
                .fo
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, e)| *e)
                .ok_or_else(|| SoError::Unbound(v.clone()).into()),
            Term::Const(c) => self
                .rs
                .constant(c)
                .ok_or_else(|| SoError::Unbound(c.clone()).into()),
        }
    }

    fn eval(&mut self, f: &Formula) -> Result<bool, OracleError> {
        self.tick()?;
        match f {
            Formula::Atom(p, args) => {
                let tuple = args
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<Result<Vec<_>, _>>()?;
                match p {
                    Pred::Var(v) => {
                        let (_, _, bits) = self
                            .so
                            .iter()
                            .rev()
                            .find(|(n, _, _)| n == v)
                            .ok_or_else(|| SoError::Unbound(v.clone()))?;
                        Ok(bits[self.rs.tuple_index(&tuple)])
                    }
                    Pred::Rel(r) => Ok(self
                        .rs
                        .relation(r)
                        .ok_or_else(|| SoError::Unbound(r.clone()))?
                        .contains(&tuple)),
                }
            }
            Formula::Nand(a, b) => Ok(!(self.eval(a)? && self.eval(b)?)),
            Formula::Not(a) => Ok(!self.eval(a)?),
            Formula::And(xs) => {
                for x in xs {
                    if !self.eval(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(xs) => {
                for x in xs {
                    if self.eval(x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(a, b) => Ok(!self.eval(a)? || self.eval(b)?),
            Formula::Iff(a, b) => Ok(self.eval(a)? == self.eval(b)?),
            Formula::ForallFo(x, body) => self.fo_quant(x, body, true),
            Formula::ExistsFo(x, body) => self.fo_quant(x, body, false),
            Formula::ForallSo(x, k, body) => self.so_quant(x, *k, body, true),
            Formula::ExistsSo(x, k, body) => self.so_quant(x, *k, body, false),
        }
    }

    fn fo_quant(&mut self, x: &str, body: &Formula, universal: bool) -> Result<bool, OracleError> {
        for e in 0..self.rs.size() {
            self.fo.push((x.to_string(), e));
            let r = self.eval(body);
            self.fo.pop();
            if r? != universal {
                return Ok(!universal);
            }
        }
        Ok(universal)
    }

    fn so_quant(
        &mut self,
        x: &str,
        arity: usize,
        body: &Formula,
        universal: bool,
    ) -> Result<bool, OracleError> {
        let m = self.rs.size().pow(arity as u32);
        let mut decided = false;
        self.for_each_subset(x, arity, m, &mut |c| {
            let v = c.eval(body)?;
            if v != universal {
                decided = true;
                return Ok(true);
            }
            Ok(false)
        })?;
        Ok(if decided { !universal } else { universal })
    }

    /// Binds `x` to each subset of the `m` tuples in turn until `visit`
    /// returns true.
    fn for_each_subset(
        &mut self,
        x: &str,
        arity: usize,
        m: usize,
        visit: &mut dyn FnMut(&mut Self) -> Result<bool, OracleError>,
    ) -> Result<(), OracleError> {
        if m >= 63 {
            return Err(OracleError::Infeasible(self.budget));
        }
        self.so.push((x.to_string(), arity, vec![false; m]));
        let result = (|| {
            for card in 0..=m {
                let mut idx: Vec<usize> = (0..card).collect();
                loop {
                    self.tick()?;
                    let bits = &mut self.so.last_mut().unwrap().2;
                    bits.iter_mut().for_each(|b| *b = false);
                    for &i in &idx {
                        bits[i] = true;
                    }
                    if visit(self)? {
                        return Ok(());
                    }
                    if !next_combination(&mut idx, m) {
                        break;
                    }
                }
            }
            Ok(())
        })();
        self.so.pop();
        result
    }
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
