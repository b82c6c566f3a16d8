//! Expansion solver: every quantifier gate enumerates the assignments of its
//! block, stopping at the first decisive one. Results are cached per gate
//! and values of the gate's free variables.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::circuit::{Circuit, Lit, Node, Quant, VarId};
use super::{Budget, Limits, Solution, SolveError};

/// Largest block the solver will enumerate.
pub const MAX_BLOCK: usize = 24;

struct Expander<'a> {
    c: &'a Circuit,
    budget: Budget,
    free: HashMap<u32, Rc<Vec<VarId>>>,
    memo: HashMap<(u32, Vec<bool>), bool>,
    assign: Vec<Option<bool>>,
    steps: u64,
}

type Witness = Vec<(VarId, bool)>;

impl Expander<'_> {
    fn free_of(&mut self, n: u32) -> Rc<Vec<VarId>> {
        if let Some(f) = self.free.get(&n) {
            return f.clone();
        }
        let mut out: Vec<VarId> = Vec::new();
        match self.c.gate(n) {
            Node::True => {}
            Node::Var(v) => out.push(*v),
            Node::And(cs) | Node::Or(cs) => {
                for l in cs.clone().iter() {
                    out.extend(self.free_of(l.node()).iter().copied());
                }
            }
            Node::Quant(_, vs, b) => {
                let vs = vs.clone();
                out.extend(
                    self.free_of(b.node())
                        .iter()
                        .copied()
                        .filter(|v| !vs.contains(v)),
                );
            }
        }
        out.sort_unstable();
        out.dedup();
        let rc = Rc::new(out);
        self.free.insert(n, rc.clone());
        rc
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps.is_multiple_of(4096) {
            self.budget.check_time()?;
            self.budget
                .check_mem(self.c.approx_bytes() + self.memo.len() * 64)?;
        }
        Ok(())
    }

    /// Value of `lit`. With `record`, also returns values of the variables
    /// that are existential for a player wanting `lit` to equal `want`,
    /// provided no opposing gate lies between them and `lit`.
    fn lit(&mut self, lit: Lit, want: bool, record: bool) -> Result<(bool, Witness), SolveError> {
        let (v, w) = self.node(lit.node(), want ^ lit.is_negated(), record)?;
        Ok((v ^ lit.is_negated(), w))
    }

    fn node(&mut self, n: u32, want: bool, record: bool) -> Result<(bool, Witness), SolveError> {
        self.tick()?;
        let key = if record {
            None
        } else {
            let free = self.free_of(n);
            let vals: Vec<bool> = free
                .iter()
                .map(|&v| self.assign[v as usize].unwrap_or(false))
                .collect();
            let k = (n, vals);
            if let Some(&v) = self.memo.get(&k) {
                return Ok((v, Vec::new()));
            }
            Some(k)
        };
        let mut witness = Vec::new();
        let value = match self.c.gate(n).clone() {
            Node::True => true,
            Node::Var(v) => self.assign[v as usize].expect("unassigned variable"),
            Node::And(cs) | Node::Or(cs) => {
                let is_and = matches!(self.c.gate(n), Node::And(_));
                // The value that decides the junction early.
                let stop = !is_and;
                let mut value = is_and;
                for l in cs.iter() {
                    let (v, w) = self.lit(*l, want, record)?;
                    if record && v == want {
                        witness.extend(w);
                    }
                    if v == stop {
                        value = stop;
                        break;
                    }
                }
                value
            }
            Node::Quant(q, vs, body) => {
                if vs.len() > MAX_BLOCK {
                    panic!("block of {} variables is too large to expand", vs.len());
                }
                let ours = (q == Quant::Exists) == want;
                let stop = q == Quant::Exists;
                let mut value = !stop;
                for bits in 0u64..(1 << vs.len()) {
                    for (i, &v) in vs.iter().enumerate() {
                        self.assign[v as usize] = Some(bits >> i & 1 == 1);
                    }
                    let (v, w) = self.lit(body, want, record && ours)?;
                    if v == stop {
                        value = stop;
                        if record && ours && v == want {
                            witness
                                .extend(vs.iter().map(|&x| (x, self.assign[x as usize].unwrap())));
                            witness.extend(w);
                        }
                        break;
                    }
                }
                for &v in vs.iter() {
                    self.assign[v as usize] = None;
                }
                value
            }
        };
        if let Some(k) = key {
            self.memo.insert(k, value);
        }
        Ok((value, witness))
    }
}

pub fn solve(c: &mut Circuit, root: Lit, limits: Limits) -> Result<Solution, SolveError> {
    let mut e = Expander {
        c,
        budget: Budget::new(limits),
        free: HashMap::new(),
        memo: HashMap::new(),
        assign: vec![None; c.num_vars()],
        steps: 0,
    };
    let free = e.free_of(root.node());
    assert!(free.is_empty(), "circuit has free variables {free:?}");
    let (value, w) = e.lit(root, true, true)?;
    let witness: BTreeMap<VarId, bool> = if value {
        w.into_iter().collect()
    } else {
        BTreeMap::new()
    };
    Ok(Solution { value, witness })
}
