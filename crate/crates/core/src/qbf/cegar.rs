//! Counterexample-guided solver for non-prenex circuits.
//!
//! Each block is a player that wants its matrix true and owns some
//! variables. Its matrix is abstracted into an incremental SAT instance by
//! a polarity-aware Tseitin encoding: quantifier gates the player wins by
//! choosing values are flattened into its own variables; gates the opponent
//! controls are replaced by a placeholder and delegated to a child block
//! whose matrix is the negated claim. When a child refutes a claim with a
//! counter-move, the parent learns the claim instantiated with that move.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::time::Instant;

use super::circuit::{Circuit, Lit, Node, Quant, VarId};
use super::{Budget, Limits, Solution, SolveError};

struct Deadline(Option<Instant>);

impl cadical::Callbacks for Deadline {
    fn terminate(&mut self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

struct Child {
    /// True in the parent when it relies on `claim` holding for all values
    /// of the gate's variables.
    placeholder: i32,
    claim: Lit,
    gate_vars: Rc<[VarId]>,
    block: usize,
}

struct Block {
    sat: cadical::Solver<Deadline>,
    next_var: i32,
    true_lit: i32,
    vars: HashMap<VarId, i32>,
    outer: Rc<Vec<VarId>>,
    enc: HashMap<(u32, bool), i32>,
    children: Vec<Child>,
}

struct Cegar<'a> {
    c: &'a mut Circuit,
    budget: Budget,
    blocks: Vec<Block>,
    free: HashMap<u32, Rc<Vec<VarId>>>,
    lits: usize,
    clauses: usize,
}

impl Cegar<'_> {
    fn free_of(&mut self, n: u32) -> Rc<Vec<VarId>> {
        if let Some(f) = self.free.get(&n) {
            return f.clone();
        }
        let mut out: Vec<VarId> = Vec::new();
        match self.c.gate(n).clone() {
            Node::True => {}
            Node::Var(v) => out.push(v),
            Node::And(cs) | Node::Or(cs) => {
                for l in cs.iter() {
                    out.extend(self.free_of(l.node()).iter().copied());
                }
            }
            Node::Quant(_, vs, b) => {
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

    fn new_block(&mut self, matrix: Lit, outer: Rc<Vec<VarId>>) -> usize {
        let mut sat = cadical::Solver::new();
        sat.set_callbacks(Some(Deadline(self.budget.deadline())));
        sat.add_clause([1]);
        let b = self.blocks.len();
        self.blocks.push(Block {
            sat,
            next_var: 1,
            true_lit: 1,
            vars: HashMap::new(),
            outer,
            enc: HashMap::new(),
            children: Vec::new(),
        });
        let root = self.enc(b, matrix, true);
        self.clause(b, vec![root]);
        b
    }

    fn fresh(&mut self, b: usize) -> i32 {
        let blk = &mut self.blocks[b];
        blk.next_var += 1;
        blk.next_var
    }

    fn var(&mut self, b: usize, v: VarId) -> i32 {
        if let Some(&x) = self.blocks[b].vars.get(&v) {
            return x;
        }
        let x = self.fresh(b);
        self.blocks[b].vars.insert(v, x);
        x
    }

    fn clause(&mut self, b: usize, lits: Vec<i32>) {
        self.lits += lits.len();
        self.clauses += 1;
        self.blocks[b].sat.add_clause(lits);
    }

    /// A SAT literal `x` for `lit` such that, with `pol`, `x` implies `lit`
    /// and, without, `lit` implies `x`.
    fn enc(&mut self, b: usize, lit: Lit, pol: bool) -> i32 {
        let s = self.enc_node(b, lit.node(), pol ^ lit.is_negated());
        if lit.is_negated() {
            -s
        } else {
            s
        }
    }

    fn enc_node(&mut self, b: usize, n: u32, pol: bool) -> i32 {
        if let Some(&s) = self.blocks[b].enc.get(&(n, pol)) {
            return s;
        }
        let s = match self.c.gate(n).clone() {
            Node::True => self.blocks[b].true_lit,
            Node::Var(v) => self.var(b, v),
            Node::And(cs) | Node::Or(cs) => {
                let is_and = matches!(self.c.gate(n), Node::And(_));
                let kids: Vec<i32> = cs.iter().map(|&l| self.enc(b, l, pol)).collect();
                let s = self.fresh(b);
                match (is_and, pol) {
                    (true, true) => kids.iter().for_each(|&k| self.clause(b, vec![-s, k])),
                    (false, false) => kids.iter().for_each(|&k| self.clause(b, vec![s, -k])),
                    (true, false) => self.clause(
                        b,
                        std::iter::once(s).chain(kids.iter().map(|k| -k)).collect(),
                    ),
                    (false, true) => {
                        self.clause(b, std::iter::once(-s).chain(kids.iter().copied()).collect())
                    }
                }
                s
            }
            Node::Quant(q, vs, body) => {
                if (q == Quant::Exists) == pol {
                    for &v in vs.iter() {
                        self.var(b, v);
                    }
                    self.enc(b, body, pol)
                } else {
                    let s = self.fresh(b);
                    let placeholder = if pol { s } else { -s };
                    let claim = body.xor(!pol);
                    let outer = self.free_of(n);
                    for &v in outer.iter() {
                        self.var(b, v);
                    }
                    let block = self.new_block(!claim, outer);
                    self.blocks[b].children.push(Child {
                        placeholder,
                        claim,
                        gate_vars: vs,
                        block,
                    });
                    s
                }
            }
        };
        self.blocks[b].enc.insert((n, pol), s);
        s
    }

    fn check_limits(&self) -> Result<(), SolveError> {
        self.budget.check_time()?;
        self.budget.check_mem(
            self.c.approx_bytes() + self.lits * 8 + self.clauses * 48 + self.blocks.len() * 4096,
        )
    }

    /// A winning assignment of block `b` against `alpha`, or `None` when the
    /// opponent wins.
    fn solve_block(
        &mut self,
        b: usize,
        alpha: &HashMap<VarId, bool>,
    ) -> Result<Option<HashMap<VarId, bool>>, SolveError> {
        loop {
            self.check_limits()?;
            let blk = &mut self.blocks[b];
            let assumptions: Vec<i32> = blk
                .outer
                .iter()
                .filter_map(|v| blk.vars.get(v).map(|&x| if alpha[v] { x } else { -x }))
                .collect();
            match blk.sat.solve_with(assumptions) {
                None => return Err(self.budget.timeout_error()),
                Some(false) => return Ok(None),
                Some(true) => {}
            }
            let sigma: HashMap<VarId, bool> = blk
                .vars
                .iter()
                .map(|(&v, &x)| (v, blk.sat.value(x).unwrap_or(false)))
                .collect();
            let active: Vec<usize> = (0..blk.children.len())
                .filter(|&i| blk.sat.value(blk.children[i].placeholder).unwrap_or(false))
                .collect();
            let mut refined = false;
            for i in active {
                let (child, claim, placeholder, gate_vars) = {
                    let ch = &self.blocks[b].children[i];
                    (ch.block, ch.claim, ch.placeholder, ch.gate_vars.clone())
                };
                let sub_alpha: HashMap<VarId, bool> = self.blocks[child]
                    .outer
                    .iter()
                    .map(|v| (*v, sigma[v]))
                    .collect();
                if let Some(tau) = self.solve_block(child, &sub_alpha)? {
                    let map: HashMap<VarId, Lit> = gate_vars
                        .iter()
                        .map(|v| {
                            (
                                *v,
                                if tau.get(v).copied().unwrap_or(false) {
                                    Lit::TRUE
                                } else {
                                    Lit::FALSE
                                },
                            )
                        })
                        .collect();
                    let instance = self.c.substitute(claim, &map);
                    let x = self.enc(b, instance, true);
                    self.clause(b, vec![-placeholder, x]);
                    refined = true;
                }
            }
            if !refined {
                return Ok(Some(sigma));
            }
        }
    }
}

pub fn solve(c: &mut Circuit, root: Lit, limits: Limits) -> Result<Solution, SolveError> {
    if let Some(value) = c.const_value(root) {
        return Ok(Solution {
            value,
            witness: BTreeMap::new(),
        });
    }
    let outer_ex = c.outer_existentials(root);
    let mut s = Cegar {
        c,
        budget: Budget::new(limits),
        blocks: Vec::new(),
        free: HashMap::new(),
        lits: 0,
        clauses: 0,
    };
    let free = s.free_of(root.node());
    assert!(free.is_empty(), "circuit has free variables {free:?}");
    let top = s.new_block(root, Rc::new(Vec::new()));
    Ok(match s.solve_block(top, &HashMap::new())? {
        None => Solution {
            value: false,
            witness: BTreeMap::new(),
        },
        Some(sigma) => Solution {
            value: true,
            witness: outer_ex
                .into_iter()
                .map(|v| (v, sigma.get(&v).copied().unwrap_or(false)))
                .collect(),
        },
    })
}
