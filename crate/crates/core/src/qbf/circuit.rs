//! Hash-consed boolean circuits with quantifier gates at any depth.
//!
//! Gates are stored once: building a gate that already exists returns the
//! existing one. Negation lives on edges ([`Lit`]), so `¬g` costs nothing.
//! Constructors fold constants, drop duplicate children, collapse
//! complementary pairs and unwrap single-child gates.

use std::collections::{HashMap, HashSet};

use rustc_hash::FxHashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

pub type VarId = u32;

/// An edge into the circuit: gate index plus a negation bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub const TRUE: Lit = Lit(0);
    pub const FALSE: Lit = Lit(1);

    fn new(node: u32, negated: bool) -> Self {
        Lit(node << 1 | negated as u32)
    }

    pub fn node(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// The same gate without the negation bit.
    pub fn positive(self) -> Lit {
        Lit(self.0 & !1)
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }

    pub fn xor(self, negate: bool) -> Lit {
        Lit(self.0 ^ negate as u32)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Lit::TRUE => f.write_str("T"),
            Lit::FALSE => f.write_str("F"),
            l => write!(f, "{}g{}", if l.is_negated() { "-" } else { "" }, l.node()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    Var(VarId),
    And(Rc<[Lit]>),
    Or(Rc<[Lit]>),
    Quant(Quant, Rc<[VarId]>, Lit),
}

/// Where a boolean variable comes from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarInfo {
    /// Second-order variable this bit encodes, with the tuple it stands for.
    pub origin: Option<(String, Vec<usize>)>,
    /// Set when the variable is a renamed copy made during substitution.
    pub copy_of: Option<VarId>,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    nodes: Vec<Node>,
    table: FxHashMap<Node, u32>,
    vars: Vec<VarInfo>,
    var_nodes: Vec<u32>,
    /// Total children stored across gates, for memory accounting.
    edges: usize,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        let mut table = FxHashMap::default();
        table.insert(Node::True, 0);
        Circuit {
            nodes: vec![Node::True],
            table,
            vars: Vec::new(),
            var_nodes: Vec::new(),
            edges: 0,
        }
    }

    fn intern(&mut self, node: Node) -> Lit {
        if let Some(&i) = self.table.get(&node) {
            return Lit::new(i, false);
        }
        let i = self.nodes.len() as u32;
        self.edges += match &node {
            Node::And(c) | Node::Or(c) => c.len(),
            Node::Quant(_, v, _) => v.len() + 1,
            _ => 0,
        };
        self.nodes.push(node.clone());
        self.table.insert(node, i);
        Lit::new(i, false)
    }

    pub fn new_var(&mut self, info: VarInfo) -> VarId {
        let v = self.vars.len() as VarId;
        self.vars.push(info);
        let lit = self.intern(Node::Var(v));
        self.var_nodes.push(lit.node());
        v
    }

    pub fn var(&self, v: VarId) -> Lit {
        Lit::new(self.var_nodes[v as usize], false)
    }

    pub fn var_info(&self, v: VarId) -> &VarInfo {
        &self.vars[v as usize]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Rough heap footprint in bytes.
    pub fn approx_bytes(&self) -> usize {
        // Node, table entry and Rc header per gate; children twice (shared Rc).
        self.nodes.len() * 96 + self.edges * 4
    }

    pub fn node(&self, lit: Lit) -> &Node {
        &self.nodes[lit.node() as usize]
    }

    /// The gate with index `n`.
    pub fn gate(&self, n: u32) -> &Node {
        &self.nodes[n as usize]
    }

    /// Positive edge into gate `n`.
    pub fn lit_of(&self, n: u32) -> Lit {
        Lit::new(n, false)
    }

    pub fn const_value(&self, lit: Lit) -> Option<bool> {
        lit.is_const().then(|| !lit.is_negated())
    }

    pub fn and(&mut self, children: impl IntoIterator<Item = Lit>) -> Lit {
        self.junction(children, true)
    }

    pub fn or(&mut self, children: impl IntoIterator<Item = Lit>) -> Lit {
        self.junction(children, false)
    }

    fn junction(&mut self, children: impl IntoIterator<Item = Lit>, is_and: bool) -> Lit {
        // Unit of the operation (TRUE for and) and its absorbing element.
        let unit = if is_and { Lit::TRUE } else { Lit::FALSE };
        let mut raw: Vec<Lit> = Vec::new();
        for c in children {
            if c == unit {
                continue;
            }
            if c == !unit {
                return !unit;
            }
            raw.push(c);
        }
        raw.sort_unstable();
        raw.dedup();
        if raw.windows(2).any(|w| w[0] == !w[1]) {
            return !unit;
        }
        // Splice in child junctions of the same kind.
        let mut kids: Vec<Lit> = Vec::with_capacity(raw.len());
        for c in raw {
            match (&self.nodes[c.node() as usize], c.is_negated(), is_and) {
                (Node::And(cs), false, true) | (Node::Or(cs), false, false) => {
                    kids.extend(cs.iter().copied())
                }
                _ => kids.push(c),
            }
        }
        kids.sort_unstable();
        kids.dedup();
        // Complementary literals sit next to each other after sorting.
        if kids.windows(2).any(|w| w[0] == !w[1]) {
            return !unit;
        }
        match kids.len() {
            0 => unit,
            1 => kids[0],
            _ => {
                let rc: Rc<[Lit]> = kids.into();
                self.intern(if is_and { Node::And(rc) } else { Node::Or(rc) })
            }
        }
    }

    pub fn implies(&mut self, a: Lit, b: Lit) -> Lit {
        self.or([!a, b])
    }

    pub fn iff(&mut self, a: Lit, b: Lit) -> Lit {
        let ab = self.implies(a, b);
        let ba = self.implies(b, a);
        self.and([ab, ba])
    }

    /// Quantifier gate. Nested positive gates of the same kind are merged.
    pub fn quant(&mut self, q: Quant, vars: &[VarId], body: Lit) -> Lit {
        if body.is_const() || vars.is_empty() {
            return body;
        }
        let mut all: Vec<VarId> = vars.to_vec();
        let mut body = body;
        if !body.is_negated() {
            if let Node::Quant(q2, inner, b2) = self.node(body).clone() {
                if q2 == q {
                    all.extend(inner.iter().copied());
                    body = b2;
                }
            }
        }
        all.sort_unstable();
        all.dedup();
        self.intern(Node::Quant(q, all.into(), body))
    }

    /// Evaluates a quantifier-free circuit under `assignment` (indexed by
    /// variable). Panics on quantifier gates or unassigned variables.
    pub fn eval(&self, root: Lit, assignment: &[bool]) -> bool {
        let mut memo: HashMap<u32, bool> = HashMap::new();
        self.eval_node(root.node(), assignment, &mut memo) ^ root.is_negated()
    }

    fn eval_node(&self, n: u32, a: &[bool], memo: &mut HashMap<u32, bool>) -> bool {
        if let Some(&v) = memo.get(&n) {
            return v;
        }
        let v = match &self.nodes[n as usize] {
            Node::True => true,
            Node::Var(v) => a[*v as usize],
            Node::And(c) => c
                .iter()
                .all(|l| self.eval_node(l.node(), a, memo) ^ l.is_negated()),
            Node::Or(c) => c
                .iter()
                .any(|l| self.eval_node(l.node(), a, memo) ^ l.is_negated()),
            Node::Quant(..) => panic!("eval on a quantified circuit"),
        };
        memo.insert(n, v);
        v
    }

    /// Gates reachable from `root`, children before parents.
    pub fn topo(&self, root: Lit) -> Vec<u32> {
        let mut order = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![(root.node(), false)];
        while let Some((n, done)) = stack.pop() {
            if done {
                order.push(n);
                continue;
            }
            if std::mem::replace(&mut seen[n as usize], true) {
                continue;
            }
            stack.push((n, true));
            match &self.nodes[n as usize] {
                Node::And(c) | Node::Or(c) => {
                    for l in c.iter().rev() {
                        if !seen[l.node() as usize] {
                            stack.push((l.node(), false));
                        }
                    }
                }
                Node::Quant(_, _, b)
                    if !seen[b.node() as usize] => {
                        stack.push((b.node(), false));
                    }
                _ => {}
            }
        }
        order
    }

    /// Variables occurring (as leaves) below `root`.
    pub fn occurring_vars(&self, root: Lit) -> HashSet<VarId> {
        self.topo(root)
            .into_iter()
            .filter_map(|n| match self.nodes[n as usize] {
                Node::Var(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    /// Variables occurring below `root` that no quantifier gate below
    /// `root` binds.
    pub fn free_vars(&self, root: Lit) -> HashSet<VarId> {
        let mut free = self.occurring_vars(root);
        for n in self.topo(root) {
            if let Node::Quant(_, vs, _) = &self.nodes[n as usize] {
                for v in vs.iter() {
                    free.remove(v);
                }
            }
        }
        free
    }

    /// Replaces free variables by literals. Quantifier gates whose body
    /// changes get fresh copies of their bound variables, so distinct
    /// instances never share witnesses.
    pub fn substitute(&mut self, root: Lit, map: &HashMap<VarId, Lit>) -> Lit {
        let mut memo = HashMap::new();
        let map = map.clone();
        self.subst_rec(root, &map, &mut memo)
    }

    fn subst_rec(
        &mut self,
        lit: Lit,
        map: &HashMap<VarId, Lit>,
        memo: &mut HashMap<u32, Lit>,
    ) -> Lit {
        let n = lit.node();
        if let Some(&r) = memo.get(&n) {
            return r.xor(lit.is_negated());
        }
        let out = match self.nodes[n as usize].clone() {
            Node::True => Lit::TRUE,
            Node::Var(v) => map.get(&v).copied().unwrap_or(Lit::new(n, false)),
            Node::And(c) => {
                let kids: Vec<Lit> = c.iter().map(|&k| self.subst_rec(k, map, memo)).collect();
                self.and(kids)
            }
            Node::Or(c) => {
                let kids: Vec<Lit> = c.iter().map(|&k| self.subst_rec(k, map, memo)).collect();
                self.or(kids)
            }
            Node::Quant(q, vs, body) => {
                let new_body = self.subst_rec(body, map, memo);
                if new_body == body {
                    Lit::new(n, false)
                } else {
                    let mut rename = HashMap::new();
                    let fresh: Vec<VarId> = vs
                        .iter()
                        .map(|&v| {
                            let info = VarInfo {
                                origin: self.vars[v as usize].origin.clone(),
                                copy_of: Some(self.vars[v as usize].copy_of.unwrap_or(v)),
                            };
                            let nv = self.new_var(info);
                            rename.insert(v, self.var(nv));
                            nv
                        })
                        .collect();
                    let renamed = self.subst_rec(new_body, &rename, &mut HashMap::new());
                    self.quant(q, &fresh, renamed)
                }
            }
        };
        memo.insert(n, out);
        out.xor(lit.is_negated())
    }

    /// Whether some quantifier gate below `root` binds a variable that does
    /// not occur below `root`, which [`Circuit::compact`] would drop.
    pub fn has_unused_binders(&self, root: Lit) -> bool {
        let used = self.occurring_vars(root);
        self.topo(root)
            .into_iter()
            .any(|n| match &self.nodes[n as usize] {
                Node::Quant(_, vs, _) => vs.iter().any(|v| !used.contains(v)),
                _ => false,
            })
    }

    /// Copies the part of the circuit reachable from `root` into a fresh
    /// circuit, dropping quantified variables that do not occur in their
    /// scope. Variable ids are preserved. Repeats until nothing changes,
    /// since dropping a binder can enable further folding.
    pub fn compact(&self, root: Lit) -> (Circuit, Lit) {
        let (mut c, mut r) = self.compact_once(root);
        loop {
            let (c2, r2) = c.compact_once(r);
            if c2.num_nodes() == c.num_nodes() {
                return (c2, r2);
            }
            (c, r) = (c2, r2);
        }
    }

    fn compact_once(&self, root: Lit) -> (Circuit, Lit) {
        let mut out = Circuit::new();
        for info in &self.vars {
            out.new_var(info.clone());
        }
        let used = self.occurring_vars(root);
        let mut map: Vec<Lit> = vec![Lit::TRUE; self.nodes.len()];
        let m = |map: &[Lit], l: &Lit| map[l.node() as usize].xor(l.is_negated());
        for n in self.topo(root) {
            let lit = match &self.nodes[n as usize] {
                Node::True => Lit::TRUE,
                Node::Var(v) => out.var(*v),
                Node::And(c) => {
                    let kids: Vec<Lit> = c.iter().map(|l| m(&map, l)).collect();
                    out.and(kids)
                }
                Node::Or(c) => {
                    let kids: Vec<Lit> = c.iter().map(|l| m(&map, l)).collect();
                    out.or(kids)
                }
                Node::Quant(q, vs, b) => {
                    let keep: Vec<VarId> =
                        vs.iter().copied().filter(|v| used.contains(v)).collect();
                    let body = m(&map, b);
                    out.quant(*q, &keep, body)
                }
            };
            map[n as usize] = lit;
        }
        let r = m(&map, &root);
        (out, r)
    }

    /// Whether any quantifier gate reachable from `root` is universal once
    /// negations are pushed to the leaves.
    pub fn has_universal(&self, root: Lit) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![(root.node(), root.is_negated())];
        while let Some((n, neg)) = stack.pop() {
            if !seen.insert((n, neg)) {
                continue;
            }
            match &self.nodes[n as usize] {
                Node::And(c) | Node::Or(c) => {
                    stack.extend(c.iter().map(|l| (l.node(), neg ^ l.is_negated())));
                }
                Node::Quant(q, _, b) => {
                    if (*q == Quant::Forall) != neg {
                        return true;
                    }
                    stack.push((b.node(), neg ^ b.is_negated()));
                }
                _ => {}
            }
        }
        false
    }

    /// The longest alternation of quantifiers on any path from `root`, as
    /// seen after pushing negations to the leaves, with runs of the same
    /// quantifier merged. Empty for a propositional circuit.
    pub fn quantifier_prefix(&self, root: Lit) -> Vec<Quant> {
        // best[(n, neg)] = longest run starting with (Exists, Forall).
        let mut best: HashMap<(u32, bool), [usize; 2]> = HashMap::new();
        let idx = |q: Quant| usize::from(q == Quant::Forall);
        for n in self.topo(root) {
            for neg in [false, true] {
                let get = |l: &Lit, best: &HashMap<(u32, bool), [usize; 2]>| {
                    best[&(l.node(), neg ^ l.is_negated())]
                };
                let v = match &self.nodes[n as usize] {
                    Node::And(c) | Node::Or(c) => c.iter().fold([0, 0], |acc, l| {
                        let b = get(l, &best);
                        [acc[0].max(b[0]), acc[1].max(b[1])]
                    }),
                    Node::Quant(q, _, b) => {
                        let e = if neg { q.dual() } else { *q };
                        let inner = get(b, &best);
                        let mut v = [0, 0];
                        v[idx(e)] = inner[idx(e)].max(inner[idx(e.dual())] + 1);
                        v
                    }
                    _ => [0, 0],
                };
                best.insert((n, neg), v);
            }
        }
        let v = best[&(root.node(), root.is_negated())];
        let (mut q, len) = if v[0] >= v[1] {
            (Quant::Exists, v[0])
        } else {
            (Quant::Forall, v[1])
        };
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(q);
            q = q.dual();
        }
        out
    }

    /// The variables of the outermost existential block: those bound by
    /// existential gates reachable from `root` without crossing a universal
    /// one (negations taken into account).
    pub fn outer_existentials(&self, root: Lit) -> Vec<VarId> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![(root.node(), root.is_negated())];
        while let Some((n, neg)) = stack.pop() {
            if !seen.insert((n, neg)) {
                continue;
            }
            match &self.nodes[n as usize] {
                Node::And(c) | Node::Or(c) => {
                    stack.extend(c.iter().map(|l| (l.node(), neg ^ l.is_negated())));
                }
                Node::Quant(q, vs, b)
                    if (*q == Quant::Exists) != neg => {
                        out.extend(vs.iter().copied());
                        stack.push((b.node(), neg ^ b.is_negated()));
                    }
                _ => {}
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
