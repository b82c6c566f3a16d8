//! QDIMACS export by prenexing and Tseitin clausification, and a reader.
//!
//! Prenexing first gives every quantifier gate occurrence its own binder
//! variables, so each gate is reached in one polarity and binds variables
//! no other gate binds. Gates are then placed on alternation levels: a
//! gate's level is the least level of its effective quantifier not below
//! any enclosing gate's level. Even levels are existential.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::circuit::{Circuit, Lit, Node, Quant, VarId, VarInfo};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QdimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Copies `root` so that every quantifier gate is reached in a single
/// polarity and under a single binding of its free variables. Binder
/// variables are fresh per copy.
fn separate(c: &Circuit, root: Lit) -> (Circuit, Lit) {
    struct S<'a> {
        c: &'a Circuit,
        out: Circuit,
        free: HashMap<u32, Vec<VarId>>,
        memo: HashMap<(u32, bool, Vec<VarId>), Lit>,
    }
    impl S<'_> {
        fn free_of(&mut self, n: u32) -> Vec<VarId> {
            if let Some(f) = self.free.get(&n) {
                return f.clone();
            }
            let mut out = match self.c.gate(n) {
                Node::True => vec![],
                Node::Var(v) => vec![*v],
                Node::And(cs) | Node::Or(cs) => cs
                    .clone()
                    .iter()
                    .flat_map(|l| self.free_of(l.node()))
                    .collect(),
                Node::Quant(_, vs, b) => {
                    let vs = vs.clone();
                    self.free_of(b.node())
                        .into_iter()
                        .filter(|v| !vs.contains(v))
                        .collect()
                }
            };
            out.sort_unstable();
            out.dedup();
            self.free.insert(n, out.clone());
            out
        }

        /// `pol` is the polarity of the edge into `n`.
        fn go(&mut self, n: u32, pol: bool, ctx: &HashMap<VarId, VarId>) -> Lit {
            let key_vars: Vec<VarId> = self
                .free_of(n)
                .iter()
                .map(|v| ctx.get(v).copied().unwrap_or(*v))
                .collect();
            let key = (n, pol, key_vars);
            if let Some(&l) = self.memo.get(&key) {
                return l;
            }
            let l = match self.c.gate(n).clone() {
                Node::True => Lit::TRUE,
                Node::Var(v) => self.out.var(ctx.get(&v).copied().unwrap_or(v)),
                Node::And(cs) | Node::Or(cs) => {
                    let kids: Vec<Lit> = cs
                        .iter()
                        .map(|k| {
                            self.go(k.node(), pol ^ k.is_negated(), ctx)
                                .xor(k.is_negated())
                        })
                        .collect();
                    if matches!(self.c.gate(n), Node::And(_)) {
                        self.out.and(kids)
                    } else {
                        self.out.or(kids)
                    }
                }
                Node::Quant(q, vs, b) => {
                    let mut inner = ctx.clone();
                    let fresh: Vec<VarId> = vs
                        .iter()
                        .map(|&v| {
                            let nv = self.out.new_var(self.c.var_info(v).clone());
                            inner.insert(v, nv);
                            nv
                        })
                        .collect();
                    let body = self
                        .go(b.node(), pol ^ b.is_negated(), &inner)
                        .xor(b.is_negated());
                    self.out.quant(q, &fresh, body)
                }
            };
            self.memo.insert(key, l);
            l
        }
    }
    let mut out = Circuit::new();
    // Keep the original ids for free variables.
    for v in 0..c.num_vars() {
        out.new_var(c.var_info(v as VarId).clone());
    }
    let mut s = S {
        c,
        out,
        free: HashMap::new(),
        memo: HashMap::new(),
    };
    let r = s
        .go(root.node(), !root.is_negated(), &HashMap::new())
        .xor(root.is_negated());
    s.out.compact(r)
}

/// A prenex CNF instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qdimacs {
    pub num_vars: usize,
    pub prefix: Vec<(Quant, Vec<usize>)>,
    pub clauses: Vec<Vec<i64>>,
}

impl Qdimacs {
    pub fn to_text(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for (q, vs) in &self.prefix {
            let _ = write!(out, "{}", if *q == Quant::Exists { "e" } else { "a" });
            for v in vs {
                let _ = write!(out, " {v}");
            }
            out.push_str(" 0\n");
        }
        for cl in &self.clauses {
            for l in cl {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

pub fn prenex_cnf(c: &Circuit, root: Lit) -> Qdimacs {
    let (c, root) = separate(c, root);
    if let Some(v) = c.const_value(root) {
        // An empty clause set is true; an empty clause is false.
        return Qdimacs {
            num_vars: 0,
            prefix: vec![],
            clauses: if v { vec![] } else { vec![vec![]] },
        };
    }
    let order = c.topo(root);
    // Parents first: polarity and the level of the enclosing gate.
    // Polarities as a bit set: 1 positive, 2 negative.
    let mut pol: HashMap<u32, u8> = HashMap::new();
    let mut ctx: HashMap<u32, i64> = HashMap::new();
    pol.insert(root.node(), if root.is_negated() { 2 } else { 1 });
    ctx.insert(root.node(), -1);
    let mut levels: BTreeMap<i64, Vec<VarId>> = BTreeMap::new();
    for &n in order.iter().rev() {
        let (p, l) = (pol[&n], ctx[&n]);
        let (out_level, kids): (i64, Vec<Lit>) = match c.gate(n) {
            Node::And(cs) | Node::Or(cs) => (l, cs.to_vec()),
            Node::Quant(q, vs, b) => {
                assert!(p != 3, "quantifier gate reached in both polarities");
                let exists = (*q == Quant::Exists) == (p == 1);
                let parity = if exists { 0 } else { 1 };
                let mut d = l.max(0);
                if d % 2 != parity {
                    d += 1;
                }
                levels.entry(d).or_default().extend(vs.iter().copied());
                (d, vec![*b])
            }
            _ => (l, vec![]),
        };
        for k in kids {
            let kp = if k.is_negated() {
                (p & 1) << 1 | p >> 1
            } else {
                p
            };
            *pol.entry(k.node()).or_insert(0) |= kp;
            let e = ctx.entry(k.node()).or_insert(out_level);
            *e = (*e).max(out_level);
        }
    }

    // Numbering: prefix variables by level, then Tseitin auxiliaries.
    let mut num: HashMap<VarId, i64> = HashMap::new();
    let mut prefix: Vec<(Quant, Vec<usize>)> = Vec::new();
    let mut next = 0i64;
    for (d, vs) in &levels {
        let q = if d % 2 == 0 {
            Quant::Exists
        } else {
            Quant::Forall
        };
        let mut ids = Vec::new();
        for v in vs {
            if !num.contains_key(v) {
                next += 1;
                num.insert(*v, next);
                ids.push(next as usize);
            }
        }
        if !ids.is_empty() {
            prefix.push((q, ids));
        }
    }
    // Free variables are existential at the outermost level.
    let mut free: Vec<usize> = Vec::new();
    for &n in &order {
        if let Node::Var(v) = c.gate(n) {
            if !num.contains_key(v) {
                next += 1;
                num.insert(*v, next);
                free.push(next as usize);
            }
        }
    }
    if !free.is_empty() {
        if matches!(prefix.first(), Some((Quant::Exists, _))) {
            prefix[0].1.splice(0..0, free);
        } else {
            prefix.insert(0, (Quant::Exists, free));
        }
    }

    let mut gate_lit: HashMap<u32, i64> = HashMap::new();
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut aux: Vec<usize> = Vec::new();
    let lit_of = |l: Lit, gate_lit: &HashMap<u32, i64>| -> i64 {
        let x = gate_lit[&l.node()];
        if l.is_negated() {
            -x
        } else {
            x
        }
    };
    for &n in &order {
        let x = match c.gate(n) {
            Node::Var(v) => num[v],
            Node::Quant(_, _, b) => lit_of(*b, &gate_lit),
            Node::And(cs) | Node::Or(cs) => {
                let is_and = matches!(c.gate(n), Node::And(_));
                next += 1;
                aux.push(next as usize);
                let g = next;
                let kids: Vec<i64> = cs.iter().map(|&k| lit_of(k, &gate_lit)).collect();
                // and: g → k, (∧k) → g.  or: k → g, g → (∨k).
                let s = if is_and { 1 } else { -1 };
                for &k in &kids {
                    clauses.push(vec![-s * g, s * k]);
                }
                let mut long = vec![s * g];
                long.extend(kids.iter().map(|&k| -s * k));
                clauses.push(long);
                g
            }
            Node::True => unreachable!("constants are folded away"),
        };
        gate_lit.insert(n, x);
    }
    clauses.push(vec![lit_of(root, &gate_lit)]);
    if !aux.is_empty() {
        match prefix.last_mut() {
            Some((Quant::Exists, ids)) => ids.extend(aux),
            _ => prefix.push((Quant::Exists, aux)),
        }
    }
    Qdimacs {
        num_vars: next as usize,
        prefix,
        clauses,
    }
}

pub fn write_qdimacs(c: &Circuit, root: Lit) -> String {
    prenex_cnf(c, root).to_text()
}

/// Parses QDIMACS into a circuit: a conjunction of clauses under the
/// prefix. Variables missing from the prefix are existential outermost.
pub fn read_qdimacs(text: &str) -> Result<(Circuit, Lit), QdimacsError> {
    let mut c = Circuit::new();
    let mut header: Option<(usize, usize)> = None;
    let mut prefix: Vec<(Quant, Vec<VarId>)> = Vec::new();
    let mut clauses: Vec<Lit> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut bound = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        let err = |msg: String| QdimacsError::Syntax { line, msg };
        if s.is_empty() || s.starts_with('c') {
            continue;
        }
        let mut words = s.split_whitespace();
        let first = words.next().unwrap_or("");
        if first == "p" {
            let fmt = words.next();
            let nv = words.next().and_then(|w| w.parse().ok());
            let nc = words.next().and_then(|w| w.parse().ok());
            match (fmt, nv, nc) {
                (Some("cnf"), Some(nv), Some(nc)) => {
                    header = Some((nv, nc));
                    for _ in 0..nv {
                        c.new_var(VarInfo::default());
                    }
                    bound = vec![false; nv + 1];
                }
                _ => return Err(err("bad header".into())),
            }
            continue;
        }
        let (nv, _) = header.ok_or_else(|| err("missing header".into()))?;
        let var = |w: &str| -> Result<i64, QdimacsError> {
            let x: i64 = w.parse().map_err(|_| err(format!("bad literal '{w}'")))?;
            if x.unsigned_abs() as usize > nv {
                return Err(err(format!("variable {x} out of range")));
            }
            Ok(x)
        };
        if first == "e" || first == "a" {
            if !clauses.is_empty() || !current.is_empty() {
                return Err(err("quantifier after clauses".into()));
            }
            let q = if first == "e" {
                Quant::Exists
            } else {
                Quant::Forall
            };
            let mut vs = Vec::new();
            for w in words {
                match var(w)? {
                    0 => break,
                    x if x < 0 => return Err(err("negative variable in prefix".into())),
                    x => {
                        if std::mem::replace(&mut bound[x as usize], true) {
                            return Err(err(format!("variable {x} quantified twice")));
                        }
                        vs.push((x - 1) as VarId);
                    }
                }
            }
            prefix.push((q, vs));
            continue;
        }
        for w in std::iter::once(first).chain(words) {
            match var(w)? {
                0 => {
                    let cl = c.or(std::mem::take(&mut current));
                    clauses.push(cl);
                }
                x => {
                    let l = c.var((x.unsigned_abs() - 1) as VarId);
                    current.push(l.xor(x < 0));
                }
            }
        }
    }
    let (_, nc) = header.ok_or(QdimacsError::Syntax {
        line: 1,
        msg: "missing header".into(),
    })?;
    if !current.is_empty() {
        let cl = c.or(std::mem::take(&mut current));
        clauses.push(cl);
    }
    if clauses.len() != nc {
        return Err(QdimacsError::Syntax {
            line: text.lines().count(),
            msg: format!("header announces {nc} clauses, found {}", clauses.len()),
        });
    }
    let mut root = c.and(clauses);
    for (q, vs) in prefix.into_iter().rev() {
        root = c.quant(q, &vs, root);
    }
    let free: Vec<VarId> = (1..bound.len())
        .filter(|&x| !bound[x])
        .map(|x| (x - 1) as VarId)
        .collect();
    root = c.quant(Quant::Exists, &free, root);
    Ok((c, root))
}
