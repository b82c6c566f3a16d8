//! QCIR-G14 reader and writer.
//!
//! The writer emits cleansed numbering: variables `1..=V` in variable-id
//! order, then gates `V+1..` children first. Leading positive quantifier
//! gates become the prefix; deeper ones stay as quantifier gates.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::circuit::{Circuit, Lit, Node, Quant, VarId, VarInfo};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QcirError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("cyclic definition through '{0}'")]
    Cycle(String),
}

fn quant_word(q: Quant) -> &'static str {
    match q {
        Quant::Exists => "exists",
        Quant::Forall => "forall",
    }
}

pub fn write_qcir(c: &Circuit, root: Lit) -> String {
    write_qcir_counted(c, root).0
}

/// The QCIR text and the number of variables it declares.
pub fn write_qcir_counted(c: &Circuit, root: Lit) -> (String, usize) {
    if c.has_unused_binders(root) {
        let (c, root) = c.compact(root);
        write_compact(&c, root)
    } else {
        write_compact(c, root)
    }
}

fn write_compact(c: &Circuit, root: Lit) -> (String, usize) {
    let mut prefix: Vec<(Quant, Vec<VarId>)> = Vec::new();
    let mut body = root;
    while !body.is_negated() {
        match c.node(body) {
            Node::Quant(q, vs, b) => {
                prefix.push((*q, vs.to_vec()));
                body = *b;
            }
            _ => break,
        }
    }
    let mut vars: Vec<VarId> = c.occurring_vars(body).into_iter().collect();
    for (_, vs) in &prefix {
        vars.extend(vs);
    }
    for n in c.topo(body) {
        if let Node::Quant(_, vs, _) = c.gate(n) {
            vars.extend(vs.iter());
        }
    }
    vars.sort_unstable();
    vars.dedup();
    // Number of each node in the output, 0 while unassigned.
    let mut num: Vec<usize> = vec![0; c.num_nodes()];
    for (i, &v) in vars.iter().enumerate() {
        num[c.var(v).node() as usize] = i + 1;
    }
    let var_num = |v: &VarId, num: &[usize]| num[c.var(*v).node() as usize];
    let mut next = vars.len();
    let mut gates = String::new();
    let push_lit = |out: &mut String, l: Lit, num: &[usize]| {
        if l.is_negated() {
            out.push('-');
        }
        let _ = write!(out, "{}", num[l.node() as usize]);
    };
    for n in c.topo(body) {
        let mut line = String::new();
        match c.gate(n) {
            Node::Var(_) => continue,
            Node::True => line.push_str("and()"),
            Node::And(cs) | Node::Or(cs) => {
                line.push_str(if matches!(c.gate(n), Node::And(_)) {
                    "and("
                } else {
                    "or("
                });
                for (i, &l) in cs.iter().enumerate() {
                    if i > 0 {
                        line.push_str(", ");
                    }
                    push_lit(&mut line, l, &num);
                }
                line.push(')');
            }
            Node::Quant(q, vs, b) => {
                let names: Vec<String> = vs.iter().map(|v| var_num(v, &num).to_string()).collect();
                let _ = write!(line, "{}({}; ", quant_word(*q), names.join(", "));
                push_lit(&mut line, *b, &num);
                line.push(')');
            }
        }
        next += 1;
        num[n as usize] = next;
        let _ = writeln!(gates, "{next} = {line}");
    }

    let mut out = format!("#QCIR-G14 {next}\n");
    for (q, vs) in &prefix {
        let names: Vec<String> = vs.iter().map(|v| var_num(v, &num).to_string()).collect();
        let _ = writeln!(out, "{}({})", quant_word(*q), names.join(", "));
    }
    out.push_str("output(");
    push_lit(&mut out, body, &num);
    out.push_str(")\n");
    out.push_str(&gates);
    (out, vars.len())
}

enum Def {
    Junction(bool, Vec<(bool, String)>),
    Quant(Quant, Vec<String>, (bool, String)),
}

struct Reader {
    defs: HashMap<String, Def>,
    vars: BTreeMap<String, VarId>,
    done: HashMap<String, Lit>,
    active: Vec<String>,
}

impl Reader {
    fn var(&mut self, c: &mut Circuit, name: &str) -> VarId {
        if let Some(&v) = self.vars.get(name) {
            return v;
        }
        let v = c.new_var(VarInfo::default());
        self.vars.insert(name.to_string(), v);
        v
    }

    fn lit(&mut self, c: &mut Circuit, (neg, name): &(bool, String)) -> Result<Lit, QcirError> {
        Ok(self.name(c, name)?.xor(*neg))
    }

    fn name(&mut self, c: &mut Circuit, name: &str) -> Result<Lit, QcirError> {
        if let Some(&l) = self.done.get(name) {
            return Ok(l);
        }
        if self.active.iter().any(|a| a == name) {
            return Err(QcirError::Cycle(name.to_string()));
        }
        if !self.defs.contains_key(name) {
            let v = self.var(c, name);
            return Ok(c.var(v));
        }
        self.active.push(name.to_string());
        let def = self.defs.remove(name).expect("checked above");
        let l = match &def {
            Def::Junction(is_and, kids) => {
                let ls = kids
                    .iter()
                    .map(|k| self.lit(c, k))
                    .collect::<Result<Vec<_>, _>>()?;
                if *is_and {
                    c.and(ls)
                } else {
                    c.or(ls)
                }
            }
            Def::Quant(q, names, body) => {
                let vs: Vec<VarId> = names.iter().map(|n| self.var(c, n)).collect();
                let b = self.lit(c, body)?;
                c.quant(*q, &vs, b)
            }
        };
        self.defs.insert(name.to_string(), def);
        self.active.pop();
        self.done.insert(name.to_string(), l);
        Ok(l)
    }
}

fn split_args(s: &str) -> Vec<String> {
    s.split(',')
        .map(|a| a.trim().to_string())
        .filter(|a| !a.is_empty())
        .collect()
}

fn parse_lit(s: &str, line: usize) -> Result<(bool, String), QcirError> {
    let (neg, name) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    if name.is_empty() || !name.chars().all(|ch| ch.is_alphanumeric() || ch == '_') {
        return Err(QcirError::Syntax {
            line,
            msg: format!("bad literal '{s}'"),
        });
    }
    Ok((neg, name.to_string()))
}

/// Parses QCIR-G14 into a circuit. `free(..)` variables stay unbound.
pub fn read_qcir(text: &str) -> Result<(Circuit, Lit), QcirError> {
    let mut c = Circuit::new();
    let mut r = Reader {
        defs: HashMap::new(),
        vars: BTreeMap::new(),
        done: HashMap::new(),
        active: Vec::new(),
    };
    let mut prefix: Vec<(Quant, Vec<String>)> = Vec::new();
    let mut output: Option<(bool, String)> = None;
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if s.starts_with("#QCIR") {
            saw_header = true;
            continue;
        }
        if s.starts_with('#') {
            continue;
        }
        let syntax = |msg: &str| QcirError::Syntax {
            line,
            msg: msg.to_string(),
        };
        let (lhs, rhs) = match s.split_once('=') {
            Some((a, b)) => (Some(a.trim()), b.trim()),
            None => (None, s),
        };
        let open = rhs.find('(').ok_or_else(|| syntax("expected '('"))?;
        if !rhs.ends_with(')') {
            return Err(syntax("expected ')'"));
        }
        let word = rhs[..open].trim().to_ascii_lowercase();
        let inner = &rhs[open + 1..rhs.len() - 1];
        match (lhs, word.as_str()) {
            (None, "output") => output = Some(parse_lit(inner.trim(), line)?),
            (None, "free") => {
                for n in split_args(inner) {
                    r.var(&mut c, &n);
                }
            }
            (None, "exists") | (None, "forall") => {
                let q = if word == "exists" {
                    Quant::Exists
                } else {
                    Quant::Forall
                };
                prefix.push((q, split_args(inner)));
            }
            (Some(g), "and") | (Some(g), "or") => {
                let kids = split_args(inner)
                    .iter()
                    .map(|a| parse_lit(a, line))
                    .collect::<Result<Vec<_>, _>>()?;
                r.defs
                    .insert(g.to_string(), Def::Junction(word == "and", kids));
            }
            (Some(g), "exists") | (Some(g), "forall") => {
                let (vs, body) = inner
                    .split_once(';')
                    .ok_or_else(|| syntax("expected ';' in quantifier gate"))?;
                let q = if word == "exists" {
                    Quant::Exists
                } else {
                    Quant::Forall
                };
                r.defs.insert(
                    g.to_string(),
                    Def::Quant(q, split_args(vs), parse_lit(body.trim(), line)?),
                );
            }
            _ => return Err(syntax(&format!("unsupported statement '{s}'"))),
        }
    }
    if !saw_header {
        return Err(QcirError::Syntax {
            line: 1,
            msg: "missing #QCIR-G14 header".into(),
        });
    }
    // Variables get ids in name order (numerically when names are numbers).
    let mut names: Vec<String> = prefix
        .iter()
        .flat_map(|(_, ns)| ns.iter().cloned())
        .collect();
    for d in r.defs.values() {
        match d {
            Def::Junction(_, kids) => names.extend(kids.iter().map(|(_, n)| n.clone())),
            Def::Quant(_, vs, (_, b)) => {
                names.extend(vs.iter().cloned());
                names.push(b.clone());
            }
        }
    }
    if let Some((_, n)) = &output {
        names.push(n.clone());
    }
    names.retain(|n| !r.defs.contains_key(n));
    names.sort_by_key(|n| (n.parse::<u64>().ok(), n.clone()));
    names.dedup();
    for n in &names {
        r.var(&mut c, n);
    }
    let prefix_ids: Vec<(Quant, Vec<VarId>)> = prefix
        .iter()
        .map(|(q, names)| (*q, names.iter().map(|n| r.var(&mut c, n)).collect()))
        .collect();
    let out = output.ok_or_else(|| QcirError::Syntax {
        line: text.lines().count(),
        msg: "missing output statement".into(),
    })?;
    let mut root = r.lit(&mut c, &out)?;
    for (q, vs) in prefix_ids.into_iter().rev() {
        root = c.quant(q, &vs, root);
    }
    Ok((c, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::tests::{naive, random_circuit};
    use crate::qbf::translate;
    use crate::qbf::translate::tests::overview;

    #[test]
    fn overview_golden() {
        let (rs, f) = overview();
        let t = translate::translate(&rs, &f).unwrap();
        let text = write_qcir(&t.circuit, t.root);
        assert_eq!(text, include_str!("../../tests/golden/overview.qcir"));
    }

    #[test]
    fn constant_true() {
        let c = Circuit::new();
        assert_eq!(
            write_qcir(&c, Lit::TRUE),
            "#QCIR-G14 1\noutput(1)\n1 = and()\n"
        );
        assert_eq!(
            write_qcir(&c, Lit::FALSE),
            "#QCIR-G14 1\noutput(-1)\n1 = and()\n"
        );
    }

    #[test]
    fn round_trip_keeps_value() {
        for seed in 0..200 {
            let (c, root) = random_circuit(seed, 5);
            let text = write_qcir(&c, root);
            let (c2, r2) = read_qcir(&text).unwrap();
            let a = naive(&c, root, &mut Default::default());
            let b = naive(&c2, r2, &mut Default::default());
            assert_eq!(a, b, "seed {seed}\n{text}");
            assert_eq!(write_qcir(&c2, r2), text, "seed {seed}");
        }
    }

    #[test]
    fn reads_names_and_forward_references() {
        let text = "#QCIR-G14\nforall(a)\noutput(g)\ng = exists(b; h)\n# comment\nh = or(-a, b)\n";
        let (c, root) = read_qcir(text).unwrap();
        assert!(naive(&c, root, &mut Default::default()));
    }

    #[test]
    fn rejects_cycles_and_garbage() {
        assert!(matches!(
            read_qcir("#QCIR-G14\noutput(g)\ng = and(h)\nh = or(g)\n"),
            Err(QcirError::Cycle(_))
        ));
        assert!(matches!(
            read_qcir("output(1)\n"),
            Err(QcirError::Syntax { .. })
        ));
        assert!(matches!(
            read_qcir("#QCIR-G14\noutput(1)\n2 = xyz(1)\n"),
            Err(QcirError::Syntax { .. })
        ));
    }
}
