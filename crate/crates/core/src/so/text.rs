//! S-expression dump and parse for formulas and structures.
//!
//! Formulas:
//!
//! ```text
//! (P t1 .. tk)              atom; P resolves to a bound SO variable, else a relation
//! (not f) (and f..) (or f..) (-> f g) (<-> f g) (nand f g)
//! (forall x f) (exists x f)
//! (forall-so X k f) (exists-so X k f)
//! ```
//!
//! Terms resolve to a bound first-order variable, else a constant.
//!
//! Structures:
//!
//! ```text
//! (structure N (const name elem)* (rel name arity (e..)*)*)
//! ```
//!
//! The per-element constants `a0..` and the built-in relations are implicit.

use std::fmt::{self, Write as _};

use super::{Formula, Pred, RelStructure, SoError, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(xs) => {
                f.write_char('(')?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_char(' ')?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_char(')')
            }
        }
    }
}

fn atom(s: impl Into<String>) -> Sexp {
    Sexp::Atom(s.into())
}

/// Parses one S-expression; `;` starts a line comment.
pub fn parse_sexp(text: &str) -> Result<Sexp, SoError> {
    let mut tokens = Vec::new();
    for line in text.lines() {
        let line = line.split(';').next().unwrap_or("");
        let mut cur = String::new();
        for c in line.chars() {
            match c {
                '(' | ')' => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                    tokens.push(c.to_string());
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
    }
    let mut pos = 0;
    let e = parse_tokens(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(SoError::Syntax(format!("trailing input at token {pos}")));
    }
    Ok(e)
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<Sexp, SoError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| SoError::Syntax("unexpected end of input".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_tokens(tokens, pos)?),
                    None => return Err(SoError::Syntax("unbalanced '('".into())),
                }
            }
        }
        ")" => Err(SoError::Syntax("unexpected ')'".into())),
        _ => Ok(atom(tok.clone())),
    }
}

pub fn formula_to_sexp(f: &Formula) -> Sexp {
    let list = |head: &str, rest: Vec<Sexp>| {
        let mut v = vec![atom(head)];
        v.extend(rest);
        Sexp::List(v)
    };
    match f {
        Formula::Atom(p, args) => {
            let mut v = vec![atom(p.name())];
            v.extend(args.iter().map(|t| atom(t.name())));
            Sexp::List(v)
        }
        Formula::Not(a) => list("not", vec![formula_to_sexp(a)]),
        Formula::And(xs) => list("and", xs.iter().map(formula_to_sexp).collect()),
        Formula::Or(xs) => list("or", xs.iter().map(formula_to_sexp).collect()),
        Formula::Implies(a, b) => list("->", vec![formula_to_sexp(a), formula_to_sexp(b)]),
        Formula::Iff(a, b) => list("<->", vec![formula_to_sexp(a), formula_to_sexp(b)]),
        Formula::Nand(a, b) => list("nand", vec![formula_to_sexp(a), formula_to_sexp(b)]),
        Formula::ForallFo(v, b) => list("forall", vec![atom(v), formula_to_sexp(b)]),
        Formula::ExistsFo(v, b) => list("exists", vec![atom(v), formula_to_sexp(b)]),
        Formula::ForallSo(v, k, b) => list(
            "forall-so",
            vec![atom(v), atom(k.to_string()), formula_to_sexp(b)],
        ),
        Formula::ExistsSo(v, k, b) => list(
            "exists-so",
            vec![atom(v), atom(k.to_string()), formula_to_sexp(b)],
        ),
    }
}

pub fn dump_formula(f: &Formula) -> String {
    formula_to_sexp(f).to_string()
}

pub fn parse_formula(text: &str) -> Result<Formula, SoError> {
    let e = parse_sexp(text)?;
    sexp_to_formula(&e, &mut Vec::new(), &mut Vec::new())
}

fn expect_atom(e: &Sexp) -> Result<&str, SoError> {
    match e {
        Sexp::Atom(a) => Ok(a),
        Sexp::List(_) => Err(SoError::Syntax(format!("expected a name, found {e}"))),
    }
}

fn sexp_to_formula(
    e: &Sexp,
    fo: &mut Vec<String>,
    so: &mut Vec<String>,
) -> Result<Formula, SoError> {
    let items = match e {
        Sexp::List(items) if !items.is_empty() => items,
        _ => return Err(SoError::Syntax(format!("expected a formula, found {e}"))),
    };
    let head = expect_atom(&items[0])?;
    let args = &items[1..];
    let arity_err = |n: usize| SoError::Syntax(format!("'{head}' expects {n} arguments"));
    let mut sub = |e: &Sexp| sexp_to_formula(e, fo, so);
    Ok(match head {
        "not" => {
            if args.len() != 1 {
                return Err(arity_err(1));
            }
            Formula::not(sub(&args[0])?)
        }
        "and" => Formula::and(args.iter().map(&mut sub).collect::<Result<_, _>>()?),
        "or" => Formula::or(args.iter().map(&mut sub).collect::<Result<_, _>>()?),
        "->" | "<->" | "nand" => {
            if args.len() != 2 {
                return Err(arity_err(2));
            }
            let (a, b) = (sub(&args[0])?, sub(&args[1])?);
            match head {
                "->" => Formula::implies(a, b),
                "<->" => Formula::iff(a, b),
                _ => Formula::nand(a, b),
            }
        }
        "forall" | "exists" => {
            if args.len() != 2 {
                return Err(arity_err(2));
            }
            let v = expect_atom(&args[0])?.to_string();
            fo.push(v.clone());
            let body = sexp_to_formula(&args[1], fo, so);
            fo.pop();
            if head == "forall" {
                Formula::forall(v, body?)
            } else {
                Formula::exists(v, body?)
            }
        }
        "forall-so" | "exists-so" => {
            if args.len() != 3 {
                return Err(arity_err(3));
            }
            let v = expect_atom(&args[0])?.to_string();
            let k: usize = expect_atom(&args[1])?
                .parse()
                .map_err(|_| SoError::Syntax(format!("bad arity in {e}")))?;
            so.push(v.clone());
            let body = sexp_to_formula(&args[2], fo, so);
            so.pop();
            if head == "forall-so" {
                Formula::forall_so(v, k, body?)
            } else {
                Formula::exists_so(v, k, body?)
            }
        }
        name => {
            let pred = if so.iter().any(|v| v == name) {
                Pred::var(name)
            } else {
                Pred::rel(name)
            };
            let terms = args
                .iter()
                .map(|a| {
                    let t = expect_atom(a)?;
                    Ok(if fo.iter().any(|v| v == t) {
                        Term::var(t)
                    } else {
                        Term::constant(t)
                    })
                })
                .collect::<Result<Vec<_>, SoError>>()?;
            Formula::atom(pred, terms)
        }
    })
}

pub fn dump_structure(rs: &RelStructure) -> String {
    let mut out = format!("(structure {}", rs.size());
    for (name, &e) in rs.constants() {
        if *name != super::structure::element_name(e) {
            let _ = write!(out, "\n  (const {name} {e})");
        }
    }
    for (name, rel) in rs.relations() {
        if name == super::structure::IDENTITY || name == super::structure::EMPTY {
            continue;
        }
        let _ = write!(out, "\n  (rel {name} {}", rel.arity);
        for t in &rel.tuples {
            let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            let _ = write!(out, " ({})", parts.join(" "));
        }
        out.push(')');
    }
    out.push(')');
    out
}

pub fn parse_structure(text: &str) -> Result<RelStructure, SoError> {
    let e = parse_sexp(text)?;
    let items = match &e {
        Sexp::List(items) if items.len() >= 2 && items[0] == atom("structure") => items,
        _ => return Err(SoError::Syntax("expected (structure N ...)".into())),
    };
    let num = |s: &Sexp| -> Result<usize, SoError> {
        expect_atom(s)?
            .parse()
            .map_err(|_| SoError::Syntax(format!("expected a number, found {s}")))
    };
    let mut rs = RelStructure::new(num(&items[1])?)?;
    for item in &items[2..] {
        let parts = match item {
            Sexp::List(p) if !p.is_empty() => p,
            _ => return Err(SoError::Syntax(format!("unexpected {item}"))),
        };
        match expect_atom(&parts[0])? {
            "const" if parts.len() == 3 => {
                rs.add_constant(expect_atom(&parts[1])?, num(&parts[2])?)?;
            }
            "rel" if parts.len() >= 3 => {
                let name = expect_atom(&parts[1])?;
                let arity = num(&parts[2])?;
                let tuples = parts[3..]
                    .iter()
                    .map(|t| match t {
                        Sexp::List(es) => es.iter().map(num).collect(),
                        _ => Err(SoError::Syntax(format!("expected a tuple, found {t}"))),
                    })
                    .collect::<Result<Vec<Vec<usize>>, _>>()?;
                rs.add_relation(name, arity, tuples)?;
            }
            _ => return Err(SoError::Syntax(format!("unexpected {item}"))),
        }
    }
    Ok(rs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_round_trip() {
        let text = "(exists-so X 1 (and (forall x (forall y (-> (and (ord x y) (X y)) (X x)))) \
                    (forall x (forall y (-> (and (X x) (X y)) (not (conflict x y)))))))";
        let f = parse_formula(text).unwrap();
        assert!(f.is_sentence());
        assert_eq!(dump_formula(&f), text);
        assert_eq!(parse_formula(&dump_formula(&f)).unwrap(), f);
    }

    #[test]
    fn names_resolve_by_scope() {
        let f = parse_formula("(forall x (P x a0))").unwrap();
        assert_eq!(
            f,
            Formula::forall(
                "x",
                Formula::atom(Pred::rel("P"), vec![Term::var("x"), Term::constant("a0")])
            )
        );
    }

    #[test]
    fn structure_round_trip() {
        let mut rs = RelStructure::new(3).unwrap();
        rs.add_relation("ord", 2, vec![vec![0, 1], vec![0, 2]])
            .unwrap();
        rs.add_constant("init", 0).unwrap();
        let text = dump_structure(&rs);
        assert_eq!(parse_structure(&text).unwrap(), rs);
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_formula("(and (P x)").is_err());
        assert!(parse_formula("(forall x)").is_err());
        assert!(parse_structure("(structure x)").is_err());
    }
}
