//! Parser for the litmus grammar.
//!
//! ```text
//! test    := name-line init thread ('||' thread)* outcome
//! init    := '{' (LOC '=' INT ';')* '}'
//! thread  := '{' stmt* '}'
//! stmt    := LOC '=' (INT | REG) ';'            store
//!          | REG '=' LOC ';'                     load
//!          | 'if' '(' REG op (INT | REG) ')' thread ('else' thread)?
//! op      := '==' | '!=' | '<' | '<=' | '>' | '>='
//! outcome := 'exists' '(' (clause (('/\' | '&&') clause)*)? ')'
//! clause  := (INT ':')? REG '==' INT
//! ```
//!
//! The first non-blank line is the test name (a leading `LISA` is dropped).
//! Locations are exactly the names declared in the init block; every other
//! name is a thread-local register. `//` starts a line comment.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Clause, CmpOp, Cond, Expr, LitmusTest, Span, Stmt};
use super::LitmusError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

const SYMBOLS: [&str; 16] = [
    "||", "/\\", "&&", "==", "!=", "<=", ">=", "{", "}", "(", ")", ";", "=", "<", ">", ":",
];

fn lex(text: &str, first_line: usize) -> Result<Vec<(Tok, Span)>, LitmusError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let span = Span {
                line: ln + first_line,
                col: i + 1,
            };
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let starts_number = c.is_ascii_digit()
                || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()));
            if starts_number {
                let start = i;
                i += 1;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '.' || chars[i] == '_')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let v = word
                    .parse::<i64>()
                    .map_err(|_| LitmusError::NonInteger { span, text: word })?;
                out.push((Tok::Int(v), span));
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), span));
                continue;
            }
            let rest: String = chars[i..].iter().take(2).collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push((Tok::Sym(s), span));
                    i += s.chars().count();
                }
                None => {
                    return Err(LitmusError::Syntax {
                        span,
                        msg: format!("unexpected character '{c}'"),
                    })
                }
            }
        }
    }
    Ok(out)
}

/// Thread, register, value and position of one outcome clause.
type RawClause = (Option<usize>, String, i64, Span);

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
    locations: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|(_, s)| *s).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LitmusError> {
        Err(LitmusError::Syntax {
            span: self.span(),
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), LitmusError> {
        if self.is_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{s}'"))
        }
    }

    fn ident(&mut self) -> Result<String, LitmusError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn int(&mut self) -> Result<i64, LitmusError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn init(&mut self) -> Result<BTreeMap<String, i64>, LitmusError> {
        self.expect_sym("{")?;
        let mut init = BTreeMap::new();
        while !self.is_sym("}") {
            let span = self.span();
            let loc = self.ident()?;
            self.expect_sym("=")?;
            let v = self.int()?;
            self.expect_sym(";")?;
            if init.insert(loc.clone(), v).is_some() {
                return Err(LitmusError::Syntax {
                    span,
                    msg: format!("location '{loc}' initialised twice"),
                });
            }
        }
        self.expect_sym("}")?;
        Ok(init)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, LitmusError> {
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        while !self.is_sym("}") {
            if self.peek().is_none() {
                return self.err("unterminated block");
            }
            stmts.push(self.stmt()?);
        }
        self.expect_sym("}")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, LitmusError> {
        let span = self.span();
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "if") {
            self.pos += 1;
            self.expect_sym("(")?;
            let reg = self.ident()?;
            if self.locations.contains(&reg) {
                return Err(LitmusError::Syntax {
                    span,
                    msg: format!("conditions test registers, '{reg}' is a location"),
                });
            }
            let op = match self.next() {
                Some(Tok::Sym("==")) => CmpOp::Eq,
                Some(Tok::Sym("!=")) => CmpOp::Ne,
                Some(Tok::Sym("<")) => CmpOp::Lt,
                Some(Tok::Sym("<=")) => CmpOp::Le,
                Some(Tok::Sym(">")) => CmpOp::Gt,
                Some(Tok::Sym(">=")) => CmpOp::Ge,
                _ => {
                    self.pos -= 1;
                    return self.err("expected a comparison operator");
                }
            };
            let rhs = match self.peek() {
                Some(Tok::Ident(r)) if !self.locations.contains(r) => Expr::Reg(self.ident()?),
                _ => Expr::Const(self.int()?),
            };
            self.expect_sym(")")?;
            let then = self.block()?;
            let els = if matches!(self.peek(), Some(Tok::Ident(s)) if s == "else") {
                self.pos += 1;
                self.block()?
            } else {
                Vec::new()
            };
            return Ok(Stmt::If {
                cond: Cond { reg, op, rhs },
                then,
                els,
                span,
            });
        }
        let lhs = self.ident()?;
        self.expect_sym("=")?;
        let rhs_span = self.span();
        let stmt = match self.next() {
            Some(Tok::Int(v)) => {
                if !self.locations.contains(&lhs) {
                    return Err(LitmusError::UnknownLocation { span, name: lhs });
                }
                Stmt::Store {
                    loc: lhs,
                    value: Expr::Const(v),
                    span,
                }
            }
            Some(Tok::Ident(rhs)) => {
                match (self.locations.contains(&lhs), self.locations.contains(&rhs)) {
                    (true, false) => Stmt::Store {
                        loc: lhs,
                        value: Expr::Reg(rhs),
                        span,
                    },
                    (false, true) => Stmt::Load {
                        reg: lhs,
                        loc: rhs,
                        span,
                    },
                    (true, true) => {
                        return Err(LitmusError::Syntax {
                            span,
                            msg: "location-to-location copies are not supported".into(),
                        })
                    }
                    (false, false) => {
                        return Err(LitmusError::UnknownLocation {
                            span: rhs_span,
                            name: rhs,
                        })
                    }
                }
            }
            _ => {
                self.pos -= 1;
                return self.err("expected an integer, register or location");
            }
        };
        self.expect_sym(";")?;
        Ok(stmt)
    }

    fn outcome(&mut self) -> Result<Vec<RawClause>, LitmusError> {
        match self.next() {
            Some(Tok::Ident(s)) if s == "exists" => {}
            _ => {
                self.pos -= 1;
                return self.err("expected 'exists'");
            }
        }
        self.expect_sym("(")?;
        let mut clauses = Vec::new();
        if self.is_sym(")") {
            self.pos += 1;
            return Ok(clauses);
        }
        loop {
            let span = self.span();
            let thread = if matches!(self.peek(), Some(Tok::Int(_))) {
                let t = self.int()?;
                self.expect_sym(":")?;
                Some(usize::try_from(t).map_err(|_| LitmusError::Syntax {
                    span,
                    msg: "negative thread index".into(),
                })?)
            } else {
                None
            };
            let reg = self.ident()?;
            self.expect_sym("==")?;
            let v = self.int()?;
            clauses.push((thread, reg, v, span));
            if self.is_sym("/\\") || self.is_sym("&&") {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(clauses)
    }
}

fn registers_loaded(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match s {
            Stmt::Load { reg, .. } => {
                out.insert(reg.clone());
            }
            Stmt::If { then, els, .. } => {
                registers_loaded(then, out);
                registers_loaded(els, out);
            }
            Stmt::Store { .. } => {}
        }
    }
}

fn check_register_uses(stmts: &[Stmt], loaded: &BTreeSet<String>) -> Result<(), LitmusError> {
    for s in stmts {
        match s {
            Stmt::Store {
                value: Expr::Reg(r),
                span,
                ..
            } if !loaded.contains(r) => {
                return Err(LitmusError::UndefinedRegister {
                    span: *span,
                    name: r.clone(),
                })
            }
            Stmt::If {
                cond,
                then,
                els,
                span,
            } => {
                let rhs = match &cond.rhs {
                    Expr::Reg(r) => Some(r),
                    Expr::Const(_) => None,
                };
                if let Some(r) = std::iter::once(&cond.reg)
                    .chain(rhs)
                    .find(|r| !loaded.contains(*r))
                {
                    return Err(LitmusError::UndefinedRegister {
                        span: *span,
                        name: r.clone(),
                    });
                }
                check_register_uses(then, loaded)?;
                check_register_uses(els, loaded)?;
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<LitmusTest, LitmusError> {
    let mut lines = text.lines().enumerate();
    let (name_idx, name_line) = lines
        .find(|(_, l)| !l.split("//").next().unwrap_or("").trim().is_empty())
        .ok_or(LitmusError::Syntax {
            span: Span { line: 1, col: 1 },
            msg: "empty input".into(),
        })?;
    let name = name_line.split("//").next().unwrap_or("").trim();
    let name = name
        .strip_prefix("LISA ")
        .unwrap_or(name)
        .trim()
        .to_string();
    let body: String = text
        .lines()
        .skip(name_idx + 1)
        .collect::<Vec<_>>()
        .join("\n");
    let toks = lex(&body, name_idx + 2)?;
    let end = Span {
        line: text.lines().count().max(1),
        col: 1,
    };
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        locations: BTreeSet::new(),
    };
    let init = p.init()?;
    p.locations = init.keys().cloned().collect();
    let mut threads = Vec::new();
    if !p.is_sym("{") {
        return Err(LitmusError::NoThreads);
    }
    loop {
        threads.push(p.block()?);
        if p.is_sym("||") {
            p.pos += 1;
        } else {
            break;
        }
    }
    let raw = p.outcome()?;
    if p.peek().is_some() {
        return p.err("trailing input after the final condition");
    }

    let loaded: Vec<BTreeSet<String>> = threads
        .iter()
        .map(|t| {
            let mut s = BTreeSet::new();
            registers_loaded(t, &mut s);
            s
        })
        .collect();
    for (t, stmts) in threads.iter().enumerate() {
        check_register_uses(stmts, &loaded[t])?;
    }
    let mut outcome = Vec::new();
    for (thread, reg, value, span) in raw {
        let thread = match thread {
            Some(t) if t < threads.len() && loaded[t].contains(&reg) => t,
            Some(_) => return Err(LitmusError::UndefinedRegister { span, name: reg }),
            None => {
                let owners: Vec<usize> = (0..threads.len())
                    .filter(|&t| loaded[t].contains(&reg))
                    .collect();
                match owners.as_slice() {
                    [t] => *t,
                    [] => return Err(LitmusError::UndefinedRegister { span, name: reg }),
                    _ => {
                        return Err(LitmusError::Syntax {
                            span,
                            msg: format!("register '{reg}' is ambiguous; qualify it as T:{reg}"),
                        })
                    }
                }
            }
        };
        outcome.push(Clause { thread, reg, value });
    }
    Ok(LitmusTest {
        name,
        init,
        threads,
        outcome,
    })
}
