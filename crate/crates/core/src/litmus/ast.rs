use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Source position (1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Const(i64),
    Reg(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cond {
    pub reg: String,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Reg(r) => f.write_str(r),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stmt {
    Store {
        loc: String,
        value: Expr,
        span: Span,
    },
    Load {
        reg: String,
        loc: String,
        span: Span,
    },
    If {
        cond: Cond,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
        span: Span,
    },
}

/// One conjunct of the final condition: `thread:reg == value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub thread: usize,
    pub reg: String,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LitmusTest {
    pub name: String,
    pub init: BTreeMap<String, i64>,
    pub threads: Vec<Vec<Stmt>>,
    pub outcome: Vec<Clause>,
}

impl LitmusTest {
    /// Clauses of the final condition that mention `thread`.
    pub fn clauses_for(&self, thread: usize) -> impl Iterator<Item = &Clause> {
        self.outcome.iter().filter(move |c| c.thread == thread)
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], indent: usize) -> fmt::Result {
    let pad = "  ".repeat(indent);
    for s in stmts {
        match s {
            Stmt::Store { loc, value, .. } => writeln!(f, "{pad}{loc} = {value};")?,
            Stmt::Load { reg, loc, .. } => writeln!(f, "{pad}{reg} = {loc};")?,
            Stmt::If {
                cond, then, els, ..
            } => {
                writeln!(
                    f,
                    "{pad}if ({} {} {}) {{",
                    cond.reg,
                    cond.op.symbol(),
                    cond.rhs
                )?;
                write_block(f, then, indent + 1)?;
                if els.is_empty() {
                    writeln!(f, "{pad}}}")?;
                } else {
                    writeln!(f, "{pad}}} else {{")?;
                    write_block(f, els, indent + 1)?;
                    writeln!(f, "{pad}}}")?;
                }
            }
        }
    }
    Ok(())
}

/// Renders the test in the litmus grammar accepted by [`super::parse`].
impl fmt::Display for LitmusTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        let init: Vec<String> = self
            .init
            .iter()
            .map(|(l, v)| format!("{l} = {v};"))
            .collect();
        writeln!(f, "{{ {} }}", init.join(" "))?;
        for (i, t) in self.threads.iter().enumerate() {
            if i > 0 {
                writeln!(f, "||")?;
            }
            writeln!(f, "{{")?;
            write_block(f, t, 1)?;
            writeln!(f, "}}")?;
        }
        let clauses: Vec<String> = self
            .outcome
            .iter()
            .map(|c| format!("{}:{} == {}", c.thread, c.reg, c.value))
            .collect();
        writeln!(f, "exists ({})", clauses.join(" /\\ "))
    }
}
