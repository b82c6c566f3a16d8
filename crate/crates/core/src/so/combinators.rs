//! Combinator library for building second-order formulas.
//!
//! Combinators are macros: every application produces a structural copy of
//! its definition, and every quantifier it introduces binds a variable drawn
//! from a [`Fresh`] generator, so expanding the same combinator twice never
//! captures variables.

use std::fmt;
use std::rc::Rc;

use super::{Formula, Pred, SoError, Term};

/// Deterministic source of fresh bound-variable names.
///
/// Names carry a `#` so they never clash with relation or constant symbols.
#[derive(Debug, Default, Clone)]
pub struct Fresh {
    next: usize,
}

impl Fresh {
    pub fn new() -> Self {
        Fresh::default()
    }

    pub fn fo(&mut self) -> String {
        self.next += 1;
        format!("x#{}", self.next)
    }

    pub fn so(&mut self, hint: &str) -> String {
        self.next += 1;
        format!("{hint}#{}", self.next)
    }

    fn fo_vec(&mut self, k: usize) -> Vec<String> {
        (0..k).map(|_| self.fo()).collect()
    }
}

type CustomRel = Rc<dyn Fn(&mut Fresh, &[Term]) -> Formula>;

#[derive(Clone)]
enum RelKind {
    Pred(Pred),
    Inv(Box<RelExpr>),
    Seq(Box<RelExpr>, Box<RelExpr>),
    Union(Vec<RelExpr>),
    Custom(CustomRel),
}

/// A relation-valued expression: a predicate, or a derived relation such as
/// an inverse or a composition. Applying it to terms yields a formula.
#[derive(Clone)]
pub struct RelExpr {
    arity: usize,
    kind: RelKind,
}

impl fmt::Debug for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RelKind::Pred(p) => write!(f, "{}/{}", p.name(), self.arity),
            RelKind::Inv(p) => write!(f, "inv({p:?})"),
            RelKind::Seq(p, q) => write!(f, "seq({p:?}, {q:?})"),
            RelKind::Union(xs) => write!(f, "union{xs:?}"),
            RelKind::Custom(_) => write!(f, "<custom>/{}", self.arity),
        }
    }
}

impl RelExpr {
    pub fn pred(pred: Pred, arity: usize) -> Self {
        RelExpr {
            arity,
            kind: RelKind::Pred(pred),
        }
    }

    /// Relation symbol of the structure.
    pub fn rel(name: &str, arity: usize) -> Self {
        Self::pred(Pred::rel(name), arity)
    }

    /// Second-order variable.
    pub fn var(name: &str, arity: usize) -> Self {
        Self::pred(Pred::var(name), arity)
    }

    /// A relation defined by an arbitrary formula builder.
    pub fn custom<F>(arity: usize, build: F) -> Self
    where
        F: Fn(&mut Fresh, &[Term]) -> Formula + 'static,
    {
        RelExpr {
            arity,
            kind: RelKind::Custom(Rc::new(build)),
        }
    }

    pub fn union(parts: Vec<RelExpr>) -> Result<Self, SoError> {
        let arity = parts.first().map(|p| p.arity).unwrap_or(2);
        for p in &parts {
            expect_arity(p, arity)?;
        }
        Ok(RelExpr {
            arity,
            kind: RelKind::Union(parts),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn as_pred(&self) -> Option<&Pred> {
        match &self.kind {
            RelKind::Pred(p) => Some(p),
            _ => None,
        }
    }

    /// Instantiates the relation at `args`.
    pub fn apply(&self, fresh: &mut Fresh, args: &[Term]) -> Formula {
        debug_assert_eq!(args.len(), self.arity);
        match &self.kind {
            RelKind::Pred(p) => Formula::atom(p.clone(), args.to_vec()),
            RelKind::Inv(p) => p.apply(fresh, &[args[1].clone(), args[0].clone()]),
            RelKind::Seq(p, q) => {
                let y = fresh.fo();
                let mid = Term::Var(y.clone());
                Formula::exists(
                    y,
                    Formula::and(vec![
                        p.apply(fresh, &[args[0].clone(), mid.clone()]),
                        q.apply(fresh, &[mid, args[1].clone()]),
                    ]),
                )
            }
            RelKind::Union(parts) => {
                Formula::or(parts.iter().map(|p| p.apply(fresh, args)).collect())
            }
            RelKind::Custom(build) => build(fresh, args),
        }
    }
}

fn expect_arity(p: &RelExpr, arity: usize) -> Result<(), SoError> {
    if p.arity != arity {
        return Err(SoError::ArityMismatch {
            symbol: format!("{p:?}"),
            expected: arity,
            found: p.arity,
        });
    }
    Ok(())
}

fn vars(names: &[String]) -> Vec<Term> {
    names.iter().cloned().map(Term::Var).collect()
}

fn forall_all(names: Vec<String>, body: Formula) -> Formula {
    names
        .into_iter()
        .rev()
        .fold(body, |acc, v| Formula::forall(v, acc))
}

/// `P ⊆ Q`: `∀x⃗ (P(x⃗) → Q(x⃗))`.
pub fn subset(fresh: &mut Fresh, p: &RelExpr, q: &RelExpr) -> Result<Formula, SoError> {
    expect_arity(q, p.arity)?;
    let xs = fresh.fo_vec(p.arity);
    let args = vars(&xs);
    let body = Formula::implies(p.apply(fresh, &args), q.apply(fresh, &args));
    Ok(forall_all(xs, body))
}

/// `P = Q`: `∀x⃗ (P(x⃗) ↔ Q(x⃗))`.
pub fn eq(fresh: &mut Fresh, p: &RelExpr, q: &RelExpr) -> Result<Formula, SoError> {
    expect_arity(q, p.arity)?;
    let xs = fresh.fo_vec(p.arity);
    let args = vars(&xs);
    let body = Formula::iff(p.apply(fresh, &args), q.apply(fresh, &args));
    Ok(forall_all(xs, body))
}

/// `∀x ¬P(x, x)`.
pub fn irrefl(fresh: &mut Fresh, p: &RelExpr) -> Result<Formula, SoError> {
    expect_arity(p, 2)?;
    let x = fresh.fo();
    let t = Term::Var(x.clone());
    Ok(Formula::forall(
        x,
        Formula::not(p.apply(fresh, &[t.clone(), t])),
    ))
}

/// `inv(P)(x, y) = P(y, x)`.
pub fn inv(p: &RelExpr) -> Result<RelExpr, SoError> {
    expect_arity(p, 2)?;
    Ok(RelExpr {
        arity: 2,
        kind: RelKind::Inv(Box::new(p.clone())),
    })
}

/// `id(x, y) = (x = y)`.
pub fn id() -> RelExpr {
    RelExpr::rel(super::structure::IDENTITY, 2)
}

/// `seq(P, Q)(x, z) = ∃y (P(x, y) ∧ Q(y, z))`.
pub fn seq(p: &RelExpr, q: &RelExpr) -> Result<RelExpr, SoError> {
    expect_arity(p, 2)?;
    expect_arity(q, 2)?;
    Ok(RelExpr {
        arity: 2,
        kind: RelKind::Seq(Box::new(p.clone()), Box::new(q.clone())),
    })
}

/// `inj(P) = seq(P, inv(P)) ⊆ id`.
pub fn inj(fresh: &mut Fresh, p: &RelExpr) -> Result<Formula, SoError> {
    subset(fresh, &seq(p, &inv(p)?)?, &id())
}

/// `trans(P) = seq(P, P) ⊆ P`.
pub fn trans(fresh: &mut Fresh, p: &RelExpr) -> Result<Formula, SoError> {
    subset(fresh, &seq(p, p)?, p)
}

/// `∃X (P ⊆ X ∧ trans(X) ∧ irrefl(X))`.
pub fn acyclic(fresh: &mut Fresh, p: &RelExpr) -> Result<Formula, SoError> {
    expect_arity(p, 2)?;
    let name = fresh.so("Acyc");
    let x = RelExpr::var(&name, 2);
    let body = Formula::and(vec![
        subset(fresh, p, &x)?,
        trans(fresh, &x)?,
        irrefl(fresh, &x)?,
    ]);
    Ok(Formula::exists_so(name, 2, body))
}

/// A combinator taking two unary predicates to a formula, as used by [`tc`].
pub type SetStep<'a> = dyn Fn(&mut Fresh, &Pred, &Pred) -> Result<Formula, SoError> + 'a;

/// Bounded transitive closure of a set-transformer `step`:
///
/// * `tc_0(R)(P, Q) = eq¹(P, Q)`
/// * `tc_{n+1}(R)(P, Q) = eq¹(P, Q) ∨ ∃X (R(P, X) ∧ tc_n(R)(X, Q))`
pub fn tc(
    fresh: &mut Fresh,
    n: usize,
    step: &SetStep<'_>,
    p: &Pred,
    q: &Pred,
) -> Result<Formula, SoError> {
    let same = eq(
        fresh,
        &RelExpr::pred(p.clone(), 1),
        &RelExpr::pred(q.clone(), 1),
    )?;
    if n == 0 {
        return Ok(same);
    }
    let name = fresh.so("Tc");
    let mid = Pred::var(name.clone());
    let first = step(fresh, p, &mid)?;
    let rest = tc(fresh, n - 1, step, &mid, q)?;
    Ok(Formula::or(vec![
        same,
        Formula::exists_so(name, 1, Formula::and(vec![first, rest])),
    ]))
}

/// Step combinator `subset¹` for use with [`tc`].
pub fn subset_step(fresh: &mut Fresh, p: &Pred, q: &Pred) -> Result<Formula, SoError> {
    subset(
        fresh,
        &RelExpr::pred(p.clone(), 1),
        &RelExpr::pred(q.clone(), 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tc1_subset_matches_hand_expansion() {
        // tc_1(subset¹)(P, Q) =
        //   ∀x1 (P x1 ↔ Q x1) ∨ ∃X (∀x2 (P x2 → X x2) ∧ ∀x3 (X x3 ↔ Q x3))
        let mut fresh = Fresh::new();
        let f = tc(
            &mut fresh,
            1,
            &subset_step,
            &Pred::var("P"),
            &Pred::var("Q"),
        )
        .unwrap();
        let at = |p: &str, v: &str| Formula::atom(Pred::var(p), vec![Term::var(v)]);
        let expected = Formula::or(vec![
            Formula::forall("x#1", Formula::iff(at("P", "x#1"), at("Q", "x#1"))),
            Formula::exists_so(
                "Tc#2",
                1,
                Formula::and(vec![
                    Formula::forall("x#3", Formula::implies(at("P", "x#3"), at("Tc#2", "x#3"))),
                    Formula::forall("x#4", Formula::iff(at("Tc#2", "x#4"), at("Q", "x#4"))),
                ]),
            ),
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let mut fresh = Fresh::new();
        let p1 = RelExpr::var("P", 1);
        let q2 = RelExpr::var("Q", 2);
        assert!(subset(&mut fresh, &p1, &q2).is_err());
        assert!(irrefl(&mut fresh, &p1).is_err());
        assert!(seq(&p1, &q2).is_err());
        assert!(acyclic(&mut fresh, &p1).is_err());
    }

    #[test]
    fn repeated_expansion_uses_distinct_binders() {
        let mut fresh = Fresh::new();
        let p = RelExpr::var("P", 2);
        let a = trans(&mut fresh, &p).unwrap();
        let b = trans(&mut fresh, &p).unwrap();
        assert_ne!(a, b);
        let both = Formula::and(vec![a, b]);
        let fv = both.free_vars();
        assert!(fv.fo.is_empty());
        assert_eq!(fv.so.keys().collect::<Vec<_>>(), vec!["P"]);
    }

    #[test]
    fn tc_size_is_linear() {
        let sizes: Vec<usize> = (0..6)
            .map(|n| {
                let mut fresh = Fresh::new();
                tc(
                    &mut fresh,
                    n,
                    &subset_step,
                    &Pred::var("P"),
                    &Pred::var("Q"),
                )
                .unwrap()
                .size()
            })
            .collect();
        let step = sizes[1] - sizes[0];
        for w in sizes.windows(2) {
            assert_eq!(w[1] - w[0], step);
        }
    }
}
