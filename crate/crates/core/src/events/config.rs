use super::vocab::{CONFLICT, FINAL, PO};
use crate::so::{Formula, Fresh, Pred, RelStructure, Term};

fn at(p: &Pred, t: &str) -> Formula {
    Formula::atom(p.clone(), vec![Term::var(t)])
}

fn rel2(name: &str, a: &str, b: &str) -> Formula {
    Formula::atom(Pred::rel(name), vec![Term::var(a), Term::var(b)])
}

fn rel1(name: &str, a: &str) -> Formula {
    Formula::atom(Pred::rel(name), vec![Term::var(a)])
}

/// `valid(X)`: `X` is conflict-free and downward closed under `≤`.
pub fn mk_valid_config(fresh: &mut Fresh, x: &Pred) -> Formula {
    let (a, b) = (fresh.fo(), fresh.fo());
    let conflict_free = Formula::forall(
        a.clone(),
        Formula::forall(
            b.clone(),
            Formula::implies(
                Formula::and(vec![at(x, &a), at(x, &b)]),
                Formula::not(rel2(CONFLICT, &a, &b)),
            ),
        ),
    );
    let (c, d) = (fresh.fo(), fresh.fo());
    let down_closed = Formula::forall(
        d.clone(),
        Formula::implies(
            at(x, &d),
            Formula::forall(c.clone(), Formula::implies(rel2(PO, &c, &d), at(x, &c))),
        ),
    );
    Formula::and(vec![conflict_free, down_closed])
}

/// `final(X)`: `valid(X)` and every final event is in `X` or conflicts with
/// a final event in `X`.
pub fn mk_final_config(fresh: &mut Fresh, x: &Pred) -> Formula {
    let valid = mk_valid_config(fresh, x);
    let (a, b) = (fresh.fo(), fresh.fo());
    let covered = Formula::forall(
        a.clone(),
        Formula::implies(
            Formula::and(vec![rel1(FINAL, &a), Formula::not(at(x, &a))]),
            Formula::exists(
                b.clone(),
                Formula::and(vec![rel2(CONFLICT, &a, &b), rel1(FINAL, &b), at(x, &b)]),
            ),
        ),
    );
    Formula::and(vec![valid, covered])
}

/// Size of the largest valid configuration of a structure over the event
/// vocabulary.
pub fn max_config_size(rs: &RelStructure) -> usize {
    max_config_weight(rs, |_| 1)
}

/// Largest total `weight` of a valid configuration.
pub fn max_config_weight(rs: &RelStructure, weight: impl Fn(usize) -> usize) -> usize {
    let n = rs.size();
    let has =
        |name: &str, a: usize, b: usize| rs.relation(name).is_some_and(|r| r.contains(&[a, b]));
    let preds: Vec<Vec<usize>> = (0..n)
        .map(|d| (0..n).filter(|&c| c != d && has(PO, c, d)).collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&e| preds[e].len());
    let conflicts: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| has(CONFLICT, a, b) || has(CONFLICT, b, a))
                .collect()
        })
        .collect();
    let weights: Vec<usize> = order.iter().map(|&e| weight(e)).collect();
    // rest[i]: weight still available from position i on.
    let mut rest = vec![0; n + 1];
    for i in (0..n).rev() {
        rest[i] = rest[i + 1] + weights[i];
    }

    struct Search<'a> {
        order: &'a [usize],
        preds: &'a [Vec<usize>],
        conflicts: &'a [Vec<usize>],
        weights: &'a [usize],
        rest: &'a [usize],
        inside: Vec<bool>,
        best: usize,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, total: usize) {
            if i == self.order.len() {
                self.best = self.best.max(total);
                return;
            }
            if total + self.rest[i] <= self.best {
                return;
            }
            let e = self.order[i];
            if self.preds[e].iter().all(|&p| self.inside[p])
                && !self.conflicts[e].iter().any(|&c| self.inside[c])
            {
                self.inside[e] = true;
                self.go(i + 1, total + self.weights[i]);
                self.inside[e] = false;
            }
            self.go(i + 1, total);
        }
    }

    let mut s = Search {
        order: &order,
        preds: &preds,
        conflicts: &conflicts,
        weights: &weights,
        rest: &rest,
        inside: vec![false; n],
        best: 0,
    };
    s.go(0, 0);
    s.best
}
