//! Seeded random second-order sentences and structures.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use somm_core::qbf::{self, translate, Engine, Limits};
use somm_core::so::{Formula, Pred, RelStructure, Term};

#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    pub max_size: usize,
    pub max_so_arity: usize,
    pub depth: usize,
}

pub const SMALL: Bounds = Bounds {
    max_size: 3,
    max_so_arity: 2,
    depth: 4,
};

/// A structure with a unary `p`, a binary `r` and a constant `c`.
pub fn structure(rng: &mut ChaCha8Rng, max_size: usize) -> RelStructure {
    let n = rng.gen_range(1..=max_size);
    let mut rs = RelStructure::new(n).unwrap();
    let p: Vec<Vec<usize>> = (0..n)
        .filter(|_| rng.gen_bool(0.5))
        .map(|a| vec![a])
        .collect();
    let mut r = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(0.4) {
                r.push(vec![a, b]);
            }
        }
    }
    rs.add_relation("p", 1, p).unwrap();
    rs.add_relation("r", 2, r).unwrap();
    rs.add_constant("c", rng.gen_range(0..n)).unwrap();
    rs
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    fo: Vec<String>,
    so: Vec<(String, usize)>,
    fresh: usize,
    bounds: Bounds,
}

impl Gen<'_> {
    fn term(&mut self) -> Term {
        if self.fo.is_empty() || self.rng.gen_bool(0.15) {
            Term::constant("c")
        } else {
            Term::var(self.fo[self.rng.gen_range(0..self.fo.len())].clone())
        }
    }

    fn atom(&mut self) -> Formula {
        let pick = self.rng.gen_range(0..3 + self.so.len());
        let (pred, arity) = match pick {
            0 => (Pred::rel("p"), 1),
            1 => (Pred::rel("r"), 2),
            2 => return Formula::atom(Pred::rel("="), vec![self.term(), self.term()]),
            i => {
                let (name, k) = self.so[i - 3].clone();
                (Pred::var(name), k)
            }
        };
        let args = (0..arity).map(|_| self.term()).collect();
        Formula::atom(pred, args)
    }

    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..9) {
            0 => self.atom(),
            1 => Formula::not(self.formula(depth - 1)),
            2 => Formula::and(vec![self.formula(depth - 1), self.formula(depth - 1)]),
            3 => Formula::or(vec![self.formula(depth - 1), self.formula(depth - 1)]),
            4 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            5 => Formula::iff(self.formula(depth - 1), self.formula(depth - 1)),
            6 | 7 => {
                let v = self.name("x");
                self.fo.push(v.clone());
                let body = self.formula(depth - 1);
                self.fo.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                }
            }
            _ => {
                let v = self.name("X");
                let k = self.rng.gen_range(1..=self.bounds.max_so_arity);
                self.so.push((v.clone(), k));
                let body = self.formula(depth - 1);
                self.so.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::forall_so(v, k, body)
                } else {
                    Formula::exists_so(v, k, body)
                }
            }
        }
    }
}

/// A random sentence within `bounds`, paired with a structure for it.
pub fn pair(seed: u64, bounds: Bounds) -> (RelStructure, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rs = structure(&mut rng, bounds.max_size);
    let mut g = Gen {
        rng: &mut rng,
        fo: Vec::new(),
        so: Vec::new(),
        fresh: 0,
        bounds,
    };
    let f = g.formula(bounds.depth);
    (rs, f)
}

/// Verdict of the embedded pipeline: translation then the given engine.
pub fn embedded(rs: &RelStructure, f: &Formula, engine: Engine) -> bool {
    let mut t = translate(rs, f).unwrap();
    qbf::solve(engine, &mut t.circuit, t.root, Limits::none())
        .unwrap()
        .value
}
