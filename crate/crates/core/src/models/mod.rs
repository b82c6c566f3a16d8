//! Memory models as second-order sentences over the event-structure
//! vocabulary.
//!
//! Each generator returns a closed sentence; the test outcome is allowed
//! under the model iff the sentence holds in the structure.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::events::vocab::{JUSTIFIES, READ, SLOC, STRICT_PO, WRITE};
use crate::events::{max_config_size, max_config_weight, mk_final_config, mk_valid_config};
use crate::so::combinators::{acyclic, inj, inv, irrefl, seq, subset, tc, trans};
use crate::so::{Formula, Fresh, Pred, RelExpr, RelStructure, SoError, Term, IDENTITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Model {
    Sc,
    Ra,
    Cpp,
    Jr,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Sc, Model::Ra, Model::Cpp, Model::Jr];

    pub fn id(self) -> &'static str {
        match self {
            Model::Sc => "sc",
            Model::Ra => "ra",
            Model::Cpp => "c11",
            Model::Jr => "jr",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Model::Sc),
            "ra" => Ok(Model::Ra),
            "c11" | "cpp" | "c++" => Ok(Model::Cpp),
            "jr" | "j+r" => Ok(Model::Jr),
            _ => Err(format!("unknown model '{s}' (expected sc, ra, c11 or jr)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelSentence {
    pub model: Model,
    pub sentence: Formula,
    pub params: BTreeMap<String, String>,
}

fn at1(p: &Pred, t: &str) -> Formula {
    Formula::atom(p.clone(), vec![Term::var(t)])
}

fn at2(p: &Pred, a: &str, b: &str) -> Formula {
    Formula::atom(p.clone(), vec![Term::var(a), Term::var(b)])
}

fn rel1(name: &str, t: &str) -> Formula {
    at1(&Pred::rel(name), t)
}

fn rel2(name: &str, a: &str, b: &str) -> Formula {
    at2(&Pred::rel(name), a, b)
}

/// `Mco(X, Yco)`: same-location writes of `X` are related by `Yco` in at
/// least one direction, and nothing else is.
pub fn mk_co(fresh: &mut Fresh, x: &Pred, yco: &Pred) -> Formula {
    let (a, b) = (fresh.fo(), fresh.fo());
    let lhs = Formula::and(vec![
        at1(x, &a),
        at1(x, &b),
        rel1(WRITE, &a),
        rel1(WRITE, &b),
        rel2(SLOC, &a, &b),
        Formula::not(rel2(IDENTITY, &a, &b)),
    ]);
    let rhs = Formula::or(vec![at2(yco, &a, &b), at2(yco, &b, &a)]);
    Formula::forall(a, Formula::forall(b, Formula::iff(lhs, rhs)))
}

/// `Mrf(X, Yrf)`: `Yrf` is injective, contained in `justifies`, and every
/// read of `X` reads from a write of `X`.
pub fn mk_rf(fresh: &mut Fresh, x: &Pred, yrf: &Pred) -> Result<Formula, SoError> {
    let rf = RelExpr::pred(yrf.clone(), 2);
    let injective = inj(fresh, &rf)?;
    let justified = subset(fresh, &rf, &RelExpr::rel(JUSTIFIES, 2))?;
    let (w, r) = (fresh.fo(), fresh.fo());
    let covered = Formula::forall(
        r.clone(),
        Formula::implies(
            Formula::and(vec![rel1(READ, &r), at1(x, &r)]),
            Formula::exists(
                w.clone(),
                Formula::and(vec![rel1(WRITE, &w), at1(x, &w), at2(yrf, &w, &r)]),
            ),
        ),
    );
    Ok(Formula::and(vec![injective, justified, covered]))
}

/// `Mr(Yco, Yrf) = < ∪ Yco ∪ Yrf ∪ fr` with `fr(y, z) = ∃x (Yco(x, z) ∧ Yrf(x, y))`.
fn mr(yco: &Pred, yrf: &Pred) -> RelExpr {
    let (co, rf) = (yco.clone(), yrf.clone());
    RelExpr::custom(2, move |fresh, args| {
        let x = fresh.fo();
        let fr = Formula::exists(
            x.clone(),
            Formula::and(vec![
                Formula::atom(co.clone(), vec![Term::var(&x), args[1].clone()]),
                Formula::atom(rf.clone(), vec![Term::var(&x), args[0].clone()]),
            ]),
        );
        Formula::or(vec![
            Formula::atom(Pred::rel(STRICT_PO), args.to_vec()),
            Formula::atom(co.clone(), args.to_vec()),
            Formula::atom(rf.clone(), args.to_vec()),
            fr,
        ])
    })
}

fn with_witnesses(fresh: &mut Fresh) -> (String, String, String) {
    (fresh.so("X"), fresh.so("Yco"), fresh.so("Yrf"))
}

fn close(x: String, yco: String, yrf: String, body: Formula) -> Formula {
    Formula::exists_so(
        x,
        1,
        Formula::exists_so(yco, 2, Formula::exists_so(yrf, 2, body)),
    )
}

pub fn gen_sc(_rs: &RelStructure) -> Result<ModelSentence, SoError> {
    let fresh = &mut Fresh::new();
    let (x, yco, yrf) = with_witnesses(fresh);
    let (px, pco, prf) = (Pred::var(&x), Pred::var(&yco), Pred::var(&yrf));
    let body = Formula::and(vec![
        mk_final_config(fresh, &px),
        mk_co(fresh, &px, &pco),
        mk_rf(fresh, &px, &prf)?,
        acyclic(fresh, &mr(&pco, &prf))?,
    ]);
    Ok(ModelSentence {
        model: Model::Sc,
        sentence: close(x, yco, yrf, body),
        params: BTreeMap::new(),
    })
}

/// The happens-before constraints shared by release-acquire and the
/// default C++ approximation; `extra` is conjoined inside the `∃Yhb` scope.
fn hb_block(
    fresh: &mut Fresh,
    pco: &Pred,
    prf: &Pred,
    extra: impl FnOnce(&mut Fresh, &Pred) -> Result<Option<Formula>, SoError>,
) -> Result<Formula, SoError> {
    let name = fresh.so("Yhb");
    let phb = Pred::var(&name);
    let (co, rf, hb) = (
        RelExpr::pred(pco.clone(), 2),
        RelExpr::pred(prf.clone(), 2),
        RelExpr::pred(phb.clone(), 2),
    );
    let mut parts = vec![
        subset(fresh, &RelExpr::rel(STRICT_PO, 2), &hb)?,
        subset(fresh, &rf, &hb)?,
        trans(fresh, &hb)?,
        irrefl(fresh, &hb)?,
        irrefl(fresh, &seq(&co, &hb)?)?,
        irrefl(fresh, &seq(&inv(&rf)?, &seq(&co, &hb)?)?)?,
    ];
    if let Some(f) = extra(fresh, &phb)? {
        parts.push(f);
    }
    Ok(Formula::exists_so(name, 2, Formula::and(parts)))
}

pub fn gen_ra(_rs: &RelStructure) -> Result<ModelSentence, SoError> {
    let fresh = &mut Fresh::new();
    let (x, yco, yrf) = with_witnesses(fresh);
    let (px, pco, prf) = (Pred::var(&x), Pred::var(&yco), Pred::var(&yrf));
    let body = Formula::and(vec![
        mk_final_config(fresh, &px),
        mk_co(fresh, &px, &pco),
        mk_rf(fresh, &px, &prf)?,
        acyclic(fresh, &RelExpr::pred(pco.clone(), 2))?,
        hb_block(fresh, &pco, &prf, |_, _| Ok(None))?,
    ]);
    Ok(ModelSentence {
        model: Model::Ra,
        sentence: close(x, yco, yrf, body),
        params: BTreeMap::new(),
    })
}

/// Which consistency predicate stands in for the C++ execution axioms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CppConsistency {
    /// Release-acquire happens-before plus coherence.
    #[default]
    ReleaseAcquire,
    /// Sequential consistency: acyclicity of `< ∪ co ∪ rf ∪ fr`.
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceConfig {
    pub consistency: CppConsistency,
    /// When false the race disjunct is dropped and no outcome catches fire.
    pub catch_fire: bool,
}

impl Default for RaceConfig {
    fn default() -> Self {
        RaceConfig {
            consistency: CppConsistency::ReleaseAcquire,
            catch_fire: true,
        }
    }
}

/// A race in `X`: two distinct same-location events of `X`, at least one a
/// write, unordered by `hb`. `X` must itself be a valid configuration.
fn race(fresh: &mut Fresh, px: &Pred, hb: &RelExpr) -> Formula {
    let valid = mk_valid_config(fresh, px);
    let (a, b) = (fresh.fo(), fresh.fo());
    let (ta, tb) = (Term::var(&a), Term::var(&b));
    let unordered = Formula::and(vec![
        Formula::not(hb.apply(fresh, &[ta.clone(), tb.clone()])),
        Formula::not(hb.apply(fresh, &[tb, ta])),
    ]);
    let pair = Formula::and(vec![
        at1(px, &a),
        at1(px, &b),
        rel2(SLOC, &a, &b),
        Formula::not(rel2(IDENTITY, &a, &b)),
        Formula::or(vec![rel1(WRITE, &a), rel1(WRITE, &b)]),
        unordered,
    ]);
    Formula::and(vec![valid, Formula::exists(a, Formula::exists(b, pair))])
}

pub fn gen_cpp(_rs: &RelStructure, cfg: RaceConfig) -> Result<ModelSentence, SoError> {
    let fresh = &mut Fresh::new();
    let (x, yco, yrf) = with_witnesses(fresh);
    let (px, pco, prf) = (Pred::var(&x), Pred::var(&yco), Pred::var(&yrf));
    let mut parts = vec![mk_co(fresh, &px, &pco), mk_rf(fresh, &px, &prf)?];
    let fin = mk_final_config(fresh, &px);
    match cfg.consistency {
        CppConsistency::ReleaseAcquire => {
            parts.push(acyclic(fresh, &RelExpr::pred(pco.clone(), 2))?);
            let catch_fire = cfg.catch_fire;
            let px2 = px.clone();
            parts.push(hb_block(fresh, &pco, &prf, move |fresh, phb| {
                let mut outcome = vec![fin];
                if catch_fire {
                    outcome.push(race(fresh, &px2, &RelExpr::pred(phb.clone(), 2)));
                }
                Ok(Some(Formula::or(outcome)))
            })?);
        }
        CppConsistency::Sequential => {
            let order = mr(&pco, &prf);
            parts.push(acyclic(fresh, &order)?);
            let mut outcome = vec![fin];
            if cfg.catch_fire {
                // Under sequential consistency, hb is program order plus reads-from.
                let hb = RelExpr::union(vec![
                    RelExpr::rel(STRICT_PO, 2),
                    RelExpr::pred(prf.clone(), 2),
                ])?;
                let name = fresh.so("Yhb");
                let h = RelExpr::var(&name, 2);
                let closure = Formula::and(vec![
                    subset(fresh, &hb, &h)?,
                    trans(fresh, &h)?,
                    race(fresh, &px, &h),
                ]);
                outcome.push(Formula::exists_so(name, 2, closure));
            }
            parts.push(Formula::or(outcome));
        }
    }
    let mut params = BTreeMap::new();
    params.insert("consistency".into(), format!("{:?}", cfg.consistency));
    params.insert("catch_fire".into(), cfg.catch_fire.to_string());
    Ok(ModelSentence {
        model: Model::Cpp,
        sentence: close(x, yco, yrf, Formula::and(parts)),
        params,
    })
}

/// Which event of a `justifies` pair must be a write inside `j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justify {
    /// `P(x) ∧ write(x) ∧ justifies(x, y)`.
    #[default]
    WriteSource,
    /// `P(x) ∧ write(y) ∧ justifies(x, y)`, as printed in the original
    /// formula. Since `y` is a read, no new read is ever justified.
    WriteTarget,
}

impl FromStr for Justify {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" | "write-x" => Ok(Justify::WriteSource),
            "target" | "write-y" => Ok(Justify::WriteTarget),
            _ => Err(format!(
                "unknown justify variant '{s}' (expected source or target)"
            )),
        }
    }
}

/// `j(P, Q)`: every read new in `Q` is justified by a write already in `P`.
pub fn mk_j(fresh: &mut Fresh, p: &Pred, q: &Pred) -> Formula {
    mk_j_with(fresh, Justify::WriteSource, p, q)
}

pub fn mk_j_with(fresh: &mut Fresh, justify: Justify, p: &Pred, q: &Pred) -> Formula {
    let (x, y) = (fresh.fo(), fresh.fo());
    let writer = match justify {
        Justify::WriteSource => &x,
        Justify::WriteTarget => &y,
    };
    Formula::forall(
        y.clone(),
        Formula::implies(
            Formula::and(vec![Formula::not(at1(p, &y)), at1(q, &y), rel1(READ, &y)]),
            Formula::exists(
                x.clone(),
                Formula::and(vec![
                    at1(p, &x),
                    rel1(WRITE, writer),
                    rel2(JUSTIFIES, &x, &y),
                ]),
            ),
        ),
    )
}

fn grows(fresh: &mut Fresh, p: &Pred, q: &Pred) -> Result<Formula, SoError> {
    Ok(Formula::and(vec![
        subset(
            fresh,
            &RelExpr::pred(p.clone(), 1),
            &RelExpr::pred(q.clone(), 1),
        )?,
        mk_valid_config(fresh, p),
        mk_valid_config(fresh, q),
    ]))
}

/// "Always justifies": `j(P, Q) ∧ P ⊆ Q ∧ valid(P) ∧ valid(Q)`.
pub fn mk_aj(fresh: &mut Fresh, p: &Pred, q: &Pred) -> Result<Formula, SoError> {
    mk_aj_with(fresh, Justify::WriteSource, p, q)
}

pub fn mk_aj_with(
    fresh: &mut Fresh,
    justify: Justify,
    p: &Pred,
    q: &Pred,
) -> Result<Formula, SoError> {
    let j = mk_j_with(fresh, justify, p, q);
    Ok(Formula::and(vec![j, grows(fresh, p, q)?]))
}

/// "Always eventually justifies" with closure bound `n`.
pub fn mk_aej(fresh: &mut Fresh, n: usize, p: &Pred, q: &Pred) -> Result<Formula, SoError> {
    mk_aej_with(fresh, n, Justify::WriteSource, p, q)
}

pub fn mk_aej_with(
    fresh: &mut Fresh,
    n: usize,
    justify: Justify,
    p: &Pred,
    q: &Pred,
) -> Result<Formula, SoError> {
    let base = grows(fresh, p, q)?;
    let (xn, yn) = (fresh.so("X"), fresh.so("Y"));
    let (px, py) = (Pred::var(&xn), Pred::var(&yn));
    let aj = move |fresh: &mut Fresh, p: &Pred, q: &Pred| mk_aj_with(fresh, justify, p, q);
    let reach = tc(fresh, n, &aj, p, &px)?;
    let onward = tc(fresh, n, &aj, &px, &py)?;
    let finish = mk_j_with(fresh, justify, &py, q);
    let eventually = Formula::forall_so(
        xn,
        1,
        Formula::implies(
            reach,
            Formula::exists_so(yn, 1, Formula::and(vec![onward, finish])),
        ),
    );
    Ok(Formula::and(vec![base, eventually]))
}

/// Closure bound past which longer `aj` and `aej` chains add nothing.
///
/// Both relations only hold between valid configurations with the first
/// contained in the second, so steps that add nothing can be dropped. A step
/// that adds no read can be merged into the step before it, because `j` only
/// constrains new reads and is monotone in its first argument. So a chain
/// needs at most one step per element of a valid configuration, and at most
/// one step per read plus a leading one. Never exceeds the universe size.
pub fn jr_bound(rs: &RelStructure) -> usize {
    let is_read = |e: usize| rs.relation(READ).is_some_and(|r| r.contains(&[e]));
    let reads = max_config_weight(rs, |e| usize::from(is_read(e)));
    max_config_size(rs).min(reads + 1)
}

/// Jeffrey-Riely with closure bound `n` (default [`jr_bound`]).
pub fn gen_jr(rs: &RelStructure, n: Option<usize>) -> Result<ModelSentence, SoError> {
    gen_jr_with(rs, n, Justify::WriteSource)
}

pub fn gen_jr_with(
    rs: &RelStructure,
    n: Option<usize>,
    justify: Justify,
) -> Result<ModelSentence, SoError> {
    let n = n.unwrap_or_else(|| jr_bound(rs));
    let fresh = &mut Fresh::new();
    let x = fresh.so("X");
    let px = Pred::var(&x);
    let step = move |fresh: &mut Fresh, p: &Pred, q: &Pred| mk_aej_with(fresh, n, justify, p, q);
    let reach = tc(fresh, n, &step, &Pred::rel(crate::so::EMPTY), &px)?;
    let fin = mk_final_config(fresh, &px);
    let mut params = BTreeMap::new();
    params.insert("n".into(), n.to_string());
    params.insert("justify".into(), format!("{justify:?}"));
    Ok(ModelSentence {
        model: Model::Jr,
        sentence: Formula::exists_so(x, 1, Formula::and(vec![reach, fin])),
        params,
    })
}

#[derive(Clone, Debug, Default)]
pub struct ModelOptions {
    pub race: RaceConfig,
    pub jr_n: Option<usize>,
    pub jr_justify: Justify,
}

pub fn gen(model: Model, rs: &RelStructure, opts: &ModelOptions) -> Result<ModelSentence, SoError> {
    match model {
        Model::Sc => gen_sc(rs),
        Model::Ra => gen_ra(rs),
        Model::Cpp => gen_cpp(rs, opts.race),
        Model::Jr => gen_jr_with(rs, opts.jr_n, opts.jr_justify),
    }
}
