//! Seeded generators and independent oracles shared by the integration tests
//! and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teamlogic::bisim::BisimRelation;
use teamlogic::fo::{FoFormula, Pred, Term};
use teamlogic::model::{Assignment, DependenceModel, Elem, Structure};
use teamlogic::syntax::{AtomKind, FiniteType, Formula, OmegaProfile, RelId, Var, VarSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The negation-closed profiles, in rotation order.
pub const CLOSED_PROFILES: [OmegaProfile; 6] = [
    OmegaProfile::LFD,
    OmegaProfile::LFD_EQ,
    OmegaProfile::ALL,
    OmegaProfile::of(&[AtomKind::Eq, AtomKind::Neq]),
    OmegaProfile::of(&[AtomKind::Incl, AtomKind::Excl]),
    OmegaProfile::of(&[AtomKind::Ind, AtomKind::NInd]),
];

const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

/// A type with 1..=`max_vars` variables and a unary and/or binary relation.
pub fn random_type(r: &mut impl Rng, max_vars: usize) -> FiniteType {
    let n = r.gen_range(1..=max_vars);
    let rels: &[(&str, usize)] = match r.gen_range(0..3) {
        0 => &[("P", 1)],
        1 => &[("R", 2)],
        _ => &[("P", 1), ("R", 2)],
    };
    FiniteType::of(rels, &VAR_NAMES[..n])
}

fn tuples(m: usize, len: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..m as u32).map(move |e| {
                    let mut t = t.clone();
                    t.push(Elem(e));
                    t
                })
            })
            .collect();
    }
    out
}

pub fn random_structure(r: &mut impl Rng, ty: &FiniteType, size: usize) -> Structure {
    let mut st = Structure::numeric(size);
    for (name, arity) in ty.relations() {
        let ts: Vec<Vec<Elem>> = tuples(size, *arity)
            .into_iter()
            .filter(|_| r.gen_bool(0.5))
            .collect();
        st.add_relation(name, *arity, ts).unwrap();
    }
    st
}

pub fn random_team(r: &mut impl Rng, size: usize, vars: usize, max_team: usize) -> Vec<Assignment> {
    let mut all = tuples(size, vars);
    all.shuffle(r);
    let k = r.gen_range(1..=max_team.min(all.len()));
    all.truncate(k);
    all.into_iter().map(Assignment).collect()
}

/// `|M| ≤ max_universe`, `|T| ≤ max_team`.
pub fn random_model(
    r: &mut impl Rng,
    ty: &FiniteType,
    max_universe: usize,
    max_team: usize,
) -> DependenceModel {
    let size = r.gen_range(1..=max_universe);
    let st = random_structure(r, ty, size);
    let team = random_team(r, size, ty.num_vars(), max_team);
    DependenceModel::new(ty.clone(), st, team).unwrap()
}

/// An isomorphic copy with permuted elements and shuffled rows.
pub fn isomorphic_copy(r: &mut impl Rng, m: &DependenceModel) -> DependenceModel {
    let n = m.structure().size();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(r);
    let map = |t: &[Elem]| {
        t.iter()
            .map(|e| Elem(perm[e.0 as usize]))
            .collect::<Vec<_>>()
    };
    let mut st = Structure::numeric(n);
    for rel in m.structure().relations() {
        st.add_relation(&rel.name, rel.arity, rel.tuples.iter().map(|t| map(t)))
            .unwrap();
    }
    let mut team: Vec<Assignment> = m.team().iter().map(|s| Assignment(map(&s.0))).collect();
    team.shuffle(r);
    DependenceModel::new(m.ty().clone(), st, team).unwrap()
}

/// The same structure with a random subset or superset of the team.
pub fn team_variant(r: &mut impl Rng, m: &DependenceModel, max_team: usize) -> DependenceModel {
    let mut team: Vec<Assignment> = m.team().to_vec();
    if r.gen_bool(0.5) && team.len() > 1 {
        team.shuffle(r);
        team.truncate(r.gen_range(1..team.len()));
    } else {
        let extra = random_team(r, m.structure().size(), m.ty().num_vars(), max_team);
        for s in extra {
            if team.len() < max_team && !team.contains(&s) {
                team.push(s);
            }
        }
    }
    DependenceModel::new(m.ty().clone(), m.structure().clone(), team).unwrap()
}

/// A second model of the same type: independent, isomorphic, or a team variant.
pub fn partner_model(
    r: &mut impl Rng,
    m: &DependenceModel,
    max_universe: usize,
    max_team: usize,
) -> DependenceModel {
    match r.gen_range(0..3) {
        0 => random_model(r, m.ty(), max_universe, max_team),
        1 => isomorphic_copy(r, m),
        _ => team_variant(r, m, max_team),
    }
}

fn random_vars(r: &mut impl Rng, n: usize, len: usize) -> Vec<Var> {
    (0..len).map(|_| Var(r.gen_range(0..n) as u32)).collect()
}

fn random_set(r: &mut impl Rng, n: usize) -> VarSet {
    VarSet::from_bits(r.gen_range(0..(1u64 << n)))
}

pub fn random_atom(r: &mut impl Rng, ty: &FiniteType, omega: OmegaProfile) -> Formula {
    let n = ty.num_vars();
    let kinds: Vec<AtomKind> = omega.iter().collect();
    if kinds.is_empty() || r.gen_bool(0.3) {
        let rel = r.gen_range(0..ty.relations().len());
        let args = random_vars(r, n, ty.relations()[rel].1);
        let rel = RelId(rel as u32);
        return if r.gen_bool(0.5) {
            Formula::lit(rel, args)
        } else {
            Formula::neg_lit(rel, args)
        };
    }
    let kind = *kinds.choose(r).unwrap();
    let v = |r: &mut dyn rand::RngCore| Var(r.gen_range(0..n) as u32);
    match kind {
        AtomKind::Dep => Formula::Dep {
            on: random_set(r, n),
            target: v(r),
        },
        AtomKind::Anon => Formula::Anon {
            on: random_set(r, n),
            target: v(r),
        },
        AtomKind::Eq => Formula::Eq(v(r), v(r)),
        AtomKind::Neq => Formula::Neq(v(r), v(r)),
        AtomKind::Incl | AtomKind::Excl => {
            let len = r.gen_range(1..=2);
            let (left, right) = (random_vars(r, n, len), random_vars(r, n, len));
            if kind == AtomKind::Incl {
                Formula::Incl { left, right }
            } else {
                Formula::Excl { left, right }
            }
        }
        AtomKind::Ind | AtomKind::NInd => {
            let (a, b) = (r.gen_range(1..=2), r.gen_range(1..=2));
            let (left, right) = (random_vars(r, n, a), random_vars(r, n, b));
            if kind == AtomKind::Ind {
                Formula::Ind { left, right }
            } else {
                Formula::NInd { left, right }
            }
        }
    }
}

/// A random formula with quantifier rank at most `qr` and roughly `size`
/// connectives. `not` is used only when `with_not` is set.
pub fn random_formula(
    r: &mut impl Rng,
    ty: &FiniteType,
    omega: OmegaProfile,
    qr: usize,
    size: usize,
    with_not: bool,
) -> Formula {
    if size == 0 || r.gen_bool(0.2) {
        return random_atom(r, ty, omega);
    }
    let n = ty.num_vars();
    let choice = r.gen_range(0..if with_not { 5 } else { 4 });
    match choice {
        0 | 1 => {
            let left = r.gen_range(0..size);
            let a = random_formula(r, ty, omega, qr, left, with_not);
            let b = random_formula(r, ty, omega, qr, size - 1 - left, with_not);
            if choice == 0 {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        2 | 3 if qr > 0 => {
            let body = random_formula(r, ty, omega, qr - 1, size - 1, with_not);
            let agree = random_set(r, n);
            if choice == 2 {
                Formula::forall(agree, body)
            } else {
                Formula::exists(agree, body)
            }
        }
        4 => Formula::not(random_formula(r, ty, omega, qr, size - 1, with_not)),
        _ => random_atom(r, ty, omega),
    }
}

/// An equality-free relational first-order sentence over the type's relations
/// using the type's variable names, with quantifier depth at most `depth`.
pub fn random_fo_sentence(r: &mut impl Rng, ty: &FiniteType, depth: usize) -> FoFormula {
    fn go(
        r: &mut impl Rng,
        ty: &FiniteType,
        depth: usize,
        bound: &mut Vec<String>,
        size: usize,
    ) -> FoFormula {
        let must_quantify = bound.is_empty();
        if !must_quantify && (size == 0 || depth == 0 || r.gen_bool(0.25)) {
            let (name, arity) = ty.relations().choose(r).unwrap().clone();
            let args: Vec<Term> = (0..arity)
                .map(|_| Term::Var(bound.choose(r).unwrap().clone()))
                .collect();
            let atom = FoFormula::Atom(Pred::Rel(name), args);
            return if r.gen_bool(0.3) {
                FoFormula::not(atom)
            } else {
                atom
            };
        }
        let pick = if must_quantify || depth > 0 && r.gen_bool(0.5) {
            r.gen_range(0..2)
        } else {
            r.gen_range(2..5)
        };
        match pick {
            0 | 1 => {
                let v = ty.variables().choose(r).unwrap().clone();
                bound.push(v.clone());
                let body = go(
                    r,
                    ty,
                    depth.saturating_sub(1),
                    bound,
                    size.saturating_sub(1),
                );
                bound.pop();
                if pick == 0 {
                    FoFormula::Exists(vec![v], Box::new(body))
                } else {
                    FoFormula::Forall(vec![v], Box::new(body))
                }
            }
            2 => FoFormula::And(vec![
                go(r, ty, depth, bound, size / 2),
                go(r, ty, depth, bound, size / 2),
            ]),
            3 => FoFormula::Or(vec![
                go(r, ty, depth, bound, size / 2),
                go(r, ty, depth, bound, size / 2),
            ]),
            _ => FoFormula::not(go(r, ty, depth, bound, size.saturating_sub(1))),
        }
    }
    go(r, ty, depth, &mut Vec::new(), 6)
}

fn agree_set(a: &Assignment, b: &Assignment) -> BTreeSet<usize> {
    (0..a.0.len()).filter(|&i| a.0[i] == b.0[i]).collect()
}

fn subsets(set: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let items: Vec<usize> = set.iter().copied().collect();
    (0..1usize << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

/// One back-and-forth step that tries every `X ⊆ comvar(t, s)`.
pub fn naive_refine(
    z: &BisimRelation,
    left: &DependenceModel,
    right: &DependenceModel,
) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (s, s2) in z.pairs() {
        let forth = (0..left.len()).all(|t| {
            subsets(&agree_set(left.row(t), left.row(s)))
                .iter()
                .all(|x| {
                    (0..right.len()).any(|t2| {
                        z.contains(t, t2) && x.is_subset(&agree_set(right.row(t2), right.row(s2)))
                    })
                })
        });
        let back = (0..right.len()).all(|t2| {
            subsets(&agree_set(right.row(t2), right.row(s2)))
                .iter()
                .all(|x| {
                    (0..left.len()).any(|t| {
                        z.contains(t, t2) && x.is_subset(&agree_set(left.row(t), left.row(s)))
                    })
                })
        });
        if forth && back {
            out.insert((s, s2));
        }
    }
    out
}

pub fn random_relation(r: &mut impl Rng, left: usize, right: usize) -> BisimRelation {
    let mut z = BisimRelation::empty(left, right);
    for s in 0..left {
        for t in 0..right {
            if r.gen_bool(0.6) {
                z.insert(s, t);
            }
        }
    }
    z
}

/// Wraps a formula in `Arc`s for conjunction helpers.
pub fn arcs(items: Vec<Formula>) -> Vec<Arc<Formula>> {
    items.into_iter().map(Arc::new).collect()
}

pub const LOCAL_DEP: &str = include_str!("../../../../fixtures/local_dep.dm");
pub const INC_LEFT: &str = include_str!("../../../../fixtures/inc_left.dm");
pub const INC_RIGHT: &str = include_str!("../../../../fixtures/inc_right.dm");
pub const NOTGF2_LEFT: &str = include_str!("../../../../fixtures/notgf2_left.dm");
pub const NOTGF2_RIGHT: &str = include_str!("../../../../fixtures/notgf2_right.dm");
