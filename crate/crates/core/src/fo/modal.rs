use std::collections::BTreeSet;

use super::{FoError, FoFormula, FoStructure, Pred, Term};
use crate::model::{DependenceModel, Elem};
use crate::syntax::{FiniteType, Formula, Var, VarSet};

/// The team seen as a Kripke-style structure: worlds are team rows, `∼_x`
/// relates rows agreeing on `x`, and each occurring `(R, x̄)` becomes a
/// monadic predicate `R_x̄`.
#[derive(Clone, Debug)]
pub struct StandardRelationalModel {
    rows: usize,
    /// Per variable, the value of that variable at each row (the `∼_x` class key).
    sims: Vec<(String, Vec<Elem>)>,
    monadic: Vec<(String, Vec<String>, Vec<bool>)>,
}

impl StandardRelationalModel {
    pub fn worlds(&self) -> usize {
        self.rows
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.sims.iter().map(|(x, _)| x.as_str())
    }

    /// Whether rows `a` and `b` are `∼_x`-related.
    pub fn sim(&self, x: &str, a: usize, b: usize) -> Option<bool> {
        let (_, key) = self.sims.iter().find(|(v, _)| v == x)?;
        Some(key[a] == key[b])
    }

    /// The monadic predicates, as `(relation, argument variables)` pairs.
    pub fn monadic_predicates(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.monadic
            .iter()
            .map(|(r, a, _)| (r.as_str(), a.as_slice()))
    }
}

impl FoStructure for StandardRelationalModel {
    fn domain_size(&self) -> usize {
        self.rows
    }

    fn constant(&self, _token: &str) -> Option<Elem> {
        None
    }

    fn predicate(&self, pred: &Pred) -> Option<(usize, usize)> {
        match pred {
            Pred::Sim(x) => self.sims.iter().position(|(v, _)| v == x).map(|i| (i, 2)),
            Pred::Mon { rel, args } => self
                .monadic
                .iter()
                .position(|(r, a, _)| r == rel && a == args)
                .map(|i| (self.sims.len() + i, 1)),
            _ => None,
        }
    }

    fn holds(&self, handle: usize, args: &[Elem]) -> bool {
        if handle < self.sims.len() {
            let key = &self.sims[handle].1;
            key[args[0].0 as usize] == key[args[1].0 as usize]
        } else {
            self.monadic[handle - self.sims.len()].2[args[0].0 as usize]
        }
    }
}

/// Builds the standard relational model of `model`, with monadic predicates
/// for the relational atoms occurring in `formula`.
pub fn build_standard_relational_model(
    model: &DependenceModel,
    formula: &Formula,
) -> StandardRelationalModel {
    let ty = model.ty();
    let sims = ty
        .vars()
        .map(|v| {
            let key = model.team().iter().map(|s| s.get(v)).collect();
            (ty.var_name(v).to_string(), key)
        })
        .collect();
    let mut occurring = BTreeSet::new();
    formula.visit_atoms(&mut |a| {
        if let Formula::Lit { rel, args, .. } = a {
            occurring.insert((*rel, args.clone()));
        }
    });
    let monadic = occurring
        .into_iter()
        .map(|(rel, args)| {
            let truth = model
                .team()
                .iter()
                .map(|s| model.holds(rel, &s.project(&args)))
                .collect();
            (ty.rel_name(rel).to_string(), names(ty, &args), truth)
        })
        .collect();
    StandardRelationalModel {
        rows: model.len(),
        sims,
        monadic,
    }
}

fn names(ty: &FiniteType, vars: &[Var]) -> Vec<String> {
    vars.iter().map(|v| ty.var_name(*v).to_string()).collect()
}

fn world(i: usize) -> String {
    format!("w{i}")
}

/// `tr^{w0}(φ)`: a formula in one free variable `w0` over the standard
/// relational vocabulary.
pub fn modal_translation(formula: &Formula, ty: &FiniteType) -> Result<FoFormula, FoError> {
    tr(formula, ty, 0, 1)
}

fn sim(ty: &FiniteType, x: Var, a: usize, b: usize) -> FoFormula {
    FoFormula::Atom(
        Pred::Sim(ty.var_name(x).to_string()),
        vec![Term::Var(world(a)), Term::Var(world(b))],
    )
}

fn agree(ty: &FiniteType, set: VarSet, t: usize, s: usize) -> Vec<FoFormula> {
    set.iter().map(|x| sim(ty, x, t, s)).collect()
}

/// `s` is the index of the current world variable, `depth` the next free index.
fn tr(f: &Formula, ty: &FiniteType, s: usize, depth: usize) -> Result<FoFormula, FoError> {
    use Formula::*;
    let not_modal = |f: &Formula| Err(FoError::NotModal(f.display(ty).to_string()));
    let t = depth;
    Ok(match f {
        Lit {
            positive,
            rel,
            args,
        } => {
            let atom = FoFormula::Atom(
                Pred::Mon {
                    rel: ty.rel_name(*rel).to_string(),
                    args: names(ty, args),
                },
                vec![Term::Var(world(s))],
            );
            if *positive {
                atom
            } else {
                FoFormula::not(atom)
            }
        }
        Eq(..) | Neq(..) | Incl { .. } | Excl { .. } => return not_modal(f),
        Dep { on, target } | Anon { on, target } => {
            let body =
                FoFormula::implies(FoFormula::And(agree(ty, *on, t, s)), sim(ty, *target, t, s));
            let d = FoFormula::Forall(vec![world(t)], Box::new(body));
            if matches!(f, Dep { .. }) {
                d
            } else {
                FoFormula::not(d)
            }
        }
        Ind { left, right } | NInd { left, right } => {
            let u = depth + 1;
            let xs: VarSet = left.iter().copied().collect();
            let ys: VarSet = right.iter().copied().collect();
            let mut conj = agree(ty, xs, s, u);
            conj.extend(agree(ty, ys, u, t));
            let i = FoFormula::Forall(
                vec![world(t)],
                Box::new(FoFormula::Exists(
                    vec![world(u)],
                    Box::new(FoFormula::And(conj)),
                )),
            );
            if matches!(f, Ind { .. }) {
                i
            } else {
                FoFormula::not(i)
            }
        }
        And(a, b) => FoFormula::And(vec![tr(a, ty, s, depth)?, tr(b, ty, s, depth)?]),
        Or(a, b) => FoFormula::Or(vec![tr(a, ty, s, depth)?, tr(b, ty, s, depth)?]),
        Forall { agree: x, body } => {
            let body = tr(body, ty, t, depth + 1)?;
            let body = if x.is_empty() {
                body
            } else {
                FoFormula::implies(FoFormula::and(agree(ty, *x, t, s)), body)
            };
            FoFormula::Forall(vec![world(t)], Box::new(body))
        }
        Exists { agree: x, body } => {
            let mut conj = agree(ty, *x, t, s);
            conj.push(tr(body, ty, t, depth + 1)?);
            FoFormula::Exists(vec![world(t)], Box::new(FoFormula::and(conj)))
        }
        Not(a) => FoFormula::not(tr(a, ty, s, depth)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::eval_fo;
    use crate::model::load_model;
    use crate::syntax::parse_formula;

    #[test]
    fn dependence_atom_shape() {
        let ty = FiniteType::of(&[], &["x", "y"]);
        let f = parse_formula("D[x] y", &ty).unwrap();
        assert_eq!(
            modal_translation(&f, &ty).unwrap().to_string(),
            "forall w1. Sim[x](w1, w0) -> Sim[y](w1, w0)"
        );
        let g = parse_formula("A[] D[x] y", &ty).unwrap();
        assert_eq!(
            modal_translation(&g, &ty).unwrap().to_string(),
            "forall w1. forall w2. Sim[x](w2, w1) -> Sim[y](w2, w1)"
        );
        assert!(matches!(
            modal_translation(&parse_formula("x = y", &ty).unwrap(), &ty),
            Err(FoError::NotModal(_))
        ));
    }

    #[test]
    fn similarity_is_an_equivalence() {
        let m = load_model("universe 0 1 2\nvars x y z\nteam\n0 0 0\n1 1 0\n1 2 1\n2 2 1\nend\n")
            .unwrap();
        let f = parse_formula("D[y] x", m.ty()).unwrap();
        let srm = build_standard_relational_model(&m, &f);
        let n = srm.worlds();
        for x in ["x", "y", "z"] {
            for a in 0..n {
                assert_eq!(srm.sim(x, a, a), Some(true));
                for b in 0..n {
                    assert_eq!(srm.sim(x, a, b), srm.sim(x, b, a));
                    for c in 0..n {
                        if srm.sim(x, a, b) == Some(true) && srm.sim(x, b, c) == Some(true) {
                            assert_eq!(srm.sim(x, a, c), Some(true));
                        }
                    }
                }
            }
        }
        let tr = modal_translation(&f, m.ty()).unwrap();
        let truth: Vec<bool> = (0..n)
            .map(|r| eval_fo(&tr, &srm, &["w0".to_string()], &[Elem(r as u32)]).unwrap())
            .collect();
        assert_eq!(truth, [true, true, false, false]);
    }
}
