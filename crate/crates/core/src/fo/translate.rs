use std::sync::Arc;

use super::{FoError, FoFormula, Pred, Term};
use crate::syntax::{FiniteType, Formula, Var, VarSet};

/// How inclusion and exclusion atoms are translated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AtomStyle {
    /// `x̄ ∈ ȳ ↦ ∃z̄ (T z̄ ∧ ⋀ z_{y_k} = x_k)`.
    #[default]
    Standard,
    /// `x̄ ∈ ȳ ↦ ∃z̄₋ȳ T z̄[ȳ ↦ x̄]`, quantifying only the positions outside `ȳ`.
    Guarded,
}

/// Fresh names for a full copy of the variable list, distinct from every
/// type variable and from the other copies.
fn copy_names(ty: &FiniteType, copy: usize) -> Vec<String> {
    let mut used: Vec<String> = ty.variables().to_vec();
    let mut last = Vec::new();
    for c in 1..=copy {
        last = ty
            .variables()
            .iter()
            .map(|v| {
                let mut name = format!("{v}_{c}");
                while used.contains(&name) {
                    name.push('_');
                }
                used.push(name.clone());
                name
            })
            .collect();
    }
    last
}

struct Names<'a> {
    ty: &'a FiniteType,
    z: Vec<String>,
    z2: Vec<String>,
}

impl<'a> Names<'a> {
    fn new(ty: &'a FiniteType) -> Names<'a> {
        Names {
            ty,
            z: copy_names(ty, 1),
            z2: copy_names(ty, 2),
        }
    }

    fn v(&self, v: Var) -> Term {
        Term::var(self.ty.var_name(v))
    }

    fn z(&self, v: Var) -> Term {
        Term::var(&self.z[v.index()])
    }

    fn z2(&self, v: Var) -> Term {
        Term::var(&self.z2[v.index()])
    }

    fn team(&self, args: Vec<Term>) -> FoFormula {
        FoFormula::Atom(Pred::Team, args)
    }

    fn all(&self) -> impl Iterator<Item = Var> {
        self.ty.vars()
    }
}

/// The first-order translation `φ*` over `τ ∪ {T}`, whose free variables are
/// the type's variables: `(𝔐,T) ⊨_s φ` iff `(𝔐,T) ⊨ φ*(s(v̄))`.
pub fn standard_translation(formula: &Formula, ty: &FiniteType) -> FoFormula {
    translate_with(formula, ty, AtomStyle::Standard)
}

/// [`standard_translation`] with a choice of translation for `∈`/`∉`.
pub fn translate_with(formula: &Formula, ty: &FiniteType, style: AtomStyle) -> FoFormula {
    let names = Names::new(ty);
    go(formula, &names, style)
}

fn go(f: &Formula, n: &Names<'_>, style: AtomStyle) -> FoFormula {
    use Formula::*;
    match f {
        Lit {
            positive,
            rel,
            args,
        } => {
            let atom = FoFormula::Atom(
                Pred::Rel(n.ty.rel_name(*rel).to_string()),
                args.iter().map(|v| n.v(*v)).collect(),
            );
            if *positive {
                atom
            } else {
                FoFormula::not(atom)
            }
        }
        Eq(x, y) => FoFormula::Eq(n.v(*x), n.v(*y)),
        Neq(x, y) => FoFormula::not(FoFormula::Eq(n.v(*x), n.v(*y))),
        Dep { on, target } => dep(*on, *target, n),
        Anon { on, target } => FoFormula::not(dep(*on, *target, n)),
        Incl { left, right } => match style {
            AtomStyle::Standard => incl(left, right, n),
            AtomStyle::Guarded => guarded(true, left, right, n),
        },
        Excl { left, right } => match style {
            AtomStyle::Standard => FoFormula::not(incl(left, right, n)),
            AtomStyle::Guarded => guarded(false, left, right, n),
        },
        Ind { left, right } => ind(left, right, n),
        NInd { left, right } => FoFormula::not(ind(left, right, n)),
        And(a, b) => FoFormula::And(vec![go(a, n, style), go(b, n, style)]),
        Or(a, b) => FoFormula::Or(vec![go(a, n, style), go(b, n, style)]),
        Forall { agree, body } | Exists { agree, body } => {
            let rest: Vec<String> = n
                .all()
                .filter(|v| !agree.contains(*v))
                .map(|v| n.ty.var_name(v).to_string())
                .collect();
            let guard = n.team(n.all().map(|v| n.v(v)).collect());
            let body = go(body, n, style);
            if matches!(f, Forall { .. }) {
                FoFormula::forall(rest, FoFormula::implies(guard, body))
            } else {
                FoFormula::exists(rest, FoFormula::And(vec![guard, body]))
            }
        }
        Not(a) => FoFormula::not(go(a, n, style)),
    }
}

/// `∀z̄₋X (T z̄[X↦v] → ∀z̄′₋X (T z̄′[X↦v] → z_y = z′_y))`, the curried form of
/// `∀z̄₋X ∀z̄′₋X ((T z̄[X↦v] ∧ T z̄′[X↦v]) → z_y = z′_y)`.
fn dep(on: VarSet, y: Var, n: &Names<'_>) -> FoFormula {
    let pick = |v: Var, copy: &dyn Fn(Var) -> Term| if on.contains(v) { n.v(v) } else { copy(v) };
    let z = |v| n.z(v);
    let z2 = |v| n.z2(v);
    let args1 = n.all().map(|v| pick(v, &z)).collect();
    let args2 = n.all().map(|v| pick(v, &z2)).collect();
    let free: Vec<Var> = n.all().filter(|v| !on.contains(*v)).collect();
    let bound1: Vec<String> = free.iter().map(|v| n.z[v.index()].clone()).collect();
    let bound2: Vec<String> = free.iter().map(|v| n.z2[v.index()].clone()).collect();
    FoFormula::forall(
        bound1,
        FoFormula::implies(
            n.team(args1),
            FoFormula::forall(
                bound2,
                FoFormula::implies(n.team(args2), FoFormula::Eq(pick(y, &z), pick(y, &z2))),
            ),
        ),
    )
}

/// `∃z̄ (T z̄ ∧ ⋀_k z_{y_k} = x_k)`.
fn incl(left: &[Var], right: &[Var], n: &Names<'_>) -> FoFormula {
    let mut conj = vec![n.team(n.all().map(|v| n.z(v)).collect())];
    for (x, y) in left.iter().zip(right) {
        conj.push(FoFormula::Eq(n.z(*y), n.v(*x)));
    }
    FoFormula::exists(n.z.clone(), FoFormula::And(conj))
}

fn guarded(positive: bool, left: &[Var], right: &[Var], n: &Names<'_>) -> FoFormula {
    let mut sub: Vec<Option<Var>> = vec![None; n.ty.num_vars()];
    let mut eqs = Vec::new();
    for (x, y) in left.iter().zip(right) {
        match sub[y.index()] {
            None => sub[y.index()] = Some(*x),
            Some(first) if first != *x => eqs.push(FoFormula::Eq(n.v(first), n.v(*x))),
            Some(_) => {}
        }
    }
    let args = n
        .all()
        .map(|v| sub[v.index()].map_or_else(|| n.z(v), |x| n.v(x)))
        .collect();
    let bound: Vec<String> = n
        .all()
        .filter(|v| sub[v.index()].is_none())
        .map(|v| n.z[v.index()].clone())
        .collect();
    let guard = n.team(args);
    if positive {
        let body = if eqs.is_empty() {
            guard
        } else {
            eqs.insert(0, guard);
            FoFormula::And(eqs)
        };
        FoFormula::exists(bound, body)
    } else {
        let consequent = if eqs.is_empty() {
            FoFormula::False
        } else {
            FoFormula::not(FoFormula::and(eqs))
        };
        FoFormula::forall(bound, FoFormula::implies(guard, consequent))
    }
}

/// `∀z̄ (T z̄ → ∃z̄′ (T z̄′ ∧ ⋀_{x∈x̄} z′_x = x ∧ ⋀_{y∈ȳ} z′_y = z_y))`.
fn ind(left: &[Var], right: &[Var], n: &Names<'_>) -> FoFormula {
    let xs: VarSet = left.iter().copied().collect();
    let ys: VarSet = right.iter().copied().collect();
    let mut conj = vec![n.team(n.all().map(|v| n.z2(v)).collect())];
    conj.extend(xs.iter().map(|x| FoFormula::Eq(n.z2(x), n.v(x))));
    conj.extend(ys.iter().map(|y| FoFormula::Eq(n.z2(y), n.z(y))));
    FoFormula::forall(
        n.z.clone(),
        FoFormula::implies(
            n.team(n.all().map(|v| n.z(v)).collect()),
            FoFormula::exists(n.z2.clone(), FoFormula::And(conj)),
        ),
    )
}

/// The guarded translation of a single `∈` or `∉` atom; `None` for any other formula.
pub fn guarded_translation(atom: &Formula, ty: &FiniteType) -> Option<FoFormula> {
    let n = Names::new(ty);
    match atom {
        Formula::Incl { left, right } => Some(guarded(true, left, right, &n)),
        Formula::Excl { left, right } => Some(guarded(false, left, right, &n)),
        _ => None,
    }
}

/// `ϑ_X(x̄, ȳ) = T x̄ ∧ T ȳ ∧ ⋀_{v∈X} x_v = y_v` with its two variable tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theta {
    pub formula: FoFormula,
    pub left: Vec<String>,
    pub right: Vec<String>,
}

pub fn build_theta(agree: VarSet, ty: &FiniteType) -> Theta {
    let left = copy_names(ty, 1);
    let right = copy_names(ty, 2);
    let tuple = |names: &[String]| names.iter().map(|s| Term::var(s)).collect();
    let mut conj = vec![
        FoFormula::Atom(Pred::Team, tuple(&left)),
        FoFormula::Atom(Pred::Team, tuple(&right)),
    ];
    for v in agree.iter() {
        conj.push(FoFormula::Eq(
            Term::var(&left[v.index()]),
            Term::var(&right[v.index()]),
        ));
    }
    Theta {
        formula: FoFormula::And(conj),
        left,
        right,
    }
}

/// Rewrites an equality-free relational first-order formula into a team
/// formula that agrees with it on full teams: `∃x̄ φ ↦ 𝔼_{𝒱∖[x̄]} φ`,
/// `∀x̄ φ ↦ 𝔻_{𝒱∖[x̄]} φ`.
pub fn lift_full_team(formula: &FoFormula, ty: &FiniteType) -> Result<Formula, FoError> {
    lift(formula, true, ty)
}

fn lift(f: &FoFormula, positive: bool, ty: &FiniteType) -> Result<Formula, FoError> {
    let bad = |what: &str| Err(FoError::NotLiftable(what.to_string()));
    let var = |name: &str| {
        ty.var(name)
            .ok_or_else(|| FoError::NotLiftable(format!("`{name}` is not a type variable")))
    };
    let combine = |xs: &[FoFormula], conj: bool| -> Result<Formula, FoError> {
        let parts = xs
            .iter()
            .map(|x| lift(x, positive, ty).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        let out = if conj {
            Formula::conjunction(parts)
        } else {
            Formula::disjunction(parts)
        };
        out.ok_or_else(|| FoError::NotLiftable("empty connective".into()))
    };
    match f {
        FoFormula::True | FoFormula::False => bad("truth constants"),
        FoFormula::Eq(..) => bad("equality"),
        FoFormula::Atom(Pred::Rel(name), args) => {
            let rel = ty
                .rel(name)
                .ok_or_else(|| FoError::UnknownPredicate(name.clone()))?;
            if ty.arity(rel) != args.len() {
                return Err(FoError::Arity {
                    pred: name.clone(),
                    expected: ty.arity(rel),
                    found: args.len(),
                });
            }
            let vars = args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => var(v),
                    Term::Const(c) => Err(FoError::NotLiftable(format!("constant `{c}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::Lit {
                positive,
                rel,
                args: vars,
            })
        }
        FoFormula::Atom(p, _) => bad(&format!("predicate {}", super::print::pred_name(p))),
        FoFormula::Not(a) => lift(a, !positive, ty),
        FoFormula::And(xs) => combine(xs, positive),
        FoFormula::Or(xs) => combine(xs, !positive),
        FoFormula::Implies(a, b) => {
            let (a, b) = (lift(a, !positive, ty)?, lift(b, positive, ty)?);
            Ok(if positive {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            })
        }
        FoFormula::Exists(vs, body) | FoFormula::Forall(vs, body) => {
            let mut bound = VarSet::EMPTY;
            for v in vs {
                bound.insert(var(v)?);
            }
            let agree = ty.all_vars().difference(bound);
            let body = lift(body, positive, ty)?;
            let existential = matches!(f, FoFormula::Exists(..)) == positive;
            Ok(if existential {
                Formula::exists(agree, body)
            } else {
                Formula::forall(agree, body)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::{eval_fo, expand, parse_fo};
    use crate::model::{load_model, Elem};
    use crate::syntax::parse_formula;

    #[test]
    fn quantifier_translation_shape() {
        let ty = FiniteType::of(&[("P", 1)], &["x", "y"]);
        let f = parse_formula("E[x] P(y)", &ty).unwrap();
        assert_eq!(
            standard_translation(&f, &ty).to_string(),
            "exists y. T(x, y) & P(y)"
        );
        let g = parse_formula("in(x ; y)", &ty).unwrap();
        assert_eq!(
            standard_translation(&g, &ty).to_string(),
            "exists x_1 y_1. T(x_1, y_1) & y_1 = x"
        );
        assert_eq!(
            guarded_translation(&g, &ty).unwrap().to_string(),
            "exists x_1. T(x_1, x)"
        );
        let h = parse_formula("notin(x ; y)", &ty).unwrap();
        assert_eq!(
            guarded_translation(&h, &ty).unwrap().to_string(),
            "forall x_1. T(x_1, x) -> false"
        );
        let a = parse_formula("Y[x] y", &ty).unwrap();
        assert!(matches!(standard_translation(&a, &ty), FoFormula::Not(_)));
    }

    #[test]
    fn copy_names_avoid_type_variables() {
        let ty = FiniteType::of(&[], &["x", "x_1", "x_2"]);
        let c1 = copy_names(&ty, 1);
        let c2 = copy_names(&ty, 2);
        for name in c1.iter().chain(&c2) {
            assert!(!ty.variables().contains(name));
        }
        let mut all: Vec<_> = c1.iter().chain(&c2).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn theta_on_local_dep() {
        let m = load_model("universe 0 1 2\nvars x y z\nteam\n0 0 0\n1 1 0\n1 2 1\n2 2 1\nend\n")
            .unwrap();
        let x = m.ty().var("x").unwrap();
        let theta = build_theta(VarSet::singleton(x), m.ty());
        let free: Vec<String> = theta.left.iter().chain(&theta.right).cloned().collect();
        let vals: Vec<Elem> = [1, 1, 0, 1, 2, 1].map(Elem).to_vec();
        assert!(eval_fo(&theta.formula, &expand(&m), &free, &vals).unwrap());
        let vals: Vec<Elem> = [1, 1, 0, 0, 0, 0].map(Elem).to_vec();
        assert!(!eval_fo(&theta.formula, &expand(&m), &free, &vals).unwrap());
    }

    #[test]
    fn lift_rejects_equality() {
        let ty = FiniteType::of(&[("R", 2)], &["x", "y"]);
        let f = parse_fo("forall x. exists y. R(x, y)", &[]).unwrap();
        let lifted = lift_full_team(&f, &ty).unwrap();
        assert_eq!(lifted.display(&ty).to_string(), "A[y] E[x] R(x,y)");
        let g = parse_fo("forall x. x = x", &[]).unwrap();
        assert!(lift_full_team(&g, &ty).is_err());
    }
}
