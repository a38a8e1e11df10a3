use super::ReduceError;
use crate::syntax::{to_nnf, AtomKind, Formula, OmegaProfile, SyntaxError, Var, VarSet};

enum Rw {
    Const(bool),
    F(Formula),
}

/// Replaces every `x̄ ≠ ȳ` and `x̄ ∉ ȳ` by `⊤` when the two variable tuples
/// differ and by `⊥` otherwise, then simplifies the constants away. On
/// variable-distinguished models the result has the same truth value at
/// every point. A constant result is written `D[v] v` (true) or `Y[v] v`
/// (false) for the first variable `v`.
pub fn rewrite_vd(formula: &Formula) -> Result<Formula, ReduceError> {
    use AtomKind::*;
    let allowed = OmegaProfile::of(&[Dep, Anon, Neq, Excl]);
    let nnf = to_nnf(formula, allowed).map_err(|e| match e {
        SyntaxError::AtomNotInProfile(kind) => ReduceError::OutsideVdFragment(kind),
        e => e.into(),
    })?;
    if let Some(kind) = nnf.omega().iter().find(|k| !allowed.contains(*k)) {
        return Err(ReduceError::OutsideVdFragment(kind));
    }
    Ok(match rw(&nnf) {
        Rw::F(f) => f,
        Rw::Const(b) => {
            let v = Var(0);
            let on = VarSet::singleton(v);
            if b {
                Formula::Dep { on, target: v }
            } else {
                Formula::Anon { on, target: v }
            }
        }
    })
}

fn rw(f: &Formula) -> Rw {
    match f {
        Formula::Neq(x, y) => Rw::Const(x != y),
        Formula::Excl { left, right } => Rw::Const(left != right),
        Formula::And(a, b) => match (rw(a), rw(b)) {
            (Rw::Const(false), _) | (_, Rw::Const(false)) => Rw::Const(false),
            (Rw::Const(true), other) | (other, Rw::Const(true)) => other,
            (Rw::F(a), Rw::F(b)) => Rw::F(Formula::and(a, b)),
        },
        Formula::Or(a, b) => match (rw(a), rw(b)) {
            (Rw::Const(true), _) | (_, Rw::Const(true)) => Rw::Const(true),
            (Rw::Const(false), other) | (other, Rw::Const(false)) => other,
            (Rw::F(a), Rw::F(b)) => Rw::F(Formula::or(a, b)),
        },
        // Both quantifiers range over a set containing the current point.
        Formula::Forall { agree, body } => match rw(body) {
            Rw::F(b) => Rw::F(Formula::forall(*agree, b)),
            c => c,
        },
        Formula::Exists { agree, body } => match rw(body) {
            Rw::F(b) => Rw::F(Formula::exists(*agree, b)),
            c => c,
        },
        other => Rw::F(other.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, FiniteType};

    fn show(text: &str) -> String {
        let ty = FiniteType::of(&[("P", 1)], &["x", "y"]);
        let f = parse_formula(text, &ty).unwrap();
        rewrite_vd(&f).unwrap().display(&ty).to_string()
    }

    #[test]
    fn constants_are_simplified() {
        assert_eq!(show("x != y | P(x)"), "D[x] x");
        assert_eq!(show("x != x"), "Y[x] x");
        assert_eq!(show("(x != x | P(x)) & A[y] notin(x y ; x y)"), "Y[x] x");
        assert_eq!(show("E[x] (notin(x ; y) & D[x] y)"), "E[x] D[x] y");
        assert_eq!(show("not (D[x] y) | P(y)"), "Y[x] y | P(y)");
        let ty = FiniteType::of(&[], &["x", "y"]);
        let f = parse_formula("x = y", &ty).unwrap();
        assert!(rewrite_vd(&f).is_err());
    }
}
