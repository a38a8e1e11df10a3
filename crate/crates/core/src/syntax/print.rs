use std::fmt::{self, Write};

use super::{FiniteType, Formula, Var, VarSet};

/// Renders a formula in the surface syntax accepted by [`super::parse_formula`].
pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    ty: &'a FiniteType,
}

impl Formula {
    pub fn display<'a>(&'a self, ty: &'a FiniteType) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, ty }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self.formula, self.ty)
    }
}

fn tuple(out: &mut impl Write, ty: &FiniteType, vars: &[Var], sep: &str) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            out.write_str(sep)?;
        }
        out.write_str(ty.var_name(*v))?;
    }
    Ok(())
}

fn set(out: &mut impl Write, ty: &FiniteType, vars: VarSet) -> fmt::Result {
    let v: Vec<Var> = vars.iter().collect();
    tuple(out, ty, &v, " ")
}

fn write_formula(out: &mut impl Write, f: &Formula, ty: &FiniteType) -> fmt::Result {
    use Formula::*;
    match f {
        Lit {
            positive,
            rel,
            args,
        } => {
            if !positive {
                out.write_char('!')?;
            }
            write!(out, "{}(", ty.rel_name(*rel))?;
            tuple(out, ty, args, ",")?;
            out.write_char(')')
        }
        Eq(x, y) => write!(out, "{} = {}", ty.var_name(*x), ty.var_name(*y)),
        Neq(x, y) => write!(out, "{} != {}", ty.var_name(*x), ty.var_name(*y)),
        Dep { on, target } | Anon { on, target } => {
            out.write_str(if matches!(f, Dep { .. }) { "D[" } else { "Y[" })?;
            set(out, ty, *on)?;
            write!(out, "] {}", ty.var_name(*target))
        }
        Incl { left, right } | Excl { left, right } => {
            out.write_str(if matches!(f, Incl { .. }) {
                "in("
            } else {
                "notin("
            })?;
            tuple(out, ty, left, " ")?;
            out.write_str(" ; ")?;
            tuple(out, ty, right, " ")?;
            out.write_char(')')
        }
        Ind { left, right } | NInd { left, right } => {
            out.write_str(if matches!(f, Ind { .. }) {
                "Ind["
            } else {
                "nInd["
            })?;
            tuple(out, ty, left, " ")?;
            out.write_str("](")?;
            tuple(out, ty, right, " ")?;
            out.write_char(')')
        }
        And(a, b) => {
            child(out, a, ty, matches!(**a, Or(..)))?;
            out.write_str(" & ")?;
            child(out, b, ty, matches!(**b, Or(..) | And(..)))
        }
        Or(a, b) => {
            child(out, a, ty, matches!(**a, And(..)))?;
            out.write_str(" | ")?;
            child(out, b, ty, matches!(**b, Or(..) | And(..)))
        }
        Forall { agree, body } | Exists { agree, body } => {
            out.write_str(if matches!(f, Forall { .. }) {
                "A["
            } else {
                "E["
            })?;
            set(out, ty, *agree)?;
            out.write_str("] ")?;
            child(out, body, ty, matches!(**body, Or(..) | And(..)))
        }
        Not(a) => {
            out.write_str("not ")?;
            child(out, a, ty, matches!(**a, Or(..) | And(..)))
        }
    }
}

fn child(out: &mut impl Write, f: &Formula, ty: &FiniteType, paren: bool) -> fmt::Result {
    if paren {
        out.write_char('(')?;
        write_formula(out, f, ty)?;
        out.write_char(')')
    } else {
        write_formula(out, f, ty)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;
    use super::*;

    #[test]
    fn prints_surface_syntax() {
        let ty = FiniteType::of(&[("P", 1)], &["x", "y", "z"]);
        let (x, y, z) = (Var(0), Var(1), Var(2));
        let p = ty.rel("P").unwrap();
        let dep = Formula::Dep {
            on: VarSet::singleton(y),
            target: x,
        };
        assert_eq!(dep.display(&ty).to_string(), "D[y] x");
        let g = Formula::global(Formula::lit(p, vec![x]));
        assert_eq!(g.display(&ty).to_string(), "A[] P(x)");
        let f = Formula::or(
            Formula::lit(p, vec![x]),
            Formula::and(Formula::lit(p, vec![y]), Formula::lit(p, vec![z])),
        );
        assert_eq!(f.display(&ty).to_string(), "P(x) | (P(y) & P(z))");
    }

    #[test]
    fn nested_connectives_round_trip() {
        let ty = FiniteType::of(&[("P", 1), ("R", 2)], &["x", "y", "z"]);
        for text in [
            "P(x) | (P(y) | P(z))",
            "(P(x) | P(y)) & P(z)",
            "P(x) & (P(y) & !R(x,y))",
            "A[x y] (D[] z | Y[x] y)",
            "E[] not (in(x y ; y x) & notin(z ; x))",
            "Ind[x](y z) | nInd[x y](z)",
            "x = y & x != z",
        ] {
            let f = parse_formula(text, &ty).unwrap();
            let printed = f.display(&ty).to_string();
            assert_eq!(parse_formula(&printed, &ty).unwrap(), f, "{printed}");
        }
    }
}
