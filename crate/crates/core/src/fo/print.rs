use std::fmt::{self, Write};

use super::{FoFormula, Pred, Term};

pub(crate) fn pred_name(p: &Pred) -> String {
    match p {
        Pred::Rel(r) => r.clone(),
        Pred::Team => "T".into(),
        Pred::Sim(x) => format!("Sim[{x}]"),
        Pred::Mon { rel, args } => format!("{rel}[{}]", args.join(" ")),
    }
}

fn term(out: &mut impl Write, t: &Term) -> fmt::Result {
    match t {
        Term::Var(v) => out.write_str(v),
        Term::Const(c) => write!(out, "'{c}'"),
    }
}

fn prec(f: &FoFormula) -> u8 {
    match f {
        FoFormula::Implies(..) | FoFormula::Exists(..) | FoFormula::Forall(..) => 0,
        FoFormula::Or(xs) if xs.len() > 1 => 1,
        FoFormula::And(xs) if xs.len() > 1 => 2,
        FoFormula::Or(xs) | FoFormula::And(xs) if xs.len() == 1 => prec(&xs[0]),
        _ => 3,
    }
}

fn write_fo(out: &mut impl Write, f: &FoFormula, need: u8) -> fmt::Result {
    if prec(f) < need {
        out.write_char('(')?;
        write_fo(out, f, 0)?;
        return out.write_char(')');
    }
    match f {
        FoFormula::True => out.write_str("true"),
        FoFormula::False => out.write_str("false"),
        FoFormula::Atom(p, args) => {
            write!(out, "{}(", pred_name(p))?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                term(out, a)?;
            }
            out.write_char(')')
        }
        FoFormula::Eq(a, b) => {
            term(out, a)?;
            out.write_str(" = ")?;
            term(out, b)
        }
        FoFormula::Not(a) => match &**a {
            FoFormula::Eq(x, y) => {
                term(out, x)?;
                out.write_str(" != ")?;
                term(out, y)
            }
            _ => {
                out.write_char('~')?;
                write_fo(out, a, 3)
            }
        },
        FoFormula::And(xs) | FoFormula::Or(xs) => {
            let and = matches!(f, FoFormula::And(_));
            if xs.is_empty() {
                return out.write_str(if and { "true" } else { "false" });
            }
            let (sep, child) = if and { (" & ", 3) } else { (" | ", 2) };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.write_str(sep)?;
                }
                write_fo(out, x, if xs.len() == 1 { need } else { child })?;
            }
            Ok(())
        }
        FoFormula::Implies(a, b) => {
            write_fo(out, a, 1)?;
            out.write_str(" -> ")?;
            write_fo(out, b, 0)
        }
        FoFormula::Exists(vs, body) | FoFormula::Forall(vs, body) => {
            let q = if matches!(f, FoFormula::Exists(..)) {
                "exists"
            } else {
                "forall"
            };
            write!(out, "{q} {}. ", vs.join(" "))?;
            write_fo(out, body, 0)
        }
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fo(f, self, 0)
    }
}
