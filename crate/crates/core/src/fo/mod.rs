//! First-order logic over finite structures: formulas, an exhaustive Tarski
//! evaluator, a text parser and printer, and the translations from team
//! formulas into first-order logic.

mod modal;
mod parse;
mod print;
mod translate;

use std::collections::{BTreeSet, HashMap};

use crate::model::{DependenceModel, Elem, Structure};
use crate::syntax::SyntaxError;

pub use modal::{build_standard_relational_model, modal_translation, StandardRelationalModel};
pub use parse::parse_fo;
pub use translate::{
    build_theta, guarded_translation, lift_full_team, standard_translation, translate_with,
    AtomStyle, Theta,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// An element of the structure, named by its token.
    Const(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    /// A relation symbol of the vocabulary.
    Rel(String),
    /// The team predicate `T`, of arity `|𝒱|`.
    Team,
    /// The equivalence `∼_x` of a standard relational model.
    Sim(String),
    /// The monadic predicate `R_x̄` of a standard relational model.
    Mon { rel: String, args: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FoFormula {
    True,
    False,
    Atom(Pred, Vec<Term>),
    Eq(Term, Term),
    Not(Box<FoFormula>),
    And(Vec<FoFormula>),
    Or(Vec<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    Exists(Vec<String>, Box<FoFormula>),
    Forall(Vec<String>, Box<FoFormula>),
}

impl FoFormula {
    pub fn atom(pred: Pred, args: Vec<Term>) -> FoFormula {
        FoFormula::Atom(pred, args)
    }

    pub fn rel(name: &str, vars: &[&str]) -> FoFormula {
        FoFormula::Atom(
            Pred::Rel(name.to_string()),
            vars.iter().map(|v| Term::var(v)).collect(),
        )
    }

    pub fn eq(a: Term, b: Term) -> FoFormula {
        FoFormula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: FoFormula) -> FoFormula {
        FoFormula::Not(Box::new(f))
    }

    pub fn implies(a: FoFormula, b: FoFormula) -> FoFormula {
        FoFormula::Implies(Box::new(a), Box::new(b))
    }

    /// `∃vars body`, or just `body` when `vars` is empty.
    pub fn exists(vars: Vec<String>, body: FoFormula) -> FoFormula {
        if vars.is_empty() {
            body
        } else {
            FoFormula::Exists(vars, Box::new(body))
        }
    }

    /// `∀vars body`, or just `body` when `vars` is empty.
    pub fn forall(vars: Vec<String>, body: FoFormula) -> FoFormula {
        if vars.is_empty() {
            body
        } else {
            FoFormula::Forall(vars, Box::new(body))
        }
    }

    /// Conjunction that drops a redundant wrapper around a single conjunct.
    pub fn and(mut items: Vec<FoFormula>) -> FoFormula {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            FoFormula::And(items)
        }
    }

    pub fn or(mut items: Vec<FoFormula>) -> FoFormula {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            FoFormula::Or(items)
        }
    }

    /// Free variables, sorted by name.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            FoFormula::True | FoFormula::False => {}
            FoFormula::Atom(_, args) => args.iter().for_each(|t| term(t, bound)),
            FoFormula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            FoFormula::Not(a) => a.collect_free(bound, out),
            FoFormula::And(xs) | FoFormula::Or(xs) => {
                xs.iter().for_each(|x| x.collect_free(bound, out))
            }
            FoFormula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FoFormula::Exists(vs, body) | FoFormula::Forall(vs, body) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Maximal quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            FoFormula::Not(a) => a.quantifier_depth(),
            FoFormula::And(xs) | FoFormula::Or(xs) => xs
                .iter()
                .map(FoFormula::quantifier_depth)
                .max()
                .unwrap_or(0),
            FoFormula::Implies(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            FoFormula::Exists(vs, body) | FoFormula::Forall(vs, body) => {
                body.quantifier_depth() + vs.len()
            }
            _ => 0,
        }
    }
}

/// The largest number of free variables of any subformula.
pub fn max_free_vars(f: &FoFormula) -> usize {
    let own = f.free_vars().len();
    let sub = match f {
        FoFormula::Not(a) => max_free_vars(a),
        FoFormula::And(xs) | FoFormula::Or(xs) => xs.iter().map(max_free_vars).max().unwrap_or(0),
        FoFormula::Implies(a, b) => max_free_vars(a).max(max_free_vars(b)),
        FoFormula::Exists(_, body) | FoFormula::Forall(_, body) => max_free_vars(body),
        _ => 0,
    };
    own.max(sub)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FoError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("predicate `{0}` is not interpreted in the structure")]
    UnknownPredicate(String),
    #[error("constant `{0}` is not an element of the universe")]
    UnknownConstant(String),
    #[error("predicate `{pred}` has arity {expected}, applied to {found} argument(s)")]
    Arity {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("not in the modal fragment: {0}")]
    NotModal(String),
    #[error("cannot lift to a team formula: {0}")]
    NotLiftable(String),
}

/// A finite structure a first-order formula can be evaluated on.
pub trait FoStructure {
    fn domain_size(&self) -> usize;
    fn constant(&self, token: &str) -> Option<Elem>;
    /// A handle and the arity of an interpreted predicate.
    fn predicate(&self, pred: &Pred) -> Option<(usize, usize)>;
    fn holds(&self, handle: usize, args: &[Elem]) -> bool;
}

impl FoStructure for Structure {
    fn domain_size(&self) -> usize {
        self.size()
    }

    fn constant(&self, token: &str) -> Option<Elem> {
        self.elem(token)
    }

    fn predicate(&self, pred: &Pred) -> Option<(usize, usize)> {
        match pred {
            Pred::Rel(name) => self
                .relations()
                .iter()
                .position(|r| &r.name == name)
                .map(|i| (i, self.relations()[i].arity)),
            _ => None,
        }
    }

    fn holds(&self, handle: usize, args: &[Elem]) -> bool {
        self.relations()[handle].tuples.contains(args)
    }
}

/// A dependence model viewed as a structure over `τ ∪ {T}`.
#[derive(Clone, Copy, Debug)]
pub struct ExpandedStructure<'a> {
    pub model: &'a DependenceModel,
}

/// `(𝔐, T)` as a structure over `τ ∪ {T}`.
pub fn expand(model: &DependenceModel) -> ExpandedStructure<'_> {
    ExpandedStructure { model }
}

impl FoStructure for ExpandedStructure<'_> {
    fn domain_size(&self) -> usize {
        self.model.structure().size()
    }

    fn constant(&self, token: &str) -> Option<Elem> {
        self.model.structure().elem(token)
    }

    fn predicate(&self, pred: &Pred) -> Option<(usize, usize)> {
        match pred {
            Pred::Team => Some((usize::MAX, self.model.ty().num_vars())),
            other => self.model.structure().predicate(other),
        }
    }

    fn holds(&self, handle: usize, args: &[Elem]) -> bool {
        if handle == usize::MAX {
            self.model.row_of_values(args).is_some()
        } else {
            self.model.structure().holds(handle, args)
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Var(usize),
    Const(Elem),
}

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Atom(usize, Vec<Slot>),
    Eq(Slot, Slot),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    Quant {
        exists: bool,
        slots: Vec<usize>,
        body: Box<Node>,
    },
}

/// A formula resolved against one structure, ready to evaluate under many
/// assignments to its free variables.
pub struct Compiled<'s, S: FoStructure + ?Sized> {
    structure: &'s S,
    root: Node,
    free: usize,
    slots: usize,
}

impl<'s, S: FoStructure + ?Sized> Compiled<'s, S> {
    /// `free` lists the formula's free variables in the order values will be supplied.
    pub fn new(formula: &FoFormula, structure: &'s S, free: &[String]) -> Result<Self, FoError> {
        let mut scope: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, v) in free.iter().enumerate() {
            scope.entry(v.clone()).or_default().push(i);
        }
        let mut next = free.len();
        let root = compile(formula, structure, &mut scope, &mut next)?;
        Ok(Compiled {
            structure,
            root,
            free: free.len(),
            slots: next,
        })
    }

    pub fn eval(&self, values: &[Elem]) -> bool {
        assert_eq!(
            values.len(),
            self.free,
            "wrong number of free-variable values"
        );
        let mut env = vec![Elem(0); self.slots];
        env[..self.free].copy_from_slice(values);
        self.node(&self.root, &mut env)
    }

    fn node(&self, n: &Node, env: &mut Vec<Elem>) -> bool {
        let get = |s: &Slot, env: &Vec<Elem>| match s {
            Slot::Var(i) => env[*i],
            Slot::Const(e) => *e,
        };
        match n {
            Node::Const(b) => *b,
            Node::Atom(h, args) => {
                let mut buf = [Elem(0); 16];
                if args.len() <= buf.len() {
                    for (b, a) in buf.iter_mut().zip(args) {
                        *b = get(a, env);
                    }
                    self.structure.holds(*h, &buf[..args.len()])
                } else {
                    let v: Vec<Elem> = args.iter().map(|a| get(a, env)).collect();
                    self.structure.holds(*h, &v)
                }
            }
            Node::Eq(a, b) => get(a, env) == get(b, env),
            Node::Not(a) => !self.node(a, env),
            Node::And(xs) => xs.iter().all(|x| self.node(x, env)),
            Node::Or(xs) => xs.iter().any(|x| self.node(x, env)),
            Node::Implies(a, b) => !self.node(a, env) || self.node(b, env),
            Node::Quant {
                exists,
                slots,
                body,
            } => self.quant(*exists, slots, body, env),
        }
    }

    fn quant(&self, exists: bool, slots: &[usize], body: &Node, env: &mut Vec<Elem>) -> bool {
        let Some((&first, rest)) = slots.split_first() else {
            return self.node(body, env);
        };
        for e in 0..self.structure.domain_size() {
            env[first] = Elem(e as u32);
            if self.quant(exists, rest, body, env) == exists {
                return exists;
            }
        }
        !exists
    }
}

fn compile<S: FoStructure + ?Sized>(
    f: &FoFormula,
    st: &S,
    scope: &mut HashMap<String, Vec<usize>>,
    next: &mut usize,
) -> Result<Node, FoError> {
    let slot = |t: &Term, scope: &HashMap<String, Vec<usize>>| -> Result<Slot, FoError> {
        match t {
            Term::Var(v) => scope
                .get(v)
                .and_then(|s| s.last())
                .map(|i| Slot::Var(*i))
                .ok_or_else(|| FoError::UnboundVariable(v.clone())),
            Term::Const(c) => st
                .constant(c)
                .map(Slot::Const)
                .ok_or_else(|| FoError::UnknownConstant(c.clone())),
        }
    };
    Ok(match f {
        FoFormula::True => Node::Const(true),
        FoFormula::False => Node::Const(false),
        FoFormula::Atom(p, args) => {
            let (h, arity) = st
                .predicate(p)
                .ok_or_else(|| FoError::UnknownPredicate(print::pred_name(p)))?;
            if arity != args.len() {
                return Err(FoError::Arity {
                    pred: print::pred_name(p),
                    expected: arity,
                    found: args.len(),
                });
            }
            let slots = args
                .iter()
                .map(|t| slot(t, scope))
                .collect::<Result<Vec<_>, _>>()?;
            Node::Atom(h, slots)
        }
        FoFormula::Eq(a, b) => Node::Eq(slot(a, scope)?, slot(b, scope)?),
        FoFormula::Not(a) => Node::Not(Box::new(compile(a, st, scope, next)?)),
        FoFormula::And(xs) | FoFormula::Or(xs) => {
            let nodes = xs
                .iter()
                .map(|x| compile(x, st, scope, next))
                .collect::<Result<Vec<_>, _>>()?;
            if matches!(f, FoFormula::And(_)) {
                Node::And(nodes)
            } else {
                Node::Or(nodes)
            }
        }
        FoFormula::Implies(a, b) => Node::Implies(
            Box::new(compile(a, st, scope, next)?),
            Box::new(compile(b, st, scope, next)?),
        ),
        FoFormula::Exists(vs, body) | FoFormula::Forall(vs, body) => {
            let mut slots = Vec::with_capacity(vs.len());
            for v in vs {
                scope.entry(v.clone()).or_default().push(*next);
                slots.push(*next);
                *next += 1;
            }
            let body = compile(body, st, scope, next);
            for v in vs {
                scope.get_mut(v).expect("pushed").pop();
            }
            Node::Quant {
                exists: matches!(f, FoFormula::Exists(..)),
                slots,
                body: Box::new(body?),
            }
        }
    })
}

/// Tarski truth of `formula` in `structure` with `free[i]` bound to `values[i]`.
pub fn eval_fo<S: FoStructure + ?Sized>(
    formula: &FoFormula,
    structure: &S,
    free: &[String],
    values: &[Elem],
) -> Result<bool, FoError> {
    Ok(Compiled::new(formula, structure, free)?.eval(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_model;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn basic_evaluation() {
        let mut st = Structure::numeric(2);
        st.add_relation("P", 1, vec![]).unwrap();
        st.add_relation("R", 2, vec![vec![Elem(0), Elem(1)], vec![Elem(1), Elem(0)]])
            .unwrap();
        let ex_p = FoFormula::exists(names(&["x"]), FoFormula::rel("P", &["x"]));
        assert!(!eval_fo(&ex_p, &st, &[], &[]).unwrap());
        let ae = FoFormula::forall(
            names(&["x"]),
            FoFormula::exists(names(&["y"]), FoFormula::rel("R", &["x", "y"])),
        );
        assert!(eval_fo(&ae, &st, &[], &[]).unwrap());
        let refl = FoFormula::exists(names(&["x"]), FoFormula::rel("R", &["x", "x"]));
        assert!(!eval_fo(&refl, &st, &[], &[]).unwrap());
    }

    #[test]
    fn team_predicate() {
        let m = load_model("universe 0 1 2\nvars x y z\nteam\n0 0 0\n1 1 0\n1 2 1\n2 2 1\nend\n")
            .unwrap();
        let t = FoFormula::atom(
            Pred::Team,
            vec![
                Term::Const("1".into()),
                Term::Const("1".into()),
                Term::Const("0".into()),
            ],
        );
        assert!(eval_fo(&t, &expand(&m), &[], &[]).unwrap());
        let t2 = FoFormula::atom(
            Pred::Team,
            vec![
                Term::Const("1".into()),
                Term::Const("0".into()),
                Term::Const("0".into()),
            ],
        );
        assert!(!eval_fo(&t2, &expand(&m), &[], &[]).unwrap());
    }

    #[test]
    fn errors_and_shadowing() {
        let st = Structure::numeric(2);
        assert_eq!(
            eval_fo(
                &FoFormula::rel("Q", &["x"]),
                &st,
                &names(&["x"]),
                &[Elem(0)]
            ),
            Err(FoError::UnknownPredicate("Q".into()))
        );
        let unbound = FoFormula::eq(Term::var("x"), Term::var("y"));
        assert_eq!(
            eval_fo(&unbound, &st, &names(&["x"]), &[Elem(0)]),
            Err(FoError::UnboundVariable("y".into()))
        );
        // ∃x (x = 1) ∧ x = 0, with the outer x free and bound to 0.
        let f = FoFormula::and(vec![
            FoFormula::exists(
                names(&["x"]),
                FoFormula::eq(Term::var("x"), Term::Const("1".into())),
            ),
            FoFormula::eq(Term::var("x"), Term::Const("0".into())),
        ]);
        assert!(eval_fo(&f, &st, &names(&["x"]), &[Elem(0)]).unwrap());
    }

    #[test]
    fn free_variable_bound() {
        let f = parse_fo("forall x. (P(x) -> exists y z. R(x, y) & R(y, z))", &[]).unwrap();
        assert_eq!(max_free_vars(&f), 3);
        assert_eq!(max_free_vars(&FoFormula::True), 0);
    }
}
