//! Model checking at a point of a dependence model.
//!
//! Alternation is resolved by exhaustive expansion: `𝔻_X` is the conjunction
//! and `𝔼_X` the disjunction over the team rows agreeing with the current one
//! on `X`. Results are memoized per (subformula node, row), so shared
//! subformulas are evaluated once per row.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::model::{Assignment, DependenceModel, Elem};
use crate::syntax::{Formula, SyntaxError, Var, VarSet};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("assignment outside team: {0}")]
    NotInTeam(String),
    #[error("formula contains `not`; convert it to negation normal form first")]
    NotNnf,
    #[error("expected a local atom or literal")]
    NotAnAtom,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckStats {
    pub atom_evals: u64,
    pub quantifier_expansions: u64,
    pub memo_hits: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub value: bool,
    pub stats: CheckStats,
}

struct Node<'f> {
    formula: &'f Formula,
    kids: [usize; 2],
}

type Partition = (Vec<usize>, Vec<Rc<[usize]>>);

/// A formula compiled against one model, evaluable at any team row.
pub struct Evaluator<'a> {
    model: &'a DependenceModel,
    nodes: Vec<Node<'a>>,
    root: usize,
    memo: Vec<u8>,
    /// Row partitions by agreement set: class id per row, rows per class.
    classes: HashMap<VarSet, Partition>,
    projections: HashMap<Vec<Var>, HashSet<Vec<Elem>>>,
    stats: CheckStats,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        formula: &'a Formula,
        model: &'a DependenceModel,
    ) -> Result<Evaluator<'a>, CheckError> {
        formula.validate(model.ty())?;
        if formula.contains_not() {
            return Err(CheckError::NotNnf);
        }
        let mut nodes = Vec::new();
        let mut ids = HashMap::new();
        let root = intern(formula, &mut nodes, &mut ids);
        let memo = vec![0; nodes.len() * model.len()];
        Ok(Evaluator {
            model,
            nodes,
            root,
            memo,
            classes: HashMap::new(),
            projections: HashMap::new(),
            stats: CheckStats::default(),
        })
    }

    pub fn eval_row(&mut self, row: usize) -> bool {
        self.eval(self.root, row)
    }

    pub fn stats(&self) -> CheckStats {
        self.stats
    }

    /// Number of distinct subformula nodes.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    fn eval(&mut self, node: usize, row: usize) -> bool {
        let key = node * self.model.len() + row;
        match self.memo[key] {
            1 => {
                self.stats.memo_hits += 1;
                return false;
            }
            2 => {
                self.stats.memo_hits += 1;
                return true;
            }
            _ => {}
        }
        let f = self.nodes[node].formula;
        let [a, b] = self.nodes[node].kids;
        let value = match f {
            Formula::And(..) => self.eval(a, row) && self.eval(b, row),
            Formula::Or(..) => self.eval(a, row) || self.eval(b, row),
            Formula::Forall { agree, .. } | Formula::Exists { agree, .. } => {
                let universal = matches!(f, Formula::Forall { .. });
                let rows = self.class_of(*agree, row);
                let mut result = universal;
                for &t in rows.iter() {
                    self.stats.quantifier_expansions += 1;
                    if self.eval(a, t) != universal {
                        result = !universal;
                        break;
                    }
                }
                result
            }
            atom => {
                self.stats.atom_evals += 1;
                self.atom(atom, row)
            }
        };
        self.memo[key] = if value { 2 } else { 1 };
        value
    }

    fn class_of(&mut self, agree: VarSet, row: usize) -> Rc<[usize]> {
        let model = self.model;
        let (ids, members) = self.classes.entry(agree).or_insert_with(|| {
            let mut index: HashMap<Vec<Elem>, usize> = HashMap::new();
            let mut ids = Vec::with_capacity(model.len());
            let mut members: Vec<Vec<usize>> = Vec::new();
            let vars: Vec<Var> = agree.iter().collect();
            for (r, s) in model.team().iter().enumerate() {
                let next = index.len();
                let id = *index.entry(s.project(&vars)).or_insert(next);
                if id == members.len() {
                    members.push(Vec::new());
                }
                members[id].push(r);
                ids.push(id);
            }
            (ids, members.into_iter().map(Rc::from).collect())
        });
        members[ids[row]].clone()
    }

    fn projection(&mut self, vars: &[Var]) -> &HashSet<Vec<Elem>> {
        let model = self.model;
        self.projections
            .entry(vars.to_vec())
            .or_insert_with(|| model.team().iter().map(|s| s.project(vars)).collect())
    }

    fn atom(&mut self, atom: &Formula, row: usize) -> bool {
        let model = self.model;
        let s = model.row(row);
        match atom {
            Formula::Lit {
                positive,
                rel,
                args,
            } => model.holds(*rel, &s.project(args)) == *positive,
            Formula::Eq(x, y) => s.get(*x) == s.get(*y),
            Formula::Neq(x, y) => s.get(*x) != s.get(*y),
            Formula::Dep { on, target } => dependence(model, s, *on, *target),
            Formula::Anon { on, target } => !dependence(model, s, *on, *target),
            Formula::Incl { left, right } => {
                let v = s.project(left);
                self.projection(right).contains(&v)
            }
            Formula::Excl { left, right } => {
                let v = s.project(left);
                !self.projection(right).contains(&v)
            }
            Formula::Ind { left, right } => self.independence(s, left, right),
            Formula::NInd { left, right } => !self.independence(s, left, right),
            _ => unreachable!("connective handled by eval"),
        }
    }

    /// `∀t ∃u (u(x̄) = s(x̄) ∧ u(ȳ) = t(ȳ))`, i.e. `{s(x̄)} × T(ȳ) ⊆ T(x̄ȳ)`.
    fn independence(&mut self, s: &Assignment, left: &[Var], right: &[Var]) -> bool {
        let joint: Vec<Var> = left.iter().chain(right).copied().collect();
        let fixed = s.project(left);
        let targets: Vec<Vec<Elem>> = self.projection(right).iter().cloned().collect();
        let both = self.projection(&joint);
        targets.into_iter().all(|b| {
            let mut key = fixed.clone();
            key.extend(b);
            both.contains(&key)
        })
    }
}

fn intern<'f>(
    f: &'f Formula,
    nodes: &mut Vec<Node<'f>>,
    ids: &mut HashMap<*const Formula, usize>,
) -> usize {
    if let Some(&id) = ids.get(&(f as *const Formula)) {
        return id;
    }
    let kids = match f {
        Formula::And(a, b) | Formula::Or(a, b) => [intern(a, nodes, ids), intern(b, nodes, ids)],
        Formula::Forall { body, .. } | Formula::Exists { body, .. } => {
            [intern(body, nodes, ids), usize::MAX]
        }
        _ => [usize::MAX; 2],
    };
    nodes.push(Node { formula: f, kids });
    let id = nodes.len() - 1;
    ids.insert(f as *const Formula, id);
    id
}

/// `∀t ∈ T (t =_X s → t(y) = s(y))`.
fn dependence(model: &DependenceModel, s: &Assignment, on: VarSet, y: Var) -> bool {
    model
        .team()
        .iter()
        .all(|t| !on.iter().all(|x| t.get(x) == s.get(x)) || t.get(y) == s.get(y))
}

fn row_of(model: &DependenceModel, s: &Assignment) -> Result<usize, CheckError> {
    model
        .row_of(s)
        .ok_or_else(|| CheckError::NotInTeam(model.format_assignment(s)))
}

/// Whether `(𝔐,T) ⊨_s φ`. The formula must be free of `not`.
pub fn check(
    formula: &Formula,
    model: &DependenceModel,
    s: &Assignment,
) -> Result<CheckResult, CheckError> {
    let row = row_of(model, s)?;
    check_row(formula, model, row)
}

/// [`check`] at a row index.
pub fn check_row(
    formula: &Formula,
    model: &DependenceModel,
    row: usize,
) -> Result<CheckResult, CheckError> {
    if row >= model.len() {
        return Err(CheckError::NotInTeam(format!("row {row}")));
    }
    let mut ev = Evaluator::new(formula, model)?;
    let value = ev.eval_row(row);
    Ok(CheckResult {
        value,
        stats: ev.stats(),
    })
}

/// Truth values at every team row, in team order.
pub fn check_all(formula: &Formula, model: &DependenceModel) -> Result<Vec<bool>, CheckError> {
    let mut ev = Evaluator::new(formula, model)?;
    Ok((0..model.len()).map(|r| ev.eval_row(r)).collect())
}

/// Truth of a local atom, equality or relational literal at `s`.
pub fn eval_local_atom(
    atom: &Formula,
    model: &DependenceModel,
    s: &Assignment,
) -> Result<bool, CheckError> {
    if !atom.is_atomic() {
        return Err(CheckError::NotAnAtom);
    }
    Ok(check(atom, model, s)?.value)
}

/// `⟦β⟧ = { s ∈ T : (𝔐,T) ⊨_s β }`, in team order.
pub fn extension(atom: &Formula, model: &DependenceModel) -> Result<Vec<Assignment>, CheckError> {
    if !atom.is_atomic() {
        return Err(CheckError::NotAnAtom);
    }
    let truth = check_all(atom, model)?;
    Ok(model
        .team()
        .iter()
        .zip(truth)
        .filter(|(_, t)| *t)
        .map(|(s, _)| s.clone())
        .collect())
}

/// Team-level atoms, evaluated on the whole team.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalAtom {
    /// `dep(x̄, y)`
    Dep { on: Vec<Var>, target: Var },
    /// `x̄ ⊆ ȳ`
    Incl { left: Vec<Var>, right: Vec<Var> },
    /// `x̄ | ȳ`
    Excl { left: Vec<Var>, right: Vec<Var> },
    /// `x̄ Υ y`
    Anon { on: Vec<Var>, target: Var },
    /// `x̄ ⊥ ȳ`
    Indep { left: Vec<Var>, right: Vec<Var> },
}

impl GlobalAtom {
    /// The local atom whose universal closure this is.
    pub fn local(&self) -> Formula {
        match self {
            GlobalAtom::Dep { on, target } => Formula::Dep {
                on: on.iter().copied().collect(),
                target: *target,
            },
            GlobalAtom::Anon { on, target } => Formula::Anon {
                on: on.iter().copied().collect(),
                target: *target,
            },
            GlobalAtom::Incl { left, right } => Formula::Incl {
                left: left.clone(),
                right: right.clone(),
            },
            GlobalAtom::Excl { left, right } => Formula::Excl {
                left: left.clone(),
                right: right.clone(),
            },
            GlobalAtom::Indep { left, right } => Formula::Ind {
                left: left.clone(),
                right: right.clone(),
            },
        }
    }

    /// Reads `A[] β` back as a global atom.
    pub fn from_formula(f: &Formula) -> Option<GlobalAtom> {
        let Formula::Forall { agree, body } = f else {
            return None;
        };
        if !agree.is_empty() {
            return None;
        }
        Some(match &**body {
            Formula::Dep { on, target } => GlobalAtom::Dep {
                on: on.iter().collect(),
                target: *target,
            },
            Formula::Anon { on, target } => GlobalAtom::Anon {
                on: on.iter().collect(),
                target: *target,
            },
            Formula::Incl { left, right } => GlobalAtom::Incl {
                left: left.clone(),
                right: right.clone(),
            },
            Formula::Excl { left, right } => GlobalAtom::Excl {
                left: left.clone(),
                right: right.clone(),
            },
            Formula::Ind { left, right } => GlobalAtom::Indep {
                left: left.clone(),
                right: right.clone(),
            },
            _ => return None,
        })
    }
}

/// Evaluates a global atom by its team-level definition, and checks the result
/// against the model checker on `A[] β`.
///
/// # Panics
///
/// Panics if the two evaluations disagree, which indicates a bug.
pub fn check_global_atom(atom: &GlobalAtom, model: &DependenceModel) -> Result<bool, CheckError> {
    let team = model.team();
    let direct = match atom {
        GlobalAtom::Dep { on, target } => team.iter().all(|s| {
            team.iter()
                .all(|t| s.project(on) != t.project(on) || s.get(*target) == t.get(*target))
        }),
        GlobalAtom::Incl { left, right } => team
            .iter()
            .all(|s| team.iter().any(|t| s.project(left) == t.project(right))),
        GlobalAtom::Excl { left, right } => team
            .iter()
            .all(|s| team.iter().all(|t| s.project(left) != t.project(right))),
        GlobalAtom::Anon { on, target } => team.iter().all(|s| {
            team.iter()
                .any(|t| s.project(on) == t.project(on) && s.get(*target) != t.get(*target))
        }),
        GlobalAtom::Indep { left, right } => team.iter().all(|s| {
            team.iter().all(|t| {
                team.iter().any(|u| {
                    u.project(left) == s.project(left) && u.project(right) == t.project(right)
                })
            })
        }),
    };
    let closed = Formula::global(atom.local());
    let via_local = check_row(&closed, model, 0)?.value;
    assert_eq!(
        direct, via_local,
        "global atom evaluation disagrees with its local closure"
    );
    Ok(direct)
}
