//! Bisimulation between pointed dependence models: atom agreement, back/forth
//! refinement to any finite stage or to the fixpoint, and replayable
//! failure witnesses.

use std::fmt;

use crate::checker::{check_all, check_row};
use crate::model::{Assignment, DependenceModel};
use crate::syntax::{AtomKind, FiniteType, Formula, OmegaProfile, Var, VarSet};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BisimError {
    #[error("the two models have different types")]
    TypeMismatch,
    #[error("row {0} is out of range")]
    RowOutOfRange(usize),
}

/// `comvar(s, t) = { x : s(x) = t(x) }`.
pub fn comvar(s: &Assignment, t: &Assignment) -> VarSet {
    s.0.iter()
        .zip(&t.0)
        .enumerate()
        .filter(|(_, (a, b))| a == b)
        .map(|(i, _)| Var(i as u32))
        .collect()
}

fn tuples(n: usize, len: usize) -> Vec<Vec<Var>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n as u32).map(move |v| {
                    let mut t = t.clone();
                    t.push(Var(v));
                    t
                })
            })
            .collect();
    }
    out
}

/// A finite family of atoms such that two points agree on every atomic
/// formula of `L[Ω]` iff they agree on every member of the family.
///
/// For each dual pair touched by `Ω` one representative is listed (the member
/// in `Ω`, preferring the positive one). Atoms that are true at every point of
/// every model (`D_X y` with `y ∈ X`, `x = x`) are left out.
///
/// * relational atoms `R x̄` for every `x̄ ∈ 𝒱^ar(R)`;
/// * `D_X y` for `X ⊆ 𝒱`, `y ∉ X`;
/// * `x = y` for `x < y`;
/// * `x̄ ∈ w̄` for `w̄` a nonempty repetition-free sorted tuple and any `x̄`,
///   and the one-repeat extensions `x̄u ∈ w̄w_j` with `u ≠ x_j`. A general
///   inclusion atom is equivalent to a conjunction of such atoms;
/// * `Ind_X(Y)` for nonempty `X, Y ⊆ 𝒱` (independence only sees the sets).
pub fn canonical_atoms(ty: &FiniteType, omega: OmegaProfile) -> Vec<Formula> {
    let n = ty.num_vars();
    let all = ty.all_vars();
    let mut out = Vec::new();
    for (i, (_, arity)) in ty.relations().iter().enumerate() {
        for args in tuples(n, *arity) {
            out.push(Formula::lit(crate::syntax::RelId(i as u32), args));
        }
    }
    let pick = |pos: AtomKind| {
        if omega.contains(pos) {
            Some(true)
        } else if omega.contains(pos.dual()) {
            Some(false)
        } else {
            None
        }
    };
    if let Some(positive) = pick(AtomKind::Dep) {
        for on in all.subsets() {
            for target in all.difference(on).iter() {
                let atom = Formula::Dep { on, target };
                out.push(if positive {
                    atom
                } else {
                    atom.dual_atom().unwrap()
                });
            }
        }
    }
    if let Some(positive) = pick(AtomKind::Eq) {
        for x in ty.vars() {
            for y in ty.vars().filter(|y| *y > x) {
                out.push(if positive {
                    Formula::Eq(x, y)
                } else {
                    Formula::Neq(x, y)
                });
            }
        }
    }
    if let Some(positive) = pick(AtomKind::Incl) {
        let make = |left: Vec<Var>, right: Vec<Var>| {
            if positive {
                Formula::Incl { left, right }
            } else {
                Formula::Excl { left, right }
            }
        };
        for w in all.subsets().filter(|w| !w.is_empty()) {
            let right: Vec<Var> = w.iter().collect();
            for left in tuples(n, right.len()) {
                out.push(make(left.clone(), right.clone()));
                for (j, wj) in right.iter().enumerate() {
                    for u in ty.vars().filter(|u| *u != left[j]) {
                        let mut l = left.clone();
                        l.push(u);
                        let mut r = right.clone();
                        r.push(*wj);
                        out.push(make(l, r));
                    }
                }
            }
        }
    }
    if let Some(positive) = pick(AtomKind::Ind) {
        for xs in all.subsets().filter(|s| !s.is_empty()) {
            for ys in all.subsets().filter(|s| !s.is_empty()) {
                let (left, right) = (xs.iter().collect(), ys.iter().collect());
                out.push(if positive {
                    Formula::Ind { left, right }
                } else {
                    Formula::NInd { left, right }
                });
            }
        }
    }
    out
}

/// Truth of every canonical atom at every row: `table[row][atom]`.
pub fn atom_table(model: &DependenceModel, atoms: &[Formula]) -> Vec<Vec<bool>> {
    let mut table = vec![Vec::with_capacity(atoms.len()); model.len()];
    for atom in atoms {
        let truth = check_all(atom, model).expect("canonical atoms are well-typed");
        for (row, v) in truth.into_iter().enumerate() {
            table[row].push(v);
        }
    }
    table
}

/// A relation `Z ⊆ T × T′` between the rows of two teams, tagged with the
/// refinement stage that produced it.
#[derive(Clone, PartialEq, Eq)]
pub struct BisimRelation {
    left: usize,
    right: usize,
    bits: Vec<bool>,
    /// Number of refinement steps applied after atom agreement.
    pub stage: usize,
    /// Set once a refinement step left the relation unchanged.
    pub fixpoint: bool,
}

impl BisimRelation {
    pub fn empty(left: usize, right: usize) -> BisimRelation {
        BisimRelation {
            left,
            right,
            bits: vec![false; left * right],
            stage: 0,
            fixpoint: false,
        }
    }

    pub fn from_pairs(left: usize, right: usize, pairs: &[(usize, usize)]) -> BisimRelation {
        let mut z = BisimRelation::empty(left, right);
        for &(s, t) in pairs {
            z.insert(s, t);
        }
        z
    }

    pub fn contains(&self, s: usize, t: usize) -> bool {
        self.bits[s * self.right + t]
    }

    pub fn insert(&mut self, s: usize, t: usize) {
        self.bits[s * self.right + t] = true;
    }

    pub fn remove(&mut self, s: usize, t: usize) {
        self.bits[s * self.right + t] = false;
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.left)
            .flat_map(|s| (0..self.right).map(move |t| (s, t)))
            .filter(|&(s, t)| self.contains(s, t))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_pairs(&self, other: &BisimRelation) -> bool {
        self.bits == other.bits
    }

    pub fn is_subset(&self, other: &BisimRelation) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

impl fmt::Debug for BisimRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} ", self.stage)?;
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// Why a pair drops out of a stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// The two points disagree on this atom.
    AtomDisagreement(Formula),
    /// No right row related (at the previous stage) to left row `t` agrees with `s′` on `agree`.
    Forth { t: usize, agree: VarSet },
    /// No left row related (at the previous stage) to right row `t` agrees with `s` on `agree`.
    Back { t: usize, agree: VarSet },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureWitness {
    pub pair: (usize, usize),
    /// The stage at which the pair was removed.
    pub stage: usize,
    pub reason: FailureReason,
}

impl FailureWitness {
    /// Re-evaluates the failure. `previous` is the relation the failing stage
    /// was refined from; it is ignored for atom disagreements.
    pub fn replay(
        &self,
        left: &DependenceModel,
        right: &DependenceModel,
        previous: &BisimRelation,
    ) -> bool {
        let (s, s2) = self.pair;
        match &self.reason {
            FailureReason::AtomDisagreement(atom) => {
                let a = check_row(atom, left, s).map(|r| r.value);
                let b = check_row(atom, right, s2).map(|r| r.value);
                matches!((a, b), (Ok(a), Ok(b)) if a != b)
            }
            FailureReason::Forth { t, agree } => {
                agree.is_subset(comvar(left.row(*t), left.row(s)))
                    && !(0..right.len()).any(|t2| {
                        previous.contains(*t, t2)
                            && agree.is_subset(comvar(right.row(t2), right.row(s2)))
                    })
            }
            FailureReason::Back { t, agree } => {
                agree.is_subset(comvar(right.row(*t), right.row(s2)))
                    && !(0..left.len()).any(|t1| {
                        previous.contains(t1, *t)
                            && agree.is_subset(comvar(left.row(t1), left.row(s)))
                    })
            }
        }
    }

    pub fn describe(&self, left: &DependenceModel, right: &DependenceModel) -> String {
        let (s, s2) = self.pair;
        let ty = left.ty();
        let head = format!(
            "pair ({}) ~ ({}) fails at stage {}",
            left.format_assignment(left.row(s)),
            right.format_assignment(right.row(s2)),
            self.stage
        );
        match &self.reason {
            FailureReason::AtomDisagreement(a) => {
                format!("{head}: the points disagree on {}", a.display(ty))
            }
            FailureReason::Forth { t, agree } => format!(
                "{head}: forth fails for left row ({}) with X = {{{}}}",
                left.format_assignment(left.row(*t)),
                ty.names(*agree).join(" ")
            ),
            FailureReason::Back { t, agree } => format!(
                "{head}: back fails for right row ({}) with X = {{{}}}",
                right.format_assignment(right.row(*t)),
                ty.names(*agree).join(" ")
            ),
        }
    }
}

fn same_type(left: &DependenceModel, right: &DependenceModel) -> Result<(), BisimError> {
    if left.ty() == right.ty() {
        Ok(())
    } else {
        Err(BisimError::TypeMismatch)
    }
}

/// Stage 0: all pairs agreeing on every relational atom and every atom of `Ω`.
pub fn atom_agreement(
    left: &DependenceModel,
    right: &DependenceModel,
    omega: OmegaProfile,
) -> Result<BisimRelation, BisimError> {
    Ok(agreement_with_atoms(left, right, omega)?.0)
}

/// Stage 0 together with the atoms and both truth tables.
type Agreement = (BisimRelation, Vec<Formula>, Vec<Vec<bool>>, Vec<Vec<bool>>);

fn agreement_with_atoms(
    left: &DependenceModel,
    right: &DependenceModel,
    omega: OmegaProfile,
) -> Result<Agreement, BisimError> {
    same_type(left, right)?;
    let atoms = canonical_atoms(left.ty(), omega);
    let lt = atom_table(left, &atoms);
    let rt = atom_table(right, &atoms);
    let mut z = BisimRelation::empty(left.len(), right.len());
    for (s, a) in lt.iter().enumerate() {
        for (t, b) in rt.iter().enumerate() {
            if a == b {
                z.insert(s, t);
            }
        }
    }
    Ok((z, atoms, lt, rt))
}

fn forth_failure(
    z: &BisimRelation,
    left: &DependenceModel,
    right: &DependenceModel,
    s: usize,
    s2: usize,
) -> Option<FailureReason> {
    for t in 0..left.len() {
        let agree = comvar(left.row(t), left.row(s));
        let ok = (0..right.len())
            .any(|t2| z.contains(t, t2) && agree.is_subset(comvar(right.row(t2), right.row(s2))));
        if !ok {
            return Some(FailureReason::Forth { t, agree });
        }
    }
    None
}

fn back_failure(
    z: &BisimRelation,
    left: &DependenceModel,
    right: &DependenceModel,
    s: usize,
    s2: usize,
) -> Option<FailureReason> {
    for t2 in 0..right.len() {
        let agree = comvar(right.row(t2), right.row(s2));
        let ok = (0..left.len())
            .any(|t| z.contains(t, t2) && agree.is_subset(comvar(left.row(t), left.row(s))));
        if !ok {
            return Some(FailureReason::Back { t: t2, agree });
        }
    }
    None
}

/// Result of one refinement step.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub relation: BisimRelation,
    /// One witness for every pair that was removed, in pair order.
    pub removed: Vec<FailureWitness>,
}

/// One back-and-forth step. For every `t`, only `X = comvar(t, s)` is tried:
/// a partner agreeing on that set agrees on each of its subsets.
pub fn refine_step(
    z: &BisimRelation,
    left: &DependenceModel,
    right: &DependenceModel,
) -> Refinement {
    let mut next = z.clone();
    next.stage = z.stage + 1;
    next.fixpoint = false;
    let mut removed = Vec::new();
    for (s, s2) in z.pairs() {
        let reason =
            forth_failure(z, left, right, s, s2).or_else(|| back_failure(z, left, right, s, s2));
        if let Some(reason) = reason {
            next.remove(s, s2);
            removed.push(FailureWitness {
                pair: (s, s2),
                stage: next.stage,
                reason,
            });
        }
    }
    if removed.is_empty() {
        next.fixpoint = true;
    }
    Refinement {
        relation: next,
        removed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Steps(usize),
    Fixpoint,
}

#[derive(Clone, Debug)]
pub struct BisimOutcome {
    pub related: bool,
    /// The final relation.
    pub relation: BisimRelation,
    /// Every computed stage, starting with atom agreement.
    pub history: Vec<BisimRelation>,
    /// The first stage whose refinement step changed nothing, if reached.
    pub fixpoint_stage: Option<usize>,
    /// Why the queried pair is not related.
    pub witness: Option<FailureWitness>,
}

/// The stage-`k` (or fixpoint) bisimilarity relation, queried at `(s, s′)`.
pub fn bisimilarity(
    left: &DependenceModel,
    s: usize,
    right: &DependenceModel,
    s2: usize,
    omega: OmegaProfile,
    depth: Depth,
) -> Result<BisimOutcome, BisimError> {
    if s >= left.len() {
        return Err(BisimError::RowOutOfRange(s));
    }
    if s2 >= right.len() {
        return Err(BisimError::RowOutOfRange(s2));
    }
    let (z0, atoms, lt, rt) = agreement_with_atoms(left, right, omega)?;
    let mut history = vec![z0];
    let mut removed_at: Option<FailureWitness> = None;
    if !history[0].contains(s, s2) {
        let i = (0..atoms.len())
            .find(|&i| lt[s][i] != rt[s2][i])
            .expect("disagreement");
        removed_at = Some(FailureWitness {
            pair: (s, s2),
            stage: 0,
            reason: FailureReason::AtomDisagreement(atoms[i].clone()),
        });
    }
    let mut fixpoint_stage = None;
    loop {
        let current = history.last().unwrap();
        let done = match depth {
            Depth::Steps(k) => current.stage >= k,
            Depth::Fixpoint => fixpoint_stage.is_some(),
        };
        if done {
            break;
        }
        let step = refine_step(current, left, right);
        if removed_at.is_none() {
            removed_at = step.removed.iter().find(|w| w.pair == (s, s2)).cloned();
        }
        if step.relation.fixpoint && fixpoint_stage.is_none() {
            fixpoint_stage = Some(step.relation.stage);
        }
        history.push(step.relation);
    }
    let relation = history.last().unwrap().clone();
    Ok(BisimOutcome {
        related: relation.contains(s, s2),
        relation,
        history,
        fixpoint_stage,
        witness: removed_at,
    })
}

/// Checks the three bisimulation conditions for an explicit relation.
/// Returns the first violation found.
pub fn check_is_bisimulation(
    z: &BisimRelation,
    left: &DependenceModel,
    right: &DependenceModel,
    omega: OmegaProfile,
) -> Result<Result<(), FailureWitness>, BisimError> {
    let (_, atoms, lt, rt) = agreement_with_atoms(left, right, omega)?;
    for (s, s2) in z.pairs() {
        if let Some(i) = (0..atoms.len()).find(|&i| lt[s][i] != rt[s2][i]) {
            return Ok(Err(FailureWitness {
                pair: (s, s2),
                stage: 0,
                reason: FailureReason::AtomDisagreement(atoms[i].clone()),
            }));
        }
        let reason =
            back_failure(z, left, right, s, s2).or_else(|| forth_failure(z, left, right, s, s2));
        if let Some(reason) = reason {
            return Ok(Err(FailureWitness {
                pair: (s, s2),
                stage: z.stage,
                reason,
            }));
        }
    }
    Ok(Ok(()))
}
