//! Characteristic formulas `χ^k_s`: a pointed model `(𝔑, s′)` satisfies
//! `χ^k_s` iff `s′` is related to `s` at bisimulation stage `k`.
//!
//! Formulas are hash-consed: structurally equal subformulas share one `Arc`,
//! and conjunctions and disjunctions have sorted, duplicate-free operands laid
//! out as balanced trees.

use std::collections::HashMap;
use std::sync::Arc;

use crate::bisim::{atom_table, canonical_atoms, comvar};
use crate::model::DependenceModel;
use crate::syntax::{AtomKind, Formula, OmegaProfile, Var, VarSet};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CharError {
    #[error("profile {0} is not closed under negation")]
    NotNegationClosed(OmegaProfile),
    #[error("no atomic formulas are available over this type and profile")]
    NoAtoms,
    #[error("row {0} is out of range")]
    RowOutOfRange(usize),
}

type Id = usize;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Atom(usize, bool),
    Trivial,
    And(Id, Id),
    Or(Id, Id),
    Forall(VarSet, Id),
    Exists(VarSet, Id),
}

/// Builds characteristic formulas for the points of one model, sharing work
/// across rows and depths.
pub struct CharBuilder<'a> {
    model: &'a DependenceModel,
    atoms: Vec<Formula>,
    table: Vec<Vec<bool>>,
    trivial: Option<Formula>,
    nodes: HashMap<Key, Id>,
    arcs: Vec<Arc<Formula>>,
    memo: HashMap<(usize, usize), Id>,
}

impl<'a> CharBuilder<'a> {
    pub fn new(
        model: &'a DependenceModel,
        omega: OmegaProfile,
    ) -> Result<CharBuilder<'a>, CharError> {
        if !omega.is_negation_closed() {
            return Err(CharError::NotNegationClosed(omega));
        }
        let atoms = canonical_atoms(model.ty(), omega);
        let table = atom_table(model, &atoms);
        let trivial = if atoms.is_empty() {
            let x = Var(0);
            let candidate = if model.ty().num_vars() == 0 {
                None
            } else if omega.contains(AtomKind::Dep) {
                Some(Formula::Dep {
                    on: VarSet::singleton(x),
                    target: x,
                })
            } else if omega.contains(AtomKind::Eq) {
                Some(Formula::Eq(x, x))
            } else if omega.contains(AtomKind::Incl) {
                Some(Formula::Incl {
                    left: vec![x],
                    right: vec![x],
                })
            } else {
                None
            };
            Some(candidate.ok_or(CharError::NoAtoms)?)
        } else {
            None
        };
        Ok(CharBuilder {
            model,
            atoms,
            table,
            trivial,
            nodes: HashMap::new(),
            arcs: Vec::new(),
            memo: HashMap::new(),
        })
    }

    /// Number of distinct subformulas built so far.
    pub fn node_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn formula(&mut self, row: usize, k: usize) -> Result<Arc<Formula>, CharError> {
        if row >= self.model.len() {
            return Err(CharError::RowOutOfRange(row));
        }
        let id = self.chi(row, k);
        Ok(self.arcs[id].clone())
    }

    fn intern(&mut self, key: Key) -> Id {
        if let Some(&id) = self.nodes.get(&key) {
            return id;
        }
        let f = match &key {
            Key::Atom(i, true) => self.atoms[*i].clone(),
            Key::Atom(i, false) => self.atoms[*i].dual_atom().expect("atoms have duals"),
            Key::Trivial => self.trivial.clone().expect("fallback atom"),
            Key::And(a, b) => Formula::And(self.arcs[*a].clone(), self.arcs[*b].clone()),
            Key::Or(a, b) => Formula::Or(self.arcs[*a].clone(), self.arcs[*b].clone()),
            Key::Forall(x, a) => Formula::Forall {
                agree: *x,
                body: self.arcs[*a].clone(),
            },
            Key::Exists(x, a) => Formula::Exists {
                agree: *x,
                body: self.arcs[*a].clone(),
            },
        };
        let id = self.arcs.len();
        self.arcs.push(Arc::new(f));
        self.nodes.insert(key, id);
        id
    }

    fn balanced(&mut self, mut ids: Vec<Id>, and: bool) -> Id {
        ids.sort_unstable();
        ids.dedup();
        self.tree(&ids, and)
    }

    fn tree(&mut self, ids: &[Id], and: bool) -> Id {
        match ids.len() {
            0 => unreachable!("empty junction"),
            1 => ids[0],
            n => {
                let (a, b) = ids.split_at(n / 2);
                let (a, b) = (self.tree(a, and), self.tree(b, and));
                self.intern(if and { Key::And(a, b) } else { Key::Or(a, b) })
            }
        }
    }

    fn chi(&mut self, s: usize, k: usize) -> Id {
        if let Some(&id) = self.memo.get(&(s, k)) {
            return id;
        }
        let id = if k == 0 {
            let lits: Vec<Id> = (0..self.atoms.len())
                .map(|i| self.intern(Key::Atom(i, self.table[s][i])))
                .collect();
            if lits.is_empty() {
                self.intern(Key::Trivial)
            } else {
                self.balanced(lits, true)
            }
        } else {
            let model = self.model;
            let n = model.len();
            let mut parts = Vec::new();
            for x in model.ty().all_vars().subsets() {
                let class: Vec<Id> = (0..n)
                    .filter(|&t| x.is_subset(comvar(model.row(t), model.row(s))))
                    .map(|t| self.chi(t, k - 1))
                    .collect();
                let body = self.balanced(class, false);
                parts.push(self.intern(Key::Forall(x, body)));
            }
            for t in 0..n {
                let sub = self.chi(t, k - 1);
                for x in comvar(model.row(t), model.row(s)).subsets() {
                    parts.push(self.intern(Key::Exists(x, sub)));
                }
            }
            self.balanced(parts, true)
        };
        self.memo.insert((s, k), id);
        id
    }
}

/// `χ^k_s` for row `s` of `model`.
pub fn char_formula(
    model: &DependenceModel,
    row: usize,
    k: usize,
    omega: OmegaProfile,
) -> Result<Arc<Formula>, CharError> {
    CharBuilder::new(model, omega)?.formula(row, k)
}
