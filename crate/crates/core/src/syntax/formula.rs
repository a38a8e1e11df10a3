use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::{FiniteType, RelId, SyntaxError, Var, VarSet};

/// A formula of a localised team logic.
///
/// Children are reference counted so that large generated formulas (the
/// characteristic formulas in particular) can share subformulas. `Not` is a
/// sugar node: every evaluator expects formulas that went through [`to_nnf`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `R x̄` when `positive`, `¬R x̄` otherwise.
    Lit {
        positive: bool,
        rel: RelId,
        args: Vec<Var>,
    },
    Eq(Var, Var),
    Neq(Var, Var),
    /// Local dependence `D_X y`.
    Dep {
        on: VarSet,
        target: Var,
    },
    /// Local anonymity `Υ_X y`.
    Anon {
        on: VarSet,
        target: Var,
    },
    /// Local inclusion `x̄ ∈ ȳ`.
    Incl {
        left: Vec<Var>,
        right: Vec<Var>,
    },
    /// Local exclusion `x̄ ∉ ȳ`.
    Excl {
        left: Vec<Var>,
        right: Vec<Var>,
    },
    /// Local independence `Ind_x̄(ȳ)`; the tuples may differ in length.
    Ind {
        left: Vec<Var>,
        right: Vec<Var>,
    },
    /// Negated local independence.
    NInd {
        left: Vec<Var>,
        right: Vec<Var>,
    },
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    /// `𝔻_X φ`: φ holds at every team assignment agreeing with the current one on X.
    Forall {
        agree: VarSet,
        body: Arc<Formula>,
    },
    /// `𝔼_X φ`: φ holds at some team assignment agreeing with the current one on X.
    Exists {
        agree: VarSet,
        body: Arc<Formula>,
    },
    Not(Arc<Formula>),
}

/// The kinds of local atoms a logic may enable.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Dep,
    Anon,
    Eq,
    Neq,
    Incl,
    Excl,
    Ind,
    NInd,
}

impl AtomKind {
    pub const ALL: [AtomKind; 8] = [
        AtomKind::Dep,
        AtomKind::Anon,
        AtomKind::Eq,
        AtomKind::Neq,
        AtomKind::Incl,
        AtomKind::Excl,
        AtomKind::Ind,
        AtomKind::NInd,
    ];

    pub fn dual(self) -> AtomKind {
        use AtomKind::*;
        match self {
            Dep => Anon,
            Anon => Dep,
            Eq => Neq,
            Neq => Eq,
            Incl => Excl,
            Excl => Incl,
            Ind => NInd,
            NInd => Ind,
        }
    }

    pub fn symbol(self) -> &'static str {
        use AtomKind::*;
        match self {
            Dep => "D",
            Anon => "Y",
            Eq => "=",
            Neq => "!=",
            Incl => "in",
            Excl => "notin",
            Ind => "Ind",
            NInd => "nInd",
        }
    }

    pub fn from_symbol(s: &str) -> Option<AtomKind> {
        AtomKind::ALL.into_iter().find(|k| k.symbol() == s)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for AtomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The set Ω of enabled local atom kinds.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash)]
pub struct OmegaProfile(u8);

impl OmegaProfile {
    pub const EMPTY: OmegaProfile = OmegaProfile(0);
    pub const ALL: OmegaProfile = OmegaProfile(0xff);
    /// `L[D,Υ]`, equivalent to LFD.
    pub const LFD: OmegaProfile = OmegaProfile(0b11);
    /// `L[D,Υ,=,≠]`, equivalent to LFD with equality.
    pub const LFD_EQ: OmegaProfile = OmegaProfile(0b1111);

    pub const fn of(kinds: &[AtomKind]) -> OmegaProfile {
        let mut bits = 0;
        let mut i = 0;
        while i < kinds.len() {
            bits |= 1 << (kinds[i] as u8);
            i += 1;
        }
        OmegaProfile(bits)
    }

    pub fn contains(self, kind: AtomKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn insert(&mut self, kind: AtomKind) {
        self.0 |= kind.bit();
    }

    pub fn union(self, other: OmegaProfile) -> OmegaProfile {
        OmegaProfile(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = AtomKind> {
        AtomKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Whether every dual pair touched by the profile is fully contained.
    pub fn is_negation_closed(self) -> bool {
        self.iter().all(|k| self.contains(k.dual()))
    }

    pub fn negation_closure(self) -> OmegaProfile {
        self.iter()
            .map(AtomKind::dual)
            .collect::<OmegaProfile>()
            .union(self)
    }

    /// Parses a comma- or space-separated list such as `D,Y,=,!=`.
    pub fn parse(text: &str) -> Result<OmegaProfile, SyntaxError> {
        let mut profile = OmegaProfile::EMPTY;
        for item in text.split([',', ' ']).filter(|s| !s.is_empty()) {
            let kind = AtomKind::from_symbol(item).ok_or_else(|| SyntaxError::Parse {
                pos: 0,
                msg: format!("unknown atom kind `{item}`"),
            })?;
            profile.insert(kind);
        }
        Ok(profile)
    }
}

impl FromIterator<AtomKind> for OmegaProfile {
    fn from_iter<I: IntoIterator<Item = AtomKind>>(iter: I) -> Self {
        let mut p = OmegaProfile::EMPTY;
        for k in iter {
            p.insert(k);
        }
        p
    }
}

impl fmt::Display for OmegaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.iter().map(AtomKind::symbol).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for OmegaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Formula {
    pub fn lit(rel: RelId, args: Vec<Var>) -> Formula {
        Formula::Lit {
            positive: true,
            rel,
            args,
        }
    }

    pub fn neg_lit(rel: RelId, args: Vec<Var>) -> Formula {
        Formula::Lit {
            positive: false,
            rel,
            args,
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn forall(agree: VarSet, body: Formula) -> Formula {
        Formula::Forall {
            agree,
            body: Arc::new(body),
        }
    }

    pub fn exists(agree: VarSet, body: Formula) -> Formula {
        Formula::Exists {
            agree,
            body: Arc::new(body),
        }
    }

    /// The global modality `𝔸 = 𝔻_∅`.
    pub fn global(body: Formula) -> Formula {
        Formula::forall(VarSet::EMPTY, body)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(body: Formula) -> Formula {
        Formula::Not(Arc::new(body))
    }

    /// Left-nested conjunction; `None` for an empty iterator.
    pub fn conjunction<I>(items: I) -> Option<Formula>
    where
        I: IntoIterator<Item = Arc<Formula>>,
    {
        items
            .into_iter()
            .reduce(|acc, f| Arc::new(Formula::And(acc, f)))
            .map(Arc::unwrap_or_clone)
    }

    /// Left-nested disjunction; `None` for an empty iterator.
    pub fn disjunction<I>(items: I) -> Option<Formula>
    where
        I: IntoIterator<Item = Arc<Formula>>,
    {
        items
            .into_iter()
            .reduce(|acc, f| Arc::new(Formula::Or(acc, f)))
            .map(Arc::unwrap_or_clone)
    }

    /// The atom kind of a local atom node, `None` for literals and connectives.
    pub fn atom_kind(&self) -> Option<AtomKind> {
        use Formula::*;
        Some(match self {
            Eq(..) => AtomKind::Eq,
            Neq(..) => AtomKind::Neq,
            Dep { .. } => AtomKind::Dep,
            Anon { .. } => AtomKind::Anon,
            Incl { .. } => AtomKind::Incl,
            Excl { .. } => AtomKind::Excl,
            Ind { .. } => AtomKind::Ind,
            NInd { .. } => AtomKind::NInd,
            _ => return None,
        })
    }

    /// True for relational literals and local atoms.
    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Lit { .. }) || self.atom_kind().is_some()
    }

    /// The dual of an atomic formula (its negation as an atom).
    pub fn dual_atom(&self) -> Option<Formula> {
        use Formula::*;
        Some(match self {
            Lit {
                positive,
                rel,
                args,
            } => Lit {
                positive: !positive,
                rel: *rel,
                args: args.clone(),
            },
            Eq(x, y) => Neq(*x, *y),
            Neq(x, y) => Eq(*x, *y),
            Dep { on, target } => Anon {
                on: *on,
                target: *target,
            },
            Anon { on, target } => Dep {
                on: *on,
                target: *target,
            },
            Incl { left, right } => Excl {
                left: left.clone(),
                right: right.clone(),
            },
            Excl { left, right } => Incl {
                left: left.clone(),
                right: right.clone(),
            },
            Ind { left, right } => NInd {
                left: left.clone(),
                right: right.clone(),
            },
            NInd { left, right } => Ind {
                left: left.clone(),
                right: right.clone(),
            },
            _ => return None,
        })
    }

    /// Free variables. `Not` is transparent.
    pub fn free_vars(&self) -> VarSet {
        use Formula::*;
        match self {
            Lit { args, .. } => args.iter().copied().collect(),
            Eq(x, y) | Neq(x, y) => VarSet::singleton(*x).with(*y),
            Dep { on, .. } | Anon { on, .. } => *on,
            Incl { left, .. } | Excl { left, .. } | Ind { left, .. } | NInd { left, .. } => {
                left.iter().copied().collect()
            }
            And(a, b) | Or(a, b) => a.free_vars().union(b.free_vars()),
            Forall { agree, .. } | Exists { agree, .. } => *agree,
            Not(a) => a.free_vars(),
        }
    }

    /// Quantifier rank: nesting depth of `𝔻`/`𝔼`. Shared subformulas are visited once.
    pub fn quantifier_rank(&self) -> usize {
        fn go(f: &Formula, memo: &mut HashMap<*const Formula, usize>) -> usize {
            let key = f as *const Formula;
            if let Some(&r) = memo.get(&key) {
                return r;
            }
            let r = match f {
                Formula::And(a, b) | Formula::Or(a, b) => go(a, memo).max(go(b, memo)),
                Formula::Forall { body, .. } | Formula::Exists { body, .. } => go(body, memo) + 1,
                Formula::Not(a) => go(a, memo),
                _ => 0,
            };
            memo.insert(key, r);
            r
        }
        go(self, &mut HashMap::new())
    }

    pub fn contains_not(&self) -> bool {
        use Formula::*;
        match self {
            Not(_) => true,
            And(a, b) | Or(a, b) => a.contains_not() || b.contains_not(),
            Forall { body, .. } | Exists { body, .. } => body.contains_not(),
            _ => false,
        }
    }

    /// The local atom kinds occurring in the formula.
    pub fn omega(&self) -> OmegaProfile {
        let mut profile = OmegaProfile::EMPTY;
        self.visit_atoms(&mut |a| {
            if let Some(k) = a.atom_kind() {
                profile.insert(k);
            }
        });
        profile
    }

    /// Calls `f` on every atomic node (with multiplicity).
    pub fn visit_atoms(&self, f: &mut impl FnMut(&Formula)) {
        use Formula::*;
        match self {
            And(a, b) | Or(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Forall { body, .. } | Exists { body, .. } | Not(body) => body.visit_atoms(f),
            atom => f(atom),
        }
    }

    /// Number of occurrences of each local atom kind, plus literal and quantifier totals.
    pub fn census(&self) -> Census {
        let mut census = Census::default();
        fn go(f: &Formula, c: &mut Census) {
            match f {
                Formula::And(a, b) | Formula::Or(a, b) => {
                    go(a, c);
                    go(b, c);
                }
                Formula::Forall { body, .. } | Formula::Exists { body, .. } => {
                    c.quantifiers += 1;
                    go(body, c);
                }
                Formula::Not(a) => go(a, c),
                Formula::Lit { .. } => c.literals += 1,
                atom => {
                    let kind = atom.atom_kind().expect("atomic node");
                    *c.atoms.entry(kind).or_default() += 1;
                }
            }
        }
        go(self, &mut census);
        census
    }

    /// Checks variable ranges, relation arities and tuple shapes against `ty`.
    pub fn validate(&self, ty: &FiniteType) -> Result<(), SyntaxError> {
        let mut seen = std::collections::HashSet::new();
        self.validate_inner(ty, &mut seen)
    }

    fn validate_inner(
        &self,
        ty: &FiniteType,
        seen: &mut std::collections::HashSet<*const Formula>,
    ) -> Result<(), SyntaxError> {
        use Formula::*;
        if !seen.insert(self as *const Formula) {
            return Ok(());
        }
        let n = ty.num_vars();
        let check_var = |v: &Var| {
            if v.index() < n {
                Ok(())
            } else {
                Err(SyntaxError::UnknownVariable {
                    name: format!("#{}", v.0),
                    pos: 0,
                })
            }
        };
        let check_set = |s: &VarSet| {
            if s.is_subset(ty.all_vars()) {
                Ok(())
            } else {
                Err(SyntaxError::UnknownVariable {
                    name: format!("{s:?}"),
                    pos: 0,
                })
            }
        };
        let check_tuples =
            |l: &Vec<Var>, r: &Vec<Var>, same_len: bool| -> Result<(), SyntaxError> {
                if l.is_empty() || r.is_empty() {
                    return Err(SyntaxError::EmptyTuple { pos: 0 });
                }
                if same_len && l.len() != r.len() {
                    return Err(SyntaxError::TupleLength {
                        left: l.len(),
                        right: r.len(),
                        pos: 0,
                    });
                }
                l.iter().chain(r).try_for_each(check_var)
            };
        match self {
            Lit { rel, args, .. } => {
                if rel.index() >= ty.relations().len() {
                    return Err(SyntaxError::UnknownRelation {
                        name: format!("#{}", rel.0),
                        pos: 0,
                    });
                }
                if args.len() != ty.arity(*rel) {
                    return Err(SyntaxError::ArityMismatch {
                        rel: ty.rel_name(*rel).to_string(),
                        expected: ty.arity(*rel),
                        found: args.len(),
                        pos: 0,
                    });
                }
                args.iter().try_for_each(check_var)
            }
            Eq(x, y) | Neq(x, y) => check_var(x).and(check_var(y)),
            Dep { on, target } | Anon { on, target } => check_set(on).and(check_var(target)),
            Incl { left, right } | Excl { left, right } => check_tuples(left, right, true),
            Ind { left, right } | NInd { left, right } => check_tuples(left, right, false),
            And(a, b) | Or(a, b) => {
                a.validate_inner(ty, seen)?;
                b.validate_inner(ty, seen)
            }
            Forall { agree, body } | Exists { agree, body } => {
                check_set(agree)?;
                body.validate_inner(ty, seen)
            }
            Not(a) => a.validate_inner(ty, seen),
        }
    }
}

/// Atom occurrence counts, see [`Formula::census`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub atoms: BTreeMap<AtomKind, usize>,
    pub literals: usize,
    pub quantifiers: usize,
}

impl Census {
    pub fn count(&self, kind: AtomKind) -> usize {
        self.atoms.get(&kind).copied().unwrap_or(0)
    }
}

/// Pushes negation to the atoms and removes every `Not` node.
///
/// Fails when a resulting atom kind is not enabled in `omega`.
pub fn to_nnf(formula: &Formula, omega: OmegaProfile) -> Result<Formula, SyntaxError> {
    nnf(formula, true, omega)
}

fn nnf(f: &Formula, positive: bool, omega: OmegaProfile) -> Result<Formula, SyntaxError> {
    use Formula::*;
    Ok(match f {
        Not(a) => nnf(a, !positive, omega)?,
        And(a, b) | Or(a, b) => {
            let (a, b) = (nnf(a, positive, omega)?, nnf(b, positive, omega)?);
            let conj = matches!(f, And(..)) == positive;
            if conj {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Forall { agree, body } | Exists { agree, body } => {
            let body = nnf(body, positive, omega)?;
            let universal = matches!(f, Forall { .. }) == positive;
            if universal {
                Formula::forall(*agree, body)
            } else {
                Formula::exists(*agree, body)
            }
        }
        atom => {
            let out = if positive {
                atom.clone()
            } else {
                atom.dual_atom().expect("atomic node")
            };
            if let Some(kind) = out.atom_kind() {
                if !omega.contains(kind) {
                    return Err(SyntaxError::AtomNotInProfile(kind));
                }
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> FiniteType {
        FiniteType::of(&[("P", 1), ("R", 2)], &["x", "y", "z"])
    }

    #[test]
    fn free_vars_follow_locality_conventions() {
        let (x, y, z) = (Var(0), Var(1), Var(2));
        let dep = Formula::Dep {
            on: VarSet::singleton(x),
            target: y,
        };
        assert_eq!(dep.free_vars(), VarSet::singleton(x));
        let p = xyz().rel("P").unwrap();
        let masked = Formula::exists(VarSet::EMPTY, Formula::lit(p, vec![x]));
        assert!(masked.free_vars().is_empty());
        let incl = Formula::Incl {
            left: vec![x, y],
            right: vec![y, z],
        };
        assert_eq!(incl.free_vars(), VarSet::singleton(x).with(y));
    }

    #[test]
    fn quantifier_rank_examples() {
        let (x, y) = (Var(0), Var(1));
        let ty = xyz();
        let (p, r) = (ty.rel("P").unwrap(), ty.rel("R").unwrap());
        let dep = Formula::Dep {
            on: VarSet::singleton(x),
            target: y,
        };
        assert_eq!(dep.quantifier_rank(), 0);
        let nested = Formula::forall(
            VarSet::singleton(x),
            Formula::exists(VarSet::singleton(y), Formula::lit(r, vec![x, y])),
        );
        assert_eq!(nested.quantifier_rank(), 2);
        let mixed = Formula::and(
            Formula::global(Formula::lit(p, vec![x])),
            Formula::lit(p, vec![y]),
        );
        assert_eq!(mixed.quantifier_rank(), 1);
    }

    #[test]
    fn nnf_dualises_quantifiers_and_atoms() {
        let (x, y) = (Var(0), Var(1));
        let p = xyz().rel("P").unwrap();
        let f = Formula::not(Formula::forall(
            VarSet::singleton(x),
            Formula::not(Formula::lit(p, vec![y])),
        ));
        assert_eq!(
            to_nnf(&f, OmegaProfile::EMPTY).unwrap(),
            Formula::exists(VarSet::singleton(x), Formula::lit(p, vec![y]))
        );
        let dep = Formula::Dep {
            on: VarSet::singleton(x),
            target: y,
        };
        assert_eq!(
            to_nnf(&Formula::not(dep.clone()), OmegaProfile::LFD).unwrap(),
            Formula::Anon {
                on: VarSet::singleton(x),
                target: y
            }
        );
        assert_eq!(
            to_nnf(&Formula::not(dep), OmegaProfile::of(&[AtomKind::Dep])),
            Err(SyntaxError::AtomNotInProfile(AtomKind::Anon))
        );
        let px = Formula::lit(p, vec![x]);
        assert_eq!(
            to_nnf(&Formula::not(Formula::not(px.clone())), OmegaProfile::EMPTY).unwrap(),
            px
        );
    }

    #[test]
    fn profile_closure() {
        let p = OmegaProfile::of(&[AtomKind::Dep, AtomKind::Incl]);
        assert!(!p.is_negation_closed());
        let c = p.negation_closure();
        assert!(c.is_negation_closed());
        assert_eq!(c, OmegaProfile::parse("D,Y,in,notin").unwrap());
        assert!(OmegaProfile::LFD_EQ.is_negation_closed());
    }
}
