use std::fmt;

use super::SyntaxError;

/// Index of a variable in the type's ordered variable list.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a relation symbol in the type's vocabulary.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub u32);

impl RelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Largest number of variables a [`FiniteType`] may declare.
pub const MAX_VARIABLES: usize = 64;

/// A finite set of variables, stored as a bitmask over the type's variable order.
///
/// Iteration always follows the variable order, so two sets are structurally
/// equal exactly when they contain the same variables.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    /// All variables `0..n`.
    pub fn full(n: usize) -> VarSet {
        assert!(n <= MAX_VARIABLES);
        if n == MAX_VARIABLES {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(v: Var) -> VarSet {
        VarSet(1u64 << v.0)
    }

    pub fn from_bits(bits: u64) -> VarSet {
        VarSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1u64 << v.0) != 0
    }

    pub fn insert(&mut self, v: Var) {
        self.0 |= 1u64 << v.0;
    }

    pub fn with(mut self, v: Var) -> VarSet {
        self.insert(v);
        self
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Var(i))
        })
    }

    /// Every subset of `self`, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(VarSet(cur))
        })
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        let mut set = VarSet::EMPTY;
        for v in iter {
            set.insert(v);
        }
        set
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

/// A relational vocabulary together with an ordered, finite variable list.
///
/// The variable order fixes how assignments are encoded as tuples everywhere
/// in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteType {
    relations: Vec<(String, usize)>,
    variables: Vec<String>,
}

pub(crate) const RESERVED_RELATIONS: &[&str] =
    &["not", "in", "notin", "dep", "anon", "incl", "excl", "indep"];

fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FiniteType {
    pub fn new(
        relations: Vec<(String, usize)>,
        variables: Vec<String>,
    ) -> Result<FiniteType, SyntaxError> {
        let invalid = |msg: String| Err(SyntaxError::InvalidType(msg));
        if variables.is_empty() {
            return invalid("variable list is empty".into());
        }
        if variables.len() > MAX_VARIABLES {
            return invalid(format!("more than {MAX_VARIABLES} variables"));
        }
        for (i, v) in variables.iter().enumerate() {
            if !is_identifier(v) || v == "not" {
                return invalid(format!("`{v}` is not a valid variable name"));
            }
            if variables[..i].contains(v) {
                return invalid(format!("variable `{v}` declared twice"));
            }
        }
        for (i, (name, arity)) in relations.iter().enumerate() {
            if !is_identifier(name) || RESERVED_RELATIONS.contains(&name.as_str()) {
                return invalid(format!("`{name}` is not a valid relation name"));
            }
            if *arity == 0 {
                return invalid(format!("relation `{name}` has arity 0"));
            }
            if relations[..i].iter().any(|(n, _)| n == name) {
                return invalid(format!("relation `{name}` declared twice"));
            }
        }
        Ok(FiniteType {
            relations,
            variables,
        })
    }

    /// Convenience constructor from string slices; panics on an invalid type.
    pub fn of(relations: &[(&str, usize)], variables: &[&str]) -> FiniteType {
        FiniteType::new(
            relations.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
            variables.iter().map(|v| v.to_string()).collect(),
        )
        .expect("invalid finite type")
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn all_vars(&self) -> VarSet {
        VarSet::full(self.variables.len())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.variables.len() as u32).map(Var)
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.variables
            .iter()
            .position(|v| v == name)
            .map(|i| Var(i as u32))
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.variables[v.index()]
    }

    pub fn rel(&self, name: &str) -> Option<RelId> {
        self.relations
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| RelId(i as u32))
    }

    pub fn rel_name(&self, r: RelId) -> &str {
        &self.relations[r.index()].0
    }

    pub fn arity(&self, r: RelId) -> usize {
        self.relations[r.index()].1
    }

    /// Variables of `set` as names, in type order.
    pub fn names(&self, set: VarSet) -> Vec<&str> {
        set.iter().map(|v| self.var_name(v)).collect()
    }
}
