//! Finite structures, teams and dependence models, with the model
//! transformations: full teams, variable-distinguishing, disjoint unions and
//! teams defined by a first-order formula.

mod dm;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::fo::{self, FoFormula};
use crate::syntax::{FiniteType, RelId, Var};

pub use dm::{load_model, parse_dm, write_model, DmFile};

/// Default cap on the number of assignments a generated team may have.
pub const DEFAULT_MAX_TEAM: usize = 1_000_000;

/// An element of a structure, as an index into its universe.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub u32);

/// Values of the type's variables, in variable order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<Elem>);

impl std::borrow::Borrow<[Elem]> for Assignment {
    fn borrow(&self) -> &[Elem] {
        &self.0
    }
}

impl Assignment {
    pub fn from_indices(values: &[u32]) -> Assignment {
        Assignment(values.iter().map(|&v| Elem(v)).collect())
    }

    pub fn get(&self, v: Var) -> Elem {
        self.0[v.index()]
    }

    pub fn project(&self, vars: &[Var]) -> Vec<Elem> {
        vars.iter().map(|v| self.get(*v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("the team is empty")]
    EmptyTeam,
    #[error("duplicate team row {0}")]
    DuplicateRow(String),
    #[error("{what} has {found} component(s), expected {expected}")]
    ArityMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("universe is empty")]
    EmptyUniverse,
    #[error("duplicate universe element `{0}`")]
    DuplicateElement(String),
    #[error("{what} would have {size} assignments, above the cap of {cap}")]
    SizeGuard {
        what: String,
        size: u128,
        cap: usize,
    },
    #[error("structure does not match the type: {0}")]
    TypeMismatch(String),
    #[error("assignment {0} is not in the team")]
    NotInTeam(String),
    #[error("team formula: {0}")]
    Fo(#[from] fo::FoError),
}

/// Interpretation of one relation symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Elem>>,
}

/// A finite relational structure with opaque element tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    universe: Vec<String>,
    index: HashMap<String, Elem>,
    relations: Vec<Relation>,
}

impl Structure {
    pub fn new(universe: Vec<String>) -> Result<Structure, ModelError> {
        if universe.is_empty() {
            return Err(ModelError::EmptyUniverse);
        }
        let mut index = HashMap::new();
        for (i, tok) in universe.iter().enumerate() {
            if index.insert(tok.clone(), Elem(i as u32)).is_some() {
                return Err(ModelError::DuplicateElement(tok.clone()));
            }
        }
        Ok(Structure {
            universe,
            index,
            relations: Vec::new(),
        })
    }

    /// Universe `0, 1, …, n-1`.
    pub fn numeric(n: usize) -> Structure {
        Structure::new((0..n).map(|i| i.to_string()).collect()).expect("nonempty universe")
    }

    pub fn add_relation<I>(&mut self, name: &str, arity: usize, tuples: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = Vec<Elem>>,
    {
        if self.relation(name).is_some() {
            return Err(ModelError::TypeMismatch(format!(
                "relation `{name}` interpreted twice"
            )));
        }
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(ModelError::ArityMismatch {
                    what: format!("tuple of `{name}`"),
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(e) = t.iter().find(|e| e.0 as usize >= self.universe.len()) {
                return Err(ModelError::UnknownElement(format!("#{}", e.0)));
            }
            set.insert(t);
        }
        self.relations.push(Relation {
            name: name.to_string(),
            arity,
            tuples: set,
        });
        Ok(())
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.universe.len() as u32).map(Elem)
    }

    pub fn elem(&self, token: &str) -> Option<Elem> {
        self.index.get(token).copied()
    }

    pub fn token(&self, e: Elem) -> &str {
        &self.universe[e.0 as usize]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn tokens(&self, tuple: &[Elem]) -> String {
        let parts: Vec<&str> = tuple.iter().map(|e| self.token(*e)).collect();
        parts.join(" ")
    }

    /// Reads a whitespace-separated tuple of element tokens.
    pub fn parse_tuple(&self, text: &str) -> Result<Vec<Elem>, ModelError> {
        text.split_whitespace()
            .map(|t| {
                self.elem(t)
                    .ok_or_else(|| ModelError::UnknownElement(t.to_string()))
            })
            .collect()
    }

    /// The substructure on `elems` (universe order preserved), with the map
    /// from old to new elements.
    pub fn restrict(&self, elems: &BTreeSet<Elem>) -> (Structure, HashMap<Elem, Elem>) {
        let universe: Vec<String> = elems.iter().map(|e| self.token(*e).to_string()).collect();
        let map: HashMap<Elem, Elem> = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, Elem(i as u32)))
            .collect();
        let mut out = Structure::new(universe).expect("restriction to a nonempty set");
        for r in &self.relations {
            let tuples = r
                .tuples
                .iter()
                .filter(|t| t.iter().all(|e| map.contains_key(e)))
                .map(|t| t.iter().map(|e| map[e]).collect());
            out.add_relation(&r.name, r.arity, tuples)
                .expect("valid tuples");
        }
        (out, map)
    }
}

/// A structure with a nonempty team of distinct assignments over the type's variables.
#[derive(Clone, Debug)]
pub struct DependenceModel {
    ty: FiniteType,
    structure: Structure,
    rel_map: Vec<usize>,
    team: Vec<Assignment>,
    rows: HashMap<Assignment, usize>,
}

impl DependenceModel {
    pub fn new(
        ty: FiniteType,
        structure: Structure,
        team: Vec<Assignment>,
    ) -> Result<DependenceModel, ModelError> {
        let mut rel_map = Vec::with_capacity(ty.relations().len());
        for (name, arity) in ty.relations() {
            let pos = structure
                .relations
                .iter()
                .position(|r| &r.name == name)
                .ok_or_else(|| {
                    ModelError::TypeMismatch(format!("relation `{name}` is not interpreted"))
                })?;
            if structure.relations[pos].arity != *arity {
                return Err(ModelError::TypeMismatch(format!(
                    "relation `{name}` has arity {} in the structure, {arity} in the type",
                    structure.relations[pos].arity
                )));
            }
            rel_map.push(pos);
        }
        if team.is_empty() {
            return Err(ModelError::EmptyTeam);
        }
        let mut rows = HashMap::with_capacity(team.len());
        for (i, s) in team.iter().enumerate() {
            if s.0.len() != ty.num_vars() {
                return Err(ModelError::ArityMismatch {
                    what: "team row".into(),
                    expected: ty.num_vars(),
                    found: s.0.len(),
                });
            }
            if let Some(e) = s.0.iter().find(|e| e.0 as usize >= structure.size()) {
                return Err(ModelError::UnknownElement(format!("#{}", e.0)));
            }
            if rows.insert(s.clone(), i).is_some() {
                return Err(ModelError::DuplicateRow(structure.tokens(&s.0)));
            }
        }
        Ok(DependenceModel {
            ty,
            structure,
            rel_map,
            team,
            rows,
        })
    }

    pub fn ty(&self) -> &FiniteType {
        &self.ty
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn team(&self) -> &[Assignment] {
        &self.team
    }

    pub fn len(&self) -> usize {
        self.team.len()
    }

    pub fn is_empty(&self) -> bool {
        self.team.is_empty()
    }

    pub fn row(&self, i: usize) -> &Assignment {
        &self.team[i]
    }

    pub fn row_of(&self, s: &Assignment) -> Option<usize> {
        self.rows.get(s).copied()
    }

    pub fn row_of_values(&self, values: &[Elem]) -> Option<usize> {
        self.rows.get(values).copied()
    }

    pub fn value(&self, row: usize, v: Var) -> Elem {
        self.team[row].0[v.index()]
    }

    pub fn holds(&self, rel: RelId, args: &[Elem]) -> bool {
        self.structure.relations[self.rel_map[rel.index()]]
            .tuples
            .contains(args)
    }

    /// Reads an assignment given as element tokens in variable order.
    pub fn parse_assignment(&self, text: &str) -> Result<Assignment, ModelError> {
        let values = self.structure.parse_tuple(text)?;
        if values.len() != self.ty.num_vars() {
            return Err(ModelError::ArityMismatch {
                what: "assignment".into(),
                expected: self.ty.num_vars(),
                found: values.len(),
            });
        }
        Ok(Assignment(values))
    }

    /// Like [`parse_assignment`](Self::parse_assignment) but also requires team membership.
    pub fn parse_row(&self, text: &str) -> Result<usize, ModelError> {
        let s = self.parse_assignment(text)?;
        self.row_of(&s)
            .ok_or_else(|| ModelError::NotInTeam(text.trim().to_string()))
    }

    pub fn format_assignment(&self, s: &Assignment) -> String {
        self.structure.tokens(&s.0)
    }

    /// `T(x̄)`.
    pub fn project(&self, vars: &[Var]) -> BTreeSet<Vec<Elem>> {
        self.team.iter().map(|s| s.project(vars)).collect()
    }
}

impl fmt::Display for DependenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_model(self))
    }
}

/// `T(x̄) = { s(x̄) : s ∈ T }`.
pub fn project(model: &DependenceModel, vars: &[Var]) -> BTreeSet<Vec<Elem>> {
    model.project(vars)
}

fn check_size(what: &str, base: usize, exp: usize, cap: usize) -> Result<usize, ModelError> {
    let size = (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(ModelError::SizeGuard {
            what: what.to_string(),
            size,
            cap,
        });
    }
    Ok(size as usize)
}

/// All of `M^n` in lexicographic order.
fn all_tuples(m: usize, n: usize) -> impl Iterator<Item = Vec<Elem>> {
    let total = m.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut t = vec![Elem(0); n];
        for slot in t.iter_mut().rev() {
            *slot = Elem((code % m) as u32);
            code /= m;
        }
        t
    })
}

/// The model whose team is the whole assignment space `M^𝒱`.
pub fn full_team(
    structure: &Structure,
    ty: &FiniteType,
    max_team: usize,
) -> Result<DependenceModel, ModelError> {
    check_size("full team", structure.size(), ty.num_vars(), max_team)?;
    let team = all_tuples(structure.size(), ty.num_vars())
        .map(Assignment)
        .collect();
    DependenceModel::new(ty.clone(), structure.clone(), team)
}

/// Result of a model transformation that maps team rows to team rows.
#[derive(Clone, Debug)]
pub struct Transformed {
    pub model: DependenceModel,
    /// `row_map[i]` is the row of the new model corresponding to row `i` of the input.
    pub row_map: Vec<usize>,
}

/// Replaces each value `s(x)` by the pair `(s(x),x)`, making the value columns
/// pairwise disjoint. A relation holds of a tuple of pairs iff it holds of
/// their first components.
pub fn variable_distinguished(model: &DependenceModel) -> Transformed {
    let ty = model.ty();
    let st = model.structure();
    let n = ty.num_vars();
    let pair = |e: Elem, v: usize| Elem((e.0 as usize * n + v) as u32);
    let mut universe = Vec::with_capacity(st.size() * n);
    for e in st.elements() {
        for v in ty.vars() {
            universe.push(format!("({},{})", st.token(e), ty.var_name(v)));
        }
    }
    let mut out = Structure::new(universe).expect("nonempty");
    for r in st.relations() {
        let mut tuples = Vec::new();
        for t in &r.tuples {
            for tags in all_tuples(n, r.arity) {
                tuples.push(
                    t.iter()
                        .zip(&tags)
                        .map(|(e, v)| pair(*e, v.0 as usize))
                        .collect(),
                );
            }
        }
        out.add_relation(&r.name, r.arity, tuples).expect("valid");
    }
    let team = model
        .team()
        .iter()
        .map(|s| Assignment(s.0.iter().enumerate().map(|(v, e)| pair(*e, v)).collect()))
        .collect();
    let model = DependenceModel::new(ty.clone(), out, team).expect("bijective image");
    Transformed {
        row_map: (0..model.len()).collect(),
        model,
    }
}

/// Whether `T(x) ∩ T(y) = ∅` for all distinct variables.
pub fn is_variable_distinguished(model: &DependenceModel) -> bool {
    let cols: Vec<BTreeSet<Elem>> = model
        .ty()
        .vars()
        .map(|v| model.team().iter().map(|s| s.get(v)).collect())
        .collect();
    cols.iter()
        .enumerate()
        .all(|(i, a)| cols[i + 1..].iter().all(|b| a.is_disjoint(b)))
}

/// Disjoint union of two models of the same type. Elements are tagged `L:` and
/// `R:`; the left team's rows come first.
pub fn disjoint_union(
    left: &DependenceModel,
    right: &DependenceModel,
) -> Result<DependenceModel, ModelError> {
    if left.ty() != right.ty() {
        return Err(ModelError::TypeMismatch(
            "disjoint union of models of different types".into(),
        ));
    }
    let (a, b) = (left.structure(), right.structure());
    let offset = a.size() as u32;
    let universe = a
        .universe()
        .iter()
        .map(|t| format!("L:{t}"))
        .chain(b.universe().iter().map(|t| format!("R:{t}")))
        .collect();
    let mut out = Structure::new(universe)?;
    let shift = |t: &Vec<Elem>| t.iter().map(|e| Elem(e.0 + offset)).collect::<Vec<_>>();
    for (name, arity) in left.ty().relations() {
        let ra = a.relation(name).expect("typed");
        let rb = b.relation(name).expect("typed");
        let tuples = ra.tuples.iter().cloned().chain(rb.tuples.iter().map(shift));
        out.add_relation(name, *arity, tuples)?;
    }
    let team = left
        .team()
        .iter()
        .cloned()
        .chain(right.team().iter().map(|s| Assignment(shift(&s.0))))
        .collect();
    DependenceModel::new(left.ty().clone(), out, team)
}

/// The team `{ t̄ ∈ M^𝒱 : 𝔐 ⊨ φ_T(t̄) }`, together with the largest number of
/// free variables of a subformula of `φ_T`.
pub fn materialize_fo_team(
    structure: &Structure,
    ty: &FiniteType,
    team_formula: &FoFormula,
    max_team: usize,
) -> Result<(DependenceModel, usize), ModelError> {
    check_size(
        "team candidate space",
        structure.size(),
        ty.num_vars(),
        max_team,
    )?;
    let vars: Vec<String> = ty.variables().to_vec();
    let compiled = fo::Compiled::new(team_formula, structure, &vars)?;
    let team: Vec<Assignment> = all_tuples(structure.size(), ty.num_vars())
        .filter(|t| compiled.eval(t))
        .map(Assignment)
        .collect();
    let bound = fo::max_free_vars(team_formula);
    Ok((
        DependenceModel::new(ty.clone(), structure.clone(), team)?,
        bound,
    ))
}
