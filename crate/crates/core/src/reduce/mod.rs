//! Encoding `∀x∃y∀z φ` sentences (one binary relation, any number of monadic
//! ones, no equality) into four-variable formulas of `L[D,∈]` and `L[D,=]`,
//! with the witness model for a Skolem function and the converse extraction.

mod vd;

pub use vd::rewrite_vd;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::checker::{check_all, CheckError};
use crate::fo::{eval_fo, standard_translation, FoError, FoFormula};
use crate::model::{Assignment, DependenceModel, Elem, ModelError, Structure, DEFAULT_MAX_TEAM};
use crate::syntax::{
    parse_formula, to_nnf, AtomKind, FiniteType, Formula, OmegaProfile, SyntaxError, Var, VarSet,
};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("line {line}: {msg}")]
    Kahr { line: usize, msg: String },
    #[error("matrix: {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fo(#[from] FoError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("function table has {found} entries for a universe of {expected}")]
    FunctionSize { expected: usize, found: usize },
    #[error("matrix fails at x = {a}, y = f({a}), z = {b}")]
    SkolemFails { a: String, b: String },
    #[error("the reduced formula fails at row {0}")]
    ReducedFails(usize),
    #[error("x does not determine y: {0} has two images")]
    NotFunctional(String),
    #[error("the orbit of {0} leaves the x column")]
    OrbitEscapes(String),
    #[error("({a}, {b}) is missing from the (x, z) projection")]
    OrbitNotCovered { a: String, b: String },
    #[error("the extracted structure does not satisfy the sentence")]
    ExtractedNotModel,
    #[error("atom kind {0} is outside D, Y, !=, notin")]
    OutsideVdFragment(AtomKind),
}

/// `∀x∃y∀z φ(x,y,z)` with `φ` quantifier-free and equality-free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KahrSentence {
    binary: String,
    monadic: Vec<String>,
    /// Type with variables `x y z`.
    ty: FiniteType,
    matrix: Formula,
}

impl KahrSentence {
    pub fn new(binary: &str, monadic: &[&str], matrix: &str) -> Result<KahrSentence, ReduceError> {
        let err = |msg: String| ReduceError::Kahr { line: 0, msg };
        let mut rels = vec![(binary.to_string(), 2)];
        rels.extend(monadic.iter().map(|m| (m.to_string(), 1)));
        let ty = FiniteType::new(rels, vec!["x".into(), "y".into(), "z".into()])?;
        let parsed = parse_formula(matrix, &ty)?;
        let mut bad = None;
        parsed.visit_atoms(&mut |a| {
            if bad.is_none() && !matches!(a, Formula::Lit { .. }) {
                bad = a.atom_kind();
            }
        });
        if let Some(kind) = bad {
            return Err(err(match kind {
                AtomKind::Eq | AtomKind::Neq => "equality is not allowed in the matrix".into(),
                k => format!("atom `{k}` is not allowed in the matrix"),
            }));
        }
        if parsed.quantifier_rank() > 0 {
            return Err(err("the matrix must be quantifier-free".into()));
        }
        let matrix = to_nnf(&parsed, OmegaProfile::EMPTY)?;
        Ok(KahrSentence {
            binary: binary.to_string(),
            monadic: monadic.iter().map(|m| m.to_string()).collect(),
            ty,
            matrix,
        })
    }

    pub fn binary(&self) -> &str {
        &self.binary
    }

    pub fn monadic(&self) -> &[String] {
        &self.monadic
    }

    /// The matrix, over the variables `x y z`.
    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    pub fn ty(&self) -> &FiniteType {
        &self.ty
    }

    /// The type of the reduced formulas: same relations, variables `x y z v`.
    pub fn reduced_type(&self) -> FiniteType {
        let vars = ["x", "y", "z", "v"].map(String::from).to_vec();
        FiniteType::new(self.ty.relations().to_vec(), vars).expect("valid type")
    }

    /// The matrix as a first-order formula with free variables `x y z`.
    pub fn matrix_fo(&self) -> FoFormula {
        standard_translation(&self.matrix, &self.ty)
    }

    /// The sentence `∀x∃y∀z φ`.
    pub fn sentence_fo(&self) -> FoFormula {
        FoFormula::forall(
            vec!["x".into()],
            FoFormula::exists(
                vec!["y".into()],
                FoFormula::forall(vec!["z".into()], self.matrix_fo()),
            ),
        )
    }
}

impl fmt::Display for KahrSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "binary {}", self.binary)?;
        let mut line = String::from("monadic");
        for m in &self.monadic {
            line.push(' ');
            line.push_str(m);
        }
        writeln!(f, "{line}")?;
        writeln!(f, "matrix {}", self.matrix.display(&self.ty))
    }
}

/// Reads the three-line `.kahr` format. Blank lines and `#` comments are skipped.
pub fn parse_kahr(text: &str) -> Result<KahrSentence, ReduceError> {
    let mut binary = None;
    let mut monadic = None;
    let mut matrix = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| ReduceError::Kahr { line: i + 1, msg };
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "binary" if binary.is_none() => {
                let names: Vec<&str> = rest.split_whitespace().collect();
                if names.len() != 1 {
                    return Err(err("expected exactly one binary relation".into()));
                }
                binary = Some(names[0].to_string());
            }
            "monadic" if monadic.is_none() => {
                monadic = Some(
                    rest.split_whitespace()
                        .map(String::from)
                        .collect::<Vec<_>>(),
                );
            }
            "matrix" if matrix.is_none() => matrix = Some((i + 1, rest.to_string())),
            "binary" | "monadic" | "matrix" => return Err(err(format!("repeated `{key}` line"))),
            _ => return Err(err(format!("unexpected `{key}`"))),
        }
    }
    let missing = |what: &str| ReduceError::Kahr {
        line: 0,
        msg: format!("missing `{what}` line"),
    };
    let binary = binary.ok_or_else(|| missing("binary"))?;
    let monadic = monadic.unwrap_or_default();
    let (line, matrix) = matrix.ok_or_else(|| missing("matrix"))?;
    let names: Vec<&str> = monadic.iter().map(String::as_str).collect();
    KahrSentence::new(&binary, &names, &matrix).map_err(|e| match e {
        ReduceError::Kahr { msg, .. } => ReduceError::Kahr { line, msg },
        other => other,
    })
}

const X: Var = Var(0);
const Y: Var = Var(1);
const Z: Var = Var(2);
const V: Var = Var(3);

/// Left and right tuples of the six copy rules, over `x y z v`.
const COPY_RULES: [(&[Var], &[Var]); 6] = [
    (&[X, X], &[X, Z]),
    (&[Y, Y, V], &[Y, Z, V]),
    (&[X, Z, X], &[X, Z, V]),
    (&[Y, Z, Y], &[Y, Z, V]),
    (&[Z, Z, V], &[X, Z, V]),
    (&[V, Z, V], &[X, Z, V]),
];

fn frame(psi: &KahrSentence, rules: impl Iterator<Item = Formula>) -> Formula {
    let head = [
        Formula::global(psi.matrix.clone()),
        Formula::global(Formula::Dep {
            on: VarSet::singleton(X),
            target: Y,
        }),
    ];
    Formula::conjunction(head.into_iter().chain(rules).map(std::sync::Arc::new)).expect("nonempty")
}

/// `𝔸φ ∧ 𝔸D_x y ∧ ϑ₀ ∧ … ∧ ϑ₅` with each `ϑᵢ` a global inclusion atom.
pub fn reduce_to_inclusion(psi: &KahrSentence) -> Formula {
    frame(
        psi,
        COPY_RULES.iter().map(|(l, r)| {
            Formula::global(Formula::Incl {
                left: l.to_vec(),
                right: r.to_vec(),
            })
        }),
    )
}

/// As [`reduce_to_inclusion`], with each rule `āb̄ ⊆ āc̄` written `𝔸𝔼_ā(b̄ = c̄)`.
/// Every rule has a single equation.
pub fn reduce_to_equality(psi: &KahrSentence) -> Formula {
    frame(
        psi,
        COPY_RULES.iter().map(|(l, r)| {
            let keep: VarSet = l
                .iter()
                .zip(r.iter())
                .filter(|(a, b)| a == b)
                .map(|(a, _)| *a)
                .collect();
            let (b, c) = l
                .iter()
                .zip(r.iter())
                .find(|(a, b)| a != b)
                .expect("one moved position");
            Formula::global(Formula::exists(keep, Formula::Eq(*b, *c)))
        }),
    )
}

/// The team `{(a, f a, b, c) : a, b, c ∈ A}` over `𝔄`. Fails unless
/// `𝔄 ⊨ φ(a, f a, b)` for all `a, b`.
pub fn witness_model(
    psi: &KahrSentence,
    structure: &Structure,
    f: &[Elem],
) -> Result<DependenceModel, ReduceError> {
    let n = structure.size();
    if f.len() != n || f.iter().any(|e| e.0 as usize >= n) {
        return Err(ReduceError::FunctionSize {
            expected: n,
            found: f.len(),
        });
    }
    check_skolem(psi, structure, |a| f[a.0 as usize])?;
    let size = (n as u128).pow(3);
    if size > DEFAULT_MAX_TEAM as u128 {
        return Err(ModelError::SizeGuard {
            what: "witness team".into(),
            size,
            cap: DEFAULT_MAX_TEAM,
        }
        .into());
    }
    let mut team = Vec::with_capacity(n * n * n);
    for a in structure.elements() {
        for b in structure.elements() {
            for c in structure.elements() {
                team.push(Assignment(vec![a, f[a.0 as usize], b, c]));
            }
        }
    }
    Ok(DependenceModel::new(
        psi.reduced_type(),
        structure.clone(),
        team,
    )?)
}

fn check_skolem(
    psi: &KahrSentence,
    structure: &Structure,
    f: impl Fn(Elem) -> Elem,
) -> Result<(), ReduceError> {
    let matrix = psi.matrix_fo();
    let free = ["x", "y", "z"].map(String::from);
    for a in structure.elements() {
        for b in structure.elements() {
            if !eval_fo(&matrix, structure, &free, &[a, f(a), b])? {
                return Err(ReduceError::SkolemFails {
                    a: structure.token(a).to_string(),
                    b: structure.token(b).to_string(),
                });
            }
        }
    }
    Ok(())
}

/// A classical model read off a model of the reduced formula.
#[derive(Clone, Debug)]
pub struct Extracted {
    /// The input structure restricted to the orbit.
    pub structure: Structure,
    /// The orbit `0, f 0, f f 0, …` in the input structure, in visiting order.
    pub orbit: Vec<Elem>,
    /// `f` on the restricted structure, indexed by element.
    pub function: Vec<Elem>,
}

/// Reads `f` off the `(x, y)` projection, follows its orbit from the `x` value
/// of the first row until it closes, and restricts the structure to the
/// orbit. Checks that the orbit squared lies in the `(x, z)` projection and
/// that the result satisfies the sentence with `f` as Skolem function.
pub fn extract_classical_model(
    model: &DependenceModel,
    psi: &KahrSentence,
) -> Result<Extracted, ReduceError> {
    extract_classical_model_at(model, psi, 0)
}

/// [`extract_classical_model`] starting the orbit at the `x` value of `start`.
pub fn extract_classical_model_at(
    model: &DependenceModel,
    psi: &KahrSentence,
    start: usize,
) -> Result<Extracted, ReduceError> {
    let reduced = reduce_to_inclusion(psi);
    if let Some(row) = check_all(&reduced, model)?.iter().position(|v| !v) {
        return Err(ReduceError::ReducedFails(row));
    }
    let st = model.structure();
    let mut f: HashMap<Elem, Elem> = HashMap::new();
    for s in model.team() {
        let (a, b) = (s.get(X), s.get(Y));
        if *f.entry(a).or_insert(b) != b {
            return Err(ReduceError::NotFunctional(st.token(a).to_string()));
        }
    }
    let mut orbit = vec![model.row(start).get(X)];
    loop {
        let last = *orbit.last().unwrap();
        let next = *f
            .get(&last)
            .ok_or_else(|| ReduceError::OrbitEscapes(st.token(last).to_string()))?;
        if orbit.contains(&next) {
            break;
        }
        orbit.push(next);
    }
    let xz = model.project(&[X, Z]);
    for &a in &orbit {
        for &b in &orbit {
            if !xz.contains(&vec![a, b]) {
                return Err(ReduceError::OrbitNotCovered {
                    a: st.token(a).to_string(),
                    b: st.token(b).to_string(),
                });
            }
        }
    }
    let set: BTreeSet<Elem> = orbit.iter().copied().collect();
    let (structure, map) = st.restrict(&set);
    let mut function = vec![Elem(0); structure.size()];
    for &a in &orbit {
        function[map[&a].0 as usize] = map[&f[&a]];
    }
    check_skolem(psi, &structure, |a| function[a.0 as usize])?;
    if !eval_fo(&psi.sentence_fo(), &structure, &[], &[])? {
        return Err(ReduceError::ExtractedNotModel);
    }
    Ok(Extracted {
        structure,
        orbit,
        function,
    })
}
