use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use teamlogic::bisim::{bisimilarity, Depth};
use teamlogic::charform::char_formula;
use teamlogic::checker::Evaluator;
use teamlogic::fo::{self, AtomStyle};
use teamlogic::model::{
    disjoint_union, load_model, materialize_fo_team, parse_dm, variable_distinguished, write_model,
    DependenceModel, DEFAULT_MAX_TEAM,
};
use teamlogic::reduce::{parse_kahr, reduce_to_equality, reduce_to_inclusion, rewrite_vd};
use teamlogic::syntax::{
    parse_formula, parse_formula_infer, to_nnf, FiniteType, Formula, OmegaProfile,
};

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(io::stdout(), $($arg)*)?
    };
}

const MAX_CHAR_DEPTH: usize = 4;

#[derive(Parser)]
#[command(
    name = "teamlogic",
    version,
    about = "Localised team logics over finite dependence models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at one assignment of a team.
    Check {
        /// Model file (.dm).
        #[arg(long, short)]
        model: Option<PathBuf>,
        #[arg(value_name = "MODEL", conflicts_with = "model")]
        model_pos: Option<PathBuf>,
        #[arg(long, short)]
        formula: String,
        /// The assignment, as space separated element names in variable order.
        #[arg(long)]
        at: String,
        /// Atom kinds allowed in the formula, e.g. "D,Y" (default: those it uses).
        #[arg(long)]
        omega: Option<String>,
        /// Take the team to be the tuples satisfying this first-order formula.
        #[arg(long)]
        team_fo: Option<String>,
        /// Expected bound on free variables per subformula of the team formula.
        #[arg(long, requires = "team_fo")]
        bound: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_TEAM)]
        max_team: usize,
    },
    /// Decide bisimilarity of two pointed models.
    Bisim {
        #[arg(long)]
        left: Option<PathBuf>,
        #[arg(long)]
        right: Option<PathBuf>,
        #[arg(value_name = "LEFT RIGHT", num_args = 0..=2)]
        files: Vec<PathBuf>,
        #[arg(long)]
        at_left: String,
        #[arg(long)]
        at_right: String,
        /// A stage number or `fix`.
        #[arg(long, default_value = "fix")]
        depth: String,
        #[arg(long, default_value = "D,Y")]
        omega: String,
        /// Explain why the points are not related.
        #[arg(long)]
        witness: bool,
    },
    /// Print the characteristic formula of a point.
    Charform {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "D,Y")]
        omega: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translate a formula into first-order logic.
    Translate {
        #[arg(long, value_enum, default_value_t = Mode::Standard)]
        mode: Mode,
        #[arg(long, short)]
        formula: String,
        /// Take the type from this model instead of inferring it.
        #[arg(long, short)]
        model: Option<PathBuf>,
    },
    /// Encode a `.kahr` sentence as a four-variable team formula.
    Reduce {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Incl)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variable-distinguished transform of a model, and the matching formula rewrite.
    Vd {
        #[arg(long, short)]
        model: Option<PathBuf>,
        #[arg(long, short)]
        formula: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disjoint union of two models.
    Union {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Standard,
    Modal,
    Guarded,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Incl,
    Eq,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn model_file(path: &Path) -> Result<DependenceModel> {
    load_model(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            write!(io::stdout(), "{text}")?;
            Ok(())
        }
    }
}

fn omega_arg(text: &str) -> Result<OmegaProfile> {
    OmegaProfile::parse(text).map_err(|e| anyhow!("--omega: {e}"))
}

/// Parses and normalises a formula against a type. Without `--omega` the
/// profile is the set of atoms used, closed under negation if `not` occurs.
fn formula_arg(text: &str, ty: &FiniteType, omega: Option<&str>) -> Result<Formula> {
    let f = parse_formula(text, ty).map_err(|e| anyhow!("formula: {e}"))?;
    let omega = match omega {
        Some(o) => omega_arg(o)?,
        None if f.contains_not() => f.omega().negation_closure(),
        None => f.omega(),
    };
    to_nnf(&f, omega).map_err(|e| anyhow!("formula: {e}"))
}

fn cmd_check(
    path: &Path,
    formula: &str,
    at: &str,
    omega: Option<&str>,
    team_fo: Option<&str>,
    bound: Option<usize>,
    max_team: usize,
) -> Result<bool> {
    let text = read(path)?;
    let model = match team_fo {
        None => load_model(&text).with_context(|| format!("in {}", path.display()))?,
        Some(phi) => {
            let file = parse_dm(&text).with_context(|| format!("in {}", path.display()))?;
            let vars: Vec<&str> = file.ty.variables().iter().map(String::as_str).collect();
            let phi = fo::parse_fo(phi, &vars).map_err(|e| anyhow!("team formula: {e}"))?;
            let (model, measured) = materialize_fo_team(&file.structure, &file.ty, &phi, max_team)?;
            outln!("materialized team: {} rows", model.len());
            match bound {
                Some(b) => {
                    outln!("free-variable bound: {measured} (limit {b})");
                    if measured > b {
                        eprintln!("warning: team formula exceeds the bound {b} ({measured} free variables)");
                    }
                }
                None => outln!("free-variable bound: {measured}"),
            }
            model
        }
    };
    let f = formula_arg(formula, model.ty(), omega)?;
    let row = model.parse_row(at)?;
    let mut ev = Evaluator::new(&f, &model)?;
    let value = ev.eval_row(row);
    let stats = ev.stats();
    outln!("{value}");
    outln!("team rows: {}", model.len());
    outln!("atom evaluations: {}", stats.atom_evals);
    outln!("quantifier expansions: {}", stats.quantifier_expansions);
    outln!("memo hits: {}", stats.memo_hits);
    Ok(value)
}

fn cmd_bisim(
    left: &Path,
    right: &Path,
    at_left: &str,
    at_right: &str,
    depth: &str,
    omega: &str,
    witness: bool,
) -> Result<bool> {
    let (lm, rm) = (model_file(left)?, model_file(right)?);
    let (s, s2) = (lm.parse_row(at_left)?, rm.parse_row(at_right)?);
    let depth = match depth {
        "fix" | "fixpoint" => Depth::Fixpoint,
        k => Depth::Steps(
            k.parse()
                .map_err(|_| anyhow!("--depth: expected a number or `fix`"))?,
        ),
    };
    let out = bisimilarity(&lm, s, &rm, s2, omega_arg(omega)?, depth)?;
    let verdict = if out.related {
        "bisimilar"
    } else {
        "not bisimilar"
    };
    match (depth, out.fixpoint_stage) {
        (Depth::Fixpoint, Some(k)) => outln!("{verdict} (stage {k} fixpoint)"),
        _ => outln!("{verdict} (stage {})", out.relation.stage),
    }
    outln!("relation:");
    for (a, b) in out.relation.pairs() {
        outln!(
            "  ({}) ~ ({})",
            lm.format_assignment(lm.row(a)),
            rm.format_assignment(rm.row(b))
        );
    }
    if witness {
        if let Some(w) = &out.witness {
            outln!("{}", w.describe(&lm, &rm));
        }
    }
    Ok(out.related)
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Check {
            model,
            model_pos,
            formula,
            at,
            omega,
            team_fo,
            bound,
            max_team,
        } => {
            let path = model
                .or(model_pos)
                .ok_or_else(|| anyhow!("no model file given"))?;
            cmd_check(
                &path,
                &formula,
                &at,
                omega.as_deref(),
                team_fo.as_deref(),
                bound,
                max_team,
            )
        }
        Command::Bisim {
            left,
            right,
            files,
            at_left,
            at_right,
            depth,
            omega,
            witness,
        } => {
            let mut files = files.into_iter();
            let left = left
                .or_else(|| files.next())
                .ok_or_else(|| anyhow!("no left model"))?;
            let right = right
                .or_else(|| files.next())
                .ok_or_else(|| anyhow!("no right model"))?;
            if files.next().is_some() {
                bail!("too many model files");
            }
            cmd_bisim(&left, &right, &at_left, &at_right, &depth, &omega, witness)
        }
        Command::Charform {
            model,
            at,
            depth,
            omega,
            out,
        } => {
            if depth > MAX_CHAR_DEPTH {
                bail!("--depth is limited to {MAX_CHAR_DEPTH}");
            }
            let m = model_file(&model)?;
            let row = m.parse_row(&at)?;
            let chi = char_formula(&m, row, depth, omega_arg(&omega)?)?;
            emit(&format!("{}\n", chi.display(m.ty())), out.as_deref())?;
            Ok(true)
        }
        Command::Translate {
            mode,
            formula,
            model,
        } => {
            let (ty, f) = match model {
                Some(p) => {
                    let ty = model_file(&p)?.ty().clone();
                    let f = parse_formula(&formula, &ty).map_err(|e| anyhow!("formula: {e}"))?;
                    (ty, f)
                }
                None => parse_formula_infer(&formula).map_err(|e| anyhow!("formula: {e}"))?,
            };
            let out = match mode {
                Mode::Standard => fo::standard_translation(&f, &ty),
                Mode::Guarded => fo::translate_with(&f, &ty, AtomStyle::Guarded),
                Mode::Modal => fo::modal_translation(&f, &ty)?,
            };
            outln!("{out}");
            Ok(true)
        }
        Command::Reduce { file, target, out } => {
            let psi =
                parse_kahr(&read(&file)?).with_context(|| format!("in {}", file.display()))?;
            let f = match target {
                Target::Incl => reduce_to_inclusion(&psi),
                Target::Eq => reduce_to_equality(&psi),
            };
            emit(
                &format!("{}\n", f.display(&psi.reduced_type())),
                out.as_deref(),
            )?;
            Ok(true)
        }
        Command::Vd {
            model,
            formula,
            out,
        } => {
            if model.is_none() && formula.is_none() {
                bail!("nothing to do: give --model and/or --formula");
            }
            let m = model.as_deref().map(model_file).transpose()?;
            if let Some(text) = &formula {
                let (ty, f) = match &m {
                    Some(m) => {
                        let f = parse_formula(text, m.ty()).map_err(|e| anyhow!("formula: {e}"))?;
                        (m.ty().clone(), f)
                    }
                    None => parse_formula_infer(text).map_err(|e| anyhow!("formula: {e}"))?,
                };
                outln!("{}", rewrite_vd(&f)?.display(&ty));
            }
            if let Some(m) = &m {
                if out.is_some() || formula.is_none() {
                    emit(
                        &write_model(&variable_distinguished(m).model),
                        out.as_deref(),
                    )?;
                }
            }
            Ok(true)
        }
        Command::Union { left, right, out } => {
            let u = disjoint_union(&model_file(&left)?, &model_file(&right)?)?;
            emit(&write_model(&u), out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
