use std::fmt::Write;

use super::{Assignment, DependenceModel, ModelError, Structure};
use crate::syntax::FiniteType;

/// Contents of a `.dm` file. The team block is optional here; models need it.
#[derive(Clone, Debug)]
pub struct DmFile {
    pub ty: FiniteType,
    pub structure: Structure,
    pub team: Option<Vec<Assignment>>,
}

fn err(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the line-oriented `.dm` format:
///
/// ```text
/// universe 0 1 2
/// vars x y z
/// rel E 2
/// 0 1
/// end
/// team
/// 0 0 0
/// end
/// ```
pub fn parse_dm(text: &str) -> Result<DmFile, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut structure: Option<Structure> = None;
    let mut vars: Option<Vec<String>> = None;
    let mut rels: Vec<(String, usize)> = Vec::new();
    let mut team: Option<Vec<Assignment>> = None;

    while let Some((ln, line)) = lines.next() {
        let mut words = line.split_whitespace();
        let head = words.next().expect("nonempty line");
        match head {
            "universe" => {
                if structure.is_some() {
                    return Err(err(ln, "second `universe` line"));
                }
                let toks: Vec<String> = words.map(str::to_string).collect();
                structure = Some(Structure::new(toks).map_err(|e| err(ln, e.to_string()))?);
            }
            "vars" => {
                if vars.is_some() {
                    return Err(err(ln, "second `vars` line"));
                }
                vars = Some(words.map(str::to_string).collect());
            }
            "rel" | "team" => {
                let st = structure
                    .as_mut()
                    .ok_or_else(|| err(ln, format!("`{head}` before `universe`")))?;
                let (name, width) = if head == "rel" {
                    let name = words
                        .next()
                        .ok_or_else(|| err(ln, "missing relation name"))?;
                    let arity: usize = words
                        .next()
                        .and_then(|a| a.parse().ok())
                        .ok_or_else(|| err(ln, "missing or invalid arity"))?;
                    (Some(name.to_string()), arity)
                } else {
                    let n = vars
                        .as_ref()
                        .ok_or_else(|| err(ln, "`team` before `vars`"))?
                        .len();
                    (None, n)
                };
                if words.next().is_some() {
                    return Err(err(ln, "unexpected tokens after block header"));
                }
                let mut rows = Vec::new();
                loop {
                    let (rl, row) = lines
                        .next()
                        .ok_or_else(|| err(ln, "block is missing its `end`"))?;
                    if row == "end" {
                        break;
                    }
                    let tuple = st.parse_tuple(row).map_err(|e| err(rl, e.to_string()))?;
                    if tuple.len() != width {
                        return Err(err(
                            rl,
                            format!("row has {} entries, expected {width}", tuple.len()),
                        ));
                    }
                    rows.push(tuple);
                }
                match name {
                    Some(name) => {
                        st.add_relation(&name, width, rows)
                            .map_err(|e| err(ln, e.to_string()))?;
                        rels.push((name, width));
                    }
                    None => {
                        if team.is_some() {
                            return Err(err(ln, "second `team` block"));
                        }
                        team = Some(rows.into_iter().map(Assignment).collect());
                    }
                }
            }
            other => return Err(err(ln, format!("unknown directive `{other}`"))),
        }
    }
    let structure = structure.ok_or_else(|| err(0, "missing `universe` line"))?;
    let vars = vars.ok_or_else(|| err(0, "missing `vars` line"))?;
    let ty = FiniteType::new(rels, vars).map_err(|e| err(0, e.to_string()))?;
    Ok(DmFile {
        ty,
        structure,
        team,
    })
}

/// Parses a `.dm` file that must contain a nonempty team.
pub fn load_model(text: &str) -> Result<DependenceModel, ModelError> {
    let file = parse_dm(text)?;
    let team = file.team.ok_or(ModelError::EmptyTeam)?;
    DependenceModel::new(file.ty, file.structure, team)
}

/// Writes a model in the `.dm` format; `load_model` reads it back unchanged.
pub fn write_model(model: &DependenceModel) -> String {
    let st = model.structure();
    let mut out = String::new();
    writeln!(out, "universe {}", st.universe().join(" ")).unwrap();
    writeln!(out, "vars {}", model.ty().variables().join(" ")).unwrap();
    for (name, arity) in model.ty().relations() {
        writeln!(out, "rel {name} {arity}").unwrap();
        for t in &st.relation(name).expect("typed").tuples {
            writeln!(out, "{}", st.tokens(t)).unwrap();
        }
        out.push_str("end\n");
    }
    out.push_str("team\n");
    for s in model.team() {
        writeln!(out, "{}", st.tokens(&s.0)).unwrap();
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOCAL_DEP: &str = "# four rows
universe 0 1 2
vars x y z
team
0 0 0
1 1 0
1 2 1   # trailing comment
2 2 1
end
";

    #[test]
    fn loads_and_round_trips() {
        let m = load_model(LOCAL_DEP).unwrap();
        assert_eq!(m.len(), 4);
        let again = load_model(&write_model(&m)).unwrap();
        assert_eq!(again.team(), m.team());
        assert_eq!(again.ty(), m.ty());
    }

    #[test]
    fn rejects_bad_files() {
        assert_eq!(
            load_model("universe 0\nvars x\nteam\nend\n").unwrap_err(),
            ModelError::EmptyTeam
        );
        assert!(matches!(
            load_model("universe 0 1\nvars x\nteam\n0\n0\nend\n"),
            Err(ModelError::DuplicateRow(_))
        ));
        assert!(matches!(
            load_model("universe 0\nvars x y\nteam\n0\nend\n"),
            Err(ModelError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            load_model("universe 0\nvars x\nteam\n7\nend\n"),
            Err(ModelError::Parse { line: 4, .. })
        ));
        assert!(load_model("universe 0\nvars x\nrel P 1\n0\n").is_err());
        assert!(load_model("universe 0\nvars x\n").is_err());
    }
}
