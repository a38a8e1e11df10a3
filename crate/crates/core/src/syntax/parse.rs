use super::{FiniteType, Formula, RelId, SyntaxError, Var, VarSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Token {
    Ident(String),
    /// A single-quoted token such as `'(0,x)'`, used for element constants.
    Quoted(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Amp,
    Bar,
    Arrow,
    Bang,
    Tilde,
    EqSign,
    Neq,
}

/// Tokenizer shared by the formula, first-order and Kahr-matrix parsers.
pub(crate) struct Lexer {
    tokens: Vec<(Token, usize)>,
    end: usize,
    idx: usize,
}

impl Lexer {
    pub(crate) fn new(text: &str) -> Result<Lexer, SyntaxError> {
        let mut tokens = Vec::new();
        let mut chars = text.char_indices().peekable();
        while let Some((pos, c)) = chars.next() {
            let tok = match c {
                c if c.is_whitespace() => continue,
                '(' => Token::LParen,
                ')' => Token::RParen,
                '[' => Token::LBracket,
                ']' => Token::RBracket,
                ';' => Token::Semi,
                ',' => Token::Comma,
                '.' => Token::Dot,
                '&' => Token::Amp,
                '|' => Token::Bar,
                '~' => Token::Tilde,
                '=' => Token::EqSign,
                '-' => match chars.next() {
                    Some((_, '>')) => Token::Arrow,
                    _ => return Err(parse_err(pos, "expected `->`")),
                },
                '!' => {
                    if let Some((_, '=')) = chars.peek() {
                        chars.next();
                        Token::Neq
                    } else {
                        Token::Bang
                    }
                }
                '\'' => {
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '\'')) => break,
                            Some((_, c)) => s.push(c),
                            None => return Err(parse_err(pos, "unterminated quoted token")),
                        }
                    }
                    Token::Quoted(s)
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(c);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    Token::Ident(s)
                }
                other => return Err(parse_err(pos, &format!("unexpected character `{other}`"))),
            };
            tokens.push((tok, pos));
        }
        Ok(Lexer {
            tokens,
            end: text.len(),
            idx: 0,
        })
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx).map(|(t, _)| t)
    }

    pub(crate) fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.idx + offset).map(|(t, _)| t)
    }

    pub(crate) fn pos(&self) -> usize {
        self.tokens.get(self.idx).map_or(self.end, |(_, p)| *p)
    }

    pub(crate) fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Token, what: &str) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<(String, usize), SyntaxError> {
        let pos = self.pos();
        match self.peek() {
            Some(Token::Ident(s)) => {
                let s = s.clone();
                self.idx += 1;
                Ok((s, pos))
            }
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.idx >= self.tokens.len()
    }

    pub(crate) fn error(&self, msg: &str) -> SyntaxError {
        let found = match self.peek() {
            Some(t) => format!("{t:?}"),
            None => "end of input".to_string(),
        };
        parse_err(self.pos(), &format!("{msg}, found {found}"))
    }
}

fn parse_err(pos: usize, msg: &str) -> SyntaxError {
    SyntaxError::Parse {
        pos,
        msg: msg.to_string(),
    }
}

enum Scope<'a> {
    Fixed(&'a FiniteType),
    Infer {
        relations: Vec<(String, usize)>,
        variables: Vec<String>,
    },
}

impl Scope<'_> {
    fn var(&mut self, name: &str, pos: usize) -> Result<Var, SyntaxError> {
        match self {
            Scope::Fixed(ty) => ty.var(name).ok_or_else(|| SyntaxError::UnknownVariable {
                name: name.to_string(),
                pos,
            }),
            Scope::Infer { variables, .. } => {
                if let Some(i) = variables.iter().position(|v| v == name) {
                    return Ok(Var(i as u32));
                }
                if name == "not" || variables.len() == super::MAX_VARIABLES {
                    return Err(SyntaxError::UnknownVariable {
                        name: name.to_string(),
                        pos,
                    });
                }
                variables.push(name.to_string());
                Ok(Var(variables.len() as u32 - 1))
            }
        }
    }

    fn rel(&mut self, name: &str, arity: usize, pos: usize) -> Result<RelId, SyntaxError> {
        let (id, expected) = match self {
            Scope::Fixed(ty) => {
                let id = ty.rel(name).ok_or_else(|| SyntaxError::UnknownRelation {
                    name: name.to_string(),
                    pos,
                })?;
                (id, ty.arity(id))
            }
            Scope::Infer { relations, .. } => match relations.iter().position(|(n, _)| n == name) {
                Some(i) => (RelId(i as u32), relations[i].1),
                None => {
                    if arity == 0 || super::types::RESERVED_RELATIONS.contains(&name) {
                        return Err(SyntaxError::UnknownRelation {
                            name: name.to_string(),
                            pos,
                        });
                    }
                    relations.push((name.to_string(), arity));
                    (RelId(relations.len() as u32 - 1), arity)
                }
            },
        };
        if expected != arity {
            return Err(SyntaxError::ArityMismatch {
                rel: name.to_string(),
                expected,
                found: arity,
                pos,
            });
        }
        Ok(id)
    }
}

struct Parser<'a> {
    lex: Lexer,
    scope: Scope<'a>,
}

impl Parser<'_> {
    fn disj(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.conj()?;
        while self.lex.eat(&Token::Bar) {
            let g = self.conj()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.unit()?;
        while self.lex.eat(&Token::Amp) {
            let g = self.unit()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unit(&mut self) -> Result<Formula, SyntaxError> {
        if self.lex.eat(&Token::LParen) {
            let f = self.disj()?;
            self.lex.expect(&Token::RParen, "`)`")?;
            return Ok(f);
        }
        if self.lex.eat(&Token::Bang) {
            let (name, pos) = self.lex.ident("relation name")?;
            let args = self.relation_args()?;
            let rel = self.scope.rel(&name, args.len(), pos)?;
            return Ok(Formula::neg_lit(rel, args));
        }
        let (name, pos) = self.lex.ident("formula")?;
        match self.lex.peek() {
            _ if name == "not" => Ok(Formula::not(self.unit()?)),
            Some(Token::LBracket) => self.bracketed(&name, pos),
            Some(Token::LParen) => self.call(&name, pos),
            Some(Token::EqSign) | Some(Token::Neq) => {
                let eq = self.lex.next() == Some(Token::EqSign);
                let x = self.scope.var(&name, pos)?;
                let y = self.var()?;
                Ok(if eq {
                    Formula::Eq(x, y)
                } else {
                    Formula::Neq(x, y)
                })
            }
            _ => Err(self
                .lex
                .error(&format!("expected `(`, `[`, `=` or `!=` after `{name}`"))),
        }
    }

    fn var(&mut self) -> Result<Var, SyntaxError> {
        let (name, pos) = self.lex.ident("variable")?;
        self.scope.var(&name, pos)
    }

    /// Variables separated by spaces or commas, up to (not including) a closing token.
    fn vars(&mut self) -> Result<Vec<Var>, SyntaxError> {
        let mut out = Vec::new();
        while let Some(Token::Ident(_)) = self.lex.peek() {
            out.push(self.var()?);
            self.lex.eat(&Token::Comma);
        }
        Ok(out)
    }

    fn relation_args(&mut self) -> Result<Vec<Var>, SyntaxError> {
        self.lex.expect(&Token::LParen, "`(`")?;
        let args = self.vars()?;
        self.lex.expect(&Token::RParen, "`)`")?;
        Ok(args)
    }

    fn bracketed(&mut self, name: &str, pos: usize) -> Result<Formula, SyntaxError> {
        self.lex.expect(&Token::LBracket, "`[`")?;
        let set_pos = self.lex.pos();
        let vars = self.vars()?;
        self.lex.expect(&Token::RBracket, "`]`")?;
        let set: VarSet = vars.iter().copied().collect();
        match name {
            "A" => Ok(Formula::forall(set, self.unit()?)),
            "E" => Ok(Formula::exists(set, self.unit()?)),
            "D" => Ok(Formula::Dep {
                on: set,
                target: self.var()?,
            }),
            "Y" => Ok(Formula::Anon {
                on: set,
                target: self.var()?,
            }),
            "Ind" | "nInd" => {
                self.lex.expect(&Token::LParen, "`(`")?;
                let right_pos = self.lex.pos();
                let right = self.vars()?;
                self.lex.expect(&Token::RParen, "`)`")?;
                nonempty(&vars, set_pos)?;
                nonempty(&right, right_pos)?;
                Ok(if name == "Ind" {
                    Formula::Ind { left: vars, right }
                } else {
                    Formula::NInd { left: vars, right }
                })
            }
            _ => Err(parse_err(
                pos,
                &format!("unknown bracketed keyword `{name}`"),
            )),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Formula, SyntaxError> {
        match name {
            "in" | "notin" | "incl" | "excl" | "indep" | "dep" | "anon" => {}
            _ => {
                let args = self.relation_args()?;
                let rel = self.scope.rel(name, args.len(), pos)?;
                return Ok(Formula::lit(rel, args));
            }
        }
        self.lex.expect(&Token::LParen, "`(`")?;
        let left_pos = self.lex.pos();
        let left = self.vars()?;
        self.lex.expect(&Token::Semi, "`;`")?;
        if name == "dep" || name == "anon" {
            let target = self.var()?;
            self.lex.expect(&Token::RParen, "`)`")?;
            let on = left.into_iter().collect();
            let atom = if name == "dep" {
                Formula::Dep { on, target }
            } else {
                Formula::Anon { on, target }
            };
            return Ok(Formula::global(atom));
        }
        let right = self.vars()?;
        self.lex.expect(&Token::RParen, "`)`")?;
        nonempty(&left, left_pos)?;
        nonempty(&right, left_pos)?;
        if name != "indep" && left.len() != right.len() {
            return Err(SyntaxError::TupleLength {
                left: left.len(),
                right: right.len(),
                pos: left_pos,
            });
        }
        Ok(match name {
            "in" => Formula::Incl { left, right },
            "notin" => Formula::Excl { left, right },
            "incl" => Formula::global(Formula::Incl { left, right }),
            "excl" => Formula::global(Formula::Excl { left, right }),
            _ => Formula::global(Formula::Ind { left, right }),
        })
    }
}

fn nonempty(vars: &[Var], pos: usize) -> Result<(), SyntaxError> {
    if vars.is_empty() {
        Err(SyntaxError::EmptyTuple { pos })
    } else {
        Ok(())
    }
}

fn run<'a>(text: &str, scope: Scope<'a>) -> Result<(Formula, Scope<'a>), SyntaxError> {
    let mut p = Parser {
        lex: Lexer::new(text)?,
        scope,
    };
    let f = p.disj()?;
    if !p.lex.at_end() {
        return Err(p.lex.error("unexpected trailing input"));
    }
    Ok((f, p.scope))
}

/// Parses a formula against a fixed type. Global-atom keywords (`dep`, `anon`,
/// `incl`, `excl`, `indep`) become `A[]` applied to the matching local atom.
pub fn parse_formula(text: &str, ty: &FiniteType) -> Result<Formula, SyntaxError> {
    let (f, _) = run(text, Scope::Fixed(ty))?;
    Ok(f)
}

/// Parses a formula and infers its type: variables in order of first
/// appearance, relation arities from first use.
pub fn parse_formula_infer(text: &str) -> Result<(FiniteType, Formula), SyntaxError> {
    let scope = Scope::Infer {
        relations: Vec::new(),
        variables: Vec::new(),
    };
    let (f, scope) = run(text, scope)?;
    let Scope::Infer {
        relations,
        variables,
    } = scope
    else {
        unreachable!()
    };
    Ok((FiniteType::new(relations, variables)?, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty() -> FiniteType {
        FiniteType::of(&[("P", 1), ("R", 2)], &["x", "y", "z"])
    }

    #[test]
    fn parses_local_and_global_atoms() {
        let ty = ty();
        let (x, y) = (Var(0), Var(1));
        assert_eq!(
            parse_formula("D[y] x", &ty).unwrap(),
            Formula::Dep {
                on: VarSet::singleton(y),
                target: x
            }
        );
        assert_eq!(
            parse_formula("dep(x ; y)", &ty).unwrap(),
            Formula::global(Formula::Dep {
                on: VarSet::singleton(x),
                target: y
            })
        );
        assert!(matches!(
            parse_formula("in(x ; y z)", &ty),
            Err(SyntaxError::TupleLength { .. })
        ));
        assert!(matches!(
            parse_formula("in( ; )", &ty),
            Err(SyntaxError::EmptyTuple { .. })
        ));
    }

    #[test]
    fn precedence_and_prefixes() {
        let ty = ty();
        let f = parse_formula("A[x] P(x) & P(y) | !R(x, y)", &ty).unwrap();
        let Formula::Or(l, r) = f else { panic!() };
        assert!(matches!(*l, Formula::And(..)));
        assert!(matches!(
            *r,
            Formula::Lit {
                positive: false,
                ..
            }
        ));
        let g = parse_formula("not E[] (x = y & x != z)", &ty).unwrap();
        assert!(matches!(g, Formula::Not(_)));
    }

    #[test]
    fn reports_errors() {
        let ty = ty();
        assert!(matches!(
            parse_formula("Q(x)", &ty),
            Err(SyntaxError::UnknownRelation { .. })
        ));
        assert!(matches!(
            parse_formula("P(w)", &ty),
            Err(SyntaxError::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse_formula("R(x)", &ty),
            Err(SyntaxError::ArityMismatch { .. })
        ));
        assert!(matches!(
            parse_formula("P(x) &", &ty),
            Err(SyntaxError::Parse { pos: 6, .. })
        ));
        assert!(parse_formula("P(x) P(y)", &ty).is_err());
    }

    #[test]
    fn infers_type() {
        let (ty, _) = parse_formula_infer("E[x] P(y) & D[z] x").unwrap();
        assert_eq!(ty.variables(), ["x", "y", "z"]);
        assert_eq!(ty.relations(), [("P".to_string(), 1)]);
        assert!(parse_formula_infer("P(x) & P(x, y)").is_err());
    }
}
