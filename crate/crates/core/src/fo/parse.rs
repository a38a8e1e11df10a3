use super::{FoError, FoFormula, Pred, Term};
use crate::syntax::{Lexer, SyntaxError, Token};

/// Parses first-order text such as `forall x. exists y. R(x, y) & ~(x = 'a')`.
///
/// Connectives: `~`/`!`/`not`, `&`, `|`, `->`, `true`, `false`,
/// `forall v1 v2. body`, `exists …`. The predicate `T` is the team predicate.
/// An identifier in term position is a variable when it is bound by an
/// enclosing quantifier or listed in `free`; otherwise it names an element.
/// Quoted tokens (`'a'`) always name elements.
pub fn parse_fo(text: &str, free: &[&str]) -> Result<FoFormula, FoError> {
    let mut p = FoParser {
        lex: Lexer::new(text)?,
        bound: free.iter().map(|s| s.to_string()).collect(),
    };
    let f = p.implication()?;
    if !p.lex.at_end() {
        return Err(p.lex.error("unexpected trailing input").into());
    }
    Ok(f)
}

struct FoParser {
    lex: Lexer,
    bound: Vec<String>,
}

impl FoParser {
    fn implication(&mut self) -> Result<FoFormula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.lex.eat(&Token::Arrow) {
            let rhs = self.implication()?;
            return Ok(FoFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<FoFormula, SyntaxError> {
        let mut items = vec![self.conjunction()?];
        while self.lex.eat(&Token::Bar) {
            items.push(self.conjunction()?);
        }
        Ok(FoFormula::or(items))
    }

    fn conjunction(&mut self) -> Result<FoFormula, SyntaxError> {
        let mut items = vec![self.unary()?];
        while self.lex.eat(&Token::Amp) {
            items.push(self.unary()?);
        }
        Ok(FoFormula::and(items))
    }

    fn unary(&mut self) -> Result<FoFormula, SyntaxError> {
        if self.lex.eat(&Token::Tilde) || self.lex.eat(&Token::Bang) {
            return Ok(FoFormula::not(self.unary()?));
        }
        if self.lex.eat(&Token::LParen) {
            let f = self.implication()?;
            self.lex.expect(&Token::RParen, "`)`")?;
            return Ok(f);
        }
        if let Some(Token::Ident(word)) = self.lex.peek() {
            match word.as_str() {
                "not" => {
                    self.lex.next();
                    return Ok(FoFormula::not(self.unary()?));
                }
                "true" | "false" => {
                    let t = word == "true";
                    self.lex.next();
                    return Ok(if t { FoFormula::True } else { FoFormula::False });
                }
                "forall" | "exists" => {
                    let universal = word == "forall";
                    self.lex.next();
                    let mut vars = Vec::new();
                    while let Some(Token::Ident(_)) = self.lex.peek() {
                        vars.push(self.lex.ident("variable")?.0);
                        self.lex.eat(&Token::Comma);
                    }
                    if vars.is_empty() {
                        return Err(self.lex.error("expected a bound variable"));
                    }
                    self.lex
                        .expect(&Token::Dot, "`.` after quantified variables")?;
                    let n = self.bound.len();
                    self.bound.extend(vars.iter().cloned());
                    let body = self.implication();
                    self.bound.truncate(n);
                    let body = body?;
                    return Ok(if universal {
                        FoFormula::Forall(vars, Box::new(body))
                    } else {
                        FoFormula::Exists(vars, Box::new(body))
                    });
                }
                _ => {}
            }
            let bracket = self.lex.peek_at(1) == Some(&Token::LBracket);
            if bracket || self.lex.peek_at(1) == Some(&Token::LParen) {
                let (name, pos) = self.lex.ident("predicate")?;
                let pred = if bracket {
                    // `Sim[x](..)` or a monadic `R[x y](..)` of the modal vocabulary.
                    self.lex.next();
                    let mut vars = Vec::new();
                    while !self.lex.eat(&Token::RBracket) {
                        vars.push(self.lex.ident("variable")?.0);
                        self.lex.eat(&Token::Comma);
                    }
                    match (name.as_str(), vars.len()) {
                        ("Sim", 1) => Pred::Sim(vars.pop().unwrap()),
                        ("Sim", _) => {
                            return Err(SyntaxError::Parse {
                                pos,
                                msg: "`Sim` takes one variable".into(),
                            })
                        }
                        _ => Pred::Mon {
                            rel: name,
                            args: vars,
                        },
                    }
                } else if name == "T" {
                    Pred::Team
                } else {
                    Pred::Rel(name)
                };
                self.lex.expect(&Token::LParen, "`(`")?;
                let mut args = Vec::new();
                while !self.lex.eat(&Token::RParen) {
                    args.push(self.term()?);
                    self.lex.eat(&Token::Comma);
                }
                return Ok(FoFormula::Atom(pred, args));
            }
        }
        let a = self.term()?;
        let eq = match self.lex.next() {
            Some(Token::EqSign) => true,
            Some(Token::Neq) => false,
            _ => return Err(self.lex.error("expected `=` or `!=`")),
        };
        let b = self.term()?;
        let atom = FoFormula::Eq(a, b);
        Ok(if eq { atom } else { FoFormula::not(atom) })
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.lex.peek().cloned() {
            Some(Token::Quoted(tok)) => {
                self.lex.next();
                Ok(Term::Const(tok))
            }
            Some(Token::Ident(name)) => {
                self.lex.next();
                Ok(if self.bound.contains(&name) {
                    Term::Var(name)
                } else {
                    Term::Const(name)
                })
            }
            _ => Err(self.lex.error("expected a term")),
        }
    }
}
