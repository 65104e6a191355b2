use super::lexer::{tokenize, Token, TokenKind};
use super::{BinOp, Builtin, Expr};

/// Nesting limit; deeper input is rejected instead of exhausting the stack.
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message} (at `{token}`)")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },
    #[error("{line}:{column}: unknown builtin `{name}`")]
    UnknownBuiltin {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: builtin `{name}` takes {expected} argument(s), got {found}")]
    Arity {
        line: usize,
        column: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub(crate) fn syntax(line: usize, column: usize, token: &str, message: &str) -> ParseError {
        ParseError::Syntax {
            line,
            column,
            token: token.to_string(),
            message: message.to_string(),
        }
    }

    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UnknownBuiltin { line, .. }
            | ParseError::Arity { line, .. } => *line,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { column, .. }
            | ParseError::UnknownBuiltin { column, .. }
            | ParseError::Arity { column, .. } => *column,
        }
    }
}

/// Parses DSL source into an expression tree.
///
/// ```text
/// expr   := term (("+" | "-") term)* ;
/// term   := factor (("*" | "/") factor)* ;
/// factor := "-" factor | power ;
/// power  := atom ("^" factor)? ;
/// atom   := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")" ;
/// ```
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    let t = p.peek();
    if t.kind != TokenKind::Eof {
        return Err(p.unexpected("expected operator or end of input"));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, message: &str) -> ParseError {
        let t = self.peek();
        let token = if t.kind == TokenKind::Eof {
            "end of input"
        } else {
            t.text.as_str()
        };
        ParseError::syntax(t.line, t.column, token, message)
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.unexpected("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => break,
            };
            self.next();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().kind == TokenKind::Minus {
            self.next();
            self.enter()?;
            let inner = self.factor()?;
            self.depth -= 1;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().kind == TokenKind::Caret {
            self.next();
            self.enter()?;
            let exponent = self.factor()?;
            self.depth -= 1;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().kind.clone() {
            TokenKind::Number(v) => {
                self.next();
                Ok(Expr::Num(v))
            }
            TokenKind::Ident(name) => {
                let tok = self.next();
                if self.peek().kind == TokenKind::LParen {
                    let func = Builtin::from_name(&name).ok_or(ParseError::UnknownBuiltin {
                        line: tok.line,
                        column: tok.column,
                        name: name.clone(),
                    })?;
                    self.next();
                    let mut args = vec![self.expr()?];
                    while self.peek().kind == TokenKind::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                    if self.peek().kind != TokenKind::RParen {
                        return Err(self.unexpected("expected `,` or `)`"));
                    }
                    self.next();
                    if args.len() != func.arity() {
                        return Err(ParseError::Arity {
                            line: tok.line,
                            column: tok.column,
                            name,
                            expected: func.arity(),
                            found: args.len(),
                        });
                    }
                    Ok(Expr::Call { func, args })
                } else if Builtin::from_name(&name).is_some() {
                    Err(ParseError::syntax(
                        tok.line,
                        tok.column,
                        &name,
                        "builtin name used as a variable",
                    ))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            TokenKind::LParen => {
                self.next();
                let e = self.expr()?;
                if self.peek().kind != TokenKind::RParen {
                    return Err(self.unexpected("expected `)`"));
                }
                self.next();
                Ok(e)
            }
            _ => Err(self.unexpected("expected number, variable, call or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Expr {
        Expr::var(s)
    }

    #[test]
    fn atom() {
        assert_eq!(parse("x").unwrap(), var("x"));
    }

    #[test]
    fn mean_of_two() {
        let expected = Expr::binary(
            BinOp::Div,
            Expr::binary(BinOp::Add, var("x1"), var("x2")),
            Expr::Num(2.0),
        );
        assert_eq!(parse("(x1 + x2)/2").unwrap(), expected);
    }

    #[test]
    fn clamp_call() {
        match parse("clamp(x, 0, 1)").unwrap() {
            Expr::Call { func, args } => {
                assert_eq!(func, Builtin::Clamp);
                assert_eq!(args.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        // - binds looser than ^ on its right operand, per the grammar.
        assert_eq!(
            parse("-x^2").unwrap(),
            Expr::neg(Expr::binary(BinOp::Pow, var("x"), Expr::Num(2.0)))
        );
        assert_eq!(
            parse("2^3^2").unwrap(),
            Expr::binary(
                BinOp::Pow,
                Expr::Num(2.0),
                Expr::binary(BinOp::Pow, Expr::Num(3.0), Expr::Num(2.0))
            )
        );
        assert_eq!(
            parse("a-b-c").unwrap(),
            Expr::binary(
                BinOp::Sub,
                Expr::binary(BinOp::Sub, var("a"), var("b")),
                var("c")
            )
        );
        assert_eq!(
            parse("a+b*c").unwrap(),
            Expr::binary(
                BinOp::Add,
                var("a"),
                Expr::binary(BinOp::Mul, var("b"), var("c"))
            )
        );
        assert_eq!(
            parse("2^-1").unwrap(),
            Expr::binary(BinOp::Pow, Expr::Num(2.0), Expr::neg(Expr::Num(1.0)))
        );
    }

    #[test]
    fn unknown_builtin_rejected() {
        let err = parse("sin(x)").unwrap_err();
        assert!(
            matches!(err, ParseError::UnknownBuiltin { ref name, column: 1, .. } if name == "sin")
        );
    }

    #[test]
    fn arity_checked() {
        let err = parse("1 + clamp(x, 0)").unwrap_err();
        assert_eq!(
            err,
            ParseError::Arity {
                line: 1,
                column: 5,
                name: "clamp".into(),
                expected: 3,
                found: 2
            }
        );
        assert!(parse("abs(x, y)").is_err());
        assert!(parse("max(x)").is_err());
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let err = parse("x +").unwrap_err();
        assert_eq!((err.line(), err.column()), (1, 4));
        assert!(err.to_string().contains("end of input"));
        let err = parse("(x\n + 1").unwrap_err();
        assert_eq!((err.line(), err.column()), (2, 5));
        let err = parse("x y").unwrap_err();
        assert_eq!((err.line(), err.column()), (1, 3));
        assert!(parse("").is_err());
        assert!(parse("abs").is_err());
        assert!(parse("f()").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let deep = format!("{}x{}", "(".repeat(10_000), ")".repeat(10_000));
        assert!(parse(&deep).is_err());
        let negs = format!("{}x", "-".repeat(10_000));
        assert!(parse(&negs).is_err());
        let pows = format!("x{}", "^x".repeat(10_000));
        assert!(parse(&pows).is_err());
    }
}
