use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_digits(&mut self) -> usize {
        let mut n = 0;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            n += 1;
        }
        n
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: src.char_indices().peekable(),
        src,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let (line, column) = (cur.line, cur.column);
        let start = cur.offset();
        let Some(c) = cur.peek() else {
            out.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                line,
                column,
            });
            return Ok(out);
        };
        let kind = if c.is_ascii_digit() {
            cur.eat_digits();
            if cur.peek() == Some('.') {
                cur.bump();
                if cur.eat_digits() == 0 {
                    return Err(ParseError::syntax(
                        line,
                        column,
                        &src[start..cur.offset()],
                        "expected digits after decimal point",
                    ));
                }
            }
            if matches!(cur.peek(), Some('e' | 'E')) {
                cur.bump();
                if matches!(cur.peek(), Some('+' | '-')) {
                    cur.bump();
                }
                if cur.eat_digits() == 0 {
                    return Err(ParseError::syntax(
                        line,
                        column,
                        &src[start..cur.offset()],
                        "expected digits in exponent",
                    ));
                }
            }
            let text = &src[start..cur.offset()];
            let value: f64 = text
                .parse()
                .map_err(|_| ParseError::syntax(line, column, text, "malformed number"))?;
            if !value.is_finite() {
                return Err(ParseError::syntax(
                    line,
                    column,
                    text,
                    "numeric literal overflows to infinity",
                ));
            }
            TokenKind::Number(value)
        } else if c.is_ascii_alphabetic() {
            while cur
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                cur.bump();
            }
            TokenKind::Ident(src[start..cur.offset()].to_string())
        } else {
            cur.bump();
            match c {
                '+' => TokenKind::Plus,
                '-' => TokenKind::Minus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                '^' => TokenKind::Caret,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                _ => {
                    return Err(ParseError::syntax(
                        line,
                        column,
                        &c.to_string(),
                        "unexpected character",
                    ))
                }
            }
        };
        out.push(Token {
            kind,
            text: src[start..cur.offset()].to_string(),
            line,
            column,
        });
    }
}
