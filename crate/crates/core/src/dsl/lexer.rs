use super::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Equals,
    Arrow,
    Assign,
    Newline,
    /// A character or sequence no token starts with.
    Invalid(String),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Str(s) => format!("{s:?}"),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Equals => "=".into(),
            Tok::Arrow => "->".into(),
            Tok::Assign => ":=".into(),
            Tok::Newline => "end of line".into(),
            Tok::Invalid(s) => s.clone(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = Span { line, column: col };
        let mut push = |tok| out.push(Token { tok, span });
        match c {
            '\n' => {
                chars.next();
                push(Tok::Newline);
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
                continue;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                col += s.len() as u32;
                push(Tok::Ident(s));
                continue;
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                let mut closed = false;
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match chars.peek() {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                chars.next();
                                col += 1;
                            }
                            _ => s.push('\\'),
                        },
                        c => s.push(c),
                    }
                }
                let tok = if closed { Tok::Str(s) } else { Tok::Invalid("unterminated string".into()) };
                out.push(Token { tok, span });
                continue;
            }
            _ => {}
        }
        chars.next();
        let (tok, width) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '=' => (Tok::Equals, 1),
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                (Tok::Arrow, 2)
            }
            ':' if chars.peek() == Some(&'=') => {
                chars.next();
                (Tok::Assign, 2)
            }
            other => (Tok::Invalid(other.to_string()), 1),
        };
        push(tok);
        col += width;
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, column: col } });
    out
}
