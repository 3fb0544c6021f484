//! Recursive-descent parser for `.acct` scenario files.
//!
//! Statements are line-oriented, so error recovery is line-level: a bad
//! statement is reported and the parser resumes at the next line (or at the
//! closing brace when inside a block).

use super::ast::{
    CpsItem, MechanismField, ParseError, ParseErrorKind, ScenarioAst, Spanned, Statement,
    StsField,
};
use super::lexer::{tokenize, Tok, Token};
use crate::causality::Expr;
use crate::model::{BeingKind, EntityId, EventKind, PrincipalKind, StructItem};

const MAX_EXPR_DEPTH: usize = 128;

/// Parses scenario text. Returns every recoverable error on failure.
pub fn parse_scenario(text: &str) -> Result<ScenarioAst, Vec<ParseError>> {
    let mut p = Parser { tokens: tokenize(text), pos: 0, errors: Vec::new() };
    let statements = p.file();
    if p.errors.is_empty() {
        let scenario_name = statements.iter().find_map(|s| match &s.node {
            Statement::Scenario(name) => Some(name.clone()),
            _ => None,
        });
        Ok(ScenarioAst { scenario_name, statements })
    } else {
        Err(p.errors)
    }
}

/// Parses raw bytes, rejecting invalid UTF-8 with a single error.
pub fn parse_scenario_bytes(bytes: &[u8]) -> Result<ScenarioAst, Vec<ParseError>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_scenario(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = 1 + valid.iter().filter(|&&b| b == b'\n').count() as u32;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            let column = 1 + String::from_utf8_lossy(&valid[line_start..]).chars().count() as u32;
            Err(vec![ParseError {
                kind: ParseErrorKind::InvalidUtf8,
                line,
                column,
                expected: "UTF-8 text".into(),
                found: "invalid byte sequence".into(),
            }])
        }
    }
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, expected: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax,
            line: tok.span.line,
            column: tok.span.column,
            expected: expected.into(),
            found: tok.tok.describe(),
        }
    }

    fn fail<T>(&self, expected: impl Into<String>) -> PResult<T> {
        Err(self.error_at(self.peek(), expected))
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(tok.describe())
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<()> {
        match &self.peek().tok {
            Tok::Ident(s) if s == word => {
                self.bump();
                Ok(())
            }
            _ => self.fail(word),
        }
    }

    fn ident(&mut self) -> PResult<EntityId> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let id = EntityId::new(s.clone()).expect("lexer yields identifiers");
                self.bump();
                Ok(id)
            }
            _ => self.fail("identifier"),
        }
    }

    /// One of the given words.
    fn choice(&mut self, words: &[&str]) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) if words.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail(words.join("|")),
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    /// Skips to the end of the current line. Inside a block, stops before a
    /// closing brace so the block can still end.
    fn recover(&mut self, in_block: bool) {
        loop {
            match self.peek().tok {
                Tok::Newline | Tok::Eof => return,
                Tok::RBrace if in_block => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        match self.peek().tok {
            Tok::Newline | Tok::Eof => Ok(()),
            _ => self.fail("end of line"),
        }
    }

    fn file(&mut self) -> Vec<Spanned<Statement>> {
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            if self.peek().tok == Tok::Eof {
                return out;
            }
            let span = self.peek().span;
            match self.statement().and_then(|s| {
                self.end_of_statement()?;
                Ok(s)
            }) {
                Ok(Some(node)) => out.push(Spanned { span, node }),
                Ok(None) => {}
                Err(e) => {
                    self.errors.push(e);
                    self.recover(false);
                }
            }
        }
    }

    /// `Ok(None)` when a block was reported as unterminated.
    fn statement(&mut self) -> PResult<Option<Statement>> {
        let head = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail("statement"),
        };
        let stmt = match head.as_str() {
            "scenario" => {
                self.bump();
                match &self.peek().tok {
                    Tok::Str(s) => {
                        let s = s.clone();
                        self.bump();
                        Statement::Scenario(s)
                    }
                    _ => return self.fail("quoted string"),
                }
            }
            "component" => {
                self.bump();
                Statement::Component(self.ident()?)
            }
            "account" => {
                self.bump();
                Statement::Account(self.ident()?)
            }
            "action" => {
                self.bump();
                Statement::Action(self.ident()?)
            }
            "principal" => {
                self.bump();
                let id = self.ident()?;
                let kind = match self.kind_clause(&["person", "legal_entity"])?.as_str() {
                    "person" => PrincipalKind::Person,
                    _ => PrincipalKind::LegalEntity,
                };
                Statement::Principal(id, kind)
            }
            "being" => {
                self.bump();
                let id = self.ident()?;
                let kind = match self.kind_clause(&["human", "animal"])?.as_str() {
                    "human" => BeingKind::Human,
                    _ => BeingKind::Animal,
                };
                Statement::Being(id, kind)
            }
            "event" => {
                self.bump();
                let id = self.ident()?;
                let kind = match self.kind_clause(&["system", "environment"])?.as_str() {
                    "system" => EventKind::System,
                    _ => EventKind::Environment,
                };
                Statement::Event(id, kind)
            }
            "ego" => {
                self.bump();
                Statement::Ego(self.ident()?)
            }
            "sts" => {
                self.bump();
                let field = match self.choice(&["principals", "beings", "foreign"])?.as_str() {
                    "principals" => StsField::Principals,
                    "beings" => StsField::Beings,
                    _ => StsField::Foreign,
                };
                self.expect(Tok::Equals)?;
                Statement::Sts(field, self.ident_list(true)?)
            }
            "mechanism" => {
                self.bump();
                let field = match self.choice(&["accounts", "missed_by_ego"])?.as_str() {
                    "accounts" => MechanismField::Accounts,
                    _ => MechanismField::MissedByEgo,
                };
                self.expect(Tok::Equals)?;
                Statement::Mechanism(field, self.ident_list(true)?)
            }
            "setup" => {
                self.bump();
                let (c, p) = self.by_clause()?;
                Statement::Setup(c, p)
            }
            "observation" => {
                self.bump();
                let (e, c, a) = self.arrow_triple()?;
                Statement::Observation(e, c, a)
            }
            "has_account" => {
                self.bump();
                let (a, p) = self.by_clause()?;
                Statement::HasAccount(a, p)
            }
            "correction" => {
                self.bump();
                let (p, c, act) = self.arrow_triple()?;
                Statement::Correction(p, c, act)
            }
            "caused" => {
                self.bump();
                let e = self.ident()?;
                self.expect(Tok::Equals)?;
                Statement::Caused(e, self.ident_list(false)?)
            }
            "cps" => {
                self.bump();
                let name = self.ident()?;
                let open = self.open_block()?;
                match self.block(open, Self::cps_item) {
                    Some(items) => Statement::Cps { name, items },
                    None => return Ok(None),
                }
            }
            "structural" => {
                self.bump();
                let open = self.open_block()?;
                match self.block(open, Self::struct_item) {
                    Some(items) => Statement::Structural(items),
                    None => return Ok(None),
                }
            }
            _ => return self.fail("statement"),
        };
        Ok(Some(stmt))
    }

    fn kind_clause(&mut self, words: &[&str]) -> PResult<String> {
        self.keyword("kind")?;
        self.expect(Tok::Equals)?;
        self.choice(words)
    }

    fn by_clause(&mut self) -> PResult<(EntityId, EntityId)> {
        let a = self.ident()?;
        self.keyword("by")?;
        Ok((a, self.ident()?))
    }

    /// `( A , B ) -> C`
    fn arrow_triple(&mut self) -> PResult<(EntityId, EntityId, EntityId)> {
        self.expect(Tok::LParen)?;
        let a = self.ident()?;
        self.expect(Tok::Comma)?;
        let b = self.ident()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        Ok((a, b, self.ident()?))
    }

    fn ident_list(&mut self, allow_empty: bool) -> PResult<Vec<EntityId>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if allow_empty && self.peek().tok == Tok::RBracket {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBracket => {
                    self.bump();
                    return Ok(out);
                }
                _ => return self.fail(", or ]"),
            }
        }
    }

    /// Consumes `{`, possibly on a following line; returns the brace token.
    fn open_block(&mut self) -> PResult<Token> {
        self.skip_newlines();
        let tok = self.peek().clone();
        self.expect(Tok::LBrace)?;
        Ok(tok)
    }

    /// Items up to the closing brace. Item errors are recorded and skipped;
    /// `None` means the input ended before the brace.
    fn block<T>(
        &mut self,
        open: Token,
        item: fn(&mut Self) -> PResult<T>,
    ) -> Option<Vec<Spanned<T>>> {
        let mut items = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().tok {
                Tok::RBrace => {
                    self.bump();
                    return Some(items);
                }
                Tok::Eof => {
                    self.errors.push(ParseError {
                        kind: ParseErrorKind::UnterminatedBlock,
                        line: open.span.line,
                        column: open.span.column,
                        expected: "}".into(),
                        found: "end of input".into(),
                    });
                    return None;
                }
                _ => {}
            }
            let span = self.peek().span;
            let parsed = item(self).and_then(|node| match self.peek().tok {
                Tok::Newline | Tok::RBrace | Tok::Eof => Ok(node),
                _ => self.fail("end of line"),
            });
            match parsed {
                Ok(node) => items.push(Spanned { span, node }),
                Err(e) => {
                    self.errors.push(e);
                    self.recover(true);
                }
            }
        }
    }

    fn cps_item(&mut self) -> PResult<CpsItem> {
        match self.choice(&["components", "principals", "setup", "log"])?.as_str() {
            "components" => {
                self.expect(Tok::Equals)?;
                Ok(CpsItem::Components(self.ident_list(true)?))
            }
            "principals" => {
                self.expect(Tok::Equals)?;
                Ok(CpsItem::Principals(self.ident_list(true)?))
            }
            "setup" => {
                let (c, p) = self.by_clause()?;
                Ok(CpsItem::Setup(c, p))
            }
            _ => {
                let (e, c, a) = self.arrow_triple()?;
                Ok(CpsItem::Log(e, c, a))
            }
        }
    }

    fn struct_item(&mut self) -> PResult<StructItem> {
        match self.choice(&["exo", "eq", "map"])?.as_str() {
            "exo" => {
                let v = self.ident()?;
                self.expect(Tok::Equals)?;
                let b = self.choice(&["true", "false"])? == "true";
                Ok(StructItem::Exo(v, b))
            }
            "eq" => {
                let v = self.ident()?;
                self.expect(Tok::Assign)?;
                Ok(StructItem::Eq(v, self.or_expr(0)?))
            }
            _ => {
                let v = self.ident()?;
                self.expect(Tok::Arrow)?;
                match self.choice(&["event", "component"])?.as_str() {
                    "event" => Ok(StructItem::MapEvent(v, self.ident()?)),
                    _ => Ok(StructItem::MapComponent(v, self.ident()?)),
                }
            }
        }
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == word)
    }

    fn or_expr(&mut self, depth: usize) -> PResult<Expr> {
        let mut lhs = self.and_expr(depth)?;
        while self.is_word("or") {
            self.bump();
            lhs = Expr::or(lhs, self.and_expr(depth)?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, depth: usize) -> PResult<Expr> {
        let mut lhs = self.not_expr(depth)?;
        while self.is_word("and") {
            self.bump();
            lhs = Expr::and(lhs, self.not_expr(depth)?);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self, depth: usize) -> PResult<Expr> {
        if depth > MAX_EXPR_DEPTH {
            return self.fail("shallower expression");
        }
        if self.is_word("not") {
            self.bump();
            return Ok(Expr::not(self.not_expr(depth + 1)?));
        }
        match &self.peek().tok {
            Tok::LParen => {
                self.bump();
                let e = self.or_expr(depth + 1)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if !matches!(s.as_str(), "and" | "or" | "not") => {
                Ok(Expr::Var(self.ident()?))
            }
            _ => self.fail("variable, not or ("),
        }
    }
}
