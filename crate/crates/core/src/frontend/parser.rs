use crate::expr::{CmpOp, Span};
use crate::fp::{parse_exact, BinOp, FloatFormat, RoundingMode};

use super::ast::{AstExpr, Cond, Decl, Literal, Range, SourceProgram, Stmt};
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;

const KEYWORDS: [&str; 7] = ["var", "in", "if", "else", "while", "input", "true"];

/// Parse a whole program.
pub fn parse(text: &str) -> Result<SourceProgram, Diagnostic> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

fn cast_format(name: &str) -> Option<FloatFormat> {
    name.strip_prefix("cast_").and_then(FloatFormat::from_name)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(format!("expected {expected}, found {}", self.peek().describe()), self.span()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.is_keyword(kw) {
            Ok(self.bump())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let t = self.bump();
                Ok((name, t.span))
            }
            _ => self.unexpected(what),
        }
    }

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut decls = Vec::new();
        while self.is_keyword("var") {
            decls.push(self.decl()?);
        }
        let mut stmts = Vec::new();
        while *self.peek() != Tok::Eof {
            if self.is_keyword("var") {
                return Err(Diagnostic::error("declarations must precede statements", self.span()));
            }
            stmts.push(self.stmt()?);
        }
        Ok(SourceProgram { decls, stmts })
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.expect_keyword("var")?.span;
        let (name, _) = self.ident("a variable name")?;
        self.expect(Tok::Colon)?;
        let (fmt_name, fmt_span) = self.ident("a format (`f32`, `f64` or `mini`)")?;
        let format = FloatFormat::from_name(&fmt_name)
            .ok_or_else(|| Diagnostic::error(format!("unknown format `{fmt_name}`"), fmt_span))?;
        let range = if self.is_keyword("in") {
            self.bump();
            Some(self.range()?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(Decl { name, format, range, span: start })
    }

    fn range(&mut self) -> PResult<Range> {
        self.expect(Tok::LBracket)?;
        let lo = self.signed_literal()?;
        self.expect(Tok::Semi)?;
        let hi = self.signed_literal()?;
        self.expect(Tok::RBracket)?;
        Ok(Range { lo, hi })
    }

    fn signed_literal(&mut self) -> PResult<Literal> {
        let negative = *self.peek() == Tok::Minus;
        let sign_span = self.span();
        if negative {
            self.bump();
        }
        let lit = self.literal()?;
        Ok(if negative { negate_literal(lit, sign_span) } else { lit })
    }

    fn literal(&mut self) -> PResult<Literal> {
        match self.peek().clone() {
            Tok::Number(text) => {
                let span = self.bump().span;
                let value = parse_exact(&text).map_err(|e| Diagnostic::error(e.to_string(), span))?;
                Ok(Literal { text, value, span })
            }
            _ => self.unexpected("a number"),
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        if self.is_keyword("if") {
            self.bump();
            self.expect(Tok::LParen)?;
            let cond = self.cond()?;
            self.expect(Tok::RParen)?;
            let then_branch = self.block()?;
            let else_branch = if self.is_keyword("else") {
                self.bump();
                if self.is_keyword("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            return Ok(Stmt::If { cond, then_branch, else_branch, span });
        }
        if self.is_keyword("while") {
            self.bump();
            self.expect(Tok::LParen)?;
            let cond = self.cond()?;
            self.expect(Tok::RParen)?;
            let body = self.block()?;
            return Ok(Stmt::While { cond, body, span });
        }
        if self.is_keyword("input") {
            self.bump();
            let (target, _) = self.ident("a variable name")?;
            self.expect_keyword("in")?;
            let range = self.range()?;
            self.expect(Tok::Semi)?;
            return Ok(Stmt::Input { target, range, span });
        }
        let (target, _) = self.ident("a statement")?;
        self.expect(Tok::Assign)?;
        let value = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(Stmt::Assign { target, value, span })
    }

    fn cond(&mut self) -> PResult<Cond> {
        if *self.peek() == Tok::Star && *self.peek_at(1) == Tok::RParen {
            self.bump();
            return Ok(Cond::Any);
        }
        if self.is_keyword("true") && *self.peek_at(1) == Tok::RParen {
            self.bump();
            return Ok(Cond::True);
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Cmp("<=") => CmpOp::Le,
            Tok::Cmp("<") => CmpOp::Lt,
            Tok::Cmp(">=") => CmpOp::Ge,
            Tok::Cmp(">") => CmpOp::Gt,
            Tok::Cmp("==") => CmpOp::Eq,
            Tok::Cmp("!=") => CmpOp::Ne,
            _ => return self.unexpected("a comparison operator"),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond::Compare { lhs, op, rhs })
    }

    fn rounding(&mut self) -> PResult<RoundingMode> {
        if *self.peek() != Tok::At {
            return Ok(RoundingMode::NearestEven);
        }
        self.bump();
        self.expect_keyword("rm")?;
        self.expect(Tok::LParen)?;
        let mode = match self.peek().clone() {
            Tok::Ident(name) => RoundingMode::from_short_name(&name),
            _ => None,
        };
        let Some(mode) = mode else {
            return self.unexpected("a rounding mode (`n`, `z`, `up` or `down`)");
        };
        self.bump();
        self.expect(Tok::RParen)?;
        Ok(mode)
    }

    fn expr(&mut self) -> PResult<AstExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rounding = self.rounding()?;
            let rhs = self.term()?;
            lhs = AstExpr::Binary { op, rounding, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn term(&mut self) -> PResult<AstExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rounding = self.rounding()?;
            let rhs = self.unary()?;
            lhs = AstExpr::Binary { op, rounding, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn unary(&mut self) -> PResult<AstExpr> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().span;
            let operand = self.unary()?;
            // Literals are rounded to nearest, which commutes with negation.
            return Ok(match operand {
                AstExpr::Num(lit) => AstExpr::Num(negate_literal(lit, span)),
                other => AstExpr::Neg { operand: Box::new(other), span },
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<AstExpr> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(AstExpr::Num(self.literal()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(format) = cast_format(&name) {
                    let span = self.bump().span;
                    let rounding = self.rounding()?;
                    self.expect(Tok::LParen)?;
                    let operand = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(AstExpr::Cast { format, rounding, operand: Box::new(operand), span });
                }
                let (name, span) = self.ident("an expression")?;
                Ok(AstExpr::Var { name, span })
            }
            _ => self.unexpected("an expression"),
        }
    }
}

fn negate_literal(lit: Literal, sign_span: Span) -> Literal {
    let text = match lit.text.strip_prefix('-') {
        Some(rest) => rest.to_string(),
        None => format!("-{}", lit.text),
    };
    Literal { text, value: -lit.value, span: sign_span.to(lit.span) }
}
