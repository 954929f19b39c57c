use std::collections::HashSet;

use num::BigInt;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::FrontendError;

const KEYWORDS: &[&str] = &[
    "contract", "numeric", "map", "id", "function", "payable", "caller", "null", "if", "else", "return",
    "payout", "and", "or", "not",
];

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Names declared as id variables; decides between party and arithmetic readings.
    id_vars: HashSet<String>,
    /// When set, a bare `p` that is not a declared variable denotes the analysed party.
    pub(crate) objective_mode: bool,
}

pub fn parse(src: &str) -> Result<ContractAst, FrontendError> {
    let mut p = Parser::new(src)?;
    let ast = p.contract()?;
    p.expect(&Tok::Eof)?;
    Ok(ast)
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, FrontendError> {
        Ok(Self { toks: lex(src)?, pos: 0, id_vars: HashSet::new(), objective_mode: false })
    }

    pub(crate) fn with_ids(src: &str, ids: impl IntoIterator<Item = String>) -> Result<Self, FrontendError> {
        let mut p = Self::new(src)?;
        p.id_vars.extend(ids);
        Ok(p)
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> FrontendError {
        FrontendError::Syntax { span: self.span(), message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> FrontendError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub(crate) fn expect(&mut self, t: &Tok) -> Result<(), FrontendError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else if *t == Tok::Eof {
            Err(self.unexpected("end of input"))
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), FrontendError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn int(&mut self) -> Result<BigInt, FrontendError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    fn contract(&mut self) -> Result<ContractAst, FrontendError> {
        self.expect_kw("contract")?;
        let name = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut vars: Vec<VarDecl> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        while self.is_kw("numeric") || self.is_kw("map") || self.is_kw("id") {
            let decl = self.var_decl()?;
            if !seen.insert(decl.name.clone()) {
                return Err(FrontendError::Duplicate { span: decl.span, name: decl.name });
            }
            if matches!(decl.kind, VarKind::Id { .. }) {
                self.id_vars.insert(decl.name.clone());
            }
            vars.push(decl);
        }
        if vars.is_empty() {
            return Err(self.unexpected("variable declaration"));
        }
        let mut functions: Vec<FunctionDecl> = Vec::new();
        let mut fnames: HashSet<String> = HashSet::new();
        while self.is_kw("function") {
            let f = self.function()?;
            if !fnames.insert(f.name.clone()) {
                return Err(FrontendError::Duplicate { span: f.span, name: f.name });
            }
            functions.push(f);
        }
        if functions.is_empty() {
            return Err(self.unexpected("'function'"));
        }
        self.expect(&Tok::RBrace)?;
        Ok(ContractAst { name, vars, functions })
    }

    fn var_decl(&mut self) -> Result<VarDecl, FrontendError> {
        let span = self.span();
        if self.eat_kw("id") {
            let name = self.ident()?;
            self.expect(&Tok::Assign)?;
            let init = match self.peek().clone() {
                Tok::Ident(s) if s == "null" => {
                    self.bump();
                    IdInit::Null
                }
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                    self.bump();
                    IdInit::Party(s)
                }
                Tok::Int(n) => {
                    self.bump();
                    IdInit::Party(n.to_string())
                }
                _ => return Err(self.unexpected("party literal or 'null'")),
            };
            self.expect(&Tok::Semi)?;
            return Ok(VarDecl { name, kind: VarKind::Id { init }, span });
        }
        let is_map = self.eat_kw("map");
        if !is_map {
            self.expect_kw("numeric")?;
        }
        let name = self.ident()?;
        self.expect(&Tok::LBracket)?;
        let lo = self.int()?;
        self.expect(&Tok::Comma)?;
        let hi = self.int()?;
        self.expect(&Tok::RBracket)?;
        self.expect(&Tok::Assign)?;
        let init = self.int()?;
        self.expect(&Tok::Semi)?;
        let kind = if is_map { VarKind::Map { lo, hi, init } } else { VarKind::Numeric { lo, hi, init } };
        Ok(VarDecl { name, kind, span })
    }

    fn function(&mut self) -> Result<FunctionDecl, FrontendError> {
        let span = self.span();
        self.expect_kw("function")?;
        let name = self.ident()?;
        self.expect(&Tok::LBracket)?;
        let tlo = self.int()?;
        self.expect(&Tok::Comma)?;
        let thi = self.int()?;
        self.expect(&Tok::RBracket)?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                params.push(self.param()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        let kind = if params.iter().any(|p| p.default.is_some()) {
            FunctionKind::MultiParty
        } else {
            FunctionKind::OneParty
        };
        self.expect(&Tok::LBrace)?;
        let body = self.stmt_list()?;
        self.expect(&Tok::RBrace)?;
        Ok(FunctionDecl { name, tlo, thi, kind, params, body, span })
    }

    fn param(&mut self) -> Result<Param, FrontendError> {
        let span = self.span();
        let payable = self.eat_kw("payable");
        let target = self.target()?;
        self.expect(&Tok::Colon)?;
        let designator = if self.eat_kw("caller") {
            PartyRef::Caller
        } else {
            PartyRef::Var(self.ident()?)
        };
        let default = if self.eat(&Tok::Assign) { Some(self.int()?) } else { None };
        Ok(Param { target, designator, payable, default, span })
    }

    fn target(&mut self) -> Result<Target, FrontendError> {
        let name = self.ident()?;
        if self.eat(&Tok::LBracket) {
            let idx = self.party()?;
            self.expect(&Tok::RBracket)?;
            Ok(Target::MapEntry(name, idx))
        } else {
            Ok(Target::Var(name))
        }
    }

    pub(crate) fn party(&mut self) -> Result<PartyRef, FrontendError> {
        if self.eat_kw("caller") {
            return Ok(PartyRef::Caller);
        }
        if self.eat_kw("null") {
            return Ok(PartyRef::Null);
        }
        let name = self.ident()?;
        if self.objective_mode && name == "p" && !self.id_vars.contains("p") {
            return Ok(PartyRef::Me);
        }
        Ok(PartyRef::Var(name))
    }

    /// Parses statements up to (not including) a closing brace.
    fn stmt_list(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace && *self.peek() != Tok::Eof {
            out.push(self.stmt()?);
        }
        if out.is_empty() {
            return Err(self.unexpected("statement"));
        }
        Ok(out)
    }

    /// A braced block or a single statement.
    fn block(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        if self.eat(&Tok::LBrace) {
            let body = self.stmt_list()?;
            self.expect(&Tok::RBrace)?;
            Ok(body)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let span = self.span();
        if self.eat_kw("if") {
            self.expect(&Tok::LParen)?;
            let cond = self.bexpr()?;
            self.expect(&Tok::RParen)?;
            let then = self.block()?;
            let els = if self.eat_kw("else") { Some(self.block()?) } else { None };
            return Ok(Stmt::If { cond, then, els, span });
        }
        if self.eat_kw("return") {
            self.expect(&Tok::Semi)?;
            return Ok(Stmt::Return { span });
        }
        if self.eat_kw("payout") {
            self.expect(&Tok::LParen)?;
            let to = self.party()?;
            self.expect(&Tok::Comma)?;
            let amount = self.expr()?;
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Semi)?;
            return Ok(Stmt::Payout { to, amount, span });
        }
        let target = self.target()?;
        let is_id = matches!(&target, Target::Var(n) if self.id_vars.contains(n));
        let op = self.bump();
        let value = match op {
            Tok::Assign if is_id => Rhs::Party(self.party()?),
            Tok::Assign => Rhs::Expr(self.expr()?),
            Tok::PlusAssign | Tok::MinusAssign if !is_id => {
                let rhs = self.expr()?;
                let bin = if op == Tok::PlusAssign { BinOp::Add } else { BinOp::Sub };
                Rhs::Expr(Expr::Bin(bin, Box::new(target_expr(&target)), Box::new(rhs)))
            }
            _ => {
                return Err(FrontendError::Syntax {
                    span,
                    message: "expected assignment operator".into(),
                })
            }
        };
        self.expect(&Tok::Semi)?;
        Ok(Stmt::Assign { target, value, span })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        if self.eat(&Tok::Minus) {
            return Ok(match self.unary()? {
                Expr::Int(n) => Expr::Int(-n),
                e => Expr::Bin(BinOp::Sub, Box::new(Expr::Int(BigInt::from(0))), Box::new(e)),
            });
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::LBracket) {
                    let idx = self.party()?;
                    self.expect(&Tok::RBracket)?;
                    Ok(Expr::MapGet(name, idx))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            _ => return None,
        })
    }

    /// True when the upcoming tokens start a party operand rather than an expression.
    pub(crate) fn at_party(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) if s == "caller" || s == "null" => true,
            Tok::Ident(s) if self.id_vars.contains(s) => *self.peek_at(1) != Tok::LBracket,
            Tok::Ident(s) if self.objective_mode && s == "p" => *self.peek_at(1) != Tok::LBracket,
            _ => false,
        }
    }

    pub(crate) fn bexpr(&mut self) -> Result<Bexpr, FrontendError> {
        let mut lhs = self.band()?;
        while self.eat_kw("or") {
            let rhs = self.band()?;
            lhs = Bexpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn band(&mut self) -> Result<Bexpr, FrontendError> {
        let mut lhs = self.bnot()?;
        while self.eat_kw("and") {
            let rhs = self.bnot()?;
            lhs = Bexpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bnot(&mut self) -> Result<Bexpr, FrontendError> {
        if self.eat_kw("not") {
            return Ok(Bexpr::Not(Box::new(self.bnot()?)));
        }
        if *self.peek() == Tok::LParen {
            // Either a parenthesized condition or a literal whose left side is parenthesized.
            let save = self.pos;
            if let Ok(lit) = self.literal() {
                return Ok(lit);
            }
            self.pos = save;
            self.bump();
            let inner = self.bexpr()?;
            self.expect(&Tok::RParen)?;
            return Ok(inner);
        }
        self.literal()
    }

    fn literal(&mut self) -> Result<Bexpr, FrontendError> {
        if self.at_party() {
            let lhs = self.party()?;
            let negated = match self.peek() {
                Tok::EqEq => false,
                Tok::NotEq => true,
                _ => return Err(self.unexpected("'==' or '!='")),
            };
            self.bump();
            let rhs = self.party()?;
            return Ok(Bexpr::PartyEq { lhs, rhs, negated });
        }
        let lhs = self.expr()?;
        let op = self.cmp_op().ok_or_else(|| self.unexpected("comparison operator"))?;
        self.bump();
        let rhs = self.expr()?;
        Ok(Bexpr::Cmp(op, lhs, rhs))
    }
}

fn target_expr(t: &Target) -> Expr {
    match t {
        Target::Var(n) => Expr::Var(n.clone()),
        Target::MapEntry(m, i) => Expr::MapGet(m.clone(), i.clone()),
    }
}
