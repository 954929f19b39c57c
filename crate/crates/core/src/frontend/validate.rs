use std::collections::HashSet;

use num::{BigInt, ToPrimitive};

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn render(&self, file: &str) -> String {
        let tag = match self.severity {
            Severity::Error => "",
            Severity::Warning => "warning: ",
        };
        format!("{file}:{}:{}: {tag}{}", self.span.line, self.span.col, self.message)
    }
}

/// A contract that passed validation, with any warnings found on the way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidatedContract {
    pub ast: ContractAst,
    pub warnings: Vec<Diagnostic>,
}

/// Largest time stamp accepted in a function header.
pub const MAX_TIME: i64 = 1_000_000;

pub fn validate(ast: &ContractAst) -> Result<ValidatedContract, Vec<Diagnostic>> {
    let mut v = Validator { ast, diags: Vec::new() };
    v.run();
    let (errors, warnings): (Vec<_>, Vec<_>) = v.diags.into_iter().partition(|d| d.severity == Severity::Error);
    if errors.is_empty() {
        Ok(ValidatedContract { ast: ast.clone(), warnings })
    } else {
        Err(errors)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Numeric,
    Map,
    Id,
}

struct Validator<'a> {
    ast: &'a ContractAst,
    diags: Vec<Diagnostic>,
}

struct Scope<'f> {
    f: &'f FunctionDecl,
    multi: bool,
}

impl<'a> Validator<'a> {
    fn error(&mut self, span: Span, message: String) {
        self.diags.push(Diagnostic { span, severity: Severity::Error, message });
    }

    fn warn(&mut self, span: Span, message: String) {
        self.diags.push(Diagnostic { span, severity: Severity::Warning, message });
    }

    fn kind(&self, name: &str) -> Option<Kind> {
        self.ast.var(name).map(|v| match v.kind {
            VarKind::Numeric { .. } => Kind::Numeric,
            VarKind::Map { .. } => Kind::Map,
            VarKind::Id { .. } => Kind::Id,
        })
    }

    fn range(&self, name: &str) -> Option<(BigInt, BigInt)> {
        match &self.ast.var(name)?.kind {
            VarKind::Numeric { lo, hi, .. } | VarKind::Map { lo, hi, .. } => Some((lo.clone(), hi.clone())),
            VarKind::Id { .. } => None,
        }
    }

    fn run(&mut self) {
        for v in &self.ast.vars {
            if let VarKind::Numeric { lo, hi, init } | VarKind::Map { lo, hi, init } = &v.kind {
                let what = if matches!(v.kind, VarKind::Map { .. }) { "map" } else { "numeric" };
                if [lo, hi, init].iter().any(|n| n.to_i64().is_none()) {
                    self.error(v.span, format!("{what} '{}': integer literal too large", v.name));
                    continue;
                }
                if lo > hi {
                    self.error(v.span, format!("{what} '{}': empty range [{lo}, {hi}]", v.name));
                } else if init < lo || init > hi {
                    self.error(v.span, format!("{what} '{}': initial value out of range", v.name));
                }
            }
        }
        for f in &self.ast.functions {
            self.function(f);
        }
        self.overlaps();
    }

    fn overlaps(&mut self) {
        let fs = &self.ast.functions;
        for (i, f) in fs.iter().enumerate() {
            if f.kind != FunctionKind::MultiParty {
                continue;
            }
            for (j, g) in fs.iter().enumerate() {
                if i == j || (g.kind == FunctionKind::MultiParty && j < i) {
                    continue;
                }
                if f.tlo <= g.thi && g.tlo <= f.thi {
                    self.error(
                        f.span,
                        format!("function '{}': multi-party interval overlap with '{}'", f.name, g.name),
                    );
                }
            }
        }
    }

    fn function(&mut self, f: &FunctionDecl) {
        let times_ok = [&f.tlo, &f.thi].iter().all(|t| t.to_i64().is_some_and(|t| (0..=MAX_TIME).contains(&t)));
        if !times_ok {
            self.error(f.span, format!("function '{}': time bounds must lie in [0, {MAX_TIME}]", f.name));
        } else if f.tlo >= f.thi {
            self.error(f.span, format!("function '{}': time interval requires lower < upper", f.name));
        }
        let scope = Scope { f, multi: f.kind == FunctionKind::MultiParty };
        let designators: HashSet<&str> = f
            .params
            .iter()
            .filter_map(|p| match &p.designator {
                PartyRef::Var(n) => Some(n.as_str()),
                _ => None,
            })
            .collect();
        let mut targets: Vec<&Target> = Vec::new();
        for p in &f.params {
            self.param(&scope, p, &designators);
            if targets.contains(&&p.target) {
                self.error(p.span, format!("function '{}': parameter target assigned twice", f.name));
            }
            targets.push(&p.target);
        }
        self.stmts(&scope, &f.body);
    }

    fn param(&mut self, sc: &Scope, p: &Param, designators: &HashSet<&str>) {
        let fname = &sc.f.name;
        match &p.designator {
            PartyRef::Caller if sc.multi => {
                self.error(p.span, format!("function '{fname}': multi-party functions never use the caller keyword"))
            }
            PartyRef::Var(n) if self.kind(n) != Some(Kind::Id) => {
                self.error(p.span, format!("function '{fname}': designator '{n}' is not an id variable"))
            }
            _ => {}
        }
        if sc.multi && !p.payable && p.default.is_none() {
            self.error(p.span, format!("function '{fname}': multi-party decision needs a default value"));
        }
        if p.payable && p.default.is_some() {
            self.error(p.span, format!("function '{fname}': payments take no default value"));
        }
        let range = match &p.target {
            Target::Var(n) => match self.kind(n) {
                Some(Kind::Numeric) => self.range(n),
                Some(Kind::Id) => {
                    if p.payable {
                        self.error(p.span, format!("function '{fname}': id variable '{n}' cannot be payable"));
                    }
                    if sc.multi {
                        self.error(p.span, format!("function '{fname}': id parameters are one-party only"));
                    }
                    if designators.contains(n.as_str()) {
                        self.error(
                            p.span,
                            format!("function '{fname}': id variable '{n}' is both decided and a designator"),
                        );
                    }
                    None
                }
                Some(Kind::Map) => {
                    self.error(p.span, format!("function '{fname}': map '{n}' used without an index"));
                    None
                }
                None => {
                    self.error(p.span, format!("function '{fname}': unknown variable '{n}'"));
                    None
                }
            },
            Target::MapEntry(m, idx) => {
                self.map_index(sc, p.span, m, idx);
                self.range(m)
            }
        };
        if let (Some(d), Some((lo, hi))) = (&p.default, range) {
            if *d < lo || *d > hi {
                self.error(p.span, format!("function '{fname}': default value out of range"));
            }
        }
    }

    fn map_index(&mut self, sc: &Scope, span: Span, m: &str, idx: &PartyRef) {
        let fname = &sc.f.name;
        match self.kind(m) {
            Some(Kind::Map) => {}
            Some(_) => self.error(span, format!("function '{fname}': '{m}' is not a map")),
            None => self.error(span, format!("function '{fname}': unknown variable '{m}'")),
        }
        match idx {
            PartyRef::Var(n) if self.kind(n) != Some(Kind::Id) => {
                self.error(span, format!("function '{fname}': map '{m}' indexed by non-id '{n}'"))
            }
            PartyRef::Null | PartyRef::Me => {
                self.error(span, format!("function '{fname}': map '{m}' indexed by non-id"))
            }
            _ => self.party(sc, span, idx),
        }
    }

    fn party(&mut self, sc: &Scope, span: Span, r: &PartyRef) {
        let fname = &sc.f.name;
        match r {
            PartyRef::Caller if sc.multi => {
                self.error(span, format!("function '{fname}': multi-party functions never use the caller keyword"))
            }
            PartyRef::Var(n) if self.kind(n).is_none() => {
                self.error(span, format!("function '{fname}': unknown variable '{n}'"))
            }
            PartyRef::Var(n) if self.kind(n) != Some(Kind::Id) => {
                self.error(span, format!("function '{fname}': '{n}' is not an id variable"))
            }
            PartyRef::Me => self.error(span, format!("function '{fname}': unknown variable 'p'")),
            _ => {}
        }
    }

    fn stmts(&mut self, sc: &Scope, body: &[Stmt]) {
        for (i, st) in body.iter().enumerate() {
            if matches!(st, Stmt::Return { .. }) && i + 1 < body.len() {
                self.warn(body[i + 1].span(), format!("function '{}': unreachable statement", sc.f.name));
            }
            self.stmt(sc, st);
        }
    }

    fn stmt(&mut self, sc: &Scope, st: &Stmt) {
        let fname = &sc.f.name;
        match st {
            Stmt::If { cond, then, els, span } => {
                self.bexpr(sc, *span, cond);
                self.stmts(sc, then);
                if let Some(e) = els {
                    self.stmts(sc, e);
                }
            }
            Stmt::Assign { target, value, span } => match (target, value) {
                (Target::Var(n), Rhs::Party(r)) => {
                    if self.kind(n) != Some(Kind::Id) {
                        self.error(*span, format!("function '{fname}': '{n}' is not an id variable"));
                    }
                    self.party(sc, *span, r);
                }
                (Target::Var(n), Rhs::Expr(e)) => {
                    match self.kind(n) {
                        Some(Kind::Numeric) => {}
                        Some(_) => self.error(*span, format!("function '{fname}': '{n}' is not a numeric variable")),
                        None => self.error(*span, format!("function '{fname}': unknown variable '{n}'")),
                    }
                    self.expr(sc, *span, e);
                }
                (Target::MapEntry(m, idx), Rhs::Expr(e)) => {
                    self.map_index(sc, *span, m, idx);
                    self.expr(sc, *span, e);
                }
                (Target::MapEntry(m, _), Rhs::Party(_)) => {
                    self.error(*span, format!("function '{fname}': map '{m}' holds integers, not parties"))
                }
            },
            Stmt::Payout { to, amount, span } => {
                if *to == PartyRef::Null {
                    self.warn(*span, format!("function '{fname}': payout to null is a no-op"));
                }
                self.party(sc, *span, to);
                self.expr(sc, *span, amount);
            }
            Stmt::Return { .. } => {}
        }
    }

    fn bexpr(&mut self, sc: &Scope, span: Span, b: &Bexpr) {
        match b {
            Bexpr::Cmp(_, l, r) => {
                self.expr(sc, span, l);
                self.expr(sc, span, r);
            }
            Bexpr::PartyEq { lhs, rhs, .. } => {
                self.party(sc, span, lhs);
                self.party(sc, span, rhs);
            }
            Bexpr::And(a, c) | Bexpr::Or(a, c) => {
                self.bexpr(sc, span, a);
                self.bexpr(sc, span, c);
            }
            Bexpr::Not(a) => self.bexpr(sc, span, a),
        }
    }

    fn expr(&mut self, sc: &Scope, span: Span, e: &Expr) {
        let fname = &sc.f.name;
        match e {
            Expr::Int(n) => {
                if n.to_i64().is_none() {
                    self.error(span, format!("function '{fname}': integer literal too large"));
                }
            }
            Expr::Var(n) => match self.kind(n) {
                Some(Kind::Numeric) => {}
                Some(_) => self.error(span, format!("function '{fname}': '{n}' is not a numeric variable")),
                None => self.error(span, format!("function '{fname}': unknown variable '{n}'")),
            },
            Expr::MapGet(m, idx) => self.map_index(sc, span, m, idx),
            Expr::Bin(_, a, b) => {
                self.expr(sc, span, a);
                self.expr(sc, span, b);
            }
        }
    }
}
