use num::BigInt;

use super::ast::{BinOp, CmpOp, ContractAst, PartyRef, VarKind};
use super::lexer::Tok;
use super::parser::Parser;
use super::FrontendError;

/// Objective expression. Booleans and numbers mix freely: true is 1, false is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjExpr {
    Int(BigInt),
    Var(String),
    MapGet(String, PartyRef),
    Bin(BinOp, Box<ObjExpr>, Box<ObjExpr>),
    Cmp(CmpOp, Box<ObjExpr>, Box<ObjExpr>),
    PartyEq { lhs: PartyRef, rhs: PartyRef, negated: bool },
    And(Box<ObjExpr>, Box<ObjExpr>),
    Or(Box<ObjExpr>, Box<ObjExpr>),
    Not(Box<ObjExpr>),
    /// The `payoff` token; only valid as a top-level summand and removed by `parse_objective`.
    Payoff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    /// Whether the received-minus-paid term is included.
    pub monetary: bool,
    pub expr: ObjExpr,
}

pub fn parse_objective(text: &str, ast: &ContractAst) -> Result<Objective, FrontendError> {
    let mut p = Parser::with_ids(text, ast.ids().map(|v| v.name.clone()))?;
    // A declared non-id `p` keeps its ordinary meaning.
    p.objective_mode = ast.var("p").is_none();
    let e = or_expr(&mut p)?;
    p.expect(&Tok::Eof)?;

    let mut terms = Vec::new();
    split_sum(e, true, &mut terms);
    let mut monetary = false;
    let mut rest: Option<ObjExpr> = None;
    for (positive, term) in terms {
        if term == ObjExpr::Payoff {
            if !positive || monetary {
                return Err(misplaced_payoff());
            }
            monetary = true;
            continue;
        }
        if contains_payoff(&term) {
            return Err(misplaced_payoff());
        }
        rest = Some(match (rest, positive) {
            (None, true) => term,
            (None, false) => ObjExpr::Bin(BinOp::Sub, Box::new(ObjExpr::Int(0.into())), Box::new(term)),
            (Some(acc), true) => ObjExpr::Bin(BinOp::Add, Box::new(acc), Box::new(term)),
            (Some(acc), false) => ObjExpr::Bin(BinOp::Sub, Box::new(acc), Box::new(term)),
        });
    }
    let expr = rest.unwrap_or(ObjExpr::Int(0.into()));
    check_refs(&expr, ast)?;
    Ok(Objective { monetary, expr })
}

fn misplaced_payoff() -> FrontendError {
    FrontendError::Objective("'payoff' may only appear once, as a top-level added term".into())
}

fn split_sum(e: ObjExpr, positive: bool, out: &mut Vec<(bool, ObjExpr)>) {
    match e {
        ObjExpr::Bin(BinOp::Add, a, b) => {
            split_sum(*a, positive, out);
            split_sum(*b, positive, out);
        }
        ObjExpr::Bin(BinOp::Sub, a, b) => {
            split_sum(*a, positive, out);
            split_sum(*b, !positive, out);
        }
        other => out.push((positive, other)),
    }
}

fn contains_payoff(e: &ObjExpr) -> bool {
    match e {
        ObjExpr::Payoff => true,
        ObjExpr::Bin(_, a, b) | ObjExpr::Cmp(_, a, b) | ObjExpr::And(a, b) | ObjExpr::Or(a, b) => {
            contains_payoff(a) || contains_payoff(b)
        }
        ObjExpr::Not(a) => contains_payoff(a),
        _ => false,
    }
}

fn check_refs(e: &ObjExpr, ast: &ContractAst) -> Result<(), FrontendError> {
    let party_ok = |r: &PartyRef| -> Result<(), FrontendError> {
        match r {
            PartyRef::Var(n) => match ast.var(n).map(|v| &v.kind) {
                Some(VarKind::Id { .. }) => Ok(()),
                Some(_) => Err(FrontendError::Objective(format!("'{n}' is not an id variable"))),
                None => Err(FrontendError::Objective(format!("unknown variable '{n}'"))),
            },
            PartyRef::Caller => Err(FrontendError::Objective("'caller' has no meaning in an objective".into())),
            _ => Ok(()),
        }
    };
    match e {
        ObjExpr::Var(n) => match ast.var(n).map(|v| &v.kind) {
            Some(VarKind::Numeric { .. }) => Ok(()),
            Some(_) => Err(FrontendError::Objective(format!("'{n}' is not a numeric variable"))),
            None => Err(FrontendError::Objective(format!("unknown variable '{n}'"))),
        },
        ObjExpr::MapGet(m, idx) => {
            match ast.var(m).map(|v| &v.kind) {
                Some(VarKind::Map { .. }) => {}
                Some(_) => return Err(FrontendError::Objective(format!("'{m}' is not a map"))),
                None => return Err(FrontendError::Objective(format!("unknown variable '{m}'"))),
            }
            if *idx == PartyRef::Null {
                return Err(FrontendError::Objective(format!("map '{m}' indexed by null")));
            }
            party_ok(idx).map_err(|_| FrontendError::Objective(format!("map '{m}' indexed by non-id")))
        }
        ObjExpr::PartyEq { lhs, rhs, .. } => {
            party_ok(lhs)?;
            party_ok(rhs)
        }
        ObjExpr::Bin(_, a, b) | ObjExpr::Cmp(_, a, b) | ObjExpr::And(a, b) | ObjExpr::Or(a, b) => {
            check_refs(a, ast)?;
            check_refs(b, ast)
        }
        ObjExpr::Not(a) => check_refs(a, ast),
        ObjExpr::Int(_) | ObjExpr::Payoff => Ok(()),
    }
}

fn or_expr(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    let mut lhs = and_expr(p)?;
    while p.eat_kw("or") {
        lhs = ObjExpr::Or(Box::new(lhs), Box::new(and_expr(p)?));
    }
    Ok(lhs)
}

fn and_expr(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    let mut lhs = not_expr(p)?;
    while p.eat_kw("and") {
        lhs = ObjExpr::And(Box::new(lhs), Box::new(not_expr(p)?));
    }
    Ok(lhs)
}

fn not_expr(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    if p.eat_kw("not") {
        return Ok(ObjExpr::Not(Box::new(not_expr(p)?)));
    }
    cmp_expr(p)
}

fn cmp_expr(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    let lhs = add_expr(p)?;
    let op = match p.peek() {
        Tok::Lt => CmpOp::Lt,
        Tok::Gt => CmpOp::Gt,
        Tok::Le => CmpOp::Le,
        Tok::Ge => CmpOp::Ge,
        Tok::EqEq => CmpOp::Eq,
        Tok::NotEq => CmpOp::Ne,
        _ => return Ok(lhs),
    };
    p.bump();
    let rhs = add_expr(p)?;
    Ok(ObjExpr::Cmp(op, Box::new(lhs), Box::new(rhs)))
}

fn add_expr(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    let mut lhs = mul_expr(p)?;
    loop {
        let op = match p.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => return Ok(lhs),
        };
        p.bump();
        lhs = ObjExpr::Bin(op, Box::new(lhs), Box::new(mul_expr(p)?));
    }
}

fn mul_expr(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    let mut lhs = unary(p)?;
    loop {
        let op = match p.peek() {
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return Ok(lhs),
        };
        p.bump();
        lhs = ObjExpr::Bin(op, Box::new(lhs), Box::new(unary(p)?));
    }
}

fn unary(p: &mut Parser) -> Result<ObjExpr, FrontendError> {
    if p.eat(&Tok::Minus) {
        return Ok(match unary(p)? {
            ObjExpr::Int(n) => ObjExpr::Int(-n),
            e => ObjExpr::Bin(BinOp::Sub, Box::new(ObjExpr::Int(0.into())), Box::new(e)),
        });
    }
    if p.at_party() {
        let lhs = p.party()?;
        let negated = match p.peek() {
            Tok::EqEq => false,
            Tok::NotEq => true,
            _ => return Err(p.error("expected '==' or '!=' after a party")),
        };
        p.bump();
        let rhs = p.party()?;
        return Ok(ObjExpr::PartyEq { lhs, rhs, negated });
    }
    match p.peek().clone() {
        Tok::Int(n) => {
            p.bump();
            Ok(ObjExpr::Int(n))
        }
        Tok::LParen => {
            p.bump();
            let e = or_expr(p)?;
            p.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::Ident(s) if s == "payoff" => {
            p.bump();
            Ok(ObjExpr::Payoff)
        }
        Tok::Ident(_) => {
            let name = p.ident()?;
            if p.eat(&Tok::LBracket) {
                let idx = p.party()?;
                p.expect(&Tok::RBracket)?;
                Ok(ObjExpr::MapGet(name, idx))
            } else {
                Ok(ObjExpr::Var(name))
            }
        }
        _ => Err(p.error(format!("expected expression, found {}", p.peek().describe()))),
    }
}
