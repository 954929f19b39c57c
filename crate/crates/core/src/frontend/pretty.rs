use std::fmt::Write;

use super::ast::*;
use super::objective::ObjExpr;

pub fn pretty_print(ast: &ContractAst) -> String {
    let mut out = String::new();
    writeln!(out, "contract {} {{", ast.name).unwrap();
    for v in &ast.vars {
        match &v.kind {
            VarKind::Numeric { lo, hi, init } => writeln!(out, "    numeric {}[{lo}, {hi}] = {init};", v.name),
            VarKind::Map { lo, hi, init } => writeln!(out, "    map {}[{lo}, {hi}] = {init};", v.name),
            VarKind::Id { init: IdInit::Null } => writeln!(out, "    id {} = null;", v.name),
            VarKind::Id { init: IdInit::Party(p) } => writeln!(out, "    id {} = {p};", v.name),
        }
        .unwrap();
    }
    for f in &ast.functions {
        out.push('\n');
        let params: Vec<String> = f.params.iter().map(param).collect();
        writeln!(out, "    function {}[{}, {}]({}) {{", f.name, f.tlo, f.thi, params.join(", ")).unwrap();
        stmts(&mut out, &f.body, 2);
        writeln!(out, "    }}").unwrap();
    }
    out.push_str("}\n");
    out
}

fn param(p: &Param) -> String {
    let mut s = String::new();
    if p.payable {
        s.push_str("payable ");
    }
    s.push_str(&target(&p.target));
    s.push_str(" : ");
    s.push_str(&party(&p.designator));
    if let Some(d) = &p.default {
        write!(s, " = {d}").unwrap();
    }
    s
}

fn stmts(out: &mut String, body: &[Stmt], depth: usize) {
    let pad = "    ".repeat(depth);
    for st in body {
        match st {
            Stmt::If { cond, then, els, .. } => {
                writeln!(out, "{pad}if ({}) {{", bexpr(cond)).unwrap();
                stmts(out, then, depth + 1);
                match els {
                    Some(e) => {
                        writeln!(out, "{pad}}} else {{").unwrap();
                        stmts(out, e, depth + 1);
                        writeln!(out, "{pad}}}").unwrap();
                    }
                    None => writeln!(out, "{pad}}}").unwrap(),
                }
            }
            Stmt::Assign { target: t, value, .. } => {
                let rhs = match value {
                    Rhs::Expr(e) => expr(e),
                    Rhs::Party(p) => party(p),
                };
                writeln!(out, "{pad}{} = {rhs};", target(t)).unwrap();
            }
            Stmt::Payout { to, amount, .. } => {
                writeln!(out, "{pad}payout({}, {});", party(to), expr(amount)).unwrap();
            }
            Stmt::Return { .. } => writeln!(out, "{pad}return;").unwrap(),
        }
    }
}

pub fn party(p: &PartyRef) -> String {
    match p {
        PartyRef::Caller => "caller".into(),
        PartyRef::Null => "null".into(),
        PartyRef::Var(n) => n.clone(),
        PartyRef::Me => "p".into(),
    }
}

pub fn target(t: &Target) -> String {
    match t {
        Target::Var(n) => n.clone(),
        Target::MapEntry(m, i) => format!("{m}[{}]", party(i)),
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Var(n) => n.clone(),
        Expr::MapGet(m, i) => format!("{m}[{}]", party(i)),
        Expr::Bin(op, a, b) => format!("({} {} {})", expr(a), op.symbol(), expr(b)),
    }
}

pub fn bexpr(b: &Bexpr) -> String {
    match b {
        Bexpr::Cmp(op, l, r) => format!("{} {} {}", expr(l), op.symbol(), expr(r)),
        Bexpr::PartyEq { lhs, rhs, negated } => {
            format!("{} {} {}", party(lhs), if *negated { "!=" } else { "==" }, party(rhs))
        }
        Bexpr::And(a, c) => format!("({} and {})", bexpr(a), bexpr(c)),
        Bexpr::Or(a, c) => format!("({} or {})", bexpr(a), bexpr(c)),
        Bexpr::Not(a) => format!("not ({})", bexpr(a)),
    }
}

pub fn objective_expr(e: &ObjExpr) -> String {
    match e {
        ObjExpr::Int(n) => n.to_string(),
        ObjExpr::Var(n) => n.clone(),
        ObjExpr::MapGet(m, i) => format!("{m}[{}]", party(i)),
        ObjExpr::Bin(op, a, b) => format!("({} {} {})", objective_expr(a), op.symbol(), objective_expr(b)),
        ObjExpr::Cmp(op, a, b) => format!("({} {} {})", objective_expr(a), op.symbol(), objective_expr(b)),
        ObjExpr::PartyEq { lhs, rhs, negated } => {
            format!("({} {} {})", party(lhs), if *negated { "!=" } else { "==" }, party(rhs))
        }
        ObjExpr::And(a, b) => format!("({} and {})", objective_expr(a), objective_expr(b)),
        ObjExpr::Or(a, b) => format!("({} or {})", objective_expr(a), objective_expr(b)),
        ObjExpr::Not(a) => format!("not ({})", objective_expr(a)),
        ObjExpr::Payoff => "payoff".into(),
    }
}
