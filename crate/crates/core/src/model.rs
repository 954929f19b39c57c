//! A validated contract compiled for one bounded analysis: parties fixed,
//! names resolved to indices, ranges final.

use std::collections::BTreeMap;

use num::ToPrimitive;
use thiserror::Error;

use crate::cfg::{assign_labels, successor_table, Label, LabelKind, LabeledContract, Next};
use crate::frontend::{
    BinOp, Bexpr, CmpOp, ContractAst, Expr, FunctionKind, IdInit, ObjExpr, Objective, PartyRef, Rhs, Target,
    ValidatedContract, VarKind,
};

/// Marker for a Null id value.
pub const NULL: u8 = u8::MAX;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("party bound k = {k} is smaller than the {needed} parties named in the contract")]
    TooFewParties { k: usize, needed: usize },
    #[error("k must be at least 1")]
    NoParties,
    #[error("override for unknown numeric or map variable '{0}'")]
    UnknownOverride(String),
    #[error("override {name}=[{lo}, {hi}] widens or empties the declared range [{dlo}, {dhi}]")]
    WideningOverride { name: String, lo: i64, hi: i64, dlo: i64, dhi: i64 },
    #[error("function '{0}': payable entries of one map may alias")]
    AliasingPayments(String),
    #[error("function '{0}': a map target is indexed by an id decided in the same call")]
    IndexDecided(String),
}

/// The bounded party set P = {p1, ..., pk}.
///
/// Id literals of the source come first in order of appearance, then the analysed
/// party if it is not one of them, then generated names. When simultaneous calls
/// compete, the analysed party ranks last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartySet {
    pub names: Vec<String>,
    pub analyzed: u8,
}

impl PartySet {
    pub fn new(ast: &ContractAst, k: usize, analyzed: &str) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::NoParties);
        }
        let mut names: Vec<String> = Vec::new();
        for v in ast.ids() {
            if let VarKind::Id { init: IdInit::Party(p) } = &v.kind {
                if !names.contains(p) {
                    names.push(p.clone());
                }
            }
        }
        if !names.iter().any(|n| n == analyzed) {
            names.push(analyzed.to_string());
        }
        if names.len() > k {
            return Err(ModelError::TooFewParties { k, needed: names.len() });
        }
        let mut i = 1;
        while names.len() < k {
            let candidate = format!("q{i}");
            if !names.contains(&candidate) {
                names.push(candidate);
            }
            i += 1;
        }
        let analyzed = names.iter().position(|n| n == analyzed).expect("added above") as u8;
        Ok(Self { names, analyzed })
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    /// Scheduling rank: the analysed party is last, the rest keep their order.
    pub fn rank(&self, q: u8) -> u8 {
        if q == self.analyzed {
            self.names.len() as u8
        } else {
            q
        }
    }

    pub fn index(&self, name: &str) -> Option<u8> {
        self.names.iter().position(|n| n == name).map(|i| i as u8)
    }
}

/// Range overrides by variable name; map overrides apply to every entry.
pub type Overrides = BTreeMap<String, (i64, i64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CParty {
    Caller,
    Null,
    Id(u16),
    Me,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CExpr {
    Int(i64),
    Obj(u16),
    Map(u16, CParty),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CBexpr {
    Cmp(CmpOp, CExpr, CExpr),
    PartyEq(CParty, CParty, bool),
    And(Box<CBexpr>, Box<CBexpr>),
    Or(Box<CBexpr>, Box<CBexpr>),
    Not(Box<CBexpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CObj {
    Int(i64),
    Obj(u16),
    Map(u16, CParty),
    Bin(BinOp, Box<CObj>, Box<CObj>),
    Cmp(CmpOp, Box<CObj>, Box<CObj>),
    PartyEq(CParty, CParty, bool),
    And(Box<CObj>, Box<CObj>),
    Or(Box<CObj>, Box<CObj>),
    Not(Box<CObj>),
}

/// Writable singleton: a numeric object, a map entry, or an id variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CTarget {
    Obj(u16),
    Map(u16, CParty),
    Id(u16),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Header,
    Entry(usize),
    Exit(usize),
    If { cond: CBexpr, then: Label, els: Label },
    Assign { target: CTarget, value: CExpr, next: Label },
    AssignId { id: u16, value: CParty, next: Label },
    Payout { to: CParty, amount: CExpr, next: Label },
    Return { exit: Label },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CParam {
    pub target: CTarget,
    pub designator: CParty,
    pub payable: bool,
    /// Default for decisions; payments default to 0.
    pub default: Option<i64>,
    /// Admissible values: payments `[max(0, lo), hi]`, decisions `[lo, hi]`.
    pub lo: i64,
    pub hi: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFunc {
    pub name: String,
    pub tlo: u32,
    pub thi: u32,
    pub multi: bool,
    pub entry: Label,
    pub exit: Label,
    pub first: Label,
    pub params: Vec<CParam>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapInfo {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
    /// Object index of the entry for party 0.
    pub base: u16,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectInfo {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

/// Everything the semantics and the abstraction need, with names resolved.
#[derive(Clone, Debug)]
pub struct Model {
    pub lc: LabeledContract,
    pub parties: PartySet,
    /// Object 0 is the balance, then numerics, then map entries.
    pub objects: Vec<ObjectInfo>,
    pub maps: Vec<MapInfo>,
    pub id_names: Vec<String>,
    pub id_init: Vec<u8>,
    pub nodes: Vec<Node>,
    pub funcs: Vec<CFunc>,
    pub monetary: bool,
    pub objective: CObj,
    pub max_t: u32,
}

pub const BALANCE: u16 = 0;

struct Resolver<'a> {
    ast: &'a ContractAst,
    numeric_obj: BTreeMap<String, u16>,
    map_idx: BTreeMap<String, u16>,
    id_idx: BTreeMap<String, u16>,
}

impl Resolver<'_> {
    fn party(&self, p: &PartyRef) -> CParty {
        match p {
            PartyRef::Caller => CParty::Caller,
            PartyRef::Null => CParty::Null,
            PartyRef::Me => CParty::Me,
            PartyRef::Var(n) => CParty::Id(self.id_idx[n]),
        }
    }

    fn expr(&self, e: &Expr) -> CExpr {
        match e {
            Expr::Int(n) => CExpr::Int(n.to_i64().expect("validated")),
            Expr::Var(n) => CExpr::Obj(self.numeric_obj[n]),
            Expr::MapGet(m, i) => CExpr::Map(self.map_idx[m], self.party(i)),
            Expr::Bin(op, a, b) => CExpr::Bin(*op, Box::new(self.expr(a)), Box::new(self.expr(b))),
        }
    }

    fn bexpr(&self, b: &Bexpr) -> CBexpr {
        match b {
            Bexpr::Cmp(op, l, r) => CBexpr::Cmp(*op, self.expr(l), self.expr(r)),
            Bexpr::PartyEq { lhs, rhs, negated } => CBexpr::PartyEq(self.party(lhs), self.party(rhs), *negated),
            Bexpr::And(a, c) => CBexpr::And(Box::new(self.bexpr(a)), Box::new(self.bexpr(c))),
            Bexpr::Or(a, c) => CBexpr::Or(Box::new(self.bexpr(a)), Box::new(self.bexpr(c))),
            Bexpr::Not(a) => CBexpr::Not(Box::new(self.bexpr(a))),
        }
    }

    fn obj(&self, e: &ObjExpr) -> CObj {
        let b = |x: &ObjExpr| Box::new(self.obj(x));
        match e {
            ObjExpr::Int(n) => CObj::Int(n.to_i64().unwrap_or(if n.sign() == num::bigint::Sign::Minus {
                i64::MIN
            } else {
                i64::MAX
            })),
            ObjExpr::Var(n) => CObj::Obj(self.numeric_obj[n]),
            ObjExpr::MapGet(m, i) => CObj::Map(self.map_idx[m], self.party(i)),
            ObjExpr::Bin(op, x, y) => CObj::Bin(*op, b(x), b(y)),
            ObjExpr::Cmp(op, x, y) => CObj::Cmp(*op, b(x), b(y)),
            ObjExpr::PartyEq { lhs, rhs, negated } => CObj::PartyEq(self.party(lhs), self.party(rhs), *negated),
            ObjExpr::And(x, y) => CObj::And(b(x), b(y)),
            ObjExpr::Or(x, y) => CObj::Or(b(x), b(y)),
            ObjExpr::Not(x) => CObj::Not(b(x)),
            ObjExpr::Payoff => unreachable!("removed by parse_objective"),
        }
    }

    fn target(&self, t: &Target) -> CTarget {
        match t {
            Target::Var(n) => match self.id_idx.get(n) {
                Some(&i) => CTarget::Id(i),
                None => CTarget::Obj(self.numeric_obj[n]),
            },
            Target::MapEntry(m, i) => CTarget::Map(self.map_idx[m], self.party(i)),
        }
    }

    fn declared_range(&self, name: &str) -> (i64, i64, i64) {
        match &self.ast.var(name).expect("declared").kind {
            VarKind::Numeric { lo, hi, init } | VarKind::Map { lo, hi, init } => {
                (lo.to_i64().unwrap(), hi.to_i64().unwrap(), init.to_i64().unwrap())
            }
            VarKind::Id { .. } => unreachable!(),
        }
    }
}

impl Model {
    pub fn new(
        contract: &ValidatedContract,
        parties: PartySet,
        objective: &Objective,
        overrides: &Overrides,
    ) -> Result<Self, ModelError> {
        let ast = &contract.ast;
        let k = parties.k();
        for name in overrides.keys() {
            if !matches!(ast.var(name).map(|v| &v.kind), Some(VarKind::Numeric { .. } | VarKind::Map { .. })) {
                return Err(ModelError::UnknownOverride(name.clone()));
            }
        }
        let mut res = Resolver {
            ast,
            numeric_obj: BTreeMap::new(),
            map_idx: BTreeMap::new(),
            id_idx: BTreeMap::new(),
        };
        let ranged = |name: &str| -> Result<(i64, i64, i64), ModelError> {
            let (dlo, dhi, init) = res.declared_range(name);
            match overrides.get(name) {
                None => Ok((dlo, dhi, init)),
                Some(&(lo, hi)) if lo >= dlo && hi <= dhi && lo <= hi => Ok((lo, hi, init.clamp(lo, hi))),
                Some(&(lo, hi)) => Err(ModelError::WideningOverride { name: name.into(), lo, hi, dlo, dhi }),
            }
        };
        let mut objects = vec![ObjectInfo { name: "<contract balance>".into(), lo: 0, hi: 0, init: 0 }];
        let mut numeric_obj = BTreeMap::new();
        for v in ast.numerics() {
            let (lo, hi, init) = ranged(&v.name)?;
            numeric_obj.insert(v.name.clone(), objects.len() as u16);
            objects.push(ObjectInfo { name: v.name.clone(), lo, hi, init });
        }
        let mut maps = Vec::new();
        let mut map_idx = BTreeMap::new();
        for v in ast.maps() {
            let (lo, hi, init) = ranged(&v.name)?;
            map_idx.insert(v.name.clone(), maps.len() as u16);
            let base = objects.len() as u16;
            for q in &parties.names {
                objects.push(ObjectInfo { name: format!("{}[{q}]", v.name), lo, hi, init });
            }
            maps.push(MapInfo { name: v.name.clone(), lo, hi, init, base });
        }
        let mut id_names = Vec::new();
        let mut id_init = Vec::new();
        let mut id_idx = BTreeMap::new();
        for v in ast.ids() {
            id_idx.insert(v.name.clone(), id_names.len() as u16);
            id_names.push(v.name.clone());
            id_init.push(match &v.kind {
                VarKind::Id { init: IdInit::Party(p) } => parties.index(p).expect("literal is a party"),
                _ => NULL,
            });
        }
        res.numeric_obj = numeric_obj;
        res.map_idx = map_idx;
        res.id_idx = id_idx;

        let lc = assign_labels(ast);
        let table = successor_table(&lc);
        let nodes: Vec<Node> = (0..lc.label_count())
            .map(|l| {
                let info = &lc.labels[l];
                match (&info.kind, &table[l]) {
                    (LabelKind::Header, _) => Node::Header,
                    (LabelKind::Entry, _) => Node::Entry(info.function.unwrap()),
                    (LabelKind::Exit, _) => Node::Exit(info.function.unwrap()),
                    (LabelKind::If(_), Next::Branch { cond, then, els }) => {
                        Node::If { cond: res.bexpr(cond), then: *then, els: *els }
                    }
                    (LabelKind::Assign(t, Rhs::Expr(e)), Next::Goto(n)) => {
                        Node::Assign { target: res.target(t), value: res.expr(e), next: *n }
                    }
                    (LabelKind::Assign(t, Rhs::Party(p)), Next::Goto(n)) => match res.target(t) {
                        CTarget::Id(id) => Node::AssignId { id, value: res.party(p), next: *n },
                        _ => unreachable!("validated"),
                    },
                    (LabelKind::Payout(p, e), Next::Goto(n)) => {
                        Node::Payout { to: res.party(p), amount: res.expr(e), next: *n }
                    }
                    (LabelKind::Return, Next::Goto(n)) => Node::Return { exit: *n },
                    (kind, next) => unreachable!("label {l}: {kind:?} with {next:?}"),
                }
            })
            .collect();

        let mut funcs = Vec::new();
        for (fi, f) in ast.functions.iter().enumerate() {
            let fl = &lc.functions[fi];
            let mut params = Vec::new();
            for p in &f.params {
                let target = res.target(&p.target);
                let (lo, hi) = match target {
                    CTarget::Obj(o) => (objects[o as usize].lo, objects[o as usize].hi),
                    CTarget::Map(m, _) => (maps[m as usize].lo, maps[m as usize].hi),
                    CTarget::Id(_) => (0, k as i64 - 1),
                };
                let lo = if p.payable { lo.max(0) } else { lo };
                params.push(CParam {
                    target,
                    designator: res.party(&p.designator),
                    payable: p.payable,
                    default: p.default.as_ref().map(|d| d.to_i64().unwrap()),
                    lo,
                    hi,
                });
            }
            check_params(&f.name, &params)?;
            funcs.push(CFunc {
                name: f.name.clone(),
                tlo: f.tlo.to_u32().unwrap(),
                thi: f.thi.to_u32().unwrap(),
                multi: f.kind == FunctionKind::MultiParty,
                entry: fl.entry,
                exit: fl.exit,
                first: fl.entry + 1,
                params,
            });
        }

        // Balance bound: every call of every function pays its caps in full.
        let mut inflow: i64 = 0;
        for f in &funcs {
            let caps: i64 = f.params.iter().filter(|p| p.payable).map(|p| p.hi.max(0)).sum();
            let calls = if f.multi { 1 } else { k as i64 * (f.thi - f.tlo + 1) as i64 };
            inflow = inflow.saturating_add(caps.saturating_mul(calls));
        }
        objects[0].hi = inflow;

        let max_t = funcs.iter().map(|f| f.thi).max().unwrap_or(0);
        Ok(Self {
            lc,
            objective: res.obj(&objective.expr),
            monetary: objective.monetary,
            parties,
            objects,
            maps,
            id_names,
            id_init,
            nodes,
            funcs,
            max_t,
        })
    }

    pub fn k(&self) -> usize {
        self.parties.k()
    }

    pub fn me(&self) -> u8 {
        self.parties.analyzed
    }

    /// Object index of `m[q]`.
    pub fn map_obj(&self, m: u16, q: u8) -> u16 {
        self.maps[m as usize].base + q as u16
    }

    pub fn object_names(&self) -> Vec<String> {
        self.objects.iter().map(|o| o.name.clone()).collect()
    }
}

/// Rejects parameter lists whose payment accounting would be ambiguous.
fn check_params(fname: &str, params: &[CParam]) -> Result<(), ModelError> {
    let decided_ids: Vec<u16> = params
        .iter()
        .filter_map(|p| match p.target {
            CTarget::Id(i) => Some(i),
            _ => None,
        })
        .collect();
    for (i, p) in params.iter().enumerate() {
        if let CTarget::Map(m, idx) = p.target {
            if matches!(idx, CParty::Id(v) if decided_ids.contains(&v)) {
                return Err(ModelError::IndexDecided(fname.into()));
            }
            if p.payable
                && params[i + 1..]
                    .iter()
                    .any(|q| q.payable && matches!(q.target, CTarget::Map(m2, _) if m2 == m))
            {
                return Err(ModelError::AliasingPayments(fname.into()));
            }
        }
    }
    Ok(())
}
