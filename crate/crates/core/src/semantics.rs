//! Concrete bounded semantics: states, moves, transitions, utilities.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cfg::Label;
use crate::frontend::{BinOp, CmpOp};
use crate::model::{CBexpr, CExpr, CObj, CParty, CTarget, Model, Node, BALANCE, NULL};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("division by zero at label {0}")]
    DivisionByZero(Label),
    #[error("division by zero in the objective")]
    ObjectiveDivisionByZero,
    #[error("move {mv:?} is not permitted for party {party}")]
    NotPermitted { party: usize, mv: Move },
    #[error("expected {expected} party choices, got {found}")]
    Arity { expected: usize, found: usize },
}

/// `(t, b, l, val, c)`; `objs[0]` is the balance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractState {
    pub t: u32,
    pub l: Label,
    pub caller: Option<u8>,
    /// Party index per id variable, `NULL` when unbound.
    pub ids: Vec<u8>,
    pub objs: Vec<i64>,
}

impl ContractState {
    pub fn balance(&self) -> i64 {
        self.objs[BALANCE as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Call(usize),
    /// Payment into parameter `param` of the function being entered.
    Pay { param: usize, amount: i64 },
    /// Decision for parameter `param`; for id targets the value is a party index.
    Decide { param: usize, value: i64 },
    Noop,
}

/// One party's complete choice at a state: a single call or noop at global
/// states, one move per designated parameter at an entry.
pub type Action = Vec<Move>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Terminal,
    /// `l = 0` or an exit label: parties may request calls.
    Global,
    /// Forced start of a multi-party function at `l = 0`.
    Jump(usize),
    /// Entry label of a function: designated parties pay and decide.
    Entry(usize),
    /// Deterministic statement step.
    Stmt,
}

fn clamp(v: i128, lo: i64, hi: i64) -> i64 {
    v.clamp(lo as i128, hi as i128) as i64
}

fn bin(op: BinOp, a: i128, b: i128) -> Option<i128> {
    Some(match op {
        BinOp::Add => a.saturating_add(b),
        BinOp::Sub => a.saturating_sub(b),
        BinOp::Mul => a.saturating_mul(b),
        BinOp::Div => {
            if b == 0 {
                return None;
            }
            a / b
        }
    })
}

pub(crate) fn cmp(op: CmpOp, a: i128, b: i128) -> bool {
    match op {
        CmpOp::Lt => a < b,
        CmpOp::Gt => a > b,
        CmpOp::Le => a <= b,
        CmpOp::Ge => a >= b,
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
    }
}

impl Model {
    pub fn initial_state(&self) -> ContractState {
        ContractState {
            t: 0,
            l: 0,
            caller: None,
            ids: self.id_init.clone(),
            objs: self.objects.iter().map(|o| o.init).collect(),
        }
    }

    pub fn is_terminal(&self, s: &ContractState) -> bool {
        s.t > self.max_t
    }

    pub fn phase(&self, s: &ContractState) -> Phase {
        if self.is_terminal(s) {
            return Phase::Terminal;
        }
        match self.nodes[s.l as usize] {
            Node::Header => match self.funcs.iter().position(|f| f.multi && f.tlo == s.t) {
                Some(f) => Phase::Jump(f),
                None => Phase::Global,
            },
            Node::Exit(_) => Phase::Global,
            Node::Entry(f) => Phase::Entry(f),
            _ => Phase::Stmt,
        }
    }

    /// The `(t, f, caller)` of the call that just finished, at exit labels.
    pub fn last_call(&self, s: &ContractState) -> Option<(u32, usize, u8)> {
        match (&self.nodes[s.l as usize], s.caller) {
            (Node::Exit(f), Some(c)) => Some((s.t, *f, c)),
            _ => None,
        }
    }

    /// Resolves a party reference; `NULL` for Null or an absent caller.
    pub fn party_of(&self, s: &ContractState, r: CParty) -> u8 {
        match r {
            CParty::Caller => s.caller.unwrap_or(NULL),
            CParty::Null => NULL,
            CParty::Id(i) => s.ids[i as usize],
            CParty::Me => self.me(),
        }
    }

    /// One-party functions `q` may call now, honouring the lexicographic order.
    pub fn callable(&self, s: &ContractState, q: u8) -> Vec<usize> {
        if self.phase(s) != Phase::Global {
            return Vec::new();
        }
        let after = self.last_call(s).map(|(_, f, c)| (f, self.parties.rank(c)));
        let rank = self.parties.rank(q);
        (0..self.funcs.len())
            .filter(|&f| {
                let func = &self.funcs[f];
                !func.multi
                    && func.tlo <= s.t
                    && s.t <= func.thi
                    && after.is_none_or(|prev| (f, rank) > prev)
            })
            .collect()
    }

    /// Which party answers each parameter of `f` at its entry state.
    pub fn deciders(&self, s: &ContractState, f: usize) -> Vec<u8> {
        self.funcs[f]
            .params
            .iter()
            .map(|p| {
                let q = self.party_of(s, p.designator);
                // A payment into the entry of an unbound index has nowhere to go.
                match p.target {
                    CTarget::Map(_, idx) if p.payable && self.party_of(s, idx) == NULL => NULL,
                    _ => q,
                }
            })
            .collect()
    }

    /// Admissible values for each parameter `q` answers at entry `f`.
    pub fn entry_options(&self, s: &ContractState, f: usize, q: u8) -> Vec<(usize, i64, i64)> {
        self.deciders(s, f)
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d == q)
            .map(|(i, _)| {
                let p = &self.funcs[f].params[i];
                (i, p.lo, p.hi)
            })
            .collect()
    }

    pub fn party_actions(&self, s: &ContractState, q: u8) -> Vec<Action> {
        match self.phase(s) {
            Phase::Terminal => Vec::new(),
            Phase::Global => std::iter::once(vec![Move::Noop])
                .chain(self.callable(s, q).into_iter().map(|f| vec![Move::Call(f)]))
                .collect(),
            Phase::Jump(_) | Phase::Stmt => vec![vec![Move::Noop]],
            Phase::Entry(f) => {
                let opts = self.entry_options(s, f, q);
                if opts.is_empty() {
                    return vec![vec![Move::Noop]];
                }
                let mut out: Vec<Action> = vec![Vec::new()];
                for (param, lo, hi) in opts {
                    let payable = self.funcs[f].params[param].payable;
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            (lo..=hi).map(move |v| {
                                let mut a = prefix.clone();
                                a.push(if payable {
                                    Move::Pay { param, amount: v }
                                } else {
                                    Move::Decide { param, value: v }
                                });
                                a
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    /// Individual permitted moves of `q`, always including the noop.
    pub fn permitted_moves(&self, s: &ContractState, q: u8) -> Vec<Move> {
        let mut out = vec![Move::Noop];
        match self.phase(s) {
            Phase::Global => out.extend(self.callable(s, q).into_iter().map(Move::Call)),
            Phase::Entry(f) => {
                for (param, lo, hi) in self.entry_options(s, f, q) {
                    let payable = self.funcs[f].params[param].payable;
                    out.extend((lo..=hi).map(|v| {
                        if payable {
                            Move::Pay { param, amount: v }
                        } else {
                            Move::Decide { param, value: v }
                        }
                    }));
                }
            }
            _ => {}
        }
        out
    }

    /// One transition under the joint choice of all `k` parties.
    pub fn step(&self, s: &ContractState, joint: &[Action]) -> Result<ContractState, SemanticsError> {
        if joint.len() != self.k() {
            return Err(SemanticsError::Arity { expected: self.k(), found: joint.len() });
        }
        match self.phase(s) {
            Phase::Terminal => Ok(s.clone()),
            Phase::Global => {
                let mut requests = Vec::new();
                for (q, a) in joint.iter().enumerate() {
                    match a.as_slice() {
                        [Move::Noop] | [] => {}
                        [Move::Call(f)] if self.callable(s, q as u8).contains(f) => requests.push((*f, q as u8)),
                        other => {
                            return Err(SemanticsError::NotPermitted {
                                party: q,
                                mv: other.first().cloned().unwrap_or(Move::Noop),
                            })
                        }
                    }
                }
                Ok(self.resolve_calls(s, &requests))
            }
            Phase::Jump(f) => Ok(self.jump(s, f)),
            Phase::Entry(f) => {
                let deciders = self.deciders(s, f);
                let mut values: Vec<Option<i64>> = vec![None; deciders.len()];
                for (q, a) in joint.iter().enumerate() {
                    for mv in a {
                        let (param, v) = match *mv {
                            Move::Noop => continue,
                            Move::Pay { param, amount } => (param, amount),
                            Move::Decide { param, value } => (param, value),
                            Move::Call(_) => return Err(SemanticsError::NotPermitted { party: q, mv: mv.clone() }),
                        };
                        let ok = deciders.get(param) == Some(&(q as u8)) && {
                            let p = &self.funcs[f].params[param];
                            p.payable == matches!(mv, Move::Pay { .. }) && p.lo <= v && v <= p.hi
                        };
                        if !ok {
                            return Err(SemanticsError::NotPermitted { party: q, mv: mv.clone() });
                        }
                        values[param] = Some(v);
                    }
                }
                Ok(self.apply_entry(s, f, &values))
            }
            Phase::Stmt => self.exec(s),
        }
    }

    /// Picks the lexicographically smallest `(f, rank)` request, or ticks.
    pub fn resolve_calls(&self, s: &ContractState, requests: &[(usize, u8)]) -> ContractState {
        let chosen = requests.iter().min_by_key(|&&(f, q)| (f, self.parties.rank(q)));
        let mut n = s.clone();
        match chosen {
            Some(&(f, q)) => {
                n.l = self.funcs[f].entry;
                n.caller = Some(q);
            }
            None => {
                n.t += 1;
                n.l = 0;
                n.caller = None;
            }
        }
        n
    }

    pub fn jump(&self, s: &ContractState, f: usize) -> ContractState {
        let mut n = s.clone();
        n.t = self.funcs[f].thi;
        n.l = self.funcs[f].entry;
        n.caller = None;
        n
    }

    /// Applies the entry of `f`; `None` means the parameter was not answered.
    pub fn apply_entry(&self, s: &ContractState, f: usize, values: &[Option<i64>]) -> ContractState {
        let func = &self.funcs[f];
        let deciders = self.deciders(s, f);
        let mut n = s.clone();
        for (i, p) in func.params.iter().enumerate() {
            let v = match (values[i], deciders[i]) {
                (Some(v), d) if d != NULL => Some(v),
                _ if p.payable => Some(0),
                _ => p.default,
            };
            let Some(v) = v else { continue };
            if p.payable {
                n.objs[BALANCE as usize] += v;
            }
            match p.target {
                CTarget::Obj(o) => n.objs[o as usize] = v,
                CTarget::Map(m, idx) => {
                    let q = self.party_of(s, idx);
                    if q != NULL {
                        n.objs[self.map_obj(m, q) as usize] = v;
                    }
                }
                CTarget::Id(i) => n.ids[i as usize] = v as u8,
            }
        }
        n.l = func.first;
        n
    }

    fn exec(&self, s: &ContractState) -> Result<ContractState, SemanticsError> {
        let mut n = s.clone();
        match &self.nodes[s.l as usize] {
            Node::If { cond, then, els } => {
                n.l = if self.eval_bexpr(s, cond)? { *then } else { *els };
            }
            Node::Assign { target, value, next } => {
                let v = self.eval_expr(s, value)?;
                match *target {
                    CTarget::Obj(o) => {
                        let info = &self.objects[o as usize];
                        n.objs[o as usize] = clamp(v, info.lo, info.hi);
                    }
                    CTarget::Map(m, idx) => {
                        let q = self.party_of(s, idx);
                        if q != NULL {
                            let info = &self.maps[m as usize];
                            n.objs[self.map_obj(m, q) as usize] = clamp(v, info.lo, info.hi);
                        }
                    }
                    CTarget::Id(_) => unreachable!("numeric assignment to an id"),
                }
                n.l = *next;
            }
            Node::AssignId { id, value, next } => {
                n.ids[*id as usize] = self.party_of(s, *value);
                n.l = *next;
            }
            Node::Payout { amount, next, .. } => {
                let w = self.payout_amount(s, amount)?;
                n.objs[BALANCE as usize] -= w;
                n.l = *next;
            }
            Node::Return { exit } => n.l = *exit,
            Node::Header | Node::Entry(_) | Node::Exit(_) => unreachable!("not a statement"),
        }
        Ok(n)
    }

    /// `min(b, max(0, val(x)))`, regardless of whether the payee exists.
    pub fn payout_amount(&self, s: &ContractState, amount: &CExpr) -> Result<i64, SemanticsError> {
        let x = self.eval_expr(s, amount)?;
        Ok(x.clamp(0, s.balance() as i128) as i64)
    }

    pub fn read_map(&self, s: &ContractState, m: u16, idx: CParty) -> i64 {
        match self.party_of(s, idx) {
            NULL => self.maps[m as usize].init,
            q => s.objs[self.map_obj(m, q) as usize],
        }
    }

    pub fn eval_expr(&self, s: &ContractState, e: &CExpr) -> Result<i128, SemanticsError> {
        Ok(match e {
            CExpr::Int(n) => *n as i128,
            CExpr::Obj(o) => s.objs[*o as usize] as i128,
            CExpr::Map(m, idx) => self.read_map(s, *m, *idx) as i128,
            CExpr::Bin(op, a, b) => {
                bin(*op, self.eval_expr(s, a)?, self.eval_expr(s, b)?).ok_or(SemanticsError::DivisionByZero(s.l))?
            }
        })
    }

    pub fn eval_bexpr(&self, s: &ContractState, b: &CBexpr) -> Result<bool, SemanticsError> {
        Ok(match b {
            CBexpr::Cmp(op, l, r) => cmp(*op, self.eval_expr(s, l)?, self.eval_expr(s, r)?),
            CBexpr::PartyEq(l, r, neg) => (self.party_of(s, *l) == self.party_of(s, *r)) != *neg,
            CBexpr::And(a, c) => self.eval_bexpr(s, a)? && self.eval_bexpr(s, c)?,
            CBexpr::Or(a, c) => self.eval_bexpr(s, a)? || self.eval_bexpr(s, c)?,
            CBexpr::Not(a) => !self.eval_bexpr(s, a)?,
        })
    }

    /// The objective expression under the valuation of `s`.
    pub fn eval_objective(&self, s: &ContractState) -> Result<i128, SemanticsError> {
        self.eval_obj(s, &self.objective)
    }

    fn eval_obj(&self, s: &ContractState, e: &CObj) -> Result<i128, SemanticsError> {
        let b = |x: bool| x as i128;
        Ok(match e {
            CObj::Int(n) => *n as i128,
            CObj::Obj(o) => s.objs[*o as usize] as i128,
            CObj::Map(m, idx) => self.read_map(s, *m, *idx) as i128,
            CObj::Bin(op, x, y) => {
                bin(*op, self.eval_obj(s, x)?, self.eval_obj(s, y)?).ok_or(SemanticsError::ObjectiveDivisionByZero)?
            }
            CObj::Cmp(op, x, y) => b(cmp(*op, self.eval_obj(s, x)?, self.eval_obj(s, y)?)),
            CObj::PartyEq(l, r, neg) => b((self.party_of(s, *l) == self.party_of(s, *r)) != *neg),
            CObj::And(x, y) => b(self.eval_obj(s, x)? != 0 && self.eval_obj(s, y)? != 0),
            CObj::Or(x, y) => b(self.eval_obj(s, x)? != 0 || self.eval_obj(s, y)? != 0),
            CObj::Not(x) => b(self.eval_obj(s, x)? == 0),
        })
    }

    /// Payments made by the analysed party in the entry step that led to `s`.
    ///
    /// Only nonzero at the first body label of a function.
    pub fn paid_by_me(&self, s: &ContractState) -> i64 {
        let Some(f) = self.funcs.iter().position(|f| f.first == s.l) else { return 0 };
        let me = self.me();
        let mut total = 0;
        for p in self.funcs[f].params.iter().filter(|p| p.payable) {
            if self.party_of(s, p.designator) != me {
                continue;
            }
            match p.target {
                CTarget::Obj(o) => total += s.objs[o as usize],
                CTarget::Map(m, idx) => {
                    let q = self.party_of(s, idx);
                    if q != NULL {
                        total += s.objs[self.map_obj(m, q) as usize];
                    }
                }
                CTarget::Id(_) => {}
            }
        }
        total
    }

    /// Amount the analysed party receives when the payout at `s` executes.
    pub fn received_by_me(&self, s: &ContractState) -> Result<i64, SemanticsError> {
        match &self.nodes[s.l as usize] {
            Node::Payout { to, amount, .. } if !self.is_terminal(s) && self.party_of(s, *to) == self.me() => {
                self.payout_amount(s, amount)
            }
            _ => Ok(0),
        }
    }

    /// State utility: objective at terminal states, plus money flows of the
    /// analysed party when the objective is monetary.
    pub fn utility(&self, s: &ContractState) -> Result<i128, SemanticsError> {
        if self.is_terminal(s) {
            return self.eval_objective(s);
        }
        if !self.monetary {
            return Ok(0);
        }
        Ok(self.received_by_me(s)? as i128 - self.paid_by_me(s) as i128)
    }
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    t: u32,
    b: i64,
    l: Label,
    caller: Option<&'a str>,
    changed: BTreeMap<String, serde_json::Value>,
}

/// One JSON object per state; `changed` lists bindings that differ from the
/// previous state (all bindings for the first).
pub fn trace_jsonl(model: &Model, run: &[ContractState]) -> String {
    let party = |q: u8| -> serde_json::Value {
        if q == NULL {
            serde_json::Value::Null
        } else {
            model.parties.names[q as usize].clone().into()
        }
    };
    let mut out = String::new();
    for (i, s) in run.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| &run[j]);
        let mut changed = BTreeMap::new();
        for (o, v) in s.objs.iter().enumerate().skip(1) {
            if prev.is_none_or(|p| p.objs[o] != *v) {
                changed.insert(model.objects[o].name.clone(), (*v).into());
            }
        }
        for (i, v) in s.ids.iter().enumerate() {
            if prev.is_none_or(|p| p.ids[i] != *v) {
                changed.insert(model.id_names[i].clone(), party(*v));
            }
        }
        let rec = TraceRecord {
            t: s.t,
            b: s.balance(),
            l: s.l,
            caller: s.caller.map(|c| model.parties.names[c as usize].as_str()),
            changed,
        };
        out.push_str(&serde_json::to_string(&rec).expect("serializable"));
        out.push('\n');
    }
    out
}
