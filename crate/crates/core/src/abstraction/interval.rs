//! Contract expressions resolved against a fixed key, with point and interval
//! evaluation.

use crate::frontend::{BinOp, CmpOp};
use crate::model::{CBexpr, CExpr, CObj, CParty, Model, NULL};
use crate::semantics::{cmp, ContractState};

/// Expression over object indices only; party references are already decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum R {
    Int(i128),
    Obj(u16),
    Bin(BinOp, Box<R>, Box<R>),
    Cmp(CmpOp, Box<R>, Box<R>),
    And(Box<R>, Box<R>),
    Or(Box<R>, Box<R>),
    Not(Box<R>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivByZero;

pub type Iv = (i128, i128);

fn b(x: R) -> Box<R> {
    Box::new(x)
}

pub struct Resolver<'a> {
    pub model: &'a Model,
    /// Key-only state: objects are never read.
    pub key: &'a ContractState,
}

impl Resolver<'_> {
    fn map(&self, m: u16, idx: CParty) -> R {
        match self.model.party_of(self.key, idx) {
            NULL => R::Int(self.model.maps[m as usize].init as i128),
            q => R::Obj(self.model.map_obj(m, q)),
        }
    }

    fn party_eq(&self, l: CParty, r: CParty, neg: bool) -> R {
        let eq = self.model.party_of(self.key, l) == self.model.party_of(self.key, r);
        R::Int((eq != neg) as i128)
    }

    pub fn expr(&self, e: &CExpr) -> R {
        match e {
            CExpr::Int(n) => R::Int(*n as i128),
            CExpr::Obj(o) => R::Obj(*o),
            CExpr::Map(m, i) => self.map(*m, *i),
            CExpr::Bin(op, x, y) => R::Bin(*op, b(self.expr(x)), b(self.expr(y))),
        }
    }

    pub fn bexpr(&self, c: &CBexpr) -> R {
        match c {
            CBexpr::Cmp(op, x, y) => R::Cmp(*op, b(self.expr(x)), b(self.expr(y))),
            CBexpr::PartyEq(l, r, neg) => self.party_eq(*l, *r, *neg),
            CBexpr::And(x, y) => R::And(b(self.bexpr(x)), b(self.bexpr(y))),
            CBexpr::Or(x, y) => R::Or(b(self.bexpr(x)), b(self.bexpr(y))),
            CBexpr::Not(x) => R::Not(b(self.bexpr(x))),
        }
    }

    pub fn objective(&self, e: &CObj) -> R {
        match e {
            CObj::Int(n) => R::Int(*n as i128),
            CObj::Obj(o) => R::Obj(*o),
            CObj::Map(m, i) => self.map(*m, *i),
            CObj::Bin(op, x, y) => R::Bin(*op, b(self.objective(x)), b(self.objective(y))),
            CObj::Cmp(op, x, y) => R::Cmp(*op, b(self.objective(x)), b(self.objective(y))),
            CObj::PartyEq(l, r, neg) => self.party_eq(*l, *r, *neg),
            CObj::And(x, y) => R::And(b(self.objective(x)), b(self.objective(y))),
            CObj::Or(x, y) => R::Or(b(self.objective(x)), b(self.objective(y))),
            CObj::Not(x) => R::Not(b(self.objective(x))),
        }
    }
}

fn arith(op: BinOp, x: i128, y: i128) -> Result<i128, DivByZero> {
    Ok(match op {
        BinOp::Add => x.saturating_add(y),
        BinOp::Sub => x.saturating_sub(y),
        BinOp::Mul => x.saturating_mul(y),
        BinOp::Div => {
            if y == 0 {
                return Err(DivByZero);
            }
            x / y
        }
    })
}

const UNKNOWN: Iv = (0, 1);
const TRUE: Iv = (1, 1);
const FALSE: Iv = (0, 0);

fn truth(x: Iv) -> Option<bool> {
    if x.0 > 0 || x.1 < 0 {
        Some(true)
    } else if x == (0, 0) {
        Some(false)
    } else {
        None
    }
}

fn from_truth(t: Option<bool>) -> Iv {
    match t {
        Some(true) => TRUE,
        Some(false) => FALSE,
        None => UNKNOWN,
    }
}

impl R {
    pub fn objects(&self, out: &mut Vec<u16>) {
        match self {
            R::Int(_) => {}
            R::Obj(o) => {
                if !out.contains(o) {
                    out.push(*o)
                }
            }
            R::Bin(_, x, y) | R::Cmp(_, x, y) | R::And(x, y) | R::Or(x, y) => {
                x.objects(out);
                y.objects(out);
            }
            R::Not(x) => x.objects(out),
        }
    }

    pub fn eval(&self, get: &impl Fn(u16) -> i64) -> Result<i128, DivByZero> {
        Ok(match self {
            R::Int(n) => *n,
            R::Obj(o) => get(*o) as i128,
            R::Bin(op, x, y) => arith(*op, x.eval(get)?, y.eval(get)?)?,
            R::Cmp(op, x, y) => cmp(*op, x.eval(get)?, y.eval(get)?) as i128,
            R::And(x, y) => (x.eval(get)? != 0 && y.eval(get)? != 0) as i128,
            R::Or(x, y) => (x.eval(get)? != 0 || y.eval(get)? != 0) as i128,
            R::Not(x) => (x.eval(get)? == 0) as i128,
        })
    }

    /// Sound enclosure of the value over a box.
    pub fn interval(&self, iv: &impl Fn(u16) -> (i64, i64)) -> Result<Iv, DivByZero> {
        Ok(match self {
            R::Int(n) => (*n, *n),
            R::Obj(o) => {
                let (lo, hi) = iv(*o);
                (lo as i128, hi as i128)
            }
            R::Bin(op, x, y) => {
                let (a, c) = (x.interval(iv)?, y.interval(iv)?);
                match op {
                    BinOp::Add => (a.0.saturating_add(c.0), a.1.saturating_add(c.1)),
                    BinOp::Sub => (a.0.saturating_sub(c.1), a.1.saturating_sub(c.0)),
                    BinOp::Mul | BinOp::Div => {
                        if *op == BinOp::Div && c.0 <= 0 && c.1 >= 0 {
                            return Err(DivByZero);
                        }
                        let corners = [
                            arith(*op, a.0, c.0)?,
                            arith(*op, a.0, c.1)?,
                            arith(*op, a.1, c.0)?,
                            arith(*op, a.1, c.1)?,
                        ];
                        (*corners.iter().min().unwrap(), *corners.iter().max().unwrap())
                    }
                }
            }
            R::Cmp(op, x, y) => {
                let (a, c) = (x.interval(iv)?, y.interval(iv)?);
                let t = match op {
                    CmpOp::Lt => decide(a.1 < c.0, a.0 >= c.1),
                    CmpOp::Le => decide(a.1 <= c.0, a.0 > c.1),
                    CmpOp::Gt => decide(a.0 > c.1, a.1 <= c.0),
                    CmpOp::Ge => decide(a.0 >= c.1, a.1 < c.0),
                    CmpOp::Eq => decide(a.0 == a.1 && c.0 == c.1 && a.0 == c.0, a.1 < c.0 || c.1 < a.0),
                    CmpOp::Ne => decide(a.1 < c.0 || c.1 < a.0, a.0 == a.1 && c.0 == c.1 && a.0 == c.0),
                };
                from_truth(t)
            }
            R::And(x, y) => {
                let (a, c) = (truth(x.interval(iv)?), truth(y.interval(iv)?));
                from_truth(match (a, c) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                })
            }
            R::Or(x, y) => {
                let (a, c) = (truth(x.interval(iv)?), truth(y.interval(iv)?));
                from_truth(match (a, c) {
                    (Some(true), _) | (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                })
            }
            R::Not(x) => from_truth(truth(x.interval(iv)?).map(|t| !t)),
        })
    }

    /// Truth over a whole box, `None` when members disagree (or might).
    pub fn truth(&self, iv: &impl Fn(u16) -> (i64, i64)) -> Result<Option<bool>, DivByZero> {
        Ok(truth(self.interval(iv)?))
    }

    /// Shrinks `ivs` towards the members where the condition has value `want`.
    /// Returns false when no member can have that value.
    pub fn narrow(&self, want: bool, ivs: &mut [(i64, i64)]) -> Result<bool, DivByZero> {
        match self {
            R::Not(x) => return x.narrow(!want, ivs),
            R::And(x, y) | R::Or(x, y) => {
                let conj = matches!(self, R::And(..)) == want;
                if conj {
                    return Ok(x.narrow(want, ivs)? && y.narrow(want, ivs)?);
                }
                let mut left = ivs.to_vec();
                let mut right = ivs.to_vec();
                let l_ok = x.narrow(want, &mut left)?;
                let r_ok = y.narrow(want, &mut right)?;
                match (l_ok, r_ok) {
                    (false, false) => return Ok(false),
                    (true, false) => ivs.copy_from_slice(&left),
                    (false, true) => ivs.copy_from_slice(&right),
                    (true, true) => {
                        for (i, v) in ivs.iter_mut().enumerate() {
                            *v = (left[i].0.min(right[i].0), left[i].1.max(right[i].1));
                        }
                    }
                }
                return Ok(true);
            }
            R::Cmp(op, x, y) => {
                let op = if want { *op } else { op.negate() };
                let bound = match (&**x, &**y) {
                    (R::Obj(o), R::Int(n)) => Some((*o, op, *n)),
                    (R::Int(n), R::Obj(o)) => Some((*o, flip(op), *n)),
                    _ => None,
                };
                if let Some((o, op, n)) = bound {
                    let (lo, hi) = ivs[o as usize];
                    let (mut lo, mut hi) = (lo as i128, hi as i128);
                    match op {
                        CmpOp::Lt => hi = hi.min(n - 1),
                        CmpOp::Le => hi = hi.min(n),
                        CmpOp::Gt => lo = lo.max(n + 1),
                        CmpOp::Ge => lo = lo.max(n),
                        CmpOp::Eq => {
                            lo = lo.max(n);
                            hi = hi.min(n);
                        }
                        CmpOp::Ne => {
                            if lo == n {
                                lo += 1;
                            }
                            if hi == n {
                                hi -= 1;
                            }
                        }
                    }
                    if lo > hi {
                        return Ok(false);
                    }
                    ivs[o as usize] = (lo as i64, hi as i64);
                    return Ok(true);
                }
            }
            _ => {}
        }
        let t = self.truth(&|o: u16| ivs[o as usize])?;
        Ok(t != Some(!want))
    }
}

fn decide(yes: bool, no: bool) -> Option<bool> {
    if yes {
        Some(true)
    } else if no {
        Some(false)
    } else {
        None
    }
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}
