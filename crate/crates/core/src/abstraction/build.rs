//! Construction and solution of the lower and upper abstract games over an
//! interval partition, explored forward from the initial state.

use std::collections::{HashMap, HashSet};

use num::{BigRational, Zero};
use qsc_game::{matrix_value_with, MatrixGame, SolverOptions};

use super::grid::Partition;
use super::interval::Resolver;
use super::AbsError;
use crate::cfg::Label;
use crate::exact::{joint, player_actions};
use crate::model::{CTarget, Model, Node, BALANCE, NULL};
use crate::semantics::{ContractState, Phase};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AKey {
    pub t: u32,
    pub l: Label,
    pub caller: Option<u8>,
    pub ids: Box<[u8]>,
}

/// Abstract state: a key and one cell index per object in the key's label grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AState {
    pub key: AKey,
    pub cells: Box<[u32]>,
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Largest member count enumerated exactly when computing successors.
    pub enum_limit: u64,
    pub max_states: usize,
    pub solver: SolverOptions,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            enum_limit: 4096,
            max_states: 5_000_000,
            solver: SolverOptions { exact_limit: (usize::MAX, usize::MAX) },
        }
    }
}

/// Both abstract games share states and transition points; they differ in
/// utilities (`u_lo` vs `u_hi`) and in who resolves the successor set.
pub struct AbstractGame {
    pub states: Vec<AState>,
    pub u_lo: Vec<i128>,
    pub u_hi: Vec<i128>,
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
    /// Transition points of state `s` are `d_start[s] .. d_start[s + 1]`, row-major.
    pub d_start: Vec<usize>,
    /// Successor set `X_d` is `succ[x_start[d] .. x_start[d + 1]]`.
    pub x_start: Vec<usize>,
    pub succ: Vec<u32>,
}

impl AbstractGame {
    pub fn successors(&self, d: usize) -> &[u32] {
        &self.succ[self.x_start[d]..self.x_start[d + 1]]
    }

    pub fn label(&self, s: usize) -> Label {
        self.states[s].key.l
    }
}

/// Per-object inclusive cell ranges in a target grid.
type Product = (AKey, Vec<(u32, u32)>);

struct Builder<'a> {
    model: &'a Model,
    part: &'a Partition,
    opts: BuildOptions,
    index: HashMap<AState, u32>,
    game: AbstractGame,
}

fn key_state(key: &AKey, objs: Vec<i64>) -> ContractState {
    ContractState { t: key.t, l: key.l, caller: key.caller, ids: key.ids.to_vec(), objs }
}

fn key_of(s: &ContractState) -> AKey {
    AKey { t: s.t, l: s.l, caller: s.caller, ids: s.ids.clone().into_boxed_slice() }
}

pub fn build(model: &Model, part: &Partition, opts: BuildOptions) -> Result<AbstractGame, AbsError> {
    let mut b = Builder {
        model,
        part,
        opts,
        index: HashMap::new(),
        game: AbstractGame {
            states: Vec::new(),
            u_lo: Vec::new(),
            u_hi: Vec::new(),
            rows: Vec::new(),
            cols: Vec::new(),
            d_start: vec![0],
            x_start: vec![0],
            succ: Vec::new(),
        },
    };
    let init = model.initial_state();
    let key = key_of(&init);
    let grid = &part.grids[0];
    let cells = init.objs.iter().enumerate().map(|(o, &v)| grid.cell_of(o, v)).collect();
    b.intern(AState { key, cells })?;
    let mut next = 0;
    while next < b.game.states.len() {
        b.expand(next)?;
        next += 1;
    }
    Ok(b.game)
}

impl Builder<'_> {
    fn intern(&mut self, st: AState) -> Result<u32, AbsError> {
        if let Some(&id) = self.index.get(&st) {
            return Ok(id);
        }
        let id = self.game.states.len();
        if id >= self.opts.max_states {
            return Err(AbsError::TooManyStates(self.opts.max_states));
        }
        self.index.insert(st.clone(), id as u32);
        self.game.states.push(st);
        Ok(id as u32)
    }

    fn expand(&mut self, id: usize) -> Result<(), AbsError> {
        let model = self.model;
        let st = self.game.states[id].clone();
        let grid = &self.part.grids[st.key.l as usize];
        let ivs: Vec<(i64, i64)> = st.cells.iter().enumerate().map(|(o, &c)| grid.bounds(o, c)).collect();
        let ks = key_state(&st.key, Vec::new());
        let phase = model.phase(&ks);
        let (ulo, uhi) = self.utility(&ks, phase, &ivs)?;
        self.game.u_lo.push(ulo);
        self.game.u_hi.push(uhi);
        let (a1, a2) = if phase == Phase::Terminal { (Vec::new(), Vec::new()) } else { player_actions(model, &ks) };
        self.game.rows.push(a1.len() as u32);
        self.game.cols.push(a2.len() as u32);
        let mut set: Vec<u32> = Vec::new();
        for x in &a1 {
            for y in &a2 {
                let products = self.successors(&st.key, phase, &ivs, &joint(model, x, y))?;
                set.clear();
                for (key, ranges) in products {
                    self.intern_product(key, &ranges, &mut set)?;
                }
                set.sort_unstable();
                set.dedup();
                self.game.succ.extend_from_slice(&set);
                self.game.x_start.push(self.game.succ.len());
            }
        }
        self.game.d_start.push(self.game.x_start.len() - 1);
        Ok(())
    }

    fn intern_product(&mut self, key: AKey, ranges: &[(u32, u32)], out: &mut Vec<u32>) -> Result<(), AbsError> {
        let mut cur: Vec<u32> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(self.intern(AState { key: key.clone(), cells: cur.clone().into_boxed_slice() })?);
            let mut o = 0;
            loop {
                if o == cur.len() {
                    return Ok(());
                }
                if cur[o] < ranges[o].1 {
                    cur[o] += 1;
                    break;
                }
                cur[o] = ranges[o].0;
                o += 1;
            }
        }
    }

    fn utility(&self, ks: &ContractState, phase: Phase, ivs: &[(i64, i64)]) -> Result<(i128, i128), AbsError> {
        let model = self.model;
        let res = Resolver { model, key: ks };
        let iv = |o: u16| ivs[o as usize];
        let div = |_| AbsError::DivisionByZero(ks.l);
        if phase == Phase::Terminal {
            return res.objective(&model.objective).interval(&iv).map_err(div);
        }
        if !model.monetary {
            return Ok((0, 0));
        }
        let (mut lo, mut hi) = (0i128, 0i128);
        if let Node::Payout { to, amount, .. } = &model.nodes[ks.l as usize] {
            if model.party_of(ks, *to) == model.me() {
                let (xlo, xhi) = res.expr(amount).interval(&iv).map_err(div)?;
                let (blo, bhi) = ivs[BALANCE as usize];
                lo += (blo as i128).min(xlo.max(0));
                hi += (bhi as i128).min(xhi.max(0));
            }
        }
        if let Some(f) = model.funcs.iter().position(|f| f.first == ks.l) {
            for p in model.funcs[f].params.iter().filter(|p| p.payable) {
                if model.party_of(ks, p.designator) != model.me() {
                    continue;
                }
                let o = match p.target {
                    CTarget::Obj(o) => o,
                    CTarget::Map(m, idx) => match model.party_of(ks, idx) {
                        NULL => continue,
                        q => model.map_obj(m, q),
                    },
                    CTarget::Id(_) => continue,
                };
                lo -= ivs[o as usize].1 as i128;
                hi -= ivs[o as usize].0 as i128;
            }
        }
        Ok((lo, hi))
    }

    fn whole(&self, key: AKey, ivs: &[(i64, i64)]) -> Product {
        let g = &self.part.grids[key.l as usize];
        let ranges = ivs.iter().enumerate().map(|(o, &(lo, hi))| g.overlapping(o, lo, hi)).collect();
        (key, ranges)
    }

    fn successors(
        &self,
        key: &AKey,
        phase: Phase,
        ivs: &[(i64, i64)],
        choice: &[crate::semantics::Action],
    ) -> Result<Vec<Product>, AbsError> {
        let model = self.model;
        let node = &model.nodes[key.l as usize];
        let special = phase == Phase::Stmt && matches!(node, Node::Assign { .. } | Node::If { .. } | Node::Payout { .. });
        if !special {
            // Objects change by constants or shifts only: map the corners.
            let lo = model.step(&key_state(key, ivs.iter().map(|v| v.0).collect()), choice)?;
            let hi = model.step(&key_state(key, ivs.iter().map(|v| v.1).collect()), choice)?;
            let out: Vec<(i64, i64)> = lo.objs.iter().zip(&hi.objs).map(|(&a, &b)| (a, b)).collect();
            return Ok(vec![self.whole(key_of(&lo), &out)]);
        }
        let ks = key_state(key, Vec::new());
        let res = Resolver { model, key: &ks };
        let div = |_| AbsError::DivisionByZero(key.l);
        let with_label = |l: Label| AKey { l, ..key.clone() };
        match node {
            Node::Assign { target, value, next } => {
                let x = match *target {
                    CTarget::Obj(o) => Some(o),
                    CTarget::Map(m, idx) => match model.party_of(&ks, idx) {
                        NULL => None,
                        q => Some(model.map_obj(m, q)),
                    },
                    CTarget::Id(_) => unreachable!(),
                };
                let nk = with_label(*next);
                let Some(x) = x else { return Ok(vec![self.whole(nk, ivs)]) };
                let e = res.expr(value);
                let (lo, hi) = (model.objects[x as usize].lo, model.objects[x as usize].hi);
                let clamp = |v: i128| v.clamp(lo as i128, hi as i128) as i64;
                let mut reads = Vec::new();
                e.objects(&mut reads);
                if self.members(&reads, ivs) <= self.opts.enum_limit {
                    let mut involved = reads.clone();
                    if !involved.contains(&x) {
                        involved.push(x);
                    }
                    let g = &self.part.grids[nk.l as usize];
                    let mut tuples = HashSet::new();
                    self.enumerate(&reads, ivs, &mut |vals| {
                        let v = clamp(e.eval(&|o| vals[o as usize]).map_err(div)?);
                        let t: Vec<u32> = involved
                            .iter()
                            .map(|&o| g.cell_of(o as usize, if o == x { v } else { vals[o as usize] }))
                            .collect();
                        tuples.insert(t);
                        Ok(())
                    })?;
                    Ok(self.products(nk, ivs, &involved, tuples))
                } else {
                    let (a, b) = e.interval(&|o| ivs[o as usize]).map_err(div)?;
                    let mut out = ivs.to_vec();
                    out[x as usize] = (clamp(a), clamp(b));
                    Ok(vec![self.whole(nk, &out)])
                }
            }
            Node::If { cond, then, els } => {
                let c = res.bexpr(cond);
                let mut reads = Vec::new();
                c.objects(&mut reads);
                let mut out = Vec::new();
                if self.members(&reads, ivs) <= self.opts.enum_limit {
                    let gt = &self.part.grids[*then as usize];
                    let ge = &self.part.grids[*els as usize];
                    let mut yes = HashSet::new();
                    let mut no = HashSet::new();
                    self.enumerate(&reads, ivs, &mut |vals| {
                        let taken = c.eval(&|o| vals[o as usize]).map_err(div)? != 0;
                        let (g, set) = if taken { (gt, &mut yes) } else { (ge, &mut no) };
                        set.insert(reads.iter().map(|&o| g.cell_of(o as usize, vals[o as usize])).collect::<Vec<_>>());
                        Ok(())
                    })?;
                    out.extend(self.products(with_label(*then), ivs, &reads, yes));
                    out.extend(self.products(with_label(*els), ivs, &reads, no));
                } else {
                    for (want, l) in [(true, *then), (false, *els)] {
                        let mut narrowed = ivs.to_vec();
                        if c.narrow(want, &mut narrowed).map_err(div)? {
                            out.push(self.whole(with_label(l), &narrowed));
                        }
                    }
                }
                Ok(out)
            }
            Node::Payout { amount, next, .. } => {
                let e = res.expr(amount);
                let nk = with_label(*next);
                let mut reads = Vec::new();
                e.objects(&mut reads);
                reads.retain(|&o| o != BALANCE);
                let mut involved = reads.clone();
                involved.push(BALANCE);
                if self.members(&involved, ivs) <= self.opts.enum_limit {
                    let g = &self.part.grids[nk.l as usize];
                    let mut tuples = HashSet::new();
                    self.enumerate(&involved, ivs, &mut |vals| {
                        let b = vals[BALANCE as usize];
                        let w = e.eval(&|o| vals[o as usize]).map_err(div)?.clamp(0, b as i128) as i64;
                        let t: Vec<u32> = involved
                            .iter()
                            .map(|&o| g.cell_of(o as usize, if o == BALANCE { b - w } else { vals[o as usize] }))
                            .collect();
                        tuples.insert(t);
                        Ok(())
                    })?;
                    Ok(self.products(nk, ivs, &involved, tuples))
                } else {
                    let (xlo, xhi) = e.interval(&|o| ivs[o as usize]).map_err(div)?;
                    let (blo, bhi) = ivs[BALANCE as usize];
                    let mut out = ivs.to_vec();
                    out[BALANCE as usize] = (
                        (blo as i128 - xhi.max(0)).max(0) as i64,
                        (bhi as i128 - xlo.max(0)).max(0) as i64,
                    );
                    Ok(vec![self.whole(nk, &out)])
                }
            }
            _ => unreachable!(),
        }
    }

    fn members(&self, objs: &[u16], ivs: &[(i64, i64)]) -> u64 {
        objs.iter()
            .map(|&o| (ivs[o as usize].1 - ivs[o as usize].0) as u64 + 1)
            .try_fold(1u64, |acc, w| acc.checked_mul(w))
            .unwrap_or(u64::MAX)
    }

    /// Calls `f` with a full object vector for every valuation of `objs` in the box.
    fn enumerate(
        &self,
        objs: &[u16],
        ivs: &[(i64, i64)],
        f: &mut dyn FnMut(&[i64]) -> Result<(), AbsError>,
    ) -> Result<(), AbsError> {
        let mut vals: Vec<i64> = ivs.iter().map(|v| v.0).collect();
        loop {
            f(&vals)?;
            let mut i = 0;
            loop {
                if i == objs.len() {
                    return Ok(());
                }
                let o = objs[i] as usize;
                if vals[o] < ivs[o].1 {
                    vals[o] += 1;
                    break;
                }
                vals[o] = ivs[o].0;
                i += 1;
            }
        }
    }

    /// Products for tuples of cells over `involved`, other objects unchanged.
    fn products(&self, key: AKey, ivs: &[(i64, i64)], involved: &[u16], tuples: HashSet<Vec<u32>>) -> Vec<Product> {
        if tuples.is_empty() {
            return Vec::new();
        }
        let (_, base) = self.whole(key.clone(), ivs);
        let mut tuples: Vec<Vec<u32>> = tuples.into_iter().collect();
        tuples.sort_unstable();
        tuples
            .into_iter()
            .map(|t| {
                let mut r = base.clone();
                for (i, &o) in involved.iter().enumerate() {
                    r[o as usize] = (t[i], t[i]);
                }
                (key.clone(), r)
            })
            .collect()
    }
}

/// Values of both games at every abstract state.
pub struct Solution {
    pub lower: Vec<BigRational>,
    pub upper: Vec<BigRational>,
}

/// Successor-before-predecessor order; fails on a cycle.
pub fn reverse_topological(game: &AbstractGame) -> Result<Vec<usize>, AbsError> {
    let n = game.states.len();
    let mut indeg = vec![0u32; n];
    let succs = |s: usize| {
        let mut v: Vec<u32> = (game.d_start[s]..game.d_start[s + 1]).flat_map(|d| game.successors(d).iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let adj: Vec<Vec<u32>> = (0..n).map(succs).collect();
    for a in &adj {
        for &t in a {
            indeg[t as usize] += 1;
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&s| indeg[s] == 0).collect();
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for &t in &adj[s] {
            indeg[t as usize] -= 1;
            if indeg[t as usize] == 0 {
                order.push(t as usize);
            }
        }
        i += 1;
    }
    if order.len() != n {
        return Err(AbsError::Cycle);
    }
    order.reverse();
    Ok(order)
}

pub fn solve(game: &AbstractGame, solver: SolverOptions) -> Result<Solution, AbsError> {
    let n = game.states.len();
    let mut lower = vec![BigRational::zero(); n];
    let mut upper = vec![BigRational::zero(); n];
    for s in reverse_topological(game)? {
        let (r, c) = (game.rows[s] as usize, game.cols[s] as usize);
        let ulo = BigRational::from_integer(game.u_lo[s].into());
        let uhi = BigRational::from_integer(game.u_hi[s].into());
        if r == 0 || c == 0 {
            lower[s] = ulo;
            upper[s] = uhi;
            continue;
        }
        let ds = game.d_start[s]..game.d_start[s + 1];
        let lo: Vec<BigRational> = ds
            .clone()
            .map(|d| game.successors(d).iter().map(|&t| &lower[t as usize]).min().unwrap().clone())
            .collect();
        let hi: Vec<BigRational> =
            ds.map(|d| game.successors(d).iter().map(|&t| &upper[t as usize]).max().unwrap().clone()).collect();
        lower[s] = ulo + matrix(r, c, lo, solver);
        upper[s] = uhi + matrix(r, c, hi, solver);
    }
    Ok(Solution { lower, upper })
}

fn matrix(r: usize, c: usize, entries: Vec<BigRational>, solver: SolverOptions) -> BigRational {
    if r == 1 {
        return entries.into_iter().min().unwrap();
    }
    if c == 1 {
        return entries.into_iter().max().unwrap();
    }
    let m = MatrixGame::from_flat(r, c, entries).expect("well-formed local game");
    matrix_value_with(&m, solver).value
}

/// `max v↑ − min v↓` over the successor set of transition point `d`.
pub fn skew(game: &AbstractGame, sol: &Solution, d: usize) -> BigRational {
    let xs = game.successors(d);
    let hi = xs.iter().map(|&t| &sol.upper[t as usize]).max().unwrap();
    let lo = xs.iter().map(|&t| &sol.lower[t as usize]).min().unwrap();
    hi - lo
}

/// Imprecision introduced at each state rather than inherited from its
/// successors: the utility spread plus, over its transition points, the
/// largest skew in excess of the widest single successor gap.
pub fn local_imprecision(game: &AbstractGame, sol: &Solution) -> Vec<BigRational> {
    (0..game.states.len())
        .map(|s| {
            let spread = BigRational::from_integer((game.u_hi[s] - game.u_lo[s]).into());
            let excess = (game.d_start[s]..game.d_start[s + 1])
                .map(|d| {
                    let widest = game
                        .successors(d)
                        .iter()
                        .map(|&t| &sol.upper[t as usize] - &sol.lower[t as usize])
                        .max()
                        .unwrap();
                    skew(game, sol, d) - widest
                })
                .max()
                .unwrap_or_else(BigRational::zero);
            spread + excess
        })
        .collect()
}

/// Average local imprecision of the abstract states at each label.
pub fn label_scores(game: &AbstractGame, sol: &Solution, labels: usize) -> Vec<Option<BigRational>> {
    let mut sum = vec![BigRational::zero(); labels];
    let mut count = vec![0u64; labels];
    for (s, v) in local_imprecision(game, sol).into_iter().enumerate() {
        let l = game.label(s) as usize;
        sum[l] += v;
        count[l] += 1;
    }
    sum.into_iter()
        .zip(count)
        .map(|(s, c)| if c == 0 { None } else { Some(s / BigRational::from_integer(c.into())) })
        .collect()
}

/// Minimum skew over all transition points, for soundness checks.
pub fn min_skew(game: &AbstractGame, sol: &Solution) -> Option<BigRational> {
    (0..game.x_start.len() - 1)
        .map(|d| skew(game, sol, d))
        .min()
}
