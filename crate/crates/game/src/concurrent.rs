use num::{BigRational, Zero};

use crate::matrix::{matrix_value, MatrixGame};
use crate::GameError;

/// One state of an explicit concurrent game.
///
/// `succ` is row-major over `actions1 x actions2`. Either action list may be
/// empty, which makes the state a dead-end (acyclic form only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    pub name: String,
    pub utility: BigRational,
    pub actions1: Vec<String>,
    pub actions2: Vec<String>,
    pub succ: Vec<usize>,
}

impl GameState {
    pub fn is_dead_end(&self) -> bool {
        self.actions1.is_empty() || self.actions2.is_empty()
    }

    pub fn successor(&self, a1: usize, a2: usize) -> usize {
        self.succ[a1 * self.actions2.len() + a2]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcurrentGame {
    pub states: Vec<GameState>,
    pub start: usize,
}

impl ConcurrentGame {
    pub fn new(states: Vec<GameState>, start: usize) -> Result<Self, GameError> {
        let g = Self { states, start };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<(), GameError> {
        if self.start >= self.states.len() {
            return Err(GameError::UnknownState(self.start.to_string()));
        }
        for s in &self.states {
            let expected = if s.is_dead_end() { 0 } else { s.actions1.len() * s.actions2.len() };
            if s.succ.len() != expected {
                return Err(GameError::TransitionArity {
                    state: s.name.clone(),
                    expected,
                    found: s.succ.len(),
                });
            }
            if let Some(&bad) = s.succ.iter().find(|&&t| t >= self.states.len()) {
                return Err(GameError::UnknownState(bad.to_string()));
            }
        }
        Ok(())
    }

    fn local_game(&self, s: usize, next: &[BigRational]) -> MatrixGame {
        let st = &self.states[s];
        let entries = st.succ.iter().map(|&t| &st.utility + &next[t]).collect();
        MatrixGame::from_flat(st.actions1.len(), st.actions2.len(), entries)
            .expect("non-empty local game")
    }

    /// States in an order where every state precedes its successors,
    /// restricted to those reachable from the start.
    pub fn topological_order(&self) -> Result<Vec<usize>, GameError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut mark = vec![Mark::New; self.states.len()];
        let mut post = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(self.start, 0)];
        mark[self.start] = Mark::Open;
        while let Some(&mut (s, ref mut i)) = stack.last_mut() {
            let succ = &self.states[s].succ;
            if *i < succ.len() {
                let t = succ[*i];
                *i += 1;
                match mark[t] {
                    Mark::New => {
                        mark[t] = Mark::Open;
                        stack.push((t, 0));
                    }
                    Mark::Open => return Err(GameError::Cycle(self.states[t].name.clone())),
                    Mark::Done => {}
                }
            } else {
                mark[s] = Mark::Done;
                post.push(s);
                stack.pop();
            }
        }
        post.reverse();
        Ok(post)
    }
}

/// Finite-horizon value `v_L(G, u)` with `v_0 = 0`.
///
/// Dead-end states (acyclic form) behave as if followed by an absorbing
/// zero-utility sink: their value is `u(s)` for every `t >= 1`.
pub fn value_iteration(g: &ConcurrentGame, horizon: usize) -> BigRational {
    let n = g.states.len();
    let mut prev = vec![BigRational::zero(); n];
    for _ in 1..=horizon {
        let cur: Vec<BigRational> = (0..n)
            .map(|s| {
                if g.states[s].is_dead_end() {
                    g.states[s].utility.clone()
                } else {
                    matrix_value(&g.local_game(s, &prev)).value
                }
            })
            .collect();
        prev = cur;
    }
    prev[g.start].clone()
}

/// Value of an acyclic game by backward induction.
pub fn backward_induction(g: &ConcurrentGame) -> Result<BigRational, GameError> {
    let values = backward_induction_all(g)?;
    Ok(values[g.start].clone().expect("start is reachable"))
}

/// Values of every state reachable from the start; `None` for the rest.
pub fn backward_induction_all(g: &ConcurrentGame) -> Result<Vec<Option<BigRational>>, GameError> {
    let order = g.topological_order()?;
    let mut known = vec![BigRational::zero(); g.states.len()];
    let mut out = vec![None; g.states.len()];
    for &s in order.iter().rev() {
        let v = if g.states[s].is_dead_end() {
            g.states[s].utility.clone()
        } else {
            matrix_value(&g.local_game(s, &known)).value
        };
        known[s] = v.clone();
        out[s] = Some(v);
    }
    Ok(out)
}

/// Number of states on the longest path from the start (acyclic games only).
pub fn longest_path(g: &ConcurrentGame) -> Result<usize, GameError> {
    let order = g.topological_order()?;
    let mut depth = vec![0usize; g.states.len()];
    for &s in order.iter().rev() {
        depth[s] = 1 + g.states[s].succ.iter().map(|&t| depth[t]).max().unwrap_or(0);
    }
    Ok(depth[g.start])
}
