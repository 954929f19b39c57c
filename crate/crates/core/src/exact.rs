//! Explicit construction of the concrete game and exact solving.
//!
//! Only feasible for small ranges; the abstraction never goes through here.

use std::collections::HashMap;

use num::BigRational;
use qsc_game::{backward_induction, ConcurrentGame, GameError, GameState};
use thiserror::Error;

use crate::model::Model;
use crate::semantics::{Action, ContractState, SemanticsError};

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("concrete game exceeds {0} states")]
    TooLarge(usize),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Player 1 actions (the analysed party) and player 2 actions (joint choices
/// of everyone else, in party order) at `s`.
pub fn player_actions(model: &Model, s: &ContractState) -> (Vec<Action>, Vec<Vec<Action>>) {
    let me = model.me();
    let mine = model.party_actions(s, me);
    let mut others: Vec<Vec<Action>> = vec![Vec::new()];
    for q in 0..model.k() as u8 {
        if q == me {
            continue;
        }
        let opts = model.party_actions(s, q);
        others = others
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect();
    }
    if mine.is_empty() {
        others.clear();
    }
    (mine, others)
}

/// Assembles the `k`-party joint choice from the two players' actions.
pub fn joint(model: &Model, a1: &Action, a2: &[Action]) -> Vec<Action> {
    let me = model.me() as usize;
    let mut out = Vec::with_capacity(model.k());
    let mut rest = a2.iter();
    for q in 0..model.k() {
        out.push(if q == me { a1.clone() } else { rest.next().expect("one action per party").clone() });
    }
    out
}

/// The reachable concrete game as an explicit acyclic concurrent game.
pub struct ExplicitGame {
    pub game: ConcurrentGame,
    pub states: Vec<ContractState>,
}

pub fn materialize(model: &Model, max_states: usize) -> Result<ExplicitGame, ExactError> {
    let init = model.initial_state();
    let mut index: HashMap<ContractState, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    index.insert(init, 0);
    let mut out: Vec<GameState> = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let s = states[next].clone();
        let (a1, a2) = player_actions(model, &s);
        let mut succ = Vec::with_capacity(a1.len() * a2.len());
        for x in &a1 {
            for y in &a2 {
                let n = model.step(&s, &joint(model, x, y))?;
                let id = match index.get(&n) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= max_states {
                            return Err(ExactError::TooLarge(max_states));
                        }
                        index.insert(n.clone(), states.len());
                        states.push(n);
                        states.len() - 1
                    }
                };
                succ.push(id);
            }
        }
        let label = |a: &[crate::semantics::Move]| format!("{a:?}");
        out.push(GameState {
            name: format!("s{next}"),
            utility: BigRational::from_integer(model.utility(&s)?.into()),
            actions1: a1.iter().map(|a| label(a)).collect(),
            actions2: a2.iter().map(|a| a.iter().map(|x| label(x)).collect::<Vec<_>>().join("|")).collect(),
            succ,
        });
        next += 1;
    }
    Ok(ExplicitGame { game: ConcurrentGame::new(out, 0)?, states })
}

#[derive(Clone, Debug)]
pub struct ExactValue {
    pub value: BigRational,
    pub states: usize,
}

/// Exact value of the bounded contract game by backward induction.
pub fn exact_value(model: &Model, max_states: usize) -> Result<ExactValue, ExactError> {
    let g = materialize(model, max_states)?;
    let value = backward_induction(&g.game)?;
    Ok(ExactValue { value, states: g.states.len() })
}
