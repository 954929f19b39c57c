//! Two-player zero-sum concurrent games.
//!
//! Matrix games are solved by linear programming (exact rationals for small
//! matrices), general games by finite-horizon value iteration and acyclic
//! games by backward induction.

mod concurrent;
mod matrix;
mod simplex;
mod text;

pub use concurrent::{
    backward_induction, backward_induction_all, longest_path, value_iteration, ConcurrentGame,
    GameState,
};
pub use matrix::{matrix_value, matrix_value_with, GameValue, MatrixGame, SolverOptions};
pub use text::{parse_game, render_game};

pub use num::BigRational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GameError {
    #[error("matrix has no rows or no columns")]
    EmptyMatrix,
    #[error("matrix rows have different lengths")]
    RaggedMatrix,
    #[error("game contains a cycle through state {0}")]
    Cycle(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("state {state}: expected {expected} transitions, found {found}")]
    TransitionArity { state: String, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Shorthand for an integer-valued rational.
pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}
