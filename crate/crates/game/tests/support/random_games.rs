//! Seeded generator of small random acyclic concurrent games.

use qsc_game::{int, ConcurrentGame, GameState};
use rand::Rng;

/// States are created in topological order: transitions only go forward,
/// and the last state is always a dead-end.
pub fn random_acyclic<R: Rng>(rng: &mut R, max_states: usize) -> ConcurrentGame {
    let n = rng.gen_range(1..=max_states);
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        let dead = i + 1 == n || rng.gen_bool(0.15);
        let (n1, n2) = if dead {
            (0, 0)
        } else {
            (rng.gen_range(1..=3), rng.gen_range(1..=3))
        };
        let succ = (0..n1 * n2).map(|_| rng.gen_range(i + 1..n)).collect();
        states.push(GameState {
            name: format!("s{i}"),
            utility: int(rng.gen_range(-3..=3)),
            actions1: (0..n1).map(|a| format!("a{a}")).collect(),
            actions2: (0..n2).map(|a| format!("b{a}")).collect(),
            succ,
        });
    }
    ConcurrentGame::new(states, 0).expect("well-formed")
}
