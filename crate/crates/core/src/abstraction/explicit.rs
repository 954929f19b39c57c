//! The same lower/upper construction over an explicit game and an arbitrary
//! partition of its states; used to test the abstraction independently of
//! contracts.

use num::{BigRational, Zero};
use qsc_game::{matrix_value, ConcurrentGame, GameError, MatrixGame};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("block {0} mixes states with different action sets")]
    MixedActions(usize),
    #[error("partition has {found} entries for {expected} states")]
    Length { expected: usize, found: usize },
    #[error("abstract game has a cycle")]
    Cycle,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Longest distance to a dead-end, for every state including unreachable
/// ones. Merging only states of equal height keeps the abstract game acyclic
/// and dead-ends apart from interior states.
pub fn heights(g: &ConcurrentGame) -> Result<Vec<usize>, GameError> {
    const NEW: usize = usize::MAX;
    const OPEN: usize = usize::MAX - 1;
    let mut h = vec![NEW; g.states.len()];
    for root in 0..g.states.len() {
        if h[root] != NEW {
            continue;
        }
        h[root] = OPEN;
        let mut stack = vec![(root, 0)];
        while let Some(&mut (s, ref mut i)) = stack.last_mut() {
            let succ = &g.states[s].succ;
            if *i < succ.len() {
                let t = succ[*i];
                *i += 1;
                match h[t] {
                    NEW => {
                        h[t] = OPEN;
                        stack.push((t, 0));
                    }
                    OPEN => return Err(GameError::Cycle(g.states[t].name.clone())),
                    _ => {}
                }
            } else {
                h[s] = succ.iter().map(|&t| h[t] + 1).max().unwrap_or(0);
                stack.pop();
            }
        }
    }
    Ok(h)
}

/// Values of `(G↓, u↓)` and `(G↑, u↑)` for the partition `block[s]`.
pub fn abstract_bounds(g: &ConcurrentGame, block: &[usize]) -> Result<(BigRational, BigRational), PartitionError> {
    let n = g.states.len();
    if block.len() != n {
        return Err(PartitionError::Length { expected: n, found: block.len() });
    }
    let nb = block.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (s, &b) in block.iter().enumerate() {
        members[b].push(s);
    }
    let mut arity: Vec<(usize, usize)> = vec![(0, 0); nb];
    for (b, ms) in members.iter().enumerate() {
        let Some(&first) = ms.first() else { continue };
        let shape = |s: usize| {
            let st = &g.states[s];
            if st.is_dead_end() {
                (0, 0)
            } else {
                (st.actions1.len(), st.actions2.len())
            }
        };
        arity[b] = shape(first);
        if ms.iter().any(|&s| shape(s) != arity[b]) {
            return Err(PartitionError::MixedActions(b));
        }
    }
    // X_d per block and joint action, as sorted block lists.
    let mut xs: Vec<Vec<Vec<usize>>> = vec![Vec::new(); nb];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for b in 0..nb {
        let (r, c) = arity[b];
        for d in 0..r * c {
            let mut x: Vec<usize> = members[b].iter().map(|&s| block[g.states[s].succ[d]]).collect();
            x.sort_unstable();
            x.dedup();
            adj[b].extend_from_slice(&x);
            xs[b].push(x);
        }
        adj[b].sort_unstable();
        adj[b].dedup();
    }
    let mut indeg = vec![0usize; nb];
    for a in &adj {
        for &t in a {
            indeg[t] += 1;
        }
    }
    let mut order: Vec<usize> = (0..nb).filter(|&b| indeg[b] == 0).collect();
    let mut i = 0;
    while i < order.len() {
        for &t in &adj[order[i]] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                order.push(t);
            }
        }
        i += 1;
    }
    if order.len() != nb {
        return Err(PartitionError::Cycle);
    }
    let mut lower = vec![BigRational::zero(); nb];
    let mut upper = vec![BigRational::zero(); nb];
    for &b in order.iter().rev() {
        if members[b].is_empty() {
            continue;
        }
        let u = members[b].iter().map(|&s| &g.states[s].utility);
        let ulo = u.clone().min().unwrap().clone();
        let uhi = u.max().unwrap().clone();
        let (r, c) = arity[b];
        if r == 0 {
            lower[b] = ulo;
            upper[b] = uhi;
            continue;
        }
        let lo: Vec<BigRational> =
            xs[b].iter().map(|x| x.iter().map(|&t| &lower[t]).min().unwrap().clone()).collect();
        let hi: Vec<BigRational> =
            xs[b].iter().map(|x| x.iter().map(|&t| &upper[t]).max().unwrap().clone()).collect();
        lower[b] = ulo + matrix_value(&MatrixGame::from_flat(r, c, lo)?).value;
        upper[b] = uhi + matrix_value(&MatrixGame::from_flat(r, c, hi)?).value;
    }
    let s0 = block[g.start];
    Ok((lower[s0].clone(), upper[s0].clone()))
}
