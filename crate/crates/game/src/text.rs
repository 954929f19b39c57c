//! Plain-text interchange format for hand-written games.
//!
//! ```text
//! # matching pennies
//! start s0
//! state s0 0
//! actions s0 h t | h t
//! edge s0 h h win
//! edge s0 h t lose
//! edge s0 t h lose
//! edge s0 t t win
//! state win 1
//! state lose 0
//! ```
//!
//! States without an `actions` line are dead-ends. Utilities are integers or
//! fractions `p/q`. Every action pair of a non-dead-end state needs an edge.

use std::collections::HashMap;
use std::fmt::Write;

use num::BigRational;

use crate::concurrent::{ConcurrentGame, GameState};
use crate::GameError;

pub fn parse_game(text: &str) -> Result<ConcurrentGame, GameError> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut utility: HashMap<usize, BigRational> = HashMap::new();
    let mut actions: HashMap<usize, (Vec<String>, Vec<String>)> = HashMap::new();
    let mut edges: Vec<(usize, usize, String, String, String)> = Vec::new();
    let mut start: Option<String> = None;

    let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            names.len() - 1
        })
    };

    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| GameError::Format { line: line_no, message: msg.to_string() };
        match words[0] {
            "start" if words.len() == 2 => start = Some(words[1].to_string()),
            "state" if words.len() == 3 => {
                let s = intern(words[1], &mut names);
                let u: BigRational = words[2].parse().map_err(|_| bad("bad utility"))?;
                if utility.insert(s, u).is_some() {
                    return Err(bad("state declared twice"));
                }
            }
            "actions" if words.len() >= 2 => {
                let s = intern(words[1], &mut names);
                let rest = &words[2..];
                let bar = rest.iter().position(|w| *w == "|").ok_or_else(|| bad("missing '|'"))?;
                let a1 = rest[..bar].iter().map(|w| w.to_string()).collect();
                let a2 = rest[bar + 1..].iter().map(|w| w.to_string()).collect();
                if actions.insert(s, (a1, a2)).is_some() {
                    return Err(bad("actions declared twice"));
                }
            }
            "edge" if words.len() == 5 => {
                let s = intern(words[1], &mut names);
                intern(words[4], &mut names);
                edges.push((line_no, s, words[2].to_string(), words[3].to_string(), words[4].to_string()));
            }
            _ => return Err(bad("unrecognized line")),
        }
    }

    let mut states: Vec<GameState> = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let (a1, a2) = actions.remove(&i).unwrap_or_default();
            GameState {
                name: n.clone(),
                utility: utility.get(&i).cloned().unwrap_or_default(),
                succ: vec![usize::MAX; if a1.is_empty() || a2.is_empty() { 0 } else { a1.len() * a2.len() }],
                actions1: a1,
                actions2: a2,
            }
        })
        .collect();
    for (i, n) in names.iter().enumerate() {
        if !utility.contains_key(&i) {
            return Err(GameError::UnknownState(n.clone()));
        }
    }
    for (line, s, a1, a2, target) in edges {
        let bad = |msg: &str| GameError::Format { line, message: msg.to_string() };
        let st = &mut states[s];
        let i = st.actions1.iter().position(|a| *a == a1).ok_or_else(|| bad("unknown player-1 action"))?;
        let j = st.actions2.iter().position(|a| *a == a2).ok_or_else(|| bad("unknown player-2 action"))?;
        let k = i * st.actions2.len() + j;
        if st.succ[k] != usize::MAX {
            return Err(bad("duplicate edge"));
        }
        st.succ[k] = names.iter().position(|n| *n == target).expect("interned");
    }
    if let Some(s) = states.iter().find(|s| s.succ.contains(&usize::MAX)) {
        return Err(GameError::TransitionArity {
            state: s.name.clone(),
            expected: s.succ.len(),
            found: s.succ.iter().filter(|&&t| t != usize::MAX).count(),
        });
    }
    let start = start.ok_or(GameError::Format { line: 0, message: "missing start".into() })?;
    let start = names.iter().position(|n| *n == start).ok_or(GameError::UnknownState(start))?;
    ConcurrentGame::new(states, start)
}

pub fn render_game(g: &ConcurrentGame) -> String {
    let mut out = String::new();
    writeln!(out, "start {}", g.states[g.start].name).unwrap();
    // All state lines first so that parsing preserves the state order.
    for s in &g.states {
        writeln!(out, "state {} {}", s.name, s.utility).unwrap();
    }
    for s in &g.states {
        if s.actions1.is_empty() && s.actions2.is_empty() {
            continue;
        }
        writeln!(out, "actions {} {} | {}", s.name, s.actions1.join(" "), s.actions2.join(" ")).unwrap();
        if s.is_dead_end() {
            continue;
        }
        for (i, a1) in s.actions1.iter().enumerate() {
            for (j, a2) in s.actions2.iter().enumerate() {
                let t = s.successor(i, j);
                writeln!(out, "edge {} {} {} {}", s.name, a1, a2, g.states[t].name).unwrap();
            }
        }
    }
    out
}
