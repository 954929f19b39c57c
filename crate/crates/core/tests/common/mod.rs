#![allow(dead_code)]

use qsc_core::analysis::{prepare, AnalysisConfig};
use qsc_core::corpus::corpus_entry;
use qsc_core::model::Model;
use qsc_core::semantics::{Action, ContractState, Move, Phase};

/// The bundled contract under its desk-scale preset.
pub fn desk_model(name: &str) -> Model {
    let e = corpus_entry(name).expect("bundled");
    prepare(e.source, &AnalysisConfig::corpus(e, false)).expect("compiles").0
}

/// The bundled contract with its declared ranges.
pub fn declared_model(name: &str) -> Model {
    let e = corpus_entry(name).expect("bundled");
    prepare(e.source, &AnalysisConfig::corpus(e, true)).expect("compiles").0
}

pub fn source_model(src: &str, party: &str, k: usize, objective: &str, overrides: &[(&str, i64, i64)]) -> Model {
    let mut c = AnalysisConfig::new("test", party, objective, k);
    c.overrides = overrides.iter().map(|&(n, lo, hi)| (n.to_string(), (lo, hi))).collect();
    prepare(src, &c).expect("compiles").0
}

pub fn func(m: &Model, name: &str) -> usize {
    m.funcs.iter().position(|f| f.name == name).expect("function")
}

pub fn obj(m: &Model, name: &str) -> usize {
    m.objects.iter().position(|o| o.name == name).expect("object")
}

pub fn id(m: &Model, name: &str) -> usize {
    m.id_names.iter().position(|n| n == name).expect("id")
}

pub fn party(m: &Model, name: &str) -> u8 {
    m.parties.index(name).expect("party")
}

pub fn noops(m: &Model) -> Vec<Action> {
    vec![vec![Move::Noop]; m.k()]
}

/// Everyone idles except `q`, who plays `a`.
pub fn only(m: &Model, q: u8, a: Action) -> Vec<Action> {
    let mut j = noops(m);
    j[q as usize] = a;
    j
}

/// Steps with all-noop choices until the state is at `l = 0` of time `t`.
pub fn idle_until(m: &Model, mut s: ContractState, t: u32) -> ContractState {
    while !(s.t == t && s.l == 0) {
        assert!(s.t <= t, "overshot t={t}");
        s = m.step(&s, &noops(m)).unwrap();
    }
    s
}

/// Runs statement steps until the next non-statement phase, collecting
/// every visited state.
pub fn run_body(m: &Model, s: ContractState, trace: &mut Vec<ContractState>) -> ContractState {
    let mut s = s;
    while m.phase(&s) == Phase::Stmt {
        s = m.step(&s, &noops(m)).unwrap();
        trace.push(s.clone());
    }
    s
}

/// Calls `f` as `q` at a global state and enters it with `entry` answers.
pub fn call(m: &Model, s: &ContractState, q: u8, f: usize, entry: Action, trace: &mut Vec<ContractState>) -> ContractState {
    let s = m.step(s, &only(m, q, vec![Move::Call(f)])).unwrap();
    trace.push(s.clone());
    let s = m.step(&s, &only(m, q, if entry.is_empty() { vec![Move::Noop] } else { entry })).unwrap();
    trace.push(s.clone());
    run_body(m, s, trace)
}
