mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use qsc_core::exact::{joint, player_actions};
use qsc_core::model::{Node, NULL};
use qsc_core::semantics::{trace_jsonl, ContractState, Move, Phase, SemanticsError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rps_initial_state() {
    let m = declared_model("rps-correct");
    let s = m.initial_state();
    assert_eq!((s.t, s.l, s.caller, s.balance()), (0, 0, None, 0));
    assert_eq!(s.ids[id(&m, "Alice")], party(&m, "issuer"));
    assert_eq!(s.ids[id(&m, "Bob")], NULL);
    assert_eq!(s.objs[obj(&m, "played")], 0);
    for q in &m.parties.names {
        assert_eq!(s.objs[obj(&m, &format!("Bids[{q}]"))], 0);
    }
}

#[test]
fn sale_starts_with_its_declared_stock() {
    let m = declared_model("sale-correct");
    assert_eq!(m.initial_state().objs[obj(&m, "remaining")], 1000);
}

#[test]
fn only_registration_is_callable_early() {
    let m = declared_model("rps-correct");
    let s = idle_until(&m, m.initial_state(), 5);
    let reg = func(&m, "registerBob");
    for q in 0..m.k() as u8 {
        assert_eq!(m.callable(&s, q), vec![reg]);
        let moves = m.permitted_moves(&s, q);
        assert!(moves.contains(&Move::Noop));
        assert!(!moves.contains(&Move::Call(func(&m, "play"))));
        assert!(!moves.contains(&Move::Call(func(&m, "getReward"))));
    }
}

#[test]
fn play_entry_offers_moves_and_payments_to_alice() {
    let m = declared_model("rps-correct");
    let s = idle_until(&m, m.initial_state(), 11);
    assert_eq!(m.phase(&s), Phase::Jump(func(&m, "play")));
    let s = m.step(&s, &noops(&m)).unwrap();
    assert_eq!((s.t, m.phase(&s)), (15, Phase::Entry(func(&m, "play"))));
    let alice = party(&m, "issuer");
    let moves: BTreeSet<Move> = m.permitted_moves(&s, alice).into_iter().collect();
    assert!(moves.contains(&Move::Noop));
    for y in 0..=3 {
        assert!(moves.contains(&Move::Decide { param: 0, value: y }));
    }
    assert!(!moves.contains(&Move::Decide { param: 0, value: 4 }));
    for y in [0, 1, 50, 100] {
        assert!(moves.contains(&Move::Pay { param: 2, amount: y }));
    }
    // Bob is unbound, so nobody answers for BobsMove.
    assert!(!moves.iter().any(|mv| matches!(mv, Move::Decide { param: 1, .. })));
}

const CLAMP: &str = "contract C {
  numeric x[0, 100] = 0;
  numeric y[0, 100] = 50;
  function f[1, 2]() { x = 150; y = y - 80; }
}";

#[test]
fn assignments_saturate_at_the_range() {
    let m = source_model(CLAMP, "p", 1, "x", &[]);
    let s = idle_until(&m, m.initial_state(), 1);
    let mut trace = vec![];
    let s = call(&m, &s, 0, func(&m, "f"), vec![], &mut trace);
    assert_eq!(s.objs[obj(&m, "x")], 100);
    assert_eq!(s.objs[obj(&m, "y")], 0);
}

#[test]
fn payout_is_capped_by_the_balance() {
    let src = "contract C {
      numeric d[0, 30] = 0;
      function f[1, 2](payable d : caller) { payout(caller, 50); }
    }";
    let m = source_model(src, "p", 1, "payoff", &[]);
    let s = idle_until(&m, m.initial_state(), 1);
    let mut trace = vec![];
    let s = call(&m, &s, 0, func(&m, "f"), vec![Move::Pay { param: 0, amount: 30 }], &mut trace);
    let at_payout = trace.iter().find(|s| matches!(m.nodes[s.l as usize], Node::Payout { .. })).unwrap();
    assert_eq!(at_payout.balance(), 30);
    assert_eq!(m.received_by_me(at_payout).unwrap(), 30);
    assert_eq!(s.balance(), 0);
}

/// Registers Bob as `q1` with bid 0 and runs to the entry of `play`.
fn rps_at_play(m: &qsc_core::model::Model) -> ContractState {
    let s = idle_until(m, m.initial_state(), 1);
    let bob = party(m, "q1");
    let s = call(m, &s, bob, func(m, "registerBob"), vec![Move::Pay { param: 0, amount: 0 }], &mut vec![]);
    assert_eq!(s.ids[id(m, "Bob")], bob);
    let s = m.step(&s, &noops(m)).unwrap();
    let s = idle_until(m, s, 11);
    m.step(&s, &noops(m)).unwrap()
}

#[test]
fn silent_bob_gets_the_default_move() {
    let m = declared_model("rps-correct");
    let s = rps_at_play(&m);
    let alice = party(&m, "issuer");
    let s = m.step(&s, &only(&m, alice, vec![Move::Decide { param: 0, value: 1 }])).unwrap();
    let s = run_body(&m, s, &mut vec![]);
    assert_eq!(s.objs[obj(&m, "BobsMove")], 0);
    assert_eq!(s.objs[obj(&m, "AliceWon")], 1);
    assert_eq!(s.objs[obj(&m, "BobWon")], 0);
}

#[test]
fn both_silent_means_nobody_wins() {
    let m = declared_model("rps-correct");
    let s = rps_at_play(&m);
    let s = m.step(&s, &noops(&m)).unwrap();
    let s = run_body(&m, s, &mut vec![]);
    assert_eq!(s.objs[obj(&m, "AliceWon")], 0);
    assert_eq!(s.objs[obj(&m, "BobWon")], 0);
}

#[test]
fn lottery_without_players_goes_to_the_issuer() {
    let m = declared_model("lottery-correct");
    let s = idle_until(&m, m.initial_state(), 11);
    let s = m.step(&s, &noops(&m)).unwrap();
    assert_eq!(m.phase(&s), Phase::Entry(func(&m, "play")));
    let issuer = party(&m, "p");
    let s = m.step(&s, &only(&m, issuer, vec![Move::Decide { param: 2, value: 1 }, Move::Pay { param: 3, amount: 1 }])).unwrap();
    let s = run_body(&m, s, &mut vec![]);
    assert_eq!(s.objs[obj(&m, "BobsChoice")], 0);
    assert_eq!(s.ids[id(&m, "Winner")], issuer);
}

#[test]
fn terminal_once_past_the_last_window() {
    for (name, last) in [("rps-correct", 20), ("auction-correct", 20), ("lottery-correct", 30)] {
        let m = declared_model(name);
        let mut s = m.initial_state();
        s.t = last;
        assert!(!m.is_terminal(&s), "{name}");
        s.t = last + 1;
        assert!(m.is_terminal(&s), "{name}");
        assert_eq!(m.phase(&s), Phase::Terminal);
        assert!(m.party_actions(&s, 0).is_empty());
    }
}

#[test]
fn terminal_utility_is_the_objective() {
    let m = declared_model("rps-correct");
    let mut s = m.initial_state();
    s.t = 21;
    s.objs[obj(&m, "AliceWon")] = 1;
    assert_eq!(m.utility(&s).unwrap(), 10);
}

#[test]
fn monetary_utilities_sum_to_net_flow() {
    let src = "contract C {
      numeric d[0, 5] = 0;
      numeric e[0, 5] = 0;
      function fund[1, 2](payable d : caller) { return; }
      function f[1, 2](payable e : caller) { payout(caller, 3); }
    }";
    let m = source_model(src, "p", 2, "payoff", &[]);
    let (p, other) = (party(&m, "p"), party(&m, "q1"));
    let mut trace = vec![m.initial_state()];
    let s = idle_until(&m, m.initial_state(), 1);
    trace.push(s.clone());
    let s = call(&m, &s, other, func(&m, "fund"), vec![Move::Pay { param: 0, amount: 2 }], &mut trace);
    let s = call(&m, &s, p, func(&m, "f"), vec![Move::Pay { param: 0, amount: 1 }], &mut trace);
    let mut s = s;
    while !m.is_terminal(&s) {
        s = m.step(&s, &noops(&m)).unwrap();
        trace.push(s.clone());
    }
    let total: i128 = trace.iter().map(|s| m.utility(s).unwrap()).sum();
    assert_eq!(total, 2);
}

#[test]
fn buggy_sale_mints_tokens() {
    let m = declared_model("sale-buggy");
    let buy = func(&m, "buy");
    let mut s = m.initial_state();
    for (t, amount) in [(1, 999), (2, 1000)] {
        s = idle_until(&m, s, t);
        s = call(&m, &s, 0, buy, vec![Move::Pay { param: 0, amount }], &mut vec![]);
    }
    while !m.is_terminal(&s) {
        s = m.step(&s, &noops(&m)).unwrap();
    }
    assert_eq!(m.eval_objective(&s).unwrap(), 1999);
}

#[test]
fn buying_a_ticket_costs_one() {
    let m = declared_model("lottery-correct");
    let s = idle_until(&m, m.initial_state(), 1);
    let p = party(&m, "p");
    let s = m.step(&s, &only(&m, p, vec![Move::Call(func(&m, "buyTicket"))])).unwrap();
    let s = m.step(&s, &only(&m, p, vec![Move::Pay { param: 0, amount: 1 }])).unwrap();
    assert_eq!(s.l, m.funcs[func(&m, "buyTicket")].first);
    assert_eq!(m.utility(&s).unwrap(), -1);
}

#[test]
fn division_by_zero_is_reported() {
    let src = "contract C { numeric x[0, 1] = 0; function f[1, 2]() { x = 1 / x; } }";
    let m = source_model(src, "p", 1, "x", &[]);
    let s = idle_until(&m, m.initial_state(), 1);
    let s = m.step(&s, &only(&m, 0, vec![Move::Call(0)])).unwrap();
    let s = m.step(&s, &noops(&m)).unwrap();
    assert!(matches!(m.step(&s, &noops(&m)), Err(SemanticsError::DivisionByZero(l)) if l == s.l));
}

#[test]
fn illegal_choices_are_rejected() {
    let m = declared_model("rps-correct");
    let s = idle_until(&m, m.initial_state(), 5);
    let get = func(&m, "getReward");
    assert!(matches!(m.step(&s, &only(&m, 0, vec![Move::Call(get)])), Err(SemanticsError::NotPermitted { .. })));
    assert!(matches!(m.step(&s, &[vec![Move::Noop]]), Err(SemanticsError::Arity { expected: 2, found: 1 })));
}

#[test]
fn a_party_calls_a_function_at_most_once_per_tick() {
    let m = declared_model("rps-correct");
    let reg = func(&m, "registerBob");
    let s = idle_until(&m, m.initial_state(), 3);
    let q1 = party(&m, "q1");
    let s = call(&m, &s, q1, reg, vec![Move::Pay { param: 0, amount: 0 }], &mut vec![]);
    assert_eq!(m.phase(&s), Phase::Global);
    assert!(m.callable(&s, q1).is_empty());
    // The analysed party ranks after q1 and may still call.
    assert_eq!(m.callable(&s, party(&m, "issuer")), vec![reg]);
}

#[test]
fn simultaneous_requests_go_to_the_lower_rank() {
    let m = declared_model("rps-correct");
    let s = idle_until(&m, m.initial_state(), 2);
    let reg = func(&m, "registerBob");
    let n = m.step(&s, &vec![vec![Move::Call(reg)]; 2]).unwrap();
    assert_eq!(n.caller, Some(party(&m, "q1")));
}

#[test]
fn trace_lists_changes_per_step() {
    let m = source_model(CLAMP, "p", 1, "x", &[]);
    let mut trace = vec![m.initial_state()];
    let s = idle_until(&m, m.initial_state(), 1);
    trace.push(s.clone());
    call(&m, &s, 0, func(&m, "f"), vec![], &mut trace);
    let text = trace_jsonl(&m, &trace);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), trace.len());
    assert_eq!(lines[0]["changed"]["x"], 0);
    assert_eq!(lines[0]["changed"]["y"], 50);
    assert_eq!(lines[1]["t"], 1);
    assert!(lines[1]["changed"].as_object().unwrap().is_empty());
    assert_eq!(lines[2]["caller"], "p");
    let after_x = lines.iter().position(|l| l["changed"].get("x").is_some_and(|v| v == 100)).unwrap();
    assert_eq!(lines[after_x + 1]["changed"]["y"], 0);
}

const RANDOM_RUN_CONTRACTS: &[&str] =
    &["rps-correct", "rps-buggy", "auction-correct", "auction-buggy", "lottery-buggy", "sale-buggy", "transfer-buggy"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Random runs keep every variable in range, account for every coin,
    /// never repeat a (t, f, caller) call and terminate within the bound.
    #[test]
    fn random_runs_respect_invariants(which in 0..RANDOM_RUN_CONTRACTS.len(), seed in any::<u64>()) {
        let name = RANDOM_RUN_CONTRACTS[which];
        let m = desk_model(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = m.initial_state();
        let (mut paid_in, mut paid_out) = (0i64, 0i64);
        let mut calls = BTreeSet::new();
        let bound = m.k() * (m.max_t as usize + 1) * m.lc.label_count();
        let mut steps = 0;
        while !m.is_terminal(&s) {
            let (mine, others) = player_actions(&m, &s);
            let a1 = &mine[rng.gen_range(0..mine.len())];
            let a2 = &others[rng.gen_range(0..others.len())];
            let j = joint(&m, a1, a2);
            if let Node::Payout { amount, .. } = &m.nodes[s.l as usize] {
                paid_out += m.payout_amount(&s, amount).unwrap();
            }
            if let Phase::Entry(_) = m.phase(&s) {
                paid_in += j.iter().flatten().map(|mv| match mv { Move::Pay { amount, .. } => *amount, _ => 0 }).sum::<i64>();
            }
            let global = m.phase(&s) == Phase::Global;
            let n = m.step(&s, &j).unwrap();
            if global {
                if let Some(c) = n.caller {
                    let f = m.lc.function_of(n.l).unwrap();
                    prop_assert!(calls.insert((n.t, f, c)), "repeated call");
                }
            }
            s = n;
            steps += 1;
            prop_assert!(steps <= bound);
            prop_assert!(s.balance() >= 0);
            prop_assert!(s.balance() <= m.objects[0].hi);
            prop_assert_eq!(s.balance() as i64, paid_in - paid_out);
            for (o, info) in m.objects.iter().enumerate().skip(1) {
                prop_assert!(info.lo <= s.objs[o] && s.objs[o] <= info.hi, "{} out of range", info.name);
            }
        }
    }
}
