mod common;

use std::collections::BTreeSet;

use common::*;
use num::{BigRational, Zero};
use qsc_core::abstraction::*;
use qsc_core::exact::exact_value;
use qsc_core::model::{Model, Node};

#[test]
fn uniform_grids() {
    assert_eq!(Grid::uniform(&[(0, 100)], 1).intervals(0), vec![(0, 100)]);
    assert_eq!(Grid::uniform(&[(0, 100)], 4).intervals(0), vec![(0, 24), (25, 49), (50, 74), (75, 100)]);
    assert_eq!(Grid::uniform(&[(0, 3)], 10).intervals(0), vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    assert_eq!(Grid::uniform(&[(5, 5)], 3).intervals(0), vec![(5, 5)]);
    let g = Grid::uniform(&[(0, 9)], 3);
    assert_eq!(g.intervals(0), vec![(0, 2), (3, 5), (6, 9)]);
    assert_eq!((g.cell_of(0, 0), g.cell_of(0, 5), g.cell_of(0, 9)), (0, 1, 2));
    assert_eq!(g.overlapping(0, 4, 7), (1, 2));
}

#[test]
fn bisection_leaves_unit_cells_alone() {
    let mut g = Grid::uniform(&[(0, 7), (2, 2)], 1);
    assert!(g.bisect());
    assert_eq!(g.intervals(0), vec![(0, 3), (4, 7)]);
    assert_eq!(g.intervals(1), vec![(2, 2)]);
    while g.bisect() {}
    assert!(g.is_unit());
    assert_eq!(g.cells(0), 8);
}

#[test]
fn refining_a_label_only_touches_that_label() {
    let m = desk_model("rps-correct");
    let mut p = Partition::initial(&m, 2);
    let before = p.clone();
    assert!(p.refine_label(3));
    assert!(p.size() > before.size());
    for l in 0..p.grids.len() {
        assert_eq!(p.grids[l] == before.grids[l], l != 3);
    }
}

/// A partition that is unit everywhere except at `coarse`, which gets one
/// cell per object.
fn coarse_at(m: &Model, coarse: &[u32]) -> Partition {
    let mut p = Partition::unit(m);
    for &l in coarse {
        p.grids[l as usize] = Grid::uniform(&object_ranges(m), 1);
    }
    p
}

/// Values of object `o` covered by the successors of every state at label `l`.
fn covered(p: &Partition, g: &AbstractGame, l: u32, at: u32, o: usize) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    for s in (0..g.states.len()).filter(|&s| g.label(s) == l) {
        for d in g.d_start[s]..g.d_start[s + 1] {
            for &t in g.successors(d) {
                let st = &g.states[t as usize];
                if st.key.l == at {
                    let (lo, hi) = p.grids[at as usize].bounds(o, st.cells[o]);
                    out.extend(lo..=hi);
                }
            }
        }
    }
    out
}

fn label_of(m: &Model, pred: impl Fn(&Node) -> bool) -> u32 {
    m.nodes.iter().position(pred).expect("node") as u32
}

const SHIFT: &str = "contract C {
  numeric y[0, 10] = 0;
  numeric x[0, 12] = 0;
  function f[1, 2](payable y : caller) { x = y + 5; }
}";

#[test]
fn assignment_image_is_shifted_and_clamped() {
    let m = source_model(SHIFT, "p", 1, "x", &[]);
    let l = label_of(&m, |n| matches!(n, Node::Assign { .. }));
    let Node::Assign { next, .. } = m.nodes[l as usize] else { unreachable!() };
    let p = coarse_at(&m, &[l]);
    let x = obj(&m, "x");
    for enum_limit in [0, 4096] {
        let opts = BuildOptions { enum_limit, ..BuildOptions::default() };
        let g = build(&m, &p, opts).unwrap();
        assert_eq!(covered(&p, &g, l, next, x), (5..=12).collect(), "enum_limit {enum_limit}");
    }
}

const BRANCH: &str = "contract C {
  numeric y[0, 9] = 0;
  numeric x[0, 2] = 0;
  function f[1, 2](payable y : caller) { if (y <= 4) x = 1; else x = 2; }
}";

#[test]
fn branch_splits_the_box() {
    let m = source_model(BRANCH, "p", 1, "x", &[]);
    let l = label_of(&m, |n| matches!(n, Node::If { .. }));
    let Node::If { then, els, .. } = m.nodes[l as usize] else { unreachable!() };
    let p = coarse_at(&m, &[l]);
    let y = obj(&m, "y");
    for enum_limit in [0, 4096] {
        let g = build(&m, &p, BuildOptions { enum_limit, ..BuildOptions::default() }).unwrap();
        assert_eq!(covered(&p, &g, l, then, y), (0..=4).collect());
        assert_eq!(covered(&p, &g, l, els, y), (5..=9).collect());
    }
}

#[test]
fn unit_boxes_have_one_successor_per_action_pair() {
    let m = desk_model("rps-correct");
    let g = build(&m, &Partition::unit(&m), BuildOptions::default()).unwrap();
    assert!((0..g.x_start.len() - 1).all(|d| g.successors(d).len() == 1));
    assert!((0..g.states.len()).all(|s| g.u_lo[s] == g.u_hi[s]));
}

#[test]
fn interval_division_by_a_range_with_zero_is_an_error() {
    let src = "contract C {
      numeric y[0, 3] = 0;
      numeric x[0, 3] = 0;
      function f[1, 2](payable y : caller) { if (y > 0) x = 3 / y; }
    }";
    let m = source_model(src, "p", 1, "x", &[]);
    let v = bounds(&m, &Partition::unit(&m), BuildOptions::default()).unwrap().0;
    let three = BigRational::from_integer(3.into());
    assert_eq!((&v.lower, &v.upper), (&three, &three));
    // A box at the division holds every valuation of its cells, so one that
    // straddles zero is rejected whether enumerated or propagated.
    let l = label_of(&m, |n| matches!(n, Node::Assign { .. }));
    let p = coarse_at(&m, &[l]);
    for enum_limit in [0, 4096] {
        let r = build(&m, &p, BuildOptions { enum_limit, ..BuildOptions::default() });
        assert!(matches!(r, Err(AbsError::DivisionByZero(x)) if x == l));
    }
}

fn exact(m: &Model) -> BigRational {
    exact_value(m, 2_000_000).unwrap().value
}

/// Bounds bracket the exact value at every step, tighten monotonically and
/// every skew is non-negative.
fn check_refinement_chain(name: &str, passes: usize) {
    let m = desk_model(name);
    let v = exact(&m);
    let mut part = Partition::initial(&m, 2);
    let mut prev: Option<(BigRational, BigRational)> = None;
    for _ in 0..passes {
        let game = build(&m, &part, BuildOptions::default()).unwrap();
        assert!(reverse_topological(&game).is_ok());
        let sol = solve(&game, BuildOptions::default().solver).unwrap();
        let (lo, hi) = (sol.lower[0].clone(), sol.upper[0].clone());
        assert!(lo <= v && v <= hi, "{name}: {lo} <= {v} <= {hi}");
        if let Some((plo, phi)) = &prev {
            assert!(plo <= &lo && hi <= *phi, "{name}: [{plo}, {phi}] then [{lo}, {hi}]");
        }
        assert!(min_skew(&game, &sol).is_none_or(|s| s >= BigRational::zero()));
        for s in 0..game.states.len() {
            assert!(sol.lower[s] <= sol.upper[s]);
        }
        let scores = label_scores(&game, &sol, m.lc.label_count());
        prev = Some((lo.clone(), hi.clone()));
        if lo == hi {
            break;
        }
        match choose_label(&part, &scores, true) {
            Some(l) => assert!(part.refine_label(l)),
            None => break,
        }
    }
}

#[test]
fn rps_refinement_is_sound_and_monotone() {
    check_refinement_chain("rps-correct", 10);
    check_refinement_chain("rps-buggy", 10);
}

#[test]
fn auction_refinement_is_sound_and_monotone() {
    check_refinement_chain("auction-buggy", 8);
}

#[test]
fn sale_refinement_is_sound_and_monotone() {
    check_refinement_chain("sale-buggy", 6);
}

#[test]
fn unit_partition_is_exact() {
    for name in ["rps-correct", "rps-buggy", "auction-buggy", "sale-correct"] {
        let m = desk_model(name);
        let e = exact_value(&m, 2_000_000).unwrap();
        let (b, _, _) = bounds(&m, &Partition::unit(&m), BuildOptions::default()).unwrap();
        assert_eq!((&b.lower, &b.upper), (&e.value, &e.value), "{name}");
        assert_eq!(b.states, e.states, "{name}");
    }
}

#[test]
fn rps_values() {
    // Oracle: backward induction over the explicit game.
    let third = |n: i64| BigRational::new(n.into(), 3.into());
    assert_eq!(exact(&desk_model("rps-correct")), third(10));
    assert_eq!(exact(&desk_model("rps-buggy")), third(30));
}

#[test]
fn arbitrary_partitions_bracket_the_value() {
    let m = desk_model("rps-buggy");
    let v = exact(&m);
    for g in [1, 2, 3] {
        let mut p = Partition::initial(&m, g);
        for l in (0..p.grids.len() as u32).step_by(3) {
            p.refine_label(l);
        }
        let (b, _, _) = bounds(&m, &p, BuildOptions::default()).unwrap();
        assert!(b.lower <= v && v <= b.upper, "g={g}");
    }
}

#[test]
fn analysis_stops_when_bounds_meet() {
    let m = desk_model("rps-correct");
    let sched = Schedule { granularity: 2, max_iters: 40, gap: BigRational::zero(), build: BuildOptions::default() };
    let a = analyze(&m, &sched);
    assert_eq!(a.verdict, Verdict::Converged);
    let last = &a.passes.last().unwrap().bounds;
    assert_eq!(last.lower, BigRational::new(10.into(), 3.into()));
    assert_eq!(last.lower, last.upper);
    assert!(a.passes.last().unwrap().refined.is_none());
}

#[test]
fn analysis_honours_gap_and_cap() {
    let m = desk_model("rps-correct");
    let wide = Schedule { granularity: 2, max_iters: 40, gap: BigRational::from_integer(100.into()), build: BuildOptions::default() };
    let a = analyze(&m, &wide);
    assert_eq!((a.verdict, a.passes.len()), (Verdict::GapReached, 1));
    let capped = Schedule { max_iters: 2, gap: BigRational::zero(), ..wide };
    let a = analyze(&m, &capped);
    assert_eq!((a.verdict, a.passes.len()), (Verdict::Capped, 2));
    let tiny = Schedule { build: BuildOptions { max_states: 10, ..BuildOptions::default() }, max_iters: 5, ..capped };
    let a = analyze(&m, &tiny);
    assert_eq!(a.verdict, Verdict::Capped);
    assert_eq!(a.error, Some(AbsError::TooManyStates(10)));
}

#[test]
fn choose_label_prefers_high_scores_then_small_labels() {
    let m = desk_model("rps-correct");
    let p = Partition::initial(&m, 2);
    let n = p.grids.len();
    let r = |x: i64| Some(BigRational::from_integer(x.into()));
    let mut scores = vec![None; n];
    scores[4] = r(3);
    scores[7] = r(3);
    scores[2] = r(1);
    assert_eq!(choose_label(&p, &scores, true), Some(4));
    let unit = Partition::unit(&m);
    assert_eq!(choose_label(&unit, &scores, true), None);
    let zero = vec![r(0); n];
    assert_eq!(choose_label(&p, &zero, false), None);
    assert_eq!(choose_label(&p, &zero, true), Some(0));
}
