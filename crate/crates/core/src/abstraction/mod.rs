//! Interval-partition abstraction of the contract game with skewness-driven
//! refinement.

mod build;
pub mod explicit;
mod grid;
mod interval;

use std::time::Instant;

use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{
    build, label_scores, local_imprecision, min_skew, skew, reverse_topological, solve, AKey, AState, AbstractGame, BuildOptions, Solution,
};
pub use grid::{object_ranges, Grid, Partition};
pub use interval::{DivByZero, Resolver, R};

use crate::cfg::Label;
use crate::model::Model;
use crate::semantics::SemanticsError;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AbsError {
    #[error("possible division by zero at label {0}")]
    DivisionByZero(Label),
    #[error("abstract game exceeds {0} states")]
    TooManyStates(usize),
    #[error("abstract game has a cycle")]
    Cycle,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Bounds from one abstraction pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueBounds {
    pub lower: BigRational,
    pub upper: BigRational,
    pub states: usize,
    pub elapsed: f64,
}

/// Outcome of one pass plus the label refined afterwards.
#[derive(Clone, Debug)]
pub struct Pass {
    pub bounds: ValueBounds,
    pub refined: Option<Label>,
    /// Average local imprecision per label.
    pub skews: Vec<Option<BigRational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    GapReached,
    Capped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::GapReached => "gap-reached",
            Verdict::Capped => "capped",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub granularity: u64,
    pub max_iters: usize,
    pub gap: BigRational,
    pub build: BuildOptions,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub passes: Vec<Pass>,
    pub verdict: Verdict,
    /// Set when a pass could not be completed.
    pub error: Option<AbsError>,
}

/// One pass: build both abstract games over `part` and solve them.
pub fn bounds(model: &Model, part: &Partition, opts: BuildOptions) -> Result<(ValueBounds, AbstractGame, Solution), AbsError> {
    let start = Instant::now();
    let game = build(model, part, opts)?;
    let sol = solve(&game, opts.solver)?;
    let b = ValueBounds {
        lower: sol.lower[0].clone(),
        upper: sol.upper[0].clone(),
        states: game.states.len(),
        elapsed: start.elapsed().as_secs_f64(),
    };
    Ok((b, game, sol))
}

/// Picks the label to refine: largest average skew, ties to the smallest
/// label, skipping labels whose grid is already unit.
pub fn choose_label(part: &Partition, skews: &[Option<BigRational>], gap_open: bool) -> Option<Label> {
    let mut order: Vec<(Label, &BigRational)> = skews
        .iter()
        .enumerate()
        .filter_map(|(l, s)| s.as_ref().map(|s| (l as Label, s)))
        .filter(|(_, s)| **s > BigRational::from_integer(0.into()))
        .collect();
    order.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(&b.0)));
    if let Some(&(l, _)) = order.iter().find(|(l, _)| !part.grids[*l as usize].is_unit()) {
        return Some(l);
    }
    if gap_open {
        return (0..part.grids.len()).find(|&l| !part.grids[l].is_unit()).map(|l| l as Label);
    }
    None
}

/// Refinement loop: pass, check, refine, repeat.
pub fn analyze(model: &Model, schedule: &Schedule) -> Analysis {
    analyze_with(model, schedule, |_| {})
}

/// As [`analyze`], reporting each pass as it completes.
pub fn analyze_with(model: &Model, schedule: &Schedule, mut on_pass: impl FnMut(&Pass)) -> Analysis {
    let mut part = Partition::initial(model, schedule.granularity);
    let mut passes: Vec<Pass> = Vec::new();
    loop {
        let (b, game, sol) = match bounds(model, &part, schedule.build) {
            Ok(x) => x,
            Err(e) => return Analysis { passes, verdict: Verdict::Capped, error: Some(e) },
        };
        let skews = label_scores(&game, &sol, model.lc.label_count());
        drop(game);
        let gap = &b.upper - &b.lower;
        let verdict = if b.lower == b.upper {
            Some(Verdict::Converged)
        } else if gap <= schedule.gap {
            Some(Verdict::GapReached)
        } else if passes.len() + 1 >= schedule.max_iters {
            Some(Verdict::Capped)
        } else {
            None
        };
        let refined = match verdict {
            Some(_) => None,
            None => choose_label(&part, &skews, true),
        };
        let pass = Pass { bounds: b, refined, skews };
        on_pass(&pass);
        passes.push(pass);
        if let Some(v) = verdict {
            return Analysis { passes, verdict: v, error: None };
        }
        match refined {
            Some(l) => {
                part.refine_label(l);
            }
            None => return Analysis { passes, verdict: Verdict::Converged, error: None },
        }
    }
}
