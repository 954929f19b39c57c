//! End-to-end pipeline: source text and configuration in, report out.

use std::collections::BTreeMap;
use std::str::FromStr;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{analyze_with, AbsError, BuildOptions, Pass, Schedule, Verdict};
use crate::corpus::CorpusEntry;
use crate::frontend::{parse, parse_objective, validate, Diagnostic, FrontendError, ValidatedContract};
use crate::model::{Model, ModelError, PartySet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Path or corpus name, echoed in the report.
    pub contract: String,
    pub party: String,
    pub objective: String,
    pub parties: usize,
    pub granularity: u64,
    pub max_iters: usize,
    /// Target gap as an integer, decimal or fraction.
    pub gap: String,
    pub overrides: BTreeMap<String, (i64, i64)>,
    pub enum_limit: u64,
    pub max_states: usize,
}

impl AnalysisConfig {
    pub fn new(contract: &str, party: &str, objective: &str, parties: usize) -> Self {
        let d = BuildOptions::default();
        Self {
            contract: contract.into(),
            party: party.into(),
            objective: objective.into(),
            parties,
            granularity: 2,
            max_iters: 20,
            gap: "0".into(),
            overrides: BTreeMap::new(),
            enum_limit: d.enum_limit,
            max_states: d.max_states,
        }
    }

    /// Preset configuration of a bundled contract.
    pub fn corpus(entry: &CorpusEntry, declared_ranges: bool) -> Self {
        let p = &entry.preset;
        let mut c = Self::new(entry.name, p.party, p.objective, p.k);
        c.granularity = p.granularity;
        c.max_iters = p.max_iters;
        if !declared_ranges {
            c.overrides = p.desk.iter().map(|&(n, lo, hi)| (n.to_string(), (lo, hi))).collect();
        }
        c
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Parse(FrontendError),
    #[error("contract has {} error(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Objective(FrontendError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Parses a non-negative integer, decimal (`0.25`) or fraction (`1/3`).
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("not a number: '{s}'");
    let r = if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        BigRational::new(num, BigInt::from(10u32).pow(frac.len() as u32))
    } else {
        BigRational::from_str(s).map_err(|_| bad())?
    };
    Ok(r)
}

/// Parse, validate and compile with the configured parties and overrides.
pub fn prepare(source: &str, config: &AnalysisConfig) -> Result<(Model, ValidatedContract), PipelineError> {
    let ast = parse(source).map_err(PipelineError::Parse)?;
    let contract = validate(&ast).map_err(PipelineError::Invalid)?;
    let objective = parse_objective(&config.objective, &contract.ast).map_err(PipelineError::Objective)?;
    let parties = PartySet::new(&contract.ast, config.parties, &config.party)?;
    let model = Model::new(&contract, parties, &objective, &config.overrides)?;
    Ok((model, contract))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub states: usize,
    /// Exact bounds as `n` or `n/d`.
    pub lower: String,
    pub upper: String,
    pub lower_approx: f64,
    pub upper_approx: f64,
    pub elapsed: f64,
    /// Label refined after this pass.
    pub refined: Option<u32>,
}

impl IterationRecord {
    pub fn bounds(&self) -> (BigRational, BigRational) {
        (BigRational::from_str(&self.lower).unwrap(), BigRational::from_str(&self.upper).unwrap())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub warnings: Vec<String>,
    pub iterations: Vec<IterationRecord>,
    pub verdict: Verdict,
    pub error: Option<String>,
}

impl AnalysisReport {
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn final_bounds(&self) -> Option<(BigRational, BigRational)> {
        self.iterations.last().map(IterationRecord::bounds)
    }

    /// Lower bounds never decrease and upper bounds never increase.
    pub fn is_monotone(&self) -> bool {
        let b: Vec<_> = self.iterations.iter().map(IterationRecord::bounds).collect();
        b.windows(2).all(|w| w[0].0 <= w[1].0 && w[1].1 <= w[0].1)
    }

    /// The report with timing fields zeroed, for determinism checks.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for it in &mut r.iterations {
            it.elapsed = 0.0;
        }
        r
    }
}

pub fn record(pass: &Pass) -> IterationRecord {
    let b = &pass.bounds;
    let approx = |r: &BigRational| r.to_f64().unwrap_or(if r.is_negative() { f64::MIN } else { f64::MAX });
    IterationRecord {
        states: b.states,
        lower: b.lower.to_string(),
        upper: b.upper.to_string(),
        lower_approx: approx(&b.lower),
        upper_approx: approx(&b.upper),
        elapsed: b.elapsed,
        refined: pass.refined,
    }
}

pub fn run(source: &str, config: &AnalysisConfig) -> Result<AnalysisReport, PipelineError> {
    run_with(source, config, |_| {})
}

/// As [`run`], calling `on_iteration` after every pass.
pub fn run_with(
    source: &str,
    config: &AnalysisConfig,
    mut on_iteration: impl FnMut(&IterationRecord),
) -> Result<AnalysisReport, PipelineError> {
    let gap = parse_rational(&config.gap).map_err(PipelineError::Config)?;
    if gap < BigRational::zero() {
        return Err(PipelineError::Config("gap must be non-negative".into()));
    }
    if config.granularity == 0 || config.max_iters == 0 {
        return Err(PipelineError::Config("granularity and max-iters must be positive".into()));
    }
    let (model, contract) = prepare(source, config)?;
    let schedule = Schedule {
        granularity: config.granularity,
        max_iters: config.max_iters,
        gap,
        build: BuildOptions { enum_limit: config.enum_limit, max_states: config.max_states, ..BuildOptions::default() },
    };
    let analysis = analyze_with(&model, &schedule, |p| on_iteration(&record(p)));
    Ok(AnalysisReport {
        config: config.clone(),
        warnings: contract.warnings.iter().map(|w| w.render(&config.contract)).collect(),
        iterations: analysis.passes.iter().map(record).collect(),
        verdict: analysis.verdict,
        error: analysis.error.as_ref().map(AbsError::to_string),
    })
}
