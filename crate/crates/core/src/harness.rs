//! Experiment drivers: pool training, evaluation and the training-size
//! study, with their reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::sorted_json;
use crate::domain::{AttributeKind, ComponentRole, Problem, RuleKind};
use crate::error::ContractViolation;
use crate::induction::{induce_from_sample, RulePool};
use crate::solver::{solve_problem, SolveError, SolveReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("problem {id} has no truth index, so it cannot be used for training or scoring")]
    NoTruth { id: String },
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Argument(String),
    #[error("cannot start worker pool: {0}")]
    Workers(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainSummary {
    pub pool: RulePool,
    pub samples: usize,
    /// Samples whose first two rows are identical.
    pub degenerate: usize,
}

impl TrainSummary {
    /// Rule kinds per (component role, attribute) with their sample counts.
    pub fn census(&self) -> BTreeMap<(ComponentRole, AttributeKind), Vec<(RuleKind, u64)>> {
        let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (k, n) in self.pool.entries() {
            out.entry((k.role, k.attribute)).or_default().push((k.kind, n));
        }
        out
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "trained on {} samples ({} with identical first rows); pool has {} rules\n",
            self.samples,
            self.degenerate,
            self.pool.len()
        );
        for ((role, attr), kinds) in self.census() {
            let list: Vec<String> = kinds.iter().map(|(k, n)| format!("{k} ({n})")).collect();
            let _ = writeln!(s, "  {:<10} {:<9} {}", role.name(), attr.name(), list.join(", "));
        }
        s
    }
}

fn require_truth(problems: &[Problem]) -> Result<(), HarnessError> {
    match problems.iter().find(|p| p.truth_index.is_none()) {
        Some(p) => Err(HarnessError::NoTruth { id: p.id.clone() }),
        None => Ok(()),
    }
}

/// Build the rule pool from solved samples.
pub fn train(problems: &[Problem]) -> Result<TrainSummary, HarnessError> {
    require_truth(problems)?;
    let inductions = problems.par_iter().map(induce_from_sample).collect::<Result<Vec<_>, _>>()?;
    let mut pool = RulePool::new();
    for ind in &inductions {
        pool.insert_all(&ind.rules);
    }
    Ok(TrainSummary { pool, samples: problems.len(), degenerate: inductions.iter().filter(|i| i.degenerate).count() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub abstained: usize,
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_config: BTreeMap<String, Tally>,
    /// Mean of the per-configuration accuracies.
    pub overall: f64,
    pub pool_size: usize,
    pub totals: Tally,
}

impl EvalReport {
    pub fn from_solves(solves: &[(String, SolveReport)], pool_size: usize) -> Self {
        let mut per_config: BTreeMap<String, Tally> = BTreeMap::new();
        let mut totals = Tally::default();
        for (config, r) in solves {
            for t in [per_config.entry(config.clone()).or_default(), &mut totals] {
                t.total += 1;
                t.correct += usize::from(r.is_correct());
                t.abstained += usize::from(r.abstained());
            }
        }
        let overall = if per_config.is_empty() {
            0.0
        } else {
            per_config.values().map(Tally::accuracy).sum::<f64>() / per_config.len() as f64
        };
        EvalReport { per_config, overall, pool_size, totals }
    }

    /// Aligned text table, one row per configuration plus the average.
    pub fn table(&self) -> String {
        let mut s =
            format!("{:<14} {:>8} {:>8} {:>10} {:>9}\n", "configuration", "correct", "total", "abstained", "accuracy");
        for (name, t) in &self.per_config {
            let _ = writeln!(
                s,
                "{:<14} {:>8} {:>8} {:>10} {:>8.2}%",
                name,
                t.correct,
                t.total,
                t.abstained,
                100.0 * t.accuracy()
            );
        }
        let t = &self.totals;
        let _ = writeln!(
            s,
            "{:<14} {:>8} {:>8} {:>10} {:>8.2}%",
            "average",
            t.correct,
            t.total,
            t.abstained,
            100.0 * self.overall
        );
        let _ = writeln!(s, "pool size: {}", self.pool_size);
        s
    }
}

/// A solve report for a problem the solver could not attempt.
fn abstention(p: &Problem) -> SolveReport {
    SolveReport {
        problem_id: p.id.clone(),
        chosen_index: None,
        scores: vec![0; p.candidates.len()],
        tied: Vec::new(),
        constraints: Vec::new(),
        feasible_rules: Vec::new(),
        truth_index: p.truth_index,
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| HarnessError::Workers(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Solve every problem (in parallel, `workers` threads or all cores) and
/// tally accuracy. Solve reports come back in input order. An empty pool
/// makes every problem an abstention.
pub fn evaluate(
    problems: &[Problem],
    pool: &RulePool,
    workers: Option<usize>,
) -> Result<(EvalReport, Vec<SolveReport>), HarnessError> {
    require_truth(problems)?;
    let solves: Vec<SolveReport> = with_workers(workers, || {
        problems
            .par_iter()
            .map(|p| match solve_problem(p, pool) {
                Ok(r) => r,
                Err(SolveError::EmptyPool) => abstention(p),
            })
            .collect()
    })?;
    let keyed: Vec<(String, SolveReport)> =
        problems.iter().zip(&solves).map(|(p, r)| (p.config.name().to_string(), r.clone())).collect();
    Ok((EvalReport::from_solves(&keyed, pool.len()), solves))
}

#[derive(Serialize)]
struct ProblemRecord<'a> {
    config: &'a str,
    record: &'static str,
    #[serde(flatten)]
    solve: &'a SolveReport,
}

#[derive(Serialize)]
struct ConfigRecord<'a> {
    accuracy: f64,
    config: &'a str,
    record: &'static str,
    #[serde(flatten)]
    tally: &'a Tally,
}

#[derive(Serialize)]
struct OverallRecord {
    accuracy: f64,
    pool_size: usize,
    record: &'static str,
    #[serde(flatten)]
    tally: Tally,
}

/// Machine-readable report: one JSON line per problem, then one per
/// configuration, then the overall line. Contains no timing, so equal
/// inputs give equal bytes.
pub fn report_records(problems: &[Problem], solves: &[SolveReport], report: &EvalReport) -> String {
    let mut s = String::new();
    for (p, r) in problems.iter().zip(solves) {
        s.push_str(&sorted_json(&ProblemRecord { config: p.config.name(), record: "problem", solve: r }));
        s.push('\n');
    }
    for (name, t) in &report.per_config {
        s.push_str(&sorted_json(&ConfigRecord { accuracy: t.accuracy(), config: name, record: "config", tally: t }));
        s.push('\n');
    }
    s.push_str(&sorted_json(&OverallRecord {
        accuracy: report.overall,
        pool_size: report.pool_size,
        record: "overall",
        tally: report.totals,
    }));
    s.push('\n');
    s
}

/// Split into a training part and a held-out tail of `eval_fraction`.
pub fn holdout_split(problems: &[Problem], eval_fraction: f64) -> Result<(&[Problem], &[Problem]), HarnessError> {
    if !(0.0..1.0).contains(&eval_fraction) || eval_fraction == 0.0 {
        return Err(HarnessError::Argument(format!("held-out fraction {eval_fraction} must lie in (0, 1)")));
    }
    let held = ((problems.len() as f64) * eval_fraction).round() as usize;
    let held = held.clamp(1, problems.len().saturating_sub(1).max(1));
    Ok(problems.split_at(problems.len() - held.min(problems.len())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkRow {
    pub size: usize,
    /// Overall accuracy per seed, in seed order.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub mean_pool_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<ShrinkRow>,
    pub eval_size: usize,
}

impl ShrinkTable {
    pub fn table(&self) -> String {
        let mut s = format!("held-out problems: {}\n{:>8} {:>9} {:>9}", self.eval_size, "size", "mean", "pool");
        for seed in &self.seeds {
            let _ = write!(s, " {:>9}", format!("seed {seed}"));
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:>8} {:>8.2}% {:>9.1}", r.size, 100.0 * r.mean, r.mean_pool_size);
            for a in &r.accuracies {
                let _ = write!(s, " {:>8.2}%", 100.0 * a);
            }
            s.push('\n');
        }
        s
    }

    /// Whether mean accuracy never drops as the training size grows.
    pub fn is_monotone(&self) -> bool {
        let mut rows: Vec<&ShrinkRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.size);
        rows.windows(2).all(|w| w[1].mean >= w[0].mean)
    }
}

/// Uniform subsample of `size` problems without replacement, in corpus order.
pub fn subsample(problems: &[Problem], size: usize, seed: u64) -> Result<Vec<Problem>, HarnessError> {
    if size > problems.len() {
        return Err(HarnessError::Argument(format!(
            "training size {size} exceeds the {} available problems",
            problems.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, problems.len(), size).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| problems[i].clone()).collect())
}

/// For each size and seed, train on a subsample of `train_set` and
/// evaluate on the fixed `eval_set`.
pub fn shrink(
    train_set: &[Problem],
    eval_set: &[Problem],
    sizes: &[usize],
    seeds: &[u64],
    workers: Option<usize>,
) -> Result<ShrinkTable, HarnessError> {
    if seeds.is_empty() || sizes.is_empty() {
        return Err(HarnessError::Argument("at least one size and one seed are required".into()));
    }
    if let Some(&too_big) = sizes.iter().find(|&&s| s > train_set.len()) {
        return Err(HarnessError::Argument(format!(
            "training size {too_big} exceeds the {} available problems",
            train_set.len()
        )));
    }
    let mut rows = Vec::new();
    for &size in sizes {
        let mut accuracies = Vec::new();
        let mut pools = 0usize;
        for &seed in seeds {
            let subset = subsample(train_set, size, seed)?;
            let summary = train(&subset)?;
            let (report, _) = evaluate(eval_set, &summary.pool, workers)?;
            accuracies.push(report.overall);
            pools += summary.pool.len();
        }
        let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
        rows.push(ShrinkRow { size, accuracies, mean, mean_pool_size: pools as f64 / seeds.len() as f64 });
    }
    Ok(ShrinkTable { seeds: seeds.to_vec(), rows, eval_size: eval_set.len() })
}
