//! Acceptance checks, one PASS/FAIL line per criterion. Runs as a plain
//! binary so the lines are always printed; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rpm_core::domain::{AttributeKind, Code, Configuration, Panel, Problem, RuleKind};
use rpm_core::generator::{generate_corpus, GenSpec, Scheme};
use rpm_core::harness::{evaluate, shrink, train};
use rpm_core::induction::{classify_rule, least_squares_induce};
use rpm_core::perception::Perceiver;
use rpm_core::render::{angle_rng, render_panel, RenderOptions};

const THETA_TOL: f64 = 1e-9;
const ORACLE_INSTANCES: usize = 10_000;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const PANELS_PER_CONFIG: usize = 1_000;
const PERCEPTION_BUDGET: Duration = Duration::from_secs(60);
const NOISE_FREE_MIN: f64 = 0.995;
const GRID_MIN: f64 = 0.85;
const SHRINK_GAP_MAX: f64 = 0.05;
const SUITE_BUDGET: Duration = Duration::from_secs(300);

type Check = Box<dyn Fn() -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Up cycle `S a = (a2, a3, a1)`, down cycle its transpose.
fn shift(a: [f64; 3], up: bool) -> [f64; 3] {
    if up {
        [a[1], a[2], a[0]]
    } else {
        [a[2], a[0], a[1]]
    }
}

/// Full-rank design: the first two columns are not parallel.
fn independent(a1: [f64; 3], a2: [f64; 3]) -> bool {
    let cross = [a1[1] * a2[2] - a1[2] * a2[1], a1[2] * a2[0] - a1[0] * a2[2], a1[0] * a2[1] - a1[1] * a2[0]];
    dot(cross, cross) > 1e-9
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Closed-form instance of `family`: columns and the expected (θ, φ, kind).
type Instance = ([f64; 3], [f64; 3], [f64; 3], [f64; 2], [f64; 3], RuleKind);

fn draw_instance(family: usize, rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let v = |rng: &mut ChaCha8Rng| rng.gen_range(0..10) as f64;
        match family {
            // Progression a3 = 2 a2 − a1.
            0 => {
                let a1 = [v(rng), v(rng), v(rng)];
                let d = [0, 1, 2].map(|_| rng.gen_range(-3..=3) as f64);
                let a2 = [0, 1, 2].map(|i| a1[i] + d[i]);
                let a3 = [0, 1, 2].map(|i| 2.0 * a2[i] - a1[i]);
                if independent(a1, a2) {
                    return (a1, a2, a3, [-1.0, 2.0], [0.0; 3], RuleKind::Progression);
                }
            }
            // Arithmetic a3 = a1 ± a2.
            1 | 2 => {
                let plus = family == 1;
                let (a1, a2) = ([v(rng), v(rng), v(rng)], [v(rng), v(rng), v(rng)]);
                let sign = if plus { 1.0 } else { -1.0 };
                let a3 = [0, 1, 2].map(|i| a1[i] + sign * a2[i]);
                let kind = if plus { RuleKind::ArithmeticPlus } else { RuleKind::ArithmeticMinus };
                if independent(a1, a2) && a1 != a2 {
                    return (a1, a2, a3, [1.0, sign], [0.0; 3], kind);
                }
            }
            // Distribute three: rows are cyclic shifts of three distinct values.
            _ => {
                let up = family == 3;
                let a1 = [v(rng), v(rng), v(rng)];
                if a1[0] == a1[1] || a1[1] == a1[2] || a1[0] == a1[2] {
                    continue;
                }
                let a2 = shift(a1, up);
                let a3 = shift(a2, up);
                let (p, s) = (dot(a1, a1), dot(a1, shift(a1, up)));
                let t = s / (p + s);
                let st = shift(shift(a1, up), up);
                let phi = [0, 1, 2].map(|i| st[i] - t * (a1[i] + a2[i]));
                let kind = if up { RuleKind::DistributeThreeUp } else { RuleKind::DistributeThreeDown };
                return (a1, a2, a3, [t, t], phi, kind);
            }
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let names = ["progression", "arithmetic_plus", "arithmetic_minus", "distribute_three_up", "distribute_three_down"];
    let mut worst = 0.0f64;
    let mut misclassified = 0usize;
    for family in 0..names.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + family as u64);
        for _ in 0..ORACLE_INSTANCES {
            let (a1, a2, a3, theta, phi, kind) = draw_instance(family, &mut rng);
            let fit = least_squares_induce(a1, a2, a3);
            worst = worst.max(max_diff(&fit.theta, &theta)).max(max_diff(&fit.phi, &phi));
            misclassified += usize::from(fit.rank != 2 || classify_rule(&fit, a1, a2, a3) != kind);
        }
    }
    // Constant instances with a non-zero column.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut constants = 0;
    while constants < ORACLE_INSTANCES {
        let a = [0, 1, 2].map(|_| rng.gen_range(0..10) as f64);
        if a == [0.0; 3] {
            continue;
        }
        constants += 1;
        let fit = least_squares_induce(a, a, a);
        worst = worst.max(max_diff(&fit.theta, &[0.5, 0.5])).max(max_diff(&fit.phi, &[0.0; 3]));
        misclassified += usize::from(classify_rule(&fit, a, a, a) != RuleKind::Constant);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= THETA_TOL && misclassified == 0 && elapsed < ORACLE_BUDGET,
        format!(
            "{} instances x 6 families, max |Δθ|,|Δφ| = {worst:.2e} (tol {THETA_TOL:.0e}), misclassified {misclassified}, {:.2} s",
            ORACLE_INSTANCES,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let opts = RenderOptions::default();
    let mut wrong = 0usize;
    let mut total = 0usize;
    for (ci, config) in Configuration::ALL.into_iter().enumerate() {
        let per_problem = 16;
        let spec =
            GenSpec::new(vec![config], Scheme::Raven, 0.3, 200 + ci as u64, PANELS_PER_CONFIG.div_ceil(per_problem));
        let problems = generate_corpus(&spec).expect("generator");
        let panels: Vec<(String, usize, Panel)> = problems
            .iter()
            .flat_map(|p| {
                p.context
                    .iter()
                    .chain(&p.candidates)
                    .enumerate()
                    .map(move |(i, panel)| (p.id.clone(), i, panel.clone()))
            })
            .take(PANELS_PER_CONFIG)
            .collect();
        let layout = config.layout();
        let perceiver = Perceiver::new(layout.clone(), opts);
        wrong += panels
            .par_iter()
            .filter(|(id, i, panel)| {
                let r = render_panel(panel, &layout, &mut angle_rng(id, *i as u64), opts).expect("render");
                perceiver.perceive(&r).ok().as_ref() != Some(panel)
            })
            .count();
        total += panels.len();
    }
    let elapsed = start.elapsed();
    outcome(
        wrong == 0 && total == 7 * PANELS_PER_CONFIG && elapsed < PERCEPTION_BUDGET,
        format!(
            "{}/{} panels recovered exactly ({:.2}%), {:.1} s",
            total - wrong,
            total,
            100.0 * (total - wrong) as f64 / total as f64,
            elapsed.as_secs_f64()
        ),
    )
}

fn corpus(configs: &[Configuration], noise: f64, seed: u64, count: usize) -> Vec<Problem> {
    generate_corpus(&GenSpec::new(configs.to_vec(), Scheme::IRaven, noise, seed, count)).expect("generator")
}

fn train_and_eval(configs: &[Configuration], noise: f64) -> (f64, String) {
    let training = corpus(configs, noise, 300, 500);
    let test = corpus(configs, noise, 301, 2_000);
    let pool = train(&training).expect("train").pool;
    let (report, _) = evaluate(&test, &pool, None).expect("eval");
    let per: Vec<String> = report.per_config.iter().map(|(k, t)| format!("{k} {:.2}%", 100.0 * t.accuracy())).collect();
    let acc = report.totals.accuracy();
    (acc, format!("{:.2}% ({}/{}; {})", 100.0 * acc, report.totals.correct, report.totals.total, per.join(", ")))
}

fn criterion_3() -> Outcome {
    let configs = [Configuration::Center, Configuration::LeftRight, Configuration::UpDown, Configuration::OutInCenter];
    let (acc, detail) = train_and_eval(&configs, 0.0);
    outcome(acc >= NOISE_FREE_MIN, format!("{detail}, need >= {:.1}%", 100.0 * NOISE_FREE_MIN))
}

fn criterion_4() -> Outcome {
    let configs = [Configuration::Grid2x2, Configuration::Grid3x3, Configuration::OutInGrid];
    let (acc, detail) = train_and_eval(&configs, 0.3);
    outcome(acc >= GRID_MIN, format!("{detail}, need >= {:.1}%", 100.0 * GRID_MIN))
}

fn criterion_5() -> Outcome {
    let training = corpus(&Configuration::ALL, 0.3, 500, 8_192);
    let held_out = corpus(&Configuration::ALL, 0.3, 501, 2_100);
    let sizes = [128, 512, 2_048, 8_192];
    let table = shrink(&training, &held_out, &sizes, &[1, 2, 3, 4, 5], None).expect("shrink");
    let means: Vec<String> = table.rows.iter().map(|r| format!("{}: {:.2}%", r.size, 100.0 * r.mean)).collect();
    let gap = table.rows.last().expect("rows").mean - table.rows[0].mean;
    outcome(
        gap.abs() <= SHRINK_GAP_MAX && table.is_monotone(),
        format!(
            "mean accuracy {}; gap {:.2} points (max {:.0}); monotone {}",
            means.join(", "),
            100.0 * gap,
            100.0 * SHRINK_GAP_MAX,
            table.is_monotone()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let (mut checked, mut bad, mut zero_designs) = (0, 0, 0);
    for _ in 0..ORACLE_INSTANCES {
        // A constant row matrix: every row repeats one value.
        let a = [0, 1, 2].map(|_| rng.gen_range(0..10) as f64);
        if a == [0.0; 3] {
            zero_designs += 1;
            continue;
        }
        checked += 1;
        let fit = least_squares_induce(a, a, a);
        let ok =
            fit.rank == 1 && fit.theta.iter().all(|t| t.is_finite()) && max_diff(&fit.theta, &[0.5, 0.5]) <= THETA_TOL;
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0 && checked > 0,
        format!("{checked} constant instances: rank 1 with θ = [0.5, 0.5] in all but {bad}; {zero_designs} all-zero designs skipped"),
    )
}

fn criterion_7() -> Outcome {
    let problems = corpus(&Configuration::ALL, 0.3, 700, 1_000);
    let mut unbalanced = 0usize;
    let mut vote_hits = 0.0;
    for p in &problems {
        let truth = p.truth().expect("truth");
        let mut votes = [0usize; 8];
        for (ci, comp) in truth.0.iter().enumerate() {
            for kind in AttributeKind::REASONED {
                let values: Vec<Code> = p.candidates.iter().map(|c| c.component(ci).get(kind)).collect();
                let mut freq: BTreeMap<Code, usize> = BTreeMap::new();
                for v in &values {
                    *freq.entry(*v).or_default() += 1;
                }
                if freq.len() > 1 && freq[&comp.get(kind)] != 4 {
                    unbalanced += 1;
                }
                for (i, v) in values.iter().enumerate() {
                    votes[i] += freq[v];
                }
            }
        }
        let best = *votes.iter().max().expect("eight candidates");
        let leaders: Vec<usize> = (0..8).filter(|&i| votes[i] == best).collect();
        if leaders.contains(&p.truth_index.expect("truth")) {
            vote_hits += 1.0 / leaders.len() as f64;
        }
    }
    let rate = vote_hits / problems.len() as f64;
    outcome(
        unbalanced == 0 && rate <= 0.125 + 1e-9,
        format!(
            "{} candidate sets, {unbalanced} permuted attributes off the 4-of-8 split; majority vote expected hit rate {:.2}% (chance 12.50%)",
            problems.len(),
            100.0 * rate
        ),
    )
}

fn rpm(args: &[&str], dir: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_rpm"))
        .args(args)
        .current_dir(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn pipeline(dir: &Path) -> Option<Vec<Vec<u8>>> {
    let steps: [&[&str]; 3] = [
        &[
            "generate", "--config", "all", "--scheme", "iraven", "--count", "700", "--seed", "8", "--noise", "0.3",
            "--out", "gen",
        ],
        &["train", "--corpus", "gen/corpus.jsonl", "--out", "pool.txt"],
        &["eval", "--corpus", "gen/corpus.jsonl", "--pool", "pool.txt", "--report", "report.jsonl"],
    ];
    for step in steps {
        if !rpm(step, dir) {
            return None;
        }
    }
    ["gen/corpus.jsonl", "gen/corpus.jsonl.manifest", "pool.txt", "report.jsonl"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).ok())
        .collect()
}

fn criterion_8(suite_start: Instant) -> Outcome {
    let (a, b) = (tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir"));
    let (ra, rb) = (pipeline(a.path()), pipeline(b.path()));
    let identical = matches!((&ra, &rb), (Some(x), Some(y)) if x == y);
    let elapsed = suite_start.elapsed();
    outcome(
        identical && elapsed < SUITE_BUDGET,
        format!(
            "generate+train+eval twice: {}; suite wall-clock {:.1} s (budget {} s)",
            match (&ra, &rb) {
                (Some(_), Some(_)) if identical => "corpus, manifest, pool and report byte-identical",
                (Some(_), Some(_)) => "outputs differ",
                _ => "a CLI step failed",
            },
            elapsed.as_secs_f64(),
            SUITE_BUDGET.as_secs()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, Check); 8] = [
        ("closed-form oracle equivalence", Box::new(criterion_1)),
        ("perception round trip", Box::new(criterion_2)),
        ("noise-free end-to-end", Box::new(criterion_3)),
        ("grids with noise", Box::new(criterion_4)),
        ("shrunk-training robustness", Box::new(criterion_5)),
        ("rank handling", Box::new(criterion_6)),
        ("candidate impartiality", Box::new(criterion_7)),
        ("determinism", Box::new(move || criterion_8(start))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
