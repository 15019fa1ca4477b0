//! Procedural problem generation.
//!
//! Every problem draws from its own ChaCha8 stream derived from
//! `(seed, index)`, so a corpus is a pure function of its [`GenSpec`] no
//! matter how many workers build it.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    popcount, Annotation, AttributeKind, AttributeMatrix, Code, Component, ComponentValues, Configuration, Label,
    Layout, Panel, Problem, RuleKind, ValueRange,
};
use crate::induction::{
    check_consistency, classify_matrix, cycle, detect_position_rule, least_squares_induce, rotate_mask, Rule,
};
use crate::solver::predict_attribute;

pub const DEFAULT_NOISE: f64 = 0.3;
/// Rejection-sampling attempts before the stream is reseeded.
pub const RETRY_BOUND: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Distractors each shift one attribute of the truth.
    Raven,
    /// Distractors are the leaves of a three-level attribute permutation tree.
    IRaven,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "raven" => Ok(Scheme::Raven),
            "iraven" => Ok(Scheme::IRaven),
            _ => Err(format!("unknown scheme `{s}` (expected raven or iraven)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Problems cycle through these configurations by index.
    pub configs: Vec<Configuration>,
    pub scheme: Scheme,
    pub uniformity_noise: f64,
    pub seed: u64,
    pub count: usize,
}

impl GenSpec {
    pub fn new(configs: Vec<Configuration>, scheme: Scheme, uniformity_noise: f64, seed: u64, count: usize) -> Self {
        GenSpec { configs, scheme, uniformity_noise, seed, count }
    }

    pub fn config_for(&self, index: usize) -> Configuration {
        self.configs[index % self.configs.len()]
    }

    pub fn problem_id(&self, index: usize) -> String {
        format!("s{}-{:06}", self.seed, index)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("only {available} distinct single-attribute distractors exist, 7 are needed")]
    CandidateSpace { available: usize },
    #[error("only {available} attributes can be permuted, 3 are needed")]
    TooFewAttributes { available: usize },
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
}

/// Independent stream for problem `index` under `seed`.
pub fn problem_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per component, the label of each reasoned attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAssignment {
    pub labels: Vec<BTreeMap<AttributeKind, Label>>,
}

impl RuleAssignment {
    pub fn label(&self, component: usize, kind: AttributeKind) -> Label {
        self.labels[component][&kind]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Constant,
    Progression,
    Arithmetic,
    DistributeThree,
}

const PROGRESSION_STEPS: [Code; 4] = [-2, -1, 1, 2];

fn progression_steps(range: ValueRange) -> Vec<Code> {
    PROGRESSION_STEPS
        .iter()
        .copied()
        .filter(|d| {
            let starts = range.values().filter(|&x| range.contains(x + 2 * d)).count();
            starts >= 2
        })
        .collect()
}

fn arithmetic_rows(kind: RuleKind, range: ValueRange) -> Vec<(Code, Code)> {
    let lo_y = range.lo.max(1);
    let mut out = Vec::new();
    for x in range.values() {
        for y in lo_y..=range.hi {
            let z = if kind == RuleKind::ArithmeticPlus { x + y } else { x - y };
            if range.contains(z) {
                out.push((x, y));
            }
        }
    }
    out
}

fn has_independent_pair(rows: &[(Code, Code)]) -> bool {
    rows.iter().any(|&(x1, y1)| rows.iter().any(|&(x2, y2)| x1 * y2 != x2 * y1))
}

fn family_feasible(family: Family, kind: AttributeKind, range: ValueRange, slots: u32) -> bool {
    if kind == AttributeKind::Position {
        return match family {
            Family::Constant => true,
            Family::Progression => slots >= 3,
            Family::Arithmetic => slots >= 2,
            Family::DistributeThree => (1 << slots) > 3,
        };
    }
    match family {
        Family::Constant => !range.is_empty(),
        Family::Progression => !progression_steps(range).is_empty(),
        Family::Arithmetic => {
            kind != AttributeKind::Type
                && (has_independent_pair(&arithmetic_rows(RuleKind::ArithmeticPlus, range))
                    || has_independent_pair(&arithmetic_rows(RuleKind::ArithmeticMinus, range)))
        }
        Family::DistributeThree => range.len() >= 3,
    }
}

fn pick_kind(family: Family, kind: AttributeKind, range: ValueRange, slots: u32, rng: &mut ChaCha8Rng) -> RuleKind {
    let coin = rng.gen_bool(0.5);
    match family {
        Family::Constant => RuleKind::Constant,
        Family::Progression if kind == AttributeKind::Position => {
            let mut offsets: Vec<u32> = [1, 2, slots - 1, slots - 2]
                .into_iter()
                .filter(|&k| k >= 1 && k < slots && (2 * k) % slots != 0)
                .collect();
            offsets.sort_unstable();
            offsets.dedup();
            RuleKind::PositionShift(*offsets.choose(rng).expect("slots >= 3") as u8)
        }
        Family::Progression => RuleKind::Progression,
        Family::Arithmetic if kind == AttributeKind::Position => {
            if coin {
                RuleKind::PositionUnion
            } else {
                RuleKind::PositionDifference
            }
        }
        Family::Arithmetic => {
            let plus = has_independent_pair(&arithmetic_rows(RuleKind::ArithmeticPlus, range));
            let minus = has_independent_pair(&arithmetic_rows(RuleKind::ArithmeticMinus, range));
            if plus && (coin || !minus) {
                RuleKind::ArithmeticPlus
            } else {
                RuleKind::ArithmeticMinus
            }
        }
        Family::DistributeThree => {
            if coin {
                RuleKind::DistributeThreeUp
            } else {
                RuleKind::DistributeThreeDown
            }
        }
    }
}

fn sample_rule(kind: AttributeKind, comp: &Component, rng: &mut ChaCha8Rng) -> RuleKind {
    let range = comp.range(kind);
    let families: Vec<Family> = [Family::Constant, Family::Progression, Family::Arithmetic, Family::DistributeThree]
        .into_iter()
        .filter(|&f| family_feasible(f, kind, range, comp.slot_count()))
        .collect();
    let family = *families.choose(rng).expect("constant is always feasible");
    pick_kind(family, kind, range, comp.slot_count(), rng)
}

/// Choose a rule (or noise / irrelevant marker) for every reasoned attribute
/// of every component.
pub fn sample_rule_assignment(layout: &Layout, uniformity_noise: f64, rng: &mut ChaCha8Rng) -> RuleAssignment {
    let labels = layout
        .components
        .iter()
        .map(|comp| {
            let mut m = BTreeMap::new();
            if comp.has_variable_layout() {
                let number_governs = rng.gen_bool(0.5);
                let (governed, free) = if number_governs {
                    (AttributeKind::Number, AttributeKind::Position)
                } else {
                    (AttributeKind::Position, AttributeKind::Number)
                };
                m.insert(governed, Label::Rule(sample_rule(governed, comp, rng)));
                m.insert(free, Label::Irrelevant);
            } else {
                m.insert(AttributeKind::Number, Label::Rule(RuleKind::Constant));
                m.insert(AttributeKind::Position, Label::Rule(RuleKind::Constant));
            }
            for kind in [AttributeKind::Type, AttributeKind::Size, AttributeKind::Color] {
                let rule = sample_rule(kind, comp, rng);
                // Noise varies entities within a panel, so a lone entity has none.
                let noisy = kind != AttributeKind::Type
                    && comp.slot_count() > 1
                    && comp.range(kind).len() >= 2
                    && uniformity_noise > 0.0
                    && rng.gen_bool(uniformity_noise.min(1.0));
                m.insert(kind, if noisy { Label::Noise } else { Label::Rule(rule) });
            }
            m
        })
        .collect();
    RuleAssignment { labels }
}

type Rows = [[Code; 3]; 3];

fn columns(rows: &Rows) -> [[Code; 3]; 3] {
    [0, 1, 2].map(|j| [rows[0][j], rows[1][j], rows[2][j]])
}

fn from_columns(a1: [Code; 3], a2: [Code; 3], a3: [Code; 3]) -> Rows {
    [0, 1, 2].map(|i| [a1[i], a2[i], a3[i]])
}

fn random_mask(rng: &mut ChaCha8Rng, slots: u32) -> Code {
    rng.gen_range(1..(1 << slots))
}

/// Uniformly random mask with exactly `count` bits set.
pub fn random_mask_with_count(rng: &mut ChaCha8Rng, slots: u32, count: Code) -> Code {
    let mut idx: Vec<u32> = (0..slots).collect();
    idx.shuffle(rng);
    idx.iter().take(count as usize).fold(0, |m, &i| m | (1 << i))
}

fn draw_scalar_once(rule: RuleKind, range: ValueRange, rng: &mut ChaCha8Rng) -> Rows {
    let pick = |rng: &mut ChaCha8Rng| rng.gen_range(range.lo..=range.hi);
    match rule {
        RuleKind::Constant => [0, 1, 2].map(|_| {
            let x = pick(rng);
            [x, x, x]
        }),
        RuleKind::Progression => {
            let steps = progression_steps(range);
            let d = *steps.choose(rng).expect("feasible progression");
            let starts: Vec<Code> = range.values().filter(|&x| range.contains(x + 2 * d)).collect();
            [0, 1, 2].map(|_| {
                let x = *starts.choose(rng).unwrap();
                [x, x + d, x + 2 * d]
            })
        }
        RuleKind::ArithmeticPlus | RuleKind::ArithmeticMinus => {
            let options = arithmetic_rows(rule, range);
            [0, 1, 2].map(|_| {
                let (x, y) = *options.choose(rng).expect("feasible arithmetic");
                let z = if rule == RuleKind::ArithmeticPlus { x + y } else { x - y };
                [x, y, z]
            })
        }
        RuleKind::DistributeThreeUp | RuleKind::DistributeThreeDown => {
            let values: Vec<Code> = range.values().collect();
            let chosen: Vec<Code> = values.choose_multiple(rng, 3).copied().collect();
            let a1 = [chosen[0], chosen[1], chosen[2]];
            let a2 = cycle(rule, a1);
            from_columns(a1, a2, cycle(rule, a2))
        }
        _ => unreachable!("scalar attributes never carry {rule}"),
    }
}

fn draw_position_once(rule: RuleKind, slots: u32, rng: &mut ChaCha8Rng) -> Rows {
    let full = (1 << slots) - 1;
    match rule {
        RuleKind::Constant => [0, 1, 2].map(|_| {
            let m = random_mask(rng, slots);
            [m, m, m]
        }),
        RuleKind::PositionShift(k) => [0, 1, 2].map(|_| {
            let m = rng.gen_range(1..full);
            let k = u32::from(k);
            [m, rotate_mask(m, k, slots), rotate_mask(m, 2 * k, slots)]
        }),
        RuleKind::PositionUnion => [0, 1, 2].map(|_| {
            let a = rng.gen_range(1..full);
            let rest = full & !a;
            let mut b = random_mask(rng, slots) & rest;
            if b == 0 {
                b = rest & rest.wrapping_neg();
            }
            [a, b, a | b]
        }),
        RuleKind::PositionDifference => [0, 1, 2].map(|_| {
            let a = loop {
                let a = random_mask(rng, slots);
                if popcount(a) >= 2 {
                    break a;
                }
            };
            let b = loop {
                let b = random_mask(rng, slots) & a;
                if b != 0 && b != a {
                    break b;
                }
            };
            [a, b, a & !b]
        }),
        RuleKind::DistributeThreeUp | RuleKind::DistributeThreeDown => {
            let mut masks: Vec<Code> = (1..=full).collect();
            masks.shuffle(rng);
            let a1 = [masks[0], masks[1], masks[2]];
            let a2 = cycle(rule, a1);
            from_columns(a1, a2, cycle(rule, a2))
        }
        _ => unreachable!("position never carries {rule}"),
    }
}

/// Whether some other rule also explains rows 1 and 2 of `m` but completes
/// row 3 differently.
fn ambiguous(rule: RuleKind, m: &AttributeMatrix, answer: Code) -> bool {
    let shifts = (1..m.slots.max(1)).map(|k| RuleKind::PositionShift(k as u8));
    [
        RuleKind::Constant,
        RuleKind::Progression,
        RuleKind::ArithmeticPlus,
        RuleKind::ArithmeticMinus,
        RuleKind::DistributeThreeUp,
        RuleKind::DistributeThreeDown,
        RuleKind::PositionUnion,
        RuleKind::PositionDifference,
    ]
    .into_iter()
    .chain(shifts)
    .filter(|&k| k != rule)
    .map(|k| Rule::new(m.kind, k))
    .any(|r| check_consistency(&r, m) && predict_attribute(&r, m).is_ok_and(|v| v != answer))
}

/// Rows realising `rule`, verified by the classifier: the completed matrix
/// must classify as `rule`, non-constant rules must give a full-rank
/// design, and no other rule may fit rows 1 and 2 yet predict a different
/// answer. Rejection sampling, reseeding the stream after every
/// [`RETRY_BOUND`] failures.
pub fn draw_rule_rows(rule: RuleKind, kind: AttributeKind, comp: &Component, rng: &mut ChaCha8Rng) -> Rows {
    let range = comp.range(kind);
    let slots = comp.slot_count();
    let mut attempts = 0;
    loop {
        let rows = if kind == AttributeKind::Position {
            draw_position_once(rule, slots, rng)
        } else {
            draw_scalar_once(rule, range, rng)
        };
        let [a1, a2, a3] = columns(&rows);
        let ok = if kind == AttributeKind::Position {
            detect_position_rule(a1, a2, a3, slots) == Ok(rule)
        } else {
            let f = |v: [Code; 3]| v.map(|x| x as f64);
            let fit = least_squares_induce(f(a1), f(a2), f(a3));
            let m = AttributeMatrix::from_rows(kind, slots, range, rows);
            classify_matrix(&m) == Ok(rule) && (rule == RuleKind::Constant || fit.rank == 2)
        };
        let m = AttributeMatrix::from_rows(kind, slots, range, rows);
        let mut query = m.clone();
        query.cells[2][2] = None;
        if ok && !ambiguous(rule, &query, rows[2][2]) {
            return rows;
        }
        attempts += 1;
        if attempts % RETRY_BOUND == 0 {
            *rng = ChaCha8Rng::seed_from_u64(rng.gen());
        }
    }
}

/// Which attribute tier a perturbation comes from; lower tiers are used first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Tier {
    Governed,
    Noise,
    Irrelevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perturbable {
    pub component: usize,
    pub kind: AttributeKind,
    tier: Tier,
}

fn alternatives(layout: &Layout, truth: &Panel, p: &Perturbable) -> Vec<Code> {
    let comp = &layout.components[p.component];
    let v = truth.component(p.component);
    match p.kind {
        AttributeKind::Position => {
            let n = v.number;
            comp.range(AttributeKind::Position).values().filter(|&m| m != v.position && popcount(m) == n).collect()
        }
        kind => comp.range(kind).values().filter(|&x| x != v.get(kind)).collect(),
    }
}

fn perturbables(layout: &Layout, labels: &RuleAssignment, truth: &Panel) -> Vec<Perturbable> {
    let mut out = Vec::new();
    for (ci, comp) in layout.components.iter().enumerate() {
        for kind in AttributeKind::REASONED {
            let layout_attr = matches!(kind, AttributeKind::Number | AttributeKind::Position);
            if layout_attr && !comp.has_variable_layout() {
                continue;
            }
            let tier = match labels.label(ci, kind) {
                Label::Rule(_) => Tier::Governed,
                Label::Noise => Tier::Noise,
                Label::Irrelevant => Tier::Irrelevant,
            };
            let p = Perturbable { component: ci, kind, tier };
            if !alternatives(layout, truth, &p).is_empty() {
                out.push(p);
            }
        }
    }
    out
}

/// Set one attribute of one component. A new Number comes with a fresh mask
/// of that many entities.
fn alter(panel: &mut Panel, layout: &Layout, component: usize, kind: AttributeKind, value: Code, mask: Option<Code>) {
    let slots = layout.components[component].slot_count();
    let v = &mut panel.0[component];
    v.set(kind, value);
    if kind == AttributeKind::Number {
        v.position = mask.unwrap_or((1 << value) - 1);
        debug_assert_eq!(popcount(v.position), value);
        debug_assert!(v.position < (1 << slots));
    }
}

fn ordered_by_tier(mut ps: Vec<Perturbable>, rng: &mut ChaCha8Rng) -> Vec<Perturbable> {
    ps.shuffle(rng);
    ps.sort_by_key(|p| p.tier);
    ps
}

/// Seven distractors, each one attribute away from the truth, inserted
/// around the truth at a random index.
pub fn make_candidates_raven(
    layout: &Layout,
    labels: &RuleAssignment,
    truth: &Panel,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Panel>, usize), GenError> {
    let all = perturbables(layout, labels, truth);
    let total: usize = all.iter().map(|p| alternatives(layout, truth, p).len()).sum();
    if total < 7 {
        return Err(GenError::CandidateSpace { available: total });
    }
    // Use the lowest tiers that together offer seven distinct distractors.
    let mut allowed = Vec::new();
    let mut offered = 0;
    for tier in [Tier::Governed, Tier::Noise, Tier::Irrelevant] {
        if offered >= 7 {
            break;
        }
        for p in all.iter().filter(|p| p.tier == tier) {
            offered += alternatives(layout, truth, p).len();
            allowed.push(*p);
        }
    }

    let mut distractors: Vec<Panel> = Vec::with_capacity(7);
    while distractors.len() < 7 {
        let p = *allowed.choose(rng).expect("non-empty");
        let alts = alternatives(layout, truth, &p);
        let value = *alts.choose(rng).expect("non-empty");
        let slots = layout.components[p.component].slot_count();
        let mask = (p.kind == AttributeKind::Number).then(|| random_mask_with_count(rng, slots, value));
        let mut d = truth.clone();
        alter(&mut d, layout, p.component, p.kind, value, mask);
        if !distractors.contains(&d) {
            distractors.push(d);
        }
    }
    let truth_index = rng.gen_range(0..8);
    let mut candidates = distractors;
    candidates.insert(truth_index, truth.clone());
    Ok((candidates, truth_index))
}

/// Candidates, truth index and the permuted `(component, attribute)` pairs.
pub type ImpartialSet = (Vec<Panel>, usize, Vec<(usize, AttributeKind)>);

/// Eight leaves of a depth-3 binary tree: level `k` re-values one attribute
/// (the same new value across the level), each node keeping one unchanged
/// child. Every permuted attribute keeps the truth's value in exactly four
/// leaves. Returns the candidates, the truth index and the permuted
/// `(component, attribute)` pairs.
pub fn make_candidates_iraven(
    layout: &Layout,
    labels: &RuleAssignment,
    truth: &Panel,
    rng: &mut ChaCha8Rng,
) -> Result<ImpartialSet, GenError> {
    let ordered = ordered_by_tier(perturbables(layout, labels, truth), rng);
    let mut levels: Vec<Perturbable> = Vec::with_capacity(3);
    for p in ordered {
        let coupled = |q: &Perturbable| {
            q.component == p.component
                && matches!(q.kind, AttributeKind::Number | AttributeKind::Position)
                && matches!(p.kind, AttributeKind::Number | AttributeKind::Position)
        };
        if levels.len() < 3 && !levels.iter().any(coupled) {
            levels.push(p);
        }
    }
    if levels.len() < 3 {
        return Err(GenError::TooFewAttributes { available: levels.len() });
    }

    let changes: Vec<(Perturbable, Code, Option<Code>)> = levels
        .iter()
        .map(|p| {
            let value = *alternatives(layout, truth, p).choose(rng).expect("non-empty");
            let slots = layout.components[p.component].slot_count();
            let mask = (p.kind == AttributeKind::Number).then(|| random_mask_with_count(rng, slots, value));
            (*p, value, mask)
        })
        .collect();

    let mut leaves: Vec<(bool, Panel)> = (0..8u32)
        .map(|path| {
            let mut panel = truth.clone();
            for (level, (p, value, mask)) in changes.iter().enumerate() {
                if path >> level & 1 == 1 {
                    alter(&mut panel, layout, p.component, p.kind, *value, *mask);
                }
            }
            (path == 0, panel)
        })
        .collect();
    leaves.shuffle(rng);
    let truth_index = leaves.iter().position(|(t, _)| *t).expect("unchanged leaf exists");
    let permuted = levels.iter().map(|p| (p.component, p.kind)).collect();
    Ok((leaves.into_iter().map(|(_, p)| p).collect(), truth_index, permuted))
}

/// Build one problem. All randomness comes from `rng`.
pub fn generate_problem(
    config: Configuration,
    scheme: Scheme,
    uniformity_noise: f64,
    id: String,
    rng: &mut ChaCha8Rng,
) -> Result<Problem, GenError> {
    if !(0.0..=1.0).contains(&uniformity_noise) {
        return Err(GenError::InvalidSpec(format!("noise probability {uniformity_noise} outside [0, 1]")));
    }
    let layout = config.layout();
    let labels = sample_rule_assignment(&layout, uniformity_noise, rng);

    // grid[component][kind] = 3x3 values
    let mut panels: Vec<Panel> = vec![
        Panel(vec![
            ComponentValues { color: 0, number: 1, position: 1, size: 0, shape: 0 };
            layout.components.len()
        ]);
        9
    ];

    for (ci, comp) in layout.components.iter().enumerate() {
        let slots = comp.slot_count();
        for kind in AttributeKind::REASONED {
            let rows: Option<Rows> = match labels.label(ci, kind) {
                Label::Rule(rule) => Some(draw_rule_rows(rule, kind, comp, rng)),
                Label::Noise => {
                    let range = comp.range(kind);
                    Some([0, 1, 2].map(|_| [0, 1, 2].map(|_| rng.gen_range(range.lo..=range.hi))))
                }
                Label::Irrelevant => None,
            };
            if let Some(rows) = rows {
                for (cell, panel) in panels.iter_mut().enumerate() {
                    panel.0[ci].set(kind, rows[cell / 3][cell % 3]);
                }
            }
        }
        // Tie the free one of Number/Position to the governed one.
        if comp.has_variable_layout() {
            for panel in panels.iter_mut() {
                let v = &mut panel.0[ci];
                if labels.label(ci, AttributeKind::Number) == Label::Irrelevant {
                    v.number = popcount(v.position);
                } else {
                    v.position = random_mask_with_count(rng, slots, v.number);
                }
            }
        }
    }

    let truth = panels.pop().expect("nine panels");
    let (candidates, truth_index) = match scheme {
        Scheme::Raven => make_candidates_raven(&layout, &labels, &truth, rng)?,
        Scheme::IRaven => {
            let (c, t, _) = make_candidates_iraven(&layout, &labels, &truth, rng)?;
            (c, t)
        }
    };

    let annotations = labels
        .labels
        .iter()
        .enumerate()
        .flat_map(|(ci, m)| m.iter().map(move |(&attribute, &label)| Annotation { attribute, component: ci, label }))
        .collect();

    Ok(Problem { annotations, candidates, config, context: panels, id, truth_index: Some(truth_index) })
}

/// Problem `index` of the corpus described by `spec`.
pub fn generate_indexed(spec: &GenSpec, index: usize) -> Result<Problem, GenError> {
    let mut rng = problem_rng(spec.seed, index as u64);
    generate_problem(spec.config_for(index), spec.scheme, spec.uniformity_noise, spec.problem_id(index), &mut rng)
}

/// The whole corpus, built in parallel; output order is the index order.
pub fn generate_corpus(spec: &GenSpec) -> Result<Vec<Problem>, GenError> {
    if spec.configs.is_empty() {
        return Err(GenError::InvalidSpec("no configurations selected".into()));
    }
    (0..spec.count).into_par_iter().map(|i| generate_indexed(spec, i)).collect()
}
