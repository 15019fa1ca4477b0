//! Rule induction over attribute matrices.
//!
//! Each attribute matrix is read column-wise: the third column is regressed
//! on the first two, `a3 = [a1 a2] θ + φ`, with θ from the least-squares
//! normal equations and φ the leftover. The four rule families then show up
//! as fixed patterns of (θ, φ):
//!
//! | family            | θ                      | φ                                |
//! |-------------------|------------------------|----------------------------------|
//! | Constant          | `[0.5, 0.5]`           | `0`                              |
//! | Progression       | `[-1, 2]`              | `0`                              |
//! | Arithmetic ±      | `[1, ±1]`              | `0`                              |
//! | Distribute three  | `[s/(p+s), s/(p+s)]`   | `(Sᵀ − s/(p+s)(I + S)) a1`       |
//!
//! with `p = a1ᵀa1`, `s = a1ᵀ S a1`. Constant matrices make the normal matrix
//! singular, so the solve falls back to the minimum-norm pseudo-inverse.
//!
//! Position masks are not scalars; they go through [`detect_position_rule`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{AttributeKind, AttributeMatrix, Code, ComponentRole, Problem, RuleKind};
use crate::error::ContractViolation;

/// Tolerance on θ/φ pattern matching.
pub const CLASSIFY_TOL: f64 = 1e-6;
/// Relative eigenvalue cutoff below which the normal matrix counts as singular.
const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of the third column on the first two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub theta: [f64; 2],
    pub phi: [f64; 3],
    /// Rank of the 2x2 normal matrix. `0` only for an all-zero design.
    pub rank: usize,
    /// Max absolute error of `A12 θ + φ` against `a3`.
    pub residual: f64,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Solve `a3 ≈ [a1 a2] θ` by the normal equations, with the pseudo-inverse
/// taking over when the normal matrix is rank deficient, and absorb what is
/// left into φ.
pub fn least_squares_induce(a1: [f64; 3], a2: [f64; 3], a3: [f64; 3]) -> LinearFit {
    let (n11, n12, n22) = (dot(&a1, &a1), dot(&a1, &a2), dot(&a2, &a2));
    let b = [dot(&a1, &a3), dot(&a2, &a3)];

    // Eigenvalues of the symmetric normal matrix.
    let half_trace = (n11 + n22) / 2.0;
    let disc = (((n11 - n22) / 2.0).powi(2) + n12 * n12).sqrt();
    let lambda_max = half_trace + disc;
    let det = n11 * n22 - n12 * n12;

    let (rank, theta) = if lambda_max <= f64::MIN_POSITIVE {
        (0, [0.0, 0.0])
    } else if det / lambda_max <= RANK_TOL * lambda_max {
        // Rank one: N† = v vᵀ / λ for the dominant unit eigenvector v.
        let (u, w) = if (lambda_max - n22).abs() + n12.abs() >= (lambda_max - n11).abs() + n12.abs() {
            (lambda_max - n22, n12)
        } else {
            (n12, lambda_max - n11)
        };
        let norm = (u * u + w * w).sqrt();
        let v = [u / norm, w / norm];
        let scale = (v[0] * b[0] + v[1] * b[1]) / lambda_max;
        (1, [v[0] * scale, v[1] * scale])
    } else {
        (2, [(n22 * b[0] - n12 * b[1]) / det, (n11 * b[1] - n12 * b[0]) / det])
    };

    let fitted = [0, 1, 2].map(|i| a1[i] * theta[0] + a2[i] * theta[1]);
    let phi = [0, 1, 2].map(|i| a3[i] - fitted[i]);
    let residual = (0..3).map(|i| (a3[i] - (fitted[i] + phi[i])).abs()).fold(0.0, f64::max);

    LinearFit { theta, phi, rank, residual }
}

/// `S · v` for the two cyclic permutations. `Up` uses
/// `S = [[0,1,0],[0,0,1],[1,0,0]]`, `Down` its transpose.
pub fn cycle<T: Copy>(kind: RuleKind, v: [T; 3]) -> [T; 3] {
    match kind {
        RuleKind::DistributeThreeDown => [v[2], v[0], v[1]],
        _ => [v[1], v[2], v[0]],
    }
}

fn to_f64(v: [Code; 3]) -> [f64; 3] {
    v.map(|x| x as f64)
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= CLASSIFY_TOL)
}

fn columns_equal(a: &[f64; 3], b: &[f64; 3]) -> bool {
    close(a, b)
}

/// Map a fit back to the rule family it expresses.
///
/// Constant takes precedence. With a full-rank fit the θ/φ pattern decides
/// the linear families; when the fit is rank deficient θ is only the
/// minimum-norm representative, so the canonical θ is checked by
/// reconstruction instead.
pub fn classify_rule(fit: &LinearFit, a1: [f64; 3], a2: [f64; 3], a3: [f64; 3]) -> RuleKind {
    if columns_equal(&a1, &a2) && columns_equal(&a2, &a3) {
        return RuleKind::Constant;
    }

    let zero = [0.0; 3];
    let matches = |canonical: [f64; 2]| {
        if fit.rank == 2 {
            close(&fit.theta, &canonical) && close(&fit.phi, &zero)
        } else {
            let rebuilt = [0, 1, 2].map(|i| a1[i] * canonical[0] + a2[i] * canonical[1]);
            close(&rebuilt, &a3)
        }
    };

    if !columns_equal(&a1, &a2) && matches([-1.0, 2.0]) {
        return RuleKind::Progression;
    }
    if matches([1.0, 1.0]) {
        return RuleKind::ArithmeticPlus;
    }
    if matches([1.0, -1.0]) {
        return RuleKind::ArithmeticMinus;
    }
    for kind in [RuleKind::DistributeThreeUp, RuleKind::DistributeThreeDown] {
        if columns_equal(&a2, &cycle(kind, a1)) && columns_equal(&a3, &cycle(kind, a2)) {
            return kind;
        }
    }
    RuleKind::Unclassified
}

/// Closed-form θ of the distribute-three family for first column `a1`.
pub fn distribute_three_theta(kind: RuleKind, a1: [f64; 3]) -> f64 {
    let p = dot(&a1, &a1);
    let s = dot(&a1, &cycle(kind, a1));
    s / (p + s)
}

/// Closed-form φ of the distribute-three family: `(Sᵀ − t(I + S)) a1`.
pub fn distribute_three_phi(kind: RuleKind, a1: [f64; 3]) -> [f64; 3] {
    let t = distribute_three_theta(kind, a1);
    let s_a1 = cycle(kind, a1);
    let st_a1 = cycle(kind, s_a1);
    [0, 1, 2].map(|i| st_a1[i] - t * (a1[i] + s_a1[i]))
}

fn full_mask(slots: u32) -> Code {
    (1 << slots) - 1
}

/// Rotate a mask by `k` slots (slot `i` moves to `i + k`, cyclically).
pub fn rotate_mask(mask: Code, k: u32, slots: u32) -> Code {
    let k = k % slots;
    if k == 0 {
        return mask;
    }
    ((mask << k) | (mask >> (slots - k))) & full_mask(slots)
}

/// Rule detector for Position bitmask columns. Checks run in the order
/// Constant, Union, Difference, Shift, DistributeThree; first match wins.
pub fn detect_position_rule(
    p1: [Code; 3],
    p2: [Code; 3],
    p3: [Code; 3],
    slot_count: u32,
) -> Result<RuleKind, ContractViolation> {
    if slot_count == 0 || slot_count > 16 {
        return Err(ContractViolation::InvalidMask { mask: 0, slots: slot_count });
    }
    for &mask in p1.iter().chain(&p2).chain(&p3) {
        if mask < 0 || mask > full_mask(slot_count) {
            return Err(ContractViolation::InvalidMask { mask, slots: slot_count });
        }
    }
    let rows = || (0..3).map(|i| (p1[i], p2[i], p3[i]));

    if rows().all(|(a, b, c)| a == b && b == c) {
        return Ok(RuleKind::Constant);
    }
    if rows().all(|(a, b, c)| c == a | b) {
        return Ok(RuleKind::PositionUnion);
    }
    if rows().all(|(a, b, c)| c == a & !b) {
        return Ok(RuleKind::PositionDifference);
    }
    for k in 1..slot_count {
        let fits = rows().all(|(a, b, c)| b == rotate_mask(a, k, slot_count) && c == rotate_mask(a, 2 * k, slot_count));
        if fits {
            return Ok(RuleKind::PositionShift(k as u8));
        }
    }
    for kind in [RuleKind::DistributeThreeUp, RuleKind::DistributeThreeDown] {
        if p2 == cycle(kind, p1) && p3 == cycle(kind, p2) {
            return Ok(kind);
        }
    }
    Ok(RuleKind::Unclassified)
}

/// Classify a completed matrix: the detector for Position, least squares
/// plus pattern matching for everything else.
pub fn classify_matrix(m: &AttributeMatrix) -> Result<RuleKind, ContractViolation> {
    let [a1, a2, a3] = m.columns().ok_or_else(|| ContractViolation::MalformedProblem {
        id: String::new(),
        detail: format!("{} matrix is not complete", m.kind),
    })?;
    if m.kind == AttributeKind::Position {
        return detect_position_rule(a1, a2, a3, m.slots);
    }
    let (a1, a2, a3) = (to_f64(a1), to_f64(a2), to_f64(a3));
    let fit = least_squares_induce(a1, a2, a3);
    Ok(classify_rule(&fit, a1, a2, a3))
}

/// Shape of the offset term a rule carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiForm {
    Zero,
    /// Instance-dependent; recomputed from the observed first column.
    DistributeThree,
}

/// Canonical coefficient vector of a rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalTheta {
    Fixed([f64; 2]),
    /// `[s/(p+s), s/(p+s)]`, depends on the instance.
    DistributeThree,
    /// Position set operations have no scalar linear form.
    NotLinear,
}

/// A reasoning rule for one attribute, stored canonically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub attribute: AttributeKind,
    pub kind: RuleKind,
}

impl Rule {
    pub fn new(attribute: AttributeKind, kind: RuleKind) -> Self {
        Rule { attribute, kind }
    }

    pub fn canonical_theta(&self) -> CanonicalTheta {
        match self.kind {
            RuleKind::Constant => CanonicalTheta::Fixed([0.5, 0.5]),
            RuleKind::Progression => CanonicalTheta::Fixed([-1.0, 2.0]),
            RuleKind::ArithmeticPlus => CanonicalTheta::Fixed([1.0, 1.0]),
            RuleKind::ArithmeticMinus => CanonicalTheta::Fixed([1.0, -1.0]),
            RuleKind::DistributeThreeUp | RuleKind::DistributeThreeDown => CanonicalTheta::DistributeThree,
            _ => CanonicalTheta::NotLinear,
        }
    }

    pub fn phi_form(&self) -> PhiForm {
        if self.kind.is_distribute_three() {
            PhiForm::DistributeThree
        } else {
            PhiForm::Zero
        }
    }
}

/// Third entry of a row under a row-wise rule, or `None` when the rule does
/// not apply to this row (e.g. Constant over two different values).
pub fn apply_row(kind: RuleKind, x: Code, y: Code, slots: u32) -> Option<Code> {
    match kind {
        RuleKind::Constant => (x == y).then_some(y),
        RuleKind::Progression => Some(2 * y - x),
        RuleKind::ArithmeticPlus => Some(x + y),
        RuleKind::ArithmeticMinus => Some(x - y),
        RuleKind::PositionUnion => Some(x | y),
        RuleKind::PositionDifference => Some(x & !y),
        RuleKind::PositionShift(k) => {
            let k = u32::from(k);
            (slots > 0 && y == rotate_mask(x, k, slots)).then(|| rotate_mask(x, 2 * k, slots))
        }
        _ => None,
    }
}

fn kind_fits_attribute(kind: RuleKind, attribute: AttributeKind) -> bool {
    match attribute {
        AttributeKind::Position => {
            !matches!(kind, RuleKind::Progression | RuleKind::ArithmeticPlus | RuleKind::ArithmeticMinus)
        }
        AttributeKind::Angle => false,
        _ => !kind.is_position_only(),
    }
}

/// Does `rule` reproduce the observed third entries of rows 1 and 2?
/// Distribute-three additionally needs `a2 = S a1` on the full columns.
pub fn check_consistency(rule: &Rule, m: &AttributeMatrix) -> bool {
    if !kind_fits_attribute(rule.kind, m.kind) || rule.kind == RuleKind::Unclassified {
        return false;
    }
    let c = &m.cells;
    if rule.kind.is_distribute_three() {
        let (Some(a1), Some(a2)) = (full(m.column(0)), full(m.column(1))) else {
            return false;
        };
        if a2 != cycle(rule.kind, a1) {
            return false;
        }
        let want = cycle(rule.kind, a2);
        return c[0][2] == Some(want[0]) && c[1][2] == Some(want[1]);
    }
    (0..2).all(|r| match (c[r][0], c[r][1], c[r][2]) {
        (Some(x), Some(y), Some(z)) => apply_row(rule.kind, x, y, m.slots) == Some(z),
        _ => false,
    })
}

fn full(col: [Option<Code>; 3]) -> Option<[Code; 3]> {
    Some([col[0]?, col[1]?, col[2]?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InducedRule {
    pub component: usize,
    pub role: ComponentRole,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Induction {
    pub rules: Vec<InducedRule>,
    /// Rows 1 and 2 carry identical attributes everywhere, so the sample
    /// cannot pin down a concrete rule on its own.
    pub degenerate: bool,
}

/// Induce the rules of a training sample (truth substituted into cell (3,3)).
/// Attributes that fit no family emit nothing.
pub fn induce_from_sample(p: &Problem) -> Result<Induction, ContractViolation> {
    let truth = p
        .truth_index
        .filter(|&t| t < p.candidates.len())
        .ok_or_else(|| ContractViolation::IncompleteProblem { id: p.id.clone() })?;
    let layout = p.layout();
    if p.context.len() != 8 || p.context.iter().chain(&p.candidates).any(|x| x.0.len() != layout.components.len()) {
        return Err(ContractViolation::MalformedProblem {
            id: p.id.clone(),
            detail: "panel or component count does not match the layout".into(),
        });
    }

    let mut rules = Vec::new();
    for (ci, comp) in layout.components.iter().enumerate() {
        for kind in AttributeKind::REASONED {
            let m = p.completed_matrix(ci, kind, truth);
            let found = classify_matrix(&m).map_err(|e| match e {
                ContractViolation::MalformedProblem { detail, .. } => {
                    ContractViolation::MalformedProblem { id: p.id.clone(), detail }
                }
                other => other,
            })?;
            if found != RuleKind::Unclassified {
                rules.push(InducedRule { component: ci, role: comp.role, rule: Rule::new(kind, found) });
            }
        }
    }
    let degenerate = p.context[0..3] == p.context[3..6];
    Ok(Induction { rules, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PoolKey {
    pub role: ComponentRole,
    pub attribute: AttributeKind,
    pub kind: RuleKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PoolParseError {
    #[error("line {line}: expected 4 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {message}")]
    Field { line: usize, message: String },
    #[error("line {line}: duplicate entry")]
    Duplicate { line: usize },
}

/// Deduplicated rule set built during training, with per-entry counts of
/// the samples that produced each rule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RulePool {
    entries: BTreeMap<PoolKey, u64>,
}

impl RulePool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, role: ComponentRole, rule: Rule) {
        let key = PoolKey { role, attribute: rule.attribute, kind: rule.kind };
        *self.entries.entry(key).or_insert(0) += 1;
    }

    pub fn insert_all<'a>(&mut self, rules: impl IntoIterator<Item = &'a InducedRule>) {
        for r in rules {
            self.insert(r.role, r.rule);
        }
    }

    /// Union with `other`, summing provenance. Commutative and associative.
    pub fn merge(&mut self, other: &RulePool) {
        for (k, n) in &other.entries {
            *self.entries.entry(*k).or_insert(0) += n;
        }
    }

    pub fn provenance(&self, role: ComponentRole, rule: Rule) -> u64 {
        let key = PoolKey { role, attribute: rule.attribute, kind: rule.kind };
        self.entries.get(&key).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PoolKey, u64)> {
        self.entries.iter().map(|(k, &n)| (k, n))
    }

    pub fn rules_for(&self, role: ComponentRole, attribute: AttributeKind) -> Vec<Rule> {
        self.entries
            .keys()
            .filter(|k| k.role == role && k.attribute == attribute)
            .map(|k| Rule::new(k.attribute, k.kind))
            .collect()
    }

    /// Distinct rules recorded for `attribute` under any component role.
    pub fn rules_for_attribute(&self, attribute: AttributeKind) -> Vec<Rule> {
        let kinds: BTreeSet<RuleKind> =
            self.entries.keys().filter(|k| k.attribute == attribute).map(|k| k.kind).collect();
        kinds.into_iter().map(|kind| Rule::new(attribute, kind)).collect()
    }

    /// One `role\tattribute\tkind\tcount` line per entry, sorted bytewise.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> =
            self.entries.iter().map(|(k, n)| format!("{}\t{}\t{}\t{}", k.role, k.attribute, k.kind, n)).collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PoolParseError> {
        let mut pool = RulePool::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 4 {
                return Err(PoolParseError::FieldCount { line, found: fields.len() });
            }
            let field = |message: String| PoolParseError::Field { line, message };
            let role = fields[0].parse().map_err(field)?;
            let attribute = fields[1].parse().map_err(field)?;
            let kind = fields[2].parse().map_err(field)?;
            let count: u64 = fields[3].parse().map_err(|_| field(format!("bad count `{}`", fields[3])))?;
            if pool.entries.insert(PoolKey { role, attribute, kind }, count).is_some() {
                return Err(PoolParseError::Duplicate { line });
            }
        }
        Ok(pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ValueRange;

    fn fit(a1: [f64; 3], a2: [f64; 3], a3: [f64; 3]) -> LinearFit {
        least_squares_induce(a1, a2, a3)
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn progression_instance() {
        let f = fit([1., 2., 3.], [2., 3., 4.], [3., 4., 5.]);
        assert_eq!(f.rank, 2);
        assert_close(&f.theta, &[-1.0, 2.0], 1e-9);
        assert_close(&f.phi, &[0.0; 3], 1e-9);
    }

    #[test]
    fn constant_instance_uses_pseudo_inverse() {
        let a = [2., 6., 9.];
        let f = fit(a, a, a);
        assert_eq!(f.rank, 1);
        assert_close(&f.theta, &[0.5, 0.5], 1e-9);
        assert_close(&f.phi, &[0.0; 3], 1e-9);
    }

    #[test]
    fn arithmetic_instance() {
        let f = fit([1., 2., 3.], [4., 5., 6.], [5., 7., 9.]);
        assert_eq!(f.rank, 2);
        assert_close(&f.theta, &[1.0, 1.0], 1e-9);
        assert_close(&f.phi, &[0.0; 3], 1e-9);
    }

    #[test]
    fn distribute_three_instance() {
        // p = 14, s = 11 for a1 = [1, 2, 3] under the up cycle.
        let f = fit([1., 2., 3.], [2., 3., 1.], [3., 1., 2.]);
        assert_eq!(f.rank, 2);
        assert_close(&f.theta, &[11.0 / 25.0, 11.0 / 25.0], 1e-9);
        assert_close(&f.phi, &[1.68, -1.20, 0.24], 1e-9);
        assert_close(&distribute_three_phi(RuleKind::DistributeThreeUp, [1., 2., 3.]), &f.phi, 1e-9);
    }

    #[test]
    fn zero_design_has_rank_zero() {
        let f = fit([0.; 3], [0.; 3], [0.; 3]);
        assert_eq!(f.rank, 0);
        assert!(f.residual <= 1e-9);
    }

    #[test]
    fn classify_examples() {
        let cases = [
            ([1., 2., 3.], [2., 3., 4.], [3., 4., 5.], RuleKind::Progression),
            ([2., 6., 9.], [2., 6., 9.], [2., 6., 9.], RuleKind::Constant),
            ([1., 2., 3.], [2., 3., 1.], [3., 1., 2.], RuleKind::DistributeThreeUp),
            ([1., 2., 3.], [9., 9., 9.], [7., 3., 1.], RuleKind::Unclassified),
            ([1., 2., 3.], [4., 5., 6.], [5., 7., 9.], RuleKind::ArithmeticPlus),
            ([5., 7., 9.], [4., 5., 6.], [1., 2., 3.], RuleKind::ArithmeticMinus),
            ([1., 2., 3.], [3., 1., 2.], [2., 3., 1.], RuleKind::DistributeThreeDown),
        ];
        for (a1, a2, a3, want) in cases {
            assert_eq!(classify_rule(&fit(a1, a2, a3), a1, a2, a3), want, "{a1:?} {a2:?} {a3:?}");
        }
    }

    #[test]
    fn unclassified_example_fails_every_definition() {
        // Direct evaluation of each defining predicate.
        let (a1, a2, a3) = ([1i64, 2, 3], [9i64, 9, 9], [7i64, 3, 1]);
        assert!(!(a1 == a2 && a2 == a3));
        assert!((0..3).any(|i| a3[i] != 2 * a2[i] - a1[i]));
        assert!((0..3).any(|i| a3[i] != a1[i] + a2[i]));
        assert!((0..3).any(|i| a3[i] != a1[i] - a2[i]));
        assert!(a2 != cycle(RuleKind::DistributeThreeUp, a1));
        assert!(a2 != cycle(RuleKind::DistributeThreeDown, a1));
    }

    #[test]
    fn collinear_progression_still_classifies() {
        // a2 = 2 a1: rank one, θ is not unique, reconstruction decides.
        let (a1, a2, a3) = ([1., 2., 3.], [2., 4., 6.], [3., 6., 9.]);
        let f = fit(a1, a2, a3);
        assert_eq!(f.rank, 1);
        assert_eq!(classify_rule(&f, a1, a2, a3), RuleKind::Progression);
    }

    #[test]
    fn constant_precedes_progression() {
        let a = [4., 4., 4.];
        assert_eq!(classify_rule(&fit(a, a, a), a, a, a), RuleKind::Constant);
    }

    #[test]
    fn position_detector_examples() {
        let r = detect_position_rule([0b1001; 3], [0b0110; 3], [0b1111; 3], 4).unwrap();
        assert_eq!(r, RuleKind::PositionUnion);
        let r = detect_position_rule([0b0101; 3], [0b0101; 3], [0b0101; 3], 4).unwrap();
        assert_eq!(r, RuleKind::Constant);
        let r = detect_position_rule([0b0001; 3], [0b0010; 3], [0b0100; 3], 4).unwrap();
        assert_eq!(r, RuleKind::PositionShift(1));
        let r = detect_position_rule([0b0111; 3], [0b0010; 3], [0b0101; 3], 4).unwrap();
        assert_eq!(r, RuleKind::PositionDifference);
        let r = detect_position_rule([1, 2, 4], [2, 4, 1], [4, 1, 2], 4).unwrap();
        assert_eq!(r, RuleKind::DistributeThreeUp);
    }

    #[test]
    fn shift_brute_force_oracle() {
        // Independent check: exactly offset 1 of 0..4 maps 0001 -> 0010 -> 0100.
        let offsets: Vec<u32> = (0..4)
            .filter(|&k| {
                let rot = |m: i64, k: u32| -> i64 {
                    let bits: Vec<bool> = (0..4).map(|i| m >> i & 1 == 1).collect();
                    (0..4).filter(|&i| bits[(i + 4 - k as usize) % 4]).map(|i| 1 << i).sum()
                };
                rot(0b0001, k) == 0b0010 && rot(0b0001, 2 * k % 4) == 0b0100
            })
            .collect();
        assert_eq!(offsets, vec![1]);
    }

    #[test]
    fn position_detector_rejects_invalid_masks() {
        let err = detect_position_rule([0b10000; 3], [1; 3], [1; 3], 4).unwrap_err();
        assert_eq!(err, ContractViolation::InvalidMask { mask: 0b10000, slots: 4 });
        assert!(detect_position_rule([-1; 3], [1; 3], [1; 3], 4).is_err());
    }

    fn query(kind: AttributeKind, rows: [[i64; 3]; 3]) -> AttributeMatrix {
        let mut m = AttributeMatrix::from_rows(kind, 1, ValueRange::new(0, 9), rows);
        m.cells[2][2] = None;
        m
    }

    #[test]
    fn consistency_examples() {
        let prog = Rule::new(AttributeKind::Size, RuleKind::Progression);
        assert!(check_consistency(&prog, &query(AttributeKind::Size, [[3, 5, 7], [2, 4, 6], [1, 2, 0]])));
        let plus = Rule::new(AttributeKind::Size, RuleKind::ArithmeticPlus);
        assert!(!check_consistency(&plus, &query(AttributeKind::Size, [[1, 2, 3], [2, 2, 5], [1, 1, 0]])));
        let d3 = Rule::new(AttributeKind::Type, RuleKind::DistributeThreeUp);
        // a1 = [1,2,3], a2 = [2,3,1], observed a3 entries 3, 1.
        assert!(check_consistency(&d3, &query(AttributeKind::Type, [[1, 2, 3], [2, 3, 1], [3, 1, 0]])));
        let d3_down = Rule::new(AttributeKind::Type, RuleKind::DistributeThreeDown);
        assert!(!check_consistency(&d3_down, &query(AttributeKind::Type, [[1, 2, 3], [2, 3, 1], [3, 1, 0]])));
    }

    #[test]
    fn pool_dedup_and_text() {
        let mut pool = RulePool::new();
        let r = Rule::new(AttributeKind::Size, RuleKind::Progression);
        pool.insert(ComponentRole::Center, r);
        pool.insert(ComponentRole::Center, r);
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.provenance(ComponentRole::Center, r), 2);
        pool.insert(ComponentRole::Left, Rule::new(AttributeKind::Position, RuleKind::PositionShift(2)));
        let text = pool.to_text();
        assert_eq!(text, "center\tsize\tprogression\t2\nleft\tposition\tposition_shift_2\t1\n");
        assert_eq!(RulePool::from_text(&text).unwrap(), pool);
    }

    #[test]
    fn pool_text_errors_name_lines() {
        assert_eq!(
            RulePool::from_text("center\tsize\tprogression\n"),
            Err(PoolParseError::FieldCount { line: 1, found: 3 })
        );
        assert!(matches!(
            RulePool::from_text("center\tsize\tprogression\t1\ncenter\tsize\tbogus\t1\n"),
            Err(PoolParseError::Field { line: 2, .. })
        ));
        assert_eq!(
            RulePool::from_text("center\tsize\tprogression\t1\ncenter\tsize\tprogression\t3\n"),
            Err(PoolParseError::Duplicate { line: 2 })
        );
    }
}
