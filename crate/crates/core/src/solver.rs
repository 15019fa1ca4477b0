//! Test-time reasoning: look up pool rules that hold on rows 1 and 2, apply
//! them to row 3, and score the candidates against the predictions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AttributeKind, AttributeMatrix, Code, ComponentRole, Panel, Problem, RuleKind};
use crate::induction::{apply_row, check_consistency, cycle, Rule, RulePool};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("rule pool is empty")]
    EmptyPool,
}

/// Why a consistent rule produced no usable prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inapplicable {
    /// The rule's row-3 precondition fails (e.g. Constant over two values).
    Precondition,
    OutOfRange(Code),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedConstraint {
    pub component: usize,
    pub role: ComponentRole,
    pub attribute: AttributeKind,
    pub predicted_value: Code,
    pub rule: RuleKind,
}

impl PredictedConstraint {
    pub fn source_rule(&self) -> Rule {
        Rule::new(self.attribute, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleRules {
    pub component: usize,
    pub role: ComponentRole,
    pub attribute: AttributeKind,
    pub rules: Vec<RuleKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem_id: String,
    /// `None` when the solver abstains.
    pub chosen_index: Option<usize>,
    pub scores: Vec<u32>,
    /// Every candidate index attaining the top score (when it is positive).
    pub tied: Vec<usize>,
    pub constraints: Vec<PredictedConstraint>,
    pub feasible_rules: Vec<FeasibleRules>,
    pub truth_index: Option<usize>,
}

impl SolveReport {
    pub fn is_correct(&self) -> bool {
        self.truth_index.is_some() && self.chosen_index == self.truth_index
    }

    pub fn abstained(&self) -> bool {
        self.chosen_index.is_none()
    }
}

/// Predict cell (3,3) by applying `rule` to the third row of `m`.
pub fn predict_attribute(rule: &Rule, m: &AttributeMatrix) -> Result<Code, Inapplicable> {
    let value = if rule.kind.is_distribute_three() {
        let col = |j: usize| -> Option<[Code; 3]> { Some([m.cells[0][j]?, m.cells[1][j]?, m.cells[2][j]?]) };
        let a2 = col(1).ok_or(Inapplicable::Precondition)?;
        cycle(rule.kind, a2)[2]
    } else {
        let (x, y) = match (m.cells[2][0], m.cells[2][1]) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Inapplicable::Precondition),
        };
        apply_row(rule.kind, x, y, m.slots).ok_or(Inapplicable::Precondition)?
    };
    if m.range.contains(value) {
        Ok(value)
    } else {
        Err(Inapplicable::OutOfRange(value))
    }
}

/// Pool rules consistent with rows 1 and 2, per (component, attribute).
/// A rule counts as available for an attribute if the pool recorded it under
/// any component role; roles are provenance, not a restriction. Attributes
/// with no consistent rule are listed with an empty rule list.
pub fn find_feasible_rules(p: &Problem, pool: &RulePool) -> Result<Vec<FeasibleRules>, SolveError> {
    if pool.is_empty() {
        return Err(SolveError::EmptyPool);
    }
    let layout = p.layout();
    let mut out = Vec::new();
    for (ci, comp) in layout.components.iter().enumerate() {
        for kind in AttributeKind::REASONED {
            let m = p.query_matrix(ci, kind);
            let rules = pool
                .rules_for_attribute(kind)
                .into_iter()
                .filter(|r| check_consistency(r, &m))
                .map(|r| r.kind)
                .collect();
            out.push(FeasibleRules { component: ci, role: comp.role, attribute: kind, rules });
        }
    }
    Ok(out)
}

/// Score each candidate by the number of constrained attributes it
/// satisfies. An attribute with several predictions counts once if any of
/// them matches.
pub fn score_candidates(constraints: &[PredictedConstraint], candidates: &[Panel]) -> Vec<u32> {
    let mut groups: BTreeMap<(usize, AttributeKind), Vec<Code>> = BTreeMap::new();
    for c in constraints {
        groups.entry((c.component, c.attribute)).or_default().push(c.predicted_value);
    }
    candidates
        .iter()
        .map(|cand| {
            groups
                .iter()
                .filter(|((ci, kind), preds)| cand.0.get(*ci).is_some_and(|v| preds.contains(&v.get(*kind))))
                .count() as u32
        })
        .collect()
}

/// Highest-scoring candidate, lowest index on ties; `None` if nothing scores.
pub fn choose(scores: &[u32]) -> (Option<usize>, Vec<usize>) {
    let best = scores.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return (None, Vec::new());
    }
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    (tied.first().copied(), tied)
}

pub fn solve_problem(p: &Problem, pool: &RulePool) -> Result<SolveReport, SolveError> {
    let feasible = find_feasible_rules(p, pool)?;
    let mut constraints = Vec::new();
    for f in &feasible {
        let m = p.query_matrix(f.component, f.attribute);
        for &kind in &f.rules {
            let rule = Rule::new(f.attribute, kind);
            if let Ok(v) = predict_attribute(&rule, &m) {
                constraints.push(PredictedConstraint {
                    component: f.component,
                    role: f.role,
                    attribute: f.attribute,
                    predicted_value: v,
                    rule: kind,
                });
            }
        }
    }
    let scores = score_candidates(&constraints, &p.candidates);
    let (chosen_index, tied) = choose(&scores);
    Ok(SolveReport {
        problem_id: p.id.clone(),
        chosen_index,
        scores,
        tied,
        constraints,
        feasible_rules: feasible.into_iter().filter(|f| !f.rules.is_empty()).collect(),
        truth_index: p.truth_index,
    })
}
