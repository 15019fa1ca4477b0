use nalgebra::{Matrix3x2, Vector3};
use proptest::prelude::*;
use rpm_core::domain::{AttributeKind, ComponentRole, Configuration, Label};
use rpm_core::generator::{generate_corpus, GenSpec, Scheme};
use rpm_core::induction::{classify_rule, induce_from_sample, least_squares_induce, InducedRule, RulePool};
use rpm_core::{Rule, RuleKind};

/// Minimum-norm least-squares θ from an SVD pseudo-inverse.
fn pinv_theta(a1: [f64; 3], a2: [f64; 3], a3: [f64; 3]) -> [f64; 2] {
    let a = Matrix3x2::new(a1[0], a2[0], a1[1], a2[1], a1[2], a2[2]);
    let t = a.pseudo_inverse(1e-9).expect("svd converges") * Vector3::from(a3);
    [t[0], t[1]]
}

fn column() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(0i64..10).prop_map(|v| v.map(|x| x as f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn theta_matches_pseudo_inverse(a1 in column(), a2 in column(), a3 in column()) {
        let fit = least_squares_induce(a1, a2, a3);
        let want = pinv_theta(a1, a2, a3);
        for k in 0..2 {
            prop_assert!((fit.theta[k] - want[k]).abs() < 1e-7, "{:?} vs {:?}", fit.theta, want);
        }
        for i in 0..3 {
            let back = a1[i] * fit.theta[0] + a2[i] * fit.theta[1] + fit.phi[i];
            prop_assert!((back - a3[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn parallel_columns_are_rank_deficient(a in column(), c in 1i64..4) {
        prop_assume!(a != [0.0; 3]);
        let b = a.map(|x| x * c as f64);
        let fit = least_squares_induce(a, b, b);
        prop_assert_eq!(fit.rank, 1);
    }

    #[test]
    fn pool_merge_is_order_free(
        xs in prop::collection::vec((0usize..3, 0usize..4), 0..30),
        split in 0usize..30,
    ) {
        let roles = [ComponentRole::Center, ComponentRole::Left, ComponentRole::InGrid];
        let kinds = [RuleKind::Constant, RuleKind::Progression, RuleKind::ArithmeticPlus, RuleKind::DistributeThreeUp];
        let rules: Vec<InducedRule> = xs
            .iter()
            .map(|&(r, k)| InducedRule { component: 0, role: roles[r], rule: Rule::new(AttributeKind::Size, kinds[k]) })
            .collect();
        let mut whole = RulePool::new();
        whole.insert_all(&rules);
        let (a, b) = rules.split_at(split.min(rules.len()));
        let (mut pa, mut pb) = (RulePool::new(), RulePool::new());
        pa.insert_all(a);
        pb.insert_all(b);
        let mut ab = pa.clone();
        ab.merge(&pb);
        pb.merge(&pa);
        prop_assert_eq!(&ab, &whole);
        prop_assert_eq!(&pb, &whole);
        prop_assert_eq!(RulePool::from_text(&whole.to_text()).unwrap(), whole);
    }
}

#[test]
fn classification_is_pinned_on_worked_rows() {
    let f = |v: [i64; 3]| v.map(|x| x as f64);
    let cases = [
        ([1, 4, 2], [1, 4, 2], [1, 4, 2], RuleKind::Constant),
        ([0, 1, 2], [1, 2, 3], [2, 3, 4], RuleKind::Progression),
        ([1, 2, 4], [2, 3, 1], [3, 5, 5], RuleKind::ArithmeticPlus),
        ([5, 6, 4], [2, 3, 1], [3, 3, 3], RuleKind::ArithmeticMinus),
        ([1, 2, 3], [2, 3, 1], [3, 1, 2], RuleKind::DistributeThreeUp),
        ([1, 2, 3], [3, 1, 2], [2, 3, 1], RuleKind::DistributeThreeDown),
        ([1, 2, 3], [3, 3, 3], [0, 9, 1], RuleKind::Unclassified),
    ];
    for (a1, a2, a3, kind) in cases {
        let fit = least_squares_induce(f(a1), f(a2), f(a3));
        assert_eq!(classify_rule(&fit, f(a1), f(a2), f(a3)), kind, "{a1:?} {a2:?} {a3:?}");
    }
}

#[test]
fn induction_recovers_annotated_kinds() {
    let spec = GenSpec::new(Configuration::ALL.to_vec(), Scheme::Raven, 0.0, 41, 10_000);
    for p in generate_corpus(&spec).unwrap() {
        let induced = induce_from_sample(&p).unwrap();
        for a in &p.annotations {
            let Label::Rule(kind) = a.label else { continue };
            let found = induced.rules.iter().find(|r| r.component == a.component && r.rule.attribute == a.attribute);
            assert_eq!(found.map(|r| r.rule.kind), Some(kind), "{} component {} {}", p.id, a.component, a.attribute);
        }
    }
}
