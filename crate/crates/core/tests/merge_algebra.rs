mod common;

use common::gen;
use proptest::prelude::*;
use pyarch_core::merge::{compare_models, merge_models, normalize_names, NameRule, NameRuleSet};
use pyarch_core::model::{model_stats, model_validate, ArchitectureModel};

fn unlabeled(m: ArchitectureModel) -> ArchitectureModel {
    m.with_label("")
}

fn rule_strategy() -> impl Strategy<Value = NameRule> {
    let segment = prop_oneof![Just("p0"), Just("p1"), Just("m0"), Just("m1"), Just("x")];
    prop_oneof![
        segment.clone().prop_map(|p| NameRule::PrefixStrip { prefix: p.parse().unwrap() }),
        segment.clone().prop_map(|p| NameRule::PrefixAdd { prefix: p.parse().unwrap() }),
        (segment.clone(), segment).prop_map(|(a, b)| NameRule::SegmentRename {
            from: a.parse().unwrap(),
            to: b.parse().unwrap(),
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generated_models_are_valid(m in gen::model()) {
        prop_assert!(model_validate(&m).is_empty(), "{:?}", model_validate(&m));
    }

    #[test]
    fn merge_is_commutative(a in gen::model(), b in gen::model()) {
        let ab = merge_models(&a, &b).unwrap();
        let ba = merge_models(&b, &a).unwrap();
        prop_assert!(model_validate(&ab).is_empty());
        prop_assert_eq!(unlabeled(ab), unlabeled(ba));
    }

    #[test]
    fn merge_is_associative(a in gen::model(), b in gen::model(), c in gen::model()) {
        let left = merge_models(&merge_models(&a, &b).unwrap(), &c).unwrap();
        let right = merge_models(&a, &merge_models(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(unlabeled(left), unlabeled(right));
    }

    #[test]
    fn merge_is_idempotent(a in gen::model()) {
        let aa = merge_models(&a, &a).unwrap();
        prop_assert_eq!(unlabeled(aa), unlabeled(a));
    }

    #[test]
    fn merge_has_an_identity(a in gen::model()) {
        let ae = merge_models(&a, &ArchitectureModel::empty("")).unwrap();
        prop_assert_eq!(unlabeled(ae), unlabeled(a));
    }

    #[test]
    fn compare_partitions_the_union(a in gen::model(), b in gen::model()) {
        let d = compare_models(&a, &b).unwrap();
        let flipped = compare_models(&b, &a).unwrap();
        prop_assert_eq!(&d.only_in_a, &flipped.only_in_b);
        prop_assert_eq!(&d.in_both, &flipped.in_both);
        let merged = merge_models(&a, &b).unwrap();
        prop_assert_eq!(d.only_in_a.components.len() + d.only_in_b.components.len() + d.in_both.components.len(),
            merged.components().len());
        prop_assert_eq!(d.only_in_a.operations.len() + d.only_in_b.operations.len() + d.in_both.operations.len(),
            merged.operations().len());
        prop_assert_eq!(d.only_in_a.call_edges.len() + d.only_in_b.call_edges.len() + d.in_both.call_edges.len(),
            merged.call_edges().len());
    }

    #[test]
    fn stats_totals_match_element_counts(m in gen::model()) {
        let s = model_stats(&m).unwrap();
        prop_assert_eq!(s.components_by_provenance.total(), m.components().len());
        prop_assert_eq!(s.operations_by_provenance.total(), m.operations().len());
        prop_assert_eq!(s.call_edges_by_provenance.total(), m.call_edges().len());
        prop_assert!(s.connected_components <= m.operations().len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normalize_is_idempotent(m in gen::model(), rules in prop::collection::vec(rule_strategy(), 0..3)) {
        let Ok(rules) = NameRuleSet::new(rules) else { return Ok(()); };
        match normalize_names(&m, &rules) {
            Ok((once, _)) => {
                prop_assert!(model_validate(&once).is_empty());
                let (twice, _) = normalize_names(&once, &rules).unwrap();
                prop_assert_eq!(twice, once);
            }
            // Renames may fold an operation onto a component name; that is reported, not repaired.
            Err(e) => prop_assert!(e.to_string().contains("renaming broke"), "{}", e),
        }
    }
}
