mod common;

use proptest::prelude::*;
use relkit::repair::{fix_relation_arguments, UNRESOLVED};
use relkit::{repair_all, AnnotatedDocument, RepairRule};

#[derive(Debug, Clone, Copy)]
enum Defect {
    None,
    Shrink,
    Extend,
    Reverse,
}

fn defect() -> impl Strategy<Value = Defect> {
    prop_oneof![
        4 => Just(Defect::None),
        1 => Just(Defect::Shrink),
        1 => Just(Defect::Extend),
        1 => Just(Defect::Reverse),
    ]
}

/// Applies annotation defects of the kinds the repair pass targets, keeping
/// every surface text as annotated.
fn damage(doc: &AnnotatedDocument, entity_defects: &[Defect], zero_args: &[bool]) -> AnnotatedDocument {
    let mut out = doc.clone();
    for (e, d) in out.entities.values_mut().zip(entity_defects.iter().cycle()) {
        let last = e.fragments.len() - 1;
        match d {
            Defect::None => {}
            Defect::Shrink => e.fragments[last].end -= 1,
            Defect::Extend => e.fragments[last].end += 1,
            Defect::Reverse => e.fragments.reverse(),
        }
    }
    for (r, z) in out.relations.values_mut().zip(zero_args) {
        if *z {
            r.object_ref.push('0');
        }
    }
    out.recompute_unresolved();
    out
}

fn case() -> impl Strategy<Value = (AnnotatedDocument, Vec<Defect>, Vec<bool>)> {
    (
        common::document(false),
        prop::collection::vec(defect(), 1..8),
        prop::collection::vec(prop::bool::weighted(0.2), 0..10),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn repair_is_idempotent((doc, defects, zeros) in case()) {
        let damaged = damage(&doc, &defects, &zeros);
        let (once, _) = repair_all(&damaged).unwrap();
        let (twice, log) = repair_all(&once).unwrap();
        prop_assert_eq!(&twice, &once);
        prop_assert!(log.entries.iter().all(|e| e.after == UNRESOLVED), "{}", log);
    }

    #[test]
    fn repair_undoes_synthetic_defects((doc, defects, zeros) in case()) {
        let damaged = damage(&doc, &defects, &zeros);
        let (fixed, log) = repair_all(&damaged).unwrap();
        prop_assert_eq!(&fixed, &doc);
        prop_assert_eq!(log.count(RepairRule::RelationArgument), zeros.iter().zip(doc.relations.values()).filter(|(z, _)| **z).count());
    }

    #[test]
    fn clean_documents_are_untouched(doc in common::document(false)) {
        let (fixed, log) = repair_all(&doc).unwrap();
        prop_assert!(log.is_empty());
        prop_assert_eq!(fixed, doc);
    }

    #[test]
    fn unfixable_arguments_stay_dangling(doc in common::document(true)) {
        let (fixed, log) = fix_relation_arguments(&doc);
        let unresolved = log.entries.iter().filter(|e| e.after == UNRESOLVED).count();
        prop_assert_eq!(unresolved, fixed.unresolved_refs.len());
        prop_assert_eq!(fixed.relations.len(), doc.relations.len());
    }
}
