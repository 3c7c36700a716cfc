//! Corrective passes for the three known annotation defects of the source
//! corpus: dangling relation arguments carrying an extra trailing zero,
//! entity ends off by one character, and discontinuous fragments listed out
//! of order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standoff::{join_fragments, AnnotatedDocument, ArgSlot, TextDocument};
use crate::types::Span;

/// Marker written as `after` when a dangling argument could not be fixed.
pub const UNRESOLVED: &str = "UNRESOLVED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairRule {
    RelationArgument,
    SpanBoundary,
    FragmentOrder,
}

impl RepairRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RepairRule::RelationArgument => "relation_argument",
            RepairRule::SpanBoundary => "span_boundary",
            RepairRule::FragmentOrder => "fragment_order",
        }
    }
}

impl fmt::Display for RepairRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairEntry {
    pub rule: RepairRule,
    pub target_id: String,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairLog {
    pub doc_id: String,
    pub entries: Vec<RepairEntry>,
}

impl RepairLog {
    pub fn new(doc_id: impl Into<String>) -> Self {
        RepairLog {
            doc_id: doc_id.into(),
            entries: Vec::new(),
        }
    }

    fn push(&mut self, rule: RepairRule, target_id: &str, before: String, after: String) {
        self.entries.push(RepairEntry {
            rule,
            target_id: target_id.to_string(),
            before,
            after,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: RepairLog) {
        self.entries.extend(other.entries);
    }

    pub fn count(&self, rule: RepairRule) -> usize {
        self.entries.iter().filter(|e| e.rule == rule).count()
    }

    /// Ids touched by a rule, excluding unresolved leftovers.
    pub fn repaired_targets(&self, rule: RepairRule) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |e| e.rule == rule && e.after != UNRESOLVED)
            .map(|e| e.target_id.as_str())
    }
}

impl fmt::Display for RepairLog {
    /// One `<doc_id> <rule> <target_id> <before> -> <after>` line per entry.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{} {} {} {} -> {}",
                self.doc_id, e.rule, e.target_id, e.before, e.after
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("{doc_id}: entity {entity_id} has overlapping fragments {first} and {second}")]
    OverlappingFragments {
        doc_id: String,
        entity_id: String,
        first: Span,
        second: Span,
    },
}

fn describe_fragments(fragments: &[Span]) -> String {
    fragments.iter().map(Span::to_string).collect::<Vec<_>>().join(";")
}

fn describe_entity(fragments: &[Span], surface: &str) -> String {
    format!("{} {:?}", describe_fragments(fragments), surface)
}

/// Rewrites dangling `T<digits>0` arguments to the id with one trailing
/// zero stripped, when that id exists. Anything else stays dangling and is
/// logged as [`UNRESOLVED`].
pub fn fix_relation_arguments(doc: &AnnotatedDocument) -> (AnnotatedDocument, RepairLog) {
    let mut out = doc.clone();
    let mut log = RepairLog::new(doc.doc_id());
    out.recompute_unresolved();

    for dangling in out.unresolved_refs.clone() {
        let candidate = dangling
            .entity_id
            .strip_suffix('0')
            .filter(|stripped| stripped.len() > 1 && out.entities.contains_key(*stripped))
            .map(str::to_string);
        let before = format!("{}:{}", dangling.slot, dangling.entity_id);
        match candidate {
            Some(fixed) => {
                let rel = &mut out.relations[&dangling.relation_id];
                match dangling.slot {
                    ArgSlot::Arg1 => rel.subject_ref = fixed.clone(),
                    ArgSlot::Arg2 => rel.object_ref = fixed.clone(),
                }
                log.push(
                    RepairRule::RelationArgument,
                    &dangling.relation_id,
                    before,
                    format!("{}:{}", dangling.slot, fixed),
                );
            }
            None => log.push(
                RepairRule::RelationArgument,
                &dangling.relation_id,
                before,
                UNRESOLVED.to_string(),
            ),
        }
    }
    out.recompute_unresolved();
    (out, log)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// True when `end` does not cut through a word.
fn ends_at_word_boundary(doc: &TextDocument, end: usize) -> bool {
    match (end.checked_sub(1).and_then(|i| doc.char_at(i)), doc.char_at(end)) {
        (Some(last), Some(next)) => !(is_word_char(last) && is_word_char(next)),
        _ => true,
    }
}

/// Looks for a single ±1 adjustment of one fragment end that makes the
/// joined slices equal `surface`.
fn adjust_one_end(doc: &TextDocument, fragments: &[Span], surface: &str) -> Option<Vec<Span>> {
    for i in 0..fragments.len() {
        let limit = fragments.get(i + 1).map_or(doc.len(), |next| next.start);
        let frag = fragments[i];
        let candidates = [
            (frag.end < limit).then(|| frag.end + 1),
            (frag.end > frag.start + 1).then(|| frag.end - 1),
        ];
        for new_end in candidates.into_iter().flatten() {
            let mut trial = fragments.to_vec();
            trial[i].end = new_end;
            if ends_at_word_boundary(doc, new_end) && join_fragments(doc, &trial) == surface {
                return Some(trial);
            }
        }
    }
    None
}

/// Makes every entity's fragment slices agree with its surface text, either
/// by moving one fragment end by a single code point or, failing that, by
/// rewriting the surface text from the document.
pub fn fix_span_boundaries(doc: &AnnotatedDocument) -> (AnnotatedDocument, RepairLog) {
    let mut out = doc.clone();
    let mut log = RepairLog::new(doc.doc_id());
    let text = &doc.document;

    for entity in out.entities.values_mut() {
        let current = join_fragments(text, &entity.fragments);
        if current == entity.surface_text {
            continue;
        }
        let before = describe_entity(&entity.fragments, &entity.surface_text);
        match adjust_one_end(text, &entity.fragments, &entity.surface_text) {
            Some(fixed) => entity.fragments = fixed,
            None => entity.surface_text = current,
        }
        let after = describe_entity(&entity.fragments, &entity.surface_text);
        log.push(RepairRule::SpanBoundary, &entity.id, before, after);
    }
    (out, log)
}

/// Sorts each entity's fragments left to right and rebuilds the surface
/// text of any entity whose order changed.
pub fn fix_fragment_order(doc: &AnnotatedDocument) -> Result<(AnnotatedDocument, RepairLog), RepairError> {
    let mut out = doc.clone();
    let mut log = RepairLog::new(doc.doc_id());

    for entity in out.entities.values_mut() {
        let mut sorted = entity.fragments.clone();
        sorted.sort();
        if let Some(pair) = sorted.windows(2).find(|w| w[0].end > w[1].start) {
            return Err(RepairError::OverlappingFragments {
                doc_id: doc.doc_id().to_string(),
                entity_id: entity.id.clone(),
                first: pair[0],
                second: pair[1],
            });
        }
        if sorted != entity.fragments {
            let before = describe_fragments(&entity.fragments);
            entity.surface_text = join_fragments(&doc.document, &sorted);
            entity.fragments = sorted;
            log.push(
                RepairRule::FragmentOrder,
                &entity.id,
                before,
                describe_fragments(&entity.fragments),
            );
        }
    }
    Ok((out, log))
}

/// Fragment order, then span boundaries, then relation arguments.
pub fn repair_all(doc: &AnnotatedDocument) -> Result<(AnnotatedDocument, RepairLog), RepairError> {
    let (ordered, mut log) = fix_fragment_order(doc)?;
    let (bounded, span_log) = fix_span_boundaries(&ordered);
    let (resolved, arg_log) = fix_relation_arguments(&bounded);
    log.extend(span_log);
    log.extend(arg_log);
    Ok((resolved, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standoff::parse_document;

    fn fig3_like() -> AnnotatedDocument {
        let mut ann = String::new();
        let text = "abcdefghij klmnopqrst";
        for i in 1..=9 {
            ann.push_str(&format!("T{i}\tDISEASE {} {}\t{}\n", i - 1, i, &text[i - 1..i]));
        }
        ann.push_str("R1\tproduces Arg1:T1 Arg2:T2\n");
        ann.push_str("R5\tanaphora Arg1:T1 Arg2:T90\n");
        parse_document(text, &ann, "fig3").unwrap()
    }

    #[test]
    fn strips_trailing_zero() {
        let (fixed, log) = fix_relation_arguments(&fig3_like());
        assert_eq!(fixed.relations["R5"].object_ref, "T9");
        assert!(fixed.unresolved_refs.is_empty());
        assert_eq!(log.entries.len(), 1);
        assert_eq!(log.entries[0].before, "Arg2:T90");
        assert_eq!(log.entries[0].after, "Arg2:T9");
        assert_eq!(log.to_string(), "fig3 relation_argument R5 Arg2:T90 -> Arg2:T9\n");
    }

    #[test]
    fn hand_built_subject_mapping() {
        let mut ann = String::new();
        for i in 1..=12 {
            ann.push_str(&format!("T{i}\tSIGN {} {}\tx\n", i - 1, i));
        }
        ann.push_str("R1\tproduces Arg1:T100 Arg2:T2\n");
        let doc = parse_document(&"x".repeat(12), &ann, "d").unwrap();
        let (fixed, log) = fix_relation_arguments(&doc);
        assert_eq!(fixed.relations["R1"].subject_ref, "T10");
        assert_eq!(log.count(RepairRule::RelationArgument), 1);
    }

    #[test]
    fn unfixable_reference_stays_dangling() {
        let doc = parse_document(
            "abc",
            "T1\tSIGN 0 1\ta\nR1\tproduces Arg1:T1 Arg2:T7\nR2\tproduces Arg1:T1 Arg2:T30\n",
            "d",
        )
        .unwrap();
        let (fixed, log) = fix_relation_arguments(&doc);
        assert_eq!(fixed.unresolved_refs.len(), 2);
        assert!(log.entries.iter().all(|e| e.after == UNRESOLVED));
        assert_eq!(log.repaired_targets(RepairRule::RelationArgument).count(), 0);
    }

    #[test]
    fn resolved_document_is_untouched() {
        let doc = parse_document(
            "abc",
            "T1\tSIGN 0 1\ta\nT2\tSIGN 1 2\tb\nR1\tproduces Arg1:T1 Arg2:T2\n",
            "d",
        )
        .unwrap();
        let (fixed, log) = fix_relation_arguments(&doc);
        assert_eq!(fixed, doc);
        assert!(log.is_empty());
    }

    fn padded_text() -> String {
        // "infectious disease" at code points 1272..1290
        format!("{}infectious disease caused by", "x ".repeat(636))
    }

    #[test]
    fn extends_missing_trailing_character() {
        let text = padded_text();
        let doc = parse_document(&text, "T24\tDISEASE 1272 1289\tinfectious disease\n", "d").unwrap();
        let (fixed, log) = fix_span_boundaries(&doc);
        let e = &fixed.entities["T24"];
        assert_eq!(e.fragments, vec![Span::new(1272, 1290)]);
        assert_eq!(e.surface_text, "infectious disease");
        assert_eq!(log.count(RepairRule::SpanBoundary), 1);
    }

    #[test]
    fn shrinks_extra_trailing_character() {
        let text = "fever, chills and headache";
        // deliberate off-by-one: slice is "fever," but text says "fever"
        let doc = parse_document(text, "T1\tSIGN 0 6\tfever\n", "d").unwrap();
        let (fixed, _) = fix_span_boundaries(&doc);
        assert_eq!(fixed.entities["T1"].fragments, vec![Span::new(0, 5)]);
    }

    #[test]
    fn consistent_span_is_unchanged() {
        let doc = parse_document("fever", "T1\tSIGN 0 5\tfever\n", "d").unwrap();
        let (fixed, log) = fix_span_boundaries(&doc);
        assert_eq!(fixed, doc);
        assert!(log.is_empty());
    }

    #[test]
    fn mid_word_adjustment_falls_back_to_rewrite() {
        // shrinking "diseases" to "disease" would cut a word in half
        let text = "rare diseases here";
        let doc = parse_document(text, "T1\tDISEASE 5 13\tdisease\n", "d").unwrap();
        let (fixed, log) = fix_span_boundaries(&doc);
        let e = &fixed.entities["T1"];
        assert_eq!(e.fragments, vec![Span::new(5, 13)]);
        assert_eq!(e.surface_text, "diseases");
        assert_eq!(log.entries.len(), 1);
    }

    #[test]
    fn adjusts_inner_fragment_of_discontinuous_entity() {
        let text = "accumulation of fats called GM 2 gangliosides";
        // first fragment misses the trailing "f" of "of"
        let doc = parse_document(text, "T1\tDISEASE 0 14;28 45\taccumulation of GM 2 gangliosides\n", "d").unwrap();
        let (fixed, _) = fix_span_boundaries(&doc);
        assert_eq!(
            fixed.entities["T1"].fragments,
            vec![Span::new(0, 15), Span::new(28, 45)]
        );
    }

    #[test]
    fn reorders_fragments() {
        let text = "a".repeat(70);
        let doc = parse_document(&text, "T1\tSIGN 50 60;10 20\tx\n", "d").unwrap();
        let (fixed, log) = fix_fragment_order(&doc).unwrap();
        let e = &fixed.entities["T1"];
        assert_eq!(e.fragments, vec![Span::new(10, 20), Span::new(50, 60)]);
        assert_eq!(e.surface_text, format!("{} {}", "a".repeat(10), "a".repeat(10)));
        assert_eq!(log.entries[0].before, "50 60;10 20");
    }

    #[test]
    fn three_shuffled_fragments_sorted() {
        let text = "b".repeat(100);
        let doc = parse_document(&text, "T1\tSIGN 70 80;5 9;30 40\tx\n", "d").unwrap();
        let (fixed, _) = fix_fragment_order(&doc).unwrap();
        let mut oracle = doc.entities["T1"].fragments.clone();
        oracle.sort_by_key(|s| (s.start, s.end));
        assert_eq!(fixed.entities["T1"].fragments, oracle);
    }

    #[test]
    fn ordered_fragments_untouched() {
        let text = "c".repeat(40);
        let doc = parse_document(&text, &format!("T1\tSIGN 1 3;5 8\t{} {}\n", "cc", "ccc"), "d").unwrap();
        let (fixed, log) = fix_fragment_order(&doc).unwrap();
        assert_eq!(fixed, doc);
        assert!(log.is_empty());
    }

    #[test]
    fn overlapping_fragments_are_an_error() {
        let text = "d".repeat(40);
        let doc = parse_document(&text, "T3\tSIGN 10 20;15 25\tx\n", "d").unwrap();
        let err = fix_fragment_order(&doc).unwrap_err();
        assert!(matches!(err, RepairError::OverlappingFragments { ref entity_id, .. } if entity_id == "T3"));
        assert!(repair_all(&doc).is_err());
    }

    #[test]
    fn composite_defects_one_entry_per_rule() {
        let text = "pain in arms. Wilson disease is rare and it causes fatigue";
        let ann = "T1\tSIGN 8 12;0 7\tpain in arms\n\
                   T2\tRAREDISEASE 14 27\tWilson disease\n\
                   T3\tSIGN 51 58\tfatigue\n\
                   R1\tproduces Arg1:T20 Arg2:T3\n";
        let doc = parse_document(text, ann, "d").unwrap();
        let (fixed, log) = repair_all(&doc).unwrap();
        let rules: Vec<_> = log.entries.iter().map(|e| e.rule).collect();
        assert_eq!(
            rules,
            vec![
                RepairRule::FragmentOrder,
                RepairRule::SpanBoundary,
                RepairRule::RelationArgument
            ]
        );
        assert!(fixed.unresolved_refs.is_empty());
        assert_eq!(fixed.entities["T2"].fragments, vec![Span::new(14, 28)]);
        let (again, _) = repair_all(&fixed).unwrap();
        assert_eq!(again, fixed);
    }

    #[test]
    fn clean_document_identity() {
        let doc = parse_document("fever", "T1\tSIGN 0 5\tfever\n", "d").unwrap();
        let (fixed, log) = repair_all(&doc).unwrap();
        assert_eq!(fixed, doc);
        assert!(log.is_empty());
    }
}
