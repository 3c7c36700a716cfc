#![allow(dead_code)]

use proptest::prelude::*;
use relkit::standoff::parse_document;
use relkit::{AnnotatedDocument, EntityType, Predicate, Span};

/// Filler vocabulary. None of these collide with schema scaffolding words,
/// type words or special tokens, and several are multi-byte.
pub const WORDS: &[&str] = &[
    "zorbic", "quell", "naxa", "ferrin", "ölmek", "trave", "kessel", "myr", "plonk", "vandre", "wilm's", "co-lath",
    "ßurat", "jeddo", "umbrel", "xiva", "éclo", "dunt",
];

#[derive(Debug, Clone)]
pub struct EntitySpec {
    pub start_word: usize,
    pub len: usize,
    /// `(gap words, second fragment words)` for a discontinuous entity.
    pub gap: Option<(usize, usize)>,
    pub entity_type: EntityType,
}

#[derive(Debug, Clone)]
pub struct RelationSpec {
    pub subject: usize,
    pub object: usize,
    pub predicate: Predicate,
    pub dangling: bool,
}

#[derive(Debug, Clone)]
pub struct DocSpec {
    pub words: Vec<usize>,
    /// Separator after each word but the last: `true` for ". ".
    pub periods: Vec<bool>,
    pub entities: Vec<EntitySpec>,
    pub relations: Vec<RelationSpec>,
}

pub fn entity_type() -> impl Strategy<Value = EntityType> {
    prop::sample::select(EntityType::ALL.to_vec())
}

pub fn predicate() -> impl Strategy<Value = Predicate> {
    prop::sample::select(Predicate::ALL.to_vec())
}

fn entity_spec() -> impl Strategy<Value = EntitySpec> {
    (
        0usize..40,
        1usize..=3,
        prop::option::weighted(0.3, (1usize..=2, 1usize..=2)),
        entity_type(),
    )
        .prop_map(|(start_word, len, gap, entity_type)| EntitySpec {
            start_word,
            len,
            gap,
            entity_type,
        })
}

fn relation_spec(allow_dangling: bool) -> impl Strategy<Value = RelationSpec> {
    let dangling = if allow_dangling { 0.1 } else { 0.0 };
    (0usize..64, 0usize..64, predicate(), prop::bool::weighted(dangling)).prop_map(
        |(subject, object, predicate, dangling)| RelationSpec {
            subject,
            object,
            predicate,
            dangling,
        },
    )
}

pub fn doc_spec(allow_dangling: bool) -> impl Strategy<Value = DocSpec> {
    (10usize..40)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(0..WORDS.len(), n),
                prop::collection::vec(prop::bool::weighted(0.1), n),
                prop::collection::vec(entity_spec(), 0..8),
                prop::collection::vec(relation_spec(allow_dangling), 0..10),
            )
        })
        .prop_map(|(words, periods, entities, relations)| DocSpec {
            words,
            periods,
            entities,
            relations,
        })
}

/// Text, code-point word spans, and annotation file of a spec.
pub fn render(spec: &DocSpec) -> (String, String) {
    let mut text = String::new();
    let mut spans = Vec::new();
    let mut pos = 0;
    for (i, &w) in spec.words.iter().enumerate() {
        let word = WORDS[w];
        text.push_str(word);
        let len = word.chars().count();
        spans.push(Span::new(pos, pos + len));
        pos += len;
        if i + 1 < spec.words.len() {
            let sep = if spec.periods[i] { ". " } else { " " };
            text.push_str(sep);
            pos += sep.chars().count();
        }
    }
    text.push('\n');

    let n = spans.len();
    let chars: Vec<char> = text.chars().collect();
    let slice = |s: Span| chars[s.start..s.end].iter().collect::<String>();
    let mut ann = String::new();
    let mut count = 0;
    for e in &spec.entities {
        let need = e.len + e.gap.map_or(0, |(g, l)| g + l);
        if need > n {
            continue;
        }
        let a = e.start_word % (n - need + 1);
        let mut fragments = vec![Span::new(spans[a].start, spans[a + e.len - 1].end)];
        if let Some((g, l)) = e.gap {
            let b = a + e.len + g;
            fragments.push(Span::new(spans[b].start, spans[b + l - 1].end));
        }
        count += 1;
        let offsets = fragments.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";");
        let surface = fragments.iter().map(|&f| slice(f)).collect::<Vec<_>>().join(" ");
        ann.push_str(&format!(
            "T{count}\t{} {offsets}\t{surface}\n",
            e.entity_type.standoff_label()
        ));
    }
    if count > 0 {
        for (k, r) in spec.relations.iter().enumerate() {
            let arg = |i: usize| format!("T{}", i % count + 1);
            let object = if r.dangling {
                format!("T{}", count + 50)
            } else {
                arg(r.object)
            };
            ann.push_str(&format!(
                "R{}\t{} Arg1:{} Arg2:{object}\n",
                k + 1,
                r.predicate,
                arg(r.subject)
            ));
        }
    }
    (text, ann)
}

pub fn build(spec: &DocSpec, doc_id: &str) -> AnnotatedDocument {
    let (text, ann) = render(spec);
    parse_document(&text, &ann, doc_id).expect("generated documents parse")
}

pub fn document(allow_dangling: bool) -> impl Strategy<Value = AnnotatedDocument> {
    doc_spec(allow_dangling).prop_map(|spec| build(&spec, "synthetic"))
}

/// Documents whose words are separated by single spaces only, so no entity
/// text contains sentence punctuation.
pub fn document_without_periods(allow_dangling: bool) -> impl Strategy<Value = AnnotatedDocument> {
    doc_spec(allow_dangling).prop_map(|mut spec| {
        spec.periods.iter_mut().for_each(|p| *p = false);
        build(&spec, "synthetic")
    })
}

/// A short entity text drawn from [`WORDS`].
pub fn entity_text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..=3).prop_map(|w| w.join(" "))
}
