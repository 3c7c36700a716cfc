//! Rewrites discontinuous entities as contiguous text so that span-based
//! models that expect one start and one end per entity can consume them.
//!
//! Entities are grouped by overlapping covering spans. Each group holding a
//! discontinuous member has its text region replaced by the members'
//! renderings (fragments joined by a space) joined by `" and "`, e.g.
//!
//! ```text
//! weakness in the muscles of the arms and legs
//!   -> weakness in the muscles of the arms and weakness in the muscles of the legs
//! ```
//!
//! Text outside such groups is copied unchanged. The returned [`OffsetMap`]
//! ties every rewritten code point back to the original text or marks it as
//! synthetic glue.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standoff::{AnnotatedDocument, EntityMention, TextDocument};
use crate::types::Span;

pub const ENTITY_JOINER: &str = " and ";
pub const FRAGMENT_JOINER: &str = " ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("{doc_id}: entity {entity} sits in the gap of discontinuous entity {discontinuous}")]
    GapEntity {
        doc_id: String,
        discontinuous: String,
        entity: String,
    },
    #[error("{doc_id}: entity {entity} has unordered or overlapping fragments; repair first")]
    UnrepairedFragments { doc_id: String, entity: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetPair {
    pub rewritten: Span,
    /// `None` marks synthetic text that has no counterpart in the original.
    pub original: Option<Span>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetMap {
    pub pairs: Vec<OffsetPair>,
}

impl OffsetMap {
    pub fn identity(len: usize) -> Self {
        let pairs = if len == 0 {
            Vec::new()
        } else {
            let span = Span::new(0, len);
            vec![OffsetPair {
                rewritten: span,
                original: Some(span),
            }]
        };
        OffsetMap { pairs }
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|p| p.original == Some(p.rewritten)) && self.pairs.len() <= 1
    }

    pub fn rewritten_len(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.rewritten.end)
    }

    /// Original intervals behind a rewritten span, with synthetic glue
    /// dropped and adjacent pieces merged. `None` if the span runs past the
    /// rewritten text.
    pub fn to_original(&self, span: Span) -> Option<Vec<Span>> {
        if span.end > self.rewritten_len() || span.start > span.end {
            return None;
        }
        let mut out: Vec<Span> = Vec::new();
        for pair in &self.pairs {
            let Some(orig) = pair.original else { continue };
            let lo = span.start.max(pair.rewritten.start);
            let hi = span.end.min(pair.rewritten.end);
            if lo >= hi {
                continue;
            }
            let piece = Span::new(
                orig.start + (lo - pair.rewritten.start),
                orig.start + (hi - pair.rewritten.start),
            );
            match out.last_mut() {
                Some(last) if last.end == piece.start => last.end = piece.end,
                _ => out.push(piece),
            }
        }
        Some(out)
    }
}

struct Builder<'a> {
    source: &'a TextDocument,
    text: String,
    len: usize,
    pairs: Vec<OffsetPair>,
}

impl<'a> Builder<'a> {
    fn new(source: &'a TextDocument) -> Self {
        Builder {
            source,
            text: String::with_capacity(source.text().len()),
            len: 0,
            pairs: Vec::new(),
        }
    }

    fn push(&mut self, piece: &str, original: Option<Span>) {
        let n = piece.chars().count();
        if n == 0 {
            return;
        }
        let rewritten = Span::new(self.len, self.len + n);
        self.text.push_str(piece);
        self.len += n;
        if let Some(last) = self.pairs.last_mut() {
            let merged = match (last.original, original) {
                (None, None) => true,
                (Some(a), Some(b)) => a.end == b.start,
                _ => false,
            };
            if merged {
                last.rewritten.end = rewritten.end;
                if let (Some(a), Some(b)) = (last.original.as_mut(), original) {
                    a.end = b.end;
                }
                return;
            }
        }
        self.pairs.push(OffsetPair { rewritten, original });
    }

    fn copy(&mut self, span: Span) {
        let source = self.source;
        self.push(source.slice(span), Some(span));
    }

    fn glue(&mut self, s: &str) {
        self.push(s, None);
    }
}

/// Maximal runs of entities whose covering spans overlap, each sorted by
/// `(first fragment start, covering end, id)`.
fn overlap_groups(entities: &IndexMap<String, EntityMention>) -> Vec<Vec<&EntityMention>> {
    let mut sorted: Vec<&EntityMention> = entities.values().collect();
    sorted.sort_by(|a, b| {
        let (sa, sb) = (a.covering_span(), b.covering_span());
        (sa.start, sa.end, &a.id).cmp(&(sb.start, sb.end, &b.id))
    });
    let mut groups: Vec<Vec<&EntityMention>> = Vec::new();
    let mut group_end = 0;
    for entity in sorted {
        let span = entity.covering_span();
        match groups.last_mut() {
            Some(group) if span.start < group_end => {
                group.push(entity);
                group_end = group_end.max(span.end);
            }
            _ => {
                groups.push(vec![entity]);
                group_end = span.end;
            }
        }
    }
    for group in &mut groups {
        group.sort_by(|a, b| {
            (a.first_start(), a.covering_span().end, &a.id).cmp(&(b.first_start(), b.covering_span().end, &b.id))
        });
    }
    groups
}

enum Placement {
    Rendered,
    /// Inside fragment `fragment` of the rendered member at `host`.
    Embedded {
        host: usize,
        fragment: usize,
    },
}

fn plan_group(doc_id: &str, members: &[&EntityMention]) -> Result<Vec<Placement>, FlattenError> {
    // Longest members claim rendering first so that contained members can be
    // placed inside them instead of being duplicated.
    let mut by_size: Vec<usize> = (0..members.len()).collect();
    by_size.sort_by_key(|&i| std::cmp::Reverse(members[i].fragments.iter().map(Span::len).sum::<usize>()));

    let mut plan: Vec<Option<Placement>> = (0..members.len()).map(|_| None).collect();
    for &i in &by_size {
        let m = members[i];
        if m.is_discontinuous() {
            plan[i] = Some(Placement::Rendered);
            continue;
        }
        let span = m.fragments[0];
        let host = (0..members.len()).find_map(|h| {
            if h == i || !matches!(plan[h], Some(Placement::Rendered)) {
                return None;
            }
            let k = members[h].fragments.iter().position(|f| f.contains(&span))?;
            Some((h, k))
        });
        plan[i] = Some(match host {
            Some((host, fragment)) => Placement::Embedded { host, fragment },
            None => Placement::Rendered,
        });
    }
    let plan: Vec<Placement> = plan.into_iter().map(|p| p.expect("every member planned")).collect();

    for (i, m) in members.iter().enumerate() {
        if m.is_discontinuous() || !matches!(plan[i], Placement::Rendered) {
            continue;
        }
        let span = m.fragments[0];
        for d in members.iter().filter(|d| d.is_discontinuous()) {
            if d.covering_span().overlaps(&span) && !d.fragments.iter().any(|f| f.overlaps(&span)) {
                return Err(FlattenError::GapEntity {
                    doc_id: doc_id.to_string(),
                    discontinuous: d.id.clone(),
                    entity: m.id.clone(),
                });
            }
        }
    }
    Ok(plan)
}

/// Flattens every discontinuous entity of a repaired document.
pub fn flatten_document(doc: &AnnotatedDocument) -> Result<(AnnotatedDocument, OffsetMap), FlattenError> {
    let doc_id = doc.doc_id();
    for e in doc.entities.values() {
        if e.fragments.windows(2).any(|w| w[0].end > w[1].start) {
            return Err(FlattenError::UnrepairedFragments {
                doc_id: doc_id.to_string(),
                entity: e.id.clone(),
            });
        }
    }

    let source = &doc.document;
    let mut out = Builder::new(source);
    let mut new_fragments: IndexMap<&str, Span> = IndexMap::new();
    let mut cursor = 0usize;
    // new offset minus old offset for text copied since the last rewrite
    let mut delta: isize = 0;

    for group in overlap_groups(&doc.entities) {
        if !group.iter().any(|e| e.is_discontinuous()) {
            for e in &group {
                let s = e.fragments[0];
                let shift = |x: usize| (x as isize + delta) as usize;
                new_fragments.insert(e.id.as_str(), Span::new(shift(s.start), shift(s.end)));
            }
            continue;
        }

        let plan = plan_group(doc_id, &group)?;
        let region_start = group.iter().map(|e| e.covering_span().start).min().unwrap_or(cursor);
        let region_end = group.iter().map(|e| e.covering_span().end).max().unwrap_or(cursor);
        out.copy(Span::new(cursor, region_start));

        // start offset of every fragment of every rendered member
        let mut fragment_starts: Vec<Vec<usize>> = vec![Vec::new(); group.len()];
        let mut first = true;
        for (i, m) in group.iter().enumerate() {
            if !matches!(plan[i], Placement::Rendered) {
                continue;
            }
            if !first {
                out.glue(ENTITY_JOINER);
            }
            first = false;
            let start = out.len;
            for (k, &f) in m.fragments.iter().enumerate() {
                if k > 0 {
                    out.glue(FRAGMENT_JOINER);
                }
                fragment_starts[i].push(out.len);
                out.copy(f);
            }
            new_fragments.insert(m.id.as_str(), Span::new(start, out.len));
        }
        for (i, m) in group.iter().enumerate() {
            if let Placement::Embedded { host, fragment } = plan[i] {
                let host_fragment = group[host].fragments[fragment];
                let span = m.fragments[0];
                let start = fragment_starts[host][fragment] + (span.start - host_fragment.start);
                new_fragments.insert(m.id.as_str(), Span::new(start, start + span.len()));
            }
        }

        cursor = region_end;
        delta = out.len as isize - cursor as isize;
    }
    out.copy(Span::new(cursor, source.len()));

    let text = TextDocument::new(doc_id, out.text).expect("doc id already validated");
    let mut flat = AnnotatedDocument::new(text);
    for e in doc.entities.values() {
        let span = new_fragments[e.id.as_str()];
        flat.entities.insert(
            e.id.clone(),
            EntityMention {
                id: e.id.clone(),
                entity_type: e.entity_type,
                fragments: vec![span],
                surface_text: flat.document.slice(span).to_string(),
            },
        );
    }
    flat.relations = doc.relations.clone();
    flat.recompute_unresolved();
    Ok((flat, OffsetMap { pairs: out.pairs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standoff::parse_document;
    use crate::types::EntityType;

    const WEAKNESS: &str = "weakness in the muscles of the arms and legs";

    fn weakness_doc() -> AnnotatedDocument {
        parse_document(
            WEAKNESS,
            "T1\tSIGN 0 35\tweakness in the muscles of the arms\n\
             T2\tSIGN 0 30;40 44\tweakness in the muscles of the legs\n\
             R1\tproduces Arg1:T1 Arg2:T2\n",
            "w",
        )
        .unwrap()
    }

    #[test]
    fn coordination_example() {
        let (flat, map) = flatten_document(&weakness_doc()).unwrap();
        assert_eq!(
            flat.text(),
            "weakness in the muscles of the arms and weakness in the muscles of the legs"
        );
        let t1 = &flat.entities["T1"];
        let t2 = &flat.entities["T2"];
        assert_eq!(t1.surface_text, "weakness in the muscles of the arms");
        assert_eq!(t2.surface_text, "weakness in the muscles of the legs");
        assert_eq!(t1.fragments, vec![Span::new(0, 35)]);
        assert_eq!(t2.fragments, vec![Span::new(40, 75)]);
        assert!(flat.entities.values().all(|e| e.entity_type == EntityType::Sign));
        assert_eq!(flat.relations, weakness_doc().relations);

        let originals: Vec<_> = map.pairs.iter().map(|p| p.original).collect();
        assert_eq!(
            originals,
            vec![
                Some(Span::new(0, 35)),
                None,
                Some(Span::new(0, 30)),
                None,
                Some(Span::new(40, 44)),
            ]
        );
        assert_eq!(
            map.to_original(Span::new(40, 75)).unwrap(),
            vec![Span::new(0, 30), Span::new(40, 44)]
        );
    }

    #[test]
    fn single_discontinuous_entity_rewrite() {
        let text = "The accumulation of fats (lipids) called GM 2 gangliosides occurs.";
        let doc = parse_document(
            text,
            "T1\tDISEASE 4 19;41 58\taccumulation of GM 2 gangliosides\nT2\tSIGN 59 65\toccurs\n",
            "g",
        )
        .unwrap();
        let (flat, map) = flatten_document(&doc).unwrap();
        assert_eq!(flat.text(), "The accumulation of GM 2 gangliosides occurs.");
        assert_eq!(flat.entities["T1"].surface_text, "accumulation of GM 2 gangliosides");
        assert_eq!(flat.entities["T2"].surface_text, "occurs");
        assert_eq!(
            map.to_original(flat.entities["T2"].fragments[0]).unwrap(),
            vec![Span::new(59, 65)]
        );
    }

    #[test]
    fn no_discontinuity_is_identity() {
        let doc = parse_document("fever and chills", "T1\tSIGN 0 5\tfever\nT2\tSIGN 10 16\tchills\n", "d").unwrap();
        let (flat, map) = flatten_document(&doc).unwrap();
        assert_eq!(flat, doc);
        assert!(map.is_identity());
        assert_eq!(map, OffsetMap::identity(16));
    }

    #[test]
    fn flatten_is_idempotent() {
        let (once, _) = flatten_document(&weakness_doc()).unwrap();
        let (twice, map) = flatten_document(&once).unwrap();
        assert_eq!(once, twice);
        assert!(map.is_identity());
    }

    #[test]
    fn nested_member_is_placed_inside_host() {
        let doc = parse_document(
            WEAKNESS,
            "T1\tSIGN 0 35\tweakness in the muscles of the arms\n\
             T2\tSIGN 0 30;40 44\tweakness in the muscles of the legs\n\
             T3\tSIGN 16 23\tmuscles\n",
            "w",
        )
        .unwrap();
        let (flat, _) = flatten_document(&doc).unwrap();
        assert_eq!(flat.entities["T3"].fragments, vec![Span::new(16, 23)]);
        assert_eq!(flat.entities["T3"].surface_text, "muscles");
    }

    #[test]
    fn entity_in_gap_is_an_error() {
        let text = "accumulation of fats (lipids) called GM 2 gangliosides";
        let doc = parse_document(
            text,
            "T1\tDISEASE 0 15;37 54\taccumulation of GM 2 gangliosides\nT2\tSIGN 16 20\tfats\n",
            "g",
        )
        .unwrap();
        let err = flatten_document(&doc).unwrap_err();
        assert_eq!(
            err,
            FlattenError::GapEntity {
                doc_id: "g".into(),
                discontinuous: "T1".into(),
                entity: "T2".into()
            }
        );
    }

    #[test]
    fn text_after_rewrite_is_shifted() {
        let text = "arms and legs weak. Also fever.";
        let doc = parse_document(
            text,
            "T1\tSIGN 0 4;14 18\tarms weak\nT2\tSIGN 9 18\tlegs weak\nT3\tSIGN 25 30\tfever\n",
            "d",
        )
        .unwrap();
        let (flat, map) = flatten_document(&doc).unwrap();
        assert_eq!(flat.text(), "arms weak and legs weak. Also fever.");
        let t3 = &flat.entities["T3"];
        assert_eq!(t3.surface_text, "fever");
        assert_eq!(map.to_original(t3.fragments[0]).unwrap(), vec![Span::new(25, 30)]);
        assert_eq!(map.rewritten_len(), flat.document.len());
    }
}
