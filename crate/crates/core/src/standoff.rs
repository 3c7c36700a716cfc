//! Standoff annotation documents: a text plus `T` (entity) and `R` (relation)
//! lines that point into it by code-point offsets.
//!
//! Entity line: `T<n>\t<TYPE> <start> <end>[;<start> <end>]*\t<surface text>`
//! Relation line: `R<n>\t<TYPE> Arg1:T<n> Arg2:T<n>`
//!
//! Parsing is deliberately literal. Out-of-order fragments, span/text
//! mismatches and dangling relation arguments are kept as found; fixing them
//! is the job of [`crate::repair`].

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{EntityType, LabelError, Predicate, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StandoffError {
    #[error("document id must not be empty")]
    EmptyDocId,
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: LineError },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("expected {expected} tab-separated fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("malformed annotation id `{0}`")]
    BadId(String),
    #[error("unsupported annotation line `{0}`")]
    Unsupported(String),
    #[error("malformed offsets `{0}`")]
    BadOffsets(String),
    #[error("fragment {span} is empty or reversed")]
    EmptyFragment { span: Span },
    #[error("fragment {span} exceeds document length {length}")]
    OutOfRange { span: Span, length: usize },
    #[error("malformed relation arguments `{0}`")]
    BadArguments(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Document text addressed by code-point offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextDocument {
    doc_id: String,
    text: String,
    // byte offset of every code point, plus text.len()
    boundaries: Vec<usize>,
}

impl TextDocument {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Result<Self, StandoffError> {
        let doc_id = doc_id.into();
        if doc_id.is_empty() {
            return Err(StandoffError::EmptyDocId);
        }
        let text = text.into();
        let mut boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        boundaries.push(text.len());
        Ok(TextDocument {
            doc_id,
            text,
            boundaries,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Number of code points.
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Text of a code-point span. Panics if the span is out of range.
    pub fn slice(&self, span: Span) -> &str {
        &self.text[self.boundaries[span.start]..self.boundaries[span.end]]
    }

    pub fn try_slice(&self, span: Span) -> Option<&str> {
        (span.start <= span.end && span.end <= self.len()).then(|| self.slice(span))
    }

    /// Code point at `index`, if any.
    pub fn char_at(&self, index: usize) -> Option<char> {
        if index >= self.len() {
            return None;
        }
        self.text[self.boundaries[index]..].chars().next()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub id: String,
    pub entity_type: EntityType,
    pub fragments: Vec<Span>,
    pub surface_text: String,
}

impl EntityMention {
    /// Smallest span covering every fragment.
    pub fn covering_span(&self) -> Span {
        let start = self.fragments.iter().map(|f| f.start).min().unwrap_or(0);
        let end = self.fragments.iter().map(|f| f.end).max().unwrap_or(0);
        Span::new(start, end)
    }

    pub fn first_start(&self) -> usize {
        self.fragments.first().map_or(0, |f| f.start)
    }

    pub fn is_discontinuous(&self) -> bool {
        self.fragments.len() > 1
    }

    /// Fragment slices joined by a single space.
    pub fn rendered_text(&self, doc: &TextDocument) -> String {
        join_fragments(doc, &self.fragments)
    }
}

pub(crate) fn join_fragments(doc: &TextDocument, fragments: &[Span]) -> String {
    fragments.iter().map(|&f| doc.slice(f)).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub id: String,
    pub predicate: Predicate,
    /// `Arg1`
    pub subject_ref: String,
    /// `Arg2`
    pub object_ref: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArgSlot {
    Arg1,
    Arg2,
}

impl fmt::Display for ArgSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgSlot::Arg1 => "Arg1",
            ArgSlot::Arg2 => "Arg2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UnresolvedRef {
    pub relation_id: String,
    pub slot: ArgSlot,
    pub entity_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub document: TextDocument,
    pub entities: IndexMap<String, EntityMention>,
    pub relations: IndexMap<String, RelationInstance>,
    pub unresolved_refs: Vec<UnresolvedRef>,
}

impl AnnotatedDocument {
    pub fn new(document: TextDocument) -> Self {
        AnnotatedDocument {
            document,
            entities: IndexMap::new(),
            relations: IndexMap::new(),
            unresolved_refs: Vec::new(),
        }
    }

    pub fn doc_id(&self) -> &str {
        self.document.doc_id()
    }

    pub fn text(&self) -> &str {
        self.document.text()
    }

    pub fn entity(&self, id: &str) -> Option<&EntityMention> {
        self.entities.get(id)
    }

    /// Rebuilds `unresolved_refs` from the current relations.
    pub fn recompute_unresolved(&mut self) {
        let mut refs = Vec::new();
        for rel in self.relations.values() {
            for (slot, id) in [(ArgSlot::Arg1, &rel.subject_ref), (ArgSlot::Arg2, &rel.object_ref)] {
                if !self.entities.contains_key(id) {
                    refs.push(UnresolvedRef {
                        relation_id: rel.id.clone(),
                        slot,
                        entity_id: id.clone(),
                    });
                }
            }
        }
        self.unresolved_refs = refs;
    }

    pub fn is_resolved(&self, relation: &RelationInstance) -> bool {
        self.entities.contains_key(&relation.subject_ref) && self.entities.contains_key(&relation.object_ref)
    }

    /// Relations whose two arguments both resolve, paired with their entities.
    pub fn resolved_relations(&self) -> impl Iterator<Item = (&RelationInstance, &EntityMention, &EntityMention)> {
        self.relations.values().filter_map(|rel| {
            let subject = self.entities.get(&rel.subject_ref)?;
            let object = self.entities.get(&rel.object_ref)?;
            Some((rel, subject, object))
        })
    }
}

fn is_annotation_id(id: &str, prefix: char) -> bool {
    let mut chars = id.chars();
    chars.next() == Some(prefix) && {
        let rest = chars.as_str();
        !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())
    }
}

fn parse_fragments(raw: &str, length: usize) -> Result<Vec<Span>, LineError> {
    let mut fragments = Vec::new();
    for part in raw.split(';') {
        let mut nums = part.split(' ');
        let (Some(a), Some(b), None) = (nums.next(), nums.next(), nums.next()) else {
            return Err(LineError::BadOffsets(raw.to_string()));
        };
        let (Ok(start), Ok(end)) = (a.parse::<usize>(), b.parse::<usize>()) else {
            return Err(LineError::BadOffsets(raw.to_string()));
        };
        let span = Span::new(start, end);
        if start >= end {
            return Err(LineError::EmptyFragment { span });
        }
        if end > length {
            return Err(LineError::OutOfRange { span, length });
        }
        fragments.push(span);
    }
    Ok(fragments)
}

fn parse_entity(fields: &[&str], length: usize) -> Result<EntityMention, LineError> {
    if fields.len() != 3 {
        return Err(LineError::FieldCount {
            expected: 3,
            found: fields.len(),
        });
    }
    // The type label may itself contain spaces ("skin rare disease"): take
    // the longest leading run of tokens that names a known type.
    let body = fields[1];
    let tokens: Vec<&str> = body.split(' ').collect();
    let (label_len, entity_type) = (1..tokens.len())
        .rev()
        .find_map(|k| tokens[..k].join(" ").parse::<EntityType>().ok().map(|t| (k, t)))
        .map_or_else(|| tokens[0].parse::<EntityType>().map(|t| (1, t)), Ok)?;
    let fragments = parse_fragments(&tokens[label_len..].join(" "), length)?;
    Ok(EntityMention {
        id: fields[0].to_string(),
        entity_type,
        fragments,
        surface_text: fields[2].to_string(),
    })
}

fn parse_relation(fields: &[&str]) -> Result<RelationInstance, LineError> {
    // brat tools often leave a trailing tab on relation lines
    let fields = match fields {
        [id, body, ""] => vec![*id, *body],
        other => other.to_vec(),
    };
    if fields.len() != 2 {
        return Err(LineError::FieldCount {
            expected: 2,
            found: fields.len(),
        });
    }
    let tokens: Vec<&str> = fields[1].split(' ').collect();
    let [label, arg1, arg2] = tokens[..] else {
        return Err(LineError::BadArguments(fields[1].to_string()));
    };
    let predicate: Predicate = label.parse()?;
    let take = |raw: &str, key: &str| -> Result<String, LineError> {
        raw.strip_prefix(key)
            .filter(|id| is_annotation_id(id, 'T'))
            .map(str::to_string)
            .ok_or_else(|| LineError::BadArguments(fields[1].to_string()))
    };
    Ok(RelationInstance {
        id: fields[0].to_string(),
        predicate,
        subject_ref: take(arg1, "Arg1:")?,
        object_ref: take(arg2, "Arg2:")?,
    })
}

/// Parses a text/annotation pair into an [`AnnotatedDocument`].
pub fn parse_document(text_content: &str, ann_content: &str, doc_id: &str) -> Result<AnnotatedDocument, StandoffError> {
    let mut doc = AnnotatedDocument::new(TextDocument::new(doc_id, text_content)?);
    let length = doc.document.len();

    for (index, raw_line) in ann_content.split('\n').enumerate() {
        let line_no = index + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: LineError| StandoffError::Line { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        let id = fields[0];
        if is_annotation_id(id, 'T') {
            let entity = parse_entity(&fields, length).map_err(fail)?;
            if doc.entities.contains_key(id) {
                return Err(fail(LineError::DuplicateId(id.to_string())));
            }
            doc.entities.insert(id.to_string(), entity);
        } else if is_annotation_id(id, 'R') {
            let relation = parse_relation(&fields).map_err(fail)?;
            if doc.relations.contains_key(id) {
                return Err(fail(LineError::DuplicateId(id.to_string())));
            }
            doc.relations.insert(id.to_string(), relation);
        } else if id.starts_with(['T', 'R']) {
            return Err(fail(LineError::BadId(id.to_string())));
        } else {
            return Err(fail(LineError::Unsupported(line.to_string())));
        }
    }
    doc.recompute_unresolved();
    Ok(doc)
}

/// Writes a document back out as `(text, ann)`; entities first, then
/// relations, each in stored order.
pub fn serialize_document(doc: &AnnotatedDocument) -> (String, String) {
    use std::fmt::Write;

    let mut ann = String::new();
    for e in doc.entities.values() {
        let offsets = e.fragments.iter().map(Span::to_string).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            ann,
            "{}\t{} {}\t{}",
            e.id,
            e.entity_type.standoff_label(),
            offsets,
            e.surface_text
        );
    }
    for r in doc.relations.values() {
        let _ = writeln!(
            ann,
            "{}\t{} Arg1:{} Arg2:{}",
            r.id, r.predicate, r.subject_ref, r.object_ref
        );
    }
    (doc.text().to_string(), ann)
}
