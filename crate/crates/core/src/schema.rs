//! Target encodings for generative relation extraction, and the decoders
//! that turn model generations back into triples.
//!
//! Three encodings are supported:
//!
//! * `seq2rel`: `<subj> @SubjType@ <obj> @ObjType@ @PREDICATE@ ... @END@`,
//!   or `@NOREL@` for a document without relations.
//! * `rel-is`: `The relation between <subj> and <obj> is <noun>.`
//! * `natural-lang`: one hand-written sentence template per predicate.
//!
//! `rel-is` carries no entity types and two of the natural-language
//! templates carry only one; see [`SchemaKind::type_visibility`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standoff::AnnotatedDocument;
use crate::types::{EntityType, Predicate};

pub const END_TOKEN: &str = "@END@";
pub const NOREL_TOKEN: &str = "@NOREL@";

/// Instruction prepended to the source text when copy instructions are on.
pub const COPY_INSTRUCTION: &str = "From the given abstract, find all the entities and relations among them. Do not generate any token outside the abstract.";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject_text: String,
    pub subject_type: EntityType,
    pub predicate: Predicate,
    pub object_text: String,
    pub object_type: EntityType,
}

impl Triple {
    pub fn new(
        subject_text: impl Into<String>,
        subject_type: EntityType,
        predicate: Predicate,
        object_text: impl Into<String>,
        object_type: EntityType,
    ) -> Self {
        Triple {
            subject_text: subject_text.into(),
            subject_type,
            predicate,
            object_text: object_text.into(),
            object_type,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} [{}], {}, {} [{}])",
            self.subject_text, self.subject_type, self.predicate, self.object_text, self.object_type
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaKind {
    Seq2Rel,
    RelIs,
    NaturalLang,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 3] = [SchemaKind::Seq2Rel, SchemaKind::RelIs, SchemaKind::NaturalLang];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaKind::Seq2Rel => "seq2rel",
            SchemaKind::RelIs => "rel-is",
            SchemaKind::NaturalLang => "natural-lang",
        }
    }

    /// Whether the encoding of `predicate` carries the (subject, object)
    /// entity types. Types it does not carry are filled in by inference on
    /// decode and should be ignored when comparing.
    pub fn type_visibility(self, predicate: Predicate) -> (bool, bool) {
        match (self, predicate) {
            (SchemaKind::Seq2Rel, _) => (true, true),
            (SchemaKind::RelIs, _) => (false, false),
            (SchemaKind::NaturalLang, Predicate::Anaphora) => (true, false),
            (SchemaKind::NaturalLang, Predicate::IsAcron) => (false, true),
            (SchemaKind::NaturalLang, _) => (true, true),
        }
    }
}

impl FromStr for SchemaKind {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "seq2rel" => Ok(SchemaKind::Seq2Rel),
            "rel-is" => Ok(SchemaKind::RelIs),
            "natural-lang" => Ok(SchemaKind::NaturalLang),
            _ => Err(SchemaError::UnknownSchema(s.to_string())),
        }
    }
}

impl fmt::Display for SchemaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("unknown schema `{0}` (expected seq2rel, rel-is or natural-lang)")]
    UnknownSchema(String),
    #[error("noun map: {0}")]
    NounMap(String),
}

/// Noun form of each predicate for the `rel-is` template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateNounMap {
    nouns: BTreeMap<Predicate, String>,
}

impl Default for PredicateNounMap {
    fn default() -> Self {
        let nouns = [
            (Predicate::Produces, "producer"),
            (Predicate::Anaphora, "anaphor"),
            (Predicate::IsAcron, "acronym"),
            (Predicate::IsSynon, "synonym"),
            (Predicate::IsA, "hyponym"),
            (Predicate::IncreasesRiskOf, "risk factor"),
        ];
        PredicateNounMap {
            nouns: nouns.into_iter().map(|(p, n)| (p, n.to_string())).collect(),
        }
    }
}

impl PredicateNounMap {
    /// Builds a map from `(predicate label, noun)` pairs. The map must cover
    /// all six predicates with distinct nouns, and keep `is_a -> hyponym`
    /// and `is_synon -> synonym`.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, SchemaError> {
        let mut nouns = BTreeMap::new();
        for (label, noun) in pairs {
            let p: Predicate = label.parse().map_err(|e| SchemaError::NounMap(format!("{e}")))?;
            let noun = noun.split_whitespace().collect::<Vec<_>>().join(" ");
            if noun.is_empty() {
                return Err(SchemaError::NounMap(format!("empty noun for {p}")));
            }
            nouns.insert(p, noun);
        }
        for p in Predicate::ALL {
            if !nouns.contains_key(&p) {
                return Err(SchemaError::NounMap(format!("missing noun for {p}")));
            }
        }
        for (p, fixed) in [(Predicate::IsA, "hyponym"), (Predicate::IsSynon, "synonym")] {
            if nouns[&p] != fixed {
                return Err(SchemaError::NounMap(format!("{p} must map to `{fixed}`")));
            }
        }
        let mut seen = HashMap::new();
        for (p, n) in &nouns {
            if let Some(prev) = seen.insert(n.to_lowercase(), *p) {
                return Err(SchemaError::NounMap(format!("`{n}` used for both {prev} and {p}")));
            }
        }
        Ok(PredicateNounMap { nouns })
    }

    /// Parses a JSON object `{"produces": "producer", ...}`.
    pub fn from_json(raw: &str) -> Result<Self, SchemaError> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(raw).map_err(|e| SchemaError::NounMap(e.to_string()))?;
        Self::from_pairs(map.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn noun(&self, predicate: Predicate) -> &str {
        &self.nouns[&predicate]
    }

    pub fn predicate_for(&self, noun: &str) -> Option<Predicate> {
        let folded = noun.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        self.nouns
            .iter()
            .find(|(_, n)| n.to_lowercase() == folded)
            .map(|(p, _)| *p)
    }

    fn noun_pattern(&self) -> String {
        let mut nouns: Vec<&String> = self.nouns.values().collect();
        nouns.sort_by_key(|n| std::cmp::Reverse(n.len()));
        nouns
            .iter()
            .map(|n| n.split_whitespace().map(regex::escape).collect::<Vec<_>>().join(r"\s+"))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// One line of an encoded training corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedExample {
    pub doc_id: String,
    pub source: String,
    pub target: String,
}

/// A gold triple together with the offsets used to order it.
struct OrderedTriple {
    triple: Triple,
    subject_start: usize,
    object_start: usize,
}

/// Triples of every resolved relation, in annotation order, duplicates kept.
pub fn gold_triples(doc: &AnnotatedDocument) -> Vec<Triple> {
    doc.resolved_relations()
        .map(|(rel, s, o)| {
            Triple::new(
                s.rendered_text(&doc.document),
                s.entity_type,
                rel.predicate,
                o.rendered_text(&doc.document),
                o.entity_type,
            )
        })
        .collect()
}

/// Ids of relations left out of encoding because an argument is dangling.
pub fn skipped_relations(doc: &AnnotatedDocument) -> Vec<&str> {
    doc.relations
        .values()
        .filter(|r| !doc.is_resolved(r))
        .map(|r| r.id.as_str())
        .collect()
}

/// Gold triples with exact duplicates collapsed, ordered by where subject
/// and object first occur in the text, then by predicate token.
fn ordered_gold(doc: &AnnotatedDocument) -> Vec<Triple> {
    let mut first_seen: BTreeMap<Triple, OrderedTriple> = BTreeMap::new();
    for (rel, s, o) in doc.resolved_relations() {
        let triple = Triple::new(
            s.rendered_text(&doc.document),
            s.entity_type,
            rel.predicate,
            o.rendered_text(&doc.document),
            o.entity_type,
        );
        let candidate = OrderedTriple {
            triple: triple.clone(),
            subject_start: s.first_start(),
            object_start: o.first_start(),
        };
        first_seen
            .entry(triple)
            .and_modify(|held| {
                if (candidate.subject_start, candidate.object_start) < (held.subject_start, held.object_start) {
                    held.subject_start = candidate.subject_start;
                    held.object_start = candidate.object_start;
                }
            })
            .or_insert(candidate);
    }
    let mut ordered: Vec<OrderedTriple> = first_seen.into_values().collect();
    ordered.sort_by(|a, b| {
        (a.subject_start, a.object_start, a.triple.predicate.token(), &a.triple).cmp(&(
            b.subject_start,
            b.object_start,
            b.triple.predicate.token(),
            &b.triple,
        ))
    });
    ordered.into_iter().map(|o| o.triple).collect()
}

fn natural_sentence(t: &Triple) -> String {
    let (s, st, o, ot) = (
        &t.subject_text,
        t.subject_type.words(),
        &t.object_text,
        t.object_type.words(),
    );
    match t.predicate {
        Predicate::Produces => format!("{s} is a {st} that produces {o}, as a {ot}"),
        Predicate::Anaphora => {
            format!("The term \"{o}\" is an anaphor that refers back to the entity of the {st} {s}")
        }
        Predicate::IsSynon => format!("The {st} {s} and the {ot} {o} are synonyms"),
        Predicate::IsAcron => format!("The acronym {s} stands for {o}, a {ot}"),
        Predicate::IncreasesRiskOf => {
            format!("The presence of the {st} {s} increases the risk of developing the {ot} {o}")
        }
        Predicate::IsA => format!("The {st} {s} is a type of {o}, a {ot}"),
    }
}

/// Renders a list of triples in the given encoding, in the given order.
pub fn encode_triples(triples: &[Triple], kind: SchemaKind, nouns: &PredicateNounMap) -> String {
    match kind {
        SchemaKind::Seq2Rel => {
            if triples.is_empty() {
                return NOREL_TOKEN.to_string();
            }
            let mut parts: Vec<String> = triples
                .iter()
                .map(|t| {
                    format!(
                        "{} {} {} {} {}",
                        t.subject_text,
                        t.subject_type.token(),
                        t.object_text,
                        t.object_type.token(),
                        t.predicate.token()
                    )
                })
                .collect();
            parts.push(END_TOKEN.to_string());
            parts.join(" ")
        }
        SchemaKind::RelIs => triples
            .iter()
            .map(|t| {
                format!(
                    "The relation between {} and {} is {}.",
                    t.subject_text,
                    t.object_text,
                    nouns.noun(t.predicate)
                )
            })
            .collect::<Vec<_>>()
            .join(" "),
        SchemaKind::NaturalLang => triples.iter().map(natural_sentence).collect::<Vec<_>>().join(". "),
    }
}

/// Encodes the document's resolved relations; relations with a dangling
/// argument are left out (see [`skipped_relations`]).
pub fn encode_target(doc: &AnnotatedDocument, kind: SchemaKind, nouns: &PredicateNounMap) -> String {
    encode_triples(&ordered_gold(doc), kind, nouns)
}

pub fn encode_example(
    doc: &AnnotatedDocument,
    kind: SchemaKind,
    nouns: &PredicateNounMap,
    copy_instruct: bool,
) -> EncodedExample {
    EncodedExample {
        doc_id: doc.doc_id().to_string(),
        source: build_prompt(doc.text(), copy_instruct),
        target: encode_target(doc, kind, nouns),
    }
}

/// Every special token of the `seq2rel` vocabulary, one per entry.
pub fn special_tokens() -> Vec<&'static str> {
    let mut tokens: Vec<&'static str> = EntityType::ALL.iter().map(|t| t.token()).collect();
    tokens.extend(Predicate::ALL.iter().map(|p| p.token()));
    tokens.push(NOREL_TOKEN);
    tokens.push(END_TOKEN);
    tokens
}

pub fn build_prompt(doc_text: &str, copy_instruct: bool) -> String {
    if copy_instruct {
        format!("{COPY_INSTRUCTION}\n\n{doc_text}")
    } else {
        doc_text.to_string()
    }
}

static WHITESPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());
static HYPHEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r" ?- ?").unwrap());
static SLASH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r" ?/ ?").unwrap());
static SYNONYMS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(\bthe\s+relation(?:ship)?\s+between\s+.+?\s+is\s+)synonyms\b").unwrap());

/// Cleans up tokenizer artefacts in a generation: spaces around hyphens,
/// inside round brackets and around slashes, repeated whitespace, and the
/// plural `synonyms` in `rel-is` sentences.
pub fn normalize_generation(generation: &str) -> String {
    let s = WHITESPACE.replace_all(generation.trim(), " ");
    let s = HYPHEN.replace_all(&s, "-");
    let s = SLASH.replace_all(&s, "/");
    let s = s.replace("( ", "(").replace(" )", ")");
    SYNONYMS.replace_all(&s, "${1}synonym").into_owned()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeIssue {
    pub segment: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decoded {
    pub triples: Vec<Triple>,
    pub issues: Vec<DecodeIssue>,
}

impl Decoded {
    fn skip(&mut self, segment: &str, reason: impl Into<String>) {
        self.issues.push(DecodeIssue {
            segment: segment.trim().to_string(),
            reason: reason.into(),
        });
    }
}

/// Entity types assumed on decode when an encoding does not carry them.
pub fn default_types(predicate: Predicate) -> (EntityType, EntityType) {
    use EntityType::*;
    match predicate {
        Predicate::Produces => (RareDisease, Sign),
        Predicate::Anaphora => (RareDisease, Anaphor),
        Predicate::IsA => (RareDisease, Disease),
        Predicate::IsAcron | Predicate::IsSynon => (RareDisease, RareDisease),
        Predicate::IncreasesRiskOf => (Disease, Disease),
    }
}

/// Parses a generation back into triples. Never fails: malformed pieces
/// are skipped and listed in [`Decoded::issues`].
pub fn decode_target(generation: &str, kind: SchemaKind, nouns: &PredicateNounMap) -> Decoded {
    match kind {
        SchemaKind::Seq2Rel => decode_seq2rel(generation),
        SchemaKind::RelIs => decode_rel_is(generation, nouns),
        SchemaKind::NaturalLang => decode_natural(generation),
    }
}

static SPECIAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[A-Za-z_]+@").unwrap());

fn decode_seq2rel(generation: &str) -> Decoded {
    let mut out = Decoded::default();
    let mut pending: Vec<(String, EntityType)> = Vec::new();
    let mut cursor = 0;
    let mut ended = false;

    for m in SPECIAL.find_iter(generation) {
        let before = generation[cursor..m.start()].trim();
        cursor = m.end();
        let token = m.as_str();
        if let Some(t) = EntityType::from_token(token) {
            if before.is_empty() {
                out.skip(token, "entity type token without a preceding span");
                pending.clear();
            } else {
                pending.push((before.to_string(), t));
            }
        } else if let Some(p) = Predicate::from_token(token) {
            if !before.is_empty() {
                out.skip(before, "text between last entity and predicate");
            }
            if pending.len() == 2 {
                let (o, ot) = pending.pop().expect("two pending");
                let (s, st) = pending.pop().expect("two pending");
                out.triples.push(Triple::new(s, st, p, o, ot));
            } else {
                let seg = pending.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(" | ");
                out.skip(
                    &format!("{seg} {token}"),
                    format!("predicate needs 2 entities, found {}", pending.len()),
                );
            }
            pending.clear();
        } else if token == END_TOKEN {
            if !before.is_empty() || !pending.is_empty() {
                out.skip(before, "incomplete relation before @END@");
            }
            ended = true;
            break;
        } else if token == NOREL_TOKEN {
            if !before.is_empty() || !pending.is_empty() || !out.triples.is_empty() {
                out.skip(before, "@NOREL@ after relation content");
            }
            pending.clear();
            ended = true;
            break;
        } else {
            out.skip(token, "unknown special token");
            pending.clear();
        }
    }
    let rest = generation[cursor..].trim();
    if ended {
        if !rest.is_empty() {
            out.skip(rest, "text after end token");
        }
    } else {
        if !rest.is_empty() || !pending.is_empty() {
            out.skip(rest, "incomplete trailing relation");
        }
        out.skip("", "missing @END@");
    }
    out
}

fn decode_rel_is(generation: &str, nouns: &PredicateNounMap) -> Decoded {
    let pattern = format!(
        r"(?i)\bthe\s+relation(?:ship)?\s+between\s+(.+?)\s+and\s+(.+?)\s+is\s+({})\b\.?",
        nouns.noun_pattern()
    );
    let re = Regex::new(&pattern).expect("noun pattern is escaped");
    let mut out = Decoded::default();
    let mut cursor = 0;
    for caps in re.captures_iter(generation) {
        let whole = caps.get(0).expect("match");
        let gap = &generation[cursor..whole.start()];
        if !gap.trim().is_empty() {
            out.skip(gap, "not a rel-is sentence");
        }
        cursor = whole.end();
        let predicate = nouns.predicate_for(&caps[3]).expect("noun came from the map");
        let (st, ot) = default_types(predicate);
        if caps[1].trim().is_empty() || caps[2].trim().is_empty() {
            out.skip(whole.as_str(), "empty entity text");
            continue;
        }
        out.triples
            .push(Triple::new(caps[1].trim(), st, predicate, caps[2].trim(), ot));
    }
    let tail = &generation[cursor..];
    if !tail.trim().is_empty() {
        out.skip(tail, "not a rel-is sentence");
    }
    out
}

const TYPE_WORDS: &str = "rare skin disease|skin rare disease|rare disease|disease|symptom|sign|anaphor";

struct NaturalTemplate {
    predicate: Predicate,
    regex: Regex,
}

static NATURAL: LazyLock<Vec<NaturalTemplate>> = LazyLock::new(|| {
    let t = TYPE_WORDS;
    let q = "[\"“”]?";
    let templates = [
        (
            Predicate::Produces,
            format!(r"^(?P<s>.+?) is an? (?P<st>{t}) that produces (?P<o>.+?),? as an? (?P<ot>{t})$"),
        ),
        (
            Predicate::Anaphora,
            format!(
                r"^the term {q}(?P<o>.+?){q} is an anaphor that refers back to the entity of the (?P<st>{t}) (?P<s>.+)$"
            ),
        ),
        (
            Predicate::IsSynon,
            format!(r"^the (?P<st>{t}) (?P<s>.+?) and the (?P<ot>{t}) (?P<o>.+?) are synonyms?$"),
        ),
        (
            Predicate::IsAcron,
            format!(r"^the acronym (?P<s>.+?) stands for (?P<o>.+?),? an? (?P<ot>{t})$"),
        ),
        (
            Predicate::IncreasesRiskOf,
            format!(
                r"^the presence of the (?P<st>{t}) (?P<s>.+?) increases the risk of developing the (?P<ot>{t}) (?:of )?(?P<o>.+)$"
            ),
        ),
        (
            Predicate::IsA,
            format!(r"^the (?P<st>{t}) (?P<s>.+?) is a type of (?P<o>.+?),? an? (?P<ot>{t})$"),
        ),
    ];
    templates
        .into_iter()
        .map(|(predicate, p)| NaturalTemplate {
            predicate,
            regex: Regex::new(&format!("(?i){p}")).expect("static template"),
        })
        .collect()
});

fn match_natural(sentence: &str) -> Option<Triple> {
    let sentence = WHITESPACE.replace_all(sentence.trim(), " ");
    let candidates = [sentence.as_ref(), sentence.strip_suffix('.').unwrap_or(&sentence)];
    for candidate in candidates {
        for template in NATURAL.iter() {
            let Some(caps) = template.regex.captures(candidate) else {
                continue;
            };
            if caps["s"].trim().is_empty() || caps["o"].trim().is_empty() {
                continue;
            }
            let ty = |name: &str| caps.name(name).and_then(|m| m.as_str().parse::<EntityType>().ok());
            let object_type = ty("ot").unwrap_or(EntityType::Anaphor);
            // the acronym template names only the expansion's type
            let subject_type = ty("st").unwrap_or(object_type);
            return Some(Triple::new(
                caps["s"].trim(),
                subject_type,
                template.predicate,
                caps["o"].trim(),
                object_type,
            ));
        }
    }
    None
}

static SENTENCE_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\.\s+|\s*\n\s*").unwrap());

fn decode_natural(generation: &str) -> Decoded {
    let mut out = Decoded::default();
    // pieces between candidate sentence breaks, as byte ranges
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for m in SENTENCE_BREAK.find_iter(generation) {
        pieces.push((start, m.start()));
        start = m.end();
    }
    pieces.push((start, generation.len()));
    pieces.retain(|&(a, b)| !generation[a..b].trim().is_empty());

    // A span may itself contain ". ", so a sentence can cover several
    // pieces. Choose the segmentation leaving the fewest pieces unparsed,
    // then the one with the most triples.
    let n = pieces.len();
    let matches: Vec<Vec<Option<Triple>>> = (0..n)
        .map(|i| {
            (i..n)
                .map(|j| match_natural(&generation[pieces[i].0..pieces[j].1]))
                .collect()
        })
        .collect();
    // best[i] = (unparsed pieces, -triples, next step) for pieces[i..]
    let mut best: Vec<(usize, isize, Option<usize>)> = vec![(0, 0, None); n + 1];
    for i in (0..n).rev() {
        let mut choice = (best[i + 1].0 + 1, best[i + 1].1, None);
        for j in i..n {
            if matches[i][j - i].is_some() {
                let candidate = (best[j + 1].0, best[j + 1].1 - 1, Some(j));
                if (candidate.0, candidate.1) < (choice.0, choice.1) {
                    choice = candidate;
                }
            }
        }
        best[i] = choice;
    }
    let mut i = 0;
    while i < n {
        match best[i].2 {
            Some(j) => {
                out.triples
                    .push(matches[i][j - i].clone().expect("chosen span matched"));
                i = j + 1;
            }
            None => {
                out.skip(
                    &generation[pieces[i].0..pieces[i].1],
                    "no natural-language template matches",
                );
                i += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standoff::parse_document;
    use EntityType::*;

    fn nouns() -> PredicateNounMap {
        PredicateNounMap::default()
    }

    #[test]
    fn seq2rel_worked_example() {
        let t = Triple::new(
            "Vitamin D Deficiency Rickets",
            RareDisease,
            Predicate::Produces,
            "bone disease",
            Sign,
        );
        let target = encode_triples(std::slice::from_ref(&t), SchemaKind::Seq2Rel, &nouns());
        assert_eq!(
            target,
            "Vitamin D Deficiency Rickets @RareDisease@ bone disease @Sign@ @PRODUCES@ @END@"
        );
        let decoded = decode_target(&target, SchemaKind::Seq2Rel, &nouns());
        assert_eq!(decoded.triples, vec![t]);
        assert!(decoded.issues.is_empty());
    }

    #[test]
    fn empty_relation_set() {
        assert_eq!(encode_triples(&[], SchemaKind::Seq2Rel, &nouns()), "@NOREL@");
        let d = decode_target("@NOREL@", SchemaKind::Seq2Rel, &nouns());
        assert!(d.triples.is_empty() && d.issues.is_empty());
    }

    #[test]
    fn rel_is_worked_example() {
        let t = Triple::new("Wilm's tumor", RareDisease, Predicate::IsA, "kidney cancer", Disease);
        let target = encode_triples(&[t], SchemaKind::RelIs, &nouns());
        assert_eq!(
            target,
            "The relation between Wilm's tumor and kidney cancer is hyponym."
        );
        // generations may say "relationship" and drop the period
        let d = decode_target(
            "The relationship between Wilm's tumor and kidney cancer is hyponym",
            SchemaKind::RelIs,
            &nouns(),
        );
        assert_eq!(d.triples.len(), 1);
        assert_eq!(d.triples[0].predicate, Predicate::IsA);
        assert_eq!(d.triples[0].subject_text, "Wilm's tumor");
    }

    #[test]
    fn plural_synonym_after_normalization() {
        let raw = "The relation between A and B is synonyms.";
        assert!(decode_target(raw, SchemaKind::RelIs, &nouns()).triples.is_empty());
        let normalized = normalize_generation(raw);
        assert_eq!(normalized, "The relation between A and B is synonym.");
        let d = decode_target(&normalized, SchemaKind::RelIs, &nouns());
        assert_eq!(d.triples.len(), 1);
        assert_eq!(d.triples[0].predicate, Predicate::IsSynon);
        assert_eq!(
            (d.triples[0].subject_text.as_str(), d.triples[0].object_text.as_str()),
            ("A", "B")
        );
    }

    #[test]
    fn natural_lang_produces_example() {
        let t = Triple::new(
            "Asherman's syndrome",
            RareDisease,
            Predicate::Produces,
            "abdominal pain",
            Symptom,
        );
        let s = encode_triples(std::slice::from_ref(&t), SchemaKind::NaturalLang, &nouns());
        assert_eq!(
            s,
            "Asherman's syndrome is a rare disease that produces abdominal pain, as a symptom"
        );
        assert_eq!(decode_target(&s, SchemaKind::NaturalLang, &nouns()).triples, vec![t]);
    }

    #[test]
    fn natural_lang_sentence_split_tolerates_periods_in_spans() {
        let a = Triple::new("St. Anne disease", Disease, Predicate::IsA, "fever type", Disease);
        let b = Triple::new("x", RareDisease, Predicate::Produces, "y", Sign);
        let s = encode_triples(&[a.clone(), b.clone()], SchemaKind::NaturalLang, &nouns());
        let d = decode_target(&s, SchemaKind::NaturalLang, &nouns());
        assert_eq!(d.triples, vec![a, b]);
    }

    #[test]
    fn prompt_prefix() {
        let text = "Balantidiasis is a rare infectious disease.";
        assert_eq!(build_prompt(text, false), text);
        let p = build_prompt(&build_prompt(text, false), true);
        assert!(p.starts_with("From the given abstract"));
        assert_eq!(p, format!("{COPY_INSTRUCTION}\n\n{text}"));
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_generation("long - term"), "long-term");
        assert_eq!(normalize_generation("( protozoan )"), "(protozoan)");
        assert_eq!(normalize_generation("and / or"), "and/or");
        assert_eq!(normalize_generation("  a \n  b  "), "a b");
        let once = normalize_generation("single-celled (protozoan) parasite");
        assert_eq!(normalize_generation(&once), once);
        // natural-lang "are synonyms" is part of the template and stays
        let nl = "The disease a and the disease b are synonyms";
        assert_eq!(normalize_generation(nl), nl);
    }

    #[test]
    fn seq2rel_malformed_segments_reported() {
        let g = "a @Sign@ @PRODUCES@ b @Disease@ c @Sign@ @PRODUCES@ d @Bogus@ e @END@ tail";
        let d = decode_target(g, SchemaKind::Seq2Rel, &nouns());
        assert_eq!(
            d.triples,
            vec![Triple::new("b", Disease, Predicate::Produces, "c", Sign)]
        );
        assert_eq!(d.issues.len(), 4, "{:?}", d.issues);
        let d = decode_target("a @Sign@ b @Sign@ @IS_A@", SchemaKind::Seq2Rel, &nouns());
        assert_eq!(d.triples.len(), 1);
        assert!(d.issues.iter().any(|i| i.reason.contains("@END@")));
    }

    #[test]
    fn noun_map_validation() {
        let ok = r#"{"produces":"cause","anaphora":"anaphor","is_a":"hyponym","is_acron":"acronym","is_synon":"synonym","increase_risk_of":"risk factor"}"#;
        let map = PredicateNounMap::from_json(ok).unwrap();
        assert_eq!(map.noun(Predicate::Produces), "cause");
        assert_eq!(map.predicate_for("Risk  Factor"), Some(Predicate::IncreasesRiskOf));
        let bad = ok.replace("\"hyponym\"", "\"kind\"");
        assert!(PredicateNounMap::from_json(&bad).is_err());
        let dup = ok.replace("\"cause\"", "\"acronym\"");
        assert!(PredicateNounMap::from_json(&dup).is_err());
        assert!(PredicateNounMap::from_json(r#"{"produces":"cause"}"#).is_err());
    }

    #[test]
    fn document_encoding_orders_and_collapses() {
        let text = "Fever and rash occur in Lyme disease; Lyme disease causes fever.";
        let ann = "T1\tSIGN 0 5\tFever\n\
                   T2\tSIGN 10 14\trash\n\
                   T3\tDISEASE 24 36\tLyme disease\n\
                   T4\tDISEASE 38 50\tLyme disease\n\
                   T5\tSIGN 58 63\tfever\n\
                   R1\tproduces Arg1:T4 Arg2:T5\n\
                   R2\tproduces Arg1:T3 Arg2:T2\n\
                   R3\tproduces Arg1:T3 Arg2:T1\n\
                   R4\tproduces Arg1:T3 Arg2:T9\n";
        let doc = parse_document(text, ann, "d").unwrap();
        let target = encode_target(&doc, SchemaKind::Seq2Rel, &nouns());
        assert_eq!(
            target,
            "Lyme disease @Disease@ Fever @Sign@ @PRODUCES@ \
             Lyme disease @Disease@ rash @Sign@ @PRODUCES@ \
             Lyme disease @Disease@ fever @Sign@ @PRODUCES@ @END@"
        );
        assert_eq!(skipped_relations(&doc), vec!["R4"]);
        assert_eq!(target.matches(" @PRODUCES@").count(), 3);
    }

    #[test]
    fn vocabulary_lists_every_token() {
        let v = special_tokens();
        assert_eq!(v.len(), 14);
        assert!(v.contains(&"@RareSkinDisease@") && v.contains(&"@INCREASES_RISK_OF@"));
    }
}
