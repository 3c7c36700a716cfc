//! Entity shape classes, per-split corpus counts, and train/dev/test splits.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standoff::{AnnotatedDocument, EntityMention};
use crate::types::{EntityType, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    Flat,
    Discontinuous,
    Overlapped,
    Nested,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 4] = [
        ShapeClass::Flat,
        ShapeClass::Discontinuous,
        ShapeClass::Overlapped,
        ShapeClass::Nested,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeClass::Flat => "flat",
            ShapeClass::Discontinuous => "discontinuous",
            ShapeClass::Overlapped => "overlapped",
            ShapeClass::Nested => "nested",
        }
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shape of one entity relative to the rest of its document.
///
/// Precedence is discontinuous, then nested (covering span strictly inside
/// another entity's covering span), then overlapped (shares a code point
/// with another entity, identical spans included), then flat.
pub fn classify_shape(entity: &EntityMention, doc: &AnnotatedDocument) -> ShapeClass {
    if entity.is_discontinuous() {
        return ShapeClass::Discontinuous;
    }
    let span = entity.covering_span();
    let others = doc
        .entities
        .values()
        .filter(|other| other.id != entity.id)
        .map(EntityMention::covering_span);

    let mut overlapped = false;
    for other in others {
        if other.contains(&span) && other != span {
            return ShapeClass::Nested;
        }
        overlapped |= other.overlaps(&span);
    }
    if overlapped {
        ShapeClass::Overlapped
    } else {
        ShapeClass::Flat
    }
}

/// Counts for one split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub entities: BTreeMap<EntityType, usize>,
    pub relations: BTreeMap<Predicate, usize>,
    pub shapes: BTreeMap<ShapeClass, usize>,
}

impl CorpusStats {
    pub fn entity_count(&self, t: EntityType) -> usize {
        self.entities.get(&t).copied().unwrap_or(0)
    }

    pub fn relation_count(&self, p: Predicate) -> usize {
        self.relations.get(&p).copied().unwrap_or(0)
    }

    pub fn shape_count(&self, s: ShapeClass) -> usize {
        self.shapes.get(&s).copied().unwrap_or(0)
    }

    pub fn total_entities(&self) -> usize {
        self.entities.values().sum()
    }

    pub fn total_relations(&self) -> usize {
        self.relations.values().sum()
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.documents += other.documents;
        for (k, v) in &other.entities {
            *self.entities.entry(*k).or_default() += v;
        }
        for (k, v) in &other.relations {
            *self.relations.entry(*k).or_default() += v;
        }
        for (k, v) in &other.shapes {
            *self.shapes.entry(*k).or_default() += v;
        }
    }

    fn zeroed() -> Self {
        CorpusStats {
            documents: 0,
            entities: EntityType::ALL.into_iter().map(|t| (t, 0)).collect(),
            relations: Predicate::ALL.into_iter().map(|p| (p, 0)).collect(),
            shapes: ShapeClass::ALL.into_iter().map(|s| (s, 0)).collect(),
        }
    }
}

pub fn document_statistics(doc: &AnnotatedDocument) -> CorpusStats {
    let mut stats = CorpusStats::zeroed();
    stats.documents = 1;
    for entity in doc.entities.values() {
        *stats.entities.entry(entity.entity_type).or_default() += 1;
        *stats.shapes.entry(classify_shape(entity, doc)).or_default() += 1;
    }
    for rel in doc.relations.values() {
        *stats.relations.entry(rel.predicate).or_default() += 1;
    }
    stats
}

pub fn corpus_statistics(split: &[AnnotatedDocument]) -> CorpusStats {
    split.iter().fold(CorpusStats::zeroed(), |mut acc, doc| {
        acc.merge(&document_statistics(doc));
        acc
    })
}

// Row order and labels follow the published tables.
const ENTITY_ROWS: [(EntityType, &str); 6] = [
    (EntityType::Sign, "sign"),
    (EntityType::RareDisease, "rare disease"),
    (EntityType::Disease, "disease"),
    (EntityType::Anaphor, "anaphor"),
    (EntityType::RareSkinDisease, "skin rare disease"),
    (EntityType::Symptom, "symptom"),
];
const RELATION_ROWS: [(Predicate, &str); 6] = [
    (Predicate::Produces, "produces"),
    (Predicate::Anaphora, "anaphora"),
    (Predicate::IsA, "is_a"),
    (Predicate::IncreasesRiskOf, "increase_risk_of"),
    (Predicate::IsAcron, "is_acron"),
    (Predicate::IsSynon, "is_synon"),
];
const SHAPE_ROWS: [(ShapeClass, &str); 4] = [
    (ShapeClass::Flat, "Flat"),
    (ShapeClass::Discontinuous, "Discontinuous"),
    (ShapeClass::Overlapped, "Overlapped"),
    (ShapeClass::Nested, "Nested"),
];

/// Statistics for several named splits, rendered as two tables (types and
/// shapes) with one column per split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub splits: Vec<(String, CorpusStats)>,
}

impl StatsReport {
    pub fn to_json(&self) -> serde_json::Value {
        let splits: serde_json::Map<String, serde_json::Value> = self
            .splits
            .iter()
            .map(|(name, s)| {
                let value = serde_json::json!({
                    "documents": s.documents,
                    "entity_types": ENTITY_ROWS.iter().map(|(t, _)| (t.as_str().to_string(), s.entity_count(*t))).collect::<BTreeMap<_, _>>(),
                    "relation_types": RELATION_ROWS.iter().map(|(p, _)| (p.as_str().to_string(), s.relation_count(*p))).collect::<BTreeMap<_, _>>(),
                    "entity_shapes": SHAPE_ROWS.iter().map(|(c, _)| (c.as_str().to_string(), s.shape_count(*c))).collect::<BTreeMap<_, _>>(),
                    "total_entities": s.total_entities(),
                    "total_relations": s.total_relations(),
                });
                (name.clone(), value)
            })
            .collect();
        serde_json::json!({ "splits": splits })
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header = |f: &mut fmt::Formatter<'_>, first: &str| -> fmt::Result {
            write!(f, "{first:<20}")?;
            for (name, _) in &self.splits {
                write!(f, "{name:>10}")?;
            }
            writeln!(f)
        };
        let row = |f: &mut fmt::Formatter<'_>, label: &str, get: &dyn Fn(&CorpusStats) -> usize| -> fmt::Result {
            write!(f, "{label:<20}")?;
            for (_, s) in &self.splits {
                write!(f, "{:>10}", get(s))?;
            }
            writeln!(f)
        };

        header(f, "Type")?;
        for (t, label) in ENTITY_ROWS {
            row(f, label, &|s| s.entity_count(t))?;
        }
        for (p, label) in RELATION_ROWS {
            row(f, label, &|s| s.relation_count(p))?;
        }
        writeln!(f)?;
        header(f, "Dataset")?;
        for (c, label) in SHAPE_ROWS {
            row(f, label, &|s| s.shape_count(c))?;
        }
        row(f, "Total", &|s| s.total_entities())?;
        row(f, "Documents", &|s| s.documents)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SplitSpec {
    Ratio {
        ratios: [f64; 3],
        seed: u64,
    },
    FileList {
        train: Vec<String>,
        dev: Vec<String>,
        test: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios(String),
    #[error("split list references unknown document `{0}`")]
    UnknownDocument(String),
    #[error("document `{0}` appears in more than one split list")]
    DuplicateDocument(String),
    #[error("document `{0}` is not assigned to any split")]
    Unassigned(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

impl<T> Splits<T> {
    pub fn named(&self) -> [(&'static str, &[T]); 3] {
        [("train", &self.train), ("dev", &self.dev), ("test", &self.test)]
    }
}

/// Partitions a corpus into train/dev/test.
///
/// Ratio mode sorts the doc ids, shuffles them with a ChaCha8 stream seeded
/// from `seed`, and cuts at the rounded ratio boundaries.
pub fn split_corpus(corpus: &[AnnotatedDocument], spec: &SplitSpec) -> Result<Splits<AnnotatedDocument>, SplitError> {
    if corpus.is_empty() {
        return Err(SplitError::EmptyCorpus);
    }
    let ids = match spec {
        SplitSpec::Ratio { ratios, seed } => ratio_split(corpus, *ratios, *seed)?,
        SplitSpec::FileList { train, dev, test } => list_split(corpus, [train, dev, test])?,
    };
    let by_id: HashMap<&str, &AnnotatedDocument> = corpus.iter().map(|d| (d.doc_id(), d)).collect();
    let pick = |ids: &[String]| ids.iter().map(|id| by_id[id.as_str()].clone()).collect();
    Ok(Splits {
        train: pick(&ids.train),
        dev: pick(&ids.dev),
        test: pick(&ids.test),
    })
}

fn ratio_split(corpus: &[AnnotatedDocument], ratios: [f64; 3], seed: u64) -> Result<Splits<String>, SplitError> {
    let sum: f64 = ratios.iter().sum();
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(SplitError::BadRatios(format!("{ratios:?}")));
    }
    let mut ids: Vec<String> = corpus.iter().map(|d| d.doc_id().to_string()).collect();
    ids.sort();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let n = ids.len();
    let cut = |fraction: f64| ((fraction * n as f64).round() as usize).min(n);
    let first = cut(ratios[0]);
    let second = cut(ratios[0] + ratios[1]).max(first);
    let test = ids.split_off(second);
    let dev = ids.split_off(first);
    Ok(Splits { train: ids, dev, test })
}

fn list_split(corpus: &[AnnotatedDocument], lists: [&Vec<String>; 3]) -> Result<Splits<String>, SplitError> {
    let known: HashSet<&str> = corpus.iter().map(|d| d.doc_id()).collect();
    let mut seen = HashSet::new();
    for id in lists.iter().flat_map(|l| l.iter()) {
        if !known.contains(id.as_str()) {
            return Err(SplitError::UnknownDocument(id.clone()));
        }
        if !seen.insert(id.as_str()) {
            return Err(SplitError::DuplicateDocument(id.clone()));
        }
    }
    if let Some(missing) = corpus.iter().find(|d| !seen.contains(d.doc_id())) {
        return Err(SplitError::Unassigned(missing.doc_id().to_string()));
    }
    Ok(Splits {
        train: lists[0].clone(),
        dev: lists[1].clone(),
        test: lists[2].clone(),
    })
}
