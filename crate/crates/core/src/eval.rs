//! Strict relation scoring: a predicted triple counts only when subject
//! text, subject type, predicate, object text and object type all equal a
//! gold triple. Repeated relations are collapsed before counting.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::schema::{SchemaKind, Triple};
use crate::types::{EntityType, Predicate};

/// How entity text and types are compared.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Compare entity text verbatim instead of lowercased with collapsed
    /// whitespace.
    pub strict_case: bool,
    /// Ignore entity types.
    pub type_agnostic: bool,
}

pub fn normalize_entity_text(text: &str, config: &MatchConfig) -> String {
    if config.strict_case {
        text.to_string()
    } else {
        text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
    }
}

/// Comparison key of a triple. Types are `None` when ignored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripleKey {
    pub subject: String,
    pub subject_type: Option<EntityType>,
    pub predicate: Predicate,
    pub object: String,
    pub object_type: Option<EntityType>,
}

impl TripleKey {
    pub fn new(t: &Triple, config: &MatchConfig) -> Self {
        let keep = |ty: EntityType| (!config.type_agnostic).then_some(ty);
        TripleKey {
            subject: normalize_entity_text(&t.subject_text, config),
            subject_type: keep(t.subject_type),
            predicate: t.predicate,
            object: normalize_entity_text(&t.object_text, config),
            object_type: keep(t.object_type),
        }
    }

    /// Key restricted to what `kind` actually encodes for this predicate.
    pub fn for_schema(t: &Triple, kind: SchemaKind, config: &MatchConfig) -> Self {
        let mut key = TripleKey::new(t, config);
        let (subject_visible, object_visible) = kind.type_visibility(t.predicate);
        if !subject_visible {
            key.subject_type = None;
        }
        if !object_visible {
            key.object_type = None;
        }
        key
    }
}

/// Distinct triples under the comparison normalization.
pub fn collapse_duplicates(triples: &[Triple], config: &MatchConfig) -> BTreeSet<TripleKey> {
    triples.iter().map(|t| TripleKey::new(t, config)).collect()
}

/// First triple seen for every key.
fn representatives(triples: &[Triple], config: &MatchConfig) -> BTreeMap<TripleKey, Triple> {
    let mut out = BTreeMap::new();
    for t in triples {
        out.entry(TripleKey::new(t, config)).or_insert_with(|| t.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// 0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there is no gold.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub micro: Counts,
    pub per_predicate: BTreeMap<Predicate, Counts>,
}

impl ScoreReport {
    fn empty() -> Self {
        ScoreReport {
            micro: Counts::default(),
            per_predicate: Predicate::ALL.into_iter().map(|p| (p, Counts::default())).collect(),
        }
    }

    pub fn precision(&self) -> f64 {
        self.micro.precision()
    }

    pub fn recall(&self) -> f64 {
        self.micro.recall()
    }

    pub fn f1(&self) -> f64 {
        self.micro.f1()
    }

    /// Adds another report's counts; ratios are always derived from counts.
    pub fn merge(&mut self, other: &ScoreReport) {
        self.micro.add(other.micro);
        for (p, c) in &other.per_predicate {
            self.per_predicate.entry(*p).or_default().add(*c);
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let row = |c: &Counts| {
            serde_json::json!({
                "tp": c.tp, "fp": c.fp, "fn": c.fn_,
                "precision": c.precision(), "recall": c.recall(), "f1": c.f1(),
            })
        };
        let per: serde_json::Map<String, serde_json::Value> = self
            .per_predicate
            .iter()
            .map(|(p, c)| (p.as_str().to_string(), row(c)))
            .collect();
        serde_json::json!({ "micro": row(&self.micro), "per_predicate": per })
    }

    /// `P=0.5 R=0.5 F=0.5`, four decimals with trailing zeros trimmed.
    pub fn summary(&self) -> String {
        format!(
            "P={} R={} F={}",
            short(self.precision()),
            short(self.recall()),
            short(self.f1())
        )
    }
}

fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

// Row order of the published per-relation results.
const TABLE_ORDER: [Predicate; 6] = [
    Predicate::Anaphora,
    Predicate::IsA,
    Predicate::IsAcron,
    Predicate::Produces,
    Predicate::IsSynon,
    Predicate::IncreasesRiskOf,
];

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20}{:>6}{:>6}{:>6}{:>9}{:>9}{:>9}",
            "Relation type", "TP", "FP", "FN", "P", "R", "F"
        )?;
        let row = |f: &mut fmt::Formatter<'_>, label: &str, c: &Counts| {
            writeln!(
                f,
                "{:<20}{:>6}{:>6}{:>6}{:>9.2}{:>9.2}{:>9.2}",
                label,
                c.tp,
                c.fp,
                c.fn_,
                100.0 * c.precision(),
                100.0 * c.recall(),
                100.0 * c.f1()
            )
        };
        row(f, "micro", &self.micro)?;
        for p in TABLE_ORDER {
            row(f, p.as_str(), &self.per_predicate.get(&p).copied().unwrap_or_default())?;
        }
        Ok(())
    }
}

/// Scores one instance after collapsing duplicates on both sides.
pub fn score(gold: &[Triple], predicted: &[Triple], config: &MatchConfig) -> ScoreReport {
    let gold = collapse_duplicates(gold, config);
    let predicted = collapse_duplicates(predicted, config);
    let mut report = ScoreReport::empty();
    let mut bump = |p: Predicate, f: &dyn Fn(&mut Counts)| {
        f(&mut report.micro);
        f(report.per_predicate.entry(p).or_default());
    };
    for k in gold.intersection(&predicted) {
        bump(k.predicate, &|c| c.tp += 1);
    }
    for k in predicted.difference(&gold) {
        bump(k.predicate, &|c| c.fp += 1);
    }
    for k in gold.difference(&predicted) {
        bump(k.predicate, &|c| c.fn_ += 1);
    }
    report
}

/// Scores a corpus keyed by document id; matching is per document.
pub fn score_documents(
    gold: &BTreeMap<String, Vec<Triple>>,
    predicted: &BTreeMap<String, Vec<Triple>>,
    config: &MatchConfig,
) -> ScoreReport {
    let ids: BTreeSet<&String> = gold.keys().chain(predicted.keys()).collect();
    let mut total = ScoreReport::empty();
    for id in ids {
        let g = gold.get(id).map_or(&[][..], Vec::as_slice);
        let p = predicted.get(id).map_or(&[][..], Vec::as_slice);
        total.merge(&score(g, p, config));
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    PartialMatch,
    TypeMismatch,
    DiscontinuousMerge,
    HallucinatedSpan,
    Spurious,
    Missing,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::PartialMatch => "partial_match",
            ErrorCategory::TypeMismatch => "type_mismatch",
            ErrorCategory::DiscontinuousMerge => "discontinuous_merge",
            ErrorCategory::HallucinatedSpan => "hallucinated_span",
            ErrorCategory::Spurious => "spurious",
            ErrorCategory::Missing => "missing",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub doc_id: String,
    pub category: ErrorCategory,
    pub predicted: Option<Triple>,
    pub gold: Option<Triple>,
}

fn render_triple(t: &Option<Triple>) -> String {
    match t {
        Some(t) => format!(
            "{}|{}|{}|{}|{}",
            t.subject_text, t.subject_type, t.predicate, t.object_text, t.object_type
        ),
        None => "-".to_string(),
    }
}

impl fmt::Display for ErrorRecord {
    /// `<doc_id>\t<category>\t<predicted>\t<gold>`, triples as
    /// `subject|type|predicate|object|type` or `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.doc_id,
            self.category,
            render_triple(&self.predicted),
            render_triple(&self.gold)
        )
    }
}

/// Minimum token Jaccard for a partial match.
pub const PARTIAL_MATCH_THRESHOLD: f64 = 0.5;

fn tokens(text: &str) -> HashSet<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Jaccard similarity of the whitespace token sets.
pub fn token_jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (tokens(a), tokens(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

const COORDINATORS: [&str; 3] = ["and", "or", "and/or"];

/// `predicted` joins two gold texts with a coordinator, like
/// "long, thin fingers and toes" for "long, thin fingers" and "long, thin toes".
fn merges_coordination(predicted: &str, golds: &[&str]) -> bool {
    let words: Vec<String> = predicted.split_whitespace().map(str::to_lowercase).collect();
    let last_token = |g: &str| tokens(g.split_whitespace().last().unwrap_or("")).into_iter().next();
    for (i, w) in words.iter().enumerate() {
        if !COORDINATORS.contains(&w.as_str()) {
            continue;
        }
        let left = tokens(&words[..i].join(" "));
        let right = tokens(&words[i + 1..].join(" "));
        let in_left = golds.iter().filter_map(|g| last_token(g)).any(|t| left.contains(&t));
        let in_right = golds.iter().filter_map(|g| last_token(g)).any(|t| right.contains(&t));
        if in_left && in_right {
            return true;
        }
    }
    false
}

/// Assigns every false positive and false negative to one error category.
///
/// FP/FN pairs are matched greedily by descending similarity: same texts and
/// predicate with a different type is a type mismatch; same predicate and
/// types with token Jaccard of at least 0.5 on both entity texts is a
/// partial match (or a discontinuous merge when the predicted text
/// coordinates two gold texts). Unpaired FPs with an entity text absent
/// from `source_text` are hallucinations, other FPs are spurious, and
/// unpaired FNs are missing.
pub fn categorize_errors(
    doc_id: &str,
    gold: &[Triple],
    predicted: &[Triple],
    source_text: Option<&str>,
    config: &MatchConfig,
) -> Vec<ErrorRecord> {
    let gold_map = representatives(gold, config);
    let pred_map = representatives(predicted, config);
    let false_pos: Vec<&TripleKey> = pred_map.keys().filter(|k| !gold_map.contains_key(*k)).collect();
    let false_neg: Vec<&TripleKey> = gold_map.keys().filter(|k| !pred_map.contains_key(*k)).collect();

    struct Candidate {
        score: f64,
        fp: usize,
        fn_: usize,
        category: ErrorCategory,
    }
    let mut candidates = Vec::new();
    for (i, p) in false_pos.iter().enumerate() {
        for (j, g) in false_neg.iter().enumerate() {
            if p.predicate != g.predicate {
                continue;
            }
            let same_text = p.subject == g.subject && p.object == g.object;
            let same_types = p.subject_type == g.subject_type && p.object_type == g.object_type;
            if same_text && !same_types {
                candidates.push(Candidate {
                    score: 1.0,
                    fp: i,
                    fn_: j,
                    category: ErrorCategory::TypeMismatch,
                });
            } else if same_types {
                let score = token_jaccard(&p.subject, &g.subject).min(token_jaccard(&p.object, &g.object));
                if score >= PARTIAL_MATCH_THRESHOLD {
                    candidates.push(Candidate {
                        score,
                        fp: i,
                        fn_: j,
                        category: ErrorCategory::PartialMatch,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then((a.fp, a.fn_).cmp(&(b.fp, b.fn_))));

    let mut records = Vec::new();
    let mut fp_used = vec![false; false_pos.len()];
    let mut fn_used = vec![false; false_neg.len()];
    for c in candidates {
        if fp_used[c.fp] || fn_used[c.fn_] {
            continue;
        }
        fp_used[c.fp] = true;
        fn_used[c.fn_] = true;
        let (p, g) = (false_pos[c.fp], false_neg[c.fn_]);
        let mut category = c.category;
        if category == ErrorCategory::PartialMatch {
            // other gold texts sharing predicate, types and the matching slot
            let siblings = |subject_slot: bool| -> Vec<&str> {
                gold_map
                    .keys()
                    .filter(|k| {
                        k.predicate == g.predicate && k.subject_type == g.subject_type && k.object_type == g.object_type
                    })
                    .filter(|k| {
                        if subject_slot {
                            k.object == g.object
                        } else {
                            k.subject == g.subject
                        }
                    })
                    .map(|k| {
                        if subject_slot {
                            k.subject.as_str()
                        } else {
                            k.object.as_str()
                        }
                    })
                    .collect()
            };
            let merged = (p.object != g.object && merges_coordination(&p.object, &siblings(false)))
                || (p.subject != g.subject && merges_coordination(&p.subject, &siblings(true)));
            if merged {
                category = ErrorCategory::DiscontinuousMerge;
            }
        }
        records.push(ErrorRecord {
            doc_id: doc_id.to_string(),
            category,
            predicted: Some(pred_map[p].clone()),
            gold: Some(gold_map[g].clone()),
        });
    }

    let source = source_text.map(|s| normalize_entity_text(s, config));
    for (i, p) in false_pos.iter().enumerate() {
        if fp_used[i] {
            continue;
        }
        let hallucinated = source
            .as_deref()
            .is_some_and(|src| !src.contains(p.subject.as_str()) || !src.contains(p.object.as_str()));
        records.push(ErrorRecord {
            doc_id: doc_id.to_string(),
            category: if hallucinated {
                ErrorCategory::HallucinatedSpan
            } else {
                ErrorCategory::Spurious
            },
            predicted: Some(pred_map[*p].clone()),
            gold: None,
        });
    }
    for (j, g) in false_neg.iter().enumerate() {
        if !fn_used[j] {
            records.push(ErrorRecord {
                doc_id: doc_id.to_string(),
                category: ErrorCategory::Missing,
                predicted: None,
                gold: Some(gold_map[*g].clone()),
            });
        }
    }
    records
}
