//! Closed label sets and offset spans shared by every stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} label `{label}`")]
pub struct LabelError {
    pub kind: &'static str,
    pub label: String,
}

/// Folds a raw label for lookup: lowercase, with spaces, hyphens and
/// underscores removed.
fn fold_label(raw: &str) -> String {
    raw.trim()
        .chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Entity categories of the rare-disease corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    Disease,
    RareDisease,
    Symptom,
    Sign,
    Anaphor,
    RareSkinDisease,
}

impl EntityType {
    pub const ALL: [EntityType; 6] = [
        EntityType::Disease,
        EntityType::RareDisease,
        EntityType::Symptom,
        EntityType::Sign,
        EntityType::Anaphor,
        EntityType::RareSkinDisease,
    ];

    /// Canonical snake_case name, used in triple files and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Disease => "disease",
            EntityType::RareDisease => "rare_disease",
            EntityType::Symptom => "symptom",
            EntityType::Sign => "sign",
            EntityType::Anaphor => "anaphor",
            EntityType::RareSkinDisease => "rare_skin_disease",
        }
    }

    /// Label written into `.ann` files.
    pub fn standoff_label(self) -> &'static str {
        match self {
            EntityType::Disease => "DISEASE",
            EntityType::RareDisease => "RAREDISEASE",
            EntityType::Symptom => "SYMPTOM",
            EntityType::Sign => "SIGN",
            EntityType::Anaphor => "ANAPHOR",
            EntityType::RareSkinDisease => "SKINRAREDISEASE",
        }
    }

    /// Lowercase words, as used inside natural-language templates.
    pub fn words(self) -> &'static str {
        match self {
            EntityType::Disease => "disease",
            EntityType::RareDisease => "rare disease",
            EntityType::Symptom => "symptom",
            EntityType::Sign => "sign",
            EntityType::Anaphor => "anaphor",
            EntityType::RareSkinDisease => "rare skin disease",
        }
    }

    /// CamelCase special token for the linearized target, e.g. `@RareDisease@`.
    pub fn token(self) -> &'static str {
        match self {
            EntityType::Disease => "@Disease@",
            EntityType::RareDisease => "@RareDisease@",
            EntityType::Symptom => "@Symptom@",
            EntityType::Sign => "@Sign@",
            EntityType::Anaphor => "@Anaphor@",
            EntityType::RareSkinDisease => "@RareSkinDisease@",
        }
    }

    pub fn from_token(token: &str) -> Option<EntityType> {
        EntityType::ALL.into_iter().find(|t| t.token() == token)
    }
}

impl FromStr for EntityType {
    type Err = LabelError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        match fold_label(raw).as_str() {
            "disease" => Ok(EntityType::Disease),
            "raredisease" => Ok(EntityType::RareDisease),
            "symptom" => Ok(EntityType::Symptom),
            "sign" => Ok(EntityType::Sign),
            "anaphor" => Ok(EntityType::Anaphor),
            "rareskindisease" | "skinraredisease" => Ok(EntityType::RareSkinDisease),
            _ => Err(LabelError {
                kind: "entity type",
                label: raw.to_string(),
            }),
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relation predicates of the rare-disease corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Produces,
    IncreasesRiskOf,
    IsA,
    IsAcron,
    IsSynon,
    Anaphora,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::Produces,
        Predicate::IncreasesRiskOf,
        Predicate::IsA,
        Predicate::IsAcron,
        Predicate::IsSynon,
        Predicate::Anaphora,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::Produces => "produces",
            Predicate::IncreasesRiskOf => "increases_risk_of",
            Predicate::IsA => "is_a",
            Predicate::IsAcron => "is_acron",
            Predicate::IsSynon => "is_synon",
            Predicate::Anaphora => "anaphora",
        }
    }

    /// Uppercase special token, e.g. `@PRODUCES@`.
    pub fn token(self) -> &'static str {
        match self {
            Predicate::Produces => "@PRODUCES@",
            Predicate::IncreasesRiskOf => "@INCREASES_RISK_OF@",
            Predicate::IsA => "@IS_A@",
            Predicate::IsAcron => "@IS_ACRON@",
            Predicate::IsSynon => "@IS_SYNON@",
            Predicate::Anaphora => "@ANAPHORA@",
        }
    }

    pub fn from_token(token: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.token() == token)
    }
}

impl FromStr for Predicate {
    type Err = LabelError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        match fold_label(raw).as_str() {
            "produces" => Ok(Predicate::Produces),
            // the corpus spells it `increase_risk_of`
            "increasesriskof" | "increaseriskof" => Ok(Predicate::IncreasesRiskOf),
            "isa" => Ok(Predicate::IsA),
            "isacron" => Ok(Predicate::IsAcron),
            "issynon" => Ok(Predicate::IsSynon),
            "anaphora" => Ok(Predicate::Anaphora),
            _ => Err(LabelError {
                kind: "predicate",
                label: raw.to_string(),
            }),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Half-open interval of code-point offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the two spans share at least one code point.
    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.start, self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_labels_fold_spelling_variants() {
        for raw in [
            "SKINRAREDISEASE",
            "skin rare disease",
            "rare-skin-disease",
            "Rare_Skin_Disease",
        ] {
            assert_eq!(raw.parse::<EntityType>().unwrap(), EntityType::RareSkinDisease);
        }
        assert_eq!("RAREDISEASE".parse::<EntityType>().unwrap(), EntityType::RareDisease);
        assert!("DRUG".parse::<EntityType>().is_err());
    }

    #[test]
    fn predicate_accepts_corpus_spelling() {
        assert_eq!(
            "increase_risk_of".parse::<Predicate>().unwrap(),
            Predicate::IncreasesRiskOf
        );
        assert_eq!("is_a".parse::<Predicate>().unwrap(), Predicate::IsA);
        assert!("treats".parse::<Predicate>().is_err());
    }

    #[test]
    fn tokens_round_trip() {
        for t in EntityType::ALL {
            assert_eq!(EntityType::from_token(t.token()), Some(t));
            assert_eq!(t.standoff_label().parse::<EntityType>().unwrap(), t);
            assert_eq!(t.as_str().parse::<EntityType>().unwrap(), t);
        }
        for p in Predicate::ALL {
            assert_eq!(Predicate::from_token(p.token()), Some(p));
            assert_eq!(p.as_str().parse::<Predicate>().unwrap(), p);
        }
    }

    #[test]
    fn span_relations() {
        let a = Span::new(0, 10);
        assert!(a.overlaps(&Span::new(9, 12)));
        assert!(!a.overlaps(&Span::new(10, 12)));
        assert!(a.contains(&Span::new(2, 10)));
    }
}
