//! Seeded synthetic corpora for the benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relkit::schema::gold_triples;
use relkit::{parse_document, AnnotatedDocument, EntityType, Predicate, Triple};

const WORDS: &[&str] = &[
    "fever", "rash", "weakness", "muscles", "arms", "legs", "syndrome", "kidney", "tumor", "pain", "chronic", "severe",
    "onset", "infant", "skin", "lesions", "cardiac", "defect", "growth", "delay",
];

/// Raw `.txt` and `.ann` contents of one document. About one relation in
/// ten points at a non-existent `T<n>0` id and one entity in twenty has an
/// end offset one code point short.
pub fn synthetic_pair(rng: &mut impl Rng, words: usize) -> (String, String) {
    let mut text = String::new();
    let mut spans = Vec::with_capacity(words);
    for i in 0..words {
        if i > 0 {
            text.push_str(if rng.gen_ratio(1, 12) { ". " } else { " " });
        }
        let start = text.chars().count();
        text.push_str(WORDS.choose(rng).unwrap());
        spans.push((start, text.chars().count()));
    }
    text.push('\n');
    let chars: Vec<char> = text.chars().collect();
    let slice = |a: usize, b: usize| chars[a..b].iter().collect::<String>();

    let mut ann = String::new();
    let entities = (words / 4).max(1);
    for t in 1..=entities {
        let a = rng.gen_range(0..words - 4);
        let len = rng.gen_range(1..=2);
        let (start, end) = (spans[a].0, spans[a + len - 1].1);
        let ty = EntityType::ALL.choose(rng).unwrap().standoff_label();
        if rng.gen_ratio(1, 8) {
            let (b0, b1) = spans[a + len + 1];
            let surface = format!("{} {}", slice(start, end), slice(b0, b1));
            ann.push_str(&format!("T{t}\t{ty} {start} {end};{b0} {b1}\t{surface}\n"));
        } else {
            let written_end = if rng.gen_ratio(1, 20) { end - 1 } else { end };
            ann.push_str(&format!("T{t}\t{ty} {start} {written_end}\t{}\n", slice(start, end)));
        }
    }
    for r in 1..=entities {
        let s = rng.gen_range(1..=entities);
        let o = rng.gen_range(1..=entities);
        let suffix = if rng.gen_ratio(1, 10) && o * 10 > entities {
            "0"
        } else {
            ""
        };
        let p = Predicate::ALL.choose(rng).unwrap();
        ann.push_str(&format!("R{r}\t{p} Arg1:T{s} Arg2:T{o}{suffix}\n"));
    }
    (text, ann)
}

/// `docs` parsed documents of roughly `words` words each.
pub fn synthetic_corpus(docs: usize, words: usize, seed: u64) -> Vec<AnnotatedDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|i| {
            let (text, ann) = synthetic_pair(&mut rng, words);
            parse_document(&text, &ann, &format!("doc{i:05}")).expect("synthetic documents parse")
        })
        .collect()
}

/// Gold triples with roughly a third dropped and a few retyped, as a
/// stand-in for model output.
pub fn noisy_predictions(gold: &[Triple], seed: u64) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for t in gold {
        if rng.gen_ratio(1, 3) {
            continue;
        }
        let mut t = t.clone();
        if rng.gen_ratio(1, 5) {
            t.object_type = *EntityType::ALL.choose(&mut rng).unwrap();
        }
        out.push(t);
    }
    out
}

pub fn corpus_triples(docs: &[AnnotatedDocument]) -> Vec<Vec<Triple>> {
    docs.iter().map(gold_triples).collect()
}
