use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Component, Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use relkit::corpus::StatsReport;
use relkit::eval::score_documents;
use relkit::io::{
    format_triples, load_corpus_dir, read_generations, read_id_list, read_to_string, read_triples, write_document,
    write_string,
};
use relkit::repair::RepairRule;
use relkit::schema::{encode_example, gold_triples, skipped_relations, special_tokens, EncodedExample};
use relkit::{
    categorize_errors, corpus_statistics, decode_target, flatten_document, normalize_generation, repair_all,
    split_corpus, AnnotatedDocument, ErrorCategory, MatchConfig, PredicateNounMap, SchemaKind, SplitSpec, Triple,
};

use crate::{
    Command, CorpusIo, DecodeArgs, EncodeArgs, ErrorsArgs, FlattenArgs, RepairArgs, SchemaArgs, ScoreArgs, SplitArgs,
    StatsArgs,
};

const SPLIT_NAMES: [&str; 3] = ["train", "dev", "test"];

pub(crate) fn run(command: Command) -> Result<()> {
    match command {
        Command::Repair(a) => repair(a),
        Command::Stats(a) => stats(a),
        Command::Split(a) => split(a),
        Command::Flatten(a) => flatten(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Score(a) => score(a),
        Command::Errors(a) => errors(a),
    }
}

/// Absolute form of a path that may not exist yet.
fn absolute(path: &Path) -> Result<PathBuf> {
    let path = std::path::absolute(path).with_context(|| format!("{}", path.display()))?;
    let mut existing = path.as_path();
    let mut rest = Vec::new();
    while !existing.exists() {
        match (existing.parent(), existing.file_name()) {
            (Some(parent), Some(name)) => {
                rest.push(name.to_os_string());
                existing = parent;
            }
            _ => break,
        }
    }
    let mut out = existing.canonicalize().unwrap_or_else(|_| existing.to_path_buf());
    for name in rest.into_iter().rev() {
        out.push(name);
    }
    // resolve any `..` left in the missing tail
    let mut clean = PathBuf::new();
    for c in out.components() {
        match c {
            Component::ParentDir => {
                clean.pop();
            }
            Component::CurDir => {}
            other => clean.push(other),
        }
    }
    Ok(clean)
}

fn require_dir(dir: &Path) -> Result<()> {
    ensure!(dir.is_dir(), "input directory {} does not exist", dir.display());
    Ok(())
}

fn require_file(file: &Path) -> Result<()> {
    ensure!(file.is_file(), "input file {} does not exist", file.display());
    Ok(())
}

/// Refuses outputs that would land inside (or on) a read-only input.
fn guard_output(input: &Path, output: &Path) -> Result<()> {
    let (i, o) = (absolute(input)?, absolute(output)?);
    if o.starts_with(&i) {
        bail!("output {} would modify input {}", output.display(), input.display());
    }
    Ok(())
}

/// `(split name, directory)` pairs: the train/dev/test subdirectories if any
/// exist, otherwise the directory itself under its own name.
fn corpus_units(dir: &Path) -> Vec<(String, PathBuf)> {
    let splits: Vec<(String, PathBuf)> = SPLIT_NAMES
        .iter()
        .map(|s| (s.to_string(), dir.join(s)))
        .filter(|(_, p)| p.is_dir())
        .collect();
    if !splits.is_empty() {
        return splits;
    }
    let name = absolute(dir)
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "corpus".to_string());
    vec![(name, dir.to_path_buf())]
}

fn is_split_layout(dir: &Path) -> bool {
    SPLIT_NAMES.iter().any(|s| dir.join(s).is_dir())
}

fn load(dir: &Path, strict: bool) -> Result<Vec<AnnotatedDocument>> {
    let loaded = load_corpus_dir(dir, strict)?;
    for orphan in &loaded.orphans {
        eprintln!("warning: {}: no matching .txt/.ann partner, skipped", orphan.display());
    }
    Ok(loaded.documents)
}

/// Loads every unit of a corpus directory, paired with the output directory
/// it maps to under `out`.
fn load_units(io: &CorpusIo) -> Result<Vec<(String, PathBuf, Vec<AnnotatedDocument>)>> {
    require_dir(&io.input)?;
    guard_output(&io.input, &io.output)?;
    let layout = is_split_layout(&io.input);
    corpus_units(&io.input)
        .into_iter()
        .map(|(name, dir)| {
            let out = if layout {
                io.output.join(&name)
            } else {
                io.output.clone()
            };
            Ok((name, out, load(&dir, io.strict)?))
        })
        .collect()
}

fn write_log(path: Option<&Path>, input: &Path, content: &str) -> Result<()> {
    if let Some(path) = path {
        guard_output(input, path)?;
        write_string(path, content)?;
    }
    Ok(())
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn repair(args: RepairArgs) -> Result<()> {
    let units = load_units(&args.io)?;
    let mut log = String::new();
    let (mut docs, mut relations, mut entities) = (0, 0, 0);
    let (mut fixed_relations, mut unresolved, mut spans, mut orders) = (0, 0, 0, 0);
    for (_, out, documents) in &units {
        for doc in documents {
            let (fixed, doc_log) = repair_all(doc)?;
            write_document(out, &fixed)?;
            docs += 1;
            relations += doc.relations.len();
            entities += doc.entities.len();
            fixed_relations += doc_log
                .repaired_targets(RepairRule::RelationArgument)
                .collect::<BTreeSet<_>>()
                .len();
            unresolved += fixed.unresolved_refs.len();
            spans += doc_log.count(RepairRule::SpanBoundary);
            orders += doc_log.count(RepairRule::FragmentOrder);
            log.push_str(&doc_log.to_string());
        }
    }
    write_log(args.log.as_deref(), &args.io.input, &log)?;
    println!("documents {docs}");
    println!(
        "relation_argument {fixed_relations} of {relations} relations ({:.2}%), {unresolved} arguments left dangling",
        percent(fixed_relations, relations)
    );
    println!(
        "span_boundary {spans} of {entities} entities ({:.2}%)",
        percent(spans, entities)
    );
    println!("fragment_order {orders}");
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    require_dir(&args.input)?;
    let mut report = StatsReport::default();
    for (name, dir) in corpus_units(&args.input) {
        report.splits.push((name, corpus_statistics(&load(&dir, args.strict)?)));
    }
    print!("{report}");
    if let Some(out) = &args.output {
        guard_output(&args.input, out)?;
        write_string(out, &format!("{:#}\n", report.to_json()))?;
    }
    Ok(())
}

fn split(args: SplitArgs) -> Result<()> {
    let spec = match (&args.ratios, &args.train_list, &args.dev_list, &args.test_list) {
        (Some(ratios), None, None, None) => SplitSpec::Ratio {
            ratios: *ratios,
            seed: args.seed,
        },
        (None, Some(train), Some(dev), Some(test)) => {
            for list in [train, dev, test] {
                require_file(list)?;
            }
            SplitSpec::FileList {
                train: read_id_list(train)?,
                dev: read_id_list(dev)?,
                test: read_id_list(test)?,
            }
        }
        _ => bail!("give either --ratios or all of --train-list, --dev-list and --test-list"),
    };
    require_dir(&args.io.input)?;
    guard_output(&args.io.input, &args.io.output)?;
    let corpus = load(&args.io.input, args.io.strict)?;
    let splits = split_corpus(&corpus, &spec)?;
    for (name, docs) in splits.named() {
        let dir = args.io.output.join(name);
        std::fs::create_dir_all(&dir).with_context(|| format!("{}", dir.display()))?;
        let mut ids = String::new();
        for doc in docs {
            write_document(&dir, doc)?;
            let _ = writeln!(ids, "{}", doc.doc_id());
        }
        write_string(&args.io.output.join(format!("{name}.ids")), &ids)?;
        println!("{name} {}", docs.len());
    }
    Ok(())
}

fn flatten(args: FlattenArgs) -> Result<()> {
    let units = load_units(&args.io)?;
    let mut results = Vec::new();
    let mut failures = String::new();
    for (_, out, documents) in &units {
        for doc in documents {
            match flatten_document(doc) {
                Ok(flat) => results.push((out, flat)),
                Err(e) => {
                    let _ = writeln!(failures, "{e}");
                }
            }
        }
    }
    write_log(args.log.as_deref(), &args.io.input, &failures)?;
    if !failures.is_empty() && !args.keep_going {
        bail!(
            "{}some documents could not be flattened (use --keep-going to skip them)",
            failures
        );
    }
    let mut rewritten = 0;
    for (out, (flat, map)) in &results {
        write_document(out, flat)?;
        let offsets = serde_json::to_string_pretty(map)?;
        write_string(
            &out.join(format!("{}.offsets.json", flat.doc_id())),
            &format!("{offsets}\n"),
        )?;
        rewritten += usize::from(!map.is_identity());
    }
    eprint!("{failures}");
    println!(
        "documents {} ({rewritten} rewritten, {} skipped)",
        results.len(),
        failures.lines().count()
    );
    Ok(())
}

fn noun_map(args: &SchemaArgs) -> Result<PredicateNounMap> {
    match &args.noun_map {
        Some(path) => {
            require_file(path)?;
            Ok(PredicateNounMap::from_json(&read_to_string(path)?).with_context(|| format!("{}", path.display()))?)
        }
        None => Ok(PredicateNounMap::default()),
    }
}

fn encode(args: EncodeArgs) -> Result<()> {
    let nouns = noun_map(&args.schema)?;
    let kind = args.schema.schema;
    require_dir(&args.io.input)?;
    guard_output(&args.io.input, &args.io.output)?;
    let mut log = String::new();
    for (name, dir) in corpus_units(&args.io.input) {
        let documents = load(&dir, args.io.strict)?;
        let mut records = String::new();
        let mut gold: BTreeMap<String, Vec<Triple>> = BTreeMap::new();
        for doc in &documents {
            let example: EncodedExample = encode_example(doc, kind, &nouns, args.copy_instruct);
            records.push_str(&serde_json::to_string(&example)?);
            records.push('\n');
            gold.insert(doc.doc_id().to_string(), gold_triples(doc));
            for id in skipped_relations(doc) {
                let _ = writeln!(log, "{} {id}: dangling argument, relation not encoded", doc.doc_id());
            }
        }
        write_string(&args.io.output.join(format!("{name}.jsonl")), &records)?;
        write_string(&args.io.output.join(format!("{name}.gold.tsv")), &format_triples(&gold))?;
        println!("{name} {} documents", documents.len());
    }
    if kind == SchemaKind::Seq2Rel {
        let vocab: String = special_tokens().iter().map(|t| format!("{t}\n")).collect();
        write_string(&args.io.output.join("special_tokens.txt"), &vocab)?;
    }
    if args.log.is_some() {
        write_log(args.log.as_deref(), &args.io.input, &log)?;
    } else {
        eprint!("{log}");
    }
    Ok(())
}

fn decode(args: DecodeArgs) -> Result<()> {
    require_file(&args.input)?;
    guard_output(&args.input, &args.output)?;
    let nouns = noun_map(&args.schema)?;
    let mut by_doc: BTreeMap<String, String> = BTreeMap::new();
    for g in read_generations(&args.input)? {
        if by_doc.insert(g.doc_id.clone(), g.generation).is_some() {
            bail!(
                "{}: more than one generation for document {}",
                args.input.display(),
                g.doc_id
            );
        }
    }
    let mut triples: BTreeMap<String, Vec<Triple>> = BTreeMap::new();
    let mut log = String::new();
    let mut issues = 0;
    for (doc_id, generation) in &by_doc {
        let text = if args.no_normalize {
            generation.clone()
        } else {
            normalize_generation(generation)
        };
        let decoded = decode_target(&text, args.schema.schema, &nouns);
        for issue in &decoded.issues {
            let _ = writeln!(log, "{doc_id}\t{}\t{}", issue.reason, issue.segment);
        }
        issues += decoded.issues.len();
        triples.insert(doc_id.clone(), decoded.triples);
    }
    write_string(&args.output, &format_triples(&triples))?;
    if let Some(path) = &args.log {
        guard_output(&args.input, path)?;
        write_string(path, &log)?;
    }
    let count: usize = triples.values().map(Vec::len).sum();
    println!("documents {} triples {count} skipped segments {issues}", by_doc.len());
    Ok(())
}

fn config(args: &ScoreArgs) -> MatchConfig {
    MatchConfig {
        strict_case: args.strict_case,
        type_agnostic: args.type_agnostic,
    }
}

type ByDoc = BTreeMap<String, Vec<Triple>>;

fn read_sides(args: &ScoreArgs) -> Result<(ByDoc, ByDoc)> {
    require_file(&args.gold)?;
    require_file(&args.pred)?;
    Ok((read_triples(&args.gold)?, read_triples(&args.pred)?))
}

fn score(args: ScoreArgs) -> Result<()> {
    let (gold, pred) = read_sides(&args)?;
    let report = score_documents(&gold, &pred, &config(&args));
    print!("{report}");
    println!("{}", report.summary());
    if let Some(out) = &args.output {
        for input in [&args.gold, &args.pred] {
            ensure!(
                absolute(out)? != absolute(input)?,
                "output {} would overwrite an input",
                out.display()
            );
        }
        write_string(out, &format!("{:#}\n", report.to_json()))?;
    }
    Ok(())
}

fn errors(args: ErrorsArgs) -> Result<()> {
    let (gold, pred) = read_sides(&args.score)?;
    let cfg = config(&args.score);
    for input in [&args.score.gold, &args.score.pred] {
        ensure!(
            absolute(&args.audit)? != absolute(input)?,
            "audit {} would overwrite an input",
            args.audit.display()
        );
    }
    let mut sources: BTreeMap<String, String> = BTreeMap::new();
    if let Some(dir) = &args.corpus {
        require_dir(dir)?;
        guard_output(dir, &args.audit)?;
        for (_, unit) in corpus_units(dir) {
            for doc in load(&unit, false)? {
                sources.insert(doc.doc_id().to_string(), doc.text().to_string());
            }
        }
    }

    let ids: BTreeSet<&String> = gold.keys().chain(pred.keys()).collect();
    let mut audit = String::new();
    let mut counts: BTreeMap<ErrorCategory, usize> = BTreeMap::new();
    for id in ids {
        let g = gold.get(id).map_or(&[][..], Vec::as_slice);
        let p = pred.get(id).map_or(&[][..], Vec::as_slice);
        let source = sources.get(id).map(String::as_str);
        if args.corpus.is_some() && source.is_none() {
            eprintln!("warning: document {id} is not in the corpus, hallucinations not checked");
        }
        for record in categorize_errors(id, g, p, source, &cfg) {
            *counts.entry(record.category).or_default() += 1;
            let _ = writeln!(audit, "{record}");
        }
    }
    write_string(&args.audit, &audit)?;

    let report = score_documents(&gold, &pred, &cfg);
    print!("{report}");
    println!("{}", report.summary());
    for (category, n) in counts {
        println!("{category} {n}");
    }
    Ok(())
}
