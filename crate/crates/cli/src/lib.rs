//! Command-line front end: `relkit <subcommand> [flags]`.
//!
//! Exit codes: 0 on success, 1 on a fatal error, 2 on a usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use relkit::SchemaKind;

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "relkit",
    version,
    about = "Standoff corpus toolkit for end-to-end relation extraction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fix dangling relation arguments, off-by-one entity ends and unordered fragments.
    Repair(RepairArgs),
    /// Entity, relation and shape counts per split.
    Stats(StatsArgs),
    /// Partition a corpus into train/dev/test.
    Split(SplitArgs),
    /// Rewrite discontinuous entities as contiguous text.
    Flatten(FlattenArgs),
    /// Write source/target generation records for a schema.
    Encode(EncodeArgs),
    /// Turn raw model generations back into triples.
    Decode(DecodeArgs),
    /// Strict triple scoring.
    Score(ScoreArgs),
    /// Score and write a per-error audit file.
    Errors(ErrorsArgs),
}

#[derive(Debug, Args)]
pub struct CorpusIo {
    /// Corpus directory of `<id>.txt`/`<id>.ann` pairs, or one holding train/dev/test subdirectories.
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Output directory (must not lie inside the input directory).
    #[arg(long = "out", value_name = "DIR")]
    pub output: PathBuf,
    /// Treat a `.txt` or `.ann` file without its partner as fatal.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[command(flatten)]
    pub io: CorpusIo,
    /// Write one line per repair here.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Also write the counts as JSON.
    #[arg(long = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub io: CorpusIo,
    /// Train, dev and test fractions, e.g. `0.7,0.1,0.2`.
    #[arg(long, value_name = "A,B,C", value_parser = parse_ratios, conflicts_with_all = ["train_list", "dev_list", "test_list"])]
    pub ratios: Option<[f64; 3]>,
    #[arg(long, default_value_t = 0, requires = "ratios")]
    pub seed: u64,
    /// Newline-separated doc ids for the training split.
    #[arg(long, value_name = "FILE", requires_all = ["dev_list", "test_list"])]
    pub train_list: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires_all = ["train_list", "test_list"])]
    pub dev_list: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires_all = ["train_list", "dev_list"])]
    pub test_list: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlattenArgs {
    #[command(flatten)]
    pub io: CorpusIo,
    /// Leave out documents that cannot be flattened instead of failing.
    #[arg(long)]
    pub keep_going: bool,
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    #[arg(long, value_parser = parse_schema)]
    pub schema: SchemaKind,
    /// JSON object mapping each predicate to its noun for the rel-is template.
    #[arg(long, value_name = "FILE")]
    pub noun_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub io: CorpusIo,
    #[command(flatten)]
    pub schema: SchemaArgs,
    /// Prefix every source with the copy instruction.
    #[arg(long)]
    pub copy_instruct: bool,
    /// Write skipped relations here.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// JSONL file of `{"doc_id": .., "generation": ..}` records.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Triple file to write.
    #[arg(long = "out", value_name = "FILE")]
    pub output: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArgs,
    /// Decode generations verbatim, without whitespace and plural clean-up.
    #[arg(long)]
    pub no_normalize: bool,
    /// Write skipped segments here.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Compare entity text verbatim.
    #[arg(long)]
    pub strict_case: bool,
    /// Ignore entity types.
    #[arg(long)]
    pub type_agnostic: bool,
    /// Also write the report as JSON.
    #[arg(long = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ErrorsArgs {
    #[command(flatten)]
    pub score: ScoreArgs,
    /// Audit file, one error per line.
    #[arg(long, value_name = "FILE")]
    pub audit: PathBuf,
    /// Corpus directory used to flag entity texts absent from the source.
    #[arg(long = "in", value_name = "DIR")]
    pub corpus: Option<PathBuf>,
}

fn parse_schema(raw: &str) -> Result<SchemaKind, String> {
    raw.parse().map_err(|e| format!("{e}"))
}

fn parse_ratios(raw: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three ratios, got {}", p.len()))
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
