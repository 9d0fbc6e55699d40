use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use litqa_cli::config::{Config, ScorerKind};
use litqa_cli::engine::{render_answer_table, render_ranking_table, CliError, Engine};
use litqa_core::corpus::load_corpus;
use litqa_core::lexicon::KeywordLexicon;
use litqa_core::traindata::{
    build_mrpc, build_squad, content_hash, validate_mrpc, validate_squad, AnnotatedRecognizer, EntityRecognizer,
    RuleRecognizer, SentenceSplitter, SquadFile, TrainDataError,
};

#[derive(Parser)]
#[command(name = "litqa", version, about = "Literature retrieval, extractive QA and trainfile generation")]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true, env = "LITQA_CONFIG")]
    config: Option<PathBuf>,
    /// Chunk index (JSONL) or directory of JSON article records.
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    scorer: Option<ScorerKind>,
    /// Inference service base URL.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Worker threads; 0 = one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk a directory of article records into an index file.
    Ingest {
        corpus_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_tokens: Option<usize>,
        #[arg(long)]
        overlap_tokens: Option<usize>,
    },
    /// Rank documents for a query.
    Retrieve {
        query: String,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        pretty: bool,
    },
    /// Best answer span for a query.
    Answer {
        query: String,
        #[arg(long)]
        pretty: bool,
    },
    /// Generate a SQuAD v1.1 trainfile from the index.
    BuildSquad {
        /// One query per line.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Entity annotations (JSONL) from an external recognizer.
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Extra entity terms, one per line.
        #[arg(long)]
        terms: Option<PathBuf>,
    },
    /// Generate an MRPC-style TSV from a SQuAD trainfile.
    BuildMrpc {
        #[arg(long)]
        squad: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        neg_ratio: f64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "LITQA_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

fn config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(CliError::Config)?,
        None => Config::default(),
    };
    cfg.apply_env();
    if let Some(i) = &cli.index {
        cfg.index = Some(i.clone());
    }
    if let Some(s) = cli.scorer {
        cfg.scorer = s;
    }
    if let Some(e) = &cli.endpoint {
        cfg.endpoint = Some(e.clone());
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Command::Ingest { max_tokens, overlap_tokens, .. } = &cli.command {
        cfg.max_tokens = max_tokens.unwrap_or(cfg.max_tokens);
        cfg.overlap_tokens = overlap_tokens.unwrap_or(cfg.overlap_tokens);
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn train_err(e: TrainDataError) -> CliError {
    CliError::Input(e.to_string())
}

fn print_warnings(w: &[String]) {
    for line in w {
        eprintln!("warning: {line}");
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(io_err(path))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config(&cli)?;
    let mut stdout = std::io::stdout().lock();
    let out_err = |e: std::io::Error| CliError::Internal(e.to_string());
    match cli.command {
        Command::Ingest { corpus_dir, out, .. } => {
            if !corpus_dir.is_dir() {
                return Err(CliError::Input(format!("{}: not a directory", corpus_dir.display())));
            }
            let policy = cfg.chunk_policy().map_err(CliError::Config)?;
            let index = load_corpus(&corpus_dir, &policy)?;
            for s in index.skipped() {
                eprintln!("skipped {}: {}", s.source, s.reason);
            }
            index.write_index_file(&out)?;
            writeln!(stdout, "{} documents, {} chunks, {} skipped", index.num_docs(), index.num_chunks(), index.skipped().len())
                .map_err(out_err)?;
        }
        Command::Retrieve { query, k, pretty } => {
            let engine = Engine::from_config(&cfg)?;
            let out = engine.retrieve(&query, k)?;
            print_warnings(&out.warnings);
            if pretty {
                write!(stdout, "{}", render_ranking_table(&out.value)).map_err(out_err)?;
            } else {
                for r in &out.value {
                    writeln!(stdout, "{}", serde_json::to_string(r).expect("record serializes")).map_err(out_err)?;
                }
            }
        }
        Command::Answer { query, pretty } => {
            let engine = Engine::from_config(&cfg)?;
            let out = engine.answer(&query)?;
            print_warnings(&out.warnings);
            if pretty {
                write!(stdout, "{}", render_answer_table(&out.value)).map_err(out_err)?;
            } else {
                writeln!(stdout, "{}", serde_json::to_string(&out.value).expect("record serializes")).map_err(out_err)?;
            }
        }
        Command::BuildSquad { queries, out, lexicon, annotations, terms } => {
            let lex_path = lexicon
                .or(cfg.lexicon.clone())
                .ok_or_else(|| CliError::Config("build-squad needs a lexicon (--lexicon or `lexicon` in the config)".into()))?;
            let lex = KeywordLexicon::load(&lex_path).map_err(|e| CliError::Input(e.to_string()))?;
            let queries: Vec<String> = std::fs::read_to_string(&queries)
                .map_err(io_err(&queries))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            let mut rules = RuleRecognizer::new();
            if let Some(t) = &terms {
                let raw = std::fs::read_to_string(t).map_err(io_err(t))?;
                rules = rules.with_terms(raw.lines().map(str::trim).filter(|l| !l.is_empty()));
            }
            let recognizer: Box<dyn EntityRecognizer> = match &annotations {
                Some(a) => Box::new(AnnotatedRecognizer::load(a).map_err(train_err)?.with_fallback(rules)),
                None => Box::new(rules),
            };
            let index = litqa_cli::engine::load_index(&cfg)?;
            let squad = build_squad(index.chunks(), &queries, &lex, recognizer.as_ref(), &SentenceSplitter::default())
                .map_err(train_err)?;
            let report = validate_squad(&squad);
            if !report.is_sound() {
                return Err(CliError::Validation(format!("SQuAD validation failed: {}", report.problems.join("; "))));
            }
            let json = squad.to_json();
            write_out(&out, &json)?;
            writeln!(
                stdout,
                "{} triplets, {} answers, {:.1}% sound, sha256 {}",
                report.triplets,
                report.answers,
                report.soundness() * 100.0,
                content_hash(&[&json])
            )
            .map_err(out_err)?;
        }
        Command::BuildMrpc { squad, out, seed, neg_ratio } => {
            if !(neg_ratio.is_finite() && neg_ratio >= 0.0) {
                return Err(CliError::Config(format!("--neg-ratio must be non-negative, got {neg_ratio}")));
            }
            let squad = SquadFile::load(&squad).map_err(train_err)?;
            let sp = SentenceSplitter::default();
            let mrpc = build_mrpc(&squad, seed, neg_ratio, &sp).map_err(train_err)?;
            let report = validate_mrpc(&mrpc, &squad, neg_ratio, &sp);
            if !report.is_sound() {
                return Err(CliError::Validation(format!("MRPC validation failed: {}", report.problems.join("; "))));
            }
            let tsv = mrpc.to_tsv();
            write_out(&out, &tsv)?;
            writeln!(
                stdout,
                "{} positive, {} negative pairs, sha256 {}",
                report.positives,
                report.negatives,
                content_hash(&[&tsv])
            )
            .map_err(out_err)?;
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
            rt.block_on(litqa_cli::service::serve(cfg, addr)).map_err(|e| CliError::Input(format!("{addr}: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
