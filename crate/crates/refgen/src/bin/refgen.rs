//! Command-line front end for the REG toolkit.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use refgen::corpus::{
    parse_corpus, write_corpus, ContextPolicy, Corpus, EntityRegistry, Split,
};
use refgen::delex::{build_document, parse_annotated, TagOptions};
use refgen::features::FeatureSchema;
use refgen::metrics::{render_table, EvalOptions, EvalReport, SedGranularity};
use refgen::ml::{train, ClassifierConfig, FormModel};
use refgen::pipeline::{
    evaluate, generate, read_predictions, write_predictions, SystemKind,
};

#[derive(Parser)]
#[command(
    name = "refgen",
    version,
    about = "Referring expression generation in context: corpus construction, generation, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a delexicalized corpus from coreference-annotated documents.
    BuildCorpus(BuildCorpusArgs),
    /// Train a referential-form model on a corpus.
    Train(TrainArgs),
    /// Generate referring expressions for one split.
    Generate(GenerateArgs),
    /// Score a predictions file against one split.
    Evaluate(EvaluateArgs),
    /// Render saved evaluation reports as an aligned table.
    Report(ReportArgs),
}

/// Optional config file; flags always win over its values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    corpus: Option<PathBuf>,
    registry: Option<PathBuf>,
    model: Option<PathBuf>,
    split: Option<Split>,
    system: Option<SystemKind>,
    context: Option<ContextPolicy>,
    seed: Option<u64>,
    sed: Option<SedGranularity>,
    bleu_smoothing: Option<bool>,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(path) => {
            let file = File::open(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| usage(format!("config {}: {e}", path.display())))
        }
    }
}

#[derive(Args)]
struct BuildCorpusArgs {
    /// Annotated documents (JSONL).
    #[arg(long)]
    input: PathBuf,
    /// Entity registry JSON.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Output corpus JSONL.
    #[arg(long)]
    output: PathBuf,
    /// Context window in sentences stamped into each document; omit for
    /// whole-document contexts.
    #[arg(long)]
    k: Option<usize>,
    /// Treat names with middle initials as modified firstname-lastname.
    #[arg(long)]
    middle_initial_modified: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Feature schema: ml-s or ml-l.
    #[arg(long)]
    schema: Option<String>,
    /// Use the newswire feature variant (plurality, paragraph recency).
    #[arg(long)]
    wsj_features: bool,
    /// Context window: a number, `full`, or `doc`.
    #[arg(long)]
    context: Option<ContextPolicy>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output model file.
    #[arg(long)]
    output: PathBuf,
    /// Also write the train/dev feature vectors as JSONL for inspection.
    #[arg(long)]
    dump_features: Option<PathBuf>,
    /// Optional JSON config file; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long)]
    split: Option<Split>,
    /// rreg-s, rreg-l, ml-s, ml-l, or external.
    #[arg(long)]
    system: Option<SystemKind>,
    /// Trained model file (required for ml-s/ml-l).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Predictions to pass through (required for system=external).
    #[arg(long)]
    predictions_in: Option<PathBuf>,
    /// Context window override: a number, `full`, or `doc`.
    #[arg(long)]
    context: Option<ContextPolicy>,
    /// Output predictions JSONL.
    #[arg(long)]
    output: PathBuf,
    /// Also write rule decisions (form + rationale) as JSONL.
    #[arg(long)]
    decisions: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long)]
    split: Option<Split>,
    /// Predictions JSONL to score.
    #[arg(long)]
    predictions: PathBuf,
    /// Output report JSON.
    #[arg(long)]
    output: PathBuf,
    /// Also write the aligned text table here ("-" for stdout).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Edit distance granularity: char or token.
    #[arg(long)]
    sed: Option<SedGranularity>,
    /// Add-one smoothing for BLEU.
    #[arg(long)]
    bleu_smoothing: bool,
    /// System name recorded in the report and table.
    #[arg(long, default_value = "system")]
    label: String,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON files to tabulate.
    #[arg(long, required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Row labels; defaults to each report's recorded system name.
    #[arg(long, num_args = 1..)]
    labels: Vec<String>,
    /// Output path; omit for stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn data(message: impl Into<String>) -> CliError {
    CliError::Data(message.into())
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.to_string())
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| data(format!("{}: {e}", path.display())))
}

fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load_registry(path: Option<&Path>) -> Result<EntityRegistry, CliError> {
    match path {
        None => Ok(EntityRegistry::new()),
        Some(path) => Ok(EntityRegistry::from_json_reader(open_reader(path)?)?),
    }
}

fn load_corpus(path: &Path, registry: Option<&Path>) -> Result<Corpus, CliError> {
    let mut corpus = parse_corpus(open_reader(path)?)?;
    corpus.registry = load_registry(registry)?;
    Ok(corpus)
}

fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(config)
        .ok_or_else(|| usage(format!("missing required option --{name}")))
}

fn parse_schema(name: &str, wsj: bool) -> Result<FeatureSchema, CliError> {
    match name {
        "ml-s" => Ok(FeatureSchema::MlS),
        "ml-l" => Ok(FeatureSchema::MlL { wsj }),
        other => Err(usage(format!("unknown schema `{other}` (expected ml-s or ml-l)"))),
    }
}

fn cmd_build_corpus(args: BuildCorpusArgs) -> Result<(), CliError> {
    let registry = load_registry(args.registry.as_deref())?;
    let documents = parse_annotated(open_reader(&args.input)?)?;
    let options = TagOptions {
        middle_initial_as_modified: args.middle_initial_modified,
        ..TagOptions::default()
    };
    let mut built_docs = Vec::with_capacity(documents.len());
    let mut n_slots = 0usize;
    for doc in &documents {
        let built = build_document(doc, &registry, args.k, &options)?;
        for warning in &built.warnings {
            eprintln!("warning: {warning}");
        }
        n_slots += built.document.slots.len();
        built_docs.push(built.document);
    }
    let corpus = Corpus::new(built_docs, registry);
    write_corpus(&corpus, create_writer(&args.output)?)?;
    eprintln!(
        "built {} documents with {} slots -> {}",
        corpus.documents.len(),
        n_slots,
        args.output.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let corpus_path = require(args.corpus, config.corpus, "corpus")?;
    let registry = args.registry.or(config.registry);
    let schema_name = require(args.schema, None, "schema")?;
    let schema = parse_schema(&schema_name, args.wsj_features)?;
    let context = args
        .context
        .or(config.context)
        .unwrap_or(ContextPolicy::DocDefault);
    let seed = args.seed.or(config.seed).unwrap_or(0);

    let corpus = load_corpus(&corpus_path, registry.as_deref())?;
    let model = train(
        &corpus,
        schema,
        ClassifierConfig::default(),
        context,
        seed,
    )?;
    model.save(create_writer(&args.output)?)?;
    if let Some(path) = args.dump_features {
        let mut writer = create_writer(&path)?;
        for split in [Split::Train, Split::Dev] {
            for doc in corpus.split_documents(split) {
                let window = model.context.window_for(doc);
                for instance in refgen::corpus::extract_instances(doc, window) {
                    let features = refgen::features::extract(
                        &instance,
                        model.schema,
                        &model.binners,
                        &corpus.registry,
                    );
                    let line = serde_json::json!({
                        "doc_id": instance.doc_id,
                        "slot_index": instance.slot_index,
                        "split": split,
                        "gold_form": instance.gold_form,
                        "features": features,
                    });
                    writeln!(writer, "{line}").map_err(|e| data(e.to_string()))?;
                }
            }
        }
    }
    eprintln!(
        "trained {schema} model (seed {seed}, importance: {}) -> {}",
        model.feature_importance.join(" > "),
        args.output.display()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let corpus_path = require(args.corpus, config.corpus, "corpus")?;
    let registry = args.registry.or(config.registry);
    let split = require(args.split, config.split, "split")?;
    let system = require(args.system, config.system, "system")?;
    let context = args.context.or(config.context);

    let corpus = load_corpus(&corpus_path, registry.as_deref())?;

    if system == SystemKind::External {
        let input = args
            .predictions_in
            .ok_or_else(|| usage("system=external requires --predictions-in"))?;
        let predictions = read_predictions(open_reader(&input)?)?;
        write_predictions(create_writer(&args.output)?, &predictions)?;
        eprintln!(
            "passed through {} predictions -> {}",
            predictions.len(),
            args.output.display()
        );
        return Ok(());
    }

    let model = match system {
        SystemKind::MlS | SystemKind::MlL => {
            let path = args
                .model
                .or(config.model)
                .ok_or_else(|| usage(format!("system={system} requires --model")))?;
            Some(FormModel::load(open_reader(&path)?)?)
        }
        _ => None,
    };
    let output = generate(&corpus, split, system, model.as_ref(), context)?;
    write_predictions(create_writer(&args.output)?, &output.predictions)?;
    if let Some(decisions_path) = args.decisions {
        let mut writer = create_writer(&decisions_path)?;
        for decision in &output.decisions {
            let json = serde_json::to_string(decision).map_err(|e| data(e.to_string()))?;
            writeln!(writer, "{json}").map_err(|e| data(e.to_string()))?;
        }
    }
    eprintln!(
        "generated {} predictions with {system} -> {}",
        output.predictions.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let corpus_path = require(args.corpus, config.corpus, "corpus")?;
    let registry = args.registry.or(config.registry);
    let split = require(args.split, config.split, "split")?;
    let options = EvalOptions {
        sed_granularity: args
            .sed
            .or(config.sed)
            .unwrap_or(SedGranularity::Char),
        bleu_smoothing: args.bleu_smoothing || config.bleu_smoothing.unwrap_or(false),
    };

    let corpus = load_corpus(&corpus_path, registry.as_deref())?;
    let predictions = read_predictions(open_reader(&args.predictions)?)?;
    let mut report = evaluate(&corpus, split, &predictions, options)?;
    report
        .metadata
        .insert("system".to_owned(), args.label.clone());
    report.metadata.insert("split".to_owned(), split.to_string());

    let json = serde_json::to_string_pretty(&report).map_err(|e| data(e.to_string()))?;
    let mut writer = create_writer(&args.output)?;
    writer
        .write_all(json.as_bytes())
        .and_then(|()| writer.write_all(b"\n"))
        .map_err(|e| data(e.to_string()))?;

    let table = render_table(&[(args.label.clone(), &report)]);
    match args.table {
        Some(path) if path.as_os_str() == "-" => print!("{table}"),
        Some(path) => {
            create_writer(&path)?
                .write_all(table.as_bytes())
                .map_err(|e| data(e.to_string()))?;
        }
        None => {}
    }
    eprintln!(
        "re_acc={:.4} sed={:.2} bleu={:.2} f1={:.4} -> {}",
        report.overall.re_accuracy,
        report.overall.sed_mean,
        report.overall.bleu,
        report.overall.pronom_f1,
        args.output.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    if !args.labels.is_empty() && args.labels.len() != args.inputs.len() {
        return Err(usage("--labels must match --inputs in number"));
    }
    let mut rows = Vec::with_capacity(args.inputs.len());
    for (i, path) in args.inputs.iter().enumerate() {
        let report: EvalReport = serde_json::from_reader(open_reader(path)?)
            .map_err(|e| data(format!("{}: {e}", path.display())))?;
        let label = args
            .labels
            .get(i)
            .cloned()
            .or_else(|| report.metadata.get("system").cloned())
            .unwrap_or_else(|| path.display().to_string());
        rows.push((label, report));
    }
    let borrowed: Vec<(String, &EvalReport)> =
        rows.iter().map(|(l, r)| (l.clone(), r)).collect();
    let table = render_table(&borrowed);
    match args.output {
        Some(path) => {
            create_writer(&path)?
                .write_all(table.as_bytes())
                .map_err(|e| data(e.to_string()))?;
        }
        None => print!("{table}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version output are not errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::BuildCorpus(args) => cmd_build_corpus(args),
        Command::Train(args) => cmd_train(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
