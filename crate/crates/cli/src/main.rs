use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Slot filling as extractive question answering over GUI screens.
#[derive(Debug, Parser)]
#[command(name = "slotqa", version, propagate_version = true)]
struct Cli {
    /// Log level for diagnostics on stderr (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a BIO corpus into SQuAD v2 JSON.
    Convert(ConvertArgs),
    /// Print the questions generated for one or more screens.
    Genq(GenqArgs),
    /// Fill the slots of one utterance.
    Fill(FillArgs),
    /// Draw a seeded few-shot sample from a BIO corpus.
    Sample(SampleArgs),
    /// Write or check a training plan manifest.
    Plan(PlanArgs),
    /// Score slot fills against gold annotations.
    Eval(EvalArgs),
    /// Run an experiment grid or a distractor sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    /// Answers from gold annotations.
    Oracle,
    /// Keyword-triggered patterns from a gazetteer.
    Lexical,
    /// A model server speaking the /extract protocol.
    Remote,
}

#[derive(Debug, Clone, Args)]
struct QuestionArgs {
    /// Question mode: full, text or novis.
    #[arg(long, default_value = "full")]
    mode: slotqa::AblationMode,
    /// Template override table (TSV).
    #[arg(long)]
    overrides: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value = "oracle")]
    backend: BackendKind,
    /// Model server address for the remote backend.
    #[arg(long, env = "SLOTQA_ENDPOINT")]
    endpoint: Option<String>,
    /// Rejection threshold on the no-answer score.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Gazetteer for the lexical backend (TSV); the bundled one by default.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Items per remote request.
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Remote request timeout in milliseconds.
    #[arg(long, default_value_t = 30_000)]
    timeout_ms: u64,
    /// Remote retries after a transient failure.
    #[arg(long, default_value_t = 2)]
    retries: u32,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// BIO corpus (CoNLL: token and tag per line, blank line between utterances).
    #[arg(long)]
    bio: PathBuf,
    /// Slot schema (TSV: tag and description). Defaults to the ATIS tag set.
    #[arg(long, conflicts_with = "screen")]
    schema: Option<PathBuf>,
    /// Ask the screen's own questions instead of schema text-field questions.
    #[arg(long)]
    screen: Option<String>,
    /// Unanswerable questions per utterance: all, none or sample:K.
    #[arg(long, default_value = "all")]
    negatives: slotqa::NegativePolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Article title in the output.
    #[arg(long, default_value = "slotqa")]
    title: String,
    #[command(flatten)]
    questions: QuestionArgs,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenqArgs {
    /// Screen file or bundled screen name. Repeat to ask several screens at once.
    #[arg(long, required = true)]
    screen: Vec<String>,
    #[command(flatten)]
    questions: QuestionArgs,
    /// Aligned `slot  question` table instead of bare questions.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FillArgs {
    /// Screen file or bundled screen name. Repeat to add distractor screens.
    #[arg(long, required = true)]
    screen: Vec<String>,
    #[arg(long)]
    utterance: String,
    /// Gold answers for the oracle backend (SQuAD v2 JSON).
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Gold answers for the oracle backend as a BIO corpus over the first screen.
    #[arg(long, conflicts_with = "gold")]
    bio: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    questions: QuestionArgs,
    /// Aligned table instead of JSON.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    bio: PathBuf,
    /// Number of utterances to draw.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cover every slot type first, then fill up uniformly.
    #[arg(long)]
    stratified: bool,
    /// Report slot coverage against this schema on stderr.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Check an existing manifest instead of writing one.
    #[arg(long, conflicts_with_all = ["target", "aux", "zero_shot"])]
    check: Option<PathBuf>,
    /// General QA dataset for the first stage.
    #[arg(long, default_value = "squad2")]
    base: String,
    /// Slot-filling datasets trained before the target, in order.
    #[arg(long)]
    aux: Vec<String>,
    /// Target domain training set.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 2)]
    epochs: u32,
    /// Serve the stage before the target without training on it.
    #[arg(long)]
    zero_shot: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Gold annotations (BIO).
    #[arg(long)]
    bio: PathBuf,
    /// Predictions to score (JSON array of fill results). Without it the
    /// backend fills every gold utterance first.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Screen file or bundled screen name; needed unless --predictions is given.
    #[arg(long)]
    screen: Vec<String>,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    questions: QuestionArgs,
    /// Compare tokens verbatim.
    #[arg(long)]
    raw: bool,
    /// Per-slot table instead of JSON.
    #[arg(long)]
    table: bool,
    /// Also write the predictions (JSON) here.
    #[arg(long)]
    save_predictions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Bundled domain to run. Repeat for several; all four by default.
    #[arg(long)]
    domain: Vec<String>,
    /// Custom domain as NAME=SCREEN:BIO. Repeatable.
    #[arg(long)]
    corpus: Vec<String>,
    /// Training sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0,5,50,100,500")]
    sizes: Vec<usize>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds, counting up from --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Extra rejection thresholds to sweep, comma-separated.
    #[arg(long, value_delimiter = ',')]
    tau_sweep: Vec<f64>,
    /// Run the distractor sweep for V = 1..=N simultaneously visible elements
    /// instead of the training-size grid.
    #[arg(long)]
    distractors: Option<usize>,
    /// Count distractors in screens rather than elements.
    #[arg(long, requires = "distractors")]
    by_screen: bool,
    /// Slot-filling datasets trained before each target domain.
    #[arg(long)]
    aux: Vec<String>,
    #[arg(long, default_value = "squad2")]
    base: String,
    /// Share of each corpus held out for testing.
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value = "all")]
    negatives: slotqa::NegativePolicy,
    /// Write each cell's training set and manifest below this directory.
    #[arg(long)]
    work_dir: Option<PathBuf>,
    /// Parallel grid cells; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    questions: QuestionArgs,
    /// Aligned table instead of JSON.
    #[arg(long)]
    table: bool,
    /// Delimited text instead of JSON.
    #[arg(long, conflicts_with = "table")]
    tsv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
