use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "sift", version, about = "Filter and re-rank static-analyzer warnings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse analyzer reports (and optional labels) into warnings.jsonl.
    Ingest(IngestArgs),
    /// Extract local and non-local method context for each warning.
    Context(ContextArgs),
    /// Compute the four handcrafted features per warning.
    Featurize(FeaturizeArgs),
    /// File-grouped k-fold cross-validation of the logistic classifier.
    Cv(CvArgs),
    /// Fit the logistic classifier on all labeled rows.
    Train(TrainArgs),
    /// Score warnings with a trained model.
    Predict(PredictArgs),
    /// Zero-shot verification through a completion backend.
    Verify(VerifyArgs),
    /// Precision, recall and relative precision change against labels.
    Eval(EvalArgs),
    /// Order all warnings by legitimacy score.
    Rank(RankArgs),
    /// Run every stage end to end.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Worker threads for per-warning stages; 0 uses all cores, 1 runs
    /// sequentially.
    #[arg(long, default_value_t = 0)]
    pub parallelism: usize,
    /// Where to write the run manifest (defaults beside the output).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Analyzer report, optionally prefixed with a repository name
    /// (`alpha=reports/alpha.json`). Repeatable.
    #[arg(long = "report", required = true, value_name = "[REPO=]PATH")]
    pub reports: Vec<String>,
    /// `id,label` CSV with TP/FP labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// Root that warning file paths are relative to.
    #[arg(long)]
    pub source_root: PathBuf,
    /// File extensions scanned for callee definitions.
    #[arg(long = "ext", value_delimiter = ',', default_value = "java")]
    pub extensions: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainParams {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub l2: f64,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    /// Probability at or above which a warning is kept.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BackendArgs {
    /// Replay table mapping request digests to recorded completions.
    #[arg(long, conflicts_with = "http_url", required_unless_present = "http_url")]
    pub replay: Option<PathBuf>,
    /// Completion service endpoint.
    #[arg(long)]
    pub http_url: Option<String>,
    /// Bearer token for the completion service.
    #[arg(long, env = "SIFT_HTTP_TOKEN", hide_env_values = true)]
    #[serde(skip)]
    pub http_token: Option<String>,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
    /// Extra attempts after a failed request.
    #[arg(long, default_value_t = 2)]
    pub retries: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifierArgs {
    /// Prompt templates, one per line, `<v>` for the target variable.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Null-check method names, one per line.
    #[arg(long)]
    pub null_checks: Option<PathBuf>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub beam: u64,
    #[arg(long, default_value_t = 64)]
    pub max_tokens: usize,
    /// Skip the logical OR over warnings sharing a variable.
    #[arg(long)]
    pub no_consistency: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub reports: ReportArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ContextArgs {
    #[arg(long)]
    pub warnings: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub warnings: PathBuf,
    #[arg(long)]
    pub bundles: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub null_checks: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CvArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// warnings.jsonl, for file grouping and per-repo metrics.
    #[arg(long)]
    pub warnings: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub train: TrainParams,
    /// Output directory for cv-verdicts.jsonl, cv-eval.json, cv-folds.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Also cross-validate with this many folds (needs --warnings).
    #[arg(long, requires = "warnings")]
    pub folds: Option<usize>,
    #[arg(long)]
    pub warnings: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainParams,
    /// model.json destination.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub warnings: PathBuf,
    #[arg(long)]
    pub bundles: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub verifier: VerifierArgs,
    /// Write every request (context, prompt, key) to this JSON file.
    #[arg(long)]
    pub dump_requests: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// warnings.jsonl with labels attached at ingest.
    #[arg(long)]
    pub warnings: PathBuf,
    /// Labels to use instead of those in warnings.jsonl.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub verdicts: PathBuf,
    /// json, csv or markdown.
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Row name in the markdown table.
    #[arg(long, default_value = "Filtered")]
    pub approach: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    #[arg(long)]
    pub warnings: PathBuf,
    /// Verdicts whose scores order the warnings.
    #[arg(long)]
    pub verdicts: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub reports: ReportArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub verifier: VerifierArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub train: TrainParams,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}
