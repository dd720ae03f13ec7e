//! Subcommand bodies. Each stage is a plain function so `pipeline` can run
//! them back to back without touching intermediate files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sift_core::classifier::{self, CvExample, CvOutcome, Hyperparams, LinearModel};
use sift_core::context::{self, ContextBundle, SourceIndex};
use sift_core::evaluation::{self, Evaluation, ReportFormat};
use sift_core::features::{self, FeatureRow, NullCheckConfig};
use sift_core::ingest::{self, Label, LabeledWarning, Warning};
use sift_core::par::Execution;
use sift_core::verifier::{
    self, BackendError, CompletionBackend, CompletionRequest, CompletionResult, HttpBackend, HttpConfig,
    PromptTemplates, RecordingBackend, ReplayBackend, Unresolved, Verdict, VerifierConfig, VerifyOutcome,
};

use crate::args::{
    BackendArgs, Common, ContextArgs, CvArgs, EvalArgs, FeaturizeArgs, IngestArgs, PipelineArgs, PredictArgs,
    RankArgs, ReportArgs, SourceArgs, TrainArgs, TrainParams, VerifierArgs, VerifyArgs,
};
use crate::error::CliError;
use crate::io;
use crate::manifest::{self, Manifest};

pub const EXIT_OK: u8 = 0;
/// Evaluation finished but some labeled warnings had no verdict.
pub const EXIT_UNRESOLVED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
/// Verification finished but some warnings could not be verified.
pub const EXIT_VERIFY_INCOMPLETE: u8 = 3;

fn note(msg: impl AsRef<str>) {
    eprintln!("sift: {}", msg.as_ref());
}

fn execution(common: &Common) -> Execution {
    match common.parallelism {
        0 => Execution::default(),
        n => Execution::with_parallelism(n),
    }
}

/// One line of `warnings.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningRecord {
    #[serde(flatten)]
    pub warning: Warning,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

/// One line of a verdicts file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerdictLine {
    Verdict(Verdict),
    Unresolved(Unresolved),
}

impl VerdictLine {
    pub fn warning_id(&self) -> &str {
        match self {
            VerdictLine::Verdict(v) => &v.warning_id,
            VerdictLine::Unresolved(u) => &u.warning_id,
        }
    }
}

/// A request as written by `verify --dump-requests`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpedRequest {
    pub key: String,
    #[serde(flatten)]
    pub request: CompletionRequest,
}

fn read_text(m: &mut Manifest, path: &Path) -> Result<String, CliError> {
    String::from_utf8(m.read_input(path)?)
        .map_err(|_| CliError::Input(format!("{}: not valid UTF-8", path.display())))
}

fn read_records(m: &mut Manifest, path: &Path) -> Result<Vec<WarningRecord>, CliError> {
    m.read_input(path)?;
    io::read_jsonl(path)
}

/// `REPO=PATH`, or a bare path whose file stem names the repository.
pub fn report_spec(spec: &str) -> (String, PathBuf) {
    if let Some((repo, path)) = spec.split_once('=') {
        if !repo.is_empty() && !repo.contains(['/', '\\']) {
            return (repo.to_string(), PathBuf::from(path));
        }
    }
    let path = PathBuf::from(spec);
    let repo = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    (repo, path)
}

fn ingest_stage(reports: &ReportArgs, m: &mut Manifest) -> Result<Vec<WarningRecord>, CliError> {
    let mut warnings = Vec::new();
    for spec in &reports.reports {
        let (repo, path) = report_spec(spec);
        let bytes = m.read_input(&path)?;
        warnings.extend(ingest::parse_report(&bytes, &repo)?);
    }
    // stable, so the first occurrence of a duplicate id wins
    warnings.sort_by(|a, b| a.id.cmp(&b.id));
    let before = warnings.len();
    warnings.dedup_by(|b, a| a.id == b.id);
    if warnings.len() < before {
        note(format!("dropped {} duplicate warning(s)", before - warnings.len()));
    }

    let labels = match &reports.labels {
        Some(p) => {
            let bytes = m.read_input(p)?;
            Some(ingest::parse_labels(&bytes[..])?)
        }
        None => None,
    };
    Ok(match labels {
        None => warnings
            .into_iter()
            .map(|warning| WarningRecord { warning, label: None })
            .collect(),
        Some(table) => {
            let attached = ingest::attach_labels(&warnings, &table);
            if !attached.unmatched_ids.is_empty() {
                note(format!(
                    "{} label(s) match no warning, e.g. {}",
                    attached.unmatched_ids.len(),
                    attached.unmatched_ids[0]
                ));
            }
            attached.labeled.into_iter().map(record_of).collect()
        }
    })
}

fn record_of(l: LabeledWarning) -> WarningRecord {
    WarningRecord {
        label: (l.label != Label::Unlabeled).then_some(l.label),
        warning: l.warning,
    }
}

fn build_index(source: &SourceArgs, exec: Execution, m: &mut Manifest) -> Result<SourceIndex, CliError> {
    let exts: Vec<&str> = source.extensions.iter().map(String::as_str).collect();
    let index = SourceIndex::build(&source.source_root, &exts, exec)?;
    m.record_input(
        format!("{}/", source.source_root.display()),
        io::tree_digest(index.files()),
    );
    Ok(index)
}

fn context_stage(
    records: &[WarningRecord],
    index: &SourceIndex,
    exec: Execution,
) -> Result<Vec<ContextBundle>, CliError> {
    exec.map(records, |r| context::build_bundle(&r.warning, index))
        .into_iter()
        .map(|b| b.map_err(CliError::from))
        .collect()
}

fn load_null_checks(path: Option<&Path>, m: &mut Manifest) -> Result<NullCheckConfig, CliError> {
    let config = match path {
        Some(p) => NullCheckConfig::from_text(&read_text(m, p)?),
        None => NullCheckConfig::default(),
    };
    m.null_checks = Some(config.methods.clone());
    Ok(config)
}

fn feature_stage(
    records: &[WarningRecord],
    bundles: &[ContextBundle],
    index: &SourceIndex,
    null_checks: &NullCheckConfig,
    exec: Execution,
) -> Result<Vec<FeatureRow>, CliError> {
    let by_id: HashMap<&str, &ContextBundle> = bundles.iter().map(|b| (b.warning_id.as_str(), b)).collect();
    exec.map(records, |r| {
        let w = &r.warning;
        let bundle = by_id
            .get(w.id.as_str())
            .ok_or_else(|| CliError::Input(format!("no context bundle for warning {}", w.id)))?;
        let text = index.file_text(&w.file)?;
        Ok(FeatureRow {
            id: w.id.clone(),
            features: features::featurize(w, bundle, &text, null_checks),
            label: r.label.unwrap_or(Label::Unlabeled),
        })
    })
    .into_iter()
    .collect()
}

fn feature_csv(rows: &[FeatureRow]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    features::write_feature_csv(&mut out, rows).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(out)
}

fn read_features(m: &mut Manifest, path: &Path) -> Result<Vec<FeatureRow>, CliError> {
    let bytes = m.read_input(path)?;
    features::read_feature_csv(&bytes[..]).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn hyperparams(t: &TrainParams) -> Hyperparams {
    Hyperparams {
        learning_rate: t.lr,
        l2: t.l2,
        epochs: t.epochs,
        seed: t.seed,
    }
}

fn cv_stage(
    rows: &[FeatureRow],
    records: &[WarningRecord],
    k: usize,
    train: &TrainParams,
    exec: Execution,
) -> Result<CvOutcome, CliError> {
    let by_id: HashMap<&str, &Warning> = records.iter().map(|r| (r.warning.id.as_str(), &r.warning)).collect();
    let examples = rows
        .iter()
        .filter(|r| r.label != Label::Unlabeled)
        .map(|r| {
            let w = by_id
                .get(r.id.as_str())
                .ok_or_else(|| CliError::Input(format!("feature row {} matches no warning", r.id)))?;
            Ok(CvExample {
                warning: LabeledWarning {
                    warning: (*w).clone(),
                    label: r.label,
                },
                features: r.features,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let outcome = classifier::cross_validate(&examples, k, hyperparams(train), train.threshold, exec)?;
    for d in &outcome.diagnostics {
        note(d);
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct FoldsFile<'a> {
    k: usize,
    seed: u64,
    file_folds: &'a BTreeMap<String, usize>,
    folds: &'a [classifier::FoldSummary],
}

fn write_cv_outputs(
    outcome: &CvOutcome,
    seed: u64,
    dir: &Path,
    m: &mut Manifest,
) -> Result<(), CliError> {
    let lines: Vec<VerdictLine> = outcome.verdicts.iter().cloned().map(VerdictLine::Verdict).collect();
    m.write_output(&dir.join("cv-verdicts.jsonl"), &io::to_jsonl(&lines)?)?;
    m.write_output(
        &dir.join("cv-eval.json"),
        &evaluation::emit_report(&outcome.evaluation, ReportFormat::Json, "Feature-based (CV)")?,
    )?;
    let folds = FoldsFile {
        k: outcome.assignment.k,
        seed,
        file_folds: &outcome.assignment.file_folds,
        folds: &outcome.folds,
    };
    m.write_output(&dir.join("cv-folds.json"), &io::to_pretty_json(&folds)?)
}

/// The completion backend selected on the command line.
pub enum Backend {
    Replay(ReplayBackend),
    Http(HttpBackend),
}

impl CompletionBackend for Backend {
    fn tag(&self) -> &str {
        match self {
            Backend::Replay(b) => b.tag(),
            Backend::Http(b) => b.tag(),
        }
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        match self {
            Backend::Replay(b) => b.complete(request),
            Backend::Http(b) => b.complete(request),
        }
    }
}

fn open_backend(args: &BackendArgs, m: &mut Manifest) -> Result<Backend, CliError> {
    if let Some(path) = &args.replay {
        let bytes = m.read_input(path)?;
        let replay = ReplayBackend::from_json(&bytes)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        return Ok(Backend::Replay(replay));
    }
    let url = args
        .http_url
        .clone()
        .ok_or_else(|| CliError::Input("either --replay or --http-url is required".into()))?;
    Ok(Backend::Http(HttpBackend::new(HttpConfig {
        url,
        token: args.http_token.clone(),
        timeout: Duration::from_secs(args.timeout_secs),
        retries: args.retries,
    })))
}

fn verifier_config(args: &VerifierArgs, m: &mut Manifest) -> Result<VerifierConfig, CliError> {
    let templates = match &args.prompts {
        Some(p) => PromptTemplates::from_text(&read_text(m, p)?)?,
        None => PromptTemplates::default(),
    };
    m.prompts = Some(serde_json::to_value(&templates).unwrap_or_default());
    let null_checks = load_null_checks(args.null_checks.as_deref(), m)?;
    Ok(VerifierConfig {
        templates,
        beam_size: args.beam as usize,
        max_tokens: args.max_tokens,
        null_checks,
        consistency: !args.no_consistency,
    })
}

fn verify_stage(
    records: &[WarningRecord],
    bundles: Vec<ContextBundle>,
    backend: &dyn CompletionBackend,
    config: &VerifierConfig,
    exec: Execution,
) -> VerifyOutcome {
    let warnings: Vec<Warning> = records
        .iter()
        .filter(|r| r.warning.kind.is_verifiable())
        .map(|r| r.warning.clone())
        .collect();
    if warnings.len() < records.len() {
        note(format!(
            "{} warning(s) of unsupported kinds not verified",
            records.len() - warnings.len()
        ));
    }
    let bundles: HashMap<String, ContextBundle> = bundles.into_iter().map(|b| (b.warning_id.clone(), b)).collect();
    verifier::verify_all(&warnings, &bundles, backend, config, exec)
}

fn report_misses(backend: &Backend) {
    if let Backend::Replay(r) = backend {
        if r.misses() > 0 {
            note(format!("{} completion request(s) missing from the replay table", r.misses()));
        }
    }
}

/// Runs verification, optionally recording every request.
fn run_verifier(
    records: &[WarningRecord],
    bundles: Vec<ContextBundle>,
    backend: Backend,
    config: &VerifierConfig,
    exec: Execution,
    dump: Option<&Path>,
    m: &mut Manifest,
) -> Result<VerifyOutcome, CliError> {
    let Some(dump) = dump else {
        let outcome = verify_stage(records, bundles, &backend, config, exec);
        report_misses(&backend);
        return Ok(outcome);
    };
    let recorder = RecordingBackend::new(backend);
    let outcome = verify_stage(records, bundles, &recorder, config, exec);
    report_misses(recorder.inner());
    let mut dumped: Vec<DumpedRequest> = recorder
        .requests()
        .into_iter()
        .map(|request| DumpedRequest {
            key: request.key(),
            request,
        })
        .collect();
    dumped.dedup_by(|b, a| a.key == b.key);
    m.write_output(dump, &io::to_pretty_json(&dumped)?)?;
    Ok(outcome)
}

fn verdict_lines(outcome: VerifyOutcome) -> Vec<VerdictLine> {
    let mut lines: Vec<VerdictLine> = outcome
        .verdicts
        .into_iter()
        .map(VerdictLine::Verdict)
        .chain(outcome.unresolved.into_iter().map(VerdictLine::Unresolved))
        .collect();
    lines.sort_by(|a, b| a.warning_id().cmp(b.warning_id()));
    lines
}

/// Scores the labeled warnings that appear in `lines`.
fn evaluate(records: &[WarningRecord], lines: &[VerdictLine]) -> Result<Evaluation, CliError> {
    let known: HashSet<&str> = records.iter().map(|r| r.warning.id.as_str()).collect();
    if let Some(l) = lines.iter().find(|l| !known.contains(l.warning_id())) {
        return Err(CliError::Input(format!("verdict for unknown warning {}", l.warning_id())));
    }
    let present: HashSet<&str> = lines.iter().map(VerdictLine::warning_id).collect();
    let labeled: Vec<LabeledWarning> = records
        .iter()
        .filter(|r| present.contains(r.warning.id.as_str()))
        .filter_map(|r| {
            r.label.map(|label| LabeledWarning {
                warning: r.warning.clone(),
                label,
            })
        })
        .collect();
    let absent = records.iter().filter(|r| r.label.is_some()).count()
        - labeled.len();
    if absent > 0 {
        note(format!("{absent} labeled warning(s) have no verdict line and are not evaluated"));
    }
    let population: HashSet<&str> = labeled.iter().map(|l| l.warning.id.as_str()).collect();
    if population.len() < lines.len() {
        note(format!(
            "{} verdict(s) for unlabeled warnings ignored",
            lines.len() - population.len()
        ));
    }
    let mut verdicts = Vec::new();
    let mut unresolved = Vec::new();
    for line in lines.iter().filter(|l| population.contains(l.warning_id())) {
        match line {
            VerdictLine::Verdict(v) => verdicts.push(v.clone()),
            VerdictLine::Unresolved(u) => unresolved.push(u.warning_id.clone()),
        }
    }
    Ok(evaluation::compute_metrics(&labeled, &verdicts, &unresolved)?)
}

fn rank_stage(records: &[WarningRecord], lines: &[VerdictLine]) -> Result<Vec<evaluation::RankedWarning>, CliError> {
    let scores: HashMap<String, f64> = lines
        .iter()
        .filter_map(|l| match l {
            VerdictLine::Verdict(v) => Some((v.warning_id.clone(), v.score)),
            VerdictLine::Unresolved(_) => None,
        })
        .collect();
    let warnings: Vec<Warning> = records
        .iter()
        .filter(|r| scores.contains_key(&r.warning.id))
        .map(|r| r.warning.clone())
        .collect();
    if warnings.len() < records.len() {
        note(format!("{} warning(s) without a score left out of the ranking", records.len() - warnings.len()));
    }
    Ok(evaluation::rank_warnings(&warnings, &scores)?)
}

pub fn ingest(args: &IngestArgs) -> Result<u8, CliError> {
    let mut m = Manifest::new("ingest", args, &manifest::dir_of(&args.out));
    let records = ingest_stage(&args.reports, &mut m)?;
    m.write_output(&args.out, &io::to_jsonl(&records)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn context(args: &ContextArgs) -> Result<u8, CliError> {
    let exec = execution(&args.common);
    let mut m = Manifest::new("context", args, &manifest::dir_of(&args.out));
    let records = read_records(&mut m, &args.warnings)?;
    let index = build_index(&args.source, exec, &mut m)?;
    let bundles = context_stage(&records, &index, exec)?;
    m.write_output(&args.out, &io::to_jsonl(&bundles)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn featurize(args: &FeaturizeArgs) -> Result<u8, CliError> {
    let exec = execution(&args.common);
    let mut m = Manifest::new("featurize", args, &manifest::dir_of(&args.out));
    let records = read_records(&mut m, &args.warnings)?;
    m.read_input(&args.bundles)?;
    let bundles: Vec<ContextBundle> = io::read_jsonl(&args.bundles)?;
    let index = build_index(&args.source, exec, &mut m)?;
    let null_checks = load_null_checks(args.null_checks.as_deref(), &mut m)?;
    let rows = feature_stage(&records, &bundles, &index, &null_checks, exec)?;
    m.write_output(&args.out, &feature_csv(&rows)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn cv(args: &CvArgs) -> Result<u8, CliError> {
    let exec = execution(&args.common);
    let mut m = Manifest::new("cv", args, &args.out_dir);
    m.seed = Some(args.train.seed);
    let rows = read_features(&mut m, &args.features)?;
    let records = read_records(&mut m, &args.warnings)?;
    let outcome = cv_stage(&rows, &records, args.folds, &args.train, exec)?;
    write_cv_outputs(&outcome, args.train.seed, &args.out_dir, &mut m)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn train(args: &TrainArgs) -> Result<u8, CliError> {
    let exec = execution(&args.common);
    let dir = manifest::dir_of(&args.out);
    let mut m = Manifest::new("train", args, &dir);
    m.seed = Some(args.train.seed);
    let rows = read_features(&mut m, &args.features)?;
    let pairs: Vec<_> = rows.iter().map(|r| (r.features, r.label)).collect();
    let model = LinearModel {
        threshold: args.train.threshold,
        ..classifier::train_logistic(&pairs, hyperparams(&args.train))?
    };
    if let (Some(k), Some(warnings)) = (args.folds, &args.warnings) {
        let records = read_records(&mut m, warnings)?;
        let outcome = cv_stage(&rows, &records, k, &args.train, exec)?;
        write_cv_outputs(&outcome, args.train.seed, &dir, &mut m)?;
    }
    m.write_output(&args.out, &io::to_pretty_json(&model)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn predict(args: &PredictArgs) -> Result<u8, CliError> {
    let mut m = Manifest::new("predict", args, &manifest::dir_of(&args.out));
    let model_bytes = m.read_input(&args.model)?;
    let model: LinearModel = serde_json::from_slice(&model_bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.model.display())))?;
    let mut rows = read_features(&mut m, &args.features)?;
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let lines = rows
        .iter()
        .map(|r| model.verdict(&r.id, &r.features).map(VerdictLine::Verdict))
        .collect::<Result<Vec<_>, _>>()?;
    m.write_output(&args.out, &io::to_jsonl(&lines)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let exec = execution(&args.common);
    let mut m = Manifest::new("verify", args, &manifest::dir_of(&args.out));
    let records = read_records(&mut m, &args.warnings)?;
    m.read_input(&args.bundles)?;
    let bundles: Vec<ContextBundle> = io::read_jsonl(&args.bundles)?;
    let backend = open_backend(&args.backend, &mut m)?;
    let config = verifier_config(&args.verifier, &mut m)?;
    let outcome = run_verifier(&records, bundles, backend, &config, exec, args.dump_requests.as_deref(), &mut m)?;
    let incomplete = !outcome.unresolved.is_empty();
    for u in &outcome.unresolved {
        note(format!("{}: {}", u.warning_id, u.reason));
    }
    m.write_output(&args.out, &io::to_jsonl(&verdict_lines(outcome))?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(if incomplete { EXIT_VERIFY_INCOMPLETE } else { EXIT_OK })
}

pub fn eval(args: &EvalArgs) -> Result<u8, CliError> {
    let format: ReportFormat = args.format.parse()?;
    let mut m = Manifest::new("eval", args, &manifest::dir_of(&args.out));
    let mut records = read_records(&mut m, &args.warnings)?;
    if let Some(p) = &args.labels {
        let bytes = m.read_input(p)?;
        let table = ingest::parse_labels(&bytes[..])?;
        let warnings: Vec<Warning> = records.into_iter().map(|r| r.warning).collect();
        records = ingest::attach_labels(&warnings, &table)
            .labeled
            .into_iter()
            .map(record_of)
            .collect();
    }
    m.read_input(&args.verdicts)?;
    let lines: Vec<VerdictLine> = io::read_jsonl(&args.verdicts)?;
    let evaluation = evaluate(&records, &lines)?;
    m.write_output(&args.out, &evaluation::emit_report(&evaluation, format, &args.approach)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(if evaluation.has_unresolved() { EXIT_UNRESOLVED } else { EXIT_OK })
}

pub fn rank(args: &RankArgs) -> Result<u8, CliError> {
    let mut m = Manifest::new("rank", args, &manifest::dir_of(&args.out));
    let records = read_records(&mut m, &args.warnings)?;
    m.read_input(&args.verdicts)?;
    let lines: Vec<VerdictLine> = io::read_jsonl(&args.verdicts)?;
    let ranked = rank_stage(&records, &lines)?;
    m.write_output(&args.out, &io::to_jsonl(&ranked)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(EXIT_OK)
}

pub fn pipeline(args: &PipelineArgs) -> Result<u8, CliError> {
    let exec = execution(&args.common);
    let dir = args.out_dir.as_path();
    let mut m = Manifest::new("pipeline", args, dir);
    m.seed = Some(args.train.seed);

    let records = ingest_stage(&args.reports, &mut m)?;
    m.write_output(&dir.join("warnings.jsonl"), &io::to_jsonl(&records)?)?;

    let index = build_index(&args.source, exec, &mut m)?;
    let bundles = context_stage(&records, &index, exec)?;
    m.write_output(&dir.join("bundles.jsonl"), &io::to_jsonl(&bundles)?)?;

    let backend = open_backend(&args.backend, &mut m)?;
    let config = verifier_config(&args.verifier, &mut m)?;
    let rows = feature_stage(&records, &bundles, &index, &config.null_checks, exec)?;
    m.write_output(&dir.join("features.csv"), &feature_csv(&rows)?)?;

    let labeled = records.iter().any(|r| r.label.is_some());
    let cv = if labeled {
        let outcome = cv_stage(&rows, &records, args.folds, &args.train, exec)?;
        write_cv_outputs(&outcome, args.train.seed, dir, &mut m)?;
        Some(outcome)
    } else {
        note("no labels given; skipping cross-validation and evaluation");
        None
    };

    let outcome = run_verifier(&records, bundles, backend, &config, exec, None, &mut m)?;
    for u in &outcome.unresolved {
        note(format!("{}: {}", u.warning_id, u.reason));
    }
    let lines = verdict_lines(outcome);
    m.write_output(&dir.join("verdicts.jsonl"), &io::to_jsonl(&lines)?)?;

    let mut status = EXIT_OK;
    if let Some(cv) = &cv {
        let verified = evaluate(&records, &lines)?;
        if verified.has_unresolved() {
            status = EXIT_UNRESOLVED;
        }
        m.write_output(
            &dir.join("eval.json"),
            &evaluation::emit_report(&verified, ReportFormat::Json, "Zero-shot verifier")?,
        )?;
        let md = match (cv.evaluation.resolved(), verified.resolved()) {
            (Some(c), Some(v)) => format!(
                "{}\n{}",
                evaluation::markdown_comparison(&[("Feature-based (CV)", c), ("Zero-shot verifier", v)]),
                evaluation::markdown_repos(v)
            )
            .into_bytes(),
            _ => evaluation::emit_report(&verified, ReportFormat::Markdown, "Zero-shot verifier")?,
        };
        m.write_output(&dir.join("eval.md"), &md)?;
    }

    let ranked = rank_stage(&records, &lines)?;
    m.write_output(&dir.join("ranked.jsonl"), &io::to_jsonl(&ranked)?)?;
    m.finish(args.common.manifest.as_deref())?;
    Ok(status)
}
