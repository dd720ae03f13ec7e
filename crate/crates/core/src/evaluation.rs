//! Precision, recall against the analyzer's true positives, and relative
//! precision improvement, overall and per repository.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Label, LabeledWarning, Warning};
use crate::verifier::{Prediction, Verdict};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("warning {0} is unlabeled")]
    Unlabeled(String),
    #[error("verdict for unknown warning {0}")]
    UnknownVerdict(String),
    #[error("duplicate verdict for warning {0}")]
    DuplicateVerdict(String),
    #[error("no score for warning {0}")]
    MissingScore(String),
    #[error("score for warning {0} is not a number")]
    NanScore(String),
    #[error("unknown report format `{0}` (expected json, csv or markdown)")]
    UnknownFormat(String),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

/// Counts and ratios for one population of warnings.
///
/// `precision`, `baseline_precision` and `recall` are fractions in
/// `[0, 1]`; `delta_precision_pct` is a relative change in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total: usize,
    pub analyzer_tp: usize,
    pub kept: usize,
    pub kept_tp: usize,
    pub kept_fp: usize,
    pub precision: f64,
    pub baseline_precision: f64,
    pub delta_precision_pct: f64,
    pub recall: f64,
    /// Nothing was kept; `precision` is reported as 0.
    pub kept_empty: bool,
}

impl Metrics {
    pub fn from_counts(total: usize, analyzer_tp: usize, kept_tp: usize, kept_fp: usize) -> Self {
        let kept = kept_tp + kept_fp;
        let precision = ratio(kept_tp, kept);
        let baseline_precision = ratio(analyzer_tp, total);
        let delta_precision_pct = if baseline_precision > 0.0 {
            relative_delta_pct(precision, baseline_precision)
        } else {
            0.0
        };
        Metrics {
            total,
            analyzer_tp,
            kept,
            kept_tp,
            kept_fp,
            precision,
            baseline_precision,
            delta_precision_pct,
            recall: ratio(kept_tp, analyzer_tp),
            kept_empty: kept == 0,
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

/// `100 * (model - baseline) / baseline`.
pub fn relative_delta_pct(model_precision: f64, baseline_precision: f64) -> f64 {
    100.0 * (model_precision - baseline_precision) / baseline_precision
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub metrics: Metrics,
    pub per_repo: BTreeMap<String, Metrics>,
}

/// Metrics, or a pair of them when some warnings have no verdict.
///
/// Unresolved warnings are scored both ways (as kept and as dropped)
/// rather than silently assigned to either side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evaluation {
    Resolved(EvalReport),
    WithUnresolved {
        unresolved_ids: Vec<String>,
        unresolved_kept: EvalReport,
        unresolved_dropped: EvalReport,
    },
}

impl Evaluation {
    pub fn has_unresolved(&self) -> bool {
        matches!(self, Evaluation::WithUnresolved { .. })
    }

    /// The single report when everything resolved.
    pub fn resolved(&self) -> Option<&EvalReport> {
        match self {
            Evaluation::Resolved(r) => Some(r),
            Evaluation::WithUnresolved { .. } => None,
        }
    }
}

fn build_report<'a>(rows: impl Iterator<Item = (&'a Warning, bool, bool)>) -> EvalReport {
    #[derive(Default)]
    struct Acc {
        total: usize,
        tp: usize,
        kept_tp: usize,
        kept_fp: usize,
    }
    impl Acc {
        fn add(&mut self, is_tp: bool, kept: bool) {
            self.total += 1;
            self.tp += is_tp as usize;
            if kept {
                if is_tp {
                    self.kept_tp += 1;
                } else {
                    self.kept_fp += 1;
                }
            }
        }
        fn metrics(&self) -> Metrics {
            Metrics::from_counts(self.total, self.tp, self.kept_tp, self.kept_fp)
        }
    }

    let mut all = Acc::default();
    let mut repos: BTreeMap<String, Acc> = BTreeMap::new();
    for (w, is_tp, kept) in rows {
        all.add(is_tp, kept);
        repos.entry(w.repo.clone()).or_default().add(is_tp, kept);
    }
    EvalReport {
        metrics: all.metrics(),
        per_repo: repos.into_iter().map(|(k, v)| (k, v.metrics())).collect(),
    }
}

/// Scores verdicts against labels.
///
/// A warning counts as kept when its verdict is `Legitimate`. Labeled
/// warnings without a verdict, plus the ids in `unresolved`, make the
/// result [`Evaluation::WithUnresolved`].
pub fn compute_metrics(
    labeled: &[LabeledWarning],
    verdicts: &[Verdict],
    unresolved: &[String],
) -> Result<Evaluation, EvalError> {
    if let Some(l) = labeled.iter().find(|l| l.label == Label::Unlabeled) {
        return Err(EvalError::Unlabeled(l.warning.id.clone()));
    }
    let known: HashSet<&str> = labeled.iter().map(|l| l.warning.id.as_str()).collect();
    let mut kept: HashMap<&str, bool> = HashMap::new();
    for v in verdicts {
        if !known.contains(v.warning_id.as_str()) {
            return Err(EvalError::UnknownVerdict(v.warning_id.clone()));
        }
        if kept
            .insert(&v.warning_id, v.predicted == Prediction::Legitimate)
            .is_some()
        {
            return Err(EvalError::DuplicateVerdict(v.warning_id.clone()));
        }
    }

    let explicit: HashSet<&str> = unresolved.iter().map(String::as_str).collect();
    let mut unresolved_ids: Vec<String> = labeled
        .iter()
        .map(|l| l.warning.id.as_str())
        .filter(|id| explicit.contains(id) || !kept.contains_key(id))
        .map(str::to_string)
        .collect();
    unresolved_ids.sort();
    unresolved_ids.dedup();

    let report = |default: bool| {
        build_report(labeled.iter().map(|l| {
            let id = l.warning.id.as_str();
            let k = match kept.get(id) {
                Some(&k) if !explicit.contains(id) => k,
                _ => default,
            };
            (&l.warning, l.label == Label::TruePositive, k)
        }))
    };

    if unresolved_ids.is_empty() {
        return Ok(Evaluation::Resolved(report(true)));
    }
    Ok(Evaluation::WithUnresolved {
        unresolved_kept: report(true),
        unresolved_dropped: report(false),
        unresolved_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWarning {
    pub rank: usize,
    pub score: f64,
    pub warning: Warning,
}

/// Orders every warning by descending score, ties by ascending id.
pub fn rank_warnings(
    warnings: &[Warning],
    scores: &HashMap<String, f64>,
) -> Result<Vec<RankedWarning>, EvalError> {
    let mut scored = warnings
        .iter()
        .map(|w| match scores.get(&w.id) {
            None => Err(EvalError::MissingScore(w.id.clone())),
            Some(s) if s.is_nan() => Err(EvalError::NanScore(w.id.clone())),
            Some(&s) => Ok((s, w)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (score, w))| RankedWarning {
            rank: i + 1,
            score,
            warning: w.clone(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" | "markdown-table" => Ok(ReportFormat::Markdown),
            other => Err(EvalError::UnknownFormat(other.to_string())),
        }
    }
}

/// Rounds half away from zero at `decimals` places.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let f = 10f64.powi(decimals as i32);
    // nudge decimal ties that binary floating point stores just below .5
    let scaled = x * f;
    let nudged = scaled + scaled.signum() * 1e-9;
    nudged.round() / f
}

/// `0.72727` -> `72.7%`.
pub fn fmt_pct(fraction: f64) -> String {
    format!("{:.1}%", round_half_up(fraction * 100.0, 1))
}

/// `17.4690` -> `+17.47%`.
pub fn fmt_delta(pct: f64) -> String {
    let r = round_half_up(pct, 2);
    if r >= 0.0 {
        format!("+{r:.2}%")
    } else {
        format!("{r:.2}%")
    }
}

/// Table of approaches in the Approach / Precision / Δ Precision / Recall
/// layout; the first row is the unfiltered analyzer.
pub fn markdown_comparison(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = String::from("| Approach | Precision | Δ Precision | Recall |\n|---|---|---|---|\n");
    if let Some((_, first)) = rows.first() {
        let _ = writeln!(
            out,
            "| Baseline | {} | - | {} |",
            fmt_pct(first.metrics.baseline_precision),
            fmt_pct(1.0)
        );
    }
    for (name, r) in rows {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "| {name} | {} | {} | {} |",
            fmt_pct(m.precision),
            fmt_delta(m.delta_precision_pct),
            fmt_pct(m.recall)
        );
    }
    out
}

/// Per-repository breakdown with a total row.
pub fn markdown_repos(report: &EvalReport) -> String {
    let mut out = String::from(
        "| Repo | Total Warnings | True Positives | Precision | Kept | Kept TP | Filtered Precision | Recall |\n|---|---|---|---|---|---|---|---|\n",
    );
    let rows = report
        .per_repo
        .iter()
        .map(|(k, m)| (k.as_str(), m))
        .chain(std::iter::once(("**Total**", &report.metrics)));
    for (name, m) in rows {
        let _ = writeln!(
            out,
            "| {name} | {} | {} | {} | {} | {} | {} | {} |",
            m.total,
            m.analyzer_tp,
            fmt_pct(m.baseline_precision),
            m.kept,
            m.kept_tp,
            fmt_pct(m.precision),
            fmt_pct(m.recall)
        );
    }
    out
}

fn markdown_single(name: &str, report: &EvalReport) -> String {
    format!(
        "{}\n{}",
        markdown_comparison(&[(name, report)]),
        markdown_repos(report)
    )
}

const CSV_COLUMNS: [&str; 12] = [
    "variant",
    "scope",
    "total",
    "analyzer_tp",
    "kept",
    "kept_tp",
    "kept_fp",
    "precision",
    "baseline_precision",
    "delta_precision_pct",
    "recall",
    "kept_empty",
];

fn csv_rows(variant: &str, report: &EvalReport, out: &mut Vec<Vec<String>>) {
    let scopes = std::iter::once(("all", &report.metrics))
        .chain(report.per_repo.iter().map(|(k, m)| (k.as_str(), m)));
    for (scope, m) in scopes {
        out.push(vec![
            variant.to_string(),
            scope.to_string(),
            m.total.to_string(),
            m.analyzer_tp.to_string(),
            m.kept.to_string(),
            m.kept_tp.to_string(),
            m.kept_fp.to_string(),
            m.precision.to_string(),
            m.baseline_precision.to_string(),
            m.delta_precision_pct.to_string(),
            m.recall.to_string(),
            m.kept_empty.to_string(),
        ]);
    }
}

/// Serializes an evaluation. `approach` names the filtered row in the
/// markdown table.
pub fn emit_report(
    evaluation: &Evaluation,
    format: ReportFormat,
    approach: &str,
) -> Result<Vec<u8>, EvalError> {
    match format {
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(evaluation)
                .map_err(|e| EvalError::Serialize(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        ReportFormat::Csv => {
            let mut rows = Vec::new();
            match evaluation {
                Evaluation::Resolved(r) => csv_rows("resolved", r, &mut rows),
                Evaluation::WithUnresolved {
                    unresolved_kept,
                    unresolved_dropped,
                    ..
                } => {
                    csv_rows("unresolved_kept", unresolved_kept, &mut rows);
                    csv_rows("unresolved_dropped", unresolved_dropped, &mut rows);
                }
            }
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let ser = |e: csv::Error| EvalError::Serialize(e.to_string());
            w.write_record(CSV_COLUMNS).map_err(ser)?;
            for r in rows {
                w.write_record(r).map_err(ser)?;
            }
            w.into_inner().map_err(|e| EvalError::Serialize(e.to_string()))
        }
        ReportFormat::Markdown => Ok(match evaluation {
            Evaluation::Resolved(r) => markdown_single(approach, r),
            Evaluation::WithUnresolved {
                unresolved_ids,
                unresolved_kept,
                unresolved_dropped,
            } => format!(
                "{} warning(s) unresolved; metrics shown with them kept and dropped.\n\n### Unresolved kept\n\n{}\n### Unresolved dropped\n\n{}",
                unresolved_ids.len(),
                markdown_single(approach, unresolved_kept),
                markdown_single(approach, unresolved_dropped)
            ),
        }
        .into_bytes()),
    }
}
