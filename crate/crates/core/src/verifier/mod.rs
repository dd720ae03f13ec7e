//! Zero-shot warning verification with a line-completion model.
//!
//! For each warning the method prefix up to the flagged line is extended
//! with a handful of statement prefixes (`if (`, `assert `, `clo`, ...)
//! and sent to a [`CompletionBackend`]. A warning is judged legitimate
//! when some completion checks the target for null, or releases the leaked
//! resource: the model expects the developer to guard against exactly the
//! failure the analyzer reports.

pub mod backend;
pub mod prompts;
pub mod signals;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{
    replay_key, BackendError, Completion, CompletionBackend, CompletionRequest, CompletionResult, HttpBackend,
    HttpConfig, RecordingBackend, ReplayBackend,
};
pub use prompts::{build_input, build_prompts, PromptSet, PromptTemplates};
pub use signals::{detect_null_check_signal, detect_release_signal, CompletedLine};

use crate::context::ContextBundle;
use crate::features::NullCheckConfig;
use crate::ingest::{Warning, WarningKind};
use crate::par::Execution;
use signals::{NullCheckMatcher, ReleaseMatcher};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unsupported kind {0}")]
    UnsupportedKind(String),
    #[error("prompt config line {line}: {reason}")]
    PromptConfig { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no context bundle for warning {0}")]
    MissingBundle(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Legitimate,
    FalsePositive,
}

/// Why a verdict came out the way it did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    /// First completion that carried a signal, as zero-based indices.
    SignalHit { prompt: usize, beam: usize },
    NoSignal,
    /// The dereferenced value is a call result with no variable to check.
    ChainedFallback,
    /// Flipped to legitimate because another warning on the same variable was.
    GroupOr { leader: String },
    ClassifierScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub warning_id: String,
    pub predicted: Prediction,
    /// Legitimacy score in `[0, 1]`.
    pub score: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierConfig {
    pub templates: PromptTemplates,
    pub beam_size: usize,
    pub max_tokens: usize,
    pub null_checks: NullCheckConfig,
    pub consistency: bool,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            templates: PromptTemplates::default(),
            beam_size: 5,
            max_tokens: 64,
            null_checks: NullCheckConfig::default(),
            consistency: true,
        }
    }
}

enum Matcher {
    Null(NullCheckMatcher),
    Release(ReleaseMatcher),
}

impl Matcher {
    fn matches(&self, line: &CompletedLine) -> bool {
        match self {
            Matcher::Null(m) => m.matches(line),
            Matcher::Release(m) => m.matches(line),
        }
    }
}

/// Verifies one warning.
///
/// Null dereferences flagged as chained calls are kept without querying
/// the backend. Otherwise every prompt is completed with `beam_size` beams
/// and the score is the fraction of completions carrying a signal.
pub fn verify_warning(
    warning: &Warning,
    bundle: &ContextBundle,
    backend: &dyn CompletionBackend,
    config: &VerifierConfig,
) -> Result<Verdict, VerifyError> {
    let prompt_set = build_prompts(&warning.kind, &warning.facts, &config.templates)?;
    if warning.kind == WarningKind::NullDereference && bundle.is_chained_call {
        return Ok(Verdict {
            warning_id: warning.id.clone(),
            predicted: Prediction::Legitimate,
            score: 1.0,
            provenance: Provenance::ChainedFallback,
        });
    }
    let target = warning.target();
    let matcher = std::cell::OnceCell::new();
    let make_matcher = || match warning.kind {
        WarningKind::ResourceLeak => Matcher::Release(ReleaseMatcher::new(target)),
        _ => Matcher::Null(NullCheckMatcher::new(target, &config.null_checks)),
    };

    let beam = config.beam_size.max(1);
    let mut hits = 0usize;
    let mut first = None;
    for (pi, prompt) in prompt_set.prompts.iter().enumerate() {
        let request = CompletionRequest {
            context: build_input(bundle, prompt),
            prompt: prompt.clone(),
            beam_size: beam,
            max_tokens: config.max_tokens,
        };
        let result = backend.complete(&request)?;
        for (bi, c) in result.texts.iter().take(beam).enumerate() {
            let line = CompletedLine::new(prompt.as_str(), c.text.as_str());
            if matcher.get_or_init(make_matcher).matches(&line) {
                hits += 1;
                first.get_or_insert((pi, bi));
            }
        }
    }
    let total = prompt_set.prompts.len() * beam;
    let score = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
    Ok(match first {
        Some((prompt, beam)) => Verdict {
            warning_id: warning.id.clone(),
            predicted: Prediction::Legitimate,
            score,
            provenance: Provenance::SignalHit { prompt, beam },
        },
        None => Verdict {
            warning_id: warning.id.clone(),
            predicted: Prediction::FalsePositive,
            score,
            provenance: Provenance::NoSignal,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unresolved {
    pub warning_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOutcome {
    /// Sorted by warning id.
    pub verdicts: Vec<Verdict>,
    /// Sorted by warning id.
    pub unresolved: Vec<Unresolved>,
}

/// Verifies every warning; each ends up in exactly one of the verdicts or
/// the unresolved list. Consistency grouping runs afterwards when enabled.
pub fn verify_all(
    warnings: &[Warning],
    bundles: &HashMap<String, ContextBundle>,
    backend: &dyn CompletionBackend,
    config: &VerifierConfig,
    exec: Execution,
) -> VerifyOutcome {
    let results = exec.map(warnings, |w| {
        bundles
            .get(&w.id)
            .ok_or_else(|| VerifyError::MissingBundle(w.id.clone()))
            .and_then(|b| verify_warning(w, b, backend, config))
    });
    let mut out = VerifyOutcome::default();
    for (w, r) in warnings.iter().zip(results) {
        match r {
            Ok(v) => out.verdicts.push(v),
            Err(e) => out.unresolved.push(Unresolved {
                warning_id: w.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if config.consistency {
        out.verdicts = apply_consistency_groups(&out.verdicts, warnings);
    }
    out.verdicts.sort_by(|a, b| a.warning_id.cmp(&b.warning_id));
    out.unresolved.sort_by(|a, b| a.warning_id.cmp(&b.warning_id));
    out
}

/// Logical OR over warnings sharing a repository and target variable.
///
/// Members flipped to legitimate take the leader's score and a `GroupOr`
/// provenance; the leader is the lowest-id legitimate member. Warnings
/// without a target are never grouped.
pub fn apply_consistency_groups(verdicts: &[Verdict], warnings: &[Warning]) -> Vec<Verdict> {
    let by_id: HashMap<&str, &Warning> = warnings.iter().map(|w| (w.id.as_str(), w)).collect();
    let group_of = |v: &Verdict| {
        by_id
            .get(v.warning_id.as_str())
            .and_then(|w| w.target().map(|t| (w.repo.as_str(), t)))
    };
    let mut leaders: BTreeMap<(&str, &str), &Verdict> = BTreeMap::new();
    for v in verdicts.iter().filter(|v| v.predicted == Prediction::Legitimate) {
        if let Some(key) = group_of(v) {
            leaders
                .entry(key)
                .and_modify(|cur| {
                    if v.warning_id < cur.warning_id {
                        *cur = v;
                    }
                })
                .or_insert(v);
        }
    }
    verdicts
        .iter()
        .map(|v| match group_of(v).and_then(|k| leaders.get(&k)) {
            Some(leader) if v.predicted == Prediction::FalsePositive => Verdict {
                warning_id: v.warning_id.clone(),
                predicted: Prediction::Legitimate,
                score: leader.score,
                provenance: Provenance::GroupOr {
                    leader: leader.warning_id.clone(),
                },
            },
            _ => v.clone(),
        })
        .collect()
}
