//! Post-processing for static-analyzer warnings.
//!
//! The crate consumes Infer-style `report.json` files and decides, per
//! warning, whether the finding is likely legitimate. Two routes are
//! provided:
//!
//! - a feature-based logistic classifier over four handcrafted code
//!   predicates ([`features`], [`classifier`]);
//! - a zero-shot verifier that prompts a line-completion model and looks
//!   for null checks or resource releases in its suggestions ([`verifier`]).
//!
//! [`evaluation`] scores either route against labeled warnings, and
//! [`context`] recovers the method bodies both routes read.
//!
//! Per-warning work is data-parallel. With the default `parallel` feature
//! it runs on rayon; without it every [`par::Execution`] degrades to a
//! sequential loop with identical output.

pub mod classifier;
pub mod context;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod lexer;
pub mod par;
pub mod verifier;

pub use classifier::{Hyperparams, LegitimacyScorer, LinearModel};
pub use context::{ContextBundle, MethodSpan, SourceIndex};
pub use evaluation::{EvalReport, Evaluation, Metrics};
pub use features::{FeatureVector, NullCheckConfig};
pub use ingest::{Label, LabeledWarning, QualifierFacts, Warning, WarningKind};
pub use verifier::{Prediction, Provenance, Verdict};
