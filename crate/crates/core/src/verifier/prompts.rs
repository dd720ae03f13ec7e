//! Prompt templates and model input construction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::context::ContextBundle;
use crate::ingest::{QualifierFacts, WarningKind};

pub const PLACEHOLDER: &str = "<v>";

pub const DEFAULT_NULL_DEREF_PROMPTS: [&str; 7] = [
    "if (",
    "if (<v> == null",
    "if (null == ",
    "assert ",
    "Objects.requireNonNull(",
    "Preconditions.checkNotNull(",
    "Debug.Assert(",
];

pub const DEFAULT_RESOURCE_LEAK_PROMPTS: [&str; 3] = ["clo", "rel", "<v>."];

/// Prompt templates per verifiable kind. `<v>` stands for the target
/// variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub null_dereference: Vec<String>,
    pub resource_leak: Vec<String>,
}

fn owned(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            null_dereference: owned(&DEFAULT_NULL_DEREF_PROMPTS),
            resource_leak: owned(&DEFAULT_RESOURCE_LEAK_PROMPTS),
        }
    }
}

impl PromptTemplates {
    /// Parses a prompt file: one prompt per line, `#` comments and blank
    /// lines skipped. Lines before any `[NULL_DEREFERENCE]` or
    /// `[RESOURCE_LEAK]` header apply to both kinds; a kind without any
    /// lines keeps its default list.
    pub fn from_text(text: &str) -> Result<Self, VerifyError> {
        enum Section {
            Both,
            Null,
            Leak,
        }
        let mut section = Section::Both;
        let mut null = Vec::new();
        let mut leak = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.starts_with('[') && trimmed.ends_with(']') {
                section = match &trimmed[1..trimmed.len() - 1] {
                    "NULL_DEREFERENCE" => Section::Null,
                    "RESOURCE_LEAK" => Section::Leak,
                    other => {
                        return Err(VerifyError::PromptConfig {
                            line: i + 1,
                            reason: format!("unknown section `{other}`"),
                        })
                    }
                };
                continue;
            }
            // leading whitespace is meaningless since prompts are re-indented
            let prompt = line.trim_start().to_string();
            match section {
                Section::Both => {
                    null.push(prompt.clone());
                    leak.push(prompt);
                }
                Section::Null => null.push(prompt),
                Section::Leak => leak.push(prompt),
            }
        }
        let defaults = PromptTemplates::default();
        Ok(PromptTemplates {
            null_dereference: if null.is_empty() { defaults.null_dereference } else { null },
            resource_leak: if leak.is_empty() { defaults.resource_leak } else { leak },
        })
    }

    pub fn load(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path).map_err(|e| VerifyError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_text(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSet {
    pub kind: WarningKind,
    pub prompts: Vec<String>,
}

/// Instantiates templates for one warning.
///
/// With a target, `<v>` is substituted. Without one, a template is cut
/// at its placeholder (`if (<v> == null` becomes `if (`), prompts that
/// become empty are dropped, and duplicates are kept so the request count
/// stays fixed per template list.
pub fn build_prompts(
    kind: &WarningKind,
    facts: &QualifierFacts,
    templates: &PromptTemplates,
) -> Result<PromptSet, VerifyError> {
    let list = match kind {
        WarningKind::NullDereference => &templates.null_dereference,
        WarningKind::ResourceLeak => &templates.resource_leak,
        WarningKind::Other(tag) => return Err(VerifyError::UnsupportedKind(tag.clone())),
    };
    let target = facts.target_variable.as_deref();
    let prompts = list
        .iter()
        .filter_map(|t| match target {
            Some(v) => Some(t.replace(PLACEHOLDER, v)),
            None => {
                let cut = t.find(PLACEHOLDER).map_or(t.as_str(), |i| &t[..i]);
                (!cut.is_empty()).then(|| cut.to_string())
            }
        })
        .collect();
    Ok(PromptSet {
        kind: kind.clone(),
        prompts,
    })
}

/// Indentation for the prompt line: that of the last non-blank context
/// line, one level deeper if the line opens a block.
fn prompt_indent(local: &str) -> String {
    let Some(last) = local.lines().rev().find(|l| !l.trim().is_empty()) else {
        return String::new();
    };
    let mut indent: String = last.chars().take_while(|c| c.is_whitespace()).collect();
    if last.trim_end().ends_with('{') {
        indent.push_str(if indent.contains('\t') { "\t" } else { "    " });
    }
    indent
}

/// Model input: non-local method bodies separated by blank lines, a blank
/// line, the local context, then the prompt on its own unterminated line.
pub fn build_input(bundle: &ContextBundle, prompt: &str) -> String {
    let mut out = String::new();
    for (i, span) in bundle.nonlocal_contexts.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(span.body.trim_end_matches('\n'));
    }
    if !out.is_empty() {
        out.push_str("\n\n");
    }
    let local = bundle.local_context.trim_end_matches('\n');
    if !local.is_empty() {
        out.push_str(local);
        out.push('\n');
    }
    out.push_str(&prompt_indent(local));
    out.push_str(prompt);
    out
}
