//! Lexical detectors for null checks and resource releases in completed
//! lines. Generated code is never parsed; a loose textual match counts.

use regex::Regex;

use crate::features::NullCheckConfig;

/// A prompt followed by one model completion of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletedLine {
    pub prompt: String,
    pub text: String,
}

impl CompletedLine {
    pub fn new(prompt: impl Into<String>, text: impl Into<String>) -> Self {
        CompletedLine {
            prompt: prompt.into(),
            text: text.into(),
        }
    }

    pub fn full(&self) -> String {
        format!("{}{}", self.prompt, self.text)
    }
}

const IDENT_PATH: &str = r"[A-Za-z_$][\w$]*(?:\s*\.\s*[A-Za-z_$][\w$]*)*";

/// Compiled null-check matcher for one target.
pub struct NullCheckMatcher {
    comparison: Regex,
    call: Option<Regex>,
}

impl NullCheckMatcher {
    pub fn new(target: Option<&str>, null_checks: &NullCheckConfig) -> Self {
        let subject = match target {
            Some(t) => format!(r"(?:^|[^\w$.]){}", regex::escape(t)),
            None => format!(r"(?:^|[^\w$.]){IDENT_PATH}"),
        };
        let subject_after = match target {
            Some(t) => format!(r"{}(?:[^\w$.]|$)", regex::escape(t)),
            None => IDENT_PATH.to_string(),
        };
        let comparison = Regex::new(&format!(
            r"{subject}\s*[!=]=\s*null\b|\bnull\s*[!=]=\s*{subject_after}"
        ))
        .expect("null comparison pattern");
        let call = match target {
            Some(t) => null_checks.call_pattern(Some(t)),
            None => null_checks
                .call_pattern(None)
                .and_then(|re| Regex::new(&format!(r"{}\s*[^\s)]", re.as_str())).ok()),
        };
        NullCheckMatcher { comparison, call }
    }

    pub fn matches(&self, line: &CompletedLine) -> bool {
        let full = line.full();
        self.comparison.is_match(&full) || self.call.as_ref().is_some_and(|re| re.is_match(&full))
    }
}

/// Compiled release matcher for one target.
pub struct ReleaseMatcher {
    target: Option<String>,
    pattern: Regex,
}

impl ReleaseMatcher {
    pub fn new(target: Option<&str>) -> Self {
        let pattern = match target {
            Some(t) => format!(r"(?:^|[^\w$.]){}\s*\.\s*(?:close|release)\s*\(", regex::escape(t)),
            None => r"(?:^|[^\w$])(?:close|release)\s*\(".to_string(),
        };
        ReleaseMatcher {
            target: target.map(str::to_string),
            pattern: Regex::new(&pattern).expect("release pattern"),
        }
    }

    /// Reconstructs the statement a completion would produce. A prompt that
    /// starts a bare identifier (`clo`) is read as a member call on the
    /// target, so `clo` + `se();` becomes `f.close();`.
    fn reconstruct(&self, line: &CompletedLine) -> String {
        let full = line.full();
        match &self.target {
            Some(t)
                if !line.prompt.is_empty()
                    && line.prompt.chars().all(|c| c.is_alphanumeric() || c == '_') =>
            {
                format!("{t}.{full}")
            }
            _ => full,
        }
    }

    pub fn matches(&self, line: &CompletedLine) -> bool {
        let text = self.reconstruct(line);
        self.pattern.is_match(&text)
    }
}

/// Any line compares the target (or any identifier) with `null`, or hands
/// it to a configured null-check method.
pub fn detect_null_check_signal(lines: &[CompletedLine], target: Option<&str>, null_checks: &NullCheckConfig) -> bool {
    let m = NullCheckMatcher::new(target, null_checks);
    lines.iter().any(|l| m.matches(l))
}

/// Any line calls `close(` or `release(` on the target, or bare when there
/// is no target.
pub fn detect_release_signal(lines: &[CompletedLine], target: Option<&str>) -> bool {
    let m = ReleaseMatcher::new(target);
    lines.iter().any(|l| m.matches(l))
}
