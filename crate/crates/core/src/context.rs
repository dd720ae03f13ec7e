//! Local and non-local context recovery.
//!
//! Local context is the enclosing method from its signature line up to
//! the line before the warning. Non-local context is the body of the
//! immediate callee the suspect value comes from, found by name across
//! the source tree.

use std::borrow::Cow;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Warning;
use crate::lexer::{self, Scan};
use crate::par::Execution;

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("line {line} is outside {file} ({lines} lines)")]
    LineOutOfRange { file: String, line: u32, lines: usize },
    #[error("deref line {line} is outside method `{method}` ({start}..={end})")]
    OutsideSpan {
        method: String,
        line: u32,
        start: u32,
        end: u32,
    },
    #[error("source file {} not found: {source}", path.display())]
    MissingFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot scan source root {}: {message}", root.display())]
    Root { root: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpan {
    pub file: String,
    pub name: String,
    pub start_line: u32,
    pub end_line: u32,
    /// Verbatim source lines `start_line..=end_line`.
    pub body: String,
    /// Braces in the file did not balance, or no method enclosed the line.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBundle {
    pub warning_id: String,
    pub local_context: String,
    pub nonlocal_contexts: Vec<MethodSpan>,
    pub is_chained_call: bool,
    pub target_in_local: bool,
}

/// The local context together with the file line it starts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalContext {
    pub start_line: u32,
    pub text: String,
}

impl LocalContext {
    fn line(&self, line: u32) -> Option<&str> {
        let offset = line.checked_sub(self.start_line)? as usize;
        self.text.split('\n').nth(offset).filter(|_| !self.text.is_empty())
    }
}

fn slice_lines(text: &str, start: usize, end: usize) -> String {
    text.split('\n')
        .skip(start - 1)
        .take(end + 1 - start)
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect::<Vec<_>>()
        .join("\n")
}

fn span_from_scan(file: &str, text: &str, scan: &Scan, method: &lexer::MethodDef) -> MethodSpan {
    let start = scan.method_start_line(method);
    let end = scan.block_end_line(method.block);
    MethodSpan {
        file: file.to_string(),
        name: method.name.clone(),
        start_line: start as u32,
        end_line: end as u32,
        body: slice_lines(text, start, end),
        degraded: scan.unbalanced || scan.blocks[method.block].close.is_none(),
    }
}

fn enclosing_in_scan(file: &str, text: &str, scan: &Scan, line: u32) -> MethodSpan {
    let line_us = line as usize;
    let innermost_method = scan
        .methods
        .iter()
        .filter(|m| {
            scan.method_start_line(m) <= line_us && line_us <= scan.block_end_line(m.block)
        })
        .max_by_key(|m| m.name_offset);
    if let Some(m) = innermost_method {
        return span_from_scan(file, text, scan, m);
    }

    let innermost_block = (0..scan.blocks.len())
        .filter(|&b| scan.block_contains_line(b, line_us))
        .max_by_key(|&b| scan.depth(b));
    let (start, end) = match innermost_block {
        Some(b) => (scan.line_of(scan.blocks[b].open), scan.block_end_line(b)),
        None => (1, scan.line_count()),
    };
    MethodSpan {
        file: file.to_string(),
        name: String::new(),
        start_line: start as u32,
        end_line: end as u32,
        body: slice_lines(text, start, end),
        degraded: true,
    }
}

/// Innermost method whose signature-to-closing-brace range contains `line`.
///
/// Falls back to the innermost braced block (or the whole file) with the
/// span marked degraded.
pub fn locate_enclosing_method(file: &str, file_text: &str, line: u32) -> Result<MethodSpan, ContextError> {
    let scan = Scan::new(file_text);
    check_line(file, &scan, line)?;
    Ok(enclosing_in_scan(file, file_text, &scan, line))
}

fn check_line(file: &str, scan: &Scan, line: u32) -> Result<(), ContextError> {
    if line == 0 || line as usize > scan.line_count() {
        return Err(ContextError::LineOutOfRange {
            file: file.to_string(),
            line,
            lines: scan.line_count(),
        });
    }
    Ok(())
}

/// Lines `span.start_line ..= deref_line - 1`, newline-joined.
pub fn extract_local_context(span: &MethodSpan, deref_line: u32) -> Result<String, ContextError> {
    if deref_line < span.start_line || deref_line > span.end_line {
        return Err(ContextError::OutsideSpan {
            method: span.name.clone(),
            line: deref_line,
            start: span.start_line,
            end: span.end_line,
        });
    }
    let take = (deref_line - span.start_line) as usize;
    Ok(span
        .body
        .split('\n')
        .take(take)
        .collect::<Vec<_>>()
        .join("\n"))
}

struct SourceFile {
    rel_path: String,
    text: String,
    scan: Scan,
}

/// Scanned view of a source tree, used for callee lookup.
///
/// Files are held in lexicographic path order so that lookups are
/// independent of directory traversal and thread scheduling.
pub struct SourceIndex {
    root: PathBuf,
    files: Vec<SourceFile>,
    by_path: HashMap<String, usize>,
    /// Method name -> (file index, method index), in path then offset order.
    definitions: HashMap<String, Vec<(usize, usize)>>,
    pub diagnostics: Vec<String>,
}

pub const DEFAULT_EXTENSIONS: &[&str] = &["java"];

fn rel_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn parent_dir(rel: &str) -> &str {
    rel.rfind('/').map_or("", |i| &rel[..i])
}

impl SourceIndex {
    pub fn build(root: &Path, extensions: &[&str], exec: Execution) -> Result<Self, ContextError> {
        if !root.is_dir() {
            return Err(ContextError::Root {
                root: root.to_path_buf(),
                message: "not a directory".into(),
            });
        }
        let mut diagnostics = Vec::new();
        let mut paths = Vec::new();
        for entry in walkdir::WalkDir::new(root).follow_links(true) {
            match entry {
                Ok(e) if e.file_type().is_file() => {
                    let ext = e.path().extension().and_then(|x| x.to_str()).unwrap_or("");
                    if extensions.contains(&ext) {
                        paths.push(e.into_path());
                    }
                }
                Ok(_) => {}
                Err(err) => diagnostics.push(format!("skipped: {err}")),
            }
        }
        let mut rel: Vec<(String, PathBuf)> = paths
            .into_iter()
            .map(|p| (rel_string(p.strip_prefix(root).unwrap_or(&p)), p))
            .collect();
        rel.sort();

        let loaded = exec.map(&rel, |(rel_path, path)| match std::fs::read(path) {
            Ok(bytes) => {
                let text = String::from_utf8_lossy(&bytes).into_owned();
                let scan = Scan::new(&text);
                Ok(SourceFile {
                    rel_path: rel_path.clone(),
                    text,
                    scan,
                })
            }
            Err(err) => Err(format!("skipped {rel_path}: {err}")),
        });

        let mut files = Vec::new();
        for item in loaded {
            match item {
                Ok(f) => files.push(f),
                Err(msg) => diagnostics.push(msg),
            }
        }
        let by_path = files
            .iter()
            .enumerate()
            .map(|(i, f)| (f.rel_path.clone(), i))
            .collect();
        let mut definitions: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
        for (fi, f) in files.iter().enumerate() {
            for (mi, m) in f.scan.methods.iter().enumerate() {
                definitions.entry(m.name.clone()).or_default().push((fi, mi));
            }
        }
        Ok(SourceIndex {
            root: root.to_path_buf(),
            files,
            by_path,
            definitions,
            diagnostics,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    /// Indexed `(relative path, text)` pairs in path order.
    pub fn files(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files.iter().map(|f| (f.rel_path.as_str(), f.text.as_str()))
    }

    /// Text of a repo-relative file, from the index or read from disk for
    /// extensions the index does not scan.
    pub fn file_text(&self, rel: &str) -> Result<Cow<'_, str>, ContextError> {
        if let Some(&i) = self.by_path.get(rel) {
            return Ok(Cow::Borrowed(&self.files[i].text));
        }
        let path = self.root.join(rel);
        std::fs::read(&path)
            .map(|b| Cow::Owned(String::from_utf8_lossy(&b).into_owned()))
            .map_err(|source| ContextError::MissingFile { path, source })
    }

    /// Definition of `name`, preferring the same file, then the same
    /// directory, then the first in path order.
    pub fn find_method(&self, name: &str, from_file: &str) -> Option<MethodSpan> {
        let defs = self.definitions.get(name)?;
        let dir = parent_dir(from_file);
        let pick = defs
            .iter()
            .find(|(fi, _)| self.files[*fi].rel_path == from_file)
            .or_else(|| {
                defs.iter()
                    .find(|(fi, _)| parent_dir(&self.files[*fi].rel_path) == dir)
            })
            .or_else(|| defs.first())?;
        let f = &self.files[pick.0];
        Some(span_from_scan(&f.rel_path, &f.text, &f.scan, &f.scan.methods[pick.1]))
    }

    fn enclosing(&self, rel: &str, text: &str, line: u32) -> Result<MethodSpan, ContextError> {
        match self.by_path.get(rel) {
            Some(&i) => {
                let f = &self.files[i];
                check_line(rel, &f.scan, line)?;
                Ok(enclosing_in_scan(rel, text, &f.scan, line))
            }
            None => locate_enclosing_method(rel, text, line),
        }
    }
}

/// The statement starting at `line`: that line plus following lines until
/// a `;` closes it (bounded).
fn statement_from(lines: &[&str]) -> String {
    let mut out = String::new();
    for l in lines.iter().take(8) {
        out.push_str(l);
        out.push('\n');
        if lexer::mask_non_code(&out).contains(';') {
            break;
        }
    }
    out
}

/// Name of the outermost method call on the right-hand side of an
/// assignment to `target` in `statement`.
pub fn assignment_origin(statement: &str, target: Option<&str>) -> Option<String> {
    let masked = lexer::mask_non_code(statement);
    let bytes = masked.as_bytes();
    let eq = target
        .and_then(|t| {
            let re = Regex::new(&format!(r"(?:^|[^\w$.]){}\s*=", regex::escape(t))).ok()?;
            let pos = re
                .find_iter(&masked)
                .map(|m| m.end() - 1)
                .find(|&i| bytes.get(i + 1) != Some(&b'='));
            pos
        })
        .or_else(|| {
            (0..bytes.len()).find(|&i| {
                bytes[i] == b'='
                    && bytes.get(i + 1) != Some(&b'=')
                    && (i == 0 || !b"=!<>+-*/%&|^".contains(&bytes[i - 1]))
            })
        })?;

    let rhs_end = masked[eq..].find(';').map_or(masked.len(), |p| eq + p);
    let mut depth = 0usize;
    let mut last = None;
    for (i, &byte) in bytes.iter().enumerate().take(rhs_end).skip(eq + 1) {
        match byte {
            b'(' => {
                if depth == 0 {
                    if let Some(name) = call_name_before(&masked, i) {
                        last = Some(name);
                    }
                }
                depth += 1;
            }
            b')' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    last
}

fn call_name_before(masked: &str, paren: usize) -> Option<String> {
    let bytes = masked.as_bytes();
    let mut e = paren;
    while e > 0 && bytes[e - 1].is_ascii_whitespace() {
        e -= 1;
    }
    let mut b = e;
    while b > 0 && (bytes[b - 1].is_ascii_alphanumeric() || bytes[b - 1] == b'_' || bytes[b - 1] == b'$') {
        b -= 1;
    }
    if b == e || bytes[b].is_ascii_digit() {
        return None;
    }
    let name = &masked[b..e];
    if matches!(name, "if" | "while" | "for" | "switch" | "return" | "new") {
        return None;
    }
    let before = masked[..b].trim_end();
    if before.ends_with("new") && !before[..before.len() - 3].ends_with(|c: char| c.is_alphanumeric() || c == '_') {
        return None;
    }
    Some(name.to_string())
}

/// Immediate callee bodies that may produce the suspect value.
///
/// Tries the callee named by the qualifier first, then the method invoked
/// on the right-hand side of the target's assignment. At most one span is
/// returned; library and interface calls resolve to nothing.
pub fn resolve_nonlocal(warning: &Warning, local: &LocalContext, index: &SourceIndex) -> Vec<MethodSpan> {
    let facts = &warning.facts;
    if let Some(callee) = &facts.callee_name {
        if let Some(span) = index.find_method(callee, &warning.file) {
            return vec![span];
        }
    }
    let Some(assigned) = facts.assigned_line else {
        return Vec::new();
    };

    let statement = match local.line(assigned) {
        Some(_) => {
            let lines: Vec<&str> = local.text.split('\n').collect();
            statement_from(&lines[(assigned - local.start_line) as usize..])
        }
        None => match index.file_text(&warning.file) {
            Ok(text) => {
                let lines: Vec<&str> = text.split('\n').collect();
                match lines.get(assigned as usize - 1..) {
                    Some(rest) => statement_from(rest),
                    None => return Vec::new(),
                }
            }
            Err(_) => return Vec::new(),
        },
    };

    assignment_origin(&statement, facts.target_variable.as_deref())
        .and_then(|name| index.find_method(&name, &warning.file))
        .into_iter()
        .collect()
}

static DEREF_BY_CALL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"dereferenced by call").unwrap());

fn assigns(local: &str, target: &str) -> bool {
    let masked = lexer::mask_non_code(local);
    let Ok(re) = Regex::new(&format!(r"(?:^|[^\w$]){}\s*=([^=]|$)", regex::escape(target))) else {
        return false;
    };
    re.is_match(&masked)
}

/// Whether the suspect value has no variable the completion model could
/// be prompted about (e.g. `a.b().c()` failing mid-chain).
pub fn detect_chained_call(warning: &Warning, local: &str) -> bool {
    let facts = &warning.facts;
    let Some(target) = facts.target_variable.as_deref() else {
        return true;
    };
    if !facts.has_variable_reference {
        return true;
    }
    DEREF_BY_CALL.is_match(&warning.qualifier)
        && facts.assigned_line.is_none()
        && !assigns(local, target)
}

pub fn build_bundle(warning: &Warning, index: &SourceIndex) -> Result<ContextBundle, ContextError> {
    let text = index.file_text(&warning.file)?;
    let deref = warning.facts.deref_line;
    let span = index.enclosing(&warning.file, &text, deref)?;
    let local_text = extract_local_context(&span, deref)?;
    let local = LocalContext {
        start_line: span.start_line,
        text: local_text,
    };
    let nonlocal_contexts = resolve_nonlocal(warning, &local, index);
    let is_chained_call = detect_chained_call(warning, &local.text);
    let target_in_local = warning
        .target()
        .is_some_and(|t| lexer::contains_token(&local.text, t));
    Ok(ContextBundle {
        warning_id: warning.id.clone(),
        local_context: local.text,
        nonlocal_contexts,
        is_chained_call,
        target_in_local,
    })
}

/// Builds bundles for many warnings; results are in input order.
pub fn build_bundles(
    warnings: &[Warning],
    index: &SourceIndex,
    exec: Execution,
) -> Vec<Result<ContextBundle, ContextError>> {
    exec.map(warnings, |w| build_bundle(w, index))
}
