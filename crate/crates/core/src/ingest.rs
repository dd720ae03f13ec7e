//! Analyzer report ingestion.
//!
//! Reads Infer-style `report.json` arrays into [`Warning`]s, parses the
//! free-text qualifier into [`QualifierFacts`], assigns content-hashed ids
//! and joins expert labels from an `id,label` CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at byte offset {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("report is not a JSON array")]
    NotArray,
    #[error("report entry {index}: {reason}")]
    Entry { index: usize, reason: String },
    #[error("labels row {row}: {reason}")]
    LabelRow { row: usize, reason: String },
    #[error("conflicting labels for warning id {id}")]
    ConflictingLabel { id: String },
}

/// Bug category reported by the analyzer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WarningKind {
    NullDereference,
    ResourceLeak,
    Other(String),
}

impl WarningKind {
    pub fn from_bug_type(bug_type: &str) -> Self {
        match bug_type {
            "NULL_DEREFERENCE" => WarningKind::NullDereference,
            "RESOURCE_LEAK" => WarningKind::ResourceLeak,
            other => WarningKind::Other(other.to_string()),
        }
    }

    /// The analyzer's `bug_type` string.
    pub fn tag(&self) -> &str {
        match self {
            WarningKind::NullDereference => "NULL_DEREFERENCE",
            WarningKind::ResourceLeak => "RESOURCE_LEAK",
            WarningKind::Other(tag) => tag,
        }
    }

    /// Whether the completion verifier has prompts and a signal for this kind.
    pub fn is_verifiable(&self) -> bool {
        !matches!(self, WarningKind::Other(_))
    }
}

impl fmt::Display for WarningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for WarningKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for WarningKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let tag = String::deserialize(deserializer)?;
        Ok(WarningKind::from_bug_type(&tag))
    }
}

/// Structured facts recovered from a qualifier message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualifierFacts {
    pub target_variable: Option<String>,
    pub assigned_line: Option<u32>,
    pub deref_line: u32,
    pub callee_name: Option<String>,
    pub has_variable_reference: bool,
    /// Set when the message did not fit the known grammar and some facts
    /// were filled from fallbacks.
    #[serde(default)]
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub id: String,
    pub kind: WarningKind,
    pub file: String,
    pub line: u32,
    pub column: Option<i64>,
    pub procedure: String,
    pub qualifier: String,
    pub facts: QualifierFacts,
    pub repo: String,
}

impl Warning {
    /// Builds a warning, parsing the qualifier and deriving the id.
    pub fn new(
        kind: WarningKind,
        file: impl Into<String>,
        line: u32,
        column: Option<i64>,
        procedure: impl Into<String>,
        qualifier: impl Into<String>,
        repo: impl Into<String>,
    ) -> Self {
        let file = file.into();
        let qualifier = qualifier.into();
        let facts = parse_qualifier(&kind, &qualifier, line);
        let id = warning_id(&file, line, kind.tag(), &qualifier);
        Warning {
            id,
            kind,
            file,
            line,
            column,
            procedure: procedure.into(),
            qualifier,
            facts,
            repo: repo.into(),
        }
    }

    pub fn target(&self) -> Option<&str> {
        self.facts.target_variable.as_deref()
    }
}

/// Expert judgement on a warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "TP")]
    TruePositive,
    #[serde(rename = "FP")]
    FalsePositive,
    #[serde(rename = "")]
    Unlabeled,
}

impl Label {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "TP" | "tp" => Some(Label::TruePositive),
            "FP" | "fp" => Some(Label::FalsePositive),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::TruePositive => "TP",
            Label::FalsePositive => "FP",
            Label::Unlabeled => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledWarning {
    pub warning: Warning,
    pub label: Label,
}

/// SHA-256 over `file:line:kind:qualifier`, first 16 hex chars.
pub fn warning_id(file: &str, line: u32, kind_tag: &str, qualifier: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(file.as_bytes());
    hasher.update(b":");
    hasher.update(line.to_string().as_bytes());
    hasher.update(b":");
    hasher.update(kind_tag.as_bytes());
    hasher.update(b":");
    hasher.update(qualifier.as_bytes());
    let mut hex = hex::encode(hasher.finalize());
    hex.truncate(16);
    hex
}

static QUOTED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[`']([^`'\n]+)[`']").unwrap());
static IDENT_PATH: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*$").unwrap());
static ASSIGNED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"last assigned on line (\d+)").unwrap());
static AT_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\bat line (\d+)").unwrap());
static AFTER_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\bafter line (\d+)").unwrap());
static BY_CALL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"by call to [`']([A-Za-z_$][\w$]*)\s*\(").unwrap());

// Quoted tokens introduced by these phrases name a type or a call, not a
// variable holding the suspect value.
const NON_VARIABLE_LEADS: [&str; 3] = ["call to", "returned by", "of type"];

/// Extracts target variable and line facts from a qualifier message.
///
/// `fallback_line` is the warning's own line; it becomes the deref line
/// when the message carries none.
pub fn parse_qualifier(kind: &WarningKind, qualifier: &str, fallback_line: u32) -> QualifierFacts {
    let last_line = |re: &Regex| {
        re.captures_iter(qualifier)
            .filter_map(|c| c[1].parse::<u32>().ok())
            .last()
    };

    let deref = match kind {
        WarningKind::ResourceLeak => last_line(&AFTER_LINE).or_else(|| last_line(&AT_LINE)),
        _ => last_line(&AT_LINE),
    }
    .filter(|&l| l >= 1);

    let Some(deref_line) = deref else {
        return QualifierFacts {
            target_variable: None,
            assigned_line: None,
            deref_line: fallback_line.max(1),
            callee_name: None,
            has_variable_reference: false,
            degraded: true,
        };
    };

    let target_variable = find_target(qualifier);
    let mut degraded = deref_line != fallback_line;
    let mut assigned_line = ASSIGNED
        .captures(qualifier)
        .and_then(|c| c[1].parse::<u32>().ok());
    if assigned_line.is_some_and(|a| a > deref_line || a == 0) {
        assigned_line = None;
        degraded = true;
    }
    let callee_name = BY_CALL
        .captures_iter(qualifier)
        .map(|c| c[1].to_string())
        .find(|name| name != "new");

    QualifierFacts {
        has_variable_reference: target_variable.is_some(),
        target_variable,
        assigned_line,
        deref_line,
        callee_name,
        degraded,
    }
}

fn find_target(qualifier: &str) -> Option<String> {
    for cap in QUOTED.captures_iter(qualifier) {
        let whole = cap.get(0).unwrap();
        let lead = qualifier[..whole.start()].trim_end();
        if NON_VARIABLE_LEADS.iter().any(|p| lead.ends_with(p)) {
            continue;
        }
        let token = cap.get(1).unwrap().as_str().trim();
        if IDENT_PATH.is_match(token) {
            let token = token.strip_prefix("this.").unwrap_or(token);
            return Some(token.to_string());
        }
    }
    None
}

fn json_byte_offset(text: &[u8], line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (idx, segment) in text.split(|&b| b == b'\n').enumerate() {
        if idx + 1 == line {
            return offset + column.saturating_sub(1).min(segment.len());
        }
        offset += segment.len() + 1;
    }
    text.len()
}

/// Parses report bytes. Any malformed entry aborts the whole load.
pub fn parse_report(bytes: &[u8], repo: &str) -> Result<Vec<Warning>, IngestError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| IngestError::Json {
        offset: json_byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let Value::Array(entries) = value else {
        return Err(IngestError::NotArray);
    };

    entries
        .iter()
        .enumerate()
        .map(|(index, entry)| {
            let err = |reason: String| IngestError::Entry { index, reason };
            let obj = entry
                .as_object()
                .ok_or_else(|| err("not a JSON object".into()))?;
            let string_field = |name: &str| -> Result<&str, IngestError> {
                match obj.get(name) {
                    Some(Value::String(s)) => Ok(s),
                    Some(_) => Err(err(format!("field `{name}` is not a string"))),
                    None => Err(err(format!("missing field `{name}`"))),
                }
            };
            let bug_type = string_field("bug_type")?;
            let qualifier = string_field("qualifier")?;
            let file = string_field("file")?;
            let procedure = string_field("procedure")?;
            let line = match obj.get("line") {
                Some(v) => v
                    .as_u64()
                    .filter(|&l| l >= 1 && l <= u32::MAX as u64)
                    .ok_or_else(|| err("field `line` is not a positive integer".into()))?
                    as u32,
                None => return Err(err("missing field `line`".into())),
            };
            let column = match obj.get("column") {
                None | Some(Value::Null) => None,
                Some(v) => Some(
                    v.as_i64()
                        .ok_or_else(|| err("field `column` is not an integer".into()))?,
                ),
            };
            if qualifier.is_empty() {
                return Err(err("field `qualifier` is empty".into()));
            }
            Ok(Warning::new(
                WarningKind::from_bug_type(bug_type),
                file,
                line,
                column,
                procedure,
                qualifier,
                repo,
            ))
        })
        .collect()
}

pub fn load_report(path: &Path, repo: &str) -> Result<Vec<Warning>, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_report(&bytes, repo)
}

/// Expert labels keyed by warning id.
pub type LabelTable = BTreeMap<String, Label>;

fn is_warning_id(s: &str) -> bool {
    s.len() == 16 && s.bytes().all(|b| b.is_ascii_hexdigit())
}

/// Reads an `id,label` CSV. Identical duplicates are tolerated;
/// conflicting ones are an error.
pub fn parse_labels<R: Read>(reader: R) -> Result<LabelTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| IngestError::LabelRow {
        row: 0,
        reason: e.to_string(),
    })?;
    if headers.get(0) != Some("id") || headers.get(1) != Some("label") {
        return Err(IngestError::LabelRow {
            row: 0,
            reason: "expected header `id,label`".into(),
        });
    }

    let mut table = LabelTable::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| IngestError::LabelRow {
            row,
            reason: e.to_string(),
        })?;
        let id = record.get(0).unwrap_or("").to_ascii_lowercase();
        if !is_warning_id(&id) {
            return Err(IngestError::LabelRow {
                row,
                reason: format!("`{id}` is not a 16-hex warning id"),
            });
        }
        let raw = record.get(1).unwrap_or("");
        let label = Label::parse(raw).ok_or_else(|| IngestError::LabelRow {
            row,
            reason: format!("label `{raw}` is not TP or FP"),
        })?;
        match table.get(&id) {
            Some(&prev) if prev != label => return Err(IngestError::ConflictingLabel { id }),
            _ => {
                table.insert(id, label);
            }
        }
    }
    Ok(table)
}

pub fn load_labels(path: &Path) -> Result<LabelTable, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_labels(file)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attached {
    pub labeled: Vec<LabeledWarning>,
    /// Label ids that matched no warning.
    pub unmatched_ids: Vec<String>,
}

pub fn attach_labels(warnings: &[Warning], labels: &LabelTable) -> Attached {
    let labeled = warnings
        .iter()
        .map(|w| LabeledWarning {
            warning: w.clone(),
            label: labels.get(&w.id).copied().unwrap_or(Label::Unlabeled),
        })
        .collect();
    let known: std::collections::HashSet<&str> = warnings.iter().map(|w| w.id.as_str()).collect();
    let unmatched_ids = labels
        .keys()
        .filter(|id| !known.contains(id.as_str()))
        .cloned()
        .collect();
    Attached {
        labeled,
        unmatched_ids,
    }
}
