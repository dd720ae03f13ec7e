//! Handcrafted warning features.
//!
//! Four boolean predicates computed lexically over the warning's context:
//!
//! | feature            | fires when                                                   |
//! |--------------------|--------------------------------------------------------------|
//! | `returns_null`     | a non-local callee body contains `return null;`              |
//! | `nullcheck_method` | the local context calls a configured null-check method       |
//! | `class_field`      | the target is a field (`this.x`, or not declared in the method) |
//! | `implicit_unbox`   | the warning line stores a call/index result into a primitive |
//!
//! All matching runs on comment- and literal-masked text. The unboxing
//! predicate over-approximates: any call on the right-hand side of a
//! primitive assignment counts, e.g. `int n = list.size();`.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::context::{locate_enclosing_method, ContextBundle};
use crate::ingest::{Label, Warning};
use crate::lexer::mask_non_code;

pub const DEFAULT_NULL_CHECK_METHODS: [&str; 6] = [
    "Objects.requireNonNull",
    "Preconditions.checkNotNull",
    "Validate.notNull",
    "Assert.notNull",
    "assertNotNull",
    "requireNonNull",
];

/// Null-check APIs the analyzer does not model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullCheckConfig {
    pub methods: Vec<String>,
}

impl Default for NullCheckConfig {
    fn default() -> Self {
        NullCheckConfig {
            methods: DEFAULT_NULL_CHECK_METHODS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl NullCheckConfig {
    /// One method name per line; blank lines and `#` comments ignored.
    pub fn from_text(text: &str) -> Self {
        NullCheckConfig {
            methods: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::from_text(&std::fs::read_to_string(path)?))
    }

    /// Regex matching a call to any configured method, `name(` with an
    /// identifier boundary in front and optional spaces around dots.
    pub(crate) fn call_pattern(&self, first_arg: Option<&str>) -> Option<Regex> {
        if self.methods.is_empty() {
            return None;
        }
        let names: Vec<String> = self
            .methods
            .iter()
            .map(|m| {
                m.split('.')
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"\s*\.\s*")
            })
            .collect();
        let args = match first_arg {
            Some(t) => format!(r"(?:[^;]*?[^\w$.])?{}(?:[^\w$]|$)", regex::escape(t)),
            None => String::new(),
        };
        Regex::new(&format!(r"(?:^|[^\w$])(?:{})\s*\({args}", names.join("|"))).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub returns_null: u8,
    pub nullcheck_method: u8,
    pub class_field: u8,
    pub implicit_unbox: u8,
}

impl FeatureVector {
    pub const DIM: usize = 5;

    /// Components in model order, bias last.
    pub fn to_array(&self) -> [f64; Self::DIM] {
        [
            self.returns_null as f64,
            self.nullcheck_method as f64,
            self.class_field as f64,
            self.implicit_unbox as f64,
            1.0,
        ]
    }

    pub fn from_bits(bits: [u8; 4]) -> Self {
        FeatureVector {
            returns_null: bits[0].min(1),
            nullcheck_method: bits[1].min(1),
            class_field: bits[2].min(1),
            implicit_unbox: bits[3].min(1),
        }
    }

    pub fn bits(&self) -> [u8; 4] {
        [
            self.returns_null,
            self.nullcheck_method,
            self.class_field,
            self.implicit_unbox,
        ]
    }
}

/// Collapses whitespace runs to one space and drops spaces next to
/// punctuation, so `return  null ;` reads `return null;`.
pub fn normalize_whitespace(text: &str) -> String {
    let collapsed: Vec<&str> = text.split_whitespace().collect();
    let mut out = String::with_capacity(text.len());
    for (i, tok) in collapsed.iter().enumerate() {
        if i > 0 {
            let prev = out.chars().last().unwrap_or(' ');
            let next = tok.chars().next().unwrap_or(' ');
            if is_word(prev) && is_word(next) {
                out.push(' ');
            }
        }
        out.push_str(tok);
    }
    out
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn has_return_null(body: &str) -> bool {
    let norm = normalize_whitespace(&mask_non_code(body));
    norm.match_indices("return null;").any(|(i, _)| {
        i == 0 || !norm[..i].chars().last().is_some_and(is_word)
    })
}

pub fn feature_returns_null(bundle: &ContextBundle) -> u8 {
    bundle
        .nonlocal_contexts
        .iter()
        .any(|span| has_return_null(&span.body)) as u8
}

pub fn feature_nullcheck_method(bundle: &ContextBundle, config: &NullCheckConfig) -> u8 {
    let masked = mask_non_code(&bundle.local_context);
    config
        .call_pattern(None)
        .is_some_and(|re| re.is_match(&masked)) as u8
}

const NON_TYPE_WORDS: &[&str] = &[
    "return", "new", "throw", "case", "else", "yield", "assert", "goto", "await", "in", "out",
    "ref", "is", "as",
];

/// Whether `name` is declared as a local, parameter, loop or lambda
/// variable inside `code` (masked).
pub fn declares(code: &str, name: &str) -> bool {
    let n = regex::escape(name);
    let pair = Regex::new(&format!(r"([\w$]+|[>\]?])\s+{n}\s*(?:[=;,):]|$)")).unwrap();
    let typed = pair.captures_iter(code).any(|c| {
        let lead = c.get(1).unwrap();
        !NON_TYPE_WORDS.contains(&lead.as_str())
            && !lead.as_str().chars().next().is_some_and(|ch| ch.is_ascii_digit())
    });
    if typed {
        return true;
    }
    let lambda = Regex::new(&format!(
        r"(?:^|[^\w$]){n}\s*->|\(\s*(?:[\w$]+\s*,\s*)*{n}\s*(?:,\s*[\w$]+\s*)*\)\s*->"
    ))
    .unwrap();
    lambda.is_match(code)
}

pub fn feature_class_field(warning: &Warning, file_text: &str) -> u8 {
    let Some(target) = warning.target() else {
        return 0;
    };
    let masked_file = mask_non_code(file_text);
    let this_ref = Regex::new(&format!(r"\bthis\s*\.\s*{}(?:[^\w$]|$)", regex::escape(target))).unwrap();
    if this_ref.is_match(&masked_file) {
        return 1;
    }
    let Ok(span) = locate_enclosing_method(&warning.file, file_text, warning.facts.deref_line) else {
        return 0;
    };
    (!declares(&mask_non_code(&span.body), target)) as u8
}

const PRIMITIVES: &str = "boolean|byte|char|short|int|long|float|double";

static PRIMITIVE_DECL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"^\s*(?:final\s+)?(?:{PRIMITIVES})\s+[\w$]+\s*=\s*(.*)$"
    ))
    .unwrap()
});
static PLAIN_ASSIGN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*([A-Za-z_$][\w$]*)\s*[-+*/%]?=\s*([^=].*)$").unwrap());
static CALL_OR_INDEX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z_$][\w$]*\s*\(|\[").unwrap());

fn rhs_is_call_or_index(rhs: &str) -> bool {
    let rhs = rhs.split(';').next().unwrap_or("");
    CALL_OR_INDEX.find_iter(rhs).any(|m| {
        let tok = m.as_str();
        if tok == "[" {
            return true;
        }
        let name = tok.trim_end_matches('(').trim();
        if matches!(name, "if" | "while" | "for" | "switch") {
            return false;
        }
        // constructor calls produce objects, not wrapper unboxing
        let before = rhs[..m.start()].trim_end();
        !(name == "new" || before.ends_with("new"))
    })
}

pub fn feature_implicit_unbox(warning: &Warning, file_text: &str) -> u8 {
    let masked = mask_non_code(file_text);
    let Some(line) = masked.split('\n').nth(warning.line.saturating_sub(1) as usize) else {
        return 0;
    };
    if let Some(c) = PRIMITIVE_DECL.captures(line) {
        return rhs_is_call_or_index(&c[1]) as u8;
    }
    if let Some(c) = PLAIN_ASSIGN.captures(line) {
        let decl = Regex::new(&format!(
            r"\b(?:{PRIMITIVES})\s+{}\s*[=;,)]",
            regex::escape(&c[1])
        ))
        .unwrap();
        return (decl.is_match(&masked) && rhs_is_call_or_index(&c[2])) as u8;
    }
    0
}

pub fn featurize(
    warning: &Warning,
    bundle: &ContextBundle,
    file_text: &str,
    config: &NullCheckConfig,
) -> FeatureVector {
    debug_assert_eq!(warning.id, bundle.warning_id);
    FeatureVector {
        returns_null: feature_returns_null(bundle),
        nullcheck_method: feature_nullcheck_method(bundle, config),
        class_field: feature_class_field(warning, file_text),
        implicit_unbox: feature_implicit_unbox(warning, file_text),
    }
}

/// One row of the features CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRow {
    pub id: String,
    pub features: FeatureVector,
    pub label: Label,
}

pub const FEATURE_CSV_HEADER: [&str; 6] = [
    "id",
    "returns_null",
    "nullcheck_method",
    "class_field",
    "implicit_unbox",
    "label",
];

pub fn write_feature_csv<W: Write>(writer: W, rows: &[FeatureRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(FEATURE_CSV_HEADER)?;
    for row in rows {
        let b = row.features.bits();
        w.write_record([
            row.id.as_str(),
            &b[0].to_string(),
            &b[1].to_string(),
            &b[2].to_string(),
            &b[3].to_string(),
            row.label.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<Vec<FeatureRow>, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != FEATURE_CSV_HEADER {
        return Err(format!("unexpected header: {}", headers.iter().collect::<Vec<_>>().join(",")));
    }
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| e.to_string())?;
            let mut bits = [0u8; 4];
            for (k, bit) in bits.iter_mut().enumerate() {
                *bit = match rec.get(k + 1) {
                    Some("0") => 0,
                    Some("1") => 1,
                    other => return Err(format!("row {}: feature value {:?} is not 0/1", i + 1, other)),
                };
            }
            let label = match rec.get(5).unwrap_or("") {
                "" => Label::Unlabeled,
                s => Label::parse(s).ok_or_else(|| format!("row {}: bad label `{s}`", i + 1))?,
            };
            Ok(FeatureRow {
                id: rec.get(0).unwrap_or("").to_string(),
                features: FeatureVector::from_bits(bits),
                label,
            })
        })
        .collect()
}
