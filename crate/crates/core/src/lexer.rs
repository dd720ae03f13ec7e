//! Lexical scanning of Java-like source text.
//!
//! No grammar: comments and string/char literal contents are blanked out
//! (byte offsets and newlines preserved), braces are matched on what
//! remains, and a block counts as a method body when the text before its
//! `{` looks like `name(params) [throws ...]` at class-member depth.

use std::sync::LazyLock;

use regex::Regex;

/// Replaces comment bodies and literal contents with spaces.
///
/// The result has the same byte length and line structure as `text`, so
/// offsets and line numbers computed on it apply to the original.
pub fn mask_non_code(text: &str) -> String {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Code,
        LineComment,
        BlockComment,
        Str,
        TextBlock,
        VerbatimStr,
        Char,
    }

    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut state = State::Code;
    let mut i = 0;

    let blank = |out: &mut String, ch: char| {
        if ch == '\n' {
            out.push('\n');
        } else {
            for _ in 0..ch.len_utf8() {
                out.push(' ');
            }
        }
    };

    while i < bytes.len() {
        let ch = text[i..].chars().next().unwrap();
        let next = bytes.get(i + 1).copied();
        let len = ch.len_utf8();
        match state {
            State::Code => match ch {
                '/' if next == Some(b'/') => {
                    out.push_str("  ");
                    i += 2;
                    state = State::LineComment;
                    continue;
                }
                '/' if next == Some(b'*') => {
                    out.push_str("  ");
                    i += 2;
                    state = State::BlockComment;
                    continue;
                }
                '"' if text[i..].starts_with("\"\"\"") => {
                    out.push_str("\"\"\"");
                    i += 3;
                    state = State::TextBlock;
                    continue;
                }
                '@' if next == Some(b'"') => {
                    out.push_str("@\"");
                    i += 2;
                    state = State::VerbatimStr;
                    continue;
                }
                '"' => {
                    out.push('"');
                    state = State::Str;
                }
                '\'' => {
                    out.push('\'');
                    state = State::Char;
                }
                _ => out.push(ch),
            },
            State::LineComment => {
                if ch == '\n' {
                    out.push('\n');
                    state = State::Code;
                } else {
                    blank(&mut out, ch);
                }
            }
            State::BlockComment => {
                if ch == '*' && next == Some(b'/') {
                    out.push_str("  ");
                    i += 2;
                    state = State::Code;
                    continue;
                }
                blank(&mut out, ch);
            }
            State::Str | State::Char => {
                let close = if state == State::Str { '"' } else { '\'' };
                if ch == '\\' {
                    out.push(' ');
                    i += 1;
                    if let Some(escaped) = text[i..].chars().next() {
                        blank(&mut out, escaped);
                        i += escaped.len_utf8();
                    }
                    continue;
                }
                if ch == close {
                    out.push(close);
                    state = State::Code;
                } else if ch == '\n' {
                    // unterminated literal; resync at end of line
                    out.push('\n');
                    state = State::Code;
                } else {
                    blank(&mut out, ch);
                }
            }
            State::TextBlock => {
                if text[i..].starts_with("\"\"\"") {
                    out.push_str("\"\"\"");
                    i += 3;
                    state = State::Code;
                    continue;
                }
                blank(&mut out, ch);
            }
            State::VerbatimStr => {
                if ch == '"' && next == Some(b'"') {
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                if ch == '"' {
                    out.push('"');
                    state = State::Code;
                } else {
                    blank(&mut out, ch);
                }
            }
        }
        i += len;
    }
    out
}

/// A `{ ... }` pair in masked text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub open: usize,
    /// `None` when the file ends before the block closes.
    pub close: Option<usize>,
    pub parent: Option<usize>,
}

/// A block recognised as a method (or constructor) body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub name: String,
    /// Byte offset of the method name.
    pub name_offset: usize,
    pub block: usize,
}

/// Lexical structure of one source file.
#[derive(Debug, Clone)]
pub struct Scan {
    pub masked: String,
    pub line_starts: Vec<usize>,
    pub blocks: Vec<Block>,
    pub methods: Vec<MethodDef>,
    /// Braces did not balance.
    pub unbalanced: bool,
}

const NON_METHOD_WORDS: &[&str] = &[
    "if", "for", "foreach", "while", "switch", "catch", "synchronized", "try", "using", "lock",
    "fixed", "return", "new", "else", "do", "when", "throw", "super", "this", "assert", "case",
];

static TYPE_HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(class|interface|enum|record|struct|namespace)\b").unwrap());
static THROWS_TAIL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bthrows\s+[\w$.<>,\s]+$").unwrap());

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

/// Reads the identifier ending right before `end` (after skipping spaces).
fn ident_before(s: &str, end: usize) -> Option<(usize, &str)> {
    let bytes = s.as_bytes();
    let mut e = end;
    while e > 0 && bytes[e - 1].is_ascii_whitespace() {
        e -= 1;
    }
    let mut b = e;
    while b > 0 && is_ident_byte(bytes[b - 1]) {
        b -= 1;
    }
    if b == e || bytes[b].is_ascii_digit() {
        None
    } else {
        Some((b, &s[b..e]))
    }
}

fn matching_open_paren(s: &str, close: usize) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut depth = 0usize;
    for i in (0..=close).rev() {
        match bytes[i] {
            b')' => depth += 1,
            b'(' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            b'{' | b'}' | b';' => return None,
            _ => {}
        }
    }
    None
}

/// Start of the declaration header that ends at `open`.
fn header_start(masked: &str, open: usize) -> usize {
    masked[..open]
        .rfind([';', '{', '}'])
        .map_or(0, |p| p + 1)
}

impl Scan {
    pub fn new(text: &str) -> Self {
        let masked = mask_non_code(text);
        let mut line_starts = vec![0];
        line_starts.extend(masked.match_indices('\n').map(|(i, _)| i + 1));

        let mut blocks: Vec<Block> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut unbalanced = false;
        for (i, b) in masked.bytes().enumerate() {
            match b {
                b'{' => {
                    blocks.push(Block {
                        open: i,
                        close: None,
                        parent: stack.last().copied(),
                    });
                    stack.push(blocks.len() - 1);
                }
                b'}' => match stack.pop() {
                    Some(idx) => blocks[idx].close = Some(i),
                    None => unbalanced = true,
                },
                _ => {}
            }
        }
        unbalanced |= !stack.is_empty();

        let type_body: Vec<bool> = blocks
            .iter()
            .map(|blk| Self::is_type_body(&masked, blk.open))
            .collect();
        let methods = blocks
            .iter()
            .enumerate()
            .filter(|(_, blk)| blk.parent.is_none_or(|p| type_body[p]))
            .filter_map(|(idx, blk)| {
                let (name_offset, name) = Self::signature_name(&masked, blk.open)?;
                Some(MethodDef {
                    name: name.to_string(),
                    name_offset,
                    block: idx,
                })
            })
            .collect();

        Scan {
            masked,
            line_starts,
            blocks,
            methods,
            unbalanced,
        }
    }

    fn is_type_body(masked: &str, open: usize) -> bool {
        let header = &masked[header_start(masked, open)..open];
        if TYPE_HEADER.is_match(header) {
            return true;
        }
        // anonymous class: `new Type(args) {`
        let trimmed = header.trim_end();
        if !trimmed.ends_with(')') {
            return false;
        }
        let start = header_start(masked, open);
        let close = start + trimmed.len() - 1;
        let Some(paren) = matching_open_paren(masked, close) else {
            return false;
        };
        let Some((name_at, _)) = ident_before(masked, paren) else {
            return false;
        };
        matches!(ident_before(masked, name_at), Some((_, "new")))
    }

    /// Name of the method whose body opens at `open`, if the text before
    /// the brace is a method signature.
    fn signature_name(masked: &str, open: usize) -> Option<(usize, &str)> {
        let start = header_start(masked, open);
        let mut tail = masked[start..open].trim_end();
        if let Some(m) = THROWS_TAIL.find(tail) {
            tail = tail[..m.start()].trim_end();
        }
        if !tail.ends_with(')') {
            return None;
        }
        let close = start + tail.len() - 1;
        let paren = matching_open_paren(masked, close)?;
        let (name_at, name) = ident_before(masked, paren)?;
        if NON_METHOD_WORDS.contains(&name) {
            return None;
        }
        let before = masked[..name_at].trim_end();
        if before.ends_with('.') || before.ends_with("->") || before.ends_with('=') {
            return None;
        }
        if let Some((_, "new")) = ident_before(masked, name_at) {
            return None;
        }
        Some((name_at, name))
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// 1-based line of a byte offset.
    pub fn line_of(&self, offset: usize) -> usize {
        self.line_starts.partition_point(|&s| s <= offset)
    }

    /// 1-based last line of a block; unclosed blocks run to end of file.
    pub fn block_end_line(&self, block: usize) -> usize {
        match self.blocks[block].close {
            Some(c) => self.line_of(c),
            None => self.line_count(),
        }
    }

    pub fn block_contains_line(&self, block: usize, line: usize) -> bool {
        self.line_of(self.blocks[block].open) <= line && line <= self.block_end_line(block)
    }

    pub fn method_start_line(&self, method: &MethodDef) -> usize {
        self.line_of(method.name_offset)
    }

    /// Depth of a block in the nesting tree (0 for top level).
    pub fn depth(&self, block: usize) -> usize {
        let mut d = 0;
        let mut cur = self.blocks[block].parent;
        while let Some(p) = cur {
            d += 1;
            cur = self.blocks[p].parent;
        }
        d
    }
}

/// Whether `text` contains `token` with identifier boundaries on both sides.
pub fn contains_token(text: &str, token: &str) -> bool {
    find_token(text, token).is_some()
}

pub fn find_token(text: &str, token: &str) -> Option<usize> {
    if token.is_empty() {
        return None;
    }
    let bytes = text.as_bytes();
    let tb = token.as_bytes();
    let first_ident = is_ident_byte(tb[0]);
    let last_ident = is_ident_byte(tb[tb.len() - 1]);
    text.match_indices(token).map(|(i, _)| i).find(|&i| {
        let before_ok = !first_ident || i == 0 || !is_ident_byte(bytes[i - 1]);
        let end = i + tb.len();
        let after_ok = !last_ident || end == bytes.len() || !is_ident_byte(bytes[end]);
        before_ok && after_ok
    })
}
