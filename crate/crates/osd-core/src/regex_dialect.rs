//! The portable regex dialect accepted in `regex_pattern`.
//!
//! Definitions travel between implementations in different languages, so
//! patterns are restricted to a conservative common subset: literals,
//! character classes, anchors, alternation, repetition, and groups. No
//! backreferences, no lookaround, no named groups, no inline flags. Flags
//! live in `regex_flags` and are limited to `i`, `m`, and `s`.
//!
//! [`check_pattern`] is a hand-written recursive-descent recognizer for the
//! subset; [`compile`] builds the host matcher for patterns that passed it.

use std::fmt;

use regex::{Regex, RegexBuilder};

/// Counted repetitions above this bound are rejected; enormous counts
/// explode compiled program size on several engines.
const MAX_REPEAT: u32 = 999;

/// Why a pattern falls outside the dialect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialectError {
    /// Byte offset into the pattern.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for DialectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.position, self.message)
    }
}

impl std::error::Error for DialectError {}

/// Check that `pattern` stays within the portable dialect. Accepts the
/// empty pattern (matches everywhere).
pub fn check_pattern(pattern: &str) -> Result<(), DialectError> {
    let mut parser = Parser {
        input: pattern.as_bytes(),
        pos: 0,
    };
    parser.alternation()?;
    if parser.pos != parser.input.len() {
        return Err(parser.error("unexpected character"));
    }
    Ok(())
}

/// Check that every flag character is one of `i`, `m`, `s`.
pub fn check_flags(flags: &str) -> Result<(), String> {
    for c in flags.chars() {
        if !matches!(c, 'i' | 'm' | 's') {
            return Err(format!("unsupported flag {c:?}; allowed flags are i, m, s"));
        }
    }
    Ok(())
}

/// Compile a dialect-checked pattern with its flags. Case-insensitivity,
/// multi-line anchors, and dot-matches-newline follow `i`, `m`, `s`.
pub fn compile(pattern: &str, flags: &str) -> Result<Regex, regex::Error> {
    RegexBuilder::new(pattern)
        .case_insensitive(flags.contains('i'))
        .multi_line(flags.contains('m'))
        .dot_matches_new_line(flags.contains('s'))
        .build()
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> DialectError {
        DialectError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // alternation := concat ("|" concat)*
    fn alternation(&mut self) -> Result<(), DialectError> {
        self.concat()?;
        while self.eat(b'|') {
            self.concat()?;
        }
        Ok(())
    }

    // concat := (atom quantifier?)*
    fn concat(&mut self) -> Result<(), DialectError> {
        loop {
            match self.peek() {
                None | Some(b'|') | Some(b')') => return Ok(()),
                Some(b'*') | Some(b'+') | Some(b'?') => {
                    return Err(self.error("quantifier with nothing to repeat"));
                }
                _ => {
                    self.atom()?;
                    self.quantifier()?;
                }
            }
        }
    }

    fn atom(&mut self) -> Result<(), DialectError> {
        match self.peek() {
            Some(b'(') => self.group(),
            Some(b'[') => self.class(),
            Some(b'\\') => self.escape(false).map(|_| ()),
            Some(b'{') => Err(self.error("unescaped { outside a quantifier")),
            Some(b'}') => Err(self.error("unescaped } outside a quantifier")),
            Some(b']') => Err(self.error("unescaped ] outside a character class")),
            Some(_) => {
                // Any other byte (including multi-byte UTF-8 sequences,
                // '.', '^', '$') is a literal or anchor.
                self.bump_char();
                Ok(())
            }
            None => Err(self.error("expected an atom")),
        }
    }

    /// Advance past one UTF-8 character.
    fn bump_char(&mut self) {
        self.pos += 1;
        while self
            .input
            .get(self.pos)
            .is_some_and(|b| (*b & 0xC0) == 0x80)
        {
            self.pos += 1;
        }
    }

    fn group(&mut self) -> Result<(), DialectError> {
        self.bump(); // consume '('
        if self.eat(b'?') {
            if self.eat(b':') {
                // non-capturing group
            } else {
                return Err(self.error(
                    "only plain (...) and non-capturing (?:...) groups are supported \
                     (no lookaround, no named groups, no inline flags)",
                ));
            }
        }
        self.alternation()?;
        if !self.eat(b')') {
            return Err(self.error("unclosed group"));
        }
        Ok(())
    }

    fn quantifier(&mut self) -> Result<(), DialectError> {
        match self.peek() {
            Some(b'*') | Some(b'+') | Some(b'?') => {
                self.bump();
                self.eat(b'?'); // lazy variant
                Ok(())
            }
            Some(b'{') => {
                self.bump();
                let low = self.repeat_count()?;
                let high = if self.eat(b',') {
                    if self.peek() == Some(b'}') {
                        None
                    } else {
                        Some(self.repeat_count()?)
                    }
                } else {
                    Some(low)
                };
                if !self.eat(b'}') {
                    return Err(self.error("unclosed counted repetition"));
                }
                if let Some(high) = high {
                    if low > high {
                        return Err(self.error("counted repetition minimum exceeds maximum"));
                    }
                }
                self.eat(b'?'); // lazy variant
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn repeat_count(&mut self) -> Result<u32, DialectError> {
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(b @ b'0'..=b'9') = self.peek() {
            self.bump();
            value = value * 10 + u32::from(b - b'0');
            if value > MAX_REPEAT {
                return Err(self.error(format!("repetition count exceeds {MAX_REPEAT}")));
            }
        }
        if self.pos == start {
            return Err(self.error("expected a repetition count"));
        }
        Ok(value)
    }

    /// Parse one escape sequence. Returns the character it denotes, or
    /// `None` for multi-character shorthands and assertions.
    fn escape(&mut self, in_class: bool) -> Result<Option<char>, DialectError> {
        self.bump(); // consume '\\'
        let Some(b) = self.bump() else {
            return Err(self.error("dangling escape"));
        };
        match b {
            // Perl character classes.
            b'd' | b'D' | b'w' | b'W' | b's' | b'S' => Ok(None),
            // Word boundaries are assertions; inside a class they would
            // mean backspace on some engines, so reject them there.
            b'b' | b'B' if !in_class => Ok(None),
            // Control characters.
            b'n' => Ok(Some('\n')),
            b'r' => Ok(Some('\r')),
            b't' => Ok(Some('\t')),
            b'f' => Ok(Some('\u{000C}')),
            b'v' => Ok(Some('\u{000B}')),
            b'0' => Ok(Some('\0')),
            // Escaped metacharacters and punctuation.
            b'.' | b'*' | b'+' | b'?' | b'(' | b')' | b'[' | b']' | b'{' | b'}' | b'|' | b'^'
            | b'$' | b'\\' | b'/' | b'-' => Ok(Some(char::from(b))),
            // Two-digit hex escape.
            b'x' => {
                let hi = self.bump().filter(u8::is_ascii_hexdigit);
                let lo = self.bump().filter(u8::is_ascii_hexdigit);
                match (hi, lo) {
                    (Some(hi), Some(lo)) => {
                        let value = (hex_digit(hi) << 4) | hex_digit(lo);
                        Ok(Some(char::from(value)))
                    }
                    _ => Err(self.error("\\x requires exactly two hex digits")),
                }
            }
            b'1'..=b'9' => Err(self.error("backreferences are not supported")),
            b'k' => Err(self.error("named backreferences are not supported")),
            other => Err(self.error(format!(
                "unsupported escape \\{}",
                char::from(other)
            ))),
        }
    }

    fn class(&mut self) -> Result<(), DialectError> {
        self.bump(); // consume '['
        self.eat(b'^'); // negation
        let mut items = 0usize;
        loop {
            match self.peek() {
                None => return Err(self.error("unclosed character class")),
                Some(b']') if items > 0 => {
                    self.bump();
                    return Ok(());
                }
                Some(b']') => return Err(self.error("empty character class")),
                _ => {
                    let start = self.class_item()?;
                    items += 1;
                    self.class_range_tail(start)?;
                }
            }
        }
    }

    /// One class member: an escape, or a literal character. Returns the
    /// character for potential use as a range endpoint.
    fn class_item(&mut self) -> Result<Option<char>, DialectError> {
        match self.peek() {
            Some(b'\\') => self.escape(true),
            Some(b'[') => Err(self.error(
                "unescaped [ inside a character class (POSIX classes are not supported)",
            )),
            Some(_) => {
                let start = self.pos;
                self.bump_char();
                let text = std::str::from_utf8(&self.input[start..self.pos])
                    .map_err(|_| self.error("invalid UTF-8 in character class"))?;
                Ok(text.chars().next())
            }
            None => Err(self.error("unclosed character class")),
        }
    }

    /// After a class item, an optional `-x` continues a range. A dash
    /// directly before `]` is a literal.
    fn class_range_tail(&mut self, start: Option<char>) -> Result<(), DialectError> {
        if self.peek() != Some(b'-') {
            return Ok(());
        }
        if self.input.get(self.pos + 1) == Some(&b']') {
            return Ok(()); // trailing literal dash
        }
        self.bump(); // consume '-'
        let range_pos = self.pos;
        let end = self.class_item()?;
        match (start, end) {
            (Some(start), Some(end)) if start <= end => Ok(()),
            (Some(_), Some(_)) => Err(DialectError {
                position: range_pos,
                message: "character range start exceeds its end".into(),
            }),
            _ => Err(DialectError {
                position: range_pos,
                message: "a character class shorthand cannot bound a range".into(),
            }),
        }
    }
}

fn hex_digit(b: u8) -> u8 {
    match b {
        b'0'..=b'9' => b - b'0',
        b'a'..=b'f' => b - b'a' + 10,
        _ => b - b'A' + 10,
    }
}
