//! Line-oriented tokenizer for the netlist grammar.
//!
//! The first source line is the title and is never tokenized. Full-line
//! comments start with `*`, trailing comments with `;`, and a line whose
//! first non-blank character is `+` continues the previous logical line.

use crate::error::{Error, Result};

/// Raw netlist text split into lines. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceText {
    pub lines: Vec<String>,
    pub origin: String,
}

impl SourceText {
    pub fn new(text: &str, origin: impl Into<String>) -> Self {
        SourceText {
            lines: text.lines().map(str::to_owned).collect(),
            origin: origin.into(),
        }
    }

    pub fn title(&self) -> &str {
        self.lines.first().map(|l| l.trim()).unwrap_or("")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TokenKind {
    /// First word of an element line (`R1`, `M3`, ...).
    Name,
    /// First word of a dot-card (`.model`, `.tran`, ...).
    Directive,
    Word,
    Number(f64),
    Equals,
    LParen,
    RParen,
    Comma,
    /// End of a logical line.
    Eol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn number(&self) -> Option<f64> {
        match self.kind {
            TokenKind::Number(v) => Some(v),
            _ => None,
        }
    }
}

/// Power-of-ten exponent for an engineering suffix, matched case-insensitively.
/// Returns the exponent and the suffix length in bytes.
fn suffix_exponent(rest: &str) -> Option<(i32, usize)> {
    let lower = rest.to_lowercase();
    if lower.starts_with("meg") {
        return Some((6, 3));
    }
    if rest.starts_with('µ') {
        return Some((-6, 'µ'.len_utf8()));
    }
    let exp = match lower.chars().next()? {
        'f' => -15,
        'p' => -12,
        'n' => -9,
        'u' => -6,
        'm' => -3,
        'k' => 3,
        'g' => 9,
        _ => return None,
    };
    Some((exp, 1))
}

fn looks_numeric(word: &str) -> bool {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') | Some('.') => {
            let next = chars.next();
            match next {
                Some(c) if c.is_ascii_digit() => true,
                Some('.') => chars.next().is_some_and(|c| c.is_ascii_digit()),
                _ => false,
            }
        }
        _ => false,
    }
}

/// Parse a number with an optional engineering suffix and optional trailing
/// unit letters (`1pF`, `10kohm`). The result is the correctly rounded value
/// of the decimal product mantissa × 10^suffix.
pub fn parse_value(word: &str) -> Option<f64> {
    let bytes = word.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut n_digits = i - digits_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        n_digits += i - frac_start;
    }
    if n_digits == 0 {
        return None;
    }
    let mantissa = &word[..i];
    let mut exponent: i32 = 0;
    // Exponent part, unless the `e` is not followed by digits.
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_digits = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits {
            exponent = word[i + 1..j].parse().ok()?;
            i = j;
        }
    }
    let rest = &word[i..];
    let unit = match suffix_exponent(rest) {
        Some((exp, len)) => {
            exponent += exp;
            &rest[len..]
        }
        None if rest.is_empty() => "",
        None => return None,
    };
    if !unit.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    format!("{mantissa}e{exponent}").parse().ok()
}

fn strip_comment(line: &str) -> &str {
    match line.find(';') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Tokenize everything after the title line.
pub fn tokenize(text: &SourceText) -> Result<Vec<Token>> {
    let mut tokens: Vec<Token> = Vec::new();
    for (idx, raw) in text.lines.iter().enumerate().skip(1) {
        let line_no = idx + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let continuation = trimmed.starts_with('+');
        if continuation {
            if tokens.last().map(|t| t.kind) == Some(TokenKind::Eol) {
                tokens.pop();
            }
        }
        let mut first = !continuation;
        let chars: Vec<(usize, char)> = body.char_indices().collect();
        let mut k = 0;
        if continuation {
            // skip leading blanks and the '+'
            while chars[k].1 != '+' {
                k += 1;
            }
            k += 1;
        }
        while k < chars.len() {
            let (byte_pos, c) = chars[k];
            let column = k + 1;
            let single = match c {
                '=' => Some(TokenKind::Equals),
                '(' => Some(TokenKind::LParen),
                ')' => Some(TokenKind::RParen),
                ',' => Some(TokenKind::Comma),
                _ => None,
            };
            if c.is_whitespace() {
                k += 1;
                continue;
            }
            if let Some(kind) = single {
                tokens.push(Token {
                    kind,
                    lexeme: c.to_string(),
                    line: line_no,
                    column,
                });
                k += 1;
                continue;
            }
            let start = k;
            while k < chars.len() && !chars[k].1.is_whitespace() && !"=(),".contains(chars[k].1) {
                k += 1;
            }
            let end_byte = if k < chars.len() { chars[k].0 } else { body.len() };
            let word = &body[byte_pos..end_byte];
            let kind = if first {
                if word.starts_with('.') {
                    TokenKind::Directive
                } else {
                    TokenKind::Name
                }
            } else if looks_numeric(word) {
                match parse_value(word) {
                    Some(v) => TokenKind::Number(v),
                    None => {
                        return Err(Error::Lex {
                            line: line_no,
                            column: start + 1,
                            message: format!("malformed number '{word}'"),
                        })
                    }
                }
            } else {
                TokenKind::Word
            };
            first = false;
            tokens.push(Token {
                kind,
                lexeme: word.to_owned(),
                line: line_no,
                column: start + 1,
            });
        }
        tokens.push(Token {
            kind: TokenKind::Eol,
            lexeme: String::new(),
            line: line_no,
            column: chars.len() + 1,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(line: &str) -> Vec<Token> {
        tokenize(&SourceText::new(&format!("title\n{line}"), "<test>")).unwrap()
    }

    #[test]
    fn resistor_line() {
        let t = lex("R1 1 0 10k");
        assert_eq!(t[0].kind, TokenKind::Name);
        assert_eq!(t[0].lexeme, "R1");
        assert_eq!(t[1].lexeme, "1");
        assert_eq!(t[2].lexeme, "0");
        assert_eq!(t[3].kind, TokenKind::Number(10000.0));
        assert_eq!(t[4].kind, TokenKind::Eol);
    }

    #[test]
    fn picofarad_and_plain_values() {
        assert_eq!(lex("C1 2 0 1p")[3].kind, TokenKind::Number(1.0e-12));
        assert_eq!(lex("V1 1 0 1.8")[3].kind, TokenKind::Number(1.8));
    }

    #[test]
    fn suffixes_are_case_insensitive() {
        assert_eq!(parse_value("1MEG"), Some(1e6));
        assert_eq!(parse_value("1Meg"), Some(1e6));
        assert_eq!(parse_value("1M"), Some(1e-3));
        assert_eq!(parse_value("2.2K"), Some(2200.0));
        assert_eq!(parse_value("3µ"), Some(3e-6));
        assert_eq!(parse_value("3U"), Some(3e-6));
        assert_eq!(parse_value("1pF"), Some(1e-12));
        assert_eq!(parse_value("1e-3k"), Some(1.0));
        assert_eq!(parse_value("-.5n"), Some(-0.5e-9));
        assert_eq!(parse_value("0.707u"), Some(0.707e-6));
    }

    #[test]
    fn malformed_number_reports_position() {
        let err = tokenize(&SourceText::new("t\nR1 1 0 1.2.3k", "<test>")).unwrap_err();
        assert_eq!(
            err,
            Error::Lex {
                line: 2,
                column: 8,
                message: "malformed number '1.2.3k'".into()
            }
        );
        assert!(tokenize(&SourceText::new("t\nR1 1 0 10x", "<test>")).is_err());
    }

    #[test]
    fn comments_and_continuations() {
        let src = "t\n* full comment\nR1 a b ; trailing\n+ 1k\n\nC1 a 0 1p";
        let toks = tokenize(&SourceText::new(src, "<test>")).unwrap();
        let lexemes: Vec<_> = toks.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lexemes, ["R1", "a", "b", "1k", "", "C1", "a", "0", "1p", ""]);
        assert_eq!(toks[3].line, 4);
    }

    #[test]
    fn punctuation_splits_words() {
        let toks = lex("M1 d g s b NMOSA W=20u L=1u");
        assert_eq!(toks[6].lexeme, "W");
        assert_eq!(toks[7].kind, TokenKind::Equals);
        assert_eq!(toks[8].kind, TokenKind::Number(2.0e-5));
        let sin = lex("I1 0 1 SIN(0 70u 1meg)");
        assert_eq!(sin[4].kind, TokenKind::LParen);
        assert_eq!(sin[7].kind, TokenKind::Number(1e6));
    }
}
