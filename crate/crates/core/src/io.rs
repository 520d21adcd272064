//! Canonical text formats.
//!
//! Valuation file:
//! ```text
//! SUBVAL 1
//! K 2
//! 0 0
//! 1 3
//! 2 5/2
//! 3 4
//! ```
//! one `mask value` line per bundle, masks ascending from 0.
//!
//! Weight-matrix file: `ASSIGNW 1`, then `n K`, then `n` rows of `K`
//! nonnegative entries.
//!
//! Code file: `SUBCODE 1`, then `K k`, then one codeword mask per line.
//!
//! Values are integers or `p/q` in lowest terms. Serializing a parsed
//! canonical file reproduces it byte for byte.

use std::fmt;

use crate::assignment::WeightMatrix;
use crate::bundle::{Bundle, MAX_DENSE_GOODS, MAX_GOODS};
use crate::speckled::CodeFamily;
use crate::valuation::Valuation;
use crate::value::Value;

pub const VALUATION_HEADER: &str = "SUBVAL 1";
pub const WEIGHTS_HEADER: &str = "ASSIGNW 1";
pub const CODE_HEADER: &str = "SUBCODE 1";

/// Parse failure with its 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

type Parsed<T> = std::result::Result<T, ParseError>;

/// Numbered lines of a file; a final newline does not start a new line.
struct Lines<'a> {
    lines: Vec<&'a str>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = match text.strip_suffix('\n').unwrap_or(text) {
            "" if text.is_empty() => Vec::new(),
            body => body.split('\n').collect(),
        };
        Lines { lines, next: 0 }
    }

    /// Next line with its 1-based number.
    fn next_line(&mut self, what: &str) -> Parsed<(usize, &'a str)> {
        let line = self
            .lines
            .get(self.next)
            .ok_or_else(|| error(self.next + 1, format!("missing {what}")))?;
        self.next += 1;
        Ok((self.next, line))
    }

    fn at_end(&self) -> bool {
        self.next == self.lines.len()
    }

    fn expect_end(&mut self) -> Parsed<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(error(self.next + 1, "unexpected extra line"))
        }
    }
}

fn error(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

fn tokens(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Parsed<usize> {
    tok.parse().map_err(|_| error(line, format!("{what} `{tok}` is not a nonnegative integer")))
}

fn parse_value(line: usize, tok: &str) -> Parsed<Value> {
    tok.parse().map_err(|e| error(line, format!("{e}")))
}

fn header(lines: &mut Lines<'_>, expected: &str) -> Parsed<()> {
    let (n, line) = lines.next_line("header")?;
    if line != expected {
        return Err(error(n, format!("bad header `{line}`, expected `{expected}`")));
    }
    Ok(())
}

fn goods_line(lines: &mut Lines<'_>, limit: usize) -> Parsed<(usize, usize)> {
    let (n, line) = lines.next_line("`K <goods>` line")?;
    match tokens(line).as_slice() {
        ["K", k] => {
            let k = parse_usize(n, k, "number of goods")?;
            if k > limit {
                return Err(error(n, format!("K = {k} exceeds the limit {limit}")));
            }
            Ok((n, k))
        }
        _ => Err(error(n, format!("expected `K <goods>`, found `{line}`"))),
    }
}

pub fn parse_valuation(text: &str) -> Parsed<Valuation> {
    let mut lines = Lines::new(text);
    header(&mut lines, VALUATION_HEADER)?;
    let (_, goods) = goods_line(&mut lines, MAX_DENSE_GOODS)?;
    let count = 1usize << goods;
    let mut table = Vec::with_capacity(count);
    for mask in 0..count {
        let (n, line) = lines.next_line(&format!("entry for mask {mask} ({count} expected)"))?;
        let (m, v) = match tokens(line).as_slice() {
            [m, v] => (parse_usize(n, m, "mask")?, parse_value(n, v)?),
            _ => return Err(error(n, format!("expected `<mask> <value>`, found `{line}`"))),
        };
        if m != mask {
            return Err(error(n, format!("expected mask {mask}, found {m}")));
        }
        if mask == 0 && !v.is_zero() {
            return Err(error(n, "v(∅) must be 0"));
        }
        table.push(v);
    }
    lines.expect_end()?;
    Valuation::new(goods, table).map_err(|e| error(2, e.to_string()))
}

pub fn serialize_valuation(v: &Valuation) -> String {
    let mut out = format!("{VALUATION_HEADER}\nK {}\n", v.goods());
    for (mask, x) in v.table().iter().enumerate() {
        out.push_str(&format!("{mask} {x}\n"));
    }
    out
}

pub fn parse_weights(text: &str) -> Parsed<WeightMatrix> {
    let mut lines = Lines::new(text);
    header(&mut lines, WEIGHTS_HEADER)?;
    let (n, line) = lines.next_line("`<rows> <goods>` line")?;
    let (rows, goods) = match tokens(line).as_slice() {
        [r, k] => (parse_usize(n, r, "row count")?, parse_usize(n, k, "number of goods")?),
        _ => return Err(error(n, format!("expected `<rows> <goods>`, found `{line}`"))),
    };
    if goods > MAX_DENSE_GOODS {
        return Err(error(n, format!("K = {goods} exceeds the limit {MAX_DENSE_GOODS}")));
    }
    let mut entries = Vec::with_capacity(rows * goods);
    for r in 0..rows {
        let (n, line) = lines.next_line(&format!("row {} of {rows}", r + 1))?;
        let toks = tokens(line);
        if toks.len() != goods {
            return Err(error(n, format!("expected {goods} entries, found {}", toks.len())));
        }
        for tok in toks {
            let x = parse_value(n, tok)?;
            if x.is_negative() {
                return Err(error(n, format!("negative weight {x}")));
            }
            entries.push(x);
        }
    }
    lines.expect_end()?;
    WeightMatrix::new(rows, goods, entries).map_err(|e| error(2, e.to_string()))
}

pub fn serialize_weights(w: &WeightMatrix) -> String {
    let mut out = format!("{WEIGHTS_HEADER}\n{} {}\n", w.rows(), w.goods());
    for r in 0..w.rows() {
        let row: Vec<String> = w.row(r).iter().map(Value::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses and validates a code file.
pub fn parse_code(text: &str) -> Parsed<CodeFamily> {
    let mut lines = Lines::new(text);
    header(&mut lines, CODE_HEADER)?;
    let (kline, goods) = goods_line(&mut lines, MAX_GOODS)?;
    let mut words = Vec::new();
    while !lines.at_end() {
        let (n, line) = lines.next_line("codeword")?;
        let mask = match tokens(line).as_slice() {
            [m] => parse_usize(n, m, "codeword mask")?,
            _ => return Err(error(n, format!("expected one mask, found `{line}`"))),
        };
        if mask >> goods != 0 {
            return Err(error(n, format!("mask {mask} has goods beyond K = {goods}")));
        }
        words.push(Bundle(mask as u32));
    }
    CodeFamily::explicit(goods, words).map_err(|e| error(kline, e.to_string()))
}

pub fn serialize_code(code: &CodeFamily) -> String {
    let mut out = format!("{CODE_HEADER}\nK {}\n", code.goods());
    for w in code.words() {
        out.push_str(&format!("{}\n", w.mask()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_round_trip() {
        let text = "SUBVAL 1\nK 2\n0 0\n1 3\n2 5/2\n3 4\n";
        let v = parse_valuation(text).unwrap();
        assert_eq!(v.get(Bundle(2)), Value::new(5, 2));
        assert_eq!(serialize_valuation(&v), text);
        let k1 = parse_valuation("SUBVAL 1\nK 1\n0 0\n1 5\n").unwrap();
        assert_eq!(k1, Valuation::from_ints(1, &[0, 5]).unwrap());
    }

    #[test]
    fn valuation_errors_name_lines() {
        let err = |t: &str| parse_valuation(t).unwrap_err();
        assert_eq!(err("SUBVAL 1\nK 1\n0 1\n1 5\n"), error(3, "v(∅) must be 0"));
        assert_eq!(err("SUBVAL 2\n").line, 1);
        assert_eq!(err("SUBVAL 1\nK x\n").line, 2);
        assert_eq!(err("SUBVAL 1\nK 1\n0 0\n").line, 4);
        assert_eq!(err("SUBVAL 1\nK 1\n0 0\n2 1\n").line, 4);
        assert_eq!(err("SUBVAL 1\nK 1\n0 0\n1 2/4\n").line, 4);
        assert_eq!(err("SUBVAL 1\nK 1\n0 0\n1 2\n1 2\n").line, 5);
        assert_eq!(err("").line, 1);
        assert!(err("SUBVAL 1\nK 1\n0 0\n1 2/4\n").message.contains("canonical"));
    }

    #[test]
    fn weights_round_trip_and_reject_negatives() {
        let text = "ASSIGNW 1\n2 3\n1 2 3\n0 1/2 4\n";
        let w = parse_weights(text).unwrap();
        assert_eq!((w.rows(), w.goods()), (2, 3));
        assert_eq!(serialize_weights(&w), text);
        assert_eq!(parse_weights("ASSIGNW 1\n1 2\n1 -1\n").unwrap_err().line, 3);
        assert_eq!(parse_weights("ASSIGNW 1\n1 2\n1\n").unwrap_err().line, 3);
    }

    #[test]
    fn code_round_trip() {
        let code = crate::speckled::graham_sloane_code(6).unwrap();
        let text = serialize_code(&code);
        let back = parse_code(&text).unwrap();
        assert_eq!(back.words(), code.words());
        assert_eq!(serialize_code(&back), text);
        // Two words at distance 2 are rejected.
        assert!(parse_code("SUBCODE 1\nK 4\n3\n5\n").is_err());
    }
}
