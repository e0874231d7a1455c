//! Line-oriented helpers shared by the text file readers.

use crate::error::{Error, Result};

/// Iterates lines together with their byte offsets.
pub(crate) struct LineCursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        LineCursor { text, pos: 0 }
    }

    /// Next line that is not blank, without its terminator.
    pub(crate) fn next_nonempty(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.text.len() {
            let start = self.pos;
            let rest = &self.text[start..];
            let (line, advance) = match rest.find('\n') {
                Some(i) => (&rest[..i], i + 1),
                None => (rest, rest.len()),
            };
            self.pos += advance;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if !line.trim().is_empty() {
                return Some((start, line));
            }
        }
        None
    }
}

pub(crate) fn parse_f64(tok: &str, offset: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(offset, format!("invalid number `{tok}`"))),
    }
}

pub(crate) fn parse_count(tok: &str, offset: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::parse(offset, format!("invalid {what}: `{tok}`")))
}

pub(crate) fn parse_row(line: &str, offset: usize, expected: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(expected);
    let base = line.as_ptr() as usize;
    for tok in line.split_whitespace() {
        let at = offset + (tok.as_ptr() as usize - base);
        out.push(parse_f64(tok, at)?);
    }
    if out.len() != expected {
        return Err(Error::parse(
            offset,
            format!("expected {expected} values, found {}", out.len()),
        ));
    }
    Ok(out)
}
