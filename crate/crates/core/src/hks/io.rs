//! HKS files.
//!
//! Text: `HKS1 n nscales`, one line of scales, then `n` lines of normalized
//! values. Binary: magic `HKB1`, little-endian `u32` n and nscales, then the
//! scales and the row-major values as `f64`.

use std::io::Write;
use std::path::Path;

use super::HksField;
use crate::error::{Error, Result};
use crate::textio::{parse_count, parse_row, LineCursor};

const BINARY_MAGIC: &[u8; 4] = b"HKB1";
const TEXT_MAGIC: &str = "HKS1";

pub fn load_hks(path: impl AsRef<Path>) -> Result<HksField> {
    let bytes = std::fs::read(path)?;
    read_hks(&bytes)
}

pub fn read_hks(bytes: &[u8]) -> Result<HksField> {
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(bytes)
    } else {
        read_text(bytes)
    }
}

fn read_text(bytes: &[u8]) -> Result<HksField> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(e.valid_up_to(), "invalid UTF-8"))?;
    let mut lines = LineCursor::new(text);
    let (offset, header) = lines.next_nonempty().ok_or_else(|| Error::parse(0, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != TEXT_MAGIC {
        return Err(Error::parse(offset, "expected header `HKS1 n nscales`"));
    }
    let n = parse_count(fields[1], offset, "n")?;
    let ns = parse_count(fields[2], offset, "nscales")?;
    if ns < 2 {
        return Err(Error::parse(offset, "nscales must be at least 2"));
    }
    let (sc_offset, sc_line) = lines
        .next_nonempty()
        .ok_or_else(|| Error::parse(text.len(), "missing scale line"))?;
    let scales = parse_row(sc_line, sc_offset, ns)?;

    let mut values = Vec::with_capacity(n * ns);
    let mut rows = 0usize;
    while let Some((row_offset, line)) = lines.next_nonempty() {
        if rows == n {
            return Err(Error::parse(row_offset, format!("more rows than the declared n = {n}")));
        }
        values.extend(parse_row(line, row_offset, ns)?);
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(text.len(), format!("declared n = {n} but found {rows} rows")));
    }
    HksField::new(scales, values).map_err(|e| Error::parse(sc_offset, e.to_string()))
}

fn read_binary(bytes: &[u8]) -> Result<HksField> {
    let header = bytes.get(4..12).ok_or_else(|| Error::parse(bytes.len(), "truncated header"))?;
    let n = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let ns = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let expected_len = 12 + (ns + n * ns) * 8;
    if bytes.len() != expected_len {
        return Err(Error::parse(
            bytes.len().min(expected_len),
            format!("payload length {} does not match header (expected {expected_len})", bytes.len()),
        ));
    }
    let mut values: Vec<f64> = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let data = values.split_off(ns);
    HksField::new(values, data).map_err(|e| Error::parse(12, e.to_string()))
}

/// Text encoding with shortest round-trip floats.
pub fn write_hks<W: Write>(mut w: W, field: &HksField) -> Result<()> {
    writeln!(w, "{TEXT_MAGIC} {} {}", field.n(), field.scale_count())?;
    write_line(&mut w, field.scales())?;
    for p in 0..field.n() {
        write_line(&mut w, field.row(p))?;
    }
    w.flush()?;
    Ok(())
}

fn write_line<W: Write>(w: &mut W, row: &[f64]) -> Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            w.write_all(b" ")?;
        }
        write!(w, "{v}")?;
        first = false;
    }
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_hks_binary<W: Write>(mut w: W, field: &HksField) -> Result<()> {
    let n = u32::try_from(field.n()).map_err(|_| Error::invalid("too many rows for the binary format"))?;
    let ns = u32::try_from(field.scale_count()).map_err(|_| Error::invalid("too many scales"))?;
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&ns.to_le_bytes())?;
    for v in field.scales().iter().chain(field.values()) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}
