//! Pathline files.
//!
//! Text: a `PLSET n m d t0 tau` header, one line of `m` timesteps, then `n`
//! lines of `m*d` coordinates (timestep-major). Binary: magic `PLB1`, then
//! little-endian `u32` n, m, d and an `f64` payload t0, tau, timesteps, coords.

use std::io::Write;
use std::path::Path;

use super::PathlineSet;
use crate::error::{Error, Result};
use crate::textio::{parse_count, parse_f64, parse_row, LineCursor};

const BINARY_MAGIC: &[u8; 4] = b"PLB1";
const TEXT_MAGIC: &str = "PLSET";

pub fn load_pathlines(path: impl AsRef<Path>) -> Result<PathlineSet> {
    let bytes = std::fs::read(path)?;
    read_pathlines(&bytes)
}

/// Parses either encoding, dispatching on the leading magic.
pub fn read_pathlines(bytes: &[u8]) -> Result<PathlineSet> {
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(bytes)
    } else {
        read_text(bytes)
    }
}

fn read_text(bytes: &[u8]) -> Result<PathlineSet> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(e.valid_up_to(), "invalid UTF-8"))?;
    let mut lines = LineCursor::new(text);

    let (offset, header) = lines
        .next_nonempty()
        .ok_or_else(|| Error::parse(0, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != TEXT_MAGIC {
        return Err(Error::parse(offset, "expected header `PLSET n m d t0 tau`"));
    }
    let n = parse_count(fields[1], offset, "n")?;
    let m = parse_count(fields[2], offset, "m")?;
    let d = parse_count(fields[3], offset, "d")?;
    let t0 = parse_f64(fields[4], offset)?;
    let tau = parse_f64(fields[5], offset)?;
    if m < 2 {
        return Err(Error::parse(offset, format!("m must be at least 2, got {m}")));
    }
    if d == 0 {
        return Err(Error::parse(offset, "d must be positive"));
    }

    let (ts_offset, ts_line) = lines
        .next_nonempty()
        .ok_or_else(|| Error::parse(text.len(), "missing timestep line"))?;
    let timesteps = parse_row(ts_line, ts_offset, m)?;
    if timesteps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::parse(ts_offset, "timesteps are not strictly increasing"));
    }

    let stride = m * d;
    let mut coords = Vec::with_capacity(n * stride);
    let mut rows = 0usize;
    while let Some((row_offset, line)) = lines.next_nonempty() {
        if rows == n {
            return Err(Error::parse(
                row_offset,
                format!("more pathline rows than the declared n = {n}"),
            ));
        }
        coords.extend(parse_row(line, row_offset, stride)?);
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(
            text.len(),
            format!("declared n = {n} but found {rows} pathline rows"),
        ));
    }

    PathlineSet::new(d, t0, tau, timesteps, coords).map_err(|e| Error::parse(0, e.to_string()))
}

fn read_binary(bytes: &[u8]) -> Result<PathlineSet> {
    let mut off = BINARY_MAGIC.len();
    let read_u32 = |off: &mut usize| -> Result<usize> {
        let b = bytes
            .get(*off..*off + 4)
            .ok_or_else(|| Error::parse(*off, "truncated header"))?;
        *off += 4;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    };
    let n = read_u32(&mut off)?;
    let m = read_u32(&mut off)?;
    let d = read_u32(&mut off)?;
    if m < 2 {
        return Err(Error::parse(8, format!("m must be at least 2, got {m}")));
    }
    let count = 2 + m + n * m * d;
    let expected_len = off + count * 8;
    if bytes.len() != expected_len {
        return Err(Error::parse(
            bytes.len().min(expected_len),
            format!("payload length {} does not match header (expected {expected_len})", bytes.len()),
        ));
    }
    let values: Vec<f64> = bytes[off..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let t0 = values[0];
    let tau = values[1];
    let timesteps = values[2..2 + m].to_vec();
    if timesteps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::parse(off + 16, "timesteps are not strictly increasing"));
    }
    let coords = values[2 + m..].to_vec();
    PathlineSet::new(d, t0, tau, timesteps, coords).map_err(|e| Error::parse(off, e.to_string()))
}

/// Writes the text encoding. Floats use the shortest round-trip representation.
pub fn write_pathlines<W: Write>(mut w: W, set: &PathlineSet) -> Result<()> {
    writeln!(
        w,
        "{TEXT_MAGIC} {} {} {} {} {}",
        set.n(),
        set.m(),
        set.d(),
        set.t0(),
        set.tau()
    )?;
    write_joined(&mut w, set.timesteps())?;
    for i in 0..set.n() {
        write_joined(&mut w, set.point(i))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pathlines_binary<W: Write>(mut w: W, set: &PathlineSet) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    for v in [set.n(), set.m(), set.d()] {
        let v = u32::try_from(v).map_err(|_| Error::invalid("dimension exceeds u32"))?;
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&set.t0().to_le_bytes())?;
    w.write_all(&set.tau().to_le_bytes())?;
    for v in set.timesteps().iter().chain(set.coords()) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn write_joined<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b" ")?;
        }
        write!(w, "{v}")?;
        first = false;
    }
    w.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{integrate_pathlines, AbcFlow};

    fn sample() -> PathlineSet {
        let seeds = vec![vec![0.1, 0.2], vec![1.0 / 3.0, 2.5], vec![-7.0, 1e-17]];
        integrate_pathlines(&AbcFlow::default(), &seeds, 0.0, std::f64::consts::TAU, 7, 3).unwrap()
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let set = sample();
        let mut buf = Vec::new();
        write_pathlines(&mut buf, &set).unwrap();
        let back = read_pathlines(&buf).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let set = sample();
        let mut buf = Vec::new();
        write_pathlines_binary(&mut buf, &set).unwrap();
        assert_eq!(&buf[..4], b"PLB1");
        assert_eq!(read_pathlines(&buf).unwrap(), set);
    }

    #[test]
    fn rejects_single_timestep() {
        let text = "PLSET 1 1 2 0 1\n0\n1 2\n";
        let err = read_pathlines(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_row_count_mismatch() {
        let text = "PLSET 3 2 1 0 1\n0 1\n0 1\n2 3\n";
        let err = read_pathlines(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        let text = "PLSET 1 2 1 0 1\n0 1\n0 1\n2 3\n";
        let err = read_pathlines(text.as_bytes()).unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, text.rfind("2 3").unwrap()),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_bad_rows_and_timesteps() {
        let short_row = "PLSET 1 2 2 0 1\n0 1\n1 2 3\n";
        assert!(read_pathlines(short_row.as_bytes()).is_err());
        let non_monotone = "PLSET 1 3 1 0 1\n0 0.7 0.5\n1 2 3\n";
        let err = read_pathlines(non_monotone.as_bytes()).unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 16),
            other => panic!("unexpected {other}"),
        }
        let garbage = "PLSET 1 2 1 0 1\n0 1\n1 x\n";
        match read_pathlines(garbage.as_bytes()).unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, garbage.find('x').unwrap()),
            other => panic!("unexpected {other}"),
        }
        assert!(read_pathlines(b"NOPE 1 2 3").is_err());
    }

    #[test]
    fn rejects_truncated_binary() {
        let mut buf = Vec::new();
        write_pathlines_binary(&mut buf, &sample()).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_pathlines(&buf).is_err());
    }
}
