//! graph6 text encoding.
//!
//! The order `n` is written first (`n + 63` for `n <= 62`, otherwise `~`
//! followed by 18 bits, or `~~` followed by 36 bits), then the upper triangle
//! of the adjacency matrix in column order `(0,1), (0,2), (1,2), (0,3), ...`,
//! packed big-endian into 6-bit groups offset by 63 and zero padded.

use crate::graph::{Graph, GraphError, MAX_VERTICES};
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Graph6Error {
    #[error("empty graph6 string")]
    Empty,
    #[error("malformed graph6 header")]
    MalformedHeader,
    #[error("invalid graph6 byte {byte:#04x} at offset {offset}")]
    InvalidByte { byte: u8, offset: usize },
    #[error("truncated graph6 payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("graph6 payload does not match n = {n}: expected {expected} bytes, found {found}")]
    SizeMismatch { n: usize, expected: usize, found: usize },
    #[error("graph6 padding bits are not zero for n = {0}")]
    NonZeroPadding(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("line {line}: {source}")]
    AtLine { line: usize, source: Box<Graph6Error> },
    #[error("i/o error: {0}")]
    Io(String),
}

fn encode_order(n: usize, out: &mut String) {
    if n <= 62 {
        out.push((n as u8 + 63) as char);
    } else if n <= 258_047 {
        out.push('~');
        for shift in [12, 6, 0] {
            out.push((((n >> shift) & 63) as u8 + 63) as char);
        }
    } else {
        out.push_str("~~");
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push((((n >> shift) & 63) as u8 + 63) as char);
        }
    }
}

/// Encodes `g` as a single graph6 line without a trailing newline.
pub fn encode(g: &Graph) -> String {
    let n = g.order();
    let bits = n * (n - 1) / 2;
    let mut out = String::with_capacity(8 + bits.div_ceil(6));
    encode_order(n, &mut out);
    let mut acc = 0u8;
    let mut filled = 0;
    for v in 1..n {
        for u in 0..v {
            acc = (acc << 1) | g.has_edge(u, v) as u8;
            filled += 1;
            if filled == 6 {
                out.push((acc + 63) as char);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push(((acc << (6 - filled)) + 63) as char);
    }
    out
}

fn sextet(bytes: &[u8], offset: usize) -> Result<usize, Graph6Error> {
    let b = bytes[offset];
    if !(63..=126).contains(&b) {
        return Err(Graph6Error::InvalidByte { byte: b, offset });
    }
    Ok((b - 63) as usize)
}

fn decode_order(bytes: &[u8]) -> Result<(usize, usize), Graph6Error> {
    let read = |len: usize, start: usize| -> Result<usize, Graph6Error> {
        if bytes.len() < start + len {
            return Err(Graph6Error::MalformedHeader);
        }
        (start..start + len).try_fold(0usize, |acc, i| {
            let s = sextet(bytes, i).map_err(|_| Graph6Error::MalformedHeader)?;
            Ok((acc << 6) | s)
        })
    };
    match bytes[0] {
        b'~' if bytes.get(1) == Some(&b'~') => Ok((read(6, 2)?, 8)),
        b'~' => Ok((read(3, 1)?, 4)),
        b if (63..=125).contains(&b) => Ok(((b - 63) as usize, 1)),
        _ => Err(Graph6Error::MalformedHeader),
    }
}

/// Parses one graph6 line. Surrounding whitespace and an optional
/// `>>graph6<<` prefix are accepted.
pub fn decode(text: &str) -> Result<Graph, Graph6Error> {
    let text = text.trim();
    let text = text.strip_prefix(">>graph6<<").unwrap_or(text);
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::Empty);
    }
    let (n, header_len) = decode_order(bytes)?;
    if n > MAX_VERTICES {
        return Err(GraphError::TooManyVertices(n).into());
    }
    let mut g = Graph::new(n)?;
    let bits = n * (n - 1) / 2;
    let expected = bits.div_ceil(6);
    let payload = &bytes[header_len..];
    if payload.len() < expected {
        return Err(Graph6Error::Truncated { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(Graph6Error::SizeMismatch { n, expected, found: payload.len() });
    }
    let mut k = 0;
    for v in 1..n {
        for u in 0..v {
            let chunk = sextet(bytes, header_len + k / 6)?;
            if (chunk >> (5 - k % 6)) & 1 == 1 {
                g.toggle(g.edge(u, v)?);
            }
            k += 1;
        }
    }
    if bits % 6 != 0 {
        let last = sextet(bytes, header_len + expected - 1)?;
        if last & ((1 << (6 - bits % 6)) - 1) != 0 {
            return Err(Graph6Error::NonZeroPadding(n));
        }
    }
    Ok(g)
}

/// Reads every non-blank line as a graph6 graph.
pub fn read_all<R: BufRead>(reader: R) -> Result<Vec<Graph>, Graph6Error> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Graph6Error::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let g = decode(&line).map_err(|e| Graph6Error::AtLine { line: i + 1, source: Box::new(e) })?;
        out.push(g);
    }
    Ok(out)
}
