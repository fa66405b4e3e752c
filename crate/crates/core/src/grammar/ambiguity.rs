//! Exhaustive segmentation used as an oracle against the stream decoder.
//!
//! Works on raw header definitions, so it can inspect grammars that
//! [`Grammar::new`](super::Grammar::new) would reject.

use serde::Serialize;

use super::{HeaderDef, Symbol};

/// One complete segmentation: `(header index, start, end)` per segment.
pub type Parse = Vec<(usize, usize, usize)>;

/// Every way to split `symbols` into header + fixed-length payload segments,
/// stopping once `limit` parses have been found.
pub fn all_parses(headers: &[HeaderDef], symbols: &[Symbol], limit: usize) -> Vec<Parse> {
    let mut found = Vec::new();
    let mut current = Vec::new();
    extend(headers, symbols, 0, limit, &mut current, &mut found);
    found
}

fn extend(
    headers: &[HeaderDef],
    symbols: &[Symbol],
    at: usize,
    limit: usize,
    current: &mut Parse,
    found: &mut Vec<Parse>,
) {
    if found.len() >= limit {
        return;
    }
    if at == symbols.len() {
        found.push(current.clone());
        return;
    }
    for (h, def) in headers.iter().enumerate() {
        let rest = &symbols[at..];
        if !rest.starts_with(&def.codeword) || rest.len() < def.segment_length() {
            continue;
        }
        let payload = &rest[def.codeword.len()..def.segment_length()];
        if !payload.iter().all(|s| def.payload_alphabet.contains(s)) {
            continue;
        }
        let end = at + def.segment_length();
        current.push((h, at, end));
        extend(headers, symbols, end, limit, current, found);
        current.pop();
    }
}

/// A header codeword sitting wholly inside a payload of some parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddedMarker {
    pub segment: usize,
    pub header: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualParseReport {
    /// Number of complete parses, capped at the search limit.
    pub parses: usize,
    pub embedded: Vec<EmbeddedMarker>,
    pub ambiguous: bool,
}

/// Cross-checks a string two ways: by counting grammatical segmentations,
/// and by scanning each payload for header codewords that a context-free
/// boundary reader would mistake for a segment start.
pub fn dual_parse(headers: &[HeaderDef], symbols: &[Symbol]) -> DualParseReport {
    let parses = all_parses(headers, symbols, 2);
    let mut embedded = Vec::new();
    for parse in &parses {
        for (k, &(h, start, end)) in parse.iter().enumerate() {
            let payload_start = start + headers[h].codeword.len();
            for (j, other) in headers.iter().enumerate() {
                let w = other.codeword.len();
                if w == 0 || end - payload_start < w {
                    continue;
                }
                for pos in payload_start..=end - w {
                    if symbols[pos..pos + w] == other.codeword[..] {
                        embedded.push(EmbeddedMarker { segment: k, header: j, position: pos });
                    }
                }
            }
        }
    }
    let ambiguous = parses.len() > 1 || !embedded.is_empty();
    DualParseReport { parses: parses.len(), embedded, ambiguous }
}
