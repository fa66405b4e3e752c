//! Fixed-point payloads and the segment-type classifier.

use serde::{Deserialize, Serialize};

use super::DiscreteHistory;
use crate::grammar::{decode_stream, format_symbols, Grammar, Segment, SegmentList, Symbol};
use crate::{Error, Result};

/// Fixed-point quantizer: `digits` base-`b` digits over the box `[lo, hi]`.
///
/// The base is the size of the payload alphabet of the header being written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub lo: f64,
    pub hi: f64,
    pub digits: u32,
}

impl Quantizer {
    pub fn new(lo: f64, hi: f64, digits: u32) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) || digits == 0 {
            return Err(Error::InvalidInput(format!("bad quantizer box [{lo}, {hi}] with {digits} digits")));
        }
        Ok(Self { lo, hi, digits })
    }

    fn levels(&self, base: usize) -> u64 {
        (base as u64).saturating_pow(self.digits)
    }

    /// Level index of `x`; values within rounding slop of the box saturate.
    pub fn level(&self, x: f64, base: usize) -> Result<u64> {
        let span = self.hi - self.lo;
        let slop = 1e-12 * span.abs().max(1.0);
        if !(x >= self.lo - slop && x <= self.hi + slop) {
            return Err(Error::RangeError { value: x, lo: self.lo, hi: self.hi });
        }
        let top = self.levels(base) - 1;
        if span == 0.0 {
            return Ok(0);
        }
        let k = ((x - self.lo) / span * top as f64).round();
        Ok((k.max(0.0) as u64).min(top))
    }

    pub fn value(&self, level: u64, base: usize) -> f64 {
        let top = self.levels(base) - 1;
        if top == 0 || self.hi == self.lo {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * level as f64 / top as f64
    }

    /// `x` after a round trip through the fixed-point code.
    pub fn quantize(&self, x: f64, base: usize) -> Result<f64> {
        Ok(self.value(self.level(x, base)?, base))
    }

    fn write(&self, x: f64, alphabet: &[Symbol], out: &mut Vec<Symbol>) -> Result<()> {
        let base = alphabet.len();
        let mut level = self.level(x, base)?;
        let start = out.len();
        out.resize(start + self.digits as usize, 0);
        for slot in out[start..].iter_mut().rev() {
            *slot = alphabet[(level % base as u64) as usize];
            level /= base as u64;
        }
        Ok(())
    }

    fn read(&self, digits: &[Symbol], alphabet: &[Symbol]) -> Result<f64> {
        let base = alphabet.len();
        let mut level = 0u64;
        for s in digits {
            let d = alphabet
                .binary_search(s)
                .map_err(|_| Error::InvalidInput(format!("symbol {s} is not a payload digit")))?;
            level = level * base as u64 + d as u64;
        }
        Ok(self.value(level, base))
    }
}

/// Predicate on a segment `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentClass {
    Any,
    Rising {
        #[serde(default)]
        axis: usize,
        #[serde(default)]
        tol: f64,
    },
    Falling {
        #[serde(default)]
        axis: usize,
        #[serde(default)]
        tol: f64,
    },
    Flat {
        #[serde(default)]
        tol: f64,
    },
    /// Euclidean step length strictly above `threshold`.
    StepAbove {
        threshold: f64,
    },
    StepAtMost {
        threshold: f64,
    },
}

impl SegmentClass {
    pub fn matches(&self, a: &[f64], b: &[f64]) -> bool {
        let step = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
        match *self {
            SegmentClass::Any => true,
            SegmentClass::Rising { axis, tol } => b.get(axis).zip(a.get(axis)).is_some_and(|(y, x)| y - x > tol),
            SegmentClass::Falling { axis, tol } => b.get(axis).zip(a.get(axis)).is_some_and(|(y, x)| x - y > tol),
            SegmentClass::Flat { tol } => step <= tol,
            SegmentClass::StepAbove { threshold } => step > threshold,
            SegmentClass::StepAtMost { threshold } => step <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRule {
    pub when: SegmentClass,
    #[serde(rename = "type")]
    pub segment_type: String,
}

/// Ordered predicate table mapping segments to syntactic types.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub rules: Vec<ClassRule>,
}

impl Classifier {
    pub fn new(rules: Vec<ClassRule>) -> Self {
        Self { rules }
    }

    /// Every grammar type admits every segment.
    pub fn permissive(grammar: &Grammar) -> Self {
        Self::new(
            grammar
                .headers()
                .iter()
                .map(|h| ClassRule { when: SegmentClass::Any, segment_type: h.segment_type.clone() })
                .collect(),
        )
    }

    /// First matching rule.
    pub fn classify(&self, a: &[f64], b: &[f64]) -> Option<&str> {
        self.rules.iter().find(|r| r.when.matches(a, b)).map(|r| r.segment_type.as_str())
    }

    /// All matching types, deduplicated, in rule order.
    pub fn admissible(&self, a: &[f64], b: &[f64]) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rules {
            if r.when.matches(a, b) && !out.contains(&r.segment_type.as_str()) {
                out.push(&r.segment_type);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Program {
    #[serde(serialize_with = "as_text")]
    pub symbols: Vec<Symbol>,
    pub segments: SegmentList,
}

fn as_text<S: serde::Serializer>(s: &[Symbol], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&format_symbols(s))
}

impl Program {
    /// `|p| = sum_k (|h_k| + |q_k|)`.
    pub fn raw_length(&self) -> usize {
        self.symbols.len()
    }
}

fn payload_alphabet_checked<'g>(
    grammar: &'g Grammar,
    header: usize,
    dimension: usize,
    q: &Quantizer,
) -> Result<&'g [Symbol]> {
    let def = &grammar.headers()[header];
    let needed = 2 * dimension * q.digits as usize;
    if def.payload_length != needed {
        return Err(Error::InvalidInput(format!(
            "type {} carries {} payload symbols but a segment needs {needed}",
            def.segment_type, def.payload_length
        )));
    }
    if def.payload_alphabet.len() < 2 {
        return Err(Error::InvalidInput(format!("type {} has fewer than 2 payload digits", def.segment_type)));
    }
    Ok(&def.payload_alphabet)
}

/// Writes each segment as its header followed by the quantized endpoints
/// `(x_{k-1}, x_k)`.
pub fn encode(
    history: &DiscreteHistory,
    grammar: &Grammar,
    quantizer: &Quantizer,
    classifier: &Classifier,
) -> Result<Program> {
    let d = history.dimension();
    let mut symbols = Vec::new();
    let mut segments = Vec::with_capacity(history.segment_count());
    for (k, (a, b)) in history.segments().enumerate() {
        let (header, def) = classifier
            .admissible(a, b)
            .into_iter()
            .find_map(|t| grammar.header(t))
            .ok_or(Error::A4Violation { segment: k })?;
        let alphabet = payload_alphabet_checked(grammar, header, d, quantizer)?;
        let start = symbols.len();
        symbols.extend_from_slice(&def.codeword);
        let payload_start = symbols.len();
        for &x in a.iter().chain(b) {
            quantizer.write(x, alphabet, &mut symbols)?;
        }
        segments.push(Segment {
            header,
            segment_type: def.segment_type.clone(),
            payload: symbols[payload_start..].to_vec(),
            start,
            end: symbols.len(),
        });
    }
    let consumed_length = symbols.len();
    Ok(Program { symbols, segments: SegmentList { segments, consumed_length } })
}

/// Decodes a program back to its quantized nodes.
pub fn decode_history(
    grammar: &Grammar,
    quantizer: &Quantizer,
    dimension: usize,
    symbols: &[Symbol],
) -> Result<Vec<Vec<f64>>> {
    let list = decode_stream(grammar, symbols)?;
    let digits = quantizer.digits as usize;
    let mut nodes: Vec<Vec<f64>> = Vec::new();
    for seg in &list.segments {
        let alphabet = payload_alphabet_checked(grammar, seg.header, dimension, quantizer)?;
        let coords: Vec<f64> =
            seg.payload.chunks(digits).map(|c| quantizer.read(c, alphabet)).collect::<Result<_>>()?;
        let (a, b) = coords.split_at(dimension);
        match nodes.last() {
            None => nodes.push(a.to_vec()),
            Some(prev) if prev.as_slice() == a => {}
            Some(_) => {
                return Err(Error::InvalidInput(format!("segment at {} does not continue the history", seg.start)))
            }
        }
        nodes.push(b.to_vec());
    }
    Ok(nodes)
}
