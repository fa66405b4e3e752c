//! Prefix-free, boundary-delimited generative grammars.
//!
//! A program is a concatenation of segments `h(s_1) q_1 h(s_2) q_2 ...`
//! where every header `h` comes from a prefix-free codeword set and every
//! payload `q` has a fixed length over a payload alphabet that cannot spell
//! any header. The junk sector is a separate regular language given by a
//! [`JunkRule`]; its alphabet may differ from the core alphabet.

mod ambiguity;
mod automaton;
mod code;
mod decode;

pub use ambiguity::{all_parses, dual_parse, DualParseReport, EmbeddedMarker, Parse};
pub use automaton::{GrowthRate, JunkCumulative, JunkRule, JunkRuleSpec, GAMMA_TOLERANCE};
pub use code::{check_prefix_free, find_embedding, kraft_sum, Embedding, KraftSum, PrefixCheck};
pub use decode::{decode_stream, InstrumentedSource, Segment, SegmentList, SliceSource, StreamDecoder, SymbolSource};

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Symbol = u8;

/// Largest alphabet expressible with the `0-9a-z` symbol spelling.
pub const MAX_ALPHABET: usize = 36;

/// Parses `0-9` then `a-z` into symbols `0..36`.
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .enumerate()
        .map(|(i, ch)| {
            ch.to_digit(36)
                .map(|d| d as Symbol)
                .ok_or_else(|| Error::InvalidInput(format!("character {ch:?} at {i} is not a symbol")))
        })
        .collect()
}

pub fn format_symbols(symbols: &[Symbol]) -> String {
    symbols.iter().map(|&s| std::char::from_digit(s as u32, 36).unwrap_or('?')).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderDef {
    pub codeword: Vec<Symbol>,
    pub segment_type: String,
    pub payload_length: usize,
    /// Sorted, deduplicated.
    pub payload_alphabet: Vec<Symbol>,
}

impl HeaderDef {
    pub fn new(
        codeword: Vec<Symbol>,
        segment_type: impl Into<String>,
        payload_length: usize,
        payload_alphabet: &[Symbol],
    ) -> Self {
        let set: BTreeSet<Symbol> = payload_alphabet.iter().copied().collect();
        Self {
            codeword,
            segment_type: segment_type.into(),
            payload_length,
            payload_alphabet: set.into_iter().collect(),
        }
    }

    pub fn segment_length(&self) -> usize {
        self.codeword.len() + self.payload_length
    }
}

/// On-disk grammar description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarSpec {
    pub alphabet_size: usize,
    pub headers: Vec<HeaderSpec>,
    pub junk_rule: JunkRuleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderSpec {
    pub codeword: String,
    #[serde(rename = "type")]
    pub segment_type: String,
    pub payload_length: usize,
    /// Defaults to every symbol not used by any header codeword.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_alphabet: Option<String>,
}

impl GrammarSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidGrammar(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Header definitions without any well-formedness checks.
    pub fn header_defs(&self) -> Result<Vec<HeaderDef>> {
        let used: BTreeSet<Symbol> = self
            .headers
            .iter()
            .map(|h| parse_symbols(&h.codeword))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let default_payload: Vec<Symbol> =
            (0..self.alphabet_size.min(MAX_ALPHABET) as Symbol).filter(|s| !used.contains(s)).collect();
        self.headers
            .iter()
            .map(|h| {
                let payload = match &h.payload_alphabet {
                    Some(text) => parse_symbols(text)?,
                    None => default_payload.clone(),
                };
                Ok(HeaderDef::new(parse_symbols(&h.codeword)?, h.segment_type.clone(), h.payload_length, &payload))
            })
            .collect()
    }
}

/// A validated grammar. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Grammar {
    alphabet_size: usize,
    headers: Vec<HeaderDef>,
    junk_rule: JunkRule,
}

impl Grammar {
    pub fn new(alphabet_size: usize, headers: Vec<HeaderDef>, junk_rule: JunkRule) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&alphabet_size) {
            return Err(Error::InvalidGrammar(format!("alphabet size {alphabet_size} outside 2..={MAX_ALPHABET}")));
        }
        let codewords: Vec<Vec<Symbol>> = headers.iter().map(|h| h.codeword.clone()).collect();
        for (i, h) in headers.iter().enumerate() {
            if h.codeword.is_empty() {
                return Err(Error::InvalidGrammar(format!("header {i} has an empty codeword")));
            }
            let out_of_range = h.codeword.iter().chain(&h.payload_alphabet).any(|&s| s as usize >= alphabet_size);
            if out_of_range {
                return Err(Error::InvalidGrammar(format!("header {i} uses symbols outside the alphabet")));
            }
            if h.payload_length > 0 && h.payload_alphabet.is_empty() {
                return Err(Error::InvalidGrammar(format!("header {i} has a payload but no payload alphabet")));
            }
            if headers[..i].iter().any(|o| o.segment_type == h.segment_type) {
                return Err(Error::InvalidGrammar(format!("duplicate segment type {:?}", h.segment_type)));
            }
        }
        if let PrefixCheck::Violation { prefix, word } = check_prefix_free(&codewords)? {
            return Err(Error::InvalidGrammar(format!("header {prefix} is a prefix of {word}")));
        }
        if let Some(e) = find_embedding(&headers) {
            return Err(Error::InvalidGrammar(format!(
                "header {} can occur inside a payload of type {}",
                e.header, e.payload_type
            )));
        }
        Ok(Self { alphabet_size, headers, junk_rule })
    }

    pub fn from_spec(spec: &GrammarSpec) -> Result<Self> {
        let junk = JunkRule::from_spec(&spec.junk_rule, spec.alphabet_size)?;
        Self::new(spec.alphabet_size, spec.header_defs()?, junk)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_spec(&GrammarSpec::load(path)?)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn headers(&self) -> &[HeaderDef] {
        &self.headers
    }

    pub fn junk_rule(&self) -> &JunkRule {
        &self.junk_rule
    }

    pub fn header(&self, segment_type: &str) -> Option<(usize, &HeaderDef)> {
        self.headers.iter().enumerate().find(|(_, h)| h.segment_type == segment_type)
    }

    pub fn codewords(&self) -> Vec<Vec<Symbol>> {
        self.headers.iter().map(|h| h.codeword.clone()).collect()
    }

    pub fn kraft_sum(&self) -> KraftSum {
        kraft_sum(&self.codewords(), self.alphabet_size)
    }
}
