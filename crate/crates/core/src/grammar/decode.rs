//! One-pass, lookahead-free program decoding.

use serde::Serialize;

use super::{format_symbols, Grammar, Symbol};
use crate::{Error, Result};

/// A pull-based symbol stream. Decoders only ever ask for the next symbol.
pub trait SymbolSource {
    fn next_symbol(&mut self) -> Option<Symbol>;
}

#[derive(Debug, Clone)]
pub struct SliceSource<'a> {
    data: &'a [Symbol],
    pos: usize,
}

impl<'a> SliceSource<'a> {
    pub fn new(data: &'a [Symbol]) -> Self {
        Self { data, pos: 0 }
    }
}

impl SymbolSource for SliceSource<'_> {
    fn next_symbol(&mut self) -> Option<Symbol> {
        let s = self.data.get(self.pos).copied();
        if s.is_some() {
            self.pos += 1;
        }
        s
    }
}

/// Wraps a source and records the highest index handed out.
#[derive(Debug, Clone)]
pub struct InstrumentedSource<S> {
    inner: S,
    delivered: usize,
    max_index: Option<usize>,
}

impl<S: SymbolSource> InstrumentedSource<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, delivered: 0, max_index: None }
    }

    pub fn max_index_read(&self) -> Option<usize> {
        self.max_index
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }
}

impl<S: SymbolSource> SymbolSource for InstrumentedSource<S> {
    fn next_symbol(&mut self) -> Option<Symbol> {
        let s = self.inner.next_symbol();
        if s.is_some() {
            self.max_index = Some(self.delivered);
            self.delivered += 1;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub header: usize,
    pub segment_type: String,
    #[serde(serialize_with = "symbols_as_text")]
    pub payload: Vec<Symbol>,
    pub start: usize,
    pub end: usize,
}

fn symbols_as_text<S: serde::Serializer>(s: &[Symbol], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&format_symbols(s))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SegmentList {
    pub segments: Vec<Segment>,
    pub consumed_length: usize,
}

impl SegmentList {
    /// Re-serializes the segments into the raw program string.
    pub fn to_symbols(&self, grammar: &Grammar) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.consumed_length);
        for seg in &self.segments {
            out.extend_from_slice(&grammar.headers()[seg.header].codeword);
            out.extend_from_slice(&seg.payload);
        }
        out
    }

    pub fn raw_length(&self, grammar: &Grammar) -> usize {
        self.segments.iter().map(|s| grammar.headers()[s.header].codeword.len() + s.payload.len()).sum()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

#[derive(Debug, Clone)]
struct TrieNode {
    children: Vec<Option<usize>>,
    header: Option<usize>,
}

#[derive(Debug, Clone)]
struct HeaderTrie {
    nodes: Vec<TrieNode>,
}

impl HeaderTrie {
    fn build(grammar: &Grammar) -> Self {
        let b = grammar.alphabet_size();
        let mut nodes = vec![TrieNode { children: vec![None; b], header: None }];
        for (h, def) in grammar.headers().iter().enumerate() {
            let mut at = 0;
            for &s in &def.codeword {
                at = match nodes[at].children[s as usize] {
                    Some(next) => next,
                    None => {
                        nodes.push(TrieNode { children: vec![None; b], header: None });
                        let id = nodes.len() - 1;
                        nodes[at].children[s as usize] = Some(id);
                        id
                    }
                };
            }
            nodes[at].header = Some(h);
        }
        Self { nodes }
    }
}

/// Streaming decoder yielding each segment as soon as its last symbol is read.
pub struct StreamDecoder<'g, S> {
    grammar: &'g Grammar,
    trie: HeaderTrie,
    source: S,
    position: usize,
    failed: bool,
}

impl<'g, S: SymbolSource> StreamDecoder<'g, S> {
    pub fn new(grammar: &'g Grammar, source: S) -> Self {
        Self { grammar, trie: HeaderTrie::build(grammar), source, position: 0, failed: false }
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    fn read(&mut self) -> Option<Symbol> {
        let s = self.source.next_symbol();
        if s.is_some() {
            self.position += 1;
        }
        s
    }

    fn next_segment(&mut self) -> Result<Option<Segment>> {
        let start = self.position;
        let mut node = 0;
        let header = loop {
            let Some(sym) = self.read() else {
                if node == 0 {
                    return Ok(None);
                }
                return Err(Error::IncompleteProgram { position: self.position });
            };
            let next = self.trie.nodes[node]
                .children
                .get(sym as usize)
                .copied()
                .flatten()
                .ok_or(Error::ParseError { position: self.position - 1, symbol: sym })?;
            node = next;
            if let Some(h) = self.trie.nodes[node].header {
                break h;
            }
        };
        let def = &self.grammar.headers()[header];
        let mut payload = Vec::with_capacity(def.payload_length);
        for _ in 0..def.payload_length {
            let sym = self.read().ok_or(Error::IncompleteProgram { position: self.position })?;
            if def.payload_alphabet.binary_search(&sym).is_err() {
                return Err(Error::ParseError { position: self.position - 1, symbol: sym });
            }
            payload.push(sym);
        }
        Ok(Some(Segment { header, segment_type: def.segment_type.clone(), payload, start, end: self.position }))
    }
}

impl<S: SymbolSource> Iterator for StreamDecoder<'_, S> {
    type Item = Result<Segment>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_segment() {
            Ok(seg) => seg.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Decodes a whole program in a single forward pass.
pub fn decode_stream(grammar: &Grammar, symbols: &[Symbol]) -> Result<SegmentList> {
    let mut decoder = StreamDecoder::new(grammar, SliceSource::new(symbols));
    let segments = decoder.by_ref().collect::<Result<Vec<_>>>()?;
    Ok(SegmentList { segments, consumed_length: decoder.position() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_symbols, HeaderDef, JunkRule};

    fn two_type_grammar() -> Grammar {
        // a, b, c spelled as symbols 10, 11, 12
        let payload = [10, 11, 12];
        Grammar::new(
            13,
            vec![HeaderDef::new(vec![0], "type0", 2, &payload), HeaderDef::new(vec![1, 0], "type10", 1, &payload)],
            JunkRule::unconstrained(2),
        )
        .unwrap()
    }

    fn complete_binary() -> Grammar {
        Grammar::new(
            2,
            vec![
                HeaderDef::new(vec![0], "a", 0, &[]),
                HeaderDef::new(vec![1, 0], "b", 0, &[]),
                HeaderDef::new(vec![1, 1], "c", 0, &[]),
            ],
            JunkRule::unconstrained(2),
        )
        .unwrap()
    }

    #[test]
    fn decodes_two_segments() {
        let g = two_type_grammar();
        let input = parse_symbols("0ab10c").unwrap();
        let list = decode_stream(&g, &input).unwrap();
        let got: Vec<(&str, String)> =
            list.segments.iter().map(|s| (s.segment_type.as_str(), format_symbols(&s.payload))).collect();
        assert_eq!(got, vec![("type0", "ab".to_string()), ("type10", "c".to_string())]);
        assert_eq!(list.consumed_length, 6);
        assert_eq!(list.to_symbols(&g), input);
    }

    #[test]
    fn empty_input_is_empty_program() {
        let list = decode_stream(&two_type_grammar(), &[]).unwrap();
        assert!(list.is_empty());
        assert_eq!(list.consumed_length, 0);
    }

    #[test]
    fn truncated_header_reports_position() {
        let err = decode_stream(&complete_binary(), &[1]).unwrap_err();
        assert_eq!(err, Error::IncompleteProgram { position: 1 });
    }

    #[test]
    fn truncated_payload_reports_position() {
        let g = two_type_grammar();
        let err = decode_stream(&g, &parse_symbols("0a").unwrap()).unwrap_err();
        assert_eq!(err, Error::IncompleteProgram { position: 2 });
    }

    #[test]
    fn bad_symbols_are_parse_errors() {
        let g = two_type_grammar();
        // header symbol inside payload
        let err = decode_stream(&g, &parse_symbols("0a0").unwrap()).unwrap_err();
        assert_eq!(err, Error::ParseError { position: 2, symbol: 0 });
        // "11" is not a header
        let err = decode_stream(&g, &parse_symbols("11").unwrap()).unwrap_err();
        assert_eq!(err, Error::ParseError { position: 1, symbol: 1 });
    }

    #[test]
    fn segments_are_emitted_without_lookahead() {
        let g = two_type_grammar();
        let input = parse_symbols("10a0bc0cc10b").unwrap();
        let source = InstrumentedSource::new(SliceSource::new(&input));
        let mut decoder = StreamDecoder::new(&g, source);
        let mut ends = Vec::new();
        while let Some(seg) = decoder.next() {
            let seg = seg.unwrap();
            ends.push(seg.end);
            // nothing past the segment's last symbol has been touched
            assert_eq!(decoder.source().max_index_read(), Some(seg.end - 1));
            assert_eq!(decoder.source().delivered(), seg.end);
        }
        assert_eq!(ends, vec![3, 6, 9, 12]);
    }
}
