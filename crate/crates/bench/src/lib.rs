//! Shared fixtures for the criterion benchmarks.

use synlab_core::grammar::{Grammar, HeaderDef, JunkRule, Symbol};

/// Three-type grammar over a 6-symbol alphabet with payloads on `{3, 4, 5}`.
pub fn bench_grammar() -> Grammar {
    let payload = [3, 4, 5];
    Grammar::new(
        6,
        vec![
            HeaderDef::new(vec![0], "a", 4, &payload),
            HeaderDef::new(vec![1, 0], "b", 2, &payload),
            HeaderDef::new(vec![1, 1], "c", 6, &payload),
        ],
        JunkRule::no_consecutive_ones(),
    )
    .expect("valid benchmark grammar")
}

/// A program of `segments` segments cycling through the three types.
pub fn bench_program(grammar: &Grammar, segments: usize) -> Vec<Symbol> {
    let mut out = Vec::new();
    for k in 0..segments {
        let def = &grammar.headers()[k % grammar.headers().len()];
        out.extend_from_slice(&def.codeword);
        out.extend((0..def.payload_length).map(|i| def.payload_alphabet[(i + k) % def.payload_alphabet.len()]));
    }
    out
}
