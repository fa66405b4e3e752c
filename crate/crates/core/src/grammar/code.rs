//! Prefix-free and boundary-delimitation checks on header codewords.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{format_symbols, HeaderDef, Symbol};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PrefixCheck {
    Ok,
    /// `prefix` is a (not necessarily strict) prefix of `word`.
    Violation {
        prefix: String,
        word: String,
    },
}

impl PrefixCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PrefixCheck::Ok)
    }
}

/// Checks that no codeword is a prefix of another.
///
/// On failure the lexicographically smallest violating ordered pair
/// `(prefix, word)` is reported. Duplicate codewords count as a violation.
pub fn check_prefix_free(codewords: &[Vec<Symbol>]) -> Result<PrefixCheck> {
    if codewords.is_empty() {
        return Err(Error::InvalidGrammar("header set is empty".into()));
    }
    let mut worst: Option<(&[Symbol], &[Symbol])> = None;
    for (i, p) in codewords.iter().enumerate() {
        for (j, w) in codewords.iter().enumerate() {
            if i == j || !w.starts_with(p) {
                continue;
            }
            let candidate = (p.as_slice(), w.as_slice());
            if worst.is_none_or(|current| candidate < current) {
                worst = Some(candidate);
            }
        }
    }
    Ok(match worst {
        None => PrefixCheck::Ok,
        Some((p, w)) => PrefixCheck::Violation { prefix: format_symbols(p), word: format_symbols(w) },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KraftSum {
    pub sum: BigRational,
    pub complete: bool,
}

/// Exact Kraft sum `sum_h b^{-|h|}`.
pub fn kraft_sum(codewords: &[Vec<Symbol>], alphabet_size: usize) -> KraftSum {
    assert!(alphabet_size >= 2, "kraft_sum: alphabet_size must be at least 2");
    let base = BigInt::from(alphabet_size);
    let mut sum = BigRational::zero();
    for word in codewords {
        let denom = num_traits::pow(base.clone(), word.len());
        sum += BigRational::new(BigInt::one(), denom);
    }
    let complete = sum == BigRational::one();
    KraftSum { sum, complete }
}

/// A header codeword that can be spelled inside some admissible payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub header: String,
    pub payload_type: String,
}

/// Finds the first header that fits inside another type's payload.
///
/// Payloads are arbitrary fixed-length strings over their payload alphabet,
/// so a codeword embeds iff it is no longer than the payload and every one
/// of its symbols is admissible there.
pub fn find_embedding(headers: &[HeaderDef]) -> Option<Embedding> {
    for target in headers {
        for h in headers {
            let fits = h.codeword.len() <= target.payload_length
                && h.codeword.iter().all(|s| target.payload_alphabet.contains(s));
            if fits {
                return Some(Embedding {
                    header: format_symbols(&h.codeword),
                    payload_type: target.segment_type.clone(),
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_symbols;

    fn words(list: &[&str]) -> Vec<Vec<Symbol>> {
        list.iter().map(|w| parse_symbols(w).unwrap()).collect()
    }

    #[test]
    fn complete_binary_code_is_prefix_free() {
        assert_eq!(check_prefix_free(&words(&["0", "10", "11"])).unwrap(), PrefixCheck::Ok);
    }

    #[test]
    fn direct_prefix_is_reported() {
        assert_eq!(
            check_prefix_free(&words(&["0", "01"])).unwrap(),
            PrefixCheck::Violation { prefix: "0".into(), word: "01".into() }
        );
        assert_eq!(
            check_prefix_free(&words(&["101", "10"])).unwrap(),
            PrefixCheck::Violation { prefix: "10".into(), word: "101".into() }
        );
    }

    #[test]
    fn lexicographically_first_pair_wins() {
        let got = check_prefix_free(&words(&["11", "110", "0", "01"])).unwrap();
        assert_eq!(got, PrefixCheck::Violation { prefix: "0".into(), word: "01".into() });
    }

    #[test]
    fn duplicates_violate() {
        assert!(!check_prefix_free(&words(&["10", "10"])).unwrap().is_ok());
    }

    #[test]
    fn empty_header_set_is_rejected() {
        assert!(matches!(check_prefix_free(&[]), Err(Error::InvalidGrammar(_))));
    }

    #[test]
    fn kraft_examples() {
        let one = BigRational::one();
        let k = kraft_sum(&words(&["0", "10", "11"]), 2);
        assert_eq!(k.sum, one);
        assert!(k.complete);
        let k = kraft_sum(&words(&["0", "10"]), 2);
        assert_eq!(k.sum, BigRational::new(3.into(), 4.into()));
        assert!(!k.complete);
        let k = kraft_sum(&words(&["00", "01", "10", "11"]), 2);
        assert!(k.complete);
    }
}
