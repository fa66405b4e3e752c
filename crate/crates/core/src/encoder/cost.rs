//! Minimal descriptive cost over admissible encodings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Classifier, DiscreteHistory};
use crate::cost::LocalCost;
use crate::grammar::Grammar;
use crate::{Error, Result};

/// Smooth local cost plus a constant offset per syntactic type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub local_cost: LocalCost,
    #[serde(default)]
    pub per_type_offsets: BTreeMap<String, f64>,
}

impl CostSpec {
    pub fn new(local_cost: LocalCost) -> Self {
        Self { local_cost, per_type_offsets: BTreeMap::new() }
    }

    pub fn with_offset(mut self, segment_type: impl Into<String>, offset: f64) -> Self {
        self.per_type_offsets.insert(segment_type.into(), offset);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("cost spec: {e}")))?;
        spec.local_cost.validate()?;
        if spec.per_type_offsets.values().any(|o| !(*o >= 0.0)) {
            return Err(Error::InvalidInput("per-type offsets must be nonnegative".into()));
        }
        Ok(spec)
    }

    /// `l_loc(a, b) + offset(type)`; negative values are rejected.
    pub fn segment_cost(&self, a: &[f64], b: &[f64], segment_type: &str) -> Result<f64> {
        let offset = self.per_type_offsets.get(segment_type).copied().unwrap_or(0.0);
        let cost = self.local_cost.value(a, b) + offset;
        if !(cost >= 0.0) {
            return Err(Error::InvalidInput(format!("local cost {cost} is negative or undefined")));
        }
        Ok(cost)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alternative {
    pub segment_type: String,
    pub raw_length: usize,
    pub cost: f64,
}

impl Alternative {
    pub fn new(segment_type: impl Into<String>, raw_length: usize, cost: f64) -> Self {
        Self { segment_type: segment_type.into(), raw_length, cost }
    }
}

/// Per-segment alternatives, in segment order.
pub type EncodingChoice = Vec<Vec<Alternative>>;

/// Costs every admissible `(segment, type)` pair.
pub fn encoding_choices(
    history: &DiscreteHistory,
    grammar: &Grammar,
    cost: &CostSpec,
    classifier: &Classifier,
) -> Result<EncodingChoice> {
    history
        .segments()
        .map(|(a, b)| {
            classifier
                .admissible(a, b)
                .into_iter()
                .filter_map(|t| grammar.header(t))
                .map(|(_, def)| {
                    Ok(Alternative::new(
                        &def.segment_type,
                        def.segment_length(),
                        cost.segment_cost(a, b, &def.segment_type)?,
                    ))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalCost {
    pub total: f64,
    pub choices: Vec<Alternative>,
    /// Raw length of the program realizing the minimum.
    pub raw_length: usize,
}

/// Segment-local minimization. Ties go to the smallest type label.
pub fn minimize(choices: &[Vec<Alternative>]) -> Result<MinimalCost> {
    if choices.is_empty() {
        return Err(Error::InvalidInput("history has no segments".into()));
    }
    let mut picked = Vec::with_capacity(choices.len());
    for (k, alts) in choices.iter().enumerate() {
        let best = alts
            .iter()
            .min_by(|x, y| x.cost.total_cmp(&y.cost).then_with(|| x.segment_type.cmp(&y.segment_type)))
            .ok_or(Error::A4Violation { segment: k })?;
        picked.push(best.clone());
    }
    Ok(MinimalCost {
        total: picked.iter().map(|a| a.cost).sum(),
        raw_length: picked.iter().map(|a| a.raw_length).sum(),
        choices: picked,
    })
}

/// `l[x] = min over programs generating x`.
pub fn minimal_cost(
    history: &DiscreteHistory,
    grammar: &Grammar,
    cost: &CostSpec,
    classifier: &Classifier,
) -> Result<MinimalCost> {
    minimize(&encoding_choices(history, grammar, cost, classifier)?)
}

/// `A^{-1} |p| <= l <= A |p|`.
pub fn within_sandwich(constant: f64, raw_length: usize, cost: f64) -> bool {
    let p = raw_length as f64;
    p / constant <= cost && cost <= constant * p
}

/// Smallest `A` for which every `(raw_length, cost)` pair satisfies the sandwich.
pub fn sandwich_constant(pairs: &[(usize, f64)]) -> f64 {
    pairs
        .iter()
        .map(|&(p, l)| {
            let p = p as f64;
            (l / p).max(p / l)
        })
        .fold(1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alts(costs: &[&[f64]]) -> EncodingChoice {
        costs
            .iter()
            .map(|seg| seg.iter().enumerate().map(|(i, &c)| Alternative::new(format!("t{i}"), 3, c)).collect())
            .collect()
    }

    fn exhaustive(costs: &[&[f64]]) -> f64 {
        let mut best = f64::INFINITY;
        let total: usize = costs.iter().map(|c| c.len()).product();
        for mut code in 0..total {
            let mut sum = 0.0;
            for seg in costs {
                sum += seg[code % seg.len()];
                code /= seg.len();
            }
            best = best.min(sum);
        }
        best
    }

    #[test]
    fn minimal_cost_matches_exhaustive_search() {
        let costs: [&[f64]; 3] = [&[3.0, 5.0], &[2.0, 2.0], &[4.0]];
        assert_eq!(exhaustive(&costs), 9.0);
        let m = minimize(&alts(&costs)).unwrap();
        assert_eq!(m.total, 9.0);
        assert_eq!(m.raw_length, 9);
    }

    #[test]
    fn ties_break_to_smallest_type() {
        let m = minimize(&alts(&[&[2.0, 2.0]])).unwrap();
        assert_eq!(m.choices[0].segment_type, "t0");
        let reversed = vec![vec![Alternative::new("t1", 1, 2.0), Alternative::new("t0", 1, 2.0)]];
        assert_eq!(minimize(&reversed).unwrap().choices[0].segment_type, "t0");
    }

    #[test]
    fn single_alternative_is_plain_sum() {
        assert_eq!(minimize(&alts(&[&[1.5], &[2.5], &[0.25]])).unwrap().total, 4.25);
    }

    #[test]
    fn empty_segment_alternatives_violate_a4() {
        let choices = vec![vec![Alternative::new("a", 1, 1.0)], vec![]];
        assert_eq!(minimize(&choices).unwrap_err(), Error::A4Violation { segment: 1 });
        assert!(minimize(&[]).is_err());
    }

    #[test]
    fn sandwich() {
        assert!(within_sandwich(2.0, 9, 9.0));
        assert!(within_sandwich(2.0, 9, 4.5));
        assert!(!within_sandwich(2.0, 9, 4.4));
        assert_eq!(sandwich_constant(&[(4, 8.0), (10, 5.0)]), 2.0);
    }
}
