//! Junk-sector constraint automata and exact string counting.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Symbol;
use crate::numeric::{ln_big, ratio_to_f64};
use crate::{Error, Result};

/// Relative tolerance of the power iteration for the growth rate.
pub const GAMMA_TOLERANCE: f64 = 1e-12;
const POWER_ITERATION_LIMIT: usize = 2_000_000;

/// JSON form of a junk rule: transitions are `[from, symbol, to]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunkRuleSpec {
    /// Junk alphabet; defaults to the grammar alphabet when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<usize>,
    pub states: usize,
    pub start: usize,
    pub transitions: Vec<[usize; 3]>,
}

/// A deterministic constraint automaton. Every state accepts, so the
/// admissible strings are exactly the label sequences of paths from `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct JunkRule {
    alphabet_size: usize,
    start: usize,
    table: Vec<Vec<Option<usize>>>,
}

impl JunkRule {
    pub fn new(alphabet_size: usize, states: usize, start: usize, transitions: &[[usize; 3]]) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::InvalidGrammar("junk alphabet needs at least 2 symbols".into()));
        }
        if states == 0 || start >= states {
            return Err(Error::InvalidGrammar(format!("start state {start} not among {states} states")));
        }
        let mut table = vec![vec![None; alphabet_size]; states];
        for &[from, symbol, to] in transitions {
            if from >= states || to >= states || symbol >= alphabet_size {
                return Err(Error::InvalidGrammar(format!("transition ({from}, {symbol}, {to}) out of range")));
            }
            if table[from][symbol].replace(to).is_some() {
                return Err(Error::InvalidGrammar(format!(
                    "nondeterministic transition from state {from} on symbol {symbol}"
                )));
            }
        }
        Ok(Self { alphabet_size, start, table })
    }

    pub fn from_spec(spec: &JunkRuleSpec, default_alphabet: usize) -> Result<Self> {
        Self::new(spec.alphabet_size.unwrap_or(default_alphabet), spec.states, spec.start, &spec.transitions)
    }

    pub fn to_spec(&self) -> JunkRuleSpec {
        let mut transitions = Vec::new();
        for (from, row) in self.table.iter().enumerate() {
            for (symbol, to) in row.iter().enumerate() {
                if let Some(to) = to {
                    transitions.push([from, symbol, *to]);
                }
            }
        }
        JunkRuleSpec {
            alphabet_size: Some(self.alphabet_size),
            states: self.table.len(),
            start: self.start,
            transitions,
        }
    }

    /// All strings over a `b`-symbol alphabet.
    pub fn unconstrained(alphabet_size: usize) -> Self {
        let transitions: Vec<[usize; 3]> = (0..alphabet_size).map(|s| [0, s, 0]).collect();
        Self::new(alphabet_size, 1, 0, &transitions).expect("valid unconstrained rule")
    }

    /// Binary strings without two consecutive 1s (Fibonacci growth).
    pub fn no_consecutive_ones() -> Self {
        Self::new(2, 2, 0, &[[0, 0, 0], [0, 1, 1], [1, 0, 0]]).expect("valid Fibonacci rule")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn state_count(&self) -> usize {
        self.table.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn step(&self, state: usize, symbol: Symbol) -> Option<usize> {
        self.table.get(state)?.get(symbol as usize).copied().flatten()
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        let mut state = self.start;
        for &s in word {
            match self.step(state, s) {
                Some(next) => state = next,
                None => return false,
            }
        }
        true
    }

    /// Exact number of admissible strings of length exactly `length`.
    pub fn count_strings(&self, length: usize) -> BigUint {
        self.counts_up_to(length).pop().expect("nonempty counts")
    }

    /// `N(0), N(1), ..., N(max_length)` by dynamic programming over states.
    pub fn counts_up_to(&self, max_length: usize) -> Vec<BigUint> {
        let n = self.table.len();
        let mut by_state = vec![BigUint::zero(); n];
        by_state[self.start] = BigUint::one();
        let mut counts = Vec::with_capacity(max_length + 1);
        counts.push(BigUint::one());
        for _ in 0..max_length {
            let mut next = vec![BigUint::zero(); n];
            for (from, row) in self.table.iter().enumerate() {
                if by_state[from].is_zero() {
                    continue;
                }
                for to in row.iter().flatten() {
                    next[*to] += &by_state[from];
                }
            }
            by_state = next;
            counts.push(by_state.iter().sum());
        }
        counts
    }

    /// Exact `sum_{L <= max_length} N(L)` with the geometric comparator.
    pub fn junk_cumulative(&self, max_length: usize) -> Result<JunkCumulative> {
        let exact: BigUint = self.counts_up_to(max_length).into_iter().sum();
        let growth = self.growth_rate()?;
        let g = growth.gamma;
        let ln_approx = (max_length as f64 + 1.0) * growth.lambda - (g - 1.0).ln();
        let approx = ln_approx.exp();
        let relative_deviation = (ln_approx - ln_big(&exact)).exp_m1().abs();
        Ok(JunkCumulative { max_length, exact, approx, relative_deviation })
    }

    fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.table.len()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(s) = stack.pop() {
            for to in self.table[s].iter().flatten() {
                if !seen[*to] {
                    seen[*to] = true;
                    stack.push(*to);
                }
            }
        }
        (0..self.table.len()).filter(|&s| seen[s]).collect()
    }

    /// Transfer matrix `T[i][j]` = number of symbols leading from `i` to `j`.
    pub fn transfer_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.table.len();
        let mut t = vec![vec![0u64; n]; n];
        for (from, row) in self.table.iter().enumerate() {
            for to in row.iter().flatten() {
                t[from][*to] += 1;
            }
        }
        t
    }

    /// Spectral radius of the transfer matrix on the reachable states.
    ///
    /// Power iteration runs on `T + I`, which shares the Perron vector of `T`
    /// but is aperiodic, so periodic automata converge too.
    pub fn growth_rate(&self) -> Result<GrowthRate> {
        let states = self.reachable();
        let index: std::collections::HashMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let full = self.transfer_matrix();
        let m = states.len();
        let mut t = vec![vec![0.0f64; m]; m];
        for (i, &s) in states.iter().enumerate() {
            for (&to, &j) in &index {
                t[i][j] = full[s][to] as f64;
            }
        }

        let mut v = vec![1.0 / m as f64; m];
        let mut estimate = 0.0;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < POWER_ITERATION_LIMIT {
            iterations += 1;
            let mut w: Vec<f64> = (0..m).map(|i| v[i] + (0..m).map(|j| t[i][j] * v[j]).sum::<f64>()).collect();
            let norm: f64 = w.iter().sum();
            let next = norm - 1.0;
            w.iter_mut().for_each(|x| *x /= norm);
            let delta = (next - estimate).abs();
            estimate = next;
            v = w;
            if delta <= GAMMA_TOLERANCE * next.abs().max(1.0) && iterations > 2 {
                converged = true;
                break;
            }
        }
        if estimate <= 1.0 + GAMMA_TOLERANCE {
            return Err(Error::DegenerateGrammar { gamma: estimate });
        }
        Ok(GrowthRate { gamma: estimate, lambda: estimate.ln(), iterations, converged })
    }

    /// `ln N(L+1) - ln N(L)`, the finite-length estimate of `ln gamma`.
    pub fn log_growth_at(&self, length: usize) -> f64 {
        let counts = self.counts_up_to(length + 1);
        ratio_to_f64(&counts[length + 1], &counts[length]).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRate {
    pub gamma: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunkCumulative {
    pub max_length: usize,
    pub exact: BigUint,
    /// `gamma^{L_max + 1} / (gamma - 1)`.
    pub approx: f64,
    pub relative_deviation: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(rule: &JunkRule, length: usize) -> u64 {
        let b = rule.alphabet_size();
        let total = (b as u64).pow(length as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                let word: Vec<Symbol> = (0..length)
                    .map(|_| {
                        let s = (c % b as u64) as Symbol;
                        c /= b as u64;
                        s
                    })
                    .collect();
                rule.accepts(&word)
            })
            .count() as u64
    }

    #[test]
    fn unconstrained_counts() {
        assert_eq!(JunkRule::unconstrained(2).count_strings(10), BigUint::from(1024u32));
        assert_eq!(JunkRule::unconstrained(3).count_strings(4), BigUint::from(81u32));
        assert_eq!(JunkRule::unconstrained(5).count_strings(0), BigUint::one());
    }

    #[test]
    fn fibonacci_length_five_is_thirteen() {
        let rule = JunkRule::no_consecutive_ones();
        assert_eq!(brute_force(&rule, 5), 13);
        assert_eq!(rule.count_strings(5), BigUint::from(13u32));
    }

    #[test]
    fn dp_matches_enumeration_up_to_twelve() {
        let rules = [
            JunkRule::unconstrained(2),
            JunkRule::unconstrained(3),
            JunkRule::no_consecutive_ones(),
            // ternary, symbol 2 must be followed by 0
            JunkRule::new(3, 2, 0, &[[0, 0, 0], [0, 1, 0], [0, 2, 1], [1, 0, 0]]).unwrap(),
        ];
        for rule in &rules {
            let counts = rule.counts_up_to(12);
            for (len, count) in counts.iter().enumerate() {
                assert_eq!(*count, BigUint::from(brute_force(rule, len)), "L = {len}");
            }
        }
    }

    #[test]
    fn growth_rates() {
        let g = JunkRule::unconstrained(2).growth_rate().unwrap();
        assert!((g.gamma - 2.0).abs() < 1e-12);
        assert!((g.lambda - std::f64::consts::LN_2).abs() < 1e-12);
        let g = JunkRule::unconstrained(3).growth_rate().unwrap();
        assert!((g.gamma - 3.0).abs() < 1e-12);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let g = JunkRule::no_consecutive_ones().growth_rate().unwrap();
        assert!((g.gamma - phi).abs() < 1e-10, "{}", g.gamma);
        assert!(g.converged);
    }

    #[test]
    fn periodic_automaton_converges() {
        // two states alternating, two symbols each way: period 2, gamma = 2
        let rule = JunkRule::new(4, 2, 0, &[[0, 0, 1], [0, 1, 1], [1, 2, 0], [1, 3, 0]]).unwrap();
        let g = rule.growth_rate().unwrap();
        assert!((g.gamma - 2.0).abs() < 1e-10);
    }

    #[test]
    fn single_path_automaton_is_degenerate() {
        let rule = JunkRule::new(2, 1, 0, &[[0, 0, 0]]).unwrap();
        assert!(matches!(rule.growth_rate(), Err(Error::DegenerateGrammar { .. })));
    }

    #[test]
    fn nondeterminism_rejected() {
        assert!(JunkRule::new(2, 2, 0, &[[0, 0, 0], [0, 0, 1]]).is_err());
    }

    #[test]
    fn cumulative_examples() {
        let c = JunkRule::unconstrained(2).junk_cumulative(6).unwrap();
        assert_eq!(c.exact, BigUint::from(127u32));
        assert!((c.approx - 128.0).abs() < 1e-9);
        assert!(c.relative_deviation < 0.01);

        let c = JunkRule::no_consecutive_ones().junk_cumulative(0).unwrap();
        assert_eq!(c.exact, BigUint::one());

        let fib = JunkRule::no_consecutive_ones();
        let oracle: u64 = (0..=5).map(|l| brute_force(&fib, l)).sum();
        assert_eq!(oracle, 1 + 2 + 3 + 5 + 8 + 13);
        assert_eq!(fib.junk_cumulative(5).unwrap().exact, BigUint::from(oracle));
    }

    #[test]
    fn log_growth_cross_check_at_200() {
        let rule = JunkRule::no_consecutive_ones();
        let g = rule.growth_rate().unwrap();
        assert!((rule.log_growth_at(200) - g.lambda).abs() < 1e-6);
    }
}
