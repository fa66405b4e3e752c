use std::io::Read;

use serde::Serialize;

use crate::{Error, Result};

/// A resolution-`n` history `x_0 .. x_N` with uniform spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteHistory {
    resolution_n: u32,
    step: f64,
    t_start: f64,
    nodes: Vec<Vec<f64>>,
}

impl DiscreteHistory {
    pub fn new(resolution_n: u32, step: f64, nodes: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_start(resolution_n, step, 0.0, nodes)
    }

    pub fn with_start(resolution_n: u32, step: f64, t_start: f64, nodes: Vec<Vec<f64>>) -> Result<Self> {
        if resolution_n == 0 {
            return Err(Error::InvalidTrajectory("resolution must be at least 1".into()));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidTrajectory(format!("step {step} must be positive")));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidTrajectory("a history needs at least one segment".into()));
        }
        let d = nodes[0].len();
        if d == 0 || nodes.iter().any(|n| n.len() != d) {
            return Err(Error::InvalidTrajectory("nodes must share a positive dimension".into()));
        }
        if nodes.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidTrajectory("non-finite node coordinate".into()));
        }
        Ok(Self { resolution_n, step, t_start, nodes })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution_n
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dimension(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Number of segments `N`.
    pub fn segment_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes.len()).map(move |k| self.t_start + k as f64 * self.step)
    }

    /// Segments `s_k = (x_{k-1}, x_k)` in order.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.nodes.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice()))
    }

    /// Joins two histories at a shared endpoint.
    pub fn concat(&self, other: &DiscreteHistory) -> Result<DiscreteHistory> {
        if self.nodes.last() != other.nodes.first() {
            return Err(Error::InvalidTrajectory("histories do not share an endpoint".into()));
        }
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        DiscreteHistory::with_start(self.resolution_n, self.step, self.t_start, nodes)
    }

    /// Reads a CSV with a header row `t, x1, .., xd` and uniformly spaced times.
    pub fn from_csv<R: Read>(reader: R, resolution_n: u32) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut times = Vec::new();
        let mut nodes = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidInput(e.to_string()))?;
            let values: Vec<f64> = record
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("row {}: {e}", line + 1)))?;
            if values.len() < 2 {
                return Err(Error::InvalidInput(format!("row {} needs t and at least one coordinate", line + 1)));
            }
            times.push(values[0]);
            nodes.push(values[1..].to_vec());
        }
        if times.len() < 2 {
            return Err(Error::InvalidTrajectory("history file needs at least two rows".into()));
        }
        let step = times[1] - times[0];
        let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
        if !uniform {
            return Err(Error::InvalidTrajectory("time column is not uniformly spaced".into()));
        }
        Self::with_start(resolution_n, step, times[0], nodes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.dimension() {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (t, node) in self.times().zip(&self.nodes) {
            out.push_str(&t.to_string());
            for x in node {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Samples a trajectory with `2^n` nodes per unit time.
pub fn discretize<F>(trajectory: F, t_start: f64, t_end: f64, resolution_n: u32) -> Result<DiscreteHistory>
where
    F: Fn(f64) -> Vec<f64>,
{
    if !(t_end > t_start) {
        return Err(Error::InvalidTrajectory(format!("empty interval [{t_start}, {t_end}]")));
    }
    if resolution_n == 0 || resolution_n > 40 {
        return Err(Error::InvalidTrajectory(format!("resolution {resolution_n} outside 1..=40")));
    }
    let per_unit = 2f64.powi(resolution_n as i32);
    let segments = ((t_end - t_start) * per_unit - 1e-9).ceil().max(1.0) as usize;
    let step = (t_end - t_start) / segments as f64;
    let nodes: Vec<Vec<f64>> =
        (0..=segments).map(|k| trajectory(if k == segments { t_end } else { t_start + k as f64 * step })).collect();
    if nodes.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidTrajectory("trajectory produced a non-finite sample".into()));
    }
    DiscreteHistory::with_start(resolution_n, step, t_start, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_trajectory_at_resolution_two() {
        let h = discretize(|t| vec![t], 0.0, 1.0, 2).unwrap();
        let xs: Vec<f64> = h.nodes().iter().map(|n| n[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(h.step(), 0.25);
    }

    #[test]
    fn constant_trajectory() {
        let h = discretize(|_| vec![3.0, -1.0], 0.0, 2.0, 1).unwrap();
        assert_eq!(h.segment_count(), 4);
        assert!(h.nodes().iter().all(|n| n == &vec![3.0, -1.0]));
    }

    #[test]
    fn quadratic_trajectory_at_resolution_three() {
        let h = discretize(|t| vec![t * t], 0.0, 1.0, 3).unwrap();
        assert_eq!(h.nodes().len(), 9);
        for (k, n) in h.nodes().iter().enumerate() {
            let expected = (k as f64 / 8.0).powi(2);
            assert!((n[0] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let err = discretize(|t| vec![1.0 / (t - 0.5)], 0.0, 1.0, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidTrajectory(_)));
    }

    #[test]
    fn single_node_is_not_a_history() {
        assert!(DiscreteHistory::new(1, 1.0, vec![vec![0.0]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let h = discretize(|t| vec![t, 1.0 - t], 0.0, 1.0, 2).unwrap();
        let back = DiscreteHistory::from_csv(h.to_csv().as_bytes(), 2).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn concat_requires_shared_endpoint() {
        let a = DiscreteHistory::new(1, 1.0, vec![vec![0.0], vec![1.0]]).unwrap();
        let b = DiscreteHistory::new(1, 1.0, vec![vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(a.concat(&b).unwrap().nodes().len(), 3);
        assert!(b.concat(&b).is_err());
    }
}
