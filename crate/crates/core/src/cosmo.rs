//! Calibration of the descriptive-cost scale against the horizon capacity of
//! a de Sitter universe, in `c = 1` units.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in m/s, used only by the SI adapter.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmoParams {
    pub h0: f64,
    pub g: f64,
    pub hbar: f64,
    #[serde(default = "unit_eta")]
    pub eta: f64,
    pub lambda_syn: f64,
}

fn unit_eta() -> f64 {
    1.0
}

impl CosmoParams {
    pub fn new(h0: f64, g: f64, hbar: f64, eta: f64, lambda_syn: f64) -> Result<Self> {
        let p = Self { h0, g, hbar, eta, lambda_syn };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("H0", self.h0), ("G", self.g), ("hbar", self.hbar), ("Lambda_syn", self.lambda_syn)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} = {v} must be positive and finite")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidInput(format!("eta = {} must lie in (0, 1]", self.eta)));
        }
        Ok(())
    }

    /// SI inputs (H0 in 1/s, G in m^3 kg^-1 s^-2, hbar in J s) expressed with
    /// lengths in light-seconds: `G -> G / c^3`, `hbar -> hbar / c^2`.
    pub fn from_si(h0: f64, g: f64, hbar: f64, eta: f64, lambda_syn: f64) -> Result<Self> {
        let c = SPEED_OF_LIGHT;
        Self::new(h0, g / (c * c * c), hbar / (c * c), eta, lambda_syn)
    }

    /// The same universe with time (and length) measured in units `lambda` times larger.
    pub fn rescale_time(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("time rescaling {lambda} must be positive")));
        }
        Self::new(self.h0 / lambda, self.g * lambda, self.hbar * lambda, self.eta, self.lambda_syn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonCapacity {
    pub r_h: f64,
    pub a_h: f64,
    pub i_holo: f64,
}

/// `I = pi / (G hbar H0^2)`, the horizon area over `4 l_p^2`.
pub fn holographic_capacity(p: &CosmoParams) -> Result<HorizonCapacity> {
    p.validate()?;
    Ok(HorizonCapacity {
        r_h: 1.0 / p.h0,
        a_h: 4.0 * std::f64::consts::PI / (p.h0 * p.h0),
        i_holo: std::f64::consts::PI / (p.g * p.hbar * p.h0 * p.h0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeSitterAction {
    pub beta_ds: f64,
    pub e_u: f64,
    pub s_e_univ: f64,
}

pub fn desitter_action(p: &CosmoParams) -> Result<DeSitterAction> {
    p.validate()?;
    let beta_ds = 2.0 * std::f64::consts::PI / p.h0;
    let e_u = 1.0 / (2.0 * p.g * p.h0);
    Ok(DeSitterAction { beta_ds, e_u, s_e_univ: beta_ds * e_u })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub r_h: f64,
    pub a_h: f64,
    pub i_holo: f64,
    pub beta_ds: f64,
    pub e_u: f64,
    pub s_e_univ: f64,
    pub ell_univ: f64,
    pub alpha: f64,
    /// `hbar / eta`.
    pub hbar_eff: f64,
    /// `1 / (alpha Lambda_syn)`, the same quantity through the chain.
    pub hbar_eff_chain: f64,
    /// `|S_E / (hbar I) - 1|`.
    pub action_identity_error: f64,
    /// `|l_univ / (alpha S_E) - 1|`.
    pub cost_identity_error: f64,
}

pub fn calibrate(p: &CosmoParams) -> Result<CalibrationResult> {
    let cap = holographic_capacity(p)?;
    let ds = desitter_action(p)?;
    let ell_univ = p.eta * cap.i_holo / p.lambda_syn;
    // fixed by l_univ = alpha S_E with the eta-scaled budget; the same value
    // gives hbar_eff = hbar / eta (1 / (eta Lambda hbar) would give eta hbar)
    let alpha = p.eta / (p.lambda_syn * p.hbar);
    Ok(CalibrationResult {
        r_h: cap.r_h,
        a_h: cap.a_h,
        i_holo: cap.i_holo,
        beta_ds: ds.beta_ds,
        e_u: ds.e_u,
        s_e_univ: ds.s_e_univ,
        ell_univ,
        alpha,
        hbar_eff: p.hbar / p.eta,
        hbar_eff_chain: 1.0 / (alpha * p.lambda_syn),
        action_identity_error: (ds.s_e_univ / (p.hbar * cap.i_holo) - 1.0).abs(),
        cost_identity_error: (ell_univ / (alpha * ds.s_e_univ) - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit() -> CosmoParams {
        CosmoParams::new(1.0, 1.0, 1.0, 1.0, 2f64.ln()).unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(holographic_capacity(&unit()).unwrap().i_holo, PI);
        let half = CosmoParams { h0: 0.5, ..unit() };
        assert_eq!(holographic_capacity(&half).unwrap().i_holo, 4.0 * PI);
        let raw = CosmoParams::new(2.2e-18, 6.674e-11, 1.055e-34, 1.0, 1.0).unwrap();
        let i = holographic_capacity(&raw).unwrap().i_holo;
        assert!((i / 9.218618636621432e79 - 1.0).abs() < 1e-14);
        let si = CosmoParams::from_si(2.2e-18, 6.674e-11, 1.055e-34, 1.0, 1.0).unwrap();
        let i = holographic_capacity(&si).unwrap().i_holo;
        assert!((i / 2.2323863777166526e122 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn desitter_examples() {
        let ds = desitter_action(&unit()).unwrap();
        assert_eq!((ds.beta_ds, ds.e_u, ds.s_e_univ), (2.0 * PI, 0.5, PI));
        let low = desitter_action(&CosmoParams { eta: 0.3, ..unit() }).unwrap();
        assert_eq!(low, ds);
    }

    #[test]
    fn calibration_examples() {
        for lambda in [0.1, 2f64.ln(), 7.0] {
            let r = calibrate(&CosmoParams { hbar: 1.7, lambda_syn: lambda, ..unit() }).unwrap();
            assert_eq!(r.hbar_eff, 1.7);
            assert!((r.hbar_eff_chain / 1.7 - 1.0).abs() < 1e-15);
            assert!(r.cost_identity_error < 1e-14);
        }
        let r = calibrate(&CosmoParams { eta: 0.5, hbar: 1.7, ..unit() }).unwrap();
        assert_eq!(r.hbar_eff, 3.4);
    }

    #[test]
    fn invalid_inputs() {
        assert!(CosmoParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(CosmoParams::new(1.0, 1.0, 1.0, 1.5, 1.0).is_err());
        assert!(CosmoParams::new(1.0, 1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn time_rescaling_keeps_dimensionless_ratios() {
        let p = CosmoParams::from_si(2.2e-18, 6.674e-11, 1.055e-34, 0.8, 1.1).unwrap();
        let q = p.rescale_time(3.15e7).unwrap();
        let (a, b) = (calibrate(&p).unwrap(), calibrate(&q).unwrap());
        assert!((a.hbar_eff / p.hbar - b.hbar_eff / q.hbar).abs() < 1e-15);
        assert!((a.i_holo / b.i_holo - 1.0).abs() < 1e-14);
    }
}
