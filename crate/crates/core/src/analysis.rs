//! Closed-form IFM probabilities and efficiencies.
//!
//! Port labelling follows [`crate::optics`]: the photon enters the lower port,
//! the bomb sits in the upper arm, and a click at the lower output (`L`) is the
//! interaction-free detection. For the two-coupler interferometer with the bomb
//! present this gives `P(abs) = T₁`, `P(L) = R₁R₂`, `P(U) = R₁T₂`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::math::{self, in_unit};
use crate::optics::{self, ChainBuilder, LossArm, PhotonState};
use crate::{Error, Result};

/// Reflectivities of the two couplers of an Elitzur–Vaidman interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvConfig {
    pub r_bs1: f64,
    pub r_bs2: f64,
}

impl EvConfig {
    pub fn new(r_bs1: f64, r_bs2: f64) -> Result<Self> {
        for (name, value) in [("R_BS1", r_bs1), ("R_BS2", r_bs2)] {
            if !in_unit(value) {
                return Err(Error::Domain {
                    name,
                    value,
                    domain: "[0, 1]",
                });
            }
        }
        Ok(Self { r_bs1, r_bs2 })
    }

    /// Complementary pair `R₂ = T₁`.
    pub fn complementary(r_bs1: f64) -> Result<Self> {
        Self::new(r_bs1, 1.0 - r_bs1)
    }

    /// Whether `T_BS1 = R_BS2` holds to within `tol`.
    pub fn is_complementary(&self, tol: f64) -> bool {
        math::abs((1.0 - self.r_bs1) - self.r_bs2) <= tol
    }
}

/// Outcome probabilities of one photon and the resulting IFM efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfmReport {
    pub p_l: f64,
    pub p_u: f64,
    pub p_abs: f64,
    pub p_loss: f64,
    /// `P(L) / (P(abs) + P(L))`; lost photons are neither conclusive nor explosions.
    pub eta: f64,
}

impl IfmReport {
    pub fn from_probabilities(p_l: f64, p_u: f64, p_abs: f64, p_loss: f64) -> Self {
        let conclusive = p_abs + p_l;
        let eta = if conclusive > 0.0 {
            p_l / conclusive
        } else {
            0.0
        };
        Self {
            p_l,
            p_u,
            p_abs,
            p_loss,
            eta,
        }
    }

    pub fn from_state(state: &PhotonState) -> Self {
        Self::from_probabilities(
            state.p_lower(),
            state.p_upper(),
            state.p_absorbed,
            state.p_lost,
        )
    }

    /// Probability of a successful interaction-free detection, `P(L)`.
    pub fn p_ifm(&self) -> f64 {
        self.p_l
    }

    pub fn total(&self) -> f64 {
        self.p_l + self.p_u + self.p_abs + self.p_loss
    }
}

/// Two-coupler interferometer with a full absorber in the upper arm.
pub fn ev_efficiency(cfg: &EvConfig) -> Result<IfmReport> {
    let cfg = EvConfig::new(cfg.r_bs1, cfg.r_bs2)?;
    let t1 = 1.0 - cfg.r_bs1;
    let t2 = 1.0 - cfg.r_bs2;
    Ok(IfmReport::from_probabilities(
        cfg.r_bs1 * cfg.r_bs2,
        cfg.r_bs1 * t2,
        t1,
        0.0,
    ))
}

/// Lossless N-stage Zeno chain with N−1 full absorbers:
/// `P(L) = cos²ᴺ(π/2N)` and `P(U) = cos²⁽ᴺ⁻¹⁾(π/2N)·sin²(π/2N)`.
pub fn zeno_closed_form(n: usize) -> Result<IfmReport> {
    check_stages(n)?;
    let theta = FRAC_PI_2 / n as f64;
    let r = math::cos(theta) * math::cos(theta);
    let t = math::sin(theta) * math::sin(theta);
    let p_l = math::powi(r, n as i32);
    let p_u = math::powi(r, n as i32 - 1) * t;
    Ok(IfmReport::from_probabilities(
        p_l,
        p_u,
        1.0 - p_l - p_u,
        0.0,
    ))
}

/// Zeno chain probabilities with symmetric per-stage loss.
///
/// Lossless chains use the closed form; lossy chains are propagated through
/// [`optics::build_zeno_circuit`].
pub fn zeno_probabilities(n: usize, loss_per_stage: f64) -> Result<IfmReport> {
    zeno_probabilities_on(n, loss_per_stage, LossArm::Both)
}

/// Same as [`zeno_probabilities`] with the loss confined to `arm`.
pub fn zeno_probabilities_on(n: usize, loss_per_stage: f64, arm: LossArm) -> Result<IfmReport> {
    check_stages(n)?;
    if !(0.0..1.0).contains(&loss_per_stage) {
        return Err(Error::Domain {
            name: "loss per stage",
            value: loss_per_stage,
            domain: "[0, 1)",
        });
    }
    if loss_per_stage == 0.0 {
        return zeno_closed_form(n);
    }
    zeno_propagated(n, loss_per_stage, arm)
}

/// Zeno chain probabilities computed only through the matrix engine.
pub fn zeno_propagated(n: usize, loss_per_stage: f64, arm: LossArm) -> Result<IfmReport> {
    let circuit = ChainBuilder::zeno(n)?
        .absorbers(true)
        .loss(loss_per_stage, arm)
        .build()?;
    let out = optics::propagate(PhotonState::lower_input(), &circuit)?;
    Ok(IfmReport::from_state(&out))
}

/// [`zeno_probabilities`] over a list of chain lengths, ordered by `N`.
pub fn efficiency_curve(stages: &[usize], loss_per_stage: f64) -> Result<Vec<(usize, IfmReport)>> {
    efficiency_curve_on(stages, loss_per_stage, LossArm::Both)
}

pub fn efficiency_curve_on(
    stages: &[usize],
    loss_per_stage: f64,
    arm: LossArm,
) -> Result<Vec<(usize, IfmReport)>> {
    let mut sorted = stages.to_vec();
    sorted.sort_unstable();
    sorted
        .into_iter()
        .map(|n| Ok((n, zeno_probabilities_on(n, loss_per_stage, arm)?)))
        .collect()
}

fn check_stages(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain {
            name: "number of couplers",
            value: n as f64,
            domain: ">= 2",
        });
    }
    Ok(())
}
