//! Monte Carlo photon counting with an attenuated laser.
//!
//! Each detector gate receives `k ~ Poisson(μ)` photons. Every photon is routed
//! independently: with probability `tap_ratio` to the monitor detector T, and
//! otherwise through the circuit, leaving at L, at U, in an absorber (an
//! explosion) or to loss with the probabilities of a single-photon propagation.
//! A photon reaching detector X clicks with probability `a_X`. Detectors do not
//! resolve photon number, so each registers at most one click per gate.
//!
//! Gates are grouped in fixed shards of [`SHARD_GATES`]. Shard `i` draws from
//! the ChaCha8 stream `i` of the run seed, so the merged record does not depend
//! on how shards are scheduled.

use core::ops::AddAssign;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::analysis::IfmReport;
use crate::math::{self, in_unit};
use crate::optics::{self, CircuitSpec, PhotonState};
use crate::{Error, Result};

/// Gates per shard.
pub const SHARD_GATES: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub circuit: CircuitSpec,
    /// Mean photon number per gate at the source.
    pub mu: f64,
    pub gates: u64,
    pub a_l: f64,
    pub a_u: f64,
    pub a_t: f64,
    /// Fraction of the source sent to the monitor detector T.
    pub tap_ratio: f64,
    /// Probability of a dark click per detector per gate.
    pub dark_count_prob: f64,
    pub rng_seed: u64,
}

impl ExperimentConfig {
    /// Ideal detectors, `μ = 0.1`, 50/50 monitor tap, 10⁶ gates.
    pub fn new(circuit: CircuitSpec) -> Self {
        Self {
            circuit,
            mu: 0.1,
            gates: 1_000_000,
            a_l: 1.0,
            a_u: 1.0,
            a_t: 1.0,
            tap_ratio: 0.5,
            dark_count_prob: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Domain {
                name: "mu",
                value: self.mu,
                domain: ">= 0",
            });
        }
        if self.gates == 0 {
            return Err(Error::Domain {
                name: "gates",
                value: 0.0,
                domain: ">= 1",
            });
        }
        for (name, value) in [
            ("a_L", self.a_l),
            ("a_U", self.a_u),
            ("a_T", self.a_t),
            ("tap_ratio", self.tap_ratio),
            ("dark_count_prob", self.dark_count_prob),
        ] {
            if !in_unit(value) {
                return Err(Error::Domain {
                    name,
                    value,
                    domain: "[0, 1]",
                });
            }
        }
        self.circuit.validate()
    }

    /// Single-photon outcome probabilities of the circuit for a lower-port input.
    pub fn outcome_probabilities(&self) -> Result<IfmReport> {
        let out = optics::propagate(PhotonState::lower_input(), &self.circuit)?;
        Ok(IfmReport::from_state(&out))
    }
}

/// Click and event tallies of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingRecord {
    pub c_t: u64,
    pub c_l: u64,
    pub c_u: u64,
    /// Photons absorbed by a bomb.
    pub explosions: u64,
    /// Gates in which the source emitted two or more photons.
    pub multi_photon_gates: u64,
    pub gates: u64,
    pub seed: u64,
}

impl AddAssign for CountingRecord {
    fn add_assign(&mut self, rhs: Self) {
        self.c_t += rhs.c_t;
        self.c_l += rhs.c_l;
        self.c_u += rhs.c_u;
        self.explosions += rhs.explosions;
        self.multi_photon_gates += rhs.multi_photon_gates;
        self.gates += rhs.gates;
    }
}

impl CountingRecord {
    /// Mean number of detected photons behind `clicks` binary clicks,
    /// `−G·ln(1 − c/G)`. Inverts the saturation of a non-number-resolving
    /// detector under Poissonian arrivals.
    pub fn photon_estimate(&self, clicks: u64) -> f64 {
        let g = self.gates as f64;
        -g * math::ln_1p(-(clicks as f64) / g)
    }

    pub fn multi_photon_fraction(&self) -> f64 {
        self.multi_photon_gates as f64 / self.gates as f64
    }
}

/// Per-run state shared by all shards.
#[derive(Clone, Debug)]
pub struct GateSimulator {
    source: Option<Poisson<f64>>,
    /// Cumulative thresholds for L, U and absorption; the rest is loss.
    to_l: f64,
    to_u: f64,
    to_abs: f64,
    a_l: f64,
    a_u: f64,
    a_t: f64,
    tap: f64,
    dark: f64,
    gates: u64,
    seed: u64,
}

impl GateSimulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let p = config.outcome_probabilities()?;
        let source = if config.mu > 0.0 {
            Some(Poisson::new(config.mu).map_err(|_| Error::Domain {
                name: "mu",
                value: config.mu,
                domain: "valid Poisson mean",
            })?)
        } else {
            None
        };
        Ok(Self {
            source,
            to_l: p.p_l,
            to_u: p.p_l + p.p_u,
            to_abs: p.p_l + p.p_u + p.p_abs,
            a_l: config.a_l,
            a_u: config.a_u,
            a_t: config.a_t,
            tap: config.tap_ratio,
            dark: config.dark_count_prob,
            gates: config.gates,
            seed: config.rng_seed,
        })
    }

    pub fn shard_count(&self) -> u64 {
        self.gates.div_ceil(SHARD_GATES)
    }

    /// Runs shard `index` and returns its partial record.
    pub fn simulate_shard(&self, index: u64) -> CountingRecord {
        let start = index * SHARD_GATES;
        let n = SHARD_GATES.min(self.gates.saturating_sub(start));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut rec = CountingRecord {
            gates: n,
            seed: self.seed,
            ..CountingRecord::default()
        };
        let Some(source) = self.source.as_ref() else {
            if self.dark > 0.0 {
                for _ in 0..n {
                    self.dark_clicks(&mut rng, [false; 3], &mut rec);
                }
            }
            return rec;
        };
        for _ in 0..n {
            let k = source.sample(&mut rng) as u64;
            if k >= 2 {
                rec.multi_photon_gates += 1;
            }
            // [T, L, U]
            let mut clicked = [false; 3];
            for _ in 0..k {
                if rng.random::<f64>() < self.tap {
                    clicked[0] |= rng.random::<f64>() < self.a_t;
                    continue;
                }
                let u: f64 = rng.random();
                if u < self.to_l {
                    clicked[1] |= rng.random::<f64>() < self.a_l;
                } else if u < self.to_u {
                    clicked[2] |= rng.random::<f64>() < self.a_u;
                } else if u < self.to_abs {
                    rec.explosions += 1;
                }
            }
            self.dark_clicks(&mut rng, clicked, &mut rec);
        }
        rec
    }

    fn dark_clicks(&self, rng: &mut ChaCha8Rng, mut clicked: [bool; 3], rec: &mut CountingRecord) {
        if self.dark > 0.0 {
            for c in &mut clicked {
                *c |= rng.random::<f64>() < self.dark;
            }
        }
        rec.c_t += clicked[0] as u64;
        rec.c_l += clicked[1] as u64;
        rec.c_u += clicked[2] as u64;
    }
}

/// Runs every shard sequentially. Deterministic given the config.
pub fn run_counting(config: &ExperimentConfig) -> Result<CountingRecord> {
    let sim = GateSimulator::new(config)?;
    let mut rec = CountingRecord {
        seed: config.rng_seed,
        ..CountingRecord::default()
    };
    for shard in 0..sim.shard_count() {
        rec += sim.simulate_shard(shard);
    }
    Ok(rec)
}

/// `1 − (1 + μ)e^{−μ}`: probability of two or more photons in a gate.
pub fn multi_photon_probability(mu: f64) -> f64 {
    1.0 - (1.0 + mu) * math::exp(-mu)
}

/// A measured or calibrated quantity with its one-sigma uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub const fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub const fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

/// Efficiency estimate with its first-order propagated uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub eta: f64,
    pub sigma: f64,
}

/// `η = 1 / (2 + (C_L/C_U)·(a_U/a_L))` for a complementary two-coupler device.
///
/// Counts are first corrected for detector saturation; their Poisson errors and
/// the uncertainty of `a_U/a_L` are propagated to first order.
pub fn estimate_eta_ev(rec: &CountingRecord, a_u_over_a_l: Measured) -> Result<Estimate> {
    if rec.c_u == 0 {
        return Err(Error::Undefined("EV estimator needs C_U > 0"));
    }
    let c_l = rec.photon_estimate(rec.c_l);
    let c_u = rec.photon_estimate(rec.c_u);
    let x = c_l / c_u * a_u_over_a_l.value;
    let eta = 1.0 / (2.0 + x);
    let rel_a = relative(a_u_over_a_l);
    let rel_l = if rec.c_l > 0 { 1.0 / c_l } else { 0.0 };
    let rel_x = math::sqrt(rel_l + 1.0 / c_u + rel_a * rel_a);
    Ok(Estimate {
        eta,
        sigma: eta * eta * x * rel_x,
    })
}

/// `η = C_L / (C_T − C_U·a_L/a_U)`, assuming a 50/50 monitor tap and equal
/// efficiencies at T and L.
pub fn estimate_eta_zeno(rec: &CountingRecord, a_l_over_a_u: Measured) -> Result<Estimate> {
    let c_l = rec.photon_estimate(rec.c_l);
    let c_u = rec.photon_estimate(rec.c_u);
    let c_t = rec.photon_estimate(rec.c_t);
    let a = a_l_over_a_u.value;
    let denom = c_t - c_u * a;
    if !(denom > 0.0) {
        return Err(Error::Undefined(
            "Zeno estimator denominator C_T - C_U*a_L/a_U is not positive",
        ));
    }
    let eta = c_l / denom;
    // ∂η/∂C_L = 1/D, ∂η/∂C_T = −η/D, ∂η/∂C_U = η·a/D, ∂η/∂a = η·C_U/D
    let var = c_l / (denom * denom)
        + eta * eta * c_t / (denom * denom)
        + (eta * a / denom) * (eta * a / denom) * c_u
        + (eta * c_u / denom) * (eta * c_u / denom) * a_l_over_a_u.sigma * a_l_over_a_u.sigma;
    Ok(Estimate {
        eta,
        sigma: math::sqrt(var),
    })
}

/// Explosion-heralded efficiency `η = N_L / (N_L + E)`, where `N_L = C_L/a_L`
/// is the number of photons that left through L and `E` the explosion count.
///
/// Loss is excluded from both terms, so this converges to
/// [`IfmReport::eta`] of the simulated circuit. Only available in simulation,
/// where explosions are observable.
pub fn estimate_eta_heralded(rec: &CountingRecord, a_l: f64) -> Result<Estimate> {
    if !(a_l > 0.0 && a_l <= 1.0) {
        return Err(Error::Domain {
            name: "a_L",
            value: a_l,
            domain: "(0, 1]",
        });
    }
    let n_l = rec.photon_estimate(rec.c_l) / a_l;
    let e = rec.explosions as f64;
    let total = n_l + e;
    if !(total > 0.0) {
        return Err(Error::Undefined(
            "heralded estimator needs a click at L or an explosion",
        ));
    }
    let eta = n_l / total;
    // Var(N_L) = C_L / a_L², Var(E) = E.
    let var_n_l = n_l / a_l;
    let var = (e * e * var_n_l + n_l * n_l * e) / (total * total * total * total);
    Ok(Estimate {
        eta,
        sigma: math::sqrt(var),
    })
}

/// Value the Zeno estimator converges to for `config`.
pub fn expected_eta_zeno(config: &ExperimentConfig) -> Result<f64> {
    let p = config.outcome_probabilities()?;
    let device = 1.0 - config.tap_ratio;
    let rate_l = device * p.p_l * config.a_l;
    let rate_u = device * p.p_u * config.a_u;
    let rate_t = config.tap_ratio * config.a_t;
    Ok(rate_l / (rate_t - rate_u * config.a_l / config.a_u))
}

/// Value the EV estimator converges to for `config`.
pub fn expected_eta_ev(config: &ExperimentConfig) -> Result<f64> {
    let p = config.outcome_probabilities()?;
    Ok(1.0 / (2.0 + p.p_l / p.p_u))
}

fn relative(m: Measured) -> f64 {
    if m.value == 0.0 {
        0.0
    } else {
        m.sigma / m.value
    }
}
