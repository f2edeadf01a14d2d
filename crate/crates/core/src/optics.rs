//! Two-mode transfer-matrix engine.
//!
//! A single photon travelling through a chain of coupled interferometers is
//! described by two complex path amplitudes (upper and lower waveguide) plus the
//! probability already removed from the interferometer by absorbers and by loss.
//! Every stage element maps such a [`PhotonState`] to a new one while keeping
//! the total probability equal to one.
//!
//! Coupler convention: `[[√R, i√T], [i√T, √R]]` with `T = 1 − R`, acting on the
//! column vector `(upper, lower)`. Reflection keeps the photon in its waveguide.
//! Photons are injected into the lower port.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::math::{self, in_unit};
use crate::{Error, Result};

/// Largest tolerated deviation of the total probability from one on input.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Path state of a single photon plus the probability it has already left
/// the interferometer through an absorber or through loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonState {
    pub upper: Complex64,
    pub lower: Complex64,
    pub p_absorbed: f64,
    pub p_lost: f64,
}

impl PhotonState {
    /// Photon launched into the lower input port.
    pub const fn lower_input() -> Self {
        Self::from_amplitudes(ZERO, ONE)
    }

    pub const fn upper_input() -> Self {
        Self::from_amplitudes(ONE, ZERO)
    }

    pub const fn from_amplitudes(upper: Complex64, lower: Complex64) -> Self {
        Self {
            upper,
            lower,
            p_absorbed: 0.0,
            p_lost: 0.0,
        }
    }

    pub fn p_upper(&self) -> f64 {
        self.upper.norm_sqr()
    }

    pub fn p_lower(&self) -> f64 {
        self.lower.norm_sqr()
    }

    /// `|upper|² + |lower|² + p_absorbed + p_lost`.
    pub fn total_probability(&self) -> f64 {
        self.p_upper() + self.p_lower() + self.p_absorbed + self.p_lost
    }

    pub fn check_normalized(&self) -> Result<()> {
        let total = self.total_probability();
        if math::abs(total - 1.0) > NORMALIZATION_TOLERANCE
            || self.p_absorbed < 0.0
            || self.p_lost < 0.0
        {
            return Err(Error::NotNormalized { total });
        }
        Ok(())
    }
}

/// Which waveguide a loss element acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossArm {
    #[default]
    Both,
    Upper,
    Lower,
}

/// One element of an interferometer chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageElement {
    /// Lossless directional coupler with power reflectivity `R` (bar-state fraction).
    Coupler { reflectivity: f64 },
    /// Phase `exp(iδ)` applied to the upper arm.
    Phase { radians: f64 },
    /// Extra upper-arm waveguide of the given length. Its phase depends on the
    /// wavelength, so it must be resolved with [`CircuitSpec::resolve_delays`].
    Delay { length_um: f64 },
    /// Absorber on the upper arm removing the fraction `α` of its power.
    Absorber { fraction: f64 },
    /// Propagation loss removing the fraction `ℓ` of the power in the chosen arm(s).
    Loss { fraction: f64, arm: LossArm },
}

impl StageElement {
    pub fn coupler(reflectivity: f64) -> Result<Self> {
        let e = Self::Coupler { reflectivity };
        e.validate()?;
        Ok(e)
    }

    pub fn absorber(fraction: f64) -> Result<Self> {
        let e = Self::Absorber { fraction };
        e.validate()?;
        Ok(e)
    }

    pub fn loss(fraction: f64) -> Result<Self> {
        Self::loss_on(fraction, LossArm::Both)
    }

    pub fn loss_on(fraction: f64, arm: LossArm) -> Result<Self> {
        let e = Self::Loss { fraction, arm };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Coupler { reflectivity } if !in_unit(reflectivity) => Err(Error::Domain {
                name: "reflectivity",
                value: reflectivity,
                domain: "[0, 1]",
            }),
            Self::Phase { radians } if !radians.is_finite() => Err(Error::Domain {
                name: "phase",
                value: radians,
                domain: "finite radians",
            }),
            Self::Delay { length_um } if !(length_um >= 0.0 && length_um.is_finite()) => {
                Err(Error::Domain {
                    name: "delay length",
                    value: length_um,
                    domain: "[0, inf) um",
                })
            }
            Self::Absorber { fraction } if !in_unit(fraction) => Err(Error::Domain {
                name: "absorption fraction",
                value: fraction,
                domain: "[0, 1]",
            }),
            Self::Loss { fraction, .. } if !in_unit(fraction) => Err(Error::Domain {
                name: "loss fraction",
                value: fraction,
                domain: "[0, 1]",
            }),
            _ => Ok(()),
        }
    }

    /// Amplitude transfer matrix of the element. Couplers and phases are
    /// unitary; absorbers and loss are diagonal contractions.
    pub fn matrix(&self) -> Result<Matrix2> {
        self.validate()?;
        Ok(match *self {
            Self::Coupler { reflectivity } => coupler_matrix(reflectivity)?,
            Self::Phase { radians } => Matrix2::diagonal(Complex64::cis(radians), ONE),
            Self::Delay { length_um } => return Err(Error::UnresolvedDelay { length_um }),
            Self::Absorber { fraction } => {
                Matrix2::diagonal(Complex64::from(math::sqrt(1.0 - fraction)), ONE)
            }
            Self::Loss { fraction, arm } => {
                let s = Complex64::from(math::sqrt(1.0 - fraction));
                match arm {
                    LossArm::Both => Matrix2::diagonal(s, s),
                    LossArm::Upper => Matrix2::diagonal(s, ONE),
                    LossArm::Lower => Matrix2::diagonal(ONE, s),
                }
            }
        })
    }
}

/// 2×2 complex matrix acting on `(upper, lower)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

impl Matrix2 {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);

    pub const fn diagonal(upper: Complex64, lower: Complex64) -> Self {
        Self([[upper, ZERO], [ZERO, lower]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn apply(&self, upper: Complex64, lower: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (
            m[0][0] * upper + m[0][1] * lower,
            m[1][0] * upper + m[1][1] * lower,
        )
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::IDENTITY) <= tol
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;

    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Matrix2(out)
    }
}

/// Lossless symmetric coupler `[[√R, i√T], [i√T, √R]]`.
pub fn coupler_matrix(reflectivity: f64) -> Result<Matrix2> {
    if !in_unit(reflectivity) {
        return Err(Error::Domain {
            name: "reflectivity",
            value: reflectivity,
            domain: "[0, 1]",
        });
    }
    let bar = Complex64::from(math::sqrt(reflectivity));
    let cross = I * math::sqrt(1.0 - reflectivity);
    Ok(Matrix2([[bar, cross], [cross, bar]]))
}

/// Applies one element to a normalized state.
pub fn apply_stage(state: PhotonState, element: &StageElement) -> Result<PhotonState> {
    state.check_normalized()?;
    element.validate()?;
    Ok(apply_unchecked(state, element))
}

fn apply_unchecked(state: PhotonState, element: &StageElement) -> PhotonState {
    let mut next = state;
    match *element {
        StageElement::Coupler { reflectivity } => {
            let bar = math::sqrt(reflectivity);
            let cross = I * math::sqrt(1.0 - reflectivity);
            next.upper = state.upper * bar + state.lower * cross;
            next.lower = state.upper * cross + state.lower * bar;
        }
        StageElement::Phase { radians } => {
            next.upper = state.upper * Complex64::cis(radians);
        }
        StageElement::Delay { .. } => unreachable!("delays are rejected before propagation"),
        StageElement::Absorber { fraction } => {
            next.p_absorbed += fraction * state.p_upper();
            next.upper = state.upper * math::sqrt(1.0 - fraction);
        }
        StageElement::Loss { fraction, arm } => {
            let keep = math::sqrt(1.0 - fraction);
            let (on_upper, on_lower) = match arm {
                LossArm::Both => (true, true),
                LossArm::Upper => (true, false),
                LossArm::Lower => (false, true),
            };
            if on_upper {
                next.p_lost += fraction * state.p_upper();
                next.upper = state.upper * keep;
            }
            if on_lower {
                next.p_lost += fraction * state.p_lower();
                next.lower = state.lower * keep;
            }
        }
    }
    next
}

/// Ordered chain of stage elements with free-form labels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub stages: Vec<StageElement>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl CircuitSpec {
    pub fn new(stages: Vec<StageElement>) -> Self {
        Self {
            stages,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_label(mut self, key: &str, value: &str) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    /// Number of couplers, the `N` of an N-stage chain.
    pub fn n_couplers(&self) -> usize {
        self.count(|e| matches!(e, StageElement::Coupler { .. }))
    }

    pub fn n_absorbers(&self) -> usize {
        self.count(|e| matches!(e, StageElement::Absorber { .. }))
    }

    pub fn n_delays(&self) -> usize {
        self.count(|e| matches!(e, StageElement::Delay { .. }))
    }

    fn count(&self, pred: impl Fn(&StageElement) -> bool) -> usize {
        self.stages.iter().filter(|e| pred(e)).count()
    }

    pub fn validate(&self) -> Result<()> {
        self.stages.iter().try_for_each(StageElement::validate)
    }

    /// Replaces every delay section with the phase returned by `phase_of(length_um)`.
    pub fn resolve_delays<F>(&self, mut phase_of: F) -> Result<CircuitSpec>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let stages = self
            .stages
            .iter()
            .map(|e| match *e {
                StageElement::Delay { length_um } => Ok(StageElement::Phase {
                    radians: phase_of(length_um)?,
                }),
                other => Ok(other),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircuitSpec {
            stages,
            metadata: self.metadata.clone(),
        })
    }

    /// Product of the element matrices, last stage leftmost.
    pub fn transfer_matrix(&self) -> Result<Matrix2> {
        self.stages
            .iter()
            .try_fold(Matrix2::IDENTITY, |acc, e| Ok(e.matrix()? * acc))
    }
}

/// Folds [`apply_stage`] over the circuit.
pub fn propagate(state: PhotonState, circuit: &CircuitSpec) -> Result<PhotonState> {
    state.check_normalized()?;
    circuit.validate()?;
    reject_delays(circuit)?;
    Ok(circuit.stages.iter().fold(state, apply_unchecked))
}

/// Like [`propagate`] but returns the state after every element, starting with the input.
pub fn propagate_trace(state: PhotonState, circuit: &CircuitSpec) -> Result<Vec<PhotonState>> {
    state.check_normalized()?;
    circuit.validate()?;
    reject_delays(circuit)?;
    let mut trace = Vec::with_capacity(circuit.stages.len() + 1);
    trace.push(state);
    let mut current = state;
    for e in &circuit.stages {
        current = apply_unchecked(current, e);
        trace.push(current);
    }
    Ok(trace)
}

fn reject_delays(circuit: &CircuitSpec) -> Result<()> {
    match circuit
        .stages
        .iter()
        .find(|e| matches!(e, StageElement::Delay { .. }))
    {
        Some(StageElement::Delay { length_um }) => Err(Error::UnresolvedDelay {
            length_um: *length_um,
        }),
        _ => Ok(()),
    }
}

/// Per-coupler reflectivity `cos²(π/2N)` that walks the photon from the lower
/// to the upper waveguide in `N` lossless stages.
pub fn zeno_reflectivity(n: usize) -> f64 {
    let c = math::cos(FRAC_PI_2 / n as f64);
    c * c
}

/// Builder for chains of couplers joined by interferometer arms.
///
/// Stage `k` is: coupler `k`; then, between couplers only, an optional upper-arm
/// delay and an optional upper-arm absorber; then an optional loss element.
/// The loss element follows every coupler, including the last one.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainBuilder {
    reflectivities: Vec<f64>,
    absorber: f64,
    loss: f64,
    loss_arm: LossArm,
    delay_um: Option<f64>,
    scheme: &'static str,
}

impl ChainBuilder {
    /// N-stage Zeno chain with equal couplers `R = cos²(π/2N)`.
    pub fn zeno(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain {
                name: "number of couplers",
                value: n as f64,
                domain: ">= 2",
            });
        }
        Ok(Self::from_reflectivities(
            core::iter::repeat_n(zeno_reflectivity(n), n).collect(),
            "zeno",
        ))
    }

    /// Two-coupler Mach-Zehnder interferometer.
    pub fn mach_zehnder(r_bs1: f64, r_bs2: f64) -> Result<Self> {
        StageElement::coupler(r_bs1)?;
        StageElement::coupler(r_bs2)?;
        Ok(Self::from_reflectivities(alloc::vec![r_bs1, r_bs2], "ev"))
    }

    fn from_reflectivities(reflectivities: Vec<f64>, scheme: &'static str) -> Self {
        Self {
            reflectivities,
            absorber: 0.0,
            loss: 0.0,
            loss_arm: LossArm::Both,
            delay_um: None,
            scheme,
        }
    }

    /// Full absorbers (`α = 1`) between consecutive couplers, or none.
    pub fn absorbers(self, present: bool) -> Self {
        self.absorber_fraction(if present { 1.0 } else { 0.0 })
    }

    /// Absorbers of fraction `α` between consecutive couplers; `α = 0` omits them.
    pub fn absorber_fraction(mut self, fraction: f64) -> Self {
        self.absorber = fraction;
        self
    }

    pub fn loss(mut self, fraction: f64, arm: LossArm) -> Self {
        self.loss = fraction;
        self.loss_arm = arm;
        self
    }

    /// Upper-arm path imbalance inserted in every arm section.
    pub fn delay_um(mut self, length_um: f64) -> Self {
        self.delay_um = Some(length_um);
        self
    }

    pub fn build(&self) -> Result<CircuitSpec> {
        if !(0.0..1.0).contains(&self.loss) {
            return Err(Error::Domain {
                name: "loss per stage",
                value: self.loss,
                domain: "[0, 1)",
            });
        }
        let n = self.reflectivities.len();
        let mut stages = Vec::with_capacity(4 * n);
        for (k, &r) in self.reflectivities.iter().enumerate() {
            stages.push(StageElement::coupler(r)?);
            if k + 1 < n {
                if let Some(length_um) = self.delay_um {
                    let delay = StageElement::Delay { length_um };
                    delay.validate()?;
                    stages.push(delay);
                }
                if self.absorber > 0.0 {
                    stages.push(StageElement::absorber(self.absorber)?);
                }
            }
            if self.loss > 0.0 {
                stages.push(StageElement::loss_on(self.loss, self.loss_arm)?);
            }
        }
        Ok(CircuitSpec::new(stages).with_label("scheme", self.scheme))
    }
}

/// N-stage Zeno chain with optional full absorbers and symmetric per-stage loss.
pub fn build_zeno_circuit(n: usize, absorbers: bool, loss_per_stage: f64) -> Result<CircuitSpec> {
    ChainBuilder::zeno(n)?
        .absorbers(absorbers)
        .loss(loss_per_stage, LossArm::Both)
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coupler_limits() {
        assert_eq!(coupler_matrix(1.0).unwrap(), Matrix2::IDENTITY);
        let cross = coupler_matrix(0.0).unwrap();
        assert_eq!(cross, Matrix2([[ZERO, I], [I, ZERO]]));
        let half = coupler_matrix(0.5).unwrap();
        for row in half.0 {
            for entry in row {
                assert!(approx(entry.norm_sqr(), 0.5, 1e-15));
            }
        }
        assert!(half.is_unitary(1e-12));
        assert!(coupler_matrix(1.5).is_err());
        assert!(coupler_matrix(-0.1).is_err());
        assert!(coupler_matrix(f64::NAN).is_err());
    }

    #[test]
    fn absorber_on_empty_and_full_upper_path() {
        let full = StageElement::absorber(1.0).unwrap();
        let out = apply_stage(PhotonState::lower_input(), &full).unwrap();
        assert_eq!(out, PhotonState::lower_input());

        let out = apply_stage(PhotonState::upper_input(), &full).unwrap();
        assert_eq!(out.p_upper(), 0.0);
        assert_eq!(out.p_lower(), 0.0);
        assert_eq!(out.p_absorbed, 1.0);
        assert_eq!(out.p_lost, 0.0);
    }

    #[test]
    fn symmetric_loss_scales_both_amplitudes() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let state = PhotonState::from_amplitudes(h.into(), h.into());
        let out = apply_stage(state, &StageElement::loss(0.074).unwrap()).unwrap();
        assert!(approx(out.p_lost, 0.074, 1e-15));
        let scale = 0.926f64.sqrt();
        assert!(approx(out.upper.re, h * scale, 1e-15));
        assert!(approx(out.lower.re, h * scale, 1e-15));
        assert!(approx(out.total_probability(), 1.0, 1e-15));
    }

    #[test]
    fn arm_selective_loss() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let state = PhotonState::from_amplitudes(h.into(), h.into());
        let up = apply_stage(state, &StageElement::loss_on(0.2, LossArm::Upper).unwrap()).unwrap();
        assert!(approx(up.p_lost, 0.1, 1e-15));
        assert!(approx(up.p_lower(), 0.5, 1e-15));
        let low = apply_stage(state, &StageElement::loss_on(0.2, LossArm::Lower).unwrap()).unwrap();
        assert!(approx(low.p_upper(), 0.5, 1e-15));
    }

    #[test]
    fn phase_multiplies_upper_amplitude() {
        let out = apply_stage(
            PhotonState::upper_input(),
            &StageElement::Phase {
                radians: core::f64::consts::FRAC_PI_2,
            },
        )
        .unwrap();
        assert!(approx(out.upper.im, 1.0, 1e-15));
        assert!(approx(out.upper.re, 0.0, 1e-15));
    }

    #[test]
    fn rejects_unnormalized_input() {
        let state = PhotonState::from_amplitudes(ONE, ONE);
        let err = apply_stage(state, &StageElement::coupler(0.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
        assert!(propagate(state, &CircuitSpec::default()).is_err());
    }

    #[test]
    fn empty_circuit_is_identity() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let state = PhotonState::from_amplitudes(Complex64::new(0.0, h), h.into());
        assert_eq!(propagate(state, &CircuitSpec::default()).unwrap(), state);
    }

    #[test]
    fn unresolved_delay_is_an_error() {
        let c = ChainBuilder::zeno(3)
            .unwrap()
            .delay_um(100.0)
            .build()
            .unwrap();
        assert_eq!(c.n_delays(), 2);
        assert!(matches!(
            propagate(PhotonState::lower_input(), &c),
            Err(Error::UnresolvedDelay { .. })
        ));
        let resolved = c.resolve_delays(|_| Ok(0.0)).unwrap();
        assert_eq!(resolved.n_delays(), 0);
        let out = propagate(PhotonState::lower_input(), &resolved).unwrap();
        assert!(approx(out.p_upper(), 1.0, 1e-12));
    }

    #[test]
    fn zeno_chain_without_absorbers_exits_upper() {
        let c = build_zeno_circuit(10, false, 0.0).unwrap();
        assert!(approx(zeno_reflectivity(10), 0.975, 1e-3));
        let out = propagate(PhotonState::lower_input(), &c).unwrap();
        assert!(approx(out.p_upper(), 1.0, 1e-9));
    }

    #[test]
    fn zeno_chain_with_absorbers_matches_closed_form() {
        let c = build_zeno_circuit(10, true, 0.0).unwrap();
        assert_eq!(c.n_absorbers(), 9);
        let out = propagate(PhotonState::lower_input(), &c).unwrap();
        // [cos²(π/20)]^10, evaluated independently.
        assert!(approx(out.p_lower(), 0.780_546_069_781_140_5, 1e-12));
    }

    #[test]
    fn zeno_builder_shapes() {
        assert!(approx(zeno_reflectivity(20), 0.9938, 5e-5));
        assert!(approx(zeno_reflectivity(5), 0.904, 1e-3));
        let c20 = build_zeno_circuit(20, true, 0.0).unwrap();
        assert_eq!((c20.n_couplers(), c20.n_absorbers()), (20, 19));
        let ev = build_zeno_circuit(2, true, 0.0).unwrap();
        assert_eq!((ev.n_couplers(), ev.n_absorbers()), (2, 1));
        let lossy = build_zeno_circuit(5, true, 0.1).unwrap();
        assert_eq!(lossy.stages.len(), 5 + 4 + 5);
        assert!(build_zeno_circuit(1, true, 0.0).is_err());
        assert!(build_zeno_circuit(5, true, 1.0).is_err());
    }

    #[test]
    fn transfer_matrix_matches_stepwise_amplitudes() {
        let c = ChainBuilder::mach_zehnder(0.3, 0.6)
            .unwrap()
            .absorber_fraction(0.4)
            .loss(0.1, LossArm::Lower)
            .build()
            .unwrap();
        let m = c.transfer_matrix().unwrap();
        let (u, l) = m.apply(ZERO, ONE);
        let out = propagate(PhotonState::lower_input(), &c).unwrap();
        assert!((u - out.upper).norm() < 1e-14);
        assert!((l - out.lower).norm() < 1e-14);
    }
}
