//! Wavelength sweeps through imbalanced interferometers.
//!
//! An upper-arm delay of length `ΔL` contributes the phase
//! `Δφ(λ) = 2π·ΔL·n_eff(λ)/λ`. With a linear effective index around `λ0` the
//! group index `n_g = n_eff − λ·dn_eff/dλ` is constant, and neighbouring fringes
//! satisfy `1/λ₁ − 1/λ₂ = 1/(n_g·ΔL)` exactly.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::analysis::EvConfig;
use crate::math::in_unit;
use crate::optics::{self, ChainBuilder, CircuitSpec, PhotonState, StageElement};
use crate::{Error, Result};

const NM_PER_UM: f64 = 1000.0;

/// Linear effective-index model `n_eff(λ) = n_eff0 + dn/dλ·(λ − λ0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    pub n_eff0: f64,
    /// First-order dispersion in 1/nm.
    pub dn_dlambda_per_nm: f64,
    pub lambda0_nm: f64,
}

impl DispersionModel {
    pub fn new(n_eff0: f64, dn_dlambda_per_nm: f64, lambda0_nm: f64) -> Result<Self> {
        let model = Self {
            n_eff0,
            dn_dlambda_per_nm,
            lambda0_nm,
        };
        if !(n_eff0 > 1.0) {
            return Err(Error::Domain {
                name: "n_eff0",
                value: n_eff0,
                domain: "> 1",
            });
        }
        if !(lambda0_nm > 0.0) {
            return Err(Error::Domain {
                name: "lambda0",
                value: lambda0_nm,
                domain: "> 0 nm",
            });
        }
        let n_g = model.group_index();
        if !(n_g > 0.0) || !dn_dlambda_per_nm.is_finite() {
            return Err(Error::Domain {
                name: "group index",
                value: n_g,
                domain: "> 0",
            });
        }
        Ok(model)
    }

    /// Model with the dispersion chosen so that the group index equals `n_g`.
    pub fn from_group_index(n_eff0: f64, n_g: f64, lambda0_nm: f64) -> Result<Self> {
        if !(lambda0_nm > 0.0) {
            return Err(Error::Domain {
                name: "lambda0",
                value: lambda0_nm,
                domain: "> 0 nm",
            });
        }
        Self::new(n_eff0, (n_eff0 - n_g) / lambda0_nm, lambda0_nm)
    }

    /// 400 nm × 220 nm silicon strip waveguide at 1550 nm: `n_eff = 2.1129`, `n_g = 4.7`.
    pub fn silicon_strip() -> Self {
        Self::from_group_index(2.1129, 4.7, 1550.0).expect("valid default model")
    }

    pub fn n_eff(&self, lambda_nm: f64) -> f64 {
        self.n_eff0 + self.dn_dlambda_per_nm * (lambda_nm - self.lambda0_nm)
    }

    pub fn group_index(&self) -> f64 {
        self.n_eff0 - self.lambda0_nm * self.dn_dlambda_per_nm
    }
}

impl Default for DispersionModel {
    fn default() -> Self {
        Self::silicon_strip()
    }
}

fn check_wavelength(lambda_nm: f64) -> Result<()> {
    if !(lambda_nm > 0.0 && lambda_nm.is_finite()) {
        return Err(Error::Domain {
            name: "wavelength",
            value: lambda_nm,
            domain: "> 0 nm",
        });
    }
    Ok(())
}

fn check_delay(delta_l_um: f64) -> Result<()> {
    if !(delta_l_um >= 0.0 && delta_l_um.is_finite()) {
        return Err(Error::Domain {
            name: "delta_L",
            value: delta_l_um,
            domain: ">= 0 um",
        });
    }
    Ok(())
}

/// Phase of a `delta_l_um` upper-arm delay at `lambda_nm`, in radians.
pub fn phase_at(model: &DispersionModel, delta_l_um: f64, lambda_nm: f64) -> Result<f64> {
    check_wavelength(lambda_nm)?;
    check_delay(delta_l_um)?;
    Ok(TAU * delta_l_um * NM_PER_UM * model.n_eff(lambda_nm) / lambda_nm)
}

/// Free spectral range `λ²/(n_g·ΔL)` in nm, with `λ` the centre of the fringe pair.
pub fn fsr(model: &DispersionModel, delta_l_um: f64, lambda_nm: f64) -> Result<f64> {
    check_wavelength(lambda_nm)?;
    let optical = model.group_index() * delta_l_um * NM_PER_UM;
    if !(optical > 0.0) {
        return Err(Error::Domain {
            name: "n_g * delta_L",
            value: optical,
            domain: "> 0",
        });
    }
    Ok(lambda_nm * lambda_nm / optical)
}

/// Wavelength of the next fringe above `lambda_nm`, solving
/// `1/λ₁ − 1/λ₂ = 1/(n_g·ΔL)` for `λ₂`.
pub fn next_fringe(model: &DispersionModel, delta_l_um: f64, lambda_nm: f64) -> Result<f64> {
    fsr(model, delta_l_um, lambda_nm)?;
    let optical = model.group_index() * delta_l_um * NM_PER_UM;
    let inv = 1.0 / lambda_nm - 1.0 / optical;
    if !(inv > 0.0) {
        return Err(Error::Undefined(
            "no next fringe: delay shorter than one wavelength",
        ));
    }
    Ok(1.0 / inv)
}

/// Inclusive wavelength grid `min, min+step, ...` up to `max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub lambda_min_nm: f64,
    pub lambda_max_nm: f64,
    pub step_nm: f64,
}

impl SweepRange {
    pub fn new(lambda_min_nm: f64, lambda_max_nm: f64, step_nm: f64) -> Result<Self> {
        check_wavelength(lambda_min_nm)?;
        check_wavelength(lambda_max_nm)?;
        if lambda_max_nm < lambda_min_nm {
            return Err(Error::Domain {
                name: "lambda_max",
                value: lambda_max_nm,
                domain: ">= lambda_min",
            });
        }
        if !(step_nm > 0.0 && step_nm.is_finite()) {
            return Err(Error::Domain {
                name: "step",
                value: step_nm,
                domain: "> 0 nm",
            });
        }
        Ok(Self {
            lambda_min_nm,
            lambda_max_nm,
            step_nm,
        })
    }

    pub fn len(&self) -> usize {
        let span = (self.lambda_max_nm - self.lambda_min_nm) / self.step_nm;
        // Tolerate representation error so that e.g. (1560-1520)/0.01 keeps its last point.
        libm::floor(span + 1e-9) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn wavelength(&self, index: usize) -> f64 {
        self.lambda_min_nm + index as f64 * self.step_nm
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.wavelength(i))
    }
}

impl Default for SweepRange {
    fn default() -> Self {
        Self {
            lambda_min_nm: 1520.0,
            lambda_max_nm: 1560.0,
            step_nm: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub lambda_nm: f64,
    pub p_upper: f64,
    pub p_lower: f64,
    pub p_absorbed: f64,
    pub p_lost: f64,
}

impl SpectrumRow {
    fn from_state(lambda_nm: f64, s: &PhotonState) -> Self {
        Self {
            lambda_nm,
            p_upper: s.p_upper(),
            p_lower: s.p_lower(),
            p_absorbed: s.p_absorbed,
            p_lost: s.p_lost,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_upper + self.p_lower + self.p_absorbed + self.p_lost
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub rows: Vec<SpectrumRow>,
    pub range: SweepRange,
    pub description: String,
}

/// One sweep point: resolves every delay of `template` at `lambda_nm` and
/// propagates a photon from the lower input.
pub fn spectrum_row(
    template: &CircuitSpec,
    model: &DispersionModel,
    lambda_nm: f64,
) -> Result<SpectrumRow> {
    let circuit = template.resolve_delays(|len| phase_at(model, len, lambda_nm))?;
    let out = optics::propagate(PhotonState::lower_input(), &circuit)?;
    Ok(SpectrumRow::from_state(lambda_nm, &out))
}

/// Transmission spectrum of `template` over `range`, rows in increasing wavelength.
pub fn sweep_spectrum(
    template: &CircuitSpec,
    model: &DispersionModel,
    range: &SweepRange,
) -> Result<SpectrumResult> {
    check_template(template)?;
    let rows = range
        .wavelengths()
        .map(|l| spectrum_row(template, model, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        rows,
        range: *range,
        description: describe(template),
    })
}

/// Rejects templates that would produce a flat sweep.
pub fn check_template(template: &CircuitSpec) -> Result<()> {
    template.validate()?;
    if template.n_delays() == 0 {
        return Err(Error::NoDelaySections);
    }
    Ok(())
}

pub fn describe(template: &CircuitSpec) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let scheme = template
        .metadata
        .get("scheme")
        .map_or("custom", |v| v.as_str());
    let _ = write!(
        s,
        "{scheme}: {} couplers, {} absorbers, {} delays, {} elements",
        template.n_couplers(),
        template.n_absorbers(),
        template.n_delays(),
        template.stages.len()
    );
    s
}

/// `(P(U) − P(L)) / (P(U) + P(L))` at the row with the largest `P(U)`.
pub fn visibility(result: &SpectrumResult) -> Result<f64> {
    let row = result
        .rows
        .iter()
        .max_by(|a, b| a.p_upper.total_cmp(&b.p_upper))
        .ok_or(Error::Undefined("visibility of an empty spectrum"))?;
    let sum = row.p_upper + row.p_lower;
    if sum <= 0.0 {
        return Err(Error::Undefined(
            "visibility with no light at either output",
        ));
    }
    Ok((row.p_upper - row.p_lower) / sum)
}

/// Wavelengths of the deep minima of `P(L)`: strict local minima lying below
/// the midpoint between the global extremes, refined by a parabola through the
/// neighbouring samples.
pub fn fringe_minima(result: &SpectrumResult) -> Vec<f64> {
    let rows = &result.rows;
    if rows.len() < 3 {
        return Vec::new();
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.p_lower), hi.max(r.p_lower))
        });
    let threshold = 0.5 * (lo + hi);
    let mut out = Vec::new();
    for i in 1..rows.len() - 1 {
        let (a, b, c) = (rows[i - 1].p_lower, rows[i].p_lower, rows[i + 1].p_lower);
        if b < a && b <= c && b < threshold {
            let curvature = a - 2.0 * b + c;
            let shift = if curvature > 0.0 {
                0.5 * (a - c) / curvature
            } else {
                0.0
            };
            let step = rows[i + 1].lambda_nm - rows[i].lambda_nm;
            out.push(rows[i].lambda_nm + shift * step);
        }
    }
    out
}

/// Contrast of a mismatched Mach-Zehnder interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MismatchPoint {
    /// `R_in − T_out`.
    pub mismatch: f64,
    /// `min_φ P(L) / max_φ P(U)`.
    pub contrast: f64,
}

/// `min_φ P(L) / max_φ P(U)` for couplers `R_in` and `R_out = 1 − T_out`, no absorber.
///
/// Without loss both outputs are `A ± B·cos φ`, so the extremes sit at `φ = 0`
/// and `φ = π`; both points are propagated through the engine.
pub fn mzi_contrast(r_in: f64, t_out: f64) -> Result<f64> {
    let cfg = EvConfig::new(r_in, 1.0 - t_out)?;
    if !in_unit(t_out) {
        return Err(Error::Domain {
            name: "T_out",
            value: t_out,
            domain: "[0, 1]",
        });
    }
    let base = ChainBuilder::mach_zehnder(cfg.r_bs1, cfg.r_bs2)?.build()?;
    let mut min_lower = f64::INFINITY;
    let mut max_upper = f64::NEG_INFINITY;
    for phi in [0.0, PI] {
        let mut stages = base.stages.clone();
        stages.insert(1, StageElement::Phase { radians: phi });
        let out = optics::propagate(PhotonState::lower_input(), &CircuitSpec::new(stages))?;
        min_lower = min_lower.min(out.p_lower());
        max_upper = max_upper.max(out.p_upper());
    }
    if max_upper <= 0.0 {
        return Err(Error::Undefined("contrast with a dark upper output"));
    }
    Ok(min_lower / max_upper)
}

/// Contrast for each output-coupler transmissivity in `t_out_list`.
pub fn contrast_vs_mismatch(r_in: f64, t_out_list: &[f64]) -> Result<Vec<MismatchPoint>> {
    t_out_list
        .iter()
        .map(|&t_out| {
            Ok(MismatchPoint {
                mismatch: r_in - t_out,
                contrast: mzi_contrast(r_in, t_out)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> DispersionModel {
        DispersionModel::silicon_strip()
    }

    #[test]
    fn default_model_group_index() {
        let m = model();
        assert!((m.group_index() - 4.7).abs() < 1e-12);
        assert_eq!(m.n_eff(1550.0), 2.1129);
        assert!(DispersionModel::from_group_index(0.9, 4.7, 1550.0).is_err());
        assert!(DispersionModel::from_group_index(2.1, -1.0, 1550.0).is_err());
    }

    #[test]
    fn phase_values() {
        let m = model();
        assert_eq!(phase_at(&m, 0.0, 1530.0).unwrap(), 0.0);
        let no_dispersion = DispersionModel::new(2.1129, 0.0, 1550.0).unwrap();
        let phi = phase_at(&no_dispersion, 100.0, 1550.0).unwrap();
        // 2π · 100e3 · 2.1129 / 1550
        assert!((phi - 856.499_499_067_080_4).abs() < 1e-9);
        assert!((phi / TAU - 136.316_129_032_258).abs() < 1e-9);
        assert!(phase_at(&m, 100.0, 0.0).is_err());
        assert!(phase_at(&m, 100.0, -5.0).is_err());
    }

    #[test]
    fn fsr_values() {
        let m = model();
        let f = fsr(&m, 100.0, 1550.0).unwrap();
        assert!((f - 5.111_702_127_659_575).abs() < 1e-9);
        let f2 = fsr(&m, 200.0, 1550.0).unwrap();
        assert!((f2 - f / 2.0).abs() < 1e-12);
        assert!(fsr(&m, 0.0, 1550.0).is_err());
    }

    #[test]
    fn one_fringe_apart_differs_by_two_pi() {
        let m = model();
        for &l in &[1520.0, 1537.3, 1550.0] {
            let l2 = next_fringe(&m, 100.0, l).unwrap();
            let d = phase_at(&m, 100.0, l).unwrap() - phase_at(&m, 100.0, l2).unwrap();
            assert!((d - TAU).abs() < 1e-6, "{d}");
            // The centred first-order spacing matches the exact one.
            let centre = 0.5 * (l + l2);
            assert!(((l2 - l) - fsr(&m, 100.0, centre).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn sweep_range_grid() {
        let r = SweepRange::default();
        assert_eq!(r.len(), 4001);
        assert!((r.wavelength(4000) - 1560.0).abs() < 1e-9);
        let single = SweepRange::new(1550.0, 1550.0, 0.01).unwrap();
        assert_eq!(single.len(), 1);
        assert!(SweepRange::new(1560.0, 1550.0, 0.01).is_err());
        assert!(SweepRange::new(1550.0, 1560.0, 0.0).is_err());
    }

    #[test]
    fn template_without_delays_is_rejected() {
        let flat = ChainBuilder::zeno(3).unwrap().build().unwrap();
        let err = sweep_spectrum(&flat, &model(), &SweepRange::default()).unwrap_err();
        assert_eq!(err, Error::NoDelaySections);
    }

    #[test]
    fn single_point_sweep() {
        let t = ChainBuilder::mach_zehnder(0.5, 0.5)
            .unwrap()
            .delay_um(100.0)
            .build()
            .unwrap();
        let r = SweepRange::new(1541.0, 1541.0, 0.01).unwrap();
        let s = sweep_spectrum(&t, &model(), &r).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].lambda_nm, 1541.0);
    }

    #[test]
    fn matched_ev_spectrum_has_deep_dips() {
        let t = ChainBuilder::mach_zehnder(0.852, 0.148)
            .unwrap()
            .delay_um(100.0)
            .build()
            .unwrap();
        let s = sweep_spectrum(&t, &model(), &SweepRange::default()).unwrap();
        assert!(s.rows.iter().all(|r| (r.total() - 1.0).abs() < 1e-10));
        assert!(s.rows.windows(2).all(|w| w[1].lambda_nm > w[0].lambda_nm));
        let min_l = s
            .rows
            .iter()
            .map(|r| r.p_lower)
            .fold(f64::INFINITY, f64::min);
        let max_u = s.rows.iter().map(|r| r.p_upper).fold(0.0, f64::max);
        assert!(min_l / max_u < 0.002);
        assert!(visibility(&s).unwrap() > 0.998);
    }

    #[test]
    fn absorbers_flatten_the_spectrum() {
        let chain = |absorbers| {
            ChainBuilder::zeno(10)
                .unwrap()
                .absorbers(absorbers)
                .delay_um(100.0)
                .build()
                .unwrap()
        };
        let span = |s: &SpectrumResult| {
            let lo = s
                .rows
                .iter()
                .map(|r| r.p_lower)
                .fold(f64::INFINITY, f64::min);
            let hi = s.rows.iter().map(|r| r.p_lower).fold(0.0, f64::max);
            hi - lo
        };
        let r = SweepRange::new(1540.0, 1550.0, 0.01).unwrap();
        let open = sweep_spectrum(&chain(false), &model(), &r).unwrap();
        let blocked = sweep_spectrum(&chain(true), &model(), &r).unwrap();
        assert!(span(&blocked) * 10.0 < span(&open));
        assert!(visibility(&open).unwrap() > 0.98);
    }

    #[test]
    fn visibility_errors() {
        let empty = SpectrumResult {
            rows: Vec::new(),
            range: SweepRange::default(),
            description: String::new(),
        };
        assert!(visibility(&empty).is_err());
        let dark = SpectrumResult {
            rows: alloc::vec![SpectrumRow {
                lambda_nm: 1550.0,
                p_upper: 0.0,
                p_lower: 0.0,
                p_absorbed: 1.0,
                p_lost: 0.0
            }],
            ..empty
        };
        assert!(visibility(&dark).is_err());
    }

    #[test]
    fn mismatch_zero_gives_zero_contrast() {
        for &r_in in &[0.99, 0.9, 0.5] {
            assert_eq!(mzi_contrast(r_in, r_in).unwrap(), 0.0);
        }
    }

    #[test]
    fn mismatched_couplers_lose_contrast() {
        let pts = contrast_vs_mismatch(0.9, &[0.9, 0.85, 0.8]).unwrap();
        assert!((pts[1].mismatch - 0.05).abs() < 1e-12);
        assert!(pts[1].contrast > 0.0 && pts[2].contrast > pts[1].contrast);
        assert!(mzi_contrast(0.5, 1.5).is_err());
    }
}
