//! Directional-coupler design from supermode effective indices.
//!
//! Two coupled waveguides support a symmetric and an antisymmetric supermode
//! with indices `n_s > n_a`. Power beats between the guides with the coupling
//! length `l_c = λ / (2·|n_s − n_a|)`, so a coupler of effective length `l`
//! has `R = cos²(π·l / 2l_c)` and `T = sin²(π·l / 2l_c)`. The effective length
//! is the straight section plus a correction for the coupling picked up in the
//! input and output bends.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

const NM_PER_UM: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSample {
    pub gap_nm: f64,
    pub n_s: f64,
    pub n_a: f64,
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// Between nodes the interpolant never overshoots the data, and it passes
/// through every node exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing and hold at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Undefined(
                "interpolation needs at least two matching nodes",
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Undefined(
                "interpolation nodes must be strictly increasing",
            ));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut slopes = alloc::vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value at `x`; `x` must lie in [`Self::domain`].
    pub fn eval(&self, x: f64) -> f64 {
        let k = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k]
            + h10 * h * self.slopes[k]
            + h01 * self.ys[k + 1]
            + h11 * h * self.slopes[k + 1]
    }
}

/// Non-centred three-point end slope, limited to keep the end interval monotone.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && math::abs(d) > math::abs(3.0 * d0) {
        3.0 * d0
    } else {
        d
    }
}

/// Gap-dependent supermode indices computed at one wavelength.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplerIndexTable {
    samples: Vec<IndexSample>,
    lambda_nm: f64,
    n_s: MonotoneCubic,
    n_a: MonotoneCubic,
}

impl CouplerIndexTable {
    /// Validates and indexes `samples`. Errors carry 1-based row numbers.
    pub fn new(samples: Vec<IndexSample>, lambda_nm: f64) -> Result<Self> {
        if !(lambda_nm > 0.0 && lambda_nm.is_finite()) {
            return Err(Error::Domain {
                name: "table wavelength",
                value: lambda_nm,
                domain: "> 0 nm",
            });
        }
        if samples.len() < 2 {
            return Err(Error::InvalidTable {
                row: samples.len(),
                reason: "at least two samples are required".into(),
            });
        }
        for (i, s) in samples.iter().enumerate() {
            let row = i + 1;
            if !(s.gap_nm.is_finite() && s.n_s.is_finite() && s.n_a.is_finite()) {
                return Err(Error::InvalidTable {
                    row,
                    reason: "non-finite value".into(),
                });
            }
            if !(s.n_a > 1.0) {
                return Err(Error::InvalidTable {
                    row,
                    reason: format!("n_a = {} must exceed 1", s.n_a),
                });
            }
            if !(s.n_s > s.n_a) {
                return Err(Error::InvalidTable {
                    row,
                    reason: format!("n_s = {} must exceed n_a = {}", s.n_s, s.n_a),
                });
            }
            if i > 0 && !(s.gap_nm > samples[i - 1].gap_nm) {
                return Err(Error::InvalidTable {
                    row,
                    reason: format!(
                        "gap {} nm does not increase past {} nm",
                        s.gap_nm,
                        samples[i - 1].gap_nm
                    ),
                });
            }
        }
        let gaps: Vec<f64> = samples.iter().map(|s| s.gap_nm).collect();
        let n_s = MonotoneCubic::new(gaps.clone(), samples.iter().map(|s| s.n_s).collect())?;
        let n_a = MonotoneCubic::new(gaps, samples.iter().map(|s| s.n_a).collect())?;
        Ok(Self {
            samples,
            lambda_nm,
            n_s,
            n_a,
        })
    }

    pub fn samples(&self) -> &[IndexSample] {
        &self.samples
    }

    pub fn lambda_nm(&self) -> f64 {
        self.lambda_nm
    }

    pub fn gap_range(&self) -> (f64, f64) {
        self.n_s.domain()
    }

    /// Interpolated `(n_s, n_a)`; no extrapolation.
    pub fn indices_at(&self, gap_nm: f64) -> Result<(f64, f64)> {
        let (min_nm, max_nm) = self.gap_range();
        if !(gap_nm >= min_nm && gap_nm <= max_nm) {
            return Err(Error::GapOutOfRange {
                gap_nm,
                min_nm,
                max_nm,
            });
        }
        Ok((self.n_s.eval(gap_nm), self.n_a.eval(gap_nm)))
    }
}

/// Coupling length in µm at `gap_nm`.
pub fn coupling_length(table: &CouplerIndexTable, gap_nm: f64) -> Result<f64> {
    let (n_s, n_a) = table.indices_at(gap_nm)?;
    let split = math::abs(n_s - n_a);
    if split <= 0.0 {
        return Err(Error::Undefined("degenerate supermodes, no coupling"));
    }
    Ok(table.lambda_nm / (2.0 * split) / NM_PER_UM)
}

/// `(R, T)` of a coupler with straight length `length_um` and bend correction
/// `bend_um`. `T` is computed as `1 − R`.
pub fn coupler_rt(l_c_um: f64, length_um: f64, bend_um: f64) -> Result<(f64, f64)> {
    if !(l_c_um > 0.0 && l_c_um.is_finite()) {
        return Err(Error::Domain {
            name: "coupling length",
            value: l_c_um,
            domain: "> 0 um",
        });
    }
    let l_eff = length_um + bend_um;
    if !(l_eff >= 0.0 && l_eff.is_finite()) {
        return Err(Error::Domain {
            name: "effective coupler length",
            value: l_eff,
            domain: ">= 0 um",
        });
    }
    let c = math::cos(FRAC_PI_2 * l_eff / l_c_um);
    let r = c * c;
    Ok((r, 1.0 - r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerDesign {
    pub gap_nm: f64,
    pub length_um: f64,
    pub bend_correction_um: f64,
    pub l_c_um: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

/// Evaluates the coupler built at `gap_nm`.
pub fn design_at_gap(
    table: &CouplerIndexTable,
    gap_nm: f64,
    length_um: f64,
    bend_um: f64,
) -> Result<CouplerDesign> {
    let l_c_um = coupling_length(table, gap_nm)?;
    let (r, t) = coupler_rt(l_c_um, length_um, bend_um)?;
    Ok(CouplerDesign {
        gap_nm,
        length_um,
        bend_correction_um: bend_um,
        l_c_um,
        r,
        t,
    })
}

const GAP_TOLERANCE_NM: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

/// Gap whose coupler reaches `target_r`, searched on the first coupling lobe
/// (`l_eff ≤ l_c`) where `R` grows with the gap.
pub fn solve_gap_for_reflectivity(
    table: &CouplerIndexTable,
    target_r: f64,
    length_um: f64,
    bend_um: f64,
) -> Result<f64> {
    if !(target_r > 0.0 && target_r < 1.0) {
        return Err(Error::Domain {
            name: "target reflectivity",
            value: target_r,
            domain: "(0, 1)",
        });
    }
    let l_eff = length_um + bend_um;
    let reflectivity = |gap: f64| -> Result<f64> {
        Ok(coupler_rt(coupling_length(table, gap)?, length_um, bend_um)?.0)
    };
    let (min_gap, max_gap) = table.gap_range();

    // Narrowest gap still on the first lobe.
    let lobe_start = if coupling_length(table, min_gap)? >= l_eff {
        min_gap
    } else if coupling_length(table, max_gap)? < l_eff {
        return Err(Error::TargetUnreachable {
            target: target_r,
            min: f64::NAN,
            max: f64::NAN,
        });
    } else {
        bisect(
            min_gap,
            max_gap,
            |g| Ok(coupling_length(table, g)? >= l_eff),
        )?
    };

    let r_lo = reflectivity(lobe_start)?;
    let r_hi = reflectivity(max_gap)?;
    if target_r == r_lo {
        return Ok(lobe_start);
    }
    if target_r == r_hi {
        return Ok(max_gap);
    }
    if !(target_r > r_lo && target_r < r_hi) {
        return Err(Error::TargetUnreachable {
            target: target_r,
            min: r_lo,
            max: r_hi,
        });
    }
    bisect(lobe_start, max_gap, |g| Ok(reflectivity(g)? >= target_r))
}

/// Smallest `x` in `[lo, hi]` with `above(x)`, assuming `above` flips once from false to true.
fn bisect(mut lo: f64, mut hi: f64, mut above: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= GAP_TOLERANCE_NM {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Full design record for the gap returned by [`solve_gap_for_reflectivity`].
pub fn design_for_reflectivity(
    table: &CouplerIndexTable,
    target_r: f64,
    length_um: f64,
    bend_um: f64,
) -> Result<CouplerDesign> {
    let gap = solve_gap_for_reflectivity(table, target_r, length_um, bend_um)?;
    design_at_gap(table, gap, length_um, bend_um)
}
