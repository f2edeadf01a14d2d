//! TOML run configuration.
//!
//! Every physical quantity carries its unit in the key name. All sections and
//! keys are optional; unknown keys are rejected so that a misspelt unit suffix
//! cannot be silently ignored.

use std::path::Path;

use ifm_core::counting::ExperimentConfig;
use ifm_core::optics::{ChainBuilder, CircuitSpec, LossArm, StageElement};
use ifm_core::spectrum::{DispersionModel, SweepRange};
use serde::{Deserialize, Serialize};

use crate::{ToolError, ToolResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: CircuitSection,
    pub dispersion: DispersionSection,
    pub sweep: SweepSection,
    pub source: SourceSection,
    pub detectors: DetectorSection,
    pub curve: CurveSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Zeno,
    Ev,
    /// Explicit element list in `stages`.
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSection {
    pub scheme: Scheme,
    /// Coupler count of a Zeno chain.
    pub n_stages: usize,
    pub r_bs1: Option<f64>,
    /// Defaults to `1 − r_bs1`.
    pub r_bs2: Option<f64>,
    pub absorbers: bool,
    /// Overrides `absorbers` with a partial absorber.
    pub absorber_fraction: Option<f64>,
    pub loss_per_stage: f64,
    pub loss_arm: LossArm,
    /// Upper-arm imbalance per arm section, used by wavelength sweeps.
    pub delta_l_um: f64,
    pub stages: Vec<StageElement>,
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            scheme: Scheme::Zeno,
            n_stages: 10,
            r_bs1: None,
            r_bs2: None,
            absorbers: true,
            absorber_fraction: None,
            loss_per_stage: 0.0,
            loss_arm: LossArm::Both,
            delta_l_um: 100.0,
            stages: Vec::new(),
        }
    }
}

impl CircuitSection {
    fn builder(&self) -> ToolResult<ChainBuilder> {
        let builder = match self.scheme {
            Scheme::Zeno => ChainBuilder::zeno(self.n_stages)?,
            Scheme::Ev => {
                let r1 = self.r_bs1.ok_or_else(|| {
                    ToolError::Config("circuit.r_bs1 is required for scheme = \"ev\"".into())
                })?;
                ChainBuilder::mach_zehnder(r1, self.r_bs2.unwrap_or(1.0 - r1))?
            }
            Scheme::Custom => unreachable!("custom circuits are not built from a chain"),
        };
        let alpha = self
            .absorber_fraction
            .unwrap_or(if self.absorbers { 1.0 } else { 0.0 });
        Ok(builder
            .absorber_fraction(alpha)
            .loss(self.loss_per_stage, self.loss_arm))
    }

    fn custom(&self) -> ToolResult<CircuitSpec> {
        if self.stages.is_empty() {
            return Err(ToolError::Config(
                "scheme = \"custom\" needs a non-empty circuit.stages list".into(),
            ));
        }
        let spec = CircuitSpec::new(self.stages.clone()).with_label("scheme", "custom");
        spec.validate()?;
        Ok(spec)
    }

    /// Circuit at its design point, with every arm in phase.
    pub fn circuit(&self) -> ToolResult<CircuitSpec> {
        match self.scheme {
            Scheme::Custom => self.custom(),
            _ => Ok(self.builder()?.build()?),
        }
    }

    /// Circuit with a `delta_l_um` delay in every arm section, for sweeps.
    pub fn sweep_template(&self) -> ToolResult<CircuitSpec> {
        match self.scheme {
            Scheme::Custom => self.custom(),
            _ => Ok(self.builder()?.delay_um(self.delta_l_um).build()?),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSection {
    pub n_eff0: f64,
    pub n_g: f64,
    pub lambda0_nm: f64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            n_eff0: 2.1129,
            n_g: 4.7,
            lambda0_nm: 1550.0,
        }
    }
}

impl DispersionSection {
    pub fn model(&self) -> ToolResult<DispersionModel> {
        Ok(DispersionModel::from_group_index(
            self.n_eff0,
            self.n_g,
            self.lambda0_nm,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub lambda_min_nm: f64,
    pub lambda_max_nm: f64,
    pub step_nm: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let r = SweepRange::default();
        Self {
            lambda_min_nm: r.lambda_min_nm,
            lambda_max_nm: r.lambda_max_nm,
            step_nm: r.step_nm,
        }
    }
}

impl SweepSection {
    pub fn range(&self) -> ToolResult<SweepRange> {
        Ok(SweepRange::new(
            self.lambda_min_nm,
            self.lambda_max_nm,
            self.step_nm,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    /// Mean photon number per gate.
    pub mu: f64,
    /// Fraction of the source sent to detector T.
    pub tap_ratio: f64,
    pub gates: u64,
    pub seed: u64,
    /// Metadata only; time is not simulated.
    pub gate_rate_hz: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            mu: 0.1,
            tap_ratio: 0.5,
            gates: 1_000_000,
            seed: 0,
            gate_rate_hz: 100e3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub a_l: f64,
    pub a_u: f64,
    pub a_t: f64,
    pub dark_count_prob: f64,
    /// Relative one-sigma uncertainty of the calibrated efficiency ratios.
    pub a_ratio_rel_sigma: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            a_l: 1.0,
            a_u: 1.0,
            a_t: 1.0,
            dark_count_prob: 0.0,
            a_ratio_rel_sigma: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    /// Evenly spaced reflectivity grid on [0, 1], used when `r_values` is absent.
    pub r_points: usize,
    pub r_values: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
}

impl Default for CurveSection {
    fn default() -> Self {
        Self {
            r_points: 101,
            r_values: None,
            n_list: None,
        }
    }
}

/// `points` evenly spaced values from 0 to 1 inclusive.
pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> ToolResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| ToolError::Parse {
            path: path.into(),
            message: e.message().to_string(),
        })
    }

    pub fn experiment(&self) -> ToolResult<ExperimentConfig> {
        let d = &self.detectors;
        let s = &self.source;
        let mut cfg = ExperimentConfig::new(self.circuit.circuit()?);
        cfg.mu = s.mu;
        cfg.gates = s.gates;
        cfg.rng_seed = s.seed;
        cfg.tap_ratio = s.tap_ratio;
        cfg.a_l = d.a_l;
        cfg.a_u = d.a_u;
        cfg.a_t = d.a_t;
        cfg.dark_count_prob = d.dark_count_prob;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn r_grid(&self) -> Vec<f64> {
        self.curve
            .r_values
            .clone()
            .unwrap_or_else(|| unit_grid(self.curve.r_points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        let circuit = c.circuit.circuit().unwrap();
        assert_eq!(circuit.n_couplers(), 10);
        assert_eq!(circuit.n_absorbers(), 9);
        assert_eq!(c.sweep.range().unwrap().len(), 4001);
    }

    #[test]
    fn ev_scheme_defaults_to_complementary_couplers() {
        let c =
            RunConfig::from_toml("[circuit]\nscheme = \"ev\"\nr_bs1 = 0.852\nabsorbers = false\n")
                .unwrap();
        let t = c.circuit.sweep_template().unwrap();
        assert_eq!(t.n_couplers(), 2);
        assert_eq!(t.n_delays(), 1);
        assert_eq!(t.n_absorbers(), 0);
        match t.stages[2] {
            StageElement::Coupler { reflectivity } => assert!((reflectivity - 0.148).abs() < 1e-15),
            ref e => panic!("unexpected {e:?}"),
        }
        let missing = RunConfig::from_toml("[circuit]\nscheme = \"ev\"\n").unwrap();
        assert!(missing.circuit.circuit().is_err());
    }

    #[test]
    fn custom_stages_parse() {
        let text = r#"
            [circuit]
            scheme = "custom"
            stages = [
                { kind = "coupler", reflectivity = 0.5 },
                { kind = "delay", length_um = 100.0 },
                { kind = "loss", fraction = 0.1, arm = "upper" },
                { kind = "coupler", reflectivity = 0.5 },
            ]
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        let t = c.circuit.sweep_template().unwrap();
        assert_eq!(t.stages.len(), 4);
        assert_eq!(t.n_delays(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[sweep]\nlambda_min = 1500\n").is_err());
        assert!(RunConfig::from_toml("[laser]\nmu = 0.1\n").is_err());
    }

    #[test]
    fn experiment_validation() {
        let c = RunConfig::from_toml("[detectors]\na_l = 1.2\n").unwrap();
        assert!(c.experiment().is_err());
        let c = RunConfig::from_toml("[source]\ngates = 0\n").unwrap();
        assert!(c.experiment().is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = unit_grid(101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[50], 0.5);
        assert_eq!(g[100], 1.0);
        assert!(unit_grid(0).is_empty());
    }
}
