//! The five subcommands, callable without going through the binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ifm_core::analysis::{self, EvConfig, IfmReport};
use ifm_core::counting::{self, CountingRecord, Estimate, Measured};
use ifm_core::coupler::{self, CouplerDesign};
use ifm_core::optics::LossArm;
use ifm_core::spectrum::{self, SpectrumResult};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::manifest::RunManifest;
use crate::output;
use crate::{parallel, table, ToolError, ToolResult};

/// Complementary two-coupler interferometer (`R₂ = 1 − R`) for each `R`.
pub fn ev_curve(r_values: &[f64]) -> ToolResult<Vec<(f64, IfmReport)>> {
    r_values
        .iter()
        .map(|&r| Ok((r, analysis::ev_efficiency(&EvConfig::complementary(r)?)?)))
        .collect()
}

#[derive(Serialize)]
struct EvCurveInputs<'a> {
    r_values: &'a [f64],
    r_bs2: &'static str,
}

pub fn cmd_ev_curve(r_values: &[f64], output: &Path) -> ToolResult<RunManifest> {
    let rows = ev_curve(r_values)?;
    output::write_file(output, |f| output::write_ev_curve(f, &rows))?;
    let inputs = EvCurveInputs {
        r_values,
        r_bs2: "1 - R",
    };
    let manifest = RunManifest::new("ev-curve", &inputs, vec![output.into()])?;
    manifest.write()?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZenoCurveInputs {
    pub n_list: Vec<usize>,
    pub loss_per_stage: f64,
    pub loss_arm: LossArm,
}

pub fn zeno_curve(inputs: &ZenoCurveInputs) -> ToolResult<Vec<(usize, IfmReport)>> {
    Ok(analysis::efficiency_curve_on(
        &inputs.n_list,
        inputs.loss_per_stage,
        inputs.loss_arm,
    )?)
}

pub fn cmd_zeno_curve(inputs: &ZenoCurveInputs, output: &Path) -> ToolResult<RunManifest> {
    let rows = zeno_curve(inputs)?;
    output::write_file(output, |f| output::write_zeno_curve(f, &rows))?;
    let manifest = RunManifest::new("zeno-curve", inputs, vec![output.into()])?;
    manifest.write()?;
    Ok(manifest)
}

/// Sweeps the circuit of `config` with a `delta_l_um` delay in every arm section.
pub fn spectrum(config: &RunConfig) -> ToolResult<SpectrumResult> {
    let template = config.circuit.sweep_template()?;
    let model = config.dispersion.model()?;
    let range = config.sweep.range()?;
    parallel::sweep_spectrum(&template, &model, &range)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub rows: usize,
    pub description: String,
    pub visibility: Option<f64>,
    pub output: PathBuf,
}

pub fn cmd_spectrum(config: &RunConfig, output: &Path) -> ToolResult<SpectrumSummary> {
    let result = spectrum(config)?;
    output::write_file(output, |f| output::write_spectrum(f, &result.rows))?;
    RunManifest::new("spectrum", config, vec![output.into()])?.write()?;
    Ok(SpectrumSummary {
        rows: result.rows.len(),
        description: result.description.clone(),
        visibility: spectrum::visibility(&result).ok(),
        output: output.into(),
    })
}

/// Counting record plus the efficiency estimates derived from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    #[serde(flatten)]
    pub record: CountingRecord,
    pub mu: f64,
    pub multi_photon_fraction: f64,
    /// `1 / (2 + (C_L/C_U)(a_U/a_L))`.
    pub eta_ev: Option<Estimate>,
    /// `C_L / (C_T − C_U·a_L/a_U)`.
    pub eta_zeno: Option<Estimate>,
    /// `(C_L/a_L) / (C_L/a_L + explosions)`.
    pub eta_heralded: Option<Estimate>,
    /// `P(L)/(P(L) + P(abs))` of the simulated circuit.
    pub eta_analytic: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub estimator_errors: BTreeMap<String, String>,
}

pub fn count(config: &RunConfig) -> ToolResult<CountReport> {
    let exp = config.experiment()?;
    let record = parallel::run_counting(&exp)?;
    let rel = config.detectors.a_ratio_rel_sigma;
    let ratio = |v: f64| Measured::new(v, v * rel);
    let mut errors = BTreeMap::new();
    let mut keep = |name: &str, r: ifm_core::Result<Estimate>| match r {
        Ok(e) => Some(e),
        Err(e) => {
            errors.insert(name.to_string(), e.to_string());
            None
        }
    };
    let eta_ev = keep(
        "eta_ev",
        counting::estimate_eta_ev(&record, ratio(exp.a_u / exp.a_l)),
    );
    let eta_zeno = keep(
        "eta_zeno",
        counting::estimate_eta_zeno(&record, ratio(exp.a_l / exp.a_u)),
    );
    let eta_heralded = keep(
        "eta_heralded",
        counting::estimate_eta_heralded(&record, exp.a_l),
    );
    Ok(CountReport {
        mu: exp.mu,
        multi_photon_fraction: record.multi_photon_fraction(),
        eta_ev,
        eta_zeno,
        eta_heralded,
        eta_analytic: exp.outcome_probabilities()?.eta,
        estimator_errors: errors,
        record,
    })
}

pub fn cmd_count(config: &RunConfig, output: Option<&Path>) -> ToolResult<CountReport> {
    let report = count(config)?;
    if let Some(path) = output {
        write_json(path, &report)?;
        RunManifest::new("count", config, vec![path.into()])?.write()?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerRequest {
    pub table: PathBuf,
    pub target_r: f64,
    pub length_um: f64,
    pub bend_um: f64,
    /// Overrides the table's `# lambda_nm=` line.
    pub lambda_nm: Option<f64>,
}

pub fn cmd_design_coupler(
    req: &CouplerRequest,
    output: Option<&Path>,
) -> ToolResult<CouplerDesign> {
    let t = table::load_index_table(&req.table, req.lambda_nm)?;
    let design = coupler::design_for_reflectivity(&t, req.target_r, req.length_um, req.bend_um)?;
    if let Some(path) = output {
        write_json(path, &design)?;
        RunManifest::new("design-coupler", req, vec![path.into()])?.write()?;
    }
    Ok(design)
}

fn write_json(path: &Path, value: &impl Serialize) -> ToolResult<()> {
    let line = serde_json::to_string(value).map_err(|e| ToolError::Config(e.to_string()))?;
    std::fs::write(path, line + "\n").map_err(|e| ToolError::io(path, e))
}
