use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ifm_core::optics::LossArm;
use ifm_tools::commands::{self, CouplerRequest, ZenoCurveInputs};
use ifm_tools::config::{unit_grid, RunConfig};
use ifm_tools::{ToolError, ToolResult};
use serde::Serialize;

/// Interaction-free measurement simulator for coupled-waveguide interferometers.
///
/// Units: wavelengths in nm, waveguide lengths in um, coupler gaps in nm.
/// Reflectivities, efficiencies and probabilities are dimensionless in [0, 1].
/// Mean photon number mu is per detector gate.
#[derive(Parser, Debug)]
#[command(name = "ifm", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-coupler efficiency vs reflectivity R (second coupler 1 - R).
    ///
    /// Writes CSV columns R,eta,p_ifm,p_abs. R is dimensionless in [0, 1];
    /// p_ifm is the probability of a click at the lower output.
    EvCurve {
        /// TOML file; reads [curve] r_points or r_values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of evenly spaced R values on [0, 1] (default 101).
        #[arg(long)]
        points: Option<usize>,
        /// Explicit comma-separated R values, dimensionless.
        #[arg(long)]
        r_values: Option<String>,
        /// CSV output path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Zeno-chain probabilities and efficiency vs number of couplers N.
    ///
    /// Writes CSV columns N,p_L,p_U,p_abs,p_loss,eta. Each coupler has
    /// R = cos^2(pi/2N); loss is a power fraction per stage.
    ZenoCurve {
        /// TOML file; reads [curve] n_list and [circuit] loss_per_stage, loss_arm.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated coupler counts, each >= 2 (default 2..=64). An empty
        /// string gives a header-only file.
        #[arg(long)]
        n_list: Option<String>,
        /// Power loss per stage, dimensionless in [0, 1).
        #[arg(long)]
        loss: Option<f64>,
        /// Arm carrying the per-stage loss: both, upper or lower.
        #[arg(long)]
        loss_arm: Option<String>,
        /// CSV output path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Transmission spectrum of a circuit with an upper-arm delay in each section.
    ///
    /// Writes CSV columns lambda_nm,p_upper,p_lower,p_absorbed,p_lost. Config
    /// keys: [circuit] delta_l_um (um); [dispersion] n_eff0, n_g (dimensionless),
    /// lambda0_nm; [sweep] lambda_min_nm, lambda_max_nm, step_nm (nm).
    Spectrum {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// CSV output path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Monte Carlo photon counting with an attenuated laser; prints a JSON record.
    ///
    /// Config keys: [source] mu (photons per gate), tap_ratio, gates, seed,
    /// gate_rate_hz (Hz, metadata); [detectors] a_l, a_u, a_t, dark_count_prob
    /// (per gate), a_ratio_rel_sigma (all dimensionless).
    Count {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Number of detector gates; overrides [source] gates.
        #[arg(long)]
        gates: Option<u64>,
        /// RNG seed; overrides [source] seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the JSON record (and a manifest) to this path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the coupler gap (nm) that gives a target reflectivity; prints JSON.
    ///
    /// The table is CSV with header gap_nm,n_s,n_a (gap in nm, indices
    /// dimensionless) and a `# lambda_nm=` comment line. Output fields:
    /// gap_nm (nm), length_um, bend_correction_um, l_c_um (um), R, T.
    DesignCoupler {
        /// Supermode index table.
        #[arg(long)]
        table: PathBuf,
        /// Target power reflectivity R in (0, 1).
        #[arg(long)]
        target_r: f64,
        /// Straight coupling length in um.
        #[arg(long)]
        length_um: f64,
        /// Extra effective length contributed by the bends, in um.
        #[arg(long, default_value_t = 0.0)]
        bend_um: f64,
        /// Wavelength in nm; overrides the table's comment line.
        #[arg(long)]
        lambda_nm: Option<f64>,
        /// Also write the JSON record (and a manifest) to this path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("{}", ToolError::Usage(first.to_string()).to_json_line());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> ToolResult<String> {
    match command {
        Command::EvCurve {
            config,
            points,
            r_values,
            output,
        } => {
            let cfg = load_optional(config.as_deref())?;
            let grid = match (r_values, points) {
                (Some(list), _) => parse_list(&list, "r-values")?,
                (None, Some(p)) => unit_grid(p),
                (None, None) => cfg.r_grid(),
            };
            commands::cmd_ev_curve(&grid, &output)?;
            summary(&Written {
                rows: grid.len(),
                output,
            })
        }
        Command::ZenoCurve {
            config,
            n_list,
            loss,
            loss_arm,
            output,
        } => {
            let cfg = load_optional(config.as_deref())?;
            let n_list = match n_list {
                Some(list) => parse_list(&list, "n-list")?,
                None => cfg
                    .curve
                    .n_list
                    .clone()
                    .unwrap_or_else(|| (2..=64).collect()),
            };
            let loss_arm = match loss_arm.as_deref() {
                None => cfg.circuit.loss_arm,
                Some("both") => LossArm::Both,
                Some("upper") => LossArm::Upper,
                Some("lower") => LossArm::Lower,
                Some(other) => {
                    return Err(ToolError::Usage(format!(
                        "--loss-arm must be both, upper or lower, got {other:?}"
                    )))
                }
            };
            let inputs = ZenoCurveInputs {
                n_list,
                loss_per_stage: loss.unwrap_or(cfg.circuit.loss_per_stage),
                loss_arm,
            };
            commands::cmd_zeno_curve(&inputs, &output)?;
            summary(&Written {
                rows: inputs.n_list.len(),
                output,
            })
        }
        Command::Spectrum { config, output } => {
            let cfg = RunConfig::load(&config)?;
            summary(&commands::cmd_spectrum(&cfg, &output)?)
        }
        Command::Count {
            config,
            gates,
            seed,
            output,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(g) = gates {
                cfg.source.gates = g;
            }
            if let Some(s) = seed {
                cfg.source.seed = s;
            }
            summary(&commands::cmd_count(&cfg, output.as_deref())?)
        }
        Command::DesignCoupler {
            table,
            target_r,
            length_um,
            bend_um,
            lambda_nm,
            output,
        } => {
            let req = CouplerRequest {
                table,
                target_r,
                length_um,
                bend_um,
                lambda_nm,
            };
            summary(&commands::cmd_design_coupler(&req, output.as_deref())?)
        }
    }
}

#[derive(Serialize)]
struct Written {
    rows: usize,
    output: PathBuf,
}

fn summary(value: &impl Serialize) -> ToolResult<String> {
    serde_json::to_string(value).map_err(|e| ToolError::Config(e.to_string()))
}

fn load_optional(path: Option<&Path>) -> ToolResult<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> ToolResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| ToolError::Usage(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}
