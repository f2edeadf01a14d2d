//! CSV writers for curves and spectra.
//!
//! Probabilities use 17 significant digits in scientific notation, enough to
//! round-trip any double; wavelengths are fixed-point with nine decimals.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ifm_core::analysis::IfmReport;
use ifm_core::spectrum::SpectrumRow;

use crate::{ToolError, ToolResult};

pub const SPECTRUM_HEADER: [&str; 5] = ["lambda_nm", "p_upper", "p_lower", "p_absorbed", "p_lost"];
pub const EV_CURVE_HEADER: [&str; 4] = ["R", "eta", "p_ifm", "p_abs"];
pub const ZENO_CURVE_HEADER: [&str; 6] = ["N", "p_L", "p_U", "p_abs", "p_loss", "eta"];

pub fn prob(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn wavelength(x: f64) -> String {
    format!("{x:.9}")
}

pub fn write_spectrum<W: Write>(out: W, rows: &[SpectrumRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_HEADER)?;
    for r in rows {
        w.write_record([
            wavelength(r.lambda_nm),
            prob(r.p_upper),
            prob(r.p_lower),
            prob(r.p_absorbed),
            prob(r.p_lost),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ev_curve<W: Write>(out: W, rows: &[(f64, IfmReport)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EV_CURVE_HEADER)?;
    for (r, rep) in rows {
        w.write_record([prob(*r), prob(rep.eta), prob(rep.p_ifm()), prob(rep.p_abs)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_zeno_curve<W: Write>(out: W, rows: &[(usize, IfmReport)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ZENO_CURVE_HEADER)?;
    for (n, rep) in rows {
        w.write_record([
            n.to_string(),
            prob(rep.p_l),
            prob(rep.p_u),
            prob(rep.p_abs),
            prob(rep.p_loss),
            prob(rep.eta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `path` and hands it to `write`, mapping failures to IO errors on `path`.
pub fn write_file(path: &Path, write: impl FnOnce(File) -> csv::Result<()>) -> ToolResult<()> {
    let file = File::create(path).map_err(|e| ToolError::io(path, e))?;
    write(file).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => ToolError::io(path, io),
        other => ToolError::Parse {
            path: path.into(),
            message: format!("{other:?}"),
        },
    })
}
