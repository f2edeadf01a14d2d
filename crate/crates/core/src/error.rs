use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside its physical domain.
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The input state does not carry unit total probability.
    #[error("photon state is not normalized: total probability {total}")]
    NotNormalized { total: f64 },

    #[error("delay section of {length_um} um has no wavelength assigned; resolve delays before propagating")]
    UnresolvedDelay { length_um: f64 },

    #[error("circuit template has no delay sections, a wavelength sweep would be flat")]
    NoDelaySections,

    #[error("gap {gap_nm} nm is outside the table range [{min_nm}, {max_nm}] nm")]
    GapOutOfRange {
        gap_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("target reflectivity {target} unreachable on the first coupling lobe; achievable range is [{min}, {max}]")]
    TargetUnreachable { target: f64, min: f64, max: f64 },

    /// Invalid row in an index table. Rows are numbered from 1.
    #[error("index table row {row}: {reason}")]
    InvalidTable { row: usize, reason: String },

    /// A quantity is mathematically undefined for the given input (zero counts, empty spectrum, ...).
    #[error("undefined: {0}")]
    Undefined(&'static str),
}
