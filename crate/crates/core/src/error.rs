use thiserror::Error;

use crate::modes::ModeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um outside the model validity range [{min_um}, {max_um}] um")]
    WavelengthOutOfRange {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("material model is singular or unphysical at {wavelength_um} um: {reason}")]
    MaterialDomain { wavelength_um: f64, reason: String },

    #[error("mode of order {order} is not guided (V = {v_number:.6}, cutoff at {cutoff:.6})")]
    NotGuided {
        order: u32,
        v_number: f64,
        cutoff: f64,
    },

    #[error("dispersion stencil failed at omega = {omega_rad_s:e} rad/s: {source}")]
    Stencil {
        omega_rad_s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no dispersion data for mode {0}")]
    MissingMode(ModeId),

    #[error("dispersion table {field}: {message}")]
    DispersionTable { field: String, message: String },

    #[error("invalid input `{field}`: {message}")]
    InvalidInput { field: &'static str, message: String },

    #[error("channel {k} outside 1..={max_channel}")]
    ChannelOutOfRange { k: i32, max_channel: u32 },

    #[error("all process gains vanish; the biphoton state is empty")]
    EmptyState,

    #[error(
        "intermodal gain at channel {k} is {ratio:.3e} of the intramodal maximum \
         (threshold {threshold:.3e}); pick a channel farther from the pump"
    )]
    IntermodalNotNegligible { k: u32, ratio: f64, threshold: f64 },

    #[error("CAR undefined: accidentals are zero")]
    UndefinedCar,

    #[error("fidelity target is not pure (purity {purity})")]
    NonPureTarget { purity: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidDensityMatrix(String),

    #[error("tomography dataset invalid: {0}")]
    InvalidDataset(String),

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("{stage} stage failed (input {input_hash}): {source}")]
    Stage {
        stage: &'static str,
        input_hash: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by user configuration rather than a numerical stage.
    pub fn is_config_error(&self) -> bool {
        if let Error::Stage { source, .. } = self {
            return source.is_config_error();
        }
        matches!(
            self,
            Error::Config { .. }
                | Error::DispersionTable { .. }
                | Error::InvalidDataset(_)
                | Error::Io { .. }
        )
    }
}
