//! Spontaneous four-wave mixing in a two-mode waveguide.

mod gain;
mod grid;
mod process;
mod state;

pub use gain::{sinc, sinc_squared_gain, GainSample, GainSpectrum, PumpConfig, SfwmModel};
pub use grid::{channel_pair, ChannelGrid};
pub use process::{enumerate_processes, ProcessType, SfwmProcess};
pub use state::{
    mode_to_polarization, process_for, reference_probe_state, wrap_phase, BiphotonState, PhaseModel, COMBINATIONS,
    COMBINATION_LABELS, DEFAULT_NEGLIGIBLE_RATIO,
};
