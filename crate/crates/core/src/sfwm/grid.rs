use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::thz_to_omega;

/// DWDM grid centred on the pump; signal channel `+k` pairs with idler channel `-k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    pub pump_frequency_thz: f64,
    pub spacing_ghz: f64,
    pub max_channel: u32,
}

impl ChannelGrid {
    pub fn new(pump_frequency_thz: f64) -> Self {
        ChannelGrid {
            pump_frequency_thz,
            spacing_ghz: 100.0,
            max_channel: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing_ghz > 0.0 && self.spacing_ghz.is_finite()) {
            return Err(Error::invalid("spacing_ghz", "must be > 0"));
        }
        if !(self.pump_frequency_thz > 0.0 && self.pump_frequency_thz.is_finite()) {
            return Err(Error::invalid("pump_frequency_thz", "must be > 0"));
        }
        Ok(())
    }

    pub fn spacing_thz(&self) -> f64 {
        self.spacing_ghz * 1e-3
    }

    pub fn channel_bandwidth_hz(&self) -> f64 {
        self.spacing_ghz * 1e9
    }

    /// Signal-side frequency offset of channel `k` (negative `k` is the idler side).
    pub fn detuning_thz(&self, k: i32) -> f64 {
        k as f64 * self.spacing_thz()
    }

    pub fn detuning_omega(&self, k: i32) -> f64 {
        thz_to_omega(self.detuning_thz(k))
    }

    /// `±1 ..= ±max_channel`, most negative first.
    pub fn channels(&self) -> impl Iterator<Item = i32> {
        let m = self.max_channel as i32;
        (-m..=m).filter(|&k| k != 0)
    }

    fn check(&self, k: i32) -> Result<()> {
        if k < 1 || k > self.max_channel as i32 {
            Err(Error::ChannelOutOfRange {
                k,
                max_channel: self.max_channel,
            })
        } else {
            Ok(())
        }
    }
}

/// `(signal, idler)` centre frequencies in THz; their sum is exactly `2 f_pump`.
pub fn channel_pair(grid: &ChannelGrid, k: i32) -> Result<(f64, f64)> {
    grid.check(k)?;
    let signal = grid.pump_frequency_thz + grid.detuning_thz(k);
    // signal lies within a factor 2 of 2 f_pump, so this subtraction is exact.
    let idler = 2.0 * grid.pump_frequency_thz - signal;
    Ok((signal, idler))
}
