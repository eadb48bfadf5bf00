use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn thz_to_omega(f_thz: f64) -> f64 {
    2.0 * PI * f_thz * 1e12
}

pub fn omega_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e12)
}

pub fn omega_to_wavelength_um(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega * 1e6
}

pub fn wavelength_nm_to_thz(lambda_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (lambda_nm * 1e-9) * 1e-12
}

/// Linear transmission of a loss in dB.
pub fn db_to_linear(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pump_wavelength_to_frequency() {
        let f = wavelength_nm_to_thz(1550.11);
        assert!((f - 193.40).abs() < 0.01, "{f}");
    }

    #[test]
    fn omega_round_trip() {
        let w = thz_to_omega(193.4);
        assert!((omega_to_thz(w) - 193.4).abs() < 1e-12);
        assert!((omega_to_wavelength_um(w) - 1.5501).abs() < 1e-3);
    }
}
