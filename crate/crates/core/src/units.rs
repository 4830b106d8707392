//! Physical constants and the single conversion boundary between lab units
//! (f/2π in kHz, nm, yN, xN) and SI.
//!
//! Everything inside the library is SI: angular frequencies in rad/s,
//! energies in joules, forces in newtons, lengths in meters.

use std::f64::consts::PI;

/// Reduced Planck constant in J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

pub const YOCTO_NEWTON: f64 = 1e-24;
pub const XONTO_NEWTON: f64 = 1e-27;
pub const NANOMETER: f64 = 1e-9;

/// Converts an ordinary frequency f (given as f/2π in kHz) to rad/s.
pub fn khz_to_rad_s(f_khz: f64) -> f64 {
    f_khz * 2.0 * PI * 1e3
}

pub fn rad_s_to_khz(w: f64) -> f64 {
    w / (2.0 * PI * 1e3)
}

/// Converts an ordinary frequency f (given as f/2π in Hz) to rad/s.
pub fn hz_to_rad_s(f_hz: f64) -> f64 {
    f_hz * 2.0 * PI
}

pub fn rad_s_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

pub fn yn(f: f64) -> f64 {
    f * YOCTO_NEWTON
}

pub fn xn(f: f64) -> f64 {
    f * XONTO_NEWTON
}

pub fn nm(z: f64) -> f64 {
    z * NANOMETER
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn khz_round_trip() {
        let w = khz_to_rad_s(0.3);
        assert!((w - 1_884.955_592_153_876).abs() < 1e-9);
        assert!((rad_s_to_khz(w) - 0.3).abs() < 1e-15);
    }
}
