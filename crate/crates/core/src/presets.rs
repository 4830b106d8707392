//! Canned parameter sets behind the `reproduce` targets.

use crate::hilbert::SystemParams;
use crate::protocol::SqueezeProtocolParams;
use crate::units::{khz_to_rad_s, nm, xn};

/// Zero-point spread used by every preset.
pub const Z_NM: f64 = 14.0;

/// Ω/2π = 320 kHz, g/2π = 4 kHz, ω/2π = 0.3 kHz, γ/2π = 0.08 kHz.
pub fn fig1(force_yn: f64) -> SystemParams {
    SystemParams::from_lab(0.3, 320.0, 4.0, 0.08, Z_NM, force_yn)
}

pub const FIG1_FORCES_YN: [f64; 3] = [5.0, 6.0, 7.0];

/// Coupling sweep at Ω/2π = 320 kHz, γ/2π = 0.08 kHz, F = 5 yN.
pub fn fig2(omega_khz: f64, g_khz: f64) -> SystemParams {
    SystemParams::from_lab(omega_khz, 320.0, g_khz, 0.08, Z_NM, 5.0)
}

pub const FIG2_OMEGAS_KHZ: [f64; 3] = [0.29, 0.30, 0.32];

/// Force sweep of the phonon number.
pub fn fig3(omega_khz: f64, force_yn: f64) -> SystemParams {
    SystemParams::from_lab(omega_khz, 320.0, 4.0, 0.08, Z_NM, force_yn)
}

pub const FIG3_OMEGAS_KHZ: [f64; 3] = [0.28, 0.30, 0.32];

/// Sensitivity versus coupling at ω/2π = 0.30 kHz.
pub fn fig4(g_khz: f64) -> SystemParams {
    SystemParams::from_lab(0.30, 320.0, g_khz, 0.08, Z_NM, 0.0)
}

/// Working point of the quoted sensitivities: ω/2π = 0.28 kHz, g/2π = 4.5 kHz.
pub fn sensitivity_point() -> SystemParams {
    SystemParams::from_lab(0.28, 320.0, 4.5, 0.08, Z_NM, 0.0)
}

/// Closed-system sweep: ω/2π = 4.4 kHz, g/2π = 1.6 kHz, Ω₀/2π = 200 kHz,
/// κ/2π = 9.5 Hz, t_f = 284 ms, F = 46 xN.
pub fn fig5(xi_khz: f64) -> SqueezeProtocolParams {
    let base = SystemParams {
        omega: khz_to_rad_s(4.4),
        field: 0.0,
        g: khz_to_rad_s(1.6),
        gamma: 0.0,
        z: nm(Z_NM),
        force: xn(46.0),
    };
    SqueezeProtocolParams::new(
        base,
        khz_to_rad_s(xi_khz),
        khz_to_rad_s(200.0),
        khz_to_rad_s(9.5e-3),
        0.284,
    )
}

pub const FIG5_XI_MAX_KHZ: f64 = 1.95;

/// ξ grid of the closed-system sweep, kHz.
pub fn fig5_xi_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| FIG5_XI_MAX_KHZ * k as f64 / (points - 1) as f64)
        .collect()
}

/// Damped sweep: γ/2π = 1 Hz, Ω₀/2π = 800 kHz, ω/2π = 5.3 kHz,
/// ξ/2π = 1 kHz, t_f = 120 ms, g as in [`fig5`].
///
/// κ is set so that the field decays by the same factor as in [`fig5`]
/// (`κ t_f` equal in both), keeping the end point deep in the
/// small-field regime.
pub fn damped_sweep() -> SqueezeProtocolParams {
    let reference = fig5(0.0);
    let depth = reference.kappa * reference.t_final;
    let t_final = 0.120;
    let base = SystemParams {
        omega: khz_to_rad_s(5.3),
        field: 0.0,
        g: reference.base.g,
        gamma: khz_to_rad_s(1e-3),
        z: nm(Z_NM),
        force: 0.0,
    };
    SqueezeProtocolParams::new(
        base,
        khz_to_rad_s(1.0),
        khz_to_rad_s(800.0),
        depth / t_final,
        t_final,
    )
}
