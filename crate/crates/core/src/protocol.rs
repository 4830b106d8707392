//! Adiabatic sweep of the transverse field with a squeezed oscillator.
//!
//! The spin starts in `|−⟩|0⟩` at a large field `Ω₀`, which then decays as
//! `Ω₀ e^{−κt}`. At the end the spin polarization `⟨σ_z⟩` carries the force.

use std::cell::Cell;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::dynamics::{
    self, DensityMatrix, Drive, Envelope, EvolveConfig, Hamiltonian, Observable, Series,
    SweepResult,
};
use crate::error::{Error, Result};
use crate::hilbert::{
    self, fock_ops, fock_state, pauli, spin_minus, spin_op, tensor_vec, HilbertSpec, SystemParams,
};
use crate::linalg::{self, c, C64};
use crate::units::HBAR;

/// Integrator steps per period of the instantaneous transverse field.
pub const STEPS_PER_FIELD_PERIOD: f64 = 20.0;

/// Minimum `ΔE·t_f/ħ` for the two-state reduction to count as adiabatic.
pub const ADIABATIC_PRODUCT: f64 = 50.0;

/// Largest `Ω(t_f)/ω` accepted without a warning.
pub const ENDPOINT_FIELD_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeProtocolParams {
    /// Oscillator, coupling, damping, `z` and force; `base.field` is unused.
    pub base: SystemParams,
    /// Squeezing rate ξ (rad/s).
    pub xi: f64,
    /// Squeezing phase φ (radians).
    pub phi: f64,
    /// Initial transverse field Ω₀ (rad/s).
    pub omega0: f64,
    /// Sweep rate κ (1/s).
    pub kappa: f64,
    pub t_final: f64,
}

/// Conditions under which the two-state reduction is questionable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolWarning {
    /// `ΔE·t_f/ħ` below [`ADIABATIC_PRODUCT`].
    Nonadiabatic { product: f64 },
    /// `Ω(t_f)/ω` above [`ENDPOINT_FIELD_RATIO`].
    EndpointField { ratio: f64 },
}

impl std::fmt::Display for ProtocolWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProtocolWarning::Nonadiabatic { product } => {
                write!(f, "sweep may be non-adiabatic: dE*t_f/hbar = {product:.3}")
            }
            ProtocolWarning::EndpointField { ratio } => {
                write!(f, "final field not small: Omega(t_f)/omega = {ratio:.3}")
            }
        }
    }
}

impl SqueezeProtocolParams {
    pub fn new(base: SystemParams, xi: f64, omega0: f64, kappa: f64, t_final: f64) -> Self {
        SqueezeProtocolParams {
            base,
            xi,
            phi: PI,
            omega0,
            kappa,
            t_final,
        }
    }

    pub fn with_force(self, force: f64) -> Self {
        SqueezeProtocolParams {
            base: self.base.with_force(force),
            ..self
        }
    }

    pub fn with_xi(self, xi: f64) -> Self {
        SqueezeProtocolParams { xi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.base.omega > 0.0) {
            return Err(Error::InvalidParameter("omega must be positive".into()));
        }
        if !(self.xi >= 0.0) {
            return Err(Error::InvalidParameter("xi must be >= 0".into()));
        }
        if 2.0 * self.xi >= self.base.omega {
            return Err(Error::SpectrumCollapse {
                two_xi: 2.0 * self.xi,
                omega: self.base.omega,
            });
        }
        if !(self.omega0 > 0.0 && self.kappa > 0.0 && self.t_final > 0.0) {
            return Err(Error::InvalidParameter(
                "Omega0, kappa and t_final must be positive".into(),
            ));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter("phi must be finite".into()));
        }
        Ok(())
    }

    /// `ħω√(1 − (2ξ/ω)²)`, the Ω = 0 level spacing.
    pub fn level_spacing(&self) -> f64 {
        let q = 2.0 * self.xi / self.base.omega;
        HBAR * self.base.omega * (1.0 - q * q).sqrt()
    }

    pub fn warnings(&self) -> Vec<ProtocolWarning> {
        let mut out = Vec::new();
        let product = self.level_spacing() / HBAR * self.t_final;
        if product < ADIABATIC_PRODUCT {
            out.push(ProtocolWarning::Nonadiabatic { product });
        }
        let ratio = omega_schedule(self.omega0, self.kappa, self.t_final) / self.base.omega;
        if ratio > ENDPOINT_FIELD_RATIO {
            out.push(ProtocolWarning::EndpointField { ratio });
        }
        out
    }
}

/// `Ω₀ e^{−κt}`.
pub fn omega_schedule(omega0: f64, kappa: f64, t: f64) -> f64 {
    omega0 * (-kappa * t).exp()
}

/// Two-level description of the Ω = 0 ground manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateModel {
    /// `(ħΩ₀/2)⟨ψ↓|σ_x ⊗ I|ψ↑⟩`, joules.
    pub delta_c: f64,
    /// `⟨ψ↓|σ_x ⊗ I|ψ↑⟩`; multiply by `ħΩ/2` for other fields.
    pub overlap: f64,
    /// `zF α_s`, joules.
    pub f_up: f64,
    pub f_down: f64,
    pub alpha_up: f64,
    pub alpha_down: f64,
    /// Squeezing of the Ω = 0 eigenstates, `¼ ln((ω + 2ξ)/(ω − 2ξ))`.
    pub r_exact: f64,
    /// Analytic level spacing, joules.
    pub spacing: f64,
}

impl TwoStateModel {
    pub fn coupling(&self, field: f64) -> f64 {
        0.5 * HBAR * field * self.overlap
    }
}

/// Ω = 0 spectrum of the squeezed Rabi Hamiltonian (ascending, joules) and
/// the two-state model built from `D(α_s)S(r)|s⟩|0⟩`.
pub fn exact_spectrum_no_field(
    p: &SqueezeProtocolParams,
    spec: HilbertSpec,
) -> Result<(Vec<f64>, TwoStateModel)> {
    p.validate()?;
    let base = SystemParams {
        field: 0.0,
        ..p.base
    };
    let h = hilbert::squeezed_rabi_hamiltonian(&base, p.xi, p.phi, spec)?;
    let eigenvalues = linalg::hermitian_eigenvalues(&h);

    let w = p.base.omega;
    let alpha_up = -p.base.g / (w - 2.0 * p.xi);
    let alpha_down = -alpha_up;
    let r_exact = 0.25 * ((w + 2.0 * p.xi) / (w - 2.0 * p.xi)).ln();
    let bosonic = HilbertSpec::bosonic(spec.fock_dim);
    // squeeze axis follows the phase of the pair term: S(r e^{i(φ+π)})
    let zeta = C64::from_polar(r_exact, p.phi + PI);
    let s = hilbert::squeeze(zeta, bosonic)?;
    let vac = fock_state(spec.fock_dim, 0);
    let phonon = |alpha: f64| -> Result<Vec<C64>> {
        let u = hilbert::displacement(c(alpha), bosonic)? * &s;
        Ok((0..spec.fock_dim)
            .map(|k| (0..spec.fock_dim).map(|j| u[(k, j)] * vac[j]).sum())
            .collect())
    };
    let up = tensor_vec(&[c(1.0), c(0.0)], &phonon(alpha_up)?);
    let down = tensor_vec(&[c(0.0), c(1.0)], &phonon(alpha_down)?);
    let sx = spin_op(&pauli().x, spec);
    let overlap: C64 = (0..up.len())
        .map(|i| {
            let row: C64 = (0..up.len()).map(|j| sx[(i, j)] * up[j]).sum();
            down[i].conj() * row
        })
        .sum();
    let zf = p.base.z * p.base.force;
    Ok((
        eigenvalues,
        TwoStateModel {
            delta_c: 0.5 * HBAR * p.omega0 * overlap.re,
            overlap: overlap.re,
            f_up: zf * alpha_up,
            f_down: zf * alpha_down,
            alpha_up,
            alpha_down,
            r_exact,
            spacing: p.level_spacing(),
        },
    ))
}

/// Two-state prediction `tanh(πgF̃/(κ(1 − 2ξ/ω)))`.
pub fn demkov_sigma_z(p: &SqueezeProtocolParams) -> Result<f64> {
    p.validate()?;
    let b = &p.base;
    let f_tilde = b.z * b.force / (HBAR * b.omega);
    Ok((PI * b.g * f_tilde / (p.kappa * (1.0 - 2.0 * p.xi / b.omega))).tanh())
}

/// `artanh(1/√2)`: the Demkov argument at which SNR = 1.
pub fn snr_threshold_argument() -> f64 {
    FRAC_1_SQRT_2.atanh()
}

/// `|⟨σ_z⟩|/√(1 − ⟨σ_z⟩²)`.
pub fn spin_snr(sigma_z: f64) -> f64 {
    sigma_z.abs() / (1.0 - sigma_z * sigma_z).max(0.0).sqrt()
}

/// `F_min = u*κ(1 − 2ξ/ω)ħω/(πgz)`.
pub fn min_force_demkov(p: &SqueezeProtocolParams) -> Result<f64> {
    p.validate()?;
    let b = &p.base;
    if b.g == 0.0 || b.z == 0.0 {
        return Err(Error::NoSensitivity);
    }
    Ok(snr_threshold_argument() * p.kappa * (1.0 - 2.0 * p.xi / b.omega) * HBAR * b.omega
        / (PI * b.g * b.z))
}

/// Time-dependent Hamiltonian of the sweep.
pub fn sweep_hamiltonian(p: &SqueezeProtocolParams, spec: HilbertSpec) -> Result<Hamiltonian> {
    p.validate()?;
    let parts = hilbert::rabi_parts(&p.base, p.xi, p.phi, spec)?;
    Ok(Hamiltonian::Driven {
        fixed: parts.fixed,
        drive: Drive {
            op: parts.transverse,
            envelope: Envelope::Exponential {
                initial: p.omega0,
                rate: p.kappa,
            },
            steps_per_period: Some(STEPS_PER_FIELD_PERIOD),
        },
    })
}

/// Labels of the series recorded by [`simulate_sweep`].
pub const SIGMA_Z: &str = "sigma_z";
pub const DELTA_SIGMA_Z: &str = "delta_sigma_z";
pub const PHONONS: &str = "n";

/// Runs the sweep from `|−⟩|0⟩` to `p.t_final`, which overrides
/// `cfg.t_final`. Uses the state-vector path when `γ = 0`.
pub fn simulate_sweep(
    p: &SqueezeProtocolParams,
    spec: HilbertSpec,
    cfg: &EvolveConfig,
) -> Result<SweepResult> {
    let h = sweep_hamiltonian(p, spec)?;
    let mut cfg = *cfg;
    cfg.t_final = p.t_final;
    cfg.record_every = cfg.record_every.min(p.t_final);
    let ops = fock_ops(HilbertSpec::bosonic(spec.fock_dim))?;
    let observables: Vec<Observable> = vec![
        (SIGMA_Z.into(), spin_op(&pauli().z, spec)),
        (PHONONS.into(), spec.lift(&ops.n)),
    ];
    let psi0 = tensor_vec(&spin_minus(), &fock_state(spec.fock_dim, 0));
    let mut result = if p.base.gamma == 0.0 {
        dynamics::schrodinger_evolve(&psi0, &h, spec, &cfg, &observables)?
    } else {
        let jump = dynamics::jump_operator(spec)?;
        dynamics::evolve(
            &DensityMatrix::pure(&psi0),
            &h,
            p.base.gamma,
            &jump,
            spec,
            &cfg,
            &observables,
        )?
    };
    let spread: Vec<f64> = result.observables[0]
        .values
        .iter()
        .map(|s| (1.0 - s * s).max(0.0).sqrt())
        .collect();
    result.observables.insert(
        1,
        Series {
            label: DELTA_SIGMA_Z.into(),
            values: spread,
        },
    );
    Ok(result)
}

/// Final `⟨σ_z⟩` of a sweep.
pub fn final_sigma_z(
    p: &SqueezeProtocolParams,
    spec: HilbertSpec,
    cfg: &EvolveConfig,
) -> Result<f64> {
    let r = simulate_sweep(p, spec, cfg)?;
    Ok(*r.observables[0].values.last().expect("non-empty series"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericMinForce {
    pub force: f64,
    /// `⟨σ_z(t_f)⟩` at the returned force.
    pub sigma_z: f64,
    pub sweeps: usize,
    pub warnings: Vec<ProtocolWarning>,
    /// Set when any sweep flagged the Fock truncation.
    pub truncation_unsafe: bool,
}

const MAX_SWEEPS: usize = 40;

/// Force at which the simulated spin SNR equals one.
///
/// The root is bracketed around the two-state estimate and refined by
/// Illinois false position on `artanh|⟨σ_z⟩| − artanh(1/√2)`, which is close
/// to linear in F, until successive iterates agree to `rel_tol`.
pub fn min_force_numeric(
    p: &SqueezeProtocolParams,
    spec: HilbertSpec,
    cfg: &EvolveConfig,
    rel_tol: f64,
) -> Result<NumericMinForce> {
    p.validate()?;
    let u_star = snr_threshold_argument();
    let sweeps = Cell::new(0usize);
    let unsafe_trunc = Cell::new(false);
    let eval = |f: f64| -> Result<(f64, f64)> {
        let r = simulate_sweep(&p.with_force(f), spec, cfg)?;
        sweeps.set(sweeps.get() + 1);
        unsafe_trunc.set(unsafe_trunc.get() | r.truncation_unsafe);
        let s = *r.observables[0].values.last().expect("non-empty series");
        let u = s.abs().min(1.0 - 1e-15).atanh();
        Ok((u - u_star, s))
    };
    let guess = min_force_demkov(p)?;
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    let (mut g_lo, mut s_lo) = eval(lo)?;
    let (mut g_hi, mut s_hi) = eval(hi)?;
    let mut expansions = 0;
    while g_lo > 0.0 {
        if expansions == 8 {
            return Err(Error::NoBracket { lo, hi });
        }
        hi = lo;
        g_hi = g_lo;
        s_hi = s_lo;
        lo *= 0.25;
        (g_lo, s_lo) = eval(lo)?;
        expansions += 1;
    }
    while g_hi < 0.0 {
        if expansions == 8 {
            return Err(Error::NoBracket { lo, hi });
        }
        lo = hi;
        g_lo = g_hi;
        s_lo = s_hi;
        hi *= 4.0;
        (g_hi, s_hi) = eval(hi)?;
        expansions += 1;
    }
    let mut side = 0i8;
    let mut prev = f64::NAN;
    let (mut best, mut best_s) = if g_lo.abs() < g_hi.abs() {
        (lo, s_lo)
    } else {
        (hi, s_hi)
    };
    while sweeps.get() < MAX_SWEEPS {
        let f = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        let (gf, sf) = eval(f)?;
        best = f;
        best_s = sf;
        if gf == 0.0 || (f - prev).abs() <= rel_tol * f || (hi - lo) <= rel_tol * f {
            break;
        }
        prev = f;
        if gf < 0.0 {
            lo = f;
            g_lo = gf;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = f;
            g_hi = gf;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    if sweeps.get() >= MAX_SWEEPS {
        return Err(Error::NotConverged {
            t: p.t_final,
            residual: (best_s.abs() - FRAC_1_SQRT_2).abs(),
        });
    }
    Ok(NumericMinForce {
        force: best,
        sigma_z: best_s,
        sweeps: sweeps.get(),
        warnings: p.warnings(),
        truncation_unsafe: unsafe_trunc.get(),
    })
}
