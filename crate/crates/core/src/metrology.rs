//! Force sensitivities and quantum Fisher information.
//!
//! Closed-form sensitivities are per shot (`ν = 1`); apply a
//! [`RepetitionBudget`] to include repetitions.

use nalgebra::{Matrix2, Vector2};

use crate::analytics::{self, DerivedParams, GaussianSteadyState};
use crate::dynamics::{self, DensityMatrix, SteadyConfig};
use crate::error::{Error, Result};
use crate::hilbert::{self, fock_state, spin_minus, tensor_vec, HilbertSpec, SystemParams};
use crate::linalg::{self, c, ComplexMatrix, C64};
use crate::units::HBAR;

/// Total measurement time split into repeated cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionBudget {
    pub total_time: f64,
    pub cycle_time: f64,
}

impl RepetitionBudget {
    pub fn new(total_time: f64, cycle_time: f64) -> Result<Self> {
        if !(cycle_time > 0.0 && total_time >= cycle_time) {
            return Err(Error::InvalidParameter(
                "repetition budget needs total_time >= cycle_time > 0".into(),
            ));
        }
        Ok(RepetitionBudget {
            total_time,
            cycle_time,
        })
    }

    pub fn single_shot() -> Self {
        RepetitionBudget {
            total_time: 1.0,
            cycle_time: 1.0,
        }
    }

    pub fn nu(&self) -> f64 {
        self.total_time / self.cycle_time
    }

    /// Scales a single-shot sensitivity by `1/√ν`.
    pub fn apply(&self, delta_f: f64) -> f64 {
        delta_f / self.nu().sqrt()
    }
}

/// Which steady-state observable is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    X,
    P,
    N,
}

impl Readout {
    pub fn label(&self) -> &'static str {
        match self {
            Readout::X => "x",
            Readout::P => "p",
            Readout::N => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub observable: String,
    pub signal: f64,
    /// Standard deviation `⟨ΔA⟩` of the observable.
    pub std_dev: f64,
    /// `∂⟨A⟩/∂F`, per newton.
    pub d_signal_d_f: f64,
    pub delta_f: f64,
    pub nu: f64,
}

/// `δF = ⟨ΔA⟩ / (√ν |∂⟨A⟩/∂F|)`.
pub fn shot_noise_delta_f(std_dev: f64, d_signal_d_f: f64, nu: f64) -> Result<f64> {
    if d_signal_d_f == 0.0 || !d_signal_d_f.is_finite() {
        return Err(Error::NoSensitivity);
    }
    if !(nu >= 1.0) {
        return Err(Error::InvalidParameter("repetition number must be >= 1".into()));
    }
    Ok(std_dev / (nu.sqrt() * d_signal_d_f.abs()))
}

fn checked(p: &SystemParams) -> Result<(DerivedParams, f64)> {
    p.validate()?;
    let d = analytics::derived(p)?;
    let gap = d.gap()?;
    if p.z == 0.0 {
        return Err(Error::NoSensitivity);
    }
    Ok((d, gap))
}

/// `δF_x = (ħω/(√2 z)) √((2λ_c² − λ²)(λ_c² − λ²))`.
pub fn delta_f_x(p: &SystemParams) -> Result<f64> {
    let (d, gap) = checked(p)?;
    let lc2 = d.lambda_c * d.lambda_c;
    Ok(HBAR * p.omega / (2f64.sqrt() * p.z) * ((2.0 * lc2 - d.lambda * d.lambda) * gap).sqrt())
}

/// `δF_p = (ħω²/(√2 zγ)) √((2λ_c² − 3λ² + λ⁴)(λ_c² − λ²))`; no signal at `γ = 0`.
pub fn delta_f_p(p: &SystemParams) -> Result<f64> {
    let (d, gap) = checked(p)?;
    if p.gamma == 0.0 {
        return Err(Error::NoSignal);
    }
    let lc2 = d.lambda_c * d.lambda_c;
    let l2 = d.lambda * d.lambda;
    Ok(HBAR * p.omega * p.omega / (2f64.sqrt() * p.z * p.gamma)
        * ((2.0 * lc2 - 3.0 * l2 + l2 * l2) * gap).sqrt())
}

/// Phonon-number signal-to-noise ratio `⟨n⟩/⟨Δn⟩` at the force in `d`.
pub fn number_snr(d: &DerivedParams) -> Result<f64> {
    Ok(analytics::n_ss(d)? / analytics::var_n_ss(d)?.sqrt())
}

const BRACKET_EXPANSIONS: usize = 6;

/// Force at which the phonon-number SNR reaches one, by bisection.
pub fn delta_f_n(p: &SystemParams) -> Result<f64> {
    let (d, _) = checked(p)?;
    let scale = p.z / (HBAR * p.omega);
    let snr = |f: f64| number_snr(&d.with_f_tilde(f * scale)).map(|s| s - 1.0);
    let fx = delta_f_x(p)?;
    let (mut lo, mut hi) = (1e-3 * fx, 1e3 * fx);
    let mut expansions = 0;
    while !(snr(lo)? < 0.0 && snr(hi)? > 0.0) {
        if expansions == BRACKET_EXPANSIONS {
            return Err(Error::NoBracket { lo, hi });
        }
        lo /= 10.0;
        hi *= 10.0;
        expansions += 1;
    }
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if snr(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `I_Q = (√2 z/ħω)² (2λ_c² − λ²) / ((λ_c² − λ²)(4(λ_c² − λ²) + λ⁴))`.
pub fn qfi_closed_form(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    let d = analytics::derived(p)?;
    let gap = d.gap()?;
    let lc2 = d.lambda_c * d.lambda_c;
    let l2 = d.lambda * d.lambda;
    let s = 2f64.sqrt() * p.z / (HBAR * p.omega);
    Ok(s * s * (2.0 * lc2 - l2) / (gap * (4.0 * gap + l2 * l2)))
}

/// `1/√(ν I_Q)`.
pub fn cramer_rao(qfi: f64, nu: f64) -> Result<f64> {
    if !(qfi > 0.0) {
        return Err(Error::NoSensitivity);
    }
    Ok(1.0 / (nu * qfi).sqrt())
}

pub fn delta_f_q(p: &SystemParams) -> Result<f64> {
    cramer_rao(qfi_closed_form(p)?, 1.0)
}

/// `∂_F (⟨x⟩, ⟨p⟩)`, per newton.
pub fn mean_derivative(p: &SystemParams) -> Result<Vector2<f64>> {
    p.validate()?;
    let d = analytics::derived(p)?;
    let gap = d.gap()?;
    let k = p.z / (HBAR * p.omega) / gap;
    Ok(Vector2::new(-k, -k * p.gamma / p.omega))
}

/// `ΔX′ᵀ σ⁻¹ ΔX′` for Gaussian states with force-independent covariance.
pub fn qfi_covariance(mean_derivative: &Vector2<f64>, cov: &Matrix2<f64>) -> Result<f64> {
    let det = cov.determinant();
    if !(det.abs() > 1e-300) {
        return Err(Error::Numerical("singular covariance matrix".into()));
    }
    let inv = cov
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular covariance matrix".into()))?;
    Ok((mean_derivative.transpose() * inv * mean_derivative)[(0, 0)])
}

pub fn sensitivity_report(
    p: &SystemParams,
    readout: Readout,
    budget: &RepetitionBudget,
) -> Result<SensitivityReport> {
    let (d, _) = checked(p)?;
    let goo = p.gamma / p.omega;
    let nu = budget.nu();
    let (signal, std_dev, slope) = match readout {
        Readout::X => {
            let k = mean_derivative(p)?;
            (analytics::x_ss(&d)?, analytics::var_x_ss(&d)?, k[0])
        }
        Readout::P => {
            if p.gamma == 0.0 {
                return Err(Error::NoSignal);
            }
            let k = mean_derivative(p)?;
            (analytics::p_ss(&d, goo)?, analytics::var_p_ss(&d)?, k[1])
        }
        Readout::N => {
            // the number readout is reported at its SNR = 1 point
            let f = delta_f_n(p)?;
            let q = p.with_force(f);
            let dq = analytics::derived(&q)?;
            let n = analytics::n_ss(&dq)?;
            let sd = analytics::var_n_ss(&dq)?.sqrt();
            let gap = dq.gap()?;
            let slope = dq.f_tilde * dq.lambda_c.powi(2) / (2.0 * gap * gap) * p.z / (HBAR * p.omega);
            return Ok(SensitivityReport {
                observable: readout.label().into(),
                signal: n,
                std_dev: sd,
                d_signal_d_f: slope,
                delta_f: budget.apply(f),
                nu,
            });
        }
    };
    Ok(SensitivityReport {
        observable: readout.label().into(),
        signal,
        std_dev,
        d_signal_d_f: slope,
        delta_f: shot_noise_delta_f(std_dev, slope, nu)?,
        nu,
    })
}

/// Uhlmann fidelity `(Tr √(√ρ₁ ρ₂ √ρ₁))²`.
pub fn uhlmann_fidelity(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> f64 {
    let s = linalg::sqrt_psd(rho1);
    let m = &s * rho2 * &s;
    let root_trace: f64 = linalg::hermitian_eigenvalues(&m)
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .sum();
    root_trace * root_trace
}

/// Which Hamiltonian the fidelity oracle uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleModel {
    /// Effective bosonic model; `spec` must be bosonic.
    Effective,
    /// Full Rabi model; `spec` must include the spin.
    Rabi,
}

/// How the oracle obtains steady states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyProvider {
    /// Liouvillian null space.
    Direct,
    /// Evolution from `|−⟩|0⟩` (or the vacuum) for a fixed horizon.
    Plateau { horizon: f64, cfg: SteadyConfig },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityQfi {
    /// Richardson-extrapolated estimate.
    pub qfi: f64,
    /// Central-difference estimates at `ε` and `ε/2`.
    pub coarse: f64,
    pub fine: f64,
    pub epsilon: f64,
}

impl FidelityQfi {
    /// Relative change between the two step sizes.
    pub fn richardson_gap(&self) -> f64 {
        (self.coarse - self.fine).abs() / self.qfi.abs()
    }
}

/// Force step giving a dimensionless step `F̃ = 10⁻²`.
pub fn default_epsilon(p: &SystemParams) -> f64 {
    1e-2 * HBAR * p.omega / p.z
}

/// Steady state of `model` at the parameters `p`.
pub fn model_steady_state(
    p: &SystemParams,
    spec: HilbertSpec,
    model: OracleModel,
    provider: SteadyProvider,
) -> Result<DensityMatrix> {
    let h = match model {
        OracleModel::Effective => analytics::effective_hamiltonian(p, spec)?,
        OracleModel::Rabi => hilbert::rabi_hamiltonian(p, spec)?,
    };
    let jump = dynamics::jump_operator(spec)?;
    match provider {
        SteadyProvider::Direct => Ok(dynamics::steady_state_direct(&h, p.gamma, &jump, spec)?.rho),
        SteadyProvider::Plateau { horizon, cfg } => {
            let vac = fock_state(spec.fock_dim, 0);
            let psi0 = if spec.include_spin {
                tensor_vec(&spin_minus(), &vac)
            } else {
                vac
            };
            let rho0 = DensityMatrix::pure(&psi0);
            Ok(dynamics::relax_for(&rho0, &h, p.gamma, &jump, horizon, &cfg)?.rho)
        }
    }
}

fn central_qfi(a: &DensityMatrix, b: &DensityMatrix, step: f64) -> Result<f64> {
    let fid = uhlmann_fidelity(a.matrix(), b.matrix());
    if fid > 1.0 + 1e-8 {
        return Err(Error::FidelityOverflow { fidelity: fid });
    }
    Ok(8.0 * (1.0 - fid.min(1.0).sqrt()) / (2.0 * step).powi(2))
}

/// Fidelity-based QFI, `8(1 − √Fid(ρ_{F−ε}, ρ_{F+ε}))/(2ε)²`, evaluated at
/// `ε` and `ε/2` and combined by Richardson extrapolation.
pub fn qfi_fidelity_oracle(
    p: &SystemParams,
    spec: HilbertSpec,
    model: OracleModel,
    provider: SteadyProvider,
    epsilon: f64,
) -> Result<FidelityQfi> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let state = |f: f64| model_steady_state(&p.with_force(f), spec, model, provider);
    let f0 = p.force;
    let coarse = central_qfi(&state(f0 - epsilon)?, &state(f0 + epsilon)?, epsilon)?;
    let h = 0.5 * epsilon;
    let fine = central_qfi(&state(f0 - h)?, &state(f0 + h)?, h)?;
    Ok(FidelityQfi {
        qfi: (4.0 * fine - coarse) / 3.0,
        coarse,
        fine,
        epsilon,
    })
}

/// Parameters of `Λ_F = 2(∂_F α) U (β a† + β* a) U†`, `U = R(δ) D(α) S(ζ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SldParameters {
    pub beta: C64,
    /// `2 ∂_F α`, per newton.
    pub prefactor: f64,
}

/// `∂_F α` for the steady state at `p`, per newton.
pub fn d_alpha_d_f(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    let d = analytics::derived(p)?;
    let gap = d.gap()?;
    Ok(-p.z / (HBAR * p.omega) * d.lambda_c / (2.0 * gap))
}

/// `β = P(cosh r − e^{2iχ} sinh r)` and `2∂_F α`.
pub fn sld_parameters(g: &GaussianSteadyState, d_alpha_d_f: f64) -> SldParameters {
    let r = g.squeeze_r;
    let phase = C64::from_polar(1.0, 2.0 * g.squeeze_chi);
    SldParameters {
        beta: (c(r.cosh()) - phase * r.sinh()) * g.purity,
        prefactor: 2.0 * d_alpha_d_f,
    }
}

/// The SLD as a matrix on a bosonic space.
pub fn sld_matrix(
    g: &GaussianSteadyState,
    sld: &SldParameters,
    spec: HilbertSpec,
) -> Result<ComplexMatrix> {
    let ops = hilbert::fock_ops(spec)?;
    let u = hilbert::rotation(g.rot_delta, spec)?
        * hilbert::displacement(c(g.disp_alpha), spec)?
        * hilbert::squeeze(g.zeta(), spec)?;
    let inner = &ops.a_dag * sld.beta + &ops.a * sld.beta.conj();
    Ok((&u * inner * u.adjoint()).scale(sld.prefactor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::yn;

    fn fig4() -> SystemParams {
        SystemParams::from_lab(0.28, 320.0, 4.5, 0.08, 14.0, 0.0)
    }

    #[test]
    fn shot_noise_basics() {
        assert_eq!(shot_noise_delta_f(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((shot_noise_delta_f(1.0, 1.0, 100.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(shot_noise_delta_f(1.0, 0.0, 1.0), Err(Error::NoSensitivity));
    }

    #[test]
    fn quoted_sensitivities() {
        let fx = delta_f_x(&fig4()).unwrap() / yn(1.0);
        assert!((fx - 4.4).abs() / 4.4 < 0.02, "{fx}");
        let fnum = delta_f_n(&fig4()).unwrap() / yn(1.0);
        assert!((fnum - 7.8).abs() / 7.8 < 0.05, "{fnum}");
    }

    #[test]
    fn momentum_without_damping_has_no_signal() {
        let p = SystemParams { gamma: 0.0, ..fig4() };
        assert_eq!(delta_f_p(&p), Err(Error::NoSignal));
    }

    #[test]
    fn number_threshold_in_the_coherent_limit() {
        // λ = 0, γ = 0: ⟨n⟩ = ⟨Δn⟩² = F̃²/4, so SNR = 1 at F̃ = 2
        let mut p = SystemParams::from_lab(0.3, 320.0, 0.0, 0.0, 14.0, 0.0);
        p.g = 0.0;
        let f = delta_f_n(&p).unwrap();
        let expect = 2.0 * HBAR * p.omega / p.z;
        assert!((f - expect).abs() / expect < 1e-3);
    }

    #[test]
    fn covariance_form_matches_closed_form() {
        let p = fig4();
        let d = analytics::derived(&p).unwrap();
        let cov = analytics::covariance_ss(&d, p.gamma / p.omega).unwrap();
        let a = qfi_covariance(&mean_derivative(&p).unwrap(), &cov).unwrap();
        let b = qfi_closed_form(&p).unwrap();
        assert!((a - b).abs() / b < 1e-10);
    }

    #[test]
    fn coherent_limit_qfi_equals_quadrature_bound() {
        let mut p = fig4();
        p.g = 0.0;
        p.gamma = 0.0;
        let fq = delta_f_q(&p).unwrap();
        let fx = delta_f_x(&p).unwrap();
        assert!((fq - fx).abs() / fx < 1e-12);
        assert!((fx - HBAR * p.omega / p.z).abs() / fx < 1e-12);
    }

    #[test]
    fn sld_of_coherent_state_has_unit_beta() {
        let mut p = fig4();
        p.g = 0.0;
        p.gamma = 0.0;
        let d = analytics::derived(&p).unwrap();
        let g = analytics::gaussian_decomposition(&d, 0.0).unwrap();
        let s = sld_parameters(&g, 1.0);
        assert!((s.beta - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn fidelity_of_identical_states_is_one() {
        let rho = DensityMatrix::pure(&[c(0.6), C64::new(0.0, 0.8)]);
        let f = uhlmann_fidelity(rho.matrix(), rho.matrix());
        assert!((f - 1.0).abs() < 1e-12);
    }
}
