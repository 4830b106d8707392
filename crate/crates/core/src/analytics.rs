//! Closed-form steady state of the effective bosonic model.
//!
//! Quadratures are `x = a† + a`, `p = i(a† − a)`, so the vacuum has unit
//! variances and covariance `diag(1, 1)`. Purity is `P = (det σ)^{-1/2}`.
//!
//! All steady-state functions reject `λ ≥ λ_c` with [`Error::Instability`].

use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::hilbert::{fock_ops, HilbertSpec, SystemParams};
use crate::linalg::{self, c, ComplexMatrix, C64};
use crate::units::HBAR;

/// Dimensionless combinations of the physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// `λ = 2g/√(ωΩ)`.
    pub lambda: f64,
    /// `λ_c = √(1 + γ²/ω²)`.
    pub lambda_c: f64,
    /// `F̃ = zF/(ħω)`.
    pub f_tilde: f64,
}

impl DerivedParams {
    /// `λ_c² − λ²`, or an instability error when it is not positive.
    pub fn gap(&self) -> Result<f64> {
        let d = self.lambda_c * self.lambda_c - self.lambda * self.lambda;
        if self.lambda >= self.lambda_c || !(d > 0.0) {
            return Err(Error::Instability {
                lambda: self.lambda,
                lambda_c: self.lambda_c,
            });
        }
        Ok(d)
    }

    pub fn gamma_over_omega(&self) -> f64 {
        (self.lambda_c * self.lambda_c - 1.0).max(0.0).sqrt()
    }

    pub fn with_f_tilde(self, f_tilde: f64) -> Self {
        DerivedParams { f_tilde, ..self }
    }
}

pub fn derived(p: &SystemParams) -> Result<DerivedParams> {
    if !(p.omega > 0.0 && p.field > 0.0) {
        return Err(Error::InvalidParameter(
            "derived couplings need omega > 0 and field > 0".into(),
        ));
    }
    if !(p.gamma >= 0.0 && p.g >= 0.0) {
        return Err(Error::InvalidParameter("g and gamma must be non-negative".into()));
    }
    let goo = p.gamma / p.omega;
    Ok(DerivedParams {
        lambda: 2.0 * p.g / (p.omega * p.field).sqrt(),
        lambda_c: (1.0 + goo * goo).sqrt(),
        f_tilde: p.z * p.force / (HBAR * p.omega),
    })
}

/// `ħω(1 − λ²/2) a†a − ħωλ²/4 (a†² + a²) + zF/2 (a† + a)`.
pub fn effective_hamiltonian(p: &SystemParams, spec: HilbertSpec) -> Result<ComplexMatrix> {
    if spec.include_spin {
        return Err(Error::InvalidSpec(
            "the effective model acts on the oscillator only".into(),
        ));
    }
    p.validate()?;
    let d = derived(p)?;
    let ops = fock_ops(spec)?;
    let l2 = d.lambda * d.lambda;
    let hw = HBAR * p.omega;
    let pair = &ops.a_dag * &ops.a_dag + &ops.a * &ops.a;
    Ok(ops.n.scale(hw * (1.0 - l2 / 2.0)) - pair.scale(hw * l2 / 4.0)
        + ops.x().scale(p.force_energy()))
}

/// `⟨x⟩ = −F̃/(λ_c² − λ²)`.
pub fn x_ss(d: &DerivedParams) -> Result<f64> {
    Ok(-d.f_tilde / d.gap()?)
}

/// Standard deviation `⟨Δx⟩ = √((2λ_c² − λ²)/(2(λ_c² − λ²)))`.
pub fn var_x_ss(d: &DerivedParams) -> Result<f64> {
    let gap = d.gap()?;
    let lc2 = d.lambda_c * d.lambda_c;
    Ok(((2.0 * lc2 - d.lambda * d.lambda) / (2.0 * gap)).sqrt())
}

/// `⟨p⟩ = −F̃ (γ/ω)/(λ_c² − λ²)`.
pub fn p_ss(d: &DerivedParams, gamma_over_omega: f64) -> Result<f64> {
    Ok(-d.f_tilde * gamma_over_omega / d.gap()?)
}

/// Standard deviation `⟨Δp⟩ = √((2λ_c² − 3λ² + λ⁴)/(2(λ_c² − λ²)))`.
pub fn var_p_ss(d: &DerivedParams) -> Result<f64> {
    let gap = d.gap()?;
    let lc2 = d.lambda_c * d.lambda_c;
    let l2 = d.lambda * d.lambda;
    Ok(((2.0 * lc2 - 3.0 * l2 + l2 * l2) / (2.0 * gap)).sqrt())
}

/// `⟨n⟩ = F̃²λ_c²/(4(λ_c² − λ²)²) + λ⁴/(8(λ_c² − λ²))`.
pub fn n_ss(d: &DerivedParams) -> Result<f64> {
    let gap = d.gap()?;
    let f2 = d.f_tilde * d.f_tilde;
    let l4 = d.lambda.powi(4);
    Ok(f2 * d.lambda_c * d.lambda_c / (4.0 * gap * gap) + l4 / (8.0 * gap))
}

/// Phonon-number variance `⟨Δn⟩²`.
pub fn var_n_ss(d: &DerivedParams) -> Result<f64> {
    let gap = d.gap()?;
    let f2 = d.f_tilde * d.f_tilde;
    let l2 = d.lambda * d.lambda;
    let l4 = l2 * l2;
    let l6 = l4 * l2;
    Ok(f2 * l6 / (8.0 * gap.powi(3))
        + l2 / (32.0 * gap * gap) * (l6 + 4.0 * f2 * (l2 + 3.0))
        + (3.0 * l4 + 4.0 * f2) / (16.0 * gap))
}

/// Symmetrized covariance `σ_ij = ½⟨{R_i, R_j}⟩ − ⟨R_i⟩⟨R_j⟩`, `R = (x, p)`.
pub fn covariance_ss(d: &DerivedParams, gamma_over_omega: f64) -> Result<Matrix2<f64>> {
    let gap = d.gap()?;
    let s11 = var_x_ss(d)?.powi(2);
    let s22 = var_p_ss(d)?.powi(2);
    let s12 = d.lambda * d.lambda * gamma_over_omega / (2.0 * gap);
    Ok(Matrix2::new(s11, s12, s12, s22))
}

/// Steady state written as `R(δ) D(α) S(ζ) ρ_th(N) S† D† R†` with
/// `ζ = r e^{2iχ}`, `R(δ) = e^{iδ a†a}` and `D`, `S` as in [`crate::hilbert`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSteadyState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub cov: Matrix2<f64>,
    pub purity: f64,
    pub thermal_n: f64,
    /// Real displacement; negative for a positive force because the
    /// oscillator is pushed towards negative `x`.
    pub disp_alpha: f64,
    pub squeeze_r: f64,
    pub squeeze_chi: f64,
    pub rot_delta: f64,
}

impl GaussianSteadyState {
    pub fn zeta(&self) -> C64 {
        C64::from_polar(self.squeeze_r, 2.0 * self.squeeze_chi)
    }

    /// Thermal weights `p_n = N^n/(N+1)^{n+1}` for `n < levels`.
    pub fn thermal_weights(&self, levels: usize) -> Vec<f64> {
        let nt = self.thermal_n;
        let q = nt / (nt + 1.0);
        (0..levels)
            .map(|n| q.powi(n as i32) / (nt + 1.0))
            .collect()
    }

    /// Builds the density matrix on a bosonic space of `spec.fock_dim`
    /// levels, keeping thermal components up to `thermal_levels`.
    pub fn reconstruct(&self, spec: HilbertSpec, thermal_levels: usize) -> Result<ComplexMatrix> {
        let nf = spec.fock_dim;
        let u = crate::hilbert::rotation(self.rot_delta, spec)?
            * crate::hilbert::displacement(c(self.disp_alpha), spec)?
            * crate::hilbert::squeeze(self.zeta(), spec)?;
        let mut rho = ComplexMatrix::zeros(nf, nf);
        for (n, w) in self.thermal_weights(thermal_levels.min(nf)).iter().enumerate() {
            let col = u.column(n);
            rho += (col * col.adjoint()).scale(*w);
        }
        Ok(rho)
    }
}

pub fn gaussian_decomposition(
    d: &DerivedParams,
    gamma_over_omega: f64,
) -> Result<GaussianSteadyState> {
    let gap = d.gap()?;
    let cov = covariance_ss(d, gamma_over_omega)?;
    let det = cov.determinant();
    let purity = 1.0 / det.sqrt();
    let (s11, s12, s22) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
    let half_trace = 0.5 * (s11 + s22);
    let split = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
    // eigenvalues of σ are e^{±2r}/P
    let squeeze_r = 0.25 * ((half_trace + split) / (half_trace - split)).ln();
    let theta = if split == 0.0 {
        0.0
    } else {
        (2.0 * s12).atan2(s11 - s22)
    };
    let rot_delta = gamma_over_omega.atan();
    Ok(GaussianSteadyState {
        mean_x: x_ss(d)?,
        mean_p: p_ss(d, gamma_over_omega)?,
        cov,
        purity,
        thermal_n: (1.0 - purity) / (2.0 * purity),
        disp_alpha: -d.f_tilde * d.lambda_c / (2.0 * gap),
        squeeze_r,
        squeeze_chi: 0.5 * theta - rot_delta,
        rot_delta,
    })
}

/// `tanh 2r = λ²/√(4(λ_c² − λ²) + λ⁴)`.
pub fn squeeze_r_closed_form(d: &DerivedParams) -> Result<f64> {
    let gap = d.gap()?;
    let l2 = d.lambda * d.lambda;
    Ok(0.5 * (l2 / (4.0 * gap + l2 * l2).sqrt()).atanh())
}

/// `2χ + 2δ` on the branch through 0 at `γ = 0`, from
/// `tan(2χ + 2δ) = 2γ/(ω(2 − λ²))`.
pub fn squeeze_angle_closed_form(d: &DerivedParams, gamma_over_omega: f64) -> f64 {
    let denom = 2.0 - d.lambda * d.lambda;
    let t = (2.0 * gamma_over_omega / denom).atan();
    if denom < 0.0 {
        t + PI
    } else {
        t
    }
}

/// All steady-state quantities at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyMoments {
    pub x: f64,
    pub var_x: f64,
    pub p: f64,
    pub var_p: f64,
    pub n: f64,
    pub var_n: f64,
    pub sigma12: f64,
    pub purity: f64,
}

pub fn steady_moments(d: &DerivedParams, gamma_over_omega: f64) -> Result<SteadyMoments> {
    let cov = covariance_ss(d, gamma_over_omega)?;
    Ok(SteadyMoments {
        x: x_ss(d)?,
        var_x: var_x_ss(d)?,
        p: p_ss(d, gamma_over_omega)?,
        var_p: var_p_ss(d)?,
        n: n_ss(d)?,
        var_n: var_n_ss(d)?,
        sigma12: cov[(0, 1)],
        purity: 1.0 / cov.determinant().sqrt(),
    })
}

/// Oscillator moments of an arbitrary state on `spec`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub cov: Matrix2<f64>,
    pub n: f64,
    pub var_n: f64,
}

impl NumericMoments {
    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }
}

pub fn numeric_moments(rho: &ComplexMatrix, spec: HilbertSpec) -> Result<NumericMoments> {
    linalg::check_square(rho, spec.dim())?;
    let ops = fock_ops(HilbertSpec::bosonic(spec.fock_dim))?;
    let x = spec.lift(&ops.x());
    let p = spec.lift(&ops.p());
    let n = spec.lift(&ops.n);
    let ev = |a: &ComplexMatrix| linalg::trace_product(a, rho).re;
    let (mx, mp) = (ev(&x), ev(&p));
    let xx = ev(&(&x * &x)) - mx * mx;
    let pp = ev(&(&p * &p)) - mp * mp;
    let xp = 0.5 * ev(&(&x * &p + &p * &x)) - mx * mp;
    let mn = ev(&n);
    let nn = ev(&(&n * &n)) - mn * mn;
    Ok(NumericMoments {
        mean_x: mx,
        mean_p: mp,
        cov: Matrix2::new(xx, xp, xp, pp),
        n: mn,
        var_n: nn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(f_tilde: f64, lambda: f64, goo: f64) -> DerivedParams {
        DerivedParams {
            lambda,
            lambda_c: (1.0 + goo * goo).sqrt(),
            f_tilde,
        }
    }

    #[test]
    fn lambda_c_is_one_without_damping() {
        let p = SystemParams::from_lab(0.3, 320.0, 4.0, 0.0, 14.0, 0.0);
        assert_eq!(derived(&p).unwrap().lambda_c, 1.0);
    }

    #[test]
    fn derived_couplings_at_reference_points() {
        let p = SystemParams::from_lab(0.3, 320.0, 4.0, 0.08, 14.0, 0.0);
        assert!((derived(&p).unwrap().lambda - 8.0 / 96f64.sqrt()).abs() < 1e-12);
        let p = SystemParams::from_lab(0.28, 320.0, 4.5, 0.08, 14.0, 0.0);
        let d = derived(&p).unwrap();
        assert!((d.lambda - 0.9508).abs() < 1e-4);
        assert!((d.lambda_c.powi(2) - 1.0816).abs() < 1e-4);
    }

    #[test]
    fn uncoupled_undamped_limits() {
        let d = params(0.6, 0.0, 0.0);
        assert!((x_ss(&d).unwrap() + 0.6).abs() < 1e-15);
        assert_eq!(var_x_ss(&d).unwrap(), 1.0);
        assert_eq!(var_p_ss(&d).unwrap(), 1.0);
        assert_eq!(p_ss(&d, 0.0).unwrap(), 0.0);
        assert!((n_ss(&d).unwrap() - 0.09).abs() < 1e-15);
        let cov = covariance_ss(&d, 0.0).unwrap();
        assert_eq!(cov, Matrix2::identity());
        let g = gaussian_decomposition(&d, 0.0).unwrap();
        assert_eq!(g.squeeze_r, 0.0);
        assert_eq!(g.rot_delta, 0.0);
        assert_eq!(g.squeeze_chi, 0.0);
        assert!((g.purity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn instability_is_reported() {
        let d = params(0.1, 1.2, 0.5);
        assert!(matches!(x_ss(&d), Err(Error::Instability { .. })));
        assert!(matches!(gaussian_decomposition(&d, 0.5), Err(Error::Instability { .. })));
    }

    #[test]
    fn gaussian_parameters_match_closed_forms() {
        for &(lambda, goo) in &[(0.3, 0.1), (0.8, 0.27), (1.3, 1.5), (0.99, 0.0)] {
            let d = params(0.4, lambda, goo);
            let g = gaussian_decomposition(&d, goo).unwrap();
            assert!((g.squeeze_r - squeeze_r_closed_form(&d).unwrap()).abs() < 1e-12);
            let angle = 2.0 * (g.squeeze_chi + g.rot_delta);
            assert!((angle - squeeze_angle_closed_form(&d, goo)).abs() < 1e-12);
            assert!((g.rot_delta.tan() - goo).abs() < 1e-12);
            let gap = d.gap().unwrap();
            assert!((g.disp_alpha.abs() - 0.4 * d.lambda_c / (2.0 * gap)).abs() < 1e-12);
        }
    }
}
