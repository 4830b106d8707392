//! Quick oracle-equivalence checks, one PASS/FAIL line each.

use rabi_sense::analytics::{self, numeric_moments};
use rabi_sense::dynamics::{
    evolve, jump_operator, steady_state_direct, steady_state_evolve, DensityMatrix, EvolveConfig,
    Hamiltonian, SteadyConfig,
};
use rabi_sense::hilbert::{self, fock_state, spin_minus, tensor_vec};
use rabi_sense::linalg;
use rabi_sense::metrology::{self, RepetitionBudget, Readout};
use rabi_sense::presets;
use rabi_sense::protocol;
use rabi_sense::units::yn;
use rabi_sense::{HilbertSpec, SystemParams};

use crate::error::{CliError, Result};

type Check = fn() -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 8] = [
    ("qfi closed form equals covariance form", qfi_forms),
    ("null-space steady state matches closed-form moments", null_space_moments),
    ("evolved and null-space steady states coincide", evolve_vs_direct),
    ("SLD identities", sld_identities),
    ("unprojected evolution keeps a valid density matrix", lindblad_invariants),
    ("Cramer-Rao ordering", cramer_rao_ordering),
    ("two-state sweep signal is odd in F and grows with xi", demkov_shape),
    ("quoted sensitivities", quoted_sensitivities),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn grid() -> Vec<SystemParams> {
    let mut out = Vec::new();
    for &w in &[0.28, 0.30, 0.32] {
        for &frac in &[0.2, 0.5, 0.8, 0.95, 0.99] {
            let p = SystemParams::from_lab(w, 320.0, 1.0, 0.08, presets::Z_NM, 5.0);
            let d = analytics::derived(&p).expect("valid preset");
            let g = p.g * frac * d.lambda_c / d.lambda;
            out.push(p.with_g(g));
        }
    }
    out
}

fn qfi_forms() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for p in grid() {
        let d = analytics::derived(&p)?;
        let cov = analytics::covariance_ss(&d, p.gamma / p.omega)?;
        let a = metrology::qfi_closed_form(&p)?;
        let b = metrology::qfi_covariance(&metrology::mean_derivative(&p)?, &cov)?;
        worst = worst.max(rel(b, a));
    }
    Ok((worst < 1e-10, format!("worst relative difference {worst:.1e}")))
}

fn null_space_moments() -> Result<(bool, String)> {
    let p = presets::fig2(0.30, 4.0);
    let spec = HilbertSpec::bosonic(30);
    let h = analytics::effective_hamiltonian(&p, spec)?;
    let ss = steady_state_direct(&h, p.gamma, &jump_operator(spec)?, spec)?;
    let m = numeric_moments(ss.rho.matrix(), spec)?;
    let d = analytics::derived(&p)?;
    let errs = [
        rel(m.mean_x, analytics::x_ss(&d)?),
        rel(m.cov[(0, 0)].sqrt(), analytics::var_x_ss(&d)?),
        rel(m.n, analytics::n_ss(&d)?),
        rel(m.var_n, analytics::var_n_ss(&d)?),
    ];
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok((worst < 1e-4, format!("worst relative error {worst:.1e}")))
}

fn evolve_vs_direct() -> Result<(bool, String)> {
    let p = presets::fig2(0.30, 3.0);
    let spec = HilbertSpec::bosonic(20);
    let h = analytics::effective_hamiltonian(&p, spec)?;
    let jump = jump_operator(spec)?;
    let direct = steady_state_direct(&h, p.gamma, &jump, spec)?.rho;
    let mut cfg = SteadyConfig::for_gamma(p.gamma).with_tolerances(1e-10, 1e-12);
    cfg.eps = 1e-9;
    cfg.t_max = 2000.0 / p.gamma;
    let rho0 = DensityMatrix::pure(&fock_state(spec.fock_dim, 0));
    let evolved = steady_state_evolve(&rho0, &h, p.gamma, &jump, &cfg)?.into_converged()?;
    let dist = evolved.trace_distance(&direct);
    Ok((dist < 1e-5, format!("trace distance {dist:.1e}")))
}

fn sld_identities() -> Result<(bool, String)> {
    let p = presets::fig2(0.30, 4.0);
    let d = analytics::derived(&p)?;
    let g = analytics::gaussian_decomposition(&d, p.gamma / p.omega)?;
    let spec = HilbertSpec::bosonic(60);
    let rho = g.reconstruct(spec, 40)?;
    let sld = metrology::sld_parameters(&g, metrology::d_alpha_d_f(&p)?);
    let lam = metrology::sld_matrix(&g, &sld, spec)?;
    let qfi = metrology::qfi_closed_form(&p)?;
    let first = linalg::trace_product(&lam, &rho).norm() / qfi.sqrt();
    let second = rel(linalg::trace_product(&(&lam * &lam), &rho).re, qfi);
    Ok((
        first < 1e-6 && second < 1e-4,
        format!("|Tr(rho L)|/sqrt(I_Q) = {first:.1e}, Tr(rho L^2) vs I_Q {second:.1e}"),
    ))
}

fn lindblad_invariants() -> Result<(bool, String)> {
    let p = SystemParams::from_lab(0.3, 3.0, 0.4, 0.08, presets::Z_NM, 5.0);
    let spec = HilbertSpec::full(12);
    let h = hilbert::rabi_hamiltonian(&p, spec)?;
    let jump = jump_operator(spec)?;
    let rho0 = DensityMatrix::pure(&tensor_vec(&spin_minus(), &fock_state(spec.fock_dim, 0)));
    let t = 3.0 / p.gamma;
    let mut cfg = EvolveConfig::new(t, t);
    cfg.project = false;
    let r = evolve(&rho0, &Hamiltonian::Static(h), p.gamma, &jump, spec, &cfg, &[])?;
    let m = r.final_state.into_matrix();
    let trace = (m.trace().re - 1.0).abs();
    let herm = linalg::hermiticity_error(&m);
    let ok = DensityMatrix::new(m).is_ok();
    Ok((ok, format!("trace error {trace:.1e}, hermiticity error {herm:.1e}")))
}

fn cramer_rao_ordering() -> Result<(bool, String)> {
    let b = RepetitionBudget::single_shot();
    let mut ok = true;
    let mut tightest = f64::INFINITY;
    for p in grid() {
        let q = metrology::delta_f_q(&p)?;
        for r in [Readout::X, Readout::P, Readout::N] {
            let f = metrology::sensitivity_report(&p, r, &b)?.delta_f;
            ok &= f >= q * (1.0 - 1e-12);
            tightest = tightest.min(f / q);
        }
    }
    Ok((ok, format!("smallest dF/dF_Q = {tightest:.4}")))
}

fn demkov_shape() -> Result<(bool, String)> {
    let mut ok = true;
    let mut last = 0.0;
    for xi in presets::fig5_xi_grid(6) {
        let p = presets::fig5(xi);
        let s = protocol::demkov_sigma_z(&p)?;
        let m = protocol::demkov_sigma_z(&p.with_force(-p.base.force))?;
        ok &= (s + m).abs() < 1e-12 && s.abs() > last;
        last = s.abs();
    }
    let ratio = protocol::min_force_demkov(&presets::fig5(0.0))?
        / protocol::min_force_demkov(&presets::fig5(presets::FIG5_XI_MAX_KHZ))?;
    Ok((ok, format!("F_min(0)/F_min(xi_max) = {ratio:.2}")))
}

fn quoted_sensitivities() -> Result<(bool, String)> {
    let p = presets::sensitivity_point();
    let fx = metrology::delta_f_x(&p)? / yn(1.0);
    let fnum = metrology::delta_f_n(&p)? / yn(1.0);
    Ok((
        rel(fx, 4.4) < 0.02 && rel(fnum, 7.8) < 0.05,
        format!("dFx = {fx:.3} yN, dFn = {fnum:.3} yN"),
    ))
}

/// Runs every check; fails if any check fails or errors.
pub fn run() -> Result<()> {
    let mut failed = 0;
    for (name, check) in CHECKS {
        let (ok, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed > 0 {
        return Err(CliError::Check(format!("{failed} of {} checks failed", CHECKS.len())));
    }
    Ok(())
}
