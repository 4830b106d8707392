use std::io::Write;

use crate::error::{Error, Result};
use crate::hilbert::HilbertSpec;
use crate::linalg::{self, ComplexMatrix, C64};

use super::density::{fock_tail_of, fock_tail_of_vec, DensityMatrix};
use super::integrator::{Dopri5, OdeSystem, Stats};
use super::lindblad::{Hamiltonian, LindbladSystem, SchrodingerSystem};

/// Number of top Fock levels watched by the truncation check.
pub const TAIL_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub t_final: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub record_every: f64,
    pub tail_threshold: f64,
    /// Hermitize and renormalize the state after each accepted step.
    pub project: bool,
}

impl EvolveConfig {
    pub fn new(t_final: f64, record_every: f64) -> Self {
        EvolveConfig {
            t_final,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            record_every,
            tail_threshold: 1e-6,
            project: true,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("integrator tolerances must be positive");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final must be positive and finite");
        }
        if !(self.record_every > 0.0 && self.record_every <= self.t_final) {
            return bad("record_every must lie in (0, t_final]");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if !(self.tail_threshold > 0.0) {
            return bad("tail_threshold must be positive");
        }
        Ok(())
    }

    /// Recording instants: multiples of `record_every`, plus `t_final`.
    pub fn record_times(&self) -> Vec<f64> {
        let ticks = (self.t_final / self.record_every * (1.0 - 1e-12)).floor() as usize;
        let mut times: Vec<f64> = (0..=ticks).map(|k| k as f64 * self.record_every).collect();
        if self.t_final - times[times.len() - 1] > 1e-12 * self.t_final {
            times.push(self.t_final);
        }
        times
    }
}

/// A labeled real time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

/// Time series recorded along one trajectory.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub times: Vec<f64>,
    pub observables: Vec<Series>,
    pub final_state: DensityMatrix,
    /// Final state vector, for state-vector runs.
    pub final_vector: Option<Vec<C64>>,
    /// Largest top-level Fock population seen at a recording instant.
    pub max_tail: f64,
    pub truncation_unsafe: bool,
    /// Largest `|‖ψ‖² − 1|` seen, for state-vector runs.
    pub norm_drift: f64,
    pub stats: Stats,
}

impl SweepResult {
    pub fn series(&self, label: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|s| s.label == label)
            .map(|s| s.values.as_slice())
    }

    /// Writes `t_s,<labels...>` rows with 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t_s")?;
        for s in &self.observables {
            write!(w, ",{}", s.label)?;
        }
        writeln!(w)?;
        for (k, t) in self.times.iter().enumerate() {
            write!(w, "{}", fmt_sig(*t))?;
            for s in &self.observables {
                write!(w, ",{}", fmt_sig(s.values[k]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Scientific notation with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub type Observable = (String, ComplexMatrix);

fn check_observables(obs: &[Observable], dim: usize) -> Result<()> {
    obs.iter().try_for_each(|(_, a)| linalg::check_square(a, dim))
}

fn integrator(cfg: &EvolveConfig, dim: usize) -> Dopri5 {
    Dopri5::new(dim, cfg.rel_tol, cfg.abs_tol).with_max_step(cfg.max_step)
}

/// Integrates the master equation from `rho0`, recording `Tr(Aρ(t))`.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &Hamiltonian,
    gamma: f64,
    jump: &ComplexMatrix,
    spec: HilbertSpec,
    cfg: &EvolveConfig,
    observables: &[Observable],
) -> Result<SweepResult> {
    cfg.validate()?;
    let n = rho0.dim();
    linalg::check_square(&h.at(0.0), n)?;
    if spec.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: n,
        });
    }
    check_observables(observables, n)?;
    let mut sys = LindbladSystem::new(h, gamma, jump)?;
    if !cfg.project {
        sys = sys.without_projection();
    }
    let mut ode = integrator(cfg, sys.dim());
    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let times = cfg.record_times();
    let mut series: Vec<Series> = observables
        .iter()
        .map(|(l, _)| Series {
            label: l.clone(),
            values: Vec::with_capacity(times.len()),
        })
        .collect();
    let mut max_tail: f64 = 0.0;
    let mut t = 0.0;
    for &tr in &times {
        ode.advance(&mut sys, &mut t, &mut y, tr)?;
        let rho = linalg::matrix_from_slice(n, &y);
        for (s, (_, a)) in series.iter_mut().zip(observables) {
            s.values.push(linalg::trace_product(a, &rho).re);
        }
        max_tail = max_tail.max(fock_tail_of(&rho, spec, TAIL_LEVELS));
    }
    let final_rho = linalg::matrix_from_slice(n, &y);
    let final_state = if cfg.project {
        DensityMatrix::from_raw(final_rho)?
    } else {
        DensityMatrix::trusted(final_rho)
    };
    Ok(SweepResult {
        times,
        observables: series,
        final_state,
        final_vector: None,
        max_tail,
        truncation_unsafe: max_tail > cfg.tail_threshold,
        norm_drift: 0.0,
        stats: ode.stats,
    })
}

/// Integrates the Schrödinger equation from `psi0`, recording `⟨ψ|A|ψ⟩`.
///
/// The state is never renormalized, so `norm_drift` measures the
/// integrator error directly.
pub fn schrodinger_evolve(
    psi0: &[C64],
    h: &Hamiltonian,
    spec: HilbertSpec,
    cfg: &EvolveConfig,
    observables: &[Observable],
) -> Result<SweepResult> {
    cfg.validate()?;
    let n = psi0.len();
    linalg::check_square(&h.at(0.0), n)?;
    if spec.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: n,
        });
    }
    check_observables(observables, n)?;
    let norm0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm0 > 0.0) {
        return Err(Error::InvalidParameter("zero initial state".into()));
    }
    let mut y: Vec<C64> = psi0.iter().map(|z| z / norm0).collect();
    let mut sys = SchrodingerSystem::new(h)?;
    let mut ode = integrator(cfg, n);
    let times = cfg.record_times();
    let mut series: Vec<Series> = observables
        .iter()
        .map(|(l, _)| Series {
            label: l.clone(),
            values: Vec::with_capacity(times.len()),
        })
        .collect();
    let mut max_tail: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut t = 0.0;
    for &tr in &times {
        ode.advance(&mut sys, &mut t, &mut y, tr)?;
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        drift = drift.max((norm - 1.0).abs());
        for (s, (_, a)) in series.iter_mut().zip(observables) {
            s.values.push(linalg::expectation_vec(a, &y).re / norm);
        }
        max_tail = max_tail.max(fock_tail_of_vec(&y, spec, TAIL_LEVELS) / norm);
    }
    Ok(SweepResult {
        times,
        observables: series,
        final_state: DensityMatrix::pure(&y),
        final_vector: Some(y),
        max_tail,
        truncation_unsafe: max_tail > cfg.tail_threshold,
        norm_drift: drift,
        stats: ode.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{displacement, fock_ops, fock_state};
    use crate::linalg::c;
    use crate::units::HBAR;

    #[test]
    fn record_grid_ends_on_t_final() {
        let cfg = EvolveConfig::new(1.0, 0.3);
        let t = cfg.record_times();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
        let cfg = EvolveConfig::new(1.0, 0.25);
        assert_eq!(cfg.record_times().len(), 5);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(EvolveConfig::new(1.0, 2.0).validate().is_err());
        assert!(EvolveConfig::new(1.0, 0.1)
            .with_tolerances(0.0, 1e-9)
            .validate()
            .is_err());
    }

    #[test]
    fn fock_state_number_is_conserved_without_damping() {
        let spec = HilbertSpec::bosonic(6);
        let ops = fock_ops(spec).unwrap();
        let omega = 2.0 * std::f64::consts::PI * 300.0;
        let h = Hamiltonian::Static(ops.n.scale(HBAR * omega));
        let rho0 = DensityMatrix::pure(&fock_state(6, 1));
        let cfg = EvolveConfig::new(0.02, 1e-3);
        let r = evolve(&rho0, &h, 0.0, &ops.a, spec, &cfg, &[("n".into(), ops.n.clone())]).unwrap();
        for v in r.series("n").unwrap() {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn coherent_state_decays_exponentially() {
        let spec = HilbertSpec::bosonic(24);
        let ops = fock_ops(spec).unwrap();
        let d = displacement(c(1.0), spec).unwrap();
        let psi: Vec<C64> = d.column(0).iter().copied().collect();
        let rho0 = DensityMatrix::pure(&psi);
        let gamma = 50.0;
        let cfg = EvolveConfig::new(0.03, 1e-3);
        let h = Hamiltonian::Static(ComplexMatrix::zeros(24, 24));
        let r = evolve(&rho0, &h, gamma, &ops.a, spec, &cfg, &[("n".into(), ops.n.clone())]).unwrap();
        let n0 = r.series("n").unwrap()[0];
        for (t, v) in r.times.iter().zip(r.series("n").unwrap()) {
            assert!((v - n0 * (-2.0 * gamma * t).exp()).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn ground_state_only_picks_up_a_phase() {
        let spec = HilbertSpec::bosonic(5);
        let ops = fock_ops(spec).unwrap();
        let h = Hamiltonian::Static(ops.n.scale(HBAR * 1e4));
        let cfg = EvolveConfig::new(0.01, 1e-3);
        let obs = vec![("n".into(), ops.n.clone()), ("x".into(), ops.x())];
        let r = schrodinger_evolve(&fock_state(5, 0), &h, spec, &cfg, &obs).unwrap();
        for s in &r.observables {
            assert!(s.values.iter().all(|v| v.abs() < 1e-12));
        }
        assert!(r.norm_drift < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let spec = HilbertSpec::bosonic(3);
        let ops = fock_ops(spec).unwrap();
        let cfg = EvolveConfig::new(1e-3, 5e-4);
        let h = Hamiltonian::Static(ComplexMatrix::zeros(3, 3));
        let r = evolve(
            &DensityMatrix::pure(&fock_state(3, 0)),
            &h,
            1.0,
            &ops.a,
            spec,
            &cfg,
            &[("n".into(), ops.n.clone())],
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t_s,n");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0.00000000000e0,0.00000000000e0");
    }
}
