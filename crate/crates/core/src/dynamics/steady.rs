use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::hilbert::HilbertSpec;
use crate::linalg::{self, ComplexMatrix, C64, ZERO};
use crate::units::HBAR;

use super::density::DensityMatrix;
use super::integrator::{Dopri5, OdeSystem, Stats};
use super::lindblad::{Hamiltonian, LindbladSystem};

/// Largest total dimension accepted by [`steady_state_direct`].
pub const MAX_DIRECT_DIM: usize = 64;

/// Singular values below this fraction of the largest count as zero.
pub const NULL_SPACE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyConfig {
    /// Stop once `‖dρ/dt‖_F < eps · γ`.
    pub eps: f64,
    pub t_max: f64,
    /// Interval between residual checks, seconds.
    pub check_every: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl SteadyConfig {
    /// Defaults scaled to the damping rate: checks every `1/γ`, gives up
    /// after `200/γ`.
    pub fn for_gamma(gamma: f64) -> Self {
        SteadyConfig {
            eps: 1e-6,
            t_max: 200.0 / gamma,
            check_every: 1.0 / gamma,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

/// State returned by time-domain steady-state searches.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub converged: bool,
    /// `‖dρ/dt‖_F / γ` at the returned state.
    pub residual: f64,
    /// Time at which the search stopped.
    pub t: f64,
    pub stats: Stats,
}

impl SteadyState {
    /// The state if converged, otherwise [`Error::NotConverged`].
    pub fn into_converged(self) -> Result<DensityMatrix> {
        if self.converged {
            Ok(self.rho)
        } else {
            Err(Error::NotConverged {
                t: self.t,
                residual: self.residual,
            })
        }
    }
}

fn residual(sys: &mut LindbladSystem, y: &[C64], gamma: f64) -> f64 {
    let mut dy = vec![ZERO; y.len()];
    sys.rhs(0.0, y, &mut dy);
    dy.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / gamma
}

fn prepare(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    gamma: f64,
    jump: &ComplexMatrix,
    cfg: &SteadyConfig,
) -> Result<(LindbladSystem, Dopri5)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(
            "steady-state search needs gamma > 0".into(),
        ));
    }
    linalg::check_square(h, rho0.dim())?;
    let sys = LindbladSystem::new(&Hamiltonian::Static(h.clone()), gamma, jump)?;
    let ode = Dopri5::new(sys.dim(), cfg.rel_tol, cfg.abs_tol).with_max_step(cfg.max_step);
    Ok((sys, ode))
}

/// Evolves until the residual drops below `eps · γ` or `t_max` is reached.
pub fn steady_state_evolve(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    gamma: f64,
    jump: &ComplexMatrix,
    cfg: &SteadyConfig,
) -> Result<SteadyState> {
    let (mut sys, mut ode) = prepare(rho0, h, gamma, jump, cfg)?;
    let mut y = rho0.matrix().as_slice().to_vec();
    let mut t = 0.0;
    let mut res = residual(&mut sys, &y, gamma);
    while res >= cfg.eps && t < cfg.t_max {
        let next = (t + cfg.check_every).min(cfg.t_max);
        ode.advance(&mut sys, &mut t, &mut y, next)?;
        res = residual(&mut sys, &y, gamma);
    }
    let n = rho0.dim();
    Ok(SteadyState {
        rho: DensityMatrix::from_raw(linalg::matrix_from_slice(n, &y))?,
        converged: res < cfg.eps,
        residual: res,
        t,
        stats: ode.stats,
    })
}

/// Evolves for exactly `horizon` seconds and reports the residual there.
///
/// Used where the asymptotic state is approached only on a time scale far
/// beyond the damping time and the quantity of interest is the plateau
/// reached after a fixed number of damping times.
pub fn relax_for(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    gamma: f64,
    jump: &ComplexMatrix,
    horizon: f64,
    cfg: &SteadyConfig,
) -> Result<SteadyState> {
    let (mut sys, mut ode) = prepare(rho0, h, gamma, jump, cfg)?;
    let mut y = rho0.matrix().as_slice().to_vec();
    let mut t = 0.0;
    ode.advance(&mut sys, &mut t, &mut y, horizon)?;
    let res = residual(&mut sys, &y, gamma);
    let n = rho0.dim();
    Ok(SteadyState {
        rho: DensityMatrix::from_raw(linalg::matrix_from_slice(n, &y))?,
        converged: res < cfg.eps,
        residual: res,
        t,
        stats: ode.stats,
    })
}

/// Null-space steady state with diagnostics.
#[derive(Debug, Clone)]
pub struct DirectSteadyState {
    pub rho: DensityMatrix,
    /// `‖L v‖ / (‖L‖₂ ‖v‖)` for the returned (Hermitized) state.
    pub residual: f64,
    /// Smallest and second-smallest singular values of `L`, relative to
    /// the largest.
    pub sigma_min: f64,
    pub gap: f64,
}

fn to_faer(m: &ComplexMatrix) -> Vec<(usize, usize, c64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, c64::new(v.re, v.im)));
            }
        }
    }
    out
}

/// Adds `s · (bᵀ ⊗ a)` to `l`; this is the matrix of `X ↦ a X b` acting on
/// column-stacked `X`.
fn add_sandwich(l: &mut Mat<c64>, n: usize, s: C64, a: &ComplexMatrix, b: &ComplexMatrix) {
    let s = c64::new(s.re, s.im);
    let an = to_faer(a);
    let bn = to_faer(b);
    for &(bi, bj, bv) in &bn {
        // (bᵀ)[bj, bi] = b[bi, bj]
        for &(ai, aj, av) in &an {
            let r = bj * n + ai;
            let col = bi * n + aj;
            l[(r, col)] += s * bv * av;
        }
    }
}

/// The Liouvillian as a dense `n² × n²` matrix on column-stacked ρ.
pub fn liouvillian(h: &ComplexMatrix, gamma: f64, jump: &ComplexMatrix) -> Result<Mat<c64>> {
    let n = h.nrows();
    linalg::check_square(h, n)?;
    linalg::check_square(jump, n)?;
    let id = linalg::identity(n);
    let m = jump.adjoint() * jump;
    let jd = jump.adjoint();
    let mut l = Mat::<c64>::zeros(n * n, n * n);
    let mi = C64::new(0.0, -1.0 / HBAR);
    add_sandwich(&mut l, n, mi, h, &id);
    add_sandwich(&mut l, n, -mi, &id, h);
    if gamma != 0.0 {
        add_sandwich(&mut l, n, C64::new(2.0 * gamma, 0.0), jump, &jd);
        add_sandwich(&mut l, n, C64::new(-gamma, 0.0), &m, &id);
        add_sandwich(&mut l, n, C64::new(-gamma, 0.0), &id, &m);
    }
    Ok(l)
}

/// Steady state as the null vector of the vectorized Liouvillian.
pub fn steady_state_direct(
    h: &ComplexMatrix,
    gamma: f64,
    jump: &ComplexMatrix,
    spec: HilbertSpec,
) -> Result<DirectSteadyState> {
    let n = spec.dim();
    if n > MAX_DIRECT_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            max: MAX_DIRECT_DIM,
        });
    }
    linalg::check_square(h, n)?;
    let l = liouvillian(h, gamma, jump)?;
    let svd = l
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let nn = n * n;
    let smax = s[0].re;
    let multiplicity = (0..nn)
        .filter(|&k| s[k].re <= NULL_SPACE_RTOL * smax)
        .count();
    if multiplicity > 1 {
        return Err(Error::DegenerateNullSpace { multiplicity });
    }
    let v = svd.V();
    let data: Vec<C64> = (0..nn)
        .map(|k| {
            let z = v[(k, nn - 1)];
            C64::new(z.re, z.im)
        })
        .collect();
    let raw = linalg::matrix_from_slice(n, &data);
    let rho = DensityMatrix::from_raw(raw)?;

    let x = rho.matrix().as_slice();
    let mut lv = 0.0;
    for r in 0..nn {
        let mut acc = c64::new(0.0, 0.0);
        for k in 0..nn {
            let xv = x[k];
            if xv != ZERO {
                acc += l[(r, k)] * c64::new(xv.re, xv.im);
            }
        }
        lv += acc.norm_sqr();
    }
    let vnorm = linalg::frobenius(rho.matrix());
    Ok(DirectSteadyState {
        residual: lv.sqrt() / (smax * vnorm),
        sigma_min: s[nn - 1].re / smax,
        gap: s[nn - 2].re / smax,
        rho,
    })
}
