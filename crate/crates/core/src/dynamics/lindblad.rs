//! Master-equation right-hand sides.
//!
//! The dense [`lindblad_rhs`] is the reference form. The integrator uses
//! [`LindbladSystem`], which writes the same generator as
//!
//! ```text
//! dρ/dt = K + K† + 2γ J ρ J†,   K = −(i/ħ) H_eff ρ,   H_eff = H − iħγ J†J
//! ```
//!
//! with CSR operands, valid for Hermitian ρ.

use std::f64::consts::PI;

use crate::error::Result;
use crate::hilbert::{fock_ops, HilbertSpec};
use crate::linalg::{self, c, ComplexMatrix, Csr, C64, I, ZERO};
use crate::units::HBAR;

use super::integrator::OdeSystem;

/// Time profile of a driven Hamiltonian term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `initial · e^{−rate·t}`.
    Exponential { initial: f64, rate: f64 },
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Envelope::Exponential { initial, rate } => initial * (-rate * t).exp(),
        }
    }
}

/// Hamiltonian term `envelope(t) · op`.
#[derive(Debug, Clone)]
pub struct Drive {
    pub op: ComplexMatrix,
    pub envelope: Envelope,
    /// When set, integrator steps are capped at `(2π/|envelope(t)|) / n`;
    /// the envelope is then read as an angular frequency.
    pub steps_per_period: Option<f64>,
}

/// Fixed or time-dependent Hamiltonian, in joules.
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    Static(ComplexMatrix),
    Driven { fixed: ComplexMatrix, drive: Drive },
}

impl Hamiltonian {
    pub fn at(&self, t: f64) -> ComplexMatrix {
        match self {
            Hamiltonian::Static(h) => h.clone(),
            Hamiltonian::Driven { fixed, drive } => fixed + drive.op.scale(drive.envelope.at(t)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Static(h) => h.nrows(),
            Hamiltonian::Driven { fixed, .. } => fixed.nrows(),
        }
    }

    fn parts(&self) -> (&ComplexMatrix, Option<&Drive>) {
        match self {
            Hamiltonian::Static(h) => (h, None),
            Hamiltonian::Driven { fixed, drive } => (fixed, Some(drive)),
        }
    }

    fn max_step(&self, t: f64) -> f64 {
        match self {
            Hamiltonian::Driven {
                drive:
                    Drive {
                        envelope,
                        steps_per_period: Some(n),
                        ..
                    },
                ..
            } => {
                let w = envelope.at(t).abs();
                if w > 0.0 {
                    2.0 * PI / w / n
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    }
}

impl From<ComplexMatrix> for Hamiltonian {
    fn from(h: ComplexMatrix) -> Self {
        Hamiltonian::Static(h)
    }
}

/// The bosonic jump operator: `I₂ ⊗ a` for the full model, `a` otherwise.
pub fn jump_operator(spec: HilbertSpec) -> Result<ComplexMatrix> {
    let ops = fock_ops(HilbertSpec::bosonic(spec.fock_dim))?;
    Ok(spec.lift(&ops.a))
}

/// −(i/ħ)[H, ρ] + γ(2JρJ† − {J†J, ρ}).
pub fn lindblad_rhs(
    rho: &ComplexMatrix,
    h: &ComplexMatrix,
    gamma: f64,
    jump: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = rho.nrows();
    linalg::check_square(rho, n)?;
    linalg::check_square(h, n)?;
    linalg::check_square(jump, n)?;
    let coherent = linalg::commutator(h, rho) * (-I / HBAR);
    if gamma == 0.0 {
        return Ok(coherent);
    }
    let jd = jump.adjoint();
    let m = &jd * jump;
    let diss = (jump * rho * &jd).scale(2.0) - &m * rho - rho * &m;
    Ok(coherent + diss.scale(gamma))
}

/// Sparse Lindblad generator acting on column-major density matrices.
pub struct LindbladSystem {
    n: usize,
    fixed: Csr,
    drive: Option<(Csr, Envelope)>,
    jump: Csr,
    gamma: f64,
    max_step: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    project: bool,
    k_buf: Vec<C64>,
    t_buf: Vec<C64>,
}

impl LindbladSystem {
    pub fn new(h: &Hamiltonian, gamma: f64, jump: &ComplexMatrix) -> Result<Self> {
        let n = h.dim();
        let (fixed, drive) = h.parts();
        linalg::check_square(fixed, n)?;
        linalg::check_square(jump, n)?;
        let m = jump.adjoint() * jump;
        let a_fixed = fixed * (-I / HBAR) - m.scale(gamma);
        let drive = match drive {
            Some(d) => {
                linalg::check_square(&d.op, n)?;
                Some((Csr::from_dense(&(&d.op * (-I / HBAR))), d.envelope))
            }
            None => None,
        };
        let h_for_steps = h.clone();
        Ok(LindbladSystem {
            n,
            fixed: Csr::from_dense(&a_fixed),
            drive,
            jump: Csr::from_dense(jump),
            gamma,
            max_step: Box::new(move |t| h_for_steps.max_step(t)),
            project: true,
            k_buf: vec![ZERO; n * n],
            t_buf: vec![ZERO; n * n],
        })
    }

    /// Disables the Hermitize-and-renormalize projection after each step.
    pub fn without_projection(mut self) -> Self {
        self.project = false;
        self
    }
}

impl OdeSystem for LindbladSystem {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        let n = self.n;
        self.fixed.mul_dense(y, &mut self.k_buf);
        if let Some((op, env)) = &self.drive {
            op.mul_dense_add(c(env.at(t)), y, &mut self.k_buf);
        }
        let k = &self.k_buf;
        for j in 0..n {
            for i in 0..n {
                dy[i + j * n] = k[i + j * n] + k[j + i * n].conj();
            }
        }
        if self.gamma != 0.0 {
            self.jump.mul_dense(y, &mut self.t_buf);
            self.jump
                .mul_adjoint_right_add(c(2.0 * self.gamma), &self.t_buf, dy);
        }
    }

    fn max_step(&self, t: f64) -> f64 {
        (self.max_step)(t)
    }

    fn post_step(&mut self, y: &mut [C64]) {
        if !self.project {
            return;
        }
        let n = self.n;
        for j in 0..n {
            for i in 0..j {
                let avg = (y[i + j * n] + y[j + i * n].conj()) * 0.5;
                y[i + j * n] = avg;
                y[j + i * n] = avg.conj();
            }
        }
        let tr: f64 = (0..n).map(|i| y[i + i * n].re).sum();
        for i in 0..n {
            y[i + i * n] = c(y[i + i * n].re);
        }
        if tr > 0.0 {
            let inv = 1.0 / tr;
            y.iter_mut().for_each(|v| *v *= inv);
        }
    }
}

/// Schrödinger equation `dψ/dt = −(i/ħ) H(t) ψ`.
///
/// For driven Hamiltonians the global phase `envelope(t) · λ_min(op)` is
/// removed from the generator; this changes no observable but keeps the
/// dominant amplitude from rotating at the drive frequency, which would
/// otherwise set the step size.
pub struct SchrodingerSystem {
    n: usize,
    fixed: Csr,
    drive: Option<(Csr, Envelope, f64)>,
    max_step: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SchrodingerSystem {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let n = h.dim();
        let (fixed, drive) = h.parts();
        linalg::check_square(fixed, n)?;
        let drive = match drive {
            Some(d) => {
                linalg::check_square(&d.op, n)?;
                let lowest = linalg::hermitian_eigenvalues(&d.op)[0] / HBAR;
                Some((Csr::from_dense(&(&d.op * (-I / HBAR))), d.envelope, lowest))
            }
            None => None,
        };
        let h_for_steps = h.clone();
        Ok(SchrodingerSystem {
            n,
            fixed: Csr::from_dense(&(fixed * (-I / HBAR))),
            drive,
            max_step: Box::new(move |t| h_for_steps.max_step(t)),
        })
    }
}

impl OdeSystem for SchrodingerSystem {
    fn dim(&self) -> usize {
        self.n
    }

    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.fixed.matvec(y, dy);
        if let Some((op, env, lowest)) = &self.drive {
            let w = env.at(t);
            op.matvec_add(c(w), y, dy);
            let phase = I * (w * lowest);
            for (d, v) in dy.iter_mut().zip(y) {
                *d += phase * v;
            }
        }
    }

    fn max_step(&self, t: f64) -> f64 {
        (self.max_step)(t)
    }
}
