//! Operators and states on the truncated spin ⊗ oscillator space.
//!
//! Ordering is fixed as spin ⊗ boson: basis index `s * fock_dim + n` with
//! `s = 0` for |↑⟩ (σ_z = +1) and `s = 1` for |↓⟩. All Hamiltonians are
//! returned in joules.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, C64, I, ONE, ZERO};
use crate::units::{self, HBAR};

/// Physical parameters of the probe, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Oscillator angular frequency ω (rad/s).
    pub omega: f64,
    /// Transverse field Ω (rad/s).
    pub field: f64,
    /// Spin-boson coupling g (rad/s).
    pub g: f64,
    /// Bosonic decay rate γ (rad/s).
    pub gamma: f64,
    /// Zero-point spread z (m).
    pub z: f64,
    /// Force F (N).
    pub force: f64,
}

impl SystemParams {
    /// Builds parameters from lab units: frequencies as f/2π in kHz, z in nm
    /// and F in yN.
    pub fn from_lab(
        omega_khz: f64,
        field_khz: f64,
        g_khz: f64,
        gamma_khz: f64,
        z_nm: f64,
        force_yn: f64,
    ) -> Self {
        SystemParams {
            omega: units::khz_to_rad_s(omega_khz),
            field: units::khz_to_rad_s(field_khz),
            g: units::khz_to_rad_s(g_khz),
            gamma: units::khz_to_rad_s(gamma_khz),
            z: units::nm(z_nm),
            force: units::yn(force_yn),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = [
            ("omega", self.omega),
            ("Omega", self.field),
            ("g", self.g),
            ("gamma", self.gamma),
        ];
        for (name, v) in freqs {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.z >= 0.0) || !self.z.is_finite() {
            return Err(Error::InvalidParameter(format!("z must be >= 0, got {}", self.z)));
        }
        if !self.force.is_finite() {
            return Err(Error::InvalidParameter("F must be finite".into()));
        }
        Ok(())
    }

    pub fn with_force(self, force: f64) -> Self {
        SystemParams { force, ..self }
    }

    pub fn with_g(self, g: f64) -> Self {
        SystemParams { g, ..self }
    }

    /// Force coupling zF/2 in joules: coefficient of (a† + a).
    pub fn force_energy(&self) -> f64 {
        0.5 * self.z * self.force
    }
}

/// Truncation of the Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    pub fock_dim: usize,
    /// Full spin ⊗ boson model when true, bosonic-only effective model otherwise.
    pub include_spin: bool,
}

impl HilbertSpec {
    pub fn full(fock_dim: usize) -> Self {
        HilbertSpec {
            fock_dim,
            include_spin: true,
        }
    }

    pub fn bosonic(fock_dim: usize) -> Self {
        HilbertSpec {
            fock_dim,
            include_spin: false,
        }
    }

    pub fn dim(&self) -> usize {
        if self.include_spin {
            2 * self.fock_dim
        } else {
            self.fock_dim
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_dim < 2 {
            return Err(Error::InvalidSpec(format!(
                "fock_dim must be >= 2, got {}",
                self.fock_dim
            )));
        }
        Ok(())
    }

    fn require_spin(&self) -> Result<()> {
        self.validate()?;
        if !self.include_spin {
            return Err(Error::InvalidSpec(
                "this operator needs the spin degree of freedom".into(),
            ));
        }
        Ok(())
    }

    fn require_bosonic(&self) -> Result<()> {
        self.validate()?;
        if self.include_spin {
            return Err(Error::InvalidSpec(
                "this operator acts on the bosonic-only space".into(),
            ));
        }
        Ok(())
    }

    /// Embeds a bosonic operator into the total space (`I₂ ⊗ op` with spin).
    pub fn lift(&self, boson_op: &ComplexMatrix) -> ComplexMatrix {
        if self.include_spin {
            tensor(&linalg::identity(2), boson_op)
        } else {
            boson_op.clone()
        }
    }
}

/// Ladder operators on the bosonic factor.
#[derive(Debug, Clone)]
pub struct FockOps {
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub n: ComplexMatrix,
}

impl FockOps {
    /// x = a† + a.
    pub fn x(&self) -> ComplexMatrix {
        &self.a_dag + &self.a
    }

    /// p = i(a† − a).
    pub fn p(&self) -> ComplexMatrix {
        (&self.a_dag - &self.a) * I
    }
}

pub fn fock_ops(spec: HilbertSpec) -> Result<FockOps> {
    spec.validate()?;
    let n = spec.fock_dim;
    let mut a = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = c((k as f64).sqrt());
    }
    let a_dag = a.adjoint();
    let num = &a_dag * &a;
    Ok(FockOps { a, a_dag, n: num })
}

/// Pauli matrices in the (|↑⟩, |↓⟩) basis.
pub struct Pauli {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub z: ComplexMatrix,
}

pub fn pauli() -> Pauli {
    Pauli {
        x: ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        y: ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        z: ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Spin states |±⟩ = (|↑⟩ ± |↓⟩)/√2, eigenstates of σ_x.
pub fn spin_plus() -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [c(s), c(s)]
}

pub fn spin_minus() -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [c(s), c(-s)]
}

/// Kronecker product with the first factor outermost.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    linalg::kron(a, b)
}

pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&u| b.iter().map(move |&v| u * v)).collect()
}

pub fn fock_state(fock_dim: usize, n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; fock_dim];
    v[n] = ONE;
    v
}

/// Spin operator lifted to the full space (`op ⊗ I`).
pub fn spin_op(op: &ComplexMatrix, spec: HilbertSpec) -> ComplexMatrix {
    tensor(op, &linalg::identity(spec.fock_dim))
}

/// Time-independent part of the (squeezed) Rabi Hamiltonian and the unit
/// transverse-field operator, so that `H = fixed + Ω · transverse`.
#[derive(Debug, Clone)]
pub struct RabiParts {
    pub fixed: ComplexMatrix,
    pub transverse: ComplexMatrix,
}

pub fn rabi_parts(p: &SystemParams, xi: f64, phi: f64, spec: HilbertSpec) -> Result<RabiParts> {
    spec.require_spin()?;
    p.validate()?;
    let ops = fock_ops(HilbertSpec::bosonic(spec.fock_dim))?;
    let s = pauli();
    let x = ops.x();
    let mut boson = ops.n.scale(HBAR * p.omega) + x.scale(p.force_energy());
    if xi != 0.0 {
        let sq = &ops.a_dag * &ops.a_dag * C64::from_polar(1.0, phi)
            + &ops.a * &ops.a * C64::from_polar(1.0, -phi);
        boson += sq * c(HBAR * xi);
    }
    let fixed = tensor(&linalg::identity(2), &boson) + tensor(&s.z, &x).scale(HBAR * p.g);
    let transverse = spin_op(&s.x, spec).scale(0.5 * HBAR);
    Ok(RabiParts { fixed, transverse })
}

/// ħω a†a + (ħΩ/2)σ_x + ħg(a† + a)σ_z + (zF/2)(a† + a).
pub fn rabi_hamiltonian(p: &SystemParams, spec: HilbertSpec) -> Result<ComplexMatrix> {
    let parts = rabi_parts(p, 0.0, 0.0, spec)?;
    Ok(parts.fixed + parts.transverse.scale(p.field))
}

/// Rabi Hamiltonian plus ħξ(a†² e^{iφ} + a² e^{−iφ}).
pub fn squeezed_rabi_hamiltonian(
    p: &SystemParams,
    xi: f64,
    phi: f64,
    spec: HilbertSpec,
) -> Result<ComplexMatrix> {
    let parts = rabi_parts(p, xi, phi, spec)?;
    Ok(parts.fixed + parts.transverse.scale(p.field))
}

/// Parity Π = σ_x ⊗ e^{iπ a†a}.
pub fn parity(spec: HilbertSpec) -> Result<ComplexMatrix> {
    spec.require_spin()?;
    let n = spec.fock_dim;
    let phase = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, PI * i as f64)
        } else {
            ZERO
        }
    });
    Ok(tensor(&pauli().x, &phase))
}

/// Tail population above which displacement/squeeze report truncation.
pub const UNITARY_TAIL_THRESHOLD: f64 = 1e-8;
/// Levels at the top of the Fock space counted as "tail".
pub const UNITARY_TAIL_LEVELS: usize = 5;

fn check_vacuum_tail(u: &ComplexMatrix, grow: impl Fn(usize) -> usize) -> Result<()> {
    let n = u.nrows();
    let start = n.saturating_sub(UNITARY_TAIL_LEVELS);
    let tail: f64 = (start..n).map(|k| u[(k, 0)].norm_sqr()).sum();
    if tail > UNITARY_TAIL_THRESHOLD {
        return Err(Error::Truncation {
            tail,
            threshold: UNITARY_TAIL_THRESHOLD,
            suggested: grow(n),
        });
    }
    Ok(())
}

/// D(α) = exp(α a† − α* a) on the bosonic space of `spec`.
///
/// Fails with [`Error::Truncation`] when D(α)|0⟩ leaves more than 10⁻⁸ of its
/// population in the top five Fock levels.
pub fn displacement(alpha: C64, spec: HilbertSpec) -> Result<ComplexMatrix> {
    spec.require_bosonic()?;
    let ops = fock_ops(spec)?;
    let gen = &ops.a_dag * alpha - &ops.a * alpha.conj();
    let u = linalg::expm_anti_hermitian(&gen);
    check_vacuum_tail(&u, |n| {
        let need = alpha.norm_sqr() + 10.0 * alpha.norm() + 20.0;
        (need.ceil() as usize).max(n + 10)
    })?;
    Ok(u)
}

/// S(ζ) = exp(ζ/2 a†² − ζ*/2 a²). For real ζ = r > 0 this stretches the x
/// quadrature: S†xS = e^{r} x.
pub fn squeeze(zeta: C64, spec: HilbertSpec) -> Result<ComplexMatrix> {
    spec.require_bosonic()?;
    let ops = fock_ops(spec)?;
    let gen = (&ops.a_dag * &ops.a_dag * zeta - &ops.a * &ops.a * zeta.conj()).scale(0.5);
    let u = linalg::expm_anti_hermitian(&gen);
    check_vacuum_tail(&u, |n| {
        let r = zeta.norm();
        ((40.0 * (1.0 + (2.0 * r).exp())).ceil() as usize).max(n + 20)
    })?;
    Ok(u)
}

/// R(δ) = exp(iδ a†a).
pub fn rotation(delta: f64, spec: HilbertSpec) -> Result<ComplexMatrix> {
    spec.require_bosonic()?;
    let n = spec.fock_dim;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, delta * i as f64)
        } else {
            ZERO
        }
    }))
}
