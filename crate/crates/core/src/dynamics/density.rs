use crate::error::{Error, Result};
use crate::hilbert::HilbertSpec;
use crate::linalg::{self, ComplexMatrix, C64};

/// Hermiticity tolerance (absolute Frobenius norm of ρ − ρ†).
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
/// Most negative eigenvalue accepted as integration noise.
pub const POSITIVITY_TOL: f64 = 1e-6;

/// A validated density matrix: Hermitian, unit trace, positive up to noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `m` against the density-matrix invariants.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::check(&m)?;
        Ok(DensityMatrix { m })
    }

    /// Hermitizes and renormalizes `m` before validating it.
    pub fn from_raw(m: ComplexMatrix) -> Result<Self> {
        let h = linalg::hermitize(&m);
        let tr = h.trace().re;
        if !(tr.abs() > 0.0) {
            return Err(Error::Numerical("density matrix has zero trace".into()));
        }
        Self::new(h.unscale(tr))
    }

    pub fn pure(psi: &[C64]) -> Self {
        let n = psi.len();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let m = ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm);
        DensityMatrix { m }
    }

    /// Unchecked constructor for states produced by this crate.
    pub(crate) fn trusted(m: ComplexMatrix) -> Self {
        DensityMatrix { m }
    }

    fn check(m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let herm = linalg::frobenius(&(m - m.adjoint()));
        if herm > HERMITICITY_TOL {
            return Err(Error::Numerical(format!(
                "density matrix not Hermitian: ‖ρ−ρ†‖ = {herm:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr} != 1")));
        }
        let min_eig = linalg::hermitian_eigenvalues(m)[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::Numerical(format!(
                "density matrix not positive: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    /// Re Tr(A ρ).
    pub fn expect(&self, a: &ComplexMatrix) -> f64 {
        linalg::trace_product(a, &self.m).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.m, &self.m).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.m)[0]
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        linalg::trace_distance(&self.m, &other.m)
    }

    /// Population of the top `levels` Fock states, summed over the spin.
    pub fn fock_tail(&self, spec: HilbertSpec, levels: usize) -> f64 {
        fock_tail_of(&self.m, spec, levels)
    }
}

pub(crate) fn fock_tail_of(m: &ComplexMatrix, spec: HilbertSpec, levels: usize) -> f64 {
    let nf = spec.fock_dim;
    let blocks = spec.dim() / nf;
    let start = nf.saturating_sub(levels);
    (0..blocks)
        .flat_map(|b| (start..nf).map(move |n| b * nf + n))
        .map(|k| m[(k, k)].re)
        .sum()
}

pub(crate) fn fock_tail_of_vec(psi: &[C64], spec: HilbertSpec, levels: usize) -> f64 {
    let nf = spec.fock_dim;
    let blocks = spec.dim() / nf;
    let start = nf.saturating_sub(levels);
    (0..blocks)
        .flat_map(|b| (start..nf).map(move |n| b * nf + n))
        .map(|k| psi[k].norm_sqr())
        .sum()
}
