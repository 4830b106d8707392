//! Dense complex matrix helpers shared by every module, plus a small CSR
//! matrix used on the integrator hot path.
//!
//! Storage is `nalgebra::DMatrix<Complex64>` (column-major). The CSR type only
//! exists to make `H·ρ` and `J ρ J†` cost O(nnz·dim) instead of O(dim³).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Kronecker product `a ⊗ b`; the first factor indexes the slow (outer) block.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖M − M†‖_F / ‖M‖_F` (zero for the zero matrix).
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    let norm = frobenius(m);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.adjoint())) / norm
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Expectation value `Tr(A ρ)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, rho: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * rho[(k, i)];
        }
    }
    acc
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation_vec(a: &ComplexMatrix, psi: &[C64]) -> C64 {
    let n = psi.len();
    let mut acc = ZERO;
    for j in 0..n {
        if psi[j] == ZERO {
            continue;
        }
        let mut col = ZERO;
        for i in 0..n {
            col += psi[i].conj() * a[(i, j)];
        }
        acc += col * psi[j];
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
/// order; eigenvectors are the matching columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = hermitize(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (k, &lam) in values.iter().enumerate() {
        let fk = f(lam);
        for r in 0..n {
            scaled[(r, k)] *= fk;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(G)` for an anti-Hermitian generator `G`, computed from the
/// eigendecomposition of the Hermitian matrix `iG`. The result is unitary to
/// working precision.
pub fn expm_anti_hermitian(g: &ComplexMatrix) -> ComplexMatrix {
    let h = g * I;
    hermitian_function(&h, |lam| C64::from_polar(1.0, -lam))
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// eigenvalues below zero (numerical noise) are clamped.
pub fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    hermitian_function(m, |lam| c(lam.max(0.0).sqrt()))
}

/// Trace distance `½‖A − B‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

pub fn check_square(m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// `y = A x`.
    #[inline]
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    /// `y += s · A x`.
    #[inline]
    pub fn matvec_add(&self, s: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi += s * acc;
        }
    }

    /// `Y = A X` for column-major square `X`, `Y` of size `n × n`.
    pub fn mul_dense(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        for (xc, yc) in x.chunks_exact(n).zip(y.chunks_exact_mut(n)) {
            self.matvec(xc, yc);
        }
    }

    /// `Y += s · A X` for column-major square `X`.
    pub fn mul_dense_add(&self, s: C64, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        for (xc, yc) in x.chunks_exact(n).zip(y.chunks_exact_mut(n)) {
            self.matvec_add(s, xc, yc);
        }
    }

    /// `Y += s · T A†` for column-major square `T`.
    pub fn mul_adjoint_right_add(&self, s: C64, t: &[C64], y: &mut [C64]) {
        let n = self.n;
        // column j of T A† is Σ_k T[:, k] conj(A[j, k])
        for j in 0..n {
            for (k, v) in self.row(j) {
                let w = s * v.conj();
                let (src, dst) = (&t[k * n..(k + 1) * n], &mut y[j * n..(j + 1) * n]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}

/// Hermitian dense matrix from a column-major slice.
pub fn matrix_from_slice(n: usize, data: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(n, n, data)
}
