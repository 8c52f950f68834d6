//! Dense complex linear algebra and density-matrix plumbing.
//!
//! Everything here works on small dense matrices (dimension at most a few
//! dozen for states, up to 4096 for exact-diagonalization vectors). The
//! Hermitian eigensolver is nalgebra's implicit QR, which is deterministic for
//! a fixed input.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Absolute tolerance for Hermiticity of unit-trace matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed trace deviation when validating a density matrix.
pub const TRACE_TOL: f64 = 1e-8;
/// Eigenvalues in `[-CLAMP_TOL, 0)` are treated as roundoff and clamped to zero.
pub const CLAMP_TOL: f64 = 1e-8;
/// Allowed squared-norm deviation for pure states.
pub const NORM_TOL: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c64(v, 0.0)),
    ))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry modulus of `m - m†`.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_square_finite(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        spectral_map(self, |v| v)
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// `V f(D) V†` for a real function applied to the spectrum.
fn spectral_map(eig: &HermitianEigen, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (j, &v) in eig.values.iter().enumerate() {
        let s = f(v);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * eig.vectors.adjoint()
}

pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_square_finite(h)?;
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    eig_hermitian_unchecked(h)
}

/// Eigensolve after symmetrizing; callers guarantee Hermiticity.
pub(crate) fn eig_hermitian_unchecked(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::Eigensolver)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a positive-semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-1e-8, 0)` are clamped to zero; anything more negative is
/// rejected.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    let min = eig.min_value();
    if min < -CLAMP_TOL {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(spectral_map(&eig, |v| v.max(0.0).sqrt()))
}

/// Inverse square root of a positive-definite Hermitian matrix.
pub fn inverse_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    let min = eig.min_value();
    if min <= 0.0 {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(spectral_map(&eig, |v| 1.0 / v.sqrt()))
}

/// One side of a bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial transpose of a bipartite operator with local dimensions `dims`.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dims: (usize, usize),
    subsystem: Subsystem,
) -> ComplexMatrix {
    let (_, db) = dims;
    let n = m.nrows();
    ComplexMatrix::from_fn(n, n, |row, col| {
        let (ia, ib) = (row / db, row % db);
        let (ja, jb) = (col / db, col % db);
        match subsystem {
            Subsystem::A => m[(ja * db + ib, ia * db + jb)],
            Subsystem::B => m[(ia * db + jb, ja * db + ib)],
        }
    })
}

pub fn partial_transpose(rho: &DensityMatrix, subsystem: Subsystem) -> ComplexMatrix {
    partial_transpose_matrix(rho.matrix(), rho.dims(), subsystem)
}

/// Reduced state of the kept subsystem.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> DensityMatrix {
    let (da, db) = rho.dims();
    let m = rho.matrix();
    let reduced = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|b| m[(i * db + b, j * db + b)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|a| m[(a * db + i, a * db + j)]).sum()
        }),
    };
    let d = reduced.nrows();
    DensityMatrix {
        matrix: reduced,
        dims: (d, 1),
    }
}

pub fn validate_density(m: ComplexMatrix, dims: (usize, usize)) -> Result<DensityMatrix> {
    check_square_finite(&m)?;
    let n = m.nrows();
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != n {
        return Err(Error::DimensionMismatch {
            da: dims.0,
            db: dims.1,
            n,
        });
    }
    let dev = hermiticity_deviation(&m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(trace));
    }
    let eig = eig_hermitian_unchecked(&m)?;
    let min = eig.min_value();
    if min < -CLAMP_TOL {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(DensityMatrix { matrix: m, dims })
}

/// A validated bipartite density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: (usize, usize),
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        validate_density(matrix, dims)
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_parts(matrix: ComplexMatrix, dims: (usize, usize)) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.0 * dims.1);
        DensityMatrix { matrix, dims }
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        Self::from_parts(identity(n).unscale(n as f64), dims)
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64], dims: (usize, usize)) -> Result<Self> {
        Self::new(diag(populations), dims)
    }

    /// Two-qubit diagonal state `a|00><00| + b|01><01| + c|10><10| + d|11><11|`.
    pub fn two_qubit_diagonal(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::diagonal(&[a, b, c, d], (2, 2))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.dims == (2, 2)
    }

    /// The normalized mixture `(self + t·other) / (1 + t)`.
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::WrongDimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("mixing weight t = {t}")));
        }
        let m = (&self.matrix + other.matrix.scale(t)).unscale(1.0 + t);
        Ok(Self::from_parts(m, self.dims))
    }

    /// `Σ_k w_k ρ_k` for weights summing to one.
    pub fn convex_combination(states: &[DensityMatrix], weights: &[f64]) -> Result<DensityMatrix> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        if states.len() != weights.len() {
            return Err(Error::InvalidParameter("weights/states length mismatch".into()));
        }
        let mut m = ComplexMatrix::zeros(first.dim(), first.dim());
        for (s, &w) in states.iter().zip(weights) {
            if s.dims != first.dims {
                return Err(Error::WrongDimension {
                    expected: first.dim(),
                    found: s.dim(),
                });
            }
            m += s.matrix.scale(w);
        }
        validate_density(m, first.dims)
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn local_unitary(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<DensityMatrix> {
        if ua.nrows() != self.dims.0 || ub.nrows() != self.dims.1 {
            return Err(Error::WrongDimension {
                expected: self.dim(),
                found: ua.nrows() * ub.nrows(),
            });
        }
        let u = kron(ua, ub);
        let m = &u * &self.matrix * u.adjoint();
        Ok(Self::from_parts(hermitize(m), self.dims))
    }

    pub fn from_json_str(s: &str) -> Result<DensityMatrix> {
        let file: StateFile = serde_json::from_str(s)?;
        file.into_density()
    }

    pub fn to_state_file(&self) -> StateFile {
        let n = self.dim();
        StateFile {
            dims: [self.dims.0, self.dims.1],
            re: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].im).collect()).collect(),
        }
    }
}

/// `(m + m†) / 2`.
pub(crate) fn hermitize(m: ComplexMatrix) -> ComplexMatrix {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

/// On-disk representation of a density matrix: row-major real and imaginary
/// parts plus subsystem dimensions. A missing `im` means a real matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn into_density(self) -> Result<DensityMatrix> {
        let n = self.re.len();
        let ragged = |rows: &Vec<Vec<f64>>| rows.iter().any(|r| r.len() != n);
        if ragged(&self.re) || (!self.im.is_empty() && (self.im.len() != n || ragged(&self.im))) {
            return Err(Error::InvalidParameter(
                "state file rows must form a square matrix".into(),
            ));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
            c64(self.re[i][j], im)
        });
        validate_density(m, (self.dims[0], self.dims[1]))
    }
}

/// A normalized bipartite pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    dims: (usize, usize),
}

impl PureState {
    pub fn new(amplitudes: ComplexVector, dims: (usize, usize)) -> Result<Self> {
        if dims.0 * dims.1 != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                da: dims.0,
                db: dims.1,
                n: amplitudes.len(),
            });
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(PureState { amplitudes, dims })
    }

    /// Normalizes the amplitudes first.
    pub fn normalized(amplitudes: ComplexVector, dims: (usize, usize)) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(amplitudes.unscale(norm), dims)
    }

    /// Single-system state, stored with dims `(d, 1)`.
    pub fn local(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(ComplexVector::from_column_slice(amplitudes), (amplitudes.len(), 1))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: (usize, usize), index: usize) -> Self {
        let mut v = ComplexVector::zeros(dims.0 * dims.1);
        v[index] = ONE;
        PureState {
            amplitudes: v,
            dims,
        }
    }

    /// `|φ_A> ⊗ |φ_B>`.
    pub fn product(a: &PureState, b: &PureState) -> Self {
        PureState {
            amplitudes: a.amplitudes.kronecker(&b.amplitudes),
            dims: (a.amplitudes.len(), b.amplitudes.len()),
        }
    }

    /// `Σ_i |ii> / √d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = ComplexVector::zeros(d * d);
        let amp = c64(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = amp;
        }
        PureState {
            amplitudes: v,
            dims: (d, d),
        }
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_parts(self.projector(), self.dims)
    }

    /// Applies a unitary on the whole space.
    pub fn transformed(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::normalized(u * &self.amplitudes, self.dims)
    }
}
