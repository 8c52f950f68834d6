//! Entanglement measures: two-qubit spin flip, Λ and concurrence, the Wootters
//! decomposition, pure-state I-concurrence, isotropic states, and the
//! partial-transpose witness.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{
    c64, eig_hermitian_unchecked, partial_trace, partial_transpose, ComplexMatrix, ComplexVector,
    DensityMatrix, PureState, Subsystem, ZERO,
};

/// Eigenvalues of ρ at or below this are treated as exact zeros when forming
/// √ρ and the decomposition vectors.
pub const RANK_TOL: f64 = 1e-12;

/// Agreement required between the Hermitian and the non-normal spectrum routes
/// (compared on the power sums `Tr((ρρ̃)^k)`).
pub const CROSS_CHECK_TOL: f64 = 1e-7;

/// Largest tolerated deviation of `<x_i|x̃_j>` from `λ_i δ_ij`.
pub const GRAM_TOL: f64 = 1e-6;

type C4 = Matrix4<Complex64>;

/// σ_y ⊗ σ_y, which is real: anti-diagonal (-1, 1, 1, -1).
fn sigma_yy4() -> C4 {
    let mut y = C4::zeros();
    y[(0, 3)] = c64(-1.0, 0.0);
    y[(1, 2)] = c64(1.0, 0.0);
    y[(2, 1)] = c64(1.0, 0.0);
    y[(3, 0)] = c64(-1.0, 0.0);
    y
}

pub fn sigma_yy() -> ComplexMatrix {
    ComplexMatrix::from_iterator(4, 4, sigma_yy4().iter().copied())
}

fn to_c4(m: &ComplexMatrix) -> C4 {
    C4::from_fn(|i, j| m[(i, j)])
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != (2, 2) {
        return Err(Error::WrongDimension {
            expected: 4,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `(σ_y⊗σ_y) m* (σ_y⊗σ_y)` on a 4×4 block.
fn flip4(m: &C4) -> C4 {
    let y = sigma_yy4();
    y * m.conjugate() * y
}

/// ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
pub fn spin_flip(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    require_two_qubit(rho)?;
    let f = flip4(&to_c4(rho.matrix()));
    Ok(ComplexMatrix::from_iterator(4, 4, f.iter().copied()))
}

/// √m with eigenvalues at or below `RANK_TOL` set to zero.
fn truncated_sqrt4(m: &C4) -> C4 {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut scaled = eig.eigenvectors;
    for j in 0..4 {
        let v = eig.eigenvalues[j];
        let s = if v > RANK_TOL { v.sqrt() } else { 0.0 };
        for i in 0..4 {
            scaled[(i, j)] *= s;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Descending λ_i for a 4×4 positive-semidefinite matrix: the square roots of
/// the eigenvalues of the Hermitian matrix √ρ ρ̃ √ρ.
///
/// They are evaluated as the singular values of √ρ·√ρ̃ (whose Gram matrix is
/// √ρ ρ̃ √ρ), which avoids taking square roots of roundoff-level eigenvalues.
pub(crate) fn spin_flip_spectrum4(m: &C4) -> [f64; 4] {
    let sqrt_rho = truncated_sqrt4(m);
    let sqrt_flip = flip4(&sqrt_rho);
    let product = sqrt_rho * sqrt_flip;
    let svd = SVD::new(product, false, false);
    let mut lambdas = [0.0; 4];
    for (slot, s) in lambdas.iter_mut().zip(svd.singular_values.iter()) {
        *slot = *s;
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    lambdas
}

/// Λ = λ1 − λ2 − λ3 − λ4 for a 4×4 positive-semidefinite matrix.
pub(crate) fn lambda4(m: &C4) -> f64 {
    let l = spin_flip_spectrum4(m);
    l[0] - l[1] - l[2] - l[3]
}

/// Power sums `Tr((ρρ̃)^k)`, k = 1..4, of the non-normal product ρρ̃.
///
/// By Newton's identities these fix its spectrum, so comparing them with
/// `Σ λ_i^{2k}` checks the singular-value route without diagonalizing a
/// non-normal matrix.
fn product_route_power_sums(m: &C4) -> [f64; 4] {
    let p = m * flip4(m);
    let mut acc = p;
    let mut out = [0.0; 4];
    for slot in out.iter_mut() {
        *slot = acc.trace().re;
        acc *= p;
    }
    out
}

/// Spin-flip data of a two-qubit state.
#[derive(Debug, Clone)]
pub struct WoottersData {
    /// λ1 ≥ λ2 ≥ λ3 ≥ λ4 ≥ 0.
    pub lambdas: [f64; 4],
    /// λ1 − λ2 − λ3 − λ4.
    pub lambda: f64,
    /// max(Λ, 0).
    pub concurrence: f64,
    /// Subnormalized decomposition vectors `|x_i>`; empty unless produced by
    /// [`wootters_decomposition`].
    pub vectors: Vec<ComplexVector>,
}

impl WoottersData {
    fn from_lambdas(lambdas: [f64; 4]) -> Self {
        let lambda = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
        WoottersData {
            lambdas,
            lambda,
            concurrence: lambda.max(0.0),
            vectors: Vec::new(),
        }
    }

    /// `Σ_i |x_i><x_i|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for x in &self.vectors {
            m += x * x.adjoint();
        }
        m
    }

    /// Max deviation of the cross-Gram matrix `<x_i|x̃_j>` from `diag(λ)`.
    pub fn gram_residual(&self) -> f64 {
        let n = self.vectors.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let g = self.vectors[i].dotc(&tilde(&self.vectors[j]));
                let target = if i == j { self.lambdas[i] } else { 0.0 };
                worst = worst.max((g - c64(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `|x̃> = (σ_y⊗σ_y)|x*>`.
pub fn tilde(x: &ComplexVector) -> ComplexVector {
    ComplexVector::from_vec(vec![-x[3].conj(), x[2].conj(), x[1].conj(), -x[0].conj()])
}

/// λ spectrum, Λ and concurrence, cross-checked against the spectrum of ρρ̃.
pub fn lambda_two_qubit(rho: &DensityMatrix) -> Result<WoottersData> {
    require_two_qubit(rho)?;
    let m = to_c4(rho.matrix());
    let lambdas = spin_flip_spectrum4(&m);
    let sums = product_route_power_sums(&m);
    let deviation = sums
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let from_lambdas: f64 = lambdas.iter().map(|l| l.powi(2 * (k as i32 + 1))).sum();
            (from_lambdas - s).abs()
        })
        .fold(0.0, f64::max);
    if deviation > CROSS_CHECK_TOL {
        return Err(Error::CrossCheck(deviation));
    }
    Ok(WoottersData::from_lambdas(lambdas))
}

pub fn concurrence_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    Ok(lambda_two_qubit(rho)?.concurrence)
}

/// Takagi factorization of a complex symmetric matrix: `τ = U diag(s) Uᵀ`
/// with `U` unitary and `s` descending and non-negative.
///
/// Columns of `U` solve `τ ū = s u`; writing `u = x + i y` turns this into the
/// real symmetric problem `[[Re τ, Im τ], [Im τ, -Re τ]] [x; y] = s [x; y]`,
/// whose spectrum is `±s`. Candidates are taken from the top of that spectrum
/// and completed by greedy complex Gram-Schmidt, which also fixes up the
/// (possibly degenerate) zero block.
pub(crate) fn takagi(tau: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>) {
    let r = tau.nrows();
    let sym = (tau + tau.transpose()).scale(0.5);
    let emb = DMatrix::<f64>::from_fn(2 * r, 2 * r, |i, j| {
        let z = sym[(i % r, j % r)];
        match (i < r, j < r) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    });
    let eig = SymmetricEigen::new(emb);
    let mut order: Vec<usize> = (0..2 * r).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let candidates: Vec<ComplexVector> = order
        .iter()
        .map(|&k| {
            let col = eig.eigenvectors.column(k);
            ComplexVector::from_fn(r, |i, _| c64(col[i], col[i + r]))
        })
        .collect();

    let mut accepted: Vec<ComplexVector> = Vec::with_capacity(r);
    let project_out = |v: &ComplexVector, basis: &[ComplexVector]| {
        let mut w = v.clone();
        for b in basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
        w
    };
    // Well-separated positive eigenvalues first, in descending order.
    for (pos, &k) in order.iter().enumerate().take(r) {
        if eig.eigenvalues[k] <= 1e-8 {
            break;
        }
        let w = project_out(&candidates[pos], &accepted);
        let norm = w.norm();
        if norm > 0.5 {
            accepted.push(w.unscale(norm));
        }
    }
    // Remaining directions: pick the best-conditioned candidate each round.
    while accepted.len() < r {
        let (best, norm) = candidates
            .iter()
            .map(|v| project_out(v, &accepted))
            .map(|w| {
                let n = w.norm();
                (w, n)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty candidate set");
        accepted.push(best.unscale(norm));
    }

    // Rotate each column's phase so that the diagonal of U† τ U* is real and
    // non-negative.
    let mut u = ComplexMatrix::from_columns(&accepted);
    let mut s = vec![0.0; r];
    for i in 0..r {
        let col = u.column(i).into_owned();
        let d = col.dotc(&(&sym * col.conjugate()));
        s[i] = d.norm();
        if d.norm() > 0.0 {
            let phase = Complex64::from_polar(1.0, 0.5 * d.arg());
            for row in 0..r {
                u[(row, i)] *= phase;
            }
        }
    }
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u_sorted = ComplexMatrix::from_fn(r, r, |i, j| u[(i, idx[j])]);
    let s_sorted = idx.iter().map(|&k| s[k]).collect();
    (u_sorted, s_sorted)
}

/// Wootters decomposition `ρ = Σ_i |x_i><x_i|` with `<x_i|x̃_j> = λ_i δ_ij`.
///
/// Starts from the subnormalized eigenvectors of ρ (eigenvalues at or below
/// `RANK_TOL` dropped) and diagonalizes `τ_ij = <v_i|ṽ_j>` by a Takagi
/// factorization. Vectors beyond the rank of ρ are zero.
pub fn wootters_decomposition(rho: &DensityMatrix) -> Result<WoottersData> {
    let mut data = lambda_two_qubit(rho)?;
    let eig = eig_hermitian_unchecked(rho.matrix())?;
    let kept: Vec<ComplexVector> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > RANK_TOL)
        .map(|(k, &p)| eig.vectors.column(k).into_owned().scale(p.sqrt()))
        .collect();
    let r = kept.len();
    let tau = ComplexMatrix::from_fn(r, r, |i, j| kept[i].dotc(&tilde(&kept[j])));
    let (u, _) = takagi(&tau);

    let mut vectors: Vec<ComplexVector> = (0..r)
        .map(|i| {
            let mut x = ComplexVector::zeros(4);
            for (j, v) in kept.iter().enumerate() {
                x += v * u[(j, i)];
            }
            x
        })
        .collect();
    vectors.resize(4, ComplexVector::from_element(4, ZERO));
    data.vectors = vectors;

    let residual = data.gram_residual();
    let recon = crate::qcore::max_abs(&(data.reconstruct() - rho.matrix()));
    if residual > GRAM_TOL || recon > 1e-8 {
        return Err(Error::GramResidual(residual.max(recon)));
    }
    Ok(data)
}

/// I-concurrence `√(2(1 − Tr ρ_A²))` of a bipartite pure state.
pub fn i_concurrence_pure(psi: &PureState) -> f64 {
    let rho_a = partial_trace(&psi.density(), Subsystem::A);
    let purity = rho_a.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>();
    (2.0 * (1.0 - purity)).max(0.0).sqrt()
}

/// Concurrence `|<ψ|ψ̃>| = 2|ψ00ψ11 − ψ01ψ10|` of a two-qubit pure state given
/// by (not necessarily normalized) amplitudes.
pub(crate) fn pure_two_qubit_concurrence(amps: &[Complex64]) -> f64 {
    2.0 * (amps[0] * amps[3] - amps[1] * amps[2]).norm()
}

/// Local dimension and fidelity of an isotropic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicParams {
    d: usize,
    f: f64,
}

impl IsotropicParams {
    pub fn new(d: usize, f: f64) -> Result<Self> {
        if !(2..=16).contains(&d) {
            return Err(Error::InvalidParameter(format!("isotropic dimension d = {d} not in [2, 16]")));
        }
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!("fidelity F = {f} not in [0, 1]")));
        }
        Ok(IsotropicParams { d, f })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn fidelity(&self) -> f64 {
        self.f
    }
}

/// ρ_F = (1 − F)/(d² − 1)·(I − P₊) + F·P₊.
pub fn isotropic_state(p: IsotropicParams) -> DensityMatrix {
    let d = p.d;
    let n = d * d;
    let proj = PureState::maximally_entangled(d).projector();
    let off = (1.0 - p.f) / (n as f64 - 1.0);
    let m = (crate::qcore::identity(n) - &proj).scale(off) + proj.scale(p.f);
    DensityMatrix::from_parts(m, (d, d))
}

/// Closed-form I-concurrence of an isotropic state.
pub fn isotropic_i_concurrence(p: IsotropicParams) -> f64 {
    let d = p.d as f64;
    if p.f <= 1.0 / d {
        0.0
    } else {
        (2.0 * d / (d - 1.0)).sqrt() * (p.f - 1.0 / d)
    }
}

/// Smallest eigenvalue of ρ^{T_B}; negative values certify entanglement.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> f64 {
    ppt_min_eigenvalue_matrix(&partial_transpose(rho, Subsystem::B))
}

pub(crate) fn ppt_min_eigenvalue_matrix(pt: &ComplexMatrix) -> f64 {
    // Partial transposes of Hermitian matrices are Hermitian.
    eig_hermitian_unchecked(pt)
        .map(|e| e.min_value())
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{diag, identity, max_abs};

    fn bell() -> DensityMatrix {
        PureState::maximally_entangled(2).density()
    }

    fn mixed() -> DensityMatrix {
        DensityMatrix::maximally_mixed((2, 2))
    }

    fn werner(p: f64) -> DensityMatrix {
        let m = bell().matrix().scale(p) + identity(4).scale((1.0 - p) / 4.0);
        DensityMatrix::new(m, (2, 2)).unwrap()
    }

    #[test]
    fn spin_flip_examples() {
        assert!(max_abs(&(spin_flip(&mixed()).unwrap() - mixed().matrix())) < 1e-15);
        assert!(max_abs(&(spin_flip(&bell()).unwrap() - bell().matrix())) < 1e-15);
        let ket00 = PureState::basis((2, 2), 0).density();
        assert!(max_abs(&(spin_flip(&ket00).unwrap() - diag(&[0.0, 0.0, 0.0, 1.0]))) < 1e-15);
    }

    #[test]
    fn spin_flip_rejects_wrong_dimension() {
        let rho = DensityMatrix::maximally_mixed((3, 3));
        assert!(matches!(spin_flip(&rho), Err(Error::WrongDimension { .. })));
        assert!(lambda_two_qubit(&rho).is_err());
    }

    #[test]
    fn lambda_examples() {
        let w = lambda_two_qubit(&mixed()).unwrap();
        assert!((w.lambda + 0.5).abs() < 1e-12);
        for l in w.lambdas {
            assert!((l - 0.25).abs() < 1e-12);
        }
        let b = lambda_two_qubit(&bell()).unwrap();
        assert!((b.lambda - 1.0).abs() < 1e-12);
        assert!((b.lambdas[0] - 1.0).abs() < 1e-12 && b.lambdas[1].abs() < 1e-12);
        let d = lambda_two_qubit(&DensityMatrix::two_qubit_diagonal(0.4, 0.3, 0.2, 0.1).unwrap()).unwrap();
        assert!((d.lambda + 0.4).abs() < 1e-12);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence_two_qubit(&bell()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(concurrence_two_qubit(&mixed()).unwrap(), 0.0);
        assert!((concurrence_two_qubit(&werner(0.5)).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn decomposition_of_bell_state_is_single_vector() {
        let w = wootters_decomposition(&bell()).unwrap();
        assert!((w.lambdas[0] - 1.0).abs() < 1e-12);
        let nonzero = w.vectors.iter().filter(|v| v.norm() > 1e-9).count();
        assert_eq!(nonzero, 1);
        let psi = PureState::maximally_entangled(2);
        let overlap = psi.amplitudes().dotc(&w.vectors[0]).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_of_maximally_mixed() {
        let w = wootters_decomposition(&mixed()).unwrap();
        for x in &w.vectors {
            assert!((x.norm_squared() - 0.25).abs() < 1e-10);
        }
        assert!(w.gram_residual() < 1e-10);
    }

    #[test]
    fn decomposition_of_diagonal_reconstructs() {
        let rho = DensityMatrix::two_qubit_diagonal(0.4, 0.3, 0.2, 0.1).unwrap();
        let w = wootters_decomposition(&rho).unwrap();
        assert!(max_abs(&(w.reconstruct() - rho.matrix())) < 1e-8);
        assert!(w.gram_residual() < 1e-7);
    }

    #[test]
    fn decomposition_vector_count_matches_rank() {
        let rho = DensityMatrix::two_qubit_diagonal(0.5, 0.5, 0.0, 0.0).unwrap();
        let w = wootters_decomposition(&rho).unwrap();
        assert_eq!(w.vectors.iter().filter(|v| v.norm() > 1e-9).count(), 2);
    }

    #[test]
    fn i_concurrence_examples() {
        assert!((i_concurrence_pure(&PureState::maximally_entangled(2)) - 1.0).abs() < 1e-12);
        let prod = PureState::product(
            &PureState::local(&[c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap(),
            &PureState::local(&[c64(1.0, 0.0), ZERO]).unwrap(),
        );
        assert!(i_concurrence_pure(&prod).abs() < 1e-7);
        let three = i_concurrence_pure(&PureState::maximally_entangled(3));
        assert!((three - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn isotropic_examples() {
        let p1 = isotropic_state(IsotropicParams::new(2, 1.0).unwrap());
        assert!(max_abs(&(p1.matrix() - bell().matrix())) < 1e-15);
        for d in 2..=5 {
            let f = 1.0 / (d * d) as f64;
            let r = isotropic_state(IsotropicParams::new(d, f).unwrap());
            assert!(max_abs(&(r.matrix() - identity(d * d).unscale((d * d) as f64))) < 1e-15);
        }
        let z = isotropic_state(IsotropicParams::new(3, 0.0).unwrap());
        let expected = (identity(9) - PureState::maximally_entangled(3).projector()).unscale(8.0);
        assert!(max_abs(&(z.matrix() - expected)) < 1e-15);

        for (d, f) in [(2, 0.3), (3, 0.7), (4, 0.1)] {
            let r = isotropic_state(IsotropicParams::new(d, f).unwrap());
            let psi = PureState::maximally_entangled(d);
            let fid = psi.amplitudes().dotc(&(r.matrix() * psi.amplitudes())).re;
            assert!((fid - f).abs() < 1e-12);
            assert!(DensityMatrix::new(r.into_matrix(), (d, d)).is_ok());
        }
    }

    #[test]
    fn isotropic_params_validation() {
        assert!(IsotropicParams::new(1, 0.5).is_err());
        assert!(IsotropicParams::new(17, 0.5).is_err());
        assert!(IsotropicParams::new(3, 1.2).is_err());
    }

    #[test]
    fn isotropic_concurrence_examples() {
        assert_eq!(isotropic_i_concurrence(IsotropicParams::new(3, 1.0 / 3.0).unwrap()), 0.0);
        assert!((isotropic_i_concurrence(IsotropicParams::new(2, 1.0).unwrap()) - 1.0).abs() < 1e-15);
        let v = isotropic_i_concurrence(IsotropicParams::new(3, 1.0).unwrap());
        assert!((v - 1.154_700_538_379_251_5).abs() < 1e-12);
    }

    #[test]
    fn ppt_examples() {
        assert!((ppt_min_eigenvalue(&bell()) + 0.5).abs() < 1e-14);
        let prod = PureState::basis((2, 2), 1).density();
        assert!(ppt_min_eigenvalue(&prod) >= -1e-15);
        let boundary = isotropic_state(IsotropicParams::new(2, 0.5).unwrap());
        assert!(ppt_min_eigenvalue(&boundary).abs() < 1e-14);
    }
}
