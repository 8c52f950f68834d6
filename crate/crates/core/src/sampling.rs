//! Random states and unitaries for test ensembles.
//!
//! All generators take an explicit `ChaCha8Rng`, so a seed fully determines
//! the output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::qcore::{c64, ComplexMatrix, ComplexVector, DensityMatrix, PureState};

/// Deterministic generator for `(seed, stream)`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

/// Haar-random unit vector in `C^d`.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(d, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix on `R`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let qr = ginibre(rng, d, d).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c64(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density matrix `G G† / Tr(G G†)` with `G` an `n × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dims: (usize, usize), rank: usize) -> DensityMatrix {
    let n = dims.0 * dims.1;
    let g = ginibre(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_parts(crate::qcore::hermitize(m.unscale(tr)), dims)
}

/// Haar-random product pure state `|a> ⊗ |b>`.
pub fn haar_product_state<R: Rng + ?Sized>(rng: &mut R, dims: (usize, usize)) -> PureState {
    let a = haar_vector(rng, dims.0);
    let b = haar_vector(rng, dims.1);
    let amps = a.kronecker(&b);
    let norm = amps.norm();
    PureState::new(amps.unscale(norm), dims).expect("product of unit vectors is normalized")
}

/// Uniform point on the probability simplex (flat Dirichlet).
pub fn dirichlet_weights<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}
