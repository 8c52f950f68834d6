//! The negative entanglement measure of separable states.
//!
//! For a separable ρ the measure is `N(ρ) = −inf t·C(σ)` over mixing weights
//! `t > 0` and entangled states σ such that `(ρ + tσ)/(1 + t)` is entangled.
//! For two qubits it equals Λ(ρ) ([`nem_two_qubit`]); [`nem_oracle`] attacks
//! the infimum directly and serves as an independent check of that formula.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{
    i_concurrence_pure, lambda4, lambda_two_qubit, ppt_min_eigenvalue, ppt_min_eigenvalue_matrix,
    pure_two_qubit_concurrence, wootters_decomposition, IsotropicParams,
};
use crate::optim::NelderMead;
use crate::qcore::{
    c64, partial_transpose_matrix, ComplexMatrix, ComplexVector, DensityMatrix, PureState,
    Subsystem,
};
use crate::sampling::{dirichlet_weights, haar_product_state, haar_vector, seeded_rng};

/// Λ above this means the input is entangled.
pub const ENTANGLED_TOL: f64 = 1e-9;
/// Default tolerance for the ESS test `|Λ| ≤ tol`.
pub const ESS_TOL: f64 = 1e-8;
/// λ1 at or below this selects the Bell-state mixer.
pub const LAMBDA1_ZERO: f64 = 1e-10;
/// Lower end of the log-scale search range for t.
pub const T_MIN: f64 = 1e-6;

fn check_separable_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    let lambda = lambda_two_qubit(rho)?.lambda;
    if lambda > ENTANGLED_TOL {
        return Err(Error::EntangledInput(lambda));
    }
    Ok(lambda)
}

/// Exact NEM of a separable two-qubit state: Λ(ρ).
pub fn nem_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    Ok(check_separable_two_qubit(rho)?.min(0.0))
}

/// Populations of a two-qubit state diagonal in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl DiagonalWeights {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let all = [a, b, c, d];
        if all.iter().any(|x| !(0.0..=1.0).contains(x)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "diagonal weights {all:?} must lie in [0,1] and sum to 1"
            )));
        }
        Ok(DiagonalWeights { a, b, c, d })
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::two_qubit_diagonal(self.a, self.b, self.c, self.d)
            .expect("validated weights form a density matrix")
    }
}

/// Closed form for diagonal states: `−2√(bc)` if `ad ≥ bc`, else `−2√(ad)`.
pub fn nem_diagonal(w: DiagonalWeights) -> f64 {
    let ad = w.a * w.d;
    let bc = w.b * w.c;
    if ad >= bc {
        -2.0 * bc.sqrt()
    } else {
        -2.0 * ad.sqrt()
    }
}

/// A witnessed mixing `(ρ + tσ)/(1 + t)` that is entangled.
#[derive(Debug, Clone)]
pub struct MixingCertificate {
    /// Mixing weight t > 0.
    pub t: f64,
    /// Slack above the exact infimum the construction aims for (for the
    /// variational search, the feasibility margin).
    pub epsilon: f64,
    /// The entangled state σ (unit trace).
    pub mixer: DensityMatrix,
    /// t·C(σ).
    pub cost: f64,
    /// Entanglement witness of the mixture: Λ for two qubits, minus the
    /// smallest partial-transpose eigenvalue otherwise. Positive means
    /// entangled.
    pub mixed_lambda: f64,
}

/// The mixing that attains `−Λ(ρ) + ε` for a separable two-qubit state.
///
/// With λ1 > 0 the mixer is the normalized projector onto the first Wootters
/// vector `|x1>` and `t` is scaled by `<x1|x1>`, so that `ρ + tσ` equals
/// `ρ + t'|x1><x1|` for `t' = (λ2 + λ3 + λ4 − λ1 + ε)/λ1`. With λ1 = 0 the
/// mixer is `|ψ+>` and `t = ε`.
pub fn optimal_mixer(rho: &DensityMatrix, epsilon: f64) -> Result<MixingCertificate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    let lambda = check_separable_two_qubit(rho)?;
    let data = wootters_decomposition(rho)?;
    let (t, mixer, c_mixer) = if data.lambdas[0] > LAMBDA1_ZERO {
        let x1 = &data.vectors[0];
        let psi = PureState::normalized(x1.clone(), (2, 2))?;
        let c_mixer = pure_two_qubit_concurrence(psi.amplitudes().as_slice());
        ((-lambda + epsilon) / c_mixer, psi.density(), c_mixer)
    } else {
        (epsilon, PureState::maximally_entangled(2).density(), 1.0)
    };
    let mixture = rho.mix(&mixer, t)?;
    let mixed_lambda = lambda_two_qubit(&mixture)?.lambda;
    Ok(MixingCertificate {
        t,
        epsilon,
        mixer,
        cost: t * c_mixer,
        mixed_lambda,
    })
}

/// Corollary-style ESS test for two qubits: `|Λ(ρ)| ≤ tol`.
pub fn is_ess_two_qubit(rho: &DensityMatrix, tol: f64) -> Result<bool> {
    let lambda = check_separable_two_qubit(rho)?;
    Ok(lambda.abs() <= tol)
}

/// Lower bound `√(2d/(d−1))·(F − 1/d)` on the NEM of a separable isotropic
/// state, from mixing with the maximally entangled state.
pub fn nem_isotropic_lower_bound(p: IsotropicParams) -> Result<f64> {
    let d = p.d() as f64;
    let f = p.fidelity();
    if f > 1.0 / d + 1e-12 {
        return Err(Error::FOutOfRange { f, d: p.d() });
    }
    Ok(((2.0 * d / (d - 1.0)).sqrt() * (f - 1.0 / d)).min(0.0))
}

/// One point of the pure-product certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductMixing {
    pub t: f64,
    /// Smallest partial-transpose eigenvalue of the mixture (negative).
    pub min_pt_eigenvalue: f64,
    /// t·C(σ).
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct PureProductCertificate {
    pub value: f64,
    pub mixings: Vec<ProductMixing>,
}

/// Unitary whose first column is `phi`.
fn complete_to_unitary(phi: &ComplexVector) -> ComplexMatrix {
    let d = phi.len();
    let mut cols: Vec<ComplexVector> = vec![phi.clone()];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut e = ComplexVector::zeros(d);
        e[k] = c64(1.0, 0.0);
        for col in &cols {
            let overlap = col.dotc(&e);
            e -= col * overlap;
        }
        let norm = e.norm();
        if norm > 1e-6 {
            cols.push(e.unscale(norm));
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// NEM of a pure product state is zero: for every `t` in `t_grid` the mixture
/// of `|φ1 φ2>` with `|ψ+>` (written in a local basis where `|φ1> = |0>` and
/// `|φ2> = |0>`) has a negative partial transpose.
pub fn nem_pure_product(phi1: &PureState, phi2: &PureState, t_grid: &[f64]) -> Result<PureProductCertificate> {
    let (da, db) = (phi1.amplitudes().len(), phi2.amplitudes().len());
    if da < 2 || db < 2 {
        return Err(Error::InvalidParameter("local dimensions must be at least 2".into()));
    }
    let ua = complete_to_unitary(phi1.amplitudes());
    let ub = complete_to_unitary(phi2.amplitudes());
    let rho = PureState::product(phi1, phi2).density();

    // (|00> + |11>)/√2 in the local frames.
    let mut bell = ComplexVector::zeros(da * db);
    let amp = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    bell[0] = amp;
    bell[db + 1] = amp;
    let sigma = PureState::new(bell, (da, db))?.transformed(&crate::qcore::kron(&ua, &ub))?;
    let c_sigma = i_concurrence_pure(&sigma);
    let sigma = sigma.density();

    let mut mixings = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
        }
        let mixture = rho.mix(&sigma, t)?;
        let min_eig = ppt_min_eigenvalue(&mixture);
        if !(min_eig < 0.0) {
            return Err(Error::CertificateFailure { t, min_eig });
        }
        mixings.push(ProductMixing {
            t,
            min_pt_eigenvalue: min_eig,
            cost: t * c_sigma,
        });
    }
    Ok(PureProductCertificate { value: 0.0, mixings })
}

/// Convex mixture of `k` Haar-random two-qubit product states with flat
/// Dirichlet weights. Separable by construction.
pub fn sample_separable(seed: u64, k: usize) -> Result<DensityMatrix> {
    if !(1..=8).contains(&k) {
        return Err(Error::InvalidParameter(format!("k = {k} not in [1, 8]")));
    }
    let mut rng = seeded_rng(seed, 0);
    let weights = dirichlet_weights(&mut rng, k);
    let mut m = ComplexMatrix::zeros(4, 4);
    for w in weights {
        let psi = haar_product_state(&mut rng, (2, 2));
        m += psi.projector().scale(w);
    }
    Ok(DensityMatrix::from_parts(crate::qcore::hermitize(m), (2, 2)))
}

/// Hyperparameters of the variational search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Required witness value of the mixture.
    pub feasibility_delta: f64,
    pub seed: u64,
    /// Upper end of the search range for t.
    pub t_max: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 50,
            max_iters: 2000,
            feasibility_delta: 1e-5,
            seed: 0,
            t_max: 1e3,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter("restarts and max_iters must be positive".into()));
        }
        if !(self.feasibility_delta > 0.0 && self.feasibility_delta <= 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "feasibility_delta = {} not in (0, 1e-2]",
                self.feasibility_delta
            )));
        }
        if !(self.t_max > T_MIN) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("t_max = {}", self.t_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Negated best cost: an upper bound on N(ρ) (a lower bound on |N|).
    pub value: f64,
    pub certificate: MixingCertificate,
    /// Restarts that produced a feasible mixing.
    pub feasible_restarts: usize,
}

/// Cost and witness evaluation for mixings of a fixed ρ with pure states.
struct MixingProblem {
    rho: ComplexMatrix,
    dims: (usize, usize),
    rho4: Option<nalgebra::Matrix4<num_complex::Complex64>>,
}

impl MixingProblem {
    fn new(rho: &DensityMatrix) -> Self {
        let rho4 = rho
            .is_two_qubit()
            .then(|| nalgebra::Matrix4::from_fn(|i, j| rho.matrix()[(i, j)]));
        MixingProblem {
            rho: rho.matrix().clone(),
            dims: rho.dims(),
            rho4,
        }
    }

    fn n(&self) -> usize {
        self.rho.nrows()
    }

    /// Concurrence (two qubits) or I-concurrence of a normalized pure state.
    fn cost(&self, psi: &ComplexVector) -> f64 {
        if self.rho4.is_some() {
            pure_two_qubit_concurrence(psi.as_slice())
        } else {
            let (da, db) = self.dims;
            let amp = ComplexMatrix::from_fn(da, db, |i, j| psi[i * db + j]);
            let rho_a = &amp * amp.adjoint();
            let purity: f64 = rho_a.iter().map(|z| z.norm_sqr()).sum();
            (2.0 * (1.0 - purity)).max(0.0).sqrt()
        }
    }

    /// Positive iff `(ρ + t|ψ><ψ|)/(1 + t)` is certified entangled.
    fn witness(&self, psi: &ComplexVector, t: f64) -> f64 {
        let scale = 1.0 / (1.0 + t);
        if let Some(rho4) = &self.rho4 {
            let p = nalgebra::Matrix4::from_fn(|i, j| psi[i] * psi[j].conj());
            lambda4(&((rho4 + p.scale(t)).scale(scale)))
        } else {
            let m = (&self.rho + (psi * psi.adjoint()).scale(t)).scale(scale);
            -ppt_min_eigenvalue_matrix(&partial_transpose_matrix(&m, self.dims, Subsystem::B))
        }
    }

    /// Smallest t in `[T_MIN, t_max]` with witness ≥ δ, by bisection on ln t.
    ///
    /// The witness is convex along the segment from ρ to σ and non-positive at
    /// ρ, so the feasible set is an interval reaching up to σ.
    fn minimal_feasible_t(&self, psi: &ComplexVector, delta: f64, t_max: f64) -> Option<f64> {
        if self.witness(psi, t_max) < delta {
            return None;
        }
        if self.witness(psi, T_MIN) >= delta {
            return Some(T_MIN);
        }
        let (mut lo, mut hi) = (T_MIN.ln(), t_max.ln());
        for _ in 0..200 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.witness(psi, mid.exp()) >= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi.exp())
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    t: f64,
    psi: ComplexVector,
    cost: f64,
    witness: f64,
}

fn unpack_psi(x: &[f64], n: usize) -> (ComplexVector, f64) {
    let v = ComplexVector::from_fn(n, |i, _| c64(x[2 * i], x[2 * i + 1]));
    let norm = v.norm();
    (v, norm)
}

fn project(problem: &MixingProblem, psi: &ComplexVector, cfg: &OracleConfig) -> Option<Candidate> {
    let t = problem.minimal_feasible_t(psi, cfg.feasibility_delta, cfg.t_max)?;
    let witness = problem.witness(psi, t);
    (witness >= cfg.feasibility_delta).then(|| Candidate {
        t,
        psi: psi.clone(),
        cost: t * problem.cost(psi),
        witness,
    })
}

/// One random-restart stream: penalized local descent over (amplitudes, ln t)
/// followed by projection onto the smallest feasible t.
fn run_restart(problem: &MixingProblem, cfg: &OracleConfig, index: usize) -> Option<Candidate> {
    let n = problem.n();
    let mut rng = seeded_rng(cfg.seed, index as u64);
    let psi0 = haar_vector(&mut rng, n);
    let (s_lo, s_hi) = (T_MIN.ln(), cfg.t_max.ln());
    let s0 = problem
        .minimal_feasible_t(&psi0, cfg.feasibility_delta, cfg.t_max)
        .map_or(s_hi, f64::ln);

    let mut x0: Vec<f64> = psi0.iter().flat_map(|z| [z.re, z.im]).collect();
    x0.push(s0);
    let delta = cfg.feasibility_delta;
    let objective = |x: &[f64]| -> f64 {
        let (v, norm) = unpack_psi(x, n);
        if !(norm > 1e-8) {
            return 1e6;
        }
        let psi = v.unscale(norm);
        let s = x[2 * n];
        let sc = s.clamp(s_lo, s_hi);
        let t = sc.exp();
        let violation = (delta - problem.witness(&psi, t)).max(0.0);
        t * problem.cost(&psi)
            + (1.0 + t) * (4.0 * violation + 1e4 * violation * violation)
            + (s - sc).powi(2)
            + (norm - 1.0).powi(2)
    };

    let mut steps = vec![0.25; 2 * n];
    steps.push(1.0);
    let mut x = x0;
    let mut best_value = objective(&x);
    let mut used = 0;
    // Re-seed the simplex around the incumbent until the budget is spent or
    // a restart stops improving.
    while used < cfg.max_iters {
        let nm = NelderMead {
            max_iters: cfg.max_iters - used,
            ftol: 1e-13,
            xtol: 1e-10,
        };
        let m = nm.minimize(objective, &x, &steps);
        used += m.iterations.max(1);
        let improved = m.value < best_value - 1e-12;
        if m.value <= best_value {
            x = m.x;
            best_value = m.value;
        }
        if !improved {
            break;
        }
        steps.iter_mut().for_each(|s| *s *= 0.5);
    }

    let (v, norm) = unpack_psi(&x, n);
    let refined = (norm > 1e-8).then(|| project(problem, &v.unscale(norm), cfg)).flatten();
    let initial = project(problem, &psi0, cfg);
    match (refined, initial) {
        (Some(a), Some(b)) => Some(if b.cost < a.cost { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Direct minimization of `t·C(σ)` over pure σ and `t ∈ [1e-6, t_max]`
/// subject to the mixture's witness being at least `feasibility_delta`.
///
/// Two qubits use Λ as the witness and the concurrence as the cost. Larger
/// systems use the negative partial-transpose eigenvalue as the witness and
/// the pure-state I-concurrence as the cost; there the result is only an
/// upper bound on N(ρ), and separability of ρ is the caller's responsibility
/// (an NPT input is rejected).
pub fn nem_oracle(rho: &DensityMatrix, cfg: &OracleConfig) -> Result<OracleResult> {
    cfg.validate()?;
    if rho.is_two_qubit() {
        check_separable_two_qubit(rho)?;
    } else {
        let min_eig = ppt_min_eigenvalue(rho);
        if min_eig < -ENTANGLED_TOL {
            return Err(Error::EntangledInput(-min_eig));
        }
    }
    let problem = MixingProblem::new(rho);
    let candidates: Vec<Option<Candidate>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| run_restart(&problem, cfg, k))
        .collect();
    let feasible_restarts = candidates.iter().filter(|c| c.is_some()).count();
    let best = candidates
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .ok_or(Error::NoFeasiblePoint)?;

    let mixer = PureState::new(best.psi, rho.dims())?.density();
    Ok(OracleResult {
        value: -best.cost,
        certificate: MixingCertificate {
            t: best.t,
            epsilon: cfg.feasibility_delta,
            mixer,
            cost: best.cost,
            mixed_lambda: best.witness,
        },
        feasible_restarts,
    })
}
