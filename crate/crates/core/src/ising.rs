//! Transverse-field Ising chain `H = −λ Σ σ^x_j σ^x_{j+1} − Σ σ^z_j`.
//!
//! Thermodynamic-limit ground-state correlators come from the free-fermion
//! solution: a single contraction
//!
//! ```text
//! G(l) = (1/π) ∫_0^π [cos(lφ) + λ cos((l+1)φ)] / ω(φ) dφ,
//! ω(φ) = √((1−λ)² + 4λ cos²(φ/2)),
//! ```
//!
//! gives `⟨σ^z⟩ = G(0)`, `⟨σ^z_0 σ^z_r⟩ = G(0)² − G(r)G(−r)`, and the
//! string correlators `⟨σ^x_0 σ^x_r⟩`, `⟨σ^y_0 σ^y_r⟩` as r×r Toeplitz
//! determinants of `G(j−k−1)` and `G(j−k+1)`. The convention is checked
//! against exact diagonalization of periodic chains ([`ed_two_site_rdm`]).

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::lambda_two_qubit;
use crate::nem::ENTANGLED_TOL;
use crate::qcore::{
    c64, kron, pauli_x, pauli_y, pauli_z, validate_density, ComplexMatrix, DensityMatrix,
};

/// Absolute tolerance requested from the quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Largest chain handled by exact diagonalization.
pub const MAX_ED_SITES: usize = 14;
/// Ground states of the two parity sectors closer than this are averaged.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub lambda: f64,
    pub gamma: f64,
    pub r: usize,
}

impl IsingParams {
    pub fn new(lambda: f64, r: usize) -> Result<Self> {
        Self::with_gamma(lambda, 1.0, r)
    }

    /// Only the Ising point γ = 1 is supported.
    pub fn with_gamma(lambda: f64, gamma: f64, r: usize) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("site separation r must be >= 1".into()));
        }
        if gamma != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "anisotropy gamma = {gamma} unsupported (Ising chain only)"
            )));
        }
        Ok(IsingParams { lambda, gamma, r })
    }
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let out = quadrature::integrate(&f, a, b, tol);
    if out.error_estimate <= tol {
        return Ok(out.integral);
    }
    // Bisect once before giving up; the double-exponential rule has a fixed
    // evaluation budget per call.
    let mid = 0.5 * (a + b);
    let left = quadrature::integrate(&f, a, mid, 0.5 * tol);
    let right = quadrature::integrate(&f, mid, b, 0.5 * tol);
    let err = left.error_estimate + right.error_estimate;
    if err <= tol {
        Ok(left.integral + right.integral)
    } else {
        Err(Error::Quadrature(err))
    }
}

/// Fermionic contraction G(l) in the thermodynamic limit.
pub fn correlator_g(lambda: f64, l: i64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
    }
    let lf = l as f64;
    let gap_sq = (1.0 - lambda) * (1.0 - lambda);
    let integrand = |phi: f64| {
        let half = (0.5 * phi).cos();
        let omega = (gap_sq + 4.0 * lambda * half * half).sqrt();
        ((lf * phi).cos() + lambda * ((lf + 1.0) * phi).cos()) / omega
    };
    Ok(integrate(integrand, 0.0, PI, PI * QUAD_TOL)? / PI)
}

/// Thermodynamic-limit one- and two-point functions at separation r.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorSet {
    pub mz: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    /// G(−r), …, G(r).
    pub g_values: Vec<f64>,
}

impl CorrelatorSet {
    pub fn g(&self, l: i64) -> f64 {
        let r = (self.g_values.len() / 2) as i64;
        self.g_values[(l + r) as usize]
    }
}

fn toeplitz_det(r: usize, entry: impl Fn(i64) -> f64) -> f64 {
    DMatrix::<f64>::from_fn(r, r, |j, k| entry(j as i64 - k as i64)).determinant()
}

pub fn correlator_set(p: IsingParams) -> Result<CorrelatorSet> {
    let r = p.r as i64;
    let g_values = (-r..=r)
        .map(|l| correlator_g(p.lambda, l))
        .collect::<Result<Vec<f64>>>()?;
    let g = |l: i64| g_values[(l + r) as usize];
    let mz = g(0);
    let xx = toeplitz_det(p.r, |d| g(d - 1));
    let yy = toeplitz_det(p.r, |d| g(d + 1));
    let zz = mz * mz - g(r) * g(-r);
    Ok(CorrelatorSet {
        mz,
        xx,
        yy,
        zz,
        g_values,
    })
}

/// ρ = ¼[I + m_z(σ^z⊗I + I⊗σ^z) + xx σ^x⊗σ^x + yy σ^y⊗σ^y + zz σ^z⊗σ^z].
pub fn rdm_from_correlators(c: &CorrelatorSet) -> Result<DensityMatrix> {
    let id = ComplexMatrix::identity(2, 2);
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let m = kron(&id, &id)
        + (kron(&z, &id) + kron(&id, &z)).scale(c.mz)
        + kron(&x, &x).scale(c.xx)
        + kron(&y, &y).scale(c.yy)
        + kron(&z, &z).scale(c.zz);
    validate_density(m.scale(0.25), (2, 2))
}

/// Two-site reduced state ρ(r) of the infinite chain.
pub fn two_site_rdm(p: IsingParams) -> Result<DensityMatrix> {
    rdm_from_correlators(&correlator_set(p)?)
}

/// Ground state of a periodic chain restricted to zero momentum, stored as a
/// full vector over the 2^n computational basis (bit j set = site j down).
#[derive(Debug, Clone)]
pub struct EdGroundState {
    pub n_sites: usize,
    pub energy: f64,
    /// One or two (degenerate) ground vectors; observables are averaged.
    vectors: Vec<Vec<f64>>,
}

fn rotate(s: u32, n: usize) -> u32 {
    let mask = (1u32 << n) - 1;
    ((s << 1) | (s >> (n - 1))) & mask
}

/// Lowest zero-momentum state in the sector of given spin-flip parity.
///
/// The off-diagonal couplings are non-positive, so each parity sector's ground
/// state is non-degenerate with positive amplitudes and therefore
/// translation invariant.
fn sector_ground_state(n: usize, lambda: f64, parity: u32) -> Result<(f64, Vec<f64>)> {
    let dim = 1usize << n;
    let mut reps: Vec<u32> = Vec::new();
    let mut orbit: Vec<usize> = Vec::new();
    let mut rep_of = vec![u32::MAX; dim];
    for s in 0..dim as u32 {
        if s.count_ones() % 2 != parity || rep_of[s as usize] != u32::MAX {
            continue;
        }
        let mut members = vec![s];
        let mut cur = rotate(s, n);
        while cur != s {
            members.push(cur);
            cur = rotate(cur, n);
        }
        let rep = *members.iter().min().expect("non-empty orbit");
        for &m in &members {
            rep_of[m as usize] = rep;
        }
        reps.push(rep);
        orbit.push(members.len());
    }
    let index: HashMap<u32, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();

    let m = reps.len();
    let mut h = DMatrix::<f64>::zeros(m, m);
    for (a, &s) in reps.iter().enumerate() {
        let down = s.count_ones() as f64;
        h[(a, a)] += -(n as f64 - 2.0 * down);
        for j in 0..n {
            let flipped = s ^ ((1 << j) | (1 << ((j + 1) % n)));
            let b = index[&rep_of[flipped as usize]];
            h[(b, a)] += -lambda * (orbit[a] as f64 / orbit[b] as f64).sqrt();
        }
    }
    let h = (&h + h.transpose()).scale(0.5);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::Eigensolver)?;
    let (k, energy) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty sector");
    let coeffs = eig.eigenvectors.column(k);
    let mut full = vec![0.0; dim];
    for s in 0..dim {
        let rep = rep_of[s];
        if rep != u32::MAX {
            let i = index[&rep];
            full[s] = coeffs[i] / (orbit[i] as f64).sqrt();
        }
    }
    Ok((energy, full))
}

impl EdGroundState {
    pub fn solve(n_sites: usize, lambda: f64) -> Result<Self> {
        if n_sites > MAX_ED_SITES {
            return Err(Error::DimensionCap {
                n: n_sites,
                max: MAX_ED_SITES,
            });
        }
        if n_sites < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 sites, got {n_sites}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
        }
        let (e_even, v_even) = sector_ground_state(n_sites, lambda, 0)?;
        let (e_odd, v_odd) = sector_ground_state(n_sites, lambda, 1)?;
        let (energy, vectors) = if (e_even - e_odd).abs() < DEGENERACY_TOL {
            (e_even.min(e_odd), vec![v_even, v_odd])
        } else if e_even < e_odd {
            (e_even, vec![v_even])
        } else {
            (e_odd, vec![v_odd])
        };
        Ok(EdGroundState {
            n_sites,
            energy,
            vectors,
        })
    }

    /// Reduced state of sites `(i, j)`, averaged over the ground space.
    pub fn two_site_rdm_at(&self, i: usize, j: usize) -> Result<DensityMatrix> {
        let n = self.n_sites;
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidParameter(format!("invalid site pair ({i}, {j}) for n = {n}")));
        }
        let mut rho = [[0.0f64; 4]; 4];
        let weight = 1.0 / self.vectors.len() as f64;
        let clear = !((1u32 << i) | (1u32 << j));
        for psi in &self.vectors {
            for (s, &amp) in psi.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let s = s as u32;
                let row = (((s >> i) & 1) << 1 | ((s >> j) & 1)) as usize;
                for col in 0..4u32 {
                    let other = (s & clear) | ((col >> 1) << i) | ((col & 1) << j);
                    rho[row][col as usize] += weight * amp * psi[other as usize];
                }
            }
        }
        let m = ComplexMatrix::from_fn(4, 4, |a, b| c64(rho[a][b], 0.0));
        validate_density(crate::qcore::hermitize(m), (2, 2))
    }

    /// ⟨σ^z⟩ on site 0.
    pub fn magnetization(&self) -> f64 {
        let weight = 1.0 / self.vectors.len() as f64;
        self.vectors
            .iter()
            .map(|psi| {
                psi.iter()
                    .enumerate()
                    .map(|(s, a)| if s & 1 == 0 { a * a } else { -a * a })
                    .sum::<f64>()
            })
            .sum::<f64>()
            * weight
    }
}

/// Two-site reduced state at separation r of an `n_sites` periodic chain.
pub fn ed_two_site_rdm(n_sites: usize, lambda: f64, r: usize) -> Result<DensityMatrix> {
    if r == 0 || 2 * r >= n_sites {
        return Err(Error::InvalidParameter(format!(
            "separation r = {r} must satisfy 1 <= r < n/2 = {}",
            n_sites as f64 / 2.0
        )));
    }
    EdGroundState::solve(n_sites, lambda)?.two_site_rdm_at(0, r)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub r: usize,
    pub nem: f64,
    pub dnem_dlambda: f64,
    pub correlators: CorrelatorSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub grid_step: f64,
    pub derivative_step: f64,
}

/// Formats like C's `%.{sig}g`.
pub fn format_significant(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // The exponent is taken after rounding to `sig` digits, as printf does.
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let exp: i32 = e.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= sig as i32 {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

impl SweepResult {
    pub const CSV_HEADER: &'static str = "lambda,r,nem,dnem_dlambda,mz,xx,yy,zz";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let c = &row.correlators;
            let fields = [
                format_significant(row.lambda, 12),
                row.r.to_string(),
                format_significant(row.nem, 12),
                format_significant(row.dnem_dlambda, 12),
                format_significant(c.mz, 12),
                format_significant(c.xx, 12),
                format_significant(c.yy, 12),
                format_significant(c.zz, 12),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Row with the largest |dN/dλ|.
    pub fn derivative_extremum(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .max_by(|a, b| a.dnem_dlambda.abs().total_cmp(&b.dnem_dlambda.abs()))
    }
}

/// NEM of ρ(r) at coupling λ, failing if the pair is entangled there.
fn nem_at(lambda: f64, r: usize) -> Result<(f64, CorrelatorSet)> {
    let corr = correlator_set(IsingParams::new(lambda, r)?)?;
    let rho = rdm_from_correlators(&corr)?;
    let data = lambda_two_qubit(&rho)?;
    if data.lambda > ENTANGLED_TOL {
        return Err(Error::EntangledRdm {
            lambda,
            r,
            concurrence: data.concurrence,
        });
    }
    Ok((data.lambda.min(0.0), corr))
}

/// N(λ) and dN/dλ of ρ(r) on a uniform grid.
///
/// Interior points use a central difference of step `h`; the two grid ends
/// use one-sided differences.
pub fn nem_sweep(lambda_min: f64, lambda_max: f64, steps: usize, r: usize, h: f64) -> Result<SweepResult> {
    if !(lambda_min >= 0.0) || !(lambda_max >= lambda_min) || !lambda_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= lambda_min <= lambda_max, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if steps == 0 || (steps > 1 && lambda_max == lambda_min) {
        return Err(Error::InvalidParameter(format!("invalid grid: {steps} steps")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("derivative step h = {h}")));
    }
    let span = lambda_max - lambda_min;
    let grid: Vec<f64> = (0..steps)
        .map(|k| {
            if steps == 1 {
                lambda_min
            } else {
                lambda_min + span * k as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let last = steps - 1;
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let (nem, correlators) = nem_at(lambda, r)?;
            let dnem_dlambda = if k == 0 {
                (nem_at(lambda + h, r)?.0 - nem) / h
            } else if k == last {
                (nem - nem_at(lambda - h, r)?.0) / h
            } else {
                (nem_at(lambda + h, r)?.0 - nem_at(lambda - h, r)?.0) / (2.0 * h)
            };
            Ok(SweepRow {
                lambda,
                r,
                nem,
                dnem_dlambda,
                correlators,
            })
        })
        .collect::<Vec<Result<SweepRow>>>()
        // Sequential pass so the reported failure is the first in grid order.
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        grid_step: if steps > 1 { span / (steps - 1) as f64 } else { 0.0 },
        derivative_step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::max_abs;

    #[test]
    fn params_validation() {
        assert!(IsingParams::new(0.5, 3).is_ok());
        assert!(IsingParams::new(-0.1, 3).is_err());
        assert!(IsingParams::new(0.5, 0).is_err());
        assert!(IsingParams::with_gamma(0.5, 0.5, 2).is_err());
    }

    #[test]
    fn g_at_zero_coupling() {
        assert!((correlator_g(0.0, 0).unwrap() - 1.0).abs() < 1e-12);
        for l in [-3, -2, -1, 1, 2, 3] {
            assert!(correlator_g(0.0, l).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn g_critical_magnetization() {
        // At λ = 1 the integrand reduces to cos(φ/2) and G(0) = 2/π.
        assert!((correlator_g(1.0, 0).unwrap() - 2.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn correlators_at_zero_coupling() {
        for r in 1..=4 {
            let c = correlator_set(IsingParams::new(0.0, r).unwrap()).unwrap();
            assert!((c.mz - 1.0).abs() < 1e-12);
            assert!(c.xx.abs() < 1e-12 && c.yy.abs() < 1e-12);
            assert!((c.zz - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_toeplitz_reduces_to_entries() {
        let c = correlator_set(IsingParams::new(0.7, 1).unwrap()).unwrap();
        assert_eq!(c.xx, c.g(-1));
        assert_eq!(c.yy, c.g(1));
    }

    #[test]
    fn rdm_at_zero_coupling_is_all_up() {
        let rho = two_site_rdm(IsingParams::new(0.0, 3).unwrap()).unwrap();
        let up = crate::qcore::diag(&[1.0, 0.0, 0.0, 0.0]);
        assert!(max_abs(&(rho.matrix() - up)) < 1e-8);
    }

    #[test]
    fn rdm_is_exchange_symmetric() {
        let rho = two_site_rdm(IsingParams::new(1.3, 2).unwrap()).unwrap();
        let swap = ComplexMatrix::from_fn(4, 4, |i, j| {
            let swapped = ((i & 1) << 1) | (i >> 1);
            if swapped == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
        });
        let exchanged = &swap * rho.matrix() * &swap;
        assert!(max_abs(&(exchanged - rho.matrix())) < 1e-14);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ed_zero_coupling() {
        let rho = ed_two_site_rdm(4, 0.0, 1).unwrap();
        let up = crate::qcore::diag(&[1.0, 0.0, 0.0, 0.0]);
        assert!(max_abs(&(rho.matrix() - up)) < 1e-12);
    }

    #[test]
    fn ed_translation_invariance() {
        let gs = EdGroundState::solve(10, 0.8).unwrap();
        let reference = gs.two_site_rdm_at(0, 2).unwrap();
        for i in 1..10 {
            let rho = gs.two_site_rdm_at(i, (i + 2) % 10).unwrap();
            assert!(max_abs(&(rho.matrix() - reference.matrix())) < 1e-12);
        }
    }

    #[test]
    fn ed_matches_small_chain_brute_force() {
        // Dense diagonalization of the full 2^6 Hamiltonian.
        let n = 6;
        let lambda = 0.9;
        let dim = 1usize << n;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for s in 0..dim {
            h[(s, s)] = -(n as f64 - 2.0 * s.count_ones() as f64);
            for j in 0..n {
                let t = s ^ ((1 << j) | (1 << ((j + 1) % n)));
                h[(t, s)] += -lambda;
            }
        }
        let eig = SymmetricEigen::new(h);
        let e0 = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let gs = EdGroundState::solve(n, lambda).unwrap();
        assert!((gs.energy - e0).abs() < 1e-10);
    }

    #[test]
    fn ed_limits() {
        assert!(matches!(ed_two_site_rdm(16, 0.5, 2), Err(Error::DimensionCap { .. })));
        assert!(ed_two_site_rdm(8, 0.5, 4).is_err());
        assert!(ed_two_site_rdm(8, 0.5, 0).is_err());
    }

    #[test]
    fn csv_number_format() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.0, 12), "1");
        assert_eq!(format_significant(-0.5, 12), "-0.5");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(2.0 / 3.0 * 1e-7, 12), "6.66666666667e-8");
        assert_eq!(format_significant(123456.789, 12), "123456.789");
        assert_eq!(format_significant(-6.21479960212e-5, 12), "-6.21479960212e-5");
        assert_eq!(format_significant(1.5e-4, 12), "0.00015");
        assert_eq!(format_significant(9.9999999999999e-5, 12), "0.0001");
        assert_eq!(format_significant(1e12, 12), "1e12");
    }

    #[test]
    fn sweep_single_point_at_zero() {
        let s = nem_sweep(0.0, 0.0, 1, 3, 1e-3).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.rows[0].nem.abs() < 1e-9);
        let csv = s.to_csv();
        assert!(csv.starts_with("lambda,r,nem,dnem_dlambda,mz,xx,yy,zz\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn sweep_reports_nearest_neighbour_entanglement() {
        assert!(matches!(nem_sweep(0.5, 1.5, 11, 1, 1e-3), Err(Error::EntangledRdm { .. })));
    }

    #[test]
    fn sweep_argument_validation() {
        assert!(nem_sweep(1.0, 0.5, 10, 3, 1e-3).is_err());
        assert!(nem_sweep(0.0, 1.0, 10, 3, 0.0).is_err());
        assert!(nem_sweep(0.0, 1.0, 0, 3, 1e-3).is_err());
    }
}
