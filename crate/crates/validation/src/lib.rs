//! Acceptance criteria for the `negent` crate, shared by the CLI `selftest`
//! command and the `acceptance` test target.
//!
//! Every criterion is deterministic: ensembles are drawn from fixed seeds.

use std::time::{Duration, Instant};

use rand::Rng;

use negent::{Error, Result};
use negent::ising::{correlator_set, ed_two_site_rdm, nem_sweep, rdm_from_correlators, two_site_rdm, IsingParams};
use negent::measures::{
    i_concurrence_pure, isotropic_i_concurrence, isotropic_state, lambda_two_qubit,
    IsotropicParams,
};
use negent::nem::{
    nem_diagonal, nem_isotropic_lower_bound, nem_oracle, nem_pure_product, nem_two_qubit, optimal_mixer,
    sample_separable, DiagonalWeights, OracleConfig, ENTANGLED_TOL,
};
use negent::qcore::{diag, identity, inverse_sqrt, kron, max_abs, ComplexMatrix, DensityMatrix, PureState};
use negent::sampling::{dirichlet_weights, ginibre, haar_unitary, haar_vector, random_density, seeded_rng};

const SEED: u64 = 20_240_601;

/// Size of the two-qubit ensembles of criteria 2 and 3.
pub const ORACLE_ENSEMBLE: usize = 100;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    /// One-line summary, e.g. `[PASS] 1 diagonal closed form: ...`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }

    /// [`Outcome::line`] with the wall-clock time appended.
    pub fn timed_line(&self) -> String {
        format!("{} ({:.1} s)", self.line(), self.elapsed.as_secs_f64())
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "diagonal closed form"),
    (2, "variational oracle vs closed form"),
    (3, "optimal mixer certificate"),
    (4, "convexity of Lambda"),
    (5, "pure product states"),
    (6, "isotropic states"),
    (7, "Ising correlators vs exact diagonalization"),
    (8, "NEM derivative at the critical point"),
    (9, "property suites"),
];

fn timed(id: u8, budget: Option<Duration>, body: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let name = CRITERIA[(id - 1) as usize].1;
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = budget {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!("; exceeded time budget of {} s", limit.as_secs()));
        }
    }
    Outcome {
        id,
        name,
        passed,
        detail,
        elapsed,
    }
}

/// Runs the criterion with the given id (1 to 9).
pub fn run(id: u8) -> Result<Outcome> {
    Ok(match id {
        1 => criterion_diagonal(),
        2 => criterion_oracle(),
        3 => criterion_optimal_mixer(),
        4 => criterion_convexity(),
        5 => criterion_pure_product(),
        6 => criterion_isotropic(),
        7 => criterion_ising_ed(),
        8 => criterion_sweep(),
        9 => criterion_properties(),
        _ => return Err(Error::InvalidParameter(format!("no acceptance criterion {id}"))),
    })
}

pub fn run_all() -> Vec<Outcome> {
    (1..=9).map(|id| run(id).expect("valid id")).collect()
}

/// Separable two-qubit ensemble of criteria 2 and 3.
pub fn separable_ensemble() -> Result<Vec<DensityMatrix>> {
    (0..ORACLE_ENSEMBLE)
        .map(|i| sample_separable(SEED + i as u64, i % 8 + 1))
        .collect()
}

pub fn criterion_diagonal() -> Outcome {
    timed(1, Some(Duration::from_secs(5)), || {
        let mut rng = seeded_rng(SEED, 1);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let w = dirichlet_weights(&mut rng, 4);
            let weights = DiagonalWeights::new(w[0], w[1], w[2], w[3])?;
            let gap = (nem_diagonal(weights) - nem_two_qubit(&weights.state())?).abs();
            worst = worst.max(gap);
        }
        Ok((worst <= 1e-10, format!("max deviation {worst:.2e} over 1000 states (tol 1e-10)")))
    })
}

pub fn criterion_oracle() -> Outcome {
    timed(2, Some(Duration::from_secs(600)), || {
        let cfg = OracleConfig::default();
        let mut worst_below = 0.0f64;
        let mut worst_above = f64::NEG_INFINITY;
        let mut failures = 0;
        for rho in separable_ensemble()? {
            let exact = nem_two_qubit(&rho)?;
            let estimate = nem_oracle(&rho, &cfg)?.value;
            // The oracle exhibits a feasible mixing, so it can only
            // overestimate |N|: estimate ≤ exact up to rounding.
            if estimate < exact - 1e-2 || estimate > exact + 1e-9 {
                failures += 1;
            }
            worst_below = worst_below.max(exact - estimate);
            worst_above = worst_above.max(estimate - exact);
        }
        Ok((
            failures == 0,
            format!(
                "{failures}/{ORACLE_ENSEMBLE} outside [exact - 1e-2, exact + 1e-9]; \
                 largest shortfall {worst_below:.2e}, largest excess {worst_above:.2e}"
            ),
        ))
    })
}

pub fn criterion_optimal_mixer() -> Outcome {
    timed(3, None, || {
        let eps = 1e-3;
        let mut worst = 0.0f64;
        let mut min_mixed = f64::INFINITY;
        for rho in separable_ensemble()? {
            let lambda = lambda_two_qubit(&rho)?.lambda;
            let cert = optimal_mixer(&rho, eps)?;
            worst = worst.max((cert.cost - (-lambda + eps)).abs());
            min_mixed = min_mixed.min(cert.mixed_lambda);
        }
        Ok((
            worst <= 1e-9 && min_mixed > 0.0,
            format!("max |cost - (-Lambda + eps)| = {worst:.2e} (tol 1e-9); min mixed Lambda {min_mixed:.3e}"),
        ))
    })
}

pub fn criterion_convexity() -> Outcome {
    timed(4, None, || {
        let mut rng = seeded_rng(SEED, 4);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..10_000 {
            let k = rng.random_range(2..=4);
            let states: Vec<DensityMatrix> = (0..k)
                .map(|_| {
                    let rank = rng.random_range(1..=4);
                    random_density(&mut rng, (2, 2), rank)
                })
                .collect();
            let weights = dirichlet_weights(&mut rng, k);
            let mixture = DensityMatrix::convex_combination(&states, &weights)?;
            let mut average = 0.0;
            for (s, p) in states.iter().zip(&weights) {
                average += p * lambda_two_qubit(s)?.lambda;
            }
            worst = worst.max(lambda_two_qubit(&mixture)?.lambda - average);
        }
        Ok((
            worst <= 1e-10,
            format!("max Lambda(mixture) - average Lambda = {worst:.2e} over 10^4 mixtures (tol 1e-10)"),
        ))
    })
}

pub fn criterion_pure_product() -> Outcome {
    timed(5, None, || {
        let mut rng = seeded_rng(SEED, 5);
        let cfg = OracleConfig::default();
        let mut max_pt = f64::NEG_INFINITY;
        let mut lowest = 0.0f64;
        let mut highest = f64::NEG_INFINITY;
        for _ in 0..100 {
            let a = PureState::local(haar_vector(&mut rng, 2).as_slice())?;
            let b = PureState::local(haar_vector(&mut rng, 2).as_slice())?;
            let cert = nem_pure_product(&a, &b, &[1e-6])?;
            max_pt = max_pt.max(cert.mixings[0].min_pt_eigenvalue);
            let value = nem_oracle(&PureState::product(&a, &b).density(), &cfg)?.value;
            lowest = lowest.min(value);
            highest = highest.max(value);
        }
        Ok((
            max_pt < 0.0 && lowest >= -1e-4 && highest <= 0.0,
            format!(
                "largest partial-transpose minimum at t = 1e-6: {max_pt:.3e}; oracle values in [{lowest:.3e}, {highest:.3e}]"
            ),
        ))
    })
}

pub fn criterion_isotropic() -> Outcome {
    timed(6, None, || {
        let mut worst_d2 = 0.0f64;
        let mut mismatched = Vec::new();
        for k in 0..=5 {
            let f = k as f64 / 10.0;
            let p = IsotropicParams::new(2, f)?;
            let bound = nem_isotropic_lower_bound(p)?;
            let lambda = lambda_two_qubit(&isotropic_state(p))?.lambda;
            let gap = (bound - lambda).abs().max((bound - (2.0 * f - 1.0)).abs());
            if gap > 1e-10 {
                mismatched.push(format!("F={f:.1}: bound {bound:.4}, Lambda {lambda:.4}"));
            }
            worst_d2 = worst_d2.max(gap);
        }
        let mut worst_pure = 0.0f64;
        for d in 3..=8 {
            let closed = isotropic_i_concurrence(IsotropicParams::new(d, 1.0)?);
            let direct = i_concurrence_pure(&PureState::maximally_entangled(d));
            worst_pure = worst_pure.max((closed - direct).abs());
        }
        let mut detail =
            format!("d = 2 bound vs Lambda: {worst_d2:.2e} (tol 1e-10); d = 3..8 at F = 1: {worst_pure:.2e} (tol 1e-12)");
        if !mismatched.is_empty() {
            detail.push_str(&format!("; bound not tight at {}", mismatched.join(", ")));
        }
        Ok((worst_d2 <= 1e-10 && worst_pure <= 1e-12, detail))
    })
}

pub fn criterion_ising_ed() -> Outcome {
    timed(7, Some(Duration::from_secs(120)), || {
        let mut worst = 0.0f64;
        for lambda in [0.5, 2.0] {
            for r in 1..=3 {
                let tl = two_site_rdm(IsingParams::new(lambda, r)?)?;
                let ed = ed_two_site_rdm(12, lambda, r)?;
                worst = worst.max(max_abs(&(tl.matrix() - ed.matrix())));
            }
        }
        let zero = two_site_rdm(IsingParams::new(0.0, 1)?)?;
        let up = max_abs(&(zero.matrix() - diag(&[1.0, 0.0, 0.0, 0.0])));
        Ok((
            worst <= 2e-2 && up <= 1e-8,
            format!("max-norm gap to N = 12 ED: {worst:.2e} (tol 2e-2); lambda = 0 gap to |up up>: {up:.1e}"),
        ))
    })
}

/// Grid position and magnitude of the largest |dN/dλ|.
fn derivative_peak(r: usize, h: f64) -> Result<(f64, f64)> {
    let sweep = nem_sweep(0.0, 2.0, 201, r, h)?;
    let row = sweep.derivative_extremum().expect("non-empty grid");
    Ok((row.lambda, row.dnem_dlambda.abs()))
}

pub fn criterion_sweep() -> Outcome {
    timed(8, None, || {
        let mut notes = Vec::new();
        let mut passed = true;
        let start = Instant::now();
        for r in 3..=5 {
            let mut max_c = 0.0f64;
            let mut max_n = f64::NEG_INFINITY;
            for k in 0..201 {
                let lambda = 2.0 * k as f64 / 200.0;
                let rho = rdm_from_correlators(&correlator_set(IsingParams::new(lambda, r)?)?)?;
                let data = lambda_two_qubit(&rho)?;
                max_c = max_c.max(data.concurrence);
                max_n = max_n.max(data.lambda.min(0.0));
            }
            let sweep = nem_sweep(0.0, 2.0, 201, r, 1e-3)?;
            let n0 = sweep.rows[0].nem;
            let peak = sweep.derivative_extremum().expect("non-empty grid");
            let ok = max_c <= ENTANGLED_TOL
                && max_n <= 0.0
                && n0.abs() <= ENTANGLED_TOL
                && (peak.lambda - 1.0).abs() <= 0.05;
            passed &= ok;
            notes.push(format!(
                "r={r}: max C {max_c:.1e}, N(0) {n0:.1e}, peak at {:.2}",
                peak.lambda
            ));
        }
        let sweep_time = start.elapsed();
        if sweep_time > Duration::from_secs(60) {
            passed = false;
            notes.push(format!("sweeps took {:.1} s (budget 60 s)", sweep_time.as_secs_f64()));
        }
        for r in 3..=5 {
            let peaks = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&h| derivative_peak(r, h))
                .collect::<Result<Vec<_>>>()?;
            let growing = peaks.windows(2).all(|w| w[1].1 > w[0].1);
            let located = peaks.iter().all(|p| (p.0 - 1.0).abs() <= 0.05);
            passed &= growing && located;
            notes.push(format!(
                "r={r}: |dN/dlambda| peak {:.4} -> {:.4} -> {:.4}",
                peaks[0].1, peaks[1].1, peaks[2].1
            ));
        }
        Ok((passed, notes.join("; ")))
    })
}

/// One round of a random local instrument on subsystem A: `2..=4` Kraus
/// operators `G_k S^{-1/2}` with `S = Σ G_k† G_k`.
pub fn random_local_instrument<R: Rng + ?Sized>(rng: &mut R, outcomes: usize) -> Result<Vec<ComplexMatrix>> {
    let gs: Vec<ComplexMatrix> = (0..outcomes).map(|_| ginibre(rng, 2, 2)).collect();
    let s = gs
        .iter()
        .fold(ComplexMatrix::zeros(2, 2), |acc, g| acc + g.adjoint() * g);
    let s_inv_half = inverse_sqrt(&s)?;
    Ok(gs.iter().map(|g| g * &s_inv_half).collect())
}

/// Outcome probabilities and normalized post-measurement states.
pub fn apply_local_instrument(rho: &DensityMatrix, kraus: &[ComplexMatrix]) -> Result<Vec<(f64, DensityMatrix)>> {
    let id = identity(2);
    let mut branches = Vec::with_capacity(kraus.len());
    for k in kraus {
        let op = kron(k, &id);
        let m = &op * rho.matrix() * op.adjoint();
        let p = m.trace().re;
        if p > 1e-14 {
            branches.push((p, negent::qcore::validate_density(m.unscale(p), (2, 2))?));
        }
    }
    Ok(branches)
}

pub fn criterion_properties() -> Outcome {
    timed(9, None, || {
        let mut rng = seeded_rng(SEED, 9);

        let mut worst_lu = 0.0f64;
        for i in 0..100 {
            let rho = sample_separable(SEED + 10_000 + i, (i % 8 + 1) as usize)?;
            let ua = haar_unitary(&mut rng, 2);
            let ub = haar_unitary(&mut rng, 2);
            let rotated = rho.local_unitary(&ua, &ub)?;
            worst_lu = worst_lu.max((nem_two_qubit(&rotated)? - nem_two_qubit(&rho)?).abs());
        }

        let mut worst_mix = f64::NEG_INFINITY;
        for i in 0..1000u64 {
            let k = rng.random_range(2..=5);
            let parts = (0..k)
                .map(|j| sample_separable(SEED + 20_000 + 8 * i + j as u64, rng.random_range(1..=8)))
                .collect::<Result<Vec<_>>>()?;
            let weights = dirichlet_weights(&mut rng, k);
            let mixture = DensityMatrix::convex_combination(&parts, &weights)?;
            let mut average = 0.0;
            for (s, p) in parts.iter().zip(&weights) {
                average += p * nem_two_qubit(s)?;
            }
            worst_mix = worst_mix.max(nem_two_qubit(&mixture)? - average);
        }

        let mut worst_locc = f64::NEG_INFINITY;
        for i in 0..1000u64 {
            let rho = sample_separable(SEED + 40_000 + i, rng.random_range(1..=8))?;
            let outcomes = rng.random_range(2..=4);
            let kraus = random_local_instrument(&mut rng, outcomes)?;
            let mut average = 0.0;
            for (p, branch) in apply_local_instrument(&rho, &kraus)? {
                average += p * lambda_two_qubit(&branch)?.lambda.abs();
            }
            worst_locc = worst_locc.max(average - lambda_two_qubit(&rho)?.lambda.abs());
        }

        Ok((
            worst_lu <= 1e-10 && worst_mix <= 1e-10 && worst_locc <= 1e-9,
            format!(
                "local unitaries {worst_lu:.1e} (tol 1e-10); mixing {worst_mix:.1e} (tol 1e-10); \
                 local instruments {worst_locc:.1e} (tol 1e-9)"
            ),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instrument_is_trace_preserving() {
        let mut rng = seeded_rng(3, 3);
        let kraus = random_local_instrument(&mut rng, 3).unwrap();
        let total = kraus
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
        assert!(max_abs(&(total - identity(2))) < 1e-12);
    }

    #[test]
    fn projective_measurement_removes_correlations() {
        let rho = DensityMatrix::maximally_mixed((2, 2));
        let p0 = diag(&[1.0, 0.0]);
        let p1 = identity(2) - &p0;
        let branches = apply_local_instrument(&rho, &[p0, p1]).unwrap();
        assert_eq!(branches.len(), 2);
        for (p, b) in branches {
            assert!((p - 0.5).abs() < 1e-15);
            assert!(lambda_two_qubit(&b).unwrap().lambda.abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_criterion() {
        assert!(run(0).is_err());
        assert!(run(10).is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [1, 3, 7] {
            let o = run(id).unwrap();
            assert!(o.passed, "{}", o.line());
        }
    }
}
