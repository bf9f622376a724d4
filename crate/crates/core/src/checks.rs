//! The invariant suite behind `menger check`: one machine-readable pass/fail
//! entry per module property, seeded and deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beta::{beta2, brute_force_beta, centered_beta2, BetaResult};
use crate::curvature::{
    integral_curvature_exact, integral_of_fn, localized_curvature, monte_carlo_curvature,
    pointwise_curvature, restricted_curvature, scaling_check,
};
use crate::error::Result;
use crate::generators::{generate, GeneratorSpec};
use crate::measure::{dist, Ball, DiscreteMeasure, ScaleGrid};
use crate::selection::{empirical_lower_bound, select_spanning_points, verify_selection};
use crate::simplex::{
    diameter, h_min, min_pairwise, proper_integrand_check, simplex_volume, IntegrandKind,
    IntegrandSpec, Symmetrized,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed,
        detail,
    }
}

/// Runs every registered invariant and returns the outcomes in a fixed order.
pub fn run_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    let checks: Vec<fn(u64) -> Result<CheckOutcome>> = vec![
        measure_restrict_idempotent,
        measure_mass_additivity,
        measure_rescale_round_trip,
        measure_rescale_density_identity,
        simplex_volume_oracle_agreement,
        simplex_pointwise_domination,
        simplex_permutation_invariance,
        simplex_homogeneity,
        simplex_rigid_motion_invariance,
        simplex_height_stability,
        simplex_well_simplex_geometry,
        simplex_proper_integrand_k1,
        simplex_proper_integrand_k2,
        simplex_symmetrization_identity,
        curvature_domain_monotonicity,
        curvature_restricted_le_unrestricted,
        curvature_integrand_ordering,
        curvature_monte_carlo_consistency,
        curvature_fubini_consistency,
        curvature_scaling_identities,
        beta_le_centered,
        beta_oracle_agreement,
        beta_rigid_motion_invariance,
        beta_scale_covariance,
        beta_eigenvalue_identity,
        beta_restriction_consistency,
        selection_determinism,
        selection_invariants_on_generators,
        selection_lower_bound_per_scale,
        generators_determinism,
        generators_cantor_self_similarity,
        generators_ahlfors_regularity,
    ];
    checks.iter().map(|f| f(seed)).collect()
}

// ---------------------------------------------------------------------------
// helpers

fn random_cloud(rng: &mut ChaCha8Rng, m: usize, n: usize, count: usize) -> DiscreteMeasure {
    let coords: Vec<f64> = (0..count * m)
        .map(|_| 2.0 * rng.random::<f64>() - 1.0)
        .collect();
    let weights: Vec<f64> = (0..count).map(|_| 0.5 + rng.random::<f64>()).collect();
    DiscreteMeasure::new(m, n, coords, weights).expect("valid random cloud")
}

fn random_points(rng: &mut ChaCha8Rng, m: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect())
        .collect()
}

/// Random rotation from Gram-Schmidt on a Gaussian-ish matrix.
fn random_rotation(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<f64>> {
    loop {
        let mut rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect())
            .collect();
        let mut ok = true;
        for i in 0..m {
            for j in 0..i {
                let c: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                let prev = rows[j].clone();
                for (a, b) in rows[i].iter_mut().zip(&prev) {
                    *a -= c * b;
                }
            }
            let norm: f64 = rows[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for a in rows[i].iter_mut() {
                *a /= norm;
            }
        }
        if ok {
            return rows;
        }
    }
}

fn apply_rotation(rot: &[Vec<f64>], shift: &[f64], p: &[f64]) -> Vec<f64> {
    rot.iter()
        .zip(shift)
        .map(|(row, s)| row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + s)
        .collect()
}

/// Cayley-Menger volume oracle: an independent route to the simplex volume
/// from squared distances only.
#[allow(clippy::needless_range_loop)]
pub fn cayley_menger_volume(pts: &[&[f64]]) -> f64 {
    let k = pts.len() - 1;
    let dim = k + 2;
    let mut m = vec![vec![0.0f64; dim]; dim];
    for i in 1..dim {
        m[0][i] = 1.0;
        m[i][0] = 1.0;
    }
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let d = dist(pts[i], pts[j]);
            m[i + 1][j + 1] = d * d;
        }
    }
    let det = determinant(&mut m);
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    let denom = 2f64.powi(k as i32) * (1..=k).map(|i| i as f64).product::<f64>().powi(2);
    let v2 = sign * det / denom;
    v2.max(0.0).sqrt()
}

#[allow(clippy::needless_range_loop)]
fn determinant(m: &mut [Vec<f64>]) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for c in col..n {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// measure-core

fn measure_restrict_idempotent(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
    let mut ok = true;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 3, 1, 30);
        let ball = Ball::new(vec![0.0, 0.0, 0.0], 0.5 + rng.random::<f64>())?;
        let once = mu.restrict(&ball);
        if once.restrict(&ball) != once {
            ok = false;
        }
    }
    Ok(outcome(
        "measure.restrict_idempotent",
        ok,
        "20 random clouds".into(),
    ))
}

fn measure_mass_additivity(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
    let mut ok = true;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 2, 1, 40);
        let b1 = Ball::new(vec![-2.0, 0.0], 1.0)?;
        let b2 = Ball::new(vec![2.0, 0.0], 1.0)?;
        if mu.mass_in(&b1) + mu.mass_in(&b2) > mu.mass() * (1.0 + 1e-12) {
            ok = false;
        }
    }
    Ok(outcome(
        "measure.mass_additivity_disjoint_balls",
        ok,
        "20 random clouds".into(),
    ))
}

fn measure_rescale_round_trip(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 3, 2, 25);
        let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
        let r = 0.2 + rng.random::<f64>();
        let fwd = mu.rescale(&x, r)?;
        let back_center: Vec<f64> = x.iter().map(|c| -c / r).collect();
        let back = fwd.rescale(&back_center, 1.0 / r)?;
        for i in 0..mu.len() {
            worst = worst.max(dist(back.point(i), mu.point(i)));
            let rel = (back.weight(i) - mu.weight(i)).abs() / mu.weight(i);
            worst = worst.max(rel);
        }
    }
    Ok(outcome(
        "measure.rescale_round_trip",
        worst <= 1e-12,
        format!("worst deviation {worst:.3e}"),
    ))
}

fn measure_rescale_density_identity(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 2, 1, 30);
        let x: Vec<f64> = vec![rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let r = 0.3 + rng.random::<f64>();
        let a = mu.rescale(&x, r)?.density_ratio(&[0.0, 0.0], 1.0)?;
        let b = mu.density_ratio(&x, r)?;
        if b != 0.0 {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    Ok(outcome(
        "measure.rescale_density_identity",
        worst <= 1e-12,
        format!("worst relative deviation {worst:.3e}"),
    ))
}

// ---------------------------------------------------------------------------
// simplex-geometry

fn simplex_volume_oracle_agreement(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let k = 1 + (rng.random::<u32>() % 4) as usize;
        let m = (k + 1).max(2 + (rng.random::<u32>() % 5) as usize).min(6);
        let pts = random_points(&mut rng, m, k + 1);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let a = simplex_volume(&refs);
        let b = cayley_menger_volume(&refs);
        if a > 1e-9 {
            worst = worst.max((a - b).abs() / a.max(b));
        }
    }
    Ok(outcome(
        "simplex.volume_oracle_agreement",
        worst <= 1e-10,
        format!("worst relative gap vs Cayley-Menger {worst:.3e}"),
    ))
}

fn simplex_pointwise_domination(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
    let mut ok = true;
    for n in [1usize, 2] {
        let m = n + 1 + (seed as usize % 2);
        for _ in 0..5_000 {
            let pts = random_points(&mut rng, m.max(n + 1), n + 2);
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let k1 = IntegrandSpec::k1().evaluate(&refs);
            let k2 = IntegrandSpec::k2().evaluate(&refs);
            if k1 > k2 * (1.0 + 1e-12) {
                ok = false;
            }
        }
    }
    Ok(outcome(
        "simplex.pointwise_domination",
        ok,
        "10000 random tuples, n in {1, 2}".into(),
    ))
}

fn simplex_permutation_invariance(seed: u64) -> Result<CheckOutcome> {
    use itertools::Itertools;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
    let mut ok = true;
    for _ in 0..50 {
        let pts = random_points(&mut rng, 2, 3);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let v1 = IntegrandSpec::k1().evaluate(&refs);
        let v2 = IntegrandSpec::k2().evaluate(&refs);
        for perm in refs.iter().copied().permutations(3) {
            if IntegrandSpec::k1().evaluate(&perm) != v1
                || IntegrandSpec::k2().evaluate(&perm) != v2
            {
                ok = false;
            }
        }
    }
    Ok(outcome(
        "simplex.permutation_invariance",
        ok,
        "bit-identical over all orderings".into(),
    ))
}

fn simplex_homogeneity(seed: u64) -> Result<CheckOutcome> {
    let k1 = IntegrandSpec::k1();
    let k2 = IntegrandSpec::k2();
    let v = crate::simplex::homogeneity_violations(&k1, 1, 2, 500, seed ^ 8, 1e-9)
        + crate::simplex::homogeneity_violations(&k2, 1, 2, 500, seed ^ 9, 1e-9)
        + crate::simplex::homogeneity_violations(&k1, 2, 3, 500, seed ^ 10, 1e-9)
        + crate::simplex::homogeneity_violations(&k2, 2, 3, 500, seed ^ 11, 1e-9);
    Ok(outcome(
        "simplex.homogeneity",
        v == 0,
        format!("{v} violations over 2000 trials"),
    ))
}

fn simplex_rigid_motion_invariance(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = 3;
        let pts = random_points(&mut rng, m, 4);
        let rot = random_rotation(&mut rng, m);
        let shift: Vec<f64> = (0..m).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| apply_rotation(&rot, &shift, p))
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mrefs: Vec<&[f64]> = moved.iter().map(|p| p.as_slice()).collect();
        for (a, b) in [
            (
                IntegrandSpec::k1().evaluate(&refs),
                IntegrandSpec::k1().evaluate(&mrefs),
            ),
            (
                IntegrandSpec::k2().evaluate(&refs),
                IntegrandSpec::k2().evaluate(&mrefs),
            ),
            (h_min(&refs), h_min(&mrefs)),
            (diameter(&refs), diameter(&mrefs)),
        ] {
            if a.abs().max(b.abs()) > 0.0 {
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
    }
    Ok(outcome(
        "simplex.rigid_motion_invariance",
        worst <= 1e-9,
        format!("worst relative drift {worst:.3e}"),
    ))
}

fn simplex_height_stability(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 13);
    let mut ok = true;
    let mut tested = 0;
    while tested < 200 {
        let n = 1 + (rng.random::<u32>() % 2) as usize;
        let m = n + 1;
        let pts = random_points(&mut rng, m, n + 1);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let rho = h_min(&refs);
        if rho < 1e-3 {
            continue;
        }
        tested += 1;
        let k = (rng.random::<u32>() % (n as u32 + 1)) as usize; // perturb k+1 vertices
        let delta = rho / (k as f64 + 1.0) * 0.8 * rng.random::<f64>();
        let mut moved = pts.clone();
        for v in moved.iter_mut().take(k + 1) {
            let dir: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let norm: f64 = dir.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let step = delta * rng.random::<f64>() / norm;
            for (c, d) in v.iter_mut().zip(&dir) {
                *c += step * d;
            }
        }
        let mrefs: Vec<&[f64]> = moved.iter().map(|p| p.as_slice()).collect();
        let bound = rho - (k as f64 + 1.0) * delta;
        if h_min(&mrefs) < bound * (1.0 - 1e-9) {
            ok = false;
        }
    }
    Ok(outcome(
        "simplex.height_stability",
        ok,
        "200 random perturbations".into(),
    ))
}

fn simplex_well_simplex_geometry(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 14);
    let mut ok = true;
    for _ in 0..200 {
        let n = 1 + (rng.random::<u32>() % 2) as usize;
        let m = n + 1;
        let x: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let t = 0.5 + rng.random::<f64>();
        let c = 1.0 + 2.0 * rng.random::<f64>();
        let Some(base) = crate::simplex::sample_well_simplex(&mut rng, n, &x, t, c) else {
            continue;
        };
        let w = crate::simplex::sample_in_ball(&mut rng, &x, c * t);
        let refs: Vec<&[f64]> = base.iter().map(|p| p.as_slice()).collect();
        let mut full: Vec<&[f64]> = refs.clone();
        full.push(&w);
        let min_edge = min_pairwise(&refs);
        let vol = simplex_volume(&refs);
        let nf = (1..=n).map(|i| i as f64).product::<f64>();
        let tol = 1.0 + 1e-12;
        if !(t / c <= min_edge * tol
            && min_edge <= diameter(&full) * tol
            && diameter(&full) <= 2.0 * c * t * tol
            && full.iter().all(|p| dist(p, &w) <= 2.0 * c * t * tol)
            && t.powi(n as i32) / (c.powi(n as i32) * nf) <= vol * tol
            && vol <= (2.0 * c).powi(n as i32) * t.powi(n as i32) / nf * tol)
        {
            ok = false;
        }
    }
    Ok(outcome(
        "simplex.well_simplex_geometry",
        ok,
        "side bounds on 200 sampled simplices".into(),
    ))
}

fn simplex_proper_integrand_k1(seed: u64) -> Result<CheckOutcome> {
    let mut detail = String::new();
    let mut passed = true;
    for (n, m) in [(1, 2), (2, 3)] {
        let report = proper_integrand_check(IntegrandKind::K1, n, m, 500, seed ^ 15)?;
        passed &= report.passed();
        detail.push_str(&format!(
            "n={n}: proven-constant violations {}, undersized-constant violations {}; ",
            report.bound_violations,
            report.undersized_constant_violations.unwrap_or(0)
        ));
    }
    Ok(outcome("simplex.proper_integrand_k1", passed, detail))
}

fn simplex_proper_integrand_k2(seed: u64) -> Result<CheckOutcome> {
    let mut detail = String::new();
    let mut passed = true;
    for (n, m) in [(1, 2), (2, 3)] {
        let report = proper_integrand_check(IntegrandKind::K2, n, m, 500, seed ^ 16)?;
        passed &= report.passed();
        detail.push_str(&format!(
            "n={n}: violations {} of {}; ",
            report.bound_violations, report.trials
        ));
    }
    Ok(outcome("simplex.proper_integrand_k2", passed, detail))
}

fn simplex_symmetrization_identity(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 17);
    let first_norm = |pts: &[&[f64]]| -> f64 { pts[0].iter().map(|a| a * a).sum::<f64>().sqrt() };
    let sym = Symmetrized::new(&first_norm, 3)?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mu = random_cloud(&mut rng, 2, 1, 6);
        let direct = integral_of_fn(&mu, &first_norm, 3)?;
        let averaged = integral_of_fn(&mu, &sym, 3)?;
        worst = worst.max((direct - averaged).abs() / direct.abs().max(averaged.abs()));
    }
    Ok(outcome(
        "simplex.symmetrization_identity",
        worst <= 1e-12,
        format!("worst relative gap {worst:.3e} over 10 six-point clouds"),
    ))
}

// ---------------------------------------------------------------------------
// curvature

fn curvature_domain_monotonicity(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 18);
    let mu = random_cloud(&mut rng, 2, 1, 12);
    let x = [0.0, 0.0];
    let k1 = IntegrandSpec::k1();
    let mut ok = true;
    // Nonincreasing in lambda.
    let ball = Ball::new(x.to_vec(), 2.0)?;
    let mut prev = f64::INFINITY;
    for lam in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let v = restricted_curvature(&mu, &ball, lam, k1)?.value;
        if v > prev * (1.0 + 1e-12) {
            ok = false;
        }
        prev = v;
    }
    // Nondecreasing in k for fixed t.
    let mut prev = -1.0;
    for k in [2.5, 3.0, 5.0, 10.0] {
        let v = localized_curvature(&mu, &x, 0.3, k, k1)?.value;
        if v < prev * (1.0 - 1e-12) {
            ok = false;
        }
        prev = v;
    }
    // Nondecreasing in r.
    let mut prev = -1.0;
    for r in [0.5, 1.0, 1.5, 2.5] {
        let v = pointwise_curvature(&mu, &x, k1, r)?.value;
        if v < prev * (1.0 - 1e-12) {
            ok = false;
        }
        prev = v;
    }
    Ok(outcome(
        "curvature.domain_monotonicity",
        ok,
        "lambda, k, r sweeps".into(),
    ))
}

fn curvature_restricted_le_unrestricted(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 19);
    let mut ok = true;
    for _ in 0..5 {
        let mu = random_cloud(&mut rng, 2, 1, 10);
        let ball = Ball::new(vec![0.0, 0.0], 1.5)?;
        for lam in [0.2, 0.5, 0.8] {
            let with = restricted_curvature(&mu, &ball, lam, IntegrandSpec::k1())?.value;
            let without = integral_curvature_exact(&mu.restrict(&ball), IntegrandSpec::k1())?.value;
            if with > without * (1.0 + 1e-12) {
                ok = false;
            }
        }
    }
    Ok(outcome(
        "curvature.restricted_le_unrestricted",
        ok,
        "5 clouds x 3 thresholds".into(),
    ))
}

fn curvature_integrand_ordering(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 20);
    let mut ok = true;
    for _ in 0..10 {
        let mu = random_cloud(&mut rng, 2, 1, 9);
        let a = integral_curvature_exact(&mu, IntegrandSpec::k1())?.value;
        let b = integral_curvature_exact(&mu, IntegrandSpec::k2())?.value;
        if a > b * (1.0 + 1e-12) {
            ok = false;
        }
        let x = mu.point(0).to_vec();
        let pa = pointwise_curvature(&mu, &x, IntegrandSpec::k1(), 2.0)?.value;
        let pb = pointwise_curvature(&mu, &x, IntegrandSpec::k2(), 2.0)?.value;
        if pa > pb * (1.0 + 1e-12) {
            ok = false;
        }
    }
    Ok(outcome(
        "curvature.integrand_ordering",
        ok,
        "10 random clouds".into(),
    ))
}

fn curvature_monte_carlo_consistency(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 21);
    let mut hits = 0;
    let total = 20;
    for i in 0..total {
        let mu = random_cloud(&mut rng, 2, 1, 10);
        let exact = integral_curvature_exact(&mu, IntegrandSpec::k1())?.value;
        let mc = monte_carlo_curvature(&mu, IntegrandSpec::k1(), None, 100_000, seed ^ (100 + i))?;
        if (mc.value - exact).abs() <= 4.0 * mc.stderr {
            hits += 1;
        }
    }
    Ok(outcome(
        "curvature.monte_carlo_consistency",
        hits >= total - 1,
        format!("{hits}/{total} within 4 standard errors"),
    ))
}

fn curvature_fubini_consistency(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 22);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let mu = random_cloud(&mut rng, 2, 1, 9);
        let total = integral_curvature_exact(&mu, IntegrandSpec::k1())?.value;
        let cover = mu.support_diameter() * (1.0 + 1e-9) + 1e-9;
        let mut assembled = 0.0;
        for i in 0..mu.len() {
            let x = mu.point(i).to_vec();
            assembled +=
                mu.weight(i) * pointwise_curvature(&mu, &x, IntegrandSpec::k1(), cover)?.value;
        }
        if total > 0.0 {
            worst = worst.max((assembled - total).abs() / total);
        }
    }
    Ok(outcome(
        "curvature.fubini_consistency",
        worst <= 1e-10,
        format!("worst relative gap {worst:.3e}"),
    ))
}

fn curvature_scaling_identities(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 23);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mu = random_cloud(&mut rng, 2, 1, 8);
        let x: Vec<f64> = vec![rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let a = 0.5 + 2.5 * rng.random::<f64>();
        let lam = 0.5 + 2.5 * rng.random::<f64>();
        let chk = scaling_check(&mu, &x, 0.7, a, lam, IntegrandSpec::k1())?;
        worst = worst.max(chk.affine_rel_error).max(chk.rescale_rel_error);
    }
    Ok(outcome(
        "curvature.scaling_identities",
        worst <= 1e-10,
        format!("worst relative discrepancy {worst:.3e}"),
    ))
}

// ---------------------------------------------------------------------------
// beta

fn beta_le_centered(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 24);
    let mut ok = true;
    for _ in 0..30 {
        let mu = random_cloud(&mut rng, 2, 1, 15);
        let x: Vec<f64> = vec![rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let r = 1.0 + rng.random::<f64>();
        if let (BetaResult::Fit(plain), BetaResult::Fit(centered)) =
            (beta2(&mu, &x, r)?, centered_beta2(&mu, &x, r)?)
        {
            if plain.value > centered.value * (1.0 + 1e-12) {
                ok = false;
            }
        }
    }
    Ok(outcome(
        "beta.plain_le_centered",
        ok,
        "30 random instances".into(),
    ))
}

fn beta_oracle_agreement(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 25);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let count = 6 + (rng.random::<u32>() % 10) as usize;
        let coords: Vec<f64> = (0..count * 2)
            .map(|_| 1.8 * rng.random::<f64>() - 0.9)
            .collect();
        let weights: Vec<f64> = (0..count)
            .map(|_| (0.5 + rng.random::<f64>()) / count as f64)
            .collect();
        let mu = DiscreteMeasure::new(2, 1, coords, weights)?;
        let x = [0.0, 0.0];
        if let BetaResult::Fit(fit) = beta2(&mu, &x, 1.0)? {
            let brute = brute_force_beta(&mu, &x, 1.0, 2.0, false, 1024)?;
            worst = worst.max(brute - fit.value).max(0.0);
            if brute < fit.value - 1e-12 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(outcome(
        "beta.oracle_agreement",
        worst <= 1e-5,
        format!("worst oracle excess {worst:.3e} at resolution 1024"),
    ))
}

fn beta_rigid_motion_invariance(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 26);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 3, 2, 20);
        let x: Vec<f64> = (0..3).map(|_| 0.4 * rng.random::<f64>() - 0.2).collect();
        let r = 1.2;
        let rot = random_rotation(&mut rng, 3);
        let shift: Vec<f64> = (0..3).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let coords: Vec<f64> = (0..mu.len())
            .flat_map(|i| apply_rotation(&rot, &shift, mu.point(i)))
            .collect();
        let moved = DiscreteMeasure::new(3, 2, coords, mu.weights().to_vec())?;
        let mx = apply_rotation(&rot, &shift, &x);
        for (a, b) in [
            (beta2(&mu, &x, r)?, beta2(&moved, &mx, r)?),
            (centered_beta2(&mu, &x, r)?, centered_beta2(&moved, &mx, r)?),
        ] {
            if let (BetaResult::Fit(fa), BetaResult::Fit(fb)) = (a, b) {
                let denom = fa.value.abs().max(fb.value.abs());
                if denom > 1e-12 {
                    worst = worst.max((fa.value - fb.value).abs() / denom);
                }
            }
        }
    }
    Ok(outcome(
        "beta.rigid_motion_invariance",
        worst <= 1e-9,
        format!("worst relative drift {worst:.3e}"),
    ))
}

fn beta_scale_covariance(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 27);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 2, 1, 18);
        let x: Vec<f64> = vec![rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let r = 0.8 + rng.random::<f64>();
        let rescaled = mu.rescale(&x, r)?;
        let origin = vec![0.0, 0.0];
        if let (BetaResult::Fit(a), BetaResult::Fit(b)) = (
            centered_beta2(&rescaled, &origin, 1.0)?,
            centered_beta2(&mu, &x, r)?,
        ) {
            let denom = a.value.abs().max(b.value.abs());
            if denom > 1e-14 {
                worst = worst.max((a.value - b.value).abs() / denom);
            }
        }
    }
    Ok(outcome(
        "beta.scale_covariance",
        worst <= 1e-10,
        format!("worst relative drift {worst:.3e}"),
    ))
}

fn beta_eigenvalue_identity(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 28);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 3, 1, 16);
        let x = vec![0.0, 0.0, 0.0];
        let r = 2.0;
        if let BetaResult::Fit(fit) = beta2(&mu, &x, r)? {
            // Recompute the residual as the actual weighted squared distance
            // to the reported plane; the solver promises these coincide.
            let ball = Ball::new(x.clone(), r)?;
            let local = mu.restrict(&ball);
            let mut resid = 0.0;
            for (p, w) in local.iter() {
                let d = fit.plane.distance_to(p);
                resid += w * d * d;
            }
            let from_value = fit.value_pow_p * r.powi(3);
            if resid > 1e-14 {
                worst = worst.max((resid - from_value).abs() / resid);
            }
            if fit.plane.orthonormality_defect() > 1e-10 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(outcome(
        "beta.eigenvalue_identity",
        worst <= 1e-10,
        format!("worst relative gap {worst:.3e}"),
    ))
}

fn beta_restriction_consistency(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 29);
    let mut ok = true;
    for _ in 0..20 {
        let mu = random_cloud(&mut rng, 2, 1, 20);
        let x: Vec<f64> = vec![rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let r = 0.9;
        let ball = Ball::new(x.clone(), r)?;
        let direct = beta2(&mu, &x, r)?.value();
        let restricted = beta2(&mu.restrict(&ball), &x, r)?.value();
        if direct != restricted {
            ok = false;
        }
    }
    Ok(outcome(
        "beta.restriction_consistency",
        ok,
        "bitwise equality on 20 instances".into(),
    ))
}

// ---------------------------------------------------------------------------
// selection

fn selection_determinism(seed: u64) -> Result<CheckOutcome> {
    let mu = generate(&GeneratorSpec::Segment { count: 300 })?;
    let x = [0.5, 0.0];
    let a = select_spanning_points(&mu, &x, 0.25, 1.0, 2.2)?;
    let b = select_spanning_points(&mu, &x, 0.25, 1.0, 2.2)?;
    let _ = seed;
    Ok(outcome(
        "selection.determinism",
        a.selected == b.selected,
        format!("selected {:?}", a.selected),
    ))
}

fn selection_invariants_on_generators(seed: u64) -> Result<CheckOutcome> {
    let mut ok = true;
    let mut detail = String::new();

    let segment = generate(&GeneratorSpec::Segment { count: 500 })?;
    let result = select_spanning_points(&segment, &[0.5, 0.0], 0.2, 1.0, 2.1)?;
    if result.succeeded() {
        let c = result.constants;
        ok &= result.achieved_hmin >= c.delta * 0.2 * (1.0 - 1e-12);
        ok &= result.ball_masses.iter().all(|&m| m >= c.c2 * 0.2);
        ok &= verify_selection(&segment, &result, seed)?.passed();
        detail.push_str("segment ok; ");
    } else {
        ok = false;
        detail.push_str(&format!("segment failed: {:?}; ", result.status));
    }

    let patch = generate(&GeneratorSpec::PlanePatch { side: 40 })?;
    let result = select_spanning_points(&patch, &[0.5, 0.5, 0.0], 0.2, 2.0, 4.0)?;
    if result.succeeded() {
        let c = result.constants;
        let r = 0.2;
        ok &= result.achieved_hmin >= c.delta * r * (1.0 - 1e-12);
        ok &= result.ball_masses.iter().all(|&m| m >= c.c2 * r * r);
        ok &= verify_selection(&patch, &result, seed)?.passed();
        detail.push_str("plane patch ok");
    } else {
        ok = false;
        detail.push_str(&format!("plane patch failed: {:?}", result.status));
    }
    Ok(outcome("selection.invariants_on_success", ok, detail))
}

fn selection_lower_bound_per_scale(seed: u64) -> Result<CheckOutcome> {
    let _ = seed;
    let circle = generate(&GeneratorSpec::Circle {
        count: 240,
        radius: 1.0,
    })?;
    let x = circle.point(0).to_vec();
    let lambda = 1.0;
    let c0 = 2.5;
    let constants = crate::selection::selection_constants(1, 2, lambda, c0)?;
    let grid = ScaleGrid::new(1.0, constants.delta / 3.0, 4)?;
    let table = empirical_lower_bound(&circle, &x, &grid, lambda, c0, IntegrandSpec::k1())?;
    let mut ok = true;
    let mut unflagged = 0;
    for row in &table.rows {
        if row.flag.is_none() {
            unflagged += 1;
            if row.lhs > row.rhs * (1.0 + 1e-9) {
                ok = false;
            }
        }
    }
    ok &= unflagged > 0;
    ok &= table.total_lhs <= table.total_rhs * (1.0 + 1e-9);
    Ok(outcome(
        "selection.lower_bound_per_scale",
        ok,
        format!("{unflagged} unflagged scales on the circle fixture"),
    ))
}

// ---------------------------------------------------------------------------
// generators

fn generators_determinism(seed: u64) -> Result<CheckOutcome> {
    let spec = GeneratorSpec::Noisy {
        base: Box::new(GeneratorSpec::Circle {
            count: 64,
            radius: 1.0,
        }),
        amplitude: 0.02,
        seed,
    };
    let a = generate(&spec)?;
    let b = generate(&spec)?;
    Ok(outcome(
        "generators.determinism",
        a == b,
        "bit-identical regeneration".into(),
    ))
}

fn generators_cantor_self_similarity(_seed: u64) -> Result<CheckOutcome> {
    let deep = generate(&GeneratorSpec::FourCornerCantor { depth: 5 })?;
    let shallow = generate(&GeneratorSpec::FourCornerCantor { depth: 4 })?;
    let rescaled = deep.rescale(&[0.0, 0.0], 0.25)?;
    let ball = Ball::new(vec![0.5, 0.5], 0.75)?;
    let block = rescaled.restrict(&ball);
    let mut ok = block.len() == shallow.len();
    if ok {
        let mut pts: Vec<Vec<f64>> = (0..block.len()).map(|i| block.point(i).to_vec()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect: Vec<Vec<f64>> = (0..shallow.len())
            .map(|i| shallow.point(i).to_vec())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ok = pts.iter().zip(&expect).all(|(a, b)| dist(a, b) <= 1e-12);
    }
    Ok(outcome(
        "generators.cantor_self_similarity",
        ok,
        "corner block reproduces the shallower set".into(),
    ))
}

fn generators_ahlfors_regularity(_seed: u64) -> Result<CheckOutcome> {
    let mut ok = true;
    let mut detail = String::new();
    type InteriorFilter = fn(&[f64]) -> bool;
    let cases: [(&str, GeneratorSpec, InteriorFilter); 3] = [
        ("segment", GeneratorSpec::Segment { count: 400 }, |p| {
            p[0] > 0.3 && p[0] < 0.7
        }),
        (
            "circle",
            GeneratorSpec::Circle {
                count: 400,
                radius: 1.0,
            },
            |_p| true,
        ),
        ("plane_patch", GeneratorSpec::PlanePatch { side: 30 }, |p| {
            p[0] > 0.3 && p[0] < 0.7 && p[1] > 0.3 && p[1] < 0.7
        }),
    ];
    for (label, spec, interior) in cases {
        let mu = generate(&spec)?;
        let diam = mu.support_diameter();
        let grid = ScaleGrid::new(0.25 * diam, 0.5, 5)?;
        let samples: Vec<usize> = (0..mu.len())
            .filter(|&i| interior(mu.point(i)))
            .step_by(7)
            .collect();
        let report = mu.ahlfors_check(&samples, &grid)?;
        let ratio = report.upper_constant / report.lower_constant;
        if !(ratio <= 4.0) {
            ok = false;
        }
        detail.push_str(&format!("{label}: C/c = {ratio:.3}; "));
    }
    Ok(outcome("generators.ahlfors_regularity", ok, detail))
}
