//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Every tolerance is
//! pinned here, not deferred to configuration.

mod common;

use std::time::Instant;

use common::{median, random_cloud, random_tuple, rel_gap, rng};
use menger::beta::{beta2, brute_force_beta, centered_beta2, multiscale_beta_sum};
use menger::curvature::{
    integral_curvature_exact, integral_of_fn, monte_carlo_curvature, pointwise_curvature,
    scaling_check,
};
use menger::generators::{generate, GeneratorSpec};
use menger::selection::{select_spanning_points, selection_constants, verify_selection};
use menger::simplex::{proper_integrand_check, IntegrandKind, IntegrandSpec, Symmetrized};
use menger::{Ball, DiscreteMeasure, ScaleGrid};
use rand::Rng;

fn report(name: &str, passed: bool, detail: &str) {
    println!(
        "[acceptance] {name}: {} ({detail})",
        if passed { "PASS" } else { "FAIL" }
    );
}

/// Affine scaling law: curvature of the dilated, mass-scaled cloud equals
/// `lambda^(n+2) a^(-n(n+1))` times the original, to relative 1e-10, on 20
/// random clouds. Runs in under 10 seconds.
#[test]
fn scaling_identity_dilation() {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let count = 6 + (r.random::<u32>() % 7) as usize; // N <= 12
        let mu = random_cloud(&mut r, 2, 1, count);
        let a = 0.5 + 2.5 * r.random::<f64>();
        let lam = 0.5 + 2.5 * r.random::<f64>();
        let x = vec![r.random::<f64>() - 0.5, r.random::<f64>() - 0.5];
        let chk = scaling_check(&mu, &x, 1.0, a, lam, IntegrandSpec::k1()).unwrap();
        worst = worst.max(chk.affine_rel_error);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = worst <= 1e-10 && elapsed < 10.0;
    report(
        "scaling-identity-dilation",
        passed,
        &format!("worst relative discrepancy {worst:.3e}, {elapsed:.2}s"),
    );
    assert!(passed, "worst {worst:.3e}, elapsed {elapsed:.2}s");
}

/// Rescale normalization: curvature of the rescaled measure restricted to the
/// unit ball equals the restricted curvature divided by r^n, to relative
/// 1e-10, on the same cloud family.
#[test]
fn scaling_identity_rescale() {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let count = 6 + (r.random::<u32>() % 7) as usize;
        let mu = random_cloud(&mut r, 2, 1, count);
        let radius = 0.4 + 1.2 * r.random::<f64>();
        let x = vec![r.random::<f64>() - 0.5, r.random::<f64>() - 0.5];
        let chk = scaling_check(&mu, &x, radius, 1.5, 2.0, IntegrandSpec::k1()).unwrap();
        worst = worst.max(chk.rescale_rel_error);
    }
    let passed = worst <= 1e-10;
    report(
        "scaling-identity-rescale",
        passed,
        &format!("worst relative discrepancy {worst:.3e}"),
    );
    assert!(passed, "worst {worst:.3e}");
}

/// Proper-integrand conditions for both integrands at exponent 2: the scaling
/// identity and translation invariance hold to 1e-9, and the height bound
/// holds with the module's proven constants with zero violations over 1000
/// random well-separated simplices per (integrand, n). The undersized
/// candidate pair for the volume integrand is evaluated on the same trials
/// and its violation count is reported: it is provably too small (a unit
/// right triangle already violates it by a factor of 32), so it is reported,
/// not asserted. Runs in under 30 seconds.
#[test]
fn proper_integrand_suite() {
    let start = Instant::now();
    let mut all_ok = true;
    let mut detail = String::new();
    for kind in [IntegrandKind::K1, IntegrandKind::K2] {
        for (n, m) in [(1usize, 2usize), (2, 3)] {
            let rep = proper_integrand_check(kind, n, m, 1000, 2024).unwrap();
            all_ok &= rep.passed();
            detail.push_str(&format!(
                "{:?} n={n}: hom {} trans {} bound {} undersized {:?}; ",
                kind,
                rep.homogeneity_violations,
                rep.translation_violations,
                rep.bound_violations,
                rep.undersized_constant_violations,
            ));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = all_ok && elapsed < 30.0;
    report(
        "proper-integrand-suite",
        passed,
        &format!("{detail}{elapsed:.2}s"),
    );
    assert!(passed, "{detail} elapsed {elapsed:.2}s");
}

/// Pointwise domination of the volume integrand by the height integrand on
/// 10^4 random non-degenerate tuples for n in {1, 2}, relative 1e-12.
#[test]
fn pointwise_domination() {
    let mut r = rng(104);
    let mut checked = 0usize;
    let mut ok = true;
    for (n, m) in [(1usize, 2usize), (2, 3)] {
        let mut count = 0;
        while count < 5000 {
            let pts = random_tuple(&mut r, m, n + 2);
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let k2 = IntegrandSpec::k2().evaluate(&refs);
            if k2 == 0.0 {
                continue;
            }
            count += 1;
            checked += 1;
            let k1 = IntegrandSpec::k1().evaluate(&refs);
            if k1 > k2 * (1.0 + 1e-12) {
                ok = false;
            }
        }
    }
    report(
        "pointwise-domination",
        ok,
        &format!("{checked} non-degenerate tuples"),
    );
    assert!(ok);
}

/// Permutation averaging preserves total curvature: for an order-sensitive
/// integrand on six-point clouds, the product-measure sums under the raw and
/// symmetrized integrands agree to relative 1e-12.
#[test]
fn symmetrization_identity() {
    let mut r = rng(105);
    let asym = |pts: &[&[f64]]| -> f64 {
        // Depends on the first slot only, so it is genuinely order-sensitive.
        pts[0].iter().map(|a| a * a).sum::<f64>().sqrt() + 0.25 * pts[0][0]
    };
    let sym = Symmetrized::new(&asym, 3).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_cloud(&mut r, 2, 1, 6);
        let direct = integral_of_fn(&mu, &asym, 3).unwrap();
        let averaged = integral_of_fn(&mu, &sym, 3).unwrap();
        worst = worst.max(rel_gap(direct, averaged));
    }
    let passed = worst <= 1e-12;
    report(
        "symmetrization-identity",
        passed,
        &format!("worst relative gap {worst:.3e} over 20 six-point clouds"),
    );
    assert!(passed, "worst {worst:.3e}");
}

/// The closed-form solvers agree with the brute-force plane search at
/// resolution 4096 to 1e-6 on 50 random instances, and the unconstrained
/// value never exceeds the centered one. Runs in under 60 seconds.
#[test]
fn beta_oracle_equivalence() {
    let start = Instant::now();
    let mut r = rng(106);
    let mut worst_plain: f64 = 0.0;
    let mut worst_centered: f64 = 0.0;
    let mut ordering = true;
    for _ in 0..50 {
        let count = 6 + (r.random::<u32>() % 12) as usize;
        let coords: Vec<f64> = (0..count * 2)
            .map(|_| 1.8 * r.random::<f64>() - 0.9)
            .collect();
        let weights: Vec<f64> = (0..count)
            .map(|_| (0.5 + r.random::<f64>()) / count as f64)
            .collect();
        let mu = DiscreteMeasure::new(2, 1, coords, weights).unwrap();
        let x = [0.05 * r.random::<f64>(), 0.05 * r.random::<f64>()];
        let radius = 1.0;
        let plain = beta2(&mu, &x, radius).unwrap().value().unwrap();
        let centered = centered_beta2(&mu, &x, radius).unwrap().value().unwrap();
        if plain > centered * (1.0 + 1e-12) {
            ordering = false;
        }
        let brute_plain = brute_force_beta(&mu, &x, radius, 2.0, false, 4096).unwrap();
        let brute_centered = brute_force_beta(&mu, &x, radius, 2.0, true, 4096).unwrap();
        worst_plain = worst_plain.max((plain - brute_plain).abs());
        worst_centered = worst_centered.max((centered - brute_centered).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = worst_plain <= 1e-6 && worst_centered <= 1e-6 && ordering && elapsed < 60.0;
    report(
        "beta-oracle-equivalence",
        passed,
        &format!(
            "worst |closed - brute|: plain {worst_plain:.3e}, centered {worst_centered:.3e}, ordering {ordering}, {elapsed:.2}s"
        ),
    );
    assert!(passed);
}

/// Monte Carlo curvature is consistent with exact enumeration: on 20 random
/// ten-point clouds, the 1e5-sample estimate lands within four standard
/// errors of the exact value at least 19 times.
#[test]
fn monte_carlo_unbiasedness() {
    let mut r = rng(107);
    let mut hits = 0;
    for i in 0..20u64 {
        let mu = random_cloud(&mut r, 2, 1, 10);
        let exact = integral_curvature_exact(&mu, IntegrandSpec::k1())
            .unwrap()
            .value;
        let mc = monte_carlo_curvature(&mu, IntegrandSpec::k1(), None, 100_000, 9000 + i).unwrap();
        if (mc.value - exact).abs() <= 4.0 * mc.stderr {
            hits += 1;
        }
    }
    let passed = hits >= 19;
    report(
        "monte-carlo-unbiasedness",
        passed,
        &format!("{hits}/20 within 4 standard errors"),
    );
    assert!(passed, "{hits}/20");
}

/// The truncated 1/|x1| line measure has exactly zero curvature (collinear
/// support) while its mass diverges as the truncation shrinks: the exact
/// weight sums at eps = 1e-4 and 1e-2 differ by more than 2 ln 10.
#[test]
fn degenerate_line_measure() {
    // Curvature vanishes identically for any resolution; checked within the
    // enumeration budget.
    let small = generate(&GeneratorSpec::SingularLine {
        epsilon: 1e-2,
        count: 150,
    })
    .unwrap();
    let zero_a = integral_curvature_exact(&small, IntegrandSpec::k1())
        .unwrap()
        .value;
    let small_fine = generate(&GeneratorSpec::SingularLine {
        epsilon: 1e-4,
        count: 150,
    })
    .unwrap();
    let zero_b = integral_curvature_exact(&small_fine, IntegrandSpec::k1())
        .unwrap()
        .value;

    // Divergence of the exact mass sums at a fixed per-side resolution.
    let coarse = generate(&GeneratorSpec::SingularLine {
        epsilon: 1e-2,
        count: 2000,
    })
    .unwrap();
    let fine = generate(&GeneratorSpec::SingularLine {
        epsilon: 1e-4,
        count: 2000,
    })
    .unwrap();
    let growth = fine.mass() - coarse.mass();
    let threshold = 2.0 * 10f64.ln();
    let passed = zero_a == 0.0 && zero_b == 0.0 && growth > threshold;
    report(
        "degenerate-line-measure",
        passed,
        &format!("curvature {zero_a} / {zero_b}, mass growth {growth:.3} > {threshold:.3}"),
    );
    assert!(passed);
}

/// Spanning-point selection on the segment (n=1) and plane-patch (n=2)
/// fixtures: at every scale whose ball holds at least 10(n+1) support points
/// the selection succeeds, and every success passes the quantitative
/// verification. Runs in under 60 seconds.
#[test]
fn spanning_point_selection() {
    let start = Instant::now();
    let mut all_ok = true;
    let mut detail = String::new();

    // Segment fixture, interior points, constants from the Ahlfors check.
    {
        let mu = generate(&GeneratorSpec::Segment { count: 600 }).unwrap();
        let n = 1;
        let grid = ScaleGrid::new(0.25, 0.5, 8).unwrap();
        let samples: Vec<usize> = (0..mu.len())
            .filter(|&i| {
                let t = mu.point(i)[0];
                t > 0.3 && t < 0.7
            })
            .step_by(37)
            .collect();
        let ahl = mu.ahlfors_check(&samples, &grid).unwrap();
        let lambda = ahl.lower_constant;
        let c0 = ahl.upper_constant.max(lambda);
        let mut scales = 0;
        for &i in samples.iter().take(4) {
            let x = mu.point(i).to_vec();
            for &radius in grid.radii() {
                let ball = Ball::new(x.clone(), radius).unwrap();
                if mu.indices_in(&ball).len() < 10 * (n + 1) {
                    continue;
                }
                scales += 1;
                let sel = select_spanning_points(&mu, &x, radius, lambda, c0).unwrap();
                if !sel.succeeded() {
                    all_ok = false;
                    detail.push_str(&format!("segment failure at r={radius}; "));
                    continue;
                }
                if !verify_selection(&mu, &sel, 5).unwrap().passed() {
                    all_ok = false;
                    detail.push_str(&format!("segment verify failure at r={radius}; "));
                }
            }
        }
        detail.push_str(&format!("segment: {scales} qualifying scales; "));
    }

    // Plane-patch fixture in R^3.
    {
        let mu = generate(&GeneratorSpec::PlanePatch { side: 45 }).unwrap();
        let n = 2;
        let grid = ScaleGrid::new(0.2, 0.5, 6).unwrap();
        let samples: Vec<usize> = (0..mu.len())
            .filter(|&i| {
                let p = mu.point(i);
                p[0] > 0.3 && p[0] < 0.7 && p[1] > 0.3 && p[1] < 0.7
            })
            .step_by(101)
            .collect();
        let ahl = mu.ahlfors_check(&samples, &grid).unwrap();
        let lambda = ahl.lower_constant;
        let c0 = ahl.upper_constant.max(lambda);
        let mut scales = 0;
        for &i in samples.iter().take(4) {
            let x = mu.point(i).to_vec();
            for &radius in grid.radii() {
                let ball = Ball::new(x.clone(), radius).unwrap();
                if mu.indices_in(&ball).len() < 10 * (n + 1) {
                    continue;
                }
                scales += 1;
                let sel = select_spanning_points(&mu, &x, radius, lambda, c0).unwrap();
                if !sel.succeeded() {
                    all_ok = false;
                    detail.push_str(&format!("patch failure at r={radius}; "));
                    continue;
                }
                if !verify_selection(&mu, &sel, 6).unwrap().passed() {
                    all_ok = false;
                    detail.push_str(&format!("patch verify failure at r={radius}; "));
                }
            }
        }
        detail.push_str(&format!("patch: {scales} qualifying scales"));
    }

    let elapsed = start.elapsed().as_secs_f64();
    let passed = all_ok && elapsed < 60.0;
    report(
        "spanning-point-selection",
        passed,
        &format!("{detail}, {elapsed:.2}s"),
    );
    assert!(passed, "{detail}");
}

/// Comparability chain on the 300-point circle at 20 sampled points: the
/// per-scale squared-beta bound holds with the module's assembled constant at
/// every unflagged scale, the two curvatures are ordered exactly, and the
/// summed inequality holds with the reported multiscale constant. Runs in
/// under 5 minutes.
#[test]
fn comparability_chain() {
    let start = Instant::now();
    let mu = generate(&GeneratorSpec::Circle {
        count: 300,
        radius: 1.0,
    })
    .unwrap();
    let top_radius = 1.0;
    let grid = ScaleGrid::new(top_radius, 0.5, 8).unwrap();
    let mut sample_rng = rng(110);
    let mut samples = std::collections::BTreeSet::new();
    while samples.len() < 20 {
        samples.insert(sample_rng.random_range(0..mu.len()));
    }
    let indices: Vec<usize> = samples.into_iter().collect();
    let ahl = mu.ahlfors_check(&indices, &grid).unwrap();
    let lambda = ahl.lower_constant;
    let c0 = ahl.upper_constant.max(lambda);
    let constants = selection_constants(1, 2, lambda, c0).unwrap();
    let lb_grid = ScaleGrid::new(top_radius, constants.delta / 3.0, 8).unwrap();

    let mut ordering = true;
    let mut per_scale = true;
    let mut multiscale = true;
    let mut unflagged_total = 0usize;
    let mut reported_constant = f64::NAN;
    for &i in &indices {
        let x = mu.point(i).to_vec();
        let k1 = pointwise_curvature(&mu, &x, IntegrandSpec::k1(), top_radius)
            .unwrap()
            .value;
        let k2 = pointwise_curvature(&mu, &x, IntegrandSpec::k2(), top_radius)
            .unwrap()
            .value;
        if k1 > k2 * (1.0 + 1e-12) {
            ordering = false;
        }
        let table = menger::selection::empirical_lower_bound(
            &mu,
            &x,
            &lb_grid,
            lambda,
            c0,
            IntegrandSpec::k1(),
        )
        .unwrap();
        reported_constant = table.multiscale_constant;
        for row in &table.rows {
            if row.flag.is_none() {
                unflagged_total += 1;
                if row.lhs > row.rhs * (1.0 + 1e-9) {
                    per_scale = false;
                }
            }
        }
        if table.total_lhs > table.total_rhs * (1.0 + 1e-9) {
            multiscale = false;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = ordering && per_scale && multiscale && unflagged_total > 0 && elapsed < 300.0;
    report(
        "comparability-chain",
        passed,
        &format!(
            "ordering {ordering}, per-scale {per_scale} ({unflagged_total} unflagged scales), multiscale {multiscale}, constant {reported_constant:.3e}, {elapsed:.2}s"
        ),
    );
    assert!(passed);
}

/// Rectifiability dichotomy at desk scale: the circle's multiscale sums
/// converge (the deepest unflagged scale contributes under 1% of the total)
/// while the Cantor fixture's median per-point sum exceeds the circle's by at
/// least the factor committed in the pilot baseline file.
#[test]
fn rectifiability_dichotomy() {
    use rayon::prelude::*;

    #[derive(serde::Deserialize)]
    struct Baseline {
        pilot: PilotValues,
        contract_min_ratio: f64,
    }
    #[derive(serde::Deserialize)]
    struct PilotValues {
        measured_ratio: f64,
    }
    let baseline: Baseline = serde_json::from_str(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/beta_divergence_baseline.json"
    )))
    .unwrap();

    let grid = ScaleGrid::new(1.0, 0.5, 8).unwrap();
    let circle = generate(&GeneratorSpec::Circle {
        count: 300,
        radius: 1.0,
    })
    .unwrap();
    let circle_sums: Vec<f64> = (0..circle.len())
        .into_par_iter()
        .map(|i| {
            multiscale_beta_sum(&circle, circle.point(i), &grid, true, 2.0)
                .unwrap()
                .multiscale_sum
        })
        .collect();
    let circle_median = median(circle_sums);

    // Convergence: the deepest unflagged scale contributes < 1% of one
    // representative profile's total.
    let profile = multiscale_beta_sum(&circle, circle.point(0), &grid, true, 2.0).unwrap();
    let last_unflagged = profile
        .values_sq
        .iter()
        .rev()
        .find_map(|v| *v)
        .expect("at least one unflagged scale");
    let decayed = last_unflagged < 0.01 * profile.multiscale_sum / grid.log_weight();

    let cantor = generate(&GeneratorSpec::FourCornerCantor { depth: 6 }).unwrap();
    let cantor_sums: Vec<f64> = (0..cantor.len())
        .into_par_iter()
        .map(|i| {
            multiscale_beta_sum(&cantor, cantor.point(i), &grid, true, 2.0)
                .unwrap()
                .multiscale_sum
        })
        .collect();
    let cantor_median = median(cantor_sums);

    let ratio = cantor_median / circle_median;
    let passed = decayed && ratio >= baseline.contract_min_ratio;
    report(
        "rectifiability-dichotomy",
        passed,
        &format!(
            "circle median {circle_median:.4}, cantor median {cantor_median:.4}, ratio {ratio:.3} (contract {}, pilot {}), last-scale decay {decayed}",
            baseline.contract_min_ratio, baseline.pilot.measured_ratio
        ),
    );
    assert!(passed);
}
