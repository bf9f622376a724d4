//! Regenerates the measurements behind `data/beta_divergence_baseline.json`:
//! median per-point multiscale centered-beta sums on the circle and
//! four-corner Cantor fixtures, plus the per-scale profiles and the Cantor
//! density band the tests pin.
//!
//! Run with `cargo run -p menger --example pilot --release`.

use menger::beta::multiscale_beta_sum;
use menger::generators::{generate, GeneratorSpec};
use menger::measure::ScaleGrid;
use rayon::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn per_point_sums(mu: &menger::DiscreteMeasure, grid: &ScaleGrid) -> Vec<f64> {
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            multiscale_beta_sum(mu, mu.point(i), grid, true, 2.0)
                .unwrap()
                .multiscale_sum
        })
        .collect()
}

fn main() {
    let grid = ScaleGrid::new(1.0, 0.5, 8).unwrap();

    let circle = generate(&GeneratorSpec::Circle {
        count: 300,
        radius: 1.0,
    })
    .unwrap();
    let sums = per_point_sums(&circle, &grid);
    let circle_median = median(sums.clone());
    println!(
        "circle: median {:.6}  min {:.6}  max {:.6}",
        circle_median,
        sums.iter().cloned().fold(f64::INFINITY, f64::min),
        sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    );

    let cantor = generate(&GeneratorSpec::FourCornerCantor { depth: 6 }).unwrap();
    let sums = per_point_sums(&cantor, &grid);
    let cantor_median = median(sums.clone());
    println!(
        "cantor: median {:.6}  min {:.6}  max {:.6}",
        cantor_median,
        sums.iter().cloned().fold(f64::INFINITY, f64::min),
        sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    );
    println!("ratio cantor/circle = {:.4}", cantor_median / circle_median);

    for count in [300usize, 2000] {
        let c = generate(&GeneratorSpec::Circle { count, radius: 1.0 }).unwrap();
        let prof = multiscale_beta_sum(&c, c.point(0), &grid, true, 2.0).unwrap();
        println!("circle[{count}] per-scale beta^2: {:?}", prof.values_sq);
        println!("circle[{count}] flags: {:?}", prof.flags);
    }

    let prof = multiscale_beta_sum(&cantor, cantor.point(0), &grid, true, 2.0).unwrap();
    println!("cantor per-scale beta^2: {:?}", prof.values_sq);
    let density = cantor.density_profile(cantor.point(0), &grid).unwrap();
    println!("cantor density ratios: {:?}", density.ratios);
    println!(
        "cantor density band: [{:.6}, {:.6}]",
        density.finest_min, density.finest_max
    );
}
