//! Exact and Monte Carlo estimators for integral, pointwise, restricted, and
//! localized Menger curvatures.
//!
//! Exact sums run over ordered index tuples with repetition, matching the
//! product-measure semantics; repeated indices contribute zero through the
//! degenerate-tuple convention. Enumeration is capped by [`ENUM_BUDGET`]
//! tuple evaluations, beyond which the Monte Carlo estimator is the intended
//! tool. All estimators are deterministic for a fixed seed regardless of the
//! rayon thread count: work is split into fixed chunks whose partial results
//! are combined in index order, and Monte Carlo chunk `i` draws from the
//! substream seeded with `seed XOR i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MengerError, Result};
use crate::measure::{dist, Ball, DiscreteMeasure};
use crate::simplex::{well_scaled, IntegrandSpec, TupleIntegrand};

/// Cap on exact-enumeration tuple evaluations.
pub const ENUM_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Region descriptor carried by a report, for reproducibility of the run.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionDescriptor {
    All,
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    WellScaled {
        center: Vec<f64>,
        radius: f64,
        lambda: f64,
    },
    Localized {
        center: Vec<f64>,
        t: f64,
        k: f64,
    },
    Pointwise {
        center: Vec<f64>,
        radius: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub value: f64,
    pub method: Method,
    pub samples: u64,
    pub stderr: f64,
    pub seed: u64,
    pub integrand: IntegrandSpec,
    pub region: RegionDescriptor,
}

impl CurvatureReport {
    fn exact(value: f64, integrand: IntegrandSpec, region: RegionDescriptor) -> Self {
        Self {
            value,
            method: Method::Exact,
            samples: 0,
            stderr: 0.0,
            seed: 0,
            integrand,
            region,
        }
    }
}

fn check_budget(points: usize, arity: u32) -> Result<()> {
    let required = (points as f64).powi(arity as i32);
    if required > ENUM_BUDGET {
        return Err(MengerError::BudgetExceeded {
            required,
            limit: ENUM_BUDGET,
        });
    }
    Ok(())
}

/// Exact sum of `f` over all ordered `arity`-tuples (with repetition) of
/// support points, weighted by the product of point weights. This is the
/// `arity`-fold product-measure integral of `f`.
pub fn integral_of_fn(mu: &DiscreteMeasure, f: &dyn TupleIntegrand, arity: usize) -> Result<f64> {
    check_budget(mu.len(), arity as u32)?;
    if mu.is_empty() {
        return Ok(0.0);
    }
    let n_pts = mu.len();
    // Parallel over the leading index; partials combined in index order.
    let partials: Vec<f64> = (0..n_pts)
        .into_par_iter()
        .map(|i0| {
            let mut tuple: Vec<&[f64]> = vec![mu.point(0); arity];
            let mut idx = vec![0usize; arity];
            tuple[0] = mu.point(i0);
            let w0 = mu.weight(i0);
            if w0 == 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            loop {
                // Evaluate current tail configuration.
                let mut w = w0;
                for d in 1..arity {
                    let i = idx[d];
                    tuple[d] = mu.point(i);
                    w *= mu.weight(i);
                }
                if w != 0.0 {
                    let v = f.eval(&tuple);
                    if v != 0.0 {
                        sum += w * v;
                    }
                }
                // Odometer increment over positions 1..arity.
                let mut d = arity - 1;
                loop {
                    if d == 0 {
                        return sum;
                    }
                    idx[d] += 1;
                    if idx[d] < n_pts {
                        break;
                    }
                    idx[d] = 0;
                    d -= 1;
                }
            }
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Exact integral Menger curvature `M_{K^p}(mu)`: the `(n+2)`-fold
/// product-measure sum of `K^p`.
pub fn integral_curvature_exact(
    mu: &DiscreteMeasure,
    integrand: IntegrandSpec,
) -> Result<CurvatureReport> {
    let arity = mu.intrinsic_dim() + 2;
    let value = integral_of_fn(mu, &integrand, arity)?;
    Ok(CurvatureReport::exact(
        value,
        integrand,
        RegionDescriptor::All,
    ))
}

/// Pointwise curvature `curv(x, r)`: the `(n+1)`-fold sum of
/// `K^p(x, x_1, ..., x_{n+1})` over the restriction to `B(x, r)`.
pub fn pointwise_curvature(
    mu: &DiscreteMeasure,
    x: &[f64],
    integrand: IntegrandSpec,
    r: f64,
) -> Result<CurvatureReport> {
    let ball = Ball::new(x.to_vec(), r)?;
    let local = mu.restrict(&ball);
    let arity = mu.intrinsic_dim() + 1;
    check_budget(local.len(), arity as u32)?;
    let n_pts = local.len();
    let region = RegionDescriptor::Pointwise {
        center: x.to_vec(),
        radius: r,
    };
    if n_pts == 0 {
        return Ok(CurvatureReport::exact(0.0, integrand, region));
    }
    let partials: Vec<f64> = (0..n_pts)
        .into_par_iter()
        .map(|i0| {
            let mut tuple: Vec<&[f64]> = vec![x; arity + 1];
            let mut idx = vec![0usize; arity];
            tuple[1] = local.point(i0);
            let w0 = local.weight(i0);
            if w0 == 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            loop {
                let mut w = w0;
                for d in 1..arity {
                    let i = idx[d];
                    tuple[d + 1] = local.point(i);
                    w *= local.weight(i);
                }
                if w != 0.0 {
                    let v = integrand.evaluate(&tuple);
                    if v != 0.0 {
                        sum += w * v;
                    }
                }
                let mut d = arity - 1;
                loop {
                    if d == 0 {
                        return sum;
                    }
                    idx[d] += 1;
                    if idx[d] < n_pts {
                        break;
                    }
                    idx[d] = 0;
                    d -= 1;
                }
            }
        })
        .collect();
    Ok(CurvatureReport::exact(
        partials.iter().sum(),
        integrand,
        region,
    ))
}

/// Restricted curvature `c^2(mu|_B, lambda)`: the exact sum over tuples in
/// the ball whose min-gap/diameter ratio is at least `lambda`.
pub fn restricted_curvature(
    mu: &DiscreteMeasure,
    ball: &Ball,
    lambda: f64,
    integrand: IntegrandSpec,
) -> Result<CurvatureReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(MengerError::InvalidParameter(format!(
            "well-scaled threshold must lie in (0, 1), got {lambda}"
        )));
    }
    let local = mu.restrict(ball);
    let arity = mu.intrinsic_dim() + 2;
    let filtered = move |pts: &[&[f64]]| -> f64 {
        if well_scaled(pts, lambda) {
            integrand.evaluate(pts)
        } else {
            0.0
        }
    };
    let value = integral_of_fn(&local, &filtered, arity)?;
    Ok(CurvatureReport::exact(
        value,
        integrand,
        RegionDescriptor::WellScaled {
            center: ball.center.clone(),
            radius: ball.radius,
            lambda,
        },
    ))
}

/// Localized curvature over `O_k(x, t)`: tuples in `B(x, kt)` with all
/// pairwise gaps at least `t/k`. Requires `k > 2`.
pub fn localized_curvature(
    mu: &DiscreteMeasure,
    x: &[f64],
    t: f64,
    k: f64,
    integrand: IntegrandSpec,
) -> Result<CurvatureReport> {
    if !(k > 2.0) {
        return Err(MengerError::InvalidParameter(format!(
            "localized curvature needs k > 2, got {k}"
        )));
    }
    if !(t > 0.0) {
        return Err(MengerError::InvalidParameter(format!(
            "localized curvature needs t > 0, got {t}"
        )));
    }
    let ball = Ball::new(x.to_vec(), k * t)?;
    let local = mu.restrict(&ball);
    let arity = mu.intrinsic_dim() + 2;
    let gap = t / k;
    let filtered = move |pts: &[&[f64]]| -> f64 {
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                if dist(pts[i], pts[j]) < gap {
                    return 0.0;
                }
            }
        }
        integrand.evaluate(pts)
    };
    let value = integral_of_fn(&local, &filtered, arity)?;
    Ok(CurvatureReport::exact(
        value,
        integrand,
        RegionDescriptor::Localized {
            center: x.to_vec(),
            t,
            k,
        },
    ))
}

const MC_CHUNK: u64 = 4096;

/// Unbiased Monte Carlo estimator of the integral curvature of the region.
///
/// Index tuples are drawn i.i.d. from the weight-normalized distribution, the
/// sample mean of `K^p` is scaled by `mass^(n+2)`, and the standard error uses
/// the unbiased sample variance under the same scaling.
pub fn monte_carlo_curvature(
    mu: &DiscreteMeasure,
    integrand: IntegrandSpec,
    region: Option<&Ball>,
    samples: u64,
    seed: u64,
) -> Result<CurvatureReport> {
    if samples < 2 {
        return Err(MengerError::InvalidParameter(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    let local;
    let (target, descriptor) = match region {
        Some(ball) => {
            local = mu.restrict(ball);
            (
                &local,
                RegionDescriptor::Ball {
                    center: ball.center.clone(),
                    radius: ball.radius,
                },
            )
        }
        None => (mu, RegionDescriptor::All),
    };
    let mass = target.mass();
    if !(mass > 0.0) {
        return Err(MengerError::ZeroMassRegion);
    }
    let arity = target.intrinsic_dim() + 2;

    // Cumulative weights for inverse-CDF sampling.
    let mut cdf = Vec::with_capacity(target.len());
    let mut acc = 0.0;
    for w in target.weights() {
        acc += w;
        cdf.push(acc);
    }

    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ chunk);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut tuple: Vec<&[f64]> = vec![target.point(0); arity];
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                for slot in tuple.iter_mut() {
                    let u: f64 = rng.random::<f64>() * mass;
                    let idx = match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                        Ok(i) => i,
                        Err(i) => i.min(cdf.len() - 1),
                    };
                    *slot = target.point(idx);
                }
                let v = integrand.evaluate(&tuple);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();

    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let s = samples as f64;
    let mean = sum / s;
    let var = ((sum_sq - s * mean * mean) / (s - 1.0)).max(0.0);
    let mass_pow = mass.powi(arity as i32);
    Ok(CurvatureReport {
        value: mass_pow * mean,
        method: Method::MonteCarlo,
        samples,
        stderr: mass_pow * (var / s).sqrt(),
        seed,
        integrand,
        region: descriptor,
    })
}

/// Both sides of the affine scaling law and of the rescale normalization.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingCheck {
    /// Curvature of the transformed cloud, computed directly.
    pub transformed_direct: f64,
    /// `lambda^(n+2) a^(-n(n+1))` times the original curvature.
    pub transformed_closed_form: f64,
    pub affine_rel_error: f64,
    /// Curvature of `rescale(mu, x, r)` restricted to the unit ball.
    pub rescaled_unit_ball: f64,
    /// Curvature of `mu` restricted to `B(x, r)`, divided by `r^n`.
    pub restricted_over_rn: f64,
    pub rescale_rel_error: f64,
}

fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Verifies how integral curvature transforms under `nu(A) = lambda mu(aA+x)`
/// and under the mass-normalized rescaling, reporting both sides of each law.
pub fn scaling_check(
    mu: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    a: f64,
    lambda_scale: f64,
    integrand: IntegrandSpec,
) -> Result<ScalingCheck> {
    let n = mu.intrinsic_dim() as i32;
    let base = integral_curvature_exact(mu, integrand)?.value;

    let nu = mu.dilate(x, a, lambda_scale)?;
    let direct = integral_curvature_exact(&nu, integrand)?.value;
    let factor = lambda_scale.powi(n + 2) * a.powi(-n * (n + 1));
    let closed = factor * base;

    let rescaled = mu.rescale(x, r)?;
    let unit = Ball::new(vec![0.0; mu.ambient_dim()], 1.0)?;
    let lhs = integral_curvature_exact(&rescaled.restrict(&unit), integrand)?.value;
    let ball = Ball::new(x.to_vec(), r)?;
    let rhs = integral_curvature_exact(&mu.restrict(&ball), integrand)?.value / r.powi(n);

    Ok(ScalingCheck {
        transformed_direct: direct,
        transformed_closed_form: closed,
        affine_rel_error: rel_err(direct, closed),
        rescaled_unit_ball: lhs,
        restricted_over_rn: rhs,
        rescale_rel_error: rel_err(lhs, rhs),
    })
}

/// Partition of support indices by the integer part of `curv(x, r)`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBins {
    pub radius: f64,
    pub bins: Vec<CurvatureBin>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBin {
    pub bin: u64,
    pub indices: Vec<usize>,
    pub mass: f64,
}

/// Assigns each support point to the bin `floor(curv(x, r))` and reports the
/// per-bin masses. The bins partition the support by construction.
pub fn curvature_bins(
    mu: &DiscreteMeasure,
    integrand: IntegrandSpec,
    r: f64,
) -> Result<CurvatureBins> {
    let values: Vec<f64> = (0..mu.len())
        .map(|i| Ok(pointwise_curvature(mu, mu.point(i), integrand, r)?.value))
        .collect::<Result<_>>()?;
    let mut map = std::collections::BTreeMap::<u64, CurvatureBin>::new();
    for (i, v) in values.iter().enumerate() {
        let bin = if v.is_finite() && *v >= 0.0 {
            v.floor().min(u64::MAX as f64) as u64
        } else {
            0
        };
        let entry = map.entry(bin).or_insert_with(|| CurvatureBin {
            bin,
            indices: Vec::new(),
            mass: 0.0,
        });
        entry.indices.push(i);
        entry.mass += mu.weight(i);
    }
    Ok(CurvatureBins {
        radius: r,
        bins: map.into_values().collect(),
    })
}
