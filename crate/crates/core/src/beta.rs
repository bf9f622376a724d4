//! Jones beta numbers, centered variants, multiscale and Carleson sums, and
//! a brute-force plane-search oracle.
//!
//! The `p = 2` solvers are exact: the optimal plane goes through the weighted
//! centroid (or the ball center, for the centered variant) and is spanned by
//! the top-`n` eigenvectors of the corresponding second-moment matrix, so
//! `beta^2 * r^(n+2)` is the sum of the `m-n` smallest eigenvalues. For
//! `p != 2` a local search seeded at the `p = 2` minimizer produces a
//! documented upper bound on the true infimum.
//!
//! A scale is flagged as insufficient when its ball holds fewer than `n+1`
//! points or zero mass; flagged scales are excluded from sums and counted,
//! never silently zeroed.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MengerError, Result};
use crate::measure::{Ball, DiscreteMeasure, ScaleGrid};

/// An n-dimensional affine plane: a base point plus an orthonormal basis of
/// the direction space.
#[derive(Debug, Clone, Serialize)]
pub struct AffinePlane {
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl AffinePlane {
    /// Euclidean distance from a point to the plane.
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        let mut sq: f64 = 0.0;
        let mut proj_sq = 0.0;
        let diff: Vec<f64> = p.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        for d in &diff {
            sq += d * d;
        }
        for q in &self.basis {
            let c: f64 = diff.iter().zip(q).map(|(a, b)| a * b).sum();
            proj_sq += c * c;
        }
        (sq - proj_sq).max(0.0).sqrt()
    }

    /// Largest deviation of the basis from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Result of one beta evaluation at a fixed center and scale.
#[derive(Debug, Clone, Serialize)]
pub enum BetaResult {
    Fit(BetaFit),
    /// Fewer than `n+1` points or zero mass in the ball.
    Insufficient {
        points_in_ball: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaFit {
    pub value: f64,
    /// `value^p` as produced by the solver, kept separately so squared sums
    /// do not pay a sqrt round trip (for `p = 2` this is `value^2`).
    pub value_pow_p: f64,
    pub plane: AffinePlane,
}

impl BetaResult {
    pub fn fit(&self) -> Option<&BetaFit> {
        match self {
            BetaResult::Fit(f) => Some(f),
            BetaResult::Insufficient { .. } => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.fit().map(|f| f.value)
    }
}

struct BallData {
    indices: Vec<usize>,
    mass: f64,
}

fn gather(mu: &DiscreteMeasure, x: &[f64], r: f64) -> BallData {
    let ball = Ball {
        center: x.to_vec(),
        radius: r,
    };
    let indices = mu.indices_in(&ball);
    let mass = indices.iter().map(|&i| mu.weight(i)).sum();
    BallData { indices, mass }
}

fn insufficient(mu: &DiscreteMeasure, data: &BallData) -> bool {
    data.indices.len() < mu.intrinsic_dim() + 1 || !(data.mass > 0.0)
}

/// Eigen-structure of a weighted second-moment matrix about `origin`.
/// Returns the top-n eigenvectors and the sum of the m-n smallest eigenvalues.
fn moment_split(
    mu: &DiscreteMeasure,
    indices: &[usize],
    origin: &[f64],
    extra_weights: Option<&[f64]>,
    n: usize,
) -> (Vec<Vec<f64>>, f64) {
    let m = mu.ambient_dim();
    let mut s = DMatrix::<f64>::zeros(m, m);
    for (k, &i) in indices.iter().enumerate() {
        let w = extra_weights.map_or(mu.weight(i), |u| u[k]);
        if w == 0.0 {
            continue;
        }
        let p = mu.point(i);
        for a in 0..m {
            let da = p[a] - origin[a];
            for b in a..m {
                let v = w * da * (p[b] - origin[b]);
                s[(a, b)] += v;
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            s[(a, b)] = s[(b, a)];
        }
    }
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let basis: Vec<Vec<f64>> = order[..n]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    let residual: f64 = order[n..]
        .iter()
        .map(|&j| eig.eigenvalues[j].max(0.0))
        .sum();
    (basis, residual)
}

fn weighted_centroid(mu: &DiscreteMeasure, indices: &[usize], extra: Option<&[f64]>) -> Vec<f64> {
    let m = mu.ambient_dim();
    let mut c = vec![0.0; m];
    let mut total = 0.0;
    for (k, &i) in indices.iter().enumerate() {
        let w = extra.map_or(mu.weight(i), |u| u[k]);
        total += w;
        for (cc, pc) in c.iter_mut().zip(mu.point(i)) {
            *cc += w * pc;
        }
    }
    if total > 0.0 {
        for cc in c.iter_mut() {
            *cc /= total;
        }
    }
    c
}

/// Exact `beta_2(x, r)` via weighted total least squares.
pub fn beta2(mu: &DiscreteMeasure, x: &[f64], r: f64) -> Result<BetaResult> {
    beta2_impl(mu, x, r, false)
}

/// Exact centered `beta^_2(x, r)`: the plane is constrained through `x`.
pub fn centered_beta2(mu: &DiscreteMeasure, x: &[f64], r: f64) -> Result<BetaResult> {
    beta2_impl(mu, x, r, true)
}

fn beta2_impl(mu: &DiscreteMeasure, x: &[f64], r: f64, centered: bool) -> Result<BetaResult> {
    if !(r > 0.0) {
        return Err(MengerError::InvalidParameter(format!(
            "beta needs r > 0, got {r}"
        )));
    }
    let n = mu.intrinsic_dim();
    let data = gather(mu, x, r);
    if insufficient(mu, &data) {
        return Ok(BetaResult::Insufficient {
            points_in_ball: data.indices.len(),
        });
    }
    let base = if centered {
        x.to_vec()
    } else {
        weighted_centroid(mu, &data.indices, None)
    };
    let (basis, residual) = moment_split(mu, &data.indices, &base, None, n);
    let value_sq = residual / r.powi(n as i32 + 2);
    Ok(BetaResult::Fit(BetaFit {
        value: value_sq.max(0.0).sqrt(),
        value_pow_p: value_sq,
        plane: AffinePlane { base, basis },
    }))
}

fn p_objective(
    mu: &DiscreteMeasure,
    indices: &[usize],
    plane: &AffinePlane,
    r: f64,
    p: f64,
    n: usize,
) -> f64 {
    let mut acc = 0.0;
    for &i in indices {
        let w = mu.weight(i);
        if w == 0.0 {
            continue;
        }
        let d = plane.distance_to(mu.point(i));
        acc += w * (d / r).powf(p);
    }
    acc / r.powi(n as i32)
}

/// `beta_p(x, r)` for `p >= 1`. Delegates to the exact solver at `p = 2`;
/// otherwise runs iteratively reweighted fitting seeded at the `p = 2`
/// minimizer and returns the best iterate, an upper bound on the infimum.
pub fn beta_p(
    mu: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    p: f64,
    centered: bool,
) -> Result<BetaResult> {
    if !(p >= 1.0) {
        return Err(MengerError::InvalidParameter(format!(
            "beta_p needs p >= 1, got {p}"
        )));
    }
    if p == 2.0 {
        return beta2_impl(mu, x, r, centered);
    }
    let n = mu.intrinsic_dim();
    let data = gather(mu, x, r);
    if insufficient(mu, &data) {
        return Ok(BetaResult::Insufficient {
            points_in_ball: data.indices.len(),
        });
    }
    let seed = match beta2_impl(mu, x, r, centered)? {
        BetaResult::Fit(f) => f,
        BetaResult::Insufficient { points_in_ball } => {
            return Ok(BetaResult::Insufficient { points_in_ball })
        }
    };
    let mut plane = seed.plane;
    let mut best_obj = p_objective(mu, &data.indices, &plane, r, p, n);
    let mut best_plane = plane.clone();
    let mut prev = best_obj;
    let eps = 1e-12 * r;
    for _ in 0..100 {
        let u: Vec<f64> = data
            .indices
            .iter()
            .map(|&i| {
                let d = plane.distance_to(mu.point(i)).max(eps);
                mu.weight(i) * d.powf(p - 2.0)
            })
            .collect();
        let base = if centered {
            x.to_vec()
        } else {
            weighted_centroid(mu, &data.indices, Some(&u))
        };
        let (basis, _) = moment_split(mu, &data.indices, &base, Some(&u), n);
        plane = AffinePlane { base, basis };
        let obj = p_objective(mu, &data.indices, &plane, r, p, n);
        if obj < best_obj {
            best_obj = obj;
            best_plane = plane.clone();
        }
        if (obj - prev).abs() < 1e-10 {
            break;
        }
        prev = obj;
    }
    Ok(BetaResult::Fit(BetaFit {
        value: best_obj.powf(1.0 / p),
        value_pow_p: best_obj,
        plane: best_plane,
    }))
}

/// Per-scale beta values along a grid plus the multiscale sum
/// `ln(1/sigma) * sum of beta^2` over the unflagged scales.
#[derive(Debug, Clone, Serialize)]
pub struct BetaProfile {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    /// Per-scale beta value; `None` marks an insufficient-data scale.
    pub values: Vec<Option<f64>>,
    /// Per-scale squared beta value, aligned with `values`.
    pub values_sq: Vec<Option<f64>>,
    pub flags: Vec<bool>,
    #[serde(rename = "sum")]
    pub multiscale_sum: f64,
    pub covered_scales: usize,
}

pub fn multiscale_beta_sum(
    mu: &DiscreteMeasure,
    x: &[f64],
    grid: &ScaleGrid,
    centered: bool,
    p: f64,
) -> Result<BetaProfile> {
    let mut values = Vec::with_capacity(grid.len());
    let mut values_sq = Vec::with_capacity(grid.len());
    let mut flags = Vec::with_capacity(grid.len());
    let mut sum = 0.0;
    let mut covered = 0;
    for &r in grid.radii() {
        match beta_p(mu, x, r, p, centered)? {
            BetaResult::Fit(fit) => {
                let sq = fit.value * fit.value;
                sum += sq;
                covered += 1;
                values.push(Some(fit.value));
                values_sq.push(Some(sq));
                flags.push(false);
            }
            BetaResult::Insufficient { .. } => {
                values.push(None);
                values_sq.push(None);
                flags.push(true);
            }
        }
    }
    Ok(BetaProfile {
        center: x.to_vec(),
        radii: grid.radii().to_vec(),
        values,
        values_sq,
        flags,
        multiscale_sum: grid.log_weight() * sum,
        covered_scales: covered,
    })
}

/// Carleson sum over a ball: the weighted sum over support points inside of
/// their multiscale beta sums.
pub fn carleson_sum(mu: &DiscreteMeasure, ball: &Ball, grid: &ScaleGrid, p: f64) -> Result<f64> {
    let indices = mu.indices_in(ball);
    let contributions: Vec<f64> = indices
        .par_iter()
        .map(|&i| {
            let profile = multiscale_beta_sum(mu, mu.point(i), grid, false, p)?;
            Ok(mu.weight(i) * profile.multiscale_sum)
        })
        .collect::<Result<_>>()?;
    Ok(contributions.iter().sum())
}

/// Carleson sum next to the `C R^n` budget it is measured against.
#[derive(Debug, Clone, Serialize)]
pub struct CarlesonReport {
    pub value: f64,
    pub radius_power: f64,
    /// `C R^n` for the user-supplied constant, when one was given.
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

pub fn carleson_report(
    mu: &DiscreteMeasure,
    ball: &Ball,
    grid: &ScaleGrid,
    p: f64,
    user_constant: Option<f64>,
) -> Result<CarlesonReport> {
    let value = carleson_sum(mu, ball, grid, p)?;
    let radius_power = ball.radius.powi(mu.intrinsic_dim() as i32);
    let bound = user_constant.map(|c| c * radius_power);
    Ok(CarlesonReport {
        value,
        radius_power,
        bound,
        within_bound: bound.map(|b| value <= b),
    })
}

/// Deterministic grid search over candidate planes; exact per-plane objective
/// evaluation, hence always an upper bound on the beta infimum. Test oracle.
///
/// Supported: `(m=2, n=1)` with an angle grid, `(m=3, n=2)` with a
/// polar-azimuth normal grid, and `(m=3, n=1, p=2)` with a direction grid
/// through the weighted centroid.
pub fn brute_force_beta(
    mu: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    p: f64,
    centered: bool,
    resolution: usize,
) -> Result<f64> {
    if resolution < 64 {
        return Err(MengerError::InvalidParameter(format!(
            "brute-force resolution must be at least 64, got {resolution}"
        )));
    }
    let m = mu.ambient_dim();
    let n = mu.intrinsic_dim();
    let data = gather(mu, x, r);
    if insufficient(mu, &data) {
        return Err(MengerError::InvalidParameter(
            "brute-force search on an insufficient-data ball".into(),
        ));
    }
    match (m, n) {
        (2, 1) => Ok(brute_force_lines_2d(
            mu, &data, x, r, p, centered, resolution,
        )),
        (3, 2) => Ok(brute_force_planes_3d(
            mu, &data, x, r, p, centered, resolution,
        )),
        (3, 1) => {
            if p != 2.0 {
                return Err(MengerError::UnsupportedBruteForce {
                    m,
                    n,
                    detail: " (lines in R^3 support p = 2 only)".into(),
                });
            }
            Ok(brute_force_lines_3d(mu, &data, x, r, centered, resolution))
        }
        _ => Err(MengerError::UnsupportedBruteForce {
            m,
            n,
            detail: String::new(),
        }),
    }
}

/// Minimizes `sum_i w_i |t_i - s|^p` over `s`. Closed form for `p = 2`;
/// ternary search on the convex objective otherwise.
fn best_offset(ts: &[f64], ws: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        let total: f64 = ws.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        return ts.iter().zip(ws).map(|(t, w)| t * w).sum::<f64>() / total;
    }
    let mut lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let obj = |s: f64| -> f64 {
        ts.iter()
            .zip(ws)
            .map(|(t, w)| w * (t - s).abs().powf(p))
            .sum()
    };
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if obj(a) <= obj(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

fn objective_from_dists(dists: &[f64], ws: &[f64], r: f64, p: f64, n: usize) -> f64 {
    let acc: f64 = dists.iter().zip(ws).map(|(d, w)| w * (d / r).powf(p)).sum();
    acc / r.powi(n as i32)
}

fn brute_force_lines_2d(
    mu: &DiscreteMeasure,
    data: &BallData,
    x: &[f64],
    r: f64,
    p: f64,
    centered: bool,
    resolution: usize,
) -> f64 {
    let ws: Vec<f64> = data.indices.iter().map(|&i| mu.weight(i)).collect();
    let mut best = f64::INFINITY;
    for k in 0..resolution {
        let theta = std::f64::consts::PI * k as f64 / resolution as f64;
        let normal = [theta.cos(), theta.sin()];
        let ts: Vec<f64> = data
            .indices
            .iter()
            .map(|&i| {
                let pnt = mu.point(i);
                pnt[0] * normal[0] + pnt[1] * normal[1]
            })
            .collect();
        let s = if centered {
            x[0] * normal[0] + x[1] * normal[1]
        } else {
            best_offset(&ts, &ws, p)
        };
        let dists: Vec<f64> = ts.iter().map(|t| (t - s).abs()).collect();
        best = best.min(objective_from_dists(&dists, &ws, r, p, 1));
    }
    best.powf(1.0 / p)
}

fn brute_force_planes_3d(
    mu: &DiscreteMeasure,
    data: &BallData,
    x: &[f64],
    r: f64,
    p: f64,
    centered: bool,
    resolution: usize,
) -> f64 {
    let ws: Vec<f64> = data.indices.iter().map(|&i| mu.weight(i)).collect();
    let mut best = f64::INFINITY;
    for a in 0..resolution {
        let phi = std::f64::consts::PI * a as f64 / resolution as f64;
        for b in 0..resolution {
            let psi = std::f64::consts::PI * b as f64 / resolution as f64;
            let normal = [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()];
            let ts: Vec<f64> = data
                .indices
                .iter()
                .map(|&i| {
                    let pnt = mu.point(i);
                    pnt[0] * normal[0] + pnt[1] * normal[1] + pnt[2] * normal[2]
                })
                .collect();
            let s = if centered {
                x.iter().zip(&normal).map(|(c, nc)| c * nc).sum()
            } else {
                best_offset(&ts, &ws, p)
            };
            let dists: Vec<f64> = ts.iter().map(|t| (t - s).abs()).collect();
            best = best.min(objective_from_dists(&dists, &ws, r, p, 2));
        }
    }
    best.powf(1.0 / p)
}

fn brute_force_lines_3d(
    mu: &DiscreteMeasure,
    data: &BallData,
    x: &[f64],
    r: f64,
    centered: bool,
    resolution: usize,
) -> f64 {
    let ws: Vec<f64> = data.indices.iter().map(|&i| mu.weight(i)).collect();
    let total: f64 = ws.iter().sum();
    let base: Vec<f64> = if centered {
        x.to_vec()
    } else {
        weighted_centroid(mu, &data.indices, None)
    };
    let mut best = f64::INFINITY;
    for a in 0..resolution {
        let phi = std::f64::consts::PI * a as f64 / resolution as f64;
        for b in 0..resolution {
            let psi = std::f64::consts::PI * b as f64 / resolution as f64;
            let dir = [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()];
            let mut acc = 0.0;
            for (k, &i) in data.indices.iter().enumerate() {
                let pnt = mu.point(i);
                let diff: Vec<f64> = pnt.iter().zip(&base).map(|(p, c)| p - c).collect();
                let along: f64 = diff.iter().zip(&dir).map(|(d, u)| d * u).sum();
                let sq = diff.iter().map(|d| d * d).sum::<f64>() - along * along;
                acc += ws[k] * sq.max(0.0) / (r * r);
            }
            let _ = total;
            best = best.min(acc / r.powi(1));
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn four_corner_instance(h: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(2, 1, vec![1.0, h, 1.0, -h, -1.0, h, -1.0, -h], vec![1.0; 4]).unwrap()
    }

    #[test]
    fn exact_fit_data_gives_zero() {
        let mu = DiscreteMeasure::new(
            2,
            1,
            vec![0.0, 0.0, 0.5, 0.0, 1.0, 0.0, -0.7, 0.0],
            vec![1.0; 4],
        )
        .unwrap();
        let fit = beta2(&mu, &[0.0, 0.0], 2.0).unwrap();
        assert_relative_eq!(fit.value().unwrap(), 0.0, epsilon = 1e-12);
        let cen = centered_beta2(&mu, &[0.5, 0.0], 2.0).unwrap();
        assert_relative_eq!(cen.value().unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_points_fit_any_line() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 1.0, 0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let fit = beta2(&mu, &[0.0, 0.0], 2.0).unwrap();
        assert_relative_eq!(fit.value().unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn four_corner_closed_form() {
        // Unit weights at (+-1, +-h): the optimal line is the x-axis, so the
        // residual is 4h^2 and beta^2 = 4h^2 / r^3 with r = 2.
        let h = 0.1;
        let mu = four_corner_instance(h);
        let fit = beta2(&mu, &[0.0, 0.0], 2.0).unwrap();
        let expect_sq = 4.0 * h * h / 8.0;
        assert_relative_eq!(
            fit.fit().unwrap().value_pow_p,
            expect_sq,
            max_relative = 1e-12
        );
        let brute = brute_force_beta(&mu, &[0.0, 0.0], 2.0, 2.0, false, 4096).unwrap();
        assert!((fit.value().unwrap() - brute).abs() <= 1e-6);
        assert!(brute >= fit.value().unwrap() - 1e-12);
    }

    #[test]
    fn insufficient_data_is_flagged() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 5.0, 0.0], vec![1.0, 1.0]).unwrap();
        match beta2(&mu, &[0.0, 0.0], 0.5).unwrap() {
            BetaResult::Insufficient { points_in_ball } => assert_eq!(points_in_ball, 1),
            BetaResult::Fit(_) => panic!("expected insufficient-data flag"),
        }
    }

    #[test]
    fn centered_dominates_uncentered() {
        let mu = four_corner_instance(0.23);
        // Offset center: the constrained family is smaller.
        let x = [0.0, 0.4];
        let plain = beta2(&mu, &x, 3.0).unwrap().value().unwrap();
        let centered = centered_beta2(&mu, &x, 3.0).unwrap().value().unwrap();
        assert!(plain <= centered * (1.0 + 1e-12));
    }

    #[test]
    fn offset_center_splits_beta_and_centered_beta() {
        // Points on the x-axis, center lifted off the line: the plain fit is
        // exact while the centered one pays for passing through x.
        let mu = DiscreteMeasure::new(
            2,
            1,
            vec![-0.5, 0.0, -0.2, 0.0, 0.1, 0.0, 0.45, 0.0],
            vec![1.0; 4],
        )
        .unwrap();
        let x = [0.0, 0.2];
        let plain = beta2(&mu, &x, 1.0).unwrap().value().unwrap();
        let centered = centered_beta2(&mu, &x, 1.0).unwrap().value().unwrap();
        assert!(plain <= 1e-9);
        assert!(centered > 1e-3);
        let brute = brute_force_beta(&mu, &x, 1.0, 2.0, true, 4096).unwrap();
        assert!((centered - brute).abs() <= 1e-6);
    }

    #[test]
    fn beta_p_delegates_at_two_and_bounds_at_one() {
        let mu = four_corner_instance(0.1);
        let x = [0.0, 0.0];
        let direct = beta2(&mu, &x, 2.0).unwrap().value().unwrap();
        let via_p = beta_p(&mu, &x, 2.0, 2.0, false).unwrap().value().unwrap();
        assert!((direct - via_p).abs() <= 1e-12);

        let p1 = beta_p(&mu, &x, 2.0, 1.0, false).unwrap();
        let p1fit = p1.fit().unwrap();
        // Upper bound: no better than the true infimum approximated by the
        // oracle, no worse than the p=2 plane evaluated with p=1.
        let seed_plane = beta2(&mu, &x, 2.0).unwrap();
        let seed_obj = {
            let plane = &seed_plane.fit().unwrap().plane;
            let ball_idx: Vec<usize> = (0..mu.len()).collect();
            p_objective(&mu, &ball_idx, plane, 2.0, 1.0, 1)
        };
        assert!(p1fit.value_pow_p <= seed_obj + 1e-15);
        let brute = brute_force_beta(&mu, &x, 2.0, 1.0, false, 4096).unwrap();
        assert!(p1fit.value >= brute - 1e-6);
    }

    #[test]
    fn brute_force_monotone_refinement() {
        let mu = four_corner_instance(0.37);
        let x = [0.1, -0.05];
        let coarse = brute_force_beta(&mu, &x, 3.0, 2.0, false, 128).unwrap();
        let fine = brute_force_beta(&mu, &x, 3.0, 2.0, false, 256).unwrap();
        assert!(fine <= coarse + 1e-12);
    }

    #[test]
    fn brute_force_rejects_unsupported() {
        let mu = DiscreteMeasure::new(4, 1, vec![0.0; 12], vec![1.0; 3]).unwrap();
        assert!(matches!(
            brute_force_beta(&mu, &[0.0; 4], 1.0, 2.0, false, 64),
            Err(MengerError::UnsupportedBruteForce { .. })
        ));
    }

    #[test]
    fn plane_patch_in_r3_fits_exactly() {
        let mut coords = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                coords.extend_from_slice(&[i as f64 * 0.1, j as f64 * 0.1, 0.0]);
            }
        }
        let mu = DiscreteMeasure::new(3, 2, coords, vec![0.04; 25]).unwrap();
        let fit = beta2(&mu, &[0.2, 0.2, 0.0], 0.5).unwrap();
        assert!(fit.value().unwrap() <= 1e-10);
        let brute = brute_force_beta(&mu, &[0.2, 0.2, 0.0], 0.5, 2.0, false, 64).unwrap();
        assert!(brute <= 1e-10);
    }

    #[test]
    fn multiscale_sum_on_line_is_zero() {
        let coords: Vec<f64> = (0..100).flat_map(|i| [i as f64 * 0.01, 0.0]).collect();
        let mu = DiscreteMeasure::new(2, 1, coords, vec![0.01; 100]).unwrap();
        let grid = ScaleGrid::new(0.4, 0.5, 5).unwrap();
        let profile = multiscale_beta_sum(&mu, &[0.5, 0.0], &grid, false, 2.0).unwrap();
        assert!(profile.multiscale_sum <= 1e-18);
        assert_eq!(profile.covered_scales, 5);
    }

    #[test]
    fn carleson_sum_vanishes_on_lines_and_planes() {
        let coords: Vec<f64> = (0..60).flat_map(|i| [i as f64 * 0.02, 0.0]).collect();
        let mu = DiscreteMeasure::new(2, 1, coords, vec![0.02; 60]).unwrap();
        let grid = ScaleGrid::new(0.3, 0.5, 4).unwrap();
        let ball = Ball::new(vec![0.6, 0.0], 0.5).unwrap();
        let sum = carleson_sum(&mu, &ball, &grid, 2.0).unwrap();
        assert!(sum <= 1e-16);

        let mut coords3 = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                coords3.extend_from_slice(&[i as f64 * 0.1, j as f64 * 0.1, 0.0]);
            }
        }
        let patch = DiscreteMeasure::new(3, 2, coords3, vec![1.0 / 64.0; 64]).unwrap();
        let ball3 = Ball::new(vec![0.35, 0.35, 0.0], 0.3).unwrap();
        let grid3 = ScaleGrid::new(0.25, 0.5, 3).unwrap();
        let sum3 = carleson_sum(&patch, &ball3, &grid3, 2.0).unwrap();
        assert!(sum3 <= 1e-10);
    }

    #[test]
    fn restriction_consistency() {
        let mu = four_corner_instance(0.19);
        let x = [0.3, 0.1];
        let r = 1.7;
        let direct = beta2(&mu, &x, r).unwrap().value().unwrap();
        let ball = Ball::new(x.to_vec(), r).unwrap();
        let restricted = beta2(&mu.restrict(&ball), &x, r).unwrap().value().unwrap();
        assert_eq!(direct, restricted);
    }

    #[test]
    fn carleson_report_compares_against_user_bound() {
        let mu = four_corner_instance(0.2);
        let ball = Ball::new(vec![0.0, 0.0], 2.0).unwrap();
        let grid = ScaleGrid::new(1.5, 0.5, 3).unwrap();
        let rep = carleson_report(&mu, &ball, &grid, 2.0, Some(10.0)).unwrap();
        assert_eq!(rep.radius_power, 2.0);
        assert_eq!(rep.bound, Some(20.0));
        assert_eq!(rep.within_bound, Some(rep.value <= 20.0));
        let bare = carleson_report(&mu, &ball, &grid, 2.0, None).unwrap();
        assert!(bare.bound.is_none() && bare.within_bound.is_none());
        assert_eq!(bare.value, rep.value);
    }
}
