//! Discrete measures: weighted point clouds standing in for Radon measures.
//!
//! A [`DiscreteMeasure`] carries points in `R^m` with nonnegative weights, an
//! ambient dimension `m` and an intrinsic dimension `n < m`. Every integral of
//! the continuum theory becomes a weighted sum over these points. Balls are
//! closed throughout: a point `p` belongs to `B(c, r)` iff `|p - c| <= r`.

use serde::{Deserialize, Serialize};

use crate::error::{MengerError, Result};

/// Euclidean distance between two coordinate slices.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(MengerError::InvalidParameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// Closed-ball membership: `|p - center| <= radius`.
    pub fn contains(&self, p: &[f64]) -> bool {
        dist(p, &self.center) <= self.radius
    }
}

/// Geometric sequence of radii `r_j = sigma^j * R`, `j = 0..J-1`, discretizing
/// the multiscale integral `dr/r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub top_radius: f64,
    pub ratio: f64,
    radii: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(top_radius: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(top_radius > 0.0) || !top_radius.is_finite() {
            return Err(MengerError::InvalidParameter(format!(
                "scale grid top radius must be positive, got {top_radius}"
            )));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(MengerError::InvalidParameter(format!(
                "scale grid ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if count == 0 {
            return Err(MengerError::InvalidParameter(
                "scale grid needs at least one scale".into(),
            ));
        }
        // Radii are built multiplicatively so r_{j+1}/r_j == ratio exactly.
        let mut radii = Vec::with_capacity(count);
        let mut r = top_radius;
        for _ in 0..count {
            radii.push(r);
            r *= ratio;
        }
        Ok(Self {
            top_radius,
            ratio,
            radii,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `ln(1/sigma)`, the weight of the left-endpoint geometric rule for `dr/r`.
    pub fn log_weight(&self) -> f64 {
        (1.0 / self.ratio).ln()
    }
}

/// A weighted point cloud on `R^m` with an intrinsic dimension `n < m`.
///
/// Zero-weight points are permitted and retained; they never affect sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    ambient_dim: usize,
    intrinsic_dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Build a measure from row-major coordinates (`len = N * m`) and `N` weights.
    pub fn new(
        ambient_dim: usize,
        intrinsic_dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if intrinsic_dim == 0 || intrinsic_dim >= ambient_dim {
            return Err(MengerError::InvalidParameter(format!(
                "need 1 <= n < m, got n = {intrinsic_dim}, m = {ambient_dim}"
            )));
        }
        if coords.len() != weights.len() * ambient_dim {
            return Err(MengerError::InvalidParameter(format!(
                "coordinate buffer holds {} values, expected {} points x {} coordinates",
                coords.len(),
                weights.len(),
                ambient_dim
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MengerError::InvalidParameter(
                "coordinates must be finite".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MengerError::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            ambient_dim,
            intrinsic_dim,
            coords,
            weights,
        })
    }

    /// Convenience constructor from one slice per point.
    pub fn from_points(intrinsic_dim: usize, points: &[&[f64]], weights: &[f64]) -> Result<Self> {
        let m = points.first().map_or(0, |p| p.len());
        if points.is_empty() {
            return Err(MengerError::InvalidParameter(
                "from_points needs at least one point; use new() for empty measures".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * m);
        for p in points {
            if p.len() != m {
                return Err(MengerError::InvalidParameter(
                    "all points must share one ambient dimension".into(),
                ));
            }
            coords.extend_from_slice(p);
        }
        Self::new(m, intrinsic_dim, coords, weights.to_vec())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.ambient_dim)
            .zip(self.weights.iter().copied())
    }

    /// Total mass of the measure.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass inside a closed ball.
    pub fn mass_in(&self, ball: &Ball) -> f64 {
        self.iter()
            .filter(|(p, _)| ball.contains(p))
            .map(|(_, w)| w)
            .sum()
    }

    /// Indices of support points inside a closed ball.
    pub fn indices_in(&self, ball: &Ball) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| ball.contains(self.point(i)))
            .collect()
    }

    /// Restriction to a closed ball: keeps exactly the points with
    /// `|p - center| <= radius` along with their weights.
    pub fn restrict(&self, ball: &Ball) -> Self {
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (p, w) in self.iter() {
            if ball.contains(p) {
                coords.extend_from_slice(p);
                weights.push(w);
            }
        }
        Self {
            ambient_dim: self.ambient_dim,
            intrinsic_dim: self.intrinsic_dim,
            coords,
            weights,
        }
    }

    /// Density ratio `Theta^n(mu, x, r) = mu(B(x,r)) / r^n`.
    pub fn density_ratio(&self, x: &[f64], r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(MengerError::InvalidParameter(format!(
                "density ratio needs r > 0, got {r}"
            )));
        }
        let ball = Ball {
            center: x.to_vec(),
            radius: r,
        };
        Ok(self.mass_in(&ball) / r.powi(self.intrinsic_dim as i32))
    }

    /// Density ratios along a scale grid, with empirical upper/lower density
    /// proxies taken over the finest half of the grid.
    pub fn density_profile(&self, x: &[f64], grid: &ScaleGrid) -> Result<DensityProfile> {
        let ratios: Vec<f64> = grid
            .radii()
            .iter()
            .map(|&r| self.density_ratio(x, r))
            .collect::<Result<_>>()?;
        let start = grid.len() / 2;
        let finest = &ratios[start..];
        let finest_max = finest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let finest_min = finest.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(DensityProfile {
            center: x.to_vec(),
            radii: grid.radii().to_vec(),
            ratios,
            finest_min,
            finest_max,
        })
    }

    /// Best empirical Ahlfors-regularity constants over the given support
    /// samples and grid. The upper constant scans all scales; the lower
    /// constant only scales with `r < diam(support)`, mirroring the
    /// definition's restriction.
    pub fn ahlfors_check(
        &self,
        sample_indices: &[usize],
        grid: &ScaleGrid,
    ) -> Result<AhlforsReport> {
        let diam = self.support_diameter();
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::INFINITY;
        let mut upper_witness = None;
        let mut lower_witness = None;
        for &i in sample_indices {
            if i >= self.len() {
                return Err(MengerError::InvalidParameter(format!(
                    "sample index {i} out of range ({} points)",
                    self.len()
                )));
            }
            let x = self.point(i).to_vec();
            for (j, &r) in grid.radii().iter().enumerate() {
                let theta = self.density_ratio(&x, r)?;
                if theta > upper {
                    upper = theta;
                    upper_witness = Some(AhlforsWitness {
                        point_index: i,
                        scale_index: j,
                        radius: r,
                        ratio: theta,
                    });
                }
                if r < diam && theta < lower {
                    lower = theta;
                    lower_witness = Some(AhlforsWitness {
                        point_index: i,
                        scale_index: j,
                        radius: r,
                        ratio: theta,
                    });
                }
            }
        }
        Ok(AhlforsReport {
            lower_constant: lower,
            upper_constant: upper,
            lower_witness,
            upper_witness,
        })
    }

    /// The rescaled measure `mu_{x,r}(E) = mu(rE + x) / r^n`: points map to
    /// `(p - x)/r` and weights to `w / r^n`.
    pub fn rescale(&self, x: &[f64], r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(MengerError::InvalidParameter(format!(
                "rescale needs r > 0, got {r}"
            )));
        }
        let scale = r.powi(self.intrinsic_dim as i32);
        let mut coords = Vec::with_capacity(self.coords.len());
        for (p, _) in self.iter() {
            for (pc, xc) in p.iter().zip(x) {
                coords.push((pc - xc) / r);
            }
        }
        let weights = self.weights.iter().map(|w| w / scale).collect();
        Ok(Self {
            ambient_dim: self.ambient_dim,
            intrinsic_dim: self.intrinsic_dim,
            coords,
            weights,
        })
    }

    /// Dilation of the cloud by `a` about `x` with all masses scaled by
    /// `lambda`: points map to `x + a(p - x)` and weights to `lambda * w`.
    ///
    /// Integral Menger curvature transforms under this map by the factor
    /// `lambda^(n+2) a^(-n(n+1))`.
    pub fn dilate(&self, x: &[f64], a: f64, lambda: f64) -> Result<Self> {
        if !(a > 0.0) || !(lambda > 0.0) {
            return Err(MengerError::InvalidParameter(format!(
                "dilation needs a > 0 and lambda > 0, got a = {a}, lambda = {lambda}"
            )));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for (p, _) in self.iter() {
            for (pc, xc) in p.iter().zip(x) {
                coords.push(xc + a * (pc - xc));
            }
        }
        let weights = self.weights.iter().map(|w| lambda * w).collect();
        Ok(Self {
            ambient_dim: self.ambient_dim,
            intrinsic_dim: self.intrinsic_dim,
            coords,
            weights,
        })
    }

    /// Diameter of the support (max pairwise distance; 0 for fewer than two points).
    pub fn support_diameter(&self) -> f64 {
        let n = self.len();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(dist(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// Smallest radius around `x` covering every support point.
    pub fn covering_radius_from(&self, x: &[f64]) -> f64 {
        self.iter().map(|(p, _)| dist(p, x)).fold(0.0, f64::max)
    }
}

/// Per-scale density ratios plus finest-half extrema (empirical proxies for
/// the upper and lower densities; never the true limsup/liminf).
#[derive(Debug, Clone, Serialize)]
pub struct DensityProfile {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub finest_min: f64,
    pub finest_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AhlforsWitness {
    pub point_index: usize,
    pub scale_index: usize,
    pub radius: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AhlforsReport {
    /// Best (smallest) observed ratio over scales below the support diameter.
    pub lower_constant: f64,
    /// Largest observed ratio over all sampled scales.
    pub upper_constant: f64,
    pub lower_witness: Option<AhlforsWitness>,
    pub upper_witness: Option<AhlforsWitness>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_weights(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn mass_counts_closed_ball_membership() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 1.0, 0.0, 5.0, 0.0], unit_weights(3))
            .unwrap();
        let ball = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        // The point at distance exactly 1 is inside (closed ball).
        assert_eq!(mu.mass_in(&ball), 2.0);
        assert_eq!(mu.mass(), 3.0);
    }

    #[test]
    fn mass_of_empty_measure_is_zero() {
        let mu = DiscreteMeasure::new(2, 1, vec![], vec![]).unwrap();
        assert_eq!(mu.mass(), 0.0);
        let ball = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(mu.mass_in(&ball), 0.0);
    }

    #[test]
    fn mass_sums_weights() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 0.5, 0.0], vec![0.5, 0.25]).unwrap();
        let ball = Ball::new(vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(mu.mass_in(&ball), 0.75);
    }

    #[test]
    fn restrict_keeps_grid_points_in_window() {
        // 5 grid points on a line, ball of radius 1.5 around the middle one.
        let mu = DiscreteMeasure::new(
            2,
            1,
            vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 0.0],
            unit_weights(5),
        )
        .unwrap();
        let ball = Ball::new(vec![2.0, 0.0], 1.5).unwrap();
        let res = mu.restrict(&ball);
        assert_eq!(res.len(), 3);
        assert_eq!(res.point(0), &[1.0, 0.0]);
        assert_eq!(res.point(2), &[3.0, 0.0]);
    }

    #[test]
    fn restrict_misses_all_and_keeps_all() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], unit_weights(2)).unwrap();
        let far = Ball::new(vec![50.0, 0.0], 1.0).unwrap();
        assert!(mu.restrict(&far).is_empty());
        let big = Ball::new(vec![0.0, 0.0], 10.0).unwrap();
        assert_eq!(mu.restrict(&big), mu);
    }

    #[test]
    fn restrict_is_idempotent() {
        let mu = DiscreteMeasure::new(
            2,
            1,
            vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0],
            vec![1.0, 0.0, 2.5],
        )
        .unwrap();
        let ball = Ball::new(vec![0.5, 0.0], 1.0).unwrap();
        let once = mu.restrict(&ball);
        let twice = once.restrict(&ball);
        assert_eq!(once, twice);
    }

    #[test]
    fn density_ratio_atom_scales_like_r_to_minus_n() {
        let mu = DiscreteMeasure::new(2, 1, vec![3.0, 4.0], vec![1.0]).unwrap();
        for r in [0.1, 1.0, 7.0] {
            let got = mu.density_ratio(&[3.0, 4.0], r).unwrap();
            assert_relative_eq!(got, 1.0 / r, max_relative = 1e-15);
        }
    }

    #[test]
    fn density_ratio_segment_midpoint_near_two() {
        // 201 points spaced 0.01 with weight 0.01 each, unit linear density.
        let mut coords = Vec::new();
        for i in 0..201 {
            coords.push(0.01 * i as f64);
            coords.push(0.0);
        }
        let mu = DiscreteMeasure::new(2, 1, coords, vec![0.01; 201]).unwrap();
        let got = mu.density_ratio(&[1.0, 0.0], 0.5).unwrap();
        // Hand count: indices 50..=150 lie within 0.5, mass 1.01, ratio 2.02.
        assert_relative_eq!(got, 2.02, max_relative = 1e-12);
        assert!((got - 2.0).abs() <= 0.05);
    }

    #[test]
    fn density_ratio_empty_ball_is_zero() {
        let mu = DiscreteMeasure::new(2, 1, vec![10.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(mu.density_ratio(&[0.0, 0.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn density_profile_of_atom_increases_as_r_shrinks() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![1.0]).unwrap();
        let grid = ScaleGrid::new(1.0, 0.5, 6).unwrap();
        let prof = mu.density_profile(&[0.0, 0.0], &grid).unwrap();
        for w in prof.ratios.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_relative_eq!(prof.ratios[0], 1.0);
        assert_relative_eq!(prof.ratios[5], 32.0);
    }

    #[test]
    fn rescale_identity_and_atom() {
        let mu = DiscreteMeasure::new(2, 1, vec![1.0, 2.0, -3.0, 0.5], vec![0.5, 1.5]).unwrap();
        let same = mu.rescale(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(mu, same);

        let atom = DiscreteMeasure::new(2, 1, vec![3.0, -1.0], vec![1.0]).unwrap();
        let scaled = atom.rescale(&[3.0, -1.0], 2.0).unwrap();
        assert_eq!(scaled.point(0), &[0.0, 0.0]);
        assert_eq!(scaled.weight(0), 0.5);
    }

    #[test]
    fn rescale_mass_identity_exact_for_power_of_two_radius() {
        let mu = DiscreteMeasure::new(
            2,
            1,
            vec![0.25, 0.5, -1.5, 0.75, 0.125, -0.25],
            vec![0.3, 0.7, 1.1],
        )
        .unwrap();
        let x = [0.5, -0.25];
        let r = 2.0;
        let rescaled = mu.rescale(&x, r).unwrap();
        let unit = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        let orig = Ball::new(x.to_vec(), r).unwrap();
        // Division by a power of two is exact, so these agree bitwise.
        assert_eq!(rescaled.mass_in(&unit), mu.mass_in(&orig) / r);
        assert_eq!(
            rescaled.density_ratio(&[0.0, 0.0], 1.0).unwrap(),
            mu.density_ratio(&x, r).unwrap()
        );
    }

    #[test]
    fn rescale_round_trip_recovers_measure() {
        let mu = DiscreteMeasure::new(
            3,
            1,
            vec![0.1, 0.2, 0.3, -0.4, 0.5, -0.6, 0.7, 0.8, 0.9],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let x = [0.3, -0.7, 0.11];
        let r = 0.37;
        let fwd = mu.rescale(&x, r).unwrap();
        let back_center: Vec<f64> = x.iter().map(|c| -c / r).collect();
        let back = fwd.rescale(&back_center, 1.0 / r).unwrap();
        for i in 0..mu.len() {
            for (a, b) in back.point(i).iter().zip(mu.point(i)) {
                assert!((a - b).abs() <= 1e-12);
            }
            assert_relative_eq!(back.weight(i), mu.weight(i), max_relative = 1e-12);
        }
    }

    #[test]
    fn ahlfors_single_atom_reports_finite_grid_max() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![1.0]).unwrap();
        let grid = ScaleGrid::new(1.0, 0.5, 5).unwrap();
        let rep = mu.ahlfors_check(&[0], &grid).unwrap();
        // Max over the finite grid is attained at the smallest radius.
        assert_relative_eq!(rep.upper_constant, 16.0);
        // diam(support) = 0, so no scale qualifies for the lower constant.
        assert!(rep.lower_constant.is_infinite());
        assert!(rep.lower_witness.is_none());
    }

    #[test]
    fn scale_grid_ratio_is_exact() {
        let grid = ScaleGrid::new(0.7, 0.3, 9).unwrap();
        for w in grid.radii().windows(2) {
            assert_eq!(w[1] / w[0], 0.3);
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn zero_weight_points_are_retained() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.mass(), 2.0);
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(DiscreteMeasure::new(2, 2, vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(2, 0, vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(2, 1, vec![0.0], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(2, 1, vec![0.0, 0.0], vec![-1.0]).is_err());
    }
}
