//! Synthetic discrete measures with known rectifiability status.
//!
//! Weights approximate the natural mass: arc length for curves, area for the
//! plane patch, the self-similar measure for the four-corner Cantor set, and
//! the `1/|x1|` line density for the singular line (truncated at `epsilon`
//! since the continuum mass diverges). Generation is deterministic; the only
//! randomness (the `noisy` wrapper) is driven by the seed carried in the
//! generator parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MengerError, Result};
use crate::measure::{dist, DiscreteMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Unit segment on the x-axis in R^2, midpoint grid, total mass 1.
    Segment { count: usize },
    /// Circle of the given radius in R^2, total mass = circumference.
    Circle { count: usize, radius: f64 },
    /// Unit-square patch in the z = 0 plane of R^3, `side^2` points, area 1.
    PlanePatch { side: usize },
    /// Graph of `t -> sum_j coefficients[j] sin(2 pi (j+1) t)` over [0, 1]
    /// in R^2, uniform weights summing to the polyline length.
    LipschitzGraph {
        count: usize,
        coefficients: Vec<f64>,
    },
    /// Corner points of the standard four-corner Cantor construction
    /// (contraction 1/4 at the unit-square corners), `4^depth` points of
    /// weight `4^-depth`.
    FourCornerCantor { depth: u32 },
    /// Grid on `+-[epsilon, 1]` on the x-axis with weights `step / |x1|`,
    /// the truncated `1/|x1|` density.
    SingularLine { epsilon: f64, count: usize },
    /// Base cloud with centered Gaussian coordinate noise of the given
    /// standard deviation.
    Noisy {
        base: Box<GeneratorSpec>,
        amplitude: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruth {
    Rectifiable,
    PurelyUnrectifiable,
    Degenerate,
}

/// Rectifiability label of the continuum object a generator samples.
/// `noisy` inherits the label of its base; the zero-amplitude case reduces
/// to the base exactly.
pub fn ground_truth(spec: &GeneratorSpec) -> GroundTruth {
    match spec {
        GeneratorSpec::Segment { .. }
        | GeneratorSpec::Circle { .. }
        | GeneratorSpec::PlanePatch { .. }
        | GeneratorSpec::LipschitzGraph { .. } => GroundTruth::Rectifiable,
        GeneratorSpec::FourCornerCantor { .. } => GroundTruth::PurelyUnrectifiable,
        GeneratorSpec::SingularLine { .. } => GroundTruth::Degenerate,
        GeneratorSpec::Noisy { base, .. } => ground_truth(base),
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<DiscreteMeasure> {
    match spec {
        GeneratorSpec::Segment { count } => {
            require(*count >= 1, "segment count must be >= 1")?;
            let coords: Vec<f64> = (0..*count)
                .flat_map(|i| [(i as f64 + 0.5) / *count as f64, 0.0])
                .collect();
            DiscreteMeasure::new(2, 1, coords, vec![1.0 / *count as f64; *count])
        }
        GeneratorSpec::Circle { count, radius } => {
            require(*count >= 1, "circle count must be >= 1")?;
            require(*radius > 0.0, "circle radius must be positive")?;
            let mut coords = Vec::with_capacity(count * 2);
            for i in 0..*count {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / *count as f64;
                coords.push(radius * theta.cos());
                coords.push(radius * theta.sin());
            }
            let w = 2.0 * std::f64::consts::PI * radius / *count as f64;
            DiscreteMeasure::new(2, 1, coords, vec![w; *count])
        }
        GeneratorSpec::PlanePatch { side } => {
            require(*side >= 1, "plane patch side must be >= 1")?;
            let mut coords = Vec::with_capacity(side * side * 3);
            for i in 0..*side {
                for j in 0..*side {
                    coords.push((i as f64 + 0.5) / *side as f64);
                    coords.push((j as f64 + 0.5) / *side as f64);
                    coords.push(0.0);
                }
            }
            let w = 1.0 / (*side as f64 * *side as f64);
            DiscreteMeasure::new(3, 2, coords, vec![w; side * side])
        }
        GeneratorSpec::LipschitzGraph {
            count,
            coefficients,
        } => {
            require(*count >= 2, "lipschitz graph count must be >= 2")?;
            let f = |t: f64| -> f64 {
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (2.0 * std::f64::consts::PI * (j as f64 + 1.0) * t).sin())
                    .sum()
            };
            let pts: Vec<[f64; 2]> = (0..*count)
                .map(|i| {
                    let t = i as f64 / (*count as f64 - 1.0);
                    [t, f(t)]
                })
                .collect();
            let length: f64 = pts.windows(2).map(|w| dist(&w[0], &w[1])).sum();
            let coords: Vec<f64> = pts.iter().flatten().copied().collect();
            DiscreteMeasure::new(2, 1, coords, vec![length / *count as f64; *count])
        }
        GeneratorSpec::FourCornerCantor { depth } => {
            let n = 4usize.pow(*depth);
            let offsets = [[0.0, 0.0], [0.75, 0.0], [0.0, 0.75], [0.75, 0.75]];
            let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0]];
            let mut scale = 1.0;
            for _ in 0..*depth {
                let mut next = Vec::with_capacity(pts.len() * 4);
                for p in &pts {
                    for o in &offsets {
                        next.push([p[0] + o[0] * scale, p[1] + o[1] * scale]);
                    }
                }
                pts = next;
                scale *= 0.25;
            }
            let coords: Vec<f64> = pts.iter().flatten().copied().collect();
            let w = 0.25f64.powi(*depth as i32);
            DiscreteMeasure::new(2, 1, coords, vec![w; n])
        }
        GeneratorSpec::SingularLine { epsilon, count } => {
            require(
                *epsilon > 0.0 && *epsilon < 1.0,
                "singular line needs 0 < epsilon < 1",
            )?;
            require(*count >= 1, "singular line count must be >= 1")?;
            let h = (1.0 - epsilon) / *count as f64;
            let mut coords = Vec::with_capacity(count * 4);
            let mut weights = Vec::with_capacity(count * 2);
            for side in [-1.0f64, 1.0] {
                for i in 0..*count {
                    let x = epsilon + (i as f64 + 0.5) * h;
                    coords.push(side * x);
                    coords.push(0.0);
                    weights.push(h / x);
                }
            }
            DiscreteMeasure::new(2, 1, coords, weights)
        }
        GeneratorSpec::Noisy {
            base,
            amplitude,
            seed,
        } => {
            require(*amplitude >= 0.0, "noise amplitude must be >= 0")?;
            let clean = generate(base)?;
            if *amplitude == 0.0 {
                return Ok(clean);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let m = clean.ambient_dim();
            let mut coords = Vec::with_capacity(clean.len() * m);
            for (p, _) in clean.iter() {
                for c in p {
                    coords.push(c + amplitude * gaussian(&mut rng));
                }
            }
            DiscreteMeasure::new(m, clean.intrinsic_dim(), coords, clean.weights().to_vec())
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(MengerError::InvalidParameter(msg.into()))
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; both uniforms drawn unconditionally to keep the stream
    // layout stable.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::integral_curvature_exact;
    use crate::measure::Ball;
    use crate::simplex::IntegrandSpec;
    use approx::assert_relative_eq;

    #[test]
    fn segment_mass_and_collinearity() {
        let mu = generate(&GeneratorSpec::Segment { count: 100 }).unwrap();
        assert_relative_eq!(mu.mass(), 1.0, max_relative = 1e-12);
        assert!(mu.iter().all(|(p, _)| p[1] == 0.0));
    }

    #[test]
    fn cantor_depth_three() {
        let mu = generate(&GeneratorSpec::FourCornerCantor { depth: 3 }).unwrap();
        assert_eq!(mu.len(), 64);
        assert_relative_eq!(mu.mass(), 1.0, max_relative = 1e-12);
        // Min pairwise distance: siblings of the deepest level sit 3/4 * 4^-2
        // apart, i.e. 3 * 4^-3.
        let mut min_d = f64::INFINITY;
        for i in 0..mu.len() {
            for j in (i + 1)..mu.len() {
                min_d = min_d.min(dist(mu.point(i), mu.point(j)));
            }
        }
        assert_relative_eq!(min_d, 3.0 * 0.25f64.powi(3), max_relative = 1e-12);
    }

    #[test]
    fn cantor_self_similarity_about_origin() {
        let deep = generate(&GeneratorSpec::FourCornerCantor { depth: 4 }).unwrap();
        let shallow = generate(&GeneratorSpec::FourCornerCantor { depth: 3 }).unwrap();
        // Rescale by 1/4 about the origin corner and keep the unit square:
        // exactly the depth-3 point set reappears.
        let rescaled = deep.rescale(&[0.0, 0.0], 0.25).unwrap();
        let ball = Ball::new(vec![0.5, 0.5], 0.8).unwrap();
        let block = rescaled.restrict(&ball);
        assert_eq!(block.len(), shallow.len());
        let mut pts: Vec<Vec<f64>> = (0..block.len()).map(|i| block.point(i).to_vec()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect: Vec<Vec<f64>> = (0..shallow.len())
            .map(|i| shallow.point(i).to_vec())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in pts.iter().zip(&expect) {
            assert!(dist(a, b) <= 1e-12);
        }
    }

    #[test]
    fn singular_line_zero_curvature_and_divergent_mass() {
        let spec = GeneratorSpec::SingularLine {
            epsilon: 0.01,
            count: 200,
        };
        let mu = generate(&spec).unwrap();
        let total = integral_curvature_exact(&mu, IntegrandSpec::k1()).unwrap();
        assert_eq!(total.value, 0.0);
        // Mass grows like 2 ln(1/eps).
        assert!(mu.mass() > 2.0 * (1.0 / 0.01f64).ln() * 0.9);
    }

    #[test]
    fn fixed_seed_bit_identical_and_zero_noise_reduces_to_base() {
        let spec = GeneratorSpec::Noisy {
            base: Box::new(GeneratorSpec::Segment { count: 50 }),
            amplitude: 0.01,
            seed: 42,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);

        let clean = GeneratorSpec::Noisy {
            base: Box::new(GeneratorSpec::Segment { count: 50 }),
            amplitude: 0.0,
            seed: 42,
        };
        assert_eq!(
            generate(&clean).unwrap(),
            generate(&GeneratorSpec::Segment { count: 50 }).unwrap()
        );
        assert_eq!(ground_truth(&clean), GroundTruth::Rectifiable);
    }

    #[test]
    fn ground_truth_labels() {
        assert_eq!(
            ground_truth(&GeneratorSpec::Circle {
                count: 8,
                radius: 1.0
            }),
            GroundTruth::Rectifiable
        );
        assert_eq!(
            ground_truth(&GeneratorSpec::FourCornerCantor { depth: 2 }),
            GroundTruth::PurelyUnrectifiable
        );
        assert_eq!(
            ground_truth(&GeneratorSpec::SingularLine {
                epsilon: 0.1,
                count: 10
            }),
            GroundTruth::Degenerate
        );
    }

    #[test]
    fn generator_specs_round_trip_through_json() {
        let spec = GeneratorSpec::Noisy {
            base: Box::new(GeneratorSpec::Circle {
                count: 30,
                radius: 2.0,
            }),
            amplitude: 0.05,
            seed: 9,
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
