//! Run configuration and the analyze/compare command drivers.
//!
//! A run is described by a single JSON document; every default is explicit in
//! `RunConfig::default()` and printable via the CLI's `--print-config`.
//! Reports are byte-identical across runs with identical config and seed:
//! outputs carry no timestamps, all maps are ordered, and rows are sorted by
//! point index regardless of execution order.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::multiscale_beta_sum;
use crate::curvature::{
    integral_curvature_exact, monte_carlo_curvature, pointwise_curvature, scaling_check,
    CurvatureReport, ENUM_BUDGET,
};
use crate::error::{MengerError, Result};
use crate::generators::{generate, GeneratorSpec};
use crate::io as cloud_io;
use crate::measure::{DiscreteMeasure, ScaleGrid};
use crate::selection::{empirical_lower_bound, selection_constants};
use crate::simplex::{IntegrandKind, IntegrandSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    Path { path: String },
    Generator { generator: GeneratorSpec },
}

/// Either an explicit constant or `"auto"`, resolved from the Ahlfors check
/// before any dependent computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOrValue {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

impl AutoOrValue {
    pub const AUTO: AutoOrValue = AutoOrValue::Auto(AutoTag::Auto);

    fn resolve(self, auto_value: Option<f64>, what: &str) -> Result<f64> {
        match self {
            AutoOrValue::Value(v) if v > 0.0 && v.is_finite() => Ok(v),
            AutoOrValue::Value(v) => Err(MengerError::InvalidParameter(format!(
                "{what} must be positive and finite, got {v}"
            ))),
            AutoOrValue::Auto(_) => auto_value.ok_or_else(|| {
                MengerError::InvalidParameter(format!(
                    "{what} = \"auto\" could not be resolved from the Ahlfors check"
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub top_radius: f64,
    pub ratio: f64,
    pub count: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<ScaleGrid> {
        ScaleGrid::new(self.top_radius, self.ratio, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputSpec,
    /// Intrinsic dimension used when reading CSV input (generators and JSON
    /// input carry their own).
    pub n: usize,
    pub integrand: String,
    pub p: f64,
    pub grid: GridConfig,
    pub lambda: AutoOrValue,
    pub c0: AutoOrValue,
    /// Number of support points analyzed; 0 means all of them.
    pub sample_points: usize,
    pub mc_samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: InputSpec::Generator {
                generator: GeneratorSpec::Circle {
                    count: 300,
                    radius: 1.0,
                },
            },
            n: 1,
            integrand: "K1".into(),
            p: 2.0,
            grid: GridConfig {
                top_radius: 1.0,
                ratio: 0.5,
                count: 8,
            },
            lambda: AutoOrValue::AUTO,
            c0: AutoOrValue::AUTO,
            sample_points: 20,
            mc_samples: 100_000,
            seed: 42,
            output_dir: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with the run-environment fields cleared, so report files embed
    /// only the analysis parameters and stay byte-identical across output
    /// directories and thread counts.
    fn analysis_echo(&self) -> Self {
        Self {
            output_dir: None,
            threads: None,
            ..self.clone()
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load_measure(&self) -> Result<DiscreteMeasure> {
        match &self.input {
            InputSpec::Path { path } => {
                let p = Path::new(path);
                match p.extension().and_then(|e| e.to_str()) {
                    Some("json") => cloud_io::read_json_path(p),
                    _ => cloud_io::read_csv_path(p, self.n),
                }
            }
            InputSpec::Generator { generator } => generate(generator),
        }
    }

    pub fn integrand_spec(&self) -> Result<IntegrandSpec> {
        IntegrandSpec::new(IntegrandKind::parse(&self.integrand)?, self.p)
    }
}

/// Everything resolved once per run: the measure, the sampled point indices,
/// the grid, and the regularity constants.
pub struct ResolvedRun {
    pub config: RunConfig,
    pub measure: DiscreteMeasure,
    pub sample_indices: Vec<usize>,
    pub grid: ScaleGrid,
    pub lambda: f64,
    pub c0: f64,
    pub ahlfors_lower: f64,
    pub ahlfors_upper: f64,
}

pub fn resolve(config: &RunConfig) -> Result<ResolvedRun> {
    let measure = config.load_measure()?;
    if measure.is_empty() {
        return Err(MengerError::InvalidParameter(
            "the input measure has no points".into(),
        ));
    }
    let grid = config.grid.build()?;
    let sample_indices = choose_samples(measure.len(), config.sample_points, config.seed);
    let ahlfors = measure.ahlfors_check(&sample_indices, &grid)?;
    let auto_lambda = ahlfors
        .lower_constant
        .is_finite()
        .then_some(ahlfors.lower_constant);
    let auto_c0 = ahlfors.upper_constant.is_finite().then_some(
        ahlfors
            .upper_constant
            .max(auto_lambda.unwrap_or(ahlfors.upper_constant)),
    );
    let lambda = config.lambda.resolve(auto_lambda, "lambda")?;
    let c0 = config.c0.resolve(auto_c0, "c0")?;
    if lambda > c0 {
        return Err(MengerError::InvalidParameter(format!(
            "resolved constants violate lambda <= C0: {lambda} > {c0}"
        )));
    }
    Ok(ResolvedRun {
        config: config.clone(),
        measure,
        sample_indices,
        grid,
        lambda,
        c0,
        ahlfors_lower: ahlfors.lower_constant,
        ahlfors_upper: ahlfors.upper_constant,
    })
}

fn choose_samples(n_points: usize, requested: usize, seed: u64) -> Vec<usize> {
    if requested == 0 || requested >= n_points {
        return (0..n_points).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = std::collections::BTreeSet::new();
    while chosen.len() < requested {
        chosen.insert(rng.random_range(0..n_points));
    }
    chosen.into_iter().collect()
}

#[derive(Debug, Serialize)]
pub struct PointSummary {
    pub index: usize,
    pub multiscale_sum: f64,
    pub covered_scales: usize,
    pub pointwise_curvature: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeSummary {
    pub config: RunConfig,
    pub points: usize,
    pub total_mass: f64,
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub resolved_lambda: f64,
    pub resolved_c0: f64,
    pub ahlfors_lower: f64,
    pub ahlfors_upper: f64,
    pub total_curvature: CurvatureReport,
    pub scaling_rel_error_affine: f64,
    pub scaling_rel_error_rescale: f64,
    pub per_point: Vec<PointSummary>,
}

/// Writes per-point beta profiles, curvature reports, density profiles, and a
/// summary JSON into `out_dir`.
pub fn cmd_analyze(config: &RunConfig, out_dir: &Path) -> Result<AnalyzeSummary> {
    let run = resolve(config)?;
    let mu = &run.measure;
    let integrand = config.integrand_spec()?;
    std::fs::create_dir_all(out_dir)?;

    let centered = true;
    let per_point: Vec<(usize, crate::beta::BetaProfile, CurvatureReport, Vec<f64>)> = run
        .sample_indices
        .par_iter()
        .map(|&i| {
            let x = mu.point(i);
            let profile = multiscale_beta_sum(mu, x, &run.grid, centered, config.p)?;
            let curv = pointwise_curvature(mu, x, integrand, run.grid.top_radius)?;
            let density = mu.density_profile(x, &run.grid)?;
            Ok((i, profile, curv, density.ratios))
        })
        .collect::<Result<_>>()?;

    // beta_profiles.csv
    let mut beta_csv = String::from("point,scale,radius,beta,beta_sq,flagged\n");
    for (i, profile, _, _) in &per_point {
        for (j, r) in profile.radii.iter().enumerate() {
            let (b, bsq) = match (profile.values[j], profile.values_sq[j]) {
                (Some(v), Some(sq)) => (format!("{v}"), format!("{sq}")),
                _ => (String::new(), String::new()),
            };
            beta_csv.push_str(&format!(
                "{i},{j},{r},{b},{bsq},{}\n",
                profile.flags[j] as u8
            ));
        }
    }
    write_text(out_dir.join("beta_profiles.csv"), &beta_csv)?;

    // density_profiles.csv
    let mut dens_csv = String::from("point,scale,radius,density_ratio\n");
    for (i, _, _, ratios) in &per_point {
        for (j, r) in run.grid.radii().iter().enumerate() {
            dens_csv.push_str(&format!("{i},{j},{r},{}\n", ratios[j]));
        }
    }
    write_text(out_dir.join("density_profiles.csv"), &dens_csv)?;

    // curvature.csv and curvature_reports.json
    let mut curv_csv = String::from("point,value,method,samples,stderr,seed\n");
    for (i, _, curv, _) in &per_point {
        let method = match curv.method {
            crate::curvature::Method::Exact => "exact",
            crate::curvature::Method::MonteCarlo => "monte_carlo",
        };
        curv_csv.push_str(&format!(
            "{i},{},{method},{},{},{}\n",
            curv.value, curv.samples, curv.stderr, curv.seed
        ));
    }
    write_text(out_dir.join("curvature.csv"), &curv_csv)?;
    let reports: Vec<&CurvatureReport> = per_point.iter().map(|(_, _, c, _)| c).collect();
    write_text(
        out_dir.join("curvature_reports.json"),
        &serde_json::to_string_pretty(&reports)?,
    )?;

    // Total curvature: exact when the budget allows, Monte Carlo otherwise.
    let arity = mu.intrinsic_dim() as i32 + 2;
    let total = if (mu.len() as f64).powi(arity) <= ENUM_BUDGET {
        integral_curvature_exact(mu, integrand)?
    } else {
        monte_carlo_curvature(mu, integrand, None, config.mc_samples, config.seed)?
    };

    // Scaling diagnostics on the loaded cloud (small clouds only; otherwise
    // reuse the Monte Carlo total and skip).
    let (aff_err, res_err) = if (mu.len() as f64).powi(arity) <= ENUM_BUDGET / 16.0 {
        let x0 = mu.point(0).to_vec();
        let chk = scaling_check(mu, &x0, run.grid.top_radius, 2.0, 3.0, integrand)?;
        (chk.affine_rel_error, chk.rescale_rel_error)
    } else {
        (f64::NAN, f64::NAN)
    };

    let summary = AnalyzeSummary {
        config: config.analysis_echo(),
        points: mu.len(),
        total_mass: mu.mass(),
        ambient_dim: mu.ambient_dim(),
        intrinsic_dim: mu.intrinsic_dim(),
        resolved_lambda: run.lambda,
        resolved_c0: run.c0,
        ahlfors_lower: run.ahlfors_lower,
        ahlfors_upper: run.ahlfors_upper,
        total_curvature: total,
        scaling_rel_error_affine: aff_err,
        scaling_rel_error_rescale: res_err,
        per_point: per_point
            .iter()
            .map(|(i, profile, curv, _)| PointSummary {
                index: *i,
                multiscale_sum: profile.multiscale_sum,
                covered_scales: profile.covered_scales,
                pointwise_curvature: curv.value,
            })
            .collect(),
    };
    write_text(
        out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub index: usize,
    pub beta_hat_sum: f64,
    pub covered_scales: usize,
    pub curv_k1: f64,
    pub curv_k2: f64,
    /// `beta_hat_sum / curv_k1`; infinite when the curvature vanishes.
    pub ratio_sum_k1: f64,
    pub ratio_sum_k2: f64,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub config: RunConfig,
    pub resolved_lambda: f64,
    pub resolved_c0: f64,
    pub delta: f64,
    pub lower_bound_sigma: f64,
    pub per_scale_constant: f64,
    pub multiscale_constant: f64,
    pub rows: Vec<CompareRow>,
    /// Exact `curv_k1 <= curv_k2` on every row.
    pub ordering_holds: bool,
    /// Per-scale squared-beta bound holds at every unflagged scale.
    pub per_scale_inequality_holds: bool,
    /// Summed inequality with the reported multiscale constant.
    pub multiscale_inequality_holds: bool,
}

/// Per sampled point: multiscale centered-beta sum, curvature under both
/// integrands, their ratios, and the empirical lower-bound table.
pub fn cmd_compare(config: &RunConfig, out_dir: &Path) -> Result<CompareSummary> {
    let run = resolve(config)?;
    let mu = &run.measure;
    std::fs::create_dir_all(out_dir)?;
    let k1 = IntegrandSpec::k1();
    let k2 = IntegrandSpec::k2();
    let n = mu.intrinsic_dim();
    let constants = selection_constants(n, mu.ambient_dim(), run.lambda, run.c0)?;
    let sigma = constants.delta / 3.0;
    let lb_grid = ScaleGrid::new(run.grid.top_radius, sigma, run.grid.len())?;

    struct PerPoint {
        index: usize,
        profile: crate::beta::BetaProfile,
        curv1: f64,
        curv2: f64,
        table: crate::selection::LowerBoundTable,
    }

    let rows: Vec<PerPoint> = run
        .sample_indices
        .par_iter()
        .map(|&i| {
            let x = mu.point(i);
            let profile = multiscale_beta_sum(mu, x, &run.grid, true, 2.0)?;
            let curv1 = pointwise_curvature(mu, x, k1, run.grid.top_radius)?.value;
            let curv2 = pointwise_curvature(mu, x, k2, run.grid.top_radius)?.value;
            let table = empirical_lower_bound(mu, x, &lb_grid, run.lambda, run.c0, k1)?;
            Ok(PerPoint {
                index: i,
                profile,
                curv1,
                curv2,
                table,
            })
        })
        .collect::<Result<_>>()?;

    let mut ordering = true;
    let mut per_scale = true;
    let mut multiscale = true;
    let mut compare_csv = String::from(
        "point,beta_hat_sum,covered_scales,curv_k1,curv_k2,ratio_sum_k1,ratio_sum_k2\n",
    );
    let mut lb_csv = String::from("point,scale,radius,lhs_beta_sq,rhs,ratio,flag\n");
    let mut out_rows = Vec::with_capacity(rows.len());
    for pp in &rows {
        if pp.curv1 > pp.curv2 * (1.0 + 1e-12) {
            ordering = false;
        }
        for row in &pp.table.rows {
            if row.flag.is_none() && row.lhs > row.rhs * (1.0 + 1e-9) {
                per_scale = false;
            }
            lb_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                pp.index,
                row.scale_index,
                row.radius,
                row.lhs,
                row.rhs,
                row.ratio,
                row.flag.as_deref().unwrap_or("")
            ));
        }
        if pp.table.total_lhs > pp.table.total_rhs * (1.0 + 1e-9) {
            multiscale = false;
        }
        let ratio1 = if pp.curv1 > 0.0 {
            pp.profile.multiscale_sum / pp.curv1
        } else {
            f64::INFINITY
        };
        let ratio2 = if pp.curv2 > 0.0 {
            pp.profile.multiscale_sum / pp.curv2
        } else {
            f64::INFINITY
        };
        compare_csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            pp.index,
            pp.profile.multiscale_sum,
            pp.profile.covered_scales,
            pp.curv1,
            pp.curv2,
            ratio1,
            ratio2
        ));
        out_rows.push(CompareRow {
            index: pp.index,
            beta_hat_sum: pp.profile.multiscale_sum,
            covered_scales: pp.profile.covered_scales,
            curv_k1: pp.curv1,
            curv_k2: pp.curv2,
            ratio_sum_k1: ratio1,
            ratio_sum_k2: ratio2,
        });
    }
    write_text(out_dir.join("compare.csv"), &compare_csv)?;
    write_text(out_dir.join("lower_bound.csv"), &lb_csv)?;

    let (per_scale_constant, multiscale_constant) = rows
        .first()
        .map(|pp| (pp.table.per_scale_constant, pp.table.multiscale_constant))
        .unwrap_or((f64::NAN, f64::NAN));
    let summary = CompareSummary {
        config: config.analysis_echo(),
        resolved_lambda: run.lambda,
        resolved_c0: run.c0,
        delta: constants.delta,
        lower_bound_sigma: sigma,
        per_scale_constant,
        multiscale_constant,
        rows: out_rows,
        ordering_holds: ordering,
        per_scale_inequality_holds: per_scale,
        multiscale_inequality_holds: multiscale,
    };
    write_text(
        out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

fn write_text(path: std::path::PathBuf, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
