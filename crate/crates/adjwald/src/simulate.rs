//! Monte Carlo studies: coverage, rejection rates and null p-value
//! distributions of the statistics under a known generator.
//!
//! Replicate `r` draws from substream `r` of stream 0 of the seed, so the
//! output does not depend on how replicates are scheduled.

use adjwald_core::datasets::synthetic;
use adjwald_core::glm::{DispersionPlugin, Family, GlmSpec};
use adjwald_core::inference::{Alternative, StatisticFamily};
use adjwald_core::numkit::special::normal_quantile;
use adjwald_core::numkit::RngStream;
use adjwald_core::oneparam::{bernoulli_statistics, binomial_pmf, exponential_statistics, BernoulliSample};
use adjwald_core::wald::{location_adjusted_wald_for, WaldReport};
use adjwald_core::{EstimatorKind, ModelAdapter, Resample};
use rayon::prelude::*;

use crate::commands::Fitted;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::models::{
    evaluate, evaluate_with, normal_p_value, parse_alternative, AnyAdapter, ModelSettings, ModelSpec, ScalePlan,
    Statistic, Variant, DEFAULT_STATISTICS,
};
use crate::report::{Cell, Table};

/// Share of failed replicates above which a study is abandoned.
pub const MAX_FAILURE_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Value(f64),
    /// Infinite estimate; excluded from the summaries.
    Diverged,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Coverage,
    Rejection,
    PValue,
    Mean,
}

struct Targets {
    list: Vec<Target>,
    levels: Vec<f64>,
    alphas: Vec<f64>,
    points: Vec<f64>,
    alternative: Alternative,
}

impl Targets {
    fn from_config(config: &Config) -> CliResult<Self> {
        let list = config
            .simulate
            .targets
            .iter()
            .map(|t| match t.as_str() {
                "coverage" => Ok(Target::Coverage),
                "rejection" => Ok(Target::Rejection),
                "pvalue" => Ok(Target::PValue),
                "mean" => Ok(Target::Mean),
                other => Err(CliError::Config(format!("unknown simulation target {other:?}"))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if list.is_empty() {
            return Err(CliError::Config("no simulation targets".into()));
        }
        if config.simulate.pvalue_points.iter().any(|u| !(0.0..=1.0).contains(u)) {
            return Err(CliError::Config("pvalue_points must lie in [0, 1]".into()));
        }
        Ok(Targets {
            list,
            levels: config.simulate.levels.clone(),
            alphas: config.simulate.alphas.clone(),
            points: config.simulate.pvalue_points.clone(),
            alternative: parse_alternative(&config.inference.alternative)?,
        })
    }
}

/// Weighted values of one statistic; unit weights for simulation.
struct Draws {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl Draws {
    /// Estimate and Monte Carlo standard error of `E f(V)`.
    fn expectation(&self, f: impl Fn(f64) -> f64, proportion: bool) -> (f64, Option<f64>) {
        match &self.weights {
            Some(w) => (self.values.iter().zip(w).map(|(&v, &w)| w * f(v)).sum(), Some(0.0)),
            None => {
                let m = self.values.len() as f64;
                if m == 0.0 {
                    return (f64::NAN, None);
                }
                let fs: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
                let mean = fs.iter().sum::<f64>() / m;
                let var = if proportion {
                    mean * (1.0 - mean)
                } else if m > 1.0 {
                    fs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
                } else {
                    f64::NAN
                };
                (mean, Some((var / m).sqrt()))
            }
        }
    }
}

fn study_table() -> Table {
    Table::new(
        "simulate",
        &[
            "parameter",
            "statistic",
            "target",
            "nominal",
            "estimate",
            "mc_se",
            "requested",
            "successes",
            "failures",
            "diverged",
        ],
    )
}

/// Appends the target rows of one statistic.
fn summarize(
    table: &mut Table,
    parameter: &str,
    statistic: &str,
    draws: &Draws,
    targets: &Targets,
    accounting: [Cell; 4],
) {
    let p = |v: f64| normal_p_value(v, targets.alternative).unwrap_or(f64::NAN);
    let mut push = |target: &str, nominal: Option<f64>, (est, se): (f64, Option<f64>)| {
        let mut row = vec![
            Cell::text(parameter),
            Cell::text(statistic),
            Cell::text(target),
            Cell::opt(nominal),
            Cell::num(est),
            Cell::opt(se),
        ];
        row.extend(accounting.iter().cloned());
        table.push(row);
    };
    for target in &targets.list {
        match target {
            Target::Coverage => {
                for &level in &targets.levels {
                    let z = normal_quantile(0.5 + level / 2.0);
                    push(
                        "coverage",
                        Some(level),
                        draws.expectation(|v| f64::from(u8::from(v.abs() <= z)), true),
                    );
                }
            }
            Target::Rejection => {
                for &alpha in &targets.alphas {
                    push(
                        "rejection",
                        Some(alpha),
                        draws.expectation(|v| f64::from(u8::from(p(v) < alpha)), true),
                    );
                }
            }
            Target::PValue => {
                for &u in &targets.points {
                    push(
                        "pvalue-cdf",
                        Some(u),
                        draws.expectation(|v| f64::from(u8::from(p(v) <= u)), true),
                    );
                }
            }
            Target::Mean => push("mean", None, draws.expectation(|v| v, false)),
        }
    }
}

fn accounting(requested: usize, outcomes: &[Outcome]) -> [Cell; 4] {
    let failures = outcomes.iter().filter(|o| **o == Outcome::Failed).count();
    let diverged = outcomes.iter().filter(|o| **o == Outcome::Diverged).count();
    [
        Cell::count(requested),
        Cell::count(requested - failures),
        Cell::count(failures),
        Cell::count(diverged),
    ]
}

fn values(outcomes: &[Outcome]) -> Vec<f64> {
    outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Value(v) => Some(*v),
            _ => None,
        })
        .collect()
}

fn check_replicates(config: &Config) -> CliResult<usize> {
    let r = config.simulate.replicates;
    if r < 100 {
        return Err(CliError::Config(format!("{r} replicates; studies need at least 100")));
    }
    Ok(r)
}

fn check_failures(failed: usize, requested: usize) -> CliResult<()> {
    if failed as f64 > MAX_FAILURE_SHARE * requested as f64 {
        return Err(CliError::Model(format!(
            "{failed} of {requested} replicates failed (limit {}%)",
            MAX_FAILURE_SHARE * 100.0
        )));
    }
    Ok(())
}

pub fn simulate(config: &Config) -> CliResult<Table> {
    let mut table = match config.simulate.generator.as_str() {
        "fit" => fitted_study(config)?,
        "bernoulli" => bernoulli_study(config)?,
        "exponential" => exponential_study(config)?,
        "synthetic-batch" => synthetic_batch(config)?,
        other => return Err(CliError::Config(format!("unknown generator {other:?}"))),
    };
    table.meta("generator", Cell::text(&config.simulate.generator));
    table.meta("seed", Cell::Int(config.simulate.seed as i64));
    Ok(table)
}

/// A refit failed, or stopped short of convergence for a reason other than
/// an infinite estimate.
fn refit_ok(adapter: &AnyAdapter) -> bool {
    let diverged = adapter.glm().is_some_and(|g| g.glm_fit().any_diverged());
    adapter.fit().converged || diverged
}

/// Data are drawn from the ML fit to the configured dataset (with the ML
/// dispersion for GLMs); each statistic is evaluated at the true value.
fn fitted_study(config: &Config) -> CliResult<Table> {
    let replicates = check_replicates(config)?;
    let targets = Targets::from_config(config)?;
    let spec = ModelSpec::from_config(config)?;
    let settings = ModelSettings::from_config(config)?;
    let stats = Statistic::parse_list(&config.inference.statistics, &DEFAULT_STATISTICS)?;
    let indices = spec.parameter_indices(&config.inference.parameters)?;
    let scale = ScalePlan {
        replicates: config.bootstrap.replicates,
        seed: config.bootstrap.seed,
    };
    if stats.iter().any(|s| matches!(s, Statistic::Scaled { .. })) {
        scale.plan(StatisticFamily::TStar, 0)?;
    }
    let generator_variant = spec.variant(EstimatorKind::Ml, DispersionPlugin::Ml);
    let mut variants: Vec<Variant> = stats.iter().map(|s| s.variant(&spec, &settings)).collect();
    variants.push(generator_variant);
    let fitted = Fitted::new(spec, settings, &variants)?;
    let generator = fitted.get(generator_variant).map_err(CliError::Model)?;
    let truth = generator.estimate().to_vec();
    if truth.iter().any(|t| !t.is_finite()) || (0..truth.len()).any(|j| generator.diverged(j)) {
        return Err(CliError::Model("generator fit has infinite estimates".into()));
    }
    let bases: Vec<&AnyAdapter> = variants[..stats.len()]
        .iter()
        .map(|v| fitted.get(*v).map_err(CliError::Model))
        .collect::<CliResult<_>>()?;
    let dim = truth.len() as u64;
    let root = RngStream::new(config.simulate.seed, 0);

    let per_replicate: Vec<Option<Vec<Outcome>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = root.substream(r as u64);
            let data = generator.simulate(&truth, &mut rng).ok()?;
            // One refit per distinct variant.
            let mut refits: Vec<(Variant, AnyAdapter)> = Vec::new();
            for (base, v) in bases.iter().zip(&variants) {
                if refits.iter().all(|(u, _)| u != v) {
                    let a = base.refit(data.clone()).ok().filter(refit_ok)?;
                    refits.push((*v, a));
                }
            }
            // Location-adjusted rows for all tested parameters, one pass per refit.
            let reports: Vec<Option<WaldReport>> = refits
                .iter()
                .map(|(v, a)| {
                    let used = stats
                        .iter()
                        .zip(&variants)
                        .any(|(s, u)| u == v && !matches!(s, Statistic::Lr));
                    used.then(|| location_adjusted_wald_for(a, &truth, &indices).ok())
                        .flatten()
                })
                .collect();
            let mut out = Vec::with_capacity(indices.len() * stats.len());
            for (pos, &j) in indices.iter().enumerate() {
                for (stat, v) in stats.iter().zip(&variants) {
                    let k = refits.iter().position(|(u, _)| u == v).expect("refit above");
                    let a = &refits[k].1;
                    let row = reports[k].as_ref().and_then(|r| r.rows[pos].as_ref().ok());
                    let spec = a.model_spec();
                    let stream = 1 + r as u64 * dim + j as u64;
                    out.push(
                        match evaluate_with(*stat, &spec, a, j, truth[j], Some((scale, stream)), row) {
                            Ok(e) if e.diverged => Outcome::Diverged,
                            Ok(e) if e.value.is_finite() => Outcome::Value(e.value),
                            _ => Outcome::Failed,
                        },
                    );
                }
            }
            Some(out)
        })
        .collect();

    let failed = per_replicate.iter().filter(|r| r.is_none()).count();
    check_failures(failed, replicates)?;
    let names = fitted.spec.parameter_names();
    let mut table = study_table();
    let cells = indices.len() * stats.len();
    for c in 0..cells {
        let (j, stat) = (indices[c / stats.len()], stats[c % stats.len()]);
        let outcomes: Vec<Outcome> = per_replicate
            .iter()
            .map(|r| r.as_ref().map_or(Outcome::Failed, |o| o[c]))
            .collect();
        let draws = Draws {
            values: values(&outcomes),
            weights: None,
        };
        summarize(
            &mut table,
            &names[j],
            &stat.label(),
            &draws,
            &targets,
            accounting(replicates, &outcomes),
        );
    }
    for (j, name) in names.iter().enumerate() {
        table.meta(&format!("truth:{name}"), Cell::num(truth[j]));
    }
    table.meta("replicate_failures", Cell::count(failed));
    Ok(table)
}

fn wald_families(config: &Config, allowed: &[StatisticFamily]) -> CliResult<Vec<StatisticFamily>> {
    let default: Vec<&str> = allowed.iter().map(|f| f.label()).collect();
    Statistic::parse_list(&config.inference.statistics, &default)?
        .into_iter()
        .map(|s| match s {
            Statistic::Wald {
                family,
                dispersion: None,
            } if allowed.contains(&family) => Ok(family),
            other => Err(CliError::Config(format!(
                "statistic {} is not available for the {} generator",
                other.label(),
                config.simulate.generator
            ))),
        })
        .collect()
}

fn required_n(config: &Config) -> CliResult<u64> {
    match config.simulate.n {
        Some(n) if n > 0 => Ok(n),
        _ => Err(CliError::Config(format!(
            "the {} generator needs n > 0",
            config.simulate.generator
        ))),
    }
}

/// Log-odds of a Bernoulli probability, `θ₀ = theta`; statistics at the truth.
/// The exact mode replaces simulation by enumeration over the binomial count.
fn bernoulli_study(config: &Config) -> CliResult<Table> {
    let targets = Targets::from_config(config)?;
    let families = wald_families(config, &StatisticFamily::ALL)?;
    let n = required_n(config)?;
    let theta = config.simulate.theta.unwrap_or(0.0);
    let p = 1.0 / (1.0 + (-theta).exp());
    let stats_at = |k: u64| -> CliResult<_> {
        let sample = BernoulliSample::new(n, k).map_err(CliError::data)?;
        Ok(bernoulli_statistics(sample, theta))
    };
    let mut table = study_table();
    if config.simulate.exact {
        let weights = binomial_pmf(n, p);
        let all = (0..=n).map(stats_at).collect::<CliResult<Vec<_>>>()?;
        for family in families {
            let draws = Draws {
                values: all.iter().map(|s| s.get(family)).collect(),
                weights: Some(weights.clone()),
            };
            summarize(
                &mut table,
                "logodds",
                family.label(),
                &draws,
                &targets,
                [Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty],
            );
        }
        table.meta("mode", Cell::text("exact"));
    } else {
        let replicates = check_replicates(config)?;
        let root = RngStream::new(config.simulate.seed, 0);
        let ks: Vec<u64> = (0..replicates)
            .into_par_iter()
            .map(|r| root.substream(r as u64).draw_binomial(n, p).map_err(CliError::model))
            .collect::<CliResult<_>>()?;
        let all = ks.iter().map(|&k| stats_at(k)).collect::<CliResult<Vec<_>>>()?;
        for family in families {
            let outcomes: Vec<Outcome> = all.iter().map(|s| Outcome::Value(s.get(family))).collect();
            let draws = Draws {
                values: values(&outcomes),
                weights: None,
            };
            summarize(
                &mut table,
                "logodds",
                family.label(),
                &draws,
                &targets,
                accounting(replicates, &outcomes),
            );
        }
        table.meta("mode", Cell::text("simulation"));
    }
    table.meta("n", Cell::Int(n as i64));
    table.meta("theta", Cell::num(theta));
    Ok(table)
}

/// Exponential log-rate `θ` (mean `e^{−θ}`); the sample mean of `n` draws is
/// Gamma(n, n e^θ).
fn exponential_study(config: &Config) -> CliResult<Table> {
    if config.simulate.exact {
        return Err(CliError::Config("the exponential generator has no exact mode".into()));
    }
    let replicates = check_replicates(config)?;
    let targets = Targets::from_config(config)?;
    let families = wald_families(config, &[StatisticFamily::T, StatisticFamily::TStar])?;
    let n = required_n(config)?;
    let theta = config.simulate.theta.unwrap_or(0.0);
    let root = RngStream::new(config.simulate.seed, 0);
    let pairs: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mean = root
                .substream(r as u64)
                .draw_gamma(n as f64, n as f64 * theta.exp())
                .map_err(CliError::model)?;
            exponential_statistics(mean, n, theta).map_err(CliError::model)
        })
        .collect::<CliResult<_>>()?;
    let mut table = study_table();
    for family in families {
        let outcomes: Vec<Outcome> = pairs
            .iter()
            .map(|&(t, ts)| Outcome::Value(if family == StatisticFamily::T { t } else { ts }))
            .collect();
        let draws = Draws {
            values: values(&outcomes),
            weights: None,
        };
        summarize(
            &mut table,
            "lograte",
            family.label(),
            &draws,
            &targets,
            accounting(replicates, &outcomes),
        );
    }
    table.meta("n", Cell::Int(n as i64));
    table.meta("theta", Cell::num(theta));
    Ok(table)
}

/// Many small independent GLM fits ("voxels") with a binary last
/// covariate whose true coefficient is the tested null.
fn synthetic_batch(config: &Config) -> CliResult<Table> {
    let family_name = config.model.family.as_deref().unwrap_or("binomial-logit");
    let family = Family::parse(family_name)
        .ok_or_else(|| CliError::Config(format!("synthetic batches need a GLM family, got {family_name:?}")))?;
    let n = config.simulate.n.unwrap_or(50) as usize;
    let coefficients = if config.simulate.coefficients.is_empty() {
        vec![0.5, -0.5, 0.0]
    } else {
        config.simulate.coefficients.clone()
    };
    let k = coefficients.len();
    if k < 2 || n <= k {
        return Err(CliError::Config(
            "synthetic batches need at least 2 coefficients and n > their count".into(),
        ));
    }
    let settings = ModelSettings::from_config(config)?;
    let stats = Statistic::parse_list(&config.inference.statistics, &DEFAULT_STATISTICS)?;
    let alternative = parse_alternative(&config.inference.alternative)?;
    let tested = k - 1;
    let psi0 = coefficients[tested];
    let scale = ScalePlan {
        replicates: config.bootstrap.replicates,
        seed: config.bootstrap.seed,
    };
    let root = RngStream::new(config.simulate.seed, 0);

    let voxels: Vec<Vec<Vec<Cell>>> = (0..config.simulate.voxels)
        .into_par_iter()
        .map(|v| {
            let mut rng = root.substream(v as u64);
            let x = synthetic::design(n, k, true, &mut rng);
            let spec =
                synthetic::response(family, &x, &coefficients, 1.0, &mut rng).and_then(|y| GlmSpec::new(family, x, y));
            stats
                .iter()
                .map(|stat| {
                    let result = spec.clone().map_err(|e| e.to_string()).and_then(|glm| {
                        let spec = ModelSpec::Glm(glm);
                        let a = spec
                            .fit(stat.variant(&spec, &settings), &settings)
                            .map_err(|e| e.to_string())?;
                        evaluate(*stat, &spec, &a, tested, psi0, Some((scale, 1 + v as u64))).map_err(|e| e.to_string())
                    });
                    let mut row = vec![Cell::count(v), Cell::text(stat.label())];
                    match result {
                        Ok(e) => row.extend([
                            Cell::num(e.value),
                            Cell::opt(normal_p_value(e.value, alternative)),
                            Cell::text(if e.diverged { "diverged" } else { "" }),
                            Cell::Empty,
                        ]),
                        Err(e) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::text(e)]),
                    }
                    row
                })
                .collect()
        })
        .collect();
    let mut table = Table::new("simulate", &["voxel", "statistic", "value", "p_value", "flag", "error"]);
    for row in voxels.into_iter().flatten() {
        table.push(row);
    }
    table.meta("family", Cell::text(family.name()));
    table.meta("n", Cell::count(n));
    Ok(table)
}
