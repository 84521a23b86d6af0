//! `fit`, `wald` and `ci`.

use std::collections::HashMap;
use std::time::Instant;

use adjwald_core::inference::{
    bootstrap_replicate, invert_ci_adapter, scale_adjusted_from, studentized_bootstrap_ci_from, BootstrapPlan,
    BootstrapPurpose, BootstrapSample, GridSpec, StatisticFamily,
};
use adjwald_core::wald::kappa;
use adjwald_core::{EstimatorKind, ModelAdapter};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::models::{
    evaluate, normal_p_value, parse_alternative, AnyAdapter, Evaluated, ModelSettings, ModelSpec, ScalePlan, Statistic,
    Variant, DEFAULT_STATISTICS,
};
use crate::report::{Cell, Table};

/// A model with every fit the requested statistics need.
pub struct Fitted {
    pub spec: ModelSpec,
    pub settings: ModelSettings,
    fits: HashMap<Variant, Result<AnyAdapter, String>>,
}

impl Fitted {
    /// Fits each variant once. Fails with a model error when none succeeds.
    pub fn new(spec: ModelSpec, settings: ModelSettings, variants: &[Variant]) -> CliResult<Self> {
        let mut unique: Vec<Variant> = Vec::new();
        for v in variants {
            if !unique.contains(v) {
                unique.push(*v);
            }
        }
        let results: Vec<CliResult<AnyAdapter>> = unique.par_iter().map(|v| spec.fit(*v, &settings)).collect();
        if results.iter().all(|r| r.is_err()) {
            return Err(results.into_iter().find_map(Result::err).expect("at least one variant"));
        }
        let fits = unique
            .into_iter()
            .zip(results)
            .map(|(v, r)| (v, r.map_err(|e| e.message().to_string())))
            .collect();
        Ok(Fitted { spec, settings, fits })
    }

    pub fn get(&self, variant: Variant) -> Result<&AnyAdapter, String> {
        match self.fits.get(&variant) {
            Some(Ok(a)) => Ok(a),
            Some(Err(e)) => Err(e.clone()),
            None => Err("model variant was not fitted".into()),
        }
    }
}

/// Null values per selected parameter: none given means 0, one value is shared.
pub fn resolve_psi0(config: &Config, count: usize) -> CliResult<Vec<f64>> {
    match config.inference.psi0.len() {
        0 => Ok(vec![0.0; count]),
        1 => Ok(vec![config.inference.psi0[0]; count]),
        n if n == count => Ok(config.inference.psi0.clone()),
        n => Err(CliError::Config(format!("{n} psi0 values for {count} parameters"))),
    }
}

/// Bootstrap sample with replicates spread over the worker pool; the
/// result is identical to the sequential one.
pub fn parallel_bootstrap_sample(
    adapter: &AnyAdapter,
    j: usize,
    plan: &BootstrapPlan,
) -> adjwald_core::Result<BootstrapSample> {
    plan.validate()?;
    let results: Vec<_> = (0..plan.replicates)
        .into_par_iter()
        .map(|b| bootstrap_replicate(adapter, j, plan, b))
        .collect();
    BootstrapSample::collect(results)
}

pub fn fit(config: &Config) -> CliResult<Table> {
    let spec = ModelSpec::from_config(config)?;
    let settings = ModelSettings::from_config(config)?;
    let ml = spec.variant(EstimatorKind::Ml, settings.dispersion);
    let rb = spec.variant(EstimatorKind::Rb, settings.dispersion);
    let fitted = Fitted::new(spec, settings, &[ml, rb])?;
    // The ML fit is the primary one; an RB failure only blanks its rows.
    fitted.get(ml).map_err(CliError::Model)?;
    let names = fitted.spec.parameter_names();
    let mut table = Table::new(
        "fit",
        &[
            "estimator",
            "parameter",
            "estimate",
            "se",
            "diverged",
            "loglik",
            "converged",
            "iterations",
            "separation",
            "error",
        ],
    );
    for (label, variant) in [("ml", ml), ("rb", rb)] {
        match fitted.get(variant) {
            Ok(a) => {
                let se = a.standard_errors();
                let f = a.fit();
                for (j, name) in names.iter().enumerate() {
                    table.push(vec![
                        Cell::text(label),
                        Cell::text(name),
                        Cell::num(a.estimate()[j]),
                        Cell::opt(se[j]),
                        Cell::Bool(a.diverged(j)),
                        Cell::num(f.loglik),
                        Cell::Bool(f.converged),
                        Cell::count(f.iterations),
                        a.separation().map_or(Cell::Empty, Cell::text),
                        Cell::Empty,
                    ]);
                }
            }
            Err(e) => {
                for name in &names {
                    let mut row = vec![Cell::text(label), Cell::text(name)];
                    row.extend(std::iter::repeat_n(Cell::Empty, 7));
                    row.push(Cell::text(e.clone()));
                    table.push(row);
                }
            }
        }
    }
    if let Ok(AnyAdapter::Glm(g)) = fitted.get(ml) {
        table.meta("family", Cell::text(g.spec().family.name()));
    }
    table.meta(
        "observations",
        Cell::count(match &fitted.spec {
            ModelSpec::Glm(s) => s.n(),
            ModelSpec::Beta(s) => s.n(),
        }),
    );
    Ok(table)
}

pub fn wald(config: &Config) -> CliResult<Table> {
    let spec = ModelSpec::from_config(config)?;
    let settings = ModelSettings::from_config(config)?;
    let stats = Statistic::parse_list(&config.inference.statistics, &DEFAULT_STATISTICS)?;
    let alternative = parse_alternative(&config.inference.alternative)?;
    let indices = spec.parameter_indices(&config.inference.parameters)?;
    let psi0 = resolve_psi0(config, indices.len())?;
    let scale = ScalePlan {
        replicates: config.bootstrap.replicates,
        seed: config.bootstrap.seed,
    };
    if stats.iter().any(|s| matches!(s, Statistic::Scaled { .. })) {
        scale.plan(StatisticFamily::TStar, 0)?;
    }
    let variants: Vec<Variant> = stats.iter().map(|s| s.variant(&spec, &settings)).collect();
    let fitted = Fitted::new(spec, settings, &variants)?;
    let names = fitted.spec.parameter_names();

    let tasks: Vec<(usize, f64)> = indices.iter().copied().zip(psi0).collect();
    let blocks: Vec<Vec<(Vec<Cell>, f64)>> = tasks
        .par_iter()
        .map(|&(j, psi0)| {
            stats
                .iter()
                .zip(&variants)
                .map(|(&stat, &variant)| {
                    let start = Instant::now();
                    let result = fitted
                        .get(variant)
                        .and_then(|a| evaluate_cell(stat, &fitted.spec, a, j, psi0, scale).map_err(|e| e.to_string()));
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    let mut row = vec![Cell::text(&names[j]), Cell::text(stat.label())];
                    match result {
                        Ok(e) => row.extend([
                            Cell::num(e.estimate),
                            Cell::num(psi0),
                            Cell::num(e.value),
                            Cell::opt(e.se),
                            Cell::opt(e.bias),
                            Cell::opt(normal_p_value(e.value, alternative)),
                            Cell::text(if e.diverged { "diverged" } else { "" }),
                            Cell::Empty,
                        ]),
                        Err(msg) => {
                            row.extend([Cell::Empty, Cell::num(psi0)]);
                            row.extend(std::iter::repeat_n(Cell::Empty, 5));
                            row.push(Cell::text(msg));
                        }
                    }
                    (row, elapsed)
                })
                .collect()
        })
        .collect();

    let mut table = Table::new(
        "wald",
        &[
            "parameter",
            "statistic",
            "estimate",
            "psi0",
            "value",
            "se",
            "bias",
            "p_value",
            "flag",
            "error",
            "time_ms",
        ],
    );
    for (mut row, ms) in blocks.into_iter().flatten() {
        row.push(Cell::num(ms));
        table.push(row);
    }
    if !config.output.timing {
        table.drop_column("time_ms");
    }
    table.meta("alternative", Cell::text(&config.inference.alternative));
    Ok(table)
}

fn evaluate_cell(
    stat: Statistic,
    spec: &ModelSpec,
    adapter: &AnyAdapter,
    j: usize,
    psi0: f64,
    scale: ScalePlan,
) -> adjwald_core::Result<Evaluated> {
    if let Statistic::Scaled { family, .. } = stat {
        // Same value as the sequential path in `evaluate`, with the
        // bootstrap spread over the pool.
        let base = evaluate(
            Statistic::Wald {
                family,
                dispersion: None,
            },
            spec,
            adapter,
            j,
            psi0,
            None,
        )?;
        if base.diverged {
            return Ok(base);
        }
        let plan = scale
            .plan(family, j as u64)
            .map_err(|e| adjwald_core::Error::InvalidPlan(e.to_string()))?;
        let sample = parallel_bootstrap_sample(adapter, j, &plan)?;
        return Ok(Evaluated {
            value: scale_adjusted_from(adapter, j, psi0, &plan, &sample)?,
            ..base
        });
    }
    evaluate(stat, spec, adapter, j, psi0, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CiMethod {
    Normal,
    Studentized,
}

pub fn ci(config: &Config) -> CliResult<Table> {
    let spec = ModelSpec::from_config(config)?;
    let settings = ModelSettings::from_config(config)?;
    let stats = Statistic::parse_list(&config.inference.statistics, &DEFAULT_STATISTICS)?;
    if let Some(s) = stats.iter().find(|s| !matches!(s, Statistic::Wald { .. })) {
        return Err(CliError::Config(format!(
            "intervals are not available for {}",
            s.label()
        )));
    }
    let methods = match config.inference.method.as_str() {
        "normal" => vec![CiMethod::Normal],
        "studentized" => vec![CiMethod::Studentized],
        "both" => vec![CiMethod::Normal, CiMethod::Studentized],
        other => return Err(CliError::Config(format!("unknown interval method {other:?}"))),
    };
    let grid_override = match (config.inference.grid_points, config.inference.grid_half_width) {
        (None, None) => None,
        (p, h) => {
            let h = h.unwrap_or(GridSpec::DEFAULT_HALF_WIDTH_SE);
            if !(h > 0.0) {
                return Err(CliError::Config("grid_half_width must be positive".into()));
            }
            Some((p.unwrap_or(GridSpec::DEFAULT_POINTS), h))
        }
    };
    let quantile_plan = |family: StatisticFamily, j: usize| -> CliResult<BootstrapPlan> {
        let mut plan = BootstrapPlan::new(
            config.bootstrap.replicates,
            config.bootstrap.seed,
            family,
            BootstrapPurpose::Quantiles,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        plan.stream = j as u64;
        Ok(plan)
    };
    if methods.contains(&CiMethod::Studentized) {
        quantile_plan(StatisticFamily::T, 0)?;
    }
    let indices = spec.parameter_indices(&config.inference.parameters)?;
    let variants: Vec<Variant> = stats.iter().map(|s| s.variant(&spec, &settings)).collect();
    let fitted = Fitted::new(spec, settings, &variants)?;
    let names = fitted.spec.parameter_names();
    let levels = &config.inference.levels;

    let mut table = Table::new(
        "ci",
        &[
            "parameter",
            "statistic",
            "method",
            "level",
            "estimate",
            "lower",
            "upper",
            "crossings",
            "warning",
            "error",
        ],
    );
    let blocks: Vec<Vec<Vec<Cell>>> = indices
        .par_iter()
        .map(|&j| {
            let mut rows = Vec::new();
            for (stat, variant) in stats.iter().zip(&variants) {
                let family = stat.family().expect("checked above");
                let adapter = fitted.get(*variant);
                let grid = |a: &AnyAdapter| -> Option<adjwald_core::inference::GridSpec> {
                    let (points, h) = grid_override?;
                    let est = a.estimate()[j];
                    let se = kappa(a, a.estimate(), j).ok()?;
                    Some(GridSpec {
                        lower: est - h * se,
                        upper: est + h * se,
                        points,
                    })
                };
                for &method in &methods {
                    let sample = match (method, &adapter) {
                        (CiMethod::Studentized, Ok(a)) => {
                            Some(quantile_plan(family, j).map_err(|e| e.to_string()).and_then(|p| {
                                parallel_bootstrap_sample(a, j, &p)
                                    .map_err(|e| e.to_string())
                                    .map(|s| (p, s))
                            }))
                        }
                        _ => None,
                    };
                    for &level in levels {
                        let result = adapter.clone().and_then(|a| {
                            let ci = match method {
                                CiMethod::Normal => invert_ci_adapter(a, j, level, family, grid(a)),
                                CiMethod::Studentized => match sample.as_ref().expect("sample computed") {
                                    Ok((plan, s)) => studentized_bootstrap_ci_from(a, j, level, plan, s, grid(a)),
                                    Err(e) => return Err(e.clone()),
                                },
                            };
                            ci.map(|ci| (a.estimate()[j], ci)).map_err(|e| e.to_string())
                        });
                        let method_label = match method {
                            CiMethod::Normal => "normal",
                            CiMethod::Studentized => "studentized",
                        };
                        let mut row = vec![
                            Cell::text(&names[j]),
                            Cell::text(stat.label()),
                            Cell::text(method_label),
                            Cell::num(level),
                        ];
                        match result {
                            Ok((est, ci)) => row.extend([
                                Cell::num(est),
                                Cell::num(ci.lower),
                                Cell::num(ci.upper),
                                Cell::count(ci.crossings_found),
                                ci.warning.map_or(Cell::Empty, Cell::text),
                                Cell::Empty,
                            ]),
                            Err(e) => {
                                row.extend(std::iter::repeat_n(Cell::Empty, 5));
                                row.push(Cell::text(e));
                            }
                        }
                        rows.push(row);
                    }
                }
            }
            rows
        })
        .collect();
    for row in blocks.into_iter().flatten() {
        table.push(row);
    }
    if methods.contains(&CiMethod::Studentized) {
        table.meta("bootstrap_replicates", Cell::count(config.bootstrap.replicates));
        table.meta("bootstrap_seed", Cell::Int(config.bootstrap.seed as i64));
    }
    Ok(table)
}
