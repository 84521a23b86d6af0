//! Models built from configuration, and the statistics the CLI computes.

use std::path::Path;

use adjwald_core::beta::{BetaAdapter, BetaOptions, BetaSpec};
use adjwald_core::glm::{signed_lr_root, DispersionPlugin, Family, GlmAdapter, GlmOptions, GlmSpec};
use adjwald_core::inference::{
    p_value, scale_adjusted_statistic, Alternative, BootstrapPlan, BootstrapPurpose, Reference, StatisticFamily,
};
use adjwald_core::numkit::RngStream;
use adjwald_core::wald::{location_adjusted_wald_for, InfoDerivatives, ParameterWald};
use adjwald_core::{DerivativePath, EstimatorKind, FitResult, Matrix, ModelAdapter, Resample, Result};

use crate::config::Config;
use crate::data::Dataset;
use crate::error::{CliError, CliResult};

/// The model family and design, before fitting.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Glm(GlmSpec),
    Beta(BetaSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub kind: EstimatorKind,
    /// Plug-in for ML fits with a free dispersion; `None` otherwise.
    pub dispersion: Option<DispersionPlugin>,
}

/// Shared model settings from `[model]`.
#[derive(Debug, Clone, Copy)]
pub struct ModelSettings {
    pub dispersion: DispersionPlugin,
    pub derivatives: DerivativePath,
}

impl ModelSettings {
    pub fn from_config(config: &Config) -> CliResult<Self> {
        Ok(ModelSettings {
            dispersion: parse_plugin(&config.model.dispersion)?,
            derivatives: match config.model.derivatives.as_str() {
                "analytic" => DerivativePath::Analytic,
                "numeric" => DerivativePath::Numeric,
                other => return Err(CliError::Config(format!("unknown derivatives path {other:?}"))),
            },
        })
    }
}

fn parse_plugin(s: &str) -> CliResult<DispersionPlugin> {
    match s {
        "pearson" => Ok(DispersionPlugin::Pearson),
        "ml" => Ok(DispersionPlugin::Ml),
        other => Err(CliError::Config(format!("unknown dispersion plug-in {other:?}"))),
    }
}

pub fn parse_alternative(s: &str) -> CliResult<Alternative> {
    match s {
        "two-sided" => Ok(Alternative::TwoSided),
        "less" => Ok(Alternative::Less),
        "greater" => Ok(Alternative::Greater),
        other => Err(CliError::Config(format!("unknown alternative {other:?}"))),
    }
}

impl ModelSpec {
    /// Reads the data file and assembles the model from `[data]` and `[model]`.
    pub fn from_config(config: &Config) -> CliResult<Self> {
        let path = config
            .data
            .path
            .as_deref()
            .ok_or_else(|| CliError::Config("no data file given (--data or [data] path)".into()))?;
        Self::from_dataset(config, &Dataset::read(Path::new(path))?)
    }

    pub fn from_dataset(config: &Config, data: &Dataset) -> CliResult<Self> {
        let d = &config.data;
        let family = config
            .model
            .family
            .as_deref()
            .ok_or_else(|| CliError::Config("no model family given (--family or [model] family)".into()))?;
        let response = d
            .response
            .as_deref()
            .ok_or_else(|| CliError::Config("no response column given".into()))?;
        let y = data.column(response)?.to_vec();
        let (x, names) = data.design(&d.mean, d.intercept)?;
        if family == "beta" {
            let (z, znames) = data.design(&d.precision, d.precision_intercept)?;
            let spec = BetaSpec::new(x, z, y)
                .and_then(|s| s.with_names(names, znames))
                .map_err(CliError::data)?;
            return Ok(ModelSpec::Beta(spec));
        }
        if !d.precision.is_empty() {
            return Err(CliError::Config("precision terms apply to beta regression only".into()));
        }
        let family = Family::parse(family).ok_or_else(|| CliError::Config(format!("unknown family {family:?}")))?;
        let mut spec = GlmSpec::new(family, x, y).map_err(CliError::data)?;
        if let Some(w) = &d.weights {
            spec = spec.with_weights(data.column(w)?.to_vec()).map_err(CliError::data)?;
        }
        Ok(ModelSpec::Glm(spec.with_names(names).map_err(CliError::data)?))
    }

    pub fn parameter_names(&self) -> Vec<String> {
        match self {
            ModelSpec::Glm(s) => s.parameter_names(),
            ModelSpec::Beta(s) => s.parameter_names(),
        }
    }

    /// Whether ML fits take a dispersion plug-in.
    pub fn has_plugin(&self) -> bool {
        matches!(self, ModelSpec::Glm(s) if s.has_dispersion_param())
    }

    /// Normalizes a variant: plug-ins only matter for ML fits with free dispersion.
    pub fn variant(&self, kind: EstimatorKind, dispersion: DispersionPlugin) -> Variant {
        let dispersion = (kind == EstimatorKind::Ml && self.has_plugin()).then_some(dispersion);
        Variant { kind, dispersion }
    }

    pub fn fit(&self, variant: Variant, settings: &ModelSettings) -> CliResult<AnyAdapter> {
        match self {
            ModelSpec::Glm(spec) => {
                let options = GlmOptions::default()
                    .with_kind(variant.kind)
                    .with_derivatives(settings.derivatives)
                    .with_dispersion(variant.dispersion.unwrap_or(settings.dispersion));
                GlmAdapter::new(spec.clone(), options).map(AnyAdapter::Glm)
            }
            ModelSpec::Beta(spec) => {
                BetaAdapter::new(spec.clone(), BetaOptions::default().with_kind(variant.kind)).map(AnyAdapter::Beta)
            }
        }
        .map_err(CliError::model)
    }

    /// Resolves `[inference] parameters` to indices.
    pub fn parameter_indices(&self, requested: &[String]) -> CliResult<Vec<usize>> {
        let names = self.parameter_names();
        if requested.is_empty() {
            return Ok((0..names.len()).collect());
        }
        requested
            .iter()
            .map(|r| {
                names
                    .iter()
                    .position(|n| n == r)
                    .or_else(|| r.parse::<usize>().ok().filter(|&j| j < names.len()))
                    .ok_or_else(|| CliError::Config(format!("unknown parameter {r:?}; parameters are {names:?}")))
            })
            .collect()
    }
}

/// Either fitted model behind one adapter type.
#[derive(Debug, Clone)]
pub enum AnyAdapter {
    Glm(GlmAdapter),
    Beta(BetaAdapter),
}

macro_rules! delegate {
    ($self:ident, $a:ident => $e:expr) => {
        match $self {
            AnyAdapter::Glm($a) => $e,
            AnyAdapter::Beta($a) => $e,
        }
    };
}

impl ModelAdapter for AnyAdapter {
    fn dim(&self) -> usize {
        delegate!(self, a => a.dim())
    }

    fn fit(&self) -> &FitResult {
        delegate!(self, a => a.fit())
    }

    fn info(&self, theta: &[f64]) -> Result<Matrix> {
        delegate!(self, a => a.info(theta))
    }

    fn bias(&self, theta: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, a => a.bias(theta))
    }

    fn info_derivatives(&self, theta: &[f64]) -> Option<Result<InfoDerivatives>> {
        delegate!(self, a => a.info_derivatives(theta))
    }

    fn diverged(&self, j: usize) -> bool {
        delegate!(self, a => a.diverged(j))
    }

    fn parameter_names(&self) -> Vec<String> {
        delegate!(self, a => a.parameter_names())
    }

    fn diff_specs(&self) -> (adjwald_core::numkit::DiffSpec, adjwald_core::numkit::DiffSpec) {
        delegate!(self, a => a.diff_specs())
    }
}

impl Resample for AnyAdapter {
    type Data = Vec<f64>;

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        delegate!(self, a => a.simulate(theta, rng))
    }

    fn refit(&self, data: Vec<f64>) -> Result<Self> {
        match self {
            AnyAdapter::Glm(a) => a.refit(data).map(AnyAdapter::Glm),
            AnyAdapter::Beta(a) => a.refit(data).map(AnyAdapter::Beta),
        }
    }
}

impl AnyAdapter {
    pub fn glm(&self) -> Option<&GlmAdapter> {
        match self {
            AnyAdapter::Glm(a) => Some(a),
            AnyAdapter::Beta(_) => None,
        }
    }

    /// The model behind this fit, with the data it was fitted to.
    pub fn model_spec(&self) -> ModelSpec {
        match self {
            AnyAdapter::Glm(a) => ModelSpec::Glm(a.spec().clone()),
            AnyAdapter::Beta(a) => ModelSpec::Beta(a.spec().clone()),
        }
    }

    /// Separation label for binomial GLM fits.
    pub fn separation(&self) -> Option<&'static str> {
        self.glm()?.glm_fit().separation.as_ref().map(|s| s.label())
    }

    pub fn standard_errors(&self) -> Vec<Option<f64>> {
        let theta = self.estimate();
        (0..self.dim())
            .map(|j| {
                if self.diverged(j) {
                    None
                } else {
                    adjwald_core::wald::kappa(self, theta, j).ok()
                }
            })
            .collect()
    }
}

/// One statistic column requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Wald {
        family: StatisticFamily,
        dispersion: Option<DispersionPlugin>,
    },
    /// Signed root of the likelihood-ratio statistic.
    Lr,
    /// Location-adjusted statistic divided by its bootstrap standard deviation.
    Scaled {
        family: StatisticFamily,
        dispersion: Option<DispersionPlugin>,
    },
}

impl Statistic {
    pub fn parse(token: &str) -> CliResult<Self> {
        let (base, suffix) = match token.split_once('@') {
            Some((b, s)) => (b, Some(parse_plugin(s)?)),
            None => (token, None),
        };
        let stat = match base {
            "r" => Statistic::Lr,
            "t**" => Statistic::Scaled {
                family: StatisticFamily::TStar,
                dispersion: suffix,
            },
            "t~**" => Statistic::Scaled {
                family: StatisticFamily::TTildeStar,
                dispersion: suffix,
            },
            other => Statistic::Wald {
                family: StatisticFamily::parse(other)
                    .ok_or_else(|| CliError::Config(format!("unknown statistic {token:?}")))?,
                dispersion: suffix,
            },
        };
        if suffix.is_some() && (stat.kind() != EstimatorKind::Ml || stat == Statistic::Lr) {
            return Err(CliError::Config(format!(
                "{token:?}: plug-in suffixes apply to ML statistics only"
            )));
        }
        Ok(stat)
    }

    /// Parses the requested tokens; none requested selects `default`.
    pub fn parse_list(tokens: &[String], default: &[&str]) -> CliResult<Vec<Self>> {
        if tokens.is_empty() {
            return default.iter().map(|t| Statistic::parse(t)).collect();
        }
        tokens.iter().map(|t| Statistic::parse(t.trim())).collect()
    }

    pub fn label(&self) -> String {
        let suffix = |d: &Option<DispersionPlugin>| match d {
            Some(DispersionPlugin::Ml) => "@ml",
            Some(DispersionPlugin::Pearson) => "@pearson",
            Some(DispersionPlugin::Rb) => "@rb",
            None => "",
        };
        match self {
            Statistic::Wald { family, dispersion } => format!("{}{}", family.label(), suffix(dispersion)),
            Statistic::Lr => "r".into(),
            Statistic::Scaled { family, dispersion } => format!("{}*{}", family.label(), suffix(dispersion)),
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            Statistic::Wald { family, .. } | Statistic::Scaled { family, .. } => family.kind(),
            Statistic::Lr => EstimatorKind::Ml,
        }
    }

    /// The fit this statistic is computed from.
    pub fn variant(&self, spec: &ModelSpec, settings: &ModelSettings) -> Variant {
        let d = match self {
            Statistic::Wald { dispersion, .. } | Statistic::Scaled { dispersion, .. } => *dispersion,
            Statistic::Lr => None,
        };
        spec.variant(self.kind(), d.unwrap_or(settings.dispersion))
    }

    pub fn family(&self) -> Option<StatisticFamily> {
        match self {
            Statistic::Wald { family, .. } | Statistic::Scaled { family, .. } => Some(*family),
            Statistic::Lr => None,
        }
    }
}

pub const DEFAULT_STATISTICS: [&str; 4] = ["t", "t*", "t~", "t~*"];

/// A statistic value with the context reported next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub estimate: f64,
    pub value: f64,
    pub se: Option<f64>,
    pub bias: Option<f64>,
    /// Zero-convention value for an infinite estimate.
    pub diverged: bool,
}

/// Bootstrap settings for `t**`.
#[derive(Debug, Clone, Copy)]
pub struct ScalePlan {
    pub replicates: usize,
    pub seed: u64,
}

impl ScalePlan {
    /// Plan for parameter `j`; each parameter and outer replicate gets its own stream.
    pub fn plan(&self, family: StatisticFamily, stream: u64) -> CliResult<BootstrapPlan> {
        let mut plan = BootstrapPlan::new(self.replicates, self.seed, family, BootstrapPurpose::Variance)
            .map_err(|e| CliError::Config(e.to_string()))?;
        plan.stream = stream;
        Ok(plan)
    }
}

/// Evaluates `stat` for parameter `j` at `psi0`, given the fitted variant.
pub fn evaluate(
    stat: Statistic,
    spec: &ModelSpec,
    adapter: &AnyAdapter,
    j: usize,
    psi0: f64,
    scale: Option<(ScalePlan, u64)>,
) -> Result<Evaluated> {
    evaluate_with(stat, spec, adapter, j, psi0, scale, None)
}

/// As [`evaluate`], reusing `row` (the location-adjusted row for `j` at
/// `psi0`) when the caller has already computed it for several parameters.
pub fn evaluate_with(
    stat: Statistic,
    spec: &ModelSpec,
    adapter: &AnyAdapter,
    j: usize,
    psi0: f64,
    scale: Option<(ScalePlan, u64)>,
    row: Option<&ParameterWald>,
) -> Result<Evaluated> {
    let wald = |adapter: &AnyAdapter| -> Result<ParameterWald> {
        if let Some(row) = row {
            return Ok(row.clone());
        }
        let mut nulls = vec![0.0; adapter.dim()];
        nulls[j] = psi0;
        let mut report = location_adjusted_wald_for(adapter, &nulls, &[j])?;
        report.rows.remove(0)
    };
    match stat {
        Statistic::Wald { family, .. } => {
            let w = wald(adapter)?;
            Ok(Evaluated {
                estimate: w.estimate,
                value: if family.adjusted() { w.t_star } else { w.t },
                se: Some(w.se).filter(|s| s.is_finite()),
                bias: family.adjusted().then_some(w.bias_b),
                diverged: w.diverged,
            })
        }
        Statistic::Lr => {
            let ModelSpec::Glm(glm) = spec else {
                return Err(adjwald_core::Error::InvalidSpec("r is available for GLMs only".into()));
            };
            if j >= glm.k() {
                return Err(adjwald_core::Error::InvalidSpec(
                    "r is available for regression coefficients only".into(),
                ));
            }
            Ok(Evaluated {
                estimate: adapter.estimate()[j],
                value: signed_lr_root(glm, j, psi0)?,
                se: None,
                bias: None,
                diverged: false,
            })
        }
        Statistic::Scaled { family, .. } => {
            let w = wald(adapter)?;
            if w.diverged {
                return Ok(Evaluated {
                    estimate: w.estimate,
                    value: 0.0,
                    se: None,
                    bias: None,
                    diverged: true,
                });
            }
            let (plan, stream) = scale.expect("scaled statistics need a bootstrap plan");
            let plan = plan
                .plan(family, stream)
                .map_err(|e| adjwald_core::Error::InvalidPlan(e.to_string()))?;
            Ok(Evaluated {
                estimate: w.estimate,
                value: scale_adjusted_statistic(adapter, j, psi0, &plan)?,
                se: Some(w.se),
                bias: Some(w.bias_b),
                diverged: false,
            })
        }
    }
}

pub fn normal_p_value(value: f64, alternative: Alternative) -> Option<f64> {
    p_value(value, alternative, Reference::StandardNormal).ok()
}
