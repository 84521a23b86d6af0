//! GLM fits exposed through the generic Wald machinery.

use alloc::string::String;
use alloc::vec::Vec;

use super::bias::{coxsnell_bias, simulated_bias};
use super::fit::{fit_ml, fit_rb, split_theta, DispersionKind, GlmFit, GlmSpec};
use super::info::{expected_info, info_derivatives, observations};
use crate::error::{Error, Result};
use crate::numkit::diff::DiffSpec;
use crate::numkit::linalg::Matrix;
use crate::numkit::rng::RngStream;
use crate::wald::{DerivativePath, EstimatorKind, FitResult, InfoDerivatives, ModelAdapter, Resample};

/// Dispersion value placed in `θ*` for ML fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispersionPlugin {
    Ml,
    Pearson,
    Rb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasMethod {
    CoxSnell,
    /// Mean of `θ̂ − θ` over parametric replicates drawn from a seeded stream.
    Simulation {
        replicates: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmOptions {
    pub kind: EstimatorKind,
    pub derivatives: DerivativePath,
    /// Ignored for RB fits, which estimate `φ` jointly with `β`.
    pub dispersion: DispersionPlugin,
    pub bias: BiasMethod,
    pub gradient: DiffSpec,
    pub hessian: DiffSpec,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            kind: EstimatorKind::Ml,
            derivatives: DerivativePath::Analytic,
            dispersion: DispersionPlugin::Pearson,
            bias: BiasMethod::CoxSnell,
            gradient: DiffSpec::GRADIENT,
            hessian: DiffSpec::HESSIAN,
        }
    }
}

impl GlmOptions {
    pub fn with_kind(self, kind: EstimatorKind) -> Self {
        GlmOptions { kind, ..self }
    }

    pub fn with_derivatives(self, derivatives: DerivativePath) -> Self {
        GlmOptions { derivatives, ..self }
    }

    pub fn with_dispersion(self, dispersion: DispersionPlugin) -> Self {
        GlmOptions { dispersion, ..self }
    }

    pub fn with_bias(self, bias: BiasMethod) -> Self {
        GlmOptions { bias, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct GlmAdapter {
    spec: GlmSpec,
    glm: GlmFit,
    options: GlmOptions,
    result: FitResult,
}

impl GlmAdapter {
    pub fn new(spec: GlmSpec, options: GlmOptions) -> Result<Self> {
        let glm = match options.kind {
            EstimatorKind::Ml => fit_ml(&spec)?,
            EstimatorKind::Rb => fit_rb(&spec)?,
        };
        let mut theta = glm.beta.clone();
        if spec.has_dispersion_param() {
            let phi = match (options.kind, options.dispersion) {
                (EstimatorKind::Rb, _) => glm.dispersion(DispersionKind::Rb),
                (_, DispersionPlugin::Ml) => glm.dispersion(DispersionKind::Ml),
                (_, DispersionPlugin::Pearson) => glm.dispersion(DispersionKind::Pearson),
                (_, DispersionPlugin::Rb) => fit_rb(&spec)?.dispersion(DispersionKind::Rb),
            };
            theta.push(phi.ok_or_else(|| Error::spec("dispersion estimate unavailable"))?);
        }
        let result = FitResult {
            theta,
            kind: options.kind,
            loglik: glm.loglik,
            converged: glm.converged,
            iterations: glm.iterations,
            gradient_norm: glm.gradient_norm,
        };
        Ok(GlmAdapter {
            spec,
            glm,
            options,
            result,
        })
    }

    pub fn spec(&self) -> &GlmSpec {
        &self.spec
    }

    pub fn glm_fit(&self) -> &GlmFit {
        &self.glm
    }

    pub fn options(&self) -> &GlmOptions {
        &self.options
    }

    /// Same data and model with other options (refits).
    pub fn with_options(&self, options: GlmOptions) -> Result<Self> {
        GlmAdapter::new(self.spec.clone(), options)
    }
}

impl ModelAdapter for GlmAdapter {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn fit(&self) -> &FitResult {
        &self.result
    }

    fn info(&self, theta: &[f64]) -> Result<Matrix> {
        let (beta, phi) = split_theta(&self.spec, theta);
        if !(phi > 0.0) {
            return Err(Error::domain("dispersion must be positive"));
        }
        Ok(expected_info(&self.spec, &beta, phi))
    }

    fn bias(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let (beta, phi) = split_theta(&self.spec, theta);
        match self.options.bias {
            BiasMethod::CoxSnell => coxsnell_bias(&self.spec, &beta, phi),
            BiasMethod::Simulation { replicates, seed } => {
                simulated_bias(&self.spec, &beta, phi, replicates, &RngStream::new(seed, 0)).map(|r| r.0)
            }
        }
    }

    fn info_derivatives(&self, theta: &[f64]) -> Option<Result<InfoDerivatives>> {
        match self.options.derivatives {
            DerivativePath::Analytic => {
                let (beta, phi) = split_theta(&self.spec, theta);
                Some(Ok(info_derivatives(&self.spec, &beta, phi)))
            }
            DerivativePath::Numeric => None,
        }
    }

    fn diverged(&self, j: usize) -> bool {
        self.glm.diverged.get(j).copied().unwrap_or(false)
    }

    fn parameter_names(&self) -> Vec<String> {
        self.spec.parameter_names()
    }

    fn diff_specs(&self) -> (DiffSpec, DiffSpec) {
        (self.options.gradient, self.options.hessian)
    }
}

impl Resample for GlmAdapter {
    type Data = Vec<f64>;

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        let (beta, phi) = split_theta(&self.spec, theta);
        observations(&self.spec, &beta)
            .iter()
            .zip(&self.spec.weights)
            .map(|(o, &m)| {
                if m > 0.0 {
                    self.spec.family.simulate(o.mu, m, phi, rng)
                } else {
                    Ok(o.mu)
                }
            })
            .collect()
    }

    fn refit(&self, data: Vec<f64>) -> Result<Self> {
        GlmAdapter::new(self.spec.with_response(data), self.options)
    }
}
