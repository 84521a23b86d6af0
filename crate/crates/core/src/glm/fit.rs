//! Model specification, IRLS maximum likelihood, dispersion estimators and
//! reduced-bias fitting by bias-corrected Fisher scoring.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::bias::coxsnell_bias;
use super::family::Family;
use super::info::{expected_info, observations, weighted_crossprod};
use super::separation::{detect_separation, Separation};
use crate::error::{Error, Result};
use crate::numkit::linalg::{has_full_column_rank, Cholesky, Matrix};
use crate::numkit::special::{digamma_raw, polygamma_raw};
use crate::wald::EstimatorKind;

pub const FIT_MAX_ITERATIONS: usize = 100;
const SCORE_TOLERANCE: f64 = 1e-8;
const STEP_TOLERANCE: f64 = 1e-10;
const RB_STEP_TOLERANCE: f64 = 1e-8;
const RB_MAX_ITERATIONS: usize = 500;
const MAX_HALVINGS: usize = 30;
/// Fitted probabilities this close to 0 or 1 trigger the separation check.
const EXTREME_PROBABILITY: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GlmSpec {
    pub family: Family,
    x: Arc<Matrix>,
    pub y: Vec<f64>,
    /// Observation weights `mᵢ` (binomial trials for proportions).
    pub weights: Vec<f64>,
    pub offset: Vec<f64>,
    /// Known dispersion; `None` makes `φ` a free parameter.
    pub dispersion: Option<f64>,
    pub names: Vec<String>,
}

impl GlmSpec {
    /// Unit weights, zero offset, and `φ = 1` fixed for binomial and Poisson.
    pub fn new(family: Family, x: Matrix, y: Vec<f64>) -> Result<Self> {
        let n = x.nrows();
        let names = (1..=x.ncols()).map(|j| format!("beta{j}")).collect();
        let spec = GlmSpec {
            family,
            x: Arc::new(x),
            y,
            weights: vec![1.0; n],
            offset: vec![0.0; n],
            dispersion: if family.has_free_dispersion() { None } else { Some(1.0) },
            names,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.weights = weights;
        self.validate()?;
        Ok(self)
    }

    pub fn with_offset(mut self, offset: Vec<f64>) -> Result<Self> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dispersion(mut self, dispersion: Option<f64>) -> Result<Self> {
        self.dispersion = dispersion;
        self.validate()?;
        Ok(self)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        self.names = names;
        self.validate()?;
        Ok(self)
    }

    /// Same design with a new response.
    pub fn with_response(&self, y: Vec<f64>) -> Self {
        GlmSpec { y, ..self.clone() }
    }

    /// Same model with column `j` removed and `value·xⱼ` moved into the offset.
    pub fn fix_coefficient(&self, j: usize, value: f64) -> Result<Self> {
        let k = self.k();
        if j >= k {
            return Err(Error::DimensionMismatch(format!("coefficient {j} >= {k}")));
        }
        let x = self.x();
        let offset = (0..self.n()).map(|i| self.offset[i] + value * x[(i, j)]).collect();
        let reduced = x.clone().remove_column(j);
        let mut names = self.names.clone();
        names.remove(j);
        Ok(GlmSpec {
            family: self.family,
            x: Arc::new(reduced),
            y: self.y.clone(),
            weights: self.weights.clone(),
            offset,
            dispersion: self.dispersion,
            names,
        })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// Number of observations with positive weight.
    pub fn n_effective(&self) -> usize {
        self.weights.iter().filter(|&&m| m > 0.0).count()
    }

    pub fn has_dispersion_param(&self) -> bool {
        self.dispersion.is_none()
    }

    /// Length of `θ = (β, φ)` or `θ = β`.
    pub fn dim(&self) -> usize {
        self.k() + usize::from(self.has_dispersion_param())
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let mut names = self.names.clone();
        if self.has_dispersion_param() {
            names.push(String::from("dispersion"));
        }
        names
    }

    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n(), self.k());
        for (what, len) in [
            ("response", self.y.len()),
            ("weights", self.weights.len()),
            ("offset", self.offset.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch(format!(
                    "{what} has length {len}, design has {n} rows"
                )));
            }
        }
        if self.names.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {k} columns",
                self.names.len()
            )));
        }
        if k == 0 {
            return Err(Error::spec("model matrix has no columns"));
        }
        if self.n_effective() < k {
            return Err(Error::spec(format!(
                "{} usable observations for {k} coefficients",
                self.n_effective()
            )));
        }
        if let Some(phi) = self.dispersion {
            if !(phi > 0.0) || !phi.is_finite() {
                return Err(Error::spec(format!("dispersion {phi} must be positive")));
            }
        }
        if self.x.iter().any(|v| !v.is_finite()) || self.offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::spec("model matrix or offset has non-finite entries"));
        }
        for i in 0..n {
            self.family.check_response(i, self.y[i], self.weights[i])?;
        }
        if has_full_column_rank(&self.x, |i| self.weights[i] > 0.0) {
            Ok(())
        } else {
            Err(Error::spec("model matrix is not of full column rank"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionKind {
    Ml,
    Pearson,
    Rb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEstimate {
    pub value: f64,
    pub kind: DispersionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmFit {
    pub kind: EstimatorKind,
    pub beta: Vec<f64>,
    /// ML and Pearson estimates for ML fits, the joint estimate for RB fits;
    /// empty when the dispersion is known.
    pub dispersion: Vec<DispersionEstimate>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Result of the separation check, when it ran.
    pub separation: Option<Separation>,
    /// Per-coefficient divergence of the ML estimate.
    pub diverged: Vec<bool>,
}

impl GlmFit {
    pub fn dispersion(&self, kind: DispersionKind) -> Option<f64> {
        self.dispersion.iter().find(|d| d.kind == kind).map(|d| d.value)
    }

    pub fn any_diverged(&self) -> bool {
        self.diverged.iter().any(|&d| d)
    }
}

pub(crate) fn loglik(spec: &GlmSpec, beta: &[f64], phi: f64) -> f64 {
    observations(spec, beta)
        .iter()
        .enumerate()
        .map(|(i, o)| spec.family.loglik(spec.y[i], o.mu, spec.weights[i], phi))
        .sum()
}

/// `∂ℓ/∂β` at dispersion `phi`.
pub(crate) fn beta_score(spec: &GlmSpec, beta: &[f64], phi: f64) -> Vec<f64> {
    let obs = observations(spec, beta);
    let x = spec.x();
    let mut u = vec![0.0; spec.k()];
    for (i, o) in obs.iter().enumerate() {
        let c = spec.weights[i] * (spec.y[i] - o.mu) * o.d / (o.v * phi);
        for (j, uj) in u.iter_mut().enumerate() {
            *uj += c * x[(i, j)];
        }
    }
    u
}

pub(crate) fn dispersion_score(spec: &GlmSpec, beta: &[f64], phi: f64) -> f64 {
    observations(spec, beta)
        .iter()
        .enumerate()
        .map(|(i, o)| spec.family.dispersion_score(spec.y[i], o.mu, spec.weights[i], phi))
        .sum()
}

/// Pearson moment estimate `Σ mᵢ(yᵢ − μᵢ)²/{(n − k)V(μᵢ)}`.
pub fn pearson_dispersion(spec: &GlmSpec, beta: &[f64]) -> Result<f64> {
    let dof = spec.n_effective() as f64 - spec.k() as f64;
    if dof <= 0.0 {
        return Err(Error::spec("no residual degrees of freedom for the Pearson dispersion"));
    }
    let obs = observations(spec, beta);
    let ss: f64 = obs
        .iter()
        .enumerate()
        .map(|(i, o)| spec.weights[i] * (spec.y[i] - o.mu).powi(2) / o.v)
        .sum();
    Ok(ss / dof)
}

/// ML estimate of `φ` at fixed `β`.
pub fn ml_dispersion(spec: &GlmSpec, beta: &[f64]) -> Result<f64> {
    let obs = observations(spec, beta);
    match spec.family {
        Family::GaussianIdentity => {
            let ss: f64 = obs
                .iter()
                .enumerate()
                .map(|(i, o)| spec.weights[i] * (spec.y[i] - o.mu).powi(2))
                .sum();
            let phi = ss / spec.n_effective() as f64;
            if phi > 0.0 {
                Ok(phi)
            } else {
                Err(Error::domain("zero residual variance"))
            }
        }
        Family::GammaLog => gamma_ml_dispersion(spec, &obs),
        _ => Err(Error::spec("family has no free dispersion")),
    }
}

/// Solves `Σ mᵢ{log νᵢ − ψ(νᵢ)} = Σ mᵢ{yᵢ/μᵢ − 1 − log(yᵢ/μᵢ)}`, `νᵢ = mᵢ/φ`,
/// by Newton steps on `log φ` safeguarded by bisection.
fn gamma_ml_dispersion(spec: &GlmSpec, obs: &[super::info::Observation]) -> Result<f64> {
    let rows: Vec<(f64, f64)> = obs
        .iter()
        .enumerate()
        .filter(|(i, _)| spec.weights[*i] > 0.0)
        .map(|(i, o)| {
            let q = spec.y[i] / o.mu;
            (spec.weights[i], q - 1.0 - q.ln())
        })
        .collect();
    let target: f64 = rows.iter().map(|(m, d)| m * d).sum();
    if !(target > 0.0) {
        return Err(Error::domain("gamma fit is exact; dispersion estimate is zero"));
    }
    let g = |t: f64| -> (f64, f64) {
        let phi = t.exp();
        let mut val = -target;
        let mut der = 0.0;
        for &(m, _) in &rows {
            let nu = m / phi;
            val += m * (nu.ln() - digamma_raw(nu));
            der += m * (nu * polygamma_raw(1, nu) - 1.0);
        }
        (val, der)
    };
    // log ν − ψ(ν) ≈ 1/(2ν) gives the starting point
    let mut t = (2.0 * target / rows.iter().map(|r| r.0).sum::<f64>()).ln();
    let (mut lo, mut hi) = (t - 1.0, t + 1.0);
    while g(lo).0 > 0.0 {
        lo -= 2.0;
        if lo < -700.0 {
            return Err(Error::domain("gamma dispersion root not bracketed"));
        }
    }
    while g(hi).0 < 0.0 {
        hi += 2.0;
        if hi > 700.0 {
            return Err(Error::domain("gamma dispersion root not bracketed"));
        }
    }
    for _ in 0..200 {
        let (val, der) = g(t);
        if val > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - val / der;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-14 * (1.0 + t.abs()) {
            return Ok(next.exp());
        }
        t = next;
    }
    Ok(t.exp())
}

/// One weighted least-squares solve for `β`.
fn wls(spec: &GlmSpec, w: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let x = spec.x();
    let xtwx = weighted_crossprod(x, |i| w[i]);
    let mut rhs = vec![0.0; spec.k()];
    for i in 0..spec.n() {
        for (j, r) in rhs.iter_mut().enumerate() {
            *r += x[(i, j)] * w[i] * z[i];
        }
    }
    Cholesky::new(&xtwx)?.solve_vec_in_place(&mut rhs);
    if rhs.iter().all(|v| v.is_finite()) {
        Ok(rhs)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Coefficients from one IRLS step started at the family's initial means.
pub(crate) fn start_beta(spec: &GlmSpec) -> Result<Vec<f64>> {
    let fam = spec.family;
    let (mut w, mut z) = (vec![0.0; spec.n()], vec![0.0; spec.n()]);
    for i in 0..spec.n() {
        let mu = fam.initial_mean(spec.y[i], spec.weights[i]);
        let eta = fam.link(mu);
        let lp = fam.link_point(eta);
        let (v, _, _) = fam.variance(lp.mu);
        w[i] = spec.weights[i] * lp.d * lp.d / v;
        z[i] = eta - spec.offset[i] + (spec.y[i] - lp.mu) / lp.d;
    }
    wls(spec, &w, &z)
}

struct Irls {
    beta: Vec<f64>,
    loglik: f64,
    converged: bool,
    iterations: usize,
    gradient_norm: f64,
}

fn irls(spec: &GlmSpec) -> Result<Irls> {
    let phi = spec.dispersion.unwrap_or(1.0);
    let n = spec.n();
    let mut beta = start_beta(spec)?;
    let mut ll = loglik(spec, &beta, phi);
    let mut gradient_norm = f64::INFINITY;
    for iter in 1..=FIT_MAX_ITERATIONS {
        let obs = observations(spec, &beta);
        let (mut w, mut z) = (vec![0.0; n], vec![0.0; n]);
        for (i, o) in obs.iter().enumerate() {
            w[i] = o.w;
            z[i] = o.eta - spec.offset[i] + (spec.y[i] - o.mu) / o.d;
        }
        let target = match wls(spec, &w, &z) {
            Ok(b) => b,
            Err(_) => {
                return Ok(Irls {
                    beta,
                    loglik: ll,
                    converged: false,
                    iterations: iter,
                    gradient_norm,
                })
            }
        };
        let mut cand = target;
        let mut cand_ll = loglik(spec, &cand, phi);
        let mut halvings = 0;
        while !(cand_ll >= ll - 1e-12 * ll.abs()) && halvings < MAX_HALVINGS {
            for (c, b) in cand.iter_mut().zip(&beta) {
                *c = 0.5 * (*c + b);
            }
            cand_ll = loglik(spec, &cand, phi);
            halvings += 1;
        }
        let step = cand.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        beta = cand;
        ll = cand_ll;
        gradient_norm = beta_score(spec, &beta, phi).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if gradient_norm <= SCORE_TOLERANCE * (1.0 + ll.abs()) || step <= STEP_TOLERANCE {
            return Ok(Irls {
                beta,
                loglik: ll,
                converged: true,
                iterations: iter,
                gradient_norm,
            });
        }
    }
    Ok(Irls {
        beta,
        loglik: ll,
        converged: false,
        iterations: FIT_MAX_ITERATIONS,
        gradient_norm,
    })
}

fn separation_suspected(spec: &GlmSpec, fit: &Irls) -> bool {
    if !spec.family.is_binomial() {
        return false;
    }
    !fit.converged
        || observations(spec, &fit.beta)
            .iter()
            .zip(&spec.weights)
            .any(|(o, &m)| m > 0.0 && (o.mu < EXTREME_PROBABILITY || o.mu > 1.0 - EXTREME_PROBABILITY))
}

/// Maximum likelihood fit by IRLS. For binomial families with extreme
/// fitted probabilities the separation check runs and infinite estimates
/// are flagged instead of reported as a failure.
pub fn fit_ml(spec: &GlmSpec) -> Result<GlmFit> {
    spec.validate()?;
    let fit = irls(spec)?;
    let mut separation = None;
    let mut diverged = vec![false; spec.k()];
    if separation_suspected(spec, &fit) {
        let sep = match detect_separation(spec) {
            Ok(s) => s,
            Err(Error::LpCycleLimit) => Separation::heuristic(spec, &fit.beta),
            Err(e) => return Err(e),
        };
        for &j in sep.divergent() {
            diverged[j] = true;
        }
        separation = Some(sep);
    }
    let separated = separation.as_ref().is_some_and(|s| s.is_separated());
    if !fit.converged && !separated {
        return Err(Error::DidNotConverge {
            iterations: fit.iterations,
            gradient_norm: fit.gradient_norm,
            last: fit.beta,
        });
    }
    let mut dispersion = Vec::new();
    let mut ll = fit.loglik;
    if spec.has_dispersion_param() {
        let ml = ml_dispersion(spec, &fit.beta)?;
        dispersion.push(DispersionEstimate {
            value: ml,
            kind: DispersionKind::Ml,
        });
        dispersion.push(DispersionEstimate {
            value: pearson_dispersion(spec, &fit.beta)?,
            kind: DispersionKind::Pearson,
        });
        ll = loglik(spec, &fit.beta, ml);
    }
    Ok(GlmFit {
        kind: EstimatorKind::Ml,
        beta: fit.beta,
        dispersion,
        loglik: ll,
        converged: fit.converged,
        iterations: fit.iterations,
        gradient_norm: fit.gradient_norm,
        separation,
        diverged,
    })
}

/// `(β, φ)` as one vector, or `β` when the dispersion is known.
pub(crate) fn split_theta(spec: &GlmSpec, theta: &[f64]) -> (Vec<f64>, f64) {
    let k = spec.k();
    let phi = spec.dispersion.unwrap_or_else(|| theta[k]);
    (theta[..k].to_vec(), phi)
}

/// Score of `θ`.
pub(crate) fn score(spec: &GlmSpec, theta: &[f64]) -> Vec<f64> {
    let (beta, phi) = split_theta(spec, theta);
    let mut u = beta_score(spec, &beta, phi);
    if spec.has_dispersion_param() {
        u.push(dispersion_score(spec, &beta, phi));
    }
    u
}

/// Reduced-bias fit: iterates `θ ← θ + i(θ)⁻¹U(θ) − b(θ)`, whose fixed
/// point solves the mean bias-reducing adjusted score equations. Finite for
/// binomial models even under separation.
pub fn fit_rb(spec: &GlmSpec) -> Result<GlmFit> {
    spec.validate()?;
    let mut theta = match fit_ml(spec) {
        Ok(f) if !f.any_diverged() => {
            let mut t = f.beta.clone();
            if let Some(phi) = f.dispersion(DispersionKind::Ml) {
                t.push(phi);
            }
            t
        }
        _ => {
            let mut t = start_beta(spec)?;
            if spec.family.is_binomial() {
                t.iter_mut().for_each(|b| *b = b.clamp(-5.0, 5.0));
            }
            if spec.has_dispersion_param() {
                t.push(pearson_dispersion(spec, &t)?);
            }
            t
        }
    };
    let k = spec.k();
    let mut gradient_norm = f64::INFINITY;
    for iter in 1..=RB_MAX_ITERATIONS {
        let (beta, phi) = split_theta(spec, &theta);
        let info = expected_info(spec, &beta, phi);
        let chol = Cholesky::new(&info)?;
        let u = score(spec, &theta);
        let b = coxsnell_bias(spec, &beta, phi)?;
        let fb = &info * nalgebra::DVector::from_column_slice(&b);
        let mut step: Vec<f64> = u.iter().zip(fb.iter()).map(|(a, c)| a - c).collect();
        gradient_norm = step.iter().map(|v| v.abs()).fold(0.0, f64::max);
        chol.solve_vec_in_place(&mut step);
        let size = step.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !size.is_finite() {
            return Err(Error::NonFiniteEvaluation);
        }
        if size > 5.0 {
            step.iter_mut().for_each(|s| *s *= 5.0 / size);
        }
        let mut scale = 1.0;
        let mut halvings = 0;
        if spec.has_dispersion_param() {
            while theta[k] + scale * step[k] <= 0.0 && halvings < MAX_HALVINGS {
                scale *= 0.5;
                halvings += 1;
            }
        }
        for (t, s) in theta.iter_mut().zip(&step) {
            *t += scale * s;
        }
        if size * scale <= RB_STEP_TOLERANCE {
            let (beta, phi) = split_theta(spec, &theta);
            let dispersion = if spec.has_dispersion_param() {
                vec![DispersionEstimate {
                    value: phi,
                    kind: DispersionKind::Rb,
                }]
            } else {
                Vec::new()
            };
            return Ok(GlmFit {
                kind: EstimatorKind::Rb,
                loglik: loglik(spec, &beta, phi),
                beta,
                dispersion,
                converged: true,
                iterations: iter,
                gradient_norm,
                separation: None,
                diverged: vec![false; k],
            });
        }
    }
    Err(Error::DidNotConverge {
        iterations: RB_MAX_ITERATIONS,
        gradient_norm,
        last: theta,
    })
}
