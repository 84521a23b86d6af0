//! Wald transform, its first-order bias and the location-adjusted statistics.
//!
//! For a parameter of interest `ψ = θⱼ` the Wald transform is
//! `T(θ; ψ₀) = (θⱼ − ψ₀)/κⱼ(θ)` where `κⱼ(θ)² = [i(θ)⁻¹]ⱼⱼ`. Its estimator
//! `T(θ*; ψ₀)` has first-order bias
//!
//! ```text
//! B(θ; ψ₀) = b(θ)ᵀ ∇T + ½ tr{ i(θ)⁻¹ ∇∇ᵀT }
//! ```
//!
//! for ML estimates; for reduced-bias estimates the `b(θ)ᵀ∇T` term vanishes.
//! The gradient and hessian of `T` follow from those of `κⱼ`, which are taken
//! either from analytic information derivatives or by Richardson-extrapolated
//! numerical differentiation of `κ` itself.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::numkit::diff::{num_hessians, num_jacobian, DiffSpec};
use crate::numkit::linalg::{Cholesky, Matrix};
use crate::numkit::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// Maximum likelihood.
    Ml,
    /// Reduced-bias (mean bias-reducing adjusted score).
    Rb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativePath {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub kind: EstimatorKind,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Norm of the fitting objective's gradient (score or adjusted score) at `theta`.
    pub gradient_norm: f64,
}

/// First and second derivatives of the expected information.
#[derive(Debug, Clone)]
pub struct InfoDerivatives {
    /// `∂i/∂θᵤ`, one matrix per parameter.
    pub first: Vec<Matrix>,
    /// `∂²i/∂θᵤ∂θᵥ`, stored row-major (`u·p + v`).
    pub second: Vec<Matrix>,
}

impl InfoDerivatives {
    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn second(&self, u: usize, v: usize) -> &Matrix {
        &self.second[u * self.dim() + v]
    }
}

/// What the Wald machinery needs from a fitted model.
pub trait ModelAdapter {
    fn dim(&self) -> usize;

    /// The estimate `θ*` the statistics are computed at.
    fn fit(&self) -> &FitResult;

    /// Expected information `i(θ)`.
    fn info(&self, theta: &[f64]) -> Result<Matrix>;

    /// First-order bias `b(θ)` of the ML estimator (or a simulation-based
    /// substitute).
    fn bias(&self, theta: &[f64]) -> Result<Vec<f64>>;

    /// Analytic `∂i/∂θ` and `∂²i/∂θ∂θ`; `None` selects the numeric path.
    fn info_derivatives(&self, _theta: &[f64]) -> Option<Result<InfoDerivatives>> {
        None
    }

    /// Whether the estimate of parameter `j` is infinite.
    fn diverged(&self, _j: usize) -> bool {
        false
    }

    fn parameter_names(&self) -> Vec<String> {
        (1..=self.dim()).map(|j| format!("theta{j}")).collect()
    }

    /// Gradient and hessian settings for the numeric derivative path.
    fn diff_specs(&self) -> (DiffSpec, DiffSpec) {
        (DiffSpec::GRADIENT, DiffSpec::HESSIAN)
    }

    fn kind(&self) -> EstimatorKind {
        self.fit().kind
    }

    fn estimate(&self) -> &[f64] {
        &self.fit().theta
    }
}

/// Parametric resampling from a fitted model.
pub trait Resample: ModelAdapter + Sized {
    type Data;

    /// Draws a dataset from the model at `theta`.
    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Self::Data>;

    /// Refits the same model (same estimator, same options) to new data.
    fn refit(&self, data: Self::Data) -> Result<Self>;
}

/// `κⱼ` and its first two derivatives at some `θ`.
#[derive(Debug, Clone)]
pub struct KappaDerivatives {
    pub index: usize,
    pub kappa: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
    pub numeric: bool,
}

fn inverse_info<A: ModelAdapter + ?Sized>(adapter: &A, theta: &[f64]) -> Result<Matrix> {
    let info = adapter.info(theta)?;
    if info.nrows() != theta.len() {
        return Err(Error::DimensionMismatch(format!(
            "information is {}x{} for {} parameters",
            info.nrows(),
            info.ncols(),
            theta.len()
        )));
    }
    Ok(Cholesky::new(&info)?.inverse())
}

fn kappa_from_inverse(inv: &Matrix, j: usize) -> Result<f64> {
    let v = inv[(j, j)];
    if v > 0.0 && v.is_finite() {
        Ok(v.sqrt())
    } else {
        Err(Error::NotPositiveDefinite { row: j, pivot: v })
    }
}

/// `κⱼ(θ)`: square root of the `(j, j)` element of `i(θ)⁻¹`.
pub fn kappa<A: ModelAdapter + ?Sized>(adapter: &A, theta: &[f64], j: usize) -> Result<f64> {
    check_index(adapter, j)?;
    kappa_from_inverse(&inverse_info(adapter, theta)?, j)
}

fn check_index<A: ModelAdapter + ?Sized>(adapter: &A, j: usize) -> Result<()> {
    if j < adapter.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "parameter index {j} out of range for dimension {}",
            adapter.dim()
        )))
    }
}

/// Analytic `∇κⱼ` and `∇∇ᵀκⱼ` from the information derivatives.
pub fn kappa_derivatives_analytic(inv: &Matrix, derivs: &InfoDerivatives, j: usize) -> Result<KappaDerivatives> {
    let p = inv.nrows();
    if derivs.dim() != p || derivs.second.len() != p * p {
        return Err(Error::DimensionMismatch(format!(
            "information derivatives have dimension {} for {p} parameters",
            derivs.dim()
        )));
    }
    let kappa = kappa_from_inverse(inv, j)?;
    let mj = inv.column(j).into_owned();
    // yᵤ = (∂i/∂θᵤ) mⱼ and aᵤ = mⱼᵀ (∂i/∂θᵤ) mⱼ = [i⁻¹ ∂ᵤi i⁻¹]ⱼⱼ
    let ys: Vec<_> = derivs.first.iter().map(|d| d * &mj).collect();
    let a: Vec<f64> = ys.iter().map(|y| mj.dot(y)).collect();
    let gradient: Vec<f64> = a.iter().map(|au| -au / (2.0 * kappa)).collect();

    let mys: Vec<_> = ys.iter().map(|y| inv * y).collect();
    let mut hessian = Matrix::zeros(p, p);
    let k3 = kappa * kappa * kappa;
    for u in 0..p {
        for v in u..p {
            let cross = ys[v].dot(&mys[u]);
            let curv = mj.dot(&(derivs.second(u, v) * &mj));
            let h = -a[u] * a[v] / (4.0 * k3) + (cross - 0.5 * curv) / kappa;
            hessian[(u, v)] = h;
            hessian[(v, u)] = h;
        }
    }
    Ok(KappaDerivatives {
        index: j,
        kappa,
        gradient,
        hessian,
        numeric: false,
    })
}

/// Numeric `∇κⱼ`, `∇∇ᵀκⱼ` for every `j` in `indices` from one set of probes.
pub fn kappa_derivatives_numeric<A: ModelAdapter + ?Sized>(
    adapter: &A,
    theta: &[f64],
    indices: &[usize],
) -> Result<Vec<KappaDerivatives>> {
    let (gspec, hspec) = adapter.diff_specs();
    let kappas = |t: &[f64]| -> Result<Vec<f64>> {
        let inv = inverse_info(adapter, t)?;
        indices.iter().map(|&j| kappa_from_inverse(&inv, j)).collect()
    };
    let centre = kappas(theta)?;
    let jac = num_jacobian(kappas, theta, &gspec)?;
    let hess = num_hessians(kappas, theta, &hspec)?;
    Ok(indices
        .iter()
        .zip(centre)
        .zip(jac.into_iter().zip(hess))
        .map(|((&j, kappa), (gradient, hessian))| KappaDerivatives {
            index: j,
            kappa,
            gradient,
            hessian,
            numeric: true,
        })
        .collect())
}

/// Everything needed to evaluate `T(θ; ψ₀)`, its derivatives and its bias
/// for one parameter at a fixed `θ`, as a function of `ψ₀`.
#[derive(Debug, Clone)]
pub struct WaldSurface {
    pub index: usize,
    pub value: f64,
    pub kappa: KappaDerivatives,
    pub inv_info: Matrix,
    /// `b(θ)`, present when the bias term `bᵀ∇T` applies (ML estimates).
    pub bias: Option<Vec<f64>>,
}

impl WaldSurface {
    pub fn se(&self) -> f64 {
        self.kappa.kappa
    }

    /// `T(θ; ψ₀)`.
    pub fn wald(&self, psi0: f64) -> f64 {
        (self.value - psi0) / self.kappa.kappa
    }

    /// `∇T = (eⱼ − T∇κ)/κ` and
    /// `∇∇ᵀT = −(∇κ∇Tᵀ + ∇T∇κᵀ + T∇∇ᵀκ)/κ`.
    pub fn transform_derivatives(&self, psi0: f64) -> (Vec<f64>, Matrix) {
        let k = &self.kappa;
        let t = self.wald(psi0);
        let p = k.gradient.len();
        let mut grad: Vec<f64> = k.gradient.iter().map(|g| -t * g / k.kappa).collect();
        grad[self.index] += 1.0 / k.kappa;
        let mut hess = Matrix::zeros(p, p);
        for u in 0..p {
            for v in 0..p {
                hess[(u, v)] = -(k.gradient[u] * grad[v] + grad[u] * k.gradient[v] + t * k.hessian[(u, v)]) / k.kappa;
            }
        }
        (grad, hess)
    }

    /// `B(θ; ψ₀)` when `bias` is present, `B̃(θ; ψ₀)` otherwise.
    pub fn bias_term(&self, psi0: f64) -> f64 {
        let (grad, hess) = self.transform_derivatives(psi0);
        let trace = self.inv_info.component_mul(&hess).sum();
        let linear = self
            .bias
            .as_ref()
            .map_or(0.0, |b| b.iter().zip(&grad).map(|(x, y)| x * y).sum());
        linear + 0.5 * trace
    }

    /// `T(θ; ψ₀) − B(θ; ψ₀)`.
    pub fn adjusted(&self, psi0: f64) -> f64 {
        self.wald(psi0) - self.bias_term(psi0)
    }
}

/// Precomputed quantities shared by every parameter at one `θ`.
struct Prepared {
    theta: Vec<f64>,
    inv: Matrix,
    bias: Option<Vec<f64>>,
    derivs: Option<InfoDerivatives>,
}

fn prepare<A: ModelAdapter + ?Sized>(adapter: &A, theta: &[f64], kind: EstimatorKind) -> Result<Prepared> {
    let inv = inverse_info(adapter, theta)?;
    let bias = match kind {
        EstimatorKind::Ml => {
            let b = adapter.bias(theta)?;
            if b.len() != theta.len() {
                return Err(Error::DimensionMismatch(format!(
                    "bias has length {} for {} parameters",
                    b.len(),
                    theta.len()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEvaluation);
            }
            Some(b)
        }
        EstimatorKind::Rb => None,
    };
    let derivs = adapter.info_derivatives(theta).transpose()?;
    Ok(Prepared {
        theta: theta.to_vec(),
        inv,
        bias,
        derivs,
    })
}

fn surfaces<A: ModelAdapter + ?Sized>(adapter: &A, prep: &Prepared, indices: &[usize]) -> Result<Vec<WaldSurface>> {
    let kappas = match &prep.derivs {
        Some(d) => indices
            .iter()
            .map(|&j| kappa_derivatives_analytic(&prep.inv, d, j))
            .collect::<Result<Vec<_>>>()?,
        None => kappa_derivatives_numeric(adapter, &prep.theta, indices)?,
    };
    Ok(kappas
        .into_iter()
        .map(|k| WaldSurface {
            index: k.index,
            value: prep.theta[k.index],
            kappa: k,
            inv_info: prep.inv.clone(),
            bias: prep.bias.clone(),
        })
        .collect())
}

/// Surface for parameter `j` at an arbitrary `θ`, with the bias term
/// selected by `kind`.
pub fn wald_surface_at<A: ModelAdapter + ?Sized>(
    adapter: &A,
    theta: &[f64],
    j: usize,
    kind: EstimatorKind,
) -> Result<WaldSurface> {
    check_index(adapter, j)?;
    let prep = prepare(adapter, theta, kind)?;
    Ok(surfaces(adapter, &prep, &[j])?.remove(0))
}

/// Surface for parameter `j` at the adapter's own estimate.
pub fn wald_surface<A: ModelAdapter + ?Sized>(adapter: &A, j: usize) -> Result<WaldSurface> {
    if adapter.diverged(j) {
        return Err(Error::InfiniteEstimate(j));
    }
    wald_surface_at(adapter, adapter.estimate(), j, adapter.kind())
}

/// Signed Wald statistic `(θ*ⱼ − ψ₀)/κⱼ(θ*)`.
pub fn wald_statistic<A: ModelAdapter + ?Sized>(adapter: &A, j: usize, psi0: f64) -> Result<f64> {
    check_index(adapter, j)?;
    if adapter.diverged(j) || !adapter.estimate()[j].is_finite() {
        return Err(Error::InfiniteEstimate(j));
    }
    let k = kappa(adapter, adapter.estimate(), j)?;
    Ok((adapter.estimate()[j] - psi0) / k)
}

/// `∇T(θ; ψ₀)` and `∇∇ᵀT(θ; ψ₀)` for parameter `j`.
pub fn wald_transform_derivatives<A: ModelAdapter + ?Sized>(
    adapter: &A,
    theta: &[f64],
    j: usize,
    psi0: f64,
) -> Result<(Vec<f64>, Matrix)> {
    let s = wald_surface_at(adapter, theta, j, EstimatorKind::Rb)?;
    Ok(s.transform_derivatives(psi0))
}

/// `B(θ; ψ₀)` (ML) or `B̃(θ; ψ₀)` (RB) for parameter `j`.
pub fn bias_b<A: ModelAdapter + ?Sized>(
    adapter: &A,
    theta: &[f64],
    j: usize,
    psi0: f64,
    kind: EstimatorKind,
) -> Result<f64> {
    Ok(wald_surface_at(adapter, theta, j, kind)?.bias_term(psi0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterWald {
    pub index: usize,
    pub name: String,
    pub estimate: f64,
    pub psi0: f64,
    pub se: f64,
    /// `t` (ML) or `t̃` (RB).
    pub t: f64,
    /// `B̂` (ML) or `B̃` (RB) evaluated at the estimate.
    pub bias_b: f64,
    /// `t − bias_b`.
    pub t_star: f64,
    pub numeric_derivatives: bool,
    /// Infinite estimate; `t = t* = 0` by convention.
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaldReport {
    pub kind: EstimatorKind,
    pub rows: Vec<Result<ParameterWald>>,
}

impl WaldReport {
    pub fn t(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.as_ref().ok().map(|p| p.t)).collect()
    }

    pub fn t_star(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.as_ref().ok().map(|p| p.t_star)).collect()
    }
}

fn diverged_row(names: &[String], j: usize, estimate: f64, psi0: f64) -> ParameterWald {
    ParameterWald {
        index: j,
        name: names[j].clone(),
        estimate,
        psi0,
        se: f64::NAN,
        t: 0.0,
        bias_b: 0.0,
        t_star: 0.0,
        numeric_derivatives: false,
        diverged: true,
    }
}

/// Location-adjusted Wald statistics for the parameters in `indices`.
///
/// `psi0` holds one null value per parameter of the model. Each parameter
/// is handled independently; a failure in one row does not affect the others.
pub fn location_adjusted_wald_for<A: ModelAdapter + ?Sized>(
    adapter: &A,
    psi0: &[f64],
    indices: &[usize],
) -> Result<WaldReport> {
    let p = adapter.dim();
    if psi0.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} null values for {p} parameters",
            psi0.len()
        )));
    }
    if let Some(&j) = indices.iter().find(|&&j| j >= p) {
        return Err(Error::DimensionMismatch(format!("parameter index {j} >= {p}")));
    }
    let kind = adapter.kind();
    let theta = adapter.estimate();
    let names = adapter.parameter_names();
    let live: Vec<usize> = indices.iter().copied().filter(|&j| !adapter.diverged(j)).collect();

    let computed: Result<Vec<WaldSurface>> = prepare(adapter, theta, kind).and_then(|prep| match &prep.derivs {
        Some(_) => Ok(live
            .iter()
            .map(|&j| surfaces(adapter, &prep, &[j]))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()),
        None => surfaces(adapter, &prep, &live),
    });

    let rows = match computed {
        Ok(surf) => {
            let mut by_index = surf.into_iter();
            indices
                .iter()
                .map(|&j| {
                    if adapter.diverged(j) {
                        return Ok(diverged_row(&names, j, theta[j], psi0[j]));
                    }
                    let s = by_index.next().expect("one surface per live index");
                    let t = s.wald(psi0[j]);
                    let b = s.bias_term(psi0[j]);
                    if !(t.is_finite() && b.is_finite()) {
                        return Err(Error::NonFiniteEvaluation);
                    }
                    Ok(ParameterWald {
                        index: j,
                        name: names[j].clone(),
                        estimate: theta[j],
                        psi0: psi0[j],
                        se: s.se(),
                        t,
                        bias_b: b,
                        t_star: t - b,
                        numeric_derivatives: s.kappa.numeric,
                        diverged: false,
                    })
                })
                .collect()
        }
        Err(e) => indices
            .iter()
            .map(|&j| {
                if adapter.diverged(j) {
                    Ok(diverged_row(&names, j, theta[j], psi0[j]))
                } else {
                    Err(e.clone())
                }
            })
            .collect(),
    };
    Ok(WaldReport { kind, rows })
}

/// Location-adjusted Wald statistics for every parameter.
pub fn location_adjusted_wald<A: ModelAdapter + ?Sized>(adapter: &A, psi0: &[f64]) -> Result<WaldReport> {
    let all: Vec<usize> = (0..adapter.dim()).collect();
    location_adjusted_wald_for(adapter, psi0, &all)
}

/// Null vector of zeros, the conventional default for hypothesis reports.
pub fn zero_nulls<A: ModelAdapter + ?Sized>(adapter: &A) -> Vec<f64> {
    vec![0.0; adapter.dim()]
}
