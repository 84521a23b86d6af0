//! Beta regression with a logit link for the mean and a log link for the
//! precision.
//!
//! Each response has density `Beta(μφ, (1−μ)φ)` with `logit μᵢ = xᵢᵀβ` and
//! `log φᵢ = zᵢᵀγ`. Information and bias are assembled from the shape
//! parameters `(aᵢ, bᵢ) = (μᵢφᵢ, (1−μᵢ)φᵢ)`: in those coordinates the
//! observed information does not depend on the data, which makes the
//! expected information and the first-order bias closed-form.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::numkit::diff::DiffSpec;
use crate::numkit::linalg::{has_full_column_rank, Cholesky, Matrix};
use crate::numkit::rng::RngStream;
use crate::numkit::special::{digamma_raw, ln_gamma_raw, logistic, logit, polygamma_raw, trigamma_raw};
use crate::wald::{EstimatorKind, FitResult, ModelAdapter, Resample};

pub const BETA_MAX_ITERATIONS: usize = 100;
const RB_MAX_ITERATIONS: usize = 500;
const SCORE_TOLERANCE: f64 = 1e-8;
const STEP_TOLERANCE: f64 = 1e-10;
const RB_STEP_TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;
/// Largest scoring step, in the max-norm.
const MAX_STEP: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct BetaSpec {
    x: Arc<Matrix>,
    z: Arc<Matrix>,
    pub y: Vec<f64>,
    pub mean_names: Vec<String>,
    pub precision_names: Vec<String>,
}

impl BetaSpec {
    pub fn new(x: Matrix, z: Matrix, y: Vec<f64>) -> Result<Self> {
        let spec = BetaSpec {
            mean_names: (1..=x.ncols()).map(|j| format!("beta{j}")).collect(),
            precision_names: (1..=z.ncols()).map(|j| format!("gamma{j}")).collect(),
            x: Arc::new(x),
            z: Arc::new(z),
            y,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_names(mut self, mean: Vec<String>, precision: Vec<String>) -> Result<Self> {
        self.mean_names = mean;
        self.precision_names = precision;
        self.validate()?;
        Ok(self)
    }

    /// Same designs with another response (not validated; fits validate).
    pub fn with_response(&self, y: Vec<f64>) -> Self {
        BetaSpec { y, ..self.clone() }
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k_mean(&self) -> usize {
        self.x.ncols()
    }

    pub fn k_precision(&self) -> usize {
        self.z.ncols()
    }

    pub fn dim(&self) -> usize {
        self.k_mean() + self.k_precision()
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.mean_names.iter().map(|s| format!("mean:{s}")).collect();
        names.extend(self.precision_names.iter().map(|s| format!("precision:{s}")));
        names
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.z.nrows() != n || self.y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "mean design has {n} rows, precision design {}, response {}",
                self.z.nrows(),
                self.y.len()
            )));
        }
        if self.mean_names.len() != self.k_mean() || self.precision_names.len() != self.k_precision() {
            return Err(Error::DimensionMismatch(String::from(
                "coefficient names do not match the designs",
            )));
        }
        if self.k_mean() == 0 || self.k_precision() == 0 {
            return Err(Error::spec("both designs need at least one column"));
        }
        if n < self.dim() {
            return Err(Error::spec(format!("{n} observations for {} parameters", self.dim())));
        }
        if self.x.iter().chain(self.z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::spec("design has non-finite entries"));
        }
        for (row, &value) in self.y.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::BoundaryResponse { row, value });
            }
        }
        if !has_full_column_rank(&self.x, |_| true) {
            return Err(Error::spec("mean design is not of full column rank"));
        }
        if !has_full_column_rank(&self.z, |_| true) {
            return Err(Error::spec("precision design is not of full column rank"));
        }
        Ok(())
    }
}

/// Mean and precision coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaParams {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl BetaParams {
    pub fn split(spec: &BetaSpec, theta: &[f64]) -> Self {
        let k = spec.k_mean();
        BetaParams {
            beta: theta[..k].to_vec(),
            gamma: theta[k..].to_vec(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut t = self.beta.clone();
        t.extend_from_slice(&self.gamma);
        t
    }
}

/// Per-observation quantities: `μ`, `φ`, `dμ/dη`, and the Jacobian rows of
/// the shape parameters `(a, b)` with respect to `θ = (β, γ)`.
struct Point {
    mu: f64,
    phi: f64,
    d: f64,
    ja: Vec<f64>,
    jb: Vec<f64>,
}

fn points(spec: &BetaSpec, theta: &[f64]) -> Vec<Point> {
    let (k1, k2) = (spec.k_mean(), spec.k_precision());
    let (x, z) = (spec.x(), spec.z());
    (0..spec.n())
        .map(|i| {
            let eta: f64 = (0..k1).map(|j| x[(i, j)] * theta[j]).sum();
            let zeta: f64 = (0..k2).map(|j| z[(i, j)] * theta[k1 + j]).sum();
            let mu = logistic(eta);
            let phi = zeta.exp();
            let d = mu * (1.0 - mu);
            let mut ja = Vec::with_capacity(k1 + k2);
            let mut jb = Vec::with_capacity(k1 + k2);
            for j in 0..k1 {
                ja.push(phi * d * x[(i, j)]);
                jb.push(-phi * d * x[(i, j)]);
            }
            for j in 0..k2 {
                ja.push(mu * phi * z[(i, j)]);
                jb.push((1.0 - mu) * phi * z[(i, j)]);
            }
            Point { mu, phi, d, ja, jb }
        })
        .collect()
}

fn params_ok(pts: &[Point]) -> bool {
    pts.iter().all(|p| {
        let (a, b) = (p.mu * p.phi, (1.0 - p.mu) * p.phi);
        a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()
    })
}

/// Information of one observation in shape coordinates, `[[V₁₁, V₁₂], [V₁₂, V₂₂]]`.
fn shape_info(p: &Point) -> [f64; 3] {
    let (a, b) = (p.mu * p.phi, (1.0 - p.mu) * p.phi);
    let tp = trigamma_raw(p.phi);
    [trigamma_raw(a) - tp, trigamma_raw(b) - tp, -tp]
}

pub fn beta_loglik(spec: &BetaSpec, theta: &[f64]) -> f64 {
    let pts = points(spec, theta);
    if !params_ok(&pts) {
        return f64::NEG_INFINITY;
    }
    pts.iter()
        .zip(&spec.y)
        .map(|(p, &y)| {
            let (a, b) = (p.mu * p.phi, (1.0 - p.mu) * p.phi);
            ln_gamma_raw(p.phi) - ln_gamma_raw(a) - ln_gamma_raw(b) + (a - 1.0) * y.ln() + (b - 1.0) * (1.0 - y).ln()
        })
        .sum()
}

pub fn beta_score(spec: &BetaSpec, theta: &[f64]) -> Vec<f64> {
    let pts = points(spec, theta);
    let mut u = vec![0.0; spec.dim()];
    for (p, &y) in pts.iter().zip(&spec.y) {
        let (a, b) = (p.mu * p.phi, (1.0 - p.mu) * p.phi);
        let dp = digamma_raw(p.phi);
        let la = y.ln() - digamma_raw(a) + dp;
        let lb = (1.0 - y).ln() - digamma_raw(b) + dp;
        for (r, ur) in u.iter_mut().enumerate() {
            *ur += p.ja[r] * la + p.jb[r] * lb;
        }
    }
    u
}

/// Expected information `Σ JᵢᵀVᵢJᵢ` of `θ = (β, γ)`.
pub fn beta_expected_info(spec: &BetaSpec, theta: &[f64]) -> Result<Matrix> {
    let pts = points(spec, theta);
    if !params_ok(&pts) {
        return Err(Error::NonFiniteEvaluation);
    }
    let p = spec.dim();
    let mut info = Matrix::zeros(p, p);
    for pt in &pts {
        let [v11, v22, v12] = shape_info(pt);
        for r in 0..p {
            let (ar, br) = (pt.ja[r], pt.jb[r]);
            for s in 0..=r {
                let (a_s, b_s) = (pt.ja[s], pt.jb[s]);
                let val = v11 * ar * a_s + v22 * br * b_s + v12 * (ar * b_s + br * a_s);
                info[(r, s)] += val;
            }
        }
    }
    for r in 0..p {
        for s in 0..r {
            info[(s, r)] = info[(r, s)];
        }
    }
    if info.iter().all(|v| v.is_finite()) {
        Ok(info)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Second derivatives of the shape parameters with respect to `θ`,
/// contracted with a symmetric `M`: returns `(tr(M ∂²a), tr(M ∂²b))`.
fn shape_hessian_traces(spec: &BetaSpec, i: usize, pt: &Point, m: &Matrix) -> (f64, f64) {
    let (k1, k2) = (spec.k_mean(), spec.k_precision());
    let (x, z) = (spec.x(), spec.z());
    let quad = |r0: usize, rn: usize, c0: usize, cn: usize, rv: &dyn Fn(usize) -> f64, cv: &dyn Fn(usize) -> f64| {
        let mut acc = 0.0;
        for r in 0..rn {
            for c in 0..cn {
                acc += rv(r) * m[(r0 + r, c0 + c)] * cv(c);
            }
        }
        acc
    };
    let xi = |j: usize| x[(i, j)];
    let zi = |j: usize| z[(i, j)];
    let s_xx = quad(0, k1, 0, k1, &xi, &xi);
    let s_xz = quad(0, k1, k1, k2, &xi, &zi);
    let s_zz = quad(k1, k2, k1, k2, &zi, &zi);
    // a = μφ: ∂²a/∂β∂β = φ d′ xxᵀ, ∂²a/∂β∂γ = φ d xzᵀ, ∂²a/∂γ∂γ = μφ zzᵀ;
    // b = φ − a.
    let d1 = pt.d * (1.0 - 2.0 * pt.mu);
    let ta = pt.phi * (d1 * s_xx + 2.0 * pt.d * s_xz + pt.mu * s_zz);
    let tb = pt.phi * s_zz - ta;
    (ta, tb)
}

/// Closed-form first-order bias `b = i⁻¹v` of the ML estimator, where
/// `v_r = ½ Σᵢ Σ_{a} J_{ar} (Σ_{bc} ℓ_{abc} q_{bc} + Σ_{b} ℓ_{ab} tr(i⁻¹∂²b))`
/// with indices over the shape parameters, `q_{bc} = J_b i⁻¹ J_cᵀ`, and
/// `ℓ_{ab}`, `ℓ_{abc}` the (non-random) shape-coordinate derivatives of the
/// log-likelihood.
pub fn beta_bias_closed_form(spec: &BetaSpec, theta: &[f64]) -> Result<Vec<f64>> {
    let info = beta_expected_info(spec, theta)?;
    let chol = Cholesky::new(&info)?;
    let m = chol.inverse();
    let p = spec.dim();
    let mut v = vec![0.0; p];
    let pts = points(spec, theta);
    let mut mj = [vec![0.0; p], vec![0.0; p]];
    for (i, pt) in pts.iter().enumerate() {
        let (a, b) = (pt.mu * pt.phi, (1.0 - pt.mu) * pt.phi);
        let [v11, v22, v12] = shape_info(pt);
        // ℓ_ab = −V
        let l2 = [[-v11, -v12], [-v12, -v22]];
        let p2 = polygamma_raw(2, pt.phi);
        let l_aaa = -polygamma_raw(2, a) + p2;
        let l_bbb = -polygamma_raw(2, b) + p2;
        // ℓ_aab = ℓ_abb = ψ″(φ)
        let l3 = |u: usize, s: usize, t: usize| match u + s + t {
            0 => l_aaa,
            3 => l_bbb,
            _ => p2,
        };
        let js = [&pt.ja, &pt.jb];
        for (slot, jrow) in mj.iter_mut().zip(js) {
            for r in 0..p {
                slot[r] = (0..p).map(|c| m[(r, c)] * jrow[c]).sum();
            }
        }
        let mut q = [[0.0; 2]; 2];
        for u in 0..2 {
            for s in 0..2 {
                q[u][s] = (0..p).map(|r| js[u][r] * mj[s][r]).sum();
            }
        }
        let (ta, tb) = shape_hessian_traces(spec, i, pt, &m);
        let traces = [ta, tb];
        for u in 0..2 {
            let mut coef = 0.0;
            for s in 0..2 {
                for t in 0..2 {
                    coef += l3(u, s, t) * q[s][t];
                }
                coef += l2[u][s] * traces[s];
            }
            for r in 0..p {
                v[r] += 0.5 * js[u][r] * coef;
            }
        }
    }
    chol.solve_vec_in_place(&mut v);
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Simulation estimate of the ML bias at `θ`: mean of `θ̂ − θ` over
/// parametric replicates, with Monte Carlo standard errors. More than 5%
/// failed refits is an error.
pub fn beta_bias_simulated(
    spec: &BetaSpec,
    theta: &[f64],
    replicates: usize,
    rng: &RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = spec.dim();
    let mut sum = vec![0.0; p];
    let mut sumsq = vec![0.0; p];
    let mut ok = 0usize;
    for r in 0..replicates {
        let mut stream = rng.substream(r as u64);
        let y = simulate_response(spec, theta, &mut stream)?;
        let Ok(fit) = fit_beta_ml(&spec.with_response(y)) else {
            continue;
        };
        for u in 0..p {
            let d = fit.theta[u] - theta[u];
            sum[u] += d;
            sumsq[u] += d * d;
        }
        ok += 1;
    }
    let failed = replicates - ok;
    if ok < 2 || failed as f64 > 0.05 * replicates as f64 {
        return Err(Error::RefitFailures {
            failed,
            total: replicates,
        });
    }
    let nf = ok as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let se = (0..p)
        .map(|u| ((sumsq[u] / nf - mean[u] * mean[u]) / (nf - 1.0)).max(0.0).sqrt())
        .collect();
    Ok((mean, se))
}

fn simulate_response(spec: &BetaSpec, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    points(spec, theta)
        .iter()
        .map(|p| rng.draw_beta(p.mu * p.phi, (1.0 - p.mu) * p.phi))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaBiasMethod {
    ClosedForm,
    /// Mean of `θ̂ − θ` over parametric replicates drawn from a seeded stream.
    Simulation {
        replicates: usize,
        seed: u64,
    },
}

/// `β` from least squares of `logit(y)` on `X`; the precision intercept
/// from the implied per-observation precisions, other `γ` zero.
fn start(spec: &BetaSpec) -> Result<Vec<f64>> {
    let (n, k1) = (spec.n(), spec.k_mean());
    let x = spec.x();
    let ly: Vec<f64> = spec.y.iter().map(|&y| logit(y)).collect();
    let xtx = x.transpose() * x;
    let mut beta: Vec<f64> = (0..k1).map(|j| (0..n).map(|i| x[(i, j)] * ly[i]).sum()).collect();
    Cholesky::new(&xtx)?.solve_vec_in_place(&mut beta);
    let fitted: Vec<f64> = (0..n).map(|i| (0..k1).map(|j| x[(i, j)] * beta[j]).sum()).collect();
    let rss: f64 = (0..n).map(|i| (ly[i] - fitted[i]).powi(2)).sum();
    let dof = (n.saturating_sub(k1)).max(1) as f64;
    let mean_phi = (0..n)
        .map(|i| {
            let mu = logistic(fitted[i]);
            let d = mu * (1.0 - mu);
            let sigma2 = rss / (dof * (1.0 / d).powi(2));
            mu * (1.0 - mu) / sigma2 - 1.0
        })
        .sum::<f64>()
        / n as f64;
    let mut theta = beta;
    let mut gamma = vec![0.0; spec.k_precision()];
    gamma[0] = mean_phi.max(1.0).ln();
    // the first precision column is taken as the intercept only if it is constant
    let z = spec.z();
    if (0..n).any(|i| (z[(i, 0)] - z[(0, 0)]).abs() > 0.0) || z[(0, 0)] == 0.0 {
        gamma[0] = 0.0;
    } else {
        gamma[0] /= z[(0, 0)];
    }
    theta.extend(gamma);
    Ok(theta)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn cap(step: &mut [f64]) {
    let size = max_abs(step);
    if size > MAX_STEP {
        step.iter_mut().for_each(|s| *s *= MAX_STEP / size);
    }
}

/// Observed information `−∂²ℓ/∂θ∂θᵀ`: the expected information plus the
/// data-dependent term from the curvature of the shape parameters.
pub fn beta_observed_info(spec: &BetaSpec, theta: &[f64]) -> Result<Matrix> {
    let mut info = beta_expected_info(spec, theta)?;
    let (k1, k2) = (spec.k_mean(), spec.k_precision());
    let (x, z) = (spec.x(), spec.z());
    for (i, (p, &y)) in points(spec, theta).iter().zip(&spec.y).enumerate() {
        let (a, b) = (p.mu * p.phi, (1.0 - p.mu) * p.phi);
        let dp = digamma_raw(p.phi);
        let la = y.ln() - digamma_raw(a) + dp;
        let lb = (1.0 - y).ln() - digamma_raw(b) + dp;
        // ℓ_a ∂²a + ℓ_b ∂²b with b = φ − a
        let c = la - lb;
        let d1 = p.d * (1.0 - 2.0 * p.mu);
        for r in 0..k1 + k2 {
            for s in 0..k1 + k2 {
                let h = match (r < k1, s < k1) {
                    (true, true) => c * p.phi * d1 * x[(i, r)] * x[(i, s)],
                    (true, false) => c * p.phi * p.d * x[(i, r)] * z[(i, s - k1)],
                    (false, true) => c * p.phi * p.d * z[(i, r - k1)] * x[(i, s)],
                    (false, false) => (c * p.mu + lb) * p.phi * z[(i, r - k1)] * z[(i, s - k1)],
                };
                info[(r, s)] -= h;
            }
        }
    }
    if info.iter().all(|v| v.is_finite()) {
        Ok(info)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Maximum likelihood by Fisher scoring with step halving. Once the observed
/// information is positive definite, Newton steps replace the scoring steps
/// so the score is driven to `‖U‖ ≤ 1e-8` in few iterations.
pub fn fit_beta_ml(spec: &BetaSpec) -> Result<FitResult> {
    spec.validate()?;
    let mut theta = start(spec)?;
    let mut ll = beta_loglik(spec, &theta);
    let mut gradient_norm = f64::INFINITY;
    for iter in 1..=BETA_MAX_ITERATIONS {
        let u = beta_score(spec, &theta);
        gradient_norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gradient_norm <= SCORE_TOLERANCE {
            return Ok(fitted(theta, EstimatorKind::Ml, ll, iter - 1, gradient_norm));
        }
        let mut step = u;
        match beta_observed_info(spec, &theta).and_then(|h| Cholesky::new(&h)) {
            Ok(c) if !c.jittered() => c.solve_vec_in_place(&mut step),
            _ => Cholesky::new(&beta_expected_info(spec, &theta)?)?.solve_vec_in_place(&mut step),
        }
        cap(&mut step);
        let mut scale = 1.0;
        let mut cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
        let mut cand_ll = beta_loglik(spec, &cand);
        let mut halvings = 0;
        while !(cand_ll >= ll - 1e-12 * ll.abs()) && halvings < MAX_HALVINGS {
            scale *= 0.5;
            cand = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            cand_ll = beta_loglik(spec, &cand);
            halvings += 1;
        }
        if !cand_ll.is_finite() {
            break;
        }
        theta = cand;
        ll = cand_ll;
        if scale * max_abs(&step) <= STEP_TOLERANCE {
            let u = beta_score(spec, &theta);
            gradient_norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            return Ok(fitted(theta, EstimatorKind::Ml, ll, iter, gradient_norm));
        }
    }
    Err(Error::DidNotConverge {
        iterations: BETA_MAX_ITERATIONS,
        gradient_norm,
        last: theta,
    })
}

fn fitted(theta: Vec<f64>, kind: EstimatorKind, loglik: f64, iterations: usize, gradient_norm: f64) -> FitResult {
    FitResult {
        theta,
        kind,
        loglik,
        converged: true,
        iterations,
        gradient_norm,
    }
}

/// Bias of the ML estimator at `θ` by the selected method.
pub fn beta_bias(spec: &BetaSpec, theta: &[f64], method: BetaBiasMethod) -> Result<Vec<f64>> {
    match method {
        BetaBiasMethod::ClosedForm => beta_bias_closed_form(spec, theta),
        BetaBiasMethod::Simulation { replicates, seed } => {
            beta_bias_simulated(spec, theta, replicates, &RngStream::new(seed, 0)).map(|r| r.0)
        }
    }
}

/// Reduced-bias fit: iterates `θ ← θ + i(θ)⁻¹U(θ) − b(θ)` from the ML fit.
pub fn fit_beta_rb(spec: &BetaSpec, method: BetaBiasMethod) -> Result<FitResult> {
    let mut theta = fit_beta_ml(spec)?.theta;
    let mut gradient_norm = f64::INFINITY;
    for iter in 1..=RB_MAX_ITERATIONS {
        let info = beta_expected_info(spec, &theta)?;
        let u = beta_score(spec, &theta);
        let b = beta_bias(spec, &theta, method)?;
        let ib = &info * nalgebra::DVector::from_column_slice(&b);
        let mut step: Vec<f64> = u.iter().zip(ib.iter()).map(|(a, c)| a - c).collect();
        gradient_norm = max_abs(&step);
        Cholesky::new(&info)?.solve_vec_in_place(&mut step);
        if !step.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFiniteEvaluation);
        }
        cap(&mut step);
        for (t, s) in theta.iter_mut().zip(&step) {
            *t += s;
        }
        if max_abs(&step) <= RB_STEP_TOLERANCE {
            let ll = beta_loglik(spec, &theta);
            return Ok(fitted(theta, EstimatorKind::Rb, ll, iter, gradient_norm));
        }
    }
    Err(Error::DidNotConverge {
        iterations: RB_MAX_ITERATIONS,
        gradient_norm,
        last: theta,
    })
}

/// Standard errors `√diag(i(θ)⁻¹)`.
pub fn beta_standard_errors(spec: &BetaSpec, theta: &[f64]) -> Result<Vec<f64>> {
    let inv = Cholesky::new(&beta_expected_info(spec, theta)?)?.inverse();
    Ok((0..spec.dim()).map(|j| inv[(j, j)].sqrt()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOptions {
    pub kind: EstimatorKind,
    pub bias: BetaBiasMethod,
    pub gradient: DiffSpec,
    pub hessian: DiffSpec,
}

impl Default for BetaOptions {
    fn default() -> Self {
        BetaOptions {
            kind: EstimatorKind::Ml,
            bias: BetaBiasMethod::ClosedForm,
            gradient: DiffSpec::GRADIENT,
            hessian: DiffSpec::HESSIAN,
        }
    }
}

impl BetaOptions {
    pub fn with_kind(self, kind: EstimatorKind) -> Self {
        BetaOptions { kind, ..self }
    }

    pub fn with_bias(self, bias: BetaBiasMethod) -> Self {
        BetaOptions { bias, ..self }
    }

    pub fn with_diff_specs(self, gradient: DiffSpec, hessian: DiffSpec) -> Self {
        BetaOptions {
            gradient,
            hessian,
            ..self
        }
    }
}

/// Beta regression behind the generic Wald interface. Derivatives of `κ`
/// always come from numeric differentiation of the information.
#[derive(Debug, Clone)]
pub struct BetaAdapter {
    spec: BetaSpec,
    options: BetaOptions,
    result: FitResult,
}

impl BetaAdapter {
    pub fn new(spec: BetaSpec, options: BetaOptions) -> Result<Self> {
        let result = match options.kind {
            EstimatorKind::Ml => fit_beta_ml(&spec)?,
            EstimatorKind::Rb => fit_beta_rb(&spec, options.bias)?,
        };
        Ok(BetaAdapter { spec, options, result })
    }

    pub fn spec(&self) -> &BetaSpec {
        &self.spec
    }

    pub fn options(&self) -> &BetaOptions {
        &self.options
    }

    pub fn with_options(&self, options: BetaOptions) -> Result<Self> {
        BetaAdapter::new(self.spec.clone(), options)
    }

    pub fn standard_errors(&self) -> Result<Vec<f64>> {
        beta_standard_errors(&self.spec, &self.result.theta)
    }
}

impl ModelAdapter for BetaAdapter {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn fit(&self) -> &FitResult {
        &self.result
    }

    fn info(&self, theta: &[f64]) -> Result<Matrix> {
        beta_expected_info(&self.spec, theta)
    }

    fn bias(&self, theta: &[f64]) -> Result<Vec<f64>> {
        beta_bias(&self.spec, theta, self.options.bias)
    }

    fn parameter_names(&self) -> Vec<String> {
        self.spec.parameter_names()
    }

    fn diff_specs(&self) -> (DiffSpec, DiffSpec) {
        (self.options.gradient, self.options.hessian)
    }
}

impl Resample for BetaAdapter {
    type Data = Vec<f64>;

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        simulate_response(&self.spec, theta, rng)
    }

    fn refit(&self, data: Vec<f64>) -> Result<Self> {
        BetaAdapter::new(self.spec.with_response(data), self.options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intercept_only(y: Vec<f64>) -> BetaSpec {
        let n = y.len();
        BetaSpec::new(Matrix::from_element(n, 1, 1.0), Matrix::from_element(n, 1, 1.0), y).unwrap()
    }

    #[test]
    fn intercept_only_information_by_hand() {
        let spec = intercept_only(vec![0.2, 0.4, 0.5, 0.7]);
        let (eta, zeta) = (0.3_f64, 1.2_f64);
        let mu = 1.0 / (1.0 + (-eta).exp());
        let phi = zeta.exp();
        let (a, b) = (mu * phi, (1.0 - mu) * phi);
        let t = |x: f64| trigamma_raw(x);
        let d = mu * (1.0 - mu);
        // Var(log y/(1−y)) = ψ′(a)+ψ′(b), Cov(log y/(1−y), log(1−y)) = −ψ′(b),
        // Var(log(1−y)) = ψ′(b)−ψ′(φ); scores are φd·y* and φ(μy* + y†)
        let vs = t(a) + t(b);
        let i11 = 4.0 * phi * phi * d * d * vs;
        let i12 = 4.0 * phi * phi * d * (mu * vs - t(b));
        let i22 = 4.0 * phi * phi * (mu * mu * t(a) + (1.0 - mu).powi(2) * t(b) - t(phi));
        let info = beta_expected_info(&spec, &[eta, zeta]).unwrap();
        assert!((info[(0, 0)] - i11).abs() < 1e-10 * i11);
        assert!((info[(0, 1)] - i12).abs() < 1e-10 * i11);
        assert!((info[(1, 1)] - i22).abs() < 1e-10 * i22);
    }

    #[test]
    fn score_vanishes_at_fit() {
        let spec = intercept_only(vec![0.12, 0.35, 0.41, 0.5, 0.66, 0.73, 0.2]);
        let fit = fit_beta_ml(&spec).unwrap();
        assert!(max_abs(&beta_score(&spec, &fit.theta)) < 1e-8);
    }
}
