//! One-parameter models with closed forms: Bernoulli log-odds and the
//! exponential log-rate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::inference::{invert_ci, GridSpec, IntervalEstimate, IntervalMethod};
use crate::numkit::linalg::Matrix;
use crate::numkit::rng::RngStream;
use crate::numkit::special::{logistic, normal_quantile};
use crate::wald::{EstimatorKind, FitResult, InfoDerivatives, ModelAdapter, Resample};

/// `k` successes in `n` Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BernoulliSample {
    pub n: u64,
    pub successes: u64,
}

impl BernoulliSample {
    pub fn new(n: u64, successes: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if successes > n {
            return Err(Error::domain(format!("k = {successes} exceeds n = {n}")));
        }
        Ok(BernoulliSample { n, successes })
    }

    pub fn mean(&self) -> f64 {
        self.successes as f64 / self.n as f64
    }

    /// Whether all observations are equal, sending the ML estimate to ±∞.
    pub fn is_boundary(&self) -> bool {
        self.successes == 0 || self.successes == self.n
    }

    /// `a = 1/(2n)`, the shrinkage of the reduced-bias log-odds estimator.
    pub fn shrinkage(&self) -> f64 {
        0.5 / self.n as f64
    }

    /// `log{ȳ/(1−ȳ)}`, infinite at the boundary.
    pub fn ml_logodds(&self) -> f64 {
        let y = self.mean();
        (y / (1.0 - y)).ln()
    }

    /// `log{(ȳ+a)/(1−ȳ+a)}`, always finite.
    pub fn rb_logodds(&self) -> f64 {
        let (y, a) = (self.mean(), self.shrinkage());
        ((y + a) / (1.0 - y + a)).ln()
    }
}

/// The four Wald statistics for a log-odds null value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliStatistics {
    pub t: f64,
    pub t_star: f64,
    pub t_tilde: f64,
    pub t_tilde_star: f64,
}

impl BernoulliStatistics {
    pub fn get(&self, family: StatisticFamily) -> f64 {
        match family {
            StatisticFamily::T => self.t,
            StatisticFamily::TStar => self.t_star,
            StatisticFamily::TTilde => self.t_tilde,
            StatisticFamily::TTildeStar => self.t_tilde_star,
        }
    }
}

pub use crate::inference::StatisticFamily;

/// Closed-form `t`, `t*`, `t̃`, `t̃*` for `H₀: θ = θ₀`. At the boundary
/// `t = t* = 0` by convention.
pub fn bernoulli_statistics(sample: BernoulliSample, theta0: f64) -> BernoulliStatistics {
    let n = sample.n as f64;
    let y = sample.mean();
    let (t, t_star) = if sample.is_boundary() {
        (0.0, 0.0)
    } else {
        let s = n * (y - y * y);
        let d = sample.ml_logodds() - theta0;
        (s.sqrt() * d, (s.sqrt() + 0.125 / s.sqrt()) * d)
    };
    let a = sample.shrinkage();
    let (p, q) = (y + a, 1.0 - y + a);
    let theta = (p / q).ln();
    let d = theta - theta0;
    let t_tilde = (n * p * q).sqrt() / (1.0 + 2.0 * a) * d;
    let odds = p / q;
    let brace = odds * odds * (d - 4.0) - 6.0 * odds * d + d + 4.0;
    let scale = q.powf(1.5) / (8.0 * n.sqrt() * p.sqrt() * (1.0 + 2.0 * a));
    BernoulliStatistics {
        t,
        t_star,
        t_tilde,
        t_tilde_star: t_tilde - scale * brace,
    }
}

/// Bernoulli log-odds information `n e^θ/(1+e^θ)²`.
pub fn bernoulli_info(n: u64, theta: f64) -> f64 {
    let p = logistic(theta);
    n as f64 * p * (1.0 - p)
}

/// First-order bias `−(1+e^θ)(1−e^θ)/(2n e^θ)` of the ML log-odds.
pub fn bernoulli_bias(n: u64, theta: f64) -> f64 {
    // (1+e^θ)(1−e^θ)/e^θ = e^{−θ} − e^{θ}
    -((-theta).exp() - theta.exp()) / (2.0 * n as f64)
}

/// Exact null distribution of one statistic family.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactNullTable {
    pub theta0: f64,
    pub n: u64,
    pub family: StatisticFamily,
    /// `(statistic, probability)` for `k = 0..=n`.
    pub atoms: Vec<(f64, f64)>,
}

fn ln_choose(n: u64, k: u64) -> f64 {
    use crate::numkit::special::ln_gamma_raw;
    ln_gamma_raw(n as f64 + 1.0) - ln_gamma_raw(k as f64 + 1.0) - ln_gamma_raw((n - k) as f64 + 1.0)
}

/// Binomial probabilities `P(K = k)` for `k = 0..=n`, normalized.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 || p >= 1.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[if p <= 0.0 { 0 } else { n as usize }] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut v: Vec<f64> = (0..=n)
        .map(|k| (ln_choose(n, k) + k as f64 * lp + (n - k) as f64 * lq).exp())
        .collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

impl ExactNullTable {
    /// `G(z) = P(statistic ≤ z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        let g: f64 = self.atoms.iter().filter(|(s, _)| *s <= z).map(|(_, p)| p).sum();
        g.min(1.0)
    }

    /// `Φ⁻¹(G(z)) − z`, or `None` where `G(z)` is 0 or 1.
    pub fn normality_diagnostic(&self, z: f64) -> Option<f64> {
        let g = self.cdf(z);
        (g > 0.0 && g < 1.0 - 1e-15).then(|| normal_quantile(g) - z)
    }

    /// Range of `z` over which `G(z) ∈ (0, 1)`: `[min atom, max atom)`.
    pub fn interior(&self) -> (f64, f64) {
        let weighted = self.atoms.iter().filter(|(_, p)| *p > 0.0);
        let lo = weighted.clone().map(|a| a.0).fold(f64::INFINITY, f64::min);
        let hi = weighted.map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// Enumerates the null distribution of a statistic over `k = 0..=n`.
pub fn exact_null_distribution(n: u64, theta0: f64, family: StatisticFamily) -> Result<ExactNullTable> {
    if n == 0 || n > 1_000_000 {
        return Err(Error::domain(format!("n = {n} outside 1..=10^6")));
    }
    let pmf = binomial_pmf(n, logistic(theta0));
    let atoms = (0..=n)
        .zip(pmf)
        .map(|(k, p)| {
            let s = bernoulli_statistics(BernoulliSample { n, successes: k }, theta0);
            (s.get(family), p)
        })
        .collect();
    Ok(ExactNullTable {
        theta0,
        n,
        family,
        atoms,
    })
}

/// Confidence interval for the log-odds by inverting `t̃*`.
pub fn logodds_ci(sample: BernoulliSample, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    let centre = sample.rb_logodds();
    let se = 1.0 / bernoulli_info(sample.n, centre).sqrt();
    let z = normal_quantile(0.5 + level / 2.0);
    invert_ci(
        |theta0| Ok(bernoulli_statistics(sample, theta0).t_tilde_star),
        level,
        (-z, z),
        GridSpec::around(centre, se),
        IntervalMethod::NormalQuantile,
    )
}

/// Interval for the success probability: logistic transform of the
/// log-odds interval, so endpoints stay inside (0, 1).
pub fn proportion_ci(sample: BernoulliSample, level: f64) -> Result<IntervalEstimate> {
    let mut ci = logodds_ci(sample, level)?;
    ci.lower = logistic(ci.lower);
    ci.upper = logistic(ci.upper);
    Ok(ci)
}

/// "Add z²/2 successes and z²/2 failures" interval, clipped to [0, 1].
pub fn agresti_coull_ci(sample: BernoulliSample, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    let z = normal_quantile(0.5 + level / 2.0);
    let n_adj = sample.n as f64 + z * z;
    let p = (sample.successes as f64 + z * z / 2.0) / n_adj;
    let half = z * (p * (1.0 - p) / n_adj).sqrt();
    Ok(IntervalEstimate {
        lower: (p - half).max(0.0),
        upper: (p + half).min(1.0),
        level,
        method: IntervalMethod::AgrestiCoull,
        grid_used: None,
        crossings_found: 0,
        interpolation_residual: 0.0,
        warning: None,
    })
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("level {level} outside (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProportionMethod {
    TTildeStar,
    AgrestiCoull,
}

impl ProportionMethod {
    pub fn interval(self, sample: BernoulliSample, level: f64) -> Result<IntervalEstimate> {
        match self {
            ProportionMethod::TTildeStar => proportion_ci(sample, level),
            ProportionMethod::AgrestiCoull => agresti_coull_ci(sample, level),
        }
    }
}

/// Exact coverage and expected length of a proportion interval at `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePoint {
    pub p: f64,
    pub coverage: f64,
    pub expected_length: f64,
}

/// Coverage curve by enumeration over `k`, one interval per `k` reused
/// across the whole `p` grid.
pub fn exact_coverage(n: u64, level: f64, method: ProportionMethod, grid: &[f64]) -> Result<Vec<CoveragePoint>> {
    let intervals: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let ci = method.interval(BernoulliSample::new(n, k)?, level)?;
            Ok((ci.lower, ci.upper))
        })
        .collect::<Result<_>>()?;
    grid.iter()
        .map(|&p| {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain(format!("probability {p} outside (0, 1)")));
            }
            let pmf = binomial_pmf(n, p);
            let mut coverage = 0.0;
            let mut length = 0.0;
            for (w, &(lo, hi)) in pmf.iter().zip(&intervals) {
                if lo <= p && p <= hi {
                    coverage += w;
                }
                length += w * (hi - lo);
            }
            Ok(CoveragePoint {
                p,
                coverage,
                expected_length: length,
            })
        })
        .collect()
}

/// `n` equispaced probabilities spanning `[0.01, 0.99]`.
pub fn default_probability_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|i| 0.01 + 0.98 * i as f64 / (points - 1) as f64)
        .collect()
}

/// Exponential sample summarized by its mean `ȳ` and size `n`; the
/// parameter is the log-rate `θ`, so `E(Y) = e^{−θ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialSample {
    pub n: u64,
    pub mean: f64,
}

/// `t = −√n(log ȳ + θ₀)` and `t* = t − n^{−1/2}/2`.
pub fn exponential_statistics(mean: f64, n: u64, theta0: f64) -> Result<(f64, f64)> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!("sample mean {mean} must be positive")));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let rn = (n as f64).sqrt();
    let t = -rn * (mean.ln() + theta0);
    Ok((t, t - 0.5 / rn))
}

/// Bernoulli log-odds model as a generic adapter.
#[derive(Debug, Clone)]
pub struct BernoulliModel {
    sample: BernoulliSample,
    fit: FitResult,
}

impl BernoulliModel {
    pub fn new(sample: BernoulliSample, kind: EstimatorKind) -> Self {
        let theta = match kind {
            EstimatorKind::Ml => sample.ml_logodds(),
            EstimatorKind::Rb => sample.rb_logodds(),
        };
        let n = sample.n as f64;
        let loglik = if theta.is_finite() {
            sample.successes as f64 * theta - n * theta.exp().ln_1p()
        } else {
            0.0
        };
        BernoulliModel {
            sample,
            fit: FitResult {
                theta: vec![theta],
                kind,
                loglik,
                converged: theta.is_finite(),
                iterations: 0,
                gradient_norm: 0.0,
            },
        }
    }

    pub fn sample(&self) -> BernoulliSample {
        self.sample
    }
}

impl ModelAdapter for BernoulliModel {
    fn dim(&self) -> usize {
        1
    }

    fn fit(&self) -> &FitResult {
        &self.fit
    }

    fn info(&self, theta: &[f64]) -> Result<Matrix> {
        Ok(Matrix::from_element(1, 1, bernoulli_info(self.sample.n, theta[0])))
    }

    fn bias(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![bernoulli_bias(self.sample.n, theta[0])])
    }

    fn info_derivatives(&self, theta: &[f64]) -> Option<Result<InfoDerivatives>> {
        let p = logistic(theta[0]);
        let v = p * (1.0 - p);
        let n = self.sample.n as f64;
        let d1 = n * v * (1.0 - 2.0 * p);
        let d2 = n * v * ((1.0 - 2.0 * p).powi(2) - 2.0 * v);
        Some(Ok(InfoDerivatives {
            first: vec![Matrix::from_element(1, 1, d1)],
            second: vec![Matrix::from_element(1, 1, d2)],
        }))
    }

    fn diverged(&self, _j: usize) -> bool {
        !self.fit.theta[0].is_finite()
    }

    fn parameter_names(&self) -> Vec<String> {
        vec![String::from("logodds")]
    }
}

impl Resample for BernoulliModel {
    type Data = BernoulliSample;

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<BernoulliSample> {
        let k = rng.draw_binomial(self.sample.n, logistic(theta[0]))?;
        BernoulliSample::new(self.sample.n, k)
    }

    fn refit(&self, data: BernoulliSample) -> Result<Self> {
        Ok(BernoulliModel::new(data, self.fit.kind))
    }
}

/// Exponential log-rate model as a generic adapter (ML only).
#[derive(Debug, Clone)]
pub struct ExponentialModel {
    sample: ExponentialSample,
    fit: FitResult,
}

impl ExponentialModel {
    pub fn new(sample: ExponentialSample) -> Result<Self> {
        if !(sample.mean > 0.0) || sample.n == 0 {
            return Err(Error::domain("exponential sample needs n > 0 and a positive mean"));
        }
        let theta = -sample.mean.ln();
        let n = sample.n as f64;
        Ok(ExponentialModel {
            sample,
            fit: FitResult {
                theta: vec![theta],
                kind: EstimatorKind::Ml,
                loglik: n * theta - n * sample.mean * theta.exp(),
                converged: true,
                iterations: 0,
                gradient_norm: 0.0,
            },
        })
    }
}

impl ModelAdapter for ExponentialModel {
    fn dim(&self) -> usize {
        1
    }

    fn fit(&self) -> &FitResult {
        &self.fit
    }

    fn info(&self, _theta: &[f64]) -> Result<Matrix> {
        Ok(Matrix::from_element(1, 1, self.sample.n as f64))
    }

    fn bias(&self, _theta: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.5 / self.sample.n as f64])
    }

    fn info_derivatives(&self, _theta: &[f64]) -> Option<Result<InfoDerivatives>> {
        Some(Ok(InfoDerivatives {
            first: vec![Matrix::zeros(1, 1)],
            second: vec![Matrix::zeros(1, 1)],
        }))
    }

    fn parameter_names(&self) -> Vec<String> {
        vec![String::from("lograte")]
    }
}

impl Resample for ExponentialModel {
    type Data = ExponentialSample;

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<ExponentialSample> {
        let n = self.sample.n;
        // the sum of n rate-λ exponentials is Gamma(n, λ)
        let total = rng.draw_gamma(n as f64, theta[0].exp())?;
        Ok(ExponentialSample {
            n,
            mean: total / n as f64,
        })
    }

    fn refit(&self, data: ExponentialSample) -> Result<Self> {
        ExponentialModel::new(data)
    }
}
