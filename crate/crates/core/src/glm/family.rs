//! Exponential-dispersion families with their canonical-use links.

use alloc::format;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::numkit::rng::RngStream;
use crate::numkit::special::{
    digamma_raw, ln_gamma_raw, logistic, normal_cdf, normal_pdf, normal_quantile, polygamma_raw,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    BinomialLogit,
    BinomialProbit,
    PoissonLog,
    GammaLog,
    GaussianIdentity,
}

/// `μ` and `dμ/dη`, `d²μ/dη²`, `d³μ/dη³` at one `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPoint {
    pub mu: f64,
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Probabilities are kept this far from 0 and 1 so weights stay positive.
const PROB_EPS: f64 = 1e-14;
/// `|η|` cap for log links.
const MAX_LOG_ETA: f64 = 700.0;

impl Family {
    pub const ALL: [Family; 5] = [
        Family::BinomialLogit,
        Family::BinomialProbit,
        Family::PoissonLog,
        Family::GammaLog,
        Family::GaussianIdentity,
    ];

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "binomial-logit" | "binomial" | "logistic" => Some(Family::BinomialLogit),
            "binomial-probit" | "probit" => Some(Family::BinomialProbit),
            "poisson-log" | "poisson" => Some(Family::PoissonLog),
            "gamma-log" | "gamma" => Some(Family::GammaLog),
            "gaussian-identity" | "gaussian" | "normal" => Some(Family::GaussianIdentity),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::BinomialLogit => "binomial-logit",
            Family::BinomialProbit => "binomial-probit",
            Family::PoissonLog => "poisson-log",
            Family::GammaLog => "gamma-log",
            Family::GaussianIdentity => "gaussian-identity",
        }
    }

    pub fn is_binomial(self) -> bool {
        matches!(self, Family::BinomialLogit | Family::BinomialProbit)
    }

    /// Whether the dispersion is a free parameter by default.
    pub fn has_free_dispersion(self) -> bool {
        matches!(self, Family::GammaLog | Family::GaussianIdentity)
    }

    pub fn link_point(self, eta: f64) -> LinkPoint {
        match self {
            Family::BinomialLogit => {
                let mu = logistic(eta).clamp(PROB_EPS, 1.0 - PROB_EPS);
                let d = mu * (1.0 - mu);
                LinkPoint {
                    mu,
                    d,
                    d1: d * (1.0 - 2.0 * mu),
                    d2: d * (1.0 - 6.0 * d),
                }
            }
            Family::BinomialProbit => {
                let mu = normal_cdf(eta).clamp(PROB_EPS, 1.0 - PROB_EPS);
                let d = normal_pdf(eta).max(f64::MIN_POSITIVE);
                LinkPoint {
                    mu,
                    d,
                    d1: -eta * d,
                    d2: (eta * eta - 1.0) * d,
                }
            }
            Family::PoissonLog | Family::GammaLog => {
                let mu = eta.clamp(-MAX_LOG_ETA, MAX_LOG_ETA).exp();
                LinkPoint {
                    mu,
                    d: mu,
                    d1: mu,
                    d2: mu,
                }
            }
            Family::GaussianIdentity => LinkPoint {
                mu: eta,
                d: 1.0,
                d1: 0.0,
                d2: 0.0,
            },
        }
    }

    pub fn link(self, mu: f64) -> f64 {
        match self {
            Family::BinomialLogit => (mu / (1.0 - mu)).ln(),
            Family::BinomialProbit => normal_quantile(mu),
            Family::PoissonLog | Family::GammaLog => mu.ln(),
            Family::GaussianIdentity => mu,
        }
    }

    /// `V(μ)`, `V′(μ)`, `V″(μ)`.
    pub fn variance(self, mu: f64) -> (f64, f64, f64) {
        match self {
            Family::BinomialLogit | Family::BinomialProbit => (mu * (1.0 - mu), 1.0 - 2.0 * mu, -2.0),
            Family::PoissonLog => (mu, 1.0, 0.0),
            Family::GammaLog => (mu * mu, 2.0 * mu, 2.0),
            Family::GaussianIdentity => (1.0, 0.0, 0.0),
        }
    }

    pub fn check_response(self, row: usize, y: f64, m: f64) -> Result<()> {
        let ok = y.is_finite()
            && match self {
                Family::BinomialLogit | Family::BinomialProbit => (0.0..=1.0).contains(&y),
                Family::PoissonLog => y >= 0.0,
                Family::GammaLog => y > 0.0,
                Family::GaussianIdentity => true,
            };
        if !ok {
            return Err(Error::Domain(format!(
                "response {y} at row {row} is invalid for the {} family",
                self.name()
            )));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::Domain(format!("weight {m} at row {row} is invalid")));
        }
        Ok(())
    }

    /// Starting mean for IRLS.
    pub fn initial_mean(self, y: f64, m: f64) -> f64 {
        match self {
            Family::BinomialLogit | Family::BinomialProbit => (m * y + 0.5) / (m + 1.0),
            Family::PoissonLog => y + 0.1,
            Family::GammaLog | Family::GaussianIdentity => y,
        }
    }

    /// Derivatives `a′, a″, a‴, a⁗` of the dispersion function at `s < 0`.
    /// Zero for families without a free dispersion.
    pub fn a_derivatives(self, s: f64) -> [f64; 4] {
        match self {
            Family::GammaLog => {
                // a(s) = 2 log Γ(ν) − 2ν log ν with ν = −s
                let nu = -s;
                [
                    -2.0 * digamma_raw(nu) + 2.0 * nu.ln() + 2.0,
                    2.0 * polygamma_raw(1, nu) - 2.0 / nu,
                    -2.0 * polygamma_raw(2, nu) - 2.0 / (nu * nu),
                    2.0 * polygamma_raw(3, nu) - 4.0 / (nu * nu * nu),
                ]
            }
            Family::GaussianIdentity => {
                // a(s) = log 2π − log(−s)
                [-1.0 / s, 1.0 / (s * s), -2.0 / (s * s * s), 6.0 / (s * s * s * s)]
            }
            _ => [0.0; 4],
        }
    }

    /// Log-likelihood contribution of one observation with weight `m`.
    pub fn loglik(self, y: f64, mu: f64, m: f64, phi: f64) -> f64 {
        if m == 0.0 {
            return 0.0;
        }
        match self {
            Family::BinomialLogit | Family::BinomialProbit => {
                let k = m * y;
                let mut l = ln_gamma_raw(m + 1.0) - ln_gamma_raw(k + 1.0) - ln_gamma_raw(m - k + 1.0);
                if k > 0.0 {
                    l += k * mu.ln();
                }
                if m - k > 0.0 {
                    l += (m - k) * (-mu).ln_1p();
                }
                l
            }
            Family::PoissonLog => {
                let t = if y > 0.0 { y * mu.ln() } else { 0.0 };
                m * (t - mu - ln_gamma_raw(y + 1.0))
            }
            Family::GammaLog => {
                let nu = m / phi;
                nu * (-y / mu - mu.ln()) + nu * nu.ln() + (nu - 1.0) * y.ln() - ln_gamma_raw(nu)
            }
            Family::GaussianIdentity => {
                let r = y - mu;
                -0.5 * m * r * r / phi - 0.5 * (2.0 * core::f64::consts::PI * phi / m).ln()
            }
        }
    }

    /// `∂ℓᵢ/∂φ` for one observation.
    pub fn dispersion_score(self, y: f64, mu: f64, m: f64, phi: f64) -> f64 {
        if m == 0.0 {
            return 0.0;
        }
        match self {
            Family::GammaLog => {
                let nu = m / phi;
                m / (phi * phi) * (y / mu - 1.0 - nu.ln() - y.ln() + mu.ln() + digamma_raw(nu))
            }
            Family::GaussianIdentity => {
                let r = y - mu;
                m / (phi * phi) * (0.5 * r * r - 0.5 * phi / m)
            }
            _ => 0.0,
        }
    }

    /// Unit deviance `d(y, μ)` (without the weight).
    pub fn unit_deviance(self, y: f64, mu: f64) -> f64 {
        let ylogy = |a: f64, b: f64| if a > 0.0 { a * (a / b).ln() } else { 0.0 };
        match self {
            Family::BinomialLogit | Family::BinomialProbit => 2.0 * (ylogy(y, mu) + ylogy(1.0 - y, 1.0 - mu)),
            Family::PoissonLog => 2.0 * (ylogy(y, mu) - (y - mu)),
            Family::GammaLog => 2.0 * ((y - mu) / mu - (y / mu).ln()),
            Family::GaussianIdentity => (y - mu) * (y - mu),
        }
    }

    /// Draws a response with mean `mu`, weight `m` and dispersion `phi`.
    pub fn simulate(self, mu: f64, m: f64, phi: f64, rng: &mut RngStream) -> Result<f64> {
        match self {
            Family::BinomialLogit | Family::BinomialProbit => {
                let trials = m.round();
                if trials < 1.0 {
                    return Err(Error::domain("binomial simulation needs integer weights >= 1"));
                }
                Ok(rng.draw_binomial(trials as u64, mu)? as f64 / trials)
            }
            Family::PoissonLog => Ok(rng.draw_poisson(m * mu)? as f64 / m),
            Family::GammaLog => {
                let shape = m / phi;
                let y = rng.draw_gamma(shape, shape / mu)?;
                // guard against underflow to exactly zero for tiny shapes
                Ok(y.max(f64::MIN_POSITIVE))
            }
            Family::GaussianIdentity => rng.draw_normal(mu, (phi / m).sqrt()),
        }
    }
}
