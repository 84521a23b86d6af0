//! Signed root of the likelihood-ratio statistic for one coefficient.

use alloc::format;
use alloc::string::String;
use alloc::vec;

use num_traits::Float;

use super::fit::{fit_ml, loglik, ml_dispersion, GlmSpec};
use crate::error::{Error, Result};

/// Radicands in `[−NEGATIVE_TOLERANCE, 0)` are rounding noise and clamp to 0.
const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// `sign(β̂ⱼ − ψ₀)·√(2{ℓ(θ̂) − ℓ(θ̂₀)})`, with `θ̂₀` the fit with `βⱼ = ψ₀`
/// imposed through the offset and any free dispersion re-estimated.
pub fn signed_lr_root(spec: &GlmSpec, j: usize, psi0: f64) -> Result<f64> {
    if j >= spec.k() {
        return Err(Error::DimensionMismatch(format!("coefficient {j} >= {}", spec.k())));
    }
    let full = fit_ml(spec)?;
    if full.diverged[j] {
        return Err(Error::InfiniteEstimate(j));
    }
    if full.any_diverged() {
        return Err(Error::ConstrainedFitFailed(String::from(
            "unconstrained fit has infinite estimates",
        )));
    }
    let constrained = if spec.k() == 1 {
        let beta0 = vec![psi0];
        let phi0 = match spec.dispersion {
            Some(phi) => phi,
            None => ml_dispersion(spec, &beta0).map_err(|e| Error::ConstrainedFitFailed(format!("{e}")))?,
        };
        loglik(spec, &beta0, phi0)
    } else {
        let reduced = spec.fix_coefficient(j, psi0)?;
        let fit = fit_ml(&reduced).map_err(|e| Error::ConstrainedFitFailed(format!("{e}")))?;
        if !fit.converged || fit.any_diverged() {
            return Err(Error::ConstrainedFitFailed(String::from(
                "constrained fit did not converge to finite estimates",
            )));
        }
        fit.loglik
    };
    let dev = 2.0 * (full.loglik - constrained);
    if !dev.is_finite() {
        return Err(Error::NonFiniteEvaluation);
    }
    if dev < -NEGATIVE_TOLERANCE {
        return Err(Error::NegativeDeviance(dev));
    }
    let r = dev.max(0.0).sqrt();
    Ok(if full.beta[j] >= psi0 { r } else { -r })
}
