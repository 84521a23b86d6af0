//! First-order bias of the ML estimators of `(β, φ)`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::fit::{fit_ml, DispersionKind, GlmSpec};
use super::info::{dispersion_info, observations, weighted_crossprod};
use crate::error::{Error, Result};
use crate::numkit::linalg::Cholesky;
use crate::numkit::rng::RngStream;

/// Closed-form first-order bias. For `β`:
/// `−(φ/2)(XᵀWX)⁻¹Xᵀ Z_d F 1` with `Z = X(XᵀWX)⁻¹Xᵀ` and
/// `Fᵢ = mᵢ dᵢ d′ᵢ/V(μᵢ)`. For a free `φ`, with `i_φφ` its information,
/// `{−k/(2φ) + i_φφ⁻¹ Σ(½mᵢ²a″/φ⁵ − ¼mᵢ³a‴/φ⁶)}/i_φφ`.
pub fn coxsnell_bias(spec: &GlmSpec, beta: &[f64], phi: f64) -> Result<Vec<f64>> {
    let obs = observations(spec, beta);
    let x = spec.x();
    let (n, k) = (spec.n(), spec.k());
    let xtwx = weighted_crossprod(x, |i| obs[i].w);
    let chol = Cholesky::new(&xtwx)?;
    let mut xi = vec![0.0; k];
    let mut row = vec![0.0; k];
    for i in 0..n {
        let m = spec.weights[i];
        if m == 0.0 {
            continue;
        }
        for (u, r) in row.iter_mut().enumerate() {
            *r = x[(i, u)];
        }
        chol.solve_vec_in_place(&mut row);
        let zii: f64 = (0..k).map(|u| x[(i, u)] * row[u]).sum();
        let o = &obs[i];
        let f = m * o.d * o.d1 / o.v;
        for (u, v) in xi.iter_mut().enumerate() {
            *v += x[(i, u)] * zii * f;
        }
    }
    chol.solve_vec_in_place(&mut xi);
    let mut b: Vec<f64> = xi.iter().map(|v| -0.5 * phi * v).collect();

    if spec.has_dispersion_param() {
        let f = dispersion_info(spec, phi);
        let s: f64 = spec
            .weights
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| {
                let a = spec.family.a_derivatives(-m / phi);
                0.5 * m * m * a[1] / phi.powi(5) - 0.25 * m.powi(3) * a[2] / phi.powi(6)
            })
            .sum();
        b.push((-(k as f64) / (2.0 * phi) + s / f) / f);
    }
    if b.iter().all(|v| v.is_finite()) {
        Ok(b)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Simulation estimate of the ML bias at `(β, φ)`: the mean of `θ̂ − θ` over
/// parametric replicates, with its Monte Carlo standard error. Failed refits
/// are dropped; more than 5% failures is an error.
pub fn simulated_bias(
    spec: &GlmSpec,
    beta: &[f64],
    phi: f64,
    replicates: usize,
    rng: &RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut theta = beta.to_vec();
    if spec.has_dispersion_param() {
        theta.push(phi);
    }
    let p = theta.len();
    let obs = observations(spec, beta);
    let mut sum = vec![0.0; p];
    let mut sumsq = vec![0.0; p];
    let mut ok = 0usize;
    for r in 0..replicates {
        let mut stream = rng.substream(r as u64);
        let y = obs
            .iter()
            .zip(&spec.weights)
            .map(|(o, &m)| spec.family.simulate(o.mu, m, phi, &mut stream))
            .collect::<Result<Vec<f64>>>()?;
        let fit = match fit_ml(&spec.with_response(y)) {
            Ok(f) if f.converged && !f.any_diverged() => f,
            _ => continue,
        };
        let mut est = fit.beta.clone();
        if let Some(v) = fit.dispersion(DispersionKind::Ml) {
            est.push(v);
        }
        for u in 0..p {
            let d = est[u] - theta[u];
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
        .map(|u| {
            ((sumsq[u] / nf - mean[u] * mean[u]) * nf / (nf - 1.0) / nf)
                .max(0.0)
                .sqrt()
        })
        .collect();
    Ok((mean, se))
}
