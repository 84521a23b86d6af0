//! Expected information of `(β, φ)` and its analytic derivatives.

use alloc::vec::Vec;

use num_traits::Float;

use super::fit::GlmSpec;
use crate::numkit::linalg::Matrix;
use crate::wald::InfoDerivatives;

/// Per-observation quantities at a given `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub eta: f64,
    pub mu: f64,
    /// `dμ/dη` and its first two `η`-derivatives.
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
    /// `V(μ)` and its first two `μ`-derivatives.
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    /// Working weight `m d²/V`.
    pub w: f64,
    /// `d log d/dη` and its `η`-derivative.
    pub r: f64,
    pub r1: f64,
    /// `d log V/dη` and its `η`-derivative.
    pub l: f64,
    pub l1: f64,
}

pub(crate) fn observations(spec: &GlmSpec, beta: &[f64]) -> Vec<Observation> {
    let x = spec.x();
    (0..spec.n())
        .map(|i| {
            let mut eta = spec.offset[i];
            for (u, b) in beta.iter().enumerate() {
                eta += x[(i, u)] * b;
            }
            let lp = spec.family.link_point(eta);
            let (v, v1, v2) = spec.family.variance(lp.mu);
            let m = spec.weights[i];
            let r = lp.d1 / lp.d;
            let l = v1 * lp.d / v;
            Observation {
                eta,
                mu: lp.mu,
                d: lp.d,
                d1: lp.d1,
                d2: lp.d2,
                v,
                v1,
                v2,
                w: m * lp.d * lp.d / v,
                r,
                r1: lp.d2 / lp.d - r * r,
                l,
                l1: v2 * lp.d * lp.d / v + v1 * lp.d1 / v - l * l,
            }
        })
        .collect()
}

/// `Σᵢ cᵢ xᵢ xᵢᵀ`.
pub(crate) fn weighted_crossprod(x: &Matrix, c: impl Fn(usize) -> f64) -> Matrix {
    let (n, k) = (x.nrows(), x.ncols());
    let mut out = Matrix::zeros(k, k);
    for i in 0..n {
        let ci = c(i);
        if ci == 0.0 {
            continue;
        }
        for u in 0..k {
            let xu = ci * x[(i, u)];
            for v in u..k {
                out[(u, v)] += xu * x[(i, v)];
            }
        }
    }
    for u in 0..k {
        for v in 0..u {
            out[(u, v)] = out[(v, u)];
        }
    }
    out
}

/// `Σ mᵢ^q a⁽ᵏ⁾(−mᵢ/φ)` for the dispersion block.
fn a_sum(spec: &GlmSpec, phi: f64, order: usize, power: i32) -> f64 {
    spec.weights
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m.powi(power) * spec.family.a_derivatives(-m / phi)[order - 1])
        .sum()
}

/// Information on `φ`: `Σ mᵢ² a″(−mᵢ/φ)/(2φ⁴)`.
pub(crate) fn dispersion_info(spec: &GlmSpec, phi: f64) -> f64 {
    a_sum(spec, phi, 2, 2) / (2.0 * phi.powi(4))
}

/// `d/dφ` of the dispersion information.
pub(crate) fn dispersion_info_d1(spec: &GlmSpec, phi: f64) -> f64 {
    a_sum(spec, phi, 3, 3) / (2.0 * phi.powi(6)) - 2.0 * a_sum(spec, phi, 2, 2) / phi.powi(5)
}

/// `d²/dφ²` of the dispersion information.
pub(crate) fn dispersion_info_d2(spec: &GlmSpec, phi: f64) -> f64 {
    a_sum(spec, phi, 4, 4) / (2.0 * phi.powi(8)) - 5.0 * a_sum(spec, phi, 3, 3) / phi.powi(7)
        + 10.0 * a_sum(spec, phi, 2, 2) / phi.powi(6)
}

fn embed(block: &Matrix, p: usize) -> Matrix {
    let mut m = Matrix::zeros(p, p);
    m.view_mut((0, 0), (block.nrows(), block.ncols())).copy_from(block);
    m
}

/// Expected information. The `φ` row and column are present only when the
/// dispersion is a free parameter of `spec`.
pub fn expected_info(spec: &GlmSpec, beta: &[f64], phi: f64) -> Matrix {
    let obs = observations(spec, beta);
    let xtwx = weighted_crossprod(spec.x(), |i| obs[i].w) / phi;
    if !spec.has_dispersion_param() {
        return xtwx;
    }
    let k = spec.k();
    let mut info = embed(&xtwx, k + 1);
    info[(k, k)] = dispersion_info(spec, phi);
    info
}

/// `∂i/∂θᵤ` and `∂²i/∂θᵤ∂θᵥ` in closed form.
pub fn info_derivatives(spec: &GlmSpec, beta: &[f64], phi: f64) -> InfoDerivatives {
    let obs = observations(spec, beta);
    let x = spec.x();
    let k = spec.k();
    let disp = spec.has_dispersion_param();
    let p = k + usize::from(disp);

    // W′ᵤ = W(2R − L)Tᵤ and W″ᵤᵥ = W{(2R − L)² + 2R′ − L′}TᵤTᵥ
    let g: Vec<f64> = obs.iter().map(|o| o.w * (2.0 * o.r - o.l)).collect();
    let h: Vec<f64> = obs
        .iter()
        .map(|o| o.w * ((2.0 * o.r - o.l).powi(2) + 2.0 * o.r1 - o.l1))
        .collect();
    let d_beta: Vec<Matrix> = (0..k).map(|u| weighted_crossprod(x, |i| g[i] * x[(i, u)])).collect();

    let mut first = Vec::with_capacity(p);
    for d in &d_beta {
        first.push(embed(&(d / phi), p));
    }
    let mut second = alloc::vec![Matrix::zeros(p, p); p * p];
    for u in 0..k {
        for v in u..k {
            let m = embed(&(weighted_crossprod(x, |i| h[i] * x[(i, u)] * x[(i, v)]) / phi), p);
            second[u * p + v] = m.clone();
            second[v * p + u] = m;
        }
    }
    if disp {
        let xtwx = weighted_crossprod(x, |i| obs[i].w);
        let mut dphi = embed(&(&xtwx * (-1.0 / (phi * phi))), p);
        dphi[(k, k)] = dispersion_info_d1(spec, phi);
        first.push(dphi);
        let mut d2phi = embed(&(&xtwx * (2.0 / phi.powi(3))), p);
        d2phi[(k, k)] = dispersion_info_d2(spec, phi);
        second[k * p + k] = d2phi;
        for u in 0..k {
            let m = embed(&(&d_beta[u] * (-1.0 / (phi * phi))), p);
            second[u * p + k] = m.clone();
            second[k * p + u] = m;
        }
    }
    InfoDerivatives { first, second }
}
