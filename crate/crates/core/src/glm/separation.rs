//! Detection of (quasi-)separation in binomial responses by linear
//! programming.
//!
//! With rows `aᵢ = sᵢxᵢ` (`sᵢ = +1` for `yᵢ = 1`, `−1` for `yᵢ = 0`, and both
//! signs for proportions strictly between), the data are separated when the
//! cone `{γ : Aγ ≥ 0}` contains a `γ` with `Aγ ≠ 0`. Each question is a
//! program `max cᵀγ` over that cone intersected with the box `[−1, 1]ᵏ`;
//! it is solved through its dual, which has one equality row per
//! coefficient and an immediately feasible slack basis.

use alloc::vec;
use alloc::vec::Vec;

use super::fit::GlmSpec;
use super::info::observations;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    None,
    /// Quasi-complete separation; listed coefficients have infinite ML estimates.
    Partial(Vec<usize>),
    /// Complete separation.
    Complete(Vec<usize>),
}

impl Separation {
    pub fn is_separated(&self) -> bool {
        !matches!(self, Separation::None)
    }

    pub fn divergent(&self) -> &[usize] {
        match self {
            Separation::None => &[],
            Separation::Partial(v) | Separation::Complete(v) => v,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Separation::None => "none",
            Separation::Partial(_) => "quasi-complete",
            Separation::Complete(_) => "complete",
        }
    }

    /// Fallback when the LP fails: coefficients beyond ±20 while every
    /// weighted residual has vanished are taken as divergent.
    pub fn heuristic(spec: &GlmSpec, beta: &[f64]) -> Separation {
        let settled = observations(spec, beta)
            .iter()
            .enumerate()
            .all(|(i, o)| spec.weights[i] * (spec.y[i] - o.mu).abs() < 1e-6);
        let big: Vec<usize> = (0..beta.len()).filter(|&j| beta[j].abs() > 20.0).collect();
        if settled && !big.is_empty() {
            Separation::Partial(big)
        } else {
            Separation::None
        }
    }
}

const LP_TOL: f64 = 1e-9;
/// Optimal values above this (rows are scaled to unit max-norm) count as positive.
const POSITIVE: f64 = 1e-7;

/// `max cᵀγ` subject to `Aγ ≥ 0`, `−1 ≤ γ ≤ 1`, via the dual
/// `min Σ(u⁺ + u⁻)` s.t. `−Aᵀy + u⁺ − u⁻ = c`, `y, u± ≥ 0`, using Bland's rule.
pub(crate) fn max_over_box_cone(rows: &[Vec<f64>], c: &[f64]) -> Result<f64> {
    let k = c.len();
    let nr = rows.len();
    let ncol = nr + 2 * k;
    // tableau rows: one per coefficient
    let mut t = vec![vec![0.0; ncol]; k];
    let mut b = vec![0.0; k];
    let mut basis = vec![0usize; k];
    for j in 0..k {
        let sign = if c[j] >= 0.0 { 1.0 } else { -1.0 };
        for (i, row) in rows.iter().enumerate() {
            t[j][i] = -sign * row[j];
        }
        t[j][nr + j] = sign;
        t[j][nr + k + j] = -sign;
        b[j] = sign * c[j];
        basis[j] = if sign > 0.0 { nr + j } else { nr + k + j };
    }
    let cost = |col: usize| if col < nr { 0.0 } else { 1.0 };
    let limit = 50 * (ncol + k) + 1000;
    for _ in 0..limit {
        let cb: Vec<f64> = basis.iter().map(|&col| cost(col)).collect();
        let entering = (0..ncol).find(|&col| {
            if basis.contains(&col) {
                return false;
            }
            let z: f64 = (0..k).map(|r| cb[r] * t[r][col]).sum();
            cost(col) - z < -LP_TOL
        });
        let Some(e) = entering else {
            return Ok((0..k).map(|r| cb[r] * b[r]).sum());
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..k {
            if t[r][e] > LP_TOL {
                let ratio = b[r] / t[r][e];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - LP_TOL || ((ratio - lratio).abs() <= LP_TOL && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // the primal is feasible (γ = 0), so the dual cannot be unbounded
        let Some((pr, _)) = leave else {
            return Err(Error::LpCycleLimit);
        };
        let piv = t[pr][e];
        for v in t[pr].iter_mut() {
            *v /= piv;
        }
        b[pr] /= piv;
        let prow = t[pr].clone();
        let pb = b[pr];
        for r in 0..k {
            if r != pr {
                let f = t[r][e];
                if f != 0.0 {
                    for (v, p) in t[r].iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                    b[r] -= f * pb;
                }
            }
        }
        basis[pr] = e;
    }
    Err(Error::LpCycleLimit)
}

fn constraint_rows(spec: &GlmSpec) -> Vec<Vec<f64>> {
    let x = spec.x();
    let k = spec.k();
    let mut rows = Vec::new();
    for i in 0..spec.n() {
        if spec.weights[i] <= 0.0 {
            continue;
        }
        let xi: Vec<f64> = (0..k).map(|u| x[(i, u)]).collect();
        let scale = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let pos: Vec<f64> = xi.iter().map(|v| v / scale).collect();
        let neg: Vec<f64> = pos.iter().map(|v| -v).collect();
        let y = spec.y[i];
        if y >= 1.0 {
            rows.push(pos);
        } else if y <= 0.0 {
            rows.push(neg);
        } else {
            rows.push(pos);
            rows.push(neg);
        }
    }
    rows
}

/// Classifies the binomial data in `spec` as not separated, quasi-completely
/// separated or completely separated, listing the coefficients whose ML
/// estimates are infinite.
pub fn detect_separation(spec: &GlmSpec) -> Result<Separation> {
    if !spec.family.is_binomial() {
        return Err(Error::spec("separation is defined for binomial responses"));
    }
    let rows = constraint_rows(spec);
    let k = spec.k();
    let total: Vec<f64> = (0..k).map(|u| rows.iter().map(|r| r[u]).sum()).collect();
    if max_over_box_cone(&rows, &total)? <= POSITIVE {
        return Ok(Separation::None);
    }
    let mut divergent = Vec::new();
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let up = max_over_box_cone(&rows, &e)?;
        e[j] = -1.0;
        let down = if up > POSITIVE {
            up
        } else {
            max_over_box_cone(&rows, &e)?
        };
        if up > POSITIVE || down > POSITIVE {
            divergent.push(j);
        }
    }
    // complete separation: some γ with every aᵢᵀγ ≥ t > 0
    let augmented: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut a = r.clone();
            a.push(-1.0);
            a
        })
        .collect();
    let mut e = vec![0.0; k + 1];
    e[k] = 1.0;
    if max_over_box_cone(&augmented, &e)? > POSITIVE {
        Ok(Separation::Complete(divergent))
    } else {
        Ok(Separation::Partial(divergent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_on_trivial_cone() {
        // γ₁ ≥ 0 only: max γ₁ = 1, max −γ₁ = 0, max γ₂ = 1
        let rows = vec![vec![1.0, 0.0]];
        assert!((max_over_box_cone(&rows, &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(max_over_box_cone(&rows, &[-1.0, 0.0]).unwrap().abs() < 1e-12);
        assert!((max_over_box_cone(&rows, &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_on_pointed_cone() {
        // γ₁ ≥ 0, γ₂ ≥ 0, γ₁ + γ₂ ≤ 0  ⇒ only the origin
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]];
        assert!(max_over_box_cone(&rows, &[1.0, 1.0]).unwrap().abs() < 1e-12);
    }
}
