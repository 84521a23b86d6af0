//! Central differences refined by Richardson extrapolation.
//!
//! Each derivative is estimated at steps `h, h/v, h/v², …` and the sequence
//! is extrapolated to `h → 0`, eliminating the `h², h⁴, …` error terms of the
//! central formulas. The multi-output variants evaluate a vector-valued
//! function once per probe point, which is what the Wald machinery needs:
//! one information-matrix inversion yields every `κⱼ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkit::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSpec {
    /// Step for coordinate `u` is `initial_step · max(1, |xᵤ|)`.
    pub initial_step: f64,
    pub richardson_levels: usize,
    pub step_reduction: f64,
}

impl DiffSpec {
    pub const GRADIENT: DiffSpec = DiffSpec {
        initial_step: 1e-4,
        richardson_levels: 4,
        step_reduction: 2.0,
    };

    pub const HESSIAN: DiffSpec = DiffSpec {
        initial_step: 1e-3,
        richardson_levels: 4,
        step_reduction: 2.0,
    };

    pub fn new(initial_step: f64, richardson_levels: usize, step_reduction: f64) -> Result<Self> {
        let spec = DiffSpec {
            initial_step,
            richardson_levels,
            step_reduction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(Error::domain("initial_step must be positive"));
        }
        if self.richardson_levels < 2 {
            return Err(Error::domain("richardson_levels must be at least 2"));
        }
        if !(self.step_reduction > 1.0) {
            return Err(Error::domain("step_reduction must exceed 1"));
        }
        Ok(())
    }

    /// Same spec with the initial step scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        DiffSpec {
            initial_step: self.initial_step * factor,
            ..*self
        }
    }

    fn step(&self, x: f64) -> f64 {
        self.initial_step * x.abs().max(1.0)
    }
}

impl Default for DiffSpec {
    fn default() -> Self {
        DiffSpec::GRADIENT
    }
}

/// Extrapolates estimates taken at geometrically shrinking steps whose
/// error expands in even powers of the step.
fn richardson(estimates: &mut [f64], reduction: f64) -> f64 {
    let levels = estimates.len();
    let r2 = reduction * reduction;
    let mut factor = 1.0;
    for m in 1..levels {
        factor *= r2;
        for k in 0..(levels - m) {
            estimates[k] = (factor * estimates[k + 1] - estimates[k]) / (factor - 1.0);
        }
    }
    estimates[0]
}

fn checked(values: Vec<f64>, outputs: usize) -> Result<Vec<f64>> {
    if values.len() != outputs {
        return Err(Error::DimensionMismatch(alloc::format!(
            "function returned {} values, expected {outputs}",
            values.len()
        )));
    }
    if values.iter().all(|v| v.is_finite()) {
        Ok(values)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Jacobian of a vector-valued function; result is indexed `[output][coordinate]`.
pub fn num_jacobian<F>(mut f: F, x: &[f64], spec: &DiffSpec) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    spec.validate()?;
    let p = x.len();
    let centre = f(x)?;
    let outputs = centre.len();
    checked(centre, outputs)?;
    let levels = spec.richardson_levels;
    let mut out = vec![vec![0.0; p]; outputs];
    let mut probe = x.to_vec();
    let mut table = vec![vec![0.0; levels]; outputs];
    for u in 0..p {
        let mut h = spec.step(x[u]);
        for k in 0..levels {
            probe[u] = x[u] + h;
            let plus = checked(f(&probe)?, outputs)?;
            probe[u] = x[u] - h;
            let minus = checked(f(&probe)?, outputs)?;
            probe[u] = x[u];
            for o in 0..outputs {
                table[o][k] = (plus[o] - minus[o]) / (2.0 * h);
            }
            h /= spec.step_reduction;
        }
        for o in 0..outputs {
            out[o][u] = richardson(&mut table[o], spec.step_reduction);
        }
    }
    Ok(out)
}

/// Hessians of every output of a vector-valued function, symmetrized.
pub fn num_hessians<F>(mut f: F, x: &[f64], spec: &DiffSpec) -> Result<Vec<Matrix>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    spec.validate()?;
    let p = x.len();
    let centre = f(x)?;
    let outputs = centre.len();
    let centre = checked(centre, outputs)?;
    let levels = spec.richardson_levels;
    let steps: Vec<f64> = x.iter().map(|&xi| spec.step(xi)).collect();
    let mut out = vec![Matrix::zeros(p, p); outputs];
    let mut probe = x.to_vec();
    let mut table = vec![vec![0.0; levels]; outputs];

    for u in 0..p {
        let mut h = steps[u];
        for k in 0..levels {
            probe[u] = x[u] + h;
            let plus = checked(f(&probe)?, outputs)?;
            probe[u] = x[u] - h;
            let minus = checked(f(&probe)?, outputs)?;
            probe[u] = x[u];
            for o in 0..outputs {
                table[o][k] = (plus[o] - 2.0 * centre[o] + minus[o]) / (h * h);
            }
            h /= spec.step_reduction;
        }
        for o in 0..outputs {
            out[o][(u, u)] = richardson(&mut table[o], spec.step_reduction);
        }
    }

    for u in 0..p {
        for v in (u + 1)..p {
            let (mut hu, mut hv) = (steps[u], steps[v]);
            for k in 0..levels {
                let mut corner = |du: f64, dv: f64| {
                    probe[u] = x[u] + du;
                    probe[v] = x[v] + dv;
                    let r = f(&probe).and_then(|vals| checked(vals, outputs));
                    probe[u] = x[u];
                    probe[v] = x[v];
                    r
                };
                let pp = corner(hu, hv)?;
                let pm = corner(hu, -hv)?;
                let mp = corner(-hu, hv)?;
                let mm = corner(-hu, -hv)?;
                for o in 0..outputs {
                    table[o][k] = (pp[o] - pm[o] - mp[o] + mm[o]) / (4.0 * hu * hv);
                }
                hu /= spec.step_reduction;
                hv /= spec.step_reduction;
            }
            for o in 0..outputs {
                let d = richardson(&mut table[o], spec.step_reduction);
                out[o][(u, v)] = d;
                out[o][(v, u)] = d;
            }
        }
    }
    Ok(out)
}

/// Richardson-extrapolated central-difference gradient of a scalar function.
pub fn num_gradient<F>(mut f: F, x: &[f64], spec: &DiffSpec) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut jac = num_jacobian(|t| Ok(vec![f(t)]), x, spec)?;
    Ok(jac.swap_remove(0))
}

/// Richardson-extrapolated hessian of a scalar function, symmetrized.
pub fn num_hessian<F>(mut f: F, x: &[f64], spec: &DiffSpec) -> Result<Matrix>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut h = num_hessians(|t| Ok(vec![f(t)]), x, spec)?;
    Ok(h.swap_remove(0))
}
