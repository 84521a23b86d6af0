//! p-values, confidence intervals by grid inversion, studentized bootstrap
//! intervals and bootstrap scale adjustment.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::numkit::rng::RngStream;
use crate::numkit::special::{normal_cdf, normal_quantile, normal_sf};
use crate::wald::{wald_surface, EstimatorKind, ModelAdapter, Resample, WaldSurface};

/// Which Wald statistic: plain or location-adjusted, from ML or RB fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatisticFamily {
    T,
    TStar,
    TTilde,
    TTildeStar,
}

impl StatisticFamily {
    pub const ALL: [StatisticFamily; 4] = [
        StatisticFamily::T,
        StatisticFamily::TStar,
        StatisticFamily::TTilde,
        StatisticFamily::TTildeStar,
    ];

    pub fn kind(self) -> EstimatorKind {
        match self {
            StatisticFamily::T | StatisticFamily::TStar => EstimatorKind::Ml,
            _ => EstimatorKind::Rb,
        }
    }

    pub fn adjusted(self) -> bool {
        matches!(self, StatisticFamily::TStar | StatisticFamily::TTildeStar)
    }

    pub fn label(self) -> &'static str {
        match self {
            StatisticFamily::T => "t",
            StatisticFamily::TStar => "t*",
            StatisticFamily::TTilde => "t~",
            StatisticFamily::TTildeStar => "t~*",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "t" => Some(StatisticFamily::T),
            "t*" | "tstar" | "t_star" => Some(StatisticFamily::TStar),
            "t~" | "ttilde" | "t_tilde" => Some(StatisticFamily::TTilde),
            "t~*" | "ttildestar" | "t_tilde_star" => Some(StatisticFamily::TTildeStar),
            _ => None,
        }
    }

    /// The statistic from a surface at `psi0`.
    pub fn evaluate(self, surface: &WaldSurface, psi0: f64) -> f64 {
        if self.adjusted() {
            surface.adjusted(psi0)
        } else {
            surface.wald(psi0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    Less,
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference<'a> {
    StandardNormal,
    /// Bootstrap replicates of the statistic under the null.
    Bootstrap(&'a [f64]),
}

/// p-value of `statistic`; the bootstrap reference uses `(r + 1)/(B + 1)`.
pub fn p_value(statistic: f64, alternative: Alternative, reference: Reference<'_>) -> Result<f64> {
    if !statistic.is_finite() {
        return Err(Error::domain("p-value of a non-finite statistic"));
    }
    Ok(match reference {
        Reference::StandardNormal => match alternative {
            Alternative::TwoSided => (2.0 * normal_sf(statistic.abs())).min(1.0),
            Alternative::Less => normal_cdf(statistic),
            Alternative::Greater => normal_sf(statistic),
        },
        Reference::Bootstrap(reps) => {
            if reps.is_empty() {
                return Err(Error::InvalidPlan(String::from("no bootstrap replicates")));
            }
            let r = match alternative {
                Alternative::TwoSided => reps.iter().filter(|b| b.abs() >= statistic.abs()).count(),
                Alternative::Less => reps.iter().filter(|&&b| b <= statistic).count(),
                Alternative::Greater => reps.iter().filter(|&&b| b >= statistic).count(),
            };
            (r as f64 + 1.0) / (reps.len() as f64 + 1.0)
        }
    })
}

/// Equispaced grid of null values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 20;
    pub const DEFAULT_HALF_WIDTH_SE: f64 = 5.0;
    pub const MAX_WIDENINGS: usize = 3;

    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        let g = GridSpec { lower, upper, points };
        g.validate()?;
        Ok(g)
    }

    /// `centre ± 5·se` with 20 points.
    pub fn around(centre: f64, se: f64) -> Self {
        let h = Self::DEFAULT_HALF_WIDTH_SE * se;
        GridSpec {
            lower: centre - h,
            upper: centre + h,
            points: Self::DEFAULT_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::domain(format!(
                "grid bounds [{}, {}] are not an interval",
                self.lower, self.upper
            )));
        }
        if self.points < 2 {
            return Err(Error::domain("grid needs at least 2 points"));
        }
        Ok(())
    }

    /// Same grid with its half-width doubled about the centre.
    pub fn widened(&self) -> Self {
        let c = 0.5 * (self.lower + self.upper);
        let h = self.upper - self.lower;
        GridSpec {
            lower: c - h,
            upper: c + h,
            points: self.points,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.upper - self.lower) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.upper
                } else {
                    self.lower + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    NormalQuantile,
    StudentizedBootstrap,
    AgrestiCoull,
}

impl IntervalMethod {
    pub fn label(self) -> &'static str {
        match self {
            IntervalMethod::NormalQuantile => "normal-quantile",
            IntervalMethod::StudentizedBootstrap => "studentized-bootstrap",
            IntervalMethod::AgrestiCoull => "agresti-coull",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
    /// Grid finally used, if the interval came from grid inversion.
    pub grid_used: Option<GridSpec>,
    pub crossings_found: usize,
    /// Largest `|statistic(endpoint) − target quantile|`.
    pub interpolation_residual: f64,
    pub warning: Option<String>,
}

fn crossings(grid: &[f64], values: &[f64], target: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        let a = values[i] - target;
        if a == 0.0 {
            out.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() {
            let b = values[i + 1] - target;
            if b != 0.0 && (a < 0.0) != (b < 0.0) {
                out.push(grid[i] + (grid[i + 1] - grid[i]) * a / (a - b));
            }
        }
    }
    out
}

/// Inverts `q_lo ≤ statistic(ψ) ≤ q_hi` over a grid of `ψ` values with
/// linear interpolation. The grid is widened up to three times when either
/// quantile is not crossed. With more than one crossing per quantile the
/// outermost pair is returned and a warning is attached.
pub fn invert_ci<F>(
    mut statistic: F,
    level: f64,
    quantiles: (f64, f64),
    grid: GridSpec,
    method: IntervalMethod,
) -> Result<IntervalEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level {level} outside (0, 1)")));
    }
    let (q_lo, q_hi) = quantiles;
    if !(q_lo <= q_hi) {
        return Err(Error::domain("quantile pair is not ordered"));
    }
    grid.validate()?;
    let mut g = grid;
    for attempt in 0..=GridSpec::MAX_WIDENINGS {
        let psi = g.values();
        let values = psi.iter().map(|&p| statistic(p)).collect::<Result<Vec<f64>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation);
        }
        let hi = crossings(&psi, &values, q_hi);
        let lo = crossings(&psi, &values, q_lo);
        if hi.is_empty() || lo.is_empty() {
            if attempt < GridSpec::MAX_WIDENINGS {
                g = g.widened();
                continue;
            }
            break;
        }
        let all = hi.iter().chain(&lo);
        let lower = all.clone().copied().fold(f64::INFINITY, f64::min);
        let upper = all.copied().fold(f64::NEG_INFINITY, f64::max);
        let found = hi.len() + lo.len();
        let residual = [lower, upper]
            .iter()
            .map(|&p| {
                let s = statistic(p)?;
                Ok((s - q_hi).abs().min((s - q_lo).abs()))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let warning = (hi.len() > 1 || lo.len() > 1)
            .then(|| format!("statistic crosses the quantiles {found} times; outermost crossings reported"));
        return Ok(IntervalEstimate {
            lower,
            upper,
            level,
            method,
            grid_used: Some(g),
            crossings_found: found,
            interpolation_residual: residual,
            warning,
        });
    }
    Err(Error::GridTooNarrow {
        lower: g.lower,
        upper: g.upper,
    })
}

fn check_family<A: ModelAdapter + ?Sized>(adapter: &A, family: StatisticFamily) -> Result<()> {
    if family.kind() == adapter.kind() {
        Ok(())
    } else {
        Err(Error::InvalidPlan(format!(
            "statistic {} needs a {:?} fit, adapter holds {:?}",
            family.label(),
            family.kind(),
            adapter.kind()
        )))
    }
}

/// The statistic of `family` for parameter `j` at null value `psi0`.
pub fn adapter_statistic<A: ModelAdapter + ?Sized>(
    adapter: &A,
    j: usize,
    psi0: f64,
    family: StatisticFamily,
) -> Result<f64> {
    check_family(adapter, family)?;
    Ok(family.evaluate(&wald_surface(adapter, j)?, psi0))
}

/// Normal-quantile interval for parameter `j` from one fit: `κ` and the
/// bias are held at the estimate and only the explicit `ψ` dependence varies.
pub fn invert_ci_adapter<A: ModelAdapter + ?Sized>(
    adapter: &A,
    j: usize,
    level: f64,
    family: StatisticFamily,
    grid: Option<GridSpec>,
) -> Result<IntervalEstimate> {
    check_family(adapter, family)?;
    let surface = wald_surface(adapter, j)?;
    let z = normal_quantile(0.5 + level / 2.0);
    let grid = grid.unwrap_or_else(|| GridSpec::around(surface.value, surface.se()));
    invert_ci(
        |psi| Ok(family.evaluate(&surface, psi)),
        level,
        (-z, z),
        grid,
        IntervalMethod::NormalQuantile,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapPurpose {
    Quantiles,
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapPlan {
    pub replicates: usize,
    pub seed: u64,
    /// Stream id of the replicate substreams; vary it to get independent lots.
    pub stream: u64,
    pub family: StatisticFamily,
    pub purpose: BootstrapPurpose,
}

/// Largest tolerated share of failed refits.
pub const MAX_REFIT_FAILURE_SHARE: f64 = 0.05;

impl BootstrapPlan {
    pub fn new(replicates: usize, seed: u64, family: StatisticFamily, purpose: BootstrapPurpose) -> Result<Self> {
        let plan = BootstrapPlan {
            replicates,
            seed,
            stream: 0,
            family,
            purpose,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let min = match self.purpose {
            BootstrapPurpose::Quantiles => 199,
            BootstrapPurpose::Variance => 50,
        };
        if self.replicates < min {
            return Err(Error::InvalidPlan(format!(
                "{} replicates; {:?} needs at least {min}",
                self.replicates, self.purpose
            )));
        }
        Ok(())
    }

    pub fn rng(&self, index: usize) -> RngStream {
        RngStream::new(self.seed, self.stream).substream(index as u64)
    }
}

/// One bootstrap replicate: simulate at the estimate, refit, and evaluate
/// the statistic for parameter `j` at the simulated truth.
pub fn bootstrap_replicate<A: Resample>(adapter: &A, j: usize, plan: &BootstrapPlan, index: usize) -> Result<f64> {
    let truth = adapter.estimate();
    let mut rng = plan.rng(index);
    let data = adapter.simulate(truth, &mut rng)?;
    let refit = adapter.refit(data)?;
    if !refit.fit().converged {
        return Err(Error::DidNotConverge {
            iterations: refit.fit().iterations,
            gradient_norm: refit.fit().gradient_norm,
            last: refit.estimate().to_vec(),
        });
    }
    let s = adapter_statistic(&refit, j, truth[j], plan.family)?;
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::NonFiniteEvaluation)
    }
}

/// Replicate statistics with failed refits dropped and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSample {
    /// Successful replicate values in replicate order.
    pub values: Vec<f64>,
    pub failures: usize,
    pub requested: usize,
}

impl BootstrapSample {
    /// Gathers per-replicate results; fails when more than 5% failed.
    pub fn collect(results: Vec<Result<f64>>) -> Result<Self> {
        let requested = results.len();
        let values: Vec<f64> = results.into_iter().filter_map(|r| r.ok()).collect();
        let failures = requested - values.len();
        if requested == 0 || failures as f64 > MAX_REFIT_FAILURE_SHARE * requested as f64 {
            return Err(Error::RefitFailures {
                failed: failures,
                total: requested,
            });
        }
        Ok(BootstrapSample {
            values,
            failures,
            requested,
        })
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn sd(&self) -> f64 {
        let n = self.values.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n;
        let ss: f64 = self.values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    }

    pub fn quantile(&self, prob: f64) -> f64 {
        quantile_sorted(&self.sorted(), prob)
    }
}

/// Empirical quantile by linear interpolation between order statistics at
/// position `(B + 1)·prob`, clamped to the sample range.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let b = sorted.len();
    if b == 0 {
        return f64::NAN;
    }
    let h = (b as f64 + 1.0) * prob;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= b as f64 {
        return sorted[b - 1];
    }
    let lo = h.floor();
    let i = lo as usize - 1;
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

/// Runs every replicate of `plan` sequentially.
pub fn bootstrap_sample<A: Resample>(adapter: &A, j: usize, plan: &BootstrapPlan) -> Result<BootstrapSample> {
    plan.validate()?;
    check_family(adapter, plan.family)?;
    BootstrapSample::collect(
        (0..plan.replicates)
            .map(|b| bootstrap_replicate(adapter, j, plan, b))
            .collect(),
    )
}

/// Studentized bootstrap interval from an already computed sample.
pub fn studentized_bootstrap_ci_from<A: ModelAdapter + ?Sized>(
    adapter: &A,
    j: usize,
    level: f64,
    plan: &BootstrapPlan,
    sample: &BootstrapSample,
    grid: Option<GridSpec>,
) -> Result<IntervalEstimate> {
    if plan.purpose != BootstrapPurpose::Quantiles {
        return Err(Error::InvalidPlan(String::from(
            "studentized intervals need a quantile plan",
        )));
    }
    check_family(adapter, plan.family)?;
    let surface = wald_surface(adapter, j)?;
    let sorted = sample.sorted();
    let alpha = 1.0 - level;
    let q = (
        quantile_sorted(&sorted, alpha / 2.0),
        quantile_sorted(&sorted, 1.0 - alpha / 2.0),
    );
    let grid = grid.unwrap_or_else(|| GridSpec::around(surface.value, surface.se()));
    let family = plan.family;
    invert_ci(
        |psi| Ok(family.evaluate(&surface, psi)),
        level,
        q,
        grid,
        IntervalMethod::StudentizedBootstrap,
    )
}

/// Studentized bootstrap interval: bootstrap quantiles of the statistic
/// replace the normal ones in the grid inversion.
pub fn studentized_bootstrap_ci<A: Resample>(
    adapter: &A,
    j: usize,
    level: f64,
    plan: &BootstrapPlan,
) -> Result<IntervalEstimate> {
    let sample = bootstrap_sample(adapter, j, plan)?;
    studentized_bootstrap_ci_from(adapter, j, level, plan, &sample, None)
}

/// Bootstrap standard deviations below this are treated as zero.
pub const MIN_BOOTSTRAP_SD: f64 = 1e-12;

/// `t** = t*/sd(t*_b)` from an already computed sample.
pub fn scale_adjusted_from<A: ModelAdapter + ?Sized>(
    adapter: &A,
    j: usize,
    psi0: f64,
    plan: &BootstrapPlan,
    sample: &BootstrapSample,
) -> Result<f64> {
    if plan.purpose != BootstrapPurpose::Variance {
        return Err(Error::InvalidPlan(String::from(
            "scale adjustment needs a variance plan",
        )));
    }
    let sd = sample.sd();
    if !(sd >= MIN_BOOTSTRAP_SD) {
        return Err(Error::ZeroVariance);
    }
    Ok(adapter_statistic(adapter, j, psi0, plan.family)? / sd)
}

/// Location- and scale-adjusted statistic `t**` (or `t̃**`).
pub fn scale_adjusted_statistic<A: Resample>(adapter: &A, j: usize, psi0: f64, plan: &BootstrapPlan) -> Result<f64> {
    let sample = bootstrap_sample(adapter, j, plan)?;
    scale_adjusted_from(adapter, j, psi0, plan, &sample)
}
