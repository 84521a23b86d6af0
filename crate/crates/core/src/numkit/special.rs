//! Log-gamma, digamma and polygamma functions via upward recurrence and
//! asymptotic series, plus the standard normal distribution.

use alloc::format;

use num_traits::Float;

use crate::error::{Error, Result};

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Bernoulli numbers B₂, B₄, …, B₂₀.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} requires a finite x > 0, got {x}")))
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    Ok(ln_gamma_raw(x))
}

/// Digamma `ψ(x) = d ln Γ(x)/dx` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(digamma_raw(x))
}

/// Trigamma `ψ′(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    Ok(polygamma_raw(1, x))
}

/// Polygamma `ψ⁽ⁿ⁾(x)` for `1 ≤ n ≤ 6`, `x > 0`.
pub fn polygamma(n: u32, x: f64) -> Result<f64> {
    check_positive("polygamma", x)?;
    if !(1..=6).contains(&n) {
        return Err(Error::Domain(format!("polygamma order {n} not in 1..=6")));
    }
    Ok(polygamma_raw(n, x))
}

pub(crate) fn ln_gamma_raw(mut x: f64) -> f64 {
    let mut prod = 1.0;
    while x < 10.0 {
        prod *= x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Σ B₂ₖ / (2k(2k−1) x^{2k−1})
    let mut series = 0.0;
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().take(7).enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += b / (two_k * (two_k - 1.0)) * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series - prod.ln()
}

pub(crate) fn digamma_raw(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().take(7).enumerate() {
        series += b / (2.0 * (k as f64 + 1.0)) * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

pub(crate) fn trigamma_raw(x: f64) -> f64 {
    polygamma_raw(1, x)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub(crate) fn polygamma_raw(n: u32, mut x: f64) -> f64 {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let nf = factorial(n);
    let mut acc = 0.0;
    let threshold = 15.0 + 2.0 * n as f64;
    while x < threshold {
        acc += 1.0 / x.powi(n as i32 + 1);
        x += 1.0;
    }
    acc *= nf;

    // (n−1)!/xⁿ + n!/(2xⁿ⁺¹) + Σ B₂ₖ (2k+n−1)!/((2k)! x^{2k+n})
    let inv = 1.0 / x;
    let mut asym = factorial(n - 1) * inv.powi(n as i32) + 0.5 * nf * inv.powi(n as i32 + 1);
    let inv2 = inv * inv;
    let mut pow = inv.powi(n as i32) * inv2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2 * (k as u32 + 1);
        // (2k+n−1)!/(2k)!
        let ratio = ((two_k + 1)..=(two_k + n - 1)).fold(1.0, |a, v| a * v as f64);
        asym += b * ratio * pow;
        pow *= inv2;
    }
    sign * (acc + asym)
}

pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(z)` without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile (Wichura's AS 241, ~1e-16 relative accuracy).
/// Returns ∓∞ at p = 0, 1 and NaN outside [0, 1].
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_13) * r + 67265.770_927_008_7) * r
                + 45921.953_931_549_87)
                * r
                + 13731.693_765_509_46)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((r * 5226.495_278_852_545 + 28729.085_735_721_94) * r + 39307.895_800_092_71) * r
                + 21213.794_301_586_6)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6) * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r + 0.001_242_660_947_388_078_4) * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_87)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Logistic function `eˣ/(1+eˣ)` evaluated without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn digamma_at_one_is_minus_euler() {
        assert!((digamma(1.0).unwrap() + EULER_MASCHERONI).abs() < 1e-13);
    }

    #[test]
    fn trigamma_at_one() {
        assert!((trigamma(1.0).unwrap() - PI * PI / 6.0).abs() < 1e-13);
    }

    #[test]
    fn digamma_half_integer_oracle() {
        // ψ(1/2) = −γ − 2 ln 2, then ψ(x+1) = ψ(x) + 1/x up to 10.5
        let mut expected = -EULER_MASCHERONI - 2.0 * core::f64::consts::LN_2;
        let mut x = 0.5;
        while x < 10.0 {
            expected += 1.0 / x;
            x += 1.0;
        }
        assert!((digamma(10.5).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn trigamma_series_oracle() {
        // ψ′(x) = Σ 1/(x+k)², summed directly with an Euler–Maclaurin tail
        for &x in &[1.0, 2.5, 7.25, 30.0] {
            let n = 20_000;
            let mut s = 0.0;
            for k in (0..n).rev() {
                let v = x + k as f64;
                s += 1.0 / (v * v);
            }
            let m = x + n as f64;
            s += 1.0 / m + 0.5 / (m * m) + 1.0 / (6.0 * m * m * m);
            assert!((trigamma(x).unwrap() - s).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn polygamma_matches_finite_differences_of_lower_order() {
        for &x in &[0.3, 1.0, 4.5, 12.0] {
            let h = 1e-4;
            for n in 1..=3u32 {
                let lower = |t: f64| {
                    if n == 1 {
                        digamma_raw(t)
                    } else {
                        polygamma_raw(n - 1, t)
                    }
                };
                let fd = (lower(x + h) - lower(x - h)) / (2.0 * h);
                let exact = polygamma_raw(n, x);
                assert!(
                    (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "n={n} x={x}: {fd} vs {exact}"
                );
            }
        }
        // ψ″(1) = −2ζ(3)
        let zeta3 = 1.202_056_903_159_594_2;
        assert!((polygamma(2, 1.0).unwrap() + 2.0 * zeta3).abs() < 1e-12);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(ln_gamma(2.0).unwrap().abs() < 1e-14);
        assert!((ln_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-14);
        // ln 10! = ln Γ(11)
        let ln_fact10: f64 = (1..=10).map(|k| (k as f64).ln()).sum();
        assert!((ln_gamma(11.0).unwrap() - ln_fact10).abs() < 1e-12);
        assert!((ln_gamma(100.5).unwrap() - 361.435_540_467_777_6).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(digamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(trigamma(-1.0), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-10, 0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999_999] {
            let z = normal_quantile(p);
            assert!((normal_cdf(z) - p).abs() < 1e-14 * (1.0 + 1.0 / p), "p = {p}");
        }
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
    }
}
