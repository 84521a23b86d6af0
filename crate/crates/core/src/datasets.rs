//! Small reference datasets used by tests, examples and the CLI.

use alloc::vec::Vec;

use crate::numkit::linalg::Matrix;

/// Blood clotting times (seconds) for nine plasma concentrations (percent)
/// and two lots of clotting agent, as tabulated by McCullagh and Nelder
/// (1989, §8.4.2).
pub mod clotting {
    pub const CONCENTRATION: [f64; 9] = [5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0];
    pub const LOT1: [f64; 9] = [118.0, 58.0, 42.0, 35.0, 27.0, 25.0, 21.0, 19.0, 18.0];
    pub const LOT2: [f64; 9] = [69.0, 35.0, 26.0, 21.0, 18.0, 16.0, 13.0, 12.0, 12.0];
    pub const NAMES: [&str; 4] = ["intercept", "log_plasma", "lot2", "log_plasma:lot2"];
}

/// Rows of the clotting data as `(concentration, lot, time)` with lot 1 first.
pub fn clotting_rows() -> Vec<(f64, u8, f64)> {
    let mut rows = Vec::with_capacity(18);
    for (lot, times) in [(1u8, clotting::LOT1), (2u8, clotting::LOT2)] {
        for (c, t) in clotting::CONCENTRATION.iter().zip(times) {
            rows.push((*c, lot, t));
        }
    }
    rows
}

/// Design `(1, log u, lot2, log u · lot2)` and response for the clotting data.
/// The logarithm of the plasma concentration is the covariate: it reproduces
/// the published estimates, the untransformed concentration does not.
pub fn clotting_design() -> (Matrix, Vec<f64>) {
    let rows = clotting_rows();
    let x = Matrix::from_fn(rows.len(), 4, |i, j| {
        let (u, lot, _) = rows[i];
        let lu = libm::log(u);
        let d = if lot == 2 { 1.0 } else { 0.0 };
        match j {
            0 => 1.0,
            1 => lu,
            2 => d,
            _ => lu * d,
        }
    });
    (x, rows.iter().map(|r| r.2).collect())
}

/// Reading accuracy of 44 children (Smithson and Verkuilen, 2006), with
/// dyslexia status and a standardized nonverbal IQ score. Accuracy scores
/// of 1 were replaced by 0.99 in the source.
pub mod reading_skills {
    /// `(accuracy, dyslexic, iq)`.
    pub const ROWS: [(f64, bool, f64); 44] = [
        (0.88386, false, 0.827),
        (0.76524, false, 0.590),
        (0.91508, false, 0.471),
        (0.98376, false, 1.144),
        (0.88386, false, -0.676),
        (0.70905, false, -0.795),
        (0.77148, false, -0.281),
        (0.99, false, -0.914),
        (0.99, false, -0.043),
        (0.99, false, 0.907),
        (0.99, false, 0.511),
        (0.99, false, 1.223),
        (0.99, false, 0.590),
        (0.99, false, 1.856),
        (0.99, false, -0.399),
        (0.99, false, 0.590),
        (0.70281, false, -0.043),
        (0.99, false, 1.738),
        (0.66535, false, 0.471),
        (0.99, false, 1.619),
        (0.95878, false, 1.144),
        (0.99, false, -0.201),
        (0.73402, false, -0.281),
        (0.64662, false, 0.590),
        (0.99, false, 1.777),
        (0.57794, true, -0.083),
        (0.64038, true, -0.162),
        (0.45932, true, -0.795),
        (0.65286, true, -0.281),
        (0.60916, true, -0.874),
        (0.60916, true, 0.313),
        (0.54048, true, 0.709),
        (0.57170, true, 1.223),
        (0.70281, true, -1.230),
        (0.56546, true, -0.162),
        (0.53424, true, -0.993),
        (0.57794, true, -1.191),
        (0.69032, true, -1.745),
        (0.54673, true, -1.745),
        (0.68408, true, -0.439),
        (0.59043, true, -1.666),
        (0.62165, true, -1.507),
        (0.67159, true, -0.518),
        (0.66535, true, -1.270),
    ];
    pub const MEAN_NAMES: [&str; 4] = ["intercept", "dyslexia", "iq", "dyslexia:iq"];
    pub const PRECISION_NAMES: [&str; 3] = ["intercept", "dyslexia", "iq"];
}

/// Mean design `(1, x₂, iq, x₂·iq)`, precision design `(1, x₂, iq)` and
/// response, with `x₂ = +1` for dyslexic children and `−1` otherwise.
pub fn reading_skills_design() -> (Matrix, Matrix, Vec<f64>) {
    let rows = &reading_skills::ROWS;
    let dys = |i: usize| if rows[i].1 { 1.0 } else { -1.0 };
    let x = Matrix::from_fn(rows.len(), 4, |i, j| match j {
        0 => 1.0,
        1 => dys(i),
        2 => rows[i].2,
        _ => dys(i) * rows[i].2,
    });
    let z = Matrix::from_fn(rows.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => dys(i),
        _ => rows[i].2,
    });
    (x, z, rows.iter().map(|r| r.0).collect())
}

/// Synthetic regression data with reproducible covariates, used as fixtures
/// and by the CLI's synthetic batch mode.
pub mod synthetic {
    use alloc::vec::Vec;

    use crate::error::Result;
    use crate::glm::Family;
    use crate::numkit::linalg::Matrix;
    use crate::numkit::rng::RngStream;

    /// Design with an intercept, standard normal columns and, when
    /// `binary_last`, a final 0/1 column.
    pub fn design(n: usize, k: usize, binary_last: bool, rng: &mut RngStream) -> Matrix {
        let mut x = Matrix::zeros(n, k);
        for i in 0..n {
            x[(i, 0)] = 1.0;
            for j in 1..k {
                x[(i, j)] = if binary_last && j == k - 1 {
                    if rng.uniform() < 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    rng.standard_normal()
                };
            }
        }
        x
    }

    /// Responses drawn from `family` at `Xβ` with unit weights.
    pub fn response(family: Family, x: &Matrix, beta: &[f64], phi: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
        (0..x.nrows())
            .map(|i| {
                let eta: f64 = (0..x.ncols()).map(|j| x[(i, j)] * beta[j]).sum();
                family.simulate(family.link_point(eta).mu, 1.0, phi, rng)
            })
            .collect()
    }
}
