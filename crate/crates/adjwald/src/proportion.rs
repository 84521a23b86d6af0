//! Intervals for a binomial proportion, and their exact coverage.

use adjwald_core::oneparam::{default_probability_grid, exact_coverage, BernoulliSample, ProportionMethod};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Table};

fn methods(name: &str) -> CliResult<Vec<(ProportionMethod, &'static str)>> {
    let tts = (ProportionMethod::TTildeStar, "t~*");
    let ac = (ProportionMethod::AgrestiCoull, "agresti-coull");
    match name {
        "t~*" => Ok(vec![tts]),
        "agresti-coull" => Ok(vec![ac]),
        "both" => Ok(vec![tts, ac]),
        other => Err(CliError::Config(format!("unknown proportion method {other:?}"))),
    }
}

pub fn proportion(config: &Config) -> CliResult<Table> {
    let c = &config.proportion;
    let n = c.n.ok_or_else(|| CliError::Config("proportion needs n".into()))?;
    let methods = methods(&c.method)?;
    let grid = if !c.coverage_grid.is_empty() {
        Some(c.coverage_grid.clone())
    } else {
        c.coverage_points.map(default_probability_grid)
    };
    if let Some(grid) = grid {
        let mut table = Table::new(
            "proportion",
            &["method", "n", "level", "p", "coverage", "expected_length"],
        );
        for (method, label) in methods {
            for point in exact_coverage(n, c.level, method, &grid).map_err(CliError::data)? {
                table.push(vec![
                    Cell::text(label),
                    Cell::Int(n as i64),
                    Cell::num(c.level),
                    Cell::num(point.p),
                    Cell::num(point.coverage),
                    Cell::num(point.expected_length),
                ]);
            }
        }
        table.meta("mode", Cell::text("coverage"));
        return Ok(table);
    }
    let k =
        c.k.ok_or_else(|| CliError::Config("proportion needs k (or a coverage grid)".into()))?;
    let sample = BernoulliSample::new(n, k).map_err(CliError::data)?;
    let mut table = Table::new(
        "proportion",
        &["method", "n", "k", "level", "estimate", "lower", "upper"],
    );
    for (method, label) in methods {
        let ci = method.interval(sample, c.level).map_err(CliError::model)?;
        table.push(vec![
            Cell::text(label),
            Cell::Int(n as i64),
            Cell::Int(k as i64),
            Cell::num(c.level),
            Cell::num(sample.mean()),
            Cell::num(ci.lower),
            Cell::num(ci.upper),
        ]);
    }
    table.meta("mode", Cell::text("interval"));
    Ok(table)
}
