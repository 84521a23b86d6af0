//! Run configuration: a sectioned TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

/// Reference text for `--help`.
pub const CONFIG_KEYS: &str = "\
CONFIG FILE (TOML; every key is optional, flags override the file)
  [data]       path, response, mean = [terms], precision = [terms],
               intercept = true, precision_intercept = true, weights
               (terms: column, log(term), a:b; relative paths resolve
               against the config file's directory)
  [model]      family = binomial-logit | binomial-probit | poisson-log |
                        gamma-log | gaussian-identity | beta
               dispersion = pearson | ml      (plug-in for ML fits)
               derivatives = analytic | numeric
  [inference]  parameters = [names]   (default: all)
               psi0 = [values]        (one value, or one per parameter)
               statistics = [t, t*, t~, t~*, r, t**, t~**]
                            (suffix @ml or @pearson picks the plug-in;
                            default t, t*, t~, t~*, or t, t* for the
                            exponential generator)
               levels = [0.95], method = normal | studentized | both,
               alternative = two-sided | less | greater,
               grid_points, grid_half_width (in standard errors)
  [bootstrap]  replicates = 500, seed = 1
  [simulate]   generator = fit | bernoulli | exponential | synthetic-batch,
               replicates = 5000, seed = 1,
               targets = [coverage, rejection, pvalue, mean],
               levels = [0.95], alphas = [0.05], pvalue_points = [...],
               n, theta, exact = false, voxels = 100, coefficients = [...]
  [proportion] n, k, level = 0.95, method = t~* | agresti-coull | both,
               coverage_points, coverage_grid = [...]
  [output]     format = csv | json, threads, timing = false, path

ENVIRONMENT
  ADJWALD_THREADS  caps the worker count

EXIT CODES
  0 ok, 2 model error, 3 data error, 4 config error";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub data: DataSection,
    pub model: ModelSection,
    pub inference: InferenceSection,
    pub bootstrap: BootstrapSection,
    pub simulate: SimulateSection,
    pub proportion: ProportionSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub response: Option<String>,
    pub mean: Vec<String>,
    pub precision: Vec<String>,
    pub intercept: bool,
    pub precision_intercept: bool,
    pub weights: Option<String>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            response: None,
            mean: Vec::new(),
            precision: Vec::new(),
            intercept: true,
            precision_intercept: true,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub family: Option<String>,
    pub dispersion: String,
    pub derivatives: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            family: None,
            dispersion: "pearson".into(),
            derivatives: "analytic".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceSection {
    pub parameters: Vec<String>,
    pub psi0: Vec<f64>,
    pub statistics: Vec<String>,
    pub levels: Vec<f64>,
    pub method: String,
    pub alternative: String,
    pub grid_points: Option<usize>,
    pub grid_half_width: Option<f64>,
}

impl Default for InferenceSection {
    fn default() -> Self {
        InferenceSection {
            parameters: Vec::new(),
            psi0: Vec::new(),
            statistics: Vec::new(),
            levels: vec![0.95],
            method: "normal".into(),
            alternative: "two-sided".into(),
            grid_points: None,
            grid_half_width: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapSection {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        BootstrapSection {
            replicates: 500,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub generator: String,
    pub replicates: usize,
    pub seed: u64,
    pub targets: Vec<String>,
    pub levels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub pvalue_points: Vec<f64>,
    pub n: Option<u64>,
    pub theta: Option<f64>,
    pub exact: bool,
    pub voxels: usize,
    pub coefficients: Vec<f64>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            generator: "fit".into(),
            replicates: 5000,
            seed: 1,
            targets: vec!["coverage".into(), "rejection".into()],
            levels: vec![0.95],
            alphas: vec![0.05],
            pvalue_points: (1..=20).map(|i| i as f64 * 0.05).collect(),
            n: None,
            theta: None,
            exact: false,
            voxels: 100,
            coefficients: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProportionSection {
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub level: f64,
    pub method: String,
    pub coverage_points: Option<usize>,
    pub coverage_grid: Vec<f64>,
}

impl Default for ProportionSection {
    fn default() -> Self {
        ProportionSection {
            n: None,
            k: None,
            level: 0.95,
            method: "t~*".into(),
            coverage_points: None,
            coverage_grid: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: String,
    pub threads: Option<usize>,
    pub timing: bool,
    pub path: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            format: "csv".into(),
            threads: None,
            timing: false,
            path: None,
        }
    }
}

/// Flag values keyed by `(section, key)`, applied over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides(Vec<(&'static str, &'static str, Value)>);

impl Overrides {
    pub fn set(&mut self, section: &'static str, key: &'static str, value: impl Into<Value>) {
        self.0.push((section, key, value.into()));
    }

    pub fn set_opt<T: Into<Value>>(&mut self, section: &'static str, key: &'static str, value: Option<T>) {
        if let Some(v) = value {
            self.set(section, key, v);
        }
    }

    pub fn set_list<T: Clone + Into<Value>>(&mut self, section: &'static str, key: &'static str, values: &[T]) {
        if !values.is_empty() {
            let list: Vec<Value> = values.iter().cloned().map(Into::into).collect();
            self.set(section, key, Value::Array(list));
        }
    }
}

fn section_mut<'a>(table: &'a mut Table, name: &str) -> CliResult<&'a mut Table> {
    table
        .entry(name)
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .ok_or_else(|| CliError::Config(format!("[{name}] must be a section")))
}

/// Reads `file` if given, rebases its relative paths, then applies `overrides`.
pub fn load(file: Option<&Path>, overrides: &Overrides) -> CliResult<Config> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let mut table: Table = text
                .parse()
                .map_err(|e: toml::de::Error| CliError::Config(format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new(""));
            for section in ["data", "output"] {
                if let Some(Value::Table(s)) = table.get_mut(section) {
                    if let Some(Value::String(p)) = s.get_mut("path") {
                        if Path::new(p.as_str()).is_relative() {
                            *p = base.join(p.as_str()).to_string_lossy().into_owned();
                        }
                    }
                }
            }
            table
        }
        None => Table::new(),
    };
    for (section, key, value) in &overrides.0 {
        section_mut(&mut table, section)?.insert(key.to_string(), value.clone());
    }
    let config: Config = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string().trim().to_string()))?;
    config.validate()?;
    Ok(config)
}

impl Config {
    fn validate(&self) -> CliResult<()> {
        let bad_level = |l: &f64| !(*l > 0.0 && *l < 1.0);
        if self.inference.levels.iter().any(bad_level) || self.simulate.levels.iter().any(bad_level) {
            return Err(CliError::Config("levels must lie in (0, 1)".into()));
        }
        if self.simulate.alphas.iter().any(bad_level) || bad_level(&self.proportion.level) {
            return Err(CliError::Config("alphas and levels must lie in (0, 1)".into()));
        }
        if !matches!(self.output.format.as_str(), "csv" | "json") {
            return Err(CliError::Config(format!(
                "unknown output format {:?}",
                self.output.format
            )));
        }
        if self.output.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        Ok(())
    }
}
