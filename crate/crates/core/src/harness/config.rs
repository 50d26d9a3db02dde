//! Flat `key = value` configuration files with `[section]` headers.
//!
//! ```text
//! # two-point law omega = +-0.5
//! [law]
//! omegas = 0.5
//! lambdas = 0.5
//!
//! [model]
//! K = 4
//! delta = 1
//! ```
//!
//! Keys before the first header belong to the section `""`. Lists are comma
//! separated. Comments start with `#`.
//!
//! | section      | key            | meaning                                   | default        |
//! |--------------|----------------|-------------------------------------------|----------------|
//! | `law`        | `omegas`       | positive frequencies                      | `1`            |
//! | `law`        | `lambdas`      | their weights (sum 1/2)                   | equal          |
//! | `model`      | `K`            | coupling                                  | `2`            |
//! | `model`      | `delta`        | disorder strength                         | `0.05`         |
//! | `model`      | `n_modes`      | Fourier truncation                        | `64`           |
//! | `model`      | `n_grid`       | collocation points                        | `512`          |
//! | `simulation` | `N`            | rotators                                  | `400`          |
//! | `simulation` | `seed`         | master seed                               | `1`            |
//! | `simulation` | `dt`           | Euler-Maruyama step                       | `0.005`        |
//! | `simulation` | `T`            | tracking window (real time)               | shortest valid |
//! | `simulation` | `t_final`      | horizon in rescaled time `t / sqrt(N)`    | `5`            |
//! | `simulation` | `ic`           | `from_profile` or `uniform`               | `from_profile` |
//! | `simulation` | `sigma`        | tube radius (calibrated when absent)      |                |
//! | `simulation` | `burn_in_c`    | burn-in constant `c` in `c log N / sqrt N`|  see below     |
//! | `simulation` | `sample`       | disorder fixture file (iid when absent)   |                |
//! | `simulation` | `snapshot_every` | windows between snapshot dumps          | `10`           |
//! | `drift`      | `xi`           | fluctuation vector (dense order)          |                |
//! | `pde`        | `t_end`        | horizon                                   | `8`            |
//! | `pde`        | `epsilon`      | perturbation size                         | `0.001`        |
//! | `pde`        | `fit_start`    | start of the decay fit                    | `1`            |
//! | `pde`        | `sample_every` | observation interval                      | `0.25`         |
//! | `expand`     | `deltas`       | disorder strengths                        | `0.01,0.02,0.04` |
//! | `output`     | `out_dir`      | output directory                          | `out`          |
//!
//! When `burn_in_c` is absent it is chosen so that the burn-in is at least
//! `5 / gamma_L` in real time. `T` must be at least 1 and satisfy
//! `exp(-gamma_L T) <= 1 / (4 C_L C_P)`; when absent the shortest such window
//! is used.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::spaces::GridSpec;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse(format!("line {}: unterminated section header", lineno + 1)))?;
                section = name.trim().to_string();
                cfg.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            cfg.set(&section, key, value.trim());
        }
        Ok(cfg)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, entries) in &self.sections {
            if !name.is_empty() {
                if !first {
                    writeln!(f)?;
                }
                writeln!(f, "[{}]", name)?;
            }
            for (k, v) in entries {
                writeln!(f, "{} = {}", k, v)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    pub fn sections(&self) -> &BTreeMap<String, BTreeMap<String, String>> {
        &self.sections
    }

    pub fn parse_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("[{}] {} = '{}' is not valid", section, key, v))),
        }
    }

    pub fn parse_opt<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.get(section, key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("[{}] {} = '{}' is not valid", section, key, v)))
            })
            .transpose()
    }

    pub fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(section, key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("[{}] {}: '{}' is not a number", section, key, x)))
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Typed view of the keys shared by all subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub law: DisorderLaw,
    pub k: f64,
    pub delta: f64,
    pub n_modes: usize,
    pub n_grid: usize,
    pub n: usize,
    pub seed: u64,
    pub dt: f64,
    pub window: Option<f64>,
    pub t_final: f64,
    pub ic: String,
    pub sigma: Option<f64>,
    pub burn_in_c: Option<f64>,
    pub sample: Option<String>,
    pub snapshot_every: usize,
    pub out_dir: String,
}

impl ExperimentConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let omegas = cfg.list("law", "omegas")?.unwrap_or_else(|| vec![1.0]);
        let lambdas = cfg
            .list("law", "lambdas")?
            .unwrap_or_else(|| vec![0.5 / omegas.len() as f64; omegas.len()]);
        let law = DisorderLaw::new(&omegas, &lambdas)?;
        let out = ExperimentConfig {
            law,
            k: cfg.parse_or("model", "K", 2.0)?,
            delta: cfg.parse_or("model", "delta", 0.05)?,
            n_modes: cfg.parse_or("model", "n_modes", 64)?,
            n_grid: cfg.parse_or("model", "n_grid", 512)?,
            n: cfg.parse_or("simulation", "N", 400)?,
            seed: cfg.parse_or("simulation", "seed", 1)?,
            dt: cfg.parse_or("simulation", "dt", 5e-3)?,
            window: cfg.parse_opt("simulation", "T")?,
            t_final: cfg.parse_or("simulation", "t_final", 5.0)?,
            ic: cfg.parse_or("simulation", "ic", "from_profile".to_string())?,
            sigma: cfg.parse_opt("simulation", "sigma")?,
            burn_in_c: cfg.parse_opt("simulation", "burn_in_c")?,
            sample: cfg.parse_opt("simulation", "sample")?,
            snapshot_every: cfg.parse_or("simulation", "snapshot_every", 10)?,
            out_dir: cfg.parse_or("output", "out_dir", "out".to_string())?,
        };
        if out.k <= 0.0 || out.delta < 0.0 || out.dt <= 0.0 || out.n == 0 {
            return Err(Error::Config("K, dt, T and N must be positive and delta non-negative".into()));
        }
        Ok(out)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(&self.law, self.n_modes, self.n_grid)
    }
}
