use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PhaseDiagram,
    Spectrum,
    Edge,
    Disorder,
    Dynamics,
    Decay,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PhaseDiagram => "phase-diagram",
            Command::Spectrum => "spectrum",
            Command::Edge => "edge",
            Command::Disorder => "disorder",
            Command::Dynamics => "dynamics",
            Command::Decay => "decay",
        }
    }

    /// Model default for the chiral projection: the open-chain studies use it, the
    /// dissipative and bulk ones do not.
    fn default_chiral(self) -> bool {
        matches!(self, Command::Spectrum | Command::Edge | Command::Disorder)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BlochRange {
    /// Sums up to ⌊M/4⌋.
    #[default]
    Quarter,
    /// Sums up to M/2.
    Half,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    #[default]
    BOverA,
    AOverLambda,
}

/// Initial single-excitation state for `dynamics`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Initial {
    /// `(e₁ + e₂)/√2`.
    #[default]
    EdgePair,
    /// A lone atom next to the waveguide.
    SingleAtom,
    /// Equal superposition of the listed 1-based sites.
    Sites(Vec<usize>),
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initial::EdgePair => f.write_str("edge-pair"),
            Initial::SingleAtom => f.write_str("single-atom"),
            Initial::Sites(s) => {
                let list: Vec<String> = s.iter().map(|i| i.to_string()).collect();
                write!(f, "sites:{}", list.join(","))
            }
        }
    }
}

impl FromStr for Initial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge-pair" => Ok(Initial::EdgePair),
            "single-atom" => Ok(Initial::SingleAtom),
            _ => {
                let list = s
                    .strip_prefix("sites:")
                    .ok_or_else(|| format!("unknown initial state '{s}'"))?;
                let sites = list
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad site '{t}': {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                if sites.is_empty() || sites.contains(&0) {
                    return Err("sites are 1-based and the list must not be empty".into());
                }
                Ok(Initial::Sites(sites))
            }
        }
    }
}

impl Serialize for Initial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Initial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Optional settings, as read from a TOML file or collected from flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub sites: Option<usize>,
    pub a_over_lambda: Option<f64>,
    pub b_over_a: Option<f64>,
    pub b_over_lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub chiral: Option<bool>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub plot: Option<bool>,

    pub a_max: Option<f64>,
    pub a_count: Option<usize>,
    pub b_max: Option<f64>,
    pub b_count: Option<usize>,
    pub n_k: Option<usize>,
    pub check_analytic: Option<bool>,
    pub bloch_range: Option<BlochRange>,

    pub sweep: Option<SweepVariable>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub count: Option<usize>,

    pub realizations: Option<usize>,
    pub sigma: Option<Vec<f64>>,
    pub delta_j: Option<Vec<f64>>,

    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub dt: Option<f64>,
    pub initial: Option<Initial>,
    pub hybrid: Option<bool>,
}

impl Overrides {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(e, path))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fields set here win over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: self.$f.or(base.$f)),* } };
        }
        let mut merged = pick!(
            sites, a_over_lambda, b_over_a, b_over_lambda, gamma, chiral, seed, workers, format,
            output, plot, a_max, a_count, b_max, b_count, n_k, check_analytic, bloch_range, sweep,
            from, to, count, realizations, sigma, delta_j, t_max, samples, dt, initial, hybrid
        );
        // b is one quantity with two spellings; a flag in either spelling beats the file.
        if self.b_over_a.is_some() || self.b_over_lambda.is_some() {
            merged.b_over_a = self.b_over_a;
            merged.b_over_lambda = self.b_over_lambda;
        }
        merged
    }
}

/// Fully resolved settings. Embedded in every output and sufficient to re-run it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub sites: usize,
    pub a_over_lambda: f64,
    /// Exactly one of `b_over_a` / `b_over_lambda` is set.
    pub b_over_a: Option<f64>,
    pub b_over_lambda: Option<f64>,
    pub gamma: f64,
    pub chiral: bool,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub plot: bool,

    pub a_max: f64,
    pub a_count: usize,
    pub b_max: f64,
    pub b_count: usize,
    pub n_k: usize,
    pub check_analytic: bool,
    pub bloch_range: BlochRange,

    pub sweep: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub count: usize,

    pub realizations: usize,
    pub sigma: Vec<f64>,
    pub delta_j: Vec<f64>,

    pub t_max: f64,
    pub samples: usize,
    pub dt: f64,
    pub initial: Initial,
    pub hybrid: bool,
}

pub const DEFAULT_SEED: u64 = 20_240_521;

impl RunConfig {
    pub fn resolve(command: Command, o: Overrides) -> Result<Self, CliError> {
        if o.b_over_a.is_some() && o.b_over_lambda.is_some() {
            return Err(CliError::Usage(
                "give b either as b/a or as b/λ, not both".into(),
            ));
        }
        let b_over_a = match (o.b_over_a, o.b_over_lambda) {
            (None, None) => Some(0.4),
            (r, _) => r,
        };
        let (from_default, to_default) = match o.sweep.unwrap_or_default() {
            SweepVariable::BOverA => (0.3, 0.5),
            SweepVariable::AOverLambda => (1.0, 1.5),
        };
        let cfg = RunConfig {
            command,
            sites: o.sites.unwrap_or(10),
            a_over_lambda: o.a_over_lambda.unwrap_or(1.25),
            b_over_a,
            b_over_lambda: o.b_over_lambda,
            gamma: o.gamma.unwrap_or(1.0),
            chiral: o.chiral.unwrap_or(command.default_chiral()),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            format: o.format.unwrap_or_default(),
            output: o.output,
            plot: o.plot.unwrap_or(false),
            a_max: o.a_max.unwrap_or(2.0),
            a_count: o.a_count.unwrap_or(200),
            b_max: o.b_max.unwrap_or(1.0),
            b_count: o.b_count.unwrap_or(200),
            n_k: o.n_k.unwrap_or(256),
            check_analytic: o.check_analytic.unwrap_or(false),
            bloch_range: o.bloch_range.unwrap_or_default(),
            sweep: o.sweep.unwrap_or_default(),
            from: o.from.unwrap_or(from_default),
            to: o.to.unwrap_or(to_default),
            count: o.count.unwrap_or(201),
            realizations: o.realizations.unwrap_or(5000),
            sigma: o.sigma.unwrap_or_default(),
            delta_j: o.delta_j.unwrap_or_default(),
            t_max: o.t_max.unwrap_or(10.0),
            samples: o.samples.unwrap_or(1000),
            dt: o.dt.unwrap_or(1e-3),
            initial: o.initial.unwrap_or_default(),
            hybrid: o.hybrid.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        let finite = [
            self.a_over_lambda,
            self.gamma,
            self.a_max,
            self.b_max,
            self.from,
            self.to,
            self.t_max,
            self.dt,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("numeric settings must be finite".into());
        }
        if self.count < 2 && self.command == Command::Spectrum {
            return bad(format!("a sweep needs at least 2 points, got {}", self.count));
        }
        if self.realizations == 0 {
            return bad("realizations must be positive".into());
        }
        if self.samples == 0 || !(self.t_max > 0.0) || !(self.dt > 0.0) {
            return bad("dynamics needs t_max > 0, dt > 0 and samples ≥ 1".into());
        }
        if self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("σ values must be ≥ 0".into());
        }
        if self.delta_j.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return bad("δJ targets must be > 0".into());
        }
        if !self.sigma.is_empty() && !self.delta_j.is_empty() {
            return bad("give either σ values or δJ targets, not both".into());
        }
        if let Initial::Sites(s) = &self.initial {
            if s.iter().any(|&i| i > self.sites) {
                return bad(format!("initial sites must lie in 1..={}", self.sites));
            }
        }
        if self.plot && self.output.is_none() {
            return bad("--plot needs --output to name the SVG file".into());
        }
        Ok(())
    }
}
