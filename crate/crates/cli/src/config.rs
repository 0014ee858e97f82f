//! Sweep configuration files.

use std::path::PathBuf;

use acalc::alpha::{AlphaParam, FunctionDescriptor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::jobs::{GridOpts, Job};
use crate::output::Format;
use crate::psi::Psi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Meanwidth,
    Bbl,
    Urysohn,
    Poincare,
    GaussianPoincare,
    Variation,
}

/// A number, or `"inf"` for the log-concave case.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Beta {
    Num(f64),
    Text(String),
}

impl Beta {
    fn value(&self) -> Result<f64, String> {
        match self {
            Beta::Num(x) => Ok(*x),
            Beta::Text(s) => parse_beta(s),
        }
    }
}

pub fn parse_beta(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("bad beta `{s}`: {e}")),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub n: usize,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub m: Option<usize>,
}

fn one() -> usize {
    1
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 1,
            lo: None,
            hi: None,
            m: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: Command,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub betas: Vec<Beta>,
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default)]
    pub functions2: Vec<String>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub psi: Vec<String>,
    #[serde(default)]
    pub t_steps: Vec<f64>,
    pub epsilon_schedule: Option<Vec<f64>>,
    pub random: Option<RandomConfig>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    #[serde(default)]
    pub timing: bool,
}

fn require<T>(v: &[T], field: &str, command: Command) -> Result<(), String> {
    if v.is_empty() {
        Err(format!(
            "{command:?} sweep needs a non-empty `{field}` list"
        ))
    } else {
        Ok(())
    }
}

fn parse_all<T: std::str::FromStr>(v: &[String]) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.iter()
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    pub fn grid(&self) -> GridOpts {
        GridOpts {
            n: self.grid.n,
            lo: self.grid.lo,
            hi: self.grid.hi,
            m: self.grid.m,
        }
    }

    pub fn format(&self) -> Result<Option<Format>, String> {
        self.format.as_deref().map(str::parse).transpose()
    }

    fn params(&self) -> Result<Vec<AlphaParam>, String> {
        let mut out = Vec::new();
        for &a in &self.alphas {
            out.push(AlphaParam::new(a).map_err(|e| e.to_string())?);
        }
        for b in &self.betas {
            out.push(AlphaParam::from_beta(b.value()?).map_err(|e| e.to_string())?);
        }
        if out.is_empty() {
            return Err(format!(
                "{:?} sweep needs `alphas` or `betas`",
                self.command
            ));
        }
        Ok(out)
    }

    fn random_draws(&self) -> Vec<FunctionDescriptor> {
        match &self.random {
            Some(r) => {
                let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
                let per = if self.command == Command::Bbl { 2 } else { 1 };
                (0..r.count * per)
                    .map(|_| FunctionDescriptor::random(&mut rng, self.grid.n))
                    .collect()
            }
            None => Vec::new(),
        }
    }

    /// The flat cross product, in declaration order.
    pub fn jobs(&self) -> Result<Vec<Job>, String> {
        let c = self.command;
        let mut jobs = Vec::new();
        match c {
            Command::Meanwidth | Command::Urysohn => {
                let mut fs: Vec<FunctionDescriptor> = parse_all(&self.functions)?;
                fs.extend(self.random_draws());
                require(&fs, "functions", c)?;
                let schedule = self
                    .epsilon_schedule
                    .clone()
                    .unwrap_or_else(|| acalc::meanwidth::DEFAULT_SCHEDULE.to_vec());
                for param in self.params()? {
                    for f in &fs {
                        jobs.push(match c {
                            Command::Meanwidth => Job::MeanWidth {
                                f: f.clone(),
                                param,
                                schedule: schedule.clone(),
                            },
                            _ => Job::Urysohn {
                                f: f.clone(),
                                param,
                            },
                        });
                    }
                }
            }
            Command::Bbl => {
                let fs: Vec<FunctionDescriptor> = parse_all(&self.functions)?;
                let gs: Vec<FunctionDescriptor> = parse_all(&self.functions2)?;
                let mut pairs: Vec<(FunctionDescriptor, FunctionDescriptor)> = fs
                    .iter()
                    .flat_map(|f| gs.iter().map(move |g| (f.clone(), g.clone())))
                    .collect();
                let draws = self.random_draws();
                pairs.extend(draws.chunks(2).map(|p| (p[0].clone(), p[1].clone())));
                require(&pairs, "functions x functions2", c)?;
                require(&self.lambdas, "lambdas", c)?;
                for param in self.params()? {
                    for &lambda in &self.lambdas {
                        for (f, g) in &pairs {
                            jobs.push(Job::Bbl {
                                f: f.clone(),
                                g: g.clone(),
                                param,
                                lambda,
                            });
                        }
                    }
                }
            }
            Command::Poincare | Command::GaussianPoincare | Command::Variation => {
                let psis: Vec<Psi> = parse_all(&self.psi)?;
                require(&psis, "psi", c)?;
                match c {
                    Command::Poincare => {
                        require(&self.betas, "betas", c)?;
                        for b in &self.betas {
                            let beta = b.value()?;
                            jobs.extend(psis.iter().map(|psi| Job::Poincare {
                                psi: psi.clone(),
                                beta,
                            }));
                        }
                    }
                    Command::GaussianPoincare => {
                        jobs.extend(psis.into_iter().map(|psi| Job::GaussianPoincare { psi }));
                    }
                    _ => {
                        require(&self.t_steps, "t_steps", c)?;
                        for &t_step in &self.t_steps {
                            jobs.extend(psis.iter().map(|psi| Job::Variation {
                                psi: psi.clone(),
                                t_step,
                            }));
                        }
                    }
                }
            }
        }
        Ok(jobs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_order() {
        let cfg = SweepConfig::from_json(
            r#"{"command": "urysohn", "betas": [2.5, "inf"], "functions": ["g_alpha", "indicator:-1,1"]}"#,
        )
        .unwrap();
        let names: Vec<String> = cfg.jobs().unwrap().iter().map(Job::name).collect();
        assert_eq!(names.len(), 4);
        assert_eq!(names[0], "urysohn[g_alpha]");
        assert_eq!(names[1], "urysohn[indicator:-1,1]");
    }

    #[test]
    fn random_draws_are_seeded() {
        let text = r#"{"command": "bbl", "alphas": [0], "lambdas": [0.5], "random": {"count": 3, "seed": 9}}"#;
        let a = SweepConfig::from_json(text).unwrap().jobs().unwrap();
        let b = SweepConfig::from_json(text).unwrap().jobs().unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SweepConfig::from_json(r#"{"command": "nope"}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"command": "bbl", "extra": 1}"#).is_err());
        let no_params =
            SweepConfig::from_json(r#"{"command": "urysohn", "functions": ["g_alpha"]}"#).unwrap();
        assert!(no_params.jobs().is_err());
        let bad_fn = SweepConfig::from_json(
            r#"{"command": "urysohn", "betas": [3], "functions": ["blob"]}"#,
        )
        .unwrap();
        assert!(bad_fn.jobs().is_err());
        let no_psi = SweepConfig::from_json(r#"{"command": "gaussian-poincare"}"#).unwrap();
        assert!(no_psi.jobs().is_err());
        let bad_beta = SweepConfig::from_json(
            r#"{"command": "urysohn", "betas": ["lots"], "functions": ["g_alpha"]}"#,
        )
        .unwrap();
        assert!(bad_beta.jobs().is_err());
    }

    #[test]
    fn beta_text() {
        assert_eq!(parse_beta("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_beta("2.5").unwrap(), 2.5);
        assert!(parse_beta("x").is_err());
    }
}
