//! Run configuration: defaults, optional flat key=value config file,
//! and command-line flags, merged in that order (flags win).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use nsbound_core::{Argument, Principle, SolverConfig};

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl Format {
    pub fn label(self) -> &'static str {
        match self {
            Format::Markdown => "markdown",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Cell selection flags (run/oracle only; `table` fixes its own
/// selection).
#[derive(Debug, Clone, Default, Args)]
pub struct SelectOpts {
    /// Arguments to solve: HNA, CNA (comma-separated; default both)
    #[arg(long = "argument", value_delimiter = ',')]
    pub arguments: Vec<String>,
    /// Principles to apply: NS, IC, ML, LO (comma-separated; default all)
    #[arg(long = "principle", value_delimiter = ',')]
    pub principles: Vec<String>,
    /// Case indices 1..=16 (comma-separated; default all)
    #[arg(long = "case", value_delimiter = ',')]
    pub cases: Vec<String>,
}

/// Solver and sampler knobs.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverOpts {
    /// Number of solver starts per cell
    #[arg(long)]
    pub starts: Option<usize>,
    /// RNG seed for starts and the sampling oracle
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration cap for each inner solve
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Constraint feasibility tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sampling-oracle budget (oracle subcommand)
    #[arg(long)]
    pub samples: Option<usize>,
}

/// Output destination and mode.
#[derive(Debug, Clone, Default, Args)]
pub struct OutputOpts {
    /// Output encoding
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file (flags override its entries)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with code 3 when any delta against the published reference
    /// values exceeds its acceptance threshold
    #[arg(long)]
    pub strict: bool,
}

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub arguments: Vec<Argument>,
    pub principles: Vec<Principle>,
    pub cases: Vec<usize>,
    pub solver: SolverConfig,
    pub oracle_samples: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            arguments: vec![Argument::Hna, Argument::Cna],
            principles: Principle::ALL.to_vec(),
            cases: (1..=16).collect(),
            solver: SolverConfig::default(),
            oracle_samples: 100_000,
            format: Format::Markdown,
            out: None,
            strict: false,
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid with the config file (if given), overlaid with
    /// flags.
    pub fn resolve(
        select: Option<&SelectOpts>,
        solver: &SolverOpts,
        output: &OutputOpts,
    ) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &output.config {
            cfg.apply_file(path)
                .with_context(|| format!("config file {}", path.display()))?;
        }
        if let Some(select) = select {
            if !select.arguments.is_empty() {
                cfg.arguments = parse_each(&select.arguments, parse_argument)?;
            }
            if !select.principles.is_empty() {
                cfg.principles = parse_each(&select.principles, parse_principle)?;
            }
            if !select.cases.is_empty() {
                cfg.cases = parse_each(&select.cases, parse_case)?;
            }
        }
        if let Some(v) = solver.starts {
            cfg.solver.starts = v;
        }
        if let Some(v) = solver.seed {
            cfg.solver.seed = v;
        }
        if let Some(v) = solver.max_iter {
            cfg.solver.max_iter = v;
        }
        if let Some(v) = solver.tol {
            cfg.solver.tol = v;
        }
        if let Some(v) = solver.samples {
            cfg.oracle_samples = v;
        }
        if let Some(v) = output.format {
            cfg.format = v;
        }
        if let Some(v) = &output.out {
            cfg.out = Some(v.clone());
        }
        cfg.strict = output.strict;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.arguments.is_empty() || self.principles.is_empty() || self.cases.is_empty() {
            bail!("selection must name at least one argument, principle, and case");
        }
        if self.solver.starts == 0 {
            bail!("starts must be at least 1");
        }
        if self.oracle_samples == 0 {
            bail!("samples must be at least 1");
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            let value = value.trim();
            let ctx = |what: &str| format!("line {}: invalid {what} {value:?}", i + 1);
            match key.trim() {
                "argument" => {
                    self.arguments = parse_list(value, parse_argument).with_context(|| ctx("argument"))?
                }
                "principle" => {
                    self.principles =
                        parse_list(value, parse_principle).with_context(|| ctx("principle"))?
                }
                "case" => self.cases = parse_list(value, parse_case).with_context(|| ctx("case"))?,
                "starts" => self.solver.starts = value.parse().with_context(|| ctx("starts"))?,
                "seed" => self.solver.seed = value.parse().with_context(|| ctx("seed"))?,
                "max_iter" => {
                    self.solver.max_iter = value.parse().with_context(|| ctx("max_iter"))?
                }
                "tol" => self.solver.tol = value.parse().with_context(|| ctx("tol"))?,
                "samples" => {
                    self.oracle_samples = value.parse().with_context(|| ctx("samples"))?
                }
                "format" => {
                    self.format = match value.to_ascii_lowercase().as_str() {
                        "markdown" => Format::Markdown,
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        other => bail!("line {}: unknown format {other:?}", i + 1),
                    }
                }
                "out" => self.out = Some(PathBuf::from(value)),
                other => bail!("line {}: unknown key {other:?}", i + 1),
            }
        }
        Ok(())
    }
}

pub fn parse_argument(s: &str) -> Result<Argument> {
    match s.trim().to_ascii_uppercase().as_str() {
        "HNA" => Ok(Argument::Hna),
        "CNA" => Ok(Argument::Cna),
        other => Err(anyhow!("unknown argument {other:?} (expected HNA or CNA)")),
    }
}

pub fn parse_principle(s: &str) -> Result<Principle> {
    match s.trim().to_ascii_uppercase().as_str() {
        "NS" => Ok(Principle::Ns),
        "IC" => Ok(Principle::Ic),
        "ML" => Ok(Principle::Ml),
        "LO" => Ok(Principle::Lo),
        other => Err(anyhow!("unknown principle {other:?} (expected NS, IC, ML, or LO)")),
    }
}

pub fn parse_case(s: &str) -> Result<usize> {
    let k: usize = s
        .trim()
        .parse()
        .map_err(|_| anyhow!("case index must be an integer, got {s:?}"))?;
    if !(1..=16).contains(&k) {
        bail!("case index must be in 1..=16, got {k}");
    }
    Ok(k)
}

fn parse_each<T>(items: &[String], f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    items.iter().map(|s| f(s)).collect()
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_everything() {
        let cfg = RunConfig::resolve(None, &SolverOpts::default(), &OutputOpts::default()).unwrap();
        assert_eq!(cfg.arguments.len(), 2);
        assert_eq!(cfg.principles.len(), 4);
        assert_eq!(cfg.cases.len(), 16);
        assert_eq!(cfg.solver.starts, 64);
        assert_eq!(cfg.solver.seed, 1);
        assert_eq!(cfg.oracle_samples, 100_000);
        assert_eq!(cfg.format, Format::Markdown);
    }

    #[test]
    fn flags_override_file_overrides_defaults() {
        let dir = std::env::temp_dir().join("nsbound-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "starts = 5\nseed = 9 # comment\nprinciple = IC,ML\n").unwrap();
        let output = OutputOpts { config: Some(path), ..Default::default() };
        let solver = SolverOpts { seed: Some(2), ..Default::default() };
        let cfg = RunConfig::resolve(None, &solver, &output).unwrap();
        assert_eq!(cfg.solver.starts, 5); // from file
        assert_eq!(cfg.solver.seed, 2); // flag wins
        assert_eq!(cfg.principles, vec![Principle::Ic, Principle::Ml]);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(parse_case("17").is_err());
        assert!(parse_case("0").is_err());
        assert!(parse_argument("XYZ").is_err());
        assert!(parse_principle("QM").is_err());

        let dir = std::env::temp_dir().join("nsbound-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "unknown_key = 1\n").unwrap();
        let output = OutputOpts { config: Some(path), ..Default::default() };
        assert!(RunConfig::resolve(None, &SolverOpts::default(), &output).is_err());
    }
}
