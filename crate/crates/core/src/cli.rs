//! Batch front end: `space`, `continue`, `scan`, `subspace` and `check`.
//!
//! Exit codes: 0 when everything requested passed, 1 when a check failed or a
//! computation was refused, 2 on unreadable or malformed input. Every output
//! embeds the effective configuration; output contains no timestamps, so
//! equal configurations produce byte-identical files.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::checks::{self, CheckReport, Sampling, Suite};
use crate::coeffspace::{make_space, CoeffFunction, SpaceModel, WeightKind, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::probes;
use crate::resolvent::continue_f;
use crate::spectra::{self, GridSpec, Operator, OperatorTag};
use crate::subspaces::{self, InvariantSubspace, SubspaceDescriptor};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SHIFTLAB_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "shiftlab", version, about = "Left-invertible multiplication operators on weighted coefficient spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Space descriptor JSON `{kind, beta?, d, N, tol}` (default: Hardy, d = 1, N = 256).
    #[arg(long, global = true)]
    pub space: Option<PathBuf>,
    /// Function descriptor JSON `{fiber_dim, coeffs, tail_bound}`.
    #[arg(long = "f", global = true)]
    pub function: Option<PathBuf>,
    /// Subspace descriptor JSON `{generators, mode, tolerance}`.
    #[arg(long, global = true)]
    pub subspace: Option<PathBuf>,
    /// Complex parameter such as `1.6`, `-0.5+0.2i` or `2i`; repeatable.
    #[arg(long = "lambda", global = true, allow_hyphen_values = true)]
    pub lambdas: Vec<String>,
    /// `center,radius,resolution`, the center a complex literal.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Check to run: all, axioms, sot, cd, density, solvability, blowup, reciprocal.
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Output file (default: `$SHIFTLAB_OUTPUT_DIR/shiftlab-<command>.<ext>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override of the truncation degree N.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Override of the grid resolution.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub operator: Option<OperatorArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Validate a space with the model axioms check.
    Space,
    /// Evaluate the continuation at each --lambda.
    Continue,
    /// Write a spectral indicator scan as CSV.
    Scan,
    /// Build a subspace, report its spectrum and the disc identity.
    Subspace,
    /// Run the named check or the full suite.
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OperatorArg {
    Mz,
    L,
    RestrictionMatrix,
}

impl From<OperatorArg> for OperatorTag {
    fn from(o: OperatorArg) -> Self {
        match o {
            OperatorArg::Mz => OperatorTag::Mz,
            OperatorArg::L => OperatorTag::L,
            OperatorArg::RestrictionMatrix => OperatorTag::RestrictionMatrix,
        }
    }
}

/// Effective configuration of one run, echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub space: Option<PathBuf>,
    pub function: Option<PathBuf>,
    pub subspace: Option<PathBuf>,
    pub lambdas: Vec<Complex64>,
    pub grid: Option<GridSpec>,
    pub suite: String,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub operator: OperatorTag,
    /// Space after overrides.
    pub effective_space: Option<Value>,
}

/// Parses a complex literal; a bare `i` suffix marks the imaginary part.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    Complex64::from_str(t)
        .or_else(|_| Complex64::from_str(&t.replace('j', "i")))
        .map_err(|_| Error::InvalidParameter(format!("cannot parse complex number {s:?}")))
}

fn parse_grid(s: &str, resolution: Option<usize>) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!("grid {s:?} is not center,radius,resolution")));
    }
    let center = parse_complex(parts[0])?;
    let radius: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad grid radius {:?}", parts[1])))?;
    let res: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad grid resolution {:?}", parts[2])))?;
    Ok(GridSpec {
        center,
        radius,
        resolution: resolution.unwrap_or(res),
    })
}

fn default_out(command: Command) -> PathBuf {
    let (stem, ext) = match command {
        Command::Space => ("space", "json"),
        Command::Continue => ("continue", "json"),
        Command::Scan => ("scan", "csv"),
        Command::Subspace => ("subspace", "json"),
        Command::Check => ("check", "json"),
    };
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("shiftlab-{stem}.{ext}"))
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let lambdas = cli.lambdas.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
        let grid = cli.grid.as_deref().map(|g| parse_grid(g, cli.resolution)).transpose()?;
        let suite = cli.suite.clone().unwrap_or_else(|| "all".into());
        if Suite::parse(&suite).is_none() {
            return Err(Error::InvalidParameter(format!(
                "unknown suite {suite:?}; expected one of {}",
                Suite::NAMES.join(", ")
            )));
        }
        Ok(Self {
            command: cli.command,
            space: cli.space.clone(),
            function: cli.function.clone(),
            subspace: cli.subspace.clone(),
            lambdas,
            grid,
            suite,
            out: cli.out.clone().unwrap_or_else(|| default_out(cli.command)),
            seed: cli.seed.unwrap_or(probes::DEFAULT_SEED),
            n: cli.n,
            tol: cli.tol,
            operator: cli.operator.map(Into::into).unwrap_or(OperatorTag::L),
            effective_space: None,
        })
    }
}

/// Result of a run: whether everything passed and the files written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Failing sub-checks and refused computations.
    pub messages: Vec<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads the space descriptor and applies the `--N` / `--tol` overrides.
pub fn load_space(config: &RunConfig) -> Result<SpaceModel> {
    let base = match &config.space {
        Some(p) => read_json::<SpaceModel>(p)?,
        None => make_space(WeightKind::Hardy, 1, 256, DEFAULT_TOL)?,
    };
    let model = match config.n {
        Some(n) => base.with_truncation(n)?,
        None => base,
    };
    match config.tol {
        Some(t) => model.with_tol(t),
        None => Ok(model),
    }
}

fn load_subspace(config: &RunConfig, model: &SpaceModel) -> Result<InvariantSubspace> {
    let path = config
        .subspace
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--subspace is required".into()))?;
    read_json::<SubspaceDescriptor>(path)?.build(model)
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("shiftlab");
    path.with_file_name(format!("{stem}-{suffix}.{ext}"))
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Executes one command. Input errors are returned as `Err`; failed checks
/// and refused computations are reported in the [`Outcome`].
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let model = load_space(config)?;
    let mut config = config.clone();
    config.effective_space = Some(serde_json::to_value(&model)?);
    let config_json = serde_json::to_value(&config)?;
    match config.command {
        Command::Space => {
            let report = checks::model_axioms_check(&model, Sampling {
                seed: config.seed,
                probe_count: probes::DEFAULT_PROBE_COUNT,
            });
            let out = json!({ "config": config_json, "report": report });
            write_atomic(&config.out, &pretty(&out))?;
            Ok(Outcome {
                passed: report.passed,
                messages: report.failures(),
                files: vec![config.out.clone()],
            })
        }
        Command::Continue => {
            let path = config
                .function
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--f is required".into()))?;
            let f: CoeffFunction = read_json(path)?;
            if config.lambdas.is_empty() {
                return Err(Error::InvalidParameter("at least one --lambda is required".into()));
            }
            let sub = match config.subspace {
                Some(_) => Some(load_subspace(&config, &model)?),
                None => None,
            };
            let mut results = Vec::new();
            let mut messages = Vec::new();
            for &lambda in &config.lambdas {
                match continue_f(&model, &f, lambda, sub.as_ref()) {
                    Ok(r) => results.push(serde_json::to_value(&r)?),
                    Err(e) => {
                        messages.push(e.to_string());
                        results.push(json!({ "lambda": complex_json(lambda), "error": e.to_string() }));
                    }
                }
            }
            let out = json!({ "config": config_json, "results": results });
            write_atomic(&config.out, &pretty(&out))?;
            Ok(Outcome {
                passed: messages.is_empty(),
                messages,
                files: vec![config.out.clone()],
            })
        }
        Command::Scan => {
            let spec = config
                .grid
                .ok_or_else(|| Error::InvalidParameter("--grid center,radius,resolution is required".into()))?;
            let sub;
            let op = match config.operator {
                OperatorTag::Mz => Operator::Mz,
                OperatorTag::L => Operator::L,
                OperatorTag::RestrictionMatrix => {
                    sub = load_subspace(&config, &model)?;
                    Operator::Restriction(&sub)
                }
            };
            let scan = spectra::scan_grid(&model, op, spec)?;
            let csv = scan.to_csv(&[("config".into(), serde_json::to_string(&config_json)?)]);
            write_atomic(&config.out, &csv)?;
            let excess = scan.lipschitz_excess();
            let passed = excess <= 1e-12;
            Ok(Outcome {
                passed,
                messages: if passed {
                    Vec::new()
                } else {
                    vec![format!("indicator violates the Lipschitz bound by {excess:e}")]
                },
                files: vec![config.out.clone()],
            })
        }
        Command::Subspace => {
            let sub = load_subspace(&config, &model)?;
            let spectrum = subspaces::restriction_spectrum(&sub);
            let mut samples: Vec<Complex64> = if config.lambdas.is_empty() {
                vec![
                    Complex64::ZERO,
                    Complex64::new(0.25, 0.0),
                    Complex64::new(-0.5, 0.0),
                    Complex64::new(0.0, 0.5),
                ]
            } else {
                config.lambdas.clone()
            };
            if config.lambdas.is_empty() {
                samples.extend(spectrum.iter().filter(|a| a.norm() < model.evaluation_radius()));
            }
            let arr = if model.fiber_dim() == 1 {
                Some(subspaces::arr_disc_check(&model, &sub, &samples)?)
            } else {
                None
            };
            let disagreements = arr.as_ref().map_or(0, |a| a.iter().filter(|e| !e.agree).count());
            let out = json!({
                "config": config_json,
                "dim": sub.dim(),
                "closure_residual": sub.closure_residual(),
                "gram_condition": sub.gram_condition(),
                "tolerance": sub.tolerance(),
                "spectrum": spectrum.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
                "arr": arr,
            });
            write_atomic(&config.out, &pretty(&out))?;
            let certified = sub.is_certified();
            let mut messages = Vec::new();
            if disagreements > 0 {
                messages.push(format!("{disagreements} disc identity disagreements"));
            }
            if !certified {
                messages.push(format!("closure residual {:e} exceeds tolerance", sub.closure_residual()));
            }
            Ok(Outcome {
                passed: messages.is_empty(),
                messages,
                files: vec![config.out.clone()],
            })
        }
        Command::Check => {
            let suite = Suite::parse(&config.suite).expect("validated in from_cli");
            let reports = checks::run_suite(&model, suite, Sampling {
                seed: config.seed,
                probe_count: probes::DEFAULT_PROBE_COUNT,
            });
            let passed = reports.iter().all(|r| r.passed);
            let out = json!({ "config": config_json, "passed": passed, "reports": reports });
            write_atomic(&config.out, &pretty(&out))?;
            let mut files = vec![config.out.clone()];
            for r in reports.iter().filter(|r| !r.sequences.is_empty()) {
                let p = sibling(&config.out, &r.name, "csv");
                let body = format!("# check={}\n# config={}\n{}", r.name, serde_json::to_string(&config_json)?, r.sequences_csv());
                write_atomic(&p, &body)?;
                files.push(p);
            }
            Ok(Outcome {
                passed,
                messages: reports.iter().flat_map(named_failures).collect(),
                files,
            })
        }
    }
}

fn named_failures(r: &CheckReport) -> Vec<String> {
    r.failures().into_iter().map(|m| format!("{}: {m}", r.name)).collect()
}

/// Parses arguments, runs, prints diagnostics to stderr and returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = RunConfig::from_cli(&cli).and_then(|c| run(&c));
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            for m in &o.messages {
                eprintln!("FAILED {m}");
            }
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.6").unwrap(), Complex64::new(1.6, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-0.5+0.25i").unwrap(), Complex64::new(-0.5, 0.25));
        assert!(parse_complex("two").is_err());
    }

    #[test]
    fn grid_literal() {
        let g = parse_grid("0,1.5,64", None).unwrap();
        assert_eq!(g.resolution, 64);
        assert_eq!(g.radius, 1.5);
        assert_eq!(parse_grid("0.5+0.5i,1,8", Some(16)).unwrap().resolution, 16);
        assert!(parse_grid("0,1", None).is_err());
    }

    #[test]
    fn unknown_suite_is_an_input_error() {
        let cli = Cli::try_parse_from(["shiftlab", "check", "--suite", "nope"]).unwrap();
        assert!(RunConfig::from_cli(&cli).is_err());
    }
}
