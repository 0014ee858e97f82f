//! `acalc`: transforms, mean widths and inequality checks for alpha-concave
//! functions from the command line.

mod config;
mod jobs;
mod output;
mod psi;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acalc::alpha::{support_function, AlphaParam, FunctionDescriptor};
use acalc::extgrid::GridSpec;
use acalc::lft::default_dual;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{parse_beta, SweepConfig};
use crate::jobs::{GridOpts, Job};
use crate::output::{write_records, write_table, Format, Record};
use crate::psi::Psi;

const WORKERS_VAR: &str = "ACALC_WORKERS";

#[derive(Parser)]
#[command(
    name = "acalc",
    version,
    about = "Calculus of alpha-concave functions on grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Dimension (1 or 2).
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Lower end of every grid axis.
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    /// Upper end of every grid axis.
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fill the runtime_ms column (otherwise 0, keeping output reproducible).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn grid(&self) -> GridOpts {
        GridOpts {
            n: self.n,
            lo: self.lo,
            hi: self.hi,
            m: self.m,
        }
    }
}

#[derive(Args, Clone, Copy)]
#[group(required = true, multiple = false)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// `-1/alpha`; `inf` for log-concave.
    #[arg(long, value_parser = parse_beta)]
    beta: Option<f64>,
}

impl ParamArgs {
    fn param(&self) -> acalc::Result<AlphaParam> {
        match (self.alpha, self.beta) {
            (Some(a), _) => AlphaParam::new(a),
            (_, Some(b)) => AlphaParam::from_beta(b),
            _ => unreachable!("clap requires one of --alpha, --beta"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print mass and convex base on the grid.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long = "fn")]
        func: FunctionDescriptor,
    },
    /// Print the support function (conjugate of the base) on a dual grid.
    Transform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long = "fn")]
        func: FunctionDescriptor,
        /// Dual box `[-r, r]^n`; default from the base's slopes.
        #[arg(long)]
        dual_radius: Option<f64>,
        #[arg(long)]
        dual_m: Option<usize>,
    },
    /// Mean width by both routes; passes when they agree to 1%.
    Meanwidth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long = "fn", required = true)]
        func: Vec<FunctionDescriptor>,
        /// Strictly decreasing epsilons for the limit route.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<f64>>,
    },
    /// Check one inequality.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Run the cross product declared in a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the config's format.
        #[arg(long)]
        format: Option<Format>,
    },
}

#[derive(Subcommand)]
enum Check {
    Bbl {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long = "fn")]
        func: FunctionDescriptor,
        #[arg(long = "fn2")]
        func2: FunctionDescriptor,
    },
    Urysohn {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long = "fn", required = true)]
        func: Vec<FunctionDescriptor>,
    },
    Poincare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_beta)]
        beta: f64,
        #[arg(long, required = true)]
        psi: Vec<Psi>,
    },
    GaussianPoincare {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        psi: Vec<Psi>,
    },
    Variation {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        psi: Vec<Psi>,
        #[arg(long, default_value_t = 1e-2)]
        t_step: f64,
    },
}

/// Why the run did not succeed.
enum Failure {
    /// Bad arguments or config: exit 2.
    Usage(String),
    /// A failed check or a numerical error: exit 1.
    Check,
}

impl From<acalc::Error> for Failure {
    fn from(e: acalc::Error) -> Self {
        eprintln!("error: {e}");
        Failure::Check
    }
}

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    match path {
        Some(p) => Failure::Usage(format!("cannot write {}: {e}", p.display())),
        None => Failure::Usage(format!("cannot write output: {e}")),
    }
}

fn emit(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    let result = match path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).and_then(|_| lock.flush())
        }
    };
    result.map_err(|e| io_failure(path, e))
}

fn workers() -> Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Failure::Usage(format!(
                "{WORKERS_VAR} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every job on the worker pool; records come back in job order.
fn run_jobs(
    jobs: &[Job],
    grid: &GridOpts,
    timing: bool,
    path: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<acalc::Result<Record>> =
        pool.install(|| jobs.par_iter().map(|j| j.run(grid, timing)).collect());

    let mut records = Vec::with_capacity(results.len());
    let mut ok = true;
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(r) => {
                if !r.pass {
                    ok = false;
                    eprintln!(
                        "FAIL {}: lhs {:e}, rhs {:e}, slack {:e}, tolerance {:e}",
                        r.name, r.lhs, r.rhs, r.slack, r.tolerance
                    );
                }
                records.push(r);
            }
            Err(e) => {
                ok = false;
                eprintln!("error in {}: {e}", job.name());
            }
        }
    }
    emit(path, |w| write_records(w, &records, format))?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn axis_names(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|a| format!("{prefix}{}", a + 1)).collect()
}

fn sample(common: &Common, param: AlphaParam, func: &FunctionDescriptor) -> Result<(), Failure> {
    let spec = common.grid().general()?;
    let f = func.to_alpha_fn(&spec, param)?;
    let (mass, convex) = (f.mass(), f.base());
    let n = spec.dim();
    let mut header = axis_names(n, "x");
    header.extend(["mass".to_string(), "base".to_string()]);
    let rows: Vec<Vec<f64>> = (0..spec.len())
        .map(|k| {
            let mut row = spec.point(k)[..n].to_vec();
            row.extend([mass.value(k), convex.value(k)]);
            row
        })
        .collect();
    emit(common.output.as_deref(), |w| {
        write_table(w, &header, &rows, common.format)
    })
}

fn transform(
    common: &Common,
    param: AlphaParam,
    func: &FunctionDescriptor,
    dual_radius: Option<f64>,
    dual_m: Option<usize>,
) -> Result<(), Failure> {
    let spec = common.grid().general()?;
    let f = func.to_alpha_fn(&spec, param)?;
    let auto = default_dual(f.base());
    let n = spec.dim();
    let r = dual_radius.unwrap_or(auto.axis(0).hi);
    let m = dual_m.unwrap_or(auto.axis(0).m);
    let dual = GridSpec::cube(n, -r, r, m)?;
    let h = support_function(&f, &dual)?;
    let mut header = axis_names(n, "y");
    header.push("h".to_string());
    let rows: Vec<Vec<f64>> = (0..dual.len())
        .map(|k| {
            let mut row = dual.point(k)[..n].to_vec();
            row.push(h.value(k));
            row
        })
        .collect();
    emit(common.output.as_deref(), |w| {
        write_table(w, &header, &rows, common.format)
    })
}

fn run_common(common: &Common, jobs: Vec<Job>) -> Result<(), Failure> {
    run_jobs(
        &jobs,
        &common.grid(),
        common.timing,
        common.output.as_deref(),
        common.format,
    )
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample {
            common,
            param,
            func,
        } => sample(&common, param.param()?, &func),
        Command::Transform {
            common,
            param,
            func,
            dual_radius,
            dual_m,
        } => transform(&common, param.param()?, &func, dual_radius, dual_m),
        Command::Meanwidth {
            common,
            param,
            func,
            schedule,
        } => {
            let param = param.param()?;
            let schedule = schedule.unwrap_or_else(|| acalc::meanwidth::DEFAULT_SCHEDULE.to_vec());
            let jobs = func
                .into_iter()
                .map(|f| Job::MeanWidth {
                    f,
                    param,
                    schedule: schedule.clone(),
                })
                .collect();
            run_common(&common, jobs)
        }
        Command::Verify { check } => match check {
            Check::Bbl {
                common,
                param,
                lambda,
                func,
                func2,
            } => {
                let job = Job::Bbl {
                    f: func,
                    g: func2,
                    param: param.param()?,
                    lambda,
                };
                run_common(&common, vec![job])
            }
            Check::Urysohn {
                common,
                param,
                func,
            } => {
                let param = param.param()?;
                let jobs = func
                    .into_iter()
                    .map(|f| Job::Urysohn { f, param })
                    .collect();
                run_common(&common, jobs)
            }
            Check::Poincare { common, beta, psi } => {
                let jobs = psi
                    .into_iter()
                    .map(|psi| Job::Poincare { psi, beta })
                    .collect();
                run_common(&common, jobs)
            }
            Check::GaussianPoincare { common, psi } => {
                let jobs = psi
                    .into_iter()
                    .map(|psi| Job::GaussianPoincare { psi })
                    .collect();
                run_common(&common, jobs)
            }
            Check::Variation {
                common,
                psi,
                t_step,
            } => {
                let jobs = psi
                    .into_iter()
                    .map(|psi| Job::Variation { psi, t_step })
                    .collect();
                run_common(&common, jobs)
            }
        },
        Command::Sweep {
            config,
            output,
            format,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", config.display())))?;
            let cfg = SweepConfig::from_json(&text).map_err(Failure::Usage)?;
            let jobs = cfg.jobs().map_err(Failure::Usage)?;
            let format = match format {
                Some(f) => f,
                None => cfg.format().map_err(Failure::Usage)?.unwrap_or(Format::Csv),
            };
            let path = output.or_else(|| cfg.output.clone());
            run_jobs(&jobs, &cfg.grid(), cfg.timing, path.as_deref(), format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
