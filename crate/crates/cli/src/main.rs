use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gentensor::bench::{preset, run_experiment, Scale};
use gentensor::error::{CliError, Result};
use gentensor::gen::{gen_random_ns, gen_random_sym, paper_tensor};
use gentensor::report::{ns_report, rank_report, sym_report, Report};
use gentensor::{io, Tensor};
use gentensor_core::rank::{catalecticant_ns, catalecticant_sym, spectrum, Split, DEFAULT_FLOOR, DEFAULT_GAP_FACTOR};
use gentensor_core::{approx_nonsym, approx_sym, ApproxOptions, SpectrumReport, SymTensor, SymWeighting};

#[derive(Parser)]
#[command(
    name = "gentensor",
    version,
    about = "Low-rank tensor decomposition and approximation via generating polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank-R approximation of a symmetric tensor file.
    ApproxSym {
        #[command(flatten)]
        run: RunArgs,
        /// Fit refinement to one residual per stored entry instead of the full-tensor norm.
        #[arg(long)]
        uniform_weights: bool,
    },
    /// Rank-R approximation of a general tensor file.
    ApproxNs {
        #[command(flatten)]
        run: RunArgs,
        /// Flattening used for the reported rank suggestion, e.g. `1,2|3`.
        #[arg(long)]
        split: Option<String>,
    },
    /// Singular values of a flattening and the suggested rank.
    RankEst {
        #[arg(long, default_value_t = DEFAULT_GAP_FACTOR)]
        gap_factor: f64,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor: f64,
        /// Row and column modes (1-based), e.g. `1,3|2`; defaults to the most square one.
        #[arg(long)]
        split: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
    /// Random rank-R tensor plus noise of norm EPS.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Mode sizes; symmetric tensors repeat one size per mode.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Batches of random instances from one of the tables.
    Bench {
        #[arg(long, value_parser = ["table1", "table2", "table3", "table4"])]
        preset: String,
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Override the number of trials per row.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// One of the named example tensors.
    PaperTensor {
        #[arg(long)]
        name: String,
        /// Size of a symmetric family.
        #[arg(long, conflicts_with = "dims")]
        n: Option<usize>,
        /// Mode sizes of a nonsymmetric family.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sym,
    Ns,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    rank: usize,
    /// Stop after the generating-polynomial stage.
    #[arg(long)]
    no_refine: bool,
    /// Seed for the random Schur weights.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative singular-value cutoff of the least-squares solves.
    #[arg(long)]
    rcond: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    file: PathBuf,
}

impl RunArgs {
    fn options(&self) -> ApproxOptions {
        let mut opts = ApproxOptions::default();
        if let Some(s) = self.seed {
            opts.seed = s;
        }
        if let Some(r) = self.rcond {
            opts.rcond = r;
        }
        if self.no_refine {
            opts.refine = None;
        } else if let (Some(n), Some(refine)) = (self.max_iterations, opts.refine.as_mut()) {
            refine.max_iterations = n;
        }
        opts
    }
}

fn emit(report: &Report, output: Option<&Path>) -> Result<()> {
    let text = report.to_text();
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_split(s: Option<&str>) -> Result<Option<Split>> {
    s.map(|s| s.parse::<Split>().map_err(CliError::from)).transpose()
}

fn flattening_spectrum(t: &Tensor, split: Option<&Split>, gap: f64, floor: f64) -> Result<SpectrumReport> {
    let flat = match (t, split) {
        (Tensor::Sym(s), None) => catalecticant_sym(s)?,
        (Tensor::Sym(s), Some(sp)) => catalecticant_ns(&s.to_dense(), Some(sp))?,
        (Tensor::Dense(d), sp) => catalecticant_ns(d, sp)?,
    };
    Ok(spectrum(&flat, gap, floor)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ApproxSym { run, uniform_weights } => {
            let f = match io::read_tensor(&run.file)? {
                Tensor::Sym(s) => s,
                Tensor::Dense(d) => SymTensor::from_dense(&d)?,
            };
            let mut opts = run.options();
            if let (true, Some(refine)) = (uniform_weights, opts.refine.as_mut()) {
                refine.sym_weighting = SymWeighting::Uniform;
            }
            let spec = flattening_spectrum(&Tensor::Sym(f.clone()), None, DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).ok();
            let res = approx_sym(&f, run.rank, &opts)?;
            emit(&sym_report(f.order(), run.rank, f.norm(), &res, spec.as_ref()), run.output.as_deref())
        }
        Command::ApproxNs { run, split } => {
            let f = io::read_tensor(&run.file)?.into_dense();
            let split = parse_split(split.as_deref())?;
            let t = Tensor::Dense(f);
            let spec = flattening_spectrum(&t, split.as_ref(), DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).ok();
            let f = t.into_dense();
            let res = approx_nonsym(&f, run.rank, &run.options())?;
            emit(&ns_report(f.dims(), run.rank, f.norm(), &res, spec.as_ref()), run.output.as_deref())
        }
        Command::RankEst { gap_factor, floor, split, output, file } => {
            let t = io::read_tensor(&file)?;
            let split = parse_split(split.as_deref())?;
            let spec = flattening_spectrum(&t, split.as_ref(), gap_factor, floor)?;
            let label = match (&t, &split) {
                (Tensor::Sym(_), None) => Some(String::from("catalecticant")),
                (_, Some(s)) => Some(s.to_string()),
                (Tensor::Dense(d), None) => Some(Split::most_square(d.dims())?.to_string()),
            };
            emit(&rank_report(&spec, label.as_deref()), output.as_deref())
        }
        Command::Gen { kind, dims, rank, eps, seed, output } => {
            let t = match kind {
                Kind::Sym => {
                    if dims.iter().any(|&d| d != dims[0]) {
                        return Err(CliError::Usage(format!("symmetric dims {dims:?} must be equal")));
                    }
                    Tensor::Sym(gen_random_sym(dims[0], dims.len(), rank, eps, seed)?.f)
                }
                Kind::Ns => Tensor::Dense(gen_random_ns(&dims, rank, eps, seed)?.f),
            };
            io::write_tensor(&output, &t)
        }
        Command::Bench { preset: name, scale, trials } => {
            let scale: Scale = scale.parse()?;
            let specs = preset(&name, scale)?;
            if scale == Scale::Desk {
                println!("# {name} at desk scale: smaller rows than the original tables");
            }
            for mut spec in specs {
                if let Some(t) = trials {
                    spec.trials = t;
                }
                println!("{}", run_experiment(&spec, &ApproxOptions::default())?.summary());
            }
            Ok(())
        }
        Command::PaperTensor { name, n, dims, output } => {
            let sizes = n.map(|n| vec![n]).or(dims);
            io::write_tensor(&output, &paper_tensor(&name, sizes.as_deref())?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gentensor: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
