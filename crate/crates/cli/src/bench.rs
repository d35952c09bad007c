//! Seeded batches of random instances and the table presets.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use gentensor_core::{approx_nonsym, approx_sym, ApproxOptions};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::gen::{gen_random_ns, gen_random_sym};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sym { n: usize, m: usize },
    Nonsym { dims: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub shape: Shape,
    pub rank: usize,
    /// Noise norm; zero runs the exact-decomposition protocol.
    pub eps: f64,
    pub seed: u64,
    pub trials: usize,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(CliError::Usage(format!("noise level {} must be nonnegative", self.eps)));
        }
        if self.trials == 0 || self.rank == 0 {
            return Err(CliError::Usage(String::from("trials and rank must be at least 1")));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let shape = match &self.shape {
            Shape::Sym { n, m } => format!("sym n={n} m={m}"),
            Shape::Nonsym { dims } => {
                format!("ns dims={}", dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"))
            }
        };
        format!("{shape} r={} eps={:e}", self.rank, self.eps)
    }

    /// Seed of trial `t`, spread so neighbouring trials are unrelated.
    pub fn trial_seed(&self, t: usize) -> u64 {
        let mut z = self.seed.wrapping_add((t as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

#[derive(Debug, Clone)]
pub struct TrialReport {
    pub seed: u64,
    pub residual_gp: f64,
    /// `None` when refinement was skipped.
    pub residual_opt: Option<f64>,
    pub tensor_norm: f64,
    /// `||F - X|| / ||F||` of the returned approximation.
    pub relative_residual: f64,
    /// `||F - X|| / ||E||`; `None` in decomposition mode.
    pub relerr: Option<f64>,
    pub wall: Duration,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub spec: InstanceSpec,
    pub trials: Vec<TrialReport>,
}

impl RunReport {
    fn ok(&self) -> impl Iterator<Item = &TrialReport> {
        self.trials.iter().filter(|t| t.error.is_none())
    }

    /// Maximum relerr over successful trials.
    pub fn mrlerr(&self) -> Option<f64> {
        self.ok().filter_map(|t| t.relerr).reduce(f64::max)
    }

    pub fn max_relative_residual(&self) -> Option<f64> {
        self.ok().map(|t| t.relative_residual).reduce(f64::max)
    }

    pub fn failures(&self) -> usize {
        self.trials.len() - self.ok().count()
    }

    pub fn mean_time(&self) -> Duration {
        let total: Duration = self.trials.iter().map(|t| t.wall).sum();
        total / self.trials.len().max(1) as u32
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} trials={}", self.spec.label(), self.trials.len());
        if self.spec.eps > 0.0 {
            let _ = write!(s, " mrlerr={}", self.mrlerr().map_or(String::from("n/a"), |v| format!("{v:.4}")));
        } else {
            let max = self.max_relative_residual().map_or(String::from("n/a"), |v| format!("{v:.2e}"));
            let _ = write!(s, " max_rel_residual={max}");
        }
        let _ = write!(s, " mean_time={:.3}s failures={}", self.mean_time().as_secs_f64(), self.failures());
        s
    }
}

fn run_trial(spec: &InstanceSpec, seed: u64, opts: &ApproxOptions) -> TrialReport {
    let opts = opts.clone().with_seed(seed);
    let start = Instant::now();
    let outcome = match &spec.shape {
        Shape::Sym { n, m } => gen_random_sym(*n, *m, spec.rank, spec.eps, seed).and_then(|inst| {
            let res = approx_sym(&inst.f, spec.rank, &opts)?;
            let norm_e = inst.e.norm();
            Ok((res.residual_gp, res.refined.as_ref().map(|r| r.residual_opt), res.residual(), inst.f.norm(), norm_e))
        }),
        Shape::Nonsym { dims } => gen_random_ns(dims, spec.rank, spec.eps, seed).and_then(|inst| {
            let res = approx_nonsym(&inst.f, spec.rank, &opts)?;
            let norm_e = inst.e.norm();
            Ok((res.residual_gp, res.refined.as_ref().map(|r| r.residual_opt), res.residual(), inst.f.norm(), norm_e))
        }),
    };
    let wall = start.elapsed();
    match outcome {
        Ok((gp, opt, best, norm_f, norm_e)) => TrialReport {
            seed,
            residual_gp: gp,
            residual_opt: opt,
            tensor_norm: norm_f,
            relative_residual: best / norm_f,
            relerr: (norm_e > 0.0).then(|| best / norm_e),
            wall,
            error: None,
        },
        Err(e) => TrialReport {
            seed,
            residual_gp: f64::NAN,
            residual_opt: None,
            tensor_norm: f64::NAN,
            relative_residual: f64::NAN,
            relerr: None,
            wall,
            error: Some(e.to_string()),
        },
    }
}

/// Runs all trials concurrently. Per-trial errors are recorded, not raised,
/// and trials keep their index order.
pub fn run_experiment(spec: &InstanceSpec, opts: &ApproxOptions) -> Result<RunReport> {
    spec.validate()?;
    let trials = (0..spec.trials).into_par_iter().map(|t| run_trial(spec, spec.trial_seed(t), opts)).collect();
    Ok(RunReport { spec: spec.clone(), trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(CliError::Usage(format!("unknown scale {s}; expected desk or full"))),
        }
    }
}

pub const NOISE_LEVELS: [f64; 3] = [1e-1, 1e-2, 1e-3];
pub const TRIALS: usize = 20;

fn sym(n: usize, m: usize, rank: usize, eps: f64) -> InstanceSpec {
    InstanceSpec { shape: Shape::Sym { n, m }, rank, eps, seed: 0, trials: TRIALS }
}

fn ns(dims: &[usize], rank: usize, eps: f64) -> InstanceSpec {
    InstanceSpec { shape: Shape::Nonsym { dims: dims.to_vec() }, rank, eps, seed: 0, trials: TRIALS }
}

/// Instance batches of one table. Desk scale keeps the rows that finish in
/// seconds on a laptop; full scale lists every row of the original tables.
pub fn preset(name: &str, scale: Scale) -> Result<Vec<InstanceSpec>> {
    let noisy = |rows: &[InstanceSpec]| -> Vec<InstanceSpec> {
        rows.iter().flat_map(|r| NOISE_LEVELS.iter().map(move |&eps| InstanceSpec { eps, ..r.clone() })).collect()
    };
    let mut specs = match (name, scale) {
        ("table1", Scale::Desk) => noisy(&[sym(10, 3, 5, 0.0), sym(20, 3, 4, 0.0), sym(10, 4, 5, 0.0)]),
        ("table1", Scale::Full) => noisy(&[
            sym(50, 3, 1, 0.0),
            sym(40, 3, 2, 0.0),
            sym(30, 3, 3, 0.0),
            sym(20, 3, 4, 0.0),
            sym(10, 3, 5, 0.0),
            sym(30, 4, 1, 0.0),
            sym(25, 4, 2, 0.0),
            sym(20, 4, 3, 0.0),
            sym(15, 4, 4, 0.0),
            sym(10, 4, 5, 0.0),
        ]),
        ("table2", Scale::Desk) => {
            vec![sym(10, 3, 5, 0.0), sym(20, 3, 10, 0.0), sym(10, 4, 5, 0.0), sym(15, 4, 10, 0.0), sym(5, 5, 10, 0.0)]
        }
        ("table2", Scale::Full) => vec![
            sym(10, 3, 5, 0.0),
            sym(20, 3, 10, 0.0),
            sym(30, 3, 15, 0.0),
            sym(40, 3, 20, 0.0),
            sym(50, 3, 25, 0.0),
            sym(10, 4, 5, 0.0),
            sym(15, 4, 10, 0.0),
            sym(20, 4, 15, 0.0),
            sym(25, 4, 20, 0.0),
            sym(30, 4, 25, 0.0),
            sym(5, 5, 10, 0.0),
            sym(10, 5, 15, 0.0),
            sym(15, 5, 20, 0.0),
            sym(5, 6, 10, 0.0),
            sym(10, 6, 20, 0.0),
        ],
        ("table3", Scale::Desk) => {
            noisy(&[ns(&[10, 10, 10], 5, 0.0), ns(&[20, 20, 20], 4, 0.0), ns(&[15, 15, 10, 10], 5, 0.0)])
        }
        ("table3", Scale::Full) => noisy(&[
            ns(&[50, 50, 50], 1, 0.0),
            ns(&[40, 40, 40], 2, 0.0),
            ns(&[30, 30, 30], 3, 0.0),
            ns(&[20, 20, 20], 4, 0.0),
            ns(&[10, 10, 10], 5, 0.0),
            ns(&[30, 30, 30, 30], 1, 0.0),
            ns(&[25, 25, 25, 25], 2, 0.0),
            ns(&[20, 20, 20, 20], 3, 0.0),
            ns(&[20, 20, 15, 15], 4, 0.0),
            ns(&[15, 15, 10, 10], 5, 0.0),
        ]),
        ("table4", Scale::Desk) => {
            vec![ns(&[20, 20, 20], 10, 0.0), ns(&[60, 60, 60], 10, 0.0), ns(&[20, 20, 20, 20], 10, 0.0)]
        }
        ("table4", Scale::Full) => {
            let mut rows = vec![
                ns(&[60, 60, 60], 10, 0.0),
                ns(&[70, 70, 70], 20, 0.0),
                ns(&[80, 80, 80], 30, 0.0),
                ns(&[90, 90, 90], 40, 0.0),
                ns(&[100, 100, 100], 50, 0.0),
                ns(&[20, 20, 20, 20], 10, 0.0),
                ns(&[25, 25, 25, 25], 20, 0.0),
                ns(&[40, 30, 25, 20], 30, 0.0),
                ns(&[50, 40, 30, 25], 40, 0.0),
                ns(&[60, 50, 40, 30], 50, 0.0),
            ];
            // The largest row was run with half the trials in the original study.
            rows.last_mut().expect("nonempty").trials = 10;
            rows
        }
        _ => return Err(CliError::Usage(format!("unknown preset {name}; expected table1..table4"))),
    };
    for (i, s) in specs.iter_mut().enumerate() {
        s.seed = 1000 * (i as u64 + 1);
    }
    Ok(specs)
}
