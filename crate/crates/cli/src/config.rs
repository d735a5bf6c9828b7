//! Command-line surface and validated run configuration.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "ctqw", version, about = "Quantum walks on homogeneous trees", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the root state and emit site and shell probabilities
    Simulate(SimulateArgs),
    /// Spectral measure of a finite tree or the Kesten density
    Measure(MeasureArgs),
    /// Cross-check methods and fail if they disagree beyond --tol
    Compare(CompareArgs),
    /// Large-degree convergence table for the shell amplitudes
    Qclt(QcltArgs),
    /// CDF of Y(t)/t against its limit law
    Ylimit(YlimitArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// SVG plot path
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write wall_time_seconds as null so reports are reproducible byte for byte
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args, Debug)]
struct TreeArgs {
    /// Vertex degree
    #[arg(long)]
    p: usize,
    /// Depth of the truncated tree
    #[arg(long = "M")]
    m: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    tree: TreeArgs,
    /// start:stop:step or a comma list
    #[arg(long, default_value = "0:10:0.5")]
    t: String,
    #[arg(long, value_delimiter = ',', default_value = "exact,spectral")]
    method: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "site,stratum")]
    indexing: Vec<IndexKind>,
    #[arg(long, value_enum, default_value_t = HamiltonianChoice::Adjacency)]
    hamiltonian: HamiltonianChoice,
    /// Constant added to the diagonal
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    shift: f64,
    /// Quadrature order for the kesten method (default grows with t)
    #[arg(long)]
    order: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    p: usize,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Sample the Kesten density instead of a finite tree
    #[arg(long)]
    infinite: bool,
    #[arg(long, default_value_t = 201)]
    samples: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[arg(long, default_value = "0:10:0.5")]
    t: String,
    #[arg(long, value_delimiter = ',', default_value = "exact,spectral")]
    method: Vec<Method>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct QcltArgs {
    /// a..b (inclusive) or a comma list
    #[arg(long, default_value = "0..5")]
    k: String,
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    p_ladder: Vec<usize>,
    #[arg(long, default_value = "0.5,1,2,5,10")]
    t: String,
    #[arg(long, default_value_t = 512)]
    order: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct YlimitArgs {
    #[arg(long, default_value = "25,50,100")]
    t: String,
    #[arg(long, default_value_t = ctqw::asymptotics::CDF_GRID_POINTS)]
    grid_points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Spectral,
    Kesten,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Spectral => "spectral",
            Method::Kesten => "kesten",
        }
    }
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Site,
    Stratum,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianChoice {
    Adjacency,
    Mb,
}

#[derive(Serialize, Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    #[serde(skip)]
    pub omit_timing: bool,
}

impl From<OutputArgs> for Outputs {
    fn from(o: OutputArgs) -> Self {
        Self {
            csv: o.csv,
            json: o.json,
            plot: o.plot,
            omit_timing: o.omit_timing,
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Simulate {
        p: usize,
        #[serde(rename = "M")]
        m: usize,
        t_grid: Vec<f64>,
        methods: Vec<Method>,
        indexing: Vec<IndexKind>,
        hamiltonian: HamiltonianChoice,
        shift: f64,
        order: Option<usize>,
        #[serde(skip)]
        outputs: Outputs,
    },
    Measure {
        p: usize,
        #[serde(rename = "M")]
        m: Option<usize>,
        samples: usize,
        #[serde(skip)]
        outputs: Outputs,
    },
    Compare {
        p: usize,
        #[serde(rename = "M")]
        m: usize,
        t_grid: Vec<f64>,
        methods: Vec<Method>,
        tol: f64,
        #[serde(skip)]
        outputs: Outputs,
    },
    Qclt {
        ks: Vec<usize>,
        p_ladder: Vec<usize>,
        t_grid: Vec<f64>,
        order: usize,
        #[serde(skip)]
        outputs: Outputs,
    },
    Ylimit {
        t_grid: Vec<f64>,
        grid_points: usize,
        #[serde(skip)]
        outputs: Outputs,
    },
}

impl RunConfig {
    pub fn outputs(&self) -> &Outputs {
        match self {
            RunConfig::Simulate { outputs, .. }
            | RunConfig::Measure { outputs, .. }
            | RunConfig::Compare { outputs, .. }
            | RunConfig::Qclt { outputs, .. }
            | RunConfig::Ylimit { outputs, .. } => outputs,
        }
    }
}

/// Validation failure that should surface as a usage error.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn parse_f64(s: &str) -> Result<f64, UsageError> {
    let v = f64::from_str(s.trim()).map_err(|_| usage(format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("not finite: {s:?}")))
    }
}

/// `start:stop:step` (both ends inclusive up to rounding) or `a,b,c`.
pub fn parse_time_grid(s: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?);
            if step <= 0.0 {
                return Err(usage("time-grid step must be positive"));
            }
            if stop < start {
                return Err(usage("time-grid stop must not precede start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect()
        }
        [list] => list.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(usage(format!("malformed time grid {s:?}"))),
    };
    if grid.is_empty() {
        return Err(usage("empty time grid"));
    }
    Ok(grid)
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>, UsageError> {
    let bad = || usage(format!("malformed index list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

fn check_degree(p: usize) -> Result<(), UsageError> {
    if p < 2 {
        return Err(usage(format!("--p must be at least 2, got {p}")));
    }
    Ok(())
}

fn check_outputs(o: &Outputs) -> Result<(), UsageError> {
    let paths: Vec<&PathBuf> = [&o.csv, &o.json, &o.plot].into_iter().flatten().collect();
    for (i, a) in paths.iter().enumerate() {
        if paths[i + 1..].contains(a) {
            return Err(usage(format!("{} is given for two formats", a.display())));
        }
    }
    Ok(())
}

fn dedup<T: Ord + Copy>(mut v: Vec<T>) -> Vec<T> {
    let mut seen = Vec::with_capacity(v.len());
    v.retain(|x| {
        if seen.contains(x) {
            false
        } else {
            seen.push(*x);
            true
        }
    });
    v
}

/// Parses `argv` (program name first). Clap errors carry their own exit
/// status; validation failures come back as [`UsageError`].
pub fn parse_args<I, S>(argv: I) -> anyhow::Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let config = match cli.command {
        Command::Simulate(a) => {
            check_degree(a.tree.p)?;
            let methods = dedup(a.method);
            if a.hamiltonian == HamiltonianChoice::Mb && methods.iter().any(|&m| m != Method::Exact) {
                return Err(usage("the mb Hamiltonian is only available with --method exact").into());
            }
            if a.order == Some(0) {
                return Err(usage("--order must be positive").into());
            }
            if !a.shift.is_finite() {
                return Err(usage("--shift must be finite").into());
            }
            RunConfig::Simulate {
                p: a.tree.p,
                m: a.tree.m,
                t_grid: parse_time_grid(&a.t)?,
                methods,
                indexing: dedup(a.indexing),
                hamiltonian: a.hamiltonian,
                shift: a.shift,
                order: a.order,
                outputs: a.out.into(),
            }
        }
        Command::Measure(a) => {
            check_degree(a.p)?;
            let m = match (a.m, a.infinite) {
                (Some(_), true) => return Err(usage("--M and --infinite are exclusive").into()),
                (None, false) => return Err(usage("one of --M or --infinite is required").into()),
                (m, _) => m,
            };
            if a.samples < 2 {
                return Err(usage("--samples must be at least 2").into());
            }
            RunConfig::Measure {
                p: a.p,
                m,
                samples: a.samples,
                outputs: a.out.into(),
            }
        }
        Command::Compare(a) => {
            check_degree(a.tree.p)?;
            let methods = dedup(a.method);
            if methods.len() < 2 {
                return Err(usage("compare needs at least two methods").into());
            }
            if !(a.tol >= 0.0) {
                return Err(usage("--tol must be non-negative").into());
            }
            RunConfig::Compare {
                p: a.tree.p,
                m: a.tree.m,
                t_grid: parse_time_grid(&a.t)?,
                methods,
                tol: a.tol,
                outputs: a.out.into(),
            }
        }
        Command::Qclt(a) => {
            for &p in &a.p_ladder {
                check_degree(p)?;
            }
            RunConfig::Qclt {
                ks: parse_index_list(&a.k)?,
                p_ladder: a.p_ladder,
                t_grid: parse_time_grid(&a.t)?,
                order: a.order,
                outputs: a.out.into(),
            }
        }
        Command::Ylimit(a) => {
            let t_grid = parse_time_grid(&a.t)?;
            if t_grid.iter().any(|&t| t <= 0.0) {
                return Err(usage("ylimit times must be positive").into());
            }
            if a.grid_points < 2 {
                return Err(usage("--grid-points must be at least 2").into());
            }
            RunConfig::Ylimit {
                t_grid,
                grid_points: a.grid_points,
                outputs: a.out.into(),
            }
        }
    };
    check_outputs(config.outputs())?;
    Ok(config)
}
