//! Command-line front end: argument parsing, data loading, dispatch and
//! result files.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data or I/O error,
//! 3 solver failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::StaircaseBound;
use crate::data::{self, DataError, Dataset, LabelEncoding, Standardizer};
use crate::loss::LossKind;
use crate::pathalg::{
    certify_list, certify_with_strategy, epsilon_curve, find_approx_parameter,
    find_approx_parameter_tricked, grid_strategy, track_path, Certificate, PathError, Problem,
    RegularizationPath, SearchConfig, SolutionMode, Strategy,
};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Certify,
    Find,
    FindTricked,
    Path,
    Cv,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Certify => "certify",
            Mode::Find => "find",
            Mode::FindTricked => "find-tricked",
            Mode::Path => "path",
            Mode::Cv => "cv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Huber,
    Hinge,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Grid,
    Guided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CvSearchArg {
    Certify,
    Find,
    Tricked,
}

/// Certified selection of the regularization parameter of a linear classifier.
#[derive(Debug, Clone, Parser)]
#[command(name = "certreg", version)]
pub struct CliArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Training set (libsvm format).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Validation set (libsvm format).
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Single dataset: split in half for holdout modes, into folds for cv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "huber")]
    pub loss: LossArg,
    #[arg(long, default_value_t = 1.0)]
    pub huber_width: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub c_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub c_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Coarse grid size of find-tricked.
    #[arg(long, default_value_t = 4)]
    pub grid_m: usize,
    /// Step inflation of find-tricked.
    #[arg(long, default_value_t = 1.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Solve every candidate to optimality instead of to the bound gap.
    #[arg(long)]
    pub exact: bool,
    /// File of C values to certify (whitespace or comma separated).
    #[arg(long)]
    pub clist: Option<PathBuf>,
    /// Certificate JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write CSV files for plotting next to --out.
    #[arg(long)]
    pub plot_data: bool,
    /// Labels are 0/1 instead of -1/+1.
    #[arg(long)]
    pub label01: bool,
    /// Use features as given instead of scaling them to [-1, 1].
    #[arg(long)]
    pub no_standardize: bool,
    /// Number of values to certify when no --clist is given.
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long, value_enum, default_value = "grid")]
    pub strategy: StrategyArg,
    /// Search used in cv mode.
    #[arg(long, value_enum, default_value = "find")]
    pub cv_search: CvSearchArg,
    /// Validation share when --data is split for holdout modes.
    #[arg(long, default_value_t = 0.5)]
    pub holdout_fraction: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub min_step: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    /// Report the gap recomputed from all solutions instead of the target.
    #[arg(long)]
    pub recompute_certificate: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::InvalidSplit(_) | DataError::TooManyFolds { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Config(_) => CliError::Config(e.to_string()),
            PathError::Data(d) => d.into(),
            PathError::Bounds(_) => CliError::Data(e.to_string()),
            PathError::Solver(_)
            | PathError::NotConverged { .. }
            | PathError::RecursionDepth { .. }
            | PathError::SolveBudget(_) => CliError::Solver(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Inputs {
    Pair { train: PathBuf, valid: PathBuf },
    Single(PathBuf),
}

/// What `certify` solves.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSource {
    List(PathBuf),
    Strategy(Strategy),
}

/// A checked, mode-consistent run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub inputs: Inputs,
    pub label_encoding: LabelEncoding,
    pub standardize: bool,
    pub holdout_fraction: f64,
    pub folds: usize,
    pub seed: u64,
    pub search: SearchConfig,
    pub cv_search: CvSearchArg,
    pub candidates: Option<CandidateSource>,
    pub out: Option<PathBuf>,
    pub plot_data: bool,
}

impl RunConfig {
    pub fn from_args(args: &CliArgs) -> Result<Self, CliError> {
        let inputs = match (&args.train, &args.valid, &args.data) {
            (Some(t), Some(v), None) if args.mode != Mode::Cv => Inputs::Pair {
                train: t.clone(),
                valid: v.clone(),
            },
            (None, None, Some(d)) => Inputs::Single(d.clone()),
            (_, _, _) if args.mode == Mode::Cv => {
                return Err(CliError::Config("cv mode needs --data (and no --train/--valid)".into()))
            }
            _ => {
                return Err(CliError::Config(
                    "give either --train and --valid, or --data".into(),
                ))
            }
        };
        let candidates = match (&args.clist, args.grid_size) {
            (Some(p), None) => Some(CandidateSource::List(p.clone())),
            (None, Some(t)) => Some(CandidateSource::Strategy(match args.strategy {
                StrategyArg::Grid => Strategy::Grid { size: t },
                StrategyArg::Guided => Strategy::Guided { budget: t },
            })),
            (Some(_), Some(_)) => {
                return Err(CliError::Config("--clist and --grid-size are exclusive".into()))
            }
            (None, None) => None,
        };
        let needs_candidates =
            args.mode == Mode::Certify || (args.mode == Mode::Cv && args.cv_search == CvSearchArg::Certify);
        if needs_candidates && candidates.is_none() {
            return Err(CliError::Config("certify needs --clist or --grid-size".into()));
        }
        if args.mode == Mode::Cv && args.folds < 2 {
            return Err(CliError::Config(format!("--folds must be at least 2, got {}", args.folds)));
        }
        if args.plot_data && args.out.is_none() {
            return Err(CliError::Config("--plot-data needs --out".into()));
        }
        let loss = match args.loss {
            LossArg::Huber => LossKind::HuberHinge {
                width: args.huber_width,
            },
            LossArg::Hinge => LossKind::Hinge,
            LossArg::Logistic => LossKind::Logistic,
        };
        let search = SearchConfig {
            c_min: args.c_min,
            c_max: args.c_max,
            epsilon: args.eps,
            grid_m: args.grid_m,
            rho: args.rho,
            min_step: args.min_step,
            solution_mode: if args.exact {
                SolutionMode::Exact
            } else {
                SolutionMode::Approximate
            },
            loss,
            solver: SolverConfig {
                max_iterations: args.max_iterations,
                ..SolverConfig::default()
            },
            recompute_certificate: args.recompute_certificate,
            ..SearchConfig::default()
        };
        search.validate()?;
        Ok(RunConfig {
            mode: args.mode,
            inputs,
            label_encoding: if args.label01 {
                LabelEncoding::ZeroOne
            } else {
                LabelEncoding::PlusMinusOne
            },
            standardize: !args.no_standardize,
            holdout_fraction: args.holdout_fraction,
            folds: args.folds,
            seed: args.seed,
            search,
            cv_search: args.cv_search,
            candidates,
            out: args.out.clone(),
            plot_data: args.plot_data,
        })
    }
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunOutput {
    pub certificate: Certificate,
    pub path: Option<RegularizationPath>,
    pub record: CertificateRecord,
    pub json: String,
}

fn scaled(train: Dataset, valid: Dataset, standardize: bool) -> (Dataset, Dataset) {
    if standardize {
        let s = Standardizer::fit(&train);
        (s.transform(&train), s.transform(&valid))
    } else {
        (train, valid)
    }
}

fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let read = |p: &Path| data::read_libsvm_file(p, cfg.label_encoding);
    let problem = match (&cfg.inputs, cfg.mode) {
        (Inputs::Single(path), Mode::Cv) => {
            let ds = read(path)?;
            let folds = data::kfold_split(&ds, cfg.folds, cfg.seed)?
                .into_iter()
                .map(|mut f| {
                    (f.train, f.validation) = scaled(f.train, f.validation, cfg.standardize);
                    f
                })
                .collect();
            Problem::from_folds(folds)?
        }
        (Inputs::Single(path), _) => {
            let ds = read(path)?;
            let fold = data::holdout_split(&ds, cfg.holdout_fraction, cfg.seed)?;
            let (t, v) = scaled(fold.train, fold.validation, cfg.standardize);
            Problem::holdout(t, v)?
        }
        (Inputs::Pair { train, valid }, _) => {
            let (t, v) = scaled(read(train)?, read(valid)?, cfg.standardize);
            Problem::holdout(t, v)?
        }
    };
    Ok(problem)
}

/// Reads whitespace- or comma-separated C values.
pub fn read_c_list(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    text.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Data(format!("{}: {t:?} is not a number", path.display())))
        })
        .collect()
}

fn certify_candidates(problem: &Problem, cfg: &RunConfig) -> Result<Certificate, CliError> {
    match cfg.candidates.as_ref().expect("checked in from_args") {
        CandidateSource::List(path) => Ok(certify_list(problem, &read_c_list(path)?, &cfg.search)?),
        CandidateSource::Strategy(s) => Ok(certify_with_strategy(problem, &cfg.search, *s)?),
    }
}

/// Loads data, runs the configured mode and writes the artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let problem = build_problem(cfg)?;
    info!(
        "{} task(s), {} validation instances",
        problem.tasks().len(),
        problem.n_validation()
    );
    let mut path = None;
    let certificate = match cfg.mode {
        Mode::Certify => certify_candidates(&problem, cfg)?,
        Mode::Find => find_approx_parameter(&problem, &cfg.search)?,
        Mode::FindTricked => find_approx_parameter_tricked(&problem, &cfg.search)?,
        Mode::Cv => match cfg.cv_search {
            CvSearchArg::Certify => certify_candidates(&problem, cfg)?,
            CvSearchArg::Find => find_approx_parameter(&problem, &cfg.search)?,
            CvSearchArg::Tricked => find_approx_parameter_tricked(&problem, &cfg.search)?,
        },
        Mode::Path => {
            let p = track_path(&problem, &cfg.search)?;
            let cert = p.certificate.clone();
            path = Some(p);
            cert
        }
    };
    info!(
        "solved {} values, C_best = {}, certified epsilon = {}",
        certificate.solved.len(),
        certificate.c_best,
        certificate.certified_epsilon
    );
    let record = CertificateRecord::new(cfg, &certificate, path.as_ref());
    let json = record.to_json();
    match &cfg.out {
        Some(out) => {
            fs::write(out, &json).map_err(|e| io_error(out, e))?;
            if cfg.plot_data {
                write_plot_data(out, &certificate)?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(json.as_bytes())
                .map_err(|e| CliError::Data(e.to_string()))?;
        }
    }
    Ok(RunOutput {
        certificate,
        path,
        record,
        json,
    })
}

/// Parses `args`, honours `CERTREG_THREADS`, runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match CliArgs::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match RunConfig::from_args(&args).and_then(|cfg| run(&cfg)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CERTREG_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("CERTREG_THREADS={value:?} is not a positive integer")))?;
    // a second initialisation in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedRecord {
    pub c: f64,
    pub lb: f64,
    pub ub: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseRecord {
    pub breakpoints: Vec<f64>,
    /// Value on each open segment; one more entry than `breakpoints`.
    pub values: Vec<f64>,
}

impl From<&StaircaseBound> for StaircaseRecord {
    fn from(s: &StaircaseBound) -> Self {
        StaircaseRecord {
            breakpoints: s.breakpoints().to_vec(),
            values: s.segment_values(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub loss: String,
    pub huber_width: Option<f64>,
    pub solution_mode: String,
    pub gap_target_fraction: f64,
    pub exact_tolerance: f64,
    pub max_iterations: usize,
    pub total_iterations: usize,
    pub stalled_solves: usize,
    pub outside_regime: bool,
    pub certificate_form: String,
    pub recomputed_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    /// Left ends `C_1 .. C_T` of the path segments.
    pub breakpoints: Vec<f64>,
    /// `C_{T+1}`; null when the last segment never ends.
    pub end: Option<f64>,
    /// Validation error of each segment's solution.
    pub validation_errors: Vec<f64>,
}

/// The certificate JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub mode: Mode,
    pub c_best: f64,
    pub ev_best: f64,
    pub certified_epsilon: f64,
    pub epsilon_target: Option<f64>,
    pub c_range: [f64; 2],
    pub solved: Vec<SolvedRecord>,
    pub lower_bound_path: StaircaseRecord,
    pub solver: SolverRecord,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathRecord>,
}

impl CertificateRecord {
    pub fn new(cfg: &RunConfig, cert: &Certificate, path: Option<&RegularizationPath>) -> Self {
        let s = &cfg.search;
        CertificateRecord {
            mode: cfg.mode,
            c_best: cert.c_best,
            ev_best: cert.ev_best,
            certified_epsilon: cert.certified_epsilon,
            epsilon_target: cert.epsilon_target,
            c_range: [cert.c_range.0, cert.c_range.1],
            solved: cert
                .solved
                .iter()
                .map(|p| SolvedRecord {
                    c: p.c,
                    lb: p.lb,
                    ub: p.ub,
                    iterations: p.iterations,
                })
                .collect(),
            lower_bound_path: (&cert.lower_bound_path).into(),
            solver: SolverRecord {
                loss: s.loss.name().to_string(),
                huber_width: match s.loss {
                    LossKind::HuberHinge { width } => Some(width),
                    _ => None,
                },
                solution_mode: match s.effective_mode() {
                    SolutionMode::Exact => "exact",
                    SolutionMode::Approximate => "approximate",
                }
                .to_string(),
                gap_target_fraction: s.solver.gap_target_fraction,
                exact_tolerance: s.solver.exact_tolerance,
                max_iterations: s.solver.max_iterations,
                total_iterations: cert.total_solver_iterations,
                stalled_solves: cert.stalled_solves,
                outside_regime: cert.outside_regime,
                certificate_form: if s.recompute_certificate || cert.epsilon_target.is_none() {
                    "recomputed"
                } else {
                    "incremental"
                }
                .to_string(),
                recomputed_epsilon: cert.actual_epsilon,
            },
            seed: cfg.seed,
            path: path.map(|p| PathRecord {
                breakpoints: p.breakpoints.clone(),
                end: p.end,
                validation_errors: p.probes().iter().map(|pr| pr.validation_error()).collect(),
            }),
        }
    }

    /// Pretty JSON with every real written to 17 significant digits.
    pub fn to_json(&self) -> String {
        to_json_g17(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `printf("%.17g")` formatting, which reads back to the same `f64`.
pub fn format_g17(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (16 - exp) as usize, v))
    }
}

struct G17Formatter(serde_json::ser::PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident $(, $arg:ident : $ty:ty)*);* $(;)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_g17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    delegate! {
        begin_array;
        end_array;
        begin_array_value, first: bool;
        end_array_value;
        begin_object;
        end_object;
        begin_object_key, first: bool;
        begin_object_value;
        end_object_value;
    }
}

pub fn to_json_g17<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        G17Formatter(serde_json::ser::PrettyFormatter::new()),
    );
    value.serialize(&mut ser).expect("serializable");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8")
}

/// Staircase rows `C_breakpoint,value_left_of_breakpoint,value_right_of_breakpoint`.
pub fn staircase_csv(s: &StaircaseBound) -> String {
    let mut out = String::from("C_breakpoint,value_left_of_breakpoint,value_right_of_breakpoint\n");
    let values = s.segment_values();
    for (j, &b) in s.breakpoints().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_g17(b),
            format_g17(values[j]),
            format_g17(values[j + 1])
        );
    }
    out
}

pub fn points_csv(cert: &Certificate) -> String {
    let mut out = String::from("c,lb,ub\n");
    for p in &cert.solved {
        let _ = writeln!(out, "{},{},{}", format_g17(p.c), format_g17(p.lb), format_g17(p.ub));
    }
    out
}

/// Certified gap after the first `T` solutions, in solve order.
pub fn epsilon_curve_csv(cert: &Certificate) -> String {
    let mut out = String::from("T,epsilon\n");
    for (t, e) in epsilon_curve(&cert.probes, cert.c_range) {
        let _ = writeln!(out, "{t},{}", format_g17(e));
    }
    out
}

/// `<out stem>.lb.csv`, `.ub.csv`, `.points.csv` and `.eps_vs_t.csv` next to `out`.
pub fn plot_data_paths(out: &Path) -> [PathBuf; 4] {
    let stem = out.with_extension("");
    let with = |suffix: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    [
        with(".lb.csv"),
        with(".ub.csv"),
        with(".points.csv"),
        with(".eps_vs_t.csv"),
    ]
}

pub fn write_plot_data(out: &Path, cert: &Certificate) -> Result<(), CliError> {
    let [lb, ub, points, eps] = plot_data_paths(out);
    let files = [
        (lb, staircase_csv(&cert.lower_bound_path)),
        (ub, staircase_csv(&cert.upper_bound_path)),
        (points, points_csv(cert)),
        (eps, epsilon_curve_csv(cert)),
    ];
    for (path, text) in files {
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    }
    Ok(())
}

/// `certify` candidates as a plain grid, for callers building a C list.
pub fn default_grid(cfg: &SearchConfig, t: usize) -> Vec<f64> {
    grid_strategy(cfg.c_min, cfg.c_max, t)
}
