//! `psic` command-line interface.
//!
//! Exit codes: 0 success, 1 I/O or schema error, 2 invalid parameters or a
//! construction that cannot be built, 3 reconstruction failure (the report
//! is still written to stdout).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{certify_psic, find_ambiguity, frame_rank, DEFAULT_RANK_TOL};
use crate::constructions::{
    amalgamate_last_pair, build_complementary_bases, build_psic_2d, build_rank_one_3dm2,
    build_tetrahedral, build_trine, RankOneConstructionParams, TwoDConstructionParams,
};
use crate::json::{
    self, CheckJson, DistributionJson, Meta, PovmJson, ReportJson, WitnessJson, SCHEMA_VERSION,
};
use crate::quantum::{fidelity, random_pure_state, Povm, PureState};
use crate::reconstruction::Inverter;
use crate::tomo::{efficiency_sweep, write_sweep_csv, Scheme};
use crate::{seeds, Error};

#[derive(Debug, Parser)]
#[command(
    name = "psic",
    version,
    about = "Pure-state informationally complete POVMs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a POVM and write it as JSON with a validation block.
    Build(BuildArgs),
    /// Outcome probabilities of a state (given, or Haar-random from --seed).
    Probs(ProbsArgs),
    /// Invert a probability vector with the family's closed-form inversion.
    Reconstruct(ReconstructArgs),
    /// Frame rank, plus Monte Carlo certification for invertible families.
    Check(CheckArgs),
    /// Search for a distinct state with the same outcome probabilities.
    Ambiguity(AmbiguityArgs),
    /// Finite-shot tomography sweep, written as CSV.
    Tomo(TomoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Psic2d,
    #[value(name = "rank1-3dm2")]
    Rank13dm2,
    Tetrahedral,
    Trine,
    CompBases,
    #[value(name = "comp-bases-2dm1")]
    CompBases2dm1,
    Custom,
}

impl Family {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

/// `tetra` selects `cos θ = -1/3`; anything else is radians.
fn parse_theta(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("tetra") {
        return Ok(RankOneConstructionParams::tetrahedral_angle());
    }
    s.parse::<f64>()
        .map_err(|e| format!("expected radians or `tetra`: {e}"))
}

#[derive(Clone, Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Radians, or `tetra`.
    #[arg(long, value_parser = parse_theta, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// POVM JSON file for `--family custom`.
    #[arg(long)]
    pub povm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// State JSON; a Haar-random state from --seed when absent.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Probability JSON as written by `probs`.
    #[arg(long, alias = "input")]
    pub probs: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AmbiguityArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Target state JSON; a Haar-random target from --seed when absent.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1000,10000,100000,1000000"
    )]
    pub shots: Vec<u64>,
    /// Number of states; state `i` uses a seed derived from --seed and `i`.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Copies spent on a computational-basis premeasurement (0 disables it).
    #[arg(long, default_value_t = 0)]
    pub premeasure: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn schema(e: Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }

    fn params(e: Error) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Built {
    povm: Povm,
    scheme: Option<Scheme>,
    params: Value,
}

fn need_dim(f: &FamilyArgs) -> CliResult<usize> {
    f.dim
        .ok_or_else(|| CliError::usage(format!("--family {} needs --dim", f.family.name())))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn resolve(f: &FamilyArgs) -> CliResult<Built> {
    let mut params = json!({ "family": f.family.name() });
    let mut scheme = None;
    let povm = match f.family {
        Family::Psic2d => {
            let dim = need_dim(f)?;
            let p = match (f.a, f.b) {
                (None, None) => TwoDConstructionParams::default_for(dim),
                (Some(a), Some(b)) => TwoDConstructionParams::new(dim, a, b),
                _ => return Err(CliError::usage("--a and --b must be given together")),
            }
            .map_err(CliError::params)?;
            params = json!({ "family": "psic2d", "dim": dim, "a": p.a, "b": p.b });
            scheme = Some(Scheme::Psic2d(p));
            build_psic_2d(&p).map_err(CliError::params)?
        }
        Family::Rank13dm2 => {
            let dim = need_dim(f)?;
            let theta = f
                .theta
                .ok_or_else(|| CliError::usage("--family rank1-3dm2 needs --theta"))?;
            let p = match (f.a, f.b) {
                (None, None) => RankOneConstructionParams::new(dim, theta),
                (Some(a), Some(b)) => RankOneConstructionParams::with_weights(dim, theta, a, b),
                _ => return Err(CliError::usage("--a and --b must be given together")),
            }
            .map_err(CliError::params)?;
            params =
                json!({ "family": "rank1-3dm2", "dim": dim, "theta": p.theta, "a": p.a, "b": p.b });
            scheme = Some(Scheme::RankOne(p));
            build_rank_one_3dm2(&p).map_err(CliError::params)?
        }
        Family::Tetrahedral | Family::Trine => {
            if f.dim.is_some_and(|d| d != 2) {
                return Err(CliError::usage(format!(
                    "--family {} is a qubit POVM",
                    f.family.name()
                )));
            }
            if f.family == Family::Tetrahedral {
                build_tetrahedral()
            } else {
                build_trine()
            }
        }
        Family::CompBases | Family::CompBases2dm1 => {
            let dim = need_dim(f)?;
            params["dim"] = json!(dim);
            let full = build_complementary_bases(dim).map_err(CliError::params)?;
            if f.family == Family::CompBases {
                full
            } else {
                amalgamate_last_pair(&full).map_err(CliError::params)?
            }
        }
        Family::Custom => {
            let path = f
                .povm
                .as_ref()
                .ok_or_else(|| CliError::usage("--family custom needs --povm"))?;
            let wire: PovmJson = json::parse(&read(path)?, "povm").map_err(CliError::schema)?;
            params["povm"] = json!(path.display().to_string());
            wire.to_povm().map_err(CliError::schema)?
        }
    };
    Ok(Built {
        povm,
        scheme,
        params,
    })
}

fn load_state(path: &Path, dim: usize) -> CliResult<PureState> {
    let state = json::parse_state(&read(path)?).map_err(CliError::schema)?;
    if state.dim() != dim {
        return Err(CliError::schema(Error::DimensionMismatch {
            expected: dim,
            got: state.dim(),
        }));
    }
    Ok(state)
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let text = json::to_string(value);
    match output {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::io(path, e)),
        None => writeln!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn inverter_for(built: &Built, family: Family) -> CliResult<Box<dyn Inverter + Send>> {
    let scheme = built.scheme.ok_or_else(|| {
        CliError::usage(format!(
            "--family {} has no closed-form inversion",
            family.name()
        ))
    })?;
    scheme.inverter().map_err(CliError::params)
}

fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> CliResult<i32> {
    let built = resolve(&args.family)?;
    let wire = PovmJson::from_povm(&built.povm, Some(Meta::new(None, built.params)));
    emit(&wire, args.output.as_deref(), out)?;
    Ok(0)
}

fn cmd_probs(args: &ProbsArgs, out: &mut dyn Write) -> CliResult<i32> {
    let built = resolve(&args.family)?;
    let dim = built.povm.dim();
    let (state, seed) = match &args.state {
        Some(path) => (load_state(path, dim)?, None),
        None => (random_pure_state(dim, args.seed), Some(args.seed)),
    };
    let dist = built.povm.probabilities(&state).map_err(CliError::params)?;
    let wire = DistributionJson::new(
        built.povm.labels(),
        &dist,
        Some(&state),
        Some(Meta::new(seed, built.params)),
    );
    emit(&wire, args.output.as_deref(), out)?;
    Ok(0)
}

fn cmd_reconstruct(args: &ReconstructArgs, out: &mut dyn Write) -> CliResult<i32> {
    let built = resolve(&args.family)?;
    let inverter = inverter_for(&built, args.family.family)?;
    let wire: DistributionJson =
        json::parse(&read(&args.probs)?, "probabilities").map_err(CliError::schema)?;
    if wire.labels != built.povm.labels() {
        return Err(CliError::schema(Error::InvalidDistribution(format!(
            "labels {:?} do not match the POVM labels {:?}",
            wire.labels,
            built.povm.labels()
        ))));
    }
    let dist = wire.to_distribution().map_err(CliError::schema)?;
    let report = inverter.invert(&dist).map_err(CliError::schema)?;
    let reference = wire
        .state
        .as_ref()
        .map(|s| s.to_state())
        .transpose()
        .map_err(CliError::schema)?;
    let fid = match (&report.state, &reference) {
        (Some(est), Some(truth)) => Some(fidelity(est, truth).map_err(CliError::schema)?),
        _ => None,
    };
    let dim = built.povm.dim();
    let doc = ReportJson::new(&report, dim, fid, Some(Meta::new(None, built.params)));
    emit(&doc, args.output.as_deref(), out)?;
    if report.is_success() {
        Ok(0)
    } else {
        if args.output.is_some() {
            emit(&doc, None, out)?;
        }
        Ok(3)
    }
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CliResult<i32> {
    let built = resolve(&args.family)?;
    let frame = frame_rank(&built.povm, args.rank_tol);
    let cert = match built.scheme {
        Some(scheme) => {
            let inv = scheme.inverter().map_err(CliError::params)?;
            Some(certify_psic(inv.as_ref(), args.trials, args.seed))
        }
        None => None,
    };
    let mut params = built.params;
    params["trials"] = json!(args.trials);
    params["rank_tol"] = json!(args.rank_tol);
    let doc = CheckJson::new(
        &frame,
        cert.as_ref(),
        Some(Meta::new(Some(args.seed), params)),
    );
    emit(&doc, args.output.as_deref(), out)?;
    Ok(0)
}

fn cmd_ambiguity(args: &AmbiguityArgs, out: &mut dyn Write) -> CliResult<i32> {
    let built = resolve(&args.family)?;
    let dim = built.povm.dim();
    let target = match &args.state {
        Some(path) => load_state(path, dim)?,
        None => random_pure_state(dim, args.seed),
    };
    let witness =
        find_ambiguity(&built.povm, &target, args.restarts, args.seed).map_err(CliError::params)?;
    let mut params = built.params;
    params["restarts"] = json!(args.restarts);
    let doc = WitnessJson::new(witness.as_ref(), Some(Meta::new(Some(args.seed), params)));
    emit(&doc, args.output.as_deref(), out)?;
    Ok(0)
}

fn cmd_tomo(args: &TomoArgs, out: &mut dyn Write) -> CliResult<i32> {
    let built = resolve(&args.family)?;
    let inverter = inverter_for(&built, args.family.family)?;
    let seed_list: Vec<u64> = (0..args.seeds as u64)
        .map(|i| seeds::derive(args.seed, i))
        .collect();
    let rows = efficiency_sweep(inverter.as_ref(), &args.shots, &seed_list, args.premeasure)
        .map_err(CliError::params)?;
    let mut params = built.params;
    params["seeds"] = json!(args.seeds);
    params["premeasure"] = json!(args.premeasure);
    let meta = vec![
        ("schema_version".to_string(), SCHEMA_VERSION.to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("params".to_string(), params.to_string()),
    ];
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows, &meta).map_err(|e| CliError::io(Path::new("<csv>"), e))?;
    match &args.output {
        Some(path) => fs::write(path, buf).map_err(|e| CliError::io(path, e))?,
        None => out
            .write_all(&buf)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    Ok(0)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Build(a) => cmd_build(a, out),
        Command::Probs(a) => cmd_probs(a, out),
        Command::Reconstruct(a) => cmd_reconstruct(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Ambiguity(a) => cmd_ambiguity(a, out),
        Command::Tomo(a) => cmd_tomo(a, out),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
