//! `subval`: command-line front end.
//!
//! Exit codes: 0 on success, 1 on a negative verdict (for example a
//! valuation that is not a substitute valuation), 2 on usage or input
//! errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use subval::assignment::{assignment_valuation, eval_assignment};
use subval::auction::{optimal_welfare, run_auction, welfare, MAX_ALLOCATIONS};
use subval::checks::{check_valuation, oracle_definition, witness_for, OracleVerdict, ORACLE_MAX_GOODS};
use subval::generator::{generate, GenConfig, Model};
use subval::geometry::{census_dimensions, census_k4, classify_k3, classify_k4, is_assignment_k4};
use subval::io::{parse_code, parse_valuation, parse_weights, serialize_valuation};
use subval::rank::affine_dimension;
use subval::speckled::{build_speckled, graham_sloane_code, SpeckleSpec};
use subval::valuation::{aggregate, satiate};
use subval::{Bundle, Valuation};

#[derive(Parser)]
#[command(name = "subval", version, about = "Substitute valuations: generate, check, classify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate substitute valuations by raising a random interaction function.
    Gen(GenArgs),
    /// Check monotonicity, submodularity and the triple condition.
    Check {
        file: PathBuf,
        /// Also run the randomized price-based falsifier with this many trials.
        #[arg(long)]
        oracle_trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the maximal polyhedrons containing a valuation on 3 or 4 goods.
    Classify { file: PathBuf },
    /// Print the maximal polyhedrons on four goods with dimension checks.
    Census4 {
        /// Interior samples per polyhedron.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random speckled valuation over a code.
    Speckle {
        #[arg(long)]
        goods: usize,
        #[arg(long)]
        seed: u64,
        /// Code file; defaults to the residue-class construction.
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// L-satiation: cap bundles at their best L-subset.
    Satiate {
        file: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate of two valuations: best split of each bundle.
    Aggregate {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assignment valuations from weight matrices.
    #[command(subcommand)]
    Assign(AssignCommand),
    /// Ascending auction among the given buyers.
    Auction {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Affine dimension of the listed valuations.
    Dim {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    goods: usize,
    /// `uniform:m` or `sumuniform:m`.
    #[arg(long)]
    model: Model,
    #[arg(long)]
    seed: u64,
    /// Output file; with `--count` above 1, a directory receiving `seed-<s>.txt`.
    #[arg(long)]
    out: PathBuf,
    /// Number of valuations, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Worker threads for batches.
    #[arg(long)]
    jobs: Option<usize>,
    /// Nominal singleton values, comma separated.
    #[arg(long, value_delimiter = ',')]
    mu0: Vec<i64>,
    /// Print one JSON object of run statistics per valuation.
    #[arg(long)]
    stats: bool,
}

#[derive(Subcommand)]
enum AssignCommand {
    /// Value and lexicographically smallest optimal assignment of a bundle.
    Eval {
        file: PathBuf,
        /// Bundle as a decimal bit mask (bit k-1 for good k).
        #[arg(long)]
        bundle: u32,
    },
    /// Full valuation table.
    Table {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_valuation(path: &Path) -> Result<Valuation> {
    parse_valuation(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write_valuation(path: &Path, v: &Valuation) -> Result<()> {
    fs::write(path, serialize_valuation(v)).with_context(|| format!("writing {}", path.display()))
}

/// Success or a negative verdict; errors propagate separately.
enum Outcome {
    Ok,
    Negative,
}

fn gen(args: GenArgs, out: &mut impl Write) -> Result<Outcome> {
    if args.count == 0 {
        bail!("--count must be positive");
    }
    let seeds: Vec<u64> = (0..args.count as u64).map(|n| args.seed.wrapping_add(n)).collect();
    let config = |seed| GenConfig { goods: args.goods, model: args.model, seed, mu0: args.mu0.clone() };
    let run = || -> Vec<_> { seeds.par_iter().map(|&s| generate(&config(s))).collect() };
    let results = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?.install(run),
        None => run(),
    };
    if args.count > 1 {
        fs::create_dir_all(&args.out)?;
    }
    for (seed, result) in seeds.iter().zip(results) {
        let (v, stats) = result?;
        let path = if args.count > 1 { args.out.join(format!("seed-{seed}.txt")) } else { args.out.clone() };
        write_valuation(&path, &v)?;
        if args.stats {
            let line = json!({
                "seed": seed,
                "goods": args.goods,
                "model": args.model.to_string(),
                "phases": stats.phases,
                "increments": stats.increments,
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(Outcome::Ok)
}

fn check(file: &Path, trials: Option<usize>, seed: u64, out: &mut impl Write) -> Result<Outcome> {
    let v = read_valuation(file)?;
    let report = check_valuation(&v)?;
    write!(out, "{report}")?;
    if !report.substitute {
        if let Ok((_, p, q)) = witness_for(&v) {
            writeln!(out, "witness prices: p = {p}, q = {q}")?;
        }
    }
    let mut oracle_ok = true;
    if let Some(trials) = trials {
        if v.goods() > ORACLE_MAX_GOODS {
            writeln!(out, "oracle: skipped (more than {ORACLE_MAX_GOODS} goods)")?;
        } else {
            match oracle_definition(&v, trials, seed)? {
                OracleVerdict::Pass => writeln!(out, "oracle: PASS ({trials} trials)")?,
                OracleVerdict::Fail { p, q, bundle } => {
                    oracle_ok = false;
                    writeln!(out, "oracle: FAIL at p = {p}, q = {q}, demanded {bundle}")?;
                }
            }
        }
    }
    Ok(if report.substitute && oracle_ok { Outcome::Ok } else { Outcome::Negative })
}

fn classify(file: &Path, out: &mut impl Write) -> Result<Outcome> {
    let v = read_valuation(file)?;
    if !matches!(v.goods(), 3 | 4) {
        bail!("classify needs 3 or 4 goods, found {}", v.goods());
    }
    if !check_valuation(&v)?.substitute {
        writeln!(out, "not a substitute valuation")?;
        return Ok(Outcome::Negative);
    }
    if v.goods() == 3 {
        for p in classify_k3(&v)? {
            writeln!(out, "{p}")?;
        }
    } else {
        let members = classify_k4(&v)?;
        for d in &members {
            writeln!(out, "{d}")?;
        }
        writeln!(out, "{} polyhedrons", members.len())?;
        writeln!(out, "assignment: {}", is_assignment_k4(&v)?)?;
    }
    Ok(Outcome::Ok)
}

fn census4(samples: usize, seed: u64, out: &mut impl Write) -> Result<Outcome> {
    let census = census_k4();
    let dims = census_dimensions(samples, seed)?;
    for (d, dim) in census.iter().zip(&dims) {
        write!(out, "{}", d.listing())?;
        writeln!(out, "  equality rank {}, sampled dimension {dim}", d.equality_rank())?;
    }
    let mut distinct: Vec<usize> = dims.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let dims: Vec<String> = distinct.iter().map(usize::to_string).collect();
    let label = if dims.len() == 1 { "dimension" } else { "dimensions" };
    writeln!(out, "{} polyhedrons, {label} {}", census.len(), dims.join(","))?;
    Ok(Outcome::Ok)
}

fn speckle(goods: usize, seed: u64, code: Option<&Path>, path: &Path) -> Result<Outcome> {
    let code = match code {
        Some(p) => parse_code(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => graham_sloane_code(goods)?,
    };
    if code.goods() != goods {
        bail!("code has {} goods, expected {goods}", code.goods());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = build_speckled(&SpeckleSpec::random(code, &mut rng))?;
    write_valuation(path, &v)?;
    Ok(Outcome::Ok)
}

fn assign(cmd: AssignCommand, out: &mut impl Write) -> Result<Outcome> {
    match cmd {
        AssignCommand::Eval { file, bundle } => {
            let w = parse_weights(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            if w.goods() < 32 && bundle >> w.goods() != 0 {
                bail!("bundle {bundle} has goods beyond K = {}", w.goods());
            }
            let (value, a) = eval_assignment(&w, Bundle(bundle))?;
            writeln!(out, "value {value}")?;
            writeln!(out, "assignment {a}")?;
        }
        AssignCommand::Table { file, out: path } => {
            let w = parse_weights(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            write_valuation(&path, &assignment_valuation(&w)?)?;
        }
    }
    Ok(Outcome::Ok)
}

fn auction(files: &[PathBuf], seed: u64, transcript: Option<&Path>, out: &mut impl Write) -> Result<Outcome> {
    let vals = files.iter().map(|f| read_valuation(f)).collect::<Result<Vec<_>>>()?;
    let result = run_auction(&vals, seed)?;
    let prices: Vec<String> = result.prices.iter().map(i64::to_string).collect();
    writeln!(out, "rounds {}", result.rounds)?;
    writeln!(out, "prices ({})", prices.join(","))?;
    for (b, bundle) in result.allocation.iter().enumerate() {
        writeln!(out, "buyer {} gets {bundle}", b + 1)?;
    }
    writeln!(out, "welfare {}", welfare(&vals, &result.allocation)?)?;
    let feasible = (vals.len() as u64 + 1).checked_pow(vals[0].goods() as u32);
    if feasible.is_some_and(|n| n <= MAX_ALLOCATIONS) {
        writeln!(out, "optimal welfare {}", optimal_welfare(&vals)?.0)?;
    }
    if let Some(path) = transcript {
        fs::write(path, result.transcript_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome::Ok)
}

fn run(cli: Cli, out: &mut impl Write) -> Result<Outcome> {
    match cli.command {
        Command::Gen(args) => gen(args, out),
        Command::Check { file, oracle_trials, seed } => check(&file, oracle_trials, seed, out),
        Command::Classify { file } => classify(&file, out),
        Command::Census4 { samples, seed } => census4(samples, seed, out),
        Command::Speckle { goods, seed, code, out: path } => speckle(goods, seed, code.as_deref(), &path),
        Command::Satiate { file, level, out: path } => {
            write_valuation(&path, &satiate(&read_valuation(&file)?, level)?)?;
            Ok(Outcome::Ok)
        }
        Command::Aggregate { first, second, out: path } => {
            write_valuation(&path, &aggregate(&read_valuation(&first)?, &read_valuation(&second)?)?)?;
            Ok(Outcome::Ok)
        }
        Command::Assign(cmd) => assign(cmd, out),
        Command::Auction { files, seed, transcript } => auction(&files, seed, transcript.as_deref(), out),
        Command::Dim { files } => {
            let vals = files.iter().map(|f| read_valuation(f)).collect::<Result<Vec<_>>>()?;
            writeln!(out, "{}", affine_dimension(&vals)?)?;
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
