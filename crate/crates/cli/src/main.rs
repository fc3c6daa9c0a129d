mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use wprec::cache::{self, CacheFile};
use wprec::constants::{shared, ConstantKind};
use wprec::correlator::parse_psi;
use wprec::suites::{self, SuiteBounds, SUITE_NAMES};
use wprec::{
    is_stable, moduli_dimension, BaseValueProvider, ClosedFormProvider, CorrelatorEngine, CorrelatorKey, Error,
    HodgeEngine, HodgePairing, MultiIndex, Rational, TableProvider, VolumeEngine,
};

use output::{Cell, Format, Printer, Record};

/// Exact intersection numbers of psi and kappa classes on moduli spaces of
/// stable curves.
#[derive(Parser, Debug)]
#[command(name = "wprec", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV with a header row.
    #[arg(long, global = true)]
    csv: bool,
    /// Also show a truncated decimal rendering with N fractional digits.
    #[arg(long, global = true, value_name = "N")]
    decimal: Option<usize>,
    /// Persistent value cache.
    #[arg(long, global = true, env = "WPREC_CACHE", value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Exit with status 3 when the input is off dimension (the value is 0).
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// <kappa(b) tau_{d_1} ... tau_{d_n}>_g
    Compute {
        #[arg(short = 'g', long)]
        genus: u32,
        /// Kappa multi-index as `i:m,...`, e.g. `1:2,3:1` for kappa_1^2 kappa_3.
        #[arg(long, default_value = "")]
        kappa: String,
        /// Psi exponents as a comma list, e.g. `2,0,0`.
        #[arg(long, default_value = "")]
        psi: String,
    },
    /// Higher Weil-Petersson volume V_{g,n}(kappa(b)).
    Volume {
        #[arg(short = 'g', long)]
        genus: u32,
        #[arg(short = 'n', long = "points")]
        points: u32,
        #[arg(long, default_value = "")]
        kappa: String,
    },
    /// <kappa(b) prod tau_{d_j} | lambda>_g for lambda_g or lambda_g lambda_{g-1}.
    Hodge {
        #[arg(short = 'g', long)]
        genus: u32,
        /// `lambda_g` or `lambda_g_lambda_gm1`.
        #[arg(long, default_value = "lambda_g")]
        pairing: String,
        #[arg(long, default_value = "")]
        kappa: String,
        #[arg(long, default_value = "")]
        psi: String,
        /// File of `g,pairing,num/den` one-point values replacing the
        /// closed forms.
        #[arg(long, value_name = "PATH")]
        provider: Option<PathBuf>,
        /// Evaluate by expanding kappa classes first instead of the
        /// kappa-carrying recursion.
        #[arg(long)]
        expanded: bool,
    },
    /// Tables of constants or volumes.
    #[command(group(ArgGroup::new("what").required(true).args(["constants", "volumes"])))]
    Table {
        /// `alpha`, `gamma_odd` or `gamma_fact`.
        #[arg(long, value_name = "KIND")]
        constants: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_weight: u32,
        /// Every in-dimension volume within the genus and point bounds.
        #[arg(long)]
        volumes: bool,
        #[arg(long, default_value_t = 2)]
        max_genus: u32,
        #[arg(long, default_value_t = 4)]
        max_points: u32,
    },
    /// Run an identity suite and report pass/fail.
    #[command(group(ArgGroup::new("which").required(true).args(["suite", "oracle", "shift"])))]
    Verify {
        /// One of oracle, kappa-subtracted, pivot, string, dilaton, kdv,
        /// volumes, shift, hodge, constants, cache.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,
        /// Same as `--suite oracle`.
        #[arg(long)]
        oracle: bool,
        /// Same as `--suite shift`.
        #[arg(long)]
        shift: bool,
        /// Largest moduli dimension 3g-3+n swept.
        #[arg(long, default_value_t = 6)]
        max_dim: u32,
        /// Weight cutoff of the series comparison.
        #[arg(long, default_value_t = 4)]
        cutoff: u32,
        #[arg(long, default_value_t = 3)]
        s_vars: usize,
        #[arg(long, default_value_t = 5)]
        t_max: usize,
        /// Largest genus of the lambda pairing suite.
        #[arg(long, default_value_t = 3)]
        max_genus: u32,
    },
}

enum Failure {
    Error(Error),
    Io(std::io::Error),
    /// Printed, but the run did not succeed.
    Status(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

const USAGE: u8 = 2;
const OFF_DIMENSION: u8 = 3;

struct Context {
    printer: Printer,
    cache: Option<CacheFile>,
    strict: bool,
}

impl Context {
    /// Looks `key` up in the cache, computing and storing it on a miss.
    fn cached(&mut self, key: &str, compute: impl FnOnce() -> wprec::Result<Rational>) -> wprec::Result<Rational> {
        if let Some(v) = self.cache.as_ref().and_then(|c| c.get(key)) {
            return Ok(v.clone());
        }
        let value = compute()?;
        if let Some(c) = self.cache.as_mut() {
            c.append(key, &value)?;
        }
        Ok(value)
    }

    fn off_dimension(&self, what: &str) -> Result<(), Failure> {
        if self.strict {
            eprintln!("warning: {what} is off dimension; the value is 0");
            return Err(Failure::Status(OFF_DIMENSION));
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Status(code)) => ExitCode::from(code),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = if cli.common.json {
        Format::Json
    } else if cli.common.csv {
        Format::Csv
    } else {
        Format::Plain
    };
    let cache = cli.common.cache.as_deref().map(CacheFile::open).transpose()?;
    let mut ctx = Context {
        printer: Printer {
            format,
            decimal: cli.common.decimal,
        },
        cache,
        strict: cli.common.strict,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Compute { genus, kappa, psi } => compute(&mut ctx, &mut out, genus, &kappa, &psi),
        Command::Volume { genus, points, kappa } => volume(&mut ctx, &mut out, genus, points, &kappa),
        Command::Hodge {
            genus,
            pairing,
            kappa,
            psi,
            provider,
            expanded,
        } => hodge(&mut ctx, &mut out, genus, &pairing, &kappa, &psi, provider, expanded),
        Command::Table {
            constants,
            max_weight,
            volumes,
            max_genus,
            max_points,
        } => {
            if let Some(kind) = constants {
                constant_table(&ctx, &mut out, &kind, max_weight)
            } else {
                debug_assert!(volumes);
                volume_table(&mut ctx, &mut out, max_genus, max_points)
            }
        }
        Command::Verify {
            suite,
            oracle,
            shift,
            max_dim,
            cutoff,
            s_vars,
            t_max,
            max_genus,
        } => {
            let name = match (suite, oracle, shift) {
                (Some(name), _, _) => name,
                (None, true, _) => "oracle".to_string(),
                _ => "shift".to_string(),
            };
            let bounds = SuiteBounds {
                max_dim,
                cutoff,
                s_vars,
                t_max,
                max_genus,
                ..SuiteBounds::default()
            };
            verify(&ctx, &mut out, &name, &bounds)
        }
    }
}

fn compute(ctx: &mut Context, out: &mut dyn Write, genus: u32, kappa: &str, psi: &str) -> Result<(), Failure> {
    let b: MultiIndex = kappa.parse()?;
    let psi = parse_psi(psi)?;
    let key = CorrelatorKey::new(genus, b.clone(), psi.clone());
    let in_dimension = key.is_stable() && key.in_dimension();
    let value = if in_dimension {
        let engine = CorrelatorEngine::new();
        ctx.cached(&cache::correlator_key(&key), || Ok(engine.evaluate(&key)))?
    } else {
        Rational::default()
    };
    let record = Record::new()
        .with("genus", Cell::Int(genus as i64))
        .with("kappa", Cell::Text(b.to_string()))
        .with("psi", Cell::List(psi))
        .with("value", Cell::Value(value));
    ctx.printer.single(out, &record)?;
    if !in_dimension {
        ctx.off_dimension("the signature")?;
    }
    Ok(())
}

fn volume(ctx: &mut Context, out: &mut dyn Write, genus: u32, points: u32, kappa: &str) -> Result<(), Failure> {
    let b: MultiIndex = kappa.parse()?;
    let in_dimension =
        is_stable(genus, points as usize) && b.weight() as i64 == moduli_dimension(genus, points as usize);
    let value = if in_dimension {
        let engine = VolumeEngine::new();
        ctx.cached(&cache::volume_key(genus, points, &b), || engine.volume(genus, points, &b))?
    } else {
        Rational::default()
    };
    let record = Record::new()
        .with("genus", Cell::Int(genus as i64))
        .with("points", Cell::Int(points as i64))
        .with("kappa", Cell::Text(b.to_string()))
        .with("value", Cell::Value(value));
    ctx.printer.single(out, &record)?;
    if !in_dimension {
        ctx.off_dimension("the volume")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn hodge(
    ctx: &mut Context,
    out: &mut dyn Write,
    genus: u32,
    pairing: &str,
    kappa: &str,
    psi: &str,
    provider: Option<PathBuf>,
    expanded: bool,
) -> Result<(), Failure> {
    let pairing: HodgePairing = pairing.parse()?;
    let b: MultiIndex = kappa.parse()?;
    let psi = parse_psi(psi)?;
    if genus == 0 {
        return Err(Error::Domain("lambda pairings need genus at least 1".into()).into());
    }
    let degree = b.weight() as i64 + psi.iter().map(|&d| d as i64).sum::<i64>();
    let in_dimension = is_stable(genus, psi.len()) && degree == pairing.target_degree(genus, psi.len());
    let table;
    let source: &dyn BaseValueProvider = match &provider {
        Some(path) => {
            table = TableProvider::load(path)?;
            &table
        }
        None => &ClosedFormProvider,
    };
    let engine = HodgeEngine::new(source);
    let evaluate = || {
        if expanded {
            engine.hodge_correlator(genus, pairing, &b, &psi)
        } else {
            engine.hodge_direct(genus, pairing, &b, &psi)
        }
    };
    let value = if !in_dimension {
        Rational::default()
    } else if provider.is_none() {
        let key = cache::hodge_key(pairing, &CorrelatorKey::new(genus, b.clone(), psi.clone()));
        ctx.cached(&key, evaluate)?
    } else {
        evaluate()?
    };
    let record = Record::new()
        .with("genus", Cell::Int(genus as i64))
        .with("pairing", Cell::Text(pairing.to_string()))
        .with("kappa", Cell::Text(b.to_string()))
        .with("psi", Cell::List(psi))
        .with("value", Cell::Value(value));
    ctx.printer.single(out, &record)?;
    if !in_dimension {
        ctx.off_dimension("the pairing")?;
    }
    Ok(())
}

fn index_text(b: &MultiIndex) -> String {
    if b.is_zero() {
        "0".into()
    } else {
        b.to_string()
    }
}

fn constant_table(ctx: &Context, out: &mut dyn Write, kind: &str, max_weight: u32) -> Result<(), Failure> {
    let kind: ConstantKind = kind.parse()?;
    let records: Vec<Record> = shared(kind)
        .up_to_weight(max_weight)
        .into_iter()
        .map(|(b, v)| {
            Record::new()
                .with("index", Cell::Text(index_text(&b)))
                .with("value", Cell::Value(v))
        })
        .collect();
    ctx.printer.table(out, &records)?;
    Ok(())
}

fn volume_table(ctx: &mut Context, out: &mut dyn Write, max_genus: u32, max_points: u32) -> Result<(), Failure> {
    let engine = VolumeEngine::new();
    let mut records = Vec::new();
    for g in 0..=max_genus {
        for n in 0..=max_points {
            if !is_stable(g, n as usize) || (n == 0 && g < 2) {
                continue;
            }
            let dim = moduli_dimension(g, n as usize) as u32;
            for b in MultiIndex::of_weight(dim, dim) {
                let v = ctx.cached(&cache::volume_key(g, n, &b), || engine.volume(g, n, &b))?;
                records.push(
                    Record::new()
                        .with("genus", Cell::Int(g as i64))
                        .with("points", Cell::Int(n as i64))
                        .with("kappa", Cell::Text(index_text(&b)))
                        .with("value", Cell::Value(v)),
                );
            }
        }
    }
    ctx.printer.table(out, &records)?;
    Ok(())
}

fn verify(ctx: &Context, out: &mut dyn Write, name: &str, bounds: &SuiteBounds) -> Result<(), Failure> {
    if name != "cache" && !SUITE_NAMES.contains(&name) {
        eprintln!(
            "error: unknown suite {name:?}; expected one of {}, cache",
            SUITE_NAMES.join(", ")
        );
        return Err(Failure::Status(USAGE));
    }
    let report = suites::run_named(name, bounds, ctx.cache.as_ref())?;
    match ctx.printer.format {
        Format::Plain => writeln!(out, "{report}")?,
        _ => {
            let record = Record::new()
                .with("suite", Cell::Text(report.name.clone()))
                .with("passed", Cell::Bool(report.passed()))
                .with("cases", Cell::Int(report.cases as i64))
                .with("failures", Cell::Int(report.failures as i64))
                .with(
                    "first_counterexample",
                    report.first_counterexample.clone().map_or(Cell::Missing, Cell::Text),
                );
            ctx.printer.single(out, &record)?;
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Status(1))
    }
}
