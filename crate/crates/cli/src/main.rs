mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sqfree_core::counting::{
    count_squarefree_direct, count_squarefree_sieve, count_squarefull, default_parameters,
    mobius_decomposition, DEFAULT_SIEVE_BOUND,
};
use sqfree_core::density::cf_truncated;
use sqfree_core::family::{
    average_error_experiment, error_records, squarefull_average_experiment, variance_experiment,
    DensityModel, ExperimentOptions, FamilySpec, DEFAULT_TRUNCATION,
};
use sqfree_core::lattice::{ceil_root, count_box_points, dyadic_uk_sum, lattice_basis, successive_minima};
use sqfree_core::{arith, Error, Polynomial};

use output::{Format, Payload};

#[derive(Parser, Debug)]
#[command(name = "sqfree", version, about = "Square-free values of integer polynomials")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_parser = positive_usize, allow_hyphen_values = true)]
    threads: Option<usize>,

    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format (default: csv for counts, json for everything else).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Record wall-clock time in the output.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count n <= N with f(n) square-free.
    Count(CountArgs),
    /// Truncated Euler product for the density c_f.
    Density(DensityArgs),
    /// Split S_f(N) into main term and two tails at D and E.
    Decompose(DecomposeArgs),
    /// Basis, box count and successive minima of the lattice of (m, n).
    Lattice(LatticeArgs),
    /// Dyadic sum of U_k(q^2, H, N) over square-free q in (Q/2, Q].
    Uksum(UksumArgs),
    /// Mertens function, optionally restricted to d coprime to a modulus.
    Mertens(MertensArgs),
    /// Square-full count for one polynomial, or its average over a quadratic family.
    Squarefull(SquarefullArgs),
    /// Average of S_f(N) - c_f N over a polynomial family.
    Average(ExperimentArgs),
    /// Second moment of S_f(N) - c_f N over a polynomial family.
    Variance(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Direct,
    Sieve,
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Coefficients a0,a1,...,ak (constant term first).
    #[arg(long, value_parser = parse_poly, allow_hyphen_values = true)]
    poly: Polynomial,
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    n: u64,
    #[arg(long, value_enum, default_value = "sieve")]
    method: CountMethod,
    /// Small-prime bound of the sieve method.
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true, default_value_t = DEFAULT_SIEVE_BOUND)]
    b0: u64,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long, value_parser = parse_poly, allow_hyphen_values = true)]
    poly: Polynomial,
    /// Prime bound P of the Euler product.
    #[arg(long = "p", visible_alias = "primes", value_parser = positive_u64, allow_hyphen_values = true, default_value_t = DEFAULT_TRUNCATION)]
    p: u64,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, value_parser = parse_poly, allow_hyphen_values = true)]
    poly: Polynomial,
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    n: u64,
    /// Main-term cut (default from the height of f and N).
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    d: Option<u64>,
    /// Second cut (default from the height of f and N).
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    e: Option<u64>,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    m: u64,
    /// The point n (any integer).
    #[arg(long, allow_hyphen_values = true)]
    point: i64,
    #[arg(long, value_parser = positive_usize, allow_hyphen_values = true)]
    k: usize,
    /// Also count lattice points in the box [-H, H]^(k+1).
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    h: Option<u64>,
    /// Shell radius the minima search must be allowed (default ceil(m^(1/(k+1)))).
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    search_bound: Option<u64>,
}

#[derive(Args, Debug)]
struct UksumArgs {
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    q: u64,
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    h: u64,
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    n: u64,
    #[arg(long, value_parser = positive_usize, allow_hyphen_values = true)]
    k: usize,
}

#[derive(Args, Debug)]
struct MertensArgs {
    /// Upper limit D of the sum.
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    n: u64,
    /// Only d coprime to this modulus.
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true, default_value_t = 1)]
    m: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Montecarlo,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_parser = positive_usize, allow_hyphen_values = true)]
    k: Option<usize>,
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    h: Option<u64>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    /// Monte Carlo sample count.
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    samples: Option<u64>,
    /// Seed of every random stream.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    seed: u64,
    /// Include members with leading coefficient 0.
    #[arg(long)]
    allow_degenerate: bool,
    /// Run below the default height guard.
    #[arg(long)]
    out_of_range: bool,
}

#[derive(Args, Debug)]
struct SquarefullArgs {
    /// Count for this polynomial; without it, average over the family.
    #[arg(long, value_parser = parse_poly, allow_hyphen_values = true)]
    poly: Option<Polynomial>,
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    n: u64,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_parser = positive_u64, allow_hyphen_values = true)]
    n: u64,
    #[command(flatten)]
    family: FamilyArgs,
    /// Prime bound P of each density.
    #[arg(long = "p", visible_alias = "primes", value_parser = positive_u64, allow_hyphen_values = true, default_value_t = DEFAULT_TRUNCATION)]
    p: u64,
    /// Replace every density by this constant (placebo run).
    #[arg(long, allow_hyphen_values = true)]
    constant_density: Option<f64>,
    /// Drop reducible members (degrees 2 and 3).
    #[arg(long)]
    exclude_reducible: bool,
    /// Also write one CSV row per member to this path.
    #[arg(long)]
    dump_csv: Option<PathBuf>,
}

fn positive_u64(s: &str) -> Result<u64, String> {
    match s.trim().parse::<i128>() {
        Ok(v) if v >= 1 && v <= u64::MAX as i128 => Ok(v as u64),
        Ok(_) => Err(format!("must be a positive integer, got {s}")),
        Err(_) => Err(format!("not an integer: {s}")),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    positive_u64(s).and_then(|v| usize::try_from(v).map_err(|_| format!("too large: {s}")))
}

fn parse_poly(s: &str) -> Result<Polynomial, String> {
    s.parse::<Polynomial>().map_err(|e| e.to_string())
}

impl FamilyArgs {
    fn spec(&self) -> Result<FamilySpec, Error> {
        let k = self.k.ok_or_else(|| Error::Precondition("--k is required".into()))?;
        let h = self.h.ok_or_else(|| Error::Precondition("--h is required".into()))?;
        let mut spec = match self.mode {
            ModeArg::Exhaustive => FamilySpec::exhaustive(k, h),
            ModeArg::Montecarlo => {
                let samples = self
                    .samples
                    .ok_or_else(|| Error::Precondition("--samples is required with --mode montecarlo".into()))?;
                FamilySpec::monte_carlo(k, h, samples, self.seed)
            }
        };
        spec.allow_degenerate = self.allow_degenerate;
        Ok(spec)
    }
}

/// Height of `f`: largest absolute coefficient.
fn height(f: &Polynomial) -> Result<u64, Error> {
    f.coeffs()
        .iter()
        .map(|c| c.magnitude().try_into().ok())
        .collect::<Option<Vec<u64>>>()
        .map(|v| v.into_iter().max().unwrap_or(0))
        .ok_or_else(|| Error::Precondition("--poly coefficients exceed 2^64".into()))
}

fn run(command: &Command, format: Format) -> Result<(&'static str, Payload), Error> {
    Ok(match command {
        Command::Count(a) => {
            let r = match a.method {
                CountMethod::Direct => count_squarefree_direct(&a.poly, a.n)?,
                CountMethod::Sieve => count_squarefree_sieve(&a.poly, a.n, a.b0)?,
            };
            let row = json!({
                "coefficients": r.poly.coeff_string(),
                "n": r.n,
                "count": r.count,
                "method": r.method.as_str(),
            });
            ("count", Payload::Rows(vec![row]))
        }
        Command::Density(a) => {
            let r = cf_truncated(&a.poly, a.p)?;
            let mut v = serde_json::to_value(r).map_err(internal)?;
            v["value_decimal"] = json!(r.value.to_decimal(30));
            v["poly"] = json!(a.poly.coeff_string());
            ("density", Payload::Record(v))
        }
        Command::Decompose(a) => {
            let (d, e) = match (a.d, a.e) {
                (Some(d), Some(e)) => (d, e),
                (d, e) => {
                    let (d0, e0) = default_parameters(height(&a.poly)?.max(1), a.n, a.poly.degree().max(1))?;
                    (d.unwrap_or(d0), e.unwrap_or(e0.max(d.unwrap_or(d0))))
                }
            };
            let r = mobius_decomposition(&a.poly, a.n, d, e)?;
            let mut v = serde_json::to_value(r).map_err(internal)?;
            v["poly"] = json!(a.poly.coeff_string());
            ("decompose", Payload::Record(v))
        }
        Command::Lattice(a) => {
            let l = lattice_basis(a.m, a.point, a.k)?;
            let bound = a.search_bound.unwrap_or_else(|| ceil_root(a.m, a.k + 1));
            let minima = successive_minima(&l, bound)?;
            let box_count = a.h.map(|h| count_box_points(&l, h)).transpose()?;
            let v = json!({
                "lattice": l,
                "search_bound": bound,
                "minima": minima,
                "box_h": a.h,
                "box_count": box_count.map(|c| c.to_string()),
            });
            ("lattice", Payload::Record(v))
        }
        Command::Uksum(a) => {
            let r = dyadic_uk_sum(a.q, a.h, a.n, a.k)?;
            if format == Format::Csv {
                let row = |kind: &str, q: u64, u: String, ratio: Option<f64>| {
                    json!({
                        "kind": kind, "q": q, "h": r.h, "n": r.n, "k": r.k, "u": u,
                        "lemma_rhs": ratio.map(|_| r.lemma_rhs), "ratio": ratio,
                    })
                };
                let mut rows: Vec<Value> =
                    r.terms.iter().map(|(q, u)| row("term", *q, u.to_string(), None)).collect();
                rows.push(row("sum", r.q, r.sum.to_string(), Some(r.ratio)));
                return Ok(("uksum", Payload::Rows(rows)));
            }
            let terms: Vec<Value> = r
                .terms
                .iter()
                .map(|(q, u)| json!({"q": q, "u": u.to_string()}))
                .collect();
            let v = json!({
                "q": r.q, "h": r.h, "n": r.n, "k": r.k,
                "terms": terms,
                "sum": r.sum.to_string(),
                "lemma_rhs": r.lemma_rhs,
                "ratio": r.ratio,
            });
            ("uksum", Payload::Record(v))
        }
        Command::Mertens(a) => {
            let r = arith::mertens(a.n, a.m)?;
            let row = json!({"limit": r.limit, "modulus": r.modulus, "value": r.value});
            ("mertens", Payload::Rows(vec![row]))
        }
        Command::Squarefull(a) => match &a.poly {
            Some(f) => {
                let r = count_squarefull(f, a.n)?;
                let row = json!({
                    "coefficients": r.poly.coeff_string(),
                    "n": r.n,
                    "count": r.count,
                    "method": r.method.as_str(),
                });
                ("squarefull", Payload::Rows(vec![row]))
            }
            None => {
                let spec = a.family.spec()?;
                let r = squarefull_average_experiment(&spec, a.n, a.family.out_of_range)?;
                let mut v = serde_json::to_value(&r).map_err(internal)?;
                v["average"] = json!(format!("{}/{}", r.numerator, r.denominator));
                ("squarefull", Payload::Record(v))
            }
        },
        Command::Average(a) | Command::Variance(a) => {
            let spec = a.family.spec()?;
            let options = ExperimentOptions {
                density: match a.constant_density {
                    Some(c) => DensityModel::Constant(c),
                    None => DensityModel::Truncated(a.p),
                },
                exclude_reducible: a.exclude_reducible,
                allow_out_of_range: a.family.out_of_range,
            };
            let (name, r) = if matches!(command, Command::Average(_)) {
                ("average", average_error_experiment(&spec, a.n, options)?)
            } else {
                ("variance", variance_experiment(&spec, a.n, options)?)
            };
            if let Some(path) = &a.dump_csv {
                let records = error_records(&spec, a.n, options)?;
                output::write_records(path, &records)
                    .map_err(|e| Error::Precondition(format!("--dump-csv {}: {e}", path.display())))?;
            }
            let v = serde_json::to_value(r).map_err(internal)?;
            (name, Payload::Record(v))
        }
    })
}

fn internal(e: serde_json::Error) -> Error {
    Error::Internal(e.to_string())
}

fn default_format(command: &Command) -> Format {
    match command {
        Command::Count(_) | Command::Mertens(_) => Format::Csv,
        Command::Squarefull(a) if a.poly.is_some() => Format::Csv,
        _ => Format::Json,
    }
}

/// Parameters that are only conditionally required, checked before any work.
fn missing_parameter(command: &Command) -> Option<&'static str> {
    let family = match command {
        Command::Squarefull(a) if a.poly.is_none() => &a.family,
        Command::Average(a) | Command::Variance(a) => &a.family,
        _ => return None,
    };
    if family.k.is_none() {
        Some("--k is required")
    } else if family.h.is_none() {
        Some("--h is required")
    } else if family.mode == ModeArg::Montecarlo && family.samples.is_none() {
        Some("--samples is required with --mode montecarlo")
    } else {
        None
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(msg) = missing_parameter(&cli.command) {
        Cli::command()
            .error(clap::error::ErrorKind::MissingRequiredArgument, msg)
            .exit();
    }
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: --threads {threads}: {e}");
            return ExitCode::from(1);
        }
    };
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    let start = Instant::now();
    let result = pool.install(|| run(&cli.command, format));
    let elapsed = cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let (name, payload) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match output::render(name, payload, format, elapsed) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("--output {}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
