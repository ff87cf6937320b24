use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use unimod::bench::{self, BenchConfig, Method, Suite};
use unimod::engine::is_totally_unimodular;
use unimod::generators::{gen_network_matrix, gen_odd_cycle_violator, gen_random_signed};
use unimod::io::{format_matrix, parse_matrix_file, ternary_of};
use unimod::oracles::{ce_ghouila_houri, st_camion, OracleVerdict};
use unimod::unimodular::{is_strongly_unimodular, is_unimodular};
use unimod::{Error, Label, TernaryMatrix};

const HOLDS: u8 = 0;
const FAILS: u8 = 1;
const USAGE: u8 = 2;
const TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "unimod", version, about = "Total unimodularity, unimodularity and strong unimodularity tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a property of the matrix in FILE.
    Check(CheckArgs),
    /// Generate a test matrix.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Time decision methods on a generated suite.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(id = "property", required = true, multiple = false)]
struct Property {
    #[arg(long)]
    tu: bool,
    #[arg(long)]
    unimodular: bool,
    #[arg(long)]
    strong: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CheckMethod {
    Dt,
    St,
    Ce,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    property: Property,
    /// Write the decomposition certificate (JSON) when the matrix is t.u.
    #[arg(long, value_name = "OUT")]
    certificate: Option<PathBuf>,
    /// Print a minimal violating submatrix when the matrix is not t.u.
    #[arg(long)]
    violator: bool,
    #[arg(long, value_enum, default_value = "dt")]
    method: CheckMethod,
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    #[arg(value_name = "FILE")]
    file: PathBuf,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    seed: u64,
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    /// Signed n×n Bernoulli(p) matrix.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Network matrix of a connected random graph.
    Network {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Odd-cycle matrix, optionally pivoted.
    Oddcycle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pivots: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: String,
    /// Comma-separated subset of ST,CE,DT,DTV.
    #[arg(long)]
    methods: String,
    /// Comma-separated sizes.
    #[arg(long)]
    sizes: String,
    #[arg(long, value_name = "SECS", default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

fn limit(secs: Option<f64>) -> Result<Option<Duration>, Error> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|_| Error::Input(format!("invalid time limit {s}"))))
        .transpose()
}

fn labels(ls: &[Label]) -> String {
    ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn print_violator(a: &TernaryMatrix, rows: &[Label], cols: &[Label], det: Option<String>, minimal: bool) {
    let mut line = format!("# violator rows {} cols {}", labels(rows), labels(cols));
    if let Some(d) = det {
        line.push_str(&format!(" det {d}"));
    }
    if minimal {
        line.push_str(" minimal");
    }
    println!("{line}");
    print!("{}", format_matrix(&a.submatrix_by_labels(rows, cols)));
}

fn check(args: CheckArgs) -> Result<u8, Error> {
    let a = parse_matrix_file(&args.file)?;
    let lim = limit(args.time_limit)?;
    let p = &args.property;
    if !p.tu {
        let strong = p.strong;
        let name = if strong { "strongly unimodular" } else { "unimodular" };
        let r = unimod::bench::run_with_limit(lim, move || {
            if strong {
                is_strongly_unimodular(&a)
            } else {
                is_unimodular(&a)
            }
        });
        return Ok(match r {
            None => {
                println!("# timeout");
                TIMEOUT
            }
            Some(holds) => {
                if holds? {
                    println!("# {name}");
                    HOLDS
                } else {
                    println!("# not {name}");
                    FAILS
                }
            }
        });
    }
    if args.certificate.is_some() && !matches!(args.method, CheckMethod::Dt) {
        return Err(Error::Input("--certificate requires --method dt".into()));
    }
    let t = match ternary_of(&a) {
        Ok(t) => t,
        Err(Error::EntryOutOfRange { row, col, value }) => {
            println!("# not totally unimodular");
            if args.violator {
                println!("# violator rows {} cols {} det {value} minimal", Label::row(row), Label::col(col));
                println!("1 1\n{value}");
            }
            return Ok(FAILS);
        }
        Err(e) => return Err(e),
    };
    match args.method {
        CheckMethod::Dt => {
            let want = args.violator;
            let tt = t.clone();
            let Some(r) = bench::run_with_limit(lim, move || is_totally_unimodular(&tt, want)) else {
                println!("# timeout");
                return Ok(TIMEOUT);
            };
            let r = r?;
            if r.tu {
                println!("# totally unimodular");
                if let (Some(path), Some(cert)) = (&args.certificate, &r.certificate) {
                    write_out(Some(path), &cert.to_json())?;
                }
                return Ok(HOLDS);
            }
            println!("# not totally unimodular");
            if let (true, Some(v)) = (args.violator, &r.violator) {
                print_violator(&t, &v.rows, &v.cols, Some(v.det.to_string()), v.minimal);
            }
            Ok(FAILS)
        }
        CheckMethod::St | CheckMethod::Ce => {
            let v = if matches!(args.method, CheckMethod::St) { st_camion(&t, lim) } else { ce_ghouila_houri(&t, lim) };
            match v {
                OracleVerdict::Tu => {
                    println!("# totally unimodular");
                    Ok(HOLDS)
                }
                OracleVerdict::NotTu(w) => {
                    println!("# not totally unimodular");
                    if args.violator {
                        if w.rows.is_empty() {
                            println!("# columns without an equitable signing: {}", labels(&w.cols));
                        } else {
                            print_violator(&t, &w.rows, &w.cols, w.det.map(|d| d.to_string()), false);
                        }
                    }
                    Ok(FAILS)
                }
                OracleVerdict::Timeout { order } => {
                    println!("# timeout at order {order}");
                    Ok(TIMEOUT)
                }
            }
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(family: Family) -> Result<u8, Error> {
    let (a, out, header) = match family {
        Family::Random { n, p, out } => {
            let h = format!("# random n {n} p {p} seed {}\n", out.seed);
            (gen_random_signed(n, p, out.seed)?, out, h)
        }
        Family::Network { vertices, p, out } => {
            let (a, g) = gen_network_matrix(vertices, p, out.seed)?;
            let h = format!("# network vertices {vertices} edges {} p {p} seed {}\n", g.edges.len(), out.seed);
            (a, out, h)
        }
        Family::Oddcycle { n, pivots, out } => {
            let h = format!("# oddcycle n {n}{} seed {}\n", if pivots { " pivots" } else { "" }, out.seed);
            (gen_odd_cycle_violator(n, pivots, out.seed)?, out, h)
        }
    };
    write_out(out.output.as_deref(), &(header + &format_matrix(&a)))?;
    Ok(HOLDS)
}

fn run_bench(args: BenchArgs) -> Result<u8, Error> {
    let sizes = args
        .sizes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Input(format!("invalid size '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = BenchConfig {
        suite: args.suite.parse::<Suite>()?,
        methods: bench::parse_list::<Method>(&args.methods)?,
        sizes,
        time_limit: limit(Some(args.time_limit))?,
        seed: args.seed,
    };
    let cells = bench::run_benchmark(&cfg)?;
    match args.format {
        Format::Table => print!("{}", bench::format_table(&cells, cfg.time_limit)),
        Format::Csv => print!("{}", bench::format_csv(&cells)),
    }
    Ok(HOLDS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Check(a) => check(a),
        Command::Gen { family } => gen(family),
        Command::Bench(a) => run_bench(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}
