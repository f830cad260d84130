use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ramlab_cli::report::OutputFormat;
use ramlab_cli::run::{execute, CommandKind, Mode, Request};
use ramlab_cli::selftest;

/// Exact invariants of wildly ramified power-series germs and Newton
/// polygon certificates for cycles of polynomial maps.
#[derive(Parser)]
#[command(name = "ramlab", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiplicative order of a germ's multiplier
    Order(CommonArgs),
    /// Ramification index profile with congruence and bound flags
    Invariants(CommonArgs),
    /// Decide minimal ramification by both routes, plus the almost notion for p = 2
    Mr(CommonArgs),
    /// The iterated residue of a germ, when defined
    Resit(CommonArgs),
    /// Partial normal form gamma z (1 + a1 z^q + a2 z^2q + ...) with the conjugation trace
    Normalize(CommonArgs),
    /// Sweep every nonzero multiplier of the field through a germ template
    Classify(CommonArgs),
    /// Valuation of the sharp cycle-distance bound per level
    Bound(CommonArgs),
    /// Newton polygon certification of cycle optimality per level
    Cycles(CommonArgs),
    /// Multiplicity law for maps lambda z S(z)^p: indices scale by p each level
    Appendix(CommonArgs),
    /// Run the built-in acceptance suite (one line per criterion)
    Selftest(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Residue characteristic
    #[arg(long)]
    p: Option<u64>,
    /// Extension degree of the coefficient field F_{p^k}
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Defining polynomial in x for k > 1 (default: a built-in choice)
    #[arg(long, allow_hyphen_values = true)]
    modulus: Option<String>,
    /// Power series germ in z, e.g. "4*z+z^2" or "x*z*(1+z^5)"
    #[arg(long, allow_hyphen_values = true)]
    germ: Option<String>,
    /// Polynomial map in z with scalar coefficients, e.g. "l*z*(1+z)"
    #[arg(long, allow_hyphen_values = true)]
    map: Option<String>,
    /// Multiplier scalar; prefix "padic:" or "rat:" picks the backend
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Second scalar parameter, bound to "mu" in --map
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Validation only: expected multiplier order (mismatch is an error)
    #[arg(long)]
    q: Option<u64>,
    /// Deepest level n to compute
    #[arg(long)]
    nmax: Option<u32>,
    /// Truncation override: series window, Laurent cutoff, or p-adic precision
    #[arg(long)]
    trunc: Option<usize>,
    /// Coefficient arithmetic: exact rational functions or truncated data
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = OutputArg::Pretty)]
    output: OutputArg,
    /// Seed for randomized certificates and the selftest corpus
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweep commands; row order stays input order
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Abort iterate construction beyond this degree
    #[arg(long)]
    degree_ceiling: Option<u64>,
    /// Write the full coefficient array of the deepest iterate to this file
    #[arg(long)]
    dump_iterate: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Trunc,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Json,
    Tsv,
    Pretty,
}

fn to_request(kind: CommandKind, a: &CommonArgs) -> Request {
    Request {
        command: kind,
        p: a.p,
        k: a.k,
        modulus: a.modulus.clone(),
        germ: a.germ.clone(),
        map: a.map.clone(),
        lambda: a.lambda.clone(),
        mu: a.mu.clone(),
        q: a.q,
        nmax: a.nmax,
        trunc: a.trunc,
        mode: match a.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Trunc => Mode::Trunc,
        },
        output: match a.output {
            OutputArg::Json => OutputFormat::Json,
            OutputArg::Tsv => OutputFormat::Tsv,
            OutputArg::Pretty => OutputFormat::Pretty,
        },
        seed: a.seed,
        jobs: a.jobs,
        degree_ceiling: a.degree_ceiling,
        dump_iterate: a.dump_iterate.clone(),
    }
}

fn dispatch(cli: &Cli) -> i32 {
    let (kind, args) = match &cli.command {
        Command::Order(a) => (Some(CommandKind::Order), a),
        Command::Invariants(a) => (Some(CommandKind::Invariants), a),
        Command::Mr(a) => (Some(CommandKind::Mr), a),
        Command::Resit(a) => (Some(CommandKind::Resit), a),
        Command::Normalize(a) => (Some(CommandKind::Normalize), a),
        Command::Classify(a) => (Some(CommandKind::Classify), a),
        Command::Bound(a) => (Some(CommandKind::Bound), a),
        Command::Cycles(a) => (Some(CommandKind::Cycles), a),
        Command::Appendix(a) => (Some(CommandKind::Appendix), a),
        Command::Selftest(a) => (None, a),
    };
    match kind {
        Some(k) => match execute(&to_request(k, args)) {
            Ok(s) => {
                print!("{}", s.text);
                if s.indeterminate {
                    3
                } else {
                    0
                }
            }
            Err(f) => {
                eprintln!("error: {}", f.message());
                f.exit_code()
            }
        },
        None => {
            let outcomes = selftest::run_all(args.seed);
            for o in &outcomes {
                println!("{}", selftest::render_line(o));
            }
            if outcomes.iter().all(|o| o.pass) {
                0
            } else {
                4
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(&cli));
}
