use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use igusa_cli::{load, render, run, CliError, Command, Options};
use igusa_core::padic::FieldKind;

#[derive(Parser)]
#[command(name = "igusa", version, about = "Exact local zeta functions of monomial regions")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Show rationals as decimals with this many digits.
    #[arg(long, global = true, value_name = "DIGITS")]
    decimal: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Target {
    /// Spec file.
    spec: PathBuf,
    /// Region name.
    region: String,
    /// Weight name; omitted means the plain volume.
    weight: Option<String>,
    /// Ramification parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<u32>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Qp,
    Laurent,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quantifier-free form of a set over Z^n.
    Qe { spec: PathBuf, set: String },
    /// Generic and bounded Euler characteristics of a set over Q^n.
    Euler { spec: PathBuf, set: String },
    /// Class of a region in the graded Grothendieck ring.
    Class {
        spec: PathBuf,
        region: String,
        weight: Option<String>,
    },
    /// Generating sum of q^-(x1+..+xn+omega) T^f over a set.
    Sum {
        spec: PathBuf,
        set: String,
        weight: Option<String>,
    },
    /// Closed-form zeta function of a region.
    Zeta(Target),
    /// Compare iterated integrals in every coordinate order.
    FubiniCheck(Target),
    /// Push a region through a monomial map and compare.
    CovCheck {
        spec: PathBuf,
        region: String,
        weight: String,
        map: String,
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<u32>>,
    },
    /// Uniform description across ramification parameters.
    Family(Target),
    /// Check the zeta function against truncated integration.
    OracleCheck {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        p: u32,
        #[arg(long, env = "IGUSA_PRECISION", default_value_t = 8)]
        precision: u32,
        #[arg(long, value_enum, default_value = "qp")]
        kind: Kind,
        /// Residue field degree for Laurent series fields.
        #[arg(long, default_value_t = 1)]
        delta: u32,
        /// Exponents with T_i = q^-kappa_i, comma separated (rationals allowed).
        #[arg(long, value_delimiter = ',')]
        kappa: Option<Vec<String>>,
    },
}

fn parse_kappa(values: &[String]) -> Result<Vec<BigRational>, CliError> {
    values
        .iter()
        .map(|v| {
            v.trim()
                .parse::<BigRational>()
                .map_err(|_| CliError::resolve("--kappa", format!("not a rational number: {v}")))
        })
        .collect()
}

fn dispatch(cli: Cli) -> Result<(String, i32), CliError> {
    let mut opts = Options {
        decimal: cli.decimal,
        ..Options::default()
    };
    let (spec, command) = match cli.command {
        Cmd::Qe { spec, set } => (spec, Command::Qe { set }),
        Cmd::Euler { spec, set } => (spec, Command::Euler { set }),
        Cmd::Class { spec, region, weight } => (spec, Command::Class { region, weight }),
        Cmd::Sum { spec, set, weight } => (spec, Command::Sum { set, weight }),
        Cmd::Zeta(t) => {
            opts.rho = t.rho;
            (t.spec, Command::Zeta { region: t.region, weight: t.weight })
        }
        Cmd::FubiniCheck(t) => {
            opts.rho = t.rho;
            (t.spec, Command::FubiniCheck { region: t.region, weight: t.weight })
        }
        Cmd::Family(t) => {
            opts.rho = t.rho;
            (t.spec, Command::Family { region: t.region, weight: t.weight })
        }
        Cmd::CovCheck { spec, region, weight, map, rho } => {
            opts.rho = rho;
            (spec, Command::CovCheck { region, weight: Some(weight), map })
        }
        Cmd::OracleCheck { target, p, precision, kind, delta, kappa } => {
            if let Some(k) = kappa {
                opts.kappa = Some(parse_kappa(&k)?);
            }
            let field = match kind {
                Kind::Qp => FieldKind::Qp,
                Kind::Laurent => FieldKind::Laurent,
            };
            (
                target.spec,
                Command::OracleCheck {
                    region: target.region,
                    weight: target.weight,
                    field,
                    p,
                    delta,
                    precision,
                },
            )
        }
    };
    let doc = load(&spec)?;
    let out = run(&doc, &command, &opts)?;
    Ok((render(&out, cli.json), out.exit_code()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok((text, code)) => {
            println!("{text}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
