use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lieq::enveloping::EpsMode;
use lieq::error::Error;
use lieq::workbench::{exit_code, parse_lambda_list, run, Command, Side, StarMethod, Target};

#[derive(Parser)]
#[command(name = "lieq", version, about = "Exact workbench for deformed enveloping and reduction algebras")]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print the short text summary instead of JSON.
    #[arg(long, global = true)]
    text: bool,
    /// Include wall-clock timings (reports are then not reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct TargetArgs {
    /// Built-in algebra name or path to an algebra file.
    target: String,
    /// Subalgebra basis names, comma separated.
    #[arg(long, value_delimiter = ',')]
    subalgebra: Option<Vec<String>>,
    /// Character values, e.g. `Z=1,Y=-1/2`.
    #[arg(long)]
    lambda: Option<String>,
}

impl TargetArgs {
    fn target(&self) -> Result<Target, Error> {
        Ok(Target {
            target: self.target.clone(),
            subalgebra: self.subalgebra.clone(),
            lambda: self.lambda.as_deref().map(parse_lambda_list).transpose()?.unwrap_or_default(),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    U,
    S,
}

#[derive(Clone, Copy, ValueEnum)]
enum EpsArg {
    Symbolic,
    #[value(name = "1")]
    One,
}

impl From<EpsArg> for EpsMode {
    fn from(e: EpsArg) -> Self {
        match e {
            EpsArg::Symbolic => EpsMode::Symbolic,
            EpsArg::One => EpsMode::One,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gutt,
    Kontsevich,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate an algebra file.
    Validate { file: PathBuf },
    /// Invariants of the quotient through degree N.
    Invariants {
        #[command(flatten)]
        t: TargetArgs,
        #[arg(short = 'N')]
        n: u32,
        #[arg(long, value_enum, default_value = "u")]
        side: SideArg,
        #[arg(long, value_enum, default_value = "symbolic")]
        eps: EpsArg,
        /// Use H + eps*lambda(H) as ideal generators.
        #[arg(long)]
        lambda_eps_scaling: bool,
    },
    /// Commutativity of the truncated invariant algebra.
    Commutativity {
        #[command(flatten)]
        t: TargetArgs,
        #[arg(short = 'N')]
        n: u32,
        #[arg(long, value_enum, default_value = "symbolic")]
        eps: EpsArg,
    },
    /// Centers on the enveloping and Poisson sides, and the Duflo map.
    CentersCompare {
        #[command(flatten)]
        t: TargetArgs,
        #[arg(short = 'N')]
        n: u32,
    },
    /// Solutions of the reduction equations.
    Reduce {
        #[command(flatten)]
        t: TargetArgs,
        #[arg(short = 'N', default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        eps_order: usize,
        /// Weight table for the higher differentials; without it they are zero.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Truncated star product of two polynomials.
    Star {
        target: String,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Duflo element and operator.
    Duflo {
        target: String,
        #[arg(long)]
        truncation: u32,
    },
    /// Graph utilities.
    Graphs {
        #[command(subcommand)]
        cmd: GraphsCmd,
    },
    /// Graph weights.
    Weights {
        #[command(subcommand)]
        cmd: WeightsCmd,
    },
    /// Transfer between eps-graded solutions and t-families.
    Theorem5 {
        #[command(subcommand)]
        cmd: Theorem5Cmd,
    },
    /// Compare the T = 1 invariants with the eps = 1 reduction algebra.
    Theorem6 {
        #[command(subcommand)]
        cmd: Theorem6Cmd,
    },
}

#[derive(Subcommand)]
enum GraphsCmd {
    Enum {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'm')]
        m: usize,
        #[arg(long)]
        up_to_iso: bool,
    },
}

#[derive(Subcommand)]
enum WeightsCmd {
    Mc {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Theorem5Cmd {
    Roundtrip {
        #[command(flatten)]
        t: TargetArgs,
        #[arg(short = 'N', default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        eps_order: usize,
    },
}

#[derive(Subcommand)]
enum Theorem6Cmd {
    Check {
        #[command(flatten)]
        t: TargetArgs,
        #[arg(short = 'N')]
        n: u32,
        #[arg(long, default_value_t = 1)]
        eps_order: usize,
    },
}

fn to_command(c: Cmd) -> Result<Command, Error> {
    Ok(match c {
        Cmd::Validate { file } => Command::Validate { path: file },
        Cmd::Invariants {
            t,
            n,
            side,
            eps,
            lambda_eps_scaling,
        } => Command::Invariants {
            target: t.target()?,
            n,
            side: match side {
                SideArg::U => Side::U,
                SideArg::S => Side::S,
            },
            eps: eps.into(),
            lambda_eps_scaling,
        },
        Cmd::Commutativity { t, n, eps } => Command::Commutativity {
            target: t.target()?,
            n,
            eps: eps.into(),
        },
        Cmd::CentersCompare { t, n } => Command::CentersCompare { target: t.target()?, n },
        Cmd::Reduce { t, n, eps_order, weights } => Command::Reduce {
            target: t.target()?,
            n,
            eps_order,
            weights,
        },
        Cmd::Star {
            target,
            method,
            order,
            f,
            g,
            weights,
        } => Command::Star {
            target,
            method: match method {
                MethodArg::Gutt => StarMethod::Gutt,
                MethodArg::Kontsevich => StarMethod::Kontsevich,
            },
            order,
            f,
            g,
            weights,
        },
        Cmd::Duflo { target, truncation } => Command::Duflo { target, truncation },
        Cmd::Graphs {
            cmd: GraphsCmd::Enum { n, m, up_to_iso },
        } => Command::GraphsEnum { n, m, up_to_iso },
        Cmd::Weights {
            cmd: WeightsCmd::Mc { graph, samples, seed },
        } => Command::WeightsMc { graph, samples, seed },
        Cmd::Theorem5 {
            cmd: Theorem5Cmd::Roundtrip { t, n, eps_order },
        } => Command::Theorem5Roundtrip {
            target: t.target()?,
            n,
            eps_order,
        },
        Cmd::Theorem6 {
            cmd: Theorem6Cmd::Check { t, n, eps_order },
        } => Command::Theorem6Check {
            target: t.target()?,
            n,
            eps_order,
        },
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = to_command(cli.command).and_then(|c| run(&c, cli.timings));
    match result {
        Ok(report) => {
            let json = report.to_json_string();
            if let Some(p) = &cli.output {
                if let Err(e) = fs::write(p, &json) {
                    eprintln!("error: {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
            if cli.text {
                println!("{}", report.text);
            } else {
                print!("{json}");
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
