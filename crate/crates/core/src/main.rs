use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kzbraid::cli::{exit_code, parse_algebra, run, write_atomic, Command, RunConfig};

#[derive(Parser)]
#[command(name = "kz-braid-lab", version, about = "KZ holonomy vs R-matrix braid representations, with residual reports")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Holonomy of a braid word along the standard configuration.
    Monodromy,
    /// R-matrix, braided Yang-Baxter and Temperley-Lieb-Jones residuals.
    Rmatrix,
    /// Curvature of the connection at seeded random configurations.
    Flatness,
    /// Projective comparison of holonomy and R-matrix generators.
    Compare,
    /// Poisson brackets of currents on a seeded random loop.
    LoopBrackets,
    /// Contour residues of the Gauss-constraint connection.
    GaussResidue,
    /// Every acceptance sweep.
    AllChecks,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true, default_value = "su2")]
    algebra: String,
    #[arg(long, global = true, default_value_t = 2)]
    level: u32,
    #[arg(long, global = true, default_value_t = 2)]
    strands: usize,
    #[arg(long, global = true, default_value = "s1")]
    word: String,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 256)]
    grid: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn command(sub: Sub) -> Command {
    match sub {
        Sub::Monodromy => Command::Monodromy,
        Sub::Rmatrix => Command::Rmatrix,
        Sub::Flatness => Command::Flatness,
        Sub::Compare => Command::Compare,
        Sub::LoopBrackets => Command::LoopBrackets,
        Sub::GaussResidue => Command::GaussResidue,
        Sub::AllChecks => Command::AllChecks,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let rank = match parse_algebra(&cli.opts.algebra) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let o = cli.opts;
    let cfg = RunConfig { rank, level: o.level, strands: o.strands, word: o.word, tol: o.tol, grid: o.grid, seed: o.seed, out: o.out };
    let result = run(command(cli.command), &cfg);
    let code = exit_code(&result);
    match result {
        Err(e) => eprintln!("error: {e}"),
        Ok(report) => {
            for (table, r) in report.failures() {
                eprintln!("residual out of bound: {table} / {}: {:e} > {:e}", r.name, r.value, r.bound.unwrap_or(f64::NAN));
            }
            let json = report.to_json() + "\n";
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = write_atomic(path, json.as_bytes()) {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => print!("{json}"),
            }
        }
    }
    ExitCode::from(code as u8)
}
