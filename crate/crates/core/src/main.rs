use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mpgame::cli::{
    cmd_bench, cmd_brute, cmd_certify, cmd_gen_cex, cmd_gen_random, cmd_solve, load_instance, parse_tol, write_bench,
    write_table, CertificateFile, CliError, GenBackend, Mode, Options, RunReport,
};
use mpgame::entropy::ParamRequest;

#[derive(Parser)]
#[command(name = "mpgame", version, about = "Value-iteration solvers for mean-payoff and entropy games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Print the run report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for enumeration.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Strategy-pair enumeration budget.
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Output tolerance, e.g. 1e-9 or 1/1024.
    #[arg(long, global = true, default_value = "1e-9")]
    tol: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Winner,
    Value,
    Topclass,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamsArg {
    Certified,
    Theoretical,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Smpg,
    Entropy,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a game file.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        /// Separation and radius parameters for entropy games.
        #[arg(long, value_enum, default_value = "certified")]
        params: ParamsArg,
    },
    /// Re-verify certificates from a report or certificate file.
    Certify { input: PathBuf, certificates: PathBuf },
    /// Enumerate all strategy pairs.
    Brute {
        input: PathBuf,
        /// Write the per-pair table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the counterexample game for companion blocks of sizes n and n-1.
    GenCex {
        n: usize,
        w: u64,
        out: PathBuf,
        /// Compare both terms up to this horizon.
        #[arg(long)]
        flip: Option<usize>,
        /// Write the flip trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print seeded random games.
    GenRandom {
        #[arg(value_enum)]
        backend: BackendArg,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write game-<seed>.json files here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time solve on seeded random games; CSV on stdout.
    Bench {
        #[arg(value_enum)]
        backend: BackendArg,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

fn mode(m: ModeArg) -> Mode {
    match m {
        ModeArg::Winner => Mode::Winner,
        ModeArg::Value => Mode::Value,
        ModeArg::Topclass => Mode::TopClass,
        ModeArg::Full => Mode::Full,
    }
}

fn backend(b: BackendArg) -> GenBackend {
    match b {
        BackendArg::Smpg => GenBackend::Smpg,
        BackendArg::Entropy => GenBackend::Entropy,
    }
}

fn emit(report: &RunReport, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render());
    }
}

fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let command: Vec<String> = std::env::args().collect();
    let mut opts = Options { budget: cli.budget, tol: parse_tol(&cli.tol)?, ..Options::default() };
    match cli.cmd {
        Cmd::Solve { input, mode: m, params } => {
            opts.params = match params {
                ParamsArg::Certified => ParamRequest::Certified,
                ParamsArg::Theoretical => ParamRequest::Theoretical,
            };
            let inst = load_instance(&input)?;
            let (report, res) = cmd_solve(&inst, mode(m), &opts, command);
            emit(&report, cli.json);
            res
        }
        Cmd::Certify { input, certificates } => {
            let inst = load_instance(&input)?;
            let text = fs::read_to_string(&certificates).map_err(|e| io_err(&certificates, e))?;
            let file: CertificateFile =
                serde_json::from_str(&text).map_err(|e| io_err(&certificates, e))?;
            let (report, res) = cmd_certify(&inst, &file.certificates, command);
            emit(&report, cli.json);
            res
        }
        Cmd::Brute { input, csv } => {
            let inst = load_instance(&input)?;
            let (report, table) = cmd_brute(&inst, &opts, command)?;
            emit(&report, cli.json);
            if let Some(path) = csv {
                let f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
                write_table(&table, f).map_err(|e| io_err(&path, e))?;
            }
            Ok(())
        }
        Cmd::GenCex { n, w, out, flip, trace } => {
            let mut file;
            let mut stdout;
            let sink: Option<&mut dyn Write> = match (&trace, flip) {
                (_, None) => None,
                (Some(path), Some(_)) => {
                    file = fs::File::create(path).map_err(|e| io_err(path, e))?;
                    Some(&mut file)
                }
                (None, Some(_)) if cli.json => None,
                (None, Some(_)) => {
                    stdout = io::stdout();
                    Some(&mut stdout)
                }
            };
            let report = cmd_gen_cex(n, w, &out, flip, sink, &opts, command)?;
            emit(&report, cli.json);
            Ok(())
        }
        Cmd::GenRandom { backend: b, count, out } => {
            let games = cmd_gen_random(backend(b), cli.seed, count);
            match out {
                None => {
                    for g in games {
                        println!("{g}");
                    }
                }
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                    for (i, g) in games.iter().enumerate() {
                        let path = dir.join(format!("game-{}.json", cli.seed.wrapping_add(i as u64)));
                        fs::write(&path, g).map_err(|e| io_err(&path, e))?;
                    }
                }
            }
            Ok(())
        }
        Cmd::Bench { backend: b, mode: m, count } => {
            let rows = cmd_bench(backend(b), mode(m), cli.seed, count, &opts);
            write_bench(&rows, io::stdout()).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
