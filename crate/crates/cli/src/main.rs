use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use isp_cli::{
    cmd_jc, cmd_purify, cmd_rewrite, cmd_tables, cmd_timing, cmd_verify, read_input, write_or_return, CliError,
    CliResult, PresetSource, PurifyConfig, VerifyConfig, EXIT_OK, EXIT_USAGE, PRESET_DIR_ENV,
};
use iswap_purify::bell::TableKind;
use iswap_purify::rewrite::Direction;

#[derive(Parser)]
#[command(name = "iswap-purify", version, about = "Entanglement purification with iSWAP-native gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Forward,
    Reversed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Rotations,
    Replacement,
    Bennett,
}

#[derive(Subcommand)]
enum Command {
    /// Check gate identities, Bell tables, Bell recipes and rewrites
    Verify {
        /// Override every check tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Directory holding table1.txt..table3.txt expectations
        #[arg(long)]
        tables_dir: Option<PathBuf>,
    },
    /// Iterate purification rounds over a grid of F0 and eps values
    Purify {
        #[arg(long, value_delimiter = ',', default_value = "0.7")]
        f0: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        #[arg(long, default_value_t = 50)]
        max_rounds: usize,
        /// CSV output path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace BCNOTs by BiSWAPs and report gate counts
    Rewrite {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the JSON gate-count report (stderr if omitted)
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "forward")]
        direction: Dir,
    },
    /// Gate and protocol times for a hardware preset
    Timing {
        #[arg(long, conflicts_with = "preset_file", required_unless_present = "preset_file")]
        preset: Option<String>,
        #[arg(long)]
        preset_file: Option<PathBuf>,
        /// Print JSON instead of the text table
        #[arg(long)]
        json: bool,
    },
    /// Regenerate the Bell-basis tables
    Tables {
        #[arg(long, value_enum)]
        which: Option<Which>,
        /// Directory to write table files into
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective exchange coupling from cavity parameters
    Jc {
        /// JSON file with omega, omega_q1, omega_q2, chi1, chi2, fock_cutoff (rad/s)
        #[arg(long)]
        params: PathBuf,
        /// Also integrate the full model and compare frequencies
        #[arg(long)]
        validate: bool,
    },
}

fn emit(text: Option<String>) {
    if let Some(t) = text {
        print!("{t}");
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Verify { tol, tables_dir } => {
            let report = cmd_verify(&VerifyConfig { tol, tables_dir })?;
            print!("{}", report.to_text());
            Ok(report.exit_code())
        }
        Command::Purify { f0, eps, target, max_rounds, out } => {
            let res = cmd_purify(&PurifyConfig { f0, eps, target, max_rounds })?;
            emit(write_or_return(out.as_deref(), &res.csv)?);
            eprint!("{}", res.summary());
            Ok(EXIT_OK)
        }
        Command::Rewrite { input, out, report, direction } => {
            let dir = match direction {
                Dir::Forward => Direction::Forward,
                Dir::Reversed => Direction::Reversed,
            };
            let res = cmd_rewrite(&read_input(&input)?, dir)?;
            emit(write_or_return(out.as_deref(), &res.circuit)?);
            if let Some(rep) = res.report {
                let json = rep.to_json() + "\n";
                match report {
                    Some(p) => {
                        write_or_return(Some(&p), &json)?;
                    }
                    None => eprint!("{json}"),
                }
            }
            Ok(EXIT_OK)
        }
        Command::Timing { preset, preset_file, json } => {
            let src = match (preset, preset_file) {
                (_, Some(p)) => PresetSource::File(p),
                (Some(n), None) => PresetSource::Name(n),
                (None, None) => return Err(CliError::Usage("give --preset or --preset-file".into())),
            };
            let dir = std::env::var_os(PRESET_DIR_ENV).map(PathBuf::from);
            let res = cmd_timing(&src, dir.as_deref())?;
            if json {
                println!("{}", res.json);
            } else {
                print!("{}", res.table);
            }
            Ok(EXIT_OK)
        }
        Command::Tables { which, out } => {
            let kind = which.map(|w| match w {
                Which::Rotations => TableKind::Rotations,
                Which::Replacement => TableKind::DeutschReplacement,
                Which::Bennett => TableKind::Bennett,
            });
            let text = cmd_tables(kind, out.as_deref())?;
            if out.is_none() {
                print!("{text}");
            }
            Ok(EXIT_OK)
        }
        Command::Jc { params, validate } => {
            print!("{}", cmd_jc(&read_input(&params)?, validate)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
