use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};

use twoslit_cli::config::{read_config_file, KEYS};
use twoslit_cli::{simulate, validate, write_outputs, CliError, Preset, SimulationConfig};

fn command() -> Command {
    let mut cmd = Command::new("twoslit")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Two-slit density-matrix dynamics under quantum Brownian motion")
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("flat key=value config file, applied after the preset"),
        )
        .arg(
            Arg::new("validate-only")
                .long("validate-only")
                .action(ArgAction::SetTrue)
                .help("print the validation report and exit"),
        );
    for (key, help) in KEYS {
        cmd = cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").help(*help));
    }
    cmd
}

fn run() -> Result<(), CliError> {
    let matches = command().get_matches();
    let file = match matches.get_one::<String>("config") {
        Some(path) => read_config_file(&PathBuf::from(path))?,
        None => Vec::new(),
    };
    let flags: Vec<(String, String)> = KEYS
        .iter()
        .filter_map(|(k, _)| {
            matches
                .get_one::<String>(k)
                .map(|v| (k.to_string(), v.clone()))
        })
        .collect();
    let cfg = SimulationConfig::resolve(Preset::Fig1, [file.as_slice(), flags.as_slice()])?;

    if matches.get_flag("validate-only") {
        let report = validate(&cfg);
        let json = serde_json::json!({
            "preset": cfg.preset.name(),
            "ok": report.is_ok(),
            "violations": report.violations,
            "warnings": report.warnings,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&json).expect("report serialises")
        );
        return if report.is_ok() {
            Ok(())
        } else {
            Err(CliError::Invalid(report.violations))
        };
    }

    let outcome = simulate(&cfg)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let files = write_outputs(&outcome, &cfg.out)?;
    for f in &files {
        println!("{}", f.display());
    }
    match outcome.abort {
        Some(reason) => Err(CliError::Aborted(reason)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
