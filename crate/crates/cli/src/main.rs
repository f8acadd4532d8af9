mod args;
mod cache;
mod commands;
mod config;
mod error;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outputs;
use error::{CliError, Result};
use manifest::{now_ms, OutputDigest, RunManifest, VERSION};

/// Parses `args` (program name first) after applying the config file.
fn parse(args: &[String], config_text: Option<&str>) -> std::result::Result<Cli, clap::Error> {
    let args = match config_text {
        Some(text) => match config::apply(args, text) {
            Ok(a) => a,
            Err(e) => return Err(clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n"))),
        },
        None => args.to_vec(),
    };
    Cli::try_parse_from(args)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

fn write_outputs(out: Option<&Path>, outputs: &Outputs, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (name, content) in &outputs.files {
                fs::write(dir.join(name), content)?;
            }
            fs::write(dir.join("manifest.json"), json + "\n")?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for (_, content) in &outputs.files {
                stdout.write_all(content.as_bytes())?;
            }
            eprintln!("{json}");
        }
    }
    Ok(())
}

fn run_command(cli: &Cli, raw: &[String], config_text: Option<String>) -> Result<()> {
    let pool = thread_pool(cli.threads)?;
    let started = now_ms();
    let outputs = pool.install(|| commands::execute(&cli.command, cli.curves.as_deref()))?;
    let manifest = RunManifest {
        version: VERSION.into(),
        command_line: raw[1..].to_vec(),
        config_snapshot: config_text,
        curve: outputs.curve.clone(),
        engine: outputs.engine.clone(),
        t: outputs.t,
        seed: outputs.seed,
        threads: pool.current_num_threads(),
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        outputs: outputs.files.iter().map(|(name, content)| OutputDigest::of(name, content)).collect(),
        notes: outputs.notes.clone(),
    };
    write_outputs(cli.out.as_deref(), &outputs, &manifest)?;
    match outputs.insufficient {
        Some(reason) => Err(CliError::Insufficient(reason)),
        None => Ok(()),
    }
}

/// Reruns a manifest's command and compares digests; `--threads` and `--out`
/// of the replay invocation replace the recorded ones.
fn replay(cli: &Cli, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let recorded: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))?;
    let mut raw = vec!["rmtwist".to_string()];
    raw.extend(recorded.command_line.iter().cloned());
    let original = parse(&raw, recorded.config_snapshot.as_deref()).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(original.command, Command::Replay(_)) {
        return Err(CliError::Usage("manifest records a replay".into()));
    }
    let pool = thread_pool(cli.threads)?;
    let outputs = pool.install(|| commands::execute(&original.command, original.curves.as_deref()))?;
    let digests: Vec<OutputDigest> = outputs.files.iter().map(|(n, c)| OutputDigest::of(n, c)).collect();
    if let Some(dir) = cli.out.as_deref() {
        fs::create_dir_all(dir)?;
        for (name, content) in &outputs.files {
            fs::write(dir.join(name), content)?;
        }
    }
    if digests != recorded.outputs {
        for (new, old) in digests.iter().zip(&recorded.outputs) {
            if new != old {
                eprintln!("mismatch {}: {} != {}", new.file, new.sha256, old.sha256);
            }
        }
        return Err(CliError::Numerical("replayed outputs differ from the manifest".into()));
    }
    println!("replay ok: {} file(s) match", digests.len());
    Ok(())
}

fn main() -> ExitCode {
    let raw: Vec<String> = match std::env::args_os().map(|a| a.into_string()).collect() {
        Ok(a) => a,
        Err(_) => {
            eprintln!("usage error: arguments must be valid UTF-8");
            return ExitCode::from(2);
        }
    };
    let config_text = match config::config_path(&raw) {
        Some(path) => match fs::read_to_string(&path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("usage error: config {path}: {e}");
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let cli = match parse(&raw, config_text.as_deref()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Replay(a) => replay(&cli, &a.manifest),
        _ => run_command(&cli, &raw, config_text),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
