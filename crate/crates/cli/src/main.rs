mod commands;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use chrono::{SecondsFormat, Utc};
use clap::Parser;
use serde::Serialize;

use commands::{Artifacts, Plan};
use settings::{Cli, Settings};

const EXIT_NUMERIC: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: serde_json::Value,
    started_at: String,
    duration_seconds: f64,
    outputs: Vec<String>,
    status: &'a str,
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn invalid(error: anyhow::Error) -> Self {
        Self { code: EXIT_INVALID, error }
    }

    /// Library domain errors are parameter problems wherever they surface.
    fn classify(error: anyhow::Error) -> Self {
        let invalid = error.chain().any(|e| {
            matches!(
                e.downcast_ref::<aggregation::Error>(),
                Some(aggregation::Error::Domain { .. } | aggregation::Error::InvalidMeasure(_))
            )
        });
        Self { code: if invalid { EXIT_INVALID } else { EXIT_NUMERIC }, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let started_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let clock = Instant::now();
    let command = cli.command.name();

    let settings = Settings::resolve(cli).map_err(Failure::invalid)?;
    let plan = Plan::resolve(command, &settings).map_err(Failure::invalid)?;
    if let Some(n) = settings.threads {
        if n == 0 {
            return Err(Failure::invalid(anyhow::anyhow!("threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start the thread pool")
            .map_err(Failure::invalid)?;
    }
    let dir = settings.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    prepare_dir(&dir).map_err(Failure::invalid)?;

    let mut out = Artifacts::new(&dir);
    let result = plan.run(&mut out).map_err(Failure::classify);

    let mut config = serde_json::to_value(&plan).expect("plan serializes");
    if let serde_json::Value::Object(map) = &mut config {
        map.insert("output_dir".into(), dir.display().to_string().into());
        map.insert("seed".into(), settings.seed.unwrap_or(0).into());
        map.insert("threads".into(), settings.threads.map_or(serde_json::Value::Null, Into::into));
    }
    let status = match &result {
        Ok(()) => "complete",
        Err(f) if f.code == EXIT_INVALID => "invalid",
        Err(_) => "incomplete",
    };
    let manifest = Manifest {
        command,
        config,
        started_at,
        duration_seconds: clock.elapsed().as_secs_f64(),
        outputs: out.written.iter().map(|name| dir.join(name).display().to_string()).collect(),
        status,
        version: env!("CARGO_PKG_VERSION"),
        error: result.as_ref().err().map(|f| format!("{:#}", f.error)),
    };
    let path = dir.join("MANIFEST.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = std::fs::write(&path, text + "\n") {
        let error = anyhow::Error::new(e).context(format!("cannot write {}", path.display()));
        return Err(result.err().unwrap_or(Failure { code: EXIT_NUMERIC, error }));
    }
    result
}

fn prepare_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("output_dir {} cannot be created", dir.display()))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").with_context(|| format!("output_dir {} is not writable", dir.display()))?;
    std::fs::remove_file(&probe).ok();
    Ok(())
}
