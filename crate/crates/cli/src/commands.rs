use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};
use toeplitz_lab::output::{to_canonical_json, to_value};
use toeplitz_lab::proofcheck::run_suites;
use toeplitz_lab::rates::run_rate_experiment_with;
use toeplitz_lab::{exponents, limit_integral, CoeffCache, ProductChain, RateExperiment};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{flatten, pass_flags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Coeffs,
    Trace,
    Limit,
    Rate,
    Verify,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Trace => "trace",
            Command::Limit => "limit",
            Command::Rate => "rate",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

/// Files written by a command and the verdict over its `pass` flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub all_pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
    flags: Vec<bool>,
}

impl Writer<'_> {
    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let v = to_value(value)?;
        self.flags.extend(pass_flags(&v));
        self.text(name, &to_canonical_json(&v)?)
    }
}

/// Runs `command` and writes its artifacts into `out`, which is created if
/// missing.
pub fn dispatch(cfg: &ExperimentConfig, command: Command, out: &Path) -> Result<Outcome, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut w = Writer {
        dir: out,
        files: Vec::new(),
        flags: Vec::new(),
    };
    let mut cache = CoeffCache::new();
    match command {
        Command::Coeffs => {
            let pairs = cfg.require_pairs()?;
            let max_lag = match (cfg.max_lag, cfg.n) {
                (Some(m), _) => m,
                (None, Some(n)) => n - 1,
                (None, None) => return Err(CliError::validation("max_lag", "give max_lag or n")),
            };
            for (j, (g, h)) in pairs.pairs().iter().enumerate() {
                let body = cache.table(g, max_lag, &cfg.quad)?.to_csv();
                w.text(&format!("coeffs_g{}.csv", j + 1), &body)?;
                let body = cache.table(h, max_lag, &cfg.quad)?.to_csv();
                w.text(&format!("coeffs_h{}.csv", j + 1), &body)?;
            }
        }
        Command::Trace => {
            let pairs = cfg.require_pairs()?;
            let n = cfg
                .n
                .ok_or_else(|| CliError::validation("n", "trace needs n"))?;
            let chain = ProductChain::from_cache(pairs, n, &cfg.quad, &mut cache)?;
            w.json("trace.json", &cfg.method.trace(&chain)?)?;
        }
        Command::Limit => {
            let pairs = cfg.require_pairs()?;
            let e = exponents(pairs);
            let limit = limit_integral(pairs, &cfg.quad)?;
            w.json(
                "limit.json",
                &json!({"I": limit, "psi": e.psi, "psi_bar": e.psi_bar}),
            )?;
        }
        Command::Rate => {
            let pairs = cfg.require_pairs()?.clone();
            let n_grid = cfg
                .n_grid
                .clone()
                .ok_or_else(|| CliError::validation("n_grid", "rate needs n_grid"))?;
            let exp = RateExperiment {
                pairs,
                n_grid,
                method: cfg.method,
                epsilon: cfg.epsilon,
                margin: cfg.margin,
                quad: cfg.quad,
            };
            exp.validate()
                .map_err(|e| CliError::validation("n_grid", e))?;
            let report = run_rate_experiment_with(&exp, &mut cache)?;
            w.json("rate_report.json", &report)?;
            w.text("rate_errors.csv", &report.errors_csv())?;
        }
        Command::Verify => {
            let records = run_suites(&cfg.verify)?;
            let pass = records.iter().all(|r| r.pass);
            w.json("verify.json", &json!({"checks": records, "pass": pass}))?;
        }
        Command::Report => {
            if cfg.report_inputs.is_empty() {
                return Err(CliError::validation(
                    "report.inputs",
                    "no input files listed",
                ));
            }
            let mut csv = csv::Writer::from_writer(Vec::new());
            let mut flags = Vec::new();
            csv.write_record(["source", "path", "value"])
                .map_err(|e| CliError::io(out, e))?;
            for input in &cfg.report_inputs {
                let text = fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
                    message: format!("{}: {e}", input.display()),
                    line: e.line(),
                    column: e.column(),
                })?;
                flags.extend(pass_flags(&v));
                let source = input.file_name().map_or_else(
                    || input.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                );
                for leaf in flatten(&v) {
                    csv.write_record([source.as_str(), &leaf.path, &leaf.value])
                        .map_err(|e| CliError::io(out, e))?;
                }
            }
            let bytes = csv.into_inner().map_err(|e| CliError::io(out, e.error()))?;
            w.text("report.csv", &String::from_utf8_lossy(&bytes))?;
            w.flags.extend(flags);
        }
    }
    Ok(Outcome {
        all_pass: w.flags.iter().all(|&b| b),
        files: w.files,
    })
}

/// Run metadata kept out of the result files so those stay byte-stable.
pub fn write_metadata(
    out: &Path,
    command: Command,
    config_path: &Path,
    seed: Option<u64>,
    unix_time: u64,
) -> Result<PathBuf, CliError> {
    let path = out.join("metadata.json");
    let body = json!({
        "command": command.name(),
        "config": config_path.display().to_string(),
        "seed": seed,
        "unix_time": unix_time,
        "version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(&path, to_canonical_json(&body)?).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn error_json(err: &CliError) -> String {
    to_canonical_json(&err.to_json())
        .unwrap_or_else(|_| format!("{{\"error\": {{\"message\": {:?}}}}}\n", err.to_string()))
}

/// Writes `error.json` into `out` when possible and returns its body.
pub fn write_error(out: &Path, err: &CliError) -> String {
    let body = error_json(err);
    if fs::create_dir_all(out).is_ok() {
        let _ = fs::write(out.join("error.json"), &body);
    }
    body
}
