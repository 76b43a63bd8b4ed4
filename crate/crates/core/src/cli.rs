//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime failure.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use crate::config::{apply_str, RunConfig};
use crate::contour::{contour_grid, default_contour_distance};
use crate::error::Error;
use crate::figures::{bounds_table, contour_table, estimates_table, reproduce_figure, FigureId};
use crate::monte_carlo::estimate_throughput;
use crate::output::{write_dataset, Dataset};
use crate::selftest::run_selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "coopmac", version, about = "Cooperative MAC throughput bounds and Monte-Carlo simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Averaged lower and upper bounds per link class and density.
    Bounds,
    /// Monte-Carlo throughput estimates.
    Simulate,
    /// Per-position throughput around one link.
    Contour {
        /// Link length in metres; the class midpoint by default.
        #[arg(long = "r-k")]
        r_k: Option<f64>,
        /// Grid step in metres.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Dataset behind one evaluation figure.
    Reproduce {
        /// fig7, fig9, fig10, contour_c, contour_d1 or contour_d2.
        figure: String,
    },
    /// Fast oracle checks; exits non-zero if any fails.
    Selftest,
}

#[derive(Debug, Args)]
pub struct Common {
    /// A, B, C, D, D1, D2 or all (comma-separated).
    #[arg(long, global = true)]
    pub class: Option<String>,
    /// proposed, conventional or both.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// Comma-separated densities in nodes/m².
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// analytic or sampled.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// ppp or k=<int>.
    #[arg(long, global = true)]
    pub conditioning: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Flat key = value file applied before the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        for (k, val) in [
            ("class", &self.class),
            ("scheme", &self.scheme),
            ("lambda", &self.lambda),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("mode", &self.mode),
            ("conditioning", &self.conditioning),
            ("format", &self.format),
            ("workers", &self.workers),
        ] {
            if let Some(s) = val {
                v.push((k, s.clone()));
            }
        }
        if let Some(p) = &self.out {
            v.push(("out", p.display().to_string()));
        }
        v
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.common.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        apply_str(&mut cfg, &text)?;
    }
    for (k, v) in cli.common.overrides() {
        cfg.set(k, &v).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("--{m}")),
            other => Error::Config(other.to_string()),
        })?;
    }
    if let Command::Contour { r_k, resolution } = &cli.command {
        if let Some(r) = r_k {
            cfg.contour.r_k = Some(*r);
        }
        if let Some(r) = resolution {
            cfg.contour.resolution = *r;
        }
    }
    cfg.finish()
}

fn emit(data: &mut Dataset, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), Error> {
    data.stamp(cfg.experiment.seed, &cfg.hash());
    match &cfg.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_dataset(data, cfg.format, std::io::BufWriter::new(file))
        }
        None => write_dataset(data, cfg.format, stdout),
    }
}

/// Runs one command line. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match dispatch(&cli.command, &cfg, stdout) {
        Ok(code) => code,
        Err(e @ (Error::UnknownFigure { .. } | Error::InvalidParameter { .. })) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: &Command, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, Error> {
    let exp = &cfg.experiment;
    let mut data = match command {
        Command::Bounds => bounds_table(&exp.regimes, &exp.densities, exp.conditioning, &exp.channel)?,
        Command::Simulate => estimates_table(&estimate_throughput(exp)?),
        Command::Contour { .. } => {
            let [regime] = exp.regimes[..] else {
                return Err(Error::invalid("class", "contour needs exactly one of C, D1, D2"));
            };
            let r_k = cfg.contour.r_k.unwrap_or_else(|| default_contour_distance(regime));
            contour_table(&contour_grid(regime, r_k, cfg.contour.resolution, &exp.channel)?)
        }
        Command::Reproduce { figure } => reproduce_figure(figure.parse::<FigureId>()?, exp, &cfg.contour)?,
        Command::Selftest => {
            let checks = run_selftest(&exp.channel);
            let mut all = true;
            for c in &checks {
                all &= c.passed;
                writeln!(stdout, "{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            return Ok(if all { EXIT_OK } else { EXIT_RUNTIME });
        }
    };
    emit(&mut data, cfg, stdout)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["coopmac"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bounds_single_cell() {
        let (code, out, _) = run_capture(&["bounds", "--class", "C", "--lambda", "0.005"]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("regime,lambda,conditioning,lower,upper,seed,config_hash"));
        assert!(lines[1].starts_with("C,0.005,ppp,"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["reproduce", "fig8"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bounds", "--lambda", "abc"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["contour", "--class", "D"]).0, EXIT_USAGE);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("reproduce"));
        let missing = std::env::temp_dir().join("coopmac-no-such-dir").join("x.csv");
        let (code, _, _) = run_capture(&["bounds", "--out", missing.to_str().unwrap()]);
        assert_eq!(code, EXIT_RUNTIME);
    }
}
