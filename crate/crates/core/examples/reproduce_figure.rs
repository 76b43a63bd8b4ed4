// The Type D density sweep as a stamped CSV on stdout.
//
// `cargo run --release --example reproduce_figure -- fig7 200000` runs another
// figure at a chosen trial count.

use coopmac::output::write_csv;
use coopmac::{reproduce_figure, ContourOptions, ExperimentConfig, FigureId};

pub fn run_example_with(figure: &str, trials: u64) -> coopmac::Result<()> {
    let id: FigureId = figure.parse()?;
    let cfg = ExperimentConfig {
        trials,
        seed: 7,
        ..Default::default()
    };
    let mut data = reproduce_figure(id, &cfg, &ContourOptions::default())?;
    data.stamp(cfg.seed, "example");
    write_csv(&data, std::io::stdout().lock())
}

pub fn run_example() -> coopmac::Result<()> {
    run_example_with("fig9", 2_000)
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    let mut args = std::env::args().skip(1);
    let figure = args.next().unwrap_or_else(|| "fig9".into());
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    run_example_with(&figure, trials)
}
