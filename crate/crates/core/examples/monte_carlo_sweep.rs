// Monte-Carlo estimates for both schemes next to the analytic bounds.

use coopmac::figures::density_sweep;
use coopmac::{ExperimentConfig, Regime};

pub fn run_example() -> coopmac::Result<()> {
    let trials = std::env::var("COOPMAC_TRIALS").ok().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let cfg = ExperimentConfig {
        densities: vec![0.0005, 0.0025, 0.005],
        regimes: vec![Regime::C, Regime::D2],
        trials,
        seed: 2024,
        ..Default::default()
    };
    for pt in density_sweep(&cfg)? {
        println!(
            "{} lambda {:<7} lower {:.3}  proposed {:.3} ± {:.3}  conventional {:.3} ± {:.3}  upper {:.3}",
            pt.regime.unwrap(),
            pt.density,
            pt.bounds.lower,
            pt.proposed.mean,
            pt.proposed.stderr,
            pt.conventional.mean,
            pt.conventional.stderr,
            pt.bounds.upper
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
