//! Fast oracle checks run by `coopmac selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{averaged_bounds, tier_probabilities, Conditioning, Regime};
use crate::channel::{q_function, ChannelParams};
use crate::contour::tier_extremes;
use crate::geometry::{lens_area, Point2D};
use crate::monte_carlo::{estimate_throughput, ExperimentConfig};
use crate::figures::{density_sweep, sweep_table};
use crate::output::{read_csv, to_string, Format};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn channel_reference() -> Check {
    let p = ChannelParams::reference();
    let got: Vec<f64> = [48.2, 67.1, 100.0].iter().map(|&d| p.ps(d)).collect();
    let want = [0.8946, 0.7030, 0.3694];
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-4) && q_function(0.0) == 0.5;
    check("channel reference points", ok, format!("{got:.4?}"))
}

fn lens_by_counting() -> Check {
    let (r1, r2, sep) = (48.2, 48.2, 70.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200_000;
    let (a, b) = (Point2D::new(0.0, 0.0), Point2D::new(sep, 0.0));
    let hits = (0..n)
        .filter(|_| {
            let p = Point2D::new(rng.random_range(-50.0..120.0), rng.random_range(-50.0..50.0));
            p.distance(&a) < r1 && p.distance(&b) < r2
        })
        .count();
    let mc = hits as f64 / n as f64 * 170.0 * 100.0;
    let exact = lens_area(r1, r2, sep);
    check("lens area by point counting", (mc / exact - 1.0).abs() < 0.02, format!("{mc:.1} vs {exact:.1}"))
}

fn tier_probabilities_sum() -> Check {
    let mut worst: f64 = 0.0;
    for (regime, r) in [(Regime::C, 70.0), (Regime::D1, 85.0), (Regime::D2, 98.0)] {
        for c in [Conditioning::Ppp { density: 0.003 }, Conditioning::KNearest { k: 12, density: 0.003 }] {
            let v = tier_probabilities(regime, r, c).expect("valid inputs");
            worst = worst.max((v.tiers.iter().sum::<f64>() + v.residual - 1.0).abs());
        }
    }
    check("tier probabilities sum to one", worst < 1e-12, format!("max deviation {worst:.2e}"))
}

fn tier1_peak(p: &ChannelParams) -> Check {
    let e = tier_extremes(Regime::C, 1, 70.0, 0.5, p).expect("tier 1 exists at 70 m");
    check(
        "tier-1 peak at the link midpoint",
        e.argmax.x == 0.0 && e.argmax.y == 0.0,
        format!("argmax ({}, {})", e.argmax.x, e.argmax.y),
    )
}

fn bracketing(p: &ChannelParams) -> Check {
    let cfg = ExperimentConfig {
        densities: vec![0.005],
        regimes: vec![Regime::C],
        trials: 20_000,
        seed: 9,
        channel: *p,
        ..Default::default()
    };
    let est = estimate_throughput(&cfg).expect("valid config");
    let b = averaged_bounds(Regime::C, Conditioning::Ppp { density: 0.005 }, p).expect("valid regime");
    let e = &est[0];
    check(
        "proposed estimate within bounds",
        b.contains(e.mean, 3.0 * e.stderr),
        format!("{:.4} in [{:.4}, {:.4}]", e.mean, b.lower, b.upper),
    )
}

fn determinism_and_round_trip(p: &ChannelParams) -> Vec<Check> {
    let mut cfg = ExperimentConfig {
        densities: vec![0.002],
        regimes: vec![Regime::D1],
        trials: 4000,
        seed: 3,
        channel: *p,
        workers: Some(1),
        ..Default::default()
    };
    let a = sweep_table(&density_sweep(&cfg).expect("valid config"), false);
    cfg.workers = Some(2);
    let b = sweep_table(&density_sweep(&cfg).expect("valid config"), false);
    let (sa, sb) = (to_string(&a, Format::Csv).unwrap(), to_string(&b, Format::Csv).unwrap());
    let back = read_csv(sa.as_bytes(), &a.columns).map(|d| to_string(&d, Format::Csv).unwrap());
    vec![
        check("identical output across worker counts", sa == sb, String::new()),
        check("CSV round trip", back.as_deref().ok() == Some(sa.as_str()), String::new()),
    ]
}

pub fn run_selftest(params: &ChannelParams) -> Vec<Check> {
    let mut out = vec![
        channel_reference(),
        lens_by_counting(),
        tier_probabilities_sum(),
        tier1_peak(params),
        bracketing(params),
    ];
    out.extend(determinism_and_round_trip(params));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_with_default_channel() {
        for c in run_selftest(&ChannelParams::reference()) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
