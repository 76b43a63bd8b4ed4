//! Seeded, parallel Monte-Carlo estimation of the average link throughput.
//!
//! Every trial owns three ChaCha streams derived from `(seed, density, regime,
//! trial)`: one for the node field and link geometry, one for the conventional
//! scheme's random choice, and one for sampled exchanges. Trials are grouped in
//! fixed-size batches, batches run on a rayon pool and are merged in batch
//! order, so the result does not depend on the number of workers.
//!
//! Only the part of the field that can host a helper is drawn: the disc of
//! radius 74.7 m around the destination (100 m for k-th neighbour placement),
//! clipped to the observation window. Restricting a Poisson field to a
//! subregion is again a Poisson field, so this is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::bounds::{ConditioningKind, Regime};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::protocol::{
    best_helper_proposed, candidate_for, run_exchange, select_helper_conventional, select_helper_proposed,
    ExchangeMode, HelperCandidate, LinkClass, C_MAX,
};

pub const DEFAULT_WINDOW_HALF_WIDTH: f64 = 200.0;
pub const DEFAULT_TRIALS: u64 = 200_000;
pub const FULL_REPRODUCTION_TRIALS: u64 = 2_000_000;
const BATCH: u64 = 2048;

/// The ten densities of the evaluation sweep, 0.0005 to 0.005 nodes/m².
pub fn density_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.0005).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    Proposed,
    Conventional,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Proposed => "proposed",
            Scheme::Conventional => "conventional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeSelection {
    Proposed,
    Conventional,
    Both,
}

impl SchemeSelection {
    pub fn schemes(self) -> &'static [Scheme] {
        match self {
            SchemeSelection::Proposed => &[Scheme::Proposed],
            SchemeSelection::Conventional => &[Scheme::Conventional],
            SchemeSelection::Both => &[Scheme::Proposed, Scheme::Conventional],
        }
    }
}

impl FromStr for SchemeSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(SchemeSelection::Proposed),
            "conventional" => Ok(SchemeSelection::Conventional),
            "both" => Ok(SchemeSelection::Both),
            other => Err(Error::invalid("scheme", format!("expected proposed, conventional or both, got `{other}`"))),
        }
    }
}

impl fmt::Display for SchemeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeSelection::Proposed => "proposed",
            SchemeSelection::Conventional => "conventional",
            SchemeSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub densities: Vec<f64>,
    pub scheme: SchemeSelection,
    pub regimes: Vec<Regime>,
    pub trials: u64,
    pub mode: ExchangeMode,
    pub seed: u64,
    pub channel: ChannelParams,
    /// `Ppp`: source at a uniform-area distance in the regime's annulus.
    /// `KNearest`: source is the k-th nearest node of the destination.
    pub conditioning: ConditioningKind,
    pub window_half_width: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            densities: density_grid(),
            scheme: SchemeSelection::Both,
            regimes: vec![Regime::C],
            trials: DEFAULT_TRIALS,
            mode: ExchangeMode::Analytic,
            seed: 1,
            channel: ChannelParams::reference(),
            conditioning: ConditioningKind::Ppp,
            window_half_width: DEFAULT_WINDOW_HALF_WIDTH,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::invalid("trials", format!("need at least 2 trials, got {}", self.trials)));
        }
        if self.densities.is_empty() {
            return Err(Error::invalid("lambda", "density grid is empty"));
        }
        if let Some(d) = self.densities.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::invalid("lambda", format!("densities must be > 0, got {d}")));
        }
        if self.regimes.is_empty() {
            return Err(Error::invalid("class", "no regime selected"));
        }
        if !(self.window_half_width > 0.0 && self.window_half_width.is_finite()) {
            return Err(Error::invalid("window_half_width", format!("must be > 0, got {}", self.window_half_width)));
        }
        if let ConditioningKind::KNearest { k: 0 } = self.conditioning {
            return Err(Error::invalid("conditioning", "k must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub density: f64,
    pub scheme: Scheme,
    pub regime: Regime,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Count, mean and centred second moment; merged with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        self.n = n;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed for one stream of one trial.
pub fn trial_seed(seed: u64, density: f64, regime: Regime, trial: u64, stream: u64) -> u64 {
    [density.to_bits(), regime as u64, trial, stream]
        .iter()
        .fold(splitmix(seed), |h, &x| splitmix(h ^ x))
}

/// Per-trial throughput of both schemes on one shared realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub proposed: f64,
    pub conventional: f64,
}

struct Cell<'a> {
    config: &'a ExperimentConfig,
    density: f64,
    regime: Regime,
    poisson: Option<Poisson<f64>>,
    box_half: f64,
}

impl<'a> Cell<'a> {
    fn new(config: &'a ExperimentConfig, density: f64, regime: Regime) -> Result<Self> {
        let reach = match config.conditioning {
            ConditioningKind::Ppp => C_MAX,
            ConditioningKind::KNearest { .. } => LinkClass::MAX_RANGE,
        };
        let box_half = reach.min(config.window_half_width);
        let needs_field = regime.is_cooperative() || matches!(config.conditioning, ConditioningKind::KNearest { .. });
        let poisson = if needs_field {
            let mean = density * (2.0 * box_half).powi(2);
            Some(Poisson::new(mean).map_err(|e| Error::invalid("lambda", e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            config,
            density,
            regime,
            poisson,
            box_half,
        })
    }

    fn rng(&self, trial: u64, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(trial_seed(self.config.seed, self.density, self.regime, trial, stream))
    }

    fn fill_field(&self, rng: &mut ChaCha8Rng, nodes: &mut Vec<Point2D>) {
        nodes.clear();
        if let Some(p) = &self.poisson {
            let count = p.sample(rng) as usize;
            let h = self.box_half;
            nodes.extend((0..count).map(|_| {
                Point2D::new(rng.random_range(-h..h), rng.random_range(-h..h))
            }));
        }
    }

    fn trial(&self, trial: u64, nodes: &mut Vec<Point2D>, cands: &mut Vec<HelperCandidate>) -> TrialOutcome {
        let params = &self.config.channel;
        let dest = Point2D::new(0.0, 0.0);
        let mut rng = self.rng(trial, 0);
        self.fill_field(&mut rng, nodes);

        let source = match self.config.conditioning {
            ConditioningKind::Ppp => {
                let (lo, hi) = self.regime.range();
                let r = (lo * lo + rng.random::<f64>() * (hi * hi - lo * lo)).sqrt();
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                Point2D::new(r * theta.cos(), r * theta.sin())
            }
            ConditioningKind::KNearest { k } => {
                let k = k as usize;
                if nodes.len() < k {
                    return TrialOutcome { proposed: 0.0, conventional: 0.0 };
                }
                nodes.select_nth_unstable_by(k - 1, |a, b| {
                    a.distance(&dest).total_cmp(&b.distance(&dest))
                });
                let s = nodes[k - 1];
                // only the k-1 nearer nodes may help
                nodes.truncate(k - 1);
                s
            }
        };
        let r = source.distance(&dest);
        if r <= 0.0 || !self.regime.accepts(r) || Regime::of_distance(r).is_none() {
            return TrialOutcome { proposed: 0.0, conventional: 0.0 };
        }
        let class = self.regime.link_class();

        cands.clear();
        if class.supports_cooperation() {
            cands.extend(
                nodes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| candidate_for(i, *p, source, dest, class, params)),
            );
        }

        match self.config.mode {
            ExchangeMode::Analytic => {
                let direct = class.direct_rate() * params.ps(r);
                let proposed = best_helper_proposed(cands).map_or(direct, |h| h.rate * h.g_score);
                let conventional = if cands.is_empty() {
                    direct
                } else {
                    let mut crng = self.rng(trial, 1);
                    let h = &cands[crng.random_range(0..cands.len())];
                    h.rate * h.g_score
                };
                TrialOutcome { proposed, conventional }
            }
            mode @ ExchangeMode::Sampled { .. } => {
                let mut crng = self.rng(trial, 1);
                let conv_order = select_helper_conventional(cands, &mut crng);
                let prop_order = select_helper_proposed(cands);
                // both exchanges see the same shadowing draws
                let mut x = self.rng(trial, 2);
                let proposed = run_exchange(&prop_order, r, params, mode, &mut x)
                    .map_or(0.0, |o| o.throughput);
                let mut x = self.rng(trial, 2);
                let conventional = run_exchange(&conv_order, r, params, mode, &mut x)
                    .map_or(0.0, |o| o.throughput);
                TrialOutcome { proposed, conventional }
            }
        }
    }

    fn run(&self, pool: Option<&rayon::ThreadPool>) -> [Moments; 2] {
        let trials = self.config.trials;
        let batches = trials.div_ceil(BATCH);
        let work = || {
            (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut nodes = Vec::new();
                    let mut cands = Vec::new();
                    let mut m = [Moments::default(); 2];
                    for t in b * BATCH..((b + 1) * BATCH).min(trials) {
                        let o = self.trial(t, &mut nodes, &mut cands);
                        m[0].push(o.proposed);
                        m[1].push(o.conventional);
                    }
                    m
                })
                .collect::<Vec<_>>()
        };
        let parts = match pool {
            Some(p) => p.install(work),
            None => work(),
        };
        let mut total = [Moments::default(); 2];
        for m in &parts {
            total[0].merge(&m[0]);
            total[1].merge(&m[1]);
        }
        total
    }
}

/// Throughput of both schemes in trial `trial` of the `(density, regime)` cell.
pub fn simulate_trial(config: &ExperimentConfig, density: f64, regime: Regime, trial: u64) -> Result<TrialOutcome> {
    config.validate()?;
    let cell = Cell::new(config, density, regime)?;
    Ok(cell.trial(trial, &mut Vec::new(), &mut Vec::new()))
}

/// One estimate per `(density, scheme, regime)` in density-major order.
pub fn estimate_throughput(config: &ExperimentConfig) -> Result<Vec<SimEstimate>> {
    config.validate()?;
    let pool = match config.workers {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("workers", e.to_string()))?,
        ),
        None => None,
    };
    let mut out = Vec::new();
    for &density in &config.densities {
        for &regime in &config.regimes {
            let cell = Cell::new(config, density, regime)?;
            let m = cell.run(pool.as_ref());
            for &scheme in config.scheme.schemes() {
                let mm = &m[scheme as usize];
                out.push(SimEstimate {
                    density,
                    scheme,
                    regime,
                    mean: mm.mean,
                    stderr: mm.stderr(),
                    trials: mm.n,
                    seed: config.seed,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::h_integral_by;
    use crate::quadrature::integrate;

    fn cfg(regime: Regime, density: f64, trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            densities: vec![density],
            regimes: vec![regime],
            trials,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut merged = Moments::default();
        for chunk in xs.chunks(77) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&x| m.push(x));
            merged.merge(&m);
        }
        assert_eq!(merged.n, all.n);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-8);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0;
        assert!((all.stderr() - (var / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seeds_differ_per_coordinate() {
        let base = trial_seed(1, 0.001, Regime::C, 0, 0);
        assert_ne!(base, trial_seed(2, 0.001, Regime::C, 0, 0));
        assert_ne!(base, trial_seed(1, 0.002, Regime::C, 0, 0));
        assert_ne!(base, trial_seed(1, 0.001, Regime::D1, 0, 0));
        assert_ne!(base, trial_seed(1, 0.001, Regime::C, 1, 0));
        assert_ne!(base, trial_seed(1, 0.001, Regime::C, 0, 1));
    }

    #[test]
    fn empty_field_gives_direct_average() {
        let c = cfg(Regime::C, 1e-12, 40_000);
        let est = estimate_throughput(&c).unwrap();
        let p = ChannelParams::reference();
        let (lo, hi) = Regime::C.range();
        let oracle = integrate(|r| 2.0 * p.ps(r) * 2.0 * r / (hi * hi - lo * lo), lo, hi);
        for e in &est {
            assert!((e.mean - oracle).abs() < 3.0 * e.stderr + 1e-9, "{e:?} vs {oracle}");
        }
        assert_eq!(est[0].mean, est[1].mean);
    }

    #[test]
    fn knearest_placement_without_helpers() {
        // k = 1 leaves no helper, so the estimate is the direct throughput on [67.1, 74.7]
        let mut c = cfg(Regime::C, 0.0005, 40_000);
        c.conditioning = ConditioningKind::KNearest { k: 1 };
        let est = estimate_throughput(&c).unwrap();
        let p = ChannelParams::reference();
        let oracle = 2.0 * h_integral_by(67.1, 74.7, 1, 0.0005, |r| p.ps(r)).unwrap();
        assert!((est[0].mean - oracle).abs() < 4.0 * est[0].stderr, "{} vs {oracle}", est[0].mean);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = cfg(Regime::D1, 0.003, 5000);
        c.workers = Some(1);
        let a = estimate_throughput(&c).unwrap();
        c.workers = Some(3);
        let b = estimate_throughput(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn proposed_beats_conventional() {
        let est = estimate_throughput(&cfg(Regime::C, 0.002, 20_000)).unwrap();
        assert!(est[0].mean > est[1].mean + 3.0 * est[0].stderr.hypot(est[1].stderr));
    }

    #[test]
    fn validation() {
        let mut c = cfg(Regime::C, 0.001, 1);
        assert!(estimate_throughput(&c).is_err());
        c.trials = 10;
        c.densities = vec![-1.0];
        assert!(estimate_throughput(&c).is_err());
        c.densities = vec![0.001];
        c.workers = Some(0);
        assert!(estimate_throughput(&c).is_err());
        assert_eq!("Both".parse::<SchemeSelection>().unwrap(), SchemeSelection::Both);
        assert_eq!(density_grid().len(), 10);
    }
}
