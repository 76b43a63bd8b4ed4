//! Closed-form throughput expressions and the upper/lower bounds on the
//! average cooperative throughput.
//!
//! Throughput of a link is `rate × success probability`. For links that can use
//! a helper, the probability that the selector settles on tier `i` follows from
//! the tier-region areas; each tier contributes a bound pair obtained from the
//! extreme helper positions inside its region. Averaging over the link length
//! gives the per-regime bounds.
//!
//! Two ways of fixing the neighbourhood of the destination are offered:
//!
//! * [`Conditioning::KNearest`]: the source is the k-th nearest neighbour of the
//!   destination, so exactly `k-1` nodes fall in the disc of radius `r_k`.
//!   Tier probabilities are binomial void probabilities and link lengths are
//!   weighted by the k-th nearest-neighbour density (not renormalised to the
//!   regime, so regime averages add up to an overall average).
//! * [`Conditioning::Ppp`]: the helpers form an unconditioned Poisson field of
//!   intensity λ, tier probabilities are `exp(-λ·area)` differences, and the
//!   link length is drawn with density `2r/(r_max² - r_min²)` on the regime's
//!   annulus.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{nn_distance_pdf, tier_region_areas, TIER1_MAX_LINK};
use crate::protocol::{tier_rate, LinkClass, A_MAX, B_MAX, C_MAX};
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_INTERVALS, DEFAULT_TOL};

/// Link-length regimes. Type D links are split at 96.4 m, past which no tier-1 helper exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    A,
    B,
    C,
    D1,
    D2,
}

impl Regime {
    pub const ALL: [Regime; 5] = [Regime::A, Regime::B, Regime::C, Regime::D1, Regime::D2];
    pub const COOPERATIVE: [Regime; 3] = [Regime::C, Regime::D1, Regime::D2];

    pub fn range(self) -> (f64, f64) {
        match self {
            Regime::A => (0.0, A_MAX),
            Regime::B => (A_MAX, B_MAX),
            Regime::C => (B_MAX, C_MAX),
            Regime::D1 => (C_MAX, TIER1_MAX_LINK),
            Regime::D2 => (TIER1_MAX_LINK, LinkClass::MAX_RANGE),
        }
    }

    pub fn link_class(self) -> LinkClass {
        match self {
            Regime::A => LinkClass::A,
            Regime::B => LinkClass::B,
            Regime::C => LinkClass::C,
            Regime::D1 | Regime::D2 => LinkClass::D,
        }
    }

    pub fn direct_rate(self) -> f64 {
        self.link_class().direct_rate()
    }

    pub fn is_cooperative(self) -> bool {
        self.link_class().supports_cooperation()
    }

    /// Tiers that can occur in this regime.
    pub fn tiers(self) -> std::ops::RangeInclusive<u8> {
        match self {
            Regime::A | Regime::B => 1..=0,
            Regime::C => 1..=3,
            Regime::D1 => 1..=5,
            Regime::D2 => 2..=5,
        }
    }

    /// Regime of a link of length `r`, `None` beyond 100 m.
    pub fn of_distance(r: f64) -> Option<Regime> {
        match LinkClass::of_hop(r)? {
            LinkClass::A => Some(Regime::A),
            LinkClass::B => Some(Regime::B),
            LinkClass::C => Some(Regime::C),
            LinkClass::D if r <= TIER1_MAX_LINK => Some(Regime::D1),
            LinkClass::D => Some(Regime::D2),
        }
    }

    /// Closed-range membership, so quadrature can evaluate at both endpoints.
    pub fn accepts(self, r: f64) -> bool {
        let (lo, hi) = self.range();
        r >= lo && r <= hi
    }

    fn check(self, r_k: f64) -> Result<()> {
        if self.accepts(r_k) {
            Ok(())
        } else {
            let (lo, hi) = self.range();
            Err(Error::invalid("r_k", format!("{r_k} m is outside the {self} range [{lo}, {hi}]")))
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::A => "A",
            Regime::B => "B",
            Regime::C => "C",
            Regime::D1 => "D1",
            Regime::D2 => "D2",
        };
        f.write_str(s)
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Regime::A),
            "B" => Ok(Regime::B),
            "C" => Ok(Regime::C),
            "D1" => Ok(Regime::D1),
            "D2" => Ok(Regime::D2),
            other => Err(Error::invalid("regime", format!("unknown regime `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Conditioning {
    KNearest { k: u32, density: f64 },
    Ppp { density: f64 },
}

impl Conditioning {
    pub fn density(&self) -> f64 {
        match *self {
            Conditioning::KNearest { density, .. } | Conditioning::Ppp { density } => density,
        }
    }

    pub fn with_density(self, density: f64) -> Self {
        match self {
            Conditioning::KNearest { k, .. } => Conditioning::KNearest { k, density },
            Conditioning::Ppp { .. } => Conditioning::Ppp { density },
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.density();
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid("density", format!("must be > 0, got {d}")));
        }
        if let Conditioning::KNearest { k: 0, .. } = self {
            return Err(Error::invalid("k", "neighbour order must be >= 1"));
        }
        Ok(())
    }
}

/// Conditioning without a density, as chosen on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditioningKind {
    KNearest { k: u32 },
    Ppp,
}

impl ConditioningKind {
    pub fn at(self, density: f64) -> Conditioning {
        match self {
            ConditioningKind::KNearest { k } => Conditioning::KNearest { k, density },
            ConditioningKind::Ppp => Conditioning::Ppp { density },
        }
    }
}

impl Default for ConditioningKind {
    fn default() -> Self {
        ConditioningKind::Ppp
    }
}

impl fmt::Display for ConditioningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditioningKind::KNearest { k } => write!(f, "k={k}"),
            ConditioningKind::Ppp => f.write_str("ppp"),
        }
    }
}

impl FromStr for ConditioningKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "ppp" {
            return Ok(ConditioningKind::Ppp);
        }
        let k = s
            .strip_prefix("k=")
            .and_then(|v| v.parse::<u32>().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| Error::invalid("conditioning", format!("expected `ppp` or `k=<int >= 1>`, got `{s}`")))?;
        Ok(ConditioningKind::KNearest { k })
    }
}

impl Conditioning {
    pub fn kind(&self) -> ConditioningKind {
        match *self {
            Conditioning::KNearest { k, .. } => ConditioningKind::KNearest { k },
            Conditioning::Ppp { .. } => ConditioningKind::Ppp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    /// `None` for the all-class total.
    pub regime: Option<Regime>,
    /// `None` for a tier mixture.
    pub tier: Option<u8>,
    /// `None` when averaged over the link length.
    pub r_k: Option<f64>,
}

/// Lower and upper throughput bounds in Mbps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub context: BoundContext,
}

impl BoundPair {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }
}

/// Probability that the selector settles on each tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierProbabilityVector {
    pub regime: Regime,
    pub r_k: f64,
    pub conditioning: Conditioning,
    /// Index 0 is tier 1.
    pub tiers: Vec<f64>,
    /// Probability that no beneficial helper exists and the direct link is used.
    pub residual: f64,
}

impl TierProbabilityVector {
    pub fn tier(&self, tier: u8) -> f64 {
        self.tiers[tier as usize - 1]
    }
}

/// `∫ Q(ν + μ·log10 r)·f_{r_k}(r) dr` over `[r_min, r_max]`.
pub fn h_integral(r_min: f64, r_max: f64, k: u32, density: f64, params: &ChannelParams) -> Result<f64> {
    h_integral_by(r_min, r_max, k, density, |r| params.ps(r))
}

/// Same integral with an arbitrary success law in place of the Q-function.
pub fn h_integral_by<F: Fn(f64) -> f64>(r_min: f64, r_max: f64, k: u32, density: f64, success: F) -> Result<f64> {
    if !(r_min >= 0.0 && r_max >= r_min && r_max.is_finite()) {
        return Err(Error::invalid("range", format!("need 0 <= r_min <= r_max, got [{r_min}, {r_max}]")));
    }
    Conditioning::KNearest { k, density }.validate()?;
    if r_min == r_max {
        return Ok(0.0);
    }
    Ok(adaptive_simpson(
        |r| {
            let f = nn_distance_pdf(k, density, r);
            if f == 0.0 {
                0.0
            } else {
                success(r) * f
            }
        },
        r_min,
        r_max,
        DEFAULT_TOL * 0.01,
        DEFAULT_MAX_INTERVALS * 4,
    )
    .value)
}

/// Throughput of a link used without any helper, averaged over the k-th neighbour law.
pub fn direct_throughput(link_class: LinkClass, k: u32, density: f64, params: &ChannelParams) -> Result<f64> {
    let (lo, hi) = (link_class.min_distance(), link_class.max_distance());
    Ok(h_integral(lo, hi, k, density, params)? * link_class.direct_rate())
}

/// Average throughput of type A or B links, which never use a helper.
pub fn type_ab_throughput(link_class: LinkClass, k: u32, density: f64, params: &ChannelParams) -> Result<f64> {
    if link_class.supports_cooperation() {
        return Err(Error::invalid("link_class", format!("type {link_class} is not a direct-only class")));
    }
    direct_throughput(link_class, k, density, params)
}

pub fn tier_probabilities(regime: Regime, r_k: f64, conditioning: Conditioning) -> Result<TierProbabilityVector> {
    conditioning.validate()?;
    regime.check(r_k)?;
    if !regime.is_cooperative() {
        return Ok(TierProbabilityVector {
            regime,
            r_k,
            conditioning,
            tiers: Vec::new(),
            residual: 1.0,
        });
    }
    let mut areas = tier_region_areas(regime.link_class(), r_k)?.areas;
    if regime == Regime::D2 {
        areas[0] = 0.0;
    }
    let disc = std::f64::consts::PI * r_k * r_k;

    // probability that none of the first `j` tier regions holds a node
    let void = |cum: f64| match conditioning {
        Conditioning::KNearest { k, .. } => (1.0 - cum / disc).max(0.0).powi(k as i32 - 1),
        Conditioning::Ppp { density } => (-density * cum).exp(),
    };

    let mut tiers = Vec::with_capacity(areas.len());
    let mut cum = 0.0;
    let mut prev = 1.0;
    for a in areas {
        cum += a;
        let next = void(cum);
        tiers.push((prev - next).max(0.0));
        prev = next;
    }
    Ok(TierProbabilityVector {
        regime,
        r_k,
        conditioning,
        tiers,
        residual: prev,
    })
}

/// Bounds on `R_Coop·G(d_SH, d_HD)` for a helper of `tier` on a link of length `r_k`.
pub fn tier_bound_pair(regime: Regime, tier: u8, r_k: f64, params: &ChannelParams) -> Result<BoundPair> {
    regime.check(r_k)?;
    if !regime.tiers().contains(&tier) {
        return Err(Error::invalid("tier", format!("tier {tier} does not exist in regime {regime}")));
    }
    let g = |a: f64, b: f64| params.g(a, b);
    let half = 0.5 * r_k;
    let (lo, hi) = match (regime, tier) {
        (_, 1) => (g(A_MAX, A_MAX), g(half, half)),
        (_, 2) => (g(A_MAX, B_MAX), g(A_MAX, r_k - A_MAX)),
        (Regime::D2, 3) => (g(B_MAX, B_MAX), g(half, half)),
        (_, 3) => (g(B_MAX, B_MAX), g(A_MAX, A_MAX)),
        (_, 4) => (g(A_MAX, C_MAX), g(B_MAX, r_k - B_MAX)),
        (_, 5) => (g(B_MAX, C_MAX), g(A_MAX, B_MAX)),
        _ => unreachable!("tier range checked above"),
    };
    let rate = tier_rate(regime.link_class(), tier).expect("tier exists for class");
    Ok(BoundPair {
        lower: lo * rate,
        upper: hi * rate,
        context: BoundContext {
            regime: Some(regime),
            tier: Some(tier),
            r_k: Some(r_k),
        },
    })
}

/// Tier-probability mixture of the per-tier bounds plus the direct-link fallback.
pub fn link_bounds_at_distance(
    regime: Regime,
    r_k: f64,
    conditioning: Conditioning,
    params: &ChannelParams,
) -> Result<BoundPair> {
    let probs = tier_probabilities(regime, r_k, conditioning)?;
    let direct = probs.residual * params.ps(r_k) * regime.direct_rate();
    let (mut lower, mut upper) = (direct, direct);
    for tier in regime.tiers() {
        let p = probs.tier(tier);
        if p > 0.0 {
            let pair = tier_bound_pair(regime, tier, r_k, params)?;
            lower += p * pair.lower;
            upper += p * pair.upper;
        }
    }
    Ok(BoundPair {
        lower,
        upper,
        context: BoundContext {
            regime: Some(regime),
            tier: None,
            r_k: Some(r_k),
        },
    })
}

/// Weight of link length `r` under `conditioning` for regime `regime`.
pub fn link_length_weight(regime: Regime, conditioning: Conditioning, r: f64) -> f64 {
    let (lo, hi) = regime.range();
    match conditioning {
        Conditioning::KNearest { k, density } => nn_distance_pdf(k, density, r),
        Conditioning::Ppp { .. } => 2.0 * r / (hi * hi - lo * lo),
    }
}

/// Bounds averaged over the link length of `regime`.
pub fn averaged_bounds(regime: Regime, conditioning: Conditioning, params: &ChannelParams) -> Result<BoundPair> {
    averaged_bounds_tol(regime, conditioning, params, DEFAULT_TOL)
}

pub fn averaged_bounds_tol(
    regime: Regime,
    conditioning: Conditioning,
    params: &ChannelParams,
    tol: f64,
) -> Result<BoundPair> {
    conditioning.validate()?;
    let (lo, hi) = regime.range();
    let side = |upper: bool| {
        adaptive_simpson(
            |r| {
                let w = link_length_weight(regime, conditioning, r);
                if w == 0.0 {
                    return 0.0;
                }
                let b = link_bounds_at_distance(regime, r, conditioning, params).expect("r inside regime");
                w * if upper { b.upper } else { b.lower }
            },
            lo,
            hi,
            tol,
            DEFAULT_MAX_INTERVALS,
        )
        .value
    };
    Ok(BoundPair {
        lower: side(false),
        upper: side(true),
        context: BoundContext {
            regime: Some(regime),
            tier: None,
            r_k: None,
        },
    })
}

/// Sum of the per-regime averaged bounds over all five regimes.
pub fn averaged_total_bounds(conditioning: Conditioning, params: &ChannelParams) -> Result<BoundPair> {
    let mut total = BoundPair {
        lower: 0.0,
        upper: 0.0,
        context: BoundContext {
            regime: None,
            tier: None,
            r_k: None,
        },
    };
    for regime in Regime::ALL {
        let b = averaged_bounds(regime, conditioning, params)?;
        total.lower += b.lower;
        total.upper += b.upper;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lens_area;

    fn p6() -> ChannelParams {
        ChannelParams::reference()
    }

    /// Trapezoid rule on a uniform grid, the independent check for the adaptive integrator.
    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (0.5 * (f(a) + f(b)) + inner)
    }

    #[test]
    fn h_integral_edge_cases() {
        let p = p6();
        assert_eq!(h_integral(10.0, 10.0, 3, 0.001, &p).unwrap(), 0.0);
        assert!(h_integral(10.0, 5.0, 3, 0.001, &p).is_err());
        assert!(h_integral(0.0, 5.0, 0, 0.001, &p).is_err());
        assert!(h_integral(0.0, 5.0, 1, 0.0, &p).is_err());
        let unit = h_integral_by(0.0, 400.0, 5, 0.001, |_| 1.0).unwrap();
        assert!((unit - 1.0).abs() < 1e-8);
    }

    #[test]
    fn h_integral_against_trapezoid() {
        let p = p6();
        let h = h_integral(0.0, 48.2, 1, 0.005, &p).unwrap();
        let oracle = trapezoid(|r| p.ps(r) * nn_distance_pdf(1, 0.005, r), 0.0, 48.2, 100_000);
        assert!((h - oracle).abs() < 1e-8, "{h} vs {oracle}");
        assert!(h > p.ps(48.2) && h < 1.0);
    }

    #[test]
    fn type_ab_values() {
        let p = p6();
        let a = type_ab_throughput(LinkClass::A, 1, 0.005, &p).unwrap();
        let oracle = 11.0 * trapezoid(|r| p.ps(r) * nn_distance_pdf(1, 0.005, r), 0.0, 48.2, 100_000);
        assert!((a - oracle).abs() < 1e-7);
        // with a perfect channel the B term is the rate times the class probability
        let (k, lam) = (12, 0.001);
        let b = h_integral_by(48.2, 67.1, k, lam, |_| 1.0).unwrap() * 5.5;
        let prob = trapezoid(|r| nn_distance_pdf(k, lam, r), 48.2, 67.1, 100_000);
        assert!((b - 5.5 * prob).abs() < 1e-8);
        assert!(type_ab_throughput(LinkClass::C, 1, 0.005, &p).is_err());
        let c = direct_throughput(LinkClass::C, 30, 0.002, &p).unwrap();
        assert!((c - 2.0 * h_integral(67.1, 74.7, 30, 0.002, &p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn tier_probability_examples() {
        let v = tier_probabilities(Regime::C, 70.0, Conditioning::KNearest { k: 1, density: 0.001 }).unwrap();
        assert!(v.tiers.iter().all(|&p| p == 0.0));
        assert_eq!(v.residual, 1.0);

        let v = tier_probabilities(Regime::C, 70.0, Conditioning::Ppp { density: 0.005 }).unwrap();
        let want = 1.0 - (-0.005 * lens_area(48.2, 48.2, 70.0)).exp();
        assert!((v.tier(1) - want).abs() < 1e-12);
        assert!((v.tier(1) - 0.9975).abs() < 1e-3);

        let v = tier_probabilities(Regime::D2, 97.0, Conditioning::Ppp { density: 0.005 }).unwrap();
        assert_eq!(v.tier(1), 0.0);
        assert!(tier_probabilities(Regime::C, 80.0, Conditioning::Ppp { density: 0.005 }).is_err());
    }

    #[test]
    fn tier_probabilities_literal_k_form() {
        let r = 72.0;
        let k = 9;
        let v = tier_probabilities(Regime::C, r, Conditioning::KNearest { k, density: 0.002 }).unwrap();
        let ra = tier_region_areas(LinkClass::C, r).unwrap();
        let w = std::f64::consts::PI * r * r;
        let p1 = 1.0 - (1.0 - ra.tier(1) / w).powi(k as i32 - 1);
        let p2 = (1.0 - ra.tier(1) / w).powi(k as i32 - 1) - (1.0 - (ra.tier(1) + ra.tier(2)) / w).powi(k as i32 - 1);
        assert!((v.tier(1) - p1).abs() < 1e-14);
        assert!((v.tier(2) - p2).abs() < 1e-14);
    }

    #[test]
    fn tier_pair_examples() {
        let p = p6();
        let b = tier_bound_pair(Regime::C, 1, 70.0, &p).unwrap();
        assert!((b.lower - 4.402).abs() < 1e-3, "{}", b.lower);
        assert!((b.upper - 5.220).abs() < 1e-3, "{}", b.upper);
        for r in [67.1, 70.0, 74.7] {
            let b = tier_bound_pair(Regime::C, 3, r, &p).unwrap();
            assert!((b.lower - 1.359).abs() < 1e-3 && (b.upper - 2.201).abs() < 1e-3);
        }
        let b = tier_bound_pair(Regime::D1, 5, 80.0, &p).unwrap();
        let r5 = 5.5 * 2.0 / 7.5;
        assert!((b.lower - p.g(67.1, 74.7) * r5).abs() < 1e-12);
        assert!((b.upper - p.g(48.2, 67.1) * r5).abs() < 1e-12);
        let b = tier_bound_pair(Regime::D2, 3, 98.0, &p).unwrap();
        assert!((b.upper - p.g(49.0, 49.0) * 2.75).abs() < 1e-12);
        assert!(tier_bound_pair(Regime::D2, 1, 98.0, &p).is_err());
        assert!(tier_bound_pair(Regime::C, 4, 70.0, &p).is_err());
    }

    #[test]
    fn mixture_collapses_without_helpers() {
        let p = p6();
        let b = link_bounds_at_distance(Regime::C, 70.0, Conditioning::KNearest { k: 1, density: 0.001 }, &p).unwrap();
        assert!((b.lower - p.ps(70.0) * 2.0).abs() < 1e-15);
        assert_eq!(b.lower, b.upper);
        let dense = link_bounds_at_distance(Regime::C, 70.0, Conditioning::Ppp { density: 10.0 }, &p).unwrap();
        let t1 = tier_bound_pair(Regime::C, 1, 70.0, &p).unwrap();
        assert!((dense.lower - t1.lower).abs() < 1e-9 && (dense.upper - t1.upper).abs() < 1e-9);
    }

    #[test]
    fn averaged_bounds_are_stable_under_tolerance() {
        let p = p6();
        for regime in Regime::COOPERATIVE {
            let c = Conditioning::Ppp { density: 0.002 };
            let a = averaged_bounds_tol(regime, c, &p, 1e-8).unwrap();
            let b = averaged_bounds_tol(regime, c, &p, 5e-9).unwrap();
            assert!((a.lower - b.lower).abs() < 1e-6 && (a.upper - b.upper).abs() < 1e-6);
        }
    }

    #[test]
    fn ppp_weight_normalises() {
        for regime in Regime::ALL {
            let (lo, hi) = regime.range();
            let w = trapezoid(|r| link_length_weight(regime, Conditioning::Ppp { density: 1.0 }, r), lo, hi, 10_000);
            assert!((w - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn regimes_cover_range() {
        assert_eq!(Regime::of_distance(30.0), Some(Regime::A));
        assert_eq!(Regime::of_distance(96.4), Some(Regime::D1));
        assert_eq!(Regime::of_distance(96.5), Some(Regime::D2));
        assert_eq!(Regime::of_distance(100.1), None);
        assert_eq!("d2".parse::<Regime>().unwrap(), Regime::D2);
    }
}
