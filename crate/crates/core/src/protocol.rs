//! Link classes, helper tiers and the helper-selection procedures.
//!
//! A source–destination link is classified by its length into one of four
//! 802.11b rate classes. For the two slowest classes a relay (helper) can
//! raise the end-to-end rate; such helpers are grouped into tiers by the rate
//! class of their two hops. The proposed selector exhausts lower tiers first
//! and, within a tier, prefers the helper with the best two-hop success
//! probability. The conventional selector picks uniformly at random.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::channel::{draw_hop_success, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::{NetworkRealization, Point2D};

/// Upper edge of the 11 Mbps band.
pub const A_MAX: f64 = 48.2;
/// Upper edge of the 5.5 Mbps band.
pub const B_MAX: f64 = 67.1;
/// Upper edge of the 2 Mbps band.
pub const C_MAX: f64 = 74.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkClass {
    A,
    B,
    C,
    D,
}

impl LinkClass {
    pub const ALL: [LinkClass; 4] = [LinkClass::A, LinkClass::B, LinkClass::C, LinkClass::D];
    /// Maximum effective transmission range in metres.
    pub const MAX_RANGE: f64 = 100.0;

    pub fn min_distance(self) -> f64 {
        match self {
            LinkClass::A => 0.0,
            LinkClass::B => A_MAX,
            LinkClass::C => B_MAX,
            LinkClass::D => C_MAX,
        }
    }

    /// Exclusive upper edge, except for D whose range is closed at 100 m.
    pub fn max_distance(self) -> f64 {
        match self {
            LinkClass::A => A_MAX,
            LinkClass::B => B_MAX,
            LinkClass::C => C_MAX,
            LinkClass::D => Self::MAX_RANGE,
        }
    }

    /// Direct transmission rate in Mbps.
    pub fn direct_rate(self) -> f64 {
        match self {
            LinkClass::A => 11.0,
            LinkClass::B => 5.5,
            LinkClass::C => 2.0,
            LinkClass::D => 1.0,
        }
    }

    /// Rate class of a single hop, `None` beyond 100 m.
    pub fn of_hop(distance: f64) -> Option<LinkClass> {
        if !(0.0..=Self::MAX_RANGE).contains(&distance) {
            None
        } else if distance < A_MAX {
            Some(LinkClass::A)
        } else if distance < B_MAX {
            Some(LinkClass::B)
        } else if distance < C_MAX {
            Some(LinkClass::C)
        } else {
            Some(LinkClass::D)
        }
    }

    /// Whether a helper can ever beat the direct rate on this class.
    pub fn supports_cooperation(self) -> bool {
        matches!(self, LinkClass::C | LinkClass::D)
    }

    pub fn tier_count(self) -> usize {
        match self {
            LinkClass::C => 3,
            LinkClass::D => 5,
            _ => 0,
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LinkClass::A => "A",
            LinkClass::B => "B",
            LinkClass::C => "C",
            LinkClass::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for LinkClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(LinkClass::A),
            "B" => Ok(LinkClass::B),
            "C" => Ok(LinkClass::C),
            "D" => Ok(LinkClass::D),
            other => Err(Error::invalid("link_class", format!("unknown class `{other}`"))),
        }
    }
}

pub fn classify_link(distance: f64) -> Result<LinkClass> {
    if distance.is_nan() || distance < 0.0 {
        return Err(Error::invalid("distance", format!("must be >= 0, got {distance}")));
    }
    LinkClass::of_hop(distance).ok_or(Error::OutOfRange(distance))
}

/// End-to-end rate of a two-hop relay path: `L / (L/r_sh + L/r_hd)`.
pub fn coop_rate(r_sh: f64, r_hd: f64) -> f64 {
    r_sh * r_hd / (r_sh + r_hd)
}

/// One row of a helper-tier table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierSpec {
    pub link_class: LinkClass,
    pub tier: u8,
    /// Rate class of the source–helper hop.
    pub sh: LinkClass,
    /// Rate class of the helper–destination hop.
    pub hd: LinkClass,
}

impl TierSpec {
    const fn new(link_class: LinkClass, tier: u8, sh: LinkClass, hd: LinkClass) -> Self {
        Self { link_class, tier, sh, hd }
    }

    pub fn r_sh(&self) -> f64 {
        self.sh.direct_rate()
    }
    pub fn r_hd(&self) -> f64 {
        self.hd.direct_rate()
    }
    pub fn coop_rate(&self) -> f64 {
        coop_rate(self.r_sh(), self.r_hd())
    }
    /// Hop-distance ranges `[lo, hi)` for S–H and H–D.
    pub fn ranges(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.sh.min_distance(), self.sh.max_distance()),
            (self.hd.min_distance(), self.hd.max_distance()),
        )
    }
}

use LinkClass::{A, B, C, D};

const TYPE_C_TIERS: [TierSpec; 4] = [
    TierSpec::new(C, 1, A, A),
    TierSpec::new(C, 2, A, B),
    TierSpec::new(C, 2, B, A),
    TierSpec::new(C, 3, B, B),
];

const TYPE_D_TIERS: [TierSpec; 8] = [
    TierSpec::new(D, 1, A, A),
    TierSpec::new(D, 2, A, B),
    TierSpec::new(D, 2, B, A),
    TierSpec::new(D, 3, B, B),
    TierSpec::new(D, 4, A, C),
    TierSpec::new(D, 4, C, A),
    TierSpec::new(D, 5, B, C),
    TierSpec::new(D, 5, C, B),
];

/// Rows of the helper-tier table for `link_class` (empty for A and B).
pub fn tier_table(link_class: LinkClass) -> &'static [TierSpec] {
    match link_class {
        C => &TYPE_C_TIERS,
        D => &TYPE_D_TIERS,
        _ => &[],
    }
}

pub(crate) fn tier_of_bands(link_class: LinkClass, sh: LinkClass, hd: LinkClass) -> Option<u8> {
    tier_table(link_class)
        .iter()
        .find(|t| t.sh == sh && t.hd == hd)
        .map(|t| t.tier)
}

/// Cooperative rate of `tier` on `link_class`, in Mbps.
pub fn tier_rate(link_class: LinkClass, tier: u8) -> Option<f64> {
    tier_table(link_class)
        .iter()
        .find(|t| t.tier == tier)
        .map(TierSpec::coop_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelperCandidate {
    /// Index of the node in its realization.
    pub index: usize,
    pub position: Point2D,
    pub d_sh: f64,
    pub d_hd: f64,
    pub tier: u8,
    /// Cooperative rate of the tier, Mbps.
    pub rate: f64,
    /// Two-hop success probability.
    pub g_score: f64,
}

/// Every node of `realization` that would raise the rate of the S–D link.
pub fn enumerate_candidates(
    realization: &NetworkRealization,
    source: Point2D,
    dest: Point2D,
    params: &ChannelParams,
) -> Result<Vec<HelperCandidate>> {
    let class = classify_link(source.distance(&dest))?;
    if !class.supports_cooperation() {
        return Ok(Vec::new());
    }
    Ok(realization
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(index, p)| candidate_for(index, *p, source, dest, class, params))
        .collect())
}

#[inline]
pub(crate) fn candidate_for(
    index: usize,
    position: Point2D,
    source: Point2D,
    dest: Point2D,
    class: LinkClass,
    params: &ChannelParams,
) -> Option<HelperCandidate> {
    let d_hd = position.distance(&dest);
    // every helper hop is shorter than 74.7 m
    if d_hd >= C_MAX {
        return None;
    }
    let d_sh = position.distance(&source);
    if d_sh >= C_MAX || d_sh <= 0.0 || d_hd <= 0.0 {
        return None;
    }
    let tier = tier_of_bands(class, LinkClass::of_hop(d_sh)?, LinkClass::of_hop(d_hd)?)?;
    Some(HelperCandidate {
        index,
        position,
        d_sh,
        d_hd,
        tier,
        rate: tier_rate(class, tier)?,
        g_score: params.g(d_sh, d_hd),
    })
}

fn proposed_order(a: &HelperCandidate, b: &HelperCandidate) -> std::cmp::Ordering {
    a.tier
        .cmp(&b.tier)
        .then_with(|| b.g_score.total_cmp(&a.g_score))
        .then_with(|| a.d_sh.total_cmp(&b.d_sh))
        .then_with(|| a.index.cmp(&b.index))
}

/// CoopRTS attempt order of the proposed scheme: ascending tier, then descending `g_score`.
///
/// Ties in `g_score` fall back to the shorter source hop, then the node index.
pub fn select_helper_proposed(candidates: &[HelperCandidate]) -> Vec<HelperCandidate> {
    let mut order = candidates.to_vec();
    order.sort_by(proposed_order);
    order
}

/// First entry of [`select_helper_proposed`] without sorting the whole list.
pub fn best_helper_proposed(candidates: &[HelperCandidate]) -> Option<&HelperCandidate> {
    candidates.iter().min_by(|a, b| proposed_order(a, b))
}

/// Conventional baseline: a uniformly random permutation of the beneficial candidates.
pub fn select_helper_conventional<R: Rng + ?Sized>(candidates: &[HelperCandidate], rng: &mut R) -> Vec<HelperCandidate> {
    let mut order = candidates.to_vec();
    order.shuffle(rng);
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExchangeMode {
    /// The first helper in the order defines the link; no randomness is drawn.
    Analytic,
    /// Walks the CoopRTS/HTS/RTS/CTS/data/ACK sequence with shadowing draws.
    Sampled { max_backoffs: u32 },
}

impl ExchangeMode {
    pub const DEFAULT_MAX_BACKOFFS: u32 = 3;

    pub fn sampled() -> Self {
        ExchangeMode::Sampled {
            max_backoffs: Self::DEFAULT_MAX_BACKOFFS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransmissionMode {
    Cooperative,
    Direct,
    Failed,
}

/// Frame sizes in bits. Carried for overhead accounting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSizes {
    pub rts: u32,
    pub coop_rts: u32,
    pub cts: u32,
    pub hts: u32,
    pub data: u32,
}

impl Default for FrameSizes {
    fn default() -> Self {
        Self {
            rts: 352,
            coop_rts: 352,
            cts: 304,
            hts: 304,
            data: 8 * 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub coop_rts: u32,
    pub rts: u32,
    pub hts: u32,
    pub cts: u32,
    pub data: u32,
}

impl FrameCounts {
    pub fn control_bits(&self, sizes: &FrameSizes) -> u64 {
        self.coop_rts as u64 * sizes.coop_rts as u64
            + self.rts as u64 * sizes.rts as u64
            + self.hts as u64 * sizes.hts as u64
            + self.cts as u64 * sizes.cts as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub mode: TransmissionMode,
    pub helper: Option<HelperCandidate>,
    /// Rate of the path that carried (or last tried to carry) the data, Mbps.
    pub rate: f64,
    /// Success probability of that path under the shadowing model.
    pub success_probability: f64,
    /// Throughput contribution of this exchange, Mbps.
    ///
    /// Analytic mode: `rate · success_probability` of the first path in the
    /// order. Sampled mode: the first path's rate if its first data attempt was
    /// delivered, else 0. Both have the same expectation.
    pub throughput: f64,
    /// CoopRTS plus RTS transmissions.
    pub attempts: u32,
    pub backoffs: u32,
    pub frames: FrameCounts,
}

/// Runs one data exchange over the S–D link of length `link_distance` using the helper order `order`.
pub fn run_exchange<R: Rng + ?Sized>(
    order: &[HelperCandidate],
    link_distance: f64,
    params: &ChannelParams,
    mode: ExchangeMode,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    let class = classify_link(link_distance)?;
    if link_distance <= 0.0 {
        return Err(Error::invalid("link_distance", "must be > 0"));
    }
    let direct_rate = class.direct_rate();
    let direct_ps = params.ps(link_distance);

    match mode {
        ExchangeMode::Analytic => Ok(match order.first() {
            Some(h) => SelectionOutcome {
                mode: TransmissionMode::Cooperative,
                helper: Some(*h),
                rate: h.rate,
                success_probability: h.g_score,
                throughput: h.rate * h.g_score,
                attempts: 1,
                backoffs: 0,
                frames: FrameCounts {
                    coop_rts: 1,
                    hts: 1,
                    cts: 1,
                    data: 2,
                    ..Default::default()
                },
            },
            None => SelectionOutcome {
                mode: TransmissionMode::Direct,
                helper: None,
                rate: direct_rate,
                success_probability: direct_ps,
                throughput: direct_rate * direct_ps,
                attempts: 1,
                backoffs: 0,
                frames: FrameCounts {
                    rts: 1,
                    cts: 1,
                    data: 1,
                    ..Default::default()
                },
            },
        }),
        ExchangeMode::Sampled { max_backoffs } => {
            Ok(walk_exchange(order, link_distance, direct_rate, direct_ps, params, max_backoffs, rng))
        }
    }
}

fn walk_exchange<R: Rng + ?Sized>(
    order: &[HelperCandidate],
    link_distance: f64,
    direct_rate: f64,
    direct_ps: f64,
    params: &ChannelParams,
    max_backoffs: u32,
    rng: &mut R,
) -> SelectionOutcome {
    let mut frames = FrameCounts::default();
    let mut attempts = 0;
    let mut backoffs = 0;
    let mut first_path: Option<f64> = None;

    loop {
        // One shadowing draw per link per round; frames on the same link in
        // the same round share it. CTS and ACK from the destination are
        // reliable whenever the data they answer was delivered.
        let mut relay = None;
        for h in order {
            attempts += 1;
            frames.coop_rts += 1;
            if draw_hop_success(h.d_sh, params, rng) {
                frames.hts += 1;
                relay = Some(*h);
                break;
            }
            first_path.get_or_insert(0.0);
        }

        let (mode, rate, ps, delivered) = match relay {
            Some(h) => {
                frames.cts += 1;
                frames.data += 1;
                let delivered = draw_hop_success(h.d_hd, params, rng);
                if delivered {
                    frames.data += 1;
                }
                (TransmissionMode::Cooperative, h.rate, h.g_score, delivered)
            }
            None => {
                attempts += 1;
                frames.rts += 1;
                let up = draw_hop_success(link_distance, params, rng);
                if up {
                    frames.cts += 1;
                    frames.data += 1;
                }
                (TransmissionMode::Direct, direct_rate, direct_ps, up)
            }
        };
        first_path.get_or_insert(if delivered { rate } else { 0.0 });

        if delivered || backoffs >= max_backoffs {
            return SelectionOutcome {
                mode: if delivered { mode } else { TransmissionMode::Failed },
                helper: relay,
                rate,
                success_probability: ps,
                throughput: first_path.unwrap_or(0.0),
                attempts,
                backoffs,
                frames,
            };
        }
        backoffs += 1;
    }
}
