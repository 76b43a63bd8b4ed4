//! Per-position cooperative throughput around a fixed source–destination pair.
//!
//! The source sits at `(-r_k/2, 0)` and the destination at `(r_k/2, 0)`, so the
//! origin is the midpoint of the link and always lies on the grid.

use serde::{Deserialize, Serialize};

use crate::bounds::Regime;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{classify_helper_tier, Point2D};
use crate::protocol::{tier_rate, C_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub x: f64,
    pub y: f64,
    /// `None` outside every tier region.
    pub tier: Option<u8>,
    /// `R_Coop · G(d_SH, d_HD)` in Mbps, `None` outside every tier region.
    pub throughput: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub regime: Regime,
    pub r_k: f64,
    pub resolution: f64,
    pub source: Point2D,
    pub dest: Point2D,
    pub points: Vec<ContourPoint>,
}

impl ContourGrid {
    /// Largest throughput on the grid, optionally restricted to one tier.
    pub fn max(&self, tier: Option<u8>) -> Option<&ContourPoint> {
        self.points
            .iter()
            .filter(|p| p.throughput.is_some() && (tier.is_none() || p.tier == tier))
            .max_by(|a, b| a.throughput.unwrap().total_cmp(&b.throughput.unwrap()))
    }

    pub fn min(&self, tier: Option<u8>) -> Option<&ContourPoint> {
        self.points
            .iter()
            .filter(|p| p.throughput.is_some() && (tier.is_none() || p.tier == tier))
            .min_by(|a, b| a.throughput.unwrap().total_cmp(&b.throughput.unwrap()))
    }

    /// Fraction of tier-`tier` points whose throughput exceeds `threshold`.
    pub fn fraction_above(&self, tier: u8, threshold: f64) -> f64 {
        let (mut n, mut hit) = (0usize, 0usize);
        for p in self.points.iter().filter(|p| p.tier == Some(tier)) {
            n += 1;
            if p.throughput.unwrap() > threshold {
                hit += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            hit as f64 / n as f64
        }
    }
}

/// Midpoint of the regime's link-length range.
pub fn default_contour_distance(regime: Regime) -> f64 {
    let (lo, hi) = regime.range();
    0.5 * (lo + hi)
}

/// Throughput at every grid point of the box that holds all tier regions.
pub fn contour_grid(regime: Regime, r_k: f64, resolution: f64, params: &ChannelParams) -> Result<ContourGrid> {
    if !regime.is_cooperative() {
        return Err(Error::invalid("class", format!("regime {regime} has no helper tiers")));
    }
    if !regime.accepts(r_k) {
        let (lo, hi) = regime.range();
        return Err(Error::invalid("r_k", format!("{r_k} m is outside the {regime} range [{lo}, {hi}]")));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("resolution", format!("must be > 0, got {resolution}")));
    }
    let class = regime.link_class();
    let half = 0.5 * r_k;
    let source = Point2D::new(-half, 0.0);
    let dest = Point2D::new(half, 0.0);
    let x_max = C_MAX - half;
    let y_max = (C_MAX * C_MAX - half * half).sqrt();
    let nx = (x_max / resolution).floor() as i64;
    let ny = (y_max / resolution).floor() as i64;

    let mut points = Vec::with_capacity(((2 * nx + 1) * (2 * ny + 1)) as usize);
    for j in -ny..=ny {
        for i in -nx..=nx {
            let p = Point2D::new(i as f64 * resolution, j as f64 * resolution);
            let (d_sh, d_hd) = (p.distance(&source), p.distance(&dest));
            let tier = if d_sh > 0.0 && d_hd > 0.0 {
                classify_helper_tier(d_sh, d_hd, class)
            } else {
                None
            };
            let throughput = tier.map(|t| tier_rate(class, t).expect("classified tier exists") * params.g(d_sh, d_hd));
            points.push(ContourPoint {
                x: p.x,
                y: p.y,
                tier,
                throughput,
            });
        }
    }
    Ok(ContourGrid {
        regime,
        r_k,
        resolution,
        source,
        dest,
        points,
    })
}

/// Position and value of the largest and smallest two-hop success probability
/// `G` among grid points of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierExtremes {
    pub tier: u8,
    pub argmax: Point2D,
    pub max_g: f64,
    pub argmin: Point2D,
    pub min_g: f64,
}

/// Grid search for the extremes of `G` over the tier-`tier` region.
pub fn tier_extremes(regime: Regime, tier: u8, r_k: f64, step: f64, params: &ChannelParams) -> Result<TierExtremes> {
    let grid = contour_grid(regime, r_k, step, params)?;
    let mut best: Option<(Point2D, f64)> = None;
    let mut worst: Option<(Point2D, f64)> = None;
    for p in grid.points.iter().filter(|p| p.tier == Some(tier)) {
        let q = Point2D::new(p.x, p.y);
        let g = params.g(q.distance(&grid.source), q.distance(&grid.dest));
        if best.is_none_or(|(_, v)| g > v) {
            best = Some((q, g));
        }
        if worst.is_none_or(|(_, v)| g < v) {
            worst = Some((q, g));
        }
    }
    match (best, worst) {
        (Some((argmax, max_g)), Some((argmin, min_g))) => Ok(TierExtremes {
            tier,
            argmax,
            max_g,
            argmin,
            min_g,
        }),
        _ => Err(Error::invalid("tier", format!("tier {tier} has no grid point at r_k = {r_k}"))),
    }
}
