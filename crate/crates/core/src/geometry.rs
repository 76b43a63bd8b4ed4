//! Planar geometry of the helper search: Poisson node fields, circle lenses,
//! tier-region areas and the k-th nearest-neighbour distance law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::protocol::{tier_of_bands, LinkClass, B_MAX, C_MAX, A_MAX};

/// Largest link distance at which a tier-1 helper (both hops under 48.2 m) can exist.
pub const TIER1_MAX_LINK: f64 = 2.0 * A_MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let w = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) || x_max <= x_min || y_max <= y_min {
            return Err(Error::invalid("window", format!("degenerate window {w:?}")));
        }
        Ok(w)
    }

    /// Square of side `2·half_width` centred on `center`.
    pub fn centered(center: Point2D, half_width: f64) -> Result<Self> {
        Self::new(
            center.x - half_width,
            center.x + half_width,
            center.y - half_width,
            center.y + half_width,
        )
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
    pub fn center(&self) -> Point2D {
        Point2D::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// One sampled homogeneous Poisson field. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    density: f64,
    window: Window,
    nodes: Vec<Point2D>,
}

impl NetworkRealization {
    pub fn density(&self) -> f64 {
        self.density
    }
    pub fn window(&self) -> &Window {
        &self.window
    }
    pub fn nodes(&self) -> &[Point2D] {
        &self.nodes
    }

    /// Builds a realization from explicit positions; used for hand-made scenarios.
    pub fn from_nodes(density: f64, window: Window, nodes: Vec<Point2D>) -> Result<Self> {
        check_density(density)?;
        if let Some(p) = nodes.iter().find(|p| !window.contains(p)) {
            return Err(Error::invalid("nodes", format!("{p:?} lies outside the window")));
        }
        Ok(Self { density, window, nodes })
    }
}

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("density", format!("must be > 0, got {density}")))
    }
}

/// Samples a Poisson field of intensity `density` (nodes/m²) on `window`.
pub fn sample_ppp(density: f64, window: Window, seed: u64) -> Result<NetworkRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ppp_with(density, window, &mut rng)
}

pub fn sample_ppp_with<R: Rng + ?Sized>(density: f64, window: Window, rng: &mut R) -> Result<NetworkRealization> {
    check_density(density)?;
    if window.area() <= 0.0 {
        return Err(Error::invalid("window", "empty window"));
    }
    let mean = density * window.area();
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid("density", e.to_string()))?
        .sample(rng) as usize;
    let nodes = (0..count)
        .map(|_| {
            Point2D::new(
                window.x_min + rng.random::<f64>() * window.width(),
                window.y_min + rng.random::<f64>() * window.height(),
            )
        })
        .collect();
    Ok(NetworkRealization { density, window, nodes })
}

/// Area of the intersection of two discs of radii `r1`, `r2` whose centres are `separation` apart.
pub fn lens_area(r1: f64, r2: f64, separation: f64) -> f64 {
    let l = separation;
    if l >= r1 + r2 {
        return 0.0;
    }
    if l <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let c1 = ((l * l + r1 * r1 - r2 * r2) / (2.0 * l * r1)).clamp(-1.0, 1.0);
    let c2 = ((l * l + r2 * r2 - r1 * r1) / (2.0 * l * r2)).clamp(-1.0, 1.0);
    let k = (-l + r1 + r2) * (l + r1 - r2) * (l - r1 + r2) * (l + r1 + r2);
    r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - 0.5 * k.max(0.0).sqrt()
}

/// Areas of the helper-tier regions for a link of length `link_distance`.
///
/// Index 0 holds tier 1. Type C links have three tiers, type D links five.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAreas {
    pub link_class: LinkClass,
    pub link_distance: f64,
    pub areas: Vec<f64>,
}

impl RegionAreas {
    /// Area of tier `tier` (1-based).
    pub fn tier(&self, tier: usize) -> f64 {
        self.areas[tier - 1]
    }

    pub fn total(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Area of the disc around the destination that contains every tier region.
    pub fn disc_area(&self) -> f64 {
        PI * self.link_distance * self.link_distance
    }
}

pub fn tier_region_areas(link_class: LinkClass, r_k: f64) -> Result<RegionAreas> {
    let lens = |a: f64, b: f64| lens_area(a, b, r_k);
    let areas = match link_class {
        LinkClass::C => {
            if !(LinkClass::C.min_distance()..=C_MAX).contains(&r_k) {
                return Err(Error::invalid("r_k", format!("{r_k} m is outside the type C range [67.1, 74.7]")));
            }
            let u1 = lens(A_MAX, A_MAX);
            let u2 = 2.0 * (lens(B_MAX, A_MAX) - u1);
            let u3 = lens(B_MAX, B_MAX) - 2.0 * lens(B_MAX, A_MAX) + u1;
            vec![u1, u2, u3]
        }
        LinkClass::D => {
            if !(C_MAX..=LinkClass::MAX_RANGE).contains(&r_k) {
                return Err(Error::invalid("r_k", format!("{r_k} m is outside the type D range [74.7, 100]")));
            }
            let v1 = if r_k > TIER1_MAX_LINK { 0.0 } else { lens(A_MAX, A_MAX) };
            let v2 = 2.0 * (lens(A_MAX, B_MAX) - v1);
            let v3 = lens(B_MAX, B_MAX) - v2 - v1;
            let v4 = 2.0 * (lens(A_MAX, C_MAX) - v1) - v2;
            let v5 = 2.0 * (lens(B_MAX, C_MAX) - lens(B_MAX, B_MAX)) - v4;
            vec![v1, v2, v3, v4, v5]
        }
        other => {
            return Err(Error::invalid(
                "link_class",
                format!("type {other} links have no helper tiers"),
            ))
        }
    };
    // cancellation in the inclusion-exclusion can leave -1e-12 residue
    let areas = areas.into_iter().map(|a| a.max(0.0)).collect();
    Ok(RegionAreas {
        link_class,
        link_distance: r_k,
        areas,
    })
}

/// Tier (1-based) of a helper at hop distances `(d_sh, d_hd)`, or `None` when it cannot raise the rate.
pub fn classify_helper_tier(d_sh: f64, d_hd: f64, link_class: LinkClass) -> Option<u8> {
    let sh = LinkClass::of_hop(d_sh)?;
    let hd = LinkClass::of_hop(d_hd)?;
    tier_of_bands(link_class, sh, hd)
}

/// Density of the distance from a point of a Poisson field to its k-th nearest neighbour.
pub fn nn_distance_pdf(k: u32, density: f64, r: f64) -> f64 {
    if r <= 0.0 || k == 0 {
        return 0.0;
    }
    let x = density * PI * r * r;
    let ln_fact: f64 = (1..k).map(|i| (i as f64).ln()).sum();
    (std::f64::consts::LN_2 - x + k as f64 * x.ln() - r.ln() - ln_fact).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;

    /// Fraction of `n` uniform samples in the bounding box that satisfy `inside`, times the box area.
    fn mc_area(n: usize, seed: u64, half: f64, inside: impl Fn(f64, f64) -> bool) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hits = (0..n)
            .filter(|_| {
                let x = (rng.random::<f64>() * 2.0 - 1.0) * half;
                let y = (rng.random::<f64>() * 2.0 - 1.0) * half;
                inside(x, y)
            })
            .count();
        hits as f64 / n as f64 * (2.0 * half).powi(2)
    }

    #[test]
    fn lens_degenerate_cases() {
        assert!((lens_area(48.2, 48.2, 0.0) - PI * 48.2 * 48.2).abs() < 1e-9);
        assert!((lens_area(48.2, 48.2, 0.0) - 7299.0).abs() < 0.5);
        assert_eq!(lens_area(48.2, 48.2, 96.4), 0.0);
        assert_eq!(lens_area(10.0, 5.0, 20.0), 0.0);
        assert!((lens_area(10.0, 5.0, 3.0) - PI * 25.0).abs() < 1e-9);
    }

    #[test]
    fn lens_matches_point_counting() {
        // centres at (-35, 0) and (35, 0)
        let mc = mc_area(2_000_000, 1, 50.0, |x, y| {
            (x + 35.0).hypot(y) < 48.2 && (x - 35.0).hypot(y) < 48.2
        });
        let a = lens_area(48.2, 48.2, 70.0);
        assert!((a - 1202.0).abs() < 1.0, "{a}");
        assert!((a - mc).abs() / a < 0.01, "{a} vs {mc}");
    }

    #[test]
    fn type_c_regions_partition_outer_lens() {
        for r in [67.1, 70.0, 72.5, 74.7] {
            let ra = tier_region_areas(LinkClass::C, r).unwrap();
            assert!((ra.total() - lens_area(67.1, 67.1, r)).abs() < 1e-9);
            assert!((ra.tier(1) - lens_area(48.2, 48.2, r)).abs() < 1e-12);
            assert!(ra.total() <= ra.disc_area());
        }
    }

    #[test]
    fn type_d_tier1_vanishes_past_96_4() {
        let ra = tier_region_areas(LinkClass::D, 97.0).unwrap();
        assert_eq!(ra.tier(1), 0.0);
        let ra = tier_region_areas(LinkClass::D, 90.0).unwrap();
        assert!(ra.tier(1) > 0.0);
        assert!(ra.areas.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn region_areas_reject_out_of_range() {
        assert!(tier_region_areas(LinkClass::C, 80.0).is_err());
        assert!(tier_region_areas(LinkClass::D, 101.0).is_err());
        assert!(tier_region_areas(LinkClass::A, 30.0).is_err());
    }

    #[test]
    fn region_areas_match_membership_counting() {
        for (class, r) in [(LinkClass::C, 70.0), (LinkClass::D, 90.0)] {
            let ra = tier_region_areas(class, r).unwrap();
            let s = Point2D::new(-r / 2.0, 0.0);
            let d = Point2D::new(r / 2.0, 0.0);
            for tier in 1..=ra.areas.len() as u8 {
                let mc = mc_area(1_000_000, tier as u64, 80.0, |x, y| {
                    let p = Point2D::new(x, y);
                    classify_helper_tier(p.distance(&s), p.distance(&d), class) == Some(tier)
                });
                let a = ra.tier(tier as usize);
                let se = (a * (25600.0 - a) / 1e6).sqrt();
                assert!((mc - a).abs() < 4.0 * se + 1e-9, "{class} tier {tier}: {a} vs {mc}");
            }
        }
    }

    #[test]
    fn helper_tier_examples() {
        assert_eq!(classify_helper_tier(40.0, 40.0, LinkClass::C), Some(1));
        assert_eq!(classify_helper_tier(50.0, 40.0, LinkClass::D), Some(2));
        assert_eq!(classify_helper_tier(70.0, 70.0, LinkClass::C), None);
        assert_eq!(classify_helper_tier(48.2, 10.0, LinkClass::C), Some(2));
        assert_eq!(classify_helper_tier(70.0, 10.0, LinkClass::D), Some(4));
        assert_eq!(classify_helper_tier(70.0, 50.0, LinkClass::D), Some(5));
        assert_eq!(classify_helper_tier(10.0, 10.0, LinkClass::A), None);
    }

    #[test]
    fn nn_pdf_k1_closed_form() {
        let lam = 0.001;
        for r in [1.0, 10.0, 30.0] {
            let want = 2.0 * lam * PI * r * (-lam * PI * r * r).exp();
            assert!((nn_distance_pdf(1, lam, r) - want).abs() < 1e-15);
        }
        assert_eq!(nn_distance_pdf(3, lam, 0.0), 0.0);
        assert_eq!(nn_distance_pdf(3, lam, -2.0), 0.0);
    }

    #[test]
    fn nn_pdf_normalises() {
        for k in [1u32, 5, 20] {
            for lam in [0.0005, 0.005] {
                let upper = ((k as f64 + 12.0 * (k as f64).sqrt() + 40.0) / (PI * lam)).sqrt();
                let total = adaptive_simpson(|r| nn_distance_pdf(k, lam, r), 0.0, upper, 1e-10, 4000).value;
                assert!((total - 1.0).abs() < 1e-6, "k={k} lam={lam}: {total}");
            }
        }
    }

    #[test]
    fn ppp_is_deterministic_and_inside() {
        let w = Window::new(0.0, 1000.0, 0.0, 1000.0).unwrap();
        let a = sample_ppp(0.001, w, 9).unwrap();
        let b = sample_ppp(0.001, w, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.nodes().iter().all(|p| w.contains(p)));
        assert!(sample_ppp(0.0, w, 1).is_err());
        assert!(Window::new(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn ppp_mean_count() {
        let w = Window::new(0.0, 1000.0, 0.0, 1000.0).unwrap();
        let n = 400;
        let mean = (0..n).map(|s| sample_ppp(0.001, w, s).unwrap().nodes().len() as f64).sum::<f64>() / n as f64;
        // Poisson(1000): sd of the mean is sqrt(1000/400)
        assert!((mean - 1000.0).abs() < 3.0 * (1000.0f64 / n as f64).sqrt(), "{mean}");
    }
}
