//! Log-distance path loss with log-normal shadowing.
//!
//! Received power in dBm is `P_t + K - 10·α·log10(d) + ψ` with `ψ ~ N(0, σ²)`.
//! A hop succeeds when the received power clears the threshold, so its
//! success probability is `Q(ν + μ·log10(d))` where
//! `ν = (γ_th - P_t - K)/σ` and `μ = 10·α/σ`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radio parameters shared by every node.
///
/// Only the base quantities are stored; `nu` and `mu` are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pt_dbm: f64,
    threshold_dbm: f64,
    k_db: f64,
    alpha: f64,
    sigma_db: f64,
}

impl ChannelParams {
    pub const ALPHA_RANGE: (f64, f64) = (2.0, 7.0);

    pub fn new(pt_dbm: f64, threshold_dbm: f64, k_db: f64, alpha: f64, sigma_db: f64) -> Result<Self> {
        for (name, v) in [
            ("pt_dbm", pt_dbm),
            ("threshold_dbm", threshold_dbm),
            ("k_db", k_db),
            ("alpha", alpha),
            ("sigma_db", sigma_db),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(Self::ALPHA_RANGE.0..=Self::ALPHA_RANGE.1).contains(&alpha) {
            return Err(Error::invalid("alpha", format!("must lie in [2, 7], got {alpha}")));
        }
        if sigma_db <= 0.0 {
            return Err(Error::invalid("sigma_db", format!("must be > 0, got {sigma_db}")));
        }
        Ok(Self {
            pt_dbm,
            threshold_dbm,
            k_db,
            alpha,
            sigma_db,
        })
    }

    /// The 802.11b evaluation setup: 1 mW, -98 dBm, α = 3, σ = 6 dB, K = -40 dB.
    pub fn reference() -> Self {
        Self {
            pt_dbm: mw_to_dbm(1.0),
            threshold_dbm: -98.0,
            k_db: -40.0,
            alpha: 3.0,
            sigma_db: 6.0,
        }
    }

    pub fn pt_dbm(&self) -> f64 {
        self.pt_dbm
    }
    pub fn threshold_dbm(&self) -> f64 {
        self.threshold_dbm
    }
    pub fn k_db(&self) -> f64 {
        self.k_db
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn sigma_db(&self) -> f64 {
        self.sigma_db
    }

    pub fn nu(&self) -> f64 {
        (self.threshold_dbm - self.pt_dbm - self.k_db) / self.sigma_db
    }

    pub fn mu(&self) -> f64 {
        10.0 * self.alpha / self.sigma_db
    }

    /// Argument of the Q-function for a hop of length `distance`.
    pub fn q_argument(&self, distance: f64) -> f64 {
        self.nu() + self.mu() * distance.log10()
    }

    /// Deterministic part of the received power (no shadowing), in dBm.
    pub fn mean_received_dbm(&self, distance: f64) -> f64 {
        self.pt_dbm + self.k_db - 10.0 * self.alpha * distance.log10()
    }

    /// Success probability without argument validation. Callers guarantee `distance > 0`.
    #[inline]
    pub(crate) fn ps(&self, distance: f64) -> f64 {
        q_function(self.q_argument(distance))
    }

    #[inline]
    pub(crate) fn g(&self, l1: f64, l2: f64) -> f64 {
        self.ps(l1) * self.ps(l2)
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::reference()
    }
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Gaussian tail probability `Q(x) = P(Z > x)`, evaluated through `erfc`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn check_distance(name: &'static str, distance: f64) -> Result<()> {
    if distance > 0.0 && distance.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be a positive distance, got {distance}")))
    }
}

/// Probability that a single hop of length `distance` is received above threshold.
pub fn p_success_direct(distance: f64, params: &ChannelParams) -> Result<f64> {
    check_distance("distance", distance)?;
    Ok(params.ps(distance))
}

/// Joint success probability of a two-hop relay path with independent shadowing per hop.
pub fn g_joint(l1: f64, l2: f64, params: &ChannelParams) -> Result<f64> {
    check_distance("l1", l1)?;
    check_distance("l2", l2)?;
    Ok(params.g(l1, l2))
}

/// One received-power draw in dBm: path loss plus a fresh shadowing term.
pub fn shadowing_sample<R: Rng + ?Sized>(distance: f64, params: &ChannelParams, rng: &mut R) -> Result<f64> {
    check_distance("distance", distance)?;
    Ok(draw_received_dbm(distance, params, rng))
}

pub(crate) fn draw_received_dbm<R: Rng + ?Sized>(distance: f64, params: &ChannelParams, rng: &mut R) -> f64 {
    // sigma > 0 is a constructor invariant
    let shadow = Normal::new(0.0, params.sigma_db).expect("sigma validated at construction");
    params.mean_received_dbm(distance) + shadow.sample(rng)
}

/// Draws whether one transmission over `distance` clears the receive threshold.
pub(crate) fn draw_hop_success<R: Rng + ?Sized>(distance: f64, params: &ChannelParams, rng: &mut R) -> bool {
    draw_received_dbm(distance, params, rng) >= params.threshold_dbm
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent reference: Maclaurin series of erf, summed to convergence.
    /// Good to ~1e-15 for |x| <= 3 in f64.
    fn q_series(x: f64) -> f64 {
        let z = x / std::f64::consts::SQRT_2;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -z * z / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        let erf = 2.0 / std::f64::consts::PI.sqrt() * sum;
        0.5 * (1.0 - erf)
    }

    #[test]
    fn derived_nu_mu_for_reference() {
        let p = ChannelParams::reference();
        assert!((p.nu() - (-58.0 / 6.0)).abs() < 1e-12);
        assert!((p.mu() - 5.0).abs() < 1e-12);
        assert_eq!(p.pt_dbm(), 0.0);
    }

    #[test]
    fn q_function_matches_series_oracle() {
        for i in -300..=300 {
            let x = i as f64 * 0.01;
            assert!((q_function(x) - q_series(x)).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(q_function(0.0), 0.5);
        for x in [0.3, 1.25, 2.04] {
            assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-15);
        }
        assert!((q_function(-1.25143) - 0.89461).abs() < 1e-5);
    }

    #[test]
    fn direct_success_reference_points() {
        let p = ChannelParams::reference();
        for (d, want) in [(48.2, 0.8946), (67.1, 0.7030), (100.0, 0.3694)] {
            let got = p_success_direct(d, &p).unwrap();
            let oracle = q_series(-58.0 / 6.0 + 5.0 * f64::log10(d));
            assert!((got - oracle).abs() < 1e-12);
            assert!((got - want).abs() < 1e-4, "d = {d}: {got}");
        }
    }

    #[test]
    fn joint_success_reference_points() {
        let p = ChannelParams::reference();
        let ps48 = p_success_direct(48.2, &p).unwrap();
        assert!((g_joint(48.2, 48.2, &p).unwrap() - ps48 * ps48).abs() < 1e-15);
        assert!((g_joint(48.2, 48.2, &p).unwrap() - 0.8003).abs() < 1e-4);
        assert!((g_joint(48.2, 67.1, &p).unwrap() - 0.6289).abs() < 1e-4);
        assert!((g_joint(35.0, 35.0, &p).unwrap() - 0.9490).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ChannelParams::reference();
        assert!(p_success_direct(0.0, &p).is_err());
        assert!(p_success_direct(-3.0, &p).is_err());
        assert!(g_joint(10.0, 0.0, &p).is_err());
        assert!(ChannelParams::new(0.0, -98.0, -40.0, 9.0, 6.0).is_err());
        assert!(ChannelParams::new(0.0, -98.0, -40.0, 3.0, 0.0).is_err());
        assert!(ChannelParams::new(0.0, -98.0, -40.0, 1.9, 6.0).is_err());
        assert!(ChannelParams::new(f64::NAN, -98.0, -40.0, 3.0, 6.0).is_err());
    }

    #[test]
    fn monotone_in_distance() {
        let p = ChannelParams::reference();
        let mut prev = 1.0;
        for i in 1..=200 {
            let v = p.ps(i as f64 * 0.5);
            assert!(v < prev || v == 1.0);
            prev = v;
        }
        assert!(p.g(30.0, 40.0) > p.g(31.0, 40.0));
        assert!(p.g(30.0, 40.0) > p.g(30.0, 41.0));
    }

    #[test]
    fn helper_hops_have_negative_q_argument() {
        let p = ChannelParams::reference();
        for i in 1..=747 {
            assert!(p.q_argument(i as f64 * 0.1) < 0.0);
        }
        // the assumption Ps > 0.5 on the full range does not hold
        assert!(p.ps(100.0) < 0.5);
    }

    #[test]
    fn midpoint_maximises_on_segment_product() {
        let p = ChannelParams::reference();
        for r in [70.0, 90.0] {
            let step = r / 2000.0;
            let (mut best_x, mut best) = (0.0, f64::MIN);
            for i in 1..2000 {
                let x = i as f64 * step;
                let v = p.g(x, r - x);
                if v > best {
                    best = v;
                    best_x = x;
                }
            }
            assert!((best_x - r / 2.0).abs() <= step);
        }
    }

    #[test]
    fn vanishing_shadow_gives_path_loss() {
        let p = ChannelParams::new(0.0, -98.0, -40.0, 3.0, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = shadowing_sample(100.0, &p, &mut rng).unwrap();
        assert!((v - (-100.0)).abs() < 1e-9);
    }

    #[test]
    fn empirical_draws_match_closed_form() {
        let p = ChannelParams::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let hits = (0..n).filter(|_| draw_hop_success(48.2, &p, &mut rng)).count();
        let freq = hits as f64 / n as f64;
        let ps = p.ps(48.2);
        let se = (ps * (1.0 - ps) / n as f64).sqrt();
        assert!((freq - ps).abs() < 4.0 * se);
    }
}
