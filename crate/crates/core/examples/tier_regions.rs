// Tier-region areas and how likely each tier is to be the one selected.

use coopmac::{tier_probabilities, tier_region_areas, Conditioning, LinkClass, Regime};

pub fn run_example() -> coopmac::Result<()> {
    for (class, regime, r) in [
        (LinkClass::C, Regime::C, 70.0),
        (LinkClass::D, Regime::D1, 85.0),
        (LinkClass::D, Regime::D2, 98.0),
    ] {
        let areas = tier_region_areas(class, r)?;
        println!("{regime} at {r} m: areas {:.0?} m^2", areas.areas);
        for c in [Conditioning::Ppp { density: 0.001 }, Conditioning::KNearest { k: 20, density: 0.001 }] {
            let v = tier_probabilities(regime, r, c)?;
            println!("  {:?}: tiers {:.3?} direct {:.3}", c.kind(), v.tiers, v.residual);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
