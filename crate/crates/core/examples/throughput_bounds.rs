// Upper and lower bounds per link regime, and their sum, across densities.

use coopmac::{averaged_bounds, averaged_total_bounds, tier_bound_pair, ChannelParams, Conditioning, Regime};

pub fn run_example() -> coopmac::Result<()> {
    let p = ChannelParams::reference();
    let pair = tier_bound_pair(Regime::C, 1, 70.0, &p)?;
    println!("tier-1 helper on a 70 m link: [{:.3}, {:.3}] Mbps", pair.lower, pair.upper);

    for density in [0.0005, 0.002, 0.005] {
        let c = Conditioning::Ppp { density };
        print!("lambda {density:<7}");
        for regime in Regime::COOPERATIVE {
            let b = averaged_bounds(regime, c, &p)?;
            print!("  {regime}: [{:.3}, {:.3}]", b.lower, b.upper);
        }
        let t = averaged_total_bounds(c, &p)?;
        println!("  total: [{:.3}, {:.3}]", t.lower, t.upper);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
