// Hop success probability and link class against distance.

use coopmac::{classify_link, p_success_direct, ChannelParams};

pub fn run_example() -> coopmac::Result<()> {
    let p = ChannelParams::reference();
    println!("nu = {:.4}, mu = {:.1}", p.nu(), p.mu());
    println!("{:>8} {:>6} {:>10} {:>8}", "d [m]", "class", "rate", "Ps");
    for d in [10.0, 30.0, 48.2, 60.0, 67.1, 70.0, 74.7, 90.0, 100.0] {
        let class = classify_link(d)?;
        println!(
            "{d:>8.1} {class:>6} {:>10.2} {:>8.4}",
            class.direct_rate(),
            p_success_direct(d, &p)?
        );
    }
    let harsh = ChannelParams::new(0.0, -98.0, -40.0, 3.5, 8.0)?;
    println!("with alpha = 3.5, sigma = 8 dB: Ps(48.2) = {:.4}", p_success_direct(48.2, &harsh)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
