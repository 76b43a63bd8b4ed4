// One Poisson field, one Type C link, and the two selection schemes side by side.

use coopmac::{
    enumerate_candidates, run_exchange, sample_ppp, select_helper_conventional, select_helper_proposed,
    ChannelParams, ExchangeMode, Point2D, Window,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> coopmac::Result<()> {
    let p = ChannelParams::reference();
    let window = Window::centered(Point2D::new(0.0, 0.0), 200.0)?;
    let field = sample_ppp(0.002, window, 17)?;
    let (source, dest) = (Point2D::new(-35.0, 0.0), Point2D::new(35.0, 0.0));

    let candidates = enumerate_candidates(&field, source, dest, &p)?;
    println!("{} nodes, {} beneficial helpers", field.nodes().len(), candidates.len());

    let proposed = select_helper_proposed(&candidates);
    for h in proposed.iter().take(5) {
        println!(
            "tier {} at ({:6.1}, {:6.1})  d_sh {:5.1}  d_hd {:5.1}  rate {:.2}  G {:.4}",
            h.tier, h.position.x, h.position.y, h.d_sh, h.d_hd, h.rate, h.g_score
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let conventional = select_helper_conventional(&candidates, &mut rng);
    for (name, order) in [("proposed", &proposed), ("conventional", &conventional)] {
        let analytic = run_exchange(order, 70.0, &p, ExchangeMode::Analytic, &mut rng)?;
        let sampled = run_exchange(order, 70.0, &p, ExchangeMode::sampled(), &mut rng)?;
        println!(
            "{name:>12}: expected {:.3} Mbps, one sampled exchange {:?} after {} attempt(s)",
            analytic.throughput, sampled.mode, sampled.attempts
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
