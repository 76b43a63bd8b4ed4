// Throughput contour around a Type C link, written as CSV.

use coopmac::figures::contour_table;
use coopmac::output::{write_csv, Dataset};
use coopmac::{contour_grid, ChannelParams, Regime};

pub fn run_example() -> coopmac::Result<()> {
    let p = ChannelParams::reference();
    let grid = contour_grid(Regime::C, 70.9, 1.0, &p)?;
    let top = grid.max(None).expect("tier regions are non-empty");
    println!("peak {:.3} Mbps at ({}, {})", top.throughput.unwrap(), top.x, top.y);
    for tier in 1..=3 {
        let hi = grid.max(Some(tier)).unwrap().throughput.unwrap();
        let lo = grid.min(Some(tier)).unwrap().throughput.unwrap();
        println!("tier {tier}: {lo:.3} .. {hi:.3} Mbps");
    }
    println!("{:.0}% of tier-1 positions exceed 4.5 Mbps", 100.0 * grid.fraction_above(1, 4.5));

    let table: Dataset = contour_table(&grid);
    let path = std::env::temp_dir().join("coopmac_contour_c.csv");
    write_csv(&table, std::fs::File::create(&path)?)?;
    println!("{} points written to {}", table.rows.len(), path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
