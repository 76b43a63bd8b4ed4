// A flat key = value configuration, its hash, and JSON output of the bounds.

use coopmac::config::parse_config_str;
use coopmac::figures::bounds_table;
use coopmac::output::{write_json, Format};

const CONFIG: &str = "
# shadowing a little harsher than the default
sigma_db = 7
lambda = 0.001, 0.004
class = D
conditioning = ppp
format = json
";

pub fn run_example() -> coopmac::Result<()> {
    let cfg = parse_config_str(CONFIG)?;
    assert_eq!(cfg.format, Format::Json);
    println!("config hash {}", cfg.hash());
    let exp = &cfg.experiment;
    let mut table = bounds_table(&exp.regimes, &exp.densities, exp.conditioning, &exp.channel)?;
    table.stamp(exp.seed, &cfg.hash());
    write_json(&table, std::io::stdout().lock())
}

#[allow(dead_code)]
fn main() -> coopmac::Result<()> {
    run_example()
}
