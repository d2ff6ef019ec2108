//! Verified periodic cycles from inverse-branch covering, and the mapping
//! properties the period bounds rest on.

use innerdyn::measures::SeededSampler;
use innerdyn::periodic::{check_mapping_properties, find_periodic};
use innerdyn::{GeneralizedBoole, MapSpec};

#[allow(clippy::approx_constant)] // a center near 1/√2, not the point itself
fn main() -> innerdyn::Result<()> {
    let map = MapSpec::boole().build()?;
    let two = find_periodic(&map, 0.7071, 0.05)?;
    println!(
        "from 0.7071: point {:.15}, period {}, residual {:.1e}, bound {:.1}",
        two.point, two.period, two.residual, two.bound
    );

    let mut sampler = SeededSampler::new(3);
    for c in sampler.sample_lambda(5) {
        let p = find_periodic(&map, c, 0.05)?;
        println!(
            "center {c:>9.4}: period {:>3} <= {:>8.1}, word {:?}, verified {}",
            p.period,
            p.bound,
            p.branch_word,
            p.verified()
        );
    }

    let report = check_mapping_properties(&GeneralizedBoole::boole(), 1_000, 0.5, 10.0)?;
    for c in &report.clauses {
        println!(
            "{:<20} pass {} (worst {:.3}, limit {:.3})",
            c.clause, c.pass, c.worst, c.limit
        );
    }
    Ok(())
}
