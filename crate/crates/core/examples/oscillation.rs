//! Oscillation decay on cells and polynomial growth on blow-up windows.

use sgasket::harmonic::{bump_phi0, h};
use sgasket::sobolev::{growth_report, oscillation_decay_report, sample_functions};

fn main() -> sgasket::error::Result<()> {
    let rep = oscillation_decay_report(&h(1), 2.0, 6, 0)?;
    println!("h1, r=2, alpha = {:.5}", rep.alpha_r);
    for l in &rep.levels {
        println!("  m={} max ratio {:.6} at {}", l.m, l.max_ratio, l.argmax);
    }

    let g = growth_report(&bump_phi0(), 0, 2.0, 4, 0)?;
    println!("phi0 growth, beta = {:.5}, pass = {}", g.beta_r, g.pass);
    for row in &g.rows {
        println!("  m={} osc {:.4} bound {:.4}", row.m, row.osc, row.bound);
    }

    let v = sample_functions(2, 2, 1, 11)?.remove(0);
    let g2 = growth_report(&v, 0, 4.0, 2, 0)?;
    println!("random sample on S0^2, r=4: worst ratio {:.4}", g2.rows.iter().map(|r| r.ratio).fold(0.0, f64::max));
    Ok(())
}
