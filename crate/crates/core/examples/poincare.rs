//! Discrete Poincare constants on S0 and on S0^2.

use sgasket::sobolev::poincare_estimate;

fn main() -> sgasket::error::Result<()> {
    for m in 0..=5 {
        let r = poincare_estimate(m, 1, u128::MAX)?;
        println!("n=1 m={m}: C = {:.8} ({} vertices, residual {:.1e})", r.constant, r.vertices, r.residual);
    }
    for m in 0..=2 {
        let r = poincare_estimate(m, 2, u128::MAX)?;
        println!("n=2 m={m}: C = {:.8}", r.constant);
    }
    Ok(())
}
