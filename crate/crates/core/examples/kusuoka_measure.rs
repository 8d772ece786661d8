//! Kusuoka and energy measures on cells, Radon-Nikodym ratios and the sharp scaling conditions.

use sgasket::addressing::{Cell, Word};
use sgasket::measure::{
    cell_measure, condition_check, extremal_f1_ratio, rn_ratio, standard_sample, Direction, MeasureKind,
};
use sgasket::scalar::{q, q_to_f64};
use sgasket::sobolev::delta_s;

fn main() -> sgasket::error::Result<()> {
    let energy = MeasureKind::HarmonicEnergy { boundary: [q(1, 1), q(0, 1), q(0, 1)] };
    for s in ["", "1", "2", "11", "23", "312"] {
        let cell = Cell::of(0, &Word::parse(s)?);
        let mu = cell_measure(&MeasureKind::Kusuoka, &cell)?;
        let e = cell_measure(&energy, &cell)?;
        println!("{:>4}  mu = {mu:<10} mu<h1> = {e}", if s.is_empty() { "S0" } else { s });
    }

    let r = rn_ratio(&Word::parse("11")?, &Word::parse("233")?)?;
    println!("ratio {} in [{}, {}]", r.ratio, r.lower, r.upper);
    for k in [5, 10, 20] {
        println!("extremal ratio m=2 k={k}: {:.6e} (1/225 = {:.6e})", q_to_f64(&extremal_f1_ratio(2, k)?), 1.0 / 225.0);
    }

    let ds = delta_s();
    let sample = standard_sample(1, 6, 3);
    let m = condition_check(&MeasureKind::Kusuoka, 1.0, ds, 1.0, &sample, Direction::M)?;
    let lo = 1.0 / (1.0 + 1.0 / ds);
    let mp = condition_check(&MeasureKind::Kusuoka, lo, 1.0, 2.0, &sample, Direction::MPrime)?;
    println!("(M): {} cells, {} violations, C = {:.4}", m.checked, m.violations.len(), m.observed_constant);
    println!("(M'): {} cells, {} violations, C = {:.4}", mp.checked, mp.violations.len(), mp.observed_constant);
    Ok(())
}
