//! Harmonic extension with the 1/5-2/5 rule, checked against a brute-force energy minimiser.

use sgasket::addressing::{build_lattice, Word};
use sgasket::harmonic::{extend_to_level, graph_energy, harmonic_extend_cell, DiscreteFn, MinEnergyOracle};
use sgasket::scalar::{q, Q};

fn main() -> sgasket::error::Result<()> {
    let b: [Q; 3] = [q(1, 1), q(0, 1), q(-1, 2)];
    for s in ["1", "2", "3", "12", "123"] {
        let t = harmonic_extend_cell(&b, &Word::parse(s)?);
        println!("F_{s}: {} {} {}", t[0], t[1], t[2]);
    }

    let base = DiscreteFn::new(&build_lattice(0, 1, u128::MAX)?, b.to_vec())?;
    for m in 0..=4 {
        let f = extend_to_level(&base, m, u128::MAX)?;
        let e = graph_energy(&build_lattice(m, 1, u128::MAX)?, &f.values);
        println!("level {m}: {} vertices, energy {e}", f.values.len());
    }

    // the minimiser of the level-2 energy with the level-1 values fixed
    let coarse = extend_to_level(&base, 1, u128::MAX)?;
    let oracle = MinEnergyOracle::<Q>::new(1)?;
    let direct = extend_to_level(&coarse, 2, u128::MAX)?;
    println!("oracle agrees: {}", oracle.extend(&coarse)?.values == direct.values);
    Ok(())
}
