//! Exact search for the shortest M-word with complex spectrum and the growth along its powers.

use sgasket::addressing::Word;
use sgasket::extremal::{minimal_complex_word, periodic_limit, Generators};

fn main() -> sgasket::error::Result<()> {
    let gens = Generators::default();
    let scan = minimal_complex_word(4, u128::MAX, &gens)?;
    println!("{} words scanned", scan.rows.len());
    println!("shortest complex length: {:?}", scan.minimal_complex_length);
    println!("witnesses: {:?}", scan.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>());

    let lim = periodic_limit(&Word::parse("312")?, 12, &gens)?;
    for p in lim.values.iter().step_by(3) {
        println!("k={:>2}  {:.6}", p.k, p.value);
    }
    println!("limit {} ({})", lim.exact_limit.unwrap_or_default(), lim.limit_f64);
    Ok(())
}
