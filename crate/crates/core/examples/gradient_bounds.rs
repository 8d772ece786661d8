//! Cell-averaged gradients of h_i and of the bump, and their decay below a base cell.

use sgasket::addressing::{Cell, Word};
use sgasket::harmonic::h;
use sgasket::sobolev::{bump_gradient_check, essinf_decay_check, grad_sq_avg};

fn main() -> sgasket::error::Result<()> {
    for s in ["", "1", "2", "11", "123"] {
        let cell = Cell::of(0, &Word::parse(s)?);
        let g: Vec<String> = (1..=3).map(|i| grad_sq_avg(&h(i), &cell).map(|x| x.to_string())).collect::<Result<_, _>>()?;
        println!("{:>4}: {}", if s.is_empty() { "S0" } else { s }, g.join("  "));
    }

    let b = bump_gradient_check(8)?;
    println!("{} cells: max h avg {}, phi0 sqrt max {:.4} <= {:.4}", b.cells, b.h_max, b.phi_sqrt_max, b.phi_bound);

    for k in [4, 8, 12] {
        let e = essinf_decay_check(&Word::parse("21")?, k)?;
        println!("below 21, depth {k}: min {:.3e} at {}", e.min_float, e.argmin);
    }
    Ok(())
}
