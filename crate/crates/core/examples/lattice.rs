//! Builds the level-2 lattice of the gasket and of its square, and walks a few cells.

use sgasket::addressing::{build_lattice, Cell, ProductWord, Word, DEFAULT_BUDGET};

fn main() -> sgasket::error::Result<()> {
    for n in 1..=2 {
        let lat = build_lattice(2, n, DEFAULT_BUDGET)?;
        println!(
            "n={n}: {} vertices, {} edges, {} cells, connected={}",
            lat.vertex_count(),
            lat.edges().len(),
            lat.cell_count(),
            lat.is_connected()
        );
    }

    let w = Word::parse("312")?;
    println!("word {w} has index {} among words of length 3", w.index());

    let pw = ProductWord::parse("1,2;3,3", 2)?;
    let cell = Cell::new(1, pw);
    println!("cell {cell}: level {}, diameter {}", cell.level(), cell.diameter());
    for child in cell.children().iter().take(3) {
        println!("  child {child} corners {:?}", child.corner_coordinates()[0]);
    }
    Ok(())
}
