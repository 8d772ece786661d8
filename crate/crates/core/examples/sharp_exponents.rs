use sgasket::addressing::Word;
use sgasket::extremal::sharp_delta_report;

fn main() {
    let ev = sharp_delta_report(8, &[10, 20, 40, 80, 160], &Word::parse("312").unwrap(), 12);
    println!("{} cells, {} upper / {} lower violations", ev.cells_checked, ev.upper_violations.len(), ev.lower_violations.len());
    println!("along 1^m, target {:.5}", ev.target_small);
    for p in &ev.ones {
        println!("  m={:>3}  exponent {:.5}  slope {:?}", p.m, p.exponent, p.slope);
    }
    println!("along (312)^k, target {:.5}", ev.target_large);
    for p in ev.periodic.iter().step_by(4) {
        println!("  m={:>3}  exponent {:.5}", p.m, p.exponent);
    }
}
