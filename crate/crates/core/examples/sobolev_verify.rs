//! Empirical Sobolev constants on seeded random samples, with a refinement check.

use sgasket::measure::MeasureKind;
use sgasket::sobolev::{delta_s, exponents, sobolev_verify, SobolevParams, VerifyOptions};

fn main() -> sgasket::error::Result<()> {
    let mut params = SobolevParams::with_hausdorff(1, 2.0, 2.0, 4.0);
    params.sigma = MeasureKind::Kusuoka;
    params.delta_hi = delta_s();
    let ex = exponents(&params)?;
    println!("a1 = {:.5}, a2 = {:.5}", ex.a1, ex.a2);

    let rep = sobolev_verify(&params, &VerifyOptions::new(20, 7, 5))?;
    println!("max ratio {:.4}, median {:.4}", rep.max_ratio, rep.median_ratio);
    if let Some(s) = &rep.stability {
        println!("level {} max ratio {:.4}, largest drift {:.2}%", s.compare_level, s.compare_max_ratio, 100.0 * s.max_sample_drift);
    }
    rep.write_csv(std::io::stdout().lock())
}
