//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sgasket::addressing::*;
use sgasket::extremal::*;
use sgasket::harmonic::*;
use sgasket::mat::{eigenvalues_f64, Mat3};
use sgasket::measure::*;
use sgasket::scalar::{q, q_to_f64, qi, qpow, Q};
use sgasket::sobolev::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s(e: sgasket::error::Error) -> String {
    e.to_string()
}

fn w(s: &str) -> Word {
    Word::parse(s).unwrap()
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    q(rng.random_range(-50..=50), rng.random_range(1..=12))
}

fn rand_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.random_range(0..=max_len);
    Word::new((0..len).map(|_| rng.random_range(1..=3u8)).collect()).unwrap()
}

fn c1_harmonic() -> Check {
    let one = [Q::one(), Q::zero(), Q::zero()];
    ensure(harmonic_extend_cell(&one, &w("1")) == [qi(1), q(2, 5), q(2, 5)], "F1 display")?;
    ensure(harmonic_extend_cell(&one, &w("2")) == [q(2, 5), qi(0), q(1, 5)], "F2 display")?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut compared = 0;
    for m in 0..=2 {
        let oracle = MinEnergyOracle::<Q>::new(m).map_err(e2s)?;
        let lat = build_lattice(m, 1, u128::MAX).map_err(e2s)?;
        let runs = [34, 33, 33][m];
        for _ in 0..runs {
            let vals: Vec<Q> = (0..lat.vertex_count()).map(|_| rand_q(&mut rng)).collect();
            let f = DiscreteFn::new(&lat, vals).map_err(e2s)?;
            let a = extend_to_level(&f, m + 1, u128::MAX).map_err(e2s)?;
            let b = oracle.extend(&f).map_err(e2s)?;
            ensure(a.values == b.values, format!("oracle mismatch at level {m}"))?;
            compared += 1;
        }
    }

    for i in 0..3 {
        let mut b = vec![Q::zero(); 3];
        b[i] = Q::one();
        let base = DiscreteFn::new(&build_lattice(0, 1, u128::MAX).unwrap(), b).map_err(e2s)?;
        for m in 0..=6 {
            let f = extend_to_level(&base, m, u128::MAX).map_err(e2s)?;
            let e = graph_energy(&build_lattice(m, 1, u128::MAX).unwrap(), &f.values);
            ensure(e == Q::one(), format!("E(h_{}) = {e} at level {m}", i + 1))?;
        }
    }
    Ok(format!("displays exact, {compared} oracle extensions agree, E(h_i) = 1 for m <= 6"))
}

fn c2_spectra() -> Check {
    let mut worst: f64 = 0.0;
    for i in 1..=3u8 {
        let a = a_matrix::<f64>(i);
        let y = y_constants().y[i as usize - 1].map(q_to_f64);
        for (m, want) in [(a, [0.2, 0.6, 1.0]), (y, [0.0, 0.2, 0.6])] {
            let mut ev = eigenvalues_f64(&m);
            ev.sort_by(f64::total_cmp);
            for k in 0..3 {
                worst = worst.max((ev[k] - want[k]).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("eigenvalue error {worst:e}"))?;
    Ok(format!("max eigenvalue error {worst:.1e}"))
}

fn c3_kusuoka() -> Check {
    let ys = &y_constants().y;
    let s = ys.iter().fold(Mat3::<Q>::zero(), |acc, y| acc.add(&y.transpose().mul(y)));
    ensure(s == p_matrix::<Q>().scale(&q(3, 5)), "sum Y_i^t Y_i != (3/5) P")?;

    let mut totals = vec![Q::zero(); 9];
    for_each_word_z(8, |wd, z| {
        totals[wd.len()] += kusuoka_from_frob(num_bigint::BigInt::from(z.frob_sq()), wd.len());
    });
    for (m, t) in totals.iter().enumerate() {
        ensure(t.is_one(), format!("total mass {t} at level {m}"))?;
    }

    let mut cells = 0;
    for wd in Word::all_up_to(8) {
        let sum: Q = (0..3)
            .map(|i| {
                let mut b = [Q::zero(), Q::zero(), Q::zero()];
                b[i] = Q::one();
                energy_word(&b, &wd)
            })
            .sum();
        ensure(sum == qi(3) * kusuoka_word(&wd), format!("energy sum identity fails on {wd}"))?;
        cells += 1;
    }
    Ok(format!("Y identity exact, unit mass for m <= 8, energy identity on {cells} cells"))
}

fn c4_rn() -> Check {
    let inners: Vec<Word> = Word::all_up_to(6).filter(|x| !x.is_empty()).collect();
    let mut checked = 0;
    for outer in Word::all_up_to(3) {
        for inner in &inners {
            let r = rn_ratio(&outer, inner).map_err(e2s)?;
            ensure(r.pass, format!("ratio {} outside envelope for {outer}|{inner}", r.ratio))?;
            checked += 1;
        }
    }
    let ratio = q_to_f64(&extremal_f1_ratio(2, 20).map_err(e2s)?);
    let target = 1.0 / 225.0;
    let rel = (ratio - target).abs() / target;
    ensure(rel <= 0.01, format!("extremal ratio {ratio:e} vs {target:e}"))?;
    Ok(format!("{checked} ratios inside envelope, extremal ratio rel. error {rel:.1e}"))
}

fn c5_gradient() -> Check {
    let rep = bump_gradient_check(10).map_err(e2s)?;
    ensure(rep.h_le_2, format!("grad_sq_avg(h_i) reaches {}", rep.h_max))?;
    ensure(rep.sum_identity, "sum of grad_sq_avg(h_i) != 3")?;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for base in Word::all_up_to(2) {
        let r = essinf_decay_check(&base, 12).map_err(e2s)?;
        worst = worst.max(r.min_float);
        if r.min_float > 1e-6 {
            failures.push(format!("{}={:.2e}", if base.is_empty() { "root".into() } else { base.to_string() }, r.min_float));
        }
    }
    ensure(
        failures.is_empty(),
        format!("h bounds ok on {} cells; depth-12 minimum above 1e-6 on {}", rep.cells, failures.join(", ")),
    )?;
    Ok(format!("h bounds exact on {} cells, worst depth-12 minimum {worst:.2e}", rep.cells))
}

fn c6_pullback() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for _ in 0..50 {
        let b = [rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng)];
        let u = PwFn::harmonic(b.clone());
        for _ in 0..4 {
            let wd = rand_word(&mut rng, 4);
            let v = rand_word(&mut rng, 4);
            let pulled = u.pullback(&ProductWord::from_word(&wd)).map_err(e2s)?;
            let lhs = energy_measure(&pulled, &v).map_err(e2s)?;
            let kind = MeasureKind::HarmonicEnergy { boundary: b.clone() };
            let rhs = qpow(&q(3, 5), wd.len() as i64) * cell_measure(&kind, &Cell::of(0, &wd.concat(&v))).map_err(e2s)?;
            ensure(lhs == rhs, format!("pullback identity fails for w={wd} v={v}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} exact pullback identities"))
}

fn c7_spectral() -> Check {
    let gens = Generators::default();
    let s2 = minimal_complex_word(2, u128::MAX, &gens).map_err(e2s)?;
    ensure(s2.minimal_complex_length.is_none(), "complex spectrum below length 3")?;
    let s3 = minimal_complex_word(3, u128::MAX, &gens).map_err(e2s)?;
    ensure(s3.minimal_complex_length == Some(3) && s3.witnesses.contains(&w("312")), "312 not found at length 3")?;
    let words: Vec<Word> = Word::all_up_to(8).filter(|x| !x.is_empty()).collect();
    let det = det_lower_bound_check(&words, &gens);
    ensure(det.violations.is_empty(), format!("{} det-bound violations", det.violations.len()))?;
    let lim = periodic_limit(&w("312"), 12, &gens).map_err(e2s)?;
    ensure(lim.exact_limit.as_deref() == Some("3/25"), format!("exact limit {:?}", lim.exact_limit))?;
    let at36 = lim.values.iter().find(|p| p.k * 3 == 36).ok_or("no m = 36 point")?.value;
    let rel = (at36 - 0.12).abs() / 0.12;
    ensure(rel <= 0.05, format!("m=36 value {at36} off by {rel:.3}"))?;
    let qr = q_reduction_check(8);
    ensure(qr.pass && qr.gram_mismatches.is_empty(), "Gram-trace equality fails")?;
    Ok(format!(
        "312 minimal, {} det bounds, limit 3/25, m=36 rel. error {rel:.3}, {} Gram traces equal",
        det.checked, qr.gram_words_checked
    ))
}

fn c8_sharp_delta() -> Check {
    let ds = delta_s();
    let ev = sharp_delta_report(8, &[40], &w("312"), 12);
    ensure(ev.upper_violations.is_empty(), format!("{} upper violations", ev.upper_violations.len()))?;
    ensure(ev.lower_violations.is_empty(), format!("{} lower violations", ev.lower_violations.len()))?;
    let sample = standard_sample(1, 8, 4);
    let m = condition_check(&MeasureKind::Kusuoka, 1.0, ds, 1.0, &sample, Direction::M).map_err(e2s)?;
    ensure(m.violations.is_empty(), "condition (M) with (1, delta_s) fails")?;
    let lo = 1.0 / (1.0 + 1.0 / ds);
    let mp = condition_check(&MeasureKind::Kusuoka, lo, 1.0, 2.0, &sample, Direction::MPrime).map_err(e2s)?;
    ensure(mp.violations.is_empty(), "condition (M') fails")?;
    let per = ev.periodic.last().unwrap().exponent;
    let target = 5f64.ln() / 3f64.ln();
    let per_rel = (per - target).abs() / target;
    let ones = ev.ones[0].exponent;
    let inv = 1.0 / ds;
    let bounds = format!("bounds exact on {} cells, (M)/(M') hold", ev.cells_checked);
    ensure(per_rel <= 0.01, format!("{bounds}; 312^12 exponent {per:.5} vs {target:.5}"))?;
    ensure(
        (ones - inv).abs() <= 1e-2,
        format!("{bounds}, 312^12 rel. error {per_rel:.1e}; 1^40 exponent {ones:.5} vs {inv:.5}"),
    )?;
    Ok(format!("{bounds}, 1^40 exponent {ones:.5}, 312^12 exponent {per:.5}"))
}

fn c9_poincare() -> Check {
    let c5 = poincare_estimate(5, 1, u128::MAX).map_err(e2s)?.constant;
    let c6 = poincare_estimate(6, 1, u128::MAX).map_err(e2s)?.constant;
    let change = (c6 - c5).abs() / c5;
    ensure(change <= 0.05, format!("C5={c5} C6={c6}"))?;
    let mut worst: f64 = 0.0;
    for m in 0..=3 {
        let a = poincare_estimate(m, 1, u128::MAX).map_err(e2s)?.constant;
        let b = poincare_estimate(m, 2, u128::MAX).map_err(e2s)?.constant;
        worst = worst.max((a - b).abs());
    }
    ensure(worst <= 1e-6, format!("n=2 differs from n=1 by {worst:e}"))?;
    Ok(format!("C6={c6:.6}, change {:.3}%, n=2 vs n=1 diff {worst:.1e}", change * 100.0))
}

fn c10_oscillation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let b = [rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng)];
        let rep = oscillation_decay_report(&PwFn::harmonic(b), 2.0, 6, 0).map_err(e2s)?;
        let maxes: Vec<f64> = rep.levels.iter().map(|l| l.max_ratio).collect();
        ensure(maxes.iter().all(|x| x.is_finite()), format!("non-finite ratio for harmonic {i}"))?;
        if maxes.is_empty() {
            continue;
        }
        let early = maxes.iter().take(4).cloned().fold(0.0, f64::max);
        let late = maxes.iter().skip(4).cloned().fold(0.0, f64::max);
        ensure(late <= early * 1.01, format!("harmonic {i}: ratio grows from {early} to {late}"))?;
        worst = worst.max(rep.max_ratio);
    }
    let mut growth_worst: f64 = 0.0;
    for (n, r, refine) in [(1usize, 2.0, 0usize), (2, 4.0, 0)] {
        for (i, v) in sample_functions(n, 2, 10, 100 + n as u64).map_err(e2s)?.iter().enumerate() {
            let rep = growth_report(v, 0, r, 4, refine).map_err(e2s)?;
            let ratio = rep.rows.iter().map(|x| x.ratio).fold(0.0, f64::max);
            ensure(rep.pass, format!("growth fails for n={n} sample {i}: ratio {ratio}"))?;
            growth_worst = growth_worst.max(ratio);
        }
    }
    Ok(format!("decay ratio <= {worst:.4}, within 1% of levels m <= 3, growth ratio <= {growth_worst:.3}"))
}

fn c11_sobolev() -> Check {
    let ds = delta_s();
    let mut kus = SobolevParams::with_hausdorff(1, 2.0, 2.0, 4.0);
    kus.sigma = MeasureKind::Kusuoka;
    kus.delta_hi = ds;
    let mut summary = Vec::new();
    for (label, params) in [
        ("n=1 nu", SobolevParams::with_hausdorff(1, 2.0, 2.0, 4.0)),
        ("n=1 mu", kus),
        ("n=2 nu2", SobolevParams::with_hausdorff(2, 4.0, 2.0, 4.0)),
    ] {
        let rep = sobolev_verify(&params, &VerifyOptions::new(100, 42, 6)).map_err(e2s)?;
        ensure(rep.samples.len() == 100, format!("{label}: {} samples", rep.samples.len()))?;
        ensure(
            rep.samples.iter().all(|s| s.ratio.is_finite() && s.ratio > 0.0),
            format!("{label}: non-finite ratio"),
        )?;
        let st = rep.stability.as_ref().ok_or("no stability data")?;
        ensure(st.max_sample_drift <= 0.05, format!("{label}: drift {:.3}", st.max_sample_drift))?;

        let quad = InequalityQuadrature::new(&params, 0, 6).map_err(e2s)?;
        let u = sample_functions(params.n, 2, 1, 42).map_err(e2s)?.remove(0);
        let a = quad.evaluate(&u).map_err(e2s)?;
        let b = quad.evaluate(&u.scale(&qi(7))).map_err(e2s)?;
        ensure(a.ratio == b.ratio, format!("{label}: scale invariance {} vs {}", a.ratio, b.ratio))?;
        summary.push(format!("{label} max {:.3} drift {:.1}%", rep.max_ratio, st.max_sample_drift * 100.0));
    }
    Ok(summary.join("; "))
}

fn c12_bump() -> Check {
    let phi = bump_phi0();
    let (hi, lo) = max_min_on(&phi, &ProductWord::from_word(&w("12"))).map_err(e2s)?;
    ensure(lo >= q(2, 5) && hi <= qi(1), format!("phi0 range [{lo}, {hi}] on F1F2"))?;
    let rep = bump_gradient_check(10).map_err(e2s)?;
    let bound = 5.0 * 2f64.sqrt();
    ensure(rep.phi_sqrt_max <= bound, format!("sqrt grad avg {} > 5 sqrt 2", rep.phi_sqrt_max))?;
    Ok(format!("range [{lo}, {hi}] on F1F2, sqrt max {:.4} <= {bound:.4}", rep.phi_sqrt_max))
}

fn run_cli(args: &[&str], out: &Path, threads: &str, cache: &Path) -> Result<(), String> {
    let st = Command::new(env!("CARGO_BIN_EXE_sg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RAYON_NUM_THREADS", threads)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env("SG_CACHE_DIR", cache)
        .output()
        .map_err(|e| e.to_string())?;
    if !st.status.success() {
        return Err(format!("`sg {}` failed: {}", args.join(" "), String::from_utf8_lossy(&st.stderr).trim()));
    }
    Ok(())
}

fn dir_bytes(d: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(d)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn c13_determinism() -> Check {
    let commands: &[&[&str]] = &[
        &["lattice", "--level", "2", "--n", "2"],
        &["harmonic", "--boundary", "1,0,0", "--word", "12", "--level", "3", "--exact"],
        &["energy", "--boundary", "1,2,-1", "--level", "4", "--exact"],
        &["measure", "--kind", "kusuoka", "--word", "3121", "--exact"],
        &["rn", "--outer", "11", "--inner", "233"],
        &["exponents", "--n", "2", "--r", "4", "--q", "inf"],
        &["poincare", "--level", "3", "--n", "2"],
        &["osc", "--function", "random", "--seed", "3", "--depth", "4"],
        &["growth", "--function", "random", "--seed", "5", "--n", "2", "--r", "4", "--max-m", "2"],
        &["sobolev", "verify", "--seed", "9", "--samples", "12", "--refine", "4", "--n", "2", "--r", "4", "--q", "4"],
        &["bump", "verify", "--depth", "6"],
        &["essinf", "--base", "21", "--k", "8"],
        &["spectral", "scan", "--max-len", "4"],
        &["spectral", "periodic", "--word", "312", "--k-max", "8"],
        &["spectral", "sharp-delta", "--max-level", "6", "--ones", "10,20"],
        &["condition", "check", "--max-len", "4", "--n", "2"],
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (i, args) in commands.iter().enumerate() {
        let mut runs = Vec::new();
        for (j, threads) in ["1", "4"].iter().enumerate() {
            let out = tmp.path().join(format!("{i}-{j}"));
            let cache = tmp.path().join(format!("cache-{j}"));
            run_cli(args, &out, threads, &cache)?;
            runs.push(dir_bytes(&out));
        }
        ensure(runs[0] == runs[1], format!("`sg {}` differs between runs", args.join(" ")))?;
        files += runs[0].len();
    }
    Ok(format!("{} commands, {files} files byte-identical across 1 and 4 threads", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("harmonic structure", c1_harmonic),
        ("spectra of A_i and Y_i", c2_spectra),
        ("Kusuoka consistency", c3_kusuoka),
        ("RN envelope", c4_rn),
        ("gradient bounds", c5_gradient),
        ("pullback identities", c6_pullback),
        ("sharp trace exponent", c7_spectral),
        ("sharp delta", c8_sharp_delta),
        ("Poincare constants", c9_poincare),
        ("oscillation and growth", c10_oscillation),
        ("Sobolev harness", c11_sobolev),
        ("bump function", c12_bump),
        ("determinism", c13_determinism),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if filter.is_some_and(|k| k != i + 1) {
            continue;
        }
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS {:>2} {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
