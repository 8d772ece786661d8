use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use sgasket::addressing::*;
use sgasket::extremal::*;
use sgasket::harmonic::*;
use sgasket::measure::*;
use sgasket::scalar::{q, q_to_f64, qi, qpow, Q};
use sgasket::sobolev::*;

fn rat() -> impl Strategy<Value = Q> {
    (-60i64..=60, 1i64..=16).prop_map(|(a, b)| q(a, b))
}

fn triple() -> impl Strategy<Value = [Q; 3]> {
    [rat(), rat(), rat()]
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1u8..=3, 0..=max_len).prop_map(|v| Word::new(v).unwrap())
}

fn lattice(m: usize, n: usize) -> LatticeGraph {
    build_lattice(m, n, u128::MAX).unwrap()
}

#[test]
fn vertex_count_formula() {
    for m in 0..=10 {
        let lat = lattice(m, 1);
        assert_eq!(lat.vertex_count(), (3usize.pow(m as u32 + 1) + 3) / 2, "level {m}");
    }
}

#[test]
fn vertices_are_geometrically_distinct() {
    for m in 0..=6 {
        let lat = lattice(m, 1);
        let mut pts: Vec<(f64, f64)> = (0..lat.vertex_count()).map(|v| lat.coords_1d(v)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for p in pts.windows(2) {
            assert!((p[0].0 - p[1].0).abs() > 1e-12 || (p[0].1 - p[1].1).abs() > 1e-12);
        }
        // every (cell, corner) resolves to the vertex at the same point
        for w in Word::all(m) {
            for c in 1..=3u8 {
                let v = lat.vertex_id_1d(w.symbols(), c).unwrap();
                let (x, y) = lat.coords_1d(v);
                let cell = Cell::of(0, &w).corner_coordinates()[c as usize - 1].clone();
                assert!((x - cell[0]).abs() < 1e-12 && (y - cell[1]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn h_sum_is_one() {
    let sum = h(1).add(&h(2)).unwrap().add(&h(3)).unwrap();
    for level in 0..=5 {
        assert!(sum.refine(level).unwrap().tables().iter().all(|x| x.is_one()));
    }
}

#[test]
fn det_multiplicative_to_length_10() {
    let words: Vec<Word> = Word::all_up_to(10).filter(|w| !w.is_empty()).collect();
    let rep = det_lower_bound_check(&words, &Generators::default());
    assert!(rep.det_mismatches.is_empty());
    assert!(rep.violations.is_empty());
}

#[test]
fn periodic_limit_follows_spectrum_class() {
    let gens = Generators::default();
    let scan = minimal_complex_word(4, u128::MAX, &gens).unwrap();
    for row in &scan.rows {
        let lim = periodic_limit(&row.word, 3, &gens).unwrap();
        match row.class {
            SpectrumKind::ComplexPair => {
                assert_eq!(lim.exact_limit.as_deref(), Some("3/25"), "{}", row.word);
                assert_eq!(lim.vs_det_floor, 0);
            }
            SpectrumKind::RealDistinct => assert_eq!(lim.vs_det_floor, 1, "{}", row.word),
            SpectrumKind::RealRepeated => {}
        }
    }
}

#[test]
fn scan_independent_of_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| minimal_complex_word(6, u128::MAX, &Generators::default()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn sobolev_report_independent_of_thread_count() {
    let params = SobolevParams::with_hausdorff(2, 4.0, 2.0, 4.0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sobolev_verify(&params, &VerifyOptions::new(6, 3, 3)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

/// Bracket `sqrt(3)` between consecutive multiples of `10^-50`.
fn sqrt3_bracket() -> (Q, Q) {
    let scale = BigInt::from(10).pow(50);
    let s = (BigInt::from(3) * &scale * &scale).sqrt();
    (Q::new(s.clone(), scale.clone()), Q::new(s + 1, scale))
}

fn sign(x: &Q) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_partition(w in word(6)) {
        let cell = Cell::of(0, &w);
        let kids = cell.children();
        let parent = cell.corner_coordinates();
        for k in &kids {
            prop_assert_eq!(k.diameter_log2(), cell.diameter_log2() - 1);
        }
        for p in &parent {
            let owners = kids
                .iter()
                .filter(|k| k.corner_coordinates().iter().any(|c| (c[0] - p[0]).abs() < 1e-12 && (c[1] - p[1]).abs() < 1e-12))
                .count();
            prop_assert_eq!(owners, 1);
        }
    }

    #[test]
    fn extension_preserves_energy(m in 0usize..=4, seed in any::<u64>()) {
        let lat = lattice(m, 1);
        let mut s = seed;
        let vals: Vec<Q> = (0..lat.vertex_count())
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                q(((s >> 33) % 41) as i64 - 20, 1 + ((s >> 20) % 7) as i64)
            })
            .collect();
        let f = DiscreteFn::new(&lat, vals.clone()).unwrap();
        let e0 = graph_energy(&lat, &vals);
        for target in m..=(m + 2).min(6) {
            let g = extend_to_level(&f, target, u128::MAX).unwrap();
            prop_assert_eq!(graph_energy(&lattice(target, 1), &g.values), e0.clone());
        }
    }

    #[test]
    fn energy_self_similar(level in 0usize..=3, seed in any::<u64>()) {
        let lat = lattice(level, 1);
        let vals: Vec<Q> = (0..lat.vertex_count()).map(|i| qi(((seed >> (i % 60)) % 11) as i64 - 5)).collect();
        let u = PwFn::from_vertex_values(&lat, &vals);
        let parts: Q = (1..=3u8)
            .map(|i| u.pullback(&ProductWord::from_word(&Word::new(vec![i]).unwrap())).unwrap().energy() * q(5, 3))
            .sum();
        prop_assert_eq!(u.energy(), parts);
    }

    #[test]
    fn maximum_principle(b in triple(), w in word(6)) {
        let lo = b.iter().min().unwrap().clone();
        let hi = b.iter().max().unwrap().clone();
        for x in harmonic_extend_cell(&b, &w) {
            prop_assert!(lo <= x && x <= hi);
        }
    }

    #[test]
    fn measures_additive(w in word(7), b in triple()) {
        let cell = Cell::of(0, &w);
        for kind in [MeasureKind::Hausdorff, MeasureKind::Kusuoka, MeasureKind::HarmonicEnergy { boundary: b.clone() }] {
            let whole = cell_measure(&kind, &cell).unwrap();
            let parts: Q = cell.children().iter().map(|c| cell_measure(&kind, c).unwrap()).sum();
            prop_assert_eq!(whole, parts);
        }
    }

    #[test]
    fn energy_measure_parallelogram(a in triple(), b in triple(), w in word(6)) {
        let plus: [Q; 3] = std::array::from_fn(|i| &a[i] + &b[i]);
        let minus: [Q; 3] = std::array::from_fn(|i| &a[i] - &b[i]);
        let lhs = energy_word(&plus, &w) + energy_word(&minus, &w);
        prop_assert_eq!(lhs, qi(2) * (energy_word(&a, &w) + energy_word(&b, &w)));
    }

    #[test]
    fn r2_seminorm_is_energy(n in 1usize..=2, seed in any::<u64>(), extra in 0usize..=1) {
        let u = sample_functions(n, 1, 1, seed).unwrap().remove(0);
        let level = u.level() + extra;
        let exact = seminorm_sq_r2(&WindowFn::unit(u.clone()), level).unwrap();
        // for n > 1 the inactive axes are integrated by the level-`level` vertex weights
        prop_assert_eq!(exact, u.refine(level).unwrap().energy());
    }

    #[test]
    fn pullback_seminorm_envelope(b in triple(), w in word(3), r in prop::sample::select(vec![2.0, 3.0, 4.0])) {
        prop_assume!(b.iter().any(|x| *x != b[0]));
        let m = w.len();
        let levels = 4;
        let u = PwFn::harmonic(b).to_f64();
        let pw = ProductWord::from_word(&w);
        let on_cell = seminorm_power_on(&WindowFn::unit(u.clone()), &pw, r, levels + m).unwrap();
        let pulled = seminorm_power_on(&WindowFn::unit(u.pullback(&pw).unwrap()), &ProductWord::empty(1), r, levels).unwrap();
        if on_cell == 0.0 {
            prop_assert_eq!(pulled, 0.0);
        } else {
            let ratio = pulled / on_cell;
            let base = (0.6f64).powf(m as f64 * r / 2.0);
            let lo = base * (1.0f64 / 15.0).powf(m as f64 * (r / 2.0 - 1.0));
            let hi = base * (0.6f64).powf(m as f64 * (r / 2.0 - 1.0));
            prop_assert!(ratio >= lo * (1.0 - 1e-9) && ratio <= hi * (1.0 + 1e-9), "{} not in [{}, {}]", ratio, lo, hi);
        }
    }

    #[test]
    fn homogeneity(seed in any::<u64>(), c in 1i64..=9, neg in any::<bool>()) {
        let c = if neg { -c } else { c };
        let u = sample_functions(1, 2, 1, seed).unwrap().remove(0);
        let cu = u.scale(&qi(c));
        let cf = c.abs() as f64;
        let pw = ProductWord::from_word(&Word::parse("2").unwrap());
        prop_assert_eq!(oscillation(&cu, &pw).unwrap(), oscillation(&u, &pw).unwrap() * qi(c.abs()));
        let (uf, cuf) = (WindowFn::unit(u.to_f64()), WindowFn::unit(cu.to_f64()));
        for qv in [2.0, 4.0, f64::INFINITY] {
            let a = lq_norm(&uf, &MeasureKind::Kusuoka, qv, 3).unwrap();
            let b = lq_norm(&cuf, &MeasureKind::Kusuoka, qv, 3).unwrap();
            prop_assert!((b - cf * a).abs() <= 1e-12 * b.abs().max(1e-300));
        }
        let a = seminorm(&uf, 3.0, 3).unwrap();
        let b = seminorm(&cuf, 3.0, 3).unwrap();
        prop_assert!((b - cf * a).abs() <= 1e-12 * b.abs().max(1e-300));
    }

    #[test]
    fn lq_refinement_bound(seed in any::<u64>(), level in 2usize..=4) {
        let u = sample_functions(1, 2, 1, seed).unwrap().remove(0);
        let uf = WindowFn::unit(u.to_f64());
        let qv = 2.0;
        let a = lq_norm(&uf, &MeasureKind::Hausdorff, qv, level).unwrap().powf(qv);
        let b = lq_norm(&uf, &MeasureKind::Hausdorff, qv, level + 1).unwrap().powf(qv);
        let mut worst: f64 = 0.0;
        for w in Word::all(level) {
            let (hi, lo) = max_min_on(&u, &ProductWord::from_word(&w)).unwrap();
            let (hi, lo) = (q_to_f64(&hi), q_to_f64(&lo));
            let top = hi.abs().max(lo.abs()).powf(qv);
            let bottom = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { hi.abs().min(lo.abs()).powf(qv) };
            worst = worst.max(top - bottom);
        }
        prop_assert!((a - b).abs() <= worst + 1e-12);
    }

    #[test]
    fn poincare_bound_holds(m in 0usize..=4, seed in any::<u64>()) {
        let lat = lattice(m, 1);
        let rep = poincare_estimate(m, 1, u128::MAX).unwrap();
        let mut s = seed | 1;
        let f: Vec<f64> = (0..lat.vertex_count())
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s % 2001) as f64 / 1000.0 - 1.0
            })
            .collect();
        if let Some(ratio) = poincare_ratio(&lat, &f) {
            prop_assert!(ratio <= rep.constant * (1.0 + 1e-9));
        }
        prop_assert!(rep.residual <= 1e-9);
        prop_assert!((rep.attained - rep.constant).abs() <= 1e-9 * rep.constant);
    }

    #[test]
    fn rn_pass_iff_inside(outer in word(3), inner in word(6)) {
        prop_assume!(!inner.is_empty());
        let r = rn_ratio(&outer, &inner).unwrap();
        prop_assert_eq!(r.pass, r.lower <= r.ratio && r.ratio <= r.upper);
        prop_assert!(r.pass);
    }

    #[test]
    fn qsqrt3_sign_matches_bracket(a in -2000i64..=2000, ad in 1i64..=50, b in -2000i64..=2000, bd in 1i64..=50) {
        let x = QSqrt3::new(q(a, ad), q(b, bd));
        let (s_lo, s_hi) = sqrt3_bracket();
        let lo = q(a, ad) + q(b, bd) * if b >= 0 { s_lo.clone() } else { s_hi.clone() };
        let hi = q(a, ad) + q(b, bd) * if b >= 0 { s_hi } else { s_lo };
        let expected = if sign(&lo) == sign(&hi) { sign(&lo) } else { 0 };
        prop_assert_eq!(x.signum(), expected);
    }

    #[test]
    fn qsqrt3_sign_near_zero(k in 1usize..=12, flip in any::<bool>()) {
        // convergents of sqrt(3) make a + b sqrt(3) tiny
        let (mut p, mut r) = (BigInt::from(2), BigInt::from(1));
        for _ in 0..k {
            let np = &p * 2 + &r * 3;
            r = &p + &r * 2;
            p = np;
        }
        let (a, b) = if flip { (-p, r) } else { (p, -r) };
        let x = QSqrt3::new(Q::from_integer(a.clone()), Q::from_integer(b.clone()));
        let (s_lo, s_hi) = sqrt3_bracket();
        let lo = Q::from_integer(a.clone()) + Q::from_integer(b.clone()) * if b.is_positive() { s_lo.clone() } else { s_hi.clone() };
        let hi = Q::from_integer(a) + Q::from_integer(b.clone()) * if b.is_positive() { s_hi } else { s_lo };
        prop_assert_eq!(sign(&lo), sign(&hi));
        prop_assert_eq!(x.signum(), sign(&lo));
    }

    #[test]
    fn kusuoka_pullback_ratio_bounds(w in word(4), v in word(4)) {
        let whole = kusuoka_word(&w.concat(&v));
        let part = kusuoka_word(&v);
        let m = w.len() as i64;
        prop_assert!(whole >= part.clone() * qpow(&q(1, 15), m));
        prop_assert!(whole <= part * qpow(&q(3, 5), m));
    }
}
