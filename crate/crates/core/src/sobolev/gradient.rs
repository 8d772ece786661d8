use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::addressing::{Cell, ProductWord, Word};
use crate::error::{Error, Result};
use crate::harmonic::{bump_phi0, energy0, renorm_q, PwHarmonicFn};
use crate::mat::Mat3;
use crate::measure::{energy_word, for_each_word_z, kusuoka_word, z_i128};
use crate::scalar::{q_serde, q_to_f64, qi, Q};

fn triple(u: &PwHarmonicFn, idx: usize) -> [Q; 3] {
    let t = u.table(idx);
    [t[0].clone(), t[1].clone(), t[2].clone()]
}

/// `mu<u>(F_w S0)` for a one-factor piecewise harmonic `u`.
pub fn energy_measure(u: &PwHarmonicFn, w: &Word) -> Result<Q> {
    if u.arity() != 1 {
        return Err(Error::arg("u", "energy measures of cells are defined here for one factor"));
    }
    let l = u.level();
    if w.len() >= l {
        let t = triple(u, w.prefix(l).index());
        Ok(renorm_q(l) * energy_word(&t, &w.suffix_from(l)))
    } else {
        let pw = ProductWord::from_word(w);
        let mut s = Q::zero();
        for tail in ProductWord::all(1, l - w.len()) {
            s += energy0(u.table(pw.concat(&tail).index()));
        }
        Ok(renorm_q(l) * s)
    }
}

/// Kusuoka average of `|grad u|^2` over a cell inside `S0`: `mu<u>(cell) / mu(cell)`.
pub fn grad_sq_avg(u: &PwHarmonicFn, cell: &Cell) -> Result<Q> {
    if cell.arity() != 1 {
        return Err(Error::arg("cell", "one-factor cell expected"));
    }
    let c = cell.canonical();
    if c.blowup > 0 {
        return Err(Error::arg("cell", format!("cell `{cell}` is not contained in S0")));
    }
    let w = c.word.coord(0);
    Ok(energy_measure(u, &w)? / kusuoka_word(&w))
}

fn common_denominator(t: &[Q; 3]) -> (Vec<BigInt>, BigInt) {
    let mut d = BigInt::one();
    for x in t {
        d = num_integer::Integer::lcm(&d, x.denom());
    }
    let v = t.iter().map(|x| x.numer() * (&d / x.denom())).collect();
    (v, d)
}

/// Calls `f(word, grad_sq_avg(u, word))` for every word of length `<= max_level`,
/// using integer word products below the level of `u`.
pub fn grad_sq_avg_sweep(u: &PwHarmonicFn, max_level: usize, mut f: impl FnMut(&[u8], &Q)) -> Result<()> {
    if u.arity() != 1 {
        return Err(Error::arg("u", "one-factor function expected"));
    }
    let l = u.level();
    for m in 0..l.min(max_level + 1) {
        for w in Word::all(m) {
            let g = energy_measure(u, &w)? / kusuoka_word(&w);
            f(w.symbols(), &g);
        }
    }
    if max_level < l {
        return Ok(());
    }
    let scale = BigInt::from(25).pow(l as u32);
    for v in Word::all(l) {
        let t = triple(u, v.index());
        let (tv, d) = common_denominator(&t);
        let zv = v.symbols().iter().fold(Mat3::<i128>::identity(), |acc, &s| z_i128(s).mul(&acc));
        let d2 = &d * &d;
        let e0 = energy0(&t);
        let mut word = v.symbols().to_vec();
        for_each_word_z(max_level - l, |tail, z| {
            word.truncate(l);
            word.extend_from_slice(tail);
            let zw = z.mul(&zv);
            let frob = BigInt::from(zw.frob_sq());
            let g = if tail.is_empty() {
                if l == 0 {
                    e0.clone()
                } else {
                    Q::new(BigInt::from(2) * &scale, frob) * &e0
                }
            } else {
                let mut s = BigInt::zero();
                for r in 0..3 {
                    let mut acc = BigInt::zero();
                    for c in 0..3 {
                        acc += BigInt::from(z.0[r][c]) * &tv[c];
                    }
                    s += &acc * &acc;
                }
                Q::new(BigInt::from(3) * &scale * s, &d2 * frob)
            };
            f(&word, &g);
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpReport {
    pub depth: usize,
    pub cells: usize,
    /// Largest `grad_sq_avg(h_i)` over `i` and all cells.
    #[serde(with = "q_serde")]
    pub h_max: Q,
    pub h_le_2: bool,
    /// `sum_i grad_sq_avg(h_i) = 3` on every cell.
    pub sum_identity: bool,
    #[serde(with = "q_serde")]
    pub phi_max: Q,
    pub phi_sqrt_max: f64,
    pub phi_bound: f64,
    pub phi_ok: bool,
}

/// Bounds for `h_i` and for the bump `phi_0` on all cells of level `<= depth`.
pub fn bump_gradient_check(depth: usize) -> Result<BumpReport> {
    if depth > 12 {
        return Err(Error::arg("depth", "depth must be at most 12"));
    }
    let mut cells = 0usize;
    let mut h_ok = true;
    let mut sum_ok = true;
    let mut best: (i128, i128) = (0, 1);
    for_each_word_z(depth, |_, z| {
        cells += 1;
        let cols: [i128; 3] = std::array::from_fn(|c| (0..3).map(|r| z.0[r][c] * z.0[r][c]).sum());
        let f = z.frob_sq();
        for &c in &cols {
            if 3 * c > 2 * f {
                h_ok = false;
            }
            if 3 * c * best.1 > best.0 * f {
                best = (3 * c, f);
            }
        }
        let total: Q = cols.iter().map(|&c| Q::new(BigInt::from(3 * c), BigInt::from(f))).sum();
        if total != qi(3) {
            sum_ok = false;
        }
    });
    let phi = bump_phi0();
    let mut phi_max = Q::zero();
    grad_sq_avg_sweep(&phi, depth, |_, g| {
        if *g > phi_max {
            phi_max = g.clone();
        }
    })?;
    let phi_sqrt_max = q_to_f64(&phi_max).sqrt();
    Ok(BumpReport {
        depth,
        cells,
        h_max: Q::new(BigInt::from(best.0), BigInt::from(best.1)),
        h_le_2: h_ok,
        sum_identity: sum_ok,
        phi_ok: phi_max <= qi(50),
        phi_max,
        phi_sqrt_max,
        phi_bound: 5.0 * 2f64.sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssinfReport {
    pub base: Word,
    pub k: usize,
    /// `base` followed by `2 3^(k-1)`.
    pub construction_word: Word,
    #[serde(with = "q_serde")]
    pub construction_avg: Q,
    pub construction_float: f64,
    /// `construction_avg * 9^k`.
    pub construction_scaled: f64,
    #[serde(with = "q_serde")]
    pub min_avg: Q,
    pub min_float: f64,
    pub argmin: Word,
    /// `min_avg * 9^k`.
    pub min_scaled: f64,
    pub bound: f64,
    pub construction_ok: bool,
    pub min_ok: bool,
}

fn h1_ratio(z: &Mat3<i128>) -> (i128, i128) {
    let c: i128 = (0..3).map(|r| z.0[r][0] * z.0[r][0]).sum();
    (3 * c, z.frob_sq())
}

/// Decay of `grad_sq_avg(h_1)` below `base` at relative depth `k`.
pub fn essinf_decay_check(base: &Word, k: usize) -> Result<EssinfReport> {
    if k > 14 {
        return Err(Error::arg("k", "depth must be at most 14"));
    }
    if base.len() + k > 30 {
        return Err(Error::arg("base", "base length plus depth must be at most 30"));
    }
    let construction_word = if k == 0 { base.clone() } else { base.concat(&crate::measure::extremal_inner_word(k)) };
    let h1 = crate::harmonic::h(1);
    let construction_avg = grad_sq_avg(&h1, &Cell::of(0, &construction_word))?;
    let zb = base.symbols().iter().fold(Mat3::<i128>::identity(), |acc, &s| z_i128(s).mul(&acc));
    let zs = [z_i128(1), z_i128(2), z_i128(3)];
    let mut best: Option<((i128, i128), Vec<u8>)> = None;
    let mut word = Vec::with_capacity(k);
    fn rec(
        z: &Mat3<i128>,
        left: usize,
        zs: &[Mat3<i128>; 3],
        word: &mut Vec<u8>,
        best: &mut Option<((i128, i128), Vec<u8>)>,
    ) {
        if left == 0 {
            let r = h1_ratio(z);
            let better = match best {
                None => true,
                Some((b, _)) => r.0 * b.1 < b.0 * r.1,
            };
            if better {
                *best = Some((r, word.clone()));
            }
            return;
        }
        for s in 1..=3u8 {
            word.push(s);
            rec(&zs[s as usize - 1].mul(z), left - 1, zs, word, best);
            word.pop();
        }
    }
    rec(&zb, k, &zs, &mut word, &mut best);
    let ((num, den), tail) = best.unwrap();
    let min_avg = Q::new(BigInt::from(num), BigInt::from(den));
    let nine_k = 9f64.powi(k as i32);
    let construction_float = q_to_f64(&construction_avg);
    let min_float = q_to_f64(&min_avg);
    Ok(EssinfReport {
        base: base.clone(),
        k,
        construction_word,
        construction_scaled: construction_float * nine_k,
        construction_ok: construction_float * nine_k <= 81.0,
        construction_avg,
        construction_float,
        min_scaled: min_float * nine_k,
        min_ok: min_float * nine_k <= 81.0,
        min_avg,
        min_float,
        argmin: base.concat(&Word::new(tail).unwrap()),
        bound: 81.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::h;
    use crate::scalar::q;

    fn cell(s: &str) -> Cell {
        Cell::parse(s, 1).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(grad_sq_avg(&h(1), &cell("")).unwrap(), qi(1));
        assert_eq!(grad_sq_avg(&h(1), &cell("1")).unwrap(), q(9, 5));
        let c = crate::harmonic::PwFn::harmonic([q(2, 7), q(2, 7), q(2, 7)]);
        assert_eq!(grad_sq_avg(&c, &cell("3212")).unwrap(), Q::zero());
        assert!(grad_sq_avg(&h(1), &cell("1:2")).is_err());
        assert_eq!(grad_sq_avg(&h(1), &cell("1:12")).unwrap(), grad_sq_avg(&h(1), &cell("2")).unwrap());
    }

    #[test]
    fn sweep_matches_direct() {
        let phi = bump_phi0();
        let mut n = 0;
        grad_sq_avg_sweep(&phi, 4, |w, g| {
            let direct = grad_sq_avg(&phi, &Cell::of(0, &Word::new(w.to_vec()).unwrap())).unwrap();
            assert_eq!(&direct, g, "word {w:?}");
            n += 1;
        })
        .unwrap();
        assert_eq!(n, 121);
    }

    #[test]
    fn bump_small_depth() {
        let r = bump_gradient_check(5).unwrap();
        assert!(r.h_le_2 && r.sum_identity && r.phi_ok);
        assert_eq!(r.cells, 364);
    }

    #[test]
    fn essinf_k0_is_base() {
        let r = essinf_decay_check(&Word::parse("2").unwrap(), 0).unwrap();
        assert_eq!(r.construction_avg, grad_sq_avg(&h(1), &cell("2")).unwrap());
        assert_eq!(r.min_avg, r.construction_avg);
    }
}
