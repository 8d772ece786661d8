use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::addressing::{pow3, tri_point, tuple_of, Cell, ProductWord, Word};
use crate::error::{Error, Result};
use crate::harmonic::{energy0, AMats, PwFn};
use crate::measure::{cell_measure, for_each_word_z, CornerSpec, MeasureKind};
use crate::scalar::{Scalar, Q};

/// A function on the window `S_{0,k} = F_(1..1)^(-k)(S0^n)`, stored through
/// `v` on `S0^n` with `u = v o F_(1..1)^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowFn<T> {
    pub blowup: u32,
    pub base: PwFn<T>,
}

impl<T: Scalar> WindowFn<T> {
    pub fn new(blowup: u32, base: PwFn<T>) -> Self {
        WindowFn { blowup, base }
    }

    /// The function on `S0^n` itself.
    pub fn unit(base: PwFn<T>) -> Self {
        WindowFn { blowup: 0, base }
    }

    pub fn arity(&self) -> usize {
        self.base.arity()
    }

    pub fn to_f64(&self) -> WindowFn<f64> {
        WindowFn { blowup: self.blowup, base: self.base.to_f64() }
    }
}

/// Pairwise summation in a fixed tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Kusuoka masses of the level-`m` cells of the window `S_{0,k}` (one factor), as floats.
pub fn kusuoka_window(k: u32, m: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(k, m)) {
        return v.clone();
    }
    let k_us = k as usize;
    let v = if m <= k_us {
        vec![3f64.powi((k_us - m) as i32); pow3(m)]
    } else {
        let l = m - k_us;
        let mut tail = vec![0.0; pow3(l)];
        let denom = 2.0 * 15f64.powi(l as i32);
        for_each_word_z(l, |w, z| {
            if w.len() == l {
                tail[crate::addressing::index_of(w)] = if l == 0 { 1.0 } else { z.frob_sq() as f64 / denom };
            }
        });
        let tl = tail.len();
        (0..pow3(m)).map(|i| tail[i % tl]).collect()
    };
    let v = Arc::new(v);
    cache.lock().unwrap().insert((k, m), v.clone());
    v
}

/// Starting tables and per-axis cell indices for the leaves below `prefix`.
fn top_cells<T: Scalar>(u: &PwFn<T>, prefix: &ProductWord) -> Result<(Vec<(Vec<T>, Vec<usize>)>, usize)> {
    let n = u.arity();
    if prefix.arity() != n {
        return Err(Error::arg("cell", "arity mismatch"));
    }
    let l = u.level();
    let idx_of = |w: &ProductWord| (0..n).map(|a| w.coord_index(a)).collect::<Vec<_>>();
    if prefix.len() >= l {
        Ok((vec![(u.cell_table(prefix)?, idx_of(prefix))], prefix.len()))
    } else {
        let tops = ProductWord::all(n, l - prefix.len())
            .map(|tail| {
                let w = prefix.concat(&tail);
                (u.table(w.index()).to_vec(), idx_of(&w))
            })
            .collect();
        Ok((tops, l))
    }
}

#[allow(clippy::too_many_arguments)]
fn descend<T: Scalar, A>(
    amats: &AMats<T>,
    tuples: &[Vec<u8>],
    n: usize,
    left: usize,
    table: &[T],
    idx: &[usize],
    acc: &mut A,
    visit: &(impl Fn(&mut A, &[usize], &[T]) + Sync),
) {
    if left == 0 {
        visit(acc, idx, table);
        return;
    }
    let mut child_idx = vec![0usize; n];
    for t in tuples {
        let ct = amats.child_table(table, n, t);
        for a in 0..n {
            child_idx[a] = idx[a] * 3 + t[a] as usize - 1;
        }
        descend(amats, tuples, n, left - 1, &ct, &child_idx, acc, visit);
    }
}

/// Folds over the level-`m` cells below `prefix`, in parallel over the
/// starting cells. Accumulators come back in cell order.
pub fn fold_leaves<T: Scalar, A: Send>(
    u: &PwFn<T>,
    prefix: &ProductWord,
    m: usize,
    init: impl Fn() -> A + Sync,
    visit: impl Fn(&mut A, &[usize], &[T]) + Sync,
) -> Result<Vec<A>> {
    let (tops, start) = top_cells(u, prefix)?;
    if m < start {
        return Err(Error::arg("refine", format!("refinement level {m} below {start}")));
    }
    let n = u.arity();
    let amats = AMats::<T>::default();
    let tuples: Vec<Vec<u8>> = (0..pow3(n)).map(|c| tuple_of(c, n)).collect();
    Ok(tops
        .par_iter()
        .map(|(table, idx)| {
            let mut acc = init();
            descend(&amats, &tuples, n, m - start, table, idx, &mut acc, &visit);
            acc
        })
        .collect())
}

fn check_window<T: Scalar>(u: &WindowFn<T>, m: usize) -> Result<()> {
    if m < u.base.level() || m < u.blowup as usize {
        return Err(Error::arg(
            "refine",
            format!("refinement level {m} must be at least the function level {} and the blow-up {}", u.base.level(), u.blowup),
        ));
    }
    Ok(())
}

fn fibers<T: Clone>(t: &[T], n: usize, axis: usize) -> impl Iterator<Item = [T; 3]> + '_ {
    let stride = pow3(n - 1 - axis);
    (0..pow3(n))
        .filter(move |base| (base / stride) % 3 == 0)
        .map(move |base| [t[base].clone(), t[base + stride].clone(), t[base + 2 * stride].clone()])
}

/// Per-leaf data for the `W^{1,r}` quadrature at refinement `m`.
#[derive(Clone, Debug)]
pub(crate) struct GradQuad {
    n: usize,
    r: f64,
    kus: Arc<Vec<f64>>,
    c_m: f64,
    inactive: f64,
}

impl GradQuad {
    pub(crate) fn new(n: usize, r: f64, blowup: u32, m: usize) -> Self {
        let k = blowup as i32;
        let nu = 3f64.powi(k - m as i32);
        GradQuad {
            n,
            r,
            kus: kusuoka_window(blowup, m),
            c_m: 0.6f64.powi(k) * (5.0f64 / 3.0).powi(m as i32),
            inactive: (nu / 3.0).powi(n as i32 - 1),
        }
    }

    /// `sum_a int_cell |grad_a u|^r d(mu x nu^(n-1))` on one leaf.
    pub(crate) fn leaf(&self, idx: &[usize], t: &[f64]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.n {
            let ka = self.kus[idx[a]];
            for f in fibers(t, self.n, a) {
                let e = energy0(&f);
                if e > 0.0 {
                    s += self.inactive * ka * (self.c_m * e / ka).powf(self.r / 2.0);
                }
            }
        }
        s
    }
}

/// `[[u]]^r` on the cell `prefix` of the window (the whole window for the empty word).
pub fn seminorm_power_on(u: &WindowFn<f64>, prefix: &ProductWord, r: f64, m: usize) -> Result<f64> {
    if !(r >= 2.0) {
        return Err(Error::hypothesis(format!("r >= 2 (got r = {r})")));
    }
    check_window(u, m)?;
    let quad = GradQuad::new(u.arity(), r, u.blowup, m);
    let parts = fold_leaves(&u.base, prefix, m, || 0.0, |acc, idx, t| *acc += quad.leaf(idx, t))?;
    Ok(pairwise_sum(&parts))
}

/// `[[u]]_{W^{1,r}}` on the window, by quadrature at level `m`.
pub fn seminorm(u: &WindowFn<f64>, r: f64, m: usize) -> Result<f64> {
    Ok(seminorm_power_on(u, &ProductWord::empty(u.arity()), r, m)?.powf(1.0 / r))
}

/// `[[u]]^2` at `r = 2`, exact in any scalar type.
pub fn seminorm_sq_r2<T: Scalar>(u: &WindowFn<T>, m: usize) -> Result<T> {
    check_window(u, m)?;
    let n = u.arity();
    let k = u.blowup as i64;
    let parts = fold_leaves(&u.base, &ProductWord::empty(n), m, T::zero, |acc, _, t| {
        for a in 0..n {
            for f in fibers(t, n, a) {
                *acc = acc.clone() + energy0(&f);
            }
        }
    })?;
    let total = parts.into_iter().fold(T::zero(), |a, b| a + b);
    let c_m = T::from_q(&(crate::scalar::qpow(&crate::scalar::q(3, 5), k) * crate::harmonic::renorm_q(m)));
    let inactive = T::from_q(&crate::addressing::pow3_q((k - m as i64 - 1) * (n as i64 - 1)));
    Ok(total * c_m * inactive)
}

/// Exact `max - min` of `u` over the cell `F_w(S0^n)`.
pub fn oscillation<T: Scalar>(u: &PwFn<T>, w: &ProductWord) -> Result<T> {
    let (tops, _) = top_cells(u, w)?;
    let mut hi: Option<T> = None;
    let mut lo: Option<T> = None;
    for (t, _) in &tops {
        for x in t {
            if hi.as_ref().is_none_or(|h| x > h) {
                hi = Some(x.clone());
            }
            if lo.as_ref().is_none_or(|l| x < l) {
                lo = Some(x.clone());
            }
        }
    }
    Ok(hi.unwrap() - lo.unwrap())
}

/// Exact `max` and `min` of `u` over the cell `F_w(S0^n)`.
pub fn max_min_on<T: Scalar>(u: &PwFn<T>, w: &ProductWord) -> Result<(T, T)> {
    let (tops, _) = top_cells(u, w)?;
    let mut hi = tops[0].0[0].clone();
    let mut lo = hi.clone();
    for (t, _) in &tops {
        for x in t {
            if *x > hi {
                hi = x.clone();
            }
            if *x < lo {
                lo = x.clone();
            }
        }
    }
    Ok((hi, lo))
}

/// One summand of a measure that is a product over the axes: per axis,
/// per level-`m` cell, the mass assigned to each of the three corners.
#[derive(Clone, Debug)]
pub struct FactorTerm {
    pub coef: f64,
    pub axes: Vec<Arc<Vec<[f64; 3]>>>,
}

/// A measure on the level-`m` cells of a window, written as a sum of
/// products of corner-weighted one-factor measures.
#[derive(Clone, Debug)]
pub struct FactorizedMeasure {
    pub n: usize,
    pub blowup: u32,
    pub level: usize,
    pub terms: Vec<FactorTerm>,
}

fn diffuse(masses: impl Iterator<Item = f64>) -> Arc<Vec<[f64; 3]>> {
    Arc::new(masses.map(|x| [x / 3.0; 3]).collect())
}

fn same_point(p: (i128, i128, i64), q: (i128, i128, i64)) -> bool {
    let base = p.2.min(q.2);
    let s = |v: i128, e: i64| v << ((e - base) as u32);
    s(p.0, p.2) == s(q.0, q.2) && s(p.1, p.2) == s(q.1, q.2)
}

fn dirac_weights(c: &CornerSpec, k: u32, m: usize) -> Result<Option<Arc<Vec<[f64; 3]>>>> {
    let (pa, pb) = tri_point(c.word.symbols(), c.corner);
    let pe = c.blowup as i64 - c.word.len() as i64;
    let p = (pa, pb, pe);
    if !Cell::of(k, &Word::empty()).contains_tri(pa, pb, pe) {
        return Ok(None);
    }
    for idx in 0..pow3(m) {
        let cell = Cell::of(k, &Word::from_index(idx, m));
        for corner in 1..=3u8 {
            if same_point(cell.corner_tri(corner), p) {
                let mut v = vec![[0.0; 3]; pow3(m)];
                v[idx][corner as usize - 1] = 1.0;
                return Ok(Some(Arc::new(v)));
            }
        }
    }
    Err(Error::arg(
        "measure",
        format!("dirac point {}:{} corner {} is not a level-{m} lattice point of the window", c.blowup, c.word, c.corner),
    ))
}

fn factorize_1d(kind: &MeasureKind, k: u32, m: usize) -> Result<Vec<(f64, Arc<Vec<[f64; 3]>>)>> {
    Ok(match kind {
        MeasureKind::Hausdorff => vec![(1.0, diffuse(std::iter::repeat_n(3f64.powi(k as i32 - m as i32), pow3(m))))],
        MeasureKind::Kusuoka => vec![(1.0, diffuse(kusuoka_window(k, m).iter().copied()))],
        MeasureKind::HarmonicEnergy { .. } => {
            let masses: Vec<f64> = (0..pow3(m))
                .map(|i| cell_measure(kind, &Cell::of(k, &Word::from_index(i, m))).map(|x| x.to_f64()))
                .collect::<Result<_>>()?;
            vec![(1.0, diffuse(masses.into_iter()))]
        }
        MeasureKind::DiracCorner(c) => dirac_weights(c, k, m)?.map(|w| vec![(1.0, w)]).unwrap_or_default(),
        MeasureKind::Product { factors } => {
            if factors.len() != 1 {
                return Err(Error::arg("factors", "one-factor product expected"));
            }
            factorize_1d(&factors[0], k, m)?
        }
        MeasureKind::WeightedSum { terms } => {
            let mut out = Vec::new();
            for t in terms {
                let c = t.weight.to_f64();
                out.extend(factorize_1d(&t.measure, k, m)?.into_iter().map(|(w, v)| (w * c, v)));
            }
            out
        }
    })
}

impl FactorizedMeasure {
    pub fn new(kind: &MeasureKind, n: usize, blowup: u32, level: usize) -> Result<Self> {
        kind.validate(n)?;
        let terms = Self::terms(kind, n, blowup, level)?;
        Ok(FactorizedMeasure { n, blowup, level, terms })
    }

    fn terms(kind: &MeasureKind, n: usize, k: u32, m: usize) -> Result<Vec<FactorTerm>> {
        Ok(match kind {
            MeasureKind::Hausdorff | MeasureKind::Kusuoka => {
                let one = factorize_1d(kind, k, m)?.remove(0).1;
                vec![FactorTerm { coef: 1.0, axes: vec![one; n] }]
            }
            MeasureKind::HarmonicEnergy { .. } | MeasureKind::DiracCorner(_) => factorize_1d(kind, k, m)?
                .into_iter()
                .map(|(coef, w)| FactorTerm { coef, axes: vec![w] })
                .collect(),
            MeasureKind::Product { factors } => {
                let mut acc = vec![FactorTerm { coef: 1.0, axes: Vec::new() }];
                for f in factors {
                    let parts = factorize_1d(f, k, m)?;
                    let mut next = Vec::with_capacity(acc.len() * parts.len());
                    for t in &acc {
                        for (c, w) in &parts {
                            let mut axes = t.axes.clone();
                            axes.push(w.clone());
                            next.push(FactorTerm { coef: t.coef * c, axes });
                        }
                    }
                    acc = next;
                }
                acc
            }
            MeasureKind::WeightedSum { terms } => {
                let mut out = Vec::new();
                for t in terms {
                    let c = t.weight.to_f64();
                    for mut ft in Self::terms(&t.measure, n, k, m)? {
                        ft.coef *= c;
                        out.push(ft);
                    }
                }
                out
            }
        })
    }

    /// Total mass.
    pub fn total(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.axes.iter().map(|w| w.iter().map(|c| c[0] + c[1] + c[2]).sum::<f64>()).product::<f64>())
            .sum()
    }

    /// Mass carried by each of the `3^n` corners of the leaf with per-axis indices `idx`.
    pub(crate) fn corner_weights(&self, idx: &[usize], out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            for (c, o) in out.iter_mut().enumerate() {
                let mut w = t.coef;
                let mut rest = c;
                for a in (0..n).rev() {
                    w *= t.axes[a][idx[a]][rest % 3];
                    rest /= 3;
                    if w == 0.0 {
                        break;
                    }
                }
                *o += w;
            }
        }
    }
}

/// Accumulates `sum sigma(corner) |u|^q`, or the max of `|u|` over charged corners for `q = inf`.
pub(crate) fn lq_leaf(sigma: &FactorizedMeasure, q: f64, idx: &[usize], t: &[f64], buf: &mut [f64], acc: &mut f64) {
    sigma.corner_weights(idx, buf);
    for (x, &w) in t.iter().zip(buf.iter()) {
        if w > 0.0 {
            if q.is_infinite() {
                *acc = acc.max(x.abs());
            } else {
                *acc += w * x.abs().powf(q);
            }
        }
    }
}

/// `||u||_{L^q(sigma)}` on the window by corner quadrature at level `m`.
pub fn lq_norm(u: &WindowFn<f64>, sigma: &MeasureKind, q: f64, m: usize) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::hypothesis(format!("q >= 1 (got q = {q})")));
    }
    check_window(u, m)?;
    let fm = FactorizedMeasure::new(sigma, u.arity(), u.blowup, m)?;
    lq_norm_factorized(u, &fm, q)
}

pub fn lq_norm_factorized(u: &WindowFn<f64>, fm: &FactorizedMeasure, q: f64) -> Result<f64> {
    check_window(u, fm.level)?;
    if fm.n != u.arity() || fm.blowup != u.blowup {
        return Err(Error::arg("measure", "measure and function live on different windows"));
    }
    let pn = pow3(fm.n);
    let parts = fold_leaves(
        &u.base,
        &ProductWord::empty(fm.n),
        fm.level,
        || (0.0, vec![0.0; pn]),
        |(acc, buf), idx, t| lq_leaf(fm, q, idx, t, buf, acc),
    )?;
    let vals: Vec<f64> = parts.into_iter().map(|p| p.0).collect();
    if q.is_infinite() {
        Ok(vals.into_iter().fold(0.0, f64::max))
    } else {
        Ok(pairwise_sum(&vals).powf(1.0 / q))
    }
}

/// Exact `||u||_{L^1(nu)}`-style check value: `sum nu(cell) mean |corners|` with rationals.
pub fn l1_hausdorff_exact(u: &PwFn<Q>, m: usize) -> Result<Q> {
    let n = u.arity();
    let parts = fold_leaves(u, &ProductWord::empty(n), m, Q::zero, |acc, _, t| {
        for x in t {
            *acc += x.abs();
        }
    })?;
    let total: Q = parts.into_iter().sum();
    Ok(total * crate::addressing::pow3_q(-((m as i64 + 1) * n as i64)))
}
