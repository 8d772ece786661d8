//! Exact arithmetic in `Q(sqrt 3)`, the reduced 2x2 word products and their
//! spectra, periodic trace-growth limits and the sharp scaling evidence.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use crate::addressing::{csv_err, pow3, Word};
use crate::error::{Error, Result};
use crate::measure::{for_each_word_z, kusuoka_from_frob, kusuoka_word, y_product};
use crate::scalar::{ln_q, q, q_serde, q_to_f64, q_to_string, qi, qpow, Q};

/// `a + b sqrt(3)` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QSqrt3 {
    #[serde(with = "q_serde")]
    pub a: Q,
    #[serde(with = "q_serde")]
    pub b: Q,
}

impl QSqrt3 {
    pub fn new(a: Q, b: Q) -> Self {
        QSqrt3 { a, b }
    }

    pub fn rational(a: Q) -> Self {
        QSqrt3 { a, b: Q::zero() }
    }

    pub fn zero() -> Self {
        Self::rational(Q::zero())
    }

    pub fn one() -> Self {
        Self::rational(Q::one())
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Exact sign as -1, 0 or 1.
    pub fn signum(&self) -> i8 {
        let sa = sign_q(&self.a);
        let sb = sign_q(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with 3 b^2
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * qi(3);
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        q_to_f64(&self.a) + q_to_f64(&self.b) * 3f64.sqrt()
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

fn sign_q(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

impl PartialOrd for QSqrt3 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some((self.clone() - o.clone()).signum().cmp(&0))
    }
}

impl Add for QSqrt3 {
    type Output = QSqrt3;
    fn add(self, o: Self) -> Self {
        QSqrt3 { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for QSqrt3 {
    type Output = QSqrt3;
    fn sub(self, o: Self) -> Self {
        QSqrt3 { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Mul for QSqrt3 {
    type Output = QSqrt3;
    fn mul(self, o: Self) -> Self {
        let a = &self.a * &o.a + &self.b * &o.b * qi(3);
        let b = &self.a * &o.b + &self.b * &o.a;
        QSqrt3 { a, b }
    }
}

impl Neg for QSqrt3 {
    type Output = QSqrt3;
    fn neg(self) -> Self {
        QSqrt3 { a: -self.a, b: -self.b }
    }
}

impl fmt::Display for QSqrt3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", q_to_string(&self.a))
        } else {
            write!(f, "{} + {}*sqrt3", q_to_string(&self.a), q_to_string(&self.b))
        }
    }
}

/// 2x2 matrix over `Q(sqrt 3)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat2E(pub [[QSqrt3; 2]; 2]);

impl Mat2E {
    pub fn identity() -> Self {
        Mat2E([[QSqrt3::one(), QSqrt3::zero()], [QSqrt3::zero(), QSqrt3::one()]])
    }

    /// Entries `[[a, b sqrt3], [c sqrt3, d]]` style constructor from pairs.
    pub fn from_pairs(e: [[(Q, Q); 2]; 2]) -> Self {
        Mat2E(e.map(|row| row.map(|(a, b)| QSqrt3::new(a, b))))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = |i: usize, j: usize| {
            self.0[i][0].clone() * o.0[0][j].clone() + self.0[i][1].clone() * o.0[1][j].clone()
        };
        Mat2E([[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]])
    }

    pub fn trace(&self) -> QSqrt3 {
        self.0[0][0].clone() + self.0[1][1].clone()
    }

    pub fn det(&self) -> QSqrt3 {
        self.0[0][0].clone() * self.0[1][1].clone() - self.0[0][1].clone() * self.0[1][0].clone()
    }

    /// `trace(M^t M)`.
    pub fn frob_sq(&self) -> QSqrt3 {
        let mut s = QSqrt3::zero();
        for row in &self.0 {
            for x in row {
                s = s + x.clone() * x.clone();
            }
        }
        s
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        self.0.clone().map(|row| row.map(|x| x.to_f64()))
    }
}

/// Three exact 2x2 generators indexed by the symbols 1, 2, 3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generators(pub [Mat2E; 3]);

impl Default for Generators {
    /// The reduced Kusuoka family `M_i` (restriction of `Y_i` to the plane orthogonal to `(1,1,1)`).
    fn default() -> Self {
        let z = Q::zero;
        Generators([
            Mat2E::from_pairs([[(q(3, 5), z()), (z(), z())], [(z(), z()), (q(1, 5), z())]]),
            Mat2E::from_pairs([[(q(3, 10), z()), (z(), q(-1, 10))], [(z(), q(-1, 10)), (q(1, 2), z())]]),
            Mat2E::from_pairs([[(q(3, 10), z()), (z(), q(1, 10))], [(z(), q(1, 10)), (q(1, 2), z())]]),
        ])
    }
}

impl Generators {
    /// `M_w = M_{w_m} ... M_{w_1}`; identity for the empty word.
    pub fn product(&self, w: &Word) -> Mat2E {
        let mut m = Mat2E::identity();
        for &s in w.symbols() {
            m = self.0[s as usize - 1].mul(&m);
        }
        m
    }
}

pub fn m_product(w: &Word) -> Mat2E {
    Generators::default().product(w)
}

pub fn trace_gram(w: &Word) -> Result<QSqrt3> {
    if w.is_empty() {
        return Err(Error::arg("word", "word must be nonempty"));
    }
    Ok(m_product(w).frob_sq())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    RealDistinct,
    RealRepeated,
    ComplexPair,
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpectrumKind::RealDistinct => "RealDistinct",
            SpectrumKind::RealRepeated => "RealRepeated",
            SpectrumKind::ComplexPair => "ComplexPair",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumClass {
    pub kind: SpectrumKind,
    pub trace: QSqrt3,
    pub det: QSqrt3,
    /// `trace^2 - 4 det`.
    pub disc: QSqrt3,
}

impl SpectrumClass {
    pub fn of(m: &Mat2E) -> Self {
        let trace = m.trace();
        let det = m.det();
        let disc = trace.clone() * trace.clone() - QSqrt3::rational(qi(4)) * det.clone();
        let kind = match disc.signum() {
            1 => SpectrumKind::RealDistinct,
            0 => SpectrumKind::RealRepeated,
            _ => SpectrumKind::ComplexPair,
        };
        SpectrumClass { kind, trace, det, disc }
    }

    /// Exact eigenvalues when both are rational.
    pub fn rational_eigenvalues(&self) -> Option<(Q, Q)> {
        if !self.trace.is_rational() || !self.disc.is_rational() || self.kind == SpectrumKind::ComplexPair {
            return None;
        }
        let r = rational_sqrt(&self.disc.a)?;
        let t = &self.trace.a;
        let two = qi(2);
        Some(((t + &r) / &two, (t - &r) / &two))
    }

    /// Eigenvalues as `(re, im)` pairs, larger real part first.
    pub fn eigenvalues_f64(&self) -> [(f64, f64); 2] {
        let t = self.trace.to_f64();
        let d = self.disc.to_f64();
        if self.kind == SpectrumKind::ComplexPair {
            let im = (-d).sqrt() / 2.0;
            [(t / 2.0, im), (t / 2.0, -im)]
        } else {
            let r = d.max(0.0).sqrt();
            [((t + r) / 2.0, 0.0), ((t - r) / 2.0, 0.0)]
        }
    }
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &n * &n == *x.numer() && &d * &d == *x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// Exact `x^(1/k)` when it is rational.
fn rational_root(x: &Q, k: u32) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().nth_root(k);
    let d = x.denom().nth_root(k);
    if n.pow(k) == *x.numer() && d.pow(k) == *x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

pub fn spectrum_class(w: &Word) -> Result<SpectrumClass> {
    if w.is_empty() {
        return Err(Error::arg("word", "word must be nonempty"));
    }
    Ok(SpectrumClass::of(&m_product(w)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub word: Word,
    pub trace: QSqrt3,
    pub det: QSqrt3,
    pub disc_sign: i8,
    pub class: SpectrumKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub max_len: usize,
    pub witnesses: Vec<Word>,
    pub minimal_complex_length: Option<usize>,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// Columns `word,trace_a,trace_b,det,disc_sign,class`; exact parts as `num/den`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["word", "trace_a", "trace_b", "det", "disc_sign", "class"]).map_err(csv_err)?;
        for r in &self.rows {
            wtr.write_record([
                r.word.to_string(),
                q_to_string(&r.trace.a),
                q_to_string(&r.trace.b),
                r.det.to_string(),
                r.disc_sign.to_string(),
                r.class.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

/// All nonempty words up to `max_len`, classified exactly. Rows are sorted
/// by length, then lexicographically, whatever the thread count.
pub fn minimal_complex_word(max_len: usize, budget: u128, gens: &Generators) -> Result<ScanResult> {
    if max_len == 0 {
        return Err(Error::arg("max_len", "must be at least 1"));
    }
    let words = 3u128.checked_pow(max_len as u32 + 1).unwrap_or(u128::MAX) / 2;
    Error::check_budget(&format!("scan words 3^{max_len}"), words, budget)?;
    let mut rows: Vec<ScanRow> = (1..=3u8)
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut stack = vec![(vec![first], gens.0[first as usize - 1].clone())];
            while let Some((w, m)) = stack.pop() {
                let c = SpectrumClass::of(&m);
                out.push(ScanRow {
                    word: Word::new(w.clone()).unwrap(),
                    trace: c.trace,
                    det: c.det,
                    disc_sign: c.disc.signum(),
                    class: c.kind,
                });
                if w.len() < max_len {
                    for s in 1..=3u8 {
                        let mut w2 = w.clone();
                        w2.push(s);
                        stack.push((w2, gens.0[s as usize - 1].mul(&m)));
                    }
                }
            }
            out
        })
        .collect();
    rows.sort_by(|a, b| (a.word.len(), &a.word).cmp(&(b.word.len(), &b.word)));
    let witnesses: Vec<Word> =
        rows.iter().filter(|r| r.class == SpectrumKind::ComplexPair).map(|r| r.word.clone()).collect();
    let minimal_complex_length = witnesses.iter().map(|w| w.len()).min();
    Ok(ScanResult { max_len, witnesses, minimal_complex_length, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub k: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicLimit {
    pub word: Word,
    pub class: SpectrumKind,
    /// `trace_gram(word^k)^(1/(k |word|))`.
    pub values: Vec<LimitPoint>,
    /// `rho(M_word)^(2/|word|)` as `num/den` when rational.
    pub exact_limit: Option<String>,
    pub limit_f64: f64,
    /// Exact sign of the limit minus `|det M_word|^(1/|word|)`.
    pub vs_det_floor: i8,
}

/// Growth of the Gram trace along the periodic word `word^k`, `k <= k_max`.
pub fn periodic_limit(word: &Word, k_max: usize, gens: &Generators) -> Result<PeriodicLimit> {
    if word.is_empty() {
        return Err(Error::arg("word", "word must be nonempty"));
    }
    let len = word.len();
    let base = gens.product(word);
    let class = SpectrumClass::of(&base);
    let mut values = Vec::with_capacity(k_max);
    let mut m = Mat2E::identity();
    for k in 1..=k_max {
        m = base.mul(&m);
        let t = m.frob_sq();
        let value = if t.is_rational() && t.a.is_positive() {
            (ln_q(&t.a) / (k * len) as f64).exp()
        } else {
            t.to_f64().powf(1.0 / (k * len) as f64)
        };
        values.push(LimitPoint { k, value });
    }
    let rational = class.trace.is_rational() && class.det.is_rational();
    let rho_sq: Option<Q> = match class.kind {
        SpectrumKind::ComplexPair if class.det.is_rational() => Some(class.det.a.clone()),
        SpectrumKind::RealRepeated if class.trace.is_rational() => Some(&class.trace.a * &class.trace.a / qi(4)),
        SpectrumKind::RealDistinct => class.rational_eigenvalues().map(|(a, b)| {
            let m = if a.abs() >= b.abs() { a } else { b };
            &m * &m
        }),
        _ => None,
    };
    let exact = rho_sq.as_ref().and_then(|r| rational_root(r, len as u32));
    let [(r1, i1), (r2, i2)] = class.eigenvalues_f64();
    let rho = (r1.hypot(i1)).max(r2.hypot(i2));
    let limit_f64 = match &exact {
        Some(e) => q_to_f64(e),
        None => rho.powf(2.0 / len as f64),
    };
    let vs_det_floor: i8 = match class.kind {
        SpectrumKind::ComplexPair | SpectrumKind::RealRepeated => 0,
        SpectrumKind::RealDistinct if rational => {
            // rho^2 - |det| = (D + |t| sqrt D)/2 for det > 0 and (t^2 + |t| sqrt D)/2 otherwise
            if class.det.a.is_positive() || !class.trace.a.is_zero() {
                1
            } else {
                0
            }
        }
        SpectrumKind::RealDistinct => {
            let floor = class.det.to_f64().abs();
            match (rho * rho).partial_cmp(&floor) {
                Some(Ordering::Greater) => 1,
                Some(Ordering::Less) => -1,
                _ => 0,
            }
        }
    };
    Ok(PeriodicLimit {
        word: word.clone(),
        class: class.kind,
        values,
        exact_limit: exact.as_ref().map(q_to_string),
        limit_f64,
        vs_det_floor,
    })
}

impl PeriodicLimit {
    /// Columns `word,k,value,exact_limit`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["word", "k", "value", "exact_limit"]).map_err(csv_err)?;
        let lim = self.exact_limit.clone().unwrap_or_else(|| format!("{:e}", self.limit_f64));
        for p in &self.values {
            wtr.write_record([self.word.to_string(), p.k.to_string(), format!("{:.17e}", p.value), lim.clone()])
                .map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetBoundReport {
    pub checked: usize,
    pub violations: Vec<Word>,
    /// Words where `det M_w` differs from `(3/25)^|w|`.
    pub det_mismatches: Vec<Word>,
}

/// `trace_gram(w) >= 2 |det M_w|`, and `det M_w = (3/25)^|w|`, for every sampled word.
pub fn det_lower_bound_check(words: &[Word], gens: &Generators) -> DetBoundReport {
    let mut violations = Vec::new();
    let mut det_mismatches = Vec::new();
    for w in words {
        let m = gens.product(w);
        let det = m.det();
        if det != QSqrt3::rational(qpow(&q(3, 25), w.len() as i64)) {
            det_mismatches.push(w.clone());
        }
        let bound = QSqrt3::rational(qi(2)) * det.abs();
        if m.frob_sq() < bound {
            violations.push(w.clone());
        }
    }
    DetBoundReport { checked: words.len(), violations, det_mismatches }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QReductionReport {
    /// Largest entry error of `Q^t Y_i Q - diag(M_i, 0)` over `i`.
    pub max_block_error: f64,
    pub gram_words_checked: usize,
    pub gram_mismatches: Vec<Word>,
    pub pass: bool,
}

/// Orthonormal basis adapted to the plane orthogonal to `(1,1,1)`, columns in order.
pub fn q_basis() -> [[f64; 3]; 3] {
    let s6 = 6f64.sqrt();
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    [[2.0 / s6, 0.0, 1.0 / s3], [-1.0 / s6, 1.0 / s2, 1.0 / s3], [-1.0 / s6, -1.0 / s2, 1.0 / s3]]
}

/// Float block check plus exact Gram-trace equality `|M_w|_F^2 = |Y_w|_F^2` for words up to `max_len`.
pub fn q_reduction_check(max_len: usize) -> QReductionReport {
    let qb = q_basis();
    let gens = Generators::default();
    let mut max_err: f64 = 0.0;
    for i in 1..=3u8 {
        let y = y_product(&Word::new(vec![i]).unwrap()).map(q_to_f64);
        let mf = gens.0[i as usize - 1].to_f64();
        for r in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s += qb[a][r] * y.0[a][b] * qb[b][c];
                    }
                }
                let want = if r < 2 && c < 2 { mf[r][c] } else { 0.0 };
                max_err = max_err.max((s - want).abs());
            }
        }
    }
    let mut mismatches = Vec::new();
    let mut checked = 0;
    // walk 2x2 products alongside the integer 3x3 products
    let mut m_stack: Vec<Mat2E> = vec![Mat2E::identity()];
    let mut last_len = 0usize;
    let mut word_buf: Vec<u8> = Vec::new();
    for_each_word_z(max_len, |w, z| {
        while last_len >= w.len() && last_len > 0 {
            m_stack.pop();
            word_buf.pop();
            last_len -= 1;
        }
        if w.is_empty() {
            return;
        }
        let s = *w.last().unwrap();
        let next = gens.0[s as usize - 1].mul(m_stack.last().unwrap());
        m_stack.push(next);
        word_buf.push(s);
        last_len = w.len();
        checked += 1;
        let gram = m_stack.last().unwrap().frob_sq();
        let frob: BigInt = BigInt::from(z.frob_sq());
        let y_frob = Q::new(frob, BigInt::from(25).pow(w.len() as u32));
        if gram != QSqrt3::rational(y_frob) {
            mismatches.push(Word::new(w.to_vec()).unwrap());
        }
    });
    QReductionReport {
        max_block_error: max_err,
        gram_words_checked: checked,
        pass: max_err <= 1e-12 && mismatches.is_empty(),
        gram_mismatches: mismatches,
    }
}

/// `1 / delta_s = log(5/3) / log 3`.
pub fn inv_delta_s() -> f64 {
    (5.0f64 / 3.0).ln() / 3f64.ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub m: usize,
    pub exponent: f64,
    /// `log(mu_m / mu_prev) / log(nu_m / nu_prev)` between consecutive sampled lengths.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEvidence {
    pub max_level: usize,
    pub cells_checked: usize,
    /// Cells with `mu > (3/5)^m`, i.e. above `nu^(1/delta_s)`.
    pub upper_violations: Vec<Word>,
    /// Cells with `mu < (1/5)^m / 2`, i.e. below `nu^(1 + 1/delta_s) / 2`.
    pub lower_violations: Vec<Word>,
    pub ones: Vec<ExponentPoint>,
    pub periodic_word: Word,
    pub periodic: Vec<ExponentPoint>,
    pub target_small: f64,
    pub target_large: f64,
}

/// Universal two-sided bounds on all cells up to `max_level`, and the exponent
/// sequences along `1^m` (lengths listed) and `(periodic)^k` for `k <= reps`.
pub fn sharp_delta_report(max_level: usize, ones_lengths: &[usize], periodic: &Word, reps: usize) -> ExponentEvidence {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut cells = 0;
    let half = q(1, 2);
    let ups: Vec<Q> = (0..=max_level).map(|m| qpow(&q(3, 5), m as i64)).collect();
    let lows: Vec<Q> = (0..=max_level).map(|m| &half * qpow(&q(1, 5), m as i64)).collect();
    for_each_word_z(max_level, |w, z| {
        cells += 1;
        let mu = kusuoka_from_frob(BigInt::from(z.frob_sq()), w.len());
        if mu > ups[w.len()] {
            upper.push(Word::new(w.to_vec()).unwrap());
        }
        if mu < lows[w.len()] {
            lower.push(Word::new(w.to_vec()).unwrap());
        }
    });
    let ln3 = 3f64.ln();
    let series = |words: Vec<(usize, Word)>| {
        let mut out: Vec<ExponentPoint> = Vec::new();
        let mut prev: Option<(usize, f64)> = None;
        for (m, w) in words {
            let lmu = ln_q(&kusuoka_word(&w));
            let exponent = lmu / (-(m as f64) * ln3);
            let slope = prev.map(|(pm, pl)| (lmu - pl) / (-((m - pm) as f64) * ln3));
            prev = Some((m, lmu));
            out.push(ExponentPoint { m, exponent, slope });
        }
        out
    };
    let ones = series(ones_lengths.iter().map(|&m| (m, Word::constant(1, m))).collect());
    let per = series((1..=reps).map(|k| (k * periodic.len(), periodic.repeat(k))).collect());
    ExponentEvidence {
        max_level,
        cells_checked: cells,
        upper_violations: upper,
        lower_violations: lower,
        ones,
        periodic_word: periodic.clone(),
        periodic: per,
        target_small: inv_delta_s(),
        target_large: 1.0 + inv_delta_s(),
    }
}

/// Number of words of length `1..=max_len`.
pub fn scan_size(max_len: usize) -> usize {
    (1..=max_len).map(pow3).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn sign_cases() {
        let x = |a: (i64, i64), b: (i64, i64)| QSqrt3::new(q(a.0, a.1), q(b.0, b.1));
        assert_eq!(x((0, 1), (0, 1)).signum(), 0);
        assert_eq!(x((2, 1), (-1, 1)).signum(), 1);
        assert_eq!(x((1, 1), (-1, 1)).signum(), -1);
        assert_eq!(x((-2, 1), (1, 1)).signum(), -1);
        assert_eq!(x((-1, 1), (1, 1)).signum(), 1);
        assert_eq!(x((3, 1), (-1, 1)).signum(), 1);
        assert_eq!(x((-3, 1), (0, 1)).signum(), -1);
    }

    #[test]
    fn products() {
        let g = Generators::default();
        assert_eq!(m_product(&w("1")), g.0[0]);
        assert_eq!(m_product(&w("")), Mat2E::identity());
        let m = m_product(&w("312"));
        let want = Mat2E::from_pairs([
            [(q(6, 125), Q::zero()), (Q::zero(), q(1, 125))],
            [(Q::zero(), q(-1, 125)), (q(4, 125), Q::zero())],
        ]);
        assert_eq!(m, want);
        for i in 0..3 {
            assert_eq!(g.0[i].det(), QSqrt3::rational(q(3, 25)));
        }
    }

    #[test]
    fn gram_examples() {
        assert_eq!(trace_gram(&w("1")).unwrap(), QSqrt3::rational(q(2, 5)));
        assert_eq!(trace_gram(&w("312")).unwrap(), QSqrt3::rational(q(58, 15625)));
        assert!(trace_gram(&w("")).is_err());
    }

    #[test]
    fn classes() {
        let c = spectrum_class(&w("312")).unwrap();
        assert_eq!(c.kind, SpectrumKind::ComplexPair);
        assert_eq!(c.trace, QSqrt3::rational(q(2, 25)));
        assert_eq!(c.det, QSqrt3::rational(qpow(&q(3, 25), 3)));
        assert_eq!(c.disc, QSqrt3::rational(q(-8, 15625)));
        let c = spectrum_class(&w("1")).unwrap();
        assert_eq!(c.kind, SpectrumKind::RealDistinct);
        assert_eq!(c.rational_eigenvalues(), Some((q(3, 5), q(1, 5))));
        let c = spectrum_class(&w("11")).unwrap();
        assert_eq!(c.rational_eigenvalues(), Some((q(9, 25), q(1, 25))));
    }

    #[test]
    fn scans() {
        let g = Generators::default();
        let s = minimal_complex_word(2, u128::MAX, &g).unwrap();
        assert!(s.witnesses.is_empty());
        let s = minimal_complex_word(3, u128::MAX, &g).unwrap();
        assert_eq!(s.minimal_complex_length, Some(3));
        assert!(s.witnesses.contains(&w("312")));
        assert_eq!(s.rows.len(), scan_size(3));
        assert!(minimal_complex_word(12, 1000, &g).is_err());
    }

    #[test]
    fn limits() {
        let g = Generators::default();
        let p = periodic_limit(&w("312"), 12, &g).unwrap();
        assert_eq!(p.exact_limit.as_deref(), Some("3/25"));
        assert_eq!(p.vs_det_floor, 0);
        let p = periodic_limit(&w("1"), 3, &g).unwrap();
        assert_eq!(p.exact_limit.as_deref(), Some("9/25"));
        assert_eq!(p.vs_det_floor, 1);
    }
}
