//! Hausdorff, Kusuoka, energy, Dirac, product and sum measures evaluated
//! exactly on cells, with Radon-Nikodym ratios and scaling-condition checks.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, OnceLock, RwLock};

use crate::addressing::{csv_err, pow3_q, Cell, ProductWord, Word};
use crate::error::{Error, Result};
use crate::harmonic::energy0;
use crate::mat::{dot, Mat3};
use crate::scalar::{ln_q, q, q3_serde, q_serde, q_to_f64, q_to_string, qi, qpow, Q};

/// `5 Y_i` as integers, `Y_i = P A_i P`.
pub const Z5: [[[i64; 3]; 3]; 3] = [
    [[2, -1, -1], [-1, 1, 0], [-1, 0, 1]],
    [[1, -1, 0], [-1, 2, -1], [0, -1, 1]],
    [[1, 0, -1], [0, 1, -1], [-1, -1, 2]],
];

/// `3P` as integers; stands in for the empty product inside measures.
pub const P3: [[i64; 3]; 3] = [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]];

#[derive(Clone, Debug)]
pub struct YConstants {
    pub y: [Mat3<Q>; 3],
}

pub fn y_constants() -> &'static YConstants {
    static C: OnceLock<YConstants> = OnceLock::new();
    C.get_or_init(|| YConstants { y: std::array::from_fn(|i| Mat3::from_fn(|r, c| q(Z5[i][r][c], 5))) })
}

fn z_big(i: u8) -> Mat3<BigInt> {
    let z = &Z5[i as usize - 1];
    Mat3::from_fn(|r, c| BigInt::from(z[r][c]))
}

pub fn z_i128(i: u8) -> Mat3<i128> {
    let z = &Z5[i as usize - 1];
    Mat3::from_fn(|r, c| z[r][c] as i128)
}

/// `Z_w = 5^|w| Y_w` with `Y_w = Y_{w_m} ... Y_{w_1}`; identity for the empty word.
pub fn z_product(w: &Word) -> Mat3<BigInt> {
    let mut z = Mat3::<BigInt>::identity();
    for &s in w.symbols() {
        z = z_big(s).mul(&z);
    }
    z
}

/// `Y_w` exactly; identity for the empty word.
pub fn y_product(w: &Word) -> Mat3<Q> {
    let d = Q::from_integer(BigInt::from(5).pow(w.len() as u32));
    z_product(w).map(|x| Q::from_integer(x.clone()) / d.clone())
}

/// `15^m` as a big integer.
fn pow15(m: usize) -> BigInt {
    BigInt::from(15).pow(m as u32)
}

/// Kusuoka mass of `F_w(S0)` given `|Z_w|_F^2`.
pub fn kusuoka_from_frob(frob: BigInt, m: usize) -> Q {
    if m == 0 {
        return Q::one();
    }
    Q::new(frob, pow15(m) * 2)
}

/// Kusuoka mass of `F_w(S0)`, 1 for the empty word.
pub fn kusuoka_word(w: &Word) -> Q {
    kusuoka_from_frob(z_product(w).frob_sq(), w.len())
}

/// `mu<u>(F_w S0)` for `u` harmonic with corner values `b`.
pub fn energy_word(b: &[Q; 3], w: &Word) -> Q {
    if w.is_empty() {
        return energy0(b);
    }
    let zb = z_product(w).map(|x| Q::from_integer(x.clone())).mul_vec(b);
    dot(&zb, &zb) * q(3, 2) / Q::from_integer(pow15(w.len()))
}

/// Visits all words of length `<= max_len` depth first, with `Z_w` in `i128`.
pub fn for_each_word_z(max_len: usize, mut f: impl FnMut(&[u8], &Mat3<i128>)) {
    assert!(max_len <= 36, "i128 products limited to length 36");
    let z: [Mat3<i128>; 3] = [z_i128(1), z_i128(2), z_i128(3)];
    let mut word: Vec<u8> = Vec::with_capacity(max_len);
    let mut stack: Vec<Mat3<i128>> = vec![Mat3::identity()];
    fn rec(
        word: &mut Vec<u8>,
        stack: &mut Vec<Mat3<i128>>,
        z: &[Mat3<i128>; 3],
        max_len: usize,
        f: &mut dyn FnMut(&[u8], &Mat3<i128>),
    ) {
        f(word, stack.last().unwrap());
        if word.len() == max_len {
            return;
        }
        for s in 1..=3u8 {
            let next = z[s as usize - 1].mul(stack.last().unwrap());
            word.push(s);
            stack.push(next);
            rec(word, stack, z, max_len, f);
            stack.pop();
            word.pop();
        }
    }
    rec(&mut word, &mut stack, &z, max_len, &mut f);
}

/// Write-once cache of integer word products keyed by the word string.
#[derive(Debug, Default)]
pub struct ProductCache {
    map: RwLock<HashMap<String, Arc<Mat3<BigInt>>>>,
}

impl ProductCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn z_product(&self, w: &Word) -> Arc<Mat3<BigInt>> {
        let key = w.to_string();
        if let Some(z) = self.map.read().unwrap().get(&key) {
            return z.clone();
        }
        let z = Arc::new(z_product(w));
        self.map.write().unwrap().entry(key).or_insert(z).clone()
    }

    /// Stores a precomputed entry unless present; existing entries are never replaced.
    pub fn insert(&self, w: &Word, z: Mat3<BigInt>) {
        self.map.write().unwrap().entry(w.to_string()).or_insert_with(|| Arc::new(z));
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(String, Arc<Mat3<BigInt>>)> {
        let mut v: Vec<_> = self.map.read().unwrap().iter().map(|(k, z)| (k.clone(), z.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn kusuoka(&self, w: &Word) -> Q {
        kusuoka_from_frob(self.z_product(w).frob_sq(), w.len())
    }
}

/// A point `F_1^(-blowup) F_word (p_corner)` carrying a unit mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    #[serde(default)]
    pub blowup: u32,
    #[serde(default)]
    pub word: Word,
    pub corner: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    #[serde(with = "q_serde")]
    pub weight: Q,
    pub measure: MeasureKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    Hausdorff,
    Kusuoka,
    HarmonicEnergy {
        #[serde(with = "q3_serde")]
        boundary: [Q; 3],
    },
    DiracCorner(CornerSpec),
    Product {
        factors: Vec<MeasureKind>,
    },
    WeightedSum {
        terms: Vec<WeightedTerm>,
    },
}

impl MeasureKind {
    /// Checks arity and weight signs against the ambient factor count.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            MeasureKind::Hausdorff | MeasureKind::Kusuoka => Ok(()),
            MeasureKind::HarmonicEnergy { .. } if n != 1 => {
                Err(Error::arg("measure", "harmonic_energy is a one-factor measure; wrap it in a product"))
            }
            MeasureKind::DiracCorner(c) => {
                if n != 1 {
                    return Err(Error::arg("measure", "dirac_corner is a one-factor measure; wrap it in a product"));
                }
                if !(1..=3).contains(&c.corner) {
                    return Err(Error::arg("corner", format!("corner {} not in 1..=3", c.corner)));
                }
                Ok(())
            }
            MeasureKind::HarmonicEnergy { .. } => Ok(()),
            MeasureKind::Product { factors } => {
                if factors.len() != n {
                    return Err(Error::arg(
                        "factors",
                        format!("product of {} factors on a space with {n} factors", factors.len()),
                    ));
                }
                factors.iter().try_for_each(|f| f.validate(1))
            }
            MeasureKind::WeightedSum { terms } => {
                for t in terms {
                    if t.weight.is_negative() {
                        return Err(Error::arg("weight", format!("negative weight {}", q_to_string(&t.weight))));
                    }
                    t.measure.validate(n)?;
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::Hausdorff => "hausdorff",
            MeasureKind::Kusuoka => "kusuoka",
            MeasureKind::HarmonicEnergy { .. } => "harmonic_energy",
            MeasureKind::DiracCorner(_) => "dirac_corner",
            MeasureKind::Product { .. } => "product",
            MeasureKind::WeightedSum { .. } => "weighted_sum",
        }
    }
}

fn hausdorff_1d(cell: &Cell) -> Q {
    pow3_q(cell.blowup as i64 - cell.level() as i64)
}

fn kusuoka_1d(cell: &Cell) -> Q {
    let k = cell.blowup as usize;
    let m = cell.level();
    if m <= k {
        pow3_q((k - m) as i64)
    } else {
        kusuoka_word(&cell.word.coord(0).suffix_from(k))
    }
}

fn energy_1d(b: &[Q; 3], cell: &Cell) -> Q {
    let c = cell.canonical();
    if c.blowup == 0 {
        energy_word(b, &c.word.coord(0))
    } else if c.level() == 0 {
        energy0(b)
    } else {
        Q::zero()
    }
}

fn dirac_1d(p: &CornerSpec, cell: &Cell) -> Q {
    let (a, b) = crate::addressing::tri_point(p.word.symbols(), p.corner);
    let e = p.blowup as i64 - p.word.len() as i64;
    if cell.contains_tri(a, b, e) {
        Q::one()
    } else {
        Q::zero()
    }
}

/// Exact mass of a cell.
pub fn cell_measure(kind: &MeasureKind, cell: &Cell) -> Result<Q> {
    let n = cell.arity();
    kind.validate(n)?;
    Ok(measure_unchecked(kind, cell))
}

fn measure_unchecked(kind: &MeasureKind, cell: &Cell) -> Q {
    let n = cell.arity();
    match kind {
        MeasureKind::Hausdorff => (0..n).map(|a| hausdorff_1d(&cell.project(a))).product(),
        MeasureKind::Kusuoka => (0..n).map(|a| kusuoka_1d(&cell.project(a))).product(),
        MeasureKind::HarmonicEnergy { boundary } => energy_1d(boundary, cell),
        MeasureKind::DiracCorner(p) => dirac_1d(p, cell),
        MeasureKind::Product { factors } => {
            factors.iter().enumerate().map(|(a, f)| measure_unchecked(f, &cell.project(a))).product()
        }
        MeasureKind::WeightedSum { terms } => {
            terms.iter().map(|t| t.weight.clone() * measure_unchecked(&t.measure, cell)).sum()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub kind: MeasureKind,
    pub cell: String,
    pub value: String,
    pub float: f64,
}

pub fn measure_report(kind: &MeasureKind, cell: &Cell) -> Result<MeasureReport> {
    let v = cell_measure(kind, cell)?;
    Ok(MeasureReport { kind: kind.clone(), cell: cell.to_string(), value: q_to_string(&v), float: q_to_f64(&v) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnRatioReport {
    pub outer: Word,
    pub inner: Word,
    #[serde(with = "q_serde")]
    pub ratio: Q,
    #[serde(with = "q_serde")]
    pub lower: Q,
    #[serde(with = "q_serde")]
    pub upper: Q,
    pub pass: bool,
}

/// `mu(F_outer F_inner S0) / mu(F_inner S0)` with its envelope `[(1/15)^m, (3/5)^m]`.
pub fn rn_ratio(outer: &Word, inner: &Word) -> Result<RnRatioReport> {
    if inner.is_empty() {
        return Err(Error::arg("inner", "inner word must be nonempty"));
    }
    let ratio = kusuoka_word(&outer.concat(inner)) / kusuoka_word(inner);
    let m = outer.len() as i64;
    let lower = qpow(&q(1, 15), m);
    let upper = qpow(&q(3, 5), m);
    let pass = lower <= ratio && ratio <= upper;
    Ok(RnRatioReport { outer: outer.clone(), inner: inner.clone(), ratio, lower, upper, pass })
}

/// The word `2 3^(k-1)`.
pub fn extremal_inner_word(k: usize) -> Word {
    Word::new(std::iter::once(2).chain(std::iter::repeat_n(3, k - 1)).collect()).unwrap()
}

/// `mu(F_1^m F_w S0) / mu(F_w S0)` along `w = 2 3^(k-1)`.
pub fn extremal_f1_ratio(m: usize, k: usize) -> Result<Q> {
    if m == 0 || k == 0 {
        return Err(Error::arg(if m == 0 { "m" } else { "k" }, "must be at least 1"));
    }
    Ok(rn_ratio(&Word::constant(1, m), &extremal_inner_word(k))?.ratio)
}

/// `log sigma(cell) / log nu(cell)`.
pub fn scaling_exponent(kind: &MeasureKind, cell: &Cell) -> Result<f64> {
    let nu = cell_measure(&MeasureKind::Hausdorff, cell)?;
    if nu.is_one() {
        return Err(Error::arg("word", "cell has unit Hausdorff measure; exponent undefined"));
    }
    let s = cell_measure(kind, cell)?;
    if s.is_zero() {
        return Err(Error::UndefinedExponent { cell: cell.to_string() });
    }
    Ok(ln_q(&s) / ln_q(&nu))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Upper bounds `sigma <= C nu^(1/delta)`.
    #[serde(rename = "M")]
    M,
    /// Lower bounds `sigma >= nu^(1/delta) / C`, with `delta_lo` on cells of diameter `<= 1`.
    #[serde(rename = "M'")]
    MPrime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub cell: String,
    pub diam: f64,
    pub measure: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub direction: Direction,
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub constant: f64,
    pub checked: usize,
    /// Smallest admissible constant on the sample: largest `sigma / nu^(1/delta)`
    /// for (M), largest `nu^(1/delta) / sigma` for (M'). Infinite when (M') meets a null cell.
    pub observed_constant: f64,
    pub violations: Vec<ConditionRow>,
    #[serde(skip)]
    pub rows: Vec<ConditionRow>,
}

impl ConditionReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["cell", "diam", "measure", "bound", "pass"]).map_err(csv_err)?;
        for r in &self.rows {
            wtr.write_record([
                r.cell.clone(),
                format!("{:e}", r.diam),
                format!("{:e}", r.measure),
                format!("{:e}", r.bound),
                r.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

/// All cells `(k, w)` with `k <= max_blowup` and `|w| <= max_len`.
pub fn standard_sample(n: usize, max_len: usize, max_blowup: u32) -> Vec<Cell> {
    let mut out = Vec::new();
    for k in 0..=max_blowup {
        for m in 0..=max_len {
            for w in ProductWord::all(n, m) {
                out.push(Cell::new(k, w));
            }
        }
    }
    out
}

const REL_TOL: f64 = 1e-12;

/// Checks condition (M) or (M') on the sampled cells.
pub fn condition_check(
    kind: &MeasureKind,
    delta_lo: f64,
    delta_hi: f64,
    c: f64,
    sample: &[Cell],
    direction: Direction,
) -> Result<ConditionReport> {
    if !(delta_lo > 0.0 && delta_lo <= delta_hi) {
        return Err(Error::arg("delta", format!("need 0 < delta_lo <= delta_hi, got {delta_lo}, {delta_hi}")));
    }
    match direction {
        Direction::M if delta_hi < 1.0 => return Err(Error::arg("delta_hi", "condition (M) needs delta_hi >= 1")),
        Direction::MPrime if delta_lo > 1.0 => {
            return Err(Error::arg("delta_lo", "condition (M') needs delta_lo <= 1"))
        }
        _ => {}
    }
    if !(c > 0.0) {
        return Err(Error::arg("constant", "C must be positive"));
    }
    let mut rows = Vec::with_capacity(sample.len());
    let mut violations = Vec::new();
    let mut observed: Option<f64> = None;
    for cell in sample {
        kind.validate(cell.arity())?;
        let s = measure_unchecked(kind, cell);
        let nu = measure_unchecked(&MeasureKind::Hausdorff, cell);
        let small = cell.diameter_log2() <= 0;
        let delta = match (direction, small) {
            (Direction::M, true) | (Direction::MPrime, false) => delta_hi,
            _ => delta_lo,
        };
        let ln_nu = ln_q(&nu);
        let measure = q_to_f64(&s);
        let (bound, pass) = match direction {
            Direction::M => {
                let b = c * (ln_nu / delta).exp();
                (b, measure <= b * (1.0 + REL_TOL))
            }
            Direction::MPrime => {
                let b = (ln_nu / delta).exp() / c;
                (b, measure >= b * (1.0 - REL_TOL))
            }
        };
        // smallest admissible constant on the sample
        let needed = if s.is_zero() {
            match direction {
                Direction::M => 0.0,
                Direction::MPrime => f64::INFINITY,
            }
        } else {
            match direction {
                Direction::M => (ln_q(&s) - ln_nu / delta).exp(),
                Direction::MPrime => (ln_nu / delta - ln_q(&s)).exp(),
            }
        };
        observed = Some(observed.map_or(needed, |o: f64| o.max(needed)));
        let row = ConditionRow { cell: cell.to_string(), diam: cell.diameter(), measure, bound, pass };
        if !pass {
            violations.push(row.clone());
        }
        rows.push(row);
    }
    Ok(ConditionReport {
        direction,
        delta_lo,
        delta_hi,
        constant: c,
        checked: sample.len(),
        observed_constant: observed.unwrap_or(0.0),
        violations,
        rows,
    })
}

/// Sum of `mu<h_i>` over `i` on `F_w S0` divided by 3; equals the Kusuoka mass.
pub fn mean_harmonic_energy(w: &Word) -> Q {
    (1..=3)
        .map(|i| {
            let mut b = [Q::zero(), Q::zero(), Q::zero()];
            b[i - 1] = Q::one();
            energy_word(&b, w)
        })
        .sum::<Q>()
        / qi(3)
}
