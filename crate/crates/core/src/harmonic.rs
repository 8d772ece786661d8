//! Harmonic extension, discrete energies and piecewise harmonic functions on
//! `S0^n`.

use num_traits::{One, Zero};
use std::io::Write;
use std::sync::OnceLock;

use crate::addressing::{build_lattice, pow3, tuple_of, LatticeGraph, ProductWord, Word};
use crate::error::{Error, Result};
use crate::mat::Mat3;
use crate::scalar::{parse_q, q, q_to_string, Scalar, Q};

/// `5 A_i` as integers. Row `r` gives the value at `F_i(p_r)` from the corner values.
pub const A5: [[[i64; 3]; 3]; 3] = [
    [[5, 0, 0], [2, 2, 1], [2, 1, 2]],
    [[2, 2, 1], [0, 5, 0], [1, 2, 2]],
    [[2, 1, 2], [1, 2, 2], [0, 0, 5]],
];

/// Harmonic extension matrices and the projection `P = I - J/3`.
#[derive(Clone, Debug)]
pub struct MatrixConstants {
    pub p: Mat3<Q>,
    pub a: [Mat3<Q>; 3],
}

pub fn constants() -> &'static MatrixConstants {
    static C: OnceLock<MatrixConstants> = OnceLock::new();
    C.get_or_init(|| MatrixConstants { p: p_matrix(), a: [a_matrix(1), a_matrix(2), a_matrix(3)] })
}

pub fn a_matrix<T: Scalar>(i: u8) -> Mat3<T> {
    let b = &A5[i as usize - 1];
    Mat3::from_fn(|r, c| T::from_ratio(b[r][c], 5))
}

pub fn p_matrix<T: Scalar>() -> Mat3<T> {
    Mat3::from_fn(|r, c| if r == c { T::from_ratio(2, 3) } else { T::from_ratio(-1, 3) })
}

/// Values at the corners of a cell, in corner order `p1, p2, p3`.
pub type BoundaryTriple<T> = [T; 3];

/// Corner values of the harmonic function on `F_w(S0)`: `A_{w_m} ... A_{w_1} b`.
pub fn harmonic_extend_cell<T: Scalar>(b: &BoundaryTriple<T>, w: &Word) -> BoundaryTriple<T> {
    let mats: [Mat3<T>; 3] = [a_matrix(1), a_matrix(2), a_matrix(3)];
    let mut t = b.clone();
    for &s in w.symbols() {
        t = mats[s as usize - 1].mul_vec(&t);
    }
    t
}

/// Energy of the harmonic function with corner values `t` on `S0`: `(3/2) t' P t`.
pub fn energy0<T: Scalar>(t: &[T]) -> T {
    let d01 = t[0].clone() - t[1].clone();
    let d02 = t[0].clone() - t[2].clone();
    let d12 = t[1].clone() - t[2].clone();
    (d01.clone() * d01 + d02.clone() * d02 + d12.clone() * d12) / T::from_ratio(2, 1)
}

/// `(5/3)^m` in the scalar type.
pub fn renorm<T: Scalar>(m: usize) -> T {
    let mut r = T::one();
    let f = T::from_ratio(5, 3);
    for _ in 0..m {
        r = r * f.clone();
    }
    r
}

/// Values on the vertices of a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFn<T> {
    pub n: usize,
    pub level: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> DiscreteFn<T> {
    pub fn new(lattice: &LatticeGraph, values: Vec<T>) -> Result<Self> {
        if values.len() != lattice.vertex_count() {
            return Err(Error::arg(
                "values",
                format!("expected {} vertex values, got {}", lattice.vertex_count(), values.len()),
            ));
        }
        Ok(DiscreteFn { n: lattice.arity(), level: lattice.level(), values })
    }
}

impl DiscreteFn<Q> {
    /// CSV with columns `vertex_id,value`, values as `num/den`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["vertex_id", "value"]).map_err(crate::addressing::csv_err)?;
        for (i, v) in self.values.iter().enumerate() {
            wtr.write_record([i.to_string(), q_to_string(v)]).map_err(crate::addressing::csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(n: usize, level: usize, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut rows: Vec<(usize, Q)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(crate::addressing::csv_err)?;
            let id: usize = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::arg("vertex_id", "missing or malformed vertex id"))?;
            let v = parse_q(rec.get(1).unwrap_or(""))?;
            rows.push((id, v));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(Error::arg("vertex_id", "vertex ids must be 0..N without gaps"));
        }
        Ok(DiscreteFn { n, level, values: rows.into_iter().map(|r| r.1).collect() })
    }
}

/// `E^(m)(f)`: `(5/3)^m (1/2)` times the sum over edges of squared differences,
/// with edges along axis `a` weighted by the vertex weights of the other coordinates.
pub fn graph_energy<T: Scalar>(lattice: &LatticeGraph, f: &[T]) -> T {
    let n = lattice.arity();
    let mut s = T::zero();
    for e in lattice.edges() {
        let d = f[e.src].clone() - f[e.dst].clone();
        let mut term = d.clone() * d;
        if n > 1 {
            let ids = lattice.coord_ids(e.src);
            for (b, &c) in ids.iter().enumerate() {
                if b != e.axis {
                    term = term * T::from_q(&lattice.weight_1d(c));
                }
            }
        }
        s = s + term;
    }
    s * renorm::<T>(lattice.level()) / T::from_ratio(2, 1)
}

/// Apply a 3x3 matrix along one axis of a `3^n` corner table.
pub fn apply_axis<T: Scalar>(table: &[T], n: usize, axis: usize, a: &Mat3<T>, out: &mut [T]) {
    let stride = pow3(n - 1 - axis);
    let len = pow3(n);
    for base in 0..len {
        if (base / stride) % 3 != 0 {
            continue;
        }
        let v = [table[base].clone(), table[base + stride].clone(), table[base + 2 * stride].clone()];
        for i in 0..3 {
            let mut s = T::zero();
            for c in 0..3 {
                s = s + a.0[i][c].clone() * v[c].clone();
            }
            out[base + i * stride] = s;
        }
    }
}

/// The three A matrices in a scalar type, built once per use site.
#[derive(Clone, Debug)]
pub struct AMats<T>(pub [Mat3<T>; 3]);

impl<T: Scalar> Default for AMats<T> {
    fn default() -> Self {
        AMats([a_matrix(1), a_matrix(2), a_matrix(3)])
    }
}

impl<T: Scalar> AMats<T> {
    /// Corner table of the child cell `tuple` from the parent table.
    pub fn child_table(&self, table: &[T], n: usize, tuple: &[u8]) -> Vec<T> {
        let mut cur = table.to_vec();
        let mut next = table.to_vec();
        for (axis, &s) in tuple.iter().enumerate() {
            apply_axis(&cur, n, axis, &self.0[s as usize - 1], &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

/// Piecewise harmonic (in each coordinate) function on `S0^n`: one corner
/// table of `3^n` values per level-`level` product cell, in cell index order.
#[derive(Clone, Debug, PartialEq)]
pub struct PwFn<T> {
    n: usize,
    level: usize,
    tables: Vec<T>,
}

/// Exact piecewise harmonic function on `S0`.
pub type PwHarmonicFn = PwFn<Q>;
/// Exact tensor piecewise harmonic function on `S0^n`.
pub type TensorPwFn = PwFn<Q>;

impl<T: Scalar> PwFn<T> {
    pub fn harmonic(b: BoundaryTriple<T>) -> Self {
        PwFn { n: 1, level: 0, tables: b.to_vec() }
    }

    pub fn constant(n: usize, c: T) -> Self {
        PwFn { n, level: 0, tables: vec![c; pow3(n)] }
    }

    pub fn from_tables(n: usize, level: usize, tables: Vec<T>) -> Result<Self> {
        let want = pow3(n * level) * pow3(n);
        if tables.len() != want {
            return Err(Error::arg("tables", format!("expected {want} corner values, got {}", tables.len())));
        }
        Ok(PwFn { n, level, tables })
    }

    /// One-factor function from per-cell triples in word order.
    pub fn from_triples(level: usize, triples: Vec<BoundaryTriple<T>>) -> Result<Self> {
        PwFn::from_tables(1, level, triples.into_iter().flatten().collect())
    }

    pub fn from_vertex_values(lattice: &LatticeGraph, values: &[T]) -> Self {
        let n = lattice.arity();
        let mut tables = Vec::with_capacity(lattice.cell_count() * pow3(n));
        for c in 0..lattice.cell_count() {
            for &v in lattice.cell_vertices(c) {
                tables.push(values[v].clone());
            }
        }
        PwFn { n, level: lattice.level(), tables }
    }

    /// Values on the vertices of `lattice` (level at least `self.level`).
    pub fn to_vertex_values(&self, lattice: &LatticeGraph) -> Result<Vec<T>> {
        if lattice.arity() != self.n || lattice.level() < self.level {
            return Err(Error::arg("level", "lattice must have the same arity and at least the function's level"));
        }
        let fine = self.refine(lattice.level())?;
        let mut out = vec![T::zero(); lattice.vertex_count()];
        for c in 0..lattice.cell_count() {
            for (j, &v) in lattice.cell_vertices(c).iter().enumerate() {
                out[v] = fine.table(c)[j].clone();
            }
        }
        Ok(out)
    }

    /// Corner values agree at every shared lattice point.
    pub fn is_compatible(&self, lattice: &LatticeGraph) -> bool {
        if lattice.arity() != self.n || lattice.level() != self.level {
            return false;
        }
        let mut seen: Vec<Option<T>> = vec![None; lattice.vertex_count()];
        for c in 0..lattice.cell_count() {
            for (j, &v) in lattice.cell_vertices(c).iter().enumerate() {
                let x = &self.table(c)[j];
                match &seen[v] {
                    Some(y) if y != x => return false,
                    Some(_) => {}
                    None => seen[v] = Some(x.clone()),
                }
            }
        }
        true
    }

    /// `u(x) = u_1(x_1) ... u_n(x_n)` for one-factor `u_a`.
    pub fn tensor(factors: &[PwFn<T>]) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.n != 1) {
            return Err(Error::arg("factors", "tensor product needs one-factor functions"));
        }
        let n = factors.len();
        let level = factors.iter().map(|f| f.level).max().unwrap();
        let fs: Vec<PwFn<T>> = factors.iter().map(|f| f.refine(level)).collect::<Result<_>>()?;
        let pn = pow3(n);
        let mut tables = Vec::with_capacity(pow3(n * level) * pn);
        for cell in ProductWord::all(n, level) {
            let idx: Vec<usize> = (0..n).map(|a| cell.coord_index(a)).collect();
            for c in 0..pn {
                let t = tuple_of(c, n);
                let mut v = T::one();
                for a in 0..n {
                    v = v * fs[a].tables[3 * idx[a] + t[a] as usize - 1].clone();
                }
                tables.push(v);
            }
        }
        Ok(PwFn { n, level, tables })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn tables(&self) -> &[T] {
        &self.tables
    }

    pub fn table(&self, cell_index: usize) -> &[T] {
        let pn = pow3(self.n);
        &self.tables[cell_index * pn..(cell_index + 1) * pn]
    }

    /// Corner table on the cell `F_w`, for `|w| >= level`.
    pub fn cell_table(&self, w: &ProductWord) -> Result<Vec<T>> {
        if w.arity() != self.n {
            return Err(Error::arg("word", "arity mismatch"));
        }
        if w.len() < self.level {
            return Err(Error::arg("word", format!("cell level {} below function level {}", w.len(), self.level)));
        }
        let a = AMats::<T>::default();
        let mut t = self.table(w.prefix(self.level).index()).to_vec();
        for lvl in self.level..w.len() {
            t = a.child_table(&t, self.n, w.level(lvl));
        }
        Ok(t)
    }

    /// Same function represented at a finer level.
    pub fn refine(&self, target: usize) -> Result<Self> {
        if target < self.level {
            return Err(Error::arg("target", format!("target level {target} below {}", self.level)));
        }
        let a = AMats::<T>::default();
        let pn = pow3(self.n);
        let mut cur = self.clone();
        while cur.level < target {
            let mut tables = Vec::with_capacity(cur.tables.len() * pn);
            for c in 0..pow3(self.n * cur.level) {
                let t = cur.table(c);
                for k in 0..pn {
                    tables.extend(a.child_table(t, self.n, &tuple_of(k, self.n)));
                }
            }
            cur = PwFn { n: self.n, level: cur.level + 1, tables };
        }
        Ok(cur)
    }

    /// The pulled-back function `u o F_w` as a function on `S0^n`.
    pub fn pullback(&self, w: &ProductWord) -> Result<Self> {
        if w.len() >= self.level {
            return Ok(PwFn { n: self.n, level: 0, tables: self.cell_table(w)? });
        }
        let sub = self.level - w.len();
        let pn = pow3(self.n);
        let mut tables = Vec::with_capacity(pow3(self.n * sub) * pn);
        for tail in ProductWord::all(self.n, sub) {
            tables.extend_from_slice(self.table(w.concat(&tail).index()));
        }
        Ok(PwFn { n: self.n, level: sub, tables })
    }

    pub fn scale(&self, c: &T) -> Self {
        PwFn { n: self.n, level: self.level, tables: self.tables.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::arg("n", "arity mismatch"));
        }
        let level = self.level.max(o.level);
        let (a, b) = (self.refine(level)?, o.refine(level)?);
        Ok(PwFn {
            n: self.n,
            level,
            tables: a.tables.iter().zip(&b.tables).map(|(x, y)| x.clone() + y.clone()).collect(),
        })
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> PwFn<U> {
        PwFn { n: self.n, level: self.level, tables: self.tables.iter().map(f).collect() }
    }

    /// `E(u)`; for `n > 1` the product energy with Hausdorff weights on the inactive axes.
    pub fn energy(&self) -> T {
        let n = self.n;
        let pn = pow3(n);
        let w_other = T::from_ratio(1, 3i64.pow(self.level as u32 + 1));
        let mut inactive = T::one();
        for _ in 1..n {
            inactive = inactive * w_other.clone();
        }
        let mut total = T::zero();
        for c in 0..pow3(n * self.level) {
            let t = self.table(c);
            for axis in 0..n {
                let stride = pow3(n - 1 - axis);
                for base in 0..pn {
                    if (base / stride) % 3 == 0 {
                        total = total
                            + energy0(&[t[base].clone(), t[base + stride].clone(), t[base + 2 * stride].clone()]);
                    }
                }
            }
        }
        total * inactive * renorm::<T>(self.level)
    }

    /// Largest and smallest corner values over all cells.
    pub fn max_min(&self) -> (T, T) {
        let mut hi = self.tables[0].clone();
        let mut lo = hi.clone();
        for x in &self.tables {
            if *x > hi {
                hi = x.clone();
            }
            if *x < lo {
                lo = x.clone();
            }
        }
        (hi, lo)
    }

    pub fn to_f64(&self) -> PwFn<f64> {
        self.map(|x| x.to_f64())
    }
}

/// Extends vertex values on `V_{0,m}` to `V_{0,target}` cell by cell.
pub fn extend_to_level<T: Scalar>(f: &DiscreteFn<T>, target: usize, budget: u128) -> Result<DiscreteFn<T>> {
    if target < f.level {
        return Err(Error::arg("target", format!("target {target} is below source level {}", f.level)));
    }
    let coarse = build_lattice(f.level, f.n, budget)?;
    let fine = build_lattice(target, f.n, budget)?;
    let u = PwFn::from_vertex_values(&coarse, &f.values);
    Ok(DiscreteFn { n: f.n, level: target, values: u.to_vertex_values(&fine)? })
}

/// Solves `a x = b` for a dense matrix with several right-hand sides.
pub(crate) fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<Vec<T>>) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs_val() > a[piv][col].abs_val() {
                piv = r;
            }
        }
        if a[piv][col].is_zero() {
            return Err(Error::Internal("singular stationarity system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = T::one() / a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() * inv.clone();
            for c in col..n {
                let v = a[col][c].clone() * f.clone();
                a[r][c] = a[r][c].clone() - v;
            }
            for c in 0..b[r].len() {
                let v = b[col][c].clone() * f.clone();
                b[r][c] = b[r][c].clone() - v;
            }
        }
    }
    for r in 0..n {
        let inv = T::one() / a[r][r].clone();
        for x in b[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
    }
    Ok(b)
}

/// Brute-force minimiser of `E^(m+1)` over extensions of data on `V_{0,m}` (one factor).
/// The stationarity system is solved once; [`MinEnergyOracle::extend`] then applies it.
#[derive(Clone, Debug)]
pub struct MinEnergyOracle<T> {
    level: usize,
    fine_vertices: usize,
    coarse_to_fine: Vec<usize>,
    interior: Vec<usize>,
    /// `interior.len()` rows, one column per coarse vertex.
    gain: Vec<Vec<T>>,
}

impl<T: Scalar> MinEnergyOracle<T> {
    pub fn new(m: usize) -> Result<Self> {
        if m > 6 {
            return Err(Error::arg("m", "dense oracle supports m <= 6"));
        }
        let coarse = build_lattice(m, 1, u128::MAX)?;
        let fine = build_lattice(m + 1, 1, u128::MAX)?;
        let coarse_to_fine: Vec<usize> = (0..coarse.vertex_count())
            .map(|v| {
                let (w, c) = coarse.rep_1d(v);
                fine.vertex_id_1d(w.child(c).symbols(), c).unwrap()
            })
            .collect();
        let nf = fine.vertex_count();
        let mut slot = vec![usize::MAX; nf];
        for (i, &f) in coarse_to_fine.iter().enumerate() {
            slot[f] = i;
        }
        let interior: Vec<usize> = (0..nf).filter(|&v| slot[v] == usize::MAX).collect();
        let mut pos = vec![usize::MAX; nf];
        for (i, &v) in interior.iter().enumerate() {
            pos[v] = i;
        }
        let ni = interior.len();
        let nb = coarse_to_fine.len();
        let mut lap = vec![vec![T::zero(); ni]; ni];
        let mut rhs = vec![vec![T::zero(); nb]; ni];
        for e in fine.edges() {
            for (x, y) in [(e.src, e.dst), (e.dst, e.src)] {
                if pos[x] == usize::MAX {
                    continue;
                }
                let i = pos[x];
                lap[i][i] = lap[i][i].clone() + T::one();
                if pos[y] != usize::MAX {
                    lap[i][pos[y]] = lap[i][pos[y]].clone() - T::one();
                } else {
                    rhs[i][slot[y]] = rhs[i][slot[y]].clone() + T::one();
                }
            }
        }
        let gain = solve_dense(lap, rhs)?;
        Ok(MinEnergyOracle { level: m, fine_vertices: nf, coarse_to_fine, interior, gain })
    }

    pub fn extend(&self, f: &DiscreteFn<T>) -> Result<DiscreteFn<T>> {
        if f.n != 1 || f.level != self.level || f.values.len() != self.coarse_to_fine.len() {
            return Err(Error::arg("f", "values must live on the oracle's coarse lattice"));
        }
        let mut out = vec![T::zero(); self.fine_vertices];
        for (i, &fv) in self.coarse_to_fine.iter().enumerate() {
            out[fv] = f.values[i].clone();
        }
        for (r, &v) in self.interior.iter().enumerate() {
            let mut s = T::zero();
            for (c, x) in f.values.iter().enumerate() {
                if !self.gain[r][c].is_zero() {
                    s = s + self.gain[r][c].clone() * x.clone();
                }
            }
            out[v] = s;
        }
        Ok(DiscreteFn { n: 1, level: self.level + 1, values: out })
    }
}

/// Level-1 function equal to 1 at `F_2(p_1)` and 0 at the other points of `V_{0,1}`.
pub fn bump_phi0() -> PwHarmonicFn {
    let z = Q::zero;
    PwFn::from_triples(1, vec![[z(), Q::one(), z()], [Q::one(), z(), z()], [z(), z(), z()]]).unwrap()
}

/// `h_i`: harmonic with boundary values `e_i`.
pub fn h(i: usize) -> PwHarmonicFn {
    let mut b = [Q::zero(), Q::zero(), Q::zero()];
    b[i - 1] = Q::one();
    PwFn::harmonic(b)
}

/// Exact `(5/3)^m` helper for rationals.
pub fn renorm_q(m: usize) -> Q {
    crate::scalar::qpow(&q(5, 3), m as i64)
}
