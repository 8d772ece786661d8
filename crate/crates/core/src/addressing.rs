//! Words, product words and cells of the gasket, plus the level-m lattice
//! graphs with combinatorial vertex identification.

use num_traits::One;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{q, Q};

/// Default cap on `3^(m n)` cells or vertex tuples handled in memory.
pub const DEFAULT_BUDGET: u128 = 20_000_000;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

pub fn pow3(e: usize) -> usize {
    3usize.pow(e as u32)
}

/// Base-3 digits (symbols 1..=3) of `idx`, most significant first.
pub fn digits_of(mut idx: usize, len: usize) -> Vec<u8> {
    let mut d = vec![1u8; len];
    for t in (0..len).rev() {
        d[t] = (idx % 3) as u8 + 1;
        idx /= 3;
    }
    d
}

pub fn index_of(symbols: &[u8]) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * 3 + (s as usize - 1))
}

fn check_symbol(s: u8) -> Result<u8> {
    if (1..=3).contains(&s) {
        Ok(s)
    } else {
        Err(Error::arg("word", format!("symbol {s} not in 1..=3")))
    }
}

/// Finite word over {1,2,3}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        for &s in &symbols {
            check_symbol(s)?;
        }
        Ok(Word(symbols))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.trim().chars() {
            let d = c
                .to_digit(10)
                .ok_or_else(|| Error::arg("word", format!("bad character `{c}` in `{s}`")))?;
            v.push(check_symbol(d as u8)?);
        }
        Ok(Word(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn child(&self, s: u8) -> Word {
        let mut v = self.0.clone();
        v.push(s);
        Word(v)
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Word(v)
    }

    pub fn repeat(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    /// `s` repeated `k` times.
    pub fn constant(s: u8, k: usize) -> Word {
        Word(vec![s; k])
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k..].to_vec())
    }

    /// Position among the `3^len` words of this length in lexicographic order.
    pub fn index(&self) -> usize {
        index_of(&self.0)
    }

    pub fn from_index(idx: usize, len: usize) -> Word {
        Word(digits_of(idx, len))
    }

    /// All words of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = Word> {
        (0..pow3(len)).map(move |i| Word::from_index(i, len))
    }

    /// All words of length `0..=max_len`, shorter first.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = Word> {
        (0..=max_len).flat_map(Word::all)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Word of n-tuples. Stored level-major: digit `t*n + a` is coordinate `a` of level `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductWord {
    n: usize,
    digits: Vec<u8>,
}

impl ProductWord {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1);
        ProductWord { n, digits: Vec::new() }
    }

    pub fn from_word(w: &Word) -> Self {
        ProductWord { n: 1, digits: w.0.clone() }
    }

    pub fn from_levels(n: usize, levels: &[Vec<u8>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n", "factor count must be at least 1"));
        }
        let mut digits = Vec::with_capacity(levels.len() * n);
        for l in levels {
            if l.len() != n {
                return Err(Error::arg("word", format!("tuple of arity {} in a word of arity {n}", l.len())));
            }
            for &s in l {
                digits.push(check_symbol(s)?);
            }
        }
        Ok(ProductWord { n, digits })
    }

    /// Build from per-coordinate words of equal length.
    pub fn from_coords(coords: &[Word]) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::arg("n", "factor count must be at least 1"));
        }
        let m = coords[0].len();
        if coords.iter().any(|w| w.len() != m) {
            return Err(Error::arg("word", "coordinate words differ in length"));
        }
        let mut digits = Vec::with_capacity(m * n);
        for t in 0..m {
            for w in coords {
                digits.push(w.0[t]);
            }
        }
        Ok(ProductWord { n, digits })
    }

    /// Parses `"3,1;1,2"`. For `n = 1` a plain digit string such as `"312"` is also accepted.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        if n == 0 {
            return Err(Error::arg("n", "factor count must be at least 1"));
        }
        if s.is_empty() {
            return Ok(ProductWord::empty(n));
        }
        if n == 1 && !s.contains([';', ',']) {
            return Ok(ProductWord::from_word(&Word::parse(s)?));
        }
        let mut levels = Vec::new();
        for lvl in s.split(';') {
            let mut tuple = Vec::new();
            for c in lvl.split(',') {
                let d: u8 = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::arg("word", format!("bad symbol `{c}` in `{s}`")))?;
                tuple.push(d);
            }
            levels.push(tuple);
        }
        ProductWord::from_levels(n, &levels)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.digits.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn level(&self, t: usize) -> &[u8] {
        &self.digits[t * self.n..(t + 1) * self.n]
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Projection to coordinate `a`.
    pub fn coord(&self, a: usize) -> Word {
        Word((0..self.len()).map(|t| self.digits[t * self.n + a]).collect())
    }

    pub fn coords(&self) -> Vec<Word> {
        (0..self.n).map(|a| self.coord(a)).collect()
    }

    /// Lexicographic index of coordinate `a` among words of the same length.
    pub fn coord_index(&self, a: usize) -> usize {
        (0..self.len()).fold(0, |acc, t| acc * 3 + (self.digits[t * self.n + a] as usize - 1))
    }

    /// Index among the `3^(m n)` product words of this length (level-major).
    pub fn index(&self) -> usize {
        index_of(&self.digits)
    }

    pub fn from_index(n: usize, idx: usize, len: usize) -> Self {
        ProductWord { n, digits: digits_of(idx, len * n) }
    }

    pub fn child(&self, tuple: &[u8]) -> Self {
        assert_eq!(tuple.len(), self.n);
        let mut d = self.digits.clone();
        d.extend_from_slice(tuple);
        ProductWord { n: self.n, digits: d }
    }

    pub fn concat(&self, o: &ProductWord) -> Self {
        assert_eq!(self.n, o.n);
        let mut d = self.digits.clone();
        d.extend_from_slice(&o.digits);
        ProductWord { n: self.n, digits: d }
    }

    pub fn prefix(&self, k: usize) -> Self {
        ProductWord { n: self.n, digits: self.digits[..k * self.n].to_vec() }
    }

    pub fn suffix_from(&self, k: usize) -> Self {
        ProductWord { n: self.n, digits: self.digits[k * self.n..].to_vec() }
    }

    /// The word `(1,...,1)^k`.
    pub fn ones(n: usize, k: usize) -> Self {
        ProductWord { n, digits: vec![1; n * k] }
    }

    /// All product words of length `len`, in index order.
    pub fn all(n: usize, len: usize) -> impl Iterator<Item = ProductWord> {
        (0..pow3(n * len)).map(move |i| ProductWord::from_index(n, i, len))
    }
}

impl fmt::Display for ProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            for s in &self.digits {
                write!(f, "{s}")?;
            }
            return Ok(());
        }
        for t in 0..self.len() {
            if t > 0 {
                write!(f, ";")?;
            }
            for (a, s) in self.level(t).iter().enumerate() {
                if a > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// Tuple of `n` symbols from the index `c` in `0..3^n`, coordinate 0 most significant.
pub fn tuple_of(c: usize, n: usize) -> Vec<u8> {
    digits_of(c, n)
}

/// Dyadic cell `F_(1..1)^(-k) F_w (S0^n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub blowup: u32,
    pub word: ProductWord,
}

impl Cell {
    pub fn unit(n: usize) -> Self {
        Cell { blowup: 0, word: ProductWord::empty(n) }
    }

    pub fn new(blowup: u32, word: ProductWord) -> Self {
        Cell { blowup, word }
    }

    /// One-factor cell from a word.
    pub fn of(blowup: u32, w: &Word) -> Self {
        Cell { blowup, word: ProductWord::from_word(w) }
    }

    /// Parses `"k:word"` or just `"word"`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        match s.split_once(':') {
            Some((k, w)) => {
                let k: u32 = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::arg("cell", format!("bad blow-up `{k}`")))?;
                Ok(Cell { blowup: k, word: ProductWord::parse(w, n)? })
            }
            None => Ok(Cell { blowup: 0, word: ProductWord::parse(s, n)? }),
        }
    }

    pub fn arity(&self) -> usize {
        self.word.arity()
    }

    pub fn level(&self) -> usize {
        self.word.len()
    }

    pub fn children(&self) -> Vec<Cell> {
        let n = self.arity();
        (0..pow3(n))
            .map(|c| Cell { blowup: self.blowup, word: self.word.child(&tuple_of(c, n)) })
            .collect()
    }

    /// `log2` of the diameter.
    pub fn diameter_log2(&self) -> i64 {
        self.blowup as i64 - self.level() as i64
    }

    pub fn diameter(&self) -> f64 {
        2f64.powi(self.diameter_log2() as i32)
    }

    /// Same set with leading `(1..1)` levels absorbed into the blow-up count.
    pub fn canonical(&self) -> Cell {
        let mut k = self.blowup;
        let mut start = 0;
        while k > 0 && start < self.level() && self.word.level(start).iter().all(|&s| s == 1) {
            k -= 1;
            start += 1;
        }
        Cell { blowup: k, word: self.word.suffix_from(start) }
    }

    /// One-factor cell of coordinate `a`.
    pub fn project(&self, a: usize) -> Cell {
        Cell::of(self.blowup, &self.word.coord(a))
    }

    /// Exact corner in triangular coordinates for a one-factor cell: returns
    /// `(a, b, e)` meaning the point `(a p2 + b p3) 2^e` where `p3` is taken as `(0,1)`.
    pub fn corner_tri(&self, corner: u8) -> (i128, i128, i64) {
        assert_eq!(self.arity(), 1);
        let (a, b) = tri_point(self.word.digits(), corner);
        (a, b, self.blowup as i64 - self.level() as i64)
    }

    /// Cartesian coordinates of the `3^n` product corners, ordered with
    /// coordinate 0 most significant. Each entry has `2n` numbers.
    pub fn corner_coordinates(&self) -> Vec<Vec<f64>> {
        let n = self.arity();
        let per: Vec<[(f64, f64); 3]> = (0..n)
            .map(|a| {
                let c = self.project(a);
                std::array::from_fn(|j| {
                    let (x, y, e) = c.corner_tri(j as u8 + 1);
                    tri_to_xy(x, y, e)
                })
            })
            .collect();
        (0..pow3(n))
            .map(|c| {
                let t = tuple_of(c, n);
                let mut v = Vec::with_capacity(2 * n);
                for a in 0..n {
                    let (x, y) = per[a][t[a] as usize - 1];
                    v.push(x);
                    v.push(y);
                }
                v
            })
            .collect()
    }

    /// Whether the one-factor cell contains the point `(a p2 + b p3) 2^e` (exact).
    pub fn contains_tri(&self, pa: i128, pb: i128, pe: i64) -> bool {
        assert_eq!(self.arity(), 1);
        let (oa, ob) = tri_point(self.word.digits(), 1);
        let ce = self.blowup as i64 - self.level() as i64;
        // cell = 2^ce (o + T) where T is the unit triangle {x>=0,y>=0,x+y<=1}
        let base = ce.min(pe);
        let shift = |v: i128, e: i64| v << ((e - base) as u32);
        let (xa, xb) = (shift(pa, pe), shift(pb, pe));
        let (ya, yb) = (shift(oa, ce), shift(ob, ce));
        let side = shift(1, ce);
        let (da, db) = (xa - ya, xb - yb);
        da >= 0 && db >= 0 && da + db <= side
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blowup > 0 {
            write!(f, "{}:", self.blowup)?;
        }
        write!(f, "{}", self.word)
    }
}

/// Triangular integer coordinates of `F_w(p_j)` scaled by `2^|w|`, with
/// `p1=(0,0)`, `p2=(1,0)`, `p3=(0,1)`.
pub fn tri_point(w: &[u8], corner: u8) -> (i128, i128) {
    let m = w.len();
    let mut a: i128 = 0;
    let mut b: i128 = 0;
    for (t, &s) in w.iter().enumerate() {
        let scale = 1i128 << (m - 1 - t);
        match s {
            2 => a += scale,
            3 => b += scale,
            _ => {}
        }
    }
    match corner {
        2 => a += 1,
        3 => b += 1,
        _ => {}
    }
    (a, b)
}

fn tri_to_xy(a: i128, b: i128, e: i64) -> (f64, f64) {
    let s = 2f64.powi(e as i32);
    ((a as f64 + 0.5 * b as f64) * s, b as f64 * SQRT3_2 * s)
}

/// Smallest `(word, corner)` naming the same point as `F_w(p_corner)`.
pub fn canonical_rep(w: &[u8], corner: u8) -> (Vec<u8>, u8) {
    let m = w.len();
    let mut s = m;
    while s > 0 && w[s - 1] == corner {
        s -= 1;
    }
    if s == 0 {
        return (w.to_vec(), corner);
    }
    let i = w[s - 1];
    let mut alt = w[..s - 1].to_vec();
    alt.push(corner);
    alt.extend(std::iter::repeat_n(i, m - s));
    let here = (w.to_vec(), corner);
    let there = (alt, i);
    if there < here {
        there
    } else {
        here
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Coordinate along which the endpoints differ.
    pub axis: usize,
}

/// Level-m lattice of `S0^n`.
#[derive(Clone, Debug)]
pub struct LatticeGraph {
    n: usize,
    level: usize,
    /// Canonical 1-D representatives `(word, corner)`.
    reps_1d: Vec<(Vec<u8>, u8)>,
    /// 1-D vertex ids of each 1-D cell, stride 3.
    cells_1d: Vec<usize>,
    /// Number of level-m cells touching each 1-D vertex (1 or 2).
    incidence_1d: Vec<u8>,
    /// For product vertices: 1-D ids per coordinate, stride n.
    coord_ids: Vec<usize>,
    /// Product vertex ids of each product cell, stride `3^n`.
    cell_vertices: Vec<usize>,
    edges: Vec<Edge>,
}

/// Builds `V_{0,m}` of `S0^n`, failing if `3^(m n)` exceeds `budget`.
pub fn build_lattice(m: usize, n: usize, budget: u128) -> Result<LatticeGraph> {
    if n == 0 {
        return Err(Error::arg("n", "factor count must be at least 1"));
    }
    let cells = 3u128.checked_pow((m * n) as u32).unwrap_or(u128::MAX);
    Error::check_budget(&format!("lattice cells 3^({m}*{n})"), cells, budget)?;
    let c1 = pow3(m);
    let mut tagged: Vec<(Vec<u8>, u8)> = Vec::with_capacity(3 * c1);
    for idx in 0..c1 {
        let w = digits_of(idx, m);
        for j in 1..=3u8 {
            tagged.push(canonical_rep(&w, j));
        }
    }
    let mut reps = tagged.clone();
    reps.sort();
    reps.dedup();
    let cells_1d: Vec<usize> = tagged.iter().map(|r| reps.binary_search(r).unwrap()).collect();
    let v1 = reps.len();
    let mut incidence_1d = vec![0u8; v1];
    for &v in &cells_1d {
        incidence_1d[v] += 1;
    }
    let mut edges_1d: Vec<(usize, usize)> = Vec::with_capacity(3 * c1);
    for c in 0..c1 {
        let t = &cells_1d[3 * c..3 * c + 3];
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            edges_1d.push((t[x].min(t[y]), t[x].max(t[y])));
        }
    }
    edges_1d.sort();
    edges_1d.dedup();

    if n == 1 {
        let edges = edges_1d.iter().map(|&(s, d)| Edge { src: s, dst: d, axis: 0 }).collect();
        return Ok(LatticeGraph {
            n,
            level: m,
            coord_ids: (0..v1).collect(),
            cell_vertices: cells_1d.clone(),
            reps_1d: reps,
            cells_1d,
            incidence_1d,
            edges,
        });
    }

    let vn = (v1 as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    Error::check_budget(&format!("lattice vertices {v1}^{n}"), vn, budget)?;
    let vn = vn as usize;
    // order product vertices by (interleaved canonical words, corner tuple)
    let mut keyed: Vec<(Vec<u8>, usize)> = (0..vn)
        .map(|t| {
            let ids = mixed_digits(t, v1, n);
            let mut key = Vec::with_capacity(m * n + n);
            for lvl in 0..m {
                for &id in &ids {
                    key.push(reps[id].0[lvl]);
                }
            }
            for &id in &ids {
                key.push(reps[id].1);
            }
            (key, t)
        })
        .collect();
    keyed.sort();
    let mut tuple_to_id = vec![0usize; vn];
    let mut coord_ids = vec![0usize; vn * n];
    for (id, (_, t)) in keyed.iter().enumerate() {
        tuple_to_id[*t] = id;
        let ids = mixed_digits(*t, v1, n);
        coord_ids[id * n..(id + 1) * n].copy_from_slice(&ids);
    }
    let pn = pow3(n);
    let ncells = pow3(m * n);
    let mut cell_vertices = vec![0usize; ncells * pn];
    for cell in 0..ncells {
        let pw = ProductWord::from_index(n, cell, m);
        let cidx: Vec<usize> = (0..n).map(|a| pw.coord_index(a)).collect();
        for c in 0..pn {
            let tup = tuple_of(c, n);
            let mut t = 0usize;
            for a in 0..n {
                t = t * v1 + cells_1d[3 * cidx[a] + tup[a] as usize - 1];
            }
            cell_vertices[cell * pn + c] = tuple_to_id[t];
        }
    }
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); v1];
    for &(s, d) in &edges_1d {
        nbrs[s].push(d);
    }
    let mut edges = Vec::new();
    for t in 0..vn {
        let ids = mixed_digits(t, v1, n);
        for a in 0..n {
            for &y in &nbrs[ids[a]] {
                let mut other = ids.clone();
                other[a] = y;
                let t2 = other.iter().fold(0, |acc, &i| acc * v1 + i);
                let (p, q) = (tuple_to_id[t], tuple_to_id[t2]);
                edges.push(Edge { src: p.min(q), dst: p.max(q), axis: a });
            }
        }
    }
    edges.sort();
    Ok(LatticeGraph {
        n,
        level: m,
        reps_1d: reps,
        cells_1d,
        incidence_1d,
        coord_ids,
        cell_vertices,
        edges,
    })
}

fn mixed_digits(mut t: usize, base: usize, n: usize) -> Vec<usize> {
    let mut v = vec![0; n];
    for a in (0..n).rev() {
        v[a] = t % base;
        t /= base;
    }
    v
}

impl LatticeGraph {
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.coord_ids.len() / self.n
    }

    pub fn vertex_count_1d(&self) -> usize {
        self.reps_1d.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_vertices.len() / pow3(self.n)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Vertex ids of a level-m cell, `3^n` entries in corner order.
    pub fn cell_vertices(&self, cell_index: usize) -> &[usize] {
        let pn = pow3(self.n);
        &self.cell_vertices[cell_index * pn..(cell_index + 1) * pn]
    }

    /// 1-D vertex ids of the vertex `v`, one per coordinate.
    pub fn coord_ids(&self, v: usize) -> &[usize] {
        &self.coord_ids[v * self.n..(v + 1) * self.n]
    }

    /// Vertex ids of a 1-D level-m cell.
    pub fn cell_vertices_1d(&self, cell_index: usize) -> &[usize] {
        &self.cells_1d[3 * cell_index..3 * cell_index + 3]
    }

    /// Canonical `(word, corner)` of a 1-D vertex.
    pub fn rep_1d(&self, v: usize) -> (Word, u8) {
        let (w, c) = &self.reps_1d[v];
        (Word(w.clone()), *c)
    }

    /// Id of the 1-D vertex `F_w(p_corner)` for a word of length `level`.
    pub fn vertex_id_1d(&self, w: &[u8], corner: u8) -> Option<usize> {
        if w.len() != self.level {
            return None;
        }
        self.reps_1d.binary_search(&canonical_rep(w, corner)).ok()
    }

    /// Exact vertex weight of a 1-D vertex: incident cells times `3^(-m)/3`.
    pub fn weight_1d(&self, v: usize) -> Q {
        q(self.incidence_1d[v] as i64, 1) / Q::from_integer(num_bigint::BigInt::from(3).pow(self.level as u32 + 1))
    }

    pub fn weight_1d_f64(&self, v: usize) -> f64 {
        self.incidence_1d[v] as f64 / 3f64.powi(self.level as i32 + 1)
    }

    /// Product vertex weight (product of the 1-D weights).
    pub fn weight(&self, v: usize) -> Q {
        let mut w = Q::one();
        for &c in self.coord_ids(v) {
            w *= self.weight_1d(c);
        }
        w
    }

    pub fn weight_f64(&self, v: usize) -> f64 {
        self.coord_ids(v).iter().map(|&c| self.weight_1d_f64(c)).product()
    }

    /// Cartesian coordinates of the 1-D vertex.
    pub fn coords_1d(&self, v: usize) -> (f64, f64) {
        let (w, c) = &self.reps_1d[v];
        let (a, b) = tri_point(w, *c);
        tri_to_xy(a, b, -(self.level as i64))
    }

    /// Coordinates in `R^(2n)`.
    pub fn coords(&self, v: usize) -> Vec<f64> {
        self.coord_ids(v)
            .iter()
            .flat_map(|&c| {
                let (x, y) = self.coords_1d(c);
                [x, y]
            })
            .collect()
    }

    /// Ids of the corner vertices `V_{0,0}^n` (boundary of `S0^n` in the product sense).
    pub fn is_boundary_1d(&self, v: usize) -> bool {
        let (w, c) = &self.reps_1d[v];
        w.iter().all(|&s| s == *c)
    }

    pub fn is_connected(&self) -> bool {
        let nv = self.vertex_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == nv
    }

    pub fn write_vertices_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["vertex_id".to_string(), "x".to_string(), "y".to_string()];
        for a in 2..=self.n {
            header.push(format!("x{a}"));
            header.push(format!("y{a}"));
        }
        wtr.write_record(&header).map_err(csv_err)?;
        for v in 0..self.vertex_count() {
            let mut row = vec![v.to_string()];
            row.extend(self.coords(v).iter().map(|x| format!("{x:.15}")));
            wtr.write_record(&row).map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }

    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["edge", "src", "dst"]).map_err(csv_err)?;
        for (i, e) in self.edges.iter().enumerate() {
            wtr.write_record([i.to_string(), e.src.to_string(), e.dst.to_string()])
                .map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Internal(format!("csv: {e}"))
}

/// Convenience: exact `3^(k-m)` style powers used by measures.
pub fn pow3_q(e: i64) -> Q {
    crate::scalar::qpow(&q(3, 1), e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_roundtrip() {
        for s in ["", "1", "312", "3333"] {
            assert_eq!(Word::parse(s).unwrap().to_string(), s);
        }
        assert!(Word::parse("14").is_err());
        assert!(Word::parse("a").is_err());
    }

    #[test]
    fn product_word_roundtrip() {
        let w = ProductWord::parse("3,1;1,2", 2).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.coord(0).to_string(), "31");
        assert_eq!(w.coord(1).to_string(), "12");
        assert_eq!(w.to_string(), "3,1;1,2");
        assert!(ProductWord::parse("3,1;1", 2).is_err());
        assert_eq!(ProductWord::parse("312", 1).unwrap().to_string(), "312");
    }

    #[test]
    fn children() {
        let c = Cell::unit(1);
        let ch: Vec<String> = c.children().iter().map(|c| c.to_string()).collect();
        assert_eq!(ch, ["1", "2", "3"]);
        let c = Cell::of(0, &Word::parse("31").unwrap());
        let ch: Vec<String> = c.children().iter().map(|c| c.to_string()).collect();
        assert_eq!(ch, ["311", "312", "313"]);
        let c = Cell::new(1, ProductWord::empty(2));
        let ch = c.children();
        assert_eq!(ch.len(), 9);
        assert!(ch.iter().all(|c| c.diameter() == 1.0));
        assert_eq!(ch[5].to_string(), "1:2,3");
    }

    #[test]
    fn corners() {
        let c = Cell::unit(1).corner_coordinates();
        assert_eq!(c[1], vec![1.0, 0.0]);
        assert!((c[2][0] - 0.5).abs() < 1e-15 && (c[2][1] - 0.8660254037844386).abs() < 1e-15);
        let c = Cell::of(0, &Word::parse("1").unwrap()).corner_coordinates();
        assert!((c[2][0] - 0.25).abs() < 1e-15 && (c[2][1] - 0.4330127018922193).abs() < 1e-15);
        let c = Cell::of(1, &Word::empty()).corner_coordinates();
        assert_eq!(c[1], vec![2.0, 0.0]);
        assert!((c[2][1] - 1.7320508075688772).abs() < 1e-15);
    }

    #[test]
    fn small_lattices() {
        let l = build_lattice(0, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!((l.vertex_count(), l.edges().len()), (3, 3));
        let l = build_lattice(1, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!((l.vertex_count(), l.edges().len()), (6, 9));
        let l = build_lattice(2, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(l.vertex_count(), 15);
    }

    #[test]
    fn budget_error_names_size() {
        let e = build_lattice(10, 2, 1000).unwrap_err();
        assert!(matches!(e, Error::Budget { .. }));
        assert!(e.to_string().contains("3^(10*2)"));
    }

    #[test]
    fn canonical_pairs() {
        assert_eq!(canonical_rep(&[2], 1), (vec![1], 2));
        assert_eq!(canonical_rep(&[1], 2), (vec![1], 2));
        assert_eq!(canonical_rep(&[3, 3], 3), (vec![3, 3], 3));
        assert_eq!(canonical_rep(&[3, 1], 2), (vec![3, 1], 2));
    }

    #[test]
    fn contains_point() {
        let c = Cell::of(0, &Word::parse("12").unwrap());
        // F1 F2 S0 has corners F1(F2 p1) = p2/4, p2/2, p2/4 + p3/4
        assert!(c.contains_tri(1, 0, -2));
        assert!(c.contains_tri(1, 0, -1));
        assert!(!c.contains_tri(0, 0, 0));
        assert!(Cell::of(2, &Word::empty()).contains_tri(3, 1, 0));
        assert!(!Cell::of(1, &Word::empty()).contains_tri(3, 1, 0));
    }
}
