use std::io::Write;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponents::{exponents, ExponentSet, SobolevParams};
use super::norms::{fold_leaves, lq_leaf, pairwise_sum, FactorizedMeasure, GradQuad};
use crate::addressing::{build_lattice, pow3, ProductWord, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::harmonic::PwFn;
use crate::measure::MeasureKind;
use crate::scalar::{q, Q};

/// Denominator of the sampled vertex values.
pub const SAMPLE_DENOM: i64 = 1024;

/// Random piecewise harmonic functions at `level`: vertex values uniform on
/// `[-1, 1] / SAMPLE_DENOM` grid points, zero where a coordinate is a corner of `S0`.
pub fn sample_functions(n: usize, level: usize, count: usize, seed: u64) -> Result<Vec<PwFn<Q>>> {
    if level == 0 {
        return Err(Error::arg("sample_level", "sample level must be at least 1"));
    }
    let lat = build_lattice(level, n, DEFAULT_BUDGET)?;
    let interior: Vec<bool> =
        (0..lat.vertex_count()).map(|v| !lat.coord_ids(v).iter().any(|&c| lat.is_boundary_1d(c))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let vals: Vec<Q> = interior
            .iter()
            .map(|&inner| if inner { q(rng.random_range(-SAMPLE_DENOM..=SAMPLE_DENOM), SAMPLE_DENOM) } else { Q::zero() })
            .collect();
        if vals.iter().all(|x| x.is_zero()) {
            continue;
        }
        out.push(PwFn::from_vertex_values(&lat, &vals));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityTerms {
    /// `||u||_{L^q(sigma)}`.
    pub lhs: f64,
    /// `[[u]]_{W^{1,r}}`.
    pub seminorm: f64,
    /// `||u||_{L^p(nu_n)}`.
    pub lp: f64,
    pub rhs1: f64,
    pub rhs2: f64,
    /// `lhs / (rhs1 + rhs2)`.
    pub ratio: f64,
}

/// Quadrature data for both sides of the Sobolev inequality at one refinement level.
#[derive(Clone, Debug)]
pub struct InequalityQuadrature {
    pub params: SobolevParams,
    pub exponents: ExponentSet,
    pub window: u32,
    pub level: usize,
    sigma: FactorizedMeasure,
    nu: FactorizedMeasure,
    grad: GradQuad,
}

impl InequalityQuadrature {
    pub fn new(params: &SobolevParams, window: u32, level: usize) -> Result<Self> {
        let exponents = exponents(params)?;
        if level < window as usize {
            return Err(Error::arg("refine", "refinement level below the window blow-up"));
        }
        Ok(InequalityQuadrature {
            params: params.clone(),
            exponents,
            window,
            level,
            sigma: FactorizedMeasure::new(&params.sigma, params.n, window, level)?,
            nu: FactorizedMeasure::new(&MeasureKind::Hausdorff, params.n, window, level)?,
            grad: GradQuad::new(params.n, params.r, window, level),
        })
    }

    /// Both sides for `u`, after exact normalization by `max |u|` (the ratio is 0-homogeneous).
    pub fn evaluate(&self, u: &PwFn<Q>) -> Result<InequalityTerms> {
        let n = self.params.n;
        if u.arity() != n {
            return Err(Error::arg("u", "arity mismatch"));
        }
        if u.level() > self.level {
            return Err(Error::arg("refine", "refinement level below the function level"));
        }
        let peak = u.tables().iter().map(|x| x.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a });
        if peak.is_zero() {
            return Err(Error::arg("u", "the zero function has no ratio"));
        }
        let uf = u.map(|x| crate::scalar::q_to_f64(&(x / &peak)));
        let (p, qq) = (self.params.p, self.params.q);
        let pn = pow3(n);
        let parts = fold_leaves(
            &uf,
            &ProductWord::empty(n),
            self.level,
            || ([0.0f64; 3], vec![0.0; pn]),
            |(acc, buf), idx, t| {
                acc[0] += self.grad.leaf(idx, t);
                lq_leaf(&self.sigma, qq, idx, t, buf, &mut acc[1]);
                lq_leaf(&self.nu, p, idx, t, buf, &mut acc[2]);
            },
        )?;
        let col = |j: usize| parts.iter().map(|p| p.0[j]).collect::<Vec<f64>>();
        let seminorm = pairwise_sum(&col(0)).powf(1.0 / self.params.r);
        let lhs = if qq.is_infinite() { col(1).into_iter().fold(0.0, f64::max) } else { pairwise_sum(&col(1)).powf(1.0 / qq) };
        let lp = pairwise_sum(&col(2)).powf(1.0 / p);
        let term = |a: f64| seminorm.powf(a) * lp.powf(1.0 - a);
        let rhs1 = term(self.exponents.a1);
        let rhs2 = term(self.exponents.a2);
        Ok(InequalityTerms { lhs, seminorm, lp, rhs1, rhs2, ratio: lhs / (rhs1 + rhs2) })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Refinement level `M` of the quadrature.
    pub refine: usize,
    /// Second level for the stability comparison.
    pub compare: Option<usize>,
    /// Blow-up of the window carrying the samples.
    #[serde(default)]
    pub window: u32,
    pub sample_level: usize,
}

impl VerifyOptions {
    pub fn new(samples: usize, seed: u64, refine: usize) -> Self {
        VerifyOptions { samples, seed, refine, compare: refine.checked_sub(1), window: 0, sample_level: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_id: usize,
    pub lhs: f64,
    pub rhs1: f64,
    pub rhs2: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub compare_level: usize,
    pub compare_max_ratio: f64,
    /// Largest relative change of a single sample's ratio.
    pub max_sample_drift: f64,
    /// Relative change of the maximal ratio.
    pub max_ratio_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub params: SobolevParams,
    pub exponents: ExponentSet,
    pub seed: u64,
    pub window: u32,
    pub refinement: usize,
    pub samples: Vec<SampleRow>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub stability: Option<Stability>,
}

impl RatioReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.samples {
            w.serialize(row).map_err(crate::addressing::csv_err)?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))?;
        Ok(())
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Empirical constants of the Sobolev inequality on seeded random samples.
pub fn sobolev_verify(params: &SobolevParams, opts: &VerifyOptions) -> Result<RatioReport> {
    params.validate()?;
    if opts.samples == 0 {
        return Err(Error::arg("samples", "need at least one sample"));
    }
    let funcs = sample_functions(params.n, opts.sample_level, opts.samples, opts.seed)?;
    let quad = InequalityQuadrature::new(params, opts.window, opts.refine)?;
    let terms: Vec<InequalityTerms> = funcs.par_iter().map(|u| quad.evaluate(u)).collect::<Result<_>>()?;
    let samples: Vec<SampleRow> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| SampleRow { sample_id: i, lhs: t.lhs, rhs1: t.rhs1, rhs2: t.rhs2, ratio: t.ratio })
        .collect();
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stability = match opts.compare {
        Some(c) if c != opts.refine => {
            let cq = InequalityQuadrature::new(params, opts.window, c)?;
            let other: Vec<f64> = funcs.par_iter().map(|u| cq.evaluate(u).map(|t| t.ratio)).collect::<Result<_>>()?;
            let compare_max_ratio = other.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some(Stability {
                compare_level: c,
                compare_max_ratio,
                max_sample_drift: ratios.iter().zip(&other).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max),
                max_ratio_drift: rel(max_ratio, compare_max_ratio),
            })
        }
        _ => None,
    };
    Ok(RatioReport {
        params: params.clone(),
        exponents: quad.exponents.clone(),
        seed: opts.seed,
        window: opts.window,
        refinement: opts.refine,
        median_ratio: median(&ratios),
        max_ratio,
        samples,
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qi;

    #[test]
    fn samples_vanish_on_boundary() {
        let fs = sample_functions(1, 2, 5, 9).unwrap();
        for f in &fs {
            assert!(crate::sobolev::vanishes_on_boundary(f).unwrap());
        }
        assert_eq!(fs, sample_functions(1, 2, 5, 9).unwrap());
        assert_ne!(fs, sample_functions(1, 2, 5, 10).unwrap());
    }

    #[test]
    fn scale_invariance_exact() {
        let p = SobolevParams::with_hausdorff(1, 2.0, 2.0, 4.0);
        let quad = InequalityQuadrature::new(&p, 0, 4).unwrap();
        for u in sample_functions(1, 2, 4, 1).unwrap() {
            let a = quad.evaluate(&u).unwrap();
            let b = quad.evaluate(&u.scale(&qi(7))).unwrap();
            assert_eq!(a.ratio, b.ratio);
            assert!(a.ratio.is_finite() && a.ratio > 0.0);
        }
    }

    #[test]
    fn small_run() {
        let p = SobolevParams::with_hausdorff(1, 2.0, 2.0, 4.0);
        let r = sobolev_verify(&p, &VerifyOptions::new(8, 3, 4)).unwrap();
        assert_eq!(r.samples.len(), 8);
        assert!(r.max_ratio.is_finite());
        assert!(r.stability.is_some());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("sample_id,lhs,rhs1,rhs2,ratio\n"));
    }
}
