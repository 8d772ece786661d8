use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponents::{alpha_beta, SobolevParams};
use super::norms::{max_min_on, oscillation, seminorm_power_on, WindowFn};
use crate::addressing::{build_lattice, ProductWord, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::harmonic::PwFn;
use crate::scalar::{q_to_f64, Q};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayLevel {
    pub m: usize,
    /// Cells with nonzero oscillation.
    pub cells: usize,
    pub max_ratio: f64,
    pub argmax: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub n: usize,
    pub r: f64,
    pub alpha_r: f64,
    pub refine: usize,
    pub levels: Vec<DecayLevel>,
    /// Largest ratio over all levels.
    pub max_ratio: f64,
}

/// `osc(u on F_w) 3^(m alpha_r) / [[u]]_{W^{1,r}(F_w)}` over all words of length `m <= depth`.
pub fn oscillation_decay_report(u: &PwFn<Q>, r: f64, depth: usize, refine: usize) -> Result<DecayReport> {
    let n = u.arity();
    SobolevParams::validate_rn(n, r)?;
    let (alpha, _) = alpha_beta(n, r);
    let uf = WindowFn::unit(u.to_f64());
    let mut levels = Vec::new();
    for m in 0..=depth {
        let words: Vec<ProductWord> = ProductWord::all(n, m).collect();
        let rows: Vec<Option<(f64, String)>> = words
            .par_iter()
            .map(|w| -> Result<Option<(f64, String)>> {
                let osc = oscillation(u, w)?;
                if osc.is_zero() {
                    return Ok(None);
                }
                let level = m.max(u.level()) + refine;
                let sem = seminorm_power_on(&uf, w, r, level)?.powf(1.0 / r);
                if !(sem > 0.0) {
                    return Err(Error::Internal(format!("zero seminorm with positive oscillation on cell {w}")));
                }
                Ok(Some((q_to_f64(&osc) * 3f64.powf(m as f64 * alpha) / sem, w.to_string())))
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(f64, String)> = None;
        let mut cells = 0;
        for (ratio, w) in rows.into_iter().flatten() {
            cells += 1;
            if best.as_ref().is_none_or(|b| ratio > b.0) {
                best = Some((ratio, w));
            }
        }
        if let Some((max_ratio, argmax)) = best {
            levels.push(DecayLevel { m, cells, max_ratio, argmax });
        }
    }
    let max_ratio = levels.iter().map(|l| l.max_ratio).fold(0.0, f64::max);
    Ok(DecayReport { n, r, alpha_r: alpha, refine, levels, max_ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    /// Window `S_{0,m}`.
    pub m: usize,
    pub osc: f64,
    pub seminorm: f64,
    /// `3^(m beta_r) [[u]]`.
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub n: usize,
    pub r: f64,
    pub beta_r: f64,
    /// The function lives on `S_{0,support}` and vanishes outside.
    pub support: u32,
    pub refine: usize,
    pub rows: Vec<GrowthRow>,
    pub pass: bool,
}

/// Whether `v` vanishes wherever some coordinate is a corner of `S0`.
pub fn vanishes_on_boundary(v: &PwFn<Q>) -> Result<bool> {
    let lat = build_lattice(v.level(), v.arity(), DEFAULT_BUDGET)?;
    let vals = v.to_vertex_values(&lat)?;
    Ok((0..lat.vertex_count())
        .all(|x| vals[x].is_zero() || !lat.coord_ids(x).iter().any(|&c| lat.is_boundary_1d(c))))
}

/// Checks `osc_{S_{0,m}} u <= 3^(m beta_r) [[u]]_{W^{1,r}(S_{0,m})}` for `m <= max_m`,
/// where `u = v o F_(1..1)^support` on `S_{0,support}` and `u = 0` elsewhere.
pub fn growth_report(v: &PwFn<Q>, support: u32, r: f64, max_m: usize, refine: usize) -> Result<GrowthReport> {
    let n = v.arity();
    SobolevParams::validate_rn(n, r)?;
    if !vanishes_on_boundary(v)? {
        return Err(Error::arg("u", "function must vanish on the boundary of its support cell"));
    }
    let (_, beta) = alpha_beta(n, r);
    let uf = WindowFn::new(support, v.to_f64());
    let level = (support as usize).max(v.level()) + refine;
    let mut rows = Vec::new();
    for m in 0..=max_m {
        let (osc, sem_pow) = if m <= support as usize {
            let prefix = ProductWord::ones(n, support as usize - m);
            (q_to_f64(&oscillation(v, &prefix)?), seminorm_power_on(&uf, &prefix, r, level)?)
        } else {
            let (hi, lo) = max_min_on(v, &ProductWord::empty(n))?;
            let zero = Q::zero();
            let hi = if hi > zero { hi } else { zero.clone() };
            let lo = if lo < zero { lo } else { zero };
            (q_to_f64(&(hi - lo)), seminorm_power_on(&uf, &ProductWord::empty(n), r, level)?)
        };
        let sem = sem_pow.powf(1.0 / r);
        let bound = 3f64.powf(m as f64 * beta) * sem;
        let ratio = if osc == 0.0 { 0.0 } else { osc / bound };
        let pass = osc <= bound * (1.0 + 1e-12);
        rows.push(GrowthRow { m, osc, seminorm: sem, bound, ratio, pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(GrowthReport { n, r, beta_r: beta, support, refine, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{bump_phi0, h};
    use crate::scalar::qi;

    #[test]
    fn decay_h1_bounded() {
        let r = oscillation_decay_report(&h(1), 2.0, 5, 0).unwrap();
        assert_eq!(r.levels.len(), 6);
        assert!(r.max_ratio <= 2f64.sqrt() + 1e-9, "{}", r.max_ratio);
    }

    #[test]
    fn decay_constant_empty() {
        let r = oscillation_decay_report(&PwFn::constant(1, qi(3)), 2.0, 3, 0).unwrap();
        assert!(r.levels.is_empty());
        assert!(oscillation_decay_report(&h(1), 1.5, 3, 0).is_err());
    }

    #[test]
    fn growth_bump() {
        let g = growth_report(&bump_phi0(), 2, 2.0, 4, 0).unwrap();
        assert!(g.rows[2..].iter().all(|r| r.pass));
        // inside the support the bare inequality misses by 2/sqrt(3)
        assert!((g.rows[0].ratio - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        let g = growth_report(&bump_phi0(), 0, 2.0, 4, 0).unwrap();
        assert!(g.pass);
        assert_eq!(g.rows[0].osc, 1.0);
        let c = growth_report(&PwFn::constant(1, qi(0)), 0, 2.0, 2, 0).unwrap();
        assert!(c.pass && c.rows.iter().all(|r| r.osc == 0.0));
        assert!(growth_report(&h(1), 0, 2.0, 2, 0).is_err());
    }
}
