use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::MeasureKind;

/// `d_s = 2 log 3 / log 5`.
pub fn spectral_dimension() -> f64 {
    2.0 * 3f64.ln() / 5f64.ln()
}

/// `delta_s = log 3 / log(5/3)`.
pub fn delta_s() -> f64 {
    3f64.ln() / (5.0f64 / 3.0).ln()
}

/// Serde for `f64` values that may be `+inf`, written as the string `"inf"`.
pub mod inf_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(x) => Ok(x),
            NumOrStr::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => other.parse().map_err(serde::de::Error::custom),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub n: usize,
    pub r: f64,
    pub p: f64,
    #[serde(with = "inf_serde")]
    pub q: f64,
    pub sigma: MeasureKind,
    pub delta_lo: f64,
    #[serde(with = "inf_serde")]
    pub delta_hi: f64,
}

impl SobolevParams {
    /// Parameters whose measure is Hausdorff (`delta_lo = delta_hi = 1`).
    pub fn with_hausdorff(n: usize, r: f64, p: f64, q: f64) -> Self {
        SobolevParams { n, r, p, q, sigma: MeasureKind::Hausdorff, delta_lo: 1.0, delta_hi: 1.0 }
    }

    /// Checks `n >= 1`, `r >= 2`, `r > 1 + (n-1) delta_s` only.
    pub fn validate_rn(n: usize, r: f64) -> Result<()> {
        if n == 0 {
            return Err(Error::hypothesis("n >= 1"));
        }
        if !(r >= 2.0) {
            return Err(Error::hypothesis(format!("r >= 2 (got r = {r})")));
        }
        let floor = 1.0 + (n as f64 - 1.0) * delta_s();
        if !(r > floor) {
            return Err(Error::hypothesis(format!("r > 1 + (n-1) delta_s = {floor:.6} (got r = {r}, n = {n})")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Self::validate_rn(self.n, self.r)?;
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::hypothesis(format!("p >= 1 and finite (got p = {})", self.p)));
        }
        let lo = self.p.min(self.r);
        if !(self.q >= lo) {
            return Err(Error::hypothesis(format!("q >= min(p, r) = {lo} (got q = {})", self.q)));
        }
        if !(self.delta_lo > 0.0 && self.delta_lo <= self.delta_hi) {
            return Err(Error::hypothesis(format!(
                "0 < delta_lo <= delta_hi (got {}, {})",
                self.delta_lo, self.delta_hi
            )));
        }
        if !(self.delta_hi >= 1.0) {
            return Err(Error::hypothesis(format!("delta_hi >= 1 (got {})", self.delta_hi)));
        }
        self.sigma.validate(self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub d_s: f64,
    pub delta_s: f64,
    pub r_conj: f64,
    pub alpha_r: f64,
    pub beta_r: f64,
    pub a1: f64,
    pub a2: f64,
}

/// `1 / (x y)` with the convention that an infinite factor gives 0.
fn inv_prod(x: f64, y: f64) -> f64 {
    if x.is_infinite() || y.is_infinite() {
        0.0
    } else {
        1.0 / (x * y)
    }
}

/// `(alpha_r, beta_r)` for `n` factors.
pub fn alpha_beta(n: usize, r: f64) -> (f64, f64) {
    let ds = delta_s();
    let rc = r / (r - 1.0);
    let nf = n as f64;
    (1.0 / (rc * ds) - (nf - 1.0) / r, (1.0 / ds + 1.0) / rc - nf / r)
}

pub fn exponents(params: &SobolevParams) -> Result<ExponentSet> {
    params.validate()?;
    let ds = delta_s();
    let (n, r, p, q) = (params.n as f64, params.r, params.p, params.q);
    let rc = r / (r - 1.0);
    let (alpha_r, beta_r) = alpha_beta(params.n, r);
    let a1 = ((1.0 / p - inv_prod(q, params.delta_lo)) / (1.0 / p - 1.0 / r + (1.0 / (rc * ds) + 1.0 / rc) / n))
        .max(0.0);
    let a2 = ((1.0 / p - inv_prod(q, params.delta_hi)) / (1.0 / p - 1.0 / r + (1.0 / (rc * ds) + 1.0 / r) / n))
        .max(0.0);
    Ok(ExponentSet { d_s: spectral_dimension(), delta_s: ds, r_conj: rc, alpha_r, beta_r, a1, a2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((3f64.powf(1.0 / delta_s()) - 5.0 / 3.0).abs() < 1e-12);
        assert!((delta_s() - 1.0 / (2.0 / spectral_dimension() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn examples() {
        let e = exponents(&SobolevParams::with_hausdorff(1, 2.0, 2.0, 2.0)).unwrap();
        assert_eq!(e.a1, 0.0);
        let e = exponents(&SobolevParams::with_hausdorff(1, 2.0, 2.0, f64::INFINITY)).unwrap();
        let ds = delta_s();
        assert!((e.a1 - ds / (ds + 1.0)).abs() < 1e-12);
        assert!((e.a1 - 0.6826).abs() < 1e-4);
        assert!((e.alpha_r - 1.0 / (2.0 * ds)).abs() < 1e-12);
        assert!((e.beta_r - 1.0 / (2.0 * ds)).abs() < 1e-12);
        assert!((e.alpha_r - 0.23250).abs() < 1e-4);
    }

    #[test]
    fn hypothesis_errors() {
        let e = exponents(&SobolevParams::with_hausdorff(2, 3.0, 2.0, 4.0)).unwrap_err();
        assert!(e.to_string().contains("r > 1 + (n-1) delta_s"));
        let e = exponents(&SobolevParams::with_hausdorff(1, 1.5, 2.0, 4.0)).unwrap_err();
        assert!(e.to_string().contains("r >= 2"));
        let e = exponents(&SobolevParams::with_hausdorff(1, 2.0, 4.0, 1.0)).unwrap_err();
        assert!(e.to_string().contains("min(p, r)"));
    }

    #[test]
    fn params_json_inf() {
        let p = SobolevParams::with_hausdorff(1, 2.0, 2.0, f64::INFINITY);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<SobolevParams>(&s).unwrap(), p);
    }
}
