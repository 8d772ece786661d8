use std::fs;
use std::path::PathBuf;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::output::{io_err, write_atomic};
use crate::addressing::Word;
use crate::error::{Error, Result};
use crate::extremal::{m_product, Mat2E, QSqrt3};
use crate::mat::Mat3;
use crate::measure::z_product;
use crate::scalar::{parse_q, q_to_string};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "SG_CACHE_DIR";

/// Write-once on-disk tables of word products, one TOML file per word.
#[derive(Clone, Debug)]
pub struct DiskCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct YEntry {
    word: String,
    /// `Y_w = z / 5^len`.
    len: usize,
    z: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct MEntry {
    word: String,
    /// Row-major entries `a + b sqrt3` as pairs.
    a: Vec<String>,
    b: Vec<String>,
}

fn key(w: &Word) -> String {
    if w.is_empty() {
        "_".to_string()
    } else {
        w.to_string()
    }
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    /// `$SG_CACHE_DIR`, else `sgasket-cache` under the system temp directory.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => DiskCache::new(d),
            _ => DiskCache::new(std::env::temp_dir().join("sgasket-cache")),
        }
    }

    pub fn dir(&self) -> &PathBuf {
        &self.dir
    }

    fn load_or<T: Serialize + for<'de> Deserialize<'de>>(
        &self,
        kind: &str,
        w: &Word,
        valid: impl Fn(&T) -> bool,
        make: impl FnOnce() -> T,
    ) -> Result<T> {
        let dir = self.dir.join(kind);
        let path = dir.join(format!("{}.toml", key(w)));
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(v) = toml::from_str::<T>(&text) {
                if valid(&v) {
                    return Ok(v);
                }
            }
            return Ok(make());
        }
        let v = make();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let text = toml::to_string(&v).map_err(|e| Error::Internal(e.to_string()))?;
        if !path.exists() {
            write_atomic(&path, text.as_bytes())?;
        }
        Ok(v)
    }

    /// Integer form `Z_w = 5^|w| Y_w`.
    pub fn z_product(&self, w: &Word) -> Result<Mat3<BigInt>> {
        let word = w.to_string();
        let e = self.load_or(
            "y",
            w,
            |e: &YEntry| e.word == word && e.len == w.len() && e.z.len() == 3 && e.z.iter().all(|r| r.len() == 3),
            || YEntry { word: word.clone(), len: w.len(), z: z_product(w).0.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect() },
        )?;
        let mut out = Mat3::<BigInt>::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = e.z[i][j].parse().map_err(|_| Error::arg("cache", format!("corrupt entry for word `{word}`")))?;
            }
        }
        Ok(out)
    }

    /// `M_w` over `Q(sqrt 3)`.
    pub fn m_product(&self, w: &Word) -> Result<Mat2E> {
        let word = w.to_string();
        let e = self.load_or(
            "m",
            w,
            |e: &MEntry| e.word == word && e.a.len() == 4 && e.b.len() == 4,
            || {
                let m = m_product(w);
                let flat: Vec<&QSqrt3> = m.0.iter().flatten().collect();
                MEntry {
                    word: word.clone(),
                    a: flat.iter().map(|x| q_to_string(&x.a)).collect(),
                    b: flat.iter().map(|x| q_to_string(&x.b)).collect(),
                }
            },
        )?;
        let get = |k: usize| -> Result<QSqrt3> { Ok(QSqrt3::new(parse_q(&e.a[k])?, parse_q(&e.b[k])?)) };
        Ok(Mat2E([[get(0)?, get(1)?], [get(2)?, get(3)?]]))
    }
}
