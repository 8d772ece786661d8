//! 3x3 matrices over any ring used in the harmonic and measure code.

use num_traits::{One, Zero};
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T> Mat3<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Sub<Output = T>,
{
    pub fn zero() -> Self {
        Mat3(std::array::from_fn(|_| std::array::from_fn(|_| T::zero())))
    }

    pub fn identity() -> Self {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { T::one() } else { T::zero() })
        }))
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.0[i][j]
    }

    pub fn mul(&self, o: &Self) -> Self {
        Mat3::from_fn(|i, j| {
            let mut s = T::zero();
            for k in 0..3 {
                s = s + self.0[i][k].clone() * o.0[k][j].clone();
            }
            s
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        Mat3::from_fn(|i, j| self.0[i][j].clone() + o.0[i][j].clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat3::from_fn(|i, j| self.0[i][j].clone() - o.0[i][j].clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        Mat3::from_fn(|i, j| self.0[i][j].clone() * c.clone())
    }

    pub fn transpose(&self) -> Self {
        Mat3::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        std::array::from_fn(|i| {
            let mut s = T::zero();
            for k in 0..3 {
                s = s + self.0[i][k].clone() * v[k].clone();
            }
            s
        })
    }

    pub fn trace(&self) -> T {
        self.0[0][0].clone() + self.0[1][1].clone() + self.0[2][2].clone()
    }

    /// Sum of squared entries, i.e. `trace(M^t M)`.
    pub fn frob_sq(&self) -> T {
        let mut s = T::zero();
        for row in &self.0 {
            for x in row {
                s = s + x.clone() * x.clone();
            }
        }
        s
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat3<U> {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(&self.0[i][j]))))
    }
}

pub fn dot<T>(a: &[T; 3], b: &[T; 3]) -> T
where
    T: Clone + Zero + Mul<Output = T>,
{
    let mut s = T::zero();
    for k in 0..3 {
        s = s + a[k].clone() * b[k].clone();
    }
    s
}

/// Eigenvalues of a symmetric or diagonalisable 3x3 float matrix, ascending.
pub fn eigenvalues_f64(m: &Mat3<f64>) -> [f64; 3] {
    let mat = nalgebra::Matrix3::from_fn(|i, j| m.0[i][j]);
    let ev = mat.complex_eigenvalues();
    let mut v: Vec<f64> = ev.iter().map(|c| c.re).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [v[0], v[1], v[2]]
}
