//! Small dense square matrices: just enough for Cholesky factors of
//! proposal scale matrices.

use serde::{Deserialize, Serialize};

/// Row-major `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from nested rows; `None` if the rows are ragged or not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(SquareMatrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add_diagonal(&self, d: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += d;
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// `self * self^T`.
    pub fn gram(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| self[(i, k)] * self[(j, k)]).sum();
            }
        }
        out
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Lower Cholesky factor, or `None` if the matrix is not numerically
    /// positive definite.
    pub fn cholesky(&self) -> Option<LowerTriangular> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !d.is_finite() || d <= 0.0 {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(LowerTriangular(l))
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// A lower-triangular matrix with strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular(SquareMatrix);

impl LowerTriangular {
    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.n
    }

    /// `L x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.0.n;
        (0..n)
            .map(|i| (0..=i).map(|k| self.0[(i, k)] * x[k]).sum())
            .collect()
    }

    /// Solves `L z = b` by forward substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.0.n;
        let mut z = vec![0.0; n];
        for i in 0..n {
            let s = b[i] - (0..i).map(|k| self.0[(i, k)] * z[k]).sum::<f64>();
            z[i] = s / self.0[(i, i)];
        }
        z
    }

    /// `ln det(L L^T) / 2`, i.e. the sum of log-diagonal entries.
    pub fn half_log_det(&self) -> f64 {
        (0..self.0.n).map(|i| self.0[(i, i)].ln()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> SquareMatrix {
        SquareMatrix::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 3.0, -0.5],
            vec![0.4, -0.5, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = spd();
        let l = a.cholesky().unwrap();
        assert!(l.matrix().gram().frobenius_distance(&a) < 1e-12);
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_eq!(l.matrix()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = spd();
        a[(2, 2)] = -1.0;
        assert!(a.cholesky().is_none());
        assert!(SquareMatrix::zeros(3).cholesky().is_none());
    }

    #[test]
    fn triangular_solve_inverts_multiply() {
        let l = spd().cholesky().unwrap();
        let x = [0.3, -1.7, 2.2];
        let z = l.solve(&l.mul_vec(&x));
        for (a, b) in x.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn half_log_det_matches_determinant() {
        let a = spd();
        let det = 4.0 * (3.0 - 0.25) - 2.0 * (2.0 + 0.2) + 0.4 * (-1.0 - 1.2);
        let l = a.cholesky().unwrap();
        assert!((2.0 * l.half_log_det() - f64::ln(det)).abs() < 1e-12);
    }
}
