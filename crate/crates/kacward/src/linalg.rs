//! Dense complex matrices, real antisymmetric matrices and their Pfaffians.
//!
//! Rows and columns are indexed by canonical ids (oriented edges as `2k`,
//! `2k+1`; corners by vertex then angular position), so a plain index list
//! is enough to select a minor.

use num_complex::Complex64;
use rayon::prelude::*;
use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Relative pivot threshold below which a matrix counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Square dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        assert_eq!(rows.len(), cols.len());
        Self::from_fn(rows.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    fn lu(&self) -> Result<(Vec<C64>, Vec<usize>, bool)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if best <= SINGULAR_TOL * scale {
                return Err(Error::Singular { pivot: best, scale });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let piv = a[k * n + k];
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            tail.chunks_mut(n).for_each(|row| {
                let f = row[k] / piv;
                row[k] = f;
                if f != C64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        row[j] -= f * pivot_row[j];
                    }
                }
            });
        }
        Ok((a, perm, odd))
    }

    /// Determinant by LU with partial pivoting. A singular matrix gives 0.
    pub fn det(&self) -> C64 {
        match self.lu() {
            Ok((a, _, odd)) => {
                let mut d = C64::new(if odd { -1.0 } else { 1.0 }, 0.0);
                for k in 0..self.n {
                    d *= a[k * self.n + k];
                }
                d
            }
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let n = self.n;
        let (a, perm, _) = self.lu()?;
        let mut inv = CMatrix::zeros(n);
        for col in 0..n {
            let mut y = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut s = if perm[i] == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                for j in 0..i {
                    s -= a[i * n + j] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in i + 1..n {
                    s -= a[i * n + j] * y[j];
                }
                y[i] = s / a[i * n + i];
            }
            for i in 0..n {
                inv[(i, col)] = y[i];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        out.data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let r = &rhs.data[k * n..(k + 1) * n];
                for j in 0..n {
                    row[j] += a * r[j];
                }
            }
        });
        out
    }
}

/// Real antisymmetric matrix. The only mutator writes both `(i,j)` and
/// `(j,i)`, so antisymmetry holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        SkewMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `A[i][j] = v` and `A[j][i] = -v`. Panics on the diagonal unless `v == 0`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i != j || v == 0.0, "diagonal of a skew matrix is zero");
        if i == j {
            return;
        }
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = -v;
    }

    /// Real part of a complex matrix that must be antisymmetric with
    /// negligible imaginary part. Imaginary residue up to `tol·max|M|` is
    /// dropped; anything larger is a convention bug and is reported.
    pub fn from_complex(m: &CMatrix, tol: f64) -> Result<SkewMatrix> {
        let n = m.dim();
        let scale = m.max_abs().max(1.0);
        let mut out = SkewMatrix::zeros(n);
        for i in 0..n {
            let d = m[(i, i)].norm();
            if d > tol * scale {
                return Err(Error::NotSkew { i, j: i, residue: d });
            }
            for j in i + 1..n {
                let a = m[(i, j)];
                let b = m[(j, i)];
                let residue = a.im.abs().max(b.im.abs()).max((a.re + b.re).abs());
                if residue > tol * scale {
                    return Err(Error::NotSkew { i, j, residue });
                }
                out.set(i, j, 0.5 * (a.re - b.re));
            }
        }
        Ok(out)
    }

    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| C64::new(self.get(i, j), 0.0))
    }

    /// Principal submatrix on `idx`, in the given order.
    pub fn minor(&self, idx: &[usize]) -> SkewMatrix {
        let mut out = SkewMatrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * idx.len() + b] = self.get(i, j);
            }
        }
        out
    }

    pub fn pfaffian(&self) -> f64 {
        pfaffian(self)
    }

    pub fn inverse(&self) -> Result<SkewMatrix> {
        let inv = self.to_complex().inverse()?;
        let n = self.n;
        let mut out = SkewMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                out.set(i, j, 0.5 * (inv[(i, j)].re - inv[(j, i)].re));
            }
        }
        Ok(out)
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination (Parlett-Reid style):
/// two columns are eliminated per step with partial pivoting, and each row
/// swap flips the sign.
pub fn pfaffian(m: &SkewMatrix) -> f64 {
    let n = m.n;
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.data.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let (kp, best) = (k + 1..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k + 1, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if best == 0.0 {
            return 0.0;
        }
        if kp != k + 1 {
            swap_sym(&mut a, n, k + 1, kp);
            pf = -pf;
        }
        let akk1 = a[k * n + k + 1];
        pf *= akk1;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[k * n + j] / akk1).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[i * n + k + 1]).collect();
            let off = k + 2;
            let update = |(r, row): (usize, &mut [f64])| {
                let (ti, ci) = (tau[r], col[r]);
                let row = &mut row[off..];
                for c in 0..row.len() {
                    row[c] += ti * col[c] - ci * tau[c];
                }
            };
            if n - off >= 192 {
                a[off * n..].par_chunks_mut(n).enumerate().for_each(update);
            } else {
                a[off * n..].chunks_mut(n).enumerate().for_each(update);
            }
        }
        k += 2;
    }
    pf
}

fn swap_sym(a: &mut [f64], n: usize, p: usize, q: usize) {
    for j in 0..n {
        a.swap(p * n + j, q * n + j);
    }
    for i in 0..n {
        a.swap(i * n + p, i * n + q);
    }
}

/// Pfaffian of the principal minor on `idx` in the given order; the empty
/// minor has Pfaffian 1.
pub fn pfaffian_minor(m: &SkewMatrix, idx: &[usize]) -> Result<f64> {
    for (a, &i) in idx.iter().enumerate() {
        if i >= m.n {
            return Err(Error::UnknownLabel(i));
        }
        if idx[..a].contains(&i) {
            return Err(Error::RepeatedLabel(i));
        }
    }
    Ok(pfaffian(&m.minor(idx)))
}

/// Pfaffian of a complex antisymmetric matrix via the same elimination.
/// Used for minors of inverses that are only antisymmetric up to a phase.
pub fn pfaffian_complex(m: &CMatrix) -> C64 {
    let n = m.dim();
    if n % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    let mut a = m.data.clone();
    let mut pf = C64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let (kp, best) = (k + 1..n)
            .map(|i| (i, a[i * n + k].norm()))
            .fold((k + 1, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if kp != k + 1 {
            for j in 0..n {
                a.swap((k + 1) * n + j, kp * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        let akk1 = a[k * n + k + 1];
        pf *= akk1;
        for i in k + 2..n {
            let ti = a[k * n + i] / akk1;
            for j in k + 2..n {
                let tj = a[k * n + j] / akk1;
                let delta = ti * a[j * n + k + 1] - a[i * n + k + 1] * tj;
                a[i * n + j] += delta;
            }
        }
        k += 2;
    }
    pf
}
