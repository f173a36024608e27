//! Small linear-algebra kernels: symmetric tridiagonal eigenvalues by Sturm
//! bisection, tridiagonal and banded LU with partial pivoting, and bordered
//! solves by block elimination with iterative refinement.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows i and i + 1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { coupling / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The k-th smallest eigenvalue (k = 0 is the lowest), by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (lo.abs() + hi.abs() + 1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for a converged eigenvalue, by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let scale = self.diag.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let shift = lambda + 4.0 * f64::EPSILON * scale;
        let sub: Vec<f64> = self.off.clone();
        let diag: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let lu = TridiagonalLu::factor(&sub, &diag, &self.off);
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            lu.solve_in_place(&mut x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}

/// LU factorization of a general tridiagonal matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    pivot: Vec<bool>,
}

impl TridiagonalLu {
    /// `sub[i]` is A[i+1][i], `diag[i]` is A[i][i], `sup[i]` is A[i][i+1].
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut pivot = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = f64::MIN_POSITIVE.sqrt();
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                pivot[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = f64::MIN_POSITIVE.sqrt();
        }
        Self { dl, d, du, du2, pivot }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.pivot[i] {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.du2[i] * b[i + 2];
            }
            b[i] = v / self.d[i];
        }
    }
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band storage; width `2 kl + ku + 1` leaves room for pivoting fill.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (2 * kl + ku + 1)],
        }
    }

    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Gaussian elimination with partial pivoting.
    pub fn factor(&self) -> Result<BandedLu> {
        let mut lu = self.clone();
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        let mut pivot_row = Vec::with_capacity(kl + ku + 1);
        let mut scale = 0.0f64;
        for v in &self.data {
            scale = scale.max(v.abs());
        }
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.data[lu.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if best == 0.0 || best <= 1e-300 * scale.max(1.0) {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.slot(k, j), lu.slot(p, j));
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.slot(k, k)];
            let (start, end) = (lu.slot(k, k + 1), lu.slot(k, last_col) + 1);
            pivot_row.clear();
            pivot_row.extend_from_slice(&lu.data[start..end]);
            for i in k + 1..=last_row {
                let sik = lu.slot(i, k);
                let l = lu.data[sik] / pivot;
                lu.data[sik] = l;
                if l != 0.0 {
                    let from = lu.slot(i, k + 1);
                    let target = &mut lu.data[from..from + pivot_row.len()];
                    for (t, u) in target.iter_mut().zip(&pivot_row) {
                        *t -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu { lu, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.lu;
        let n = m.n;
        let w = m.width();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                // Column k below the diagonal sits at stride w − 1.
                let mut s = m.slot(k, k);
                for bi in &mut b[k + 1..=(k + m.kl).min(n - 1)] {
                    s += w - 1;
                    *bi -= m.data[s] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let last = (k + m.kl + m.ku).min(n - 1);
            let diag = m.slot(k, k);
            let row = &m.data[diag + 1..diag + 1 + (last - k)];
            let v = b[k] - row.iter().zip(&b[k + 1..=last]).map(|(a, x)| a * x).sum::<f64>();
            b[k] = v / m.data[diag];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Linear system [A B; C D] with banded A and a few dense border rows/columns.
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub a: BandedMatrix,
    /// Border columns, each of length n.
    pub b: Vec<Vec<f64>>,
    /// Border rows, each of length n.
    pub c: Vec<Vec<f64>>,
    /// Corner block, `k × k` row-major.
    pub d: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BorderedSystem {
    pub fn border(&self) -> usize {
        self.b.len()
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Dense copy of the whole matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, k) = (self.n(), self.border());
        let mut m = DMatrix::zeros(n + k, n + k);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a.to_dense());
        for s in 0..k {
            for i in 0..n {
                m[(i, n + s)] = self.b[s][i];
                m[(n + s, i)] = self.c[s][i];
            }
            for t in 0..k {
                m[(n + s, n + t)] = self.d[s * k + t];
            }
        }
        m
    }

    /// Full matrix-vector product.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.border();
        let mut top = self.a.matvec(x);
        for (col, &yc) in self.b.iter().zip(y) {
            for (t, v) in top.iter_mut().zip(col) {
                *t += v * yc;
            }
        }
        let bottom = (0..k)
            .map(|r| dot(&self.c[r], x) + (0..k).map(|s| self.d[r * k + s] * y[s]).sum::<f64>())
            .collect();
        (top, bottom)
    }

    /// Solves by block elimination followed by iterative refinement on the full system.
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.border();
        let lu = self.a.factor()?;
        let x_cols: Vec<Vec<f64>> = self.b.iter().map(|col| lu.solve(col)).collect();
        let schur = DMatrix::from_fn(k, k, |r, s| self.d[r * k + s] - dot(&self.c[r], &x_cols[s]));
        let schur_lu = schur.lu();
        if k > 0 && schur_lu.determinant() == 0.0 {
            return Err(Error::Singular("bordered Schur complement".into()));
        }

        let eliminate = |f: &[f64], g: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let u = lu.solve(f);
            if k == 0 {
                return (u, Vec::new());
            }
            let rhs = DVector::from_fn(k, |r, _| g[r] - dot(&self.c[r], &u));
            let y = schur_lu.solve(&rhs).unwrap_or_else(|| DVector::zeros(k));
            let mut x = u;
            for (s, col) in x_cols.iter().enumerate() {
                for (xi, v) in x.iter_mut().zip(col) {
                    *xi -= v * y[s];
                }
            }
            (x, y.iter().copied().collect())
        };

        let (mut x, mut y) = eliminate(f, g);
        let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let target = 1e-15 * (norm(f).max(norm(g)).max(f64::MIN_POSITIVE));
        for _ in 0..4 {
            let (ax, cy) = self.apply(&x, &y);
            let r: Vec<f64> = f.iter().zip(&ax).map(|(a, b)| a - b).collect();
            let s: Vec<f64> = g.iter().zip(&cy).map(|(a, b)| a - b).collect();
            if norm(&r).max(norm(&s)) <= target {
                break;
            }
            let (dx, dy) = eliminate(&r, &s);
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
            y.iter_mut().zip(&dy).for_each(|(a, b)| *a += b);
        }
        Ok((x, y))
    }
}
