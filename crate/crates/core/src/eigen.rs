//! Dense symmetric eigendecomposition: Householder reduction to tridiagonal
//! form followed by the implicit QL iteration (the EISPACK tred2/tql2 pair).

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem<T> {
    eigenvalues: Vec<T>,
    // column-major: vectors[j * n + i] is component i of eigenvector j
    vectors: Vec<T>,
}

impl<T: Real> EigenSystem<T> {
    /// Decomposes the row-major `n x n` matrix `a`. Only symmetry is assumed.
    pub fn from_dense(a: &[T], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        if n == 0 {
            return Ok(Self {
                eigenvalues: Vec::new(),
                vectors: Vec::new(),
            });
        }
        let mut v = a.to_vec();
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        tred2(n, &mut v, &mut d, &mut e);
        // tql2 rotates columns; switch to column-major so rotations touch contiguous memory.
        let mut z = transpose(&v, n);
        tql2(n, n, &mut d, &mut e, &mut z)?;
        Ok(Self {
            eigenvalues: d,
            vectors: z,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Eigenvector `j`.
    pub fn vector(&self, j: usize) -> &[T] {
        let n = self.dim();
        &self.vectors[j * n..(j + 1) * n]
    }

    /// Component `i` of eigenvector `j`.
    pub fn component(&self, i: usize, j: usize) -> T {
        self.vectors[j * self.dim() + i]
    }

    /// `max |V diag(λ) Vᵀ - A|` against the row-major matrix `a`.
    pub fn reconstruction_error(&self, a: &[T]) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let s: T = (0..n)
                    .map(|j| self.component(r, j) * self.eigenvalues[j] * self.component(c, j))
                    .sum();
                worst = worst.max((s - a[r * n + c]).abs());
            }
        }
        worst
    }

    /// `max |VᵀV - I|`.
    pub fn orthonormality_error(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for a in 0..n {
            for b in a..n {
                let dot: T = self
                    .vector(a)
                    .iter()
                    .zip(self.vector(b))
                    .map(|(&x, &y)| x * y)
                    .sum();
                let target = if a == b { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (length `diag.len() - 1`), together with the first
/// `rows` components of every eigenvector, laid out column-major.
pub fn tridiagonal_eigen<T: Real>(
    diag: &[T],
    off: &[T],
    rows: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: off.len(),
        });
    }
    let rows = rows.min(n);
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal in e[1..n].
    let mut e = vec![T::zero(); n];
    e[1..].copy_from_slice(off);
    let mut z = vec![T::zero(); n * rows];
    for j in 0..rows {
        z[j * rows + j] = T::one();
    }
    tql2(n, rows, &mut d, &mut e, &mut z)?;
    Ok((d, z))
}

fn transpose<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let mut t = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

// Householder tridiagonalization of the row-major matrix `v` (overwritten by
// the accumulated transformation). On return `d` is the diagonal and
// `e[1..n]` the sub-diagonal.
fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale.is_zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
                v[idx(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[idx(k, j)] -= upd;
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = T::one();
        let h = d[i + 1];
        if !h.is_zero() {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[idx(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = T::zero();
    }
    v[idx(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

// Implicit QL on the tridiagonal (d, e[1..n]). `z` is column-major with
// `rows` tracked rows per column; each rotation is applied to those rows.
// Eigenpairs come back sorted ascending.
fn tql2<T: Real>(n: usize, rows: usize, d: &mut [T], e: &mut [T], z: &mut [T]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence {
                        iterations: MAX_QL_ITERATIONS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * rows);
                    let col_i = &mut lo[i * rows..];
                    let col_next = &mut hi[..rows];
                    for (a, b) in col_i.iter_mut().zip(col_next.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }

    // selection sort keeps the column swaps cheap and the order stable
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            for r in 0..rows {
                z.swap(i * rows + r, k * rows + r);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path_matrix(n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[i * n + i + 1] = 1.0;
            a[(i + 1) * n + i] = 1.0;
        }
        a
    }

    #[test]
    fn path_graph_spectrum() {
        // eigenvalues of the path on n vertices: 2 cos(k pi / (n+1))
        let n = 7;
        let es = EigenSystem::from_dense(&path_matrix(n), n).unwrap();
        let mut expect: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in es.eigenvalues().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(es.orthonormality_error() < 1e-13);
    }

    #[test]
    fn one_by_one_and_empty() {
        let es = EigenSystem::from_dense(&[3.5], 1).unwrap();
        assert_eq!(es.eigenvalues(), &[3.5]);
        assert_eq!(es.vector(0), &[1.0]);
        assert_eq!(EigenSystem::<f64>::from_dense(&[], 0).unwrap().dim(), 0);
        assert!(EigenSystem::from_dense(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn tridiagonal_first_row_matches_full() {
        let diag = [0.5, -1.0, 2.0, 0.0];
        let off = [1.0, 0.3, 2.0];
        let (vals, first) = tridiagonal_eigen(&diag, &off, 1).unwrap();
        let mut dense = vec![0.0f64; 16];
        for i in 0..4 {
            dense[i * 4 + i] = diag[i];
        }
        for i in 0..3 {
            dense[i * 4 + i + 1] = off[i];
            dense[(i + 1) * 4 + i] = off[i];
        }
        let es = EigenSystem::from_dense(&dense, 4).unwrap();
        for j in 0..4 {
            assert!((vals[j] - es.eigenvalues()[j]).abs() < 1e-13);
            assert!((first[j].abs() - es.component(0, j).abs()).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn random_symmetric_reconstructs(
            n in 1usize..12,
            seed in proptest::collection::vec(-3.0f64..3.0, 144),
        ) {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    a[i * n + j] = seed[i * 12 + j];
                    a[j * n + i] = seed[i * 12 + j];
                }
            }
            let es = EigenSystem::from_dense(&a, n).unwrap();
            prop_assert!(es.reconstruction_error(&a) < 1e-12);
            prop_assert!(es.orthonormality_error() < 1e-12);
            prop_assert!(es.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
