//! Restarted GMRES with an ILU(0) right preconditioner.

use super::norm_inf;
use crate::error::{HeomError, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 60,
            tol: 1e-12,
            max_iter: 5000,
        }
    }
}

/// Incomplete LU with the sparsity pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.with_full_diagonal();
        let n = lu.nrows();
        let diag: Vec<usize> = (0..n).map(|r| lu.find(r, r).unwrap()).collect();
        let indptr = lu.indptr().to_vec();
        let indices = lu.indices().to_vec();
        let vals = lu.values_mut();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in indptr[i]..indptr[i + 1] {
                pos[indices[k]] = k;
            }
            for k in indptr[i]..indptr[i + 1] {
                let col = indices[k];
                if col >= i {
                    break;
                }
                let piv = vals[diag[col]];
                let l = vals[k] / piv;
                vals[k] = l;
                for kk in (diag[col] + 1)..indptr[col + 1] {
                    let p = pos[indices[kk]];
                    if p != usize::MAX {
                        let u = vals[kk];
                        vals[p] -= l * u;
                    }
                }
            }
            for k in indptr[i]..indptr[i + 1] {
                pos[indices[k]] = usize::MAX;
            }
            // a vanishing pivot is replaced by a small multiple of the row scale;
            // only the preconditioner changes, not the system GMRES solves
            let scale = (indptr[i]..indptr[i + 1]).map(|k| vals[k].norm()).fold(0.0, f64::max);
            if vals[diag[i]].norm() <= 1e-12 * scale {
                if scale == 0.0 {
                    return Err(HeomError::Solver {
                        msg: format!("empty row {i} in ILU(0)"),
                        residual: f64::INFINITY,
                    });
                }
                vals[diag[i]] = C64::new(1e-8 * scale, 0.0);
            }
        }
        Ok(Self { lu, diag })
    }

    /// Solves `LU z = r`.
    pub fn apply(&self, r: &[C64]) -> Vec<C64> {
        let n = r.len();
        let (ip, ix, v) = (self.lu.indptr(), self.lu.indices(), self.lu.values());
        let mut z = r.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for k in ip[i]..self.diag[i] {
                acc -= v[k] * z[ix[k]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in (self.diag[i] + 1)..ip[i + 1] {
                acc -= v[k] * z[ix[k]];
            }
            z[i] = acc / v[self.diag[i]];
        }
        z
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Returns `(x, iterations, relative ∞-residual)`. Fails if the tolerance is not met.
pub fn gmres(a: &CsrMatrix, b: &[C64], pre: Option<&Ilu0>, opts: &GmresOptions) -> Result<(Vec<C64>, usize, f64)> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(HeomError::Dimension("GMRES system size mismatch".into()));
    }
    let zero = C64::new(0.0, 0.0);
    let m = opts.restart.max(1);
    let prec = |v: &[C64]| match pre {
        Some(p) => p.apply(v),
        None => v.to_vec(),
    };
    let bn = norm_inf(b).max(f64::MIN_POSITIVE);
    let mut x = vec![zero; n];
    let mut iters = 0;
    let residual = |x: &[C64]| -> Vec<C64> { a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect() };
    let mut r = residual(&x);
    loop {
        let rel = norm_inf(&r) / bn;
        if rel <= opts.tol {
            return Ok((x, iters, rel));
        }
        if iters >= opts.max_iter {
            return Err(HeomError::Solver {
                msg: format!("GMRES did not converge in {iters} iterations"),
                residual: rel,
            });
        }
        let beta = norm2(&r);
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![zero; m]; m + 1];
        let (mut cs, mut sn) = (vec![zero; m], vec![zero; m]);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let w0 = a.mul_vec(&prec(&v[k]));
            let mut w = w0;
            for i in 0..=k {
                let hik = dot(&v[i], &w);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm2(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (p, q) = (h[k][k], h[k + 1][k]);
            let den = (p.norm_sqr() + q.norm_sqr()).sqrt();
            if den == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = zero;
            } else {
                cs[k] = p / den;
                sn[k] = q / den;
            }
            h[k][k] = cs[k].conj() * p + sn[k].conj() * q;
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            iters += 1;
            k_used = k + 1;
            if hn == 0.0 || g[k + 1].norm() / beta < opts.tol * 1e-2 || iters >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        let mut upd = vec![zero; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, vj) in upd.iter_mut().zip(&v[j]) {
                *u += yj * vj;
            }
        }
        let dx = prec(&upd);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        r = residual(&x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let n = 30;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, C64::new(4.0, 1.0)));
            if i + 1 < n {
                trip.push((i, i + 1, C64::new(-1.0, 0.3)));
                trip.push((i + 1, i, C64::new(-0.5, 0.0)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, trip).unwrap();
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let pre = Ilu0::new(&a).unwrap();
        let (x, _, rel) = gmres(&a, &b, Some(&pre), &GmresOptions::default()).unwrap();
        assert!(rel < 1e-12);
        let r: f64 = a
            .mul_vec(&x)
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        assert!(r < 1e-10);
        // a tridiagonal matrix has an exact ILU(0)
        let z = pre.apply(&a.mul_vec(&b));
        assert!(z.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-12));
    }
}
