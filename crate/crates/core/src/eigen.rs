//! Eigen-decomposition of small dense complex (non-Hermitian) matrices.
//!
//! Householder reduction to Hessenberg form, shifted QR iteration (Wilkinson
//! shift, Givens rotations) to the complex Schur form `A = Z T Z^H`, and
//! eigenvectors by back-substitution on `T`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// One eigenpair with a unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

fn householder_hessenberg(a: &mut DenseMatrix, z: &mut DenseMatrix) {
    let n = a.n;
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // A ← (I − 2vv^H) A
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * a[(k + 1 + t, j)]).sum();
            for (t, vt) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= *vt * s * 2.0;
            }
        }
        // A ← A (I − 2vv^H), Z ← Z (I − 2vv^H)
        for m in [&mut *a, &mut *z] {
            for i in 0..n {
                let s: Complex64 = v.iter().enumerate().map(|(t, vt)| m[(i, k + 1 + t)] * vt).sum();
                for (t, vt) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= s * vt.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [[a, b], [c, d]] closer to d
    let tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form `A = Z T Z^H`; returns `(T, Z)`.
pub fn schur(a: &DenseMatrix, max_iter_per_value: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = a.n;
    let mut t = a.clone();
    let mut z = DenseMatrix::identity(n);
    householder_hessenberg(&mut t, &mut z);
    if n < 2 {
        return Ok((t, z));
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = t[(l, l)].norm() + t[(l - 1, l - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if t[(l, l - 1)].norm() <= f64::EPSILON * scale {
                t[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > max_iter_per_value {
            return Err(Error::Numerical(format!(
                "QR iteration did not converge after {total} sweeps; subdiagonal residual {:e} at row {hi}",
                t[(hi, hi - 1)].norm()
            )));
        }
        let mu = if iter % 11 == 10 {
            t[(hi, hi)] + t[(hi, hi - 1)].norm() * 0.75
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for i in l..=hi {
            t[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            for j in k..n {
                let x = t[(k, j)];
                let y = t[(k + 1, j)];
                t[(k, j)] = x * c + s * y;
                t[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let x = t[(i, k)];
                let y = t[(i, k + 1)];
                t[(i, k)] = x * c + y * s.conj();
                t[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            t[(i, i)] += mu;
        }
    }
    Ok((t, z))
}

/// All eigenpairs of `a`. Eigenvectors are unit-norm.
pub fn eigen(a: &DenseMatrix) -> Result<Vec<EigenPair>> {
    let n = a.n;
    let (t, z) = schur(a, 60)?;
    let tnorm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut den = t[(i, i)] - lambda;
            if den.norm() < f64::EPSILON * tnorm {
                den = Complex64::new(f64::EPSILON * tnorm, 0.0);
            }
            y[i] = -s / den;
        }
        let mut x = z.mul_vec(&y);
        let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in x.iter_mut() {
            *c /= norm;
        }
        pairs.push(EigenPair { value: lambda, vector: x });
    }
    Ok(pairs)
}

/// `‖A v − λ v‖₂`.
pub fn residual(a: &DenseMatrix, pair: &EigenPair) -> f64 {
    a.mul_vec(&pair.vector)
        .iter()
        .zip(&pair.vector)
        .map(|(av, v)| (av - pair.value * v).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
