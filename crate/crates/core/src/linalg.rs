//! Small dense linear algebra: eigendecomposition of real symmetric
//! tridiagonal matrices and unitary stepping with the resulting spectrum.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

const MAX_SWEEPS: usize = 64;

/// Real symmetric tridiagonal matrix stored as its diagonal and first
/// super-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Row-major dense copy.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = self.diag[i];
        }
        for (i, &o) in self.off.iter().enumerate() {
            m[i * n + i + 1] = o;
            m[(i + 1) * n + i] = o;
        }
        m
    }

    /// `<u|M|v>` for real vectors.
    pub fn bilinear(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut mv = v[i] * self.diag[i];
            if i > 0 {
                mv += v[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                mv += v[i + 1] * self.off[i];
            }
            acc += u[i].conj() * mv;
        }
        acc
    }
}

/// Eigenvalues and orthonormal eigenvectors. `vectors` is eigenvector-major:
/// component `k` of eigenvector `j` lives at `vectors[j * n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[j * n..(j + 1) * n]
    }

    /// Reorder so eigenvalues ascend.
    pub fn sort_ascending(&mut self) {
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        let values = order.iter().map(|&j| self.values[j]).collect();
        let mut vectors = Vec::with_capacity(n * n);
        for &j in &order {
            vectors.extend_from_slice(self.vector(j));
        }
        self.values = values;
        self.vectors = vectors;
    }

    /// `psi <- V exp(-i E t) V^T psi`.
    pub fn evolve(&self, psi: &mut [Complex64], t: f64, scratch: &mut Vec<Complex64>) {
        let n = self.dim();
        scratch.clear();
        for j in 0..n {
            let v = self.vector(j);
            let mut c = Complex64::new(0.0, 0.0);
            for k in 0..n {
                c += psi[k] * v[k];
            }
            let (s, co) = (self.values[j] * t).sin_cos();
            scratch.push(c * Complex64::new(co, -s));
        }
        for p in psi.iter_mut() {
            *p = Complex64::new(0.0, 0.0);
        }
        for (j, &c) in scratch.iter().enumerate() {
            for (p, &v) in psi.iter_mut().zip(self.vector(j)) {
                *p += c * v;
            }
        }
    }
}

/// Reusable implicit-QL solver for symmetric tridiagonal matrices.
#[derive(Debug, Clone)]
pub struct TridiagonalSolver {
    d: Vec<f64>,
    e: Vec<f64>,
    z: Vec<f64>,
}

impl TridiagonalSolver {
    pub fn new(n: usize) -> Self {
        Self {
            d: vec![0.0; n],
            e: vec![0.0; n],
            z: vec![0.0; n * n],
        }
    }

    /// Diagonalize `m`, writing the (unsorted) spectrum into `out`.
    pub fn solve_into(&mut self, m: &SymTridiagonal, out: &mut SymmetricEigen) {
        let n = m.dim();
        if self.d.len() != n {
            *self = Self::new(n);
        }
        self.d.copy_from_slice(&m.diag);
        self.e[..n - 1].copy_from_slice(&m.off);
        self.e[n - 1] = 0.0;
        self.z.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..n {
            self.z[j * n + j] = 1.0;
        }
        implicit_ql(&mut self.d, &mut self.e, &mut self.z, n);
        out.values.clear();
        out.values.extend_from_slice(&self.d);
        out.vectors.clear();
        out.vectors.extend_from_slice(&self.z);
    }

    pub fn solve(&mut self, m: &SymTridiagonal) -> SymmetricEigen {
        let mut out = SymmetricEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        };
        self.solve_into(m, &mut out);
        out
    }
}

/// Sorted eigendecomposition of a symmetric tridiagonal matrix.
pub fn eigh_tridiagonal(m: &SymTridiagonal) -> SymmetricEigen {
    let mut eig = TridiagonalSolver::new(m.dim()).solve(m);
    eig.sort_ascending();
    eig
}

fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) {
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            // Wilkinson-shifted QL converges in a handful of sweeps for well-scaled input.
            assert!(iter <= MAX_SWEEPS, "implicit QL failed to converge");

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..];
                let zi1 = &mut hi[..n];
                for k in 0..n {
                    let f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Real symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a22: f64,
    pub a12: f64,
}

impl Sym2 {
    pub const fn new(a11: f64, a22: f64, a12: f64) -> Self {
        Self { a11, a22, a12 }
    }

    /// Apply `exp(-i H t)` to a two-component amplitude vector.
    pub fn evolve(&self, c: &mut [Complex64; 2], t: f64) {
        let mean = 0.5 * (self.a11 + self.a22);
        let half = 0.5 * (self.a11 - self.a22);
        let r = half.hypot(self.a12);
        let (s, co) = (r * t).sin_cos();
        // sin(r t) / r, finite as r -> 0
        let sinc = if r * t.abs() < 1e-8 { t } else { s / r };
        let phase = Complex64::new((mean * t).cos(), -(mean * t).sin());
        let i = Complex64::new(0.0, 1.0);
        let c0 = c[0] * (co - i * sinc * half) - i * sinc * self.a12 * c[1];
        let c1 = c[1] * (co + i * sinc * half) - i * sinc * self.a12 * c[0];
        c[0] = c0 * phase;
        c[1] = c1 * phase;
    }
}
