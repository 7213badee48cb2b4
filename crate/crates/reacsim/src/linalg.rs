//! Small dense complex linear algebra: the Hermitian eigensolver, matrix
//! exponentials of Hermitian generators, and a few helpers shared by the
//! dynamics, circuit and control modules. Everything here targets the desk
//! scale of this crate (dimension <= 64), so the eigensolver is a cyclic
//! Jacobi iteration and matrix products are plain dense products.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = Array2<C64>;
pub type Vector = Array1<C64>;

/// Identity matrix of dimension `n`.
pub fn identity(n: usize) -> Mat {
    Array2::eye(n)
}

/// Conjugate transpose.
pub fn adjoint(m: &Mat) -> Mat {
    m.t().mapv(|z| z.conj())
}

/// Max absolute entry of `a - b`.
pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-entry deviation of `u` from unitarity, ||u^dag u - I||_max.
pub fn unitarity_deviation(u: &Mat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&adjoint(u).dot(u), &identity(n))
}

/// Max-entry deviation from Hermiticity.
pub fn hermiticity_deviation(m: &Mat) -> f64 {
    max_abs_diff(m, &adjoint(m))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues ascending; `vectors` holds the eigenvectors as columns, each
/// with its largest-magnitude entry made real positive so the output is
/// deterministic.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl HermitianEigen {
    /// Cyclic Jacobi iteration. Converges quadratically; dimensions here are
    /// tiny so no pivoting strategy is needed. Works on flat buffers to keep
    /// the hot GRAPE loop cheap.
    pub fn new(m: &Mat) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "square matrix required");
        let mut a: Vec<C64> = m.iter().copied().collect();
        let mut v: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            v[i * n + i] = C64::new(1.0, 0.0);
        }
        let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        let tol = 1e-15 * scale;
        let ix = |i: usize, j: usize| i * n + j;

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[ix(p, q)].norm());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[ix(p, q)];
                    let apq_norm = apq.norm();
                    if apq_norm <= tol * 1e-2 {
                        continue;
                    }
                    let app = a[ix(p, p)].re;
                    let aqq = a[ix(q, q)].re;
                    let phase = apq / apq_norm;
                    let tau = (aqq - app) / (2.0 * apq_norm);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // u = diag(1, e^{-i phi}) * givens(c, s) acting on (p, q)
                    let upp = C64::new(c, 0.0);
                    let upq = C64::new(s, 0.0);
                    let uqp = -s * phase.conj();
                    let uqq = c * phase.conj();

                    // columns: a <- a u, v <- v u
                    for i in 0..n {
                        let x = a[ix(i, p)];
                        let y = a[ix(i, q)];
                        a[ix(i, p)] = x * upp + y * uqp;
                        a[ix(i, q)] = x * upq + y * uqq;
                        let xv = v[ix(i, p)];
                        let yv = v[ix(i, q)];
                        v[ix(i, p)] = xv * upp + yv * uqp;
                        v[ix(i, q)] = xv * upq + yv * uqq;
                    }
                    // rows: a <- u^dag a
                    for j in 0..n {
                        let x = a[ix(p, j)];
                        let y = a[ix(q, j)];
                        a[ix(p, j)] = upp.conj() * x + uqp.conj() * y;
                        a[ix(q, j)] = upq.conj() * x + uqq.conj() * y;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a[ix(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));

        let mut values = Vec::with_capacity(n);
        let mut vectors = Mat::zeros((n, n));
        for (col, &src) in order.iter().enumerate() {
            values.push(diag[src]);
            let mut best = 0usize;
            let mut best_norm = 0.0f64;
            for i in 0..n {
                let nm = v[ix(i, src)].norm();
                if nm > best_norm + 1e-15 {
                    best_norm = nm;
                    best = i;
                }
            }
            let ph = v[ix(best, src)] / best_norm;
            for i in 0..n {
                vectors[(i, col)] = v[ix(i, src)] * ph.conj();
            }
        }
        HermitianEigen { values, vectors }
    }

    /// e^{-i tau H} from this decomposition.
    pub fn exp_factor(&self, tau: f64) -> Mat {
        let n = self.values.len();
        let phases: Vec<C64> = self
            .values
            .iter()
            .map(|&lam| C64::from_polar(1.0, -lam * tau))
            .collect();
        let mut out = Mat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (k, ph) in phases.iter().enumerate() {
                    acc += self.vectors[(i, k)] * ph * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// e^{-i tau H} for Hermitian `h`.
pub fn expm_i_hermitian(h: &Mat, tau: f64) -> Mat {
    HermitianEigen::new(h).exp_factor(tau)
}

/// Kronecker product.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Mat::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Squared-norm of a state vector.
pub fn norm_sqr(v: &Vector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Inner product <a|b>.
pub fn inner(a: &Vector, b: &Vector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Outer product |a><b|.
pub fn outer(a: &Vector, b: &Vector) -> Mat {
    let n = a.len();
    let mut m = Mat::zeros((n, b.len()));
    for i in 0..n {
        for j in 0..b.len() {
            m[(i, j)] = a[i] * b[j].conj();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        let mut m = Mat::zeros((n, n));
        for i in 0..n {
            m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[2usize, 3, 5, 8, 16] {
            let m = random_hermitian(n, &mut rng);
            let eig = HermitianEigen::new(&m);
            let lam = Mat::from_diag(&Array1::from_iter(
                eig.values.iter().map(|&x| C64::new(x, 0.0)),
            ));
            let rec = eig.vectors.dot(&lam).dot(&adjoint(&eig.vectors));
            assert!(max_abs_diff(&rec, &m) < 1e-12, "n={n}");
            assert!(unitarity_deviation(&eig.vectors) < 1e-12);
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1] + 1e-14);
            }
        }
    }

    #[test]
    fn jacobi_matches_nalgebra_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_hermitian(8, &mut rng);
            let eig = HermitianEigen::new(&m);
            let na = nalgebra::DMatrix::from_fn(8, 8, |i, j| m[(i, j)]);
            let mut oracle: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
            oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in eig.values.iter().zip(oracle.iter()) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn exp_factor_is_unitary_and_matches_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(6, &mut rng);
        let tau = 0.37;
        let u = expm_i_hermitian(&h, tau);
        assert!(unitarity_deviation(&u) < 1e-12);
        // Taylor series oracle at small tau
        let tau_small = 1e-3;
        let us = expm_i_hermitian(&h, tau_small);
        let mut series = identity(6);
        let mut term = identity(6);
        for k in 1..=8 {
            term = term.dot(&h.mapv(|z| z * C64::new(0.0, -tau_small) / C64::new(k as f64, 0.0)));
            series += &term;
        }
        assert!(max_abs_diff(&us, &series) < 1e-14);
    }

    #[test]
    fn kron_dimensions_and_values() {
        let a = Mat::from_shape_vec(
            (2, 2),
            vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let b = identity(2);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[(3, 3)], C64::new(2.0, 0.0));
        assert_eq!(k[(1, 1)], C64::new(1.0, 0.0));
    }
}
