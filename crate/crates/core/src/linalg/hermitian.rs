use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance on `a[j][l] - conj(a[l][j])`, scaled by `max(1, max|a|)`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Square complex matrix with Hermitian symmetry, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    order: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(order: usize, entries: Vec<Complex64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Order("matrix order must be positive".into()));
        }
        if entries.len() != order * order {
            return Err(Error::LengthMismatch {
                left: entries.len(),
                right: order * order,
            });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for j in 0..order {
            for l in j..order {
                let deviation = (entries[j * order + l] - entries[l * order + j].conj()).norm();
                if !(deviation <= HERMITIAN_TOLERANCE * scale) {
                    return Err(Error::NotHermitian {
                        row: j,
                        col: l,
                        deviation,
                    });
                }
            }
        }
        Ok(Self { order, entries })
    }

    /// Fills the upper triangle from `f(row, col)` and mirrors it, so the
    /// result is exactly Hermitian with a real diagonal.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); order * order];
        for j in 0..order {
            entries[j * order + j] = Complex64::new(f(j, j).re, 0.0);
            for l in j + 1..order {
                let v = f(j, l);
                entries[j * order + l] = v;
                entries[l * order + j] = v.conj();
            }
        }
        Self { order, entries }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |j, l| {
            if j == l {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.order + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|j| self.get(j, j).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.order)
            .map(|j| (0..self.order).map(|l| self.get(j, l) * v[l]).sum())
            .collect()
    }
}

/// Eigenvalues sorted in descending order with their orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the unit eigenvector paired with `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation that annihilates
/// it. Sweeps stop once the off-diagonal Frobenius norm falls below
/// `order * eps * ||A||_F`; the sweep budget is `30 * order^2`.
pub fn eigh(matrix: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = matrix.order();
    let mut a = matrix.entries().to_vec();
    let mut v = HermitianMatrix::identity(n).entries;
    let norm = matrix.frobenius_norm();
    let tolerance = n as f64 * f64::EPSILON * norm;
    let negligible = 1e-18 * norm;
    let budget = 30 * n * n;

    let mut converged = norm == 0.0;
    for _ in 0..budget {
        if converged || off_diagonal_norm(&a, n) <= tolerance {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let pivot = a[p * n + q];
                let magnitude = pivot.norm();
                if magnitude <= negligible {
                    continue;
                }
                let phase = pivot / magnitude;
                let alpha = a[p * n + p].re;
                let beta = a[q * n + q].re;
                let zeta = (beta - alpha) / (2.0 * magnitude);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let rotation = Rotation {
                    pp: Complex64::new(c, 0.0),
                    pq: Complex64::new(s, 0.0),
                    qp: -s * phase.conj(),
                    qq: c * phase.conj(),
                };
                rotation.apply_columns(&mut a, n, p, q);
                rotation.apply_rows(&mut a, n, p, q);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                rotation.apply_columns(&mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > tolerance {
        return Err(Error::NonConvergence {
            what: "Jacobi eigensolver",
            budget,
        });
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|j| (a[j * n + j].re, (0..n).map(|i| v[i * n + j]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

struct Rotation {
    pp: Complex64,
    pq: Complex64,
    qp: Complex64,
    qq: Complex64,
}

impl Rotation {
    /// `A <- A U` on columns p and q.
    fn apply_columns(&self, a: &mut [Complex64], n: usize, p: usize, q: usize) {
        for k in 0..n {
            let kp = a[k * n + p];
            let kq = a[k * n + q];
            a[k * n + p] = kp * self.pp + kq * self.qp;
            a[k * n + q] = kp * self.pq + kq * self.qq;
        }
    }

    /// `A <- U^H A` on rows p and q.
    fn apply_rows(&self, a: &mut [Complex64], n: usize, p: usize, q: usize) {
        for k in 0..n {
            let pk = a[p * n + k];
            let qk = a[q * n + k];
            a[p * n + k] = self.pp.conj() * pk + self.qp.conj() * qk;
            a[q * n + k] = self.pq.conj() * pk + self.qq.conj() * qk;
        }
    }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut sum = 0.0;
    for j in 0..n {
        for l in 0..n {
            if j != l {
                sum += a[j * n + l].norm_sqr();
            }
        }
    }
    sum.sqrt()
}
