//! Small dense complex linear algebra and the two scalar measures
//! (negativity, linearized entropy) used everywhere downstream.
//!
//! Eigenvalues of Hermitian matrices are computed by a deterministic cyclic
//! Jacobi iteration on the real symmetric embedding, so repeated runs give
//! bit-identical results regardless of threading.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Tolerance below which a matrix is accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues in [-EIG_CLAMP, 0) are treated as zero by `negativity`.
const EIG_CLAMP: f64 = 1e-12;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice; panics if the length is not `dim*dim`.
    pub fn from_row_major(dim: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data length mismatch");
        CMatrix {
            dim,
            data: data.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (n, m) = (self.dim, other.dim);
        let mut out = CMatrix::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// max_ij |M_ij - conj(M_ji)|
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// M <- (M + M^dag)/2, absorbing quadrature round-off.
    pub fn hermitized(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)].conj());
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        let d = self.dim;
        &mut self.data[i * d + j]
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order. `a` is row-major and is consumed.
///
/// Deterministic: fixed sweep order, fixed convergence threshold.
pub(crate) fn jacobi_eigenvalues_symmetric(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // smaller-angle root of t^2 + 2 t theta - 1 = 0
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Ascending eigenvalues of a Hermitian matrix (dim <= 16).
///
/// The input is symmetrized when its Hermitian deviation is within
/// [`HERMITICITY_TOL`]; a larger deviation is rejected. The complex problem
/// is embedded as the real symmetric matrix [[Re, -Im], [Im, Re]], whose
/// spectrum is that of the input with every eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n > 16 {
        return Err(Error::WrongDimension { expected: 16, got: n });
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            deviation: dev,
            tolerance: HERMITICITY_TOL,
        });
    }
    let h = m.hermitized();
    let mut emb = vec![0.0f64; (2 * n) * (2 * n)];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            emb[i * 2 * n + j] = z.re;
            emb[(i + n) * 2 * n + (j + n)] = z.re;
            emb[i * 2 * n + (j + n)] = -z.im;
            emb[(i + n) * 2 * n + j] = z.im;
        }
    }
    let doubled = jacobi_eigenvalues_symmetric(emb, 2 * n);
    // eigenvalues come in coincident pairs; average each pair
    let eig = (0..n)
        .map(|i| 0.5 * (doubled[2 * i] + doubled[2 * i + 1]))
        .collect();
    Ok(eig)
}

/// Which qubit of a two-qubit state an operation acts on.
///
/// Basis order is fixed throughout the crate as |00>, |01>, |10>, |11>,
/// first qubit's bit most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// 4x4 complex Hermitian, trace-1, positive semidefinite matrix in the
/// fixed |00>, |01>, |10>, |11> basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    mat: CMatrix,
}

impl TwoQubitDensity {
    /// Validate and wrap a 4x4 matrix. The stored matrix is symmetrized.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.dim() != 4 {
            return Err(Error::WrongDimension {
                expected: 4,
                got: mat.dim(),
            });
        }
        let dev = mat.hermitian_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: HERMITICITY_TOL,
            });
        }
        let mat = mat.hermitized();
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > HERMITICITY_TOL || tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("trace = {} + {}i, expected 1", tr.re, tr.im),
            });
        }
        let eig = hermitian_eigenvalues(&mat)?;
        if eig[0] < -1e-10 {
            return Err(Error::InvalidDensity {
                reason: format!("min eigenvalue {} < -1e-10", eig[0]),
            });
        }
        Ok(TwoQubitDensity { mat })
    }

    /// Hermitize and trace-normalize raw averaged entries, then validate.
    pub fn from_unnormalized(mat: CMatrix) -> Result<Self> {
        if mat.dim() != 4 {
            return Err(Error::WrongDimension {
                expected: 4,
                got: mat.dim(),
            });
        }
        let h = mat.hermitized();
        let tr = h.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidDensity {
                reason: format!("nonpositive trace {tr}"),
            });
        }
        Self::new(h.scale(C64::new(1.0 / tr, 0.0)))
    }

    /// Pure-state projector |psi><psi| from four amplitudes.
    pub fn from_pure(amps: [C64; 4]) -> Result<Self> {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let mut m = CMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = amps[i] * amps[j].conj() / norm2;
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }
}

/// Transpose the indices of one qubit only.
///
/// Applying the operation twice returns the input exactly.
pub fn partial_transpose(rho: &TwoQubitDensity, subsystem: Subsystem) -> CMatrix {
    let m = rho.matrix();
    let mut out = CMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for ap in 0..2 {
                for bp in 0..2 {
                    let (r, c) = (a * 2 + b, ap * 2 + bp);
                    let (rt, ct) = match subsystem {
                        Subsystem::First => (ap * 2 + b, a * 2 + bp),
                        Subsystem::Second => (a * 2 + bp, ap * 2 + b),
                    };
                    out[(rt, ct)] = m[(r, c)];
                }
            }
        }
    }
    out
}

/// NPT entanglement measure max{0, -2 lambda_min(PT(rho))}.
///
/// 0 for separable two-qubit states, 1 for maximally entangled pure states.
/// Eigenvalues in [-1e-12, 0) are clamped to zero so quadrature round-off
/// cannot produce spurious entanglement.
pub fn negativity(rho: &TwoQubitDensity) -> Result<f64> {
    let pt = partial_transpose(rho, Subsystem::Second);
    let eig = hermitian_eigenvalues(&pt)?;
    let mut lam_min = eig[0];
    if lam_min >= -EIG_CLAMP {
        lam_min = lam_min.max(0.0);
    }
    Ok((-2.0 * lam_min).max(0.0))
}

/// Linearized entropy S_l = (4/3) [1 - Tr(rho^2)].
///
/// 0 for pure states, 1 for the maximally mixed state; the output is
/// clamped to [0, 1] against round-off at the 1e-12 level.
pub fn linearized_entropy(rho: &TwoQubitDensity) -> f64 {
    let m = rho.matrix();
    let purity: f64 = (0..4)
        .map(|i| (0..4).map(|j| (m[(i, j)] * m[(j, i)]).re).sum::<f64>())
        .sum();
    let sl = (4.0 / 3.0) * (1.0 - purity);
    sl.clamp(0.0, 1.0)
}
