//! Brute-force truncated-Fock reference implementation.
//!
//! Dense tensor representation of branch states, exact resonant-exchange
//! evolution and partial traces. This module exists to certify the closed
//! forms elsewhere in the crate: it is exponentially heavier than the
//! production paths and is only exercised by test code.

use num_complex::Complex64 as C64;

use crate::analytics::{CovarianceMatrix, Moments};
use crate::branches::{BranchLabel, BranchState};
use crate::qmath::{CMatrix, TwoQubitDensity};
use crate::{Error, Result};

/// Dimension given to subsystems that only ever carry Fock labels {0, 1}
/// (headroom for one exchange excitation plus ladder-operator probes).
const FOCK_LABEL_DIM: usize = 4;

/// Probability a state preparation may leak past the truncation.
const LEAK_LIMIT: f64 = 1e-8;

/// Dense state vector over a tensor product of truncated bosonic modes,
/// with optional qubits appended as trailing dimension-2 subsystems.
#[derive(Debug, Clone)]
pub struct FockVector {
    dims: Vec<usize>,
    qubit_count: usize,
    amps: Vec<C64>,
}

impl FockVector {
    /// Stride of subsystem `k` in the row-major amplitude layout.
    fn stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().product()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Append a qubit in its lower level as the new fastest-varying
    /// subsystem.
    pub fn append_qubit(&self) -> FockVector {
        let mut dims = self.dims.clone();
        dims.push(2);
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len() * 2];
        for (i, a) in self.amps.iter().enumerate() {
            amps[2 * i] = *a;
        }
        FockVector {
            dims,
            qubit_count: self.qubit_count + 1,
            amps,
        }
    }
}

/// Expand a branch state into a dense truncated-Fock vector.
///
/// Subsystems that carry only Fock labels get a small fixed dimension;
/// coherent-labelled subsystems get `truncation` levels. The expansion is
/// rejected if it loses more than 1e-8 of the exact squared norm.
pub fn expand(state: &BranchState, truncation: usize) -> Result<FockVector> {
    if truncation < 2 {
        return Err(Error::InvalidParameter {
            name: "truncation",
            value: truncation as f64,
            constraint: "at least 2 Fock levels required",
        });
    }
    let n_sub = state.num_subsystems();
    let mut dims = Vec::with_capacity(n_sub);
    for k in 0..n_sub {
        let all_fock = state
            .terms()
            .iter()
            .all(|t| matches!(t.labels[k], BranchLabel::Fock(_)));
        dims.push(if all_fock { FOCK_LABEL_DIM } else { truncation });
    }
    let total: usize = dims.iter().product();
    let mut amps = vec![C64::new(0.0, 0.0); total];
    // per-subsystem coefficient columns for one term
    for term in state.terms() {
        let cols: Vec<Vec<C64>> = term
            .labels
            .iter()
            .zip(&dims)
            .map(|(l, &dim)| match l {
                BranchLabel::Fock(n) => {
                    let mut v = vec![C64::new(0.0, 0.0); dim];
                    v[*n as usize] = C64::new(1.0, 0.0);
                    v
                }
                BranchLabel::Coherent(g) => {
                    let mut v = Vec::with_capacity(dim);
                    let mut b = C64::new((-0.5 * g.norm_sqr()).exp(), 0.0);
                    for n in 0..dim {
                        if n > 0 {
                            b *= g / (n as f64).sqrt();
                        }
                        v.push(b);
                    }
                    v
                }
            })
            .collect();
        // accumulate the outer product of the columns
        let mut idx = vec![0usize; n_sub];
        for (flat, amp) in amps.iter_mut().enumerate() {
            let _ = flat;
            let mut prod = term.coeff;
            for (k, &i) in idx.iter().enumerate() {
                prod *= cols[k][i];
            }
            *amp += prod;
            // row-major increment
            for k in (0..n_sub).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    let v = FockVector {
        dims,
        qubit_count: 0,
        amps,
    };
    let leak = (state.norm_sqr() - v.norm_sqr()).abs();
    if leak > LEAK_LIMIT {
        return Err(Error::TruncationLeak {
            truncation,
            leak,
            limit: LEAK_LIMIT,
        });
    }
    Ok(v)
}

/// Exact resonant-exchange propagator between a bosonic subsystem and a
/// qubit subsystem, applied as 2x2 rotations within each excitation
/// manifold {|q=0, n>, |q=1, n-1>} with Rabi angle tau sqrt(n).
///
/// The edge manifold that truncation cuts in half is left untouched
/// (identity), so the map is exactly norm-preserving.
pub fn jc_exact(v: &FockVector, mode: usize, qubit: usize, tau: f64) -> Result<FockVector> {
    let n_sub = v.dims.len();
    let first_qubit = n_sub - v.qubit_count;
    if mode >= first_qubit || qubit < first_qubit || qubit >= n_sub {
        return Err(Error::InvalidParameter {
            name: "subsystem",
            value: mode as f64,
            constraint: "mode must index a bosonic subsystem and qubit a qubit",
        });
    }
    let mode_dim = v.dims[mode];
    let mode_stride = v.stride(mode);
    let qubit_stride = v.stride(qubit);
    let mut out = v.clone();
    let total = v.amps.len();
    for base in 0..total {
        // visit each manifold once, from its (q=0, n) member
        let q = (base / qubit_stride) % 2;
        if q != 0 {
            continue;
        }
        let n = (base / mode_stride) % mode_dim;
        if n == 0 {
            continue;
        }
        let partner = base - mode_stride + qubit_stride; // (q=1, n-1)
        let angle = tau * (n as f64).sqrt();
        let (c, s) = (angle.cos(), angle.sin());
        let a = v.amps[base];
        let b = v.amps[partner];
        out.amps[base] = a * c - C64::new(0.0, s) * b;
        out.amps[partner] = b * c - C64::new(0.0, s) * a;
    }
    Ok(out)
}

/// Trace out every bosonic subsystem, leaving the two-qubit density matrix
/// in the |q_a q_b> basis (a = first appended qubit).
pub fn reduce_to_qubits(v: &FockVector) -> Result<TwoQubitDensity> {
    if v.qubit_count != 2 {
        return Err(Error::SubsystemMismatch {
            left: 2,
            right: v.qubit_count,
        });
    }
    // qubits are appended last, so amplitudes come in contiguous blocks of 4
    let mut rho = CMatrix::zeros(4);
    for block in v.amps.chunks_exact(4) {
        for r in 0..4 {
            for c in 0..4 {
                rho[(r, c)] += block[r] * block[c].conj();
            }
        }
    }
    TwoQubitDensity::from_unnormalized(rho)
}

/// Apply the annihilation operator on one subsystem.
fn apply_annihilation(v: &FockVector, sub: usize) -> FockVector {
    let dim = v.dims[sub];
    let stride = v.stride(sub);
    let mut out = v.clone();
    for a in out.amps.iter_mut() {
        *a = C64::new(0.0, 0.0);
    }
    for (i, amp) in v.amps.iter().enumerate() {
        let n = (i / stride) % dim;
        if n > 0 {
            out.amps[i - stride] += amp * (n as f64).sqrt();
        }
    }
    out
}

/// Apply the creation operator on one subsystem; amplitude on the top level
/// is dropped (kept negligible by the truncation policy).
fn apply_creation(v: &FockVector, sub: usize) -> FockVector {
    let dim = v.dims[sub];
    let stride = v.stride(sub);
    let mut out = v.clone();
    for a in out.amps.iter_mut() {
        *a = C64::new(0.0, 0.0);
    }
    for (i, amp) in v.amps.iter().enumerate() {
        let n = (i / stride) % dim;
        if n + 1 < dim {
            out.amps[i + stride] += amp * ((n + 1) as f64).sqrt();
        }
    }
    out
}

fn inner(a: &FockVector, b: &FockVector) -> C64 {
    a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Quadrature moments of two designated bosonic subsystems, computed by
/// applying x = a + a^dag and p = -i(a - a^dag) to the vector:
/// <{X_mu, X_nu}>/2 = Re <X_mu v, X_nu v>, vacuum-normalized.
pub fn moments(v: &FockVector, mode_a: usize, mode_b: usize) -> Result<Moments> {
    let first_qubit = v.dims.len() - v.qubit_count;
    for m in [mode_a, mode_b] {
        if m >= first_qubit {
            return Err(Error::InvalidParameter {
                name: "mode",
                value: m as f64,
                constraint: "moments require bosonic subsystems",
            });
        }
    }
    let norm2 = v.norm_sqr();
    let quad = |sub: usize| -> (FockVector, FockVector) {
        let av = apply_annihilation(v, sub);
        let cv = apply_creation(v, sub);
        let mut xv = av.clone();
        let mut pv = av;
        for i in 0..xv.amps.len() {
            let (lo, hi) = (xv.amps[i], cv.amps[i]);
            xv.amps[i] = lo + hi;
            pv.amps[i] = C64::new(0.0, -1.0) * (lo - hi);
        }
        (xv, pv)
    };
    let (xa, pa) = quad(mode_a);
    let (xb, pb) = quad(mode_b);
    let ops = [xa, pa, xb, pb];
    let mut mean = [0.0; 4];
    let mut second = [[0.0; 4]; 4];
    for (i, op) in ops.iter().enumerate() {
        mean[i] = inner(v, op).re / norm2;
    }
    for i in 0..4 {
        for j in i..4 {
            second[i][j] = inner(&ops[i], &ops[j]).re / norm2;
            second[j][i] = second[i][j];
        }
    }
    Ok(Moments { mean, second })
}

/// Covariance matrix of two bosonic subsystems in centered or raw form.
pub fn covariance(
    v: &FockVector,
    mode_a: usize,
    mode_b: usize,
    centered: bool,
) -> Result<CovarianceMatrix> {
    let mom = moments(v, mode_a, mode_b)?;
    let m = if centered {
        mom.centered_second()
    } else {
        mom.second
    };
    let pick =
        |r0: usize, c0: usize| [[m[r0][c0], m[r0][c0 + 1]], [m[r0 + 1][c0], m[r0 + 1][c0 + 1]]];
    CovarianceMatrix::new(pick(0, 0), pick(2, 2), pick(0, 2), centered)
}
