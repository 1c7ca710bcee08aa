//! Exact state algebra for finite superpositions of product coherent/Fock
//! branches: the representation of every per-amplitude state in the crate.
//!
//! A [`BranchState`] is a list of terms c_i |l_{i,1}> ... |l_{i,k}>, where
//! each label is either a Fock occupation in {0, 1} or a coherent amplitude.
//! All inner products reduce to the closed-form coherent-state overlap
//! <beta|gamma> = exp(-|beta|^2/2 - |gamma|^2/2 + conj(beta) gamma), so the
//! gates (dispersive phase, beam splitter) and conditional measurements act
//! exactly on the labels with no truncation.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Maximum number of superposition terms (every state built here needs <= 4).
pub const MAX_TERMS: usize = 64;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Label of one subsystem within a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchLabel {
    /// Fock occupation, restricted to 0 or 1.
    Fock(u8),
    /// Coherent amplitude.
    Coherent(C64),
}

/// Overlap <bra|ket> between two single-subsystem labels.
pub fn label_overlap(bra: &BranchLabel, ket: &BranchLabel) -> C64 {
    match (bra, ket) {
        (BranchLabel::Fock(n), BranchLabel::Fock(m)) => {
            C64::new(if n == m { 1.0 } else { 0.0 }, 0.0)
        }
        (BranchLabel::Fock(n), BranchLabel::Coherent(g)) => {
            // <n|gamma> = e^{-|gamma|^2/2} gamma^n / sqrt(n!)
            let pre = (-0.5 * g.norm_sqr()).exp();
            match n {
                0 => C64::new(pre, 0.0),
                _ => g * pre,
            }
        }
        (BranchLabel::Coherent(_), BranchLabel::Fock(_)) => label_overlap(ket, bra).conj(),
        (BranchLabel::Coherent(b), BranchLabel::Coherent(g)) => {
            (C64::new(-0.5 * (b.norm_sqr() + g.norm_sqr()), 0.0) + b.conj() * g).exp()
        }
    }
}

/// One term of a branch superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTerm {
    pub coeff: C64,
    pub labels: Vec<BranchLabel>,
}

/// Finite superposition of product branches over a fixed number of
/// subsystems. Immutable value semantics: every operation returns a new
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    subsystems: usize,
    terms: Vec<BranchTerm>,
}

impl BranchState {
    pub fn new(subsystems: usize, terms: Vec<BranchTerm>) -> Result<Self> {
        if terms.len() > MAX_TERMS {
            return Err(Error::InvalidParameter {
                name: "terms",
                value: terms.len() as f64,
                constraint: "at most 64 superposition terms",
            });
        }
        for t in &terms {
            if t.labels.len() != subsystems {
                return Err(Error::SubsystemMismatch {
                    left: subsystems,
                    right: t.labels.len(),
                });
            }
            for l in &t.labels {
                if let BranchLabel::Fock(n) = l {
                    if *n > 1 {
                        return Err(Error::InvalidParameter {
                            name: "fock_n",
                            value: *n as f64,
                            constraint: "fock labels restricted to {0, 1}",
                        });
                    }
                }
            }
        }
        Ok(BranchState { subsystems, terms })
    }

    pub fn num_subsystems(&self) -> usize {
        self.subsystems
    }

    pub fn terms(&self) -> &[BranchTerm] {
        &self.terms
    }

    /// Squared norm via the branch Gram matrix.
    pub fn norm_sqr(&self) -> f64 {
        overlap(self, self).re
    }

    /// Rescale coefficients to unit norm.
    pub fn normalized(&self) -> Result<BranchState> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::InvalidParameter {
                name: "norm",
                value: n2,
                constraint: "positive finite norm required",
            });
        }
        let s = C64::new(1.0 / n2.sqrt(), 0.0);
        let terms = self
            .terms
            .iter()
            .map(|t| BranchTerm {
                coeff: t.coeff * s,
                labels: t.labels.clone(),
            })
            .collect();
        Ok(BranchState {
            subsystems: self.subsystems,
            terms,
        })
    }

    fn expect_fock(&self, subsystem: usize) -> Result<()> {
        for t in &self.terms {
            if let BranchLabel::Coherent(_) = t.labels[subsystem] {
                return Err(Error::LabelKind {
                    index: subsystem,
                    found: "coherent",
                    expected: "fock",
                });
            }
        }
        Ok(())
    }

    fn expect_coherent(&self, subsystem: usize) -> Result<()> {
        for t in &self.terms {
            if let BranchLabel::Fock(_) = t.labels[subsystem] {
                return Err(Error::LabelKind {
                    index: subsystem,
                    found: "fock",
                    expected: "coherent",
                });
            }
        }
        Ok(())
    }
}

/// Inner product <a|b> = sum_ij conj(c^a_i) c^b_j prod_k <l^a_ik|l^b_jk>.
pub fn overlap(a: &BranchState, b: &BranchState) -> C64 {
    assert_eq!(
        a.subsystems, b.subsystems,
        "overlap requires matching subsystem counts"
    );
    let mut acc = C64::new(0.0, 0.0);
    for ta in &a.terms {
        for tb in &b.terms {
            let mut prod = ta.coeff.conj() * tb.coeff;
            for (la, lb) in ta.labels.iter().zip(&tb.labels) {
                prod *= label_overlap(la, lb);
            }
            acc += prod;
        }
    }
    acc
}

/// Checked overlap returning an error on subsystem-count mismatch.
pub fn overlap_checked(a: &BranchState, b: &BranchState) -> Result<C64> {
    if a.subsystems != b.subsystems {
        return Err(Error::SubsystemMismatch {
            left: a.subsystems,
            right: b.subsystems,
        });
    }
    Ok(overlap(a, b))
}

/// The microscopic-macroscopic superposition
/// (1/sqrt 2)(|0, alpha> + |1, alpha e^{i phi}>), exactly normalized for
/// all alpha and phi because the Fock labels are orthogonal.
pub fn make_cat(alpha: C64, phi: f64) -> BranchState {
    let rot = C64::from_polar(1.0, phi);
    BranchState::new(
        2,
        vec![
            BranchTerm {
                coeff: C64::new(SQRT_HALF, 0.0),
                labels: vec![BranchLabel::Fock(0), BranchLabel::Coherent(alpha)],
            },
            BranchTerm {
                coeff: C64::new(SQRT_HALF, 0.0),
                labels: vec![BranchLabel::Fock(1), BranchLabel::Coherent(alpha * rot)],
            },
        ],
    )
    .expect("two-term cat state is always valid")
}

/// Number-conditioned phase gate: branches whose qubit label is 1 get their
/// coherent amplitude multiplied by e^{-i phi}; label-0 branches are
/// untouched. Norm is preserved exactly.
pub fn dispersive_evolve(
    s: &BranchState,
    qubit_subsystem: usize,
    mode_subsystem: usize,
    phi: f64,
) -> Result<BranchState> {
    s.expect_fock(qubit_subsystem)?;
    s.expect_coherent(mode_subsystem)?;
    let rot = C64::from_polar(1.0, -phi);
    let terms = s
        .terms
        .iter()
        .map(|t| {
            let mut labels = t.labels.clone();
            if t.labels[qubit_subsystem] == BranchLabel::Fock(1) {
                if let BranchLabel::Coherent(amp) = labels[mode_subsystem] {
                    labels[mode_subsystem] = BranchLabel::Coherent(amp * rot);
                }
            }
            BranchTerm {
                coeff: t.coeff,
                labels,
            }
        })
        .collect();
    BranchState::new(s.subsystems, terms)
}

/// 50:50 beam splitter on two coherent-labelled modes.
///
/// Convention fixed so that (alpha, 0) -> (alpha/sqrt 2, -alpha/sqrt 2):
/// (beta, gamma) -> ((beta + gamma)/sqrt 2, (gamma - beta)/sqrt 2). This is
/// a rotation in the amplitude plane, so all pairwise branch overlaps are
/// preserved.
pub fn beamsplit(s: &BranchState, mode_a: usize, mode_b: usize) -> Result<BranchState> {
    s.expect_coherent(mode_a)?;
    s.expect_coherent(mode_b)?;
    let terms = s
        .terms
        .iter()
        .map(|t| {
            let mut labels = t.labels.clone();
            if let (BranchLabel::Coherent(b), BranchLabel::Coherent(g)) =
                (t.labels[mode_a], t.labels[mode_b])
            {
                labels[mode_a] = BranchLabel::Coherent((b + g) * SQRT_HALF);
                labels[mode_b] = BranchLabel::Coherent((g - b) * SQRT_HALF);
            }
            BranchTerm {
                coeff: t.coeff,
                labels,
            }
        })
        .collect();
    BranchState::new(s.subsystems, terms)
}

/// Measurement outcome in the {|+>, |->} basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlusMinus {
    Plus,
    Minus,
}

/// Project the Fock-labelled subsystem onto (|0> +/- |1>)/sqrt 2, remove it,
/// and renormalize. Returns the outcome probability and the conditional
/// state of the remaining subsystems.
pub fn measure_plus_minus(
    s: &BranchState,
    subsystem: usize,
    outcome: PlusMinus,
) -> Result<(f64, BranchState)> {
    s.expect_fock(subsystem)?;
    let projected: Vec<BranchTerm> = s
        .terms
        .iter()
        .map(|t| {
            let sign = match (&t.labels[subsystem], outcome) {
                (BranchLabel::Fock(0), _) => 1.0,
                (BranchLabel::Fock(1), PlusMinus::Plus) => 1.0,
                (BranchLabel::Fock(1), PlusMinus::Minus) => -1.0,
                _ => unreachable!("fock labels validated to {{0,1}}"),
            };
            let labels = t
                .labels
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != subsystem)
                .map(|(_, l)| *l)
                .collect();
            BranchTerm {
                coeff: t.coeff * SQRT_HALF * sign,
                labels,
            }
        })
        .collect();
    let cond = BranchState::new(s.subsystems - 1, projected)?;
    let p = cond.norm_sqr();
    if p == 0.0 {
        return Err(Error::ImpossibleOutcome);
    }
    if p < 1e-12 {
        return Err(Error::OutcomeUnderflow { probability: p });
    }
    Ok((p, cond.normalized()?))
}

/// Two-mode entangled coherent state N (|sigma, -sigma> +/- |-sigma, sigma>)
/// with sigma = alpha/sqrt 2, built by composing the cat construction at
/// phi = pi, a {+,-} measurement of the microscopic part, and a 50:50 beam
/// splitter with an ancillary vacuum.
pub fn ecs_state(alpha: C64, sign: PlusMinus) -> Result<BranchState> {
    let cat = make_cat(alpha, std::f64::consts::PI);
    let (_p, cond) = measure_plus_minus(&cat, 0, sign)?;
    // append an ancillary vacuum mode
    let with_vac = BranchState::new(
        2,
        cond.terms()
            .iter()
            .map(|t| {
                let mut labels = t.labels.clone();
                labels.push(BranchLabel::Coherent(C64::new(0.0, 0.0)));
                BranchTerm {
                    coeff: t.coeff,
                    labels,
                }
            })
            .collect(),
    )?;
    let split = beamsplit(&with_vac, 0, 1)?;
    split.normalized()
}
