//! Entangling-power pipeline: resonant exchange (Jaynes-Cummings) kernels,
//! the two-qubit reduced states they induce for each transfer scheme, and
//! thermally averaged entanglement/mixedness curves.
//!
//! Both qubits start in their lower level. Tracing the field modes out of
//! the joint evolution leaves, for each ordered pair of field branches
//! (i, j), a 2x2 "kernel" of qubit outer-product coefficients; the reduced
//! two-qubit state is the coefficient-weighted sum of kernel tensor
//! products. Kernels have closed forms built from the Rabi factors
//! c_n = cos(tau sqrt n), s_n = sin(tau sqrt(n+1)).

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::branches::{dispersive_evolve, make_cat, BranchLabel, BranchState, BranchTerm};
use crate::qmath::{self, CMatrix, TwoQubitDensity};
use crate::thermal::ThermalEnsemble;
use crate::{Error, Result};

/// Hard cap on the Fock truncation of kernel sums.
pub const TRUNCATION_CAP: usize = 100_000;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Fock truncation for amplitudes with mean photon number up to `mu`:
/// max(32, ceil(mu + 10 sqrt(mu) + 16)), keeping the Poisson tail below
/// ~1e-14 of the total.
pub fn truncation_for(mu: f64) -> Result<usize> {
    let required = (mu + 10.0 * mu.sqrt() + 16.0).ceil() as usize;
    let n = required.max(32);
    if n > TRUNCATION_CAP {
        return Err(Error::TruncationOverflow {
            required: n,
            cap: TRUNCATION_CAP,
        });
    }
    Ok(n)
}

/// Qubit outer-product coefficients left after tracing the mode out of a
/// resonant-exchange evolution applied to one ordered branch pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JCKernel {
    entries: [[C64; 2]; 2],
}

impl JCKernel {
    fn new(entries: [[C64; 2]; 2]) -> Self {
        JCKernel { entries }
    }

    pub fn entry(&self, q: usize, qp: usize) -> C64 {
        self.entries[q][qp]
    }

    /// K[0][0] + K[1][1]; equals the branch overlap (1 for equal normalized
    /// branches) for every interaction time.
    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }
}

/// Kernel for a pair of single-photon-or-less Fock branches.
pub fn jc_kernel_fock(n_i: u8, n_j: u8, tau: f64) -> Result<JCKernel> {
    for n in [n_i, n_j] {
        if n > 1 {
            return Err(Error::InvalidParameter {
                name: "fock_n",
                value: n as f64,
                constraint: "fock branch labels restricted to {0, 1}",
            });
        }
    }
    let (ct, st) = (tau.cos(), tau.sin());
    let z = c64(0.0, 0.0);
    let entries = match (n_i, n_j) {
        (0, 0) => [[c64(1.0, 0.0), z], [z, z]],
        (1, 1) => [[c64(ct * ct, 0.0), z], [z, c64(st * st, 0.0)]],
        (0, 1) => [[z, c64(0.0, st)], [z, z]],
        (1, 0) => [[z, z], [c64(0.0, -st), z]],
        _ => unreachable!(),
    };
    Ok(JCKernel::new(entries))
}

/// Rabi-factor tables shared by every kernel evaluated at one interaction
/// time: cc[n] = c_n^2, ss[n] = s_n^2, cs[n] = c_n s_n.
struct TrigTables {
    cc: Vec<f64>,
    ss: Vec<f64>,
    cs: Vec<f64>,
}

impl TrigTables {
    fn build(tau: f64, nmax: usize) -> Self {
        let mut cc = Vec::with_capacity(nmax + 1);
        let mut ss = Vec::with_capacity(nmax + 1);
        let mut cs = Vec::with_capacity(nmax + 1);
        for n in 0..=nmax {
            let c = (tau * (n as f64).sqrt()).cos();
            let s = (tau * ((n + 1) as f64).sqrt()).sin();
            cc.push(c * c);
            ss.push(s * s);
            cs.push(c * s);
        }
        TrigTables { cc, ss, cs }
    }
}

/// n-indexed tables independent of the interaction time.
struct IndexTables {
    ln_n: Vec<f64>,
    inv_sqrt_np1: Vec<f64>,
}

impl IndexTables {
    fn build(nmax: usize) -> Self {
        let mut ln_n = Vec::with_capacity(nmax + 1);
        let mut inv_sqrt_np1 = Vec::with_capacity(nmax + 1);
        for n in 0..=nmax {
            ln_n.push(if n == 0 { 0.0 } else { (n as f64).ln() });
            inv_sqrt_np1.push(1.0 / ((n + 1) as f64).sqrt());
        }
        IndexTables { ln_n, inv_sqrt_np1 }
    }
}

/// Core of the coherent-branch kernel: Poisson-weighted Rabi sums with the
/// branch product sequence u_n = b_n(beta) conj(b_n(gamma)) tracked in log
/// magnitude to survive exp(-(|beta|^2+|gamma|^2)/2) underflow.
fn coherent_kernel_core(
    beta: C64,
    gamma: C64,
    nmax: usize,
    trig: &TrigTables,
    idx: &IndexTables,
) -> JCKernel {
    let z = beta * gamma.conj();
    let zmag2 = z.norm_sqr();
    let (ln_zmag, arg_z) = if zmag2 == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (0.5 * zmag2.ln(), z.arg())
    };
    let peak = zmag2.sqrt();
    let mut ln_mag = -0.5 * (beta.norm_sqr() + gamma.norm_sqr());
    let mut phase = 0.0f64;
    let mut k00 = c64(0.0, 0.0);
    let mut k11 = c64(0.0, 0.0);
    let mut cross = c64(0.0, 0.0);
    for n in 0..=nmax {
        if n > 0 {
            if ln_zmag == f64::NEG_INFINITY {
                break; // u_n = 0 for n >= 1 when either amplitude vanishes
            }
            ln_mag += ln_zmag - idx.ln_n[n];
            phase += arg_z;
            if phase > std::f64::consts::PI {
                phase -= 2.0 * std::f64::consts::PI;
            } else if phase < -std::f64::consts::PI {
                phase += 2.0 * std::f64::consts::PI;
            }
        }
        if ln_mag > -745.0 {
            let u = C64::from_polar(ln_mag.exp(), phase);
            k00 += u * trig.cc[n];
            if n > 0 {
                k11 += u * trig.ss[n - 1];
            }
            cross += u * (trig.cs[n] * idx.inv_sqrt_np1[n]);
        } else if n as f64 > peak {
            break; // magnitudes only decay past the Poisson peak
        }
    }
    let i = c64(0.0, 1.0);
    JCKernel::new([
        [k00, i * gamma.conj() * cross],
        [-i * beta * cross, k11],
    ])
}

/// Kernel for a pair of coherent branches, adaptively truncated.
pub fn jc_kernel_coherent(beta: C64, gamma: C64, tau: f64) -> Result<JCKernel> {
    let mu = beta.norm_sqr().max(gamma.norm_sqr());
    let nmax = truncation_for(mu)?;
    let trig = TrigTables::build(tau, nmax);
    let idx = IndexTables::build(nmax);
    Ok(coherent_kernel_core(beta, gamma, nmax, &trig, &idx))
}

/// Kernel dispatch on the branch-label kinds of one ordered pair.
fn jc_kernel_for(li: &BranchLabel, lj: &BranchLabel, tau: f64) -> Result<JCKernel> {
    match (li, lj) {
        (BranchLabel::Fock(ni), BranchLabel::Fock(nj)) => jc_kernel_fock(*ni, *nj, tau),
        (BranchLabel::Coherent(b), BranchLabel::Coherent(g)) => jc_kernel_coherent(*b, *g, tau),
        _ => Err(Error::LabelKind {
            index: 0,
            found: "mixed",
            expected: "matching label kinds within one subsystem",
        }),
    }
}

/// Passthrough "kernel" for a qubit that never interacts: the branch labels
/// are the qubit's own computational labels.
fn passthrough_kernel(li: &BranchLabel, lj: &BranchLabel) -> Result<JCKernel> {
    let (ni, nj) = match (li, lj) {
        (BranchLabel::Fock(a), BranchLabel::Fock(b)) => (*a as usize, *b as usize),
        _ => {
            return Err(Error::LabelKind {
                index: 0,
                found: "coherent",
                expected: "fock",
            })
        }
    };
    let mut entries = [[c64(0.0, 0.0); 2]; 2];
    entries[ni][nj] = c64(1.0, 0.0);
    Ok(JCKernel::new(entries))
}

/// Assemble the raw (unnormalized) two-qubit matrix
/// sum_ij c_i conj(c_j) K_a(i,j) (x) K_b(i,j) in the |q_a q_b> basis.
fn raw_two_qubit<KA, KB>(state: &BranchState, kernel_a: KA, kernel_b: KB) -> Result<CMatrix>
where
    KA: Fn(&BranchLabel, &BranchLabel) -> Result<JCKernel>,
    KB: Fn(&BranchLabel, &BranchLabel) -> Result<JCKernel>,
{
    if state.num_subsystems() != 2 {
        return Err(Error::SubsystemMismatch {
            left: 2,
            right: state.num_subsystems(),
        });
    }
    let mut rho = CMatrix::zeros(4);
    for ti in state.terms() {
        for tj in state.terms() {
            let w = ti.coeff * tj.coeff.conj();
            let ka = kernel_a(&ti.labels[0], &tj.labels[0])?;
            let kb = kernel_b(&ti.labels[1], &tj.labels[1])?;
            for qa in 0..2 {
                for qap in 0..2 {
                    let wa = w * ka.entry(qa, qap);
                    if wa.norm_sqr() == 0.0 {
                        continue;
                    }
                    for qb in 0..2 {
                        for qbp in 0..2 {
                            rho[(qa * 2 + qb, qap * 2 + qbp)] += wa * kb.entry(qb, qbp);
                        }
                    }
                }
            }
        }
    }
    Ok(rho)
}

/// Two-qubit state transferred from a normalized two-subsystem branch state
/// by independent resonant-exchange interactions of durations `tau_a` (first
/// subsystem) and `tau_b` (second subsystem).
pub fn two_qubit_state(state: &BranchState, tau_a: f64, tau_b: f64) -> Result<TwoQubitDensity> {
    let rho = raw_two_qubit(
        state,
        |li, lj| jc_kernel_for(li, lj, tau_a),
        |li, lj| jc_kernel_for(li, lj, tau_b),
    )?;
    TwoQubitDensity::from_unnormalized(rho)
}

/// Sequential single-cavity scheme: qubit a is first correlated with the
/// macroscopic mode through a number-conditioned phase (branch labels
/// alpha, alpha e^{-i phi}); only qubit b then undergoes the resonant
/// exchange with the mode.
pub fn single_cavity_state(alpha: C64, phi: f64, tau: f64) -> Result<TwoQubitDensity> {
    let plus = BranchState::new(
        2,
        vec![
            BranchTerm {
                coeff: c64(SQRT_HALF, 0.0),
                labels: vec![BranchLabel::Fock(0), BranchLabel::Coherent(alpha)],
            },
            BranchTerm {
                coeff: c64(SQRT_HALF, 0.0),
                labels: vec![BranchLabel::Fock(1), BranchLabel::Coherent(alpha)],
            },
        ],
    )?;
    let entangled = dispersive_evolve(&plus, 0, 1, phi)?;
    let rho = raw_two_qubit(&entangled, |li, lj| passthrough_kernel(li, lj), |li, lj| {
        jc_kernel_for(li, lj, tau)
    })?;
    TwoQubitDensity::from_unnormalized(rho)
}

/// Transfer scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Two cavities, both qubits exchange resonantly with their mode.
    Symmetric,
    /// One cavity: qubit a correlated dispersively, qubit b by exchange.
    SingleCavity,
    /// Entangled-coherent-state input, "+" measurement outcome.
    EcsPlus,
    /// Entangled-coherent-state input, "-" measurement outcome.
    EcsMinus,
}

impl Scheme {
    pub fn parse(name: &str) -> Option<Scheme> {
        match name {
            "symmetric" => Some(Scheme::Symmetric),
            "single_cavity" => Some(Scheme::SingleCavity),
            "ecs_plus" => Some(Scheme::EcsPlus),
            "ecs_minus" => Some(Scheme::EcsMinus),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Symmetric => "symmetric",
            Scheme::SingleCavity => "single_cavity",
            Scheme::EcsPlus => "ecs_plus",
            Scheme::EcsMinus => "ecs_minus",
        }
    }
}

/// Full specification of one transfer experiment.
#[derive(Debug, Clone)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub phi: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub ensemble: ThermalEnsemble,
}

impl SchemeSpec {
    /// `tau_a` and `tau_b` must match except for the single-cavity scheme,
    /// where qubit a never interacts and `tau_a` is ignored.
    pub fn new(
        scheme: Scheme,
        phi: f64,
        tau_a: f64,
        tau_b: f64,
        ensemble: ThermalEnsemble,
    ) -> Result<Self> {
        if scheme != Scheme::SingleCavity && tau_a != tau_b {
            return Err(Error::InvalidParameter {
                name: "tau_a",
                value: tau_a,
                constraint: "tau_a = tau_b required outside the single-cavity scheme",
            });
        }
        Ok(SchemeSpec {
            scheme,
            phi,
            tau_a,
            tau_b,
            ensemble,
        })
    }

    /// The (possibly unnormalized) branch state fed to the transfer at one
    /// ensemble amplitude. For the measurement-conditioned schemes the
    /// squared norm is the outcome probability, which weights the thermal
    /// mixture.
    fn branch_state_at(&self, alpha: C64) -> BranchState {
        match self.scheme {
            Scheme::Symmetric => make_cat(alpha, self.phi),
            Scheme::SingleCavity => {
                let rot = C64::from_polar(1.0, -self.phi);
                BranchState::new(
                    2,
                    vec![
                        BranchTerm {
                            coeff: c64(SQRT_HALF, 0.0),
                            labels: vec![BranchLabel::Fock(0), BranchLabel::Coherent(alpha)],
                        },
                        BranchTerm {
                            coeff: c64(SQRT_HALF, 0.0),
                            labels: vec![BranchLabel::Fock(1), BranchLabel::Coherent(alpha * rot)],
                        },
                    ],
                )
                .expect("two-term state is valid")
            }
            Scheme::EcsPlus | Scheme::EcsMinus => {
                let sigma = alpha * SQRT_HALF;
                let sign = if self.scheme == Scheme::EcsPlus { 0.5 } else { -0.5 };
                BranchState::new(
                    2,
                    vec![
                        BranchTerm {
                            coeff: c64(0.5, 0.0),
                            labels: vec![
                                BranchLabel::Coherent(sigma),
                                BranchLabel::Coherent(-sigma),
                            ],
                        },
                        BranchTerm {
                            coeff: c64(sign, 0.0),
                            labels: vec![
                                BranchLabel::Coherent(-sigma),
                                BranchLabel::Coherent(sigma),
                            ],
                        },
                    ],
                )
                .expect("two-term state is valid")
            }
        }
    }

    /// Largest mean photon number reached by any branch label at `alpha`.
    fn branch_mu(&self, alpha: C64) -> f64 {
        match self.scheme {
            Scheme::EcsPlus | Scheme::EcsMinus => 0.5 * alpha.norm_sqr(),
            _ => alpha.norm_sqr(),
        }
    }
}

/// One entry of an entangling-power curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub tau: f64,
    pub negativity: f64,
    pub linearized_entropy: f64,
}

/// Teleportation usability of a two-qubit channel with linearized entropy
/// `s_l`: usable strictly below 2/3 (the boundary counts as unusable).
pub fn teleportation_usable(s_l: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&s_l) {
        return Err(Error::InvalidParameter {
            name: "s_l",
            value: s_l,
            constraint: "linearized entropy must lie in [0, 1]",
        });
    }
    Ok(s_l < 2.0 / 3.0)
}

/// Effective displacement accumulated by a resonant drive of the given
/// amplitude over the transit time: their product.
pub fn map_drive_to_displacement(drive_amplitude: f64, transit_time: f64) -> Result<f64> {
    for (name, v) in [("drive_amplitude", drive_amplitude), ("transit_time", transit_time)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                constraint: "nonnegative finite value required",
            });
        }
    }
    Ok(drive_amplitude * transit_time)
}

/// Thermally averaged raw two-qubit matrices, one per grid point, at a fixed
/// radial quadrature size. Entries are probability-weight averages of the
/// per-alpha raw matrices; the trace carries the accumulated outcome
/// probability.
///
/// The per-alpha raw matrix is a trigonometric polynomial of degree <= 2 in
/// arg alpha for every scheme (branch coefficients and |<beta|gamma>| factors
/// depend only on |alpha|; only the single creation/annihilation prefactor of
/// each kernel's off-diagonal carries a phase), so the thermal average reduces
/// to the 1-D radial rule: five evenly spaced angular samples per radius,
/// combined with the exact Bessel-weighted angular weight
/// g(theta) = w_0 + 2 w_1 cos theta + 2 w_2 cos 2 theta. Unlike 2-D tensor
/// quadrature this resolves the cos(tau |alpha|) Rabi oscillation across wide
/// ensembles.
fn curve_level(spec: &SchemeSpec, tau_grid: &[f64], radial_nodes: usize) -> Result<Vec<CMatrix>> {
    const ANGLES: usize = 5;
    let ens = &spec.ensemble;
    // assemble the (alpha, weight) node list in a fixed order
    let mut points: Vec<(C64, f64)> = Vec::new();
    if ens.v() == 1.0 {
        points.push((c64(ens.d(), 0.0), 1.0));
    } else {
        let rule = ens.radial_rule(radial_nodes)?;
        for (&r, w) in rule.r.iter().zip(&rule.w) {
            for t in 0..ANGLES {
                let theta = 2.0 * std::f64::consts::PI * t as f64 / ANGLES as f64;
                let g = (w[0] + 2.0 * w[1] * theta.cos() + 2.0 * w[2] * (2.0 * theta).cos())
                    / ANGLES as f64;
                points.push((C64::from_polar(r, theta), g));
            }
        }
    }
    let mu_max = points
        .iter()
        .map(|(a, _)| spec.branch_mu(*a))
        .fold(0.0f64, f64::max);
    let nmax = truncation_for(mu_max)?;
    let idx = IndexTables::build(nmax);

    // each grid point is independent and internally sequential, so the
    // result is identical for every thread count
    tau_grid
        .par_iter()
        .map(|&tau| {
            let (tau_a, tau_b) = match spec.scheme {
                Scheme::SingleCavity => (0.0, tau),
                _ => (tau, tau),
            };
            let trig = TrigTables::build(tau_b, nmax);
            let mut acc = CMatrix::zeros(4);
            for &(alpha, w) in &points {
                let state = spec.branch_state_at(alpha);
                let raw = raw_two_qubit(
                    &state,
                    |li, lj| match spec.scheme {
                        Scheme::SingleCavity => passthrough_kernel(li, lj),
                        _ => match (li, lj) {
                            (BranchLabel::Fock(ni), BranchLabel::Fock(nj)) => {
                                jc_kernel_fock(*ni, *nj, tau_a)
                            }
                            (BranchLabel::Coherent(b), BranchLabel::Coherent(g)) => {
                                Ok(coherent_kernel_core(*b, *g, nmax, &trig, &idx))
                            }
                            _ => Err(Error::LabelKind {
                                index: 0,
                                found: "mixed",
                                expected: "matching label kinds",
                            }),
                        },
                    },
                    |li, lj| match (li, lj) {
                        (BranchLabel::Coherent(b), BranchLabel::Coherent(g)) => {
                            Ok(coherent_kernel_core(*b, *g, nmax, &trig, &idx))
                        }
                        _ => Err(Error::LabelKind {
                            index: 0,
                            found: "fock",
                            expected: "coherent",
                        }),
                    },
                )?;
                acc = acc.add(&raw.scale(c64(w, 0.0)));
            }
            Ok(acc)
        })
        .collect()
}

/// Entangling-power curve: for each interaction time in `tau_grid`, the
/// negativity and linearized entropy of the thermally averaged two-qubit
/// state. Quadrature size doubles until every averaged matrix entry is
/// stable within the ensemble tolerance.
pub fn entangling_power_curve(spec: &SchemeSpec, tau_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "tau_grid",
            value: 0.0,
            constraint: "nonempty ascending grid required",
        });
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "tau_grid",
            value: f64::NAN,
            constraint: "grid must be strictly ascending",
        });
    }

    let normalize = |mats: Vec<CMatrix>| -> Result<Vec<TwoQubitDensity>> {
        mats.into_iter().map(TwoQubitDensity::from_unnormalized).collect()
    };

    // radial node budget: enough to resolve the tau |alpha| Rabi oscillation
    // across the ensemble window, with the configured count as a floor
    let (lo, hi) = spec.ensemble.radial_domain();
    let tau_max = *tau_grid.last().unwrap();
    let base = (4 * spec.ensemble.nodes_per_axis())
        .max((0.75 * (hi - lo) * tau_max).ceil() as usize);
    let schedule = spec.ensemble.radial_schedule(base);
    let tol = spec.ensemble.tolerance();
    let mut prev: Option<Vec<TwoQubitDensity>> = None;
    let mut worst: Option<(f64, f64)> = None; // (tau, change)
    if spec.ensemble.v() == 1.0 {
        let cur = normalize(curve_level(spec, tau_grid, 1)?)?;
        return measure_curve(tau_grid, &cur);
    }
    for (step, &n) in schedule.iter().enumerate() {
        let cur = normalize(curve_level(spec, tau_grid, n)?)?;
        if let Some(p) = &prev {
            let mut max_change = 0.0f64;
            let mut max_tau = tau_grid[0];
            for ((a, b), &tau) in cur.iter().zip(p).zip(tau_grid) {
                let d = a.matrix().max_abs_diff(b.matrix());
                if d > max_change {
                    max_change = d;
                    max_tau = tau;
                }
            }
            if max_change < tol {
                return measure_curve(tau_grid, &cur);
            }
            worst = Some((max_tau, max_change));
        } else if schedule.len() == 1 && step == 0 {
            // already at the node cap: accept the lone estimate
            return measure_curve(tau_grid, &cur);
        }
        prev = Some(cur);
    }
    let (tau, change) = worst.unwrap_or((tau_grid[0], f64::INFINITY));
    Err(Error::CurveNotConverged {
        tau,
        nodes: *schedule.last().unwrap(),
        change,
        tolerance: tol,
    })
}

fn measure_curve(tau_grid: &[f64], states: &[TwoQubitDensity]) -> Result<Vec<CurvePoint>> {
    tau_grid
        .iter()
        .zip(states)
        .map(|(&tau, rho)| {
            Ok(CurvePoint {
                tau,
                negativity: qmath::negativity(rho)?,
                linearized_entropy: qmath::linearized_entropy(rho),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::{ecs_state, PlusMinus};
    use rand::{Rng, SeedableRng};

    #[test]
    fn truncation_policy() {
        assert_eq!(truncation_for(0.0).unwrap(), 32);
        assert_eq!(truncation_for(1.0).unwrap(), 32);
        assert_eq!(truncation_for(100.0).unwrap(), 216);
        assert!(truncation_for(1.0e5 as f64).is_err());
    }

    #[test]
    fn fock_kernel_reference_values() {
        let k = jc_kernel_fock(0, 0, 1.7).unwrap();
        assert_eq!(k.entry(0, 0), c64(1.0, 0.0));
        assert_eq!(k.entry(1, 1), c64(0.0, 0.0));

        let tau = 0.9;
        let k = jc_kernel_fock(1, 1, tau).unwrap();
        assert!((k.entry(0, 0).re - tau.cos().powi(2)).abs() < 1e-15);
        assert!((k.entry(1, 1).re - tau.sin().powi(2)).abs() < 1e-15);
        assert!((k.trace() - c64(1.0, 0.0)).norm() < 1e-15);

        let k = jc_kernel_fock(0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((k.entry(0, 1) - c64(0.0, 1.0)).norm() < 1e-15);
        for (q, qp) in [(0, 0), (1, 0), (1, 1)] {
            assert_eq!(k.entry(q, qp), c64(0.0, 0.0));
        }
        // conjugate-transpose pair symmetry
        let k10 = jc_kernel_fock(1, 0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((k10.entry(1, 0) - k.entry(0, 1).conj()).norm() < 1e-15);

        assert!(jc_kernel_fock(2, 0, 1.0).is_err());
    }

    #[test]
    fn coherent_kernel_trivial_cases() {
        // tau = 0: identity propagator, K[0][0] = <gamma|beta>
        let beta = c64(1.2, 0.4);
        let gamma = c64(-0.3, 0.9);
        let k = jc_kernel_coherent(beta, gamma, 0.0).unwrap();
        let overlap = crate::branches::label_overlap(
            &BranchLabel::Coherent(gamma),
            &BranchLabel::Coherent(beta),
        );
        assert!((k.entry(0, 0) - overlap).norm() < 1e-12);
        for (q, qp) in [(0, 1), (1, 0), (1, 1)] {
            assert!(k.entry(q, qp).norm() < 1e-12);
        }
        // vacuum branches do nothing
        let k = jc_kernel_coherent(c64(0.0, 0.0), c64(0.0, 0.0), 2.3).unwrap();
        assert!((k.entry(0, 0) - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(k.entry(1, 1).norm() < 1e-14);
    }

    #[test]
    fn coherent_kernel_trace_preservation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..40 {
            let beta = c64(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let tau = rng.gen_range(0.0..10.0);
            let k = jc_kernel_coherent(beta, beta, tau).unwrap();
            assert!(
                (k.trace() - c64(1.0, 0.0)).norm() < 1e-10,
                "trace {} at beta {beta} tau {tau}",
                k.trace()
            );
        }
    }

    #[test]
    fn coherent_kernel_large_amplitude_survives_underflow() {
        // e^{-|beta|^2} underflows in plain arithmetic well before 30
        let beta = c64(30.0, 0.0);
        let k = jc_kernel_coherent(beta, beta, 1.0).unwrap();
        assert!((k.trace() - c64(1.0, 0.0)).norm() < 1e-9);
        assert!(k.entry(0, 0).re > 0.0);
    }

    #[test]
    fn coherent_kernel_pair_symmetry() {
        let beta = c64(0.8, -0.5);
        let gamma = c64(1.4, 0.2);
        let tau = 1.3;
        let kij = jc_kernel_coherent(beta, gamma, tau).unwrap();
        let kji = jc_kernel_coherent(gamma, beta, tau).unwrap();
        for q in 0..2 {
            for qp in 0..2 {
                assert!((kij.entry(q, qp) - kji.entry(qp, q).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_qubit_state_trivial() {
        let cat = make_cat(c64(1.0, 0.0), std::f64::consts::PI);
        let rho = two_qubit_state(&cat, 0.0, 0.0).unwrap();
        assert!((rho.entry(0, 0) - c64(1.0, 0.0)).norm() < 1e-12);
        for i in 1..4 {
            assert!(rho.entry(i, i).norm() < 1e-12);
        }
    }

    #[test]
    fn two_qubit_state_is_physical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..15 {
            let alpha = c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let phi = rng.gen_range(0.0..std::f64::consts::PI);
            let tau = rng.gen_range(0.0..6.0);
            let cat = make_cat(alpha, phi);
            let rho = two_qubit_state(&cat, tau, tau).unwrap();
            let eigs = qmath::hermitian_eigenvalues(rho.matrix()).unwrap();
            assert!(eigs[0] >= -1e-10);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cavity_trivial_cases() {
        // tau = 0: qubit b stays |0>, zero negativity
        let rho = single_cavity_state(c64(1.0, 0.0), std::f64::consts::PI, 0.0).unwrap();
        assert!(qmath::negativity(&rho).unwrap() < 1e-12);
        // phi = 0: no correlation ever transferred
        for tau in [0.7, 1.9, 4.2] {
            let rho = single_cavity_state(c64(1.5, 0.0), 0.0, tau).unwrap();
            assert!(qmath::negativity(&rho).unwrap() < 1e-10);
        }
        // phi = pi at finite tau does transfer entanglement
        let rho = single_cavity_state(c64(1.0, 0.0), std::f64::consts::PI, 1.2).unwrap();
        assert!(qmath::negativity(&rho).unwrap() > 0.01);
    }

    #[test]
    fn ecs_branch_state_matches_measured_composition() {
        // the engine's unnormalized conditional state must be the measured
        // ECS scaled by sqrt(outcome probability)
        let ens = ThermalEnsemble::with_defaults(5.0, 1.0).unwrap();
        for (scheme, outcome) in [(Scheme::EcsPlus, PlusMinus::Plus), (Scheme::EcsMinus, PlusMinus::Minus)]
        {
            let spec =
                SchemeSpec::new(scheme, std::f64::consts::PI, 1.0, 1.0, ens.clone()).unwrap();
            for alpha in [c64(0.8, 0.3), c64(-1.5, 0.7)] {
                let raw = spec.branch_state_at(alpha);
                let p_expected = 0.5
                    * (1.0
                        + match outcome {
                            PlusMinus::Plus => (-2.0 * alpha.norm_sqr()).exp(),
                            PlusMinus::Minus => -(-2.0 * alpha.norm_sqr()).exp(),
                        });
                assert!((raw.norm_sqr() - p_expected).abs() < 1e-12);
                let reference = ecs_state(alpha, outcome).unwrap();
                let o = crate::branches::overlap_checked(&raw.normalized().unwrap(), &reference)
                    .unwrap();
                assert!((o.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn teleportation_threshold() {
        assert!(teleportation_usable(0.0).unwrap());
        assert!(!teleportation_usable(1.0).unwrap());
        assert!(!teleportation_usable(2.0 / 3.0).unwrap());
        assert!(teleportation_usable(2.0 / 3.0 - 1e-12).unwrap());
        assert!(teleportation_usable(1.5).is_err());
        assert!(teleportation_usable(-0.1).is_err());
    }

    #[test]
    fn drive_displacement_map() {
        assert_eq!(map_drive_to_displacement(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(map_drive_to_displacement(2.0, 3.5).unwrap(), 7.0);
        assert_eq!(map_drive_to_displacement(1.0, 10.0).unwrap(), 10.0);
        assert!(map_drive_to_displacement(-1.0, 1.0).is_err());
    }

    #[test]
    fn curve_tau_zero_point() {
        // small displacement so tracing the field branches leaves the qubit
        // pair visibly entangled at tau = 1
        let ens = ThermalEnsemble::new(2.0, 0.5, 24, 1e-7).unwrap();
        let spec = SchemeSpec::new(Scheme::Symmetric, std::f64::consts::PI, 0.0, 0.0, ens).unwrap();
        let curve = entangling_power_curve(&spec, &[0.0, 1.0]).unwrap();
        assert!(curve[0].negativity < 1e-12);
        assert!(curve[0].linearized_entropy < 1e-12);
        assert!(curve[1].negativity > 0.01);
    }

    #[test]
    fn curve_point_mass_matches_direct_state() {
        // V = 1 collapses the average onto alpha = d
        let ens = ThermalEnsemble::with_defaults(1.0, 1.3).unwrap();
        let spec = SchemeSpec::new(Scheme::Symmetric, std::f64::consts::PI, 0.0, 0.0, ens).unwrap();
        let grid = [0.5, 1.5];
        let curve = entangling_power_curve(&spec, &grid).unwrap();
        for pt in &curve {
            let rho = two_qubit_state(&make_cat(c64(1.3, 0.0), std::f64::consts::PI), pt.tau, pt.tau)
                .unwrap();
            assert!((pt.negativity - qmath::negativity(&rho).unwrap()).abs() < 1e-12);
            assert!((pt.linearized_entropy - qmath::linearized_entropy(&rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_matches_tensor_quadrature_average() {
        // independent evaluation of the same thermal average with the 2-D
        // Cartesian tensor rule, on a narrow ensemble both engines resolve;
        // the ECS scheme exercises the second-harmonic angular weights
        let ens = ThermalEnsemble::new(3.0, 1.0, 48, 1e-9).unwrap();
        for scheme in [Scheme::Symmetric, Scheme::EcsPlus, Scheme::SingleCavity] {
            let (tau_a, tau_b) = if scheme == Scheme::SingleCavity { (0.0, 1.3) } else { (1.3, 1.3) };
            let spec = SchemeSpec::new(scheme, 2.0, tau_a, tau_b, ens.clone()).unwrap();
            let curve = entangling_power_curve(&spec, &[1.3]).unwrap();
            let avg = ens
                .average_vec(16, |alpha, out| {
                    let state = spec.branch_state_at(alpha);
                    let raw = raw_two_qubit(
                        &state,
                        |li, lj| match scheme {
                            Scheme::SingleCavity => passthrough_kernel(li, lj),
                            _ => jc_kernel_for(li, lj, tau_a),
                        },
                        |li, lj| jc_kernel_for(li, lj, tau_b),
                    )
                    .unwrap();
                    out.copy_from_slice(raw.data());
                })
                .unwrap();
            let rho = TwoQubitDensity::from_unnormalized(CMatrix::from_row_major(4, &avg)).unwrap();
            assert!(
                (curve[0].negativity - qmath::negativity(&rho).unwrap()).abs() < 1e-7,
                "{scheme:?} negativity mismatch"
            );
            assert!(
                (curve[0].linearized_entropy - qmath::linearized_entropy(&rho)).abs() < 1e-7,
                "{scheme:?} entropy mismatch"
            );
        }
    }

    #[test]
    fn curve_phi_sign_invariance() {
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
        let ens = ThermalEnsemble::new(3.0, 1.0, 24, 1e-7).unwrap();
        let plus = SchemeSpec::new(Scheme::Symmetric, 1.1, 0.0, 0.0, ens.clone()).unwrap();
        let minus = SchemeSpec::new(Scheme::Symmetric, -1.1, 0.0, 0.0, ens).unwrap();
        let a = entangling_power_curve(&plus, &grid).unwrap();
        let b = entangling_power_curve(&minus, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.negativity - y.negativity).abs() < 1e-10);
            assert!((x.linearized_entropy - y.linearized_entropy).abs() < 1e-10);
        }
    }

    #[test]
    fn curve_rejects_bad_grids() {
        let ens = ThermalEnsemble::with_defaults(2.0, 1.0).unwrap();
        let spec = SchemeSpec::new(Scheme::Symmetric, 1.0, 0.0, 0.0, ens).unwrap();
        assert!(entangling_power_curve(&spec, &[]).is_err());
        assert!(entangling_power_curve(&spec, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn scheme_spec_validation() {
        let ens = ThermalEnsemble::with_defaults(2.0, 1.0).unwrap();
        assert!(SchemeSpec::new(Scheme::Symmetric, 1.0, 1.0, 2.0, ens.clone()).is_err());
        assert!(SchemeSpec::new(Scheme::SingleCavity, 1.0, 0.0, 2.0, ens).is_ok());
    }

    #[test]
    fn scheme_name_round_trip() {
        for s in [Scheme::Symmetric, Scheme::SingleCavity, Scheme::EcsPlus, Scheme::EcsMinus] {
            assert_eq!(Scheme::parse(s.name()), Some(s));
        }
        assert_eq!(Scheme::parse("bogus"), None);
    }
}
