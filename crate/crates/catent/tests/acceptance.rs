//! Acceptance gate: one test per release criterion, covering closed-form
//! identities, oracle equivalences, curve-level bounds and relational claims,
//! covariance-criterion sanity, and CLI determinism. Run with
//! `cargo test --test acceptance`; the harness prints one pass/fail line per
//! criterion.

use std::collections::HashMap;
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use catent::analytics::{
    cat_covariance, ecs_covariance, mixed_cat_entanglement, pure_cat_entanglement, schmidt_lambdas,
    simon_check, state_moments, CovarianceMatrix, SimonVerdict,
};
use catent::branches::{ecs_state, make_cat, PlusMinus};
use catent::entpower::{
    entangling_power_curve, truncation_for, two_qubit_state, CurvePoint, Scheme, SchemeSpec,
};
use catent::fock::{expand, jc_exact, reduce_to_qubits};
use catent::qmath::{linearized_entropy, negativity, CMatrix, TwoQubitDensity};
use catent::thermal::{ThermalEnsemble, DEFAULT_NODES};

const PI: f64 = std::f64::consts::PI;

fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Shared tau grid for every curve criterion: [0, 10] in steps of 0.05.
fn tau_grid() -> Vec<f64> {
    (0..=200).map(|i| i as f64 * 0.05).collect()
}

/// Curves are expensive (minutes for the hottest ensembles) and several
/// criteria read the same one, so they are computed once and memoized.
fn curve(scheme: Scheme, v: f64, d: f64) -> Vec<CurvePoint> {
    static CACHE: OnceLock<Mutex<HashMap<(&'static str, u64, u64), Vec<CurvePoint>>>> =
        OnceLock::new();
    let key = (scheme.name(), v.to_bits(), d.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return c.clone();
    }
    let t0 = Instant::now();
    let ens = ThermalEnsemble::new(v, d, DEFAULT_NODES, 1e-6).unwrap();
    let spec = SchemeSpec::new(scheme, PI, 0.0, 0.0, ens).unwrap();
    let pts = entangling_power_curve(&spec, &tau_grid()).unwrap();
    println!(
        "curve {} V={v} d={d}: {} points in {:.1} s",
        scheme.name(),
        pts.len(),
        t0.elapsed().as_secs_f64()
    );
    cache.lock().unwrap().insert(key, pts.clone());
    pts
}

fn max_negativity(pts: &[CurvePoint]) -> f64 {
    pts.iter().map(|p| p.negativity).fold(0.0, f64::max)
}

#[test]
fn criterion_01_closed_form_matches_schmidt_identity() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let a = 0.1 + (3.0 - 0.1) * i as f64 / 19.0;
            let phi = PI * j as f64 / 19.0;
            let alpha = c64(a, 0.0);
            let pair = schmidt_lambdas(alpha, phi);
            let closed = pure_cat_entanglement(alpha, phi);
            let schmidt = 2.0 * (pair.lambda_minus() * pair.lambda_plus()).sqrt();
            worst = worst.max((closed - schmidt).abs());
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("criterion 01: worst |closed - 2 sqrt(l- l+)| = {worst:.3e} in {dt:.3} s");
    assert!(worst <= 1e-14, "identity broken: worst deviation {worst:.3e}");
    assert!(dt < 1.0, "runtime budget exceeded: {dt:.3} s >= 1 s");
}

#[test]
fn criterion_02_pure_entanglement_spot_value() {
    let got = pure_cat_entanglement(c64(1.0, 0.0), PI);
    let want = (1.0 - (-4.0f64).exp()).sqrt();
    println!("criterion 02: E(|alpha|=1, phi=pi) = {got:.15} (expected {want:.15})");
    assert!((got - want).abs() <= 1e-12);
}

#[test]
fn criterion_03_mixed_entanglement_grows_with_variance() {
    let t0 = Instant::now();
    let ent = |v: f64| {
        let ens = ThermalEnsemble::with_defaults(v, 1.0).unwrap();
        mixed_cat_entanglement(&ens, PI / 2.0).unwrap()
    };
    let (e2, e5, e10) = (ent(2.0), ent(5.0), ent(10.0));
    let dt = t0.elapsed().as_secs_f64();
    println!("criterion 03: E(V=2)={e2:.4} E(V=5)={e5:.4} E(V=10)={e10:.4} in {dt:.2} s");
    assert!(e10 > e5 && e5 > e2 && e2 > 0.05, "ordering violated");
    assert!(dt < 10.0, "runtime budget exceeded: {dt:.2} s >= 10 s");
}

#[test]
fn criterion_04_saturation_nearly_temperature_independent() {
    let t0 = Instant::now();
    let vs = [2.0, 5.0, 10.0];
    let ents: Vec<ThermalEnsemble> = vs
        .iter()
        .map(|&v| ThermalEnsemble::with_defaults(v, 7.0).unwrap())
        .collect();
    let mut max_gap = 0.0f64;
    let mut at_pi = [0.0f64; 3];
    for j in 0..=100 {
        let phi = PI * j as f64 / 100.0;
        let es: Vec<f64> = ents
            .iter()
            .map(|e| mixed_cat_entanglement(e, phi).unwrap())
            .collect();
        let hi = es.iter().cloned().fold(f64::MIN, f64::max);
        let lo = es.iter().cloned().fold(f64::MAX, f64::min);
        max_gap = max_gap.max(hi - lo);
        if j == 100 {
            at_pi.copy_from_slice(&es);
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "criterion 04: E(phi=pi) = {at_pi:?}, max pairwise gap = {max_gap:.4} in {dt:.2} s"
    );
    for (&v, &e) in vs.iter().zip(&at_pi) {
        assert!(e >= 0.95, "E at phi=pi for V={v} is {e:.4} < 0.95");
    }
    assert!(max_gap < 0.02, "pairwise curve gap {max_gap:.4} >= 0.02");
    assert!(dt < 10.0, "runtime budget exceeded: {dt:.2} s >= 10 s");
}

#[test]
fn criterion_05_transfer_matrix_matches_fock_oracle() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for aa in [0.5, 1.0, 2.0] {
        let alpha = c64(aa, 0.0);
        let trunc = truncation_for(aa * aa).unwrap();
        for phi in [PI / 2.0, PI] {
            let cat = make_cat(alpha, phi);
            for tau in [0.5, 1.0, 2.0, 5.0] {
                let fast = two_qubit_state(&cat, tau, tau).unwrap();
                let mut v = expand(&cat, trunc).unwrap().append_qubit().append_qubit();
                v = jc_exact(&v, 0, 2, tau).unwrap();
                v = jc_exact(&v, 1, 3, tau).unwrap();
                let oracle = reduce_to_qubits(&v).unwrap();
                worst = worst.max(fast.matrix().max_abs_diff(oracle.matrix()));
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("criterion 05: worst entrywise gap vs Fock oracle = {worst:.3e} in {dt:.2} s");
    assert!(worst <= 1e-10, "oracle disagreement {worst:.3e} > 1e-10");
    assert!(dt < 30.0, "runtime budget exceeded: {dt:.2} s >= 30 s");
}

#[test]
fn criterion_06_hot_displaced_transfer_peak_bounds() {
    let t0 = Instant::now();
    let m = max_negativity(&curve(Scheme::Symmetric, 100.0, 20.0));
    println!(
        "criterion 06: max negativity (V=100, d=20) = {m:.6} in {:.1} s",
        t0.elapsed().as_secs_f64()
    );
    assert!(m <= 0.47, "max negativity {m:.4} > 0.47");
    assert!(m >= 0.2, "max negativity {m:.4} < 0.2");
}

#[test]
fn criterion_07_hotter_ensemble_transfers_less() {
    let hot = max_negativity(&curve(Scheme::Symmetric, 100.0, 20.0));
    let warm = max_negativity(&curve(Scheme::Symmetric, 10.0, 7.0));
    println!("criterion 07: max (V=100, d=20) = {hot:.6}, max (V=10, d=7) = {warm:.6}");
    assert!(hot < warm, "expected strict ordering, got {hot:.4} vs {warm:.4}");
}

#[test]
fn criterion_08_larger_displacement_transfers_more() {
    let d10 = max_negativity(&curve(Scheme::Symmetric, 10.0, 10.0));
    let d7 = max_negativity(&curve(Scheme::Symmetric, 10.0, 7.0));
    println!("criterion 08: max (d=10) = {d10:.6}, max (d=7) = {d7:.6} at V=10");
    assert!(d10 > d7, "expected strict ordering, got {d10:.4} vs {d7:.4}");
}

#[test]
fn criterion_09_channel_usable_for_teleportation() {
    let pts = curve(Scheme::Symmetric, 100.0, 20.0);
    let pt = pts
        .iter()
        .find(|p| (p.tau - 8.0).abs() < 1e-9)
        .expect("tau = 8 lies on the grid");
    println!(
        "criterion 09: S_l(tau=8, V=100, d=20) = {:.6} (threshold 2/3)",
        pt.linearized_entropy
    );
    assert!(
        pt.linearized_entropy < 2.0 / 3.0,
        "S_l = {:.4} not below 2/3",
        pt.linearized_entropy
    );
}

#[test]
fn criterion_10_single_cavity_transfers_less_but_nonzero() {
    for d in [7.0, 10.0] {
        let single = curve(Scheme::SingleCavity, 10.0, d);
        let sym = curve(Scheme::Symmetric, 10.0, d);
        let m_single = max_negativity(&single);
        let m_sym = max_negativity(&sym);
        println!("criterion 10: d={d}: single max = {m_single:.6}, symmetric max = {m_sym:.6}");
        assert!(
            m_single <= m_sym,
            "single-cavity max {m_single:.4} exceeds symmetric max {m_sym:.4} at d={d}"
        );
        let nonzero = single
            .iter()
            .any(|p| p.tau > 0.0 && p.negativity > 1e-12);
        assert!(nonzero, "no nonzero negativity on tau in (0, 10] at d={d}");
    }
}

#[test]
fn criterion_11_ecs_covariance_matches_moment_oracle() {
    for v in [2.0, 5.0, 10.0] {
        let ens = ThermalEnsemble::new(v, 0.0, 32, 1e-9).unwrap();
        // trace-weighted average of the "+"-outcome second moments; the
        // squared outcome amplitude p+(alpha) weights each ensemble member
        let avg = ens
            .average_vec(17, |alpha, out| {
                let st = ecs_state(alpha, PlusMinus::Plus).unwrap();
                let p = 0.5 * (1.0 + (-2.0 * alpha.norm_sqr()).exp());
                let m = state_moments(&st).unwrap();
                out[0] = c64(p, 0.0);
                for i in 0..4 {
                    for j in 0..4 {
                        out[1 + 4 * i + j] = c64(p * m.second[i][j], 0.0);
                    }
                }
            })
            .unwrap();
        let w = avg[0].re;
        let sec = |i: usize, j: usize| avg[1 + 4 * i + j].re / w;
        let oracle = CovarianceMatrix::new(
            [[sec(0, 0), sec(0, 1)], [sec(1, 0), sec(1, 1)]],
            [[sec(2, 2), sec(2, 3)], [sec(3, 2), sec(3, 3)]],
            [[sec(0, 2), sec(0, 3)], [sec(1, 2), sec(1, 3)]],
            true,
        )
        .unwrap();
        let closed = ecs_covariance(v).unwrap();
        let gap = closed.max_abs_diff(&oracle);
        let verdict = simon_check(&closed).unwrap();
        println!("criterion 11: V={v}: closed-form vs moment oracle gap = {gap:.3e}, {verdict:?}");
        assert!(gap <= 1e-6, "covariance mismatch {gap:.3e} > 1e-6 at V={v}");
        assert_eq!(verdict, SimonVerdict::NoViolation);
    }
}

#[test]
fn criterion_12_ecs_transfer_peak_height() {
    let t0 = Instant::now();
    let m = max_negativity(&curve(Scheme::EcsPlus, 50.0, 5.0));
    println!(
        "criterion 12: max negativity (ecs_plus, V=50, d=5) = {m:.6} in {:.1} s",
        t0.elapsed().as_secs_f64()
    );
    assert!(
        (0.5..=0.7).contains(&m),
        "max negativity {m:.4} outside [0.5, 0.7]"
    );
}

#[test]
fn criterion_13_simon_test_sanity() {
    // two-mode squeezed vacuum, r = 1: maximally correlated Gaussian state
    let (ch, sh) = (2.0f64.cosh(), 2.0f64.sinh());
    let tmsv = CovarianceMatrix::new(
        [[ch, 0.0], [0.0, ch]],
        [[ch, 0.0], [0.0, ch]],
        [[sh, 0.0], [0.0, -sh]],
        true,
    )
    .unwrap();
    assert_eq!(simon_check(&tmsv).unwrap(), SimonVerdict::EntangledDetected);

    // products of rotated squeezed thermal single-mode states are separable
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mode_block = |rng: &mut ChaCha8Rng| -> [[f64; 2]; 2] {
        let nu = 1.0 + 2.0 * rng.gen::<f64>();
        let r: f64 = rng.gen::<f64>();
        let th = PI * rng.gen::<f64>();
        let (c, s) = (th.cos(), th.sin());
        let (e, f) = (nu * (2.0 * r).exp(), nu * (-2.0 * r).exp());
        [
            [c * c * e + s * s * f, c * s * (e - f)],
            [c * s * (e - f), s * s * e + c * c * f],
        ]
    };
    for k in 0..100 {
        let cov = CovarianceMatrix::new(
            mode_block(&mut rng),
            mode_block(&mut rng),
            [[0.0, 0.0], [0.0, 0.0]],
            true,
        )
        .unwrap();
        assert_eq!(
            simon_check(&cov).unwrap(),
            SimonVerdict::NoViolation,
            "separable sample {k} flagged"
        );
    }

    // the Gaussian test is blind to the cat state's non-Gaussian correlations
    for aa in [0.5, 1.0, 2.0] {
        let cov = cat_covariance(c64(aa, 0.0), PI, true);
        assert_eq!(simon_check(&cov).unwrap(), SimonVerdict::NoViolation);
    }
    println!("criterion 13: TMSV detected; 100 separable and 3 cat covariances pass clean");
}

#[test]
fn criterion_14_measure_sanity() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = c64(0.0, 0.0);
    let bell = TwoQubitDensity::from_pure([c64(s, 0.0), zero, zero, c64(s, 0.0)]).unwrap();
    let n_bell = negativity(&bell).unwrap();
    assert!((n_bell - 1.0).abs() <= 1e-10, "negativity(Bell) = {n_bell}");
    assert!(linearized_entropy(&bell).abs() <= 1e-10);

    let p = 2.0 / 3.0;
    let werner = TwoQubitDensity::new(
        bell.matrix()
            .scale(c64(p, 0.0))
            .add(&CMatrix::identity(4).scale(c64((1.0 - p) / 4.0, 0.0))),
    )
    .unwrap();
    let n_werner = negativity(&werner).unwrap();
    assert!(
        (n_werner - 0.5).abs() <= 1e-10,
        "negativity(Werner p=2/3) = {n_werner}"
    );

    let maximally_mixed = TwoQubitDensity::new(CMatrix::identity(4).scale(c64(0.25, 0.0))).unwrap();
    let s_l = linearized_entropy(&maximally_mixed);
    assert!((s_l - 1.0).abs() <= 1e-10, "S_l(I/4) = {s_l}");
    println!("criterion 14: Bell, Werner, pure and maximally mixed benchmarks exact");
}

#[test]
fn criterion_15_cli_output_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_catent");
    let cfg = std::env::temp_dir().join("catent_acceptance_sweep.cfg");
    std::fs::write(&cfg, "quantity = mixed_ent\nv = 2,5\nd = 1\nphi = 1.0,2.0\n").unwrap();
    let cfg = cfg.to_str().unwrap().to_string();

    let run = |args: &[&str], threads: &str| -> Vec<u8> {
        let out = Command::new(bin)
            .args(args)
            .args(["--threads", threads])
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty(), "command {args:?} produced no CSV");
        out.stdout
    };

    let commands: Vec<Vec<&str>> = vec![
        vec!["pure-ent", "--alpha-abs", "1"],
        vec!["fig2", "--V", "2,5", "--d", "1"],
        vec![
            "entpower", "--V", "2", "--d", "0.5", "--tau-max", "2", "--tau-step", "0.25",
        ],
        vec!["simon", "--target", "tmsv", "--r", "1"],
        vec!["ecs-cov", "--V", "5"],
        vec!["sweep", "--config", &cfg],
    ];
    for args in &commands {
        let a = run(args, "1");
        let b = run(args, "1");
        let c = run(args, "2");
        assert_eq!(a, b, "repeat runs differ for {args:?}");
        assert_eq!(a, c, "thread counts differ for {args:?}");
    }
    println!("criterion 15: {} commands byte-identical across runs and thread counts", commands.len());
}
