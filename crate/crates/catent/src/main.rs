//! Command-line frontend: figure-style tabulations, covariance tests and
//! generic parameter sweeps, emitted as deterministic CSV.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use catent::analytics::{
    cat_covariance, ecs_covariance, mixed_cat_entanglement, pure_cat_entanglement, simon_check,
    CovarianceMatrix, SimonVerdict,
};
use catent::entpower::{
    entangling_power_curve, teleportation_usable, Scheme, SchemeSpec,
};
use catent::sweep::{format_value, grid, Config, SweepResult};
use catent::thermal::ThermalEnsemble;
use catent::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Default convergence tolerance for thermally averaged quantities.
const DEFAULT_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "catent",
    version,
    about = "Entanglement analytics for thermal mixtures of cat-like states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (0 = machine parallelism)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the pure-state entanglement against the interaction phase
    PureEnt {
        /// Branch amplitude modulus |alpha|
        #[arg(long, default_value_t = 1.0)]
        alpha_abs: f64,
        #[arg(long, default_value_t = 0.0)]
        phi_min: f64,
        #[arg(long, default_value_t = PI)]
        phi_max: f64,
        #[arg(long, default_value_t = PI / 200.0)]
        phi_step: f64,
    },
    /// Thermal-mixture entanglement against phase, one column per variance
    Fig2 {
        /// Variance parameters, comma-separated
        #[arg(long = "V", value_delimiter = ',', default_value = "2,5,10")]
        v_list: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 0.0)]
        phi_min: f64,
        #[arg(long, default_value_t = PI)]
        phi_max: f64,
        #[arg(long, default_value_t = PI / 100.0)]
        phi_step: f64,
        #[arg(long, default_value_t = catent::thermal::DEFAULT_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Entangling-power curve: negativity and mixedness against interaction
    /// time
    Entpower {
        /// symmetric | single_cavity | ecs_plus | ecs_minus
        #[arg(long, default_value = "symmetric")]
        scheme: String,
        #[arg(long = "V", default_value_t = 10.0)]
        v: f64,
        #[arg(long, default_value_t = 7.0)]
        d: f64,
        #[arg(long, default_value_t = PI)]
        phi: f64,
        #[arg(long, default_value_t = 0.0)]
        tau_min: f64,
        #[arg(long, default_value_t = 10.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.05)]
        tau_step: f64,
        #[arg(long, default_value_t = catent::thermal::DEFAULT_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Simon separability test on a chosen covariance matrix
    Simon {
        /// cat | ecs | tmsv | file
        #[arg(long, default_value = "cat")]
        target: String,
        #[arg(long, default_value_t = 1.0)]
        alpha_abs: f64,
        #[arg(long, default_value_t = PI)]
        phi: f64,
        #[arg(long = "V", default_value_t = 5.0)]
        v: f64,
        /// Squeezing parameter for the tmsv target
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// 4x4 centered covariance matrix, 16 whitespace-separated numbers
        #[arg(long)]
        cov_file: Option<PathBuf>,
    },
    /// Closed-form covariance of the thermally averaged entangled coherent
    /// state
    EcsCov {
        #[arg(long = "V", default_value_t = 5.0)]
        v: f64,
    },
    /// Cartesian-product parameter sweep driven by a config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    eprintln!("# wall_time_s = {:.3}", started.elapsed().as_secs_f64());
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        // ignore the error if a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let result = match &cli.command {
        Command::PureEnt {
            alpha_abs,
            phi_min,
            phi_max,
            phi_step,
        } => cmd_pure_ent(*alpha_abs, *phi_min, *phi_max, *phi_step)?,
        Command::Fig2 {
            v_list,
            d,
            phi_min,
            phi_max,
            phi_step,
            nodes,
            tol,
        } => cmd_fig2(v_list, *d, *phi_min, *phi_max, *phi_step, *nodes, *tol)?,
        Command::Entpower {
            scheme,
            v,
            d,
            phi,
            tau_min,
            tau_max,
            tau_step,
            nodes,
            tol,
        } => cmd_entpower(scheme, *v, *d, *phi, *tau_min, *tau_max, *tau_step, *nodes, *tol)?,
        Command::Simon {
            target,
            alpha_abs,
            phi,
            v,
            r,
            cov_file,
        } => cmd_simon(target, *alpha_abs, *phi, *v, *r, cov_file.as_deref())?,
        Command::EcsCov { v } => cmd_ecs_cov(*v)?,
        Command::Sweep { config } => cmd_sweep(config)?,
    };
    emit(cli, &result)
}

fn emit(cli: &Cli, result: &SweepResult) -> Result<()> {
    let text = result.to_csv();
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    let mut out = vec![("version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    out.extend(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())));
    out
}

/// Compact parameter rendering for metadata and column names.
fn fmt_param(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format_value(v)
    }
}

fn cmd_pure_ent(alpha_abs: f64, phi_min: f64, phi_max: f64, phi_step: f64) -> Result<SweepResult> {
    let phis = grid(phi_min, phi_max, phi_step)?;
    let rows = phis
        .iter()
        .map(|&phi| vec![phi, pure_cat_entanglement(C64::new(alpha_abs, 0.0), phi)])
        .collect();
    SweepResult::new(
        vec!["phi".into(), "entanglement".into()],
        rows,
        meta(&[
            ("command", "pure-ent".into()),
            ("alpha_abs", fmt_param(alpha_abs)),
        ]),
    )
}

fn cmd_fig2(
    v_list: &[f64],
    d: f64,
    phi_min: f64,
    phi_max: f64,
    phi_step: f64,
    nodes: usize,
    tol: f64,
) -> Result<SweepResult> {
    let phis = grid(phi_min, phi_max, phi_step)?;
    let ensembles: Vec<ThermalEnsemble> = v_list
        .iter()
        .map(|&v| ThermalEnsemble::new(v, d, nodes, tol))
        .collect::<Result<_>>()?;
    let rows: Vec<Result<Vec<f64>>> = phis
        .par_iter()
        .map(|&phi| {
            let mut row = vec![phi];
            for ens in &ensembles {
                row.push(mixed_cat_entanglement(ens, phi)?);
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut header = vec!["phi".to_string()];
    header.extend(v_list.iter().map(|&v| format!("ent_V{}", fmt_param(v))));
    SweepResult::new(
        header,
        rows,
        meta(&[
            ("command", "fig2".into()),
            ("V", v_list.iter().map(|&v| fmt_param(v)).collect::<Vec<_>>().join(",")),
            ("d", fmt_param(d)),
            ("nodes", nodes.to_string()),
            ("tol", format_value(tol)),
        ]),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_entpower(
    scheme_name: &str,
    v: f64,
    d: f64,
    phi: f64,
    tau_min: f64,
    tau_max: f64,
    tau_step: f64,
    nodes: usize,
    tol: f64,
) -> Result<SweepResult> {
    let scheme = Scheme::parse(scheme_name).ok_or(Error::InvalidParameter {
        name: "scheme",
        value: f64::NAN,
        constraint: "one of symmetric, single_cavity, ecs_plus, ecs_minus",
    })?;
    let ens = ThermalEnsemble::new(v, d, nodes, tol)?;
    let spec = SchemeSpec::new(scheme, phi, 0.0, 0.0, ens)?;
    let taus = grid(tau_min, tau_max, tau_step)?;
    let curve = entangling_power_curve(&spec, &taus)?;
    let rows = curve
        .iter()
        .map(|p| {
            Ok(vec![
                p.tau,
                p.negativity,
                p.linearized_entropy,
                if teleportation_usable(p.linearized_entropy)? { 1.0 } else { 0.0 },
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(
        vec![
            "tau".into(),
            "negativity".into(),
            "linearized_entropy".into(),
            "usable".into(),
        ],
        rows,
        meta(&[
            ("command", "entpower".into()),
            ("scheme", scheme.name().into()),
            ("V", fmt_param(v)),
            ("d", fmt_param(d)),
            ("phi", format_value(phi)),
            ("nodes", nodes.to_string()),
            ("tol", format_value(tol)),
        ]),
    )
}

fn verdict_name(v: SimonVerdict) -> &'static str {
    match v {
        SimonVerdict::NoViolation => "no-violation",
        SimonVerdict::EntangledDetected => "entangled-detected",
        SimonVerdict::InvalidState => "invalid-state",
    }
}

fn covariance_rows(cov: &CovarianceMatrix) -> Vec<Vec<f64>> {
    cov.full().iter().map(|r| r.to_vec()).collect()
}

fn cmd_simon(
    target: &str,
    alpha_abs: f64,
    phi: f64,
    v: f64,
    r: f64,
    cov_file: Option<&std::path::Path>,
) -> Result<SweepResult> {
    let (cov, params): (CovarianceMatrix, Vec<(&str, String)>) = match target {
        "cat" => (
            cat_covariance(C64::new(alpha_abs, 0.0), phi, true),
            vec![("alpha_abs", fmt_param(alpha_abs)), ("phi", format_value(phi))],
        ),
        "ecs" => (ecs_covariance(v)?, vec![("V", fmt_param(v))]),
        "tmsv" => {
            let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            (
                CovarianceMatrix::new(
                    [[ch, 0.0], [0.0, ch]],
                    [[ch, 0.0], [0.0, ch]],
                    [[sh, 0.0], [0.0, -sh]],
                    true,
                )?,
                vec![("r", format_value(r))],
            )
        }
        "file" => {
            let path = cov_file.ok_or(Error::InvalidParameter {
                name: "cov_file",
                value: f64::NAN,
                constraint: "--cov-file required for the file target",
            })?;
            (read_covariance_file(path)?, vec![("file", path.display().to_string())])
        }
        _ => {
            return Err(Error::InvalidParameter {
                name: "target",
                value: f64::NAN,
                constraint: "one of cat, ecs, tmsv, file",
            })
        }
    };
    let verdict = simon_check(&cov)?;
    let mut pairs = vec![("command", "simon".to_string()), ("target", target.to_string())];
    pairs.extend(params);
    pairs.push(("verdict", verdict_name(verdict).to_string()));
    SweepResult::new(
        vec!["x1".into(), "p1".into(), "x2".into(), "p2".into()],
        covariance_rows(&cov),
        meta(&pairs),
    )
}

fn read_covariance_file(path: &std::path::Path) -> Result<CovarianceMatrix> {
    let text = std::fs::read_to_string(path)?;
    let vals: std::result::Result<Vec<f64>, _> =
        text.split_whitespace().map(|s| s.parse::<f64>()).collect();
    let vals = vals.map_err(|e| Error::Config {
        path: path.display().to_string(),
        line: 0,
        message: format!("bad covariance entry: {e}"),
    })?;
    if vals.len() != 16 {
        return Err(Error::Config {
            path: path.display().to_string(),
            line: 0,
            message: format!("expected 16 entries, found {}", vals.len()),
        });
    }
    let at = |i: usize, j: usize| vals[4 * i + j];
    let sym = |i: usize, j: usize| 0.5 * (at(i, j) + at(j, i));
    CovarianceMatrix::new(
        [[at(0, 0), sym(0, 1)], [sym(0, 1), at(1, 1)]],
        [[at(2, 2), sym(2, 3)], [sym(2, 3), at(3, 3)]],
        [[sym(0, 2), sym(0, 3)], [sym(1, 2), sym(1, 3)]],
        true,
    )
}

fn cmd_ecs_cov(v: f64) -> Result<SweepResult> {
    let cov = ecs_covariance(v)?;
    SweepResult::new(
        vec!["x1".into(), "p1".into(), "x2".into(), "p2".into()],
        covariance_rows(&cov),
        meta(&[("command", "ecs-cov".into()), ("V", fmt_param(v))]),
    )
}

fn cmd_sweep(path: &std::path::Path) -> Result<SweepResult> {
    let cfg = Config::load(path)?;
    let quantity = cfg.require_str("quantity")?.to_string();
    match quantity.as_str() {
        "mixed_ent" => sweep_mixed_ent(&cfg),
        "entpower_max" => sweep_entpower_max(&cfg),
        other => Err(Error::Config {
            path: path.display().to_string(),
            line: 0,
            message: format!("unknown quantity `{other}` (mixed_ent | entpower_max)"),
        }),
    }
}

fn sweep_mixed_ent(cfg: &Config) -> Result<SweepResult> {
    cfg.reject_unknown(&["quantity", "v", "d", "phi", "nodes", "tol"])?;
    let vs = cfg.require_f64_list("v")?;
    let ds = cfg.require_f64_list("d")?;
    let phis = cfg.require_f64_list("phi")?;
    let nodes = cfg
        .get_f64("nodes")?
        .map(|n| n as usize)
        .unwrap_or(catent::thermal::DEFAULT_NODES);
    let tol = cfg.get_f64("tol")?.unwrap_or(DEFAULT_TOL);
    // lexicographic point order over (v, d, phi)
    let mut points = Vec::new();
    for &v in &vs {
        for &d in &ds {
            for &phi in &phis {
                points.push((v, d, phi));
            }
        }
    }
    let rows: Vec<Result<Vec<f64>>> = points
        .par_iter()
        .map(|&(v, d, phi)| {
            let ens = ThermalEnsemble::new(v, d, nodes, tol)?;
            Ok(vec![v, d, phi, mixed_cat_entanglement(&ens, phi)?])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    SweepResult::new(
        vec!["v".into(), "d".into(), "phi".into(), "entanglement".into()],
        rows,
        meta(&[
            ("command", "sweep".into()),
            ("quantity", "mixed_ent".into()),
            ("nodes", nodes.to_string()),
            ("tol", format_value(tol)),
        ]),
    )
}

fn sweep_entpower_max(cfg: &Config) -> Result<SweepResult> {
    cfg.reject_unknown(&[
        "quantity", "scheme", "v", "d", "phi", "tau_min", "tau_max", "tau_step", "nodes", "tol",
    ])?;
    let scheme_name = cfg.get_str("scheme").unwrap_or("symmetric").to_string();
    let scheme = Scheme::parse(&scheme_name).ok_or(Error::InvalidParameter {
        name: "scheme",
        value: f64::NAN,
        constraint: "one of symmetric, single_cavity, ecs_plus, ecs_minus",
    })?;
    let vs = cfg.require_f64_list("v")?;
    let ds = cfg.require_f64_list("d")?;
    let phis = cfg.require_f64_list("phi")?;
    let taus = grid(
        cfg.get_f64("tau_min")?.unwrap_or(0.0),
        cfg.get_f64("tau_max")?.unwrap_or(10.0),
        cfg.get_f64("tau_step")?.unwrap_or(0.05),
    )?;
    let nodes = cfg
        .get_f64("nodes")?
        .map(|n| n as usize)
        .unwrap_or(catent::thermal::DEFAULT_NODES);
    let tol = cfg.get_f64("tol")?.unwrap_or(DEFAULT_TOL);
    let mut points = Vec::new();
    for &v in &vs {
        for &d in &ds {
            for &phi in &phis {
                points.push((v, d, phi));
            }
        }
    }
    let rows: Vec<Result<Vec<f64>>> = points
        .iter()
        .map(|&(v, d, phi)| {
            let ens = ThermalEnsemble::new(v, d, nodes, tol)?;
            let spec = SchemeSpec::new(scheme, phi, 0.0, 0.0, ens)?;
            let curve = entangling_power_curve(&spec, &taus)?;
            let best = curve
                .iter()
                .cloned()
                .max_by(|a, b| a.negativity.total_cmp(&b.negativity))
                .expect("grid is nonempty");
            Ok(vec![
                v,
                d,
                phi,
                best.negativity,
                best.linearized_entropy,
                if teleportation_usable(best.linearized_entropy)? { 1.0 } else { 0.0 },
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    SweepResult::new(
        vec![
            "v".into(),
            "d".into(),
            "phi".into(),
            "max_negativity".into(),
            "linearized_entropy".into(),
            "usable".into(),
        ],
        rows,
        meta(&[
            ("command", "sweep".into()),
            ("quantity", "entpower_max".into()),
            ("scheme", scheme.name().into()),
            ("nodes", nodes.to_string()),
            ("tol", format_value(tol)),
        ]),
    )
}
