//! Command-line front end: file I/O, command routing, machine-readable
//! certificate output, and a reproducibility seed.
//!
//! Exit codes: 0 = computed and every asserted identity held; 1 = computed
//! but a certificate is inconclusive; 2 = a theorem identity was violated
//! (a defect flag); 64 = usage or parse error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gramkit_core::sampling::DEFAULT_SEED;
use gramkit_core::{
    approx_dual, gram, inversion, io, schatten, selftest, stability, Error, FrameSystem,
    TolerancePolicy,
};
use serde_json::json;

const EXIT_OK: u8 = 0;
const EXIT_INCONCLUSIVE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "gramkit",
    about = "Cross Gram matrices of finite frame systems: construction, duals, pseudo-inverses, Schatten norms, and stability certificates",
    version
)]
struct Cli {
    #[command(flatten)]
    run: RunOptions,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOptions {
    /// Relative rank cutoff (singular values below cutoff·σ₁ count as zero).
    #[arg(long, global = true)]
    rank_cutoff: Option<f64>,

    /// Relative equality tolerance for identity checks.
    #[arg(long, global = true)]
    equality_tol: Option<f64>,

    /// Largest condition number treated as invertible.
    #[arg(long, global = true)]
    condition_limit: Option<f64>,

    /// Random seed (defaults to GRAMKIT_SEED or 0xC0FFEE).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the primary artifact (matrix/frame/report) to this path.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Report format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    CsvSummary,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a frame system and report its bounds.
    Classify { frame: PathBuf },

    /// Build the cross Gram matrix G = T_Φ* U T_Ψ.
    Gram {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },

    /// Conjugate transpose of a Gram matrix (provenance swaps when given).
    Adjoint {
        #[arg(long)]
        gram: PathBuf,
    },

    /// Product of two cross Gram matrices. With full provenance the
    /// recorded operator simplifies per the composition rules.
    Compose {
        #[arg(long)]
        gram1: Option<PathBuf>,
        #[arg(long)]
        gram2: Option<PathBuf>,
        #[arg(long)]
        op1: Option<PathBuf>,
        #[arg(long)]
        left1: Option<PathBuf>,
        #[arg(long)]
        right1: Option<PathBuf>,
        #[arg(long)]
        op2: Option<PathBuf>,
        #[arg(long)]
        left2: Option<PathBuf>,
        #[arg(long)]
        right2: Option<PathBuf>,
    },

    /// Rebuild the operator from its Gram matrix through dual frames.
    Reconstruct {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        left_dual: PathBuf,
        #[arg(long)]
        right_dual: PathBuf,
    },

    /// Canonical dual of a frame system.
    Dual { frame: PathBuf },

    /// The special dual arising from the Gram pseudo-inverse.
    SpecialDual {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Side::Phi)]
        side: Side,
    },

    /// Pseudo-inverse of the cross Gram matrix with all dual-frame
    /// representations and their residuals.
    Pinv {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Write the full report here (the -o artifact is G† itself).
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// The T_{(UΨ)~}* T_Φ̃ candidate for G† and its range condition.
    PinvTilde {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },

    /// Pseudo-inverse identity for the transported Gram G_{U, UΦ, U*Ψ}.
    PinvTransported {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },

    /// Schatten-norm report for an operator against its Gram matrix.
    Schatten {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },

    /// Approximate-duality certificate from the Gram sufficient conditions.
    ApproxDual {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        left_dual: Option<PathBuf>,
        #[arg(long)]
        right_dual: Option<PathBuf>,
    },

    /// Turn an approximate dual into an exact one.
    CorrectedDual {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },

    /// Perturbation certificates for Gram invertibility.
    Stability {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long)]
        u1: Option<PathBuf>,
        #[arg(long)]
        u2: Option<PathBuf>,
        #[arg(long)]
        u3: Option<PathBuf>,
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long)]
        perturbed_op: Option<PathBuf>,
        #[arg(long)]
        left: Option<PathBuf>,
        #[arg(long)]
        right: Option<PathBuf>,
        #[arg(long)]
        perturbed_left: Option<PathBuf>,
        #[arg(long)]
        perturbed_right: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda2: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda3: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda4: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Random coefficient draws for falsifying the joint hypothesis.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },

    /// Neumann-series inverse anchored at an invertible reference.
    Neumann {
        #[arg(long)]
        u1: PathBuf,
        #[arg(long)]
        u2: PathBuf,
    },

    /// Gram convergence table for Uₙ = U + N/n (and optional frame noise).
    Converge {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        op_noise: PathBuf,
        #[arg(long)]
        left_noise: Option<PathBuf>,
        #[arg(long)]
        right_noise: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },

    /// Run the randomized invariant suites and print per-theorem counts.
    Selftest {
        #[arg(long, default_value_t = 400)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Phi,
    Psi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    ThreeOps,
    Factor,
    C1,
    C2,
    C3,
    Riesz,
    Joint,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::from(EXIT_OK);
        }
    };

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("gramkit: {err}");
            let code = match err {
                Error::TheoremViolation { .. } => EXIT_VIOLATION,
                Error::NotContractive { .. } => EXIT_INCONCLUSIVE,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}

fn policy(opts: &RunOptions) -> Result<TolerancePolicy, Error> {
    let defaults = TolerancePolicy::default();
    TolerancePolicy::new(
        opts.rank_cutoff.unwrap_or(defaults.relative_rank_cutoff),
        opts.equality_tol.unwrap_or(defaults.equality_tolerance),
        opts.condition_limit.unwrap_or(defaults.condition_limit),
    )
}

fn seed(opts: &RunOptions) -> u64 {
    opts.seed
        .or_else(|| {
            std::env::var("GRAMKIT_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_SEED)
}

/// Prints the report to stdout in the requested format and optionally
/// writes the primary artifact to the output path.
fn emit<T: serde::Serialize>(
    opts: &RunOptions,
    report: &serde_json::Value,
    artifact: Option<&T>,
) -> Result<(), Error> {
    match opts.format {
        Format::Json => print!("{}", io::to_json_string(report)?),
        Format::CsvSummary => {
            let mut lines = Vec::new();
            flatten("", report, &mut lines);
            for (key, value) in lines {
                println!("{key},{value}");
            }
        }
    }
    if let Some(path) = &opts.output {
        match artifact {
            Some(value) => io::write_json(path, value)?,
            None => io::write_json(path, report)?,
        }
    }
    Ok(())
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        serde_json::Value::Number(n) => {
            let text = if let Some(i) = n.as_i64() {
                format!("{i}")
            } else if let Some(u) = n.as_u64() {
                format!("{u}")
            } else {
                format!("{:.16e}", n.as_f64().unwrap_or(0.0))
            };
            out.push((prefix.to_string(), text));
        }
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        serde_json::Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        serde_json::Value::Null => out.push((prefix.to_string(), "null".into())),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let pol = policy(&cli.run)?;
    let opts = &cli.run;
    match cli.command {
        Command::Classify { frame } => {
            let f = io::read_frame(&frame)?;
            let class = f.classify(&pol);
            let report = json!({
                "command": "classify",
                "dim": f.dim(),
                "count": f.count(),
                "class": to_value(&class)?,
            });
            emit(opts, &report, Some(&class))?;
            Ok(EXIT_OK)
        }

        Command::Gram { op, left, right } => {
            let u = io::read_matrix(&op)?;
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let g = gram::cross_gram(&u, &phi, &psi)?;
            let report = json!({
                "command": "gram",
                "rows": g.rows(),
                "cols": g.cols(),
                "operator_norm": g.matrix().operator_norm(),
                "norm_bound": (phi.bessel_bound() * psi.bessel_bound()).sqrt()
                    * u.operator_norm(),
                "matrix": to_value(g.matrix())?,
            });
            emit(opts, &report, Some(g.matrix()))?;
            Ok(EXIT_OK)
        }

        Command::Adjoint { gram: gram_path } => {
            let m = io::read_matrix(&gram_path)?;
            let g = gram::adjoint(&gram::CrossGram::from_matrix(m));
            let report = json!({
                "command": "adjoint",
                "matrix": to_value(g.matrix())?,
            });
            emit(opts, &report, Some(g.matrix()))?;
            Ok(EXIT_OK)
        }

        Command::Compose {
            gram1,
            gram2,
            op1,
            left1,
            right1,
            op2,
            left2,
            right2,
        } => {
            let build = |mat: Option<PathBuf>,
                         op: Option<PathBuf>,
                         left: Option<PathBuf>,
                         right: Option<PathBuf>|
             -> Result<gram::CrossGram, Error> {
                match (mat, op, left, right) {
                    (Some(m), ..) => Ok(gram::CrossGram::from_matrix(io::read_matrix(&m)?)),
                    (None, Some(o), Some(l), Some(r)) => gram::cross_gram(
                        &io::read_matrix(&o)?,
                        &io::read_frame(&l)?,
                        &io::read_frame(&r)?,
                    ),
                    _ => Err(Error::Parse(
                        "compose needs --gramN or the full --opN/--leftN/--rightN triple".into(),
                    )),
                }
            };
            let g1 = build(gram1, op1, left1, right1)?;
            let g2 = build(gram2, op2, left2, right2)?;
            let product = gram::compose(&g1, &g2, &pol)?;
            let report = json!({
                "command": "compose",
                "has_provenance": product.provenance().is_some(),
                "provenance_operator": product
                    .provenance()
                    .map(|p| to_value(&p.operator))
                    .transpose()?,
                "matrix": to_value(product.matrix())?,
            });
            emit(opts, &report, Some(product.matrix()))?;
            Ok(EXIT_OK)
        }

        Command::Reconstruct {
            op,
            left,
            right,
            left_dual,
            right_dual,
        } => {
            let u = io::read_matrix(&op)?;
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let g = gram::cross_gram(&u, &phi, &psi)?;
            let rebuilt = gram::reconstruct_operator(
                &g,
                &io::read_frame(&left_dual)?,
                &io::read_frame(&right_dual)?,
                &pol,
            )?;
            let report = json!({
                "command": "reconstruct",
                "residual_vs_op": rebuilt.distance(&u),
                "matrix": to_value(&rebuilt)?,
            });
            emit(opts, &report, Some(&rebuilt))?;
            Ok(EXIT_OK)
        }

        Command::Dual { frame } => {
            let f = io::read_frame(&frame)?;
            let dual = f.canonical_dual_with(&pol)?;
            let cert = f.is_dual_pair(&dual, &pol)?;
            let report = json!({
                "command": "dual",
                "duality": to_value(&cert)?,
                "frame": to_value(&dual)?,
            });
            emit(opts, &report, Some(&dual))?;
            Ok(EXIT_OK)
        }

        Command::SpecialDual {
            op,
            left,
            right,
            side,
        } => {
            let u = io::read_matrix(&op)?;
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let which = match side {
                Side::Phi => inversion::DualSide::PhiSide,
                Side::Psi => inversion::DualSide::PsiSide,
            };
            let dual = inversion::special_dual(&u, &phi, &psi, which, &pol)?;
            let report = json!({
                "command": "special-dual",
                "side": to_value(&dual.kind)?,
                "duality_residual": dual.duality_residual,
                "full_space": dual.full_space,
                "kernel_residual": dual.kernel_residual,
                "frame": to_value(&dual.frame)?,
            });
            emit(opts, &report, Some(&dual.frame))?;
            Ok(EXIT_OK)
        }

        Command::Pinv {
            op,
            left,
            right,
            report: report_path,
        } => {
            let u = io::read_matrix(&op)?;
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let report = inversion::pinv_gram(&u, &phi, &psi, &pol)?;
            let u_pinv = u.pseudo_inverse(&pol)?;
            let value = json!({
                "command": "pinv",
                "operator_pinv": to_value(&u_pinv)?,
                "u_invertible": report.u_invertible,
                "range_condition_psi": report.range_condition_psi,
                "range_condition_phi": report.range_condition_phi,
                "rank_reliable": report.rank_reliable,
                "all_guaranteed_hold": report.all_guaranteed_hold,
                "representations": to_value(&report.representations)?,
                "kernel_range_checks": to_value(&report.kernel_range_checks)?,
                "phi_dual": to_value(&report.phi_dual)?,
                "psi_dual": to_value(&report.psi_dual)?,
                "pinv": to_value(&report.pinv)?,
            });
            if let Some(path) = report_path {
                io::write_json(&path, &value)?;
            }
            emit(opts, &value, Some(&report.pinv))?;
            Ok(EXIT_OK)
        }

        Command::PinvTilde { op, left, right } => {
            let u = io::read_matrix(&op)?;
            let report = inversion::pinv_via_tilde(
                &u,
                &io::read_frame(&left)?,
                &io::read_frame(&right)?,
                &pol,
            )?;
            let value = json!({
                "command": "pinv-tilde",
                "residual": report.residual,
                "condition_holds": report.condition_holds,
                "left_spans_operator_range": report.left_spans_operator_range,
                "candidate_matches": report.candidate_matches,
                "iff_consistent": report.iff_consistent,
                "candidate": to_value(&report.candidate)?,
            });
            emit(opts, &value, Some(&report.candidate))?;
            Ok(EXIT_OK)
        }

        Command::PinvTransported { op, left, right } => {
            let u = io::read_matrix(&op)?;
            let report = inversion::pinv_transported(
                &u,
                &io::read_frame(&left)?,
                &io::read_frame(&right)?,
                &pol,
            )?;
            let value = json!({
                "command": "pinv-transported",
                "residual": report.residual,
                "holds": report.holds,
                "invariance_phi": report.invariance_phi,
                "invariance_psi": report.invariance_psi,
                "guaranteed": report.guaranteed,
                "pinv": to_value(&report.pinv)?,
                "formula": to_value(&report.formula)?,
            });
            emit(opts, &value, Some(&report.pinv))?;
            Ok(if report.guaranteed || report.holds {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }

        Command::Schatten { op, left, right, p } => {
            let report = schatten::schatten_gram_check(
                &io::read_matrix(&op)?,
                &io::read_frame(&left)?,
                &io::read_frame(&right)?,
                p,
                &pol,
            )?;
            let value = to_value(&report)?;
            emit(opts, &value, Some(&report))?;
            Ok(if report.all_hold {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }

        Command::ApproxDual {
            left,
            right,
            left_dual,
            right_dual,
        } => {
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let phi_dual = match left_dual {
                Some(p) => io::read_frame(&p)?,
                None => phi.canonical_dual_with(&pol)?,
            };
            let psi_dual = match right_dual {
                Some(p) => io::read_frame(&p)?,
                None => psi.canonical_dual_with(&pol)?,
            };
            let cert = approx_dual::sufficient_conditions(&phi, &psi, &phi_dual, &psi_dual, &pol)?;
            let value = to_value(&cert)?;
            emit(opts, &value, Some(&cert))?;
            Ok(if cert.conclusion {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }

        Command::CorrectedDual { left, right } => {
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let corrected = approx_dual::corrected_dual(&phi, &psi, &pol)?;
            let report = json!({
                "command": "corrected-dual",
                "defect_before": approx_dual::approx_dual_defect(&phi, &psi)?,
                "frame": to_value(&corrected)?,
            });
            emit(opts, &report, Some(&corrected))?;
            Ok(EXIT_OK)
        }

        Command::Stability {
            theorem,
            u1,
            u2,
            u3,
            frame,
            op,
            perturbed_op,
            left,
            right,
            perturbed_left,
            perturbed_right,
            lambda1,
            lambda2,
            lambda3,
            lambda4,
            mu,
            samples,
        } => {
            let need = |p: Option<PathBuf>, name: &str| {
                p.ok_or_else(|| Error::Parse(format!("--{name} is required for this theorem")))
            };
            let cert = match theorem {
                Theorem::ThreeOps => stability::stability_three_ops(
                    &io::read_matrix(&need(u1, "u1")?)?,
                    &io::read_matrix(&need(u2, "u2")?)?,
                    &io::read_matrix(&need(u3, "u3")?)?,
                    &io::read_frame(&need(frame, "frame")?)?,
                    &pol,
                )?,
                Theorem::Factor => stability::stability_factor(
                    &io::read_matrix(&need(u1, "u1")?)?,
                    &io::read_matrix(&need(u2, "u2")?)?,
                    &io::read_frame(&need(frame, "frame")?)?,
                    &pol,
                )?,
                Theorem::C1 | Theorem::C2 | Theorem::C3 => {
                    let base_left = io::read_frame(&need(left, "left")?)?;
                    let base_right = io::read_frame(&need(right, "right")?)?;
                    let u = io::read_matrix(&need(op, "op")?)?;
                    let v = match &perturbed_op {
                        Some(p) => io::read_matrix(p)?,
                        None => u.clone(),
                    };
                    let xi = match &perturbed_left {
                        Some(p) => io::read_frame(p)?,
                        None => base_left.clone(),
                    };
                    let theta = match &perturbed_right {
                        Some(p) => io::read_frame(p)?,
                        None => base_right.clone(),
                    };
                    let [c1, c2, c3] = stability::perturb_certificates(
                        &u,
                        &v,
                        &base_left,
                        &base_right,
                        &xi,
                        &theta,
                        &pol,
                    )?;
                    match theorem {
                        Theorem::C1 => c1,
                        Theorem::C2 => c2,
                        _ => c3,
                    }
                }
                Theorem::Riesz => stability::riesz_perturbation(
                    &io::read_matrix(&need(op, "op")?)?,
                    &io::read_frame(&need(left, "left")?)?,
                    &io::read_frame(&need(right, "right")?)?,
                    &pol,
                )?,
                Theorem::Joint => {
                    let budget =
                        stability::StabilityBudget::new([lambda1, lambda2, lambda3, lambda4], mu)?;
                    let mut rng = {
                        use rand::SeedableRng;
                        rand_chacha::ChaCha8Rng::seed_from_u64(seed(opts))
                    };
                    stability::joint_stability(
                        &io::read_matrix(&need(op, "op")?)?,
                        &io::read_matrix(&need(perturbed_op, "perturbed-op")?)?,
                        &io::read_frame(&need(left, "left")?)?,
                        &io::read_frame(&need(right, "right")?)?,
                        &io::read_frame(&need(perturbed_left, "perturbed-left")?)?,
                        &io::read_frame(&need(perturbed_right, "perturbed-right")?)?,
                        &budget,
                        &pol,
                        samples,
                        &mut rng,
                    )?
                }
            };
            let value = to_value(&cert)?;
            emit(opts, &value, Some(&cert))?;
            Ok(if cert.verdict {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }

        Command::Neumann { u1, u2 } => {
            let out =
                stability::neumann_inverse(&io::read_matrix(&u1)?, &io::read_matrix(&u2)?, &pol)?;
            let value = to_value(&out)?;
            emit(opts, &value, Some(&out.inverse))?;
            Ok(if out.converged {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }

        Command::Converge {
            op,
            left,
            right,
            op_noise,
            left_noise,
            right_noise,
            steps,
        } => {
            let u = io::read_matrix(&op)?;
            let phi = io::read_frame(&left)?;
            let psi = io::read_frame(&right)?;
            let noise = io::read_matrix(&op_noise)?;
            let left_noise = left_noise.map(|p| io::read_matrix(&p)).transpose()?;
            let right_noise = right_noise.map(|p| io::read_matrix(&p)).transpose()?;
            let mut sequence = Vec::with_capacity(steps);
            for n in 1..=steps {
                let scale = gramkit_core::Scalar::new(1.0 / n as f64, 0.0);
                let u_n = &u + &noise.scale(scale);
                let phi_n = match &left_noise {
                    Some(e) => FrameSystem::from_synthesis(phi.synthesis() + &e.scale(scale))?,
                    None => phi.clone(),
                };
                let psi_n = match &right_noise {
                    Some(e) => FrameSystem::from_synthesis(psi.synthesis() + &e.scale(scale))?,
                    None => psi.clone(),
                };
                sequence.push((u_n, phi_n, psi_n));
            }
            let table = stability::convergence_harness(&sequence, &(u, phi, psi))?;
            let value = to_value(&table)?;
            emit(opts, &value, Some(&table))?;
            Ok(if table.all_within {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }

        Command::Selftest {
            trials,
            sizes,
            samples,
        } => {
            let results = selftest::run_all(seed(opts), &sizes, trials, samples, &pol);
            let mut ok = true;
            for suite in &results {
                println!(
                    "{:<26} trials {:>6}  passes {:>6}  soundness failures {}  identity failures {}",
                    suite.name,
                    suite.trials,
                    suite.passes,
                    suite.soundness_failures,
                    suite.identity_failures
                );
                ok &= suite.ok();
            }
            if let Some(path) = &opts.output {
                io::write_json(path, &results)?;
            }
            Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}
