//! `isowalk` command-line front end.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use isowalk::classifier::families::family_isotropy;
use isowalk::classifier::{report, run_pipeline, Branch, Chirality, FamilyParams};
use isowalk::isotropy::{check_covariance, check_homogeneity, covariance_residual, induced_permutation, IsotropyDecl};
use isowalk::matrix_kernel::{c, frobenius, identity2};
use isowalk::point_groups::{orbit, parse_group};
use isowalk::walk_engine::{
    check_unitarity, dense_unitarity_defect, dispersion, evolve, momentum_symbol, torus_operator, TorusState, WalkFile,
};
use isowalk::{Error, IntVector, QuantumWalk, RunConfig};

const CONFIG_ENV: &str = "ISOWALK_CONFIG";

#[derive(Parser)]
#[command(name = "isowalk", version, about = "Isotropic two-state quantum walks on Z^d")]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    k_samples: Option<usize>,
    #[arg(long)]
    torus_n: Option<usize>,
    #[arg(long)]
    multistarts: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exclusion pipeline in dimension d and write the JSON report.
    Classify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        dim: u8,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Check unitarity, the torus oracle and any declared isotropy of a walk file.
    Verify {
        walk: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// CSV of (k, ω₊, ω₋) along a line through k = 0.
    Dispersion {
        walk: PathBuf,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Direction of the line, comma separated; defaults to the first axis.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Vec<f64>,
        /// The grid spans |k| ≤ kmax.
        #[arg(long, default_value_t = PI)]
        kmax: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Evolve a Gaussian packet on the torus (Z_N)^d.
    Evolve {
        walk: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        width: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        momentum: Vec<f64>,
        /// Spinor (a, b) as re,im,re,im.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0,0,0")]
        spinor: Vec<f64>,
        /// Keep every m-th step.
        #[arg(long, default_value_t = 1)]
        every: usize,
        #[arg(long, value_enum, default_value_t = EvolveFormat::Csv)]
        format: EvolveFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Orbit of an integer vector under a point group.
    Orbit {
        #[arg(long)]
        group: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        seed: Vec<i64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Walk file of a classified family, with its isotropy declared.
    Family {
        #[arg(value_enum)]
        kind: FamilyKind,
        /// For line walks: n = cos(angle), m = sin(angle).
        #[arg(long, default_value_t = PI / 4.0, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvolveFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Line,
    LineInverses,
    SquareZ,
    SquareX,
    SquareInverses,
    WeylPlus,
    WeylMinus,
}

/// Failure of a command: a domain error (exit 1) or a usage error (exit 2).
enum Failure {
    Domain(String, String),
    Usage(String),
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = format!("{e:?}");
        let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure::Domain(kind, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Domain("Io".into(), format!("{}: {e}", path.display()))
}

type CmdResult = std::result::Result<(), Failure>;

fn load_config(path: Option<&Path>, flags: &ConfigFlags) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?)?,
        None => RunConfig::default(),
    };
    if let Some(x) = flags.tolerance {
        cfg.tolerance = x;
    }
    if let Some(x) = flags.k_samples {
        cfg.k_samples = x;
    }
    if let Some(x) = flags.torus_n {
        cfg.torus_n = x;
    }
    if let Some(x) = flags.multistarts {
        cfg.multistarts = x;
    }
    if let Some(x) = flags.rng_seed {
        cfg.rng_seed = x;
    }
    if flags.output.is_some() {
        cfg.output_path = flags.output.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> std::result::Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Domain("Serialize".into(), e.to_string()))
}

fn read_walk(path: &Path) -> std::result::Result<(WalkFile, QuantumWalk), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let file: WalkFile = serde_json::from_str(&text).map_err(|e| Failure::Domain("Parse".into(), e.to_string()))?;
    let walk = file.to_walk()?;
    Ok((file, walk))
}

fn classify(dim: u8, cfg: RunConfig) -> CmdResult {
    let c = run_pipeline(dim as usize, &cfg)?;
    emit(cfg.output_path.as_deref(), &(report::to_json(&c)? + "\n"))?;
    eprint!("{}", report::summary_table(&c));
    if c.inconclusive.is_empty() {
        Ok(())
    } else {
        Err(Error::PipelineInconclusive(c.inconclusive.len()).into())
    }
}

/// Low-discrepancy Kronecker sequence in [−π, π)^d.
fn sample_momenta(d: usize, count: usize) -> Vec<Vec<f64>> {
    let alpha = [0.754_877_666_246_692_7, 0.569_840_290_998_053_3, 0.438_289_094_599_836_1];
    (0..count)
        .map(|i| (0..d).map(|j| (((i as f64 + 0.5) * alpha[j]).fract() * 2.0 - 1.0) * PI).collect())
        .collect()
}

fn verify(path: &Path, cfg: RunConfig) -> CmdResult {
    let (file, walk) = read_walk(path)?;
    let tol = cfg.tolerance;
    let mut out = String::new();
    let mut pass = true;
    let mut line = |out: &mut String, name: &str, value: f64, ok: bool| {
        pass &= ok;
        let _ = writeln!(out, "{:<34} {:>12.3e}  {}", name, value, if ok { "PASS" } else { "FAIL" });
    };
    let rep = check_unitarity(&walk);
    line(&mut out, "normalization Σ A A† − I", rep.normalization_left, rep.normalization_left <= tol);
    line(&mut out, "normalization Σ A† A − I", rep.normalization_right, rep.normalization_right <= tol);
    for (k, r) in &rep.offdiag_residuals {
        line(&mut out, &format!("difference {k}"), *r, *r <= tol);
    }
    let worst = sample_momenta(walk.dim(), cfg.k_samples)
        .iter()
        .map(|k| {
            let a = momentum_symbol(&walk, k);
            frobenius(&(a.adjoint() * a - identity2()))
        })
        .fold(0.0, f64::max);
    line(&mut out, &format!("max ‖A_k†A_k − I‖ over {} k", cfg.k_samples), worst, worst <= tol);
    let torus = dense_unitarity_defect(&torus_operator(&walk, cfg.torus_n)?);
    line(&mut out, &format!("torus N = {} defect", cfg.torus_n), torus, torus <= tol);
    let unitary = rep.is_valid(tol);
    if unitary != (torus <= tol) {
        line(&mut out, "symbol and torus verdicts agree", 1.0, false);
    }
    if let Some(decl) = &file.isotropy {
        let srep = decl.to_rep(walk.dim(), 1e-9)?;
        let act = induced_permutation(&srep.group, &walk.gs)?;
        let cov = covariance_residual(&walk, &srep, &act);
        line(&mut out, &format!("covariance under {}", srep.group.label()), cov, check_covariance(&walk, &srep, &act, tol.max(1e-9)));
        let hom = check_homogeneity(&walk, &srep, &act, tol.max(1e-9));
        line(&mut out, "homogeneity", if hom { 0.0 } else { 1.0 }, hom);
    }
    let _ = writeln!(out, "{}", if pass { "PASS" } else { "FAIL" });
    emit(cfg.output_path.as_deref(), &out)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn unit_direction(d: usize, direction: &[f64]) -> std::result::Result<Vec<f64>, Failure> {
    let u: Vec<f64> = if direction.is_empty() {
        (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    } else {
        direction.to_vec()
    };
    if u.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.len() }.into());
    }
    let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Failure::Usage("direction must be a nonzero finite vector".into()));
    }
    Ok(u.iter().map(|x| x / n).collect())
}

fn dispersion_csv(path: &Path, points: usize, direction: &[f64], kmax: f64, output: Option<&Path>) -> CmdResult {
    if points < 2 || !(kmax > 0.0 && kmax.is_finite()) {
        return Err(Failure::Usage("need at least 2 points and a positive kmax".into()));
    }
    let (_, walk) = read_walk(path)?;
    let u = unit_direction(walk.dim(), direction)?;
    let mut out = String::from("k,omega_plus,omega_minus\n");
    for i in 0..points {
        let t = -kmax + 2.0 * kmax * i as f64 / (points - 1) as f64;
        let k: Vec<f64> = u.iter().map(|x| t * x).collect();
        let (wp, wm) = dispersion(&walk, &k, 1e-9)?;
        let _ = writeln!(out, "{t:.12},{wp:.12},{wm:.12}");
    }
    emit(output, &out)
}

#[derive(Serialize)]
struct Snapshot {
    step: usize,
    norm: f64,
    mean_position: Vec<f64>,
    sites: Vec<SiteAmplitude>,
}

#[derive(Serialize)]
struct SiteAmplitude {
    x: Vec<i64>,
    amplitude: [[f64; 2]; 2],
}

#[allow(clippy::too_many_arguments)]
fn evolve_cmd(
    path: &Path,
    steps: usize,
    n: usize,
    width: f64,
    momentum: &[f64],
    spinor: &[f64],
    every: usize,
    format: EvolveFormat,
    output: Option<&Path>,
) -> CmdResult {
    if every == 0 || n == 0 || !(width > 0.0) || spinor.len() != 4 {
        return Err(Failure::Usage("need n ≥ 1, every ≥ 1, width > 0 and four spinor components".into()));
    }
    let (_, walk) = read_walk(path)?;
    let d = walk.dim();
    let p = if momentum.is_empty() { vec![0.0; d] } else { momentum.to_vec() };
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() }.into());
    }
    let spin = [c(spinor[0], spinor[1]), c(spinor[2], spinor[3])];
    if spin[0].norm() + spin[1].norm() == 0.0 {
        return Err(Failure::Usage("spinor must be nonzero".into()));
    }
    let center = vec![(n / 2) as f64; d];
    let mut state = TorusState::gaussian(n, d, &center, width, &p, spin);
    let mut snapshots = Vec::new();
    for step in 0..=steps {
        if step > 0 {
            state = evolve(&walk, &state, 1)?;
        }
        if step % every == 0 || step == steps {
            snapshots.push(Snapshot {
                step,
                norm: state.norm(),
                mean_position: state.mean_position(),
                sites: match format {
                    EvolveFormat::Json => state
                        .support()
                        .into_iter()
                        .map(|x| {
                            let a = state.amplitudes[&site_key(&x, n)];
                            SiteAmplitude {
                                x,
                                amplitude: [[a[0].re, a[0].im], [a[1].re, a[1].im]],
                            }
                        })
                        .collect(),
                    EvolveFormat::Csv => vec![],
                },
            });
        }
    }
    let text = match format {
        EvolveFormat::Json => to_json(&snapshots)?,
        EvolveFormat::Csv => {
            let mut s = String::from("step,norm");
            for i in 0..d {
                let _ = write!(s, ",mean_x{i}");
            }
            s.push('\n');
            for snap in &snapshots {
                let _ = write!(s, "{},{:.15}", snap.step, snap.norm);
                for m in &snap.mean_position {
                    let _ = write!(s, ",{m:.12}");
                }
                s.push('\n');
            }
            s
        }
    };
    emit(output, &text)
}

fn site_key(x: &[i64], n: usize) -> usize {
    x.iter().fold(0usize, |acc, &v| acc * n + v.rem_euclid(n as i64) as usize)
}

#[derive(Serialize)]
struct OrbitReport {
    group: String,
    order: usize,
    seed: Vec<i64>,
    stabilizer_size: usize,
    vectors: Vec<Vec<i64>>,
}

fn orbit_cmd(group: &str, seed: &[i64], output: Option<&Path>) -> CmdResult {
    let g = parse_group(group)?;
    let o = orbit(&g, &IntVector::from_ints(seed))?;
    let vectors = o
        .vectors
        .iter()
        .map(|v| v.to_i64().ok_or_else(|| Failure::Domain("Overflow".into(), v.to_string())))
        .collect::<std::result::Result<_, _>>()?;
    emit(
        output,
        &to_json(&OrbitReport {
            group: g.label(),
            order: g.order(),
            seed: seed.to_vec(),
            stabilizer_size: o.stabilizer_size,
            vectors,
        })?,
    )
}

fn family_cmd(kind: FamilyKind, angle: f64, output: Option<&Path>) -> CmdResult {
    let line = |inverses| FamilyParams::Line {
        n: angle.cos(),
        m: angle.sin(),
        v: identity2(),
        inverses,
    };
    let square = |branch, inverses| FamilyParams::Square {
        v: identity2(),
        branch,
        inverses,
    };
    let params = match kind {
        FamilyKind::Line => line(false),
        FamilyKind::LineInverses => line(true),
        FamilyKind::SquareZ => square(Branch::SigmaZ, false),
        FamilyKind::SquareX => square(Branch::SigmaX, false),
        FamilyKind::SquareInverses => square(Branch::SigmaZ, true),
        FamilyKind::WeylPlus => FamilyParams::Weyl { chirality: Chirality::Plus },
        FamilyKind::WeylMinus => FamilyParams::Weyl { chirality: Chirality::Minus },
    };
    let walk = isowalk::classifier::build_family_walk(&params)?;
    let (rep, _) = family_isotropy(&params, 1e-9)?;
    let mut file = walk.to_file();
    file.isotropy = Some(IsotropyDecl::from_rep(&rep));
    emit(output, &to_json(&file)?)
}

fn run(cli: Cli) -> CmdResult {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Classify { dim, flags } => classify(dim, load_config(config, &flags)?),
        Command::Verify { walk, flags } => verify(&walk, load_config(config, &flags)?),
        Command::Dispersion {
            walk,
            points,
            direction,
            kmax,
            output,
        } => dispersion_csv(&walk, points, &direction, kmax, output.as_deref()),
        Command::Evolve {
            walk,
            steps,
            n,
            width,
            momentum,
            spinor,
            every,
            format,
            output,
        } => evolve_cmd(&walk, steps, n, width, &momentum, &spinor, every, format, output.as_deref()),
        Command::Orbit { group, seed, output } => orbit_cmd(&group, &seed, output.as_deref()),
        Command::Family { kind, angle, output } => family_cmd(kind, angle, output.as_deref()),
    }
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: &'a str,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Domain(kind, message)) => {
            eprintln!("{}", serde_json::to_string(&ErrorLine { error: &kind, message: &message }).unwrap_or_default());
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("{}", serde_json::to_string(&ErrorLine { error: "Usage", message: &message }).unwrap_or_default());
            ExitCode::from(2)
        }
    }
}
