use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudospec_core::approx::{
    first_order_trajectories, ones_direction, random_cloud, sweep_wilkinson, EtaMode, PointCloud,
    SweepConfig, SweepTarget, DEFAULT_ANGLES,
};
use pseudospec_core::numkernel::{eig_pairs, Complex64, DenseMatrix, Eigensystem};
use pseudospec_core::oracle::{
    abscissa_grid, cloud_inclusion_check, default_window, enclosing_window, grid_field, GridField, Window,
};
use pseudospec_core::sensitivity::{analyze, coalescence_estimate, SensitivityReport};
use pseudospec_core::structures::{is_member, StructurePattern};

use crate::error::{CliError, Result};
use crate::families::{generate, Family};
use crate::files::{fmt_f64, load_matrix, to_json_bytes, write_atomic, CloudFile, LoadedMatrix};
use crate::svg::{fit_window, render, Layer};

#[derive(Debug, Parser)]
#[command(name = "pseudospec", version, about = "Structured pseudospectra from Wilkinson perturbations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded matrix from one of the example families.
    Generate(GenerateArgs),
    /// Eigenvalue condition numbers and coalescence estimates.
    Analyze(AnalyzeArgs),
    /// Wilkinson sweep cloud, optionally with a random baseline.
    Approx(ApproxArgs),
    /// Grid of smallest singular values and cloud inclusion checks.
    Oracle(OracleArgs),
    /// First-order eigenvalue paths along the all-ones direction.
    Trajectory(TrajectoryArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StructureArg {
    /// The structure declared in the matrix file, else full.
    Auto,
    Full,
    /// Toeplitz on the nonzero diagonals of the matrix.
    Toeplitz,
    /// Hankel on the nonzero antidiagonals of the matrix.
    Hankel,
    Hamiltonian,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Matrix order (family default when omitted).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub structure: StructureArg,
    /// Write the JSON report here instead of printing it.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Zero-based eigenvalue pair `i,j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairArg(pub usize, pub usize);

impl FromStr for PairArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or("expected i,j")?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
        Ok(Self(p(a)?, p(b)?))
    }
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    pub matrix: PathBuf,
    /// Perturbation size (default: coalescence estimate for the structure).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ANGLES)]
    pub angles: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub structure: StructureArg,
    /// Sweep this pair instead of the most sensitive one.
    #[arg(long, conflicts_with = "all")]
    pub pair: Option<PairArg>,
    /// Sweep every eigenvalue.
    #[arg(long)]
    pub all: bool,
    /// Use eta = +1 and -1 only.
    #[arg(long)]
    pub real_eta: bool,
    /// Number of random perturbations for a baseline cloud.
    #[arg(long)]
    pub baseline: Option<usize>,
    /// Baseline CSV path (default: `<out stem>.baseline.csv`).
    #[arg(long, requires = "baseline")]
    pub baseline_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsArg(pub Window);

impl FromStr for BoundsArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = parse_floats(s)?;
        if v.len() != 4 {
            return Err("expected re_min,re_max,im_min,im_max".into());
        }
        Window::new(v[0], v[1], v[2], v[3]).map(Self).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolutionArg(pub usize, pub usize);

impl FromStr for ResolutionArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or("expected NxM")?;
        let p = |t: &str| match t.trim().parse::<usize>() {
            Ok(0) => Err("resolution must be positive".to_string()),
            Ok(v) => Ok(v),
            Err(e) => Err(e.to_string()),
        };
        Ok(Self(p(a)?, p(b)?))
    }
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsList(pub Vec<f64>);

impl FromStr for EpsList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = parse_floats(s)?;
        if v.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err("epsilon values must be positive".into());
        }
        Ok(Self(v))
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub matrix: PathBuf,
    /// Window `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<BoundsArg>,
    #[arg(long, default_value = "200x200")]
    pub res: ResolutionArg,
    /// Level sets to report, comma separated.
    #[arg(long)]
    pub eps_list: Option<EpsList>,
    /// Cloud CSV to verify against the matrix.
    #[arg(long)]
    pub check: Option<PathBuf>,
    /// Relative slack in `sigma_min <= epsilon (1 + slack)`.
    #[arg(long, default_value_t = 1e-8)]
    pub slack: f64,
    /// Grid CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    pub matrix: PathBuf,
    #[arg(long)]
    pub eps_max: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub structure: StructureArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Generate(a) => run_generate(&a, out),
        Command::Analyze(a) => run_analyze(&a, out),
        Command::Approx(a) => run_approx(&a, out),
        Command::Oracle(a) => run_oracle(&a, out),
        Command::Trajectory(a) => run_trajectory(&a, out),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| CliError::io("<stdout>", e))
}

macro_rules! say {
    ($out:expr, $($t:tt)*) => {
        say($out, format_args!($($t)*))
    };
}

/// Pattern selected by `arg` for a loaded matrix.
pub fn resolve_structure(arg: StructureArg, m: &LoadedMatrix) -> Result<StructurePattern> {
    let a = &m.matrix;
    let n = a.dim();
    let real = a.is_real(0.0);
    let s = match arg {
        StructureArg::Auto => {
            return match &m.file.structure {
                Some(s) => Ok(s.clone()),
                None => Ok(StructurePattern::full(n)?),
            }
        }
        StructureArg::Full => StructurePattern::full(n)?,
        StructureArg::Toeplitz => StructurePattern::toeplitz_support_of(a)?,
        StructureArg::Hankel => StructurePattern::hankel_support_of(a)?,
        StructureArg::Hamiltonian => {
            if !n.is_multiple_of(2) {
                return Err(CliError::Validation(format!(
                    "Hamiltonian structure needs an even order, got {n}"
                )));
            }
            StructurePattern::hamiltonian(n / 2)?
        }
    };
    if !is_member(a, &s)? {
        return Err(CliError::Validation(format!(
            "matrix is not {} structured",
            s.describe()
        )));
    }
    Ok(s.with_real(real))
}

fn load_system(path: &Path) -> Result<(LoadedMatrix, Eigensystem)> {
    let m = load_matrix(path)?;
    let sys = eig_pairs(&m.matrix)?;
    Ok((m, sys))
}

pub fn run_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let file = generate(args.family, args.n, args.seed)?;
    write_atomic(&args.out, &file.to_bytes()?)?;
    say!(
        out,
        "wrote {} (family {}, n = {}, seed {})",
        args.out.display(),
        args.family,
        file.n,
        args.seed
    )
}

pub fn report_table(r: &SensitivityReport) -> String {
    let mut s = format!("structure: {}\n", r.pattern.describe());
    s.push_str(&format!(
        "{:>3}  {:>14}  {:>14}  {:>12}  {:>12}\n",
        "i", "re", "im", "kappa", "kappa_S"
    ));
    for (i, z) in r.eigenvalues.iter().enumerate() {
        s.push_str(&format!(
            "{i:>3}  {:>14.6e}  {:>14.6e}  {:>12.4e}  {:>12.4e}\n",
            z.re, z.im, r.kappas[i], r.kappas_structured[i]
        ));
    }
    s.push_str(&format!(
        "epsilon   = {:.4e}  pair ({}, {})\n",
        r.epsilon, r.pair.0, r.pair.1
    ));
    s.push_str(&format!(
        "epsilon_S = {:.4e}  pair ({}, {})",
        r.epsilon_structured, r.pair_structured.0, r.pair_structured.1
    ));
    s
}

pub fn run_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let (m, sys) = load_system(&args.matrix)?;
    let pattern = resolve_structure(args.structure, &m)?;
    let report = analyze(&sys, &pattern)?;
    say!(out, "{}", report_table(&report))?;
    let json = to_json_bytes(&report)?;
    match &args.json {
        Some(p) => write_atomic(p, &json),
        None => out.write_all(&json).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn default_baseline_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.baseline.csv"))
}

/// Oracle window for `epsilon`, clipped to the numerical range box and grown
/// to show every drawn point.
fn svg_window(a: &DenseMatrix, sys: &Eigensystem, epsilon: f64, layers: &[Layer]) -> Result<Window> {
    let padded = default_window(sys, epsilon)?;
    let w = padded.intersect(&enclosing_window(a, epsilon)?).unwrap_or(padded);
    Ok(w.union(&fit_window(layers, sys.eigenvalues())?))
}

pub fn run_approx(args: &ApproxArgs, out: &mut dyn Write) -> Result<()> {
    let (m, sys) = load_system(&args.matrix)?;
    let pattern = resolve_structure(args.structure, &m)?;
    let epsilon = match args.epsilon {
        Some(e) => e,
        None => coalescence_estimate(&sys, &pattern)?.epsilon,
    };
    let target = match (args.pair, args.all) {
        (Some(PairArg(i, j)), _) => SweepTarget::Pair(i, j),
        (None, true) => SweepTarget::All,
        (None, false) => SweepTarget::MostSensitivePair,
    };
    let eta = if args.real_eta {
        EtaMode::Real
    } else {
        EtaMode::Unimodular
    };
    let cfg = SweepConfig::new(epsilon, pattern)?
        .with_angles(args.angles)?
        .with_target(target)
        .with_eta(eta);
    let cloud = sweep_wilkinson(&m.matrix, &sys, &cfg)?;
    let file = CloudFile {
        cloud,
        seed: args.seed,
        eta,
        matrix_sha256: m.sha256.clone(),
    };
    file.write(&args.out)?;
    say!(
        out,
        "wrote {} ({} points, epsilon {}, structure {}, sources {:?})",
        args.out.display(),
        file.cloud.len(),
        fmt_f64(epsilon),
        cfg.pattern.describe(),
        file.cloud.sources()
    )?;

    let mut layers = Vec::new();
    if let Some(samples) = args.baseline {
        let base = random_cloud(&m.matrix, &cfg, samples, args.seed)?;
        let path = args
            .baseline_out
            .clone()
            .unwrap_or_else(|| default_baseline_path(&args.out));
        let bf = CloudFile {
            cloud: base,
            seed: args.seed,
            eta,
            matrix_sha256: m.sha256.clone(),
        };
        bf.write(&path)?;
        say!(out, "wrote {} ({} points)", path.display(), bf.cloud.len())?;
        layers.push(Layer::new("random baseline", bf.cloud.values()));
    }
    layers.push(Layer::new("Wilkinson sweep", file.cloud.values()));

    if let Some(svg_path) = &args.svg {
        let window = svg_window(&m.matrix, &sys, epsilon, &layers)?;
        write_atomic(svg_path, render(&layers, sys.eigenvalues(), Some(window))?.as_bytes())?;
        say!(out, "wrote {}", svg_path.display())?;
    }
    Ok(())
}

/// Grid CSV: header comments then `i_re,i_im,re,im,sigma_min`.
pub fn grid_csv(field: &GridField, matrix_sha256: &str) -> String {
    let w = &field.window;
    let mut s = format!(
        "# window={},{},{},{}\n# res={}x{}\n# matrix_sha256={}\ni_re,i_im,re,im,sigma_min\n",
        fmt_f64(w.re_min),
        fmt_f64(w.re_max),
        fmt_f64(w.im_min),
        fmt_f64(w.im_max),
        field.n_re,
        field.n_im,
        matrix_sha256
    );
    for j in 0..field.n_im {
        for i in 0..field.n_re {
            let z = field.center(i, j);
            s.push_str(&format!(
                "{i},{j},{},{},{}\n",
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(field.value(i, j))
            ));
        }
    }
    s
}

fn oracle_window(
    args: &OracleArgs,
    a: &DenseMatrix,
    sys: &Eigensystem,
    cloud: Option<&PointCloud>,
) -> Result<Window> {
    if let Some(b) = args.bounds {
        return Ok(b.0);
    }
    let eps_list = args.eps_list.as_ref().map_or(&[][..], |e| &e.0[..]);
    let mut eps = eps_list.iter().copied().fold(0.0, f64::max);
    if let Some(c) = cloud {
        eps = eps.max(c.epsilon);
    }
    if eps == 0.0 {
        eps = coalescence_estimate(sys, &StructurePattern::full(sys.dim())?)?.epsilon;
    }
    let padded = default_window(sys, eps)?;
    let mut w = padded.intersect(&enclosing_window(a, eps)?).unwrap_or(padded);
    if let Some(c) = cloud.filter(|c| !c.is_empty()) {
        w = w.union(&Window::around(&c.values(), eps)?);
    }
    Ok(w)
}

pub fn run_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<()> {
    let (m, sys) = load_system(&args.matrix)?;
    let cloud = match &args.check {
        Some(path) => {
            let c = CloudFile::read(path)?;
            if c.matrix_sha256 != m.sha256 {
                return Err(CliError::Validation(format!(
                    "{} was generated from a different matrix (hash {} vs {})",
                    path.display(),
                    c.matrix_sha256,
                    m.sha256
                )));
            }
            if c.cloud.pattern.dim() != m.matrix.dim() {
                return Err(CliError::Validation(format!(
                    "cloud dimension {} does not match matrix order {}",
                    c.cloud.pattern.dim(),
                    m.matrix.dim()
                )));
            }
            Some(c.cloud)
        }
        None => None,
    };

    let want_grid = args.out.is_some() || args.eps_list.is_some();
    if want_grid {
        let window = oracle_window(args, &m.matrix, &sys, cloud.as_ref())?;
        let field = grid_field(&m.matrix, window, (args.res.0, args.res.1))?;
        say!(
            out,
            "grid {}x{} on [{}, {}] x [{}, {}]",
            field.n_re,
            field.n_im,
            window.re_min,
            window.re_max,
            window.im_min,
            window.im_max
        )?;
        if let Some(c) = &cloud {
            if let Some(z) = c.points.iter().map(|p| p.z).find(|z| !window.contains(*z)) {
                return Err(pseudospec_core::Error::OutOfBounds { re: z.re, im: z.im }.into());
            }
        }
        for &eps in args.eps_list.as_ref().map_or(&[][..], |e| &e.0[..]) {
            let cells = field.level_set(eps).iter().filter(|b| **b).count();
            let ab = abscissa_grid(&field, eps)?;
            let edge = field.edge_contact(eps);
            say!(
                out,
                "epsilon {}: {} cells, abscissa {} +/- {}{}",
                fmt_f64(eps),
                cells,
                fmt_f64(ab.value),
                fmt_f64(ab.uncertainty),
                if edge.any() { " (touches window edge)" } else { "" }
            )?;
        }
        if let Some(p) = &args.out {
            write_atomic(p, grid_csv(&field, &m.sha256).as_bytes())?;
            say!(out, "wrote {}", p.display())?;
        }
    }

    if let Some(c) = &cloud {
        let r = cloud_inclusion_check(c, &m.matrix, args.slack)?;
        say!(
            out,
            "pass {:.2}% ({}/{}), max sigma_min/epsilon {:.6}",
            r.pass_percent(),
            r.passed,
            r.total,
            r.max_ratio
        )?;
        if let Some(v) = &r.worst {
            return Err(CliError::CheckFailed(format!(
                "{} points outside the epsilon-pseudospectrum; worst #{} at {}{:+}i with sigma_min {}",
                r.failed,
                v.index,
                v.z.re,
                v.z.im,
                fmt_f64(v.sigma)
            )));
        }
    }
    Ok(())
}

pub fn run_trajectory(args: &TrajectoryArgs, out: &mut dyn Write) -> Result<()> {
    if !(args.eps_max > 0.0 && args.eps_max.is_finite()) {
        return Err(CliError::Validation(format!(
            "--eps-max must be positive, got {}",
            args.eps_max
        )));
    }
    if args.steps == 0 {
        return Err(CliError::Validation("--steps must be at least 1".into()));
    }
    let (m, sys) = load_system(&args.matrix)?;
    let pattern = resolve_structure(args.structure, &m)?;
    let n = m.matrix.dim();
    let e = ones_direction(n, &StructurePattern::full(n)?)?;
    let grid: Vec<f64> = (1..=args.steps)
        .map(|k| args.eps_max * k as f64 / args.steps as f64)
        .collect();
    let cloud = first_order_trajectories(&sys, &e, &grid, &pattern)?;
    let file = CloudFile {
        cloud,
        seed: 0,
        eta: EtaMode::Unimodular,
        matrix_sha256: m.sha256.clone(),
    };
    file.write(&args.out)?;
    say!(out, "wrote {} ({} points)", args.out.display(), file.cloud.len())?;
    if let Some(svg_path) = &args.svg {
        let pick = |s: usize| -> Vec<Complex64> {
            file.cloud
                .points
                .iter()
                .filter(|p| p.sample_index == s)
                .map(|p| p.z)
                .collect()
        };
        let mut layers = vec![Layer::new("ones direction", pick(0))];
        if file.cloud.samples > 1 {
            layers.push(Layer::new(
                format!("projected onto {}", pattern.describe()),
                pick(1),
            ));
        }
        let window = svg_window(&m.matrix, &sys, args.eps_max, &layers)?;
        write_atomic(svg_path, render(&layers, sys.eigenvalues(), Some(window))?.as_bytes())?;
        say!(out, "wrote {}", svg_path.display())?;
    }
    Ok(())
}
