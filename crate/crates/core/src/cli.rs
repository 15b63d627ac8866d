//! Command-line front end: subcommand parsing, flag-over-config
//! overrides, and the exit-status contract (0 all PASS, 1 any FAIL,
//! 2 invalid configuration).

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::report::{self, ExperimentConfig, RunReport};
use crate::spaces;

#[derive(Debug, Parser)]
#[command(name = "spectral-lab", version, about = "Weighted-Laplacian spectral laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct RunFlags {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json / spectrum.csv / plots.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides config).
    #[arg(long)]
    seed: Option<u64>,
    /// Solver tolerance (overrides config).
    #[arg(long)]
    tol: Option<f64>,
    /// Number of eigenpairs (overrides config).
    #[arg(long)]
    eigs: Option<usize>,
    /// Space descriptor (overrides config), e.g. gaussian:n=2,lambda=0.5.
    #[arg(long)]
    space: Option<String>,
    /// Basis descriptor (overrides config), e.g. hermite:deg=30.
    #[arg(long)]
    basis: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the eigenproblem and write the spectrum table.
    Spectrum(RunFlags),
    /// Run the configured verification checks.
    Verify(RunFlags),
    /// Evaluate the toric Futaki criterion on a polytope file.
    Toric {
        /// Polytope JSON file {"vertices": [[q, ...], ...]}.
        polytope: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the space catalog.
    ListSpaces,
    /// Solve the eigenproblem and emit SVG plots.
    Plot(RunFlags),
}

fn load_config(flags: &RunFlags) -> Result<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::from_toml("")?,
    };
    if let Some(s) = &flags.space {
        cfg.space = Some(s.clone());
    }
    if let Some(b) = &flags.basis {
        cfg.basis = Some(b.clone());
    }
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = flags.tol {
        cfg.tolerances.solver = tol;
    }
    if let Some(eigs) = flags.eigs {
        cfg.eigencount = eigs;
    }
    if let Some(out) = &flags.out {
        cfg.out = Some(out.display().to_string());
    }
    Ok(cfg)
}

fn print_outcome(report: &RunReport) {
    for c in &report.checks {
        println!("{:<12} {}", c.name, c.status);
        if c.status == "FAIL" {
            println!("  {}", c.details);
        }
    }
}

fn exit_code(result: Result<RunReport>) -> i32 {
    match result {
        Ok(report) => {
            print_outcome(&report);
            if report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e @ (Error::ConfigInvalid(_) | Error::MalformedFile(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_spectrum(flags: &RunFlags, plots: bool) -> i32 {
    let cfg = match load_config(flags) {
        Ok(mut cfg) => {
            cfg.checks = vec!["spectrum".into()];
            cfg
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let code = exit_code(report::run(&cfg));
    if code == 0 && plots {
        // re-derive the spectrum for plotting through the same entry point
        if let Err(e) = plot_from_config(&cfg) {
            eprintln!("error: {e}");
            return 1;
        }
    }
    code
}

fn plot_from_config(cfg: &ExperimentConfig) -> Result<()> {
    use crate::operators::DiscreteBasis;
    let desc = cfg
        .space
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("no `space` descriptor in config".into()))?;
    let space = spaces::make_space(desc)?;
    let basis = match &cfg.basis {
        Some(b) => DiscreteBasis::parse(b)?,
        None => return Err(Error::ConfigInvalid("plotting needs an explicit basis".into())),
    };
    let resolution = cfg.resolution.unwrap_or(200);
    let rule = spaces::default_rule(&space, resolution);
    let op = crate::operators::assemble(&space, &basis, &rule)?;
    let s = crate::eigensolve::spectrum(&op, cfg.eigencount, cfg.tolerances.solver)?;
    let dir = PathBuf::from(cfg.out.clone().unwrap_or_else(|| ".".into()));
    report::emit_plots(&s, &dir)
}

fn run_plot(flags: &RunFlags) -> i32 {
    let mut cfg = match load_config(flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if cfg.basis.is_none() {
        if let Ok(space) = cfg.space.as_deref().map(spaces::make_space).transpose() {
            if let Some(space) = space {
                cfg.basis = Some(default_basis_name(&space));
            }
        }
    }
    match plot_from_config(&cfg) {
        Ok(()) => 0,
        Err(e @ Error::ConfigInvalid(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn default_basis_name(space: &spaces::ModelSpace) -> String {
    use crate::spaces::SpaceKind;
    match &space.kind {
        SpaceKind::GaussianEuclidean { .. } => "hermite:deg=30".into(),
        SpaceKind::RoundSphere { .. } => "harmonics:lmax=12".into(),
        SpaceKind::SphereGaussianProduct { .. } => "product:lmax=8,deg=12".into(),
        SpaceKind::ComplexGaussian { .. } => "fock:deg=5".into(),
        SpaceKind::FanoCp1 { .. } => "fourier:lmax=24".into(),
    }
}

fn run_toric(polytope: &PathBuf, tol: f64, out: Option<&PathBuf>) -> i32 {
    let inner = || -> Result<i32> {
        let text = std::fs::read_to_string(polytope)
            .map_err(|e| Error::MalformedFile(format!("{}: {e}", polytope.display())))?;
        let p = crate::toric::load_polytope(&text)?;
        let verdict = crate::toric::futaki_vanishes(&p, tol);
        let line = match &verdict {
            crate::toric::FutakiVerdict::Vanishes => "VANISHES".to_string(),
            crate::toric::FutakiVerdict::Nonzero(b) => format!(
                "NONZERO({})",
                b.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
            ),
        };
        println!(
            "volume = {}  barycenter = ({})  {line}",
            crate::toric::volume(&p),
            crate::toric::barycenter(&p)
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            let doc = serde_json::json!({
                "schema_version": report::SCHEMA_VERSION,
                "verdict": line,
                "volume": crate::toric::volume_f64(&p),
                "barycenter": crate::toric::barycenter_f64(&p),
            });
            std::fs::write(dir.join("toric.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
        }
        Ok(0)
    };
    match inner() {
        Ok(code) => code,
        Err(e @ (Error::MalformedFile(_) | Error::ConfigInvalid(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    match &cli.command {
        Command::Spectrum(flags) => run_spectrum(flags, false),
        Command::Verify(flags) => {
            let cfg = match load_config(flags) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            exit_code(report::run(&cfg))
        }
        Command::Toric { polytope, tol, out } => run_toric(polytope, *tol, out.as_ref()),
        Command::ListSpaces => {
            print!("{}", spaces::list_spaces());
            0
        }
        Command::Plot(flags) => run_plot(flags),
    }
}
