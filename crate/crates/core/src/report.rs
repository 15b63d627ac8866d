//! Experiment configs, the fixed-order check runner, and report
//! emission (JSON, CSV spectrum tables, SVG plots).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::eigensolve::{self, SpectrumResult};
use crate::error::{Error, Result};
use crate::geometry::Cp1Mode;
use crate::holomorphic::{self, HoloFunction};
use crate::identities::{self, BochnerInput, IdentityReport};
use crate::operators::{self, AssembledOperator, DiscreteBasis};
use crate::poly::{CPoly, Polynomial};
use crate::quad::QuadratureRule;
use crate::spaces::{self, ModelSpace, SpaceKind};
use crate::toric;

pub const SCHEMA_VERSION: u32 = 1;
pub const CHECK_ORDER: [&str; 5] = ["spectrum", "bounds", "identities", "holomorphy", "toric"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_solver_tol")]
    pub solver: f64,
    #[serde(default = "default_cluster_tol")]
    pub cluster: f64,
    #[serde(default = "default_zero_tol")]
    pub zero: f64,
    #[serde(default = "default_identity_tol")]
    pub identity: f64,
}

fn default_solver_tol() -> f64 {
    1e-8
}
fn default_cluster_tol() -> f64 {
    1e-6
}
fn default_zero_tol() -> f64 {
    1e-8
}
fn default_identity_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: default_solver_tol(),
            cluster: default_cluster_tol(),
            zero: default_zero_tol(),
            identity: default_identity_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Space descriptor, e.g. "gaussian:n=2,lambda=0.5".
    #[serde(default)]
    pub space: Option<String>,
    /// Basis descriptor; a per-space default is chosen when absent.
    #[serde(default)]
    pub basis: Option<String>,
    #[serde(default = "default_eigencount")]
    pub eigencount: usize,
    /// Any of spectrum | bounds | identities | holomorphy | toric | all.
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Quadrature resolution; per-space default when absent.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
    /// Polytope JSON path for the toric check.
    #[serde(default)]
    pub polytope: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_eigencount() -> usize {
    8
}
fn default_checks() -> Vec<String> {
    vec!["all".into()]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Checks to run, expanded and in the fixed execution order.
    pub fn requested_checks(&self) -> Result<Vec<&'static str>> {
        let mut wanted = Vec::new();
        for c in &self.checks {
            match c.as_str() {
                "all" => wanted.extend(CHECK_ORDER),
                known if CHECK_ORDER.contains(&known) => {
                    wanted.push(CHECK_ORDER.iter().find(|k| **k == known).copied().unwrap())
                }
                unknown => {
                    return Err(Error::ConfigInvalid(format!("unknown check `{unknown}`")))
                }
            }
        }
        let mut ordered: Vec<&'static str> =
            CHECK_ORDER.iter().copied().filter(|c| wanted.contains(c)).collect();
        ordered.dedup();
        Ok(ordered)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in
            [("solver", t.solver), ("cluster", t.cluster), ("zero", t.zero), ("identity", t.identity)]
        {
            if !(v > 0.0) {
                return Err(Error::ConfigInvalid(format!("tolerance `{name}` must be positive")));
            }
        }
        if self.eigencount == 0 {
            return Err(Error::ConfigInvalid("eigencount must be at least 1".into()));
        }
        let wanted = self.requested_checks()?;
        let needs_space = wanted.iter().any(|c| *c != "toric");
        if needs_space && self.space.is_none() {
            return Err(Error::ConfigInvalid("no `space` descriptor in config".into()));
        }
        if self.checks.iter().any(|c| c == "toric") && self.polytope.is_none() {
            return Err(Error::ConfigInvalid(
                "the toric check needs a `polytope` file path".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// PASS, FAIL, or SKIPPED.
    pub status: &'static str,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckResult>,
    pub wall_time_ms: f64,
    pub version: String,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != "FAIL")
    }
}

fn default_basis(space: &ModelSpace) -> DiscreteBasis {
    match &space.kind {
        SpaceKind::GaussianEuclidean { .. } => DiscreteBasis::HermiteTensor { degree: 30 },
        SpaceKind::RoundSphere { .. } => DiscreteBasis::SphericalHarmonics { lmax: 12 },
        SpaceKind::SphereGaussianProduct { .. } => {
            DiscreteBasis::ProductBasis { lmax: 8, degree: 12 }
        }
        SpaceKind::ComplexGaussian { .. } => DiscreteBasis::MonomialFock { degree: 5 },
        SpaceKind::FanoCp1 { .. } => DiscreteBasis::FourierLatitudeGrid { lmax: 24 },
    }
}

fn default_resolution(space: &ModelSpace) -> usize {
    match &space.kind {
        SpaceKind::GaussianEuclidean { .. } => 60,
        SpaceKind::RoundSphere { .. } | SpaceKind::SphereGaussianProduct { .. } => 64,
        SpaceKind::ComplexGaussian { .. } => 24,
        SpaceKind::FanoCp1 { .. } => 200,
    }
}

fn json_of<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

struct Session {
    space: ModelSpace,
    rule: QuadratureRule,
    op: AssembledOperator,
    spectrum: SpectrumResult,
}

fn spectrum_summary(s: &SpectrumResult) -> serde_json::Value {
    serde_json::json!({
        "eigenvalues": s.eigenvalues,
        "clusters": s.clusters,
        "residuals": s.residuals,
        "cluster_tol": s.cluster_tol,
    })
}

fn identity_suite(session: &Session, seed: u64) -> Result<Vec<IdentityReport>> {
    let space = &session.space;
    let rule = &session.rule;
    let mut reports = vec![operators::selfadjointness_report(&session.op, 100, seed)];
    match &space.kind {
        SpaceKind::GaussianEuclidean { n, lambda } => {
            let mut u = Polynomial::var(*n, 0);
            if *n > 1 {
                u = u.add(&Polynomial::var(*n, 0).mul(&Polynomial::var(*n, 1)).scale(0.7));
            } else {
                let sq = Polynomial::var(1, 0).mul(&Polynomial::var(1, 0));
                u = u.add(&sq.scale(0.4));
            }
            reports.push(identities::bochner_residual_real(space, &BochnerInput::Poly(u), rule)?);
            reports.push(identities::soliton_identity_residual(space, rule, false)?);
            if *n == 1 {
                let raw = Polynomial::constant(1, 1.0)
                    .add(&Polynomial::var(1, 0).scale(0.25 * lambda.sqrt()));
                let nu = identities::normalize_for_lsi(space, &raw)?;
                reports.push(identities::lsi_deficit(space, &nu, None)?);
            }
        }
        SpaceKind::RoundSphere { .. } => {
            reports.push(identities::bochner_residual_real(
                space,
                &BochnerInput::Harmonic { l: 2, m: 1 },
                rule,
            )?);
        }
        SpaceKind::SphereGaussianProduct { .. } => {
            reports.push(identities::soliton_identity_residual(space, rule, true)?);
        }
        SpaceKind::ComplexGaussian { n } => {
            let mut u = CPoly::zbar(*n, 0);
            if *n > 1 {
                u = u.add(&CPoly::zbar(*n, 0).mul(&CPoly::z(*n, 1)).scale(0.5.into()));
            }
            reports.push(identities::complex_identity_residual(space, &u, rule)?);
            reports.push(identities::soliton_identity_residual(space, rule, false)?);
        }
        SpaceKind::FanoCp1 { .. } => {}
    }
    Ok(reports)
}

fn first_cluster_functions(session: &Session) -> Result<Vec<HoloFunction>> {
    let zero_tol = eigensolve::default_zero_tol(&session.spectrum);
    let first = session
        .spectrum
        .clusters
        .iter()
        .find(|c| c.value > zero_tol)
        .ok_or(Error::AllZero)?;
    first
        .members
        .iter()
        .map(|&i| {
            let v = &session.spectrum.eigenvectors[i];
            match &session.space.kind {
                SpaceKind::FanoCp1 { .. } => {
                    let modes: Vec<Cp1Mode> = operators::eigenvector_cp1_modes(&session.op, v, 1e-8)?;
                    Ok(HoloFunction::Cp1(
                        modes.into_iter().map(|m| (Complex64::ONE, m)).collect(),
                    ))
                }
                SpaceKind::ComplexGaussian { .. } => {
                    Ok(HoloFunction::Cn(operators::eigenvector_cpoly(&session.op, v)?))
                }
                _ => Err(Error::Unsupported("holomorphy needs a complex-convention space".into())),
            }
        })
        .collect()
}

fn holomorphy_check(session: &Session) -> Result<serde_json::Value> {
    let us = first_cluster_functions(session)?;
    let mut entries = Vec::new();
    let mut pass = true;
    for u in &us {
        let rep = holomorphic::holomorphy_defect(&session.space, u, &session.rule)?;
        pass &= rep.pass();
        let mut entry = serde_json::json!({
            "dbar_defect": rep.dbar_defect,
            "eigen_residual": rep.eigen_residual,
            "verdict": rep.verdict,
        });
        if matches!(session.space.kind, SpaceKind::FanoCp1 { .. }) {
            let fe = holomorphic::futaki_from_eigenfunction(&session.space, u, &session.rule)?;
            let fp = holomorphic::futaki_from_potential(&session.space, u, &session.rule)?;
            let agree = (fe - fp).norm() <= 1e-6;
            pass &= fe.norm() <= 1e-6 && fp.norm() <= 1e-6 && agree;
            entry["futaki_from_eigenfunction"] = json_of(&[fe.re, fe.im]);
            entry["futaki_from_potential"] = json_of(&[fp.re, fp.im]);
            entry["routes_agree"] = json_of(&agree);
        }
        entries.push(entry);
    }
    Ok(serde_json::json!({ "eigenfunctions": entries, "pass": pass }))
}

fn toric_check(path: &str) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)?;
    let p = toric::load_polytope(&text)?;
    let verdict = toric::futaki_vanishes(&p, 0.0);
    let barycenter: Vec<String> = toric::barycenter(&p).iter().map(|r| r.to_string()).collect();
    Ok(serde_json::json!({
        "dimension": p.dimension,
        "vertices": p.vertices.iter().map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "volume": toric::volume(&p).to_string(),
        "volume_f64": toric::volume_f64(&p),
        "barycenter": barycenter,
        "barycenter_f64": toric::barycenter_f64(&p),
        "verdict": match &verdict {
            toric::FutakiVerdict::Vanishes => "VANISHES".to_string(),
            toric::FutakiVerdict::Nonzero(b) => format!(
                "NONZERO({})",
                b.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
            ),
        },
    }))
}

/// Executes the requested checks in the fixed order
/// spectrum -> bounds -> identities -> holomorphy -> toric.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let started = std::time::Instant::now();
    let wanted = config.requested_checks()?;

    let session = match &config.space {
        Some(desc) => {
            let space = spaces::make_space(desc)?;
            let basis = match &config.basis {
                Some(b) => DiscreteBasis::parse(b)?,
                None => default_basis(&space),
            };
            let resolution = config.resolution.unwrap_or_else(|| default_resolution(&space));
            let rule = spaces::default_rule(&space, resolution);
            let op = operators::assemble(&space, &basis, &rule)?;
            let spectrum = eigensolve::spectrum(&op, config.eigencount, config.tolerances.solver)?;
            Some(Session { space, rule, op, spectrum })
        }
        None => None,
    };

    let mut checks = Vec::new();
    for name in wanted {
        let result = match (name, &session) {
            ("spectrum", Some(s)) => CheckResult {
                name,
                status: "PASS",
                details: spectrum_summary(&s.spectrum),
            },
            ("bounds", Some(s)) => match eigensolve::check_lower_bound(&s.spectrum, &s.space) {
                Ok(rep) => CheckResult {
                    name,
                    status: if rep.pass { "PASS" } else { "FAIL" },
                    details: json_of(&rep),
                },
                Err(Error::Unsupported(reason)) => CheckResult {
                    name,
                    status: "SKIPPED",
                    details: serde_json::json!({ "reason": reason }),
                },
                Err(e) => CheckResult {
                    name,
                    status: "FAIL",
                    details: serde_json::json!({ "error": e.to_string() }),
                },
            },
            ("identities", Some(s)) => match identity_suite(s, config.seed) {
                Ok(reports) => CheckResult {
                    name,
                    status: if reports.iter().all(IdentityReport::verdict_pass) {
                        "PASS"
                    } else {
                        "FAIL"
                    },
                    details: json_of(&reports),
                },
                Err(e) => CheckResult {
                    name,
                    status: "FAIL",
                    details: serde_json::json!({ "error": e.to_string() }),
                },
            },
            ("holomorphy", Some(s)) => {
                if matches!(
                    s.space.kind,
                    SpaceKind::FanoCp1 { .. } | SpaceKind::ComplexGaussian { .. }
                ) {
                    match holomorphy_check(s) {
                        Ok(details) => CheckResult {
                            name,
                            status: if details["pass"].as_bool().unwrap_or(false) {
                                "PASS"
                            } else {
                                "FAIL"
                            },
                            details,
                        },
                        Err(e) => CheckResult {
                            name,
                            status: "FAIL",
                            details: serde_json::json!({ "error": e.to_string() }),
                        },
                    }
                } else {
                    CheckResult {
                        name,
                        status: "SKIPPED",
                        details: serde_json::json!({
                            "reason": "holomorphy applies to complex-convention spaces only"
                        }),
                    }
                }
            }
            ("toric", _) => match &config.polytope {
                Some(path) => match toric_check(path) {
                    Ok(details) => CheckResult { name, status: "PASS", details },
                    Err(e) => CheckResult {
                        name,
                        status: "FAIL",
                        details: serde_json::json!({ "error": e.to_string() }),
                    },
                },
                None => CheckResult {
                    name,
                    status: "SKIPPED",
                    details: serde_json::json!({ "reason": "no polytope file configured" }),
                },
            },
            _ => CheckResult {
                name,
                status: "SKIPPED",
                details: serde_json::json!({ "reason": "no space configured" }),
            },
        };
        checks.push(result);
    }

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        checks,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };

    if let Some(dir) = &config.out {
        write_outputs(&report, session.as_ref().map(|s| &s.spectrum), Path::new(dir))?;
    }
    Ok(report)
}

fn write_outputs(report: &RunReport, spectrum: Option<&SpectrumResult>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(dir.join("report.json"), json + "\n")?;
    if let Some(s) = spectrum {
        std::fs::write(dir.join("spectrum.csv"), spectrum_csv(s))?;
    }
    Ok(())
}

pub fn spectrum_csv(s: &SpectrumResult) -> String {
    let mut out = String::from("index,eigenvalue,cluster_id,multiplicity,residual\n");
    for (i, lam) in s.eigenvalues.iter().enumerate() {
        let (cid, mult) = s
            .clusters
            .iter()
            .enumerate()
            .find(|(_, c)| c.members.contains(&i))
            .map(|(cid, c)| (cid, c.multiplicity))
            .unwrap_or((usize::MAX, 0));
        out.push_str(&format!("{i},{:.16e},{cid},{mult},{:.3e}\n", lam, s.residuals[i]));
    }
    out
}

/// Eigenvalue-ladder and multiplicity-staircase SVG plots.
pub fn emit_plots(spectrum: &SpectrumResult, dir: &Path) -> Result<()> {
    if spectrum.eigenvalues.is_empty() {
        return Err(Error::NoSpectrumData);
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("ladder.svg"), ladder_svg(spectrum))?;
    std::fs::write(dir.join("staircase.svg"), staircase_svg(spectrum))?;
    Ok(())
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 400.0;
const MARGIN: f64 = 48.0;

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{title}</text>\n"
    )
}

fn ladder_svg(s: &SpectrumResult) -> String {
    let n = s.eigenvalues.len();
    let ymax = s.eigenvalues.last().copied().unwrap_or(1.0).max(1e-12);
    let x = |i: usize| MARGIN + (PLOT_W - 2.0 * MARGIN) * i as f64 / (n.max(2) - 1) as f64;
    let y = |v: f64| PLOT_H - MARGIN - (PLOT_H - 2.0 * MARGIN) * v / ymax;
    let mut svg = svg_header("eigenvalue ladder");
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        PLOT_H - MARGIN,
        PLOT_W - MARGIN
    ));
    for (i, v) in s.eigenvalues.iter().enumerate() {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\"/>\n",
            x(i),
            y(*v)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn staircase_svg(s: &SpectrumResult) -> String {
    let ymax = s.clusters.iter().map(|c| c.multiplicity).max().unwrap_or(1) as f64;
    let xmax = s.eigenvalues.last().copied().unwrap_or(1.0).max(1e-12);
    let x = |v: f64| MARGIN + (PLOT_W - 2.0 * MARGIN) * v / xmax;
    let y = |m: f64| PLOT_H - MARGIN - (PLOT_H - 2.0 * MARGIN) * m / ymax;
    let mut svg = svg_header("cluster multiplicity staircase");
    for c in &s.clusters {
        let m = c.multiplicity as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"firebrick\" stroke-width=\"3\"/>\n",
            x(c.value) - 6.0,
            y(m),
            x(c.value) + 6.0,
            y(m)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(space: &str, checks: &[&str]) -> ExperimentConfig {
        ExperimentConfig {
            space: Some(space.into()),
            basis: None,
            eigencount: 6,
            checks: checks.iter().map(|s| s.to_string()).collect(),
            seed: 7,
            resolution: None,
            out: None,
            polytope: None,
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn gaussian_bounds_report() {
        let mut cfg = config("gaussian:n=2,lambda=0.5", &["bounds"]);
        cfg.basis = Some("hermite:deg=12".into());
        let report = run(&cfg).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert_eq!(report.checks[0].status, "PASS");
        let d = &report.checks[0].details;
        assert!((d["lambda1"].as_f64().unwrap() - 0.5).abs() <= 1e-8);
        assert_eq!(d["multiplicity"].as_u64().unwrap(), 2);
    }

    #[test]
    fn fano_bounds_and_holomorphy() {
        let mut cfg = config("fano-cp1:pert=0", &["bounds", "holomorphy"]);
        cfg.basis = Some("fourier:lmax=10".into());
        let report = run(&cfg).unwrap();
        assert!(report.all_pass(), "{:?}", report.checks);
        let b = &report.checks[0].details;
        assert!((b["lambda1"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
        assert_eq!(b["multiplicity"].as_u64().unwrap(), 3);
    }

    #[test]
    fn config_validation_failures() {
        let mut cfg = config("gaussian:n=1,lambda=0.5", &["bounds"]);
        cfg.eigencount = 0;
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
        let mut cfg = config("gaussian:n=1,lambda=0.5", &["nonsense"]);
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
        cfg.checks = vec!["toric".into()];
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
        let cfg = ExperimentConfig::from_toml("space = \"gaussian:n=1,lambda=0.5\"\nbogus = 1");
        assert!(matches!(cfg, Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn empty_spectrum_has_no_plots() {
        let empty = SpectrumResult {
            eigenvalues: vec![],
            clusters: vec![],
            eigenvectors: vec![],
            residuals: vec![],
            cluster_tol: 1e-6,
        };
        let dir = std::env::temp_dir().join("spectral-lab-noplot");
        assert!(matches!(emit_plots(&empty, &dir), Err(Error::NoSpectrumData)));
    }
}
