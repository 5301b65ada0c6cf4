//! Run configuration: a flat TOML document with kernel, grid, initial-datum,
//! solver, checks and output sections, validated against the module
//! preconditions at load time.

use anyhow::{bail, Context, Result};
use nordheim_core::collide::CutoffParams;
use nordheim_core::grid::{AngularQuadrature, DistributionState, VelocityGrid};
use nordheim_core::kernel::{KernelFamily, KernelSpec, PsiHat};
use nordheim_core::march::{Monitor, Scheme, SolverConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub family: String,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "three")]
    pub beta: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub psi_table_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub extent: f64,
    pub points_per_axis: usize,
    #[serde(default = "four")]
    pub polar_nodes: usize,
    #[serde(default = "eight")]
    pub azimuth_nodes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: String,
    pub mass: Option<f64>,
    pub temperature: Option<f64>,
    pub temperatures: Option<[f64; 3]>,
    pub radius: Option<f64>,
    pub height: Option<f64>,
    pub masses: Option<[f64; 2]>,
    pub temps: Option<[f64; 2]>,
    pub centers: Option<[[f64; 3]; 2]>,
    pub path: Option<PathBuf>,
    /// Optional multiplier λ applied to the datum.
    #[serde(default = "one")]
    pub scale: f64,
    /// Shift to zero mean velocity after construction.
    #[serde(default)]
    pub center: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "dt_default")]
    pub dt_output: f64,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "picard_tol_default")]
    pub picard_tol: f64,
    #[serde(default = "picard_iter_default")]
    pub picard_max_iter: usize,
    #[serde(default = "four")]
    pub substeps_per_interval: usize,
    #[serde(default)]
    pub renormalize_conservation: bool,
    /// Kernel/value ceiling n for the cutoff scheme; omit for ∞.
    pub n_ceiling: Option<f64>,
    /// Bracket ceiling K; omit for K* = 1/(4β+2).
    pub k_ceiling: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            scheme: default_scheme(),
            dt_output: dt_default(),
            t_end: 1.0,
            picard_tol: picard_tol_default(),
            picard_max_iter: picard_iter_default(),
            substeps_per_interval: 4,
            renormalize_conservation: false,
            n_ceiling: None,
            k_ceiling: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default = "default_monitors")]
    pub monitors: Vec<String>,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        ChecksSection {
            monitors: default_monitors(),
            slack: default_slack(),
            drift_tol: default_drift_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: bool,
}

fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}
fn four() -> usize {
    4
}
fn eight() -> usize {
    8
}
fn default_scheme() -> String {
    "duhamel".to_string()
}
fn dt_default() -> f64 {
    0.1
}
fn picard_tol_default() -> f64 {
    1e-10
}
fn picard_iter_default() -> usize {
    60
}
fn default_monitors() -> Vec<String> {
    vec!["moment_envelope".into(), "l13_uniform".into()]
}
fn default_slack() -> f64 {
    1.05
}
fn default_drift_tol() -> f64 {
    1e-3
}

/// Everything a run needs, built and validated from one config file.
pub struct Prepared {
    pub spec: KernelSpec,
    pub quad: AngularQuadrature,
    pub initial: DistributionState,
    pub solver: SolverConfig,
    pub params: CutoffParams,
    pub monitors: Vec<Monitor>,
    pub snapshots: bool,
    pub out_dir: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: RunConfig = toml::from_str(&text).context("config parse error")?;
    Ok(cfg)
}

pub fn prepare(cfg: &RunConfig, config_dir: &Path) -> Result<Prepared> {
    let spec = build_kernel(&cfg.kernel, config_dir)?;
    spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;

    let grid = VelocityGrid::new(cfg.grid.extent, cfg.grid.points_per_axis)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let quad = AngularQuadrature::gauss_legendre_product(cfg.grid.polar_nodes, cfg.grid.azimuth_nodes)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let initial = build_initial(&cfg.initial, grid, config_dir)?;
    let m = initial.moments();
    if !(m.m0 > 0.0) {
        bail!("initial datum violates the precondition M0(f0) > 0");
    }
    if !(m.m2 > 0.0) {
        bail!("initial datum violates the precondition M2(f0) > 0");
    }

    let scheme = match cfg.solver.scheme.as_str() {
        "duhamel" | "duhamel_intermediate" => Scheme::DuhamelIntermediate,
        "picard" | "picard_cutoff" => Scheme::PicardCutoff,
        "euler" | "explicit_euler" => Scheme::ExplicitEuler,
        other => bail!("unknown scheme '{other}' (duhamel | picard | euler)"),
    };
    let solver = SolverConfig {
        scheme,
        dt_output: cfg.solver.dt_output,
        t_end: cfg.solver.t_end,
        picard_tol: cfg.solver.picard_tol,
        picard_max_iter: cfg.solver.picard_max_iter,
        substeps_per_interval: cfg.solver.substeps_per_interval,
        renormalize_conservation: cfg.solver.renormalize_conservation,
    };
    solver.validate().map_err(|e| anyhow::anyhow!("{e}"))?;

    let k = cfg
        .solver
        .k_ceiling
        .unwrap_or_else(|| nordheim_core::bounds::k_star(spec.beta));
    let n = cfg.solver.n_ceiling.unwrap_or(f64::INFINITY);
    if scheme == Scheme::PicardCutoff && !n.is_finite() {
        bail!("the Picard scheme needs a finite solver.n_ceiling");
    }
    let params = CutoffParams::cutoff(n, k);
    params.validate().map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut monitors = Vec::new();
    for name in &cfg.checks.monitors {
        match name.as_str() {
            "moment_envelope" => monitors.push(Monitor::MomentEnvelope {
                slack: cfg.checks.slack,
            }),
            "l13_uniform" => monitors.push(Monitor::L13Uniform {
                slack: cfg.checks.slack,
            }),
            "linf_ceiling" => {
                let report = nordheim_core::bounds::evaluate_condition(&m, &spec)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                monitors.push(Monitor::LinfCeiling {
                    ceiling: report.predicted_sup,
                });
            }
            "conservation_drift" => monitors.push(Monitor::ConservationDrift {
                tol: cfg.checks.drift_tol,
            }),
            other => bail!("unknown monitor '{other}'"),
        }
    }

    Ok(Prepared {
        spec,
        quad,
        initial,
        solver,
        params,
        monitors,
        snapshots: cfg.output.snapshots,
        out_dir: cfg.output.directory.clone(),
    })
}

fn build_kernel(section: &KernelSection, config_dir: &Path) -> Result<KernelSpec> {
    let family = match section.family.as_str() {
        "hard_sphere" => KernelFamily::HardSphere,
        "screened_delta" => {
            let psi = match &section.psi_table_path {
                Some(rel) => {
                    let path = config_dir.join(rel);
                    let (xi, val) = crate::stateio::read_psi_table(&path)?;
                    PsiHat::table(xi, val).map_err(|e| anyhow::anyhow!("{e}"))?
                }
                None => PsiHat::yukawa(),
            };
            KernelFamily::ScreenedDelta { psi }
        }
        other => bail!("unknown kernel family '{other}' (hard_sphere | screened_delta)"),
    };
    Ok(KernelSpec {
        family,
        a: section.a,
        b: section.b,
        beta: section.beta,
        hbar: section.hbar,
    })
}

fn build_initial(
    section: &InitialSection,
    grid: VelocityGrid,
    config_dir: &Path,
) -> Result<DistributionState> {
    let base = match section.kind.as_str() {
        "gaussian" => {
            let mass = section.mass.context("gaussian needs initial.mass")?;
            let t = section
                .temperature
                .context("gaussian needs initial.temperature")?;
            DistributionState::gaussian_iso(grid, mass, t).map_err(|e| anyhow::anyhow!("{e}"))?
        }
        "anisotropic_gaussian" => {
            let mass = section.mass.context("anisotropic_gaussian needs initial.mass")?;
            let temps = section
                .temperatures
                .context("anisotropic_gaussian needs initial.temperatures")?;
            DistributionState::gaussian_aniso(grid, mass, temps)
                .map_err(|e| anyhow::anyhow!("{e}"))?
        }
        "ball" => {
            let radius = section.radius.context("ball needs initial.radius")?;
            let height = section.height.context("ball needs initial.height")?;
            DistributionState::ball_indicator(grid, radius, height)
                .map_err(|e| anyhow::anyhow!("{e}"))?
        }
        "two_maxwellian" => {
            let masses = section.masses.context("two_maxwellian needs initial.masses")?;
            let temps = section.temps.context("two_maxwellian needs initial.temps")?;
            let centers = section
                .centers
                .context("two_maxwellian needs initial.centers")?;
            DistributionState::two_maxwellian(grid, masses, temps, centers)
                .map_err(|e| anyhow::anyhow!("{e}"))?
        }
        "raw" => {
            let rel = section.path.as_ref().context("raw needs initial.path")?;
            let path = config_dir.join(rel);
            let state = crate::stateio::read_state(&path)?;
            if state.grid() != grid {
                bail!(
                    "raw state grid ({} points, extent {}) does not match [grid] section",
                    state.grid().points_per_axis(),
                    state.grid().extent()
                );
            }
            state
        }
        other => bail!("unknown initial kind '{other}'"),
    };
    let mut state = if (section.scale - 1.0).abs() > 0.0 {
        if !(section.scale > 0.0) {
            bail!("initial.scale must be positive");
        }
        DistributionState::from_values(
            grid,
            base.values().iter().map(|v| v * section.scale).collect(),
            base.time(),
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?
    } else {
        base
    };
    if section.center {
        state = nordheim_core::grid::zero_mean_shift(&state)
            .map_err(|e| anyhow::anyhow!("{e}"))?
            .state;
    }
    Ok(state)
}
