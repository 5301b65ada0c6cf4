//! Time marching: Picard fixed-point iteration of the cutoff integral map on
//! contraction intervals, a positivity-preserving exponential (Duhamel)
//! integrator for the intermediate equation, and a forward-Euler reference.

use crate::collide::{self, CutoffParams};
use crate::grid::{AngularQuadrature, DistributionState, MomentVector, VelocityGrid};
use crate::kernel::KernelSpec;
use crate::{Error, Result};
use serde::Serialize;

/// Time-advance scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// Fixed-point iteration of J(f) = f₀ + ∫ Q_{n,K}(f), restarted interval
    /// by interval; requires finite n and K.
    PicardCutoff,
    /// Frozen-coefficient exponential Euler for ∂f = Q_K⁺ − f·L_K.
    DuhamelIntermediate,
    /// Forward Euler on the selected operator family (reference scheme).
    ExplicitEuler,
}

/// Solver knobs. The inner step of the Duhamel/Euler schemes is
/// `dt_output / substeps_per_interval`; for Picard, `substeps_per_interval`
/// is the trapezoid resolution of the time integral inside the fixed-point
/// map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt_output: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub substeps_per_interval: usize,
    pub renormalize_conservation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scheme: Scheme::DuhamelIntermediate,
            dt_output: 0.1,
            t_end: 1.0,
            picard_tol: 1e-10,
            picard_max_iter: 60,
            substeps_per_interval: 4,
            renormalize_conservation: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) {
            return Err(Error::invalid("picard_tol must be positive"));
        }
        if self.t_end < 0.0 || !self.t_end.is_finite() {
            return Err(Error::invalid("t_end must be nonnegative and finite"));
        }
        if self.t_end > 0.0 && !(self.dt_output > 0.0) {
            return Err(Error::invalid("dt_output must be positive"));
        }
        if self.substeps_per_interval == 0 {
            return Err(Error::invalid("substeps_per_interval must be >= 1"));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::invalid("picard_max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// Contraction interval T_n = 1 / (16(1 + 2K + 2^{3/2}) |S²| n ‖f₀‖_{L¹}).
pub fn contraction_interval(k: f64, n: f64, f0_mass: f64) -> Result<f64> {
    if !(k > 0.0) || !(n > 0.0) || !(f0_mass > 0.0) || k.is_nan() || n.is_nan() || f0_mass.is_nan()
    {
        return Err(Error::invalid(
            "contraction interval needs positive K, n and mass",
        ));
    }
    let s2 = 4.0 * std::f64::consts::PI;
    Ok(1.0 / (16.0 * (1.0 + 2.0 * k + 2f64.powf(1.5)) * s2 * n * f0_mass))
}

/// Outcome of one Picard interval.
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub state: DistributionState,
    /// Sup-over-interval L¹ residual per sweep.
    pub residuals: Vec<f64>,
    /// Mass clamped away when negatives were zeroed at iterate boundaries.
    pub clamped_mass: f64,
    /// Interval length actually used.
    pub interval: f64,
}

fn clamped_state(
    grid: VelocityGrid,
    raw: &[f64],
    time: f64,
    w_v: f64,
    clamped: &mut f64,
) -> Result<DistributionState> {
    let mut values = Vec::with_capacity(raw.len());
    for &x in raw {
        if x < 0.0 {
            *clamped += -x * w_v;
            values.push(0.0);
        } else {
            values.push(x);
        }
    }
    DistributionState::from_values(grid, values, time)
}

/// One Picard interval of length T_n from `f_start`, iterating
/// f^{(m+1)}(t) = f_start + ∫₀ᵗ Q_{n,K}(f^{(m)}) dτ (composite trapezoid)
/// until the sup-in-t L¹ residual drops below `cfg.picard_tol`.
pub fn picard_step(
    f_start: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
    cfg: &SolverConfig,
) -> Result<PicardOutcome> {
    let mass = f_start.moments().m0;
    if !(mass > 0.0) {
        return Err(Error::precondition("picard_step requires M0 > 0"));
    }
    let interval = contraction_interval(params.k, params.n, mass)?;
    picard_interval(f_start, quad, spec, params, cfg, interval)
}

fn picard_interval(
    f_start: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
    cfg: &SolverConfig,
    interval: f64,
) -> Result<PicardOutcome> {
    cfg.validate()?;
    params.validate()?;
    if !params.n.is_finite() {
        return Err(Error::invalid("Picard iteration requires a finite ceiling n"));
    }
    if !params.k.is_finite() {
        return Err(Error::invalid("Picard iteration requires a finite ceiling K"));
    }
    if !(interval > 0.0) || !interval.is_finite() {
        return Err(Error::invalid("Picard interval must be positive and finite"));
    }
    let grid = f_start.grid();
    let w_v = grid.cell_volume();
    let substeps = cfg.substeps_per_interval;
    let dt = interval / substeps as f64;
    let f0 = f_start.values().to_vec();
    let m = f0.len();

    // Iterate slices at t_j = j·dt, j = 0..=substeps; slice 0 is pinned to
    // f_start, so its operator field is evaluated once.
    let mut slices: Vec<Vec<f64>> = vec![f0.clone(); substeps + 1];
    let mut scratch = 0.0;
    let q0 = collide::evaluate(
        &clamped_state(grid, &f0, f_start.time(), w_v, &mut scratch)?,
        quad,
        spec,
        params,
    )?
    .net;

    let mut residuals = Vec::new();
    let mut clamped_total = 0.0;
    let mut rising = 0usize;
    for _sweep in 0..cfg.picard_max_iter {
        // Operator fields on every slice of the current iterate.
        let mut nets: Vec<Vec<f64>> = Vec::with_capacity(substeps + 1);
        nets.push(q0.clone());
        for slice in slices.iter().skip(1) {
            let mut clamped = 0.0;
            let state = clamped_state(grid, slice, f_start.time(), w_v, &mut clamped)?;
            clamped_total += clamped;
            nets.push(collide::evaluate(&state, quad, spec, params)?.net);
        }
        // J(f): cumulative trapezoid of the nets on top of f_start.
        let mut residual: f64 = 0.0;
        let mut integral = vec![0.0; m];
        for j in 1..=substeps {
            let mut slice_res = 0.0;
            let prev = &nets[j - 1];
            let cur = &nets[j];
            let slice = &mut slices[j];
            for i in 0..m {
                integral[i] += 0.5 * dt * (prev[i] + cur[i]);
                let new = f0[i] + integral[i];
                slice_res += (new - slice[i]).abs();
                slice[i] = new;
            }
            residual = residual.max(slice_res * w_v);
        }
        if let Some(&last) = residuals.last() {
            if residual > last {
                rising += 1;
                if rising >= 2 {
                    return Err(Error::ContractionViolation {
                        ratio: residual / last,
                    });
                }
            } else {
                rising = 0;
            }
        }
        residuals.push(residual);
        if residual <= cfg.picard_tol {
            let mut clamped = 0.0;
            let state = clamped_state(
                grid,
                &slices[substeps],
                f_start.time() + interval,
                w_v,
                &mut clamped,
            )?;
            return Ok(PicardOutcome {
                state,
                residuals,
                clamped_mass: clamped_total + clamped,
                interval,
            });
        }
    }
    Err(Error::NonConvergence {
        iters: cfg.picard_max_iter,
        residual: *residuals.last().unwrap_or(&f64::NAN),
    })
}

/// Pointwise frozen-coefficient exponential update
/// f ↦ f·e^{−L dt} + (1 − e^{−L dt})/L · gain, with the 0/0 limit gain·dt.
/// Nonnegative whenever f, gain and L are.
pub fn duhamel_update(values: &[f64], gain: &[f64], lfield: &[f64], dt: f64) -> Vec<f64> {
    values
        .iter()
        .zip(gain)
        .zip(lfield)
        .map(|((&f, &g), &l)| {
            if l < 1e-14 {
                f + g * dt
            } else {
                let decay = (-l * dt).exp();
                f * decay + g * (-((-l * dt).exp_m1())) / l
            }
        })
        .collect()
}

/// One exponential-Euler step of the intermediate equation at ceiling K.
pub fn duhamel_step(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    k: f64,
    dt: f64,
) -> Result<DistributionState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("duhamel_step needs dt > 0"));
    }
    let (gain, lfield) = collide::gain_and_loss_frequency(f, quad, spec, k)?;
    let values = duhamel_update(f.values(), &gain, &lfield, dt);
    DistributionState::from_values(f.grid(), values, f.time() + dt)
}

/// One forward-Euler step on the `params` family; negatives are clamped and
/// the clamped mass reported.
pub fn euler_step(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
    dt: f64,
) -> Result<(DistributionState, f64)> {
    let net = collide::evaluate(f, quad, spec, params)?.net;
    let raw: Vec<f64> = f
        .values()
        .iter()
        .zip(&net)
        .map(|(&x, &q)| x + dt * q)
        .collect();
    let mut clamped = 0.0;
    let state = clamped_state(f.grid(), &raw, f.time() + dt, f.grid().cell_volume(), &mut clamped)?;
    Ok((state, clamped))
}

/// A monitored inequality attached to trajectory records.
#[derive(Debug, Clone)]
pub enum Monitor {
    /// ‖f(t)‖_{L¹₃} ≤ envelope(t) × slack (moment propagation, s = 3).
    MomentEnvelope { slack: f64 },
    /// ‖f(t)‖_{L¹₃} ≤ max{1, C₁}‖f₀‖_{L¹₃} × slack.
    L13Uniform { slack: f64 },
    /// ‖f(t)‖_{L∞} ≤ ceiling.
    LinfCeiling { ceiling: f64 },
    /// |relative drift| ≤ tolerance for (mass, momentum, energy).
    ConservationDrift { tol: f64 },
}

/// Evaluated monitor entry.
#[derive(Debug, Clone, Serialize)]
pub struct BoundFlag {
    pub name: String,
    pub margin: f64,
    pub pass: bool,
}

/// Trajectory record at one output time.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub moments: MomentVector,
    /// (mass, momentum, energy): mass and energy relative to their initial
    /// values, momentum as |M₁(t) − M₁(0)| / √(M₀M₂).
    pub conservation_drift: (f64, f64, f64),
    pub linf: f64,
    pub bound_flags: Vec<BoundFlag>,
    /// Mass removed by negativity clamps inside this output interval
    /// (identically 0 for the Duhamel scheme).
    pub clamped_mass: f64,
    /// Mass renormalization factor applied this interval (1 unless enabled).
    pub renorm_factor: f64,
}

/// Moment-propagation envelope for ‖f(t)‖_{L¹_s}:
/// (‖f₀‖_{L¹_s}^{1/(s−2)} + (1+2K) 2^{s/2+2} |S²| b ‖f₀‖_{L¹₂}^{(s−1)/(s−2)} t/(s−2))^{s−2}.
pub fn moment_envelope(l1s_0: f64, l12_0: f64, b: f64, k: f64, s: f64, t: f64) -> f64 {
    let s2 = 4.0 * std::f64::consts::PI;
    let e = s - 2.0;
    let rate = (1.0 + 2.0 * k) * 2f64.powf(0.5 * s + 2.0) * s2 * b * l12_0.powf((s - 1.0) / e);
    (l1s_0.powf(1.0 / e) + rate * t / e).powf(e)
}

fn eval_monitors(
    monitors: &[Monitor],
    m0: &MomentVector,
    m: &MomentVector,
    drift: (f64, f64, f64),
    spec: &KernelSpec,
    k: f64,
    t: f64,
) -> Vec<BoundFlag> {
    let mut flags = Vec::new();
    for mon in monitors {
        let (name, margin) = match mon {
            Monitor::MomentEnvelope { slack } => {
                let bound = moment_envelope(m0.l1s[3], m0.l1s[2], spec.b, k, 3.0, t) * slack;
                ("moment_envelope".to_string(), bound - m.l1s[3])
            }
            Monitor::L13Uniform { slack } => {
                let c1 = crate::bounds::c1(m0, spec, k).max(1.0);
                ("l13_uniform".to_string(), c1 * m0.l1s[3] * slack - m.l1s[3])
            }
            Monitor::LinfCeiling { ceiling } => ("linf_ceiling".to_string(), ceiling - m.linf),
            Monitor::ConservationDrift { tol } => {
                let worst = drift.0.abs().max(drift.1.abs()).max(drift.2.abs());
                ("conservation_drift".to_string(), tol - worst)
            }
        };
        flags.push(BoundFlag {
            name,
            pass: margin >= 0.0,
            margin,
        });
    }
    flags
}

fn check_finite(m: &MomentVector, t: f64) -> Result<()> {
    if !m.m0.is_finite() || !m.m2.is_finite() || !m.linf.is_finite() {
        return Err(Error::NanDetected {
            time: t,
            context: format!("moments M0={} M2={} Linf={}", m.m0, m.m2, m.linf),
        });
    }
    Ok(())
}

/// Advance `f0` to `cfg.t_end` by the configured scheme, emitting one record
/// per `dt_output`. Picard restarts interval by interval with T_n recomputed
/// from the current mass; the Duhamel and Euler schemes take
/// `substeps_per_interval` uniform substeps per output interval.
pub fn run(
    f0: &DistributionState,
    spec: &KernelSpec,
    quad: &AngularQuadrature,
    params: &CutoffParams,
    cfg: &SolverConfig,
    monitors: &[Monitor],
) -> Result<Vec<TrajectoryRecord>> {
    run_full(f0, spec, quad, params, cfg, monitors).map(|(records, _)| records)
}

/// Like [`run`], additionally returning the final state (for snapshots).
pub fn run_full(
    f0: &DistributionState,
    spec: &KernelSpec,
    quad: &AngularQuadrature,
    params: &CutoffParams,
    cfg: &SolverConfig,
    monitors: &[Monitor],
) -> Result<(Vec<TrajectoryRecord>, DistributionState)> {
    cfg.validate()?;
    spec.validate()?;
    params.validate()?;
    let m_init = f0.moments();
    if !(m_init.m0 > 0.0) {
        return Err(Error::precondition("run requires M0(f0) > 0"));
    }
    let momentum_scale = (m_init.m0 * m_init.m2).sqrt().max(f64::MIN_POSITIVE);

    let drift_of = |m: &MomentVector| -> (f64, f64, f64) {
        let dm = (m.m0 - m_init.m0) / m_init.m0;
        let dp = crate::math::norm(crate::math::sub(m.m1, m_init.m1)) / momentum_scale;
        let de = if m_init.m2 > 0.0 {
            (m.m2 - m_init.m2) / m_init.m2
        } else {
            0.0
        };
        (dm, dp, de)
    };

    let mut records = Vec::new();
    let flags0 = eval_monitors(monitors, &m_init, &m_init, (0.0, 0.0, 0.0), spec, params.k, 0.0);
    records.push(TrajectoryRecord {
        time: f0.time(),
        moments: m_init,
        conservation_drift: (0.0, 0.0, 0.0),
        linf: m_init.linf,
        bound_flags: flags0,
        clamped_mass: 0.0,
        renorm_factor: 1.0,
    });
    if cfg.t_end == 0.0 {
        return Ok((records, f0.clone()));
    }

    let t0 = f0.time();
    let mut state = f0.clone();
    let mut elapsed = 0.0;
    while elapsed < cfg.t_end - 1e-12 * cfg.t_end {
        let target = (elapsed + cfg.dt_output).min(cfg.t_end);
        let mut clamped_interval = 0.0;
        match cfg.scheme {
            Scheme::DuhamelIntermediate => {
                if !params.k.is_finite() {
                    return Err(Error::invalid(
                        "DuhamelIntermediate requires a finite bracket ceiling K",
                    ));
                }
                let dt = (target - elapsed) / cfg.substeps_per_interval as f64;
                for _ in 0..cfg.substeps_per_interval {
                    state = duhamel_step(&state, quad, spec, params.k, dt)?;
                }
            }
            Scheme::ExplicitEuler => {
                let dt = (target - elapsed) / cfg.substeps_per_interval as f64;
                for _ in 0..cfg.substeps_per_interval {
                    let (next, clamped) = euler_step(&state, quad, spec, params, dt)?;
                    state = next;
                    clamped_interval += clamped;
                }
            }
            Scheme::PicardCutoff => {
                let mut t = elapsed;
                while t < target - 1e-14 * cfg.t_end.max(1.0) {
                    let mass = state.moments().m0;
                    if !(mass > 0.0) {
                        return Err(Error::precondition("mass vanished during Picard run"));
                    }
                    let tn = contraction_interval(params.k, params.n, mass)?;
                    let step = tn.min(target - t);
                    let out = picard_interval(&state, quad, spec, params, cfg, step)?;
                    clamped_interval += out.clamped_mass;
                    state = out.state;
                    t += step;
                }
            }
        }
        elapsed = target;
        state = state.with_time(t0 + elapsed);

        let mut renorm = 1.0;
        if cfg.renormalize_conservation {
            let m = state.moments();
            if m.m0 > 0.0 {
                renorm = m_init.m0 / m.m0;
                state = DistributionState::from_values(
                    state.grid(),
                    state.values().iter().map(|v| v * renorm).collect(),
                    state.time(),
                )?;
            }
        }

        let m = state.moments();
        check_finite(&m, state.time())?;
        let drift = drift_of(&m);
        let flags = eval_monitors(monitors, &m_init, &m, drift, spec, params.k, elapsed);
        records.push(TrajectoryRecord {
            time: state.time(),
            moments: m,
            conservation_drift: drift,
            linf: m.linf,
            bound_flags: flags,
            clamped_mass: clamped_interval,
            renorm_factor: renorm,
        });
    }
    Ok((records, state))
}
