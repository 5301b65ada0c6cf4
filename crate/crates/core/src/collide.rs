//! Collision operators on grid states: the bilinear gain Q⁺(f,g), the cubic
//! gain/loss pairs Q±, Q_K±, Q_{n,K}±, the loss frequency L_K, and the
//! symmetrized weak-form pairing.
//!
//! All operators share one quadrature: midpoint sums over the velocity
//! lattice, the configured S² rule for the scattering direction, and
//! trilinear interpolation (zero extension) for off-grid evaluations of the
//! distribution. The (v, v*, σ) term of every operator family here is
//! symmetric in (v, v*) and even in σ, which the sweep exploits: each
//! unordered node pair is visited once (the diagonal vanishes with the
//! kernel) and antipodal σ nodes are folded when the rule allows it. The
//! summation order is fixed independently of the worker count, so results
//! are byte-reproducible.

use crate::grid::{AngularQuadrature, DistributionState, VelocityGrid};
use crate::kernel::{KernelSpec, PreparedKernel};
use crate::math::Vec3;
use crate::{Error, Result};
use rayon::prelude::*;

/// Ceilings (n, K) selecting the operator family: (∞, ∞) the original
/// operators, (∞, K) the intermediate Q_K, (n, K) the cutoff Q_{n,K}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParams {
    /// Kernel/value ceiling n (B ∧ n, f′ ∧ n, f ∧ n); ∞ disables it.
    pub n: f64,
    /// Quantum-bracket ceiling K (1 + f∧K + f*∧K); ∞ disables it.
    pub k: f64,
}

impl CutoffParams {
    pub fn original() -> Self {
        CutoffParams {
            n: f64::INFINITY,
            k: f64::INFINITY,
        }
    }

    pub fn intermediate(k: f64) -> Self {
        CutoffParams {
            n: f64::INFINITY,
            k,
        }
    }

    pub fn cutoff(n: f64, k: f64) -> Self {
        CutoffParams { n, k }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0) || self.n.is_nan() {
            return Err(Error::invalid("cutoff ceiling n must be positive"));
        }
        if !(self.k > 0.0) || self.k.is_nan() {
            return Err(Error::invalid("bracket ceiling K must be positive"));
        }
        Ok(())
    }
}

/// Quadrature bookkeeping attached to an operator evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureMeta {
    pub grid_nodes: usize,
    pub angular_nodes: usize,
}

/// Gain, loss and net fields of one operator evaluation.
#[derive(Debug, Clone)]
pub struct CollisionResult {
    pub gain: Vec<f64>,
    pub loss: Vec<f64>,
    pub net: Vec<f64>,
    pub quadrature_meta: QuadratureMeta,
}

#[inline(always)]
fn cap(x: f64, c: f64) -> f64 {
    if x < c {
        x
    } else {
        c
    }
}

/// Trilinear interpolation in u-space (node i at u = i), zero outside.
#[inline(always)]
fn interp_u(vals: &[f64], n: isize, ux: f64, uy: f64, uz: f64) -> f64 {
    let jxf = ux.floor();
    let jyf = uy.floor();
    let jzf = uz.floor();
    let fx = ux - jxf;
    let fy = uy - jyf;
    let fz = uz - jzf;
    let (jx, jy, jz) = (jxf as isize, jyf as isize, jzf as isize);
    if jx >= 0 && jy >= 0 && jz >= 0 && jx + 1 < n && jy + 1 < n && jz + 1 < n {
        let nn = n as usize;
        let base = ((jx as usize * nn) + jy as usize) * nn + jz as usize;
        debug_assert!(base + nn * nn + nn + 1 < vals.len() + 1);
        // Interior fast path; the guard above proves every index in range.
        let (c000, c001, c010, c011, c100, c101, c110, c111) = unsafe {
            (
                *vals.get_unchecked(base),
                *vals.get_unchecked(base + 1),
                *vals.get_unchecked(base + nn),
                *vals.get_unchecked(base + nn + 1),
                *vals.get_unchecked(base + nn * nn),
                *vals.get_unchecked(base + nn * nn + 1),
                *vals.get_unchecked(base + nn * nn + nn),
                *vals.get_unchecked(base + nn * nn + nn + 1),
            )
        };
        let c00 = c000 + (c100 - c000) * fx;
        let c01 = c001 + (c101 - c001) * fx;
        let c10 = c010 + (c110 - c010) * fx;
        let c11 = c011 + (c111 - c011) * fx;
        let c0 = c00 + (c10 - c00) * fy;
        let c1 = c01 + (c11 - c01) * fy;
        return c0 + (c1 - c0) * fz;
    }
    if jx < -1 || jy < -1 || jz < -1 || jx >= n || jy >= n || jz >= n {
        return 0.0;
    }
    // Boundary straddle: fetch with zero extension.
    let fetch = |x: isize, y: isize, z: isize| -> f64 {
        if x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n {
            0.0
        } else {
            vals[((x * n + y) * n + z) as usize]
        }
    };
    let c00 = fetch(jx, jy, jz) * (1.0 - fx) + fetch(jx + 1, jy, jz) * fx;
    let c01 = fetch(jx, jy, jz + 1) * (1.0 - fx) + fetch(jx + 1, jy, jz + 1) * fx;
    let c10 = fetch(jx, jy + 1, jz) * (1.0 - fx) + fetch(jx + 1, jy + 1, jz) * fx;
    let c11 = fetch(jx, jy + 1, jz + 1) * (1.0 - fx) + fetch(jx + 1, jy + 1, jz + 1) * fx;
    let c0 = c00 * (1.0 - fy) + c10 * fy;
    let c1 = c01 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fz) + c1 * fz
}

/// σ nodes and weights, folded to one hemisphere when the integrand is even
/// and the rule is antipodally symmetric.
fn sigma_list(quad: &AngularQuadrature, fold: bool) -> (Vec<Vec3>, Vec<f64>) {
    if fold {
        if let Some((nodes, weights)) = quad.folded() {
            return (nodes, weights);
        }
    }
    (quad.nodes().to_vec(), quad.weights().to_vec())
}

/// Geometry shared by the sweeps.
struct Geometry {
    nodes: Vec<Vec3>,
    n_axis: isize,
    inv_h: f64,
    u_off: f64,
    cell_volume: f64,
}

impl Geometry {
    fn new(grid: VelocityGrid) -> Self {
        Geometry {
            nodes: (0..grid.len()).map(|i| grid.node(i)).collect(),
            n_axis: grid.points_per_axis() as isize,
            inv_h: 1.0 / grid.spacing(),
            u_off: grid.extent() / grid.spacing() - 0.5,
            cell_volume: grid.cell_volume(),
        }
    }
}

/// Per-pair kinematics: collision-sphere center (u-space), radius, n̂.
struct PairGeom {
    cx: f64,
    cy: f64,
    cz: f64,
    rh: f64,
    g_norm: f64,
    nx: f64,
    ny: f64,
    nz: f64,
}

#[inline(always)]
fn pair_geom(geo: &Geometry, vp: Vec3, vq: Vec3) -> Option<PairGeom> {
    let gx = vp[0] - vq[0];
    let gy = vp[1] - vq[1];
    let gz = vp[2] - vq[2];
    let g_sq = gx * gx + gy * gy + gz * gz;
    if g_sq == 0.0 {
        return None;
    }
    let g_norm = g_sq.sqrt();
    let inv_g = 1.0 / g_norm;
    Some(PairGeom {
        cx: 0.5 * (vp[0] + vq[0]) * geo.inv_h + geo.u_off,
        cy: 0.5 * (vp[1] + vq[1]) * geo.inv_h + geo.u_off,
        cz: 0.5 * (vp[2] + vq[2]) * geo.inv_h + geo.u_off,
        rh: 0.5 * g_norm * geo.inv_h,
        g_norm,
        nx: gx * inv_g,
        ny: gy * inv_g,
        nz: gz * inv_g,
    })
}

#[inline(always)]
fn kernel_at(kernel: &PreparedKernel, iso: bool, pg: &PairGeom, sig: &Vec3) -> f64 {
    if iso {
        pg.g_norm
    } else {
        let ct = (pg.nx * sig[0] + pg.ny * sig[1] + pg.nz * sig[2]).clamp(-1.0, 1.0);
        let sin_half = ((1.0 - ct) * 0.5).sqrt();
        let cos_half = ((1.0 + ct) * 0.5).sqrt();
        kernel.eval(pg.g_norm, sin_half, cos_half)
    }
}

fn check_state(f: &DistributionState, spec: &KernelSpec, params: &CutoffParams) -> Result<()> {
    spec.validate()?;
    params.validate()?;
    if f.values().iter().any(|v| *v < 0.0) {
        return Err(Error::invalid("collision operators require f >= 0"));
    }
    Ok(())
}

/// Gain field and loss-frequency field of the `params` family in one sweep:
/// `gain[v] = ∫∫ B_n (f′∧n)(f*′∧n)(1 + f∧K + f*∧K)`,
/// `lfield[v] = ∫∫ B_n (f*∧n)(1 + f′∧K + f*′∧K)`,
/// so the loss is `(f∧n)·lfield` nodewise.
fn evaluate_parts(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_state(f, spec, params)?;
    let geo = Geometry::new(f.grid());
    let m = geo.nodes.len();
    let (sigma, w_sigma) = sigma_list(quad, true);
    let kernel = spec.prepare();
    let iso = kernel.is_isotropic();
    let vals = f.values();
    let cap_n = params.n;
    let cap_k = params.k;
    let fk: Vec<f64> = vals.iter().map(|&v| cap(v, cap_k)).collect();
    let fn_: Vec<f64> = vals.iter().map(|&v| cap(v, cap_n)).collect();

    // Fixed-size chunking keeps the reduction order independent of the
    // worker count, so reruns are byte-identical.
    let chunk = m.div_ceil(64).max(1);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..m)
        .into_par_iter()
        .chunks(chunk)
        .map(|ps| {
            let mut gain = vec![0.0; m];
            let mut lfield = vec![0.0; m];
            for &p in &ps {
                let vp = geo.nodes[p];
                for q in (p + 1)..m {
                    let Some(pg) = pair_geom(&geo, vp, geo.nodes[q]) else {
                        continue;
                    };
                    let mut s_gain = 0.0;
                    let mut s_loss = 0.0;
                    for (sig, w) in sigma.iter().zip(&w_sigma) {
                        let b = kernel_at(&kernel, iso, &pg, sig);
                        let bn = w * cap(b, cap_n);
                        let fp_prime = interp_u(
                            vals,
                            geo.n_axis,
                            pg.cx + pg.rh * sig[0],
                            pg.cy + pg.rh * sig[1],
                            pg.cz + pg.rh * sig[2],
                        );
                        let fq_prime = interp_u(
                            vals,
                            geo.n_axis,
                            pg.cx - pg.rh * sig[0],
                            pg.cy - pg.rh * sig[1],
                            pg.cz - pg.rh * sig[2],
                        );
                        s_gain += bn * cap(fp_prime, cap_n) * cap(fq_prime, cap_n);
                        s_loss += bn * (1.0 + cap(fp_prime, cap_k) + cap(fq_prime, cap_k));
                    }
                    // The (v, v*, σ) term is symmetric in the pair: one
                    // evaluation feeds both output nodes.
                    let g = s_gain * (1.0 + fk[p] + fk[q]);
                    gain[p] += g;
                    gain[q] += g;
                    lfield[p] += s_loss * fn_[q];
                    lfield[q] += s_loss * fn_[p];
                }
            }
            (gain, lfield)
        })
        .collect();

    let mut gain = vec![0.0; m];
    let mut lfield = vec![0.0; m];
    for (g, l) in &partials {
        for i in 0..m {
            gain[i] += g[i];
            lfield[i] += l[i];
        }
    }
    let w_v = geo.cell_volume;
    for i in 0..m {
        gain[i] *= w_v;
        lfield[i] *= w_v;
    }
    Ok((gain, lfield))
}

/// Full operator evaluation: gain, loss = (f∧n)·L and net = gain − loss.
pub fn evaluate(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
) -> Result<CollisionResult> {
    let (gain, lfield) = evaluate_parts(f, quad, spec, params)?;
    let loss: Vec<f64> = f
        .values()
        .iter()
        .zip(&lfield)
        .map(|(&fv, &l)| cap(fv, params.n) * l)
        .collect();
    let net: Vec<f64> = gain.iter().zip(&loss).map(|(g, l)| g - l).collect();
    Ok(CollisionResult {
        gain,
        loss,
        net,
        quadrature_meta: QuadratureMeta {
            grid_nodes: f.grid().len(),
            angular_nodes: quad.len(),
        },
    })
}

/// Gain field of the family selected by `params`.
pub fn q_gain(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
) -> Result<Vec<f64>> {
    Ok(evaluate(f, quad, spec, params)?.gain)
}

/// Loss field of the family selected by `params`.
pub fn q_loss(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
) -> Result<Vec<f64>> {
    Ok(evaluate(f, quad, spec, params)?.loss)
}

/// Loss frequency L_K(f)(v) = ∫∫ B f* (1 + f′∧K + f*′∧K) dσ dv*.
/// The K-truncated loss is f·L_K nodewise, exactly.
pub fn l_k(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    k: f64,
) -> Result<Vec<f64>> {
    let params = CutoffParams::intermediate(k);
    let (_, lfield) = evaluate_parts(f, quad, spec, &params)?;
    Ok(lfield)
}

/// Gain field Q_K⁺ and loss frequency L_K in one sweep, for exponential
/// time stepping.
pub fn gain_and_loss_frequency(
    f: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    k: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    evaluate_parts(f, quad, spec, &CutoffParams::intermediate(k))
}

/// Bilinear collision gain Q⁺(f,g)(v) = ∫∫ B f(v′) g(v*′) dσ dv*.
/// A finite `params.n` caps the kernel and both factors at n; the bracket
/// ceiling K plays no role in the bilinear form.
pub fn q_plus_bilinear(
    f: &DistributionState,
    g: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
) -> Result<Vec<f64>> {
    check_state(f, spec, params)?;
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            left: f.grid().len(),
            right: g.grid().len(),
        });
    }
    if g.values().iter().any(|v| *v < 0.0) {
        return Err(Error::invalid("collision operators require g >= 0"));
    }
    let geo = Geometry::new(f.grid());
    let m = geo.nodes.len();
    // f(v′)g(v*′) is not σ-even when f ≠ g: keep the full node set.
    let (sigma, w_sigma) = sigma_list(quad, false);
    let kernel = spec.prepare();
    let iso = kernel.is_isotropic();
    let fv = f.values();
    let gv = g.values();
    let cap_n = params.n;

    let chunk = m.div_ceil(64).max(1);
    let partials: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .chunks(chunk)
        .map(|ps| {
            let mut out = vec![0.0; m];
            for &p in &ps {
                let vp = geo.nodes[p];
                for q in (p + 1)..m {
                    let Some(pg) = pair_geom(&geo, vp, geo.nodes[q]) else {
                        continue;
                    };
                    let mut acc = 0.0;
                    for (sig, w) in sigma.iter().zip(&w_sigma) {
                        let b = kernel_at(&kernel, iso, &pg, sig);
                        let f_prime = interp_u(
                            fv,
                            geo.n_axis,
                            pg.cx + pg.rh * sig[0],
                            pg.cy + pg.rh * sig[1],
                            pg.cz + pg.rh * sig[2],
                        );
                        let g_prime = interp_u(
                            gv,
                            geo.n_axis,
                            pg.cx - pg.rh * sig[0],
                            pg.cy - pg.rh * sig[1],
                            pg.cz - pg.rh * sig[2],
                        );
                        acc += w * cap(b, cap_n) * cap(f_prime, cap_n) * cap(g_prime, cap_n);
                    }
                    // v′(v,v*,σ) = v′(v*,v,σ): the same value lands on both.
                    out[p] += acc;
                    out[q] += acc;
                }
            }
            out
        })
        .collect();

    let mut out = vec![0.0; m];
    for part in &partials {
        for i in 0..m {
            out[i] += part[i];
        }
    }
    for o in out.iter_mut() {
        *o *= geo.cell_volume;
    }
    Ok(out)
}

/// Symmetrized weak form ∫ φ Q_{n,K}(f) dv =
/// ½ ∫∫∫ B_n (f∧n)(f*∧n)(1 + f′∧K + f*′∧K)(φ′ + φ*′ − φ − φ*).
/// Off-grid φ values come from the boundary cell's trilinear polynomial, so
/// constant and per-axis-linear test fields extend exactly and collision
/// invariants cancel identically.
pub fn weak_form_pairing(
    f: &DistributionState,
    phi: &[f64],
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    params: &CutoffParams,
) -> Result<f64> {
    check_state(f, spec, params)?;
    let geo = Geometry::new(f.grid());
    let m = geo.nodes.len();
    if phi.len() != m {
        return Err(Error::invalid("test field size does not match grid"));
    }
    let (sigma, w_sigma) = sigma_list(quad, true);
    let kernel = spec.prepare();
    let iso = kernel.is_isotropic();
    let vals = f.values();
    let cap_n = params.n;
    let cap_k = params.k;
    let fn_: Vec<f64> = vals.iter().map(|&v| cap(v, cap_n)).collect();

    let chunk = m.div_ceil(64).max(1);
    let parts: Vec<f64> = (0..m)
        .into_par_iter()
        .chunks(chunk)
        .map(|ps| {
            let mut acc = 0.0;
            for &p in &ps {
                let vp = geo.nodes[p];
                if fn_[p] == 0.0 {
                    continue;
                }
                for q in (p + 1)..m {
                    if fn_[q] == 0.0 {
                        continue;
                    }
                    let Some(pg) = pair_geom(&geo, vp, geo.nodes[q]) else {
                        continue;
                    };
                    let phi_nodes = phi[p] + phi[q];
                    let mut pair_acc = 0.0;
                    for (sig, w) in sigma.iter().zip(&w_sigma) {
                        let b = kernel_at(&kernel, iso, &pg, sig);
                        let bn = w * cap(b, cap_n);
                        let (ux, uy, uz) = (
                            pg.cx + pg.rh * sig[0],
                            pg.cy + pg.rh * sig[1],
                            pg.cz + pg.rh * sig[2],
                        );
                        let (wx, wy, wz) = (
                            pg.cx - pg.rh * sig[0],
                            pg.cy - pg.rh * sig[1],
                            pg.cz - pg.rh * sig[2],
                        );
                        let fp_prime = interp_u(vals, geo.n_axis, ux, uy, uz);
                        let fq_prime = interp_u(vals, geo.n_axis, wx, wy, wz);
                        let loss_br = 1.0 + cap(fp_prime, cap_k) + cap(fq_prime, cap_k);
                        let phi_primes = interp_extrapolate(phi, geo.n_axis, ux, uy, uz)
                            + interp_extrapolate(phi, geo.n_axis, wx, wy, wz);
                        pair_acc += bn * loss_br * (phi_primes - phi_nodes);
                    }
                    // Visiting each unordered pair once absorbs the ½
                    // prefactor of the ordered double sum.
                    acc += pair_acc * fn_[p] * fn_[q];
                }
            }
            acc
        })
        .collect();

    let total: f64 = parts.iter().sum();
    Ok(total * geo.cell_volume * geo.cell_volume)
}

/// Trilinear interpolation for test fields with boundary-cell extrapolation:
/// indices clamp to the outermost cell, fractional offsets run free, so the
/// cell's affine polynomial extends outward.
#[inline(always)]
fn interp_extrapolate(vals: &[f64], n: isize, ux: f64, uy: f64, uz: f64) -> f64 {
    let jx = (ux.floor() as isize).min(n - 2).max(0);
    let jy = (uy.floor() as isize).min(n - 2).max(0);
    let jz = (uz.floor() as isize).min(n - 2).max(0);
    let fx = ux - jx as f64;
    let fy = uy - jy as f64;
    let fz = uz - jz as f64;
    let nn = n as usize;
    let base = ((jx as usize * nn) + jy as usize) * nn + jz as usize;
    let c000 = vals[base];
    let c001 = vals[base + 1];
    let c010 = vals[base + nn];
    let c011 = vals[base + nn + 1];
    let c100 = vals[base + nn * nn];
    let c101 = vals[base + nn * nn + 1];
    let c110 = vals[base + nn * nn + nn];
    let c111 = vals[base + nn * nn + nn + 1];
    let c00 = c000 + (c100 - c000) * fx;
    let c01 = c001 + (c101 - c001) * fx;
    let c10 = c010 + (c110 - c010) * fx;
    let c11 = c011 + (c111 - c011) * fx;
    let c0 = c00 + (c10 - c00) * fy;
    let c1 = c01 + (c11 - c01) * fy;
    c0 + (c1 - c0) * fz
}

/// Grid field of ⟨v⟩^s (japanese_bracket) or |v|^s weights, for test fields.
pub fn weight_field(grid: VelocityGrid, s: f64, japanese_bracket: bool) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let v = grid.node(i);
            let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if japanese_bracket {
                (1.0 + q).powf(0.5 * s)
            } else {
                q.powf(0.5 * s)
            }
        })
        .collect()
}
