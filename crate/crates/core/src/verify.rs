//! Randomized property suites and brute-force oracles for the standalone
//! inequalities and identities the solver relies on: the elementary power
//! inequality, the Povzner angular estimate, the truncation lemma, the radial
//! moment comparison, the change-of-variables identities, the weighted gain
//! bound and the loss-frequency coercivity floor.

use crate::collide;
use crate::grid::{AngularQuadrature, DistributionState, VelocityGrid};
use crate::kernel::{self, KernelSpec};
use crate::math::{self, Vec3};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Result of one randomized suite.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCase {
    pub name: String,
    /// Human-readable description of the input distribution.
    pub sampler: String,
    pub trials: usize,
    /// Relative tolerance; the suite passes iff worst_margin ≥ −tolerance.
    pub tolerance: f64,
    pub worst_margin: f64,
    pub status: bool,
    pub seed: u64,
}

impl PropertyCase {
    fn finish(name: &str, sampler: &str, trials: usize, tol: f64, worst: f64, seed: u64) -> Self {
        PropertyCase {
            name: name.to_string(),
            sampler: sampler.to_string(),
            trials,
            tolerance: tol,
            worst_margin: worst,
            status: worst >= -tol,
            seed,
        }
    }

    fn vacuous(name: &str, seed: u64) -> Self {
        PropertyCase {
            name: name.to_string(),
            sampler: "vacuous: zero trials requested".to_string(),
            trials: 0,
            tolerance: 0.0,
            worst_margin: f64::INFINITY,
            status: true,
            seed,
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar inequalities
// ---------------------------------------------------------------------------

/// Margins of (k−1)min{x^k,y^k} ≤ (x+y)^k − x^k − y^k
/// ≤ (2^k−2)max{x^{k−λ}y^λ, y^{k−λ}x^λ}: returns (middle − lower,
/// upper − middle).
pub fn check_lemma_minmax(x: f64, y: f64, k: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(k > 1.0) || x < 0.0 || y < 0.0 || lambda < 0.0 || lambda > 1f64.min(k / 2.0) {
        return Err(Error::invalid(
            "lemma_minmax needs k > 1, x,y >= 0, 0 <= lambda <= min(1, k/2)",
        ));
    }
    let middle = (x + y).powf(k) - x.powf(k) - y.powf(k);
    let lower = (k - 1.0) * x.powf(k).min(y.powf(k));
    let upper = (2f64.powf(k) - 2.0)
        * (x.powf(k - lambda) * y.powf(lambda)).max(y.powf(k - lambda) * x.powf(lambda));
    Ok((middle - lower, upper - middle))
}

/// Margins (RHS − LHS) of the two Povzner forms: the ⟨·⟩-weighted one and
/// the |·|-weighted one, for exponent s and split γ.
pub fn check_povzner(v: Vec3, v_star: Vec3, sigma: Vec3, s: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(s > 2.0) || gamma < 0.0 || gamma > 2f64.min(s / 2.0) {
        return Err(Error::invalid(
            "povzner needs s > 2 and 0 <= gamma <= min(2, s/2)",
        ));
    }
    let pair = kernel::post_collision(v, v_star, sigma)?;
    let kap = kernel::kappa(pair.theta)?;
    let coeff = 2.0 * (2f64.powf(s / 2.0) - 2.0);
    let sink = 2f64.powf(-s) * (s / 2.0 - 1.0) * kap.powf(s / 2.0);

    let bv = math::bracket(v);
    let bs = math::bracket(v_star);
    let lhs_b = math::bracket(pair.v_prime).powf(s) + math::bracket(pair.v_star_prime).powf(s)
        - bv.powf(s)
        - bs.powf(s);
    let rhs_b = coeff * (bv.powf(s - gamma) * bs.powf(gamma) + bv.powf(gamma) * bs.powf(s - gamma))
        - sink * bv.powf(s);

    let nv = math::norm(v);
    let ns = math::norm(v_star);
    let lhs_n = math::norm(pair.v_prime).powf(s) + math::norm(pair.v_star_prime).powf(s)
        - nv.powf(s)
        - ns.powf(s);
    let rhs_n = coeff * (nv.powf(s - gamma) * ns.powf(gamma) + nv.powf(gamma) * ns.powf(s - gamma))
        - sink * nv.powf(s);

    Ok((rhs_b - lhs_b, rhs_n - lhs_n))
}

/// Margins of the three truncation properties:
/// |x−y| − |x∧z − y∧z|, (monotonicity) max∧z − min∧z, and
/// x∧z + y∧z − (x+y)∧z. All are ≥ 0 exactly in floating point.
pub fn check_truncation_lemma(x: f64, y: f64, z: f64) -> [f64; 3] {
    let m1 = (x - y).abs() - (x.min(z) - y.min(z)).abs();
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let m2 = hi.min(z) - lo.min(z);
    let m3 = x.min(z) + y.min(z) - (x + y).min(z);
    [m1, m2, m3]
}

// ---------------------------------------------------------------------------
// Monte-Carlo identity checks
// ---------------------------------------------------------------------------

/// Two independent estimates of one quantity with standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct StatComparison {
    pub name: String,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// |lhs − rhs| / sqrt(lhs_se² + rhs_se²).
    pub z_score: f64,
    pub samples: usize,
}

impl StatComparison {
    fn new(name: &str, (lhs, lhs_se): (f64, f64), (rhs, rhs_se): (f64, f64), n: usize) -> Self {
        let denom = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt().max(1e-300);
        StatComparison {
            name: name.to_string(),
            lhs,
            lhs_se,
            rhs,
            rhs_se,
            z_score: (lhs - rhs).abs() / denom,
            samples: n,
        }
    }

    pub fn within(&self, z: f64) -> bool {
        self.z_score <= z
    }
}

/// Separable integrand W(z, σ, v) = exp(−az·|z|²) · µ(⟨ẑ, σ⟩) · exp(−av·|v|²)
/// with µ(t) = 1 + c(1 − t²). The angular factor with c > 0 damps the
/// grazing-angle weight of the transformed side, keeping the estimator
/// variance finite.
#[derive(Debug, Clone, Copy)]
pub struct SeparableW {
    pub az: f64,
    pub c: f64,
    pub av: f64,
    /// Optional support restriction: require sin(θ/2) ≥ this value.
    pub min_sin_half: f64,
}

impl SeparableW {
    fn eval(&self, r: f64, cos_theta: f64, v_sq: f64) -> f64 {
        let sin_half_sq = (1.0 - cos_theta) * 0.5;
        if sin_half_sq < self.min_sin_half * self.min_sin_half {
            return 0.0;
        }
        let mu = 1.0 + self.c * (1.0 - cos_theta * cos_theta);
        // c = −1 encodes the pure damped form µ = 1 − t² used by the
        // variance-sensitive checks.
        let mu = if self.c < 0.0 {
            1.0 - cos_theta * cos_theta
        } else {
            mu
        };
        (-self.az * r * r).exp() * mu * (-self.av * v_sq).exp()
    }
}

fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n * (n - 1.0));
    (mean, var.sqrt())
}

fn sample_gaussian3(rng: &mut impl Rng, scale: f64) -> Vec3 {
    let mut out = [0.0; 3];
    for o in out.iter_mut() {
        // Box–Muller.
        let u1: f64 = rng.gen_range(1e-16..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        *o = scale * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
    out
}

fn sample_sphere(rng: &mut impl Rng) -> Vec3 {
    let u: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let s = (1.0 - u * u).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), u]
}

/// Monte-Carlo comparison of the two grazing-angle change-of-variables
/// formulas and the exchange-prime identity. Each entry carries both sides
/// and the z-score; callers assert agreement within 3 combined standard
/// errors.
pub fn check_change_of_variables(
    w: &SeparableW,
    v_fixed: Vec3,
    samples: usize,
    seed: u64,
) -> Result<Vec<StatComparison>> {
    if samples < 100 {
        return Err(Error::Inconclusive(format!(
            "{samples} samples cannot resolve a 3-sigma comparison"
        )));
    }
    let proposal_scale = 1.0;
    let pdf = |x: Vec3| -> f64 {
        let q = math::dot(x, x) / (2.0 * proposal_scale * proposal_scale);
        (-q).exp() / (2.0 * std::f64::consts::PI * proposal_scale * proposal_scale).powf(1.5)
    };
    let four_pi = 4.0 * std::f64::consts::PI;

    // Formula 1 (sin) and formula 2 (cos), both sides, one pass.
    let mut lhs1 = Vec::with_capacity(samples);
    let mut rhs1 = Vec::with_capacity(samples);
    let mut lhs2 = Vec::with_capacity(samples);
    let mut rhs2 = Vec::with_capacity(samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let v_star = sample_gaussian3(&mut rng, proposal_scale);
        let sigma = sample_sphere(&mut rng);
        let g = math::sub(v_fixed, v_star);
        let r = math::norm(g);
        if r == 0.0 {
            lhs1.push(0.0);
            rhs1.push(0.0);
            lhs2.push(0.0);
            rhs2.push(0.0);
            continue;
        }
        let n = math::scale(g, 1.0 / r);
        let ct = math::dot(n, sigma).clamp(-1.0, 1.0);
        let sin_half = ((1.0 - ct) * 0.5).sqrt();
        let cos_half = ((1.0 + ct) * 0.5).sqrt();
        let center = math::scale(math::add(v_fixed, v_star), 0.5);
        let v_prime = math::add(center, math::scale(sigma, 0.5 * r));
        let v_star_prime = math::sub(center, math::scale(sigma, 0.5 * r));
        let weight = four_pi / pdf(v_star);

        lhs1.push(w.eval(r, ct, math::dot(v_prime, v_prime)) * weight);
        lhs2.push(w.eval(r, ct, math::dot(v_star_prime, v_star_prime)) * weight);
        let vs_sq = math::dot(v_star, v_star);
        rhs1.push(if sin_half > 0.0 {
            w.eval(r / sin_half, ct, vs_sq) / (sin_half * sin_half * sin_half) * weight
        } else {
            0.0
        });
        rhs2.push(if cos_half > 0.0 {
            w.eval(r / cos_half, ct, vs_sq) / (cos_half * cos_half * cos_half) * weight
        } else {
            0.0
        });
    }

    // Exchange-prime identity with an asymmetric quadruple integrand
    // F(x, y, z, w) = exp(−|x|² − 2|y|² − ½|z|² − |w|²) and the hard-sphere
    // kernel weight.
    let quad_f = |x: Vec3, y: Vec3, z: Vec3, u: Vec3| -> f64 {
        (-(math::dot(x, x) + 2.0 * math::dot(y, y) + 0.5 * math::dot(z, z) + math::dot(u, u)))
            .exp()
    };
    let mut ex_lhs = Vec::with_capacity(samples);
    let mut ex_rhs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let v = sample_gaussian3(&mut rng, proposal_scale);
        let v_star = sample_gaussian3(&mut rng, proposal_scale);
        let sigma = sample_sphere(&mut rng);
        let g = math::sub(v, v_star);
        let r = math::norm(g);
        let center = math::scale(math::add(v, v_star), 0.5);
        let v_prime = math::add(center, math::scale(sigma, 0.5 * r));
        let v_star_prime = math::sub(center, math::scale(sigma, 0.5 * r));
        let weight = four_pi * r / (pdf(v) * pdf(v_star));
        ex_lhs.push(quad_f(v_prime, v_star_prime, v, v_star) * weight);
        ex_rhs.push(quad_f(v, v_star, v_prime, v_star_prime) * weight);
    }

    Ok(vec![
        StatComparison::new("grazing_sin", mean_se(&lhs1), mean_se(&rhs1), samples),
        StatComparison::new("grazing_cos", mean_se(&lhs2), mean_se(&rhs2), samples),
        StatComparison::new("exchange_prime", mean_se(&ex_lhs), mean_se(&ex_rhs), samples),
    ])
}

/// Monte-Carlo estimate of the bilinear gain ∫∫ B f̃(v′) g̃(v*′) dσ dv* at one
/// velocity, integrating the same trilinear interpolants the deterministic
/// quadrature uses. Returns (mean, standard error).
pub fn mc_bilinear_gain_at(
    f: &DistributionState,
    g: &DistributionState,
    spec: &KernelSpec,
    v: Vec3,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    spec.validate()?;
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            left: f.grid().len(),
            right: g.grid().len(),
        });
    }
    // Proposal wide enough to cover the whole truncated domain.
    let proposal_scale = f.grid().extent() / 1.8;
    let pdf = |x: Vec3| -> f64 {
        let d = math::sub(x, [0.0; 3]);
        let q = math::dot(d, d) / (2.0 * proposal_scale * proposal_scale);
        (-q).exp() / (2.0 * std::f64::consts::PI * proposal_scale * proposal_scale).powf(1.5)
    };
    let kernel = spec.prepare();
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let v_star = sample_gaussian3(&mut rng, proposal_scale);
        let sigma = sample_sphere(&mut rng);
        let gvec = math::sub(v, v_star);
        let r = math::norm(gvec);
        if r == 0.0 {
            vals.push(0.0);
            continue;
        }
        let n = math::scale(gvec, 1.0 / r);
        let ct = math::dot(n, sigma).clamp(-1.0, 1.0);
        let b = kernel.eval(r, ((1.0 - ct) * 0.5).sqrt(), ((1.0 + ct) * 0.5).sqrt());
        let center = math::scale(math::add(v, v_star), 0.5);
        let v_prime = math::add(center, math::scale(sigma, 0.5 * r));
        let v_star_prime = math::sub(center, math::scale(sigma, 0.5 * r));
        vals.push(b * f.interpolate(v_prime) * g.interpolate(v_star_prime) * four_pi / pdf(v_star));
    }
    Ok(mean_se(&vals))
}

/// Monte-Carlo estimate of the weighted gain integral
/// ∫∫ |v−v*|^γ ⟨v′⟩^p ⟨v*′⟩^q g̃(v′) f̃(v*′) dσ dv* at one velocity,
/// with the same interpolants as the deterministic quadrature.
pub fn mc_weighted_gain_at(
    f: &DistributionState,
    g: &DistributionState,
    v: Vec3,
    wp: f64,
    wq: f64,
    gamma: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            left: f.grid().len(),
            right: g.grid().len(),
        });
    }
    let proposal_scale = f.grid().extent() / 1.8;
    let pdf = |x: Vec3| -> f64 {
        let q = math::dot(x, x) / (2.0 * proposal_scale * proposal_scale);
        (-q).exp() / (2.0 * std::f64::consts::PI * proposal_scale * proposal_scale).powf(1.5)
    };
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let v_star = sample_gaussian3(&mut rng, proposal_scale);
        let sigma = sample_sphere(&mut rng);
        let gvec = math::sub(v, v_star);
        let r = math::norm(gvec);
        let center = math::scale(math::add(v, v_star), 0.5);
        let v_prime = math::add(center, math::scale(sigma, 0.5 * r));
        let v_star_prime = math::sub(center, math::scale(sigma, 0.5 * r));
        vals.push(
            r.powf(gamma)
                * math::bracket(v_prime).powf(wp)
                * math::bracket(v_star_prime).powf(wq)
                * g.interpolate(v_prime)
                * f.interpolate(v_star_prime)
                * four_pi
                / pdf(v_star),
        );
    }
    Ok(mean_se(&vals))
}

/// Monte-Carlo cross-check of the loss frequency L_K(f)(v): the midpoint
/// v*-sum is kept exactly (v* drawn uniformly over the grid nodes) and the
/// angular integral is Monte-Carlo'd, so the estimate is unbiased for the
/// same v*-discretization the deterministic operator uses and a 3σ
/// comparison isolates the angular rule and off-grid interpolation.
pub fn mc_loss_frequency_at(
    f: &DistributionState,
    k: f64,
    spec: &KernelSpec,
    v: Vec3,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let grid = f.grid();
    let kernel = spec.prepare();
    let four_pi = 4.0 * std::f64::consts::PI;
    let node_weight = grid.len() as f64 * grid.cell_volume();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let q = rng.gen_range(0..grid.len());
        let v_star = grid.node(q);
        let sigma = sample_sphere(&mut rng);
        let gvec = math::sub(v, v_star);
        let r = math::norm(gvec);
        if r == 0.0 {
            vals.push(0.0);
            continue;
        }
        let n = math::scale(gvec, 1.0 / r);
        let ct = math::dot(n, sigma).clamp(-1.0, 1.0);
        let b = kernel.eval(r, ((1.0 - ct) * 0.5).sqrt(), ((1.0 + ct) * 0.5).sqrt());
        let center = math::scale(math::add(v, v_star), 0.5);
        let v_prime = math::add(center, math::scale(sigma, 0.5 * r));
        let v_star_prime = math::sub(center, math::scale(sigma, 0.5 * r));
        let bracket =
            1.0 + f.interpolate(v_prime).min(k) + f.interpolate(v_star_prime).min(k);
        vals.push(b * f.values()[q] * bracket * four_pi * node_weight);
    }
    Ok(mean_se(&vals))
}

/// Discrete contraction functional of the cutoff map,
/// I_n(f,g) = ∫∫∫ B_n |(f′∧n)(f*′∧n)(1 + f∧K + f*∧K)
///                    − (g′∧n)(g*′∧n)(1 + g∧K + g*∧K)|,
/// together with its bound
/// (1+2K)|S²| n (‖f‖_{L¹} + ‖g‖_{L¹}) ‖f−g‖_{L¹}
/// + 2^{7/2} |S²| n ‖g∧n‖_{L∞} ‖g‖_{L¹} ‖f−g‖_{L¹}. Returns (value, bound).
pub fn contraction_functional(
    f: &DistributionState,
    g: &DistributionState,
    quad: &AngularQuadrature,
    spec: &KernelSpec,
    n: f64,
    k: f64,
) -> Result<(f64, f64)> {
    spec.validate()?;
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            left: f.grid().len(),
            right: g.grid().len(),
        });
    }
    if !(n > 0.0 && n.is_finite()) || !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid("contraction functional needs finite n, K > 0"));
    }
    let grid = f.grid();
    let m = grid.len();
    let nodes: Vec<Vec3> = (0..m).map(|i| grid.node(i)).collect();
    let kernel = spec.prepare();
    let fv = f.values();
    let gv = g.values();
    // |x| is even in σ and symmetric in the pair; the diagonal carries B = 0.
    let chunk = m.div_ceil(64).max(1);
    let parts: Vec<f64> = (0..m)
        .into_par_iter()
        .chunks(chunk)
        .map(|ps| {
            let mut acc = 0.0;
            for &p in &ps {
                let vp = nodes[p];
                for q in (p + 1)..m {
                    let vq = nodes[q];
                    let gvec = math::sub(vp, vq);
                    let r = math::norm(gvec);
                    if r == 0.0 {
                        continue;
                    }
                    let nhat = math::scale(gvec, 1.0 / r);
                    let center = math::scale(math::add(vp, vq), 0.5);
                    let br_f = 1.0 + fv[p].min(k) + fv[q].min(k);
                    let br_g = 1.0 + gv[p].min(k) + gv[q].min(k);
                    for (sig, w) in quad.nodes().iter().zip(quad.weights()) {
                        let ct = math::dot(nhat, *sig).clamp(-1.0, 1.0);
                        let b = kernel
                            .eval(r, ((1.0 - ct) * 0.5).sqrt(), ((1.0 + ct) * 0.5).sqrt())
                            .min(n);
                        let v_prime = math::add(center, math::scale(*sig, 0.5 * r));
                        let v_star_prime = math::sub(center, math::scale(*sig, 0.5 * r));
                        let tf = f.interpolate(v_prime).min(n)
                            * f.interpolate(v_star_prime).min(n)
                            * br_f;
                        let tg = g.interpolate(v_prime).min(n)
                            * g.interpolate(v_star_prime).min(n)
                            * br_g;
                        // Both output nodes of the pair see the same term.
                        acc += 2.0 * w * b * (tf - tg).abs();
                    }
                }
            }
            acc
        })
        .collect();
    let w_v = grid.cell_volume();
    let value = parts.iter().sum::<f64>() * w_v * w_v;

    let s2 = 4.0 * std::f64::consts::PI;
    let mf = f.moments();
    let mg = g.moments();
    let dist = f.l1_distance(g)?;
    let bound = (1.0 + 2.0 * k) * s2 * n * (mf.m0 + mg.m0) * dist
        + 2f64.powf(3.5) * s2 * n * mg.linf.min(n) * mg.m0 * dist;
    Ok((value, bound))
}

// ---------------------------------------------------------------------------
// Grid-state checks
// ---------------------------------------------------------------------------

/// Minimum nodewise margin of the weighted gain bound
/// ∫∫ |v−v*|^γ ⟨v′⟩^p ⟨v*′⟩^q g(v′) f(v*′) dσ dv*
///   ≤ 2^{(3+γ)/2} |S²| (‖f‖_{L∞_q}‖g‖_{L¹_{p+γ}} + ‖g‖_{L∞_p}‖f‖_{L¹_{q+γ}}) ⟨v⟩^γ
/// under multiplicative `slack`.
pub fn check_weighted_gain_bound(
    f: &DistributionState,
    g: &DistributionState,
    quad: &AngularQuadrature,
    wp: f64,
    wq: f64,
    gamma: f64,
    slack: f64,
) -> Result<f64> {
    if wp < 0.0 || wq < 0.0 || gamma < 0.0 {
        return Err(Error::invalid("weighted gain bound needs p, q, gamma >= 0"));
    }
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            left: f.grid().len(),
            right: g.grid().len(),
        });
    }
    let grid = f.grid();
    let m = grid.len();
    let w_v = grid.cell_volume();

    // Weighted norms of the grid states.
    let mut f_linf_q: f64 = 0.0;
    let mut g_linf_p: f64 = 0.0;
    let mut g_l1_pg = 0.0;
    let mut f_l1_qg = 0.0;
    for i in 0..m {
        let br = math::bracket(grid.node(i));
        f_linf_q = f_linf_q.max(br.powf(wq) * f.values()[i]);
        g_linf_p = g_linf_p.max(br.powf(wp) * g.values()[i]);
        g_l1_pg += br.powf(wp + gamma) * g.values()[i] * w_v;
        f_l1_qg += br.powf(wq + gamma) * f.values()[i] * w_v;
    }
    let coeff = 2f64.powf((3.0 + gamma) / 2.0) * 4.0 * std::f64::consts::PI;
    let bound_base = coeff * (f_linf_q * g_l1_pg + g_linf_p * f_l1_qg);

    // LHS per node; the (v, v*, σ) term is pair-symmetric.
    let nodes: Vec<Vec3> = (0..m).map(|i| grid.node(i)).collect();
    let sigma = quad.nodes();
    let weights = quad.weights();
    let chunk = m.div_ceil(64).max(1);
    let partials: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .chunks(chunk)
        .map(|ps| {
            let mut out = vec![0.0; m];
            for &p in &ps {
                let vp = nodes[p];
                for q in (p + 1)..m {
                    let vq = nodes[q];
                    let gv = math::sub(vp, vq);
                    let r = math::norm(gv);
                    if r == 0.0 {
                        continue;
                    }
                    let center = math::scale(math::add(vp, vq), 0.5);
                    let mut acc = 0.0;
                    for (sig, w) in sigma.iter().zip(weights) {
                        let v_prime = math::add(center, math::scale(*sig, 0.5 * r));
                        let v_star_prime = math::sub(center, math::scale(*sig, 0.5 * r));
                        acc += w
                            * r.powf(gamma)
                            * math::bracket(v_prime).powf(wp)
                            * math::bracket(v_star_prime).powf(wq)
                            * g.interpolate(v_prime)
                            * f.interpolate(v_star_prime);
                    }
                    out[p] += acc;
                    out[q] += acc;
                }
            }
            out
        })
        .collect();
    let mut lhs = vec![0.0; m];
    for part in &partials {
        for i in 0..m {
            lhs[i] += part[i];
        }
    }

    let mut min_margin = f64::INFINITY;
    for i in 0..m {
        let rhs = bound_base * math::bracket(nodes[i]).powf(gamma) * slack;
        min_margin = min_margin.min(rhs - lhs[i] * w_v);
    }
    Ok(min_margin)
}

/// Coercivity margins: nodewise L_K(f)(v) − floor·⟨v⟩ with
/// floor = a (min{M₀, M₂})^{(β+1)/2} / (2^β ‖f‖_{L¹₃}^{(β−1)/2}).
#[derive(Debug, Clone)]
pub struct CoercivityReport {
    pub floor: f64,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// min over nodes of L_K(f)(v) / (floor·⟨v⟩).
    pub min_ratio: f64,
}

pub fn check_coercivity(
    f: &DistributionState,
    k: f64,
    spec: &KernelSpec,
    quad: &AngularQuadrature,
) -> Result<CoercivityReport> {
    let m = f.moments();
    if !(m.m0 > 0.0 && m.m2 > 0.0) {
        return Err(Error::precondition("coercivity needs M0, M2 > 0"));
    }
    let h = f.grid().spacing();
    if math::norm(m.m1) / m.m0 > h {
        return Err(Error::precondition(
            "coercivity requires centered data (|M1|/M0 <= one cell)",
        ));
    }
    let lf = collide::l_k(f, quad, spec, k)?;
    let floor = spec.a * m.m0.min(m.m2).powf(0.5 * (spec.beta + 1.0))
        / (2f64.powf(spec.beta) * m.l1s[3].powf(0.5 * (spec.beta - 1.0)));
    let grid = f.grid();
    let mut margins = Vec::with_capacity(grid.len());
    let mut min_margin = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    for i in 0..grid.len() {
        let br = math::bracket(grid.node(i));
        let margin = lf[i] - floor * br;
        min_margin = min_margin.min(margin);
        min_ratio = min_ratio.min(lf[i] / (floor * br));
        margins.push(margin);
    }
    Ok(CoercivityReport {
        floor,
        margins,
        min_margin,
        min_ratio,
    })
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 7] = [
    "lemma-minmax",
    "povzner",
    "truncation",
    "radial-moments",
    "change-of-variables",
    "weighted-gain",
    "coercivity",
];

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn suite_lemma_minmax(trials: usize, seed: u64) -> PropertyCase {
    if trials == 0 {
        return PropertyCase::vacuous("lemma-minmax", seed);
    }
    let worst = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e3779b9));
            let x = log_uniform(&mut rng, 1e-6, 1e6);
            let y = log_uniform(&mut rng, 1e-6, 1e6);
            let k = rng.gen_range(1.0f64..8.0).max(1.0 + 1e-9);
            let lambda = rng.gen_range(0.0..1f64.min(k / 2.0));
            let (m1, m2) = check_lemma_minmax(x, y, k, lambda).unwrap();
            let scale = (x + y).powf(k).max(1e-300);
            (m1 / scale).min(m2 / scale)
        })
        .reduce(|| f64::INFINITY, f64::min);
    PropertyCase::finish(
        "lemma-minmax",
        "x, y log-uniform [1e-6, 1e6]; k uniform (1, 8]; lambda uniform [0, min(1, k/2)]",
        trials,
        1e-12,
        worst,
        seed,
    )
}

pub fn suite_povzner(trials: usize, seed: u64) -> PropertyCase {
    if trials == 0 {
        return PropertyCase::vacuous("povzner", seed);
    }
    let worst = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x51ed2701));
            let scale = log_uniform(&mut rng, 1e-2, 1e2);
            let v = sample_gaussian3(&mut rng, scale);
            let vs = sample_gaussian3(&mut rng, scale);
            let sigma = sample_sphere(&mut rng);
            let s = rng.gen_range(2.0f64..8.0).max(2.0 + 1e-9);
            let gamma = rng.gen_range(0.0..2f64.min(s / 2.0));
            let (m_b, m_n) = check_povzner(v, vs, sigma, s, gamma).unwrap();
            let norm_scale = math::bracket(v).powf(s) * math::bracket(vs).powf(s);
            (m_b / norm_scale).min(m_n / norm_scale)
        })
        .reduce(|| f64::INFINITY, f64::min);
    PropertyCase::finish(
        "povzner",
        "v, v* isotropic Gaussian with log-uniform scale [1e-2, 1e2]; sigma uniform on S2; s in (2, 8]; gamma in [0, min(2, s/2)]",
        trials,
        1e-12,
        worst,
        seed,
    )
}

pub fn suite_truncation(trials: usize, seed: u64) -> PropertyCase {
    if trials == 0 {
        return PropertyCase::vacuous("truncation", seed);
    }
    let worst = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0xabcdef12));
            let x = log_uniform(&mut rng, 1e-9, 1e9);
            let y = log_uniform(&mut rng, 1e-9, 1e9);
            let z = if rng.gen_bool(0.1) {
                0.0
            } else {
                log_uniform(&mut rng, 1e-9, 1e9)
            };
            let ms = check_truncation_lemma(x, y, z);
            ms[0].min(ms[1]).min(ms[2])
        })
        .reduce(|| f64::INFINITY, f64::min);
    PropertyCase::finish(
        "truncation",
        "x, y log-uniform [1e-9, 1e9]; z log-uniform or exactly 0",
        trials,
        0.0,
        worst,
        seed,
    )
}

/// Radial moment comparison (p ∫ r^{p−1} φ)^{1/p} ≤ (q ∫ r^{q−1} φ)^{1/q} for
/// 0 ≤ φ ≤ 1, evaluated in closed form on random step profiles, with the
/// indicator equality case asserted separately.
pub fn suite_radial_moments(trials: usize, seed: u64) -> PropertyCase {
    if trials == 0 {
        return PropertyCase::vacuous("radial-moments", seed);
    }
    let worst = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x2545f491));
            let p = rng.gen_range(0.2f64..6.0);
            let q = p + rng.gen_range(0.1f64..4.0);
            // Random step profile on [0, R]: exact power-moment integrals.
            let steps = rng.gen_range(1usize..6);
            let mut edges: Vec<f64> = (0..=steps)
                .map(|_| rng.gen_range(0.0f64..5.0))
                .collect();
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let indicator = rng.gen_bool(0.2);
            let heights: Vec<f64> = (0..steps)
                .map(|_| if indicator { 1.0 } else { rng.gen_range(0.0f64..1.0) })
                .collect();
            let moment = |e: f64| -> f64 {
                let mut acc = 0.0;
                for j in 0..steps {
                    acc += heights[j] * (edges[j + 1].powf(e) - edges[j].powf(e)) / e;
                }
                acc
            };
            let ip = moment(p);
            let iq = moment(q);
            if iq <= 0.0 {
                return f64::INFINITY;
            }
            let left = (p * ip).powf(1.0 / p);
            let right = (q * iq).powf(1.0 / q);
            let margin = (right - left) / right.max(1e-300);
            if indicator && edges[0] == 0.0 {
                // Equality case: margin must be ~0 from both sides.
                -margin.abs()
            } else {
                margin
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    // Deterministic indicator equality case on top of the random sweep.
    let mut worst = worst;
    for r in [0.5f64, 1.0, 2.5] {
        let p = 3.0f64;
        let q = 5.0f64;
        let left = (p * r.powf(p) / p).powf(1.0 / p);
        let right = (q * r.powf(q) / q).powf(1.0 / q);
        worst = worst.min(-((left - right).abs() / right));
    }
    PropertyCase::finish(
        "radial-moments",
        "random step profiles 0 <= phi <= 1 with exact power-moment integrals; p < q in (0, 10); 20% indicator profiles",
        trials,
        1e-12,
        worst,
        seed,
    )
}

pub fn suite_change_of_variables(samples: usize, seed: u64) -> PropertyCase {
    if samples == 0 {
        return PropertyCase::vacuous("change-of-variables", seed);
    }
    let w = SeparableW {
        az: 1.0,
        c: -1.0,
        av: 1.0,
        min_sin_half: 0.0,
    };
    let comparisons =
        check_change_of_variables(&w, [0.3, -0.2, 0.5], samples.max(100), seed).unwrap();
    // Margin in sigma units: 3 − max z-score.
    let worst = comparisons
        .iter()
        .map(|c| 3.0 - c.z_score)
        .fold(f64::INFINITY, f64::min);
    PropertyCase::finish(
        "change-of-variables",
        "v* ~ N(0,1); sigma uniform; W = exp(-|z|^2) sin^2(theta) exp(-|v|^2); margin = 3 - z_score",
        samples,
        0.0,
        worst,
        seed,
    )
}

pub fn suite_weighted_gain(states: usize, seed: u64) -> PropertyCase {
    if states == 0 {
        return PropertyCase::vacuous("weighted-gain", seed);
    }
    let grid = VelocityGrid::new(3.0, 12).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(4, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..states {
        let f = random_smooth_state(grid, &mut rng);
        let g = random_smooth_state(grid, &mut rng);
        for (wp, wq, gamma) in [(0.0, 0.0, 1.0), (2.0, 0.0, 1.0), (1.0, 1.0, 0.5)] {
            let margin =
                check_weighted_gain_bound(&f, &g, &quad, wp, wq, gamma, 1.05).unwrap();
            worst = worst.min(margin);
        }
    }
    PropertyCase::finish(
        "weighted-gain",
        "random 3-Gaussian mixtures on a 12^3 grid; (p,q,gamma) in {(0,0,1),(2,0,1),(1,1,1/2)}; slack 1.05",
        states,
        0.0,
        worst,
        seed,
    )
}

pub fn suite_coercivity(states: usize, seed: u64) -> PropertyCase {
    if states == 0 {
        return PropertyCase::vacuous("coercivity", seed);
    }
    let grid = VelocityGrid::new(4.0, 16).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(4, 8).unwrap();
    let spec = KernelSpec::hard_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..states {
        let mass = rng.gen_range(0.2..1.5);
        let temps = [
            rng.gen_range(0.5..1.2),
            rng.gen_range(0.5..1.2),
            rng.gen_range(0.5..1.2),
        ];
        let f = DistributionState::gaussian_aniso(grid, mass, temps).unwrap();
        let k = rng.gen_range(0.05..1.0);
        let rep = check_coercivity(&f, k, &spec, &quad).unwrap();
        // Relative margin: L_K/(floor·⟨v⟩) − 0.95 ≥ 0 means the floor holds
        // with 5% slack.
        worst = worst.min(rep.min_ratio - 0.95);
    }
    PropertyCase::finish(
        "coercivity",
        "centered anisotropic Gaussians on a 16^3 grid, hard sphere; floor slack 0.95",
        states,
        0.0,
        worst,
        seed,
    )
}

/// Run a named suite. Unknown names are an input error.
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<PropertyCase> {
    match name {
        "lemma-minmax" => Ok(suite_lemma_minmax(trials, seed)),
        "povzner" => Ok(suite_povzner(trials, seed)),
        "truncation" => Ok(suite_truncation(trials, seed)),
        "radial-moments" => Ok(suite_radial_moments(trials, seed)),
        "change-of-variables" => Ok(suite_change_of_variables(trials, seed)),
        "weighted-gain" => Ok(suite_weighted_gain(trials, seed)),
        "coercivity" => Ok(suite_coercivity(trials, seed)),
        other => Err(Error::invalid(format!("unknown suite '{other}'"))),
    }
}

fn random_smooth_state(grid: VelocityGrid, rng: &mut impl Rng) -> DistributionState {
    let mut parts = Vec::new();
    for _ in 0..3 {
        let c = [
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
        ];
        let t = rng.gen_range(0.2..0.8);
        let a = rng.gen_range(0.05..0.8);
        parts.push((c, t, a));
    }
    DistributionState::from_fn(grid, 0.0, |v| {
        parts
            .iter()
            .map(|(c, t, a)| {
                let d = math::sub(v, *c);
                a * (-0.5 * math::dot(d, d) / t).exp()
            })
            .sum()
    })
    .unwrap()
}
