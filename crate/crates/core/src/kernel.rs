//! Collision kernel B(v−v*, σ), post-collision kinematics and the angular
//! weight κ(θ).
//!
//! The kernel family is either the hard sphere B = |v−v*| or a screened-delta
//! form B = |v−v*|(Ψ̂(|v−v'|) + Ψ̂(|v−v*'|))² with a radial Ψ̂ given in closed
//! form (Yukawa) or as a sample table. Every admissible kernel satisfies
//!
//! ```text
//! a |v−v*|^{β+1} / (1 + |v−v*|^β)  ≤  B(v−v*, σ)  ≤  b |v−v*|
//! ```
//!
//! with user-supplied constants 0 < a ≤ b and β ≥ 3.

use crate::grid::DistributionState;
use crate::math::{self, Vec3};
use crate::{Error, Result};

/// Radial profile Ψ̂ for the screened-delta family. The stored base profile is
/// composed with the modifiers as Ψ̂(ξ) = amp · base(ξ · arg_scale), which is
/// how ℏ-rescaling acts on it.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiHat {
    /// 1 − 1/(1 + ξ²), the delta-minus-Yukawa potential transform.
    Yukawa { amp: f64, arg_scale: f64 },
    /// Monotone radial sample table (ξ strictly increasing from 0), evaluated
    /// by local cubic (Catmull-Rom) interpolation, held constant beyond the
    /// last sample.
    Table {
        xi: Vec<f64>,
        value: Vec<f64>,
        amp: f64,
        arg_scale: f64,
    },
}

impl PsiHat {
    pub fn yukawa() -> Self {
        PsiHat::Yukawa {
            amp: 1.0,
            arg_scale: 1.0,
        }
    }

    pub fn table(xi: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if xi.len() != value.len() || xi.len() < 2 {
            return Err(Error::invalid("psi table needs >= 2 (xi, value) rows"));
        }
        if xi[0] != 0.0 {
            return Err(Error::invalid("psi table must start at xi = 0"));
        }
        if xi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("psi table xi must be strictly increasing"));
        }
        Ok(PsiHat::Table {
            xi,
            value,
            amp: 1.0,
            arg_scale: 1.0,
        })
    }

    /// Evaluate Ψ̂(ξ) including the rescale modifiers.
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            PsiHat::Yukawa { amp, arg_scale } => {
                let x = xi * arg_scale;
                amp * (1.0 - 1.0 / (1.0 + x * x))
            }
            PsiHat::Table {
                xi: xs,
                value,
                amp,
                arg_scale,
            } => {
                let x = xi * arg_scale;
                amp * table_cubic(xs, value, x)
            }
        }
    }

    fn rescaled(&self, amp_factor: f64, arg_factor: f64) -> Self {
        match self {
            PsiHat::Yukawa { amp, arg_scale } => PsiHat::Yukawa {
                amp: amp * amp_factor,
                arg_scale: arg_scale * arg_factor,
            },
            PsiHat::Table {
                xi,
                value,
                amp,
                arg_scale,
            } => PsiHat::Table {
                xi: xi.clone(),
                value: value.clone(),
                amp: amp * amp_factor,
                arg_scale: arg_scale * arg_factor,
            },
        }
    }
}

/// Catmull-Rom interpolation on a sample table, clamped outside the range.
fn table_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let mut i = xs.partition_point(|&v| v <= x) - 1;
    if i >= n - 1 {
        i = n - 2;
    }
    let x0 = xs[i];
    let x1 = xs[i + 1];
    let t = (x - x0) / (x1 - x0);
    let y0 = ys[i];
    let y1 = ys[i + 1];
    // One-sided slopes at the table edges.
    let m0 = if i == 0 {
        (y1 - y0) / (x1 - x0)
    } else {
        (y1 - ys[i - 1]) / (x1 - xs[i - 1])
    };
    let m1 = if i + 2 >= n {
        (y1 - y0) / (x1 - x0)
    } else {
        (ys[i + 2] - y0) / (xs[i + 2] - x0)
    };
    let h = x1 - x0;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

/// Kernel family selector.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// B = |v−v*| exactly; Ψ̂ plays no role.
    HardSphere,
    ScreenedDelta { psi: PsiHat },
}

/// Collision kernel description together with its a/b/β bound constants and
/// the ℏ normalization it is written at.
///
/// `a`, `b`, `beta` always bound the *evaluated* kernel; ℏ-rescaling leaves
/// the evaluated kernel (hence a, b) unchanged and only re-expresses Ψ̂ and
/// the distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub hbar: f64,
}

impl KernelSpec {
    /// Hard-sphere kernel with the admissible a = b = 1, β = 3.
    pub fn hard_sphere() -> Self {
        KernelSpec {
            family: KernelFamily::HardSphere,
            a: 1.0,
            b: 1.0,
            beta: 3.0,
            hbar: 1.0,
        }
    }

    /// Screened-delta kernel with the Yukawa profile: β = 4, a = 1/8, b = 4.
    pub fn yukawa() -> Self {
        KernelSpec {
            family: KernelFamily::ScreenedDelta {
                psi: PsiHat::yukawa(),
            },
            a: 0.125,
            b: 4.0,
            beta: 4.0,
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b >= self.a && self.b.is_finite()) {
            return Err(Error::invalid(format!(
                "kernel bounds need 0 < a <= b (got a = {}, b = {})",
                self.a, self.b
            )));
        }
        if !(self.beta >= 3.0) {
            return Err(Error::invalid(format!(
                "kernel exponent needs beta >= 3 (got {})",
                self.beta
            )));
        }
        if !(self.hbar > 0.0 && self.hbar <= 1.0) {
            return Err(Error::invalid(format!(
                "hbar must lie in (0, 1] (got {})",
                self.hbar
            )));
        }
        Ok(())
    }

    /// Ψ̂ as evaluated at this ℏ level: P(ξ) = ℏ⁻² Ψ̂_stored(ξ/ℏ).
    fn effective_psi(&self) -> Option<PsiHat> {
        match &self.family {
            KernelFamily::HardSphere => None,
            KernelFamily::ScreenedDelta { psi } => {
                let h = self.hbar;
                Some(psi.rescaled(1.0 / (h * h), 1.0 / h))
            }
        }
    }

    /// Lower envelope a·r^{β+1}/(1 + r^β) of the kernel at relative speed r.
    pub fn lower_bound(&self, r: f64) -> f64 {
        self.a * r.powf(self.beta + 1.0) / (1.0 + r.powf(self.beta))
    }

    /// Upper envelope b·r.
    pub fn upper_bound(&self, r: f64) -> f64 {
        self.b * r
    }

    /// Flattened form for hot loops: evaluates B from |v−v*| and the half-angle
    /// sine/cosine instead of full vectors.
    pub fn prepare(&self) -> PreparedKernel {
        match self.effective_psi() {
            None => PreparedKernel::HardSphere,
            Some(psi) => PreparedKernel::Screened { psi },
        }
    }

    /// Evaluate B(v−v*, σ).
    pub fn evaluate(&self, v: Vec3, v_star: Vec3, sigma: Vec3) -> Result<f64> {
        check_unit(sigma)?;
        let g = math::sub(v, v_star);
        let r = math::norm(g);
        if r == 0.0 {
            return Ok(0.0);
        }
        let cos_theta = (math::dot(g, sigma) / r).clamp(-1.0, 1.0);
        let sin_half = ((1.0 - cos_theta) * 0.5).sqrt();
        let cos_half = ((1.0 + cos_theta) * 0.5).sqrt();
        Ok(self.prepare().eval(r, sin_half, cos_half))
    }
}

/// Kernel evaluator specialized for the inner quadrature loops.
#[derive(Debug, Clone)]
pub enum PreparedKernel {
    HardSphere,
    Screened { psi: PsiHat },
}

impl PreparedKernel {
    /// B from relative speed r = |v−v*| and sin(θ/2), cos(θ/2). Uses
    /// |v−v'| = r·sin(θ/2) and |v−v*'| = r·cos(θ/2).
    #[inline]
    pub fn eval(&self, r: f64, sin_half: f64, cos_half: f64) -> f64 {
        match self {
            PreparedKernel::HardSphere => r,
            PreparedKernel::Screened { psi } => {
                let s = psi.eval(r * sin_half) + psi.eval(r * cos_half);
                r * s * s
            }
        }
    }

    #[inline]
    pub fn is_isotropic(&self) -> bool {
        matches!(self, PreparedKernel::HardSphere)
    }
}

/// One collision: pre/post velocities, scattering direction and angle.
#[derive(Debug, Clone, Copy)]
pub struct CollisionPair {
    pub v: Vec3,
    pub v_star: Vec3,
    pub sigma: Vec3,
    pub v_prime: Vec3,
    pub v_star_prime: Vec3,
    /// θ = ∠(n, σ) ∈ [0, π], with n = (v−v*)/|v−v*| (n = e₁ when v = v*).
    pub theta: f64,
}

fn check_unit(sigma: Vec3) -> Result<()> {
    let norm = math::norm(sigma);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitSigma { norm });
    }
    Ok(())
}

/// Post-collision velocities in the σ-representation:
/// v' = (v+v*)/2 + (|v−v*|/2)σ, v*' = (v+v*)/2 − (|v−v*|/2)σ.
pub fn post_collision(v: Vec3, v_star: Vec3, sigma: Vec3) -> Result<CollisionPair> {
    check_unit(sigma)?;
    let center = math::scale(math::add(v, v_star), 0.5);
    let g = math::sub(v, v_star);
    let half_speed = 0.5 * math::norm(g);
    let v_prime = math::add(center, math::scale(sigma, half_speed));
    let v_star_prime = math::sub(center, math::scale(sigma, half_speed));
    let n = if half_speed > 0.0 {
        math::scale(g, 0.5 / half_speed)
    } else {
        [1.0, 0.0, 0.0]
    };
    // atan2 of |n×σ| against ⟨n,σ⟩ stays accurate near θ = 0 and θ = π.
    let theta = math::norm(math::cross(n, sigma)).atan2(math::dot(n, sigma));
    Ok(CollisionPair {
        v,
        v_star,
        sigma,
        v_prime,
        v_star_prime,
        theta,
    })
}

/// Impact direction ω of the ω-representation, satisfying
/// σ = n − 2⟨n, ω⟩ω. Deterministic representative when σ = n.
pub fn sigma_to_omega(v: Vec3, v_star: Vec3, sigma: Vec3) -> Result<Vec3> {
    check_unit(sigma)?;
    let g = math::sub(v, v_star);
    let speed = math::norm(g);
    if speed == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let n = math::scale(g, 1.0 / speed);
    let d = math::sub(n, sigma);
    let d_norm = math::norm(d);
    if d_norm < 1e-14 {
        // σ = n: the identity collision admits any ω ⊥ n.
        return Ok(math::any_orthogonal(n));
    }
    Ok(math::scale(d, 1.0 / d_norm))
}

/// Angular coercivity weight κ(θ) = min{(1−sin(θ/2))², (1−cos(θ/2))²}.
pub fn kappa(theta: f64) -> Result<f64> {
    if !(-1e-9..=std::f64::consts::PI + 1e-9).contains(&theta) {
        return Err(Error::invalid(format!(
            "kappa: theta = {theta} outside [0, pi]"
        )));
    }
    let t = theta.clamp(0.0, std::f64::consts::PI);
    let s = (1.0 - (0.5 * t).sin()).powi(2);
    let c = (1.0 - (0.5 * t).cos()).powi(2);
    Ok(s.min(c))
}

/// Direction of the ℏ scaling transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleDirection {
    /// (ℏ-level spec, physical state) ↦ (ℏ = 1 spec, f̃(t, v) = ℏ³ f(ℏ³t, v)).
    Normalize,
    /// Inverse of `Normalize`, keyed by the same ℏ-level spec.
    Denormalize,
}

/// Apply the scale normalization f̃(t,v) = ℏ³ f(ℏ³t, v) and
/// Ψ̂(ξ) = ℏ⁻² Φ̂(ξ/ℏ). `spec` is always the physical (ℏ-level) description;
/// the evaluated kernel is invariant, so a/b/β pass through unchanged.
pub fn hbar_rescale(
    spec: &KernelSpec,
    f: &DistributionState,
    direction: RescaleDirection,
) -> Result<(KernelSpec, DistributionState)> {
    spec.validate()?;
    let h = spec.hbar;
    let h3 = h * h * h;
    let (value_factor, time_factor, out_hbar) = match direction {
        RescaleDirection::Normalize => (h3, 1.0 / h3, 1.0),
        RescaleDirection::Denormalize => (1.0 / h3, h3, spec.hbar),
    };
    let family = match (&spec.family, direction) {
        (KernelFamily::HardSphere, _) => KernelFamily::HardSphere,
        (KernelFamily::ScreenedDelta { psi }, RescaleDirection::Normalize) => {
            KernelFamily::ScreenedDelta {
                psi: psi.rescaled(1.0 / (h * h), 1.0 / h),
            }
        }
        (KernelFamily::ScreenedDelta { psi }, RescaleDirection::Denormalize) => {
            KernelFamily::ScreenedDelta { psi: psi.clone() }
        }
    };
    let out_spec = KernelSpec {
        family,
        a: spec.a,
        b: spec.b,
        beta: spec.beta,
        hbar: out_hbar,
    };
    let out_state = f.scaled(value_factor, time_factor);
    Ok((out_spec, out_state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VelocityGrid;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = math::norm(v);
            if n > 1e-3 && n <= 1.0 {
                return math::scale(v, 1.0 / n);
            }
        }
    }

    fn rand_vec(rng: &mut impl Rng, scale: f64) -> Vec3 {
        [
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        ]
    }

    #[test]
    fn post_collision_zero_center_of_mass() {
        let p = post_collision([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.v_prime, [0.0, 1.0, 0.0]);
        assert_eq!(p.v_star_prime, [0.0, -1.0, 0.0]);
    }

    #[test]
    fn post_collision_zero_relative_velocity() {
        let v = [0.3, -0.2, 0.7];
        let p = post_collision(v, v, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.v_prime, v);
        assert_eq!(p.v_star_prime, v);
    }

    #[test]
    fn post_collision_sigma_parallel_to_n() {
        let p = post_collision([2.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert!(math::norm(math::sub(p.v_prime, [2.0, 0.0, 0.0])) < 1e-15);
        assert!(math::norm(p.v_star_prime) < 1e-15);
        assert!(p.theta.abs() < 1e-12);
    }

    #[test]
    fn post_collision_conserves_momentum_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let v = rand_vec(&mut rng, 5.0);
            let w = rand_vec(&mut rng, 5.0);
            let s = rand_unit(&mut rng);
            let p = post_collision(v, w, s).unwrap();
            let mom = math::sub(math::add(p.v_prime, p.v_star_prime), math::add(v, w));
            let e_in = math::dot(v, v) + math::dot(w, w);
            let e_out = math::dot(p.v_prime, p.v_prime) + math::dot(p.v_star_prime, p.v_star_prime);
            let scale = e_in.max(1e-30);
            assert!(math::norm(mom) <= 1e-12 * scale.sqrt().max(1.0));
            assert!((e_in - e_out).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn non_unit_sigma_rejected() {
        let e = post_collision([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
        assert!(matches!(e, Err(Error::NonUnitSigma { .. })));
    }

    #[test]
    fn sigma_to_omega_identity_collision() {
        let v = [1.0, 0.0, 0.0];
        let w = [0.0, 0.0, 0.0];
        let n = [1.0, 0.0, 0.0];
        let omega = sigma_to_omega(v, w, n).unwrap();
        assert!(math::dot(omega, n).abs() < 1e-12);
    }

    #[test]
    fn sigma_to_omega_head_on() {
        let omega = sigma_to_omega([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]).unwrap();
        assert!((math::dot(omega, [1.0, 0.0, 0.0]).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_to_omega_degenerate() {
        let v = [0.5, 0.5, 0.5];
        assert!(matches!(
            sigma_to_omega(v, v, [1.0, 0.0, 0.0]),
            Err(Error::DegenerateDirection)
        ));
    }

    #[test]
    fn omega_representation_round_trip() {
        // ω must reproduce σ by reflection and the ω-form velocities must
        // match the σ-form ones.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let v = rand_vec(&mut rng, 4.0);
            let mut w = rand_vec(&mut rng, 4.0);
            if math::norm(math::sub(v, w)) < 1e-9 {
                w[0] += 1.0;
            }
            let sigma = rand_unit(&mut rng);
            let omega = sigma_to_omega(v, w, sigma).unwrap();
            let g = math::sub(v, w);
            let n = math::scale(g, 1.0 / math::norm(g));
            let sigma_back = math::sub(n, math::scale(omega, 2.0 * math::dot(n, omega)));
            assert!(math::norm(math::sub(sigma_back, sigma)) < 1e-12);
            let p = post_collision(v, w, sigma).unwrap();
            let v_prime_omega = math::sub(v, math::scale(omega, math::dot(g, omega)));
            let v_star_prime_omega = math::add(w, math::scale(omega, math::dot(g, omega)));
            assert!(math::norm(math::sub(v_prime_omega, p.v_prime)) < 1e-12);
            assert!(math::norm(math::sub(v_star_prime_omega, p.v_star_prime)) < 1e-12);
        }
    }

    #[test]
    fn kappa_endpoints_and_symmetry() {
        let pi = std::f64::consts::PI;
        assert_eq!(kappa(0.0).unwrap(), 0.0);
        assert!(kappa(pi).unwrap() < 1e-30);
        let mid = kappa(0.5 * pi).unwrap();
        let expected = (1.0 - 0.5f64.sqrt()).powi(2);
        assert!((mid - expected).abs() < 1e-15);
        for k in 1..40 {
            let t = pi * k as f64 / 40.0;
            let a = kappa(t).unwrap();
            let b = kappa(pi - t).unwrap();
            assert!((a - b).abs() < 1e-14);
            assert!(a <= expected + 1e-15);
        }
        assert!(kappa(4.0).is_err());
    }

    #[test]
    fn hard_sphere_kernel_value() {
        let spec = KernelSpec::hard_sphere();
        let b = spec
            .evaluate([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0])
            .unwrap();
        assert_eq!(b, 1.0);
    }

    #[test]
    fn screened_kernel_vanishes_at_zero_relative_velocity() {
        let spec = KernelSpec::yukawa();
        let v = [0.7, -0.1, 0.2];
        assert_eq!(spec.evaluate(v, v, [0.0, 0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn kernel_bounds_hold_on_random_samples() {
        // Both supported families against a·r^{β+1}/(1+r^β) ≤ B ≤ b·r,
        // across small and large relative speeds.
        for spec in [KernelSpec::hard_sphere(), KernelSpec::yukawa()] {
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            for _ in 0..20_000 {
                let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
                let v = rand_vec(&mut rng, scale);
                let w = rand_vec(&mut rng, scale);
                let s = rand_unit(&mut rng);
                let b = spec.evaluate(v, w, s).unwrap();
                let r = math::norm(math::sub(v, w));
                assert!(b >= spec.lower_bound(r) * (1.0 - 1e-12));
                assert!(b <= spec.upper_bound(r) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn kernel_depends_only_on_speed_and_angle() {
        // Rotate/reflect the whole configuration and compare.
        let spec = KernelSpec::yukawa();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let rot = |v: Vec3| [v[1], v[2], v[0]];
        let refl = |v: Vec3| [-v[0], v[1], v[2]];
        for _ in 0..2000 {
            let v = rand_vec(&mut rng, 3.0);
            let w = rand_vec(&mut rng, 3.0);
            let s = rand_unit(&mut rng);
            let b0 = spec.evaluate(v, w, s).unwrap();
            let b1 = spec.evaluate(rot(v), rot(w), rot(s)).unwrap();
            let b2 = spec.evaluate(refl(v), refl(w), refl(s)).unwrap();
            let tol = 1e-13 * b0.abs().max(1.0);
            assert!((b0 - b1).abs() <= tol);
            assert!((b0 - b2).abs() <= tol);
        }
    }

    #[test]
    fn psi_table_matches_closed_form() {
        // Tabulated Yukawa recovers the closed form away from the sparse ends.
        let xs: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 1.0 - 1.0 / (1.0 + x * x)).collect();
        let table = PsiHat::table(xs, ys).unwrap();
        let exact = PsiHat::yukawa();
        for i in 0..200 {
            let xi = 0.07 + i as f64 * 0.09;
            assert!((table.eval(xi) - exact.eval(xi)).abs() < 2e-4, "xi={xi}");
        }
    }

    #[test]
    fn hbar_identity_and_round_trip() {
        let grid = VelocityGrid::new(2.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let state = DistributionState::from_values(grid, values, 0.25).unwrap();

        let unit = KernelSpec::yukawa();
        let (s1, f1) = hbar_rescale(&unit, &state, RescaleDirection::Normalize).unwrap();
        assert_eq!(s1, unit);
        assert_eq!(f1.values(), state.values());

        let mut half = KernelSpec::yukawa();
        half.hbar = 0.5;
        let (snorm, fnorm) = hbar_rescale(&half, &state, RescaleDirection::Normalize).unwrap();
        assert_eq!(snorm.hbar, 1.0);
        for (a, b) in fnorm.values().iter().zip(state.values()) {
            assert!((a - b / 8.0).abs() <= 1e-16 * b.abs().max(1.0));
        }
        assert!((fnorm.time() - state.time() * 8.0).abs() < 1e-14);
        // Normalized kernel evaluates identically to the physical one.
        let v = [1.3, 0.2, -0.4];
        let w = [-0.2, 0.8, 0.1];
        let s = [0.0, 0.6, 0.8];
        let b_phys = half.evaluate(v, w, s).unwrap();
        let b_norm = snorm.evaluate(v, w, s).unwrap();
        assert!((b_phys - b_norm).abs() <= 1e-13 * b_phys.max(1.0));

        let (_, back) = hbar_rescale(&half, &fnorm, RescaleDirection::Denormalize).unwrap();
        for (a, b) in back.values().iter().zip(state.values()) {
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
        assert!((back.time() - state.time()).abs() < 1e-14);
    }

    #[test]
    fn hbar_out_of_range_rejected() {
        let mut spec = KernelSpec::hard_sphere();
        spec.hbar = 1.5;
        let grid = VelocityGrid::new(1.0, 4).unwrap();
        let state = DistributionState::constant(grid, 1.0, 0.0);
        assert!(hbar_rescale(&spec, &state, RescaleDirection::Normalize).is_err());
    }

    #[test]
    fn kappa_integral_over_sphere_matches_closed_form() {
        // ∫_{S²} κ^{3/2} dσ = 2π ∫ κ(θ)^{3/2} sinθ dθ = (22√2 − 31)π/5.
        let f = |t: f64| kappa(t).unwrap().powf(1.5) * t.sin();
        let integral = 2.0
            * std::f64::consts::PI
            * crate::math::adaptive_simpson(&f, 0.0, std::f64::consts::PI, 1e-12);
        let exact = (22.0 * 2f64.sqrt() - 31.0) * std::f64::consts::PI / 5.0;
        assert!((integral - exact).abs() < 1e-9);
    }
}
