//! Truncated uniform velocity lattice, S² quadrature, and grid-sampled
//! distributions with their moments and thermodynamic diagnostics.

use crate::math::{self, Vec3};
use crate::{Error, Result};
use serde::Serialize;

/// Cell-centered uniform lattice on [−L, L]³ with N points per axis.
/// Node i along an axis sits at −L + (i + 1/2)h, h = 2L/N, so every node is
/// strictly inside the domain and all quadrature weights equal h³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid {
    extent: f64,
    points_per_axis: usize,
}

impl VelocityGrid {
    pub fn new(extent: f64, points_per_axis: usize) -> Result<Self> {
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::invalid("grid extent must be positive and finite"));
        }
        if points_per_axis < 4 {
            return Err(Error::invalid("grid needs at least 4 points per axis"));
        }
        Ok(VelocityGrid {
            extent,
            points_per_axis,
        })
    }

    #[inline]
    pub fn extent(&self) -> f64 {
        self.extent
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points_per_axis as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(3)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.spacing()
    }

    /// Axis coordinates, precomputed once for loops.
    pub fn axis_coords(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.axis_coord(i)).collect()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.points_per_axis + iy) * self.points_per_axis + iz
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Vec3 {
        let n = self.points_per_axis;
        let iz = idx % n;
        let iy = (idx / n) % n;
        let ix = idx / (n * n);
        [self.axis_coord(ix), self.axis_coord(iy), self.axis_coord(iz)]
    }
}

/// Quadrature rule on the unit sphere: tensor Gauss-Legendre in cos θ times
/// a uniform (trapezoid) rule in the azimuth.
#[derive(Debug, Clone)]
pub struct AngularQuadrature {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

impl AngularQuadrature {
    /// `n_polar` Gauss-Legendre nodes in u = cos θ, `n_azimuth` uniform nodes
    /// in φ. Exact for spherical harmonics of degree ≤ min(2·n_polar − 1,
    /// n_azimuth − 1). An even `n_azimuth` makes the node set symmetric under
    /// σ → −σ, which the collision operators rely on.
    pub fn gauss_legendre_product(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 1 || n_azimuth < 3 {
            return Err(Error::invalid(
                "angular quadrature needs n_polar >= 1 and n_azimuth >= 3",
            ));
        }
        let (u, wu) = math::gauss_legendre(n_polar);
        let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (ui, wui) in u.iter().zip(&wu) {
            let s = (1.0 - ui * ui).max(0.0).sqrt();
            for k in 0..n_azimuth {
                let phi = dphi * k as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), *ui]);
                weights.push(wui * dphi);
            }
        }
        Ok(AngularQuadrature { nodes, weights })
    }

    #[inline]
    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total weight; 4π up to roundoff.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Antipodal folding: pairs every node with its σ → −σ partner and
    /// returns one representative per pair with doubled weight. `None` when
    /// the rule is not antipodally symmetric.
    pub fn folded(&self) -> Option<(Vec<Vec3>, Vec<f64>)> {
        let m = self.nodes.len();
        let mut used = vec![false; m];
        let mut nodes = Vec::with_capacity(m / 2);
        let mut weights = Vec::with_capacity(m / 2);
        for i in 0..m {
            if used[i] {
                continue;
            }
            let anti = math::scale(self.nodes[i], -1.0);
            let mut partner = None;
            for j in (i + 1)..m {
                if !used[j]
                    && math::norm(math::sub(self.nodes[j], anti)) < 1e-12
                    && (self.weights[j] - self.weights[i]).abs() < 1e-12
                {
                    partner = Some(j);
                    break;
                }
            }
            let j = partner?;
            used[i] = true;
            used[j] = true;
            nodes.push(self.nodes[i]);
            weights.push(2.0 * self.weights[i]);
        }
        Some((nodes, weights))
    }
}

/// Moments and norms of a grid distribution: M₀, M₁, M₂, the weighted
/// ‖·‖_{L¹_s} family for s ∈ {0, 1, 2, 3}, L∞ and L².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentVector {
    pub m0: f64,
    pub m1: [f64; 3],
    pub m2: f64,
    pub l1s: [f64; 4],
    pub linf: f64,
    pub l2: f64,
}

impl MomentVector {
    /// ‖f‖_{L¹} (= M₀ for nonnegative states).
    #[inline]
    pub fn l1(&self) -> f64 {
        self.l1s[0]
    }
}

/// Grid sample of f(t, ·): nonnegative node values plus the sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionState {
    grid: VelocityGrid,
    values: Vec<f64>,
    time: f64,
}

impl DistributionState {
    pub fn from_values(grid: VelocityGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "distribution values must be finite and nonnegative",
            ));
        }
        if time < 0.0 {
            return Err(Error::invalid("state time must be nonnegative"));
        }
        Ok(DistributionState { grid, values, time })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        DistributionState {
            values: vec![0.0; grid.len()],
            grid,
            time: 0.0,
        }
    }

    pub fn constant(grid: VelocityGrid, c: f64, time: f64) -> Self {
        DistributionState {
            values: vec![c.max(0.0); grid.len()],
            grid,
            time,
        }
    }

    /// Grid sample of the density profile `f`.
    pub fn from_fn(grid: VelocityGrid, time: f64, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        DistributionState::from_values(grid, values, time)
    }

    /// Isotropic Maxwellian with the given continuum mass and temperature.
    pub fn gaussian_iso(grid: VelocityGrid, mass: f64, temperature: f64) -> Result<Self> {
        DistributionState::gaussian_aniso(grid, mass, [temperature; 3])
    }

    /// Anisotropic Maxwellian with diagonal temperatures.
    pub fn gaussian_aniso(grid: VelocityGrid, mass: f64, temps: [f64; 3]) -> Result<Self> {
        if mass <= 0.0 || temps.iter().any(|t| *t <= 0.0) {
            return Err(Error::invalid("gaussian needs positive mass and temperatures"));
        }
        let norm = mass
            / ((2.0 * std::f64::consts::PI).powf(1.5) * (temps[0] * temps[1] * temps[2]).sqrt());
        DistributionState::from_fn(grid, 0.0, |v| {
            norm * (-0.5 * (v[0] * v[0] / temps[0] + v[1] * v[1] / temps[1] + v[2] * v[2] / temps[2]))
                .exp()
        })
    }

    /// Indicator of the ball |v| ≤ radius with the given height.
    pub fn ball_indicator(grid: VelocityGrid, radius: f64, height: f64) -> Result<Self> {
        if radius <= 0.0 || height < 0.0 {
            return Err(Error::invalid("ball indicator needs radius > 0, height >= 0"));
        }
        DistributionState::from_fn(grid, 0.0, |v| {
            if math::dot(v, v) <= radius * radius {
                height
            } else {
                0.0
            }
        })
    }

    /// Sum of two drifting Maxwellians.
    pub fn two_maxwellian(
        grid: VelocityGrid,
        masses: [f64; 2],
        temps: [f64; 2],
        centers: [Vec3; 2],
    ) -> Result<Self> {
        if masses.iter().any(|m| *m < 0.0) || temps.iter().any(|t| *t <= 0.0) {
            return Err(Error::invalid("mixture needs masses >= 0 and temps > 0"));
        }
        let norms = [
            masses[0] / ((2.0 * std::f64::consts::PI * temps[0]).powf(1.5)),
            masses[1] / ((2.0 * std::f64::consts::PI * temps[1]).powf(1.5)),
        ];
        DistributionState::from_fn(grid, 0.0, |v| {
            let mut acc = 0.0;
            for k in 0..2 {
                let d = math::sub(v, centers[k]);
                acc += norms[k] * (-0.5 * math::dot(d, d) / temps[k]).exp();
            }
            acc
        })
    }

    #[inline]
    pub fn grid(&self) -> VelocityGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(&self, time: f64) -> Self {
        DistributionState {
            grid: self.grid,
            values: self.values.clone(),
            time,
        }
    }

    /// Value- and time-scaled copy (ℏ normalization plumbing).
    pub(crate) fn scaled(&self, value_factor: f64, time_factor: f64) -> Self {
        DistributionState {
            grid: self.grid,
            values: self.values.iter().map(|v| v * value_factor).collect(),
            time: self.time * time_factor,
        }
    }

    /// Trilinear interpolation with zero extension outside [−L, L]³.
    /// Never overshoots: the result is a convex combination of node values.
    #[inline]
    pub fn interpolate(&self, v: Vec3) -> f64 {
        let n = self.grid.points_per_axis as isize;
        let inv_h = 1.0 / self.grid.spacing();
        let l = self.grid.extent;
        let ux = (v[0] + l) * inv_h - 0.5;
        let uy = (v[1] + l) * inv_h - 0.5;
        let uz = (v[2] + l) * inv_h - 0.5;
        let ix = ux.floor();
        let iy = uy.floor();
        let iz = uz.floor();
        let fx = ux - ix;
        let fy = uy - iy;
        let fz = uz - iz;
        let (ix, iy, iz) = (ix as isize, iy as isize, iz as isize);
        let fetch = |x: isize, y: isize, z: isize| -> f64 {
            if x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n {
                0.0
            } else {
                self.values[((x * n + y) * n + z) as usize]
            }
        };
        let c00 = fetch(ix, iy, iz) * (1.0 - fx) + fetch(ix + 1, iy, iz) * fx;
        let c01 = fetch(ix, iy, iz + 1) * (1.0 - fx) + fetch(ix + 1, iy, iz + 1) * fx;
        let c10 = fetch(ix, iy + 1, iz) * (1.0 - fx) + fetch(ix + 1, iy + 1, iz) * fx;
        let c11 = fetch(ix, iy + 1, iz + 1) * (1.0 - fx) + fetch(ix + 1, iy + 1, iz + 1) * fx;
        let c0 = c00 * (1.0 - fy) + c10 * fy;
        let c1 = c01 * (1.0 - fy) + c11 * fy;
        c0 * (1.0 - fz) + c1 * fz
    }

    /// Midpoint-rule moments with weight h³; max over nodes for L∞.
    pub fn moments(&self) -> MomentVector {
        let w = self.grid.cell_volume();
        let n = self.grid.points_per_axis;
        let coords = self.grid.axis_coords();
        let mut m0 = 0.0;
        let mut m1 = [0.0; 3];
        let mut m2 = 0.0;
        let mut l1s = [0.0; 4];
        let mut linf: f64 = 0.0;
        let mut l2sq = 0.0;
        let mut idx = 0;
        for ix in 0..n {
            let x = coords[ix];
            for iy in 0..n {
                let y = coords[iy];
                for iz in 0..n {
                    let f = self.values[idx];
                    idx += 1;
                    if f == 0.0 {
                        continue;
                    }
                    let z = coords[iz];
                    let speed_sq = x * x + y * y + z * z;
                    let fw = f * w;
                    m0 += fw;
                    m1[0] += x * fw;
                    m1[1] += y * fw;
                    m1[2] += z * fw;
                    m2 += speed_sq * fw;
                    let br = (1.0 + speed_sq).sqrt();
                    l1s[0] += fw;
                    l1s[1] += br * fw;
                    l1s[2] += br * br * fw;
                    l1s[3] += br * br * br * fw;
                    linf = linf.max(f);
                    l2sq += f * f * w;
                }
            }
        }
        MomentVector {
            m0,
            m1,
            m2,
            l1s,
            linf,
            l2: l2sq.sqrt(),
        }
    }

    /// ‖f − g‖_{L¹} on a shared grid.
    pub fn l1_distance(&self, other: &DistributionState) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            });
        }
        let w = self.grid.cell_volume();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * w)
    }
}

/// Kinetic-to-critical temperature ratio
/// T̄/T̄_c = 2π ζ(3/2)^{5/3} / (3 ζ(5/2)) · M₂ / M₀^{5/3}.
pub fn temperature_ratio(m: &MomentVector) -> Result<f64> {
    if m.m0 <= 0.0 {
        return Err(Error::precondition(
            "temperature ratio requires M0 > 0".to_string(),
        ));
    }
    Ok(temperature_ratio_coefficient() * m.m2 / m.m0.powf(5.0 / 3.0))
}

/// 2π ζ(3/2)^{5/3} / (3 ζ(5/2)).
pub fn temperature_ratio_coefficient() -> f64 {
    2.0 * std::f64::consts::PI * math::zeta(1.5).powf(5.0 / 3.0) / (3.0 * math::zeta(2.5))
}

/// Result of centering a state at zero mean velocity.
#[derive(Debug, Clone)]
pub struct ShiftOutcome {
    pub state: DistributionState,
    /// Mean velocity that was removed.
    pub velocity_shift: Vec3,
    /// Mass lost to the domain boundary by the shift (relative to M₀).
    pub relative_mass_loss: f64,
    pub truncated: bool,
}

/// Translate f so the mean velocity vanishes (up to one cell), by trilinear
/// resampling at v + v₀. Mass pushed outside the grid is reported, never
/// silently renormalized.
pub fn zero_mean_shift(f: &DistributionState) -> Result<ShiftOutcome> {
    let m = f.moments();
    if m.m0 <= 0.0 {
        return Err(Error::precondition("zero_mean_shift requires M0 > 0"));
    }
    let grid = f.grid();
    let h = grid.spacing();
    let mut current = f.clone();
    let mut total_shift = [0.0; 3];
    // One resample almost always suffices; a couple of correction passes
    // absorb the interpolation bias for coarse grids.
    for _ in 0..4 {
        let m = current.moments();
        let v0 = math::scale(m.m1, 1.0 / m.m0);
        if math::norm(v0) <= h {
            break;
        }
        let values: Vec<f64> = (0..grid.len())
            .map(|i| current.interpolate(math::add(grid.node(i), v0)).max(0.0))
            .collect();
        total_shift = math::add(total_shift, v0);
        current = DistributionState {
            grid,
            values,
            time: f.time(),
        };
    }
    let m_new = current.moments();
    let loss = (m.m0 - m_new.m0) / m.m0;
    Ok(ShiftOutcome {
        state: current,
        velocity_shift: total_shift,
        relative_mass_loss: loss,
        truncated: loss.abs() > 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_nodes_strictly_inside() {
        let g = VelocityGrid::new(3.0, 8).unwrap();
        for i in 0..g.len() {
            let v = g.node(i);
            assert!(v.iter().all(|c| c.abs() < g.extent()));
        }
        assert!(g.cell_volume() > 0.0);
    }

    #[test]
    fn angular_quadrature_low_harmonics() {
        let q = AngularQuadrature::gauss_legendre_product(4, 8).unwrap();
        assert!((q.total_weight() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        let mut first = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for (s, w) in q.nodes().iter().zip(q.weights()) {
            for i in 0..3 {
                first[i] += w * s[i];
                for j in 0..3 {
                    second[i][j] += w * s[i] * s[j];
                }
            }
        }
        let third = 4.0 * std::f64::consts::PI / 3.0;
        for i in 0..3 {
            assert!(first[i].abs() < 1e-8);
            for j in 0..3 {
                let expect = if i == j { third } else { 0.0 };
                assert!((second[i][j] - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn angular_quadrature_folds_antipodally() {
        for (np, na) in [(4, 8), (3, 6), (5, 4)] {
            let q = AngularQuadrature::gauss_legendre_product(np, na).unwrap();
            let (nodes, weights) = q.folded().expect("even azimuth folds");
            assert_eq!(nodes.len(), q.len() / 2);
            let total: f64 = weights.iter().sum();
            assert!((total - q.total_weight()).abs() < 1e-10);
        }
        // Odd azimuth count is not antipodally symmetric.
        let q = AngularQuadrature::gauss_legendre_product(2, 5).unwrap();
        assert!(q.folded().is_none());
    }

    #[test]
    fn ball_moments_match_closed_form() {
        let g = VelocityGrid::new(2.0, 64).unwrap();
        let f = DistributionState::ball_indicator(g, 1.0, 1.0).unwrap();
        let m = f.moments();
        let exact_m0 = 4.0 * std::f64::consts::PI / 3.0;
        let exact_m2 = 4.0 * std::f64::consts::PI / 5.0;
        assert!((m.m0 - exact_m0).abs() / exact_m0 < 0.02);
        assert!((m.m2 - exact_m2).abs() / exact_m2 < 0.03);
    }

    #[test]
    fn zero_state_moments() {
        let g = VelocityGrid::new(1.0, 4).unwrap();
        let m = DistributionState::zeros(g).moments();
        assert_eq!(m.m0, 0.0);
        assert_eq!(m.m2, 0.0);
        assert_eq!(m.linf, 0.0);
        assert_eq!(m.l2, 0.0);
    }

    #[test]
    fn single_cell_moments() {
        let g = VelocityGrid::new(1.0, 8).unwrap();
        let mut values = vec![0.0; g.len()];
        // Node nearest the origin.
        let i = g.index(4, 4, 4);
        values[i] = 3.0;
        let f = DistributionState::from_values(g, values, 0.0).unwrap();
        let m = f.moments();
        assert!((m.m0 - 3.0 * g.cell_volume()).abs() < 1e-15);
        let node = g.node(i);
        assert!((m.m2 - 3.0 * g.cell_volume() * math::dot(node, node)).abs() < 1e-15);
        // The nearest node to the origin sits at (h/2, h/2, h/2).
        assert!(m.m2 <= 0.75 * g.spacing().powi(2) * m.m0 + 1e-15);
    }

    #[test]
    fn temperature_ratio_reference_value() {
        // Oracle: zeta by plain series + integral tail, 1e-6 accuracy.
        let slow_zeta = |s: f64| {
            let n = 3_000_000u64;
            let head: f64 = (1..n).map(|k| (k as f64).powf(-s)).sum();
            head + (n as f64).powf(1.0 - s) / (s - 1.0)
        };
        let coeff =
            2.0 * std::f64::consts::PI * slow_zeta(1.5).powf(5.0 / 3.0) / (3.0 * slow_zeta(2.5));
        let m = MomentVector {
            m0: 1.0,
            m1: [0.0; 3],
            m2: 1.0,
            l1s: [1.0, 1.0, 1.0, 1.0],
            linf: 1.0,
            l2: 1.0,
        };
        let r = temperature_ratio(&m).unwrap();
        assert!((r - coeff).abs() < 1e-5);
        assert!((r - 7.735).abs() < 5e-3);
    }

    #[test]
    fn temperature_ratio_degenerate_cases() {
        let mut m = MomentVector {
            m0: 2.0,
            m1: [0.0; 3],
            m2: 0.0,
            l1s: [2.0, 2.0, 2.0, 2.0],
            linf: 1.0,
            l2: 1.0,
        };
        assert_eq!(temperature_ratio(&m).unwrap(), 0.0);
        m.m0 = 0.0;
        assert!(temperature_ratio(&m).is_err());
    }

    #[test]
    fn temperature_ratio_scales_as_minus_two_thirds() {
        let g = VelocityGrid::new(4.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let f = DistributionState::gaussian_aniso(
                g,
                rng.gen_range(0.5..2.0),
                [
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.5..1.5),
                ],
            )
            .unwrap();
            let lambda: f64 = rng.gen_range(0.2..5.0);
            let scaled = DistributionState::from_values(
                g,
                f.values().iter().map(|v| v * lambda).collect(),
                0.0,
            )
            .unwrap();
            let r = temperature_ratio(&f.moments()).unwrap();
            let rs = temperature_ratio(&scaled.moments()).unwrap();
            assert!((rs - r * lambda.powf(-2.0 / 3.0)).abs() < 1e-10 * r);
        }
    }

    #[test]
    fn moments_are_linear() {
        let g = VelocityGrid::new(3.0, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fa: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let fb: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (alpha, beta) = (0.7, 1.9);
        let combo: Vec<f64> = fa.iter().zip(&fb).map(|(a, b)| alpha * a + beta * b).collect();
        let ma = DistributionState::from_values(g, fa, 0.0).unwrap().moments();
        let mb = DistributionState::from_values(g, fb, 0.0).unwrap().moments();
        let mc = DistributionState::from_values(g, combo, 0.0).unwrap().moments();
        for s in 0..4 {
            let expect = alpha * ma.l1s[s] + beta * mb.l1s[s];
            assert!((mc.l1s[s] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
        assert!((mc.m2 - (alpha * ma.m2 + beta * mb.m2)).abs() <= 1e-12 * mc.m2.max(1.0));
    }

    #[test]
    fn weighted_norms_are_ordered() {
        let g = VelocityGrid::new(3.0, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
            let m = DistributionState::from_values(g, vals, 0.0).unwrap().moments();
            assert!(m.l1s[2] <= m.l1s[3]);
            assert!(m.m2 <= m.l1s[2]);
            assert!(m.l1s[0] <= m.l1s[1]);
        }
    }

    #[test]
    fn radial_moment_identity_for_indicator() {
        // (3 M₀ / 4π)^{1/3} = (5 M₂ / 4π)^{1/5} exactly for a ball indicator;
        // for other radial profiles the p < q comparison is strict.
        let g = VelocityGrid::new(2.0, 48).unwrap();
        let ball = DistributionState::ball_indicator(g, 1.1, 1.0).unwrap();
        let m = ball.moments();
        let p_side = (3.0 * m.m0 / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
        let q_side = (5.0 * m.m2 / (4.0 * std::f64::consts::PI)).powf(1.0 / 5.0);
        assert!((p_side - q_side).abs() / q_side < 0.02);

        let gauss = DistributionState::gaussian_iso(g, 1.0, 0.15).unwrap();
        // Normalize to height 1 so the layer-cake hypothesis 0 ≤ φ ≤ 1 holds.
        let peak = gauss.values().iter().cloned().fold(0.0f64, f64::max);
        let phi = DistributionState::from_values(
            g,
            gauss.values().iter().map(|v| v / peak).collect(),
            0.0,
        )
        .unwrap();
        let m = phi.moments();
        let p_side = (3.0 * m.m0 / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
        let q_side = (5.0 * m.m2 / (4.0 * std::f64::consts::PI)).powf(1.0 / 5.0);
        assert!(p_side < q_side * 0.98, "strict inequality for a Gaussian");
    }

    #[test]
    fn interpolation_reproduces_nodes_and_vanishes_outside() {
        let g = VelocityGrid::new(2.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = DistributionState::from_values(g, vals, 0.0).unwrap();
        for idx in [0, 17, 100, g.len() - 1] {
            let v = g.node(idx);
            assert!((f.interpolate(v) - f.values()[idx]).abs() < 1e-14);
        }
        assert_eq!(f.interpolate([5.0, 0.0, 0.0]), 0.0);
        assert_eq!(f.interpolate([-2.6, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn zero_mean_shift_on_centered_gaussian_is_identity() {
        let g = VelocityGrid::new(4.0, 20).unwrap();
        let f = DistributionState::gaussian_iso(g, 1.0, 0.8).unwrap();
        let out = zero_mean_shift(&f).unwrap();
        let dist = out.state.l1_distance(&f).unwrap();
        assert!(dist / f.moments().m0 <= 1e-3);
        assert!(math::norm(out.velocity_shift) < g.spacing());
    }

    #[test]
    fn zero_mean_shift_moves_point_mass_to_origin() {
        let g = VelocityGrid::new(4.0, 16).unwrap();
        let mut vals = vec![0.0; g.len()];
        let src = g.index(12, 8, 8);
        vals[src] = 1.0;
        let f = DistributionState::from_values(g, vals, 0.0).unwrap();
        let out = zero_mean_shift(&f).unwrap();
        let m = out.state.moments();
        assert!(math::norm(m.m1) / m.m0 <= g.spacing());
    }

    #[test]
    fn zero_mean_shift_leaves_symmetric_state_alone() {
        let g = VelocityGrid::new(4.0, 16).unwrap();
        let f = DistributionState::two_maxwellian(
            g,
            [0.5, 0.5],
            [0.4, 0.4],
            [[1.2, 0.0, 0.0], [-1.2, 0.0, 0.0]],
        )
        .unwrap();
        let out = zero_mean_shift(&f).unwrap();
        assert_eq!(out.state.values(), f.values());
        assert_eq!(out.velocity_shift, [0.0, 0.0, 0.0]);
    }
}
