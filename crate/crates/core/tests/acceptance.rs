//! Acceptance suite: every exit criterion of the build, one test per
//! criterion, each printing one `ACCEPTANCE nn <name>: PASS/FAIL` line.
//!
//! Run with
//! `cargo test -p nordheim-core --test acceptance -- --nocapture --test-threads=1`.
//! Criterion 05 marches a 24³ lattice to t = 1 and dominates the runtime
//! (tens of minutes on a single core).

use nordheim_core::bounds;
use nordheim_core::collide::{self, CutoffParams};
use nordheim_core::grid::{
    temperature_ratio, AngularQuadrature, DistributionState, MomentVector, VelocityGrid,
};
use nordheim_core::kernel::{kappa, KernelSpec};
use nordheim_core::march::{self, Monitor, Scheme, SolverConfig};
use nordheim_core::math;
use nordheim_core::verify;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn check(n: u32, name: &str, pass: bool, detail: String) {
    println!(
        "ACCEPTANCE {n:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n:02} {name} failed: {detail}");
}

fn mixture_state(grid: VelocityGrid, rng: &mut impl Rng, amplitude: f64) -> DistributionState {
    let mut parts = Vec::new();
    for _ in 0..3 {
        let c = [
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
        ];
        let t = rng.gen_range(0.25..0.8);
        let a = amplitude * rng.gen_range(0.2..1.0);
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

fn l1_weighted(f: &DistributionState, s: f64) -> f64 {
    let grid = f.grid();
    let w = grid.cell_volume();
    (0..grid.len())
        .map(|i| math::bracket(grid.node(i)).powf(s) * f.values()[i] * w)
        .sum()
}

#[test]
fn criterion_01_c0_quadrature() {
    let start = Instant::now();
    let integrand = |t: f64| kappa(t).unwrap().powf(1.5) * t.sin();
    let value = 2.0
        * std::f64::consts::PI
        * math::adaptive_simpson(&integrand, 0.0, std::f64::consts::PI, 1e-12);
    let exact = (22.0 * 2f64.sqrt() - 31.0) * std::f64::consts::PI / 5.0;
    let err = (value - exact).abs();
    let elapsed = start.elapsed().as_secs_f64();
    check(
        1,
        "c0-quadrature",
        err <= 1e-8 && elapsed < 1.0,
        format!("C0 = {value:.10}, |err| = {err:.2e}, {elapsed:.3} s"),
    );
}

#[test]
fn criterion_02_inequality_suites() {
    let start = Instant::now();
    let trials = 1_000_000;
    let cases = [
        verify::suite_lemma_minmax(trials, 11),
        verify::suite_povzner(trials, 22),
        verify::suite_truncation(trials, 33),
        verify::suite_radial_moments(trials, 44),
    ];
    let elapsed = start.elapsed().as_secs_f64();
    let all = cases.iter().all(|c| c.status);
    let names: Vec<String> = cases
        .iter()
        .map(|c| format!("{}={:+.1e}", c.name, c.worst_margin))
        .collect();
    check(
        2,
        "inequality-suites",
        all && elapsed < 120.0,
        format!("{} trials each; {}; {elapsed:.1} s", trials, names.join(", ")),
    );
}

#[test]
fn criterion_03_operator_identities() {
    let start = Instant::now();
    // Bilinear symmetry, nodewise to 1e-12 of the field scale.
    let grid = VelocityGrid::new(3.0, 12).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(3, 6).unwrap();
    let spec = KernelSpec::hard_sphere();
    let params = CutoffParams::original();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut sym_worst: f64 = 0.0;
    for _ in 0..3 {
        let f = mixture_state(grid, &mut rng, 0.5);
        let g = mixture_state(grid, &mut rng, 0.5);
        let fg = collide::q_plus_bilinear(&f, &g, &quad, &spec, &params).unwrap();
        let gf = collide::q_plus_bilinear(&g, &f, &quad, &spec, &params).unwrap();
        let scale = fg.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
        for i in 0..grid.len() {
            sym_worst = sym_worst.max((fg[i] - gf[i]).abs() / scale);
        }
    }
    let sym_pass = sym_worst <= 1e-12;

    // Exchange-prime and both grazing-angle formulas, Monte Carlo, >= 1e5
    // samples, 3 combined standard errors.
    let w = verify::SeparableW {
        az: 1.0,
        c: -1.0,
        av: 1.0,
        min_sin_half: 0.0,
    };
    let comps = verify::check_change_of_variables(&w, [0.3, -0.2, 0.5], 120_000, 777).unwrap();
    let z_worst = comps.iter().map(|c| c.z_score).fold(0.0f64, f64::max);
    let mc_pass = comps.iter().all(|c| c.within(3.0));
    let elapsed = start.elapsed().as_secs_f64();
    check(
        3,
        "operator-identities",
        sym_pass && mc_pass && elapsed < 300.0,
        format!(
            "symmetry worst {sym_worst:.2e}; MC z-scores max {z_worst:.2} at {} samples; {elapsed:.1} s",
            comps[0].samples
        ),
    );
}

#[test]
fn criterion_04_gain_bounds() {
    let grid = VelocityGrid::new(3.0, 12).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(3, 6).unwrap();
    let spec = KernelSpec::hard_sphere();
    let params = CutoffParams::original();
    let slack = 1.05;
    let b = spec.b;
    let pi = std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = f64::INFINITY;
    let mut worst_name = "";
    let mut track = |name: &'static str, margin: f64| {
        if margin < worst {
            worst = margin;
            worst_name = name;
        }
    };
    for _ in 0..20 {
        let f = mixture_state(grid, &mut rng, 0.4);
        let g = mixture_state(grid, &mut rng, 0.4);
        let mf = f.moments();
        let mg = g.moments();
        let w_v = grid.cell_volume();

        let qff = collide::q_plus_bilinear(&f, &f, &quad, &spec, &params).unwrap();
        // Pointwise: Q⁺(f,f)(v) ≤ 2⁵ π b ‖f‖_∞ ‖f‖_{L¹₁} ⟨v⟩.
        for i in 0..grid.len() {
            let rhs = 2f64.powi(5) * pi * b * mf.linf * mf.l1s[1] * math::bracket(grid.node(i));
            track("pointwise", rhs * slack - qff[i]);
        }
        // L¹: ‖Q⁺(f,f)‖_{L¹} ≤ 4 π b ‖f‖²_{L¹₁}.
        let l1: f64 = qff.iter().sum::<f64>() * w_v;
        track("l1", 4.0 * pi * b * mf.l1s[1] * mf.l1s[1] * slack - l1);
        // L²: ‖Q⁺(f,f)‖_{L²} ≤ 2^{3+1/4} π b ‖f‖_∞^{1/2} ‖f‖_{L¹}^{1/2} ‖f‖_{L¹₂}.
        let l2 = (qff.iter().map(|x| x * x).sum::<f64>() * w_v).sqrt();
        track(
            "l2",
            2f64.powf(3.25) * pi * b * (mf.linf * mf.m0).sqrt() * mf.l1s[2] * slack - l2,
        );

        // Iterated: Q⁺(f, Q⁺(g,g)) ≤ 2^{5+2/3} π^{4/3} b² ‖f‖_{L¹}^{1/3} ‖f‖_{L²}^{2/3} ‖g‖_{L¹}².
        let qgg = collide::q_plus_bilinear(&g, &g, &quad, &spec, &params).unwrap();
        let qgg_state = DistributionState::from_values(grid, qgg, 0.0).unwrap();
        let iter1 = collide::q_plus_bilinear(&f, &qgg_state, &quad, &spec, &params).unwrap();
        let rhs1 = 2f64.powf(5.0 + 2.0 / 3.0)
            * pi.powf(4.0 / 3.0)
            * b
            * b
            * mf.m0.powf(1.0 / 3.0)
            * mf.l2.powf(2.0 / 3.0)
            * mg.m0
            * mg.m0;
        let max1 = iter1.iter().cloned().fold(0.0f64, f64::max);
        track("iterated", rhs1 * slack - max1);

        // Fourth order: Q⁺(Q⁺(f,Q⁺(g,g)), Q⁺(g,g)) ≤
        // 2^{11} π³ b⁴ ‖f‖_{L¹}^{2/3} ‖f‖_{L¹₁}^{1/3} ‖g‖_{L¹_{1/2}}^{4/3} ‖g‖_{L¹₂}^{2/3} ‖g‖_{L¹}².
        let iter1_state = DistributionState::from_values(grid, iter1, 0.0).unwrap();
        let iter2 =
            collide::q_plus_bilinear(&iter1_state, &qgg_state, &quad, &spec, &params).unwrap();
        let g_half = l1_weighted(&g, 0.5);
        let rhs2 = 2f64.powi(11)
            * pi.powi(3)
            * b.powi(4)
            * mf.m0.powf(2.0 / 3.0)
            * mf.l1s[1].powf(1.0 / 3.0)
            * g_half.powf(4.0 / 3.0)
            * mg.l1s[2].powf(2.0 / 3.0)
            * mg.m0
            * mg.m0;
        let max2 = iter2.iter().cloned().fold(0.0f64, f64::max);
        track("fourth-order", rhs2 * slack - max2);
    }
    check(
        4,
        "gain-bounds",
        worst >= 0.0,
        format!("20 states; tightest margin {worst:.3e} ({worst_name})"),
    );
}

fn conservation_run(points: usize) -> (f64, f64, f64, f64) {
    let grid = VelocityGrid::new(5.0, points).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(4, 8).unwrap();
    let spec = KernelSpec::hard_sphere();
    let f0 = DistributionState::gaussian_aniso(grid, 1e-4, [0.9, 1.0, 1.21]).unwrap();
    let params = CutoffParams::intermediate(bounds::k_star(spec.beta));
    let cfg = SolverConfig {
        scheme: Scheme::DuhamelIntermediate,
        dt_output: 1.0 / 16.0,
        t_end: 1.0,
        substeps_per_interval: 4, // dt = 1/64
        ..Default::default()
    };
    let start = Instant::now();
    let records = march::run(&f0, &spec, &quad, &params, &cfg, &[]).unwrap();
    let last = records.last().unwrap();
    let (dm, dp, de) = last.conservation_drift;
    (dm.abs(), dp.abs(), de.abs(), start.elapsed().as_secs_f64())
}

#[test]
fn criterion_05_conservation_and_refinement() {
    let (dm16, dp16, de16, t16) = conservation_run(16);
    let (dm24, dp24, de24, t24) = conservation_run(24);
    let coarse = dm16.max(de16);
    let fine = dm24.max(de24);
    let ratio = coarse / fine.max(1e-300);
    let pass = dm16 <= 1e-3 && de16 <= 1e-3 && dp16 <= 1e-3 && ratio >= 1.5;
    check(
        5,
        "conservation",
        pass,
        format!(
            "N=16: drift mass {dm16:.2e} mom {dp16:.2e} energy {de16:.2e} ({t16:.0} s); \
             N=24: mass {dm24:.2e} mom {dp24:.2e} energy {de24:.2e} ({t24:.0} s); \
             refinement ratio {ratio:.2}"
        ),
    );
}

#[test]
fn criterion_06_picard_contraction() {
    let grid = VelocityGrid::new(3.0, 8).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(2, 4).unwrap();
    let spec = KernelSpec::hard_sphere();
    let params = CutoffParams::cutoff(4.0, bounds::k_star(spec.beta));
    let cfg = SolverConfig {
        scheme: Scheme::PicardCutoff,
        picard_tol: 1e-13,
        substeps_per_interval: 4,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_ratio: f64 = 0.0;
    for trial in 0..10 {
        let amplitude = rng.gen_range(0.05..0.3);
        let f0 = mixture_state(grid, &mut rng, amplitude);
        let out = march::picard_step(&f0, &quad, &spec, &params, &cfg)
            .unwrap_or_else(|e| panic!("picard trial {trial}: {e}"));
        let floor = 1e-14 * f0.moments().m0;
        for w in out.residuals.windows(2) {
            if w[0] > floor {
                worst_ratio = worst_ratio.max(w[1] / w[0]);
            }
        }
    }
    check(
        6,
        "picard-contraction",
        worst_ratio <= 0.55,
        format!("10 random small data; worst successive-residual ratio {worst_ratio:.3}"),
    );
}

#[test]
fn criterion_07_moment_envelope() {
    let grid = VelocityGrid::new(4.0, 12).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(3, 6).unwrap();
    let spec = KernelSpec::hard_sphere();
    let k = bounds::k_star(spec.beta);
    let f0 = DistributionState::gaussian_iso(grid, 0.3, 0.7).unwrap();
    let params = CutoffParams::intermediate(k);
    let cfg = SolverConfig {
        scheme: Scheme::DuhamelIntermediate,
        dt_output: 0.125,
        t_end: 1.0,
        substeps_per_interval: 2,
        ..Default::default()
    };
    let monitors = [
        Monitor::MomentEnvelope { slack: 1.05 },
        Monitor::L13Uniform { slack: 1.05 },
    ];
    let records = march::run(&f0, &spec, &quad, &params, &cfg, &monitors).unwrap();
    let mut worst = f64::INFINITY;
    let mut all_pass = true;
    for r in &records {
        for flag in &r.bound_flags {
            all_pass &= flag.pass;
            worst = worst.min(flag.margin);
        }
    }
    let c1 = bounds::c1(&f0.moments(), &spec, k);
    check(
        7,
        "moment-envelope",
        all_pass,
        format!(
            "{} records; C1 = {c1:.3e}; tightest monitor margin {worst:.3e}",
            records.len()
        ),
    );
}

#[test]
fn criterion_08_coercivity() {
    let grid = VelocityGrid::new(4.0, 16).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(4, 8).unwrap();
    let spec = KernelSpec::hard_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = f64::INFINITY;
    for _ in 0..3 {
        let f = DistributionState::gaussian_aniso(
            grid,
            rng.gen_range(0.2..1.0),
            [
                rng.gen_range(0.5..1.1),
                rng.gen_range(0.5..1.1),
                rng.gen_range(0.5..1.1),
            ],
        )
        .unwrap();
        let k = rng.gen_range(0.05..0.5);
        let rep = verify::check_coercivity(&f, k, &spec, &quad).unwrap();
        worst = worst.min(rep.min_ratio);
    }
    check(
        8,
        "coercivity",
        worst >= 0.95,
        format!("centered Gaussians, N=16, 32 angular nodes; min L_K/(floor·<v>) = {worst:.4}"),
    );
}

fn scale_moments(m: &MomentVector, lambda: f64) -> MomentVector {
    MomentVector {
        m0: m.m0 * lambda,
        m1: math::scale(m.m1, lambda),
        m2: m.m2 * lambda,
        l1s: [
            m.l1s[0] * lambda,
            m.l1s[1] * lambda,
            m.l1s[2] * lambda,
            m.l1s[3] * lambda,
        ],
        linf: m.linf * lambda,
        l2: m.l2 * lambda,
    }
}

#[test]
fn criterion_09_theorem_end_to_end() {
    let spec = KernelSpec::hard_sphere(); // β = 3, a = b = 1
    let k_star = bounds::k_star(spec.beta); // 1/14 for β = 3
    let grid = VelocityGrid::new(4.5, 12).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(3, 6).unwrap();
    let g0 = DistributionState::gaussian_aniso(grid, 1.0, [0.8, 1.0, 1.2]).unwrap();
    let m_unit = g0.moments();

    // Bisection in ln λ on the theorem condition (LHS is linear in λ).
    let holds = |lambda: f64| {
        bounds::evaluate_condition(&scale_moments(&m_unit, lambda), &spec)
            .unwrap()
            .condition_holds
    };
    let (mut lo, mut hi) = (-250.0f64, 10.0f64);
    assert!(holds(lo.exp()) && !holds(hi.exp()));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Step safely inside the admissible region.
    let lambda = (lo - 0.1).exp();
    let f0 = DistributionState::from_values(
        grid,
        g0.values().iter().map(|v| v * lambda).collect(),
        0.0,
    )
    .unwrap();
    let m0 = f0.moments();
    let report = bounds::constants_chain(&m0, &spec, k_star).unwrap();
    assert!(report.condition_holds, "bisected datum must be admissible");

    let cfg = SolverConfig {
        scheme: Scheme::DuhamelIntermediate,
        dt_output: 0.5,
        t_end: 5.0,
        substeps_per_interval: 4, // dt = 1/8
        ..Default::default()
    };
    let params = CutoffParams::intermediate(k_star);
    let records = march::run(&f0, &spec, &quad, &params, &cfg, &[]).unwrap();
    let sup_linf = records.iter().map(|r| r.linf).fold(0.0f64, f64::max);
    let final_m = records.last().unwrap().moments;
    let ratio = temperature_ratio(&final_m).unwrap();

    let below_kstar = sup_linf <= k_star;
    let below_ceiling = sup_linf <= report.predicted_sup;
    let hot_enough = ratio >= report.temp_ratio_floor;
    check(
        9,
        "theorem-end-to-end",
        report.condition_holds && below_kstar && below_ceiling && hot_enough,
        format!(
            "lambda = {lambda:.3e}; sup_t Linf = {sup_linf:.3e} vs K* = {k_star:.4} and ceiling {:.3e}; \
             T/Tc = {ratio:.3e} vs floor {:.3e}",
            report.predicted_sup, report.temp_ratio_floor
        ),
    );
}

#[test]
fn criterion_10_k_star_optimality() {
    let mut worst = 0.0f64;
    for beta in [3.0, 4.0, 6.0, 10.0] {
        // Maximize ln(K/(1+2K)^{2(β+1)}): grid bracket + slope-sign bisection.
        let f = |k: f64| k.ln() - 2.0 * (beta + 1.0) * (1.0 + 2.0 * k).ln();
        let grid_n = 8192;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 1..=grid_n {
            let k = i as f64 / grid_n as f64;
            let v = f(k);
            if v > best.0 {
                best = (v, k);
            }
        }
        let delta = 3e-7;
        let (mut lo, mut hi) = (
            (best.1 - 2.0 / grid_n as f64).max(1e-9),
            best.1 + 2.0 / grid_n as f64,
        );
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid + delta) > f(mid - delta) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max((0.5 * (lo + hi) - bounds::k_star(beta)).abs());
    }
    check(
        10,
        "k-star-optimality",
        worst < 1e-10,
        format!("beta in {{3,4,6,10}}; worst |argmax - 1/(4beta+2)| = {worst:.2e}"),
    );
}

#[test]
fn criterion_11_throughput_and_speedup() {
    let grid = VelocityGrid::new(5.0, 16).unwrap();
    let quad = AngularQuadrature::gauss_legendre_product(4, 8).unwrap();
    let spec = KernelSpec::hard_sphere();
    let f = DistributionState::gaussian_iso(grid, 0.1, 1.0).unwrap();
    let params = CutoffParams::intermediate(bounds::k_star(spec.beta));
    let time_with = |threads: usize| -> f64 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let start = Instant::now();
        let r = pool
            .install(|| collide::evaluate(&f, &quad, &spec, &params))
            .unwrap();
        std::hint::black_box(&r.net);
        start.elapsed().as_secs_f64()
    };
    let t8 = time_with(8);
    let t1 = time_with(1);
    let speedup = t1 / t8;
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    check(
        11,
        "throughput",
        t8 < 60.0 && speedup >= 4.0,
        format!(
            "full Q_K at 16^3 x 32 nodes: 8 threads {t8:.2} s, 1 thread {t1:.2} s, \
             speedup {speedup:.2}x on a {cores}-core host"
        ),
    );
}
