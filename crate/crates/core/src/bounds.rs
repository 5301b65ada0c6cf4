//! Every explicit constant of the global-existence theorem: the smallness
//! condition on f₀, the L∞ ceiling, the high-temperature floor, the constants
//! chain C₀…C₄ with its four-case analysis, and the optimal bracket ceiling
//! K* = 1/(4β+2).
//!
//! Products of powers like 2^{35β} overflow f64 for large β, so everything is
//! assembled in log space with a single final exponentiation; comparisons
//! (condition, case inequality) are done on the logs.

use crate::grid::MomentVector;
use crate::kernel::KernelSpec;
use crate::{Error, Result};
use serde::Serialize;

const LN2: f64 = std::f64::consts::LN_2;

/// |S²| = 4π.
pub const SPHERE_AREA: f64 = 4.0 * std::f64::consts::PI;
/// |S¹| = 2π.
pub const CIRCLE_LENGTH: f64 = 2.0 * std::f64::consts::PI;

/// C₀ = ∫_{S²} κ(θ)^{3/2} dσ = (22√2 − 31)π/5.
pub fn c0() -> f64 {
    (22.0 * std::f64::consts::SQRT_2 - 31.0) * std::f64::consts::PI / 5.0
}

/// The bracket ceiling maximizing K/(1+2K)^{2(β+1)}: K* = 1/(4β+2).
pub fn k_star(beta: f64) -> f64 {
    1.0 / (4.0 * beta + 2.0)
}

/// Which branch of the four-case analysis applies (C₁ ≷ 1 × ρ₀ ≷ 1;
/// ρ₀ = 1 resolves to the ρ₀ ≥ 1 branch).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
}

/// All evaluated constants of the theorem for one initial datum.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    /// K* = 1/(4β+2).
    pub k_star: f64,
    /// The bracket ceiling this chain was evaluated at.
    pub k_used: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Contraction interval at unit kernel ceiling (T_n scales as 1/n).
    pub tn_unit_n: f64,
    pub condition_lhs: f64,
    pub condition_rhs: f64,
    pub ln_condition_lhs: f64,
    pub ln_condition_rhs: f64,
    pub condition_holds: bool,
    pub predicted_sup: f64,
    pub temp_ratio: f64,
    pub temp_ratio_floor: f64,
    pub case_id: CaseId,
    /// LHS/RHS of the sufficient inequality of the selected case.
    pub case_lhs: f64,
    pub case_rhs: f64,
    /// ρ₀ = M₂/M₀.
    pub rho0: f64,
    /// Raw proof-level ceiling increment 2⁸|S¹|²|S²|(1+2K)⁴ C₄, so that
    /// f ≤ ‖f₀‖_∞ + increment along the intermediate flow.
    pub ceiling_increment: f64,
}

fn require_moments(m: &MomentVector) -> Result<()> {
    if !(m.m0 > 0.0) {
        return Err(Error::precondition("theorem constants require M0 > 0"));
    }
    if !(m.m2 > 0.0) {
        return Err(Error::precondition(
            "theorem condition requires M2(f0) > 0",
        ));
    }
    if !(m.linf > 0.0) || !(m.l1s[3] > 0.0) {
        return Err(Error::precondition(
            "theorem constants require finite positive norms",
        ));
    }
    Ok(())
}

/// ln of the condition LHS
/// (‖f₀‖_{L¹} + ‖f₀‖_{L∞}) (‖f₀‖_{L¹₃} / min{‖f₀‖_{L¹}, M₂})^{4β}.
fn ln_condition_lhs(m: &MomentVector, beta: f64) -> f64 {
    let l1 = m.l1();
    (l1 + m.linf).ln() + 4.0 * beta * (m.l1s[3].ln() - l1.min(m.m2).ln())
}

/// ln of the condition RHS
/// 2^{−(35β−11)} (4β+2)^{2β+1} / (4β+4)^{2β+2} (a/b)^{2(β+1)}.
fn ln_condition_rhs(spec: &KernelSpec) -> f64 {
    let beta = spec.beta;
    -(35.0 * beta - 11.0) * LN2 + (2.0 * beta + 1.0) * (4.0 * beta + 2.0).ln()
        - (2.0 * beta + 2.0) * (4.0 * beta + 4.0).ln()
        + 2.0 * (beta + 1.0) * (spec.a / spec.b).ln()
}

/// Uniform L∞ ceiling of the theorem,
/// 2^{35β} (b/a)^{2(β+1)} ((2β+2)/(2β+3))^{2β−2}
/// (‖f₀‖_{L¹₃}/min{‖f₀‖_{L¹}, M₂})^{4β} (‖f₀‖_{L¹} + ‖f₀‖_{L∞}).
pub fn predicted_sup(m: &MomentVector, spec: &KernelSpec) -> Result<f64> {
    spec.validate()?;
    require_moments(m)?;
    let beta = spec.beta;
    let l1 = m.l1();
    let ln = 35.0 * beta * LN2
        + 2.0 * (beta + 1.0) * (spec.b / spec.a).ln()
        + (2.0 * beta - 2.0) * ((2.0 * beta + 2.0).ln() - (2.0 * beta + 3.0).ln())
        + 4.0 * beta * (m.l1s[3].ln() - l1.min(m.m2).ln())
        + (l1 + m.linf).ln();
    Ok(ln.exp())
}

/// High-temperature floor
/// 2^{70β/3 − 19/3} (4β+4)^{(4β+4)/3} / (4β+2)^{(4β+2)/3} (b/a)^{(4β+4)/3}.
pub fn temp_ratio_floor(spec: &KernelSpec) -> f64 {
    let beta = spec.beta;
    let ln = (70.0 * beta - 19.0) / 3.0 * LN2
        + (4.0 * beta + 4.0) / 3.0 * (4.0 * beta + 4.0).ln()
        - (4.0 * beta + 2.0) / 3.0 * (4.0 * beta + 2.0).ln()
        + (4.0 * beta + 4.0) / 3.0 * (spec.b / spec.a).ln();
    ln.exp()
}

/// C₁ of the L¹₃ a-priori bound:
/// (128(√2−1)(1+2K)b + 2(22√2/5 − 31/5)a) ‖f₀‖²_{L¹₂}
/// / (a (22√2/5 − 31/5) ‖f₀‖_{L¹} ‖f₀‖_{L¹₃}).
pub fn c1(m: &MomentVector, spec: &KernelSpec, k: f64) -> f64 {
    let c0p = (22.0 * std::f64::consts::SQRT_2 - 31.0) / 5.0;
    let num = (128.0 * (std::f64::consts::SQRT_2 - 1.0) * (1.0 + 2.0 * k) * spec.b
        + 2.0 * c0p * spec.a)
        * m.l1s[2]
        * m.l1s[2];
    let den = spec.a * c0p * m.l1() * m.l1s[3];
    num / den
}

/// Full constants chain at bracket ceiling `k`, with case selection and the
/// theorem-level condition/ceiling/temperature diagnostics.
pub fn constants_chain(m: &MomentVector, spec: &KernelSpec, k: f64) -> Result<TheoremReport> {
    spec.validate()?;
    require_moments(m)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid("bracket ceiling K must be positive finite"));
    }
    let beta = spec.beta;
    let (a, b) = (spec.a, spec.b);
    let m0 = m.m0;
    let m2 = m.m2;
    let linf = m.linf;
    let l13 = m.l1s[3];
    let rho0 = m2 / m0;

    let c1v = c1(m, spec, k);
    let c2 = c1v.max(1.0) * l13;
    // C₃ = 2^β C₂^{(β−1)/2} / (a (min{M₀, M₂})^{(β+1)/2}), in logs.
    let ln_c3 = beta * LN2 + 0.5 * (beta - 1.0) * c2.ln()
        - a.ln()
        - 0.5 * (beta + 1.0) * m0.min(m2).ln();
    let c3 = ln_c3.exp();
    // C₄ = Σ_{j=1..4} (bC₃)^j · M₀-polynomial terms, via log-sum-exp.
    let ln_bc3 = b.ln() + ln_c3;
    let terms = [
        ln_bc3 + (m0 + m2).ln() + linf.ln(),
        2.0 * ln_bc3 + (8.0 / 3.0) * m0.ln() + linf.ln() / 3.0,
        3.0 * ln_bc3 + (7.0 / 3.0) * m0.ln() + (4.0 / 3.0) * (m0 + m2).ln() + linf.ln() / 3.0,
        4.0 * ln_bc3 + (23.0 / 6.0) * m0.ln() + (7.0 / 6.0) * (m0 + m2).ln(),
    ];
    let ln_max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_c4 = ln_max + terms.iter().map(|t| (t - ln_max).exp()).sum::<f64>().ln();
    let c4 = ln_c4.exp();

    let ln_lhs = ln_condition_lhs(m, beta);
    let ln_rhs = ln_condition_rhs(spec);
    let condition_holds = ln_lhs <= ln_rhs;

    // Case selection and the sufficient inequality of that case.
    let ln_mass_sum = (m0 + linf).ln();
    let ln_s1 = CIRCLE_LENGTH.ln();
    let ln_s2 = SPHERE_AREA.ln();
    let (case_id, ln_case_lhs, ln_case_rhs) = if c1v >= 1.0 {
        let ln_rhs12 = 2.0 * (beta - 1.0) * c0().ln() + k.ln()
            - (20.0 * beta - 6.0) * LN2
            - 2.0 * ln_s1
            - (2.0 * beta - 1.0) * ln_s2
            - 2.0 * (beta + 1.0) * (1.0 + 2.0 * k).ln()
            + (2.0 * beta + 2.0) * (a / b).ln();
        if rho0 >= 1.0 {
            (
                CaseId::Case1,
                (4.0 * beta - 3.0) * rho0.ln() + ln_mass_sum,
                ln_rhs12,
            )
        } else {
            (CaseId::Case2, -4.0 * beta * rho0.ln() + ln_mass_sum, ln_rhs12)
        }
    } else {
        let ln_rhs34 = k.ln() - (4.0 * beta + 10.0) * LN2 - 2.0 * ln_s1 - ln_s2
            - 4.0 * (1.0 + 2.0 * k).ln()
            + 4.0 * (a / b).ln();
        if rho0 >= 1.0 {
            (
                CaseId::Case3,
                ln_mass_sum + (2.0 * beta - 1.0) * (l13.ln() - m0.ln()),
                ln_rhs34,
            )
        } else {
            (
                CaseId::Case4,
                ln_mass_sum + 2.0 * (beta + 1.0) * (l13.ln() - m2.ln()),
                ln_rhs34,
            )
        }
    };

    let ceiling_increment =
        (8.0 * LN2 + 2.0 * ln_s1 + ln_s2 + 4.0 * (1.0 + 2.0 * k).ln() + ln_c4).exp();
    let temp_ratio = crate::grid::temperature_ratio(m)?;

    Ok(TheoremReport {
        beta,
        a,
        b,
        k_star: k_star(beta),
        k_used: k,
        c0: c0(),
        c1: c1v,
        c2,
        c3,
        c4,
        tn_unit_n: crate::march::contraction_interval(k, 1.0, m0)?,
        condition_lhs: ln_lhs.exp(),
        condition_rhs: ln_rhs.exp(),
        ln_condition_lhs: ln_lhs,
        ln_condition_rhs: ln_rhs,
        condition_holds,
        predicted_sup: predicted_sup(m, spec)?,
        temp_ratio,
        temp_ratio_floor: temp_ratio_floor(spec),
        case_id,
        case_lhs: ln_case_lhs.exp(),
        case_rhs: ln_case_rhs.exp(),
        rho0,
        ceiling_increment,
    })
}

/// Condition evaluation at the optimal ceiling K = K*(β).
pub fn evaluate_condition(m: &MomentVector, spec: &KernelSpec) -> Result<TheoremReport> {
    constants_chain(m, spec, k_star(spec.beta))
}
