//! Sobolev–Slobodeckiĭ seminorms of discrete curves, their equivalence
//! bounds, Hölder quotients of the tangent, and energy–norm ratios.

use serde::Serialize;
use std::str::FromStr;

use crate::energy::{energy_decomposed, EnergyParams};
use crate::error::{MengerError, Result};
use crate::geometry::{index_distance, ClosedCurve, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormVariant {
    FirstDifference,
    SecondDifference,
}

impl FromStr for SeminormVariant {
    type Err = MengerError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" | "first_difference" => Ok(Self::FirstDifference),
            "second" | "second_difference" => Ok(Self::SecondDifference),
            _ => Err(MengerError::BadParams(format!(
                "unknown seminorm variant {s}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeminormSpec {
    pub s: f64,
    pub rho: f64,
    pub variant: SeminormVariant,
}

impl SeminormSpec {
    pub fn new(s: f64, rho: f64, variant: SeminormVariant) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(MengerError::BadParams(format!("s = {s} is outside (0, 1)")));
        }
        if !(rho >= 1.0 && rho.is_finite()) {
            return Err(MengerError::BadParams(format!("rho = {rho} is below 1")));
        }
        Ok(Self { s, rho, variant })
    }
}

/// Weight of offset `m` in a symmetric sum over `|m| ≤ cap`: the two
/// endpoint offsets `±cap` describe the same point of the circle when
/// `cap = N/2`, and sit on the edge of the open window when `cap = N/4`,
/// so each carries half weight.
fn offset_weight(m: usize, n: usize, cap_num: usize, cap_den: usize) -> f64 {
    if m * cap_den == n * cap_num {
        0.5
    } else {
        1.0
    }
}

/// `( Σ_u Σ_{0<|w|≤1/2} |t(u+w) − t(u)|^ρ / |w|^{1+ρs} N⁻² )^{1/ρ}` over
/// edge midpoints, `t` the unit edge tangents.
pub fn seminorm_first(curve: &ClosedCurve, spec: &SeminormSpec) -> Result<f64> {
    curve.require_arclength()?;
    let t = curve.unit_tangents();
    let n = t.len();
    let nf = n as f64;
    let (rho, s) = (spec.rho, spec.s);
    let mut total = 0.0;
    for m in 1..=n / 2 {
        let w = m as f64 / nf;
        let kernel = offset_weight(m, n, 1, 2) / w.powf(1.0 + rho * s);
        let mut row = 0.0;
        for e in 0..n {
            row += (t[(e + m) % n] - t[e]).norm().powf(rho);
        }
        // ±m contribute equally
        total += 2.0 * kernel * row;
    }
    Ok((total / (nf * nf)).powf(1.0 / rho))
}

/// `( Σ_u Σ_{0<|w|≤1/4} |f(u+w) − 2f(u) + f(u−w)|^ρ / |w|^{1+ρ(1+s)} N⁻² )^{1/ρ}`
/// with `f = γ/L` sampled at the vertices.
pub fn seminorm_second(curve: &ClosedCurve, spec: &SeminormSpec) -> Result<f64> {
    let v = curve.vertices();
    let n = v.len();
    let nf = n as f64;
    let len = curve.length();
    let (rho, s) = (spec.rho, spec.s);
    let mut total = 0.0;
    for m in 1..=n / 4 {
        let w = m as f64 / nf;
        let kernel = offset_weight(m, n, 1, 4) / w.powf(1.0 + rho * (1.0 + s));
        let mut row = 0.0;
        for i in 0..n {
            let d2 = v[(i + m) % n] - v[i] * 2.0 + v[(i + n - m) % n];
            row += (d2.norm() / len).powf(rho);
        }
        total += 2.0 * kernel * row;
    }
    Ok((total / (nf * nf)).powf(1.0 / rho))
}

/// Second-difference sum for samples of a function on `[0, 1]` at
/// `u_i = i/(M−1)`, keeping only windows inside the interval.
pub fn seminorm_second_open(samples: &[Point], spec: &SeminormSpec) -> Result<f64> {
    let m_total = samples.len();
    if m_total < 3 {
        return Err(MengerError::InvalidCurve("need at least 3 samples".into()));
    }
    let h = 1.0 / (m_total - 1) as f64;
    let (rho, s) = (spec.rho, spec.s);
    let mut total = 0.0;
    for m in 1..m_total {
        let w = m as f64 * h;
        if w > 0.25 {
            break;
        }
        let kernel = 1.0 / w.powf(1.0 + rho * (1.0 + s));
        for i in m..m_total - m {
            let d2 = samples[i + m] - samples[i] * 2.0 + samples[i - m];
            total += 2.0 * kernel * d2.norm().powf(rho);
        }
    }
    Ok((total * h * h).powf(1.0 / rho))
}

/// Dispatches on `spec.variant`.
pub fn seminorm(curve: &ClosedCurve, spec: &SeminormSpec) -> Result<f64> {
    match spec.variant {
        SeminormVariant::FirstDifference => seminorm_first(curve, spec),
        SeminormVariant::SecondDifference => seminorm_second(curve, spec),
    }
}

/// Relative slack allowed on the continuum bounds.
pub const EQUIVALENCE_SLACK: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub first: f64,
    pub second: f64,
    /// `second / first`.
    pub ratio: f64,
    /// `[2^{−1−2/s}, 2/(1 + sρ)]`.
    pub interval: (f64, f64),
    pub within_slack: bool,
}

/// Analytic equivalence interval for the ratio of the two seminorms.
pub fn equivalence_interval(s: f64, rho: f64) -> (f64, f64) {
    (2f64.powf(-1.0 - 2.0 / s), 2.0 / (1.0 + s * rho))
}

pub fn equivalence_check(curve: &ClosedCurve, s: f64, rho: f64) -> Result<EquivalenceReport> {
    let first = seminorm_first(
        curve,
        &SeminormSpec::new(s, rho, SeminormVariant::FirstDifference)?,
    )?;
    let second = seminorm_second(
        curve,
        &SeminormSpec::new(s, rho, SeminormVariant::SecondDifference)?,
    )?;
    if first == 0.0 || second == 0.0 {
        return Err(MengerError::ZeroSeminorm);
    }
    let ratio = second / first;
    let interval = equivalence_interval(s, rho);
    let within_slack = ratio >= interval.0 * (1.0 - EQUIVALENCE_SLACK)
        && ratio <= interval.1 * (1.0 + EQUIVALENCE_SLACK);
    Ok(EquivalenceReport {
        first,
        second,
        ratio,
        interval,
        within_slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoelderReport {
    pub alpha: f64,
    /// `max |t(u) − t(v)| / d(u, v)^α` over edge midpoints.
    pub seminorm: f64,
    /// Edge indices attaining the maximum.
    pub pair: (usize, usize),
}

pub fn hoelder_estimate(curve: &ClosedCurve, alpha: f64) -> Result<HoelderReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MengerError::BadParams(format!(
            "alpha = {alpha} is outside (0, 1)"
        )));
    }
    let t = curve.unit_tangents();
    let n = t.len();
    let mut best = (0.0, (0, 0));
    for i in 0..n {
        for j in i + 1..n {
            let d = index_distance(i, j, n) as f64 / n as f64;
            let r = (t[i] - t[j]).norm() / d.powf(alpha);
            if r > best.0 {
                best = (r, (i, j));
            }
        }
    }
    Ok(HoelderReport {
        alpha,
        seminorm: best.0,
        pair: best.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySpaceReport {
    pub energy: f64,
    /// `s = (3p − 2q − 2)/q`.
    pub s: f64,
    pub seminorm: f64,
    /// `seminorm + sup |γ'|/L`.
    pub norm: f64,
    /// `E / ‖γ‖^q`.
    pub energy_over_norm: f64,
    /// `seminorm^q / E`.
    pub seminorm_over_energy: f64,
}

/// Energy against the `W^{1+s,q}` norm of the unit tangent.
pub fn energy_space_ratios(
    curve: &ClosedCurve,
    params: &EnergyParams,
) -> Result<EnergySpaceReport> {
    let class = params.classify();
    if !class.is_subcritical() {
        return Err(MengerError::BadRegime(class.detail));
    }
    let q = params.q();
    let s = params.s();
    let energy = energy_decomposed(curve, params)?.value;
    let seminorm = seminorm_first(
        curve,
        &SeminormSpec::new(s, q, SeminormVariant::FirstDifference)?,
    )?;
    let norm = seminorm + 1.0;
    Ok(EnergySpaceReport {
        energy,
        s,
        seminorm,
        norm,
        energy_over_norm: energy / norm.powf(q),
        seminorm_over_energy: seminorm.powf(q) / energy,
    })
}
