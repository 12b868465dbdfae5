use serde::Serialize;

use crate::error::{MengerError, Result};

const BOUNDARY_TOL: f64 = 1e-12;

/// The exponent pair `(p, q)` with its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParams {
    p: f64,
    q: f64,
    s: f64,
    kernel_exponent: f64,
    alpha: f64,
}

impl EnergyParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite()) || p <= 0.0 || q <= 0.0 {
            return Err(MengerError::BadParams(format!(
                "p and q must be positive and finite, got p = {p}, q = {q}"
            )));
        }
        Ok(Self {
            p,
            q,
            s: (3.0 * p - 2.0 * q - 2.0) / q,
            kernel_exponent: 3.0 * p - 2.0 * q - 1.0,
            alpha: 3.0 * (p - 1.0) / q - 2.0,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Fractional order above one of the energy space `W^{1+s,q}`.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// `3p − 2q − 1 = 1 + q s`.
    pub fn kernel_exponent(&self) -> f64 {
        self.kernel_exponent
    }

    /// Hölder exponent of the tangent, `3(p−1)/q − 2`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Dilation exponent: `E(λγ) = λ^{3+2q−3p} E(γ)`.
    pub fn scaling_exponent(&self) -> f64 {
        3.0 + 2.0 * self.q - 3.0 * self.p
    }

    pub fn classify(&self) -> RangeClass {
        classify_unchecked(self.p, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RangeLabel {
    NonRepulsive,
    SubcriticalKnotEnergy,
    NondegenerateSubcritical,
    Singular,
    Strange,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeClass {
    pub label: RangeLabel,
    pub detail: String,
}

impl RangeClass {
    /// True for both sub-critical labels.
    pub fn is_subcritical(&self) -> bool {
        matches!(
            self.label,
            RangeLabel::SubcriticalKnotEnergy | RangeLabel::NondegenerateSubcritical
        )
    }
}

/// Places `(p, q)` in the parameter plane.
///
/// Self-repulsion sets in at `p = 2q/3 + 1`; closed curves can have finite
/// energy only below `p = q + 2/3`. Between the two lines, for `q > 1`, the
/// Euler–Lagrange equation is sub-critical.
pub fn classify(p: f64, q: f64) -> Result<RangeClass> {
    EnergyParams::new(p, q).map(|e| e.classify())
}

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= BOUNDARY_TOL * x.abs().max(y.abs()).max(1.0)
}

fn classify_unchecked(p: f64, q: f64) -> RangeClass {
    let repulsive = 2.0 * q / 3.0 + 1.0;
    let finite = q + 2.0 / 3.0;
    let class = |label, detail: String| RangeClass { label, detail };
    if near(q, 1.0) {
        return class(
            RangeLabel::Boundary,
            format!("q = 1: the repulsion line p = {repulsive:.6} meets the finiteness line"),
        );
    }
    if near(p, repulsive) {
        return class(
            RangeLabel::Boundary,
            format!("p = 2q/3 + 1 = {repulsive:.6}: threshold of self-repulsion"),
        );
    }
    if p < repulsive {
        if q < 1.0 && (p >= finite || near(p, finite)) {
            return class(
                RangeLabel::Strange,
                "q < 1 and q + 2/3 <= p < 2q/3 + 1: infinite on smooth closed curves, finite on polygons"
                    .into(),
            );
        }
        return class(
            RangeLabel::NonRepulsive,
            format!("p < 2q/3 + 1 = {repulsive:.6}: does not punish self-intersections"),
        );
    }
    if q < 1.0 {
        return class(
            RangeLabel::Singular,
            "q < 1 and p > 2q/3 + 1 > q + 2/3: repulsive but infinite on every closed curve".into(),
        );
    }
    if p < finite && !near(p, finite) {
        if near(q, 2.0) && p > 7.0 / 3.0 && p < 8.0 / 3.0 {
            return class(
                RangeLabel::NondegenerateSubcritical,
                "q = 2 and 7/3 < p < 8/3: sub-critical knot energy with non-degenerate leading part"
                    .into(),
            );
        }
        return class(
            RangeLabel::SubcriticalKnotEnergy,
            format!("q > 1 and {repulsive:.6} < p < {finite:.6}: sub-critical knot energy"),
        );
    }
    class(
        RangeLabel::Singular,
        format!("q > 1 and p >= q + 2/3 = {finite:.6}: infinite on closed curves"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents() {
        let e = EnergyParams::new(2.5, 2.0).unwrap();
        assert!((e.s() - 0.75).abs() < 1e-15);
        assert!((e.kernel_exponent() - (1.0 + e.q() * e.s())).abs() < 1e-15);
        assert!((e.alpha() - 0.25).abs() < 1e-15);
        assert!((e.scaling_exponent() - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(EnergyParams::new(0.0, 2.0).is_err());
        assert!(EnergyParams::new(2.0, -1.0).is_err());
        assert!(EnergyParams::new(f64::NAN, 2.0).is_err());
        assert!(matches!(
            classify(-1.0, 1.0),
            Err(MengerError::BadParams(_))
        ));
    }

    #[test]
    fn label_table() {
        let cases = [
            (2.5, 2.0, RangeLabel::NondegenerateSubcritical),
            (2.0, 2.0, RangeLabel::NonRepulsive),
            (3.0, 2.0, RangeLabel::Singular),
            (7.0 / 3.0, 2.0, RangeLabel::Boundary),
            (1.58, 0.9, RangeLabel::Strange),
            (2.4, 2.0, RangeLabel::NondegenerateSubcritical),
            (2.6, 2.0, RangeLabel::NondegenerateSubcritical),
            (8.0 / 3.0, 2.0, RangeLabel::Singular),
            (3.2, 3.0, RangeLabel::SubcriticalKnotEnergy),
            (3.0, 3.0, RangeLabel::Boundary),
            (2.0, 1.0, RangeLabel::Boundary),
            (2.0, 0.5, RangeLabel::Singular),
            (1.0, 0.5, RangeLabel::NonRepulsive),
        ];
        for (p, q, label) in cases {
            assert_eq!(classify(p, q).unwrap().label, label, "({p}, {q})");
        }
    }

    #[test]
    fn subcritical_has_alpha_in_unit_interval() {
        for i in 1..40 {
            let p = 7.0 / 3.0 + i as f64 * (1.0 / 3.0) / 40.0;
            let e = EnergyParams::new(p, 2.0).unwrap();
            assert!(e.classify().is_subcritical());
            assert!(e.alpha() > 0.0 && e.alpha() < 1.0);
            assert!(e.s() > 0.0 && e.s() < 1.0);
        }
    }
}
