use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use super::eval::{energy_decomposed, kernel_at};
use super::EnergyParams;
use crate::error::{MengerError, Result};
use crate::geometry::{make_preset, Point, Preset};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub energy: f64,
    /// Limit estimate from this and the two previous rows.
    pub extrapolated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub preset: String,
    pub params: EnergyParams,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log E_N` against `log N`.
    pub slope: f64,
    /// Exponent of the near-diagonal error, `3q − 3p + 2`; the energy of a
    /// smooth curve grows like `N^{−error_exponent}` when it is negative.
    pub error_exponent: f64,
    pub last_change_raw: Option<f64>,
    pub last_change_extrapolated: Option<f64>,
}

/// Evaluates the preset at each N and studies the refinement sequence.
///
/// When the near-diagonal error exponent `a = 3q − 3p + 2` is positive the
/// rows carry a three-point extrapolation under the model
/// `E_N = E + h^g (c₁ + c₂ log h)` with `g = min(a, 1)`.
pub fn energy_convergence(
    preset: &Preset,
    dim: usize,
    params: &EnergyParams,
    ns: &[usize],
) -> Result<ConvergenceTable> {
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MengerError::BadParams("N values must increase".into()));
    }
    let mut energies = Vec::with_capacity(ns.len());
    for &n in ns {
        let c = make_preset(preset, n, dim)?;
        energies.push(energy_decomposed(&c, params)?.value);
    }
    let error_exponent = 3.0 * params.q() - 3.0 * params.p() + 2.0;
    let g = error_exponent.min(1.0);
    let rows: Vec<ConvergenceRow> = (0..ns.len())
        .map(|i| ConvergenceRow {
            n: ns[i],
            energy: energies[i],
            extrapolated: if i >= 2 && error_exponent > 0.0 {
                extrapolate(&ns[i - 2..=i], &energies[i - 2..=i], g)
            } else {
                None
            },
        })
        .collect();
    let slope = loglog_slope(&ns.iter().map(|&n| n as f64).collect::<Vec<_>>(), &energies);
    let rel = |a: f64, b: f64| ((b - a) / b).abs();
    let last_change_raw = (energies.len() >= 2)
        .then(|| rel(energies[energies.len() - 2], energies[energies.len() - 1]));
    let ex: Vec<f64> = rows.iter().filter_map(|r| r.extrapolated).collect();
    let last_change_extrapolated = (ex.len() >= 2).then(|| rel(ex[ex.len() - 2], ex[ex.len() - 1]));
    Ok(ConvergenceTable {
        preset: preset.to_string(),
        params: *params,
        rows,
        slope,
        error_exponent,
        last_change_raw,
        last_change_extrapolated,
    })
}

fn extrapolate(ns: &[usize], es: &[f64], g: f64) -> Option<f64> {
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for r in 0..3 {
        let h = 1.0 / ns[r] as f64;
        let hg = h.powf(g);
        m[(r, 0)] = 1.0;
        m[(r, 1)] = hg;
        m[(r, 2)] = hg * h.ln();
        rhs[r] = es[r];
    }
    m.lu().solve(&rhs).map(|x| x[0])
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Mixed-triple energy of the strands `u ↦ (u,0,0)` and `u ↦ (0,u,δ)`,
/// `u ∈ [−1, 1]`, each carrying `n` nodes.
///
/// Triples with two points on one strand and one on the other are summed
/// over all orderings. Nodes are graded toward the closest point
/// `u = 0` via `u = t³` on a midpoint grid in `t`.
pub fn strand_pair_experiment(delta: f64, params: &EnergyParams, n: usize) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(MengerError::BadParams(format!("strand offset {delta}")));
    }
    if n < 2 {
        return Err(MengerError::BadParams(format!("strand resolution {n}")));
    }
    let (us, ws): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let t = -1.0 + (2.0 * i as f64 + 1.0) / n as f64;
            (t * t * t, 3.0 * t * t * 2.0 / n as f64)
        })
        .unzip();
    let first: Vec<Point> = us.iter().map(|&u| Point::new(u, 0.0, 0.0)).collect();
    let second: Vec<Point> = us.iter().map(|&u| Point::new(0.0, u, delta)).collect();
    let (p, q) = (params.p(), params.q());
    let pair_sum = |own: &[Point], other: &[Point]| -> f64 {
        let partial: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut s = 0.0;
                for j in i + 1..n {
                    let mut inner = 0.0;
                    for (k, z) in other.iter().enumerate() {
                        inner += ws[k] * kernel_at(&own[i], &own[j], z, p, q);
                    }
                    s += ws[j] * inner;
                }
                ws[i] * s
            })
            .collect();
        partial.iter().sum()
    };
    // unordered own pairs: ×2 for their order, ×3 for the slot of the third point
    Ok(6.0 * (pair_sum(&first, &second) + pair_sum(&second, &first)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.7)).collect();
        assert!((loglog_slope(&x, &y) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_recovers_model() {
        let ns = [64, 128, 256];
        let es: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let h = 1.0 / n as f64;
                5.0 + h.sqrt() * (2.0 - 0.3 * h.ln())
            })
            .collect();
        let e = extrapolate(&ns, &es, 0.5).unwrap();
        assert!((e - 5.0).abs() < 1e-9, "{e}");
    }

    #[test]
    fn strands_positive_at_unit_offset() {
        for (p, q) in [(2.0, 2.0), (2.5, 2.0)] {
            let v = strand_pair_experiment(1.0, &EnergyParams::new(p, q).unwrap(), 40).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
        assert!(strand_pair_experiment(0.0, &EnergyParams::new(2.0, 2.0).unwrap(), 40).is_err());
    }

    #[test]
    fn convergence_rejects_unsorted_sizes() {
        let pq = EnergyParams::new(2.5, 2.0).unwrap();
        assert!(energy_convergence(&Preset::Circle, 2, &pq, &[64, 32]).is_err());
    }
}
