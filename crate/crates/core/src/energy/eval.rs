use rayon::prelude::*;
use serde::Serialize;

use super::EnergyParams;
use crate::error::Result;
use crate::geometry::primitives::kernel_from_sides;
use crate::geometry::{ClosedCurve, Point};

/// How triples with coincident indices are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegeneratePolicy {
    SkipCoincident,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub n: usize,
    pub degenerate_policy: DegeneratePolicy,
    /// Sum per-vertex partials in index order.
    pub deterministic_reduction: bool,
}

impl QuadratureSpec {
    pub fn for_curve(curve: &ClosedCurve) -> Self {
        Self {
            n: curve.len(),
            degenerate_policy: DegeneratePolicy::SkipCoincident,
            deterministic_reduction: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub params: EnergyParams,
    pub decomposition_used: bool,
    pub kernel_evaluations: u64,
}

#[inline]
pub(crate) fn kernel_at(x: &Point, y: &Point, z: &Point, p: f64, q: f64) -> f64 {
    let a = y - x;
    let b = z - x;
    let c = y - z;
    kernel_from_sides(
        a.norm_squared(),
        b.norm_squared(),
        c.norm_squared(),
        a.dot(&b),
        p,
        q,
    )
}

fn reduce(partials: Vec<(f64, u64)>) -> (f64, u64) {
    partials
        .into_iter()
        .fold((0.0, 0), |(s, c), (x, k)| (s + x, c + k))
}

fn run_outer<F>(n: usize, spec: &QuadratureSpec, f: F) -> (f64, u64)
where
    F: Fn(usize) -> (f64, u64) + Sync,
{
    if spec.deterministic_reduction {
        reduce((0..n).into_par_iter().map(&f).collect())
    } else {
        (0..n)
            .into_par_iter()
            .map(&f)
            .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

fn validate(curve: &ClosedCurve) -> Result<()> {
    curve.require_arclength()?;
    curve.check_distinct_vertices()
}

/// Sum of `w_i w_j w_k K(γ_i, γ_j, γ_k)` over all ordered triples of
/// pairwise distinct indices, `w` the dual-edge weights.
///
/// On an arc-length curve every weight is `L/N`, so this is `h³ L³ Σ K`.
pub fn energy_full(curve: &ClosedCurve, params: &EnergyParams) -> Result<EnergyReport> {
    energy_full_with(curve, params, &QuadratureSpec::for_curve(curve))
}

pub fn energy_full_with(
    curve: &ClosedCurve,
    params: &EnergyParams,
    spec: &QuadratureSpec,
) -> Result<EnergyReport> {
    validate(curve)?;
    let (p, q) = (params.p(), params.q());
    let v = curve.vertices();
    let w = curve.vertex_weights();
    let n = v.len();
    let (value, evals) = run_outer(n, spec, |i| {
        let mut s = 0.0;
        let mut cnt = 0u64;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut inner = 0.0;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                inner += w[k] * kernel_at(&v[i], &v[j], &v[k], p, q);
                cnt += 1;
            }
            s += w[j] * inner;
        }
        (w[i] * s, cnt)
    });
    Ok(EnergyReport {
        value,
        n,
        params: *params,
        decomposition_used: false,
        kernel_evaluations: evals,
    })
}

/// Six times the sum over one representative per unordered triple.
///
/// A triple is written `(i − A, i, i + B)` with cyclic gaps `A, B` and
/// `C = N − A − B`; it is kept when `A < C` and `B ≤ C`, which is the
/// discrete fundamental domain `w ≤ 1 + 2v`, `v ≥ −1 + 2w` with ties broken
/// once per orbit. Equilateral gap patterns keep the rotation with `i < A`.
pub fn energy_decomposed(curve: &ClosedCurve, params: &EnergyParams) -> Result<EnergyReport> {
    energy_decomposed_with(curve, params, &QuadratureSpec::for_curve(curve))
}

pub fn energy_decomposed_with(
    curve: &ClosedCurve,
    params: &EnergyParams,
    spec: &QuadratureSpec,
) -> Result<EnergyReport> {
    validate(curve)?;
    let (value, evals) = decomposed_sum(curve, params, spec);
    Ok(EnergyReport {
        value,
        n: curve.len(),
        params: *params,
        decomposition_used: true,
        kernel_evaluations: evals,
    })
}

/// `Σ_{D} w w w K × 6` without the arc-length or distinctness checks.
pub(crate) fn decomposed_sum(
    curve: &ClosedCurve,
    params: &EnergyParams,
    spec: &QuadratureSpec,
) -> (f64, u64) {
    let (p, q) = (params.p(), params.q());
    let v = curve.vertices();
    let w = curve.vertex_weights();
    let n = v.len();
    let third = if n.is_multiple_of(3) {
        Some(n / 3)
    } else {
        None
    };
    let (sum, evals) = run_outer(n, spec, |i| {
        let x = &v[i];
        let mut s = 0.0;
        let mut cnt = 0u64;
        for a in 1..n {
            // B ranges over 1 ≤ B with B < N − 2A and 2B ≤ N − A
            if n < 2 * a + 2 {
                break;
            }
            let bmax = (n - 2 * a - 1).min((n - a) / 2);
            let ia = (i + n - a) % n;
            let y = &v[ia];
            let mut inner = 0.0;
            for b in 1..=bmax {
                let ib = (i + b) % n;
                inner += w[ib] * kernel_at(x, y, &v[ib], p, q);
            }
            cnt += bmax as u64;
            s += w[ia] * inner;
        }
        if let Some(t) = third {
            if i < t {
                s += w[(i + n - t) % n]
                    * w[(i + t) % n]
                    * kernel_at(x, &v[(i + n - t) % n], &v[(i + t) % n], p, q);
                cnt += 1;
            }
        }
        (w[i] * s, cnt)
    });
    (6.0 * sum, evals)
}

/// Discrete energy of an arbitrary polygon: the decomposed sum with
/// dual-edge weights and no arc-length requirement.
pub fn energy_weighted(curve: &ClosedCurve, params: &EnergyParams) -> Result<f64> {
    curve.check_distinct_vertices()?;
    Ok(decomposed_sum(curve, params, &QuadratureSpec::for_curve(curve)).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_preset, Preset};

    fn params(p: f64, q: f64) -> EnergyParams {
        EnergyParams::new(p, q).unwrap()
    }

    #[test]
    fn decomposition_matches_full_sum() {
        for (preset, dim) in [
            (Preset::Circle, 2),
            (Preset::PerturbedCircle { eps: 0.1, seed: 3 }, 3),
            (Preset::TorusKnot { a: 2, b: 3 }, 3),
        ] {
            for n in [30, 31, 32] {
                let c = make_preset(&preset, n, dim).unwrap();
                let pq = params(2.5, 2.0);
                let f = energy_full(&c, &pq).unwrap();
                let d = energy_decomposed(&c, &pq).unwrap();
                assert!(
                    ((f.value - d.value) / f.value).abs() < 1e-12,
                    "{preset} {n}"
                );
                let n = n as u64;
                assert_eq!(f.kernel_evaluations, n * (n - 1) * (n - 2));
                assert_eq!(d.kernel_evaluations, n * (n - 1) * (n - 2) / 6);
            }
        }
    }

    #[test]
    fn circle_with_p_equal_q_is_exact() {
        // on the regular N-gon every triple has circumradius r_N, so
        // E = L³ (1 − 1/N)(1 − 2/N) (2 r_N)^{−p}
        let n = 48;
        let c = make_preset(&Preset::Circle, n, 2).unwrap();
        let r = c.vertex(0).norm();
        let nf = n as f64;
        for p in [2.0, 3.0] {
            let e = energy_decomposed(&c, &params(p, p)).unwrap().value;
            let predicted = (nf - 1.0) * (nf - 2.0) / (nf * nf) * (2.0 * r).powf(-p);
            assert!((e / predicted - 1.0).abs() < 1e-12, "{e} {predicted}");
        }
    }

    #[test]
    fn requires_arclength() {
        let c = ClosedCurve::from_rows(
            2,
            &[
                vec![0.0, 0.0],
                vec![2.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        assert!(energy_full(&c, &params(2.5, 2.0)).is_err());
        assert!(energy_weighted(&c, &params(2.5, 2.0)).unwrap() > 0.0);
    }

    #[test]
    fn collinear_triples_contribute_nothing() {
        // 4 x 1 rectangle on the integer lattice; runs along each side are collinear
        let mut rows = Vec::new();
        for x in 0..4 {
            rows.push(vec![x as f64, 0.0]);
        }
        rows.push(vec![4.0, 0.0]);
        for x in (1..=4).rev() {
            rows.push(vec![x as f64, 1.0]);
        }
        rows.push(vec![0.0, 1.0]);
        let c = ClosedCurve::from_rows(2, &rows).unwrap();
        let v = c.vertices();
        let pq = params(2.5, 2.0);
        assert_eq!(kernel_at(&v[0], &v[1], &v[3], pq.p(), pq.q()), 0.0);
        assert_eq!(kernel_at(&v[5], &v[7], &v[9], 1.3, 0.7), 0.0);
        assert!(energy_full(&c, &pq).unwrap().value > 0.0);
    }

    #[test]
    fn deterministic_and_parallel_sums_agree() {
        let c = make_preset(&Preset::TorusKnot { a: 2, b: 3 }, 40, 3).unwrap();
        let pq = params(2.4, 2.0);
        let mut spec = QuadratureSpec::for_curve(&c);
        let a = energy_decomposed_with(&c, &pq, &spec).unwrap().value;
        let b = energy_decomposed_with(&c, &pq, &spec).unwrap().value;
        assert_eq!(a.to_bits(), b.to_bits());
        spec.deterministic_reduction = false;
        let d = energy_decomposed_with(&c, &pq, &spec).unwrap().value;
        assert!((a - d).abs() <= 1e-13 * a);
    }
}
