//! First variation of `E^{p,q}`, the exact gradient of the discrete energy,
//! and its projection onto the fixed-length constraint.

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{energy_weighted, EnergyParams};
use crate::error::{MengerError, Result};
use crate::geometry::{ClosedCurve, Point};

/// Per-vertex vectors, paired with weight `1/N`:
/// `⟨f, g⟩ = (1/N) Σ_i f_i · g_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub vectors: Vec<Point>,
}

impl GradientField {
    pub fn new(vectors: Vec<Point>) -> Self {
        Self { vectors }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Point::zeros(); n])
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn pairing(&self, other: &GradientField) -> f64 {
        assert_eq!(self.len(), other.len(), "field size mismatch");
        let s: f64 = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| a.dot(b))
            .sum();
        s / self.len() as f64
    }

    /// `max_i |f_i|`.
    pub fn sup_norm(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn axpy(&self, lambda: f64, other: &GradientField) -> GradientField {
        GradientField::new(
            self.vectors
                .iter()
                .zip(&other.vectors)
                .map(|(a, b)| a + b * lambda)
                .collect(),
        )
    }

    pub fn scaled(&self, lambda: f64) -> GradientField {
        GradientField::new(self.vectors.iter().map(|v| v * lambda).collect())
    }

    /// `Σ_i v_i`.
    pub fn total(&self) -> Point {
        self.vectors.iter().sum()
    }

    /// The field `γ ↦ γ` of vertex positions (dilation direction).
    pub fn from_curve(curve: &ClosedCurve) -> Self {
        Self::new(curve.vertices().to_vec())
    }

    pub fn rows(&self, dim: usize) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| v.iter().take(dim).copied().collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGradient {
    /// `g_E + λ g_L`, orthogonal to `g_L`.
    pub field: GradientField,
    pub lambda: f64,
    /// `max_i |field_i|`.
    pub residual: f64,
    pub energy: f64,
    pub energy_gradient: GradientField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectedSummary {
    pub residual: f64,
    pub lambda: f64,
    pub energy: f64,
    pub gradient_sup: f64,
}

impl ProjectedGradient {
    pub fn summary(&self) -> ProjectedSummary {
        ProjectedSummary {
            residual: self.residual,
            lambda: self.lambda,
            energy: self.energy,
            gradient_sup: self.energy_gradient.sup_norm(),
        }
    }
}

const CHUNKS: usize = 32;
const WEDGE_SKIP: f64 = 1e-14;

struct Partial {
    energy: f64,
    grad: Vec<Point>,
    s: Vec<f64>,
}

/// Energy and, when `GRAD`, its gradient `∂E/∂γ_i` of the discrete energy
/// `6 Σ_{i<j<k} w_i w_j w_k K_{ijk}`.
///
/// The outer index is split into a fixed number of interleaved chunks whose
/// partials are merged in chunk order, so results do not depend on the
/// thread count.
fn accumulate<const GRAD: bool>(curve: &ClosedCurve, params: &EnergyParams) -> (f64, Vec<Point>) {
    let (p, q) = (params.p(), params.q());
    let v = curve.vertices();
    let w = curve.vertex_weights();
    let n = v.len();
    let chunks = CHUNKS.min(n);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = Partial {
                energy: 0.0,
                grad: if GRAD {
                    vec![Point::zeros(); n]
                } else {
                    Vec::new()
                },
                s: if GRAD { vec![0.0; n] } else { Vec::new() },
            };
            for i in (c..n).step_by(chunks) {
                let x = v[i];
                for j in i + 1..n {
                    let a = v[j] - x;
                    let aa = a.norm_squared();
                    let wij = w[i] * w[j];
                    for k in j + 1..n {
                        let b = v[k] - x;
                        let cvec = a - b;
                        let bb = b.norm_squared();
                        let cc = cvec.norm_squared();
                        let ab = a.dot(&b);
                        let w2 = aa * bb - ab * ab;
                        if w2 <= 0.0 {
                            continue;
                        }
                        let prod = aa * bb * cc;
                        let (kval, coef) = if q == 2.0 {
                            let f = (-0.5 * p * prod.ln()).exp();
                            (w2 * f, 2.0 * f)
                        } else {
                            if w2 < WEDGE_SKIP * WEDGE_SKIP * aa * bb {
                                continue;
                            }
                            let kv = (0.5 * (q * w2.ln() - p * prod.ln())).exp();
                            (kv, q * kv / w2)
                        };
                        let weight = 6.0 * wij * w[k];
                        part.energy += weight * kval;
                        if GRAD {
                            let ga = (a * bb - b * ab) * coef - a * (p * kval / aa);
                            let gb = (b * aa - a * ab) * coef - b * (p * kval / bb);
                            let gc = cvec * (-p * kval / cc);
                            part.grad[j] += (ga + gc) * weight;
                            part.grad[k] += (gb - gc) * weight;
                            part.grad[i] -= (ga + gb) * weight;
                            part.s[i] += 6.0 * w[j] * w[k] * kval;
                            part.s[j] += 6.0 * w[i] * w[k] * kval;
                            part.s[k] += 6.0 * wij * kval;
                        }
                    }
                }
            }
            part
        })
        .collect();

    let mut energy = 0.0;
    let mut grad = vec![Point::zeros(); if GRAD { n } else { 0 }];
    let mut s = vec![0.0; if GRAD { n } else { 0 }];
    for part in partials {
        energy += part.energy;
        if GRAD {
            for m in 0..n {
                grad[m] += part.grad[m];
                s[m] += part.s[m];
            }
        }
    }
    if GRAD {
        // w_i = (ℓ_{i−1} + ℓ_i)/2, so ∂E/∂ℓ_e = (S_e + S_{e+1})/2
        let t = curve.unit_tangents();
        for e in 0..n {
            let dl = 0.5 * (s[e] + s[(e + 1) % n]);
            grad[(e + 1) % n] += t[e] * dl;
            grad[e] -= t[e] * dl;
        }
    }
    (energy, grad)
}

/// Discrete energy evaluated with the same summation order as the gradient.
pub fn energy_unordered(curve: &ClosedCurve, params: &EnergyParams) -> Result<f64> {
    curve.check_distinct_vertices()?;
    Ok(accumulate::<false>(curve, params).0)
}

/// Exact gradient of the discrete energy as an L² field: `g_i = N ∂E/∂γ_i`.
pub fn discrete_gradient(curve: &ClosedCurve, params: &EnergyParams) -> Result<GradientField> {
    Ok(energy_and_gradient(curve, params)?.1)
}

pub fn energy_and_gradient(
    curve: &ClosedCurve,
    params: &EnergyParams,
) -> Result<(f64, GradientField)> {
    curve.check_distinct_vertices()?;
    let (e, g) = accumulate::<true>(curve, params);
    let n = curve.len() as f64;
    Ok((e, GradientField::new(g).scaled(n)))
}

/// L² gradient of the polygon length: `N (t_{i−1} − t_i)`.
pub fn length_gradient(curve: &ClosedCurve) -> GradientField {
    let t = curve.unit_tangents();
    let n = t.len();
    GradientField::new(
        (0..n)
            .map(|i| (t[(i + n - 1) % n] - t[i]) * n as f64)
            .collect(),
    )
}

/// `g_E + λ g_L` with `λ = −⟨g_E, g_L⟩/⟨g_L, g_L⟩`.
pub fn projected_gradient(curve: &ClosedCurve, params: &EnergyParams) -> Result<ProjectedGradient> {
    curve.require_arclength()?;
    projected_gradient_unchecked(curve, params)
}

pub(crate) fn projected_gradient_unchecked(
    curve: &ClosedCurve,
    params: &EnergyParams,
) -> Result<ProjectedGradient> {
    let (energy, ge) = energy_and_gradient(curve, params)?;
    let gl = length_gradient(curve);
    let ll = gl.pairing(&gl);
    if ll <= 0.0 || !ll.is_finite() {
        return Err(MengerError::DegenerateConstraint);
    }
    let lambda = -ge.pairing(&gl) / ll;
    let field = ge.axpy(lambda, &gl);
    let residual = field.sup_norm();
    Ok(ProjectedGradient {
        field,
        lambda,
        residual,
        energy,
        energy_gradient: ge,
    })
}

/// Coefficient field `G` of the quadrature of the three-term first
/// variation: `δE(γ, h) ≈ Σ_m G_m · h_m` for piecewise-linear `h`.
///
/// All ordered triples of distinct indices are summed with weight `N⁻³`;
/// the wedge and chord terms carry the speed factor `L³`, the tangential
/// term `3 L ⟨γ', h'⟩` uses the average over the two edges at the vertex.
pub fn first_variation_field(curve: &ClosedCurve, params: &EnergyParams) -> Result<Vec<Point>> {
    curve.require_arclength()?;
    curve.check_distinct_vertices()?;
    let (p, q) = (params.p(), params.q());
    let v = curve.vertices();
    let n = v.len();
    let nf = n as f64;
    let len = curve.length();
    let l3 = len * len * len;
    let partials: Vec<(Vec<Point>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = vec![Point::zeros(); n];
            let mut ksum = 0.0;
            let x = v[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let a = v[j] - x;
                let aa = a.norm_squared();
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let b = v[k] - x;
                    let c = v[j] - v[k];
                    let bb = b.norm_squared();
                    let cc = c.norm_squared();
                    let ab = a.dot(&b);
                    let w2 = aa * bb - ab * ab;
                    if w2 <= 0.0 || (q != 2.0 && w2 < WEDGE_SKIP * WEDGE_SKIP * aa * bb) {
                        continue;
                    }
                    let kval = (0.5 * (q * w2.ln() - p * (aa * bb * cc).ln())).exp();
                    // 2q K/|a∧b|² ⟨a∧b, a∧(h_k − h_i)⟩
                    let u1 = (b * aa - a * ab) * (2.0 * q * kval / w2);
                    g[k] += u1 * l3;
                    g[i] -= u1 * l3;
                    // −3p K ⟨c, h_j − h_k⟩/|c|²
                    let u2 = c * (-3.0 * p * kval / cc);
                    g[j] += u2 * l3;
                    g[k] -= u2 * l3;
                    ksum += kval;
                }
            }
            (g, ksum)
        })
        .collect();
    let mut g = vec![Point::zeros(); n];
    let mut ksum = vec![0.0; n];
    for (i, (part, ks)) in partials.into_iter().enumerate() {
        for m in 0..n {
            g[m] += part[m];
        }
        ksum[i] = ks;
    }
    // 3 L K_i · ½ Σ_{e ∈ {i−1, i}} ⟨γ'_e, h_{e+1} − h_e⟩ N, with γ'_e = N edge_e
    for (i, k) in ksum.iter().enumerate() {
        let coeff = 3.0 * len * k * 0.5 * nf * nf;
        for e in [(i + n - 1) % n, i] {
            let ge = curve.edge(e) * coeff;
            g[(e + 1) % n] += ge;
            g[e] -= ge;
        }
    }
    let h3 = 1.0 / (nf * nf * nf);
    Ok(g.into_iter().map(|x| x * h3).collect())
}

/// `δE(γ, h)` by quadrature of the three-term variation formula.
pub fn first_variation(
    curve: &ClosedCurve,
    h: &GradientField,
    params: &EnergyParams,
) -> Result<f64> {
    if h.len() != curve.len() {
        return Err(MengerError::InvalidCurve(format!(
            "direction has {} vectors, curve has {} vertices",
            h.len(),
            curve.len()
        )));
    }
    let g = first_variation_field(curve, params)?;
    Ok(g.iter().zip(&h.vectors).map(|(a, b)| a.dot(b)).sum())
}

/// `max |δE(γ, e) − ⟨g, e⟩| / (1 + |⟨g, e⟩|)` over hat-function directions
/// `e = e_{i,axis}`.
pub fn cross_check_variation(curve: &ClosedCurve, params: &EnergyParams) -> Result<f64> {
    let fv = first_variation_field(curve, params)?;
    let g = discrete_gradient(curve, params)?;
    let n = curve.len() as f64;
    let mut worst = 0.0f64;
    for (a, b) in fv.iter().zip(&g.vectors) {
        for axis in 0..curve.dim() {
            let pairing = b[axis] / n;
            worst = worst.max((a[axis] - pairing).abs() / (1.0 + pairing.abs()));
        }
    }
    Ok(worst)
}

/// Largest deviation of `discrete_gradient` from central differences of
/// `energy_weighted` with the given step, over all vertex coordinates.
///
/// Each component error is relative to `max(|∂E/∂γ_i|, max_j |∂E/∂γ_j|)`
/// so that components near zero are not compared at round-off level.
pub fn gradient_fd_error(curve: &ClosedCurve, params: &EnergyParams, step: f64) -> Result<f64> {
    let g = discrete_gradient(curve, params)?;
    let n = curve.len();
    let scale = g.sup_norm() / n as f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for axis in 0..curve.dim() {
            let mut dir = vec![Point::zeros(); n];
            dir[i][axis] = 1.0;
            let plus = energy_weighted(&curve.displaced(&dir, step)?, params)?;
            let minus = energy_weighted(&curve.displaced(&dir, -step)?, params)?;
            let fd = (plus - minus) / (2.0 * step);
            let an = g.vectors[i][axis] / n as f64;
            worst = worst.max((fd - an).abs() / an.abs().max(scale));
        }
    }
    Ok(worst)
}
