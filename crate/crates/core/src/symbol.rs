//! Fourier symbol of the leading bilinear form
//!
//! `Q(f, g) = ∫ ∬_D ⟨X_f, X_g⟩ / (|v−w|^p |v|^{p−2} |w|^{p−2}) dv dw du`,
//! `X_f = (f(u+w) − f(u))/w − (f(u+v) − f(u))/v`,
//!
//! which is diagonal in Fourier space: `Q(f, g) = Σ_k ρ_k ⟨f̂_k, ĝ_k⟩`.
//! The remainder of the linearized operator is not represented here.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

use crate::energy::loglog_slope;
use crate::error::{MengerError, Result};
use crate::geometry::Point;
use crate::quad::{graded_rule, GaussLegendre, Rule};

const GL_ORDER: usize = 10;
const LEVEL_BUDGET: f64 = 40.0;
const MAX_LEVELS: usize = 400;
/// Mesh-doubling change above which `rho_k` fails.
pub const DOUBLING_TOL: f64 = 1e-2;

fn check_p(p: f64) -> Result<()> {
    if !(p > 7.0 / 3.0 && p < 8.0 / 3.0) {
        return Err(MengerError::BadParams(format!(
            "symbol needs 7/3 < p < 8/3, got p = {p}"
        )));
    }
    Ok(())
}

/// `(e^{ix} − 1 − ix)/x`, by series near 0.
fn g(x: f64) -> Complex64 {
    if x.abs() < 0.5 {
        // Σ_{n≥2} (ix)^n / (n! x)
        let ix = Complex64::new(0.0, x);
        let mut term = ix * ix / 2.0; // (ix)^2/2!
        let mut sum = term;
        for n in 3..24 {
            term = term * ix / n as f64;
            sum += term;
        }
        sum / x
    } else {
        (Complex64::new(x.cos() - 1.0, x.sin() - x)) / x
    }
}

/// Number of halvings so that the neglected innermost cell of an
/// `x^{β−1}` singularity is below `2^{−40}` relative.
fn levels_for(beta: f64) -> usize {
    ((LEVEL_BUDGET / beta).ceil() as usize).min(MAX_LEVELS)
}

fn rho_with_resolution(p: f64, k: u32, refine: usize) -> f64 {
    let gl = GaussLegendre::new(GL_ORDER);
    let theta = 2.0 * PI * k as f64;
    let cells = (2 * k as usize).max(8) * refine;
    let s_rule = graded_rule(&gl, 0.0, 1.0, cells, true, levels_for(8.0 - 3.0 * p));
    let t_rule = graded_rule(&gl, 0.0, 1.0, cells, true, levels_for(3.0 - p));
    // half of D, b ≤ a, with b = t a and a = s/(2+t); the other half is its mirror
    let ex = 3.0 * p - 4.0;
    let partial: Vec<f64> = t_rule
        .points
        .par_iter()
        .zip(&t_rule.weights)
        .map(|(&t, &wt)| {
            let amax = 1.0 / (2.0 + t);
            let tfac = t.powf(2.0 - p) * (1.0 + t).powf(-p) * amax;
            let mut acc = 0.0;
            for (&s, &ws) in s_rule.points.iter().zip(&s_rule.weights) {
                let a = s * amax;
                let b = t * a;
                // scale by a before squaring: a^{1−ex} alone overflows deep in the grading
                let d = (g(theta * b) - g(-theta * a)) / a;
                acc += ws * d.norm_sqr() * theta * theta * a.powf(3.0 - ex);
            }
            wt * tfac * acc
        })
        .collect();
    2.0 * partial.iter().sum::<f64>()
}

/// `ρ_k` with the relative change under mesh doubling.
pub fn rho_k_with_error(p: f64, k: u32) -> Result<(f64, f64)> {
    check_p(p)?;
    if k == 0 {
        return Err(MengerError::BadParams("k must be at least 1".into()));
    }
    let coarse = rho_with_resolution(p, k, 1);
    let fine = rho_with_resolution(p, k, 2);
    let change = ((fine - coarse) / fine).abs();
    if change > DOUBLING_TOL || !fine.is_finite() {
        return Err(MengerError::QuadratureNotConverged(change));
    }
    Ok((fine, change))
}

/// `ρ_k = ∬_D |(e^{2πikw}−1)/w − (e^{2πikv}−1)/v|² / (|v|^{p−2}|w|^{p−2}|v−w|^p)`.
pub fn rho_k(p: f64, k: u32) -> Result<f64> {
    rho_k_with_error(p, k).map(|r| r.0)
}

/// `12 ρ_k + λ (2πk)²`.
pub fn tilde_rho(p: f64, lambda: f64, k: u32) -> Result<f64> {
    Ok(12.0 * rho_k(p, k)? + lambda * (2.0 * PI * k as f64).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolTable {
    pub p: f64,
    pub ks: Vec<u32>,
    pub rho: Vec<f64>,
    /// `ρ_k / k^{3p−4}`.
    pub scaled: Vec<f64>,
    /// Scaled value at the largest k.
    pub plateau: f64,
    /// Largest relative pairwise difference among the top three scaled values.
    pub deviation: f64,
    /// Least-squares slope of `log ρ_k` against `log k`.
    pub slope: f64,
}

impl SymbolTable {
    /// `12 ρ_k + λ(2πk)²` for each row.
    pub fn tilde(&self, lambda: f64) -> Vec<f64> {
        self.ks
            .iter()
            .zip(&self.rho)
            .map(|(&k, &r)| 12.0 * r + lambda * (2.0 * PI * k as f64).powi(2))
            .collect()
    }
}

pub fn rho_asymptotic(p: f64, ks: &[u32]) -> Result<SymbolTable> {
    check_p(p)?;
    if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MengerError::BadParams(
            "ks must be positive and increasing".into(),
        ));
    }
    let rho = ks
        .iter()
        .map(|&k| rho_k(p, k))
        .collect::<Result<Vec<_>>>()?;
    let ex = 3.0 * p - 4.0;
    let scaled: Vec<f64> = ks
        .iter()
        .zip(&rho)
        .map(|(&k, &r)| r / (k as f64).powf(ex))
        .collect();
    let top = &scaled[scaled.len().saturating_sub(3)..];
    let mut deviation = 0.0f64;
    for i in 0..top.len() {
        for j in i + 1..top.len() {
            deviation = deviation.max((top[i] - top[j]).abs() / top[i].min(top[j]));
        }
    }
    let slope = if ks.len() >= 2 {
        loglog_slope(&ks.iter().map(|&k| k as f64).collect::<Vec<_>>(), &rho)
    } else {
        f64::NAN
    };
    Ok(SymbolTable {
        p,
        ks: ks.to_vec(),
        plateau: *scaled.last().unwrap(),
        rho,
        scaled,
        deviation,
        slope,
    })
}

fn check_inputs(f: &[Point], g: &[Point]) -> Result<usize> {
    if f.len() != g.len() {
        return Err(MengerError::InvalidCurve(format!(
            "sample counts differ: {} and {}",
            f.len(),
            g.len()
        )));
    }
    if f.len() < 8 {
        return Err(MengerError::InvalidCurve("need at least 8 samples".into()));
    }
    Ok(f.len())
}

/// `∫_{cell ∩ T} (a+b)^{2−p} (ab)^{2−p} da db`, `T = {a, b ≥ 0, 2a+b ≤ 1, a+2b ≤ 1}`.
fn cell_weight(p: f64, a0: f64, a1: f64, b0: f64, b1: f64, gl: &GaussLegendre) -> f64 {
    let levels = levels_for(3.0 - p);
    let amax = |b: f64| ((1.0 - b) / 2.0).min(1.0 - 2.0 * b);
    let phi = |a: f64, b: f64| ((a + b) * a * b).powf(2.0 - p);
    let b1 = b1.min(0.5);
    if b1 <= b0 {
        return 0.0;
    }
    let mut pieces = vec![(b0, b1)];
    if b0 < 1.0 / 3.0 && b1 > 1.0 / 3.0 {
        pieces = vec![(b0, 1.0 / 3.0), (1.0 / 3.0, b1)];
    }
    let mut total = 0.0;
    for (lo, hi) in pieces {
        let outer = if lo == 0.0 {
            graded_rule(gl, lo, hi, 1, true, levels)
        } else {
            let mut r = Rule::default();
            gl.push_interval(lo, hi, &mut r);
            r
        };
        for (&b, &wb) in outer.points.iter().zip(&outer.weights) {
            let top = a1.min(amax(b));
            if top <= a0 {
                continue;
            }
            let inner = if a0 == 0.0 {
                graded_rule(gl, a0, top, 1, true, levels)
            } else {
                let mut r = Rule::default();
                gl.push_interval(a0, top, &mut r);
                r
            };
            total += wb * inner.integrate(|a| phi(a, b));
        }
    }
    total
}

/// Product-integration weights `W_{AB}` on the offset grid `a = A/N`, `b = B/N`.
fn weight_table(n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let h = 1.0 / n as f64;
    let gl = GaussLegendre::new(8);
    let half = n / 2 + 1;
    let cells: Vec<(usize, usize)> = (0..=half)
        .flat_map(|a| (0..=half).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            let a0 = (a as f64 - 0.5).max(0.0) * h;
            let b0 = (b as f64 - 0.5).max(0.0) * h;
            2.0 * a0 + b0 < 1.0 && a0 + 2.0 * b0 < 1.0
        })
        .collect();
    cells
        .par_iter()
        .map(|&(a, b)| {
            let a0 = (a as f64 - 0.5).max(0.0) * h;
            let b0 = (b as f64 - 0.5).max(0.0) * h;
            let w = cell_weight(p, a0, (a as f64 + 0.5) * h, b0, (b as f64 + 0.5) * h, &gl);
            (a, b, w)
        })
        .filter(|c| c.2 > 0.0)
        .collect()
}

/// Second divided differences `f[u−A, u, u+B]` of periodic samples, with
/// the `A = 0` or `B = 0` limits taken from fourth-order differences.
struct DividedDifferences<'a> {
    f: &'a [Point],
    d1: Vec<Point>,
    d2: Vec<Point>,
    h: f64,
}

impl<'a> DividedDifferences<'a> {
    fn new(f: &'a [Point]) -> Self {
        let n = f.len();
        let h = 1.0 / n as f64;
        let at = |i: isize| f[i.rem_euclid(n as isize) as usize];
        let d1 = (0..n as isize)
            .map(|i| (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) / (12.0 * h))
            .collect();
        let d2 = (0..n as isize)
            .map(|i| {
                (-at(i - 2) + at(i - 1) * 16.0 - at(i) * 30.0 + at(i + 1) * 16.0 - at(i + 2))
                    / (12.0 * h * h)
            })
            .collect();
        Self { f, d1, d2, h }
    }

    fn y(&self, u: usize, a: usize, b: usize) -> Point {
        let n = self.f.len();
        let h = self.h;
        let fu = self.f[u];
        match (a, b) {
            (0, 0) => self.d2[u] * 0.5,
            (0, b) => {
                let w = b as f64 * h;
                ((self.f[(u + b) % n] - fu) / w - self.d1[u]) / w
            }
            (a, 0) => {
                let v = a as f64 * h;
                (self.d1[u] - (fu - self.f[(u + n - a) % n]) / v) / v
            }
            (a, b) => {
                let w = b as f64 * h;
                let v = a as f64 * h;
                ((self.f[(u + b) % n] - fu) / w - (fu - self.f[(u + n - a) % n]) / v) / (v + w)
            }
        }
    }
}

/// Direct evaluation of `Q(f, g)` from vertex samples.
///
/// With `a = −v`, `b = w` the integrand is `⟨Y_f, Y_g⟩ (a+b)^{2−p} (ab)^{2−p}`
/// where `Y` is the second divided difference `f[u−a, u, u+b]`, a smooth
/// function. `Y` is sampled on the offset grid and the singular weight is
/// integrated exactly over each grid cell.
pub fn q_form_direct(f: &[Point], g: &[Point], p: f64) -> Result<f64> {
    check_p(p)?;
    let n = check_inputs(f, g)?;
    let weights = weight_table(n, p);
    let yf = DividedDifferences::new(f);
    let yg = DividedDifferences::new(g);
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|u| {
            weights
                .iter()
                .map(|&(a, b, w)| w * yf.y(u, a, b).dot(&yg.y(u, a, b)))
                .sum::<f64>()
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / n as f64)
}

/// `f̂_k = (1/N) Σ_j f_j e^{−2πikj/N}` per coordinate, `k = 0..N−1`.
pub fn fourier_coefficients(f: &[Point]) -> Vec<[Complex64; 3]> {
    let n = f.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = vec![[Complex64::new(0.0, 0.0); 3]; n];
    for axis in 0..3 {
        let mut buf: Vec<Complex64> = f.iter().map(|x| Complex64::new(x[axis], 0.0)).collect();
        fft.process(&mut buf);
        for (k, c) in buf.into_iter().enumerate() {
            out[k][axis] = c / n as f64;
        }
    }
    out
}

/// `Σ_{1≤|k|≤N/4} ρ_k ⟨f̂_k, ĝ_k⟩`, conjugate pairs combined.
///
/// Modes whose product `|f̂_k||ĝ_k|` is below `1e-13` of the largest one
/// are skipped, so band-limited inputs only need a few `ρ_k`.
pub fn q_form_fourier(f: &[Point], g: &[Point], p: f64) -> Result<f64> {
    check_p(p)?;
    let n = check_inputs(f, g)?;
    let fh = fourier_coefficients(f);
    let gh = fourier_coefficients(g);
    let kmax = n / 4;
    let pairs: Vec<(u32, f64, f64)> = (1..=kmax)
        .map(|k| {
            let inner: Complex64 = (0..3).map(|l| fh[k][l] * gh[k][l].conj()).sum();
            let size = (0..3).map(|l| fh[k][l].norm_sqr()).sum::<f64>().sqrt()
                * (0..3).map(|l| gh[k][l].norm_sqr()).sum::<f64>().sqrt();
            (k as u32, 2.0 * inner.re, size)
        })
        .collect();
    let biggest = pairs.iter().map(|x| x.2).fold(0.0, f64::max);
    if biggest == 0.0 {
        return Ok(0.0);
    }
    let terms = pairs
        .par_iter()
        .filter(|x| x.2 > 1e-13 * biggest)
        .map(|&(k, re, _)| rho_k(p, k).map(|r| r * re))
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(n: usize, k: usize, circle: bool) -> Vec<Point> {
        (0..n)
            .map(|j| {
                let x = 2.0 * PI * (k * j) as f64 / n as f64;
                Point::new(x.cos(), if circle { x.sin() } else { 0.0 }, 0.0)
            })
            .collect()
    }

    #[test]
    fn g_is_continuous_across_series_switch() {
        for x in [0.4999999, -0.4999999] {
            let a = g(x);
            let b = Complex64::new(x.cos() - 1.0, x.sin() - x) / x;
            assert!((a - b).norm() < 1e-14);
        }
        assert!(g(1e-9).norm() < 1e-8);
    }

    #[test]
    fn deep_grading_stays_finite() {
        for p in [2.64, 2.6456, 2.66] {
            let (r, change) = rho_k_with_error(p, 1).unwrap();
            assert!(
                r.is_finite() && r > 0.0 && change < DOUBLING_TOL,
                "{p}: {r}"
            );
        }
    }

    #[test]
    fn rho_is_positive_and_converged() {
        for k in [1, 2, 5] {
            let (r, change) = rho_k_with_error(2.5, k).unwrap();
            assert!(r > 0.0);
            assert!(change < 1e-6, "k = {k}: {change}");
        }
        assert!(rho_k(2.0, 1).is_err());
        assert!(rho_k(2.5, 0).is_err());
    }

    #[test]
    fn rho_grows() {
        let r: Vec<f64> = [4, 8, 16].iter().map(|&k| rho_k(2.5, k).unwrap()).collect();
        assert!(r[1] > r[0] && r[2] > r[1]);
    }

    #[test]
    fn tilde_rho_reduces_to_rho() {
        let r = rho_k(2.5, 3).unwrap();
        assert_eq!(tilde_rho(2.5, 0.0, 3).unwrap(), 12.0 * r);
        assert!(tilde_rho(2.5, 1.0, 3).unwrap() > 12.0 * r);
    }

    #[test]
    fn divided_differences_of_quadratic() {
        // f(x) = x² on a window away from the wrap: f[u−a, u, u+b] = 1
        let n = 64;
        let f: Vec<Point> = (0..n)
            .map(|j| {
                let x = j as f64 / n as f64;
                Point::new(x * x, 0.0, 0.0)
            })
            .collect();
        let dd = DividedDifferences::new(&f);
        for (a, b) in [(0, 0), (0, 3), (2, 0), (4, 5)] {
            assert!((dd.y(30, a, b).x - 1.0).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn weight_table_integrates_weight_over_domain() {
        // Σ W over all cells equals ∬_T (a+b)^{2−p}(ab)^{2−p}
        let p = 2.5;
        let total: f64 = weight_table(32, p).iter().map(|c| c.2).sum();
        let total64: f64 = weight_table(64, p).iter().map(|c| c.2).sum();
        assert!((total / total64 - 1.0).abs() < 1e-6, "{total} {total64}");
    }

    #[test]
    fn constant_and_zero_inputs_vanish() {
        let n = 64;
        let f = mode(n, 2, true);
        let c = vec![Point::new(1.0, 2.0, 3.0); n];
        assert!(q_form_direct(&f, &c, 2.5).unwrap().abs() < 1e-10);
        let z = vec![Point::zeros(); n];
        assert_eq!(q_form_fourier(&z, &z, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn direct_form_is_symmetric() {
        let n = 64;
        let f = mode(n, 2, true);
        let g = mode(n, 3, false);
        let fg = q_form_direct(&f, &g, 2.5).unwrap();
        let gf = q_form_direct(&g, &f, 2.5).unwrap();
        assert!((fg - gf).abs() <= 1e-12 * fg.abs().max(1.0));
    }

    #[test]
    fn circle_mode_recovers_rho() {
        let n = 128;
        for k in [1, 3] {
            let f = mode(n, k, true);
            let q = q_form_direct(&f, &f, 2.5).unwrap();
            let r = rho_k(2.5, k as u32).unwrap();
            assert!((q / r - 1.0).abs() < 0.03, "k = {k}: {q} vs {r}");
            let c = mode(n, k, false);
            let qc = q_form_direct(&c, &c, 2.5).unwrap();
            assert!((qc / (0.5 * r) - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn distinct_modes_are_orthogonal() {
        let n = 64;
        let f = mode(n, 2, true);
        let g = mode(n, 5, true);
        let q = q_form_fourier(&f, &g, 2.5).unwrap();
        let qf = q_form_fourier(&f, &f, 2.5).unwrap();
        assert!(q.abs() < 1e-10 * qf);
    }
}
