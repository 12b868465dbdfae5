use super::{index_distance, ClosedCurve, Point};
use crate::error::{MengerError, Result};

/// Largest ratio `d_{R/Z}(u_i, u_j) / |γ_i − γ_j|` over vertex pairs.
pub fn bilipschitz_constant(curve: &ClosedCurve) -> Result<f64> {
    let n = curve.len();
    let v = curve.vertices();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let chord = (v[i] - v[j]).norm();
            if chord == 0.0 {
                return Err(MengerError::SelfIntersection(i, j));
            }
            let d = index_distance(i, j, n) as f64 / n as f64;
            best = best.max(d / chord);
        }
    }
    Ok(best)
}

/// Euclidean distance between segments `[p0,p1]` and `[q0,q1]`.
pub fn segment_distance(p0: &Point, p1: &Point, q0: &Point, q1: &Point) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p0 + d1 * s) - (q0 + d2 * t)).norm()
}

/// Minimum distance over pairs of edges that share no vertex.
/// Returns `+inf` when no such pair exists (N = 3).
pub fn min_segment_distance(curve: &ClosedCurve) -> f64 {
    let n = curve.len();
    let v = curve.vertices();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (a0, a1) = (&v[i], &v[(i + 1) % n]);
        for j in i + 2..n {
            if (j + 1) % n == i {
                continue;
            }
            let d = segment_distance(a0, a1, &v[j], &v[(j + 1) % n]);
            best = best.min(d);
        }
    }
    best
}
