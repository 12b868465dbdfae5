use super::{ClosedCurve, Point};
use crate::error::{MengerError, Result};

const MAX_SWEEPS: usize = 200;
const CHORD_TOL: f64 = 1e-13;

/// Resamples to `m` vertices with equal chord lengths.
///
/// Vertices are placed on the periodic piecewise-linear interpolant,
/// starting at vertex 0. The parameter positions are corrected until all
/// chords agree, then the polygon is dilated about its centroid so the
/// total length matches the input.
pub fn resample_arclength(curve: &ClosedCurve, m: usize) -> Result<ClosedCurve> {
    if m < 3 {
        return Err(MengerError::InvalidCurve(format!(
            "resample target must be at least 3, got {m}"
        )));
    }
    let path = Polyline::new(curve);
    let total = path.total;
    let mut s: Vec<f64> = (0..m).map(|i| total * i as f64 / m as f64).collect();
    let mut pts: Vec<Point> = s.iter().map(|&x| path.at(x)).collect();

    for _ in 0..MAX_SWEEPS {
        let chords: Vec<f64> = (0..m).map(|i| (pts[(i + 1) % m] - pts[i]).norm()).collect();
        let (lo, hi) = chords.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        });
        if hi / lo - 1.0 <= CHORD_TOL {
            break;
        }
        // cumulative chord length as a function of the path parameter
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for c in &chords {
            cum.push(cum.last().unwrap() + c);
        }
        let chord_total = cum[m];
        let mut knots = s.clone();
        knots.push(total);
        let mut next = Vec::with_capacity(m);
        next.push(0.0);
        let mut seg = 0;
        for i in 1..m {
            let target = chord_total * i as f64 / m as f64;
            while cum[seg + 1] < target {
                seg += 1;
            }
            let t = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
            next.push(knots[seg] + t * (knots[seg + 1] - knots[seg]));
        }
        s = next;
        pts = s.iter().map(|&x| path.at(x)).collect();
    }

    let out = ClosedCurve::new(curve.dim(), pts)?;
    out.with_length(curve.length())
}

struct Polyline<'a> {
    curve: &'a ClosedCurve,
    cum: Vec<f64>,
    total: f64,
}

impl<'a> Polyline<'a> {
    fn new(curve: &'a ClosedCurve) -> Self {
        let mut cum = Vec::with_capacity(curve.len() + 1);
        cum.push(0.0);
        for l in curve.edge_lengths() {
            cum.push(cum.last().unwrap() + l);
        }
        let total = *cum.last().unwrap();
        Self { curve, cum, total }
    }

    fn at(&self, s: f64) -> Point {
        let s = s.rem_euclid(self.total);
        let n = self.curve.len();
        // binary search for the edge containing s
        let e = match self
            .cum
            .binary_search_by(|c| c.partial_cmp(&s).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 1),
            Err(i) => (i - 1).min(n - 1),
        };
        let len = self.cum[e + 1] - self.cum[e];
        let t = ((s - self.cum[e]) / len).clamp(0.0, 1.0);
        self.curve.vertex(e) + self.curve.edge(e) * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_preset, Preset};
    use std::f64::consts::PI;

    fn regular_polygon(n: usize, r: f64, phase: f64) -> ClosedCurve {
        let v = (0..n)
            .map(|i| {
                let t = phase + 2.0 * PI * i as f64 / n as f64;
                Point::new(r * t.cos(), r * t.sin(), 0.0)
            })
            .collect();
        ClosedCurve::new(2, v).unwrap()
    }

    #[test]
    fn regular_polygon_is_fixed() {
        let c = regular_polygon(12, 1.0, 0.3);
        let r = resample_arclength(&c, 12).unwrap();
        for (a, b) in c.vertices().iter().zip(r.vertices()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn nonuniform_square_gets_equal_spacing() {
        // square with an extra vertex splitting the bottom edge unevenly
        let c = ClosedCurve::from_rows(
            2,
            &[
                vec![0.0, 0.0],
                vec![0.3, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        let r = resample_arclength(&c, 8).unwrap();
        // cumulative perimeter positions 0, 0.5, ..., 3.5 on the unit square
        let expected = [
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [1.0, 1.0],
            [0.5, 1.0],
            [0.0, 1.0],
            [0.0, 0.5],
        ];
        for (v, e) in r.vertices().iter().zip(expected) {
            assert!(
                (v.x - e[0]).abs() < 1e-12 && (v.y - e[1]).abs() < 1e-12,
                "{v:?}"
            );
        }
        assert!(r.is_arclength());
        assert!((r.length() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn equal_edges_and_length_preserved() {
        let c = make_preset(&Preset::TorusKnot { a: 2, b: 3 }, 40, 3).unwrap();
        let wobbly = c
            .map_vertices(|v| v * (1.0 + 0.1 * (7.0 * v.x).sin()))
            .unwrap();
        let r = resample_arclength(&wobbly, 57).unwrap();
        assert!(r.is_arclength());
        assert!(r.edge_ratio() - 1.0 < 1e-8);
        assert!((r.length() / wobbly.length() - 1.0).abs() < 1e-12);
        let again = resample_arclength(&r, 57).unwrap();
        for (a, b) in r.vertices().iter().zip(again.vertices()) {
            assert!((a - b).norm() < 1e-8);
        }
    }
}
