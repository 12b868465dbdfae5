//! Closed polygonal curves on the uniform parameter grid `u_i = i/N` of
//! R/Z, together with the circumradius primitives and embeddedness metrics.

mod metrics;
mod presets;
pub(crate) mod primitives;
mod resample;

pub use metrics::{bilipschitz_constant, min_segment_distance, segment_distance};
pub use presets::{make_preset, Preset};
pub use primitives::{circumradius, rpq_kernel, wedge_norm, wedge_norm_sq, TriplePoint};
pub use resample::resample_arclength;

use crate::error::{MengerError, Result};
use nalgebra::Vector3;

pub type Point = Vector3<f64>;

/// Relative tolerance on max/min edge length for the arc-length flag.
pub const ARCLENGTH_TOL: f64 = 1e-8;

/// A closed polygon in R^2 or R^3. Planar curves store `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    dim: usize,
    vertices: Vec<Point>,
    is_arclength: bool,
}

impl ClosedCurve {
    /// Builds a curve, rejecting N < 3, unsupported dimensions, and
    /// repeated consecutive vertices. The arc-length flag is computed.
    pub fn new(dim: usize, vertices: Vec<Point>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(MengerError::InvalidCurve(format!(
                "dimension {dim} not supported (2 or 3)"
            )));
        }
        if vertices.len() < 3 {
            return Err(MengerError::InvalidCurve(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(MengerError::InvalidCurve("non-finite coordinate".into()));
        }
        let mut vertices = vertices;
        if dim == 2 {
            for v in &mut vertices {
                v.z = 0.0;
            }
        }
        let n = vertices.len();
        for i in 0..n {
            if (vertices[(i + 1) % n] - vertices[i]).norm() == 0.0 {
                return Err(MengerError::SelfIntersection(i, (i + 1) % n));
            }
        }
        let mut curve = Self {
            dim,
            vertices,
            is_arclength: false,
        };
        curve.is_arclength = curve.edge_ratio() - 1.0 <= ARCLENGTH_TOL;
        Ok(curve)
    }

    /// Builds a curve from coordinate rows of length `dim`.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut pts = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(MengerError::InvalidCurve(format!(
                    "row {i} has {} coordinates, expected {dim}",
                    r.len()
                )));
            }
            let z = if dim == 3 { r[2] } else { 0.0 };
            pts.push(Point::new(r[0], r[1], z));
        }
        Self::new(dim, pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i % self.vertices.len()]
    }

    pub fn is_arclength(&self) -> bool {
        self.is_arclength
    }

    /// Coordinates as rows of length `dim`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|v| v.iter().take(self.dim).copied().collect())
            .collect()
    }

    /// Edge vector `γ_{i+1} − γ_i`.
    pub fn edge(&self, i: usize) -> Point {
        let n = self.len();
        self.vertices[(i + 1) % n] - self.vertices[i % n]
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.edge(i).norm()).collect()
    }

    pub fn length(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.length() / self.len() as f64
    }

    /// max edge / min edge.
    pub fn edge_ratio(&self) -> f64 {
        let e = self.edge_lengths();
        let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        hi / lo
    }

    /// Unit tangent of each edge.
    pub fn unit_tangents(&self) -> Vec<Point> {
        (0..self.len())
            .map(|i| {
                let e = self.edge(i);
                e / e.norm()
            })
            .collect()
    }

    /// Dual-edge vertex weights `(|e_{i-1}| + |e_i|)/2`; they sum to the length.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let e = self.edge_lengths();
        let n = e.len();
        (0..n).map(|i| 0.5 * (e[(i + n - 1) % n] + e[i])).collect()
    }

    pub fn centroid(&self) -> Point {
        let s: Point = self.vertices.iter().sum();
        s / self.len() as f64
    }

    /// Errors with `SelfIntersection` if two distinct vertices coincide.
    pub fn check_distinct_vertices(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                if (self.vertices[i] - self.vertices[j]).norm_squared() == 0.0 {
                    return Err(MengerError::SelfIntersection(i, j));
                }
            }
        }
        Ok(())
    }

    /// Errors with `NotArclength` unless the flag holds.
    pub fn require_arclength(&self) -> Result<()> {
        if self.is_arclength {
            Ok(())
        } else {
            Err(MengerError::NotArclength(self.edge_ratio()))
        }
    }

    /// Applies `f` to every vertex and rebuilds the curve.
    pub fn map_vertices<F: Fn(&Point) -> Point>(&self, f: F) -> Result<Self> {
        Self::new(self.dim, self.vertices.iter().map(f).collect())
    }

    /// Dilation by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        self.map_vertices(|v| v * lambda)
    }

    pub fn translated(&self, t: &Point) -> Result<Self> {
        self.map_vertices(|v| v + t)
    }

    /// Rescales about the vertex centroid to the given total length.
    pub fn with_length(&self, target: f64) -> Result<Self> {
        let c = self.centroid();
        let s = target / self.length();
        self.map_vertices(|v| c + (v - c) * s)
    }

    /// Vertex `i` becomes vertex `i + shift`.
    pub fn shifted(&self, shift: usize) -> Result<Self> {
        let n = self.len();
        let v = (0..n).map(|i| self.vertices[(i + shift) % n]).collect();
        Self::new(self.dim, v)
    }

    /// Reverses the traversal direction, keeping vertex 0 fixed.
    pub fn reversed(&self) -> Result<Self> {
        let n = self.len();
        let v = (0..n).map(|i| self.vertices[(n - i) % n]).collect();
        Self::new(self.dim, v)
    }

    /// Adds `tau * field[i]` to each vertex.
    pub fn displaced(&self, field: &[Point], tau: f64) -> Result<Self> {
        assert_eq!(field.len(), self.len(), "field size mismatch");
        let v = self
            .vertices
            .iter()
            .zip(field)
            .map(|(x, d)| x + d * tau)
            .collect();
        Self::new(self.dim, v)
    }
}

/// A representative of a point of R/Z (or an offset) in (−1/2, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PeriodicOffset(f64);

impl PeriodicOffset {
    pub fn new(x: f64) -> Self {
        let mut r = x - x.round();
        if r <= -0.5 {
            r += 1.0;
        }
        Self(r)
    }

    /// Offset between grid indices `i` and `j` on an N-grid, `(j − i)/N`.
    pub fn from_indices(i: usize, j: usize, n: usize) -> Self {
        Self::new((j as f64 - i as f64) / n as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// d_{R/Z} = |representative| ∈ [0, 1/2].
    pub fn abs(self) -> f64 {
        self.0.abs()
    }
}

/// Distance on R/Z.
pub fn periodic_distance(x: f64, y: f64) -> f64 {
    PeriodicOffset::new(x - y).abs()
}

/// d_{R/Z}(i/N, j/N) computed in integer arithmetic.
pub fn index_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j) % n;
    d.min(n - d)
}
