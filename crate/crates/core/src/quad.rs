//! One-dimensional quadrature building blocks: Gauss–Legendre rules and
//! composite rules geometrically graded toward an endpoint singularity.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes via Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Append the rule mapped onto [a, b] to `out`.
    pub fn push_interval(&self, a: f64, b: f64, out: &mut Rule) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            out.points.push(mid + half * x);
            out.weights.push(half * w);
        }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A composite 1D rule: points with weights.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Composite rule on [lo, hi].
///
/// When `graded` is set, the first `uniform` cell is replaced by `levels`
/// geometric cells with ratio 1/2 accumulating at `lo`; the remaining
/// length is split into `uniform` equal cells.
pub fn graded_rule(
    gl: &GaussLegendre,
    lo: f64,
    hi: f64,
    uniform: usize,
    graded: bool,
    levels: usize,
) -> Rule {
    let mut rule = Rule::default();
    let uniform = uniform.max(1);
    let h = (hi - lo) / uniform as f64;
    let first_uniform = if graded {
        let top = lo + h;
        let mut right = top;
        let mut cells = Vec::with_capacity(levels + 1);
        for _ in 0..levels {
            let left = lo + 0.5 * (right - lo);
            cells.push((left, right));
            right = left;
        }
        cells.push((lo, right));
        for (a, b) in cells.into_iter().rev() {
            gl.push_interval(a, b, &mut rule);
        }
        1
    } else {
        0
    };
    for c in first_uniform..uniform {
        let a = lo + c as f64 * h;
        let b = if c + 1 == uniform { hi } else { a + h };
        gl.push_interval(a, b, &mut rule);
    }
    rule
}
