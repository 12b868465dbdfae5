use super::Point;
use crate::energy::EnergyParams;
use crate::error::{MengerError, Result};

/// Three points x, y, z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriplePoint {
    pub x: Point,
    pub y: Point,
    pub z: Point,
}

impl TriplePoint {
    pub fn new(x: Point, y: Point, z: Point) -> Self {
        Self { x, y, z }
    }

    fn check_distinct(&self) -> Result<()> {
        if self.x == self.y {
            return Err(MengerError::DegenerateTriple(0, 1));
        }
        if self.x == self.z {
            return Err(MengerError::DegenerateTriple(0, 2));
        }
        if self.y == self.z {
            return Err(MengerError::DegenerateTriple(1, 2));
        }
        Ok(())
    }

    /// Product of the three side lengths `|y−z||y−x||z−x|`.
    pub fn side_product(&self) -> f64 {
        (self.y - self.z).norm() * (self.y - self.x).norm() * (self.z - self.x).norm()
    }
}

/// `|a∧b|² = |a|²|b|² − ⟨a,b⟩²`, clamped at zero.
#[inline]
pub fn wedge_norm_sq(a: &Point, b: &Point) -> f64 {
    let ab = a.dot(b);
    (a.norm_squared() * b.norm_squared() - ab * ab).max(0.0)
}

/// `|a∧b|` via the Gram identity.
#[inline]
pub fn wedge_norm(a: &Point, b: &Point) -> f64 {
    wedge_norm_sq(a, b).sqrt()
}

/// Circumradius `abc / (2|(y−x)∧(z−x)|)`; infinite for collinear points.
pub fn circumradius(t: &TriplePoint) -> Result<f64> {
    t.check_distinct()?;
    let w = wedge_norm(&(t.y - t.x), &(t.z - t.x));
    if w == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(t.side_product() / (2.0 * w))
}

/// The integrand factor `1/R^{p,q} = |(y−x)∧(z−x)|^q / (abc)^p`.
pub fn rpq_kernel(t: &TriplePoint, params: &EnergyParams) -> Result<f64> {
    t.check_distinct()?;
    let a = t.y - t.x;
    let b = t.z - t.x;
    let c = t.y - t.z;
    Ok(kernel_from_sides(
        a.norm_squared(),
        b.norm_squared(),
        c.norm_squared(),
        a.dot(&b),
        params.p(),
        params.q(),
    ))
}

/// Kernel from squared side lengths and `⟨a,b⟩`, with `a, b` emanating
/// from the same vertex and `c` the opposite side. Sides must be nonzero.
#[inline]
pub(crate) fn kernel_from_sides(aa: f64, bb: f64, cc: f64, ab: f64, p: f64, q: f64) -> f64 {
    let w2 = aa * bb - ab * ab;
    if w2 <= 0.0 {
        return 0.0;
    }
    let prod = aa * bb * cc;
    if q == 2.0 {
        w2 * (-0.5 * p * prod.ln()).exp()
    } else {
        (0.5 * (q * w2.ln() - p * prod.ln())).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p3(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(wedge_norm(&p3(1.0, 0.0, 0.0), &p3(0.0, 1.0, 0.0)), 1.0);
        assert_eq!(wedge_norm(&p3(2.0, 0.0, 0.0), &p3(4.0, 0.0, 0.0)), 0.0);
        assert_eq!(wedge_norm(&p3(1.0, 0.0, 0.0), &p3(1.0, 1.0, 0.0)), 1.0);
    }

    #[test]
    fn circumradius_examples() {
        let s3 = 3f64.sqrt();
        let eq = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(1.0, 0.0, 0.0), p3(0.5, s3 / 2.0, 0.0));
        assert_relative_eq!(circumradius(&eq).unwrap(), 1.0 / s3, max_relative = 1e-14);
        let right = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(3.0, 0.0, 0.0), p3(0.0, 4.0, 0.0));
        assert_relative_eq!(circumradius(&right).unwrap(), 2.5, max_relative = 1e-14);
        let line = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(1.0, 0.0, 0.0), p3(2.0, 0.0, 0.0));
        assert_eq!(circumradius(&line).unwrap(), f64::INFINITY);
        let dup = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(0.0, 0.0, 0.0), p3(2.0, 0.0, 0.0));
        assert!(matches!(
            circumradius(&dup),
            Err(MengerError::DegenerateTriple(0, 1))
        ));
    }

    #[test]
    fn kernel_examples() {
        let s3 = 3f64.sqrt();
        let eq = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(1.0, 0.0, 0.0), p3(0.5, s3 / 2.0, 0.0));
        let pq = EnergyParams::new(2.0, 2.0).unwrap();
        assert_relative_eq!(rpq_kernel(&eq, &pq).unwrap(), 0.75, max_relative = 1e-14);
        let line = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(1.0, 0.0, 0.0), p3(2.0, 0.0, 0.0));
        let other = EnergyParams::new(2.5, 2.0).unwrap();
        assert_eq!(rpq_kernel(&line, &other).unwrap(), 0.0);
        let dup = TriplePoint::new(p3(0.0, 0.0, 0.0), p3(1.0, 0.0, 0.0), p3(1.0, 0.0, 0.0));
        assert!(rpq_kernel(&dup, &other).is_err());
    }
}
