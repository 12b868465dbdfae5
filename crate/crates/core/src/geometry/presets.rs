use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{min_segment_distance, resample_arclength, ClosedCurve, Point};
use crate::error::{MengerError, Result};

/// Named test curves, all normalized to total length 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Circle,
    /// Semi-axes `aspect : 1`.
    Ellipse {
        aspect: f64,
    },
    /// `((2 + cos bθ) cos aθ, (2 + cos bθ) sin aθ, sin bθ)`; needs dim 3.
    TorusKnot {
        a: u32,
        b: u32,
    },
    /// Regular k-gon traversed at constant speed.
    Polygon {
        k: usize,
    },
    /// Circle with a seeded low-mode radial (and, in 3D, vertical) wobble.
    PerturbedCircle {
        eps: f64,
        seed: u64,
    },
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Circle => write!(f, "circle"),
            Preset::Ellipse { aspect } => write!(f, "ellipse:{aspect}"),
            Preset::TorusKnot { a, b } => write!(f, "torus:{a},{b}"),
            Preset::Polygon { k } => write!(f, "polygon:{k}"),
            Preset::PerturbedCircle { eps, seed } => write!(f, "perturbed:{eps},{seed}"),
        }
    }
}

impl FromStr for Preset {
    type Err = MengerError;

    /// Accepts `circle`, `ellipse:2`, `torus:2,3`, `polygon:4`,
    /// `perturbed:0.05,7`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || MengerError::BadPreset(s.to_string());
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), a.split(',').map(str::trim).collect::<Vec<_>>()),
            None => (s.trim(), Vec::new()),
        };
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())
        };
        let int = |i: usize| -> Result<u64> {
            args.get(i)
                .ok_or_else(bad)?
                .parse::<u64>()
                .map_err(|_| bad())
        };
        let preset = match (name, args.len()) {
            ("circle", 0) => Preset::Circle,
            ("ellipse", 1) => Preset::Ellipse { aspect: num(0)? },
            ("torus" | "torus_knot", 2) => Preset::TorusKnot {
                a: int(0)? as u32,
                b: int(1)? as u32,
            },
            ("trefoil", 0) => Preset::TorusKnot { a: 2, b: 3 },
            ("polygon", 1) => Preset::Polygon {
                k: int(0)? as usize,
            },
            ("perturbed" | "perturbed_circle", 2) => Preset::PerturbedCircle {
                eps: num(0)?,
                seed: int(1)?,
            },
            _ => return Err(bad()),
        };
        Ok(preset)
    }
}

const DENSE_FACTOR: usize = 16;
const DENSE_MIN: usize = 4096;

/// Samples the preset, resamples to N equal chords and rescales to length 1.
pub fn make_preset(preset: &Preset, n: usize, dim: usize) -> Result<ClosedCurve> {
    if n < 3 {
        return Err(MengerError::BadPreset(format!("N = {n} is below 3")));
    }
    if dim != 2 && dim != 3 {
        return Err(MengerError::BadPreset(format!("dimension {dim}")));
    }
    let curve = match preset {
        Preset::Circle => {
            let r = 1.0 / (2.0 * PI);
            let v = (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    Point::new(r * t.cos(), r * t.sin(), 0.0)
                })
                .collect();
            let c = ClosedCurve::new(dim, v)?;
            // exact regular polygon; only the perimeter is normalized
            return c.scaled(1.0 / c.length());
        }
        Preset::Ellipse { aspect } => {
            if !(aspect.is_finite() && *aspect > 0.0) {
                return Err(MengerError::BadPreset(format!("ellipse aspect {aspect}")));
            }
            let a = *aspect;
            dense(dim, n, |t| Point::new(a * t.cos(), t.sin(), 0.0))?
        }
        Preset::TorusKnot { a, b } => {
            if dim != 3 {
                return Err(MengerError::BadPreset("torus knots need dim 3".into()));
            }
            if *a == 0 || *b == 0 || gcd(*a, *b) != 1 {
                return Err(MengerError::BadPreset(format!(
                    "torus knot ({a},{b}) needs coprime positive winding numbers"
                )));
            }
            let (a, b) = (*a as f64, *b as f64);
            dense(dim, n, |t| {
                let r = 2.0 + (b * t).cos();
                Point::new(r * (a * t).cos(), r * (a * t).sin(), (b * t).sin())
            })?
        }
        Preset::Polygon { k } => {
            if *k < 3 {
                return Err(MengerError::BadPreset(format!("polygon with {k} sides")));
            }
            let corners = (0..*k)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / *k as f64;
                    Point::new(t.cos(), t.sin(), 0.0)
                })
                .collect();
            ClosedCurve::new(dim, corners)?
        }
        Preset::PerturbedCircle { eps, seed } => {
            if !(eps.is_finite() && *eps >= 0.0 && *eps < 0.5) {
                return Err(MengerError::BadPreset(format!("perturbation {eps}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let modes: Vec<(f64, f64, f64)> = (2..=5)
                .map(|_| {
                    (
                        rng.gen_range(-0.25..0.25),
                        rng.gen_range(-0.25..0.25),
                        rng.gen_range(-0.25..0.25),
                    )
                })
                .collect();
            let eps = *eps;
            let lift = if dim == 3 { 1.0 } else { 0.0 };
            dense(dim, n, move |t| {
                let mut r = 1.0;
                let mut z = 0.0;
                for (m, (a, b, c)) in modes.iter().enumerate() {
                    let m = (m + 2) as f64;
                    r += eps * (a * (m * t).cos() + b * (m * t).sin());
                    z += eps * c * (m * t + 0.7).sin();
                }
                Point::new(r * t.cos(), r * t.sin(), lift * z)
            })?
        }
    };
    let out = resample_arclength(&curve, n)?;
    let out = out.with_length(1.0)?;
    if n >= 4 && min_segment_distance(&out) <= 0.0 {
        return Err(MengerError::BadPreset(format!(
            "{preset} is not embedded at N = {n}"
        )));
    }
    Ok(out)
}

fn dense<F: Fn(f64) -> Point>(dim: usize, n: usize, f: F) -> Result<ClosedCurve> {
    let m = (DENSE_FACTOR * n).max(DENSE_MIN);
    let v = (0..m).map(|i| f(2.0 * PI * i as f64 / m as f64)).collect();
    ClosedCurve::new(dim, v)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in [
            "circle",
            "ellipse:2",
            "torus:2,3",
            "polygon:4",
            "perturbed:0.05,7",
        ] {
            let p: Preset = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("torus:2".parse::<Preset>().is_err());
        assert!("blob".parse::<Preset>().is_err());
        assert!("ellipse:x".parse::<Preset>().is_err());
    }

    #[test]
    fn circle_is_regular_unit_polygon() {
        let c = make_preset(&Preset::Circle, 64, 2).unwrap();
        assert!(c.is_arclength());
        assert!((c.length() - 1.0).abs() < 1e-14);
        let r0 = c.vertex(0).norm();
        for v in c.vertices() {
            assert!((v.norm() - r0).abs() < 1e-15);
        }
    }

    #[test]
    fn all_presets_are_unit_length_arclength_and_embedded() {
        let cases = [
            (Preset::Circle, 3),
            (Preset::Ellipse { aspect: 2.0 }, 2),
            (Preset::TorusKnot { a: 2, b: 3 }, 3),
            (Preset::Polygon { k: 4 }, 2),
            (Preset::PerturbedCircle { eps: 0.05, seed: 7 }, 2),
            (Preset::PerturbedCircle { eps: 0.05, seed: 7 }, 3),
        ];
        for (p, dim) in cases {
            let c = make_preset(&p, 96, dim).unwrap();
            assert!(c.is_arclength(), "{p}");
            assert!((c.length() - 1.0).abs() < 1e-12, "{p}");
            assert!(min_segment_distance(&c) > 0.0, "{p}");
        }
    }

    #[test]
    fn square_preset_hits_corners() {
        let c = make_preset(&Preset::Polygon { k: 4 }, 16, 2).unwrap();
        // every fourth vertex is a corner, at distance side/sqrt(2) from the center
        let side = 0.25;
        for i in (0..16).step_by(4) {
            assert!((c.vertex(i).norm() - side / 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_presets() {
        assert!(make_preset(&Preset::TorusKnot { a: 2, b: 3 }, 64, 2).is_err());
        assert!(make_preset(&Preset::TorusKnot { a: 2, b: 4 }, 64, 3).is_err());
        assert!(make_preset(&Preset::Polygon { k: 2 }, 64, 2).is_err());
        assert!(make_preset(&Preset::Circle, 2, 2).is_err());
    }

    #[test]
    fn perturbed_circle_is_seeded() {
        let a = make_preset(&Preset::PerturbedCircle { eps: 0.05, seed: 1 }, 32, 2).unwrap();
        let b = make_preset(&Preset::PerturbedCircle { eps: 0.05, seed: 1 }, 32, 2).unwrap();
        let c = make_preset(&Preset::PerturbedCircle { eps: 0.05, seed: 2 }, 32, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
