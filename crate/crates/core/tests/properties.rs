use proptest::prelude::*;

use menger::energy::{energy_decomposed, energy_full, energy_weighted};
use menger::geometry::{make_preset, resample_arclength, Preset};
use menger::io::{curve_from_csv, curve_from_json, curve_to_csv, curve_to_json};
use menger::sobolev::{seminorm_first, seminorm_second, SeminormSpec, SeminormVariant};
use menger::symbol::{q_form_direct, rho_k};
use menger::variation::{discrete_gradient, length_gradient, projected_gradient};
use menger::{classify, ClosedCurve, EnergyParams, PeriodicOffset, Point};
use nalgebra::{Rotation3, Unit, Vector3};

fn curve(seed: u64, n: usize, eps: f64) -> ClosedCurve {
    make_preset(&Preset::PerturbedCircle { eps, seed }, n, 3).unwrap()
}

fn subcritical() -> impl Strategy<Value = EnergyParams> {
    (1.2f64..3.0, 0.05f64..0.95).prop_map(|(q, t)| {
        let lo = 2.0 * q / 3.0 + 1.0;
        let hi = q + 2.0 / 3.0;
        EnergyParams::new(lo + t * (hi - lo), q).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposed_equals_full(seed in 0u64..1000, n in 8usize..28, pq in subcritical()) {
        let c = curve(seed, n, 0.1);
        let f = energy_full(&c, &pq).unwrap().value;
        let d = energy_decomposed(&c, &pq).unwrap().value;
        prop_assert!(((f - d) / f).abs() < 1e-12);
    }

    #[test]
    fn energy_is_rigid_motion_invariant(
        seed in 0u64..1000,
        angle in -3.0f64..3.0,
        axis in prop::array::uniform3(-1.0f64..1.0),
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        prop_assume!(Vector3::from(axis).norm() > 0.1);
        let pq = EnergyParams::new(2.5, 2.0).unwrap();
        let c = curve(seed, 20, 0.1);
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle);
        let moved = c.map_vertices(|v| rot * v + Point::from(shift)).unwrap();
        let a = energy_weighted(&c, &pq).unwrap();
        let b = energy_weighted(&moved, &pq).unwrap();
        prop_assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn scaling_law(seed in 0u64..1000, lambda in 0.2f64..5.0, pq in subcritical()) {
        let c = curve(seed, 16, 0.1);
        let a = energy_decomposed(&c, &pq).unwrap().value;
        let b = energy_decomposed(&c.scaled(lambda).unwrap(), &pq).unwrap().value;
        prop_assert!((b / (a * lambda.powf(pq.scaling_exponent())) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gradient_has_zero_force_and_torque(seed in 0u64..1000, pq in subcritical()) {
        let c = curve(seed, 18, 0.1);
        let g = discrete_gradient(&c, &pq).unwrap();
        let scale: f64 = g.vectors.iter().zip(c.vertices()).map(|(v, x)| v.norm() * (1.0 + x.norm())).sum();
        let torque: Point = g.vectors.iter().zip(c.vertices()).map(|(v, x)| x.cross(v)).sum();
        prop_assert!(g.total().norm() <= 1e-9 * scale);
        prop_assert!(torque.norm() <= 1e-9 * scale);
    }

    #[test]
    fn projected_field_is_orthogonal_to_length_gradient(seed in 0u64..1000) {
        let c = curve(seed, 16, 0.1);
        let pg = projected_gradient(&c, &EnergyParams::new(2.5, 2.0).unwrap()).unwrap();
        let gl = length_gradient(&c);
        let cos = pg.field.pairing(&gl) / (pg.field.pairing(&pg.field).sqrt() * gl.pairing(&gl).sqrt());
        prop_assert!(cos.abs() < 1e-10);
    }

    #[test]
    fn subcritical_exponents_in_range(pq in subcritical()) {
        let class = pq.classify();
        prop_assert!(class.is_subcritical());
        prop_assert!(pq.alpha() > 0.0 && pq.alpha() < 1.0 - 1.0 / pq.q() + 1e-12);
        prop_assert!(pq.s() > 0.0);
    }

    #[test]
    fn classify_is_total(p in 0.01f64..6.0, q in 0.01f64..6.0) {
        prop_assert!(classify(p, q).is_ok());
    }

    #[test]
    fn resampling_preserves_length_and_equalizes(seed in 0u64..1000, m in 12usize..40) {
        let c = curve(seed, 30, 0.2);
        let r = resample_arclength(&c, m).unwrap();
        prop_assert_eq!(r.len(), m);
        prop_assert!(r.is_arclength());
        prop_assert!((r.length() - c.length()).abs() < 1e-12);
    }

    #[test]
    fn io_roundtrips_exactly(seed in 0u64..1000, n in 3usize..40) {
        let c = curve(seed, n.max(8), 0.1);
        prop_assert_eq!(&curve_from_json(&curve_to_json(&c)).unwrap(), &c);
        let back = curve_from_csv(&curve_to_csv(&c)).unwrap();
        prop_assert_eq!(back.vertices(), c.vertices());
    }

    #[test]
    fn periodic_offset_is_centered(x in -50.0f64..50.0) {
        let o = PeriodicOffset::new(x).value();
        prop_assert!(o > -0.5 && o <= 0.5);
        prop_assert!(((x - o) - (x - o).round()).abs() < 1e-9);
    }

    #[test]
    fn seminorms_invariant_under_index_shift(seed in 0u64..1000, shift in 0usize..64) {
        let c = curve(seed, 64, 0.1);
        let d = c.shifted(shift).unwrap();
        let s1 = SeminormSpec::new(0.5, 2.0, SeminormVariant::FirstDifference).unwrap();
        let s2 = SeminormSpec::new(0.5, 2.0, SeminormVariant::SecondDifference).unwrap();
        prop_assert!((seminorm_first(&c, &s1).unwrap() / seminorm_first(&d, &s1).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((seminorm_second(&c, &s2).unwrap() / seminorm_second(&d, &s2).unwrap() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn quadratic_form_is_nonnegative(seed in 0u64..1000, p in 2.35f64..2.65) {
        let f: Vec<Point> = curve(seed, 32, 0.3).vertices().to_vec();
        prop_assert!(q_form_direct(&f, &f, p).unwrap() >= 0.0);
    }

    #[test]
    fn symbol_is_positive(k in 1u32..12, p in 2.35f64..2.65) {
        prop_assert!(rho_k(p, k).unwrap() > 0.0);
    }
}
