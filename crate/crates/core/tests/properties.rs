use detcouple::coupling::{build_euclidean, build_hyperbolic, build_sphere, hyperbolic_eta};
use detcouple::engine::place_at_distance;
use detcouple::model_space::{distance_unchecked, geodesic_distance, sphere_distance_arccos, Point, SpaceSpec};
use detcouple::noise::NoiseStream;
use detcouple::profiles::{admissible_bounds, check_admissibility_default, envelope, DistanceProfile, ProfileKind};
use nalgebra::DVector;
use proptest::prelude::*;

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n)
}

fn sphere_point(n: usize) -> impl Strategy<Value = Point> {
    vec_of(n + 1)
        .prop_filter("non-zero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-3)
        .prop_map(|v| Point(DVector::from_vec(v).normalize()))
}

fn half_space_point(n: usize) -> impl Strategy<Value = Point> {
    (vec_of(n), -2.0f64..2.0).prop_map(|(mut v, l)| {
        v[0] = l.exp();
        Point::from(v)
    })
}

proptest! {
    #[test]
    fn sphere_distance_is_a_metric(x in sphere_point(3), y in sphere_point(3), z in sphere_point(3)) {
        let s = SpaceSpec::unit_sphere(3).unwrap();
        let dxy = geodesic_distance(&s, &x, &y).unwrap();
        prop_assert_eq!(dxy, geodesic_distance(&s, &y, &x).unwrap());
        prop_assert!(dxy <= std::f64::consts::PI + 1e-15);
        let via = distance_unchecked(&s, &x, &z) + distance_unchecked(&s, &z, &y);
        prop_assert!(dxy <= via + 1e-12);
        prop_assert!((dxy - sphere_distance_arccos(&s, &x, &y).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn half_space_distance_is_a_metric(x in half_space_point(3), y in half_space_point(3), z in half_space_point(3)) {
        let h = SpaceSpec::unit_hyperbolic(3).unwrap();
        let dxy = geodesic_distance(&h, &x, &y).unwrap();
        prop_assert!((dxy - geodesic_distance(&h, &y, &x).unwrap()).abs() <= 1e-15 * dxy.max(1.0));
        let via = distance_unchecked(&h, &x, &z) + distance_unchecked(&h, &z, &y);
        prop_assert!(dxy <= via * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn distances_scale_with_radius(x in sphere_point(2), y in sphere_point(2), k in 0.05f64..20.0) {
        let r = 1.0 / k.sqrt();
        let unit = SpaceSpec::unit_sphere(2).unwrap();
        let s = SpaceSpec::sphere(2, k).unwrap();
        let xs = Point(&x.0 * r);
        let ys = Point(&y.0 * r);
        let d = geodesic_distance(&s, &xs, &ys).unwrap();
        prop_assert!((d - r * distance_unchecked(&unit, &x, &y)).abs() < 1e-12 * r.max(1.0));

        let hu = SpaceSpec::unit_hyperbolic(2).unwrap();
        let h = SpaceSpec::hyperbolic(2, -k).unwrap();
        let (a, b) = (Point::from_slice(&[1.0, 0.0]), Point::from_slice(&[2.0, 1.0]));
        prop_assert!((distance_unchecked(&h, &a, &b) - r * distance_unchecked(&hu, &a, &b)).abs() < 1e-12 * r.max(1.0));
    }

    #[test]
    fn euclidean_driving_matrices_are_orthogonal_splits(z in vec_of(4), u in 0.0f64..=1.0) {
        let z = DVector::from_vec(z);
        prop_assume!(z.norm() > 1e-3);
        let rho = z.norm();
        let c = build_euclidean(4, &z, rho, u * 6.0 / rho).unwrap();
        prop_assert!(c.identity_residual() < 1e-12);
        prop_assert!(c.j_operator_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn sphere_driving_matrices_are_orthogonal_splits(x in sphere_point(4), y in sphere_point(4), u in 0.0f64..=1.0) {
        let eta = x.0.dot(&y.0);
        prop_assume!(eta.abs() < 0.999);
        let deta = -3.0 * (eta + 1.0) + u * 6.0;
        let c = build_sphere(&x, &y, eta, deta).unwrap();
        prop_assert!(c.identity_residual() < 1e-12);
        prop_assert!(c.j_operator_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn half_space_driving_matrices_are_orthogonal_splits(x in half_space_point(4), y in half_space_point(4), u in 0.0f64..=1.0) {
        let eta = hyperbolic_eta(&x, &y);
        prop_assume!(eta > 1e-6);
        let deta = 3.0 * eta + u * 6.0;
        let c = build_hyperbolic(&x, &y, eta, deta).unwrap();
        prop_assert!(c.identity_residual() < 1e-10);
        prop_assert!(c.j_operator_norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn sphere_extremes_are_admissible_and_bracket(rho0 in 0.05f64..3.0, n in 2usize..5, t in 0.0f64..3.0) {
        let s = SpaceSpec::unit_sphere(n).unwrap();
        for kind in [ProfileKind::SphereContracting, ProfileKind::SphereRepulsive, ProfileKind::Constant] {
            let p = match kind {
                ProfileKind::Constant => DistanceProfile::constant(rho0).unwrap(),
                k => DistanceProfile::builtin(k, &s, rho0).unwrap(),
            };
            let rep = check_admissibility_default(&s, &p, 3.0).unwrap();
            prop_assert!(rep.admissible, "{:?}", kind);
            let (lo, hi) = envelope(&s, rho0, t).unwrap();
            let rho = p.eval(t).unwrap().0;
            prop_assert!(lo - 1e-12 <= rho && rho <= hi + 1e-12);
        }
    }

    #[test]
    fn half_space_extremes_saturate_the_band(rho0 in 0.05f64..5.0, n in 2usize..5, t in 0.0f64..10.0) {
        let h = SpaceSpec::unit_hyperbolic(n).unwrap();
        let lo = DistanceProfile::builtin(ProfileKind::HyperbolicLower, &h, rho0).unwrap();
        let hi = DistanceProfile::builtin(ProfileKind::HyperbolicUpper, &h, rho0).unwrap();
        let (rl, dl) = lo.eval(t).unwrap();
        let (rh, dh) = hi.eval(t).unwrap();
        let (bl, _) = admissible_bounds(&h, rl).unwrap();
        let (_, bh) = admissible_bounds(&h, rh).unwrap();
        prop_assert!((dl - bl).abs() < 1e-9 * bl.max(1.0));
        prop_assert!((dh - bh).abs() < 1e-9 * bh.max(1.0));
        prop_assert!(rl <= rh + 1e-12);
    }

    #[test]
    fn noise_windows_replay(seed in any::<u64>(), path in 0u64..1000, counter in 0u64..1000) {
        let mut a = NoiseStream::at(seed, path, counter);
        let mut b = NoiseStream::at(seed, path, counter);
        prop_assert_eq!(a.driving_increments(3, 0.1), b.driving_increments(3, 0.1));
    }

    #[test]
    fn geodesic_placement_is_exact(x in half_space_point(3), y in half_space_point(3), rho in 0.01f64..4.0) {
        prop_assume!(hyperbolic_eta(&x, &y) > 1e-8);
        let h = SpaceSpec::unit_hyperbolic(3).unwrap();
        let moved = place_at_distance(&h, &x, &y, rho).unwrap();
        prop_assert!((distance_unchecked(&h, &x, &moved) - rho).abs() < 1e-10 * rho.max(1.0));
        // still on the geodesic through x and y
        let (dxy, dxm, dmy) = (distance_unchecked(&h, &x, &y), rho, distance_unchecked(&h, &moved, &y));
        prop_assert!((dmy - (dxy - dxm).abs()).abs() < 1e-7 * dxy.max(1.0));
    }
}
