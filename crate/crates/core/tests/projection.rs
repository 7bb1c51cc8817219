mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use geosphere_core::projection::{
    lon_difference, lonlat_to_xyz, project, unproject, xyz_to_lonlat, LonLat, ProjectionSpec,
};
use proptest::prelude::*;
use rand::Rng;

fn angle_close(a: LonLat, b: LonLat, tol: f64) -> bool {
    // longitude is irrelevant at the poles
    let dlon = if a.lat.abs() > FRAC_PI_2 - 1e-9 {
        0.0
    } else {
        lon_difference(a.lon, b.lon).abs()
    };
    dlon <= tol && (a.lat - b.lat).abs() <= tol
}

#[test]
fn xyz_round_trip_10k() {
    let mut rng = common::rng(1);
    for _ in 0..10_000 {
        let p = LonLat::new(
            rng.gen_range(-PI..PI),
            rng.gen_range(-FRAC_PI_2..=FRAC_PI_2),
        );
        let q = xyz_to_lonlat(lonlat_to_xyz(p)).unwrap();
        assert!(angle_close(p, q, 1e-12), "{p:?} -> {q:?}");
    }
}

fn random_valid(rng: &mut impl Rng, spec: &ProjectionSpec) -> LonLat {
    loop {
        let p = LonLat::new(rng.gen_range(-PI..PI), rng.gen_range(-1.55..1.55));
        if project(spec, p).is_ok() {
            return p;
        }
    }
}

#[test]
fn project_unproject_round_trips() {
    let specs = [
        ProjectionSpec::equirectangular(),
        ProjectionSpec::mercator(),
        ProjectionSpec::gall_peters(),
        ProjectionSpec::gnomonic(LonLat::new(0.0, 0.0)),
        ProjectionSpec::gnomonic(LonLat::new(2.0, 1.0)),
        ProjectionSpec::gnomonic(LonLat::new(-1.0, -FRAC_PI_2)),
    ];
    let mut rng = common::rng(2);
    for spec in &specs {
        let mut n = 0;
        while n < 1_000 {
            let p = random_valid(&mut rng, spec);
            let xy = project(spec, p).unwrap();
            // keep gnomonic away from the horizon where x, y blow up
            if xy[0].hypot(xy[1]) > 50.0 {
                continue;
            }
            let q = unproject(spec, xy).unwrap();
            assert!(angle_close(p, q, 1e-10), "{spec:?}: {p:?} -> {q:?}");
            let xy2 = project(spec, q).unwrap();
            let scale = 1.0 + xy[0].abs().max(xy[1].abs());
            assert!((xy[0] - xy2[0]).abs() < 1e-10 * scale);
            assert!((xy[1] - xy2[1]).abs() < 1e-10 * scale);
            n += 1;
        }
    }
}

#[test]
fn equirectangular_is_identity_in_radians() {
    let spec = ProjectionSpec::equirectangular();
    let mut rng = common::rng(3);
    for _ in 0..1000 {
        let p = LonLat::new(
            rng.gen_range(-PI..PI),
            rng.gen_range(-FRAC_PI_2..=FRAC_PI_2),
        );
        assert_eq!(project(&spec, p).unwrap(), [p.lon, p.lat]);
    }
}

#[test]
fn gnomonic_maps_great_circles_through_center_to_lines() {
    let mut rng = common::rng(4);
    for _ in 0..50 {
        let center = LonLat::new(rng.gen_range(-PI..PI), rng.gen_range(-1.4..1.4));
        let spec = ProjectionSpec::gnomonic(center);
        let c = lonlat_to_xyz(center);
        let d = common::random_unit(&mut rng);
        let dir = (d - c * c.dot(d)).normalized();
        let points: Vec<[f64; 2]> = (1..20)
            .map(|i| {
                let t = -1.4 + 0.14 * i as f64;
                let p = c * t.cos() + dir * t.sin();
                project(&spec, xyz_to_lonlat(p).unwrap()).unwrap()
            })
            .collect();
        // collinear with the origin: cross product of unit directions vanishes
        let r = points[0];
        let rn = r[0].hypot(r[1]);
        for q in &points {
            let qn = q[0].hypot(q[1]);
            if qn < 1e-12 {
                continue;
            }
            let cross = (r[0] * q[1] - r[1] * q[0]) / (rn * qn);
            assert!(cross.abs() < 1e-9, "cross {cross}");
        }
    }
}

proptest! {
    #[test]
    fn lon_is_normalized(lon in -100.0f64..100.0, lat in -1.5f64..1.5) {
        let p = LonLat::new(lon, lat);
        prop_assert!(p.is_valid());
        prop_assert!(lon_difference(p.lon, lon).abs() < 1e-9);
    }

    #[test]
    fn mercator_round_trip(lon in -3.1f64..3.1, lat in -1.48f64..1.48) {
        let spec = ProjectionSpec::mercator();
        let p = LonLat::new(lon, lat);
        let q = unproject(&spec, project(&spec, p).unwrap()).unwrap();
        prop_assert!(angle_close(p, q, 1e-10));
    }
}
