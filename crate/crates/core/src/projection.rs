//! Lon/lat conventions and closed-form planar projections on the unit sphere.
//!
//! All plane coordinates are in sphere radii (the sphere radius is fixed at 1), so the
//! Tissot scale factors derived from these maps are dimensionless.
//!
//! Longitudes are normalized to the half-open interval `[-pi, pi)`.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};

use crate::math::Vec3;
use crate::{Error, Result};

/// Tolerance on `|v| - 1` accepted by [`xyz_to_lonlat`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Default Mercator latitude clamp, 85 degrees.
pub const DEFAULT_LAT_CLAMP: f64 = 85.0 * PI / 180.0;

/// A point on the sphere in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LonLat {
    pub lon: f64,
    pub lat: f64,
}

impl LonLat {
    /// Builds a point, wrapping `lon` into `[-pi, pi)`. `lat` is taken as-is.
    pub fn new(lon: f64, lat: f64) -> Self {
        LonLat {
            lon: normalize_lon(lon),
            lat,
        }
    }

    pub fn from_degrees(lon_deg: f64, lat_deg: f64) -> Self {
        LonLat::new(lon_deg.to_radians(), lat_deg.to_radians())
    }

    pub fn is_valid(&self) -> bool {
        self.lon.is_finite()
            && self.lat.is_finite()
            && (-PI..PI).contains(&self.lon)
            && (-FRAC_PI_2..=FRAC_PI_2).contains(&self.lat)
    }

    pub fn to_xyz(self) -> Vec3 {
        lonlat_to_xyz(self)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_lon(lon: f64) -> f64 {
    if (-PI..PI).contains(&lon) {
        return lon;
    }
    let mut r = libm::fmod(lon + PI, TAU);
    if r < 0.0 {
        r += TAU;
    }
    let wrapped = r - PI;
    if wrapped >= PI {
        -PI
    } else {
        wrapped
    }
}

/// Signed longitude difference `a - b` wrapped into `[-pi, pi)`.
pub fn lon_difference(a: f64, b: f64) -> f64 {
    normalize_lon(a - b)
}

pub fn lonlat_to_xyz(p: LonLat) -> Vec3 {
    let (slat, clat) = libm::sincos(p.lat);
    let (slon, clon) = libm::sincos(p.lon);
    Vec3::new(clat * clon, clat * slon, slat)
}

/// Inverse of [`lonlat_to_xyz`]; returns `lon = 0` at the poles.
pub fn xyz_to_lonlat(v: Vec3) -> Result<LonLat> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitVector { norm });
    }
    let r = libm::hypot(v.x, v.y);
    let lat = libm::atan2(v.z, r);
    let lon = if r == 0.0 {
        0.0
    } else {
        normalize_lon(libm::atan2(v.y, v.x))
    };
    Ok(LonLat { lon, lat })
}

/// Local east and north unit vectors at `p`.
///
/// At the poles the frame is the limit reached along the `lon = 0` meridian, which is
/// what the lon/lat formulas give when evaluated with `lon = 0`.
pub fn tangent_frame(p: Vec3) -> (Vec3, Vec3) {
    let r = libm::hypot(p.x, p.y);
    if r == 0.0 {
        let slat = if p.z >= 0.0 { 1.0 } else { -1.0 };
        return (Vec3::new(0.0, 1.0, 0.0), Vec3::new(-slat, 0.0, 0.0));
    }
    let (clon, slon) = (p.x / r, p.y / r);
    let east = Vec3::new(-slon, clon, 0.0);
    let north = Vec3::new(-p.z * clon, -p.z * slon, r);
    (east, north.normalized())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    Equirectangular,
    Mercator,
    GallPeters,
    Gnomonic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionSpec {
    pub kind: ProjectionKind,
    /// Tangent point, only used by [`ProjectionKind::Gnomonic`].
    pub center: LonLat,
    /// Maximum `|lat|` accepted by [`ProjectionKind::Mercator`].
    pub lat_clamp: f64,
}

impl ProjectionSpec {
    pub fn new(kind: ProjectionKind) -> Self {
        ProjectionSpec {
            kind,
            center: LonLat::default(),
            lat_clamp: DEFAULT_LAT_CLAMP,
        }
    }

    pub fn equirectangular() -> Self {
        Self::new(ProjectionKind::Equirectangular)
    }

    pub fn mercator() -> Self {
        Self::new(ProjectionKind::Mercator)
    }

    pub fn gall_peters() -> Self {
        Self::new(ProjectionKind::GallPeters)
    }

    pub fn gnomonic(center: LonLat) -> Self {
        ProjectionSpec {
            center,
            ..Self::new(ProjectionKind::Gnomonic)
        }
    }

    pub fn with_lat_clamp(mut self, lat_clamp: f64) -> Self {
        self.lat_clamp = lat_clamp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lat_clamp > 0.0 && self.lat_clamp < FRAC_PI_2) {
            return Err(Error::Domain("lat_clamp must lie in (0, pi/2)"));
        }
        if self.kind == ProjectionKind::Gnomonic && !self.center.is_valid() {
            return Err(Error::Domain("gnomonic center is not a valid lon/lat"));
        }
        Ok(())
    }
}

/// Cosine of the angular distance between `p` and the gnomonic center.
pub(crate) fn gnomonic_cos_c(center: LonLat, p: LonLat) -> f64 {
    let (s0, c0) = libm::sincos(center.lat);
    let (s, c) = libm::sincos(p.lat);
    s0 * s + c0 * c * libm::cos(p.lon - center.lon)
}

fn mercator_y(lat: f64) -> f64 {
    libm::log(libm::tan(FRAC_PI_4 + lat / 2.0))
}

pub(crate) fn check_domain(spec: &ProjectionSpec, p: LonLat) -> Result<()> {
    spec.validate()?;
    if !(p.lon.is_finite() && p.lat.is_finite()) || p.lat.abs() > FRAC_PI_2 {
        return Err(Error::Domain("latitude outside [-pi/2, pi/2]"));
    }
    match spec.kind {
        ProjectionKind::Mercator if p.lat.abs() > spec.lat_clamp => Err(Error::BeyondLatClamp {
            lat: p.lat,
            clamp: spec.lat_clamp,
        }),
        ProjectionKind::Gnomonic if gnomonic_cos_c(spec.center, p) <= f64::EPSILON => {
            Err(Error::OutOfHemisphere)
        }
        _ => Ok(()),
    }
}

/// Forward projection of `p` to plane coordinates `(x, y)`.
pub fn project(spec: &ProjectionSpec, p: LonLat) -> Result<[f64; 2]> {
    check_domain(spec, p)?;
    Ok(match spec.kind {
        ProjectionKind::Equirectangular => [p.lon, p.lat],
        ProjectionKind::Mercator => [p.lon, mercator_y(p.lat)],
        ProjectionKind::GallPeters => [p.lon / SQRT_2, SQRT_2 * libm::sin(p.lat)],
        ProjectionKind::Gnomonic => {
            let c0 = spec.center;
            let cos_c = gnomonic_cos_c(c0, p);
            let (s0, k0) = libm::sincos(c0.lat);
            let (s, k) = libm::sincos(p.lat);
            let (sd, cd) = libm::sincos(p.lon - c0.lon);
            [k * sd / cos_c, (k0 * s - s0 * k * cd) / cos_c]
        }
    })
}

/// Inverse projection of plane point `q`.
pub fn unproject(spec: &ProjectionSpec, q: [f64; 2]) -> Result<LonLat> {
    spec.validate()?;
    let [x, y] = q;
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::Domain("plane point is not finite"));
    }
    match spec.kind {
        ProjectionKind::Equirectangular => {
            if x.abs() > PI || y.abs() > FRAC_PI_2 {
                return Err(Error::Domain("point outside the equirectangular image"));
            }
            Ok(LonLat::new(x, y))
        }
        ProjectionKind::Mercator => {
            if x.abs() > PI || y.abs() > mercator_y(spec.lat_clamp) {
                return Err(Error::Domain("point outside the clamped Mercator image"));
            }
            let lat = 2.0 * libm::atan(libm::exp(y)) - FRAC_PI_2;
            Ok(LonLat::new(x, lat))
        }
        ProjectionKind::GallPeters => {
            if x.abs() > PI / SQRT_2 || y.abs() > SQRT_2 {
                return Err(Error::Domain("point outside the Gall-Peters image"));
            }
            let s = (y / SQRT_2).clamp(-1.0, 1.0);
            Ok(LonLat::new(x * SQRT_2, libm::asin(s)))
        }
        ProjectionKind::Gnomonic => {
            let c0 = spec.center;
            let rho = libm::hypot(x, y);
            if rho == 0.0 {
                return Ok(c0);
            }
            let nu = libm::atan(rho);
            let (sn, cn) = libm::sincos(nu);
            let (s0, k0) = libm::sincos(c0.lat);
            let sin_lat = (cn * s0 + y * sn * k0 / rho).clamp(-1.0, 1.0);
            let lat = libm::asin(sin_lat);
            let lon = c0.lon + libm::atan2(x * sn, rho * k0 * cn - y * s0 * sn);
            Ok(LonLat::new(lon, lat))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lonlat_to_xyz_axes() {
        let v = lonlat_to_xyz(LonLat::new(0.0, 0.0));
        assert_eq!(v, Vec3::new(1.0, 0.0, 0.0));
        let v = lonlat_to_xyz(LonLat::new(0.0, FRAC_PI_2));
        assert!(close(v.x, 0.0, 1e-16) && close(v.z, 1.0, 0.0));
        let v = lonlat_to_xyz(LonLat::new(FRAC_PI_2, 0.0));
        assert!(close(v.x, 0.0, 1e-16) && v.y == 1.0);
    }

    #[test]
    fn xyz_to_lonlat_conventions() {
        let p = xyz_to_lonlat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(
            p,
            LonLat {
                lon: 0.0,
                lat: FRAC_PI_2
            }
        );
        let p = xyz_to_lonlat(Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        assert_eq!(p, LonLat { lon: -PI, lat: 0.0 });
        let p = xyz_to_lonlat(Vec3::new(0.0, 0.0, -1.0)).unwrap();
        assert_eq!(p.lon, 0.0);
        assert!(matches!(
            xyz_to_lonlat(Vec3::new(2.0, 0.0, 0.0)),
            Err(Error::NonUnitVector { .. })
        ));
    }

    #[test]
    fn lon_normalization_is_half_open() {
        assert_eq!(normalize_lon(PI), -PI);
        assert_eq!(normalize_lon(-PI), -PI);
        assert!(close(normalize_lon(3.0 * PI + 0.5), -PI + 0.5, 1e-12));
        assert!(close(normalize_lon(-0.5 - TAU), -0.5, 1e-12));
    }

    #[test]
    fn closed_form_values() {
        let eq = ProjectionSpec::equirectangular();
        assert_eq!(project(&eq, LonLat::new(1.0, 0.5)).unwrap(), [1.0, 0.5]);

        let g = ProjectionSpec::gnomonic(LonLat::new(0.0, 0.0));
        assert_eq!(project(&g, LonLat::new(0.0, 0.0)).unwrap(), [0.0, 0.0]);
        assert_eq!(unproject(&g, [0.0, 0.0]).unwrap(), LonLat::new(0.0, 0.0));

        // ln tan(75 deg) = ln(2 + sqrt 3)
        let m = project(&ProjectionSpec::mercator(), LonLat::new(0.0, PI / 3.0)).unwrap();
        assert!(close(m[1], 1.316_957_896_924_816_7, 1e-14));

        let gp = unproject(&ProjectionSpec::gall_peters(), [0.0, SQRT_2]).unwrap();
        assert!(close(gp.lat, FRAC_PI_2, 1e-15));
    }

    #[test]
    fn domain_errors() {
        let g = ProjectionSpec::gnomonic(LonLat::new(0.0, 0.0));
        assert_eq!(
            project(&g, LonLat::new(FRAC_PI_2, 0.0)),
            Err(Error::OutOfHemisphere)
        );
        assert_eq!(
            project(&g, LonLat::new(-PI, 0.0)),
            Err(Error::OutOfHemisphere)
        );
        let m = ProjectionSpec::mercator();
        assert!(matches!(
            project(&m, LonLat::new(0.0, 86f64.to_radians())),
            Err(Error::BeyondLatClamp { .. })
        ));
        assert!(unproject(&m, [0.0, 10.0]).is_err());
        assert!(unproject(&ProjectionSpec::equirectangular(), [4.0, 0.0]).is_err());
        assert!(ProjectionSpec::mercator()
            .with_lat_clamp(2.0)
            .validate()
            .is_err());
    }

    #[test]
    fn tangent_frame_is_orthonormal_and_north_up() {
        let p = lonlat_to_xyz(LonLat::new(0.3, 0.7));
        let (e, n) = tangent_frame(p);
        assert!(close(e.norm(), 1.0, 1e-15) && close(n.norm(), 1.0, 1e-15));
        assert!(close(e.dot(n), 0.0, 1e-15) && close(e.dot(p), 0.0, 1e-15));
        assert!(n.z > 0.0);
        // right-handed: east x north = outward normal
        assert!(close(e.cross(n).dot(p), 1.0, 1e-14));

        let (e, n) = tangent_frame(Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(e, Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(n, Vec3::new(-1.0, 0.0, 0.0));
    }
}
