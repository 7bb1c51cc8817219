//! Tissot indicatrix analysis.
//!
//! Scale factors come from the map Jacobian: `h` is the scale along the meridian, `k`
//! along the parallel, `theta_prime` the angle between their images. The indicatrix axes
//! follow from
//!
//! ```text
//! (a + b)^2 = h^2 + k^2 + 2 h k sin(theta')
//! (a - b)^2 = h^2 + k^2 - 2 h k sin(theta')
//! ```
//!
//! With the columns `u = dP/dlat`, `v = dP/dlon / cos(lat)` of the scaled Jacobian,
//! `h k sin(theta') = |det(u, v)|`, so the second relation is evaluated as a sum of
//! squares. That keeps `a - b` exactly zero for conformal maps instead of amplifying
//! rounding through a square root of a cancelled difference.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::geodesic::Icosphere;
use crate::math::Vec3;
use crate::projection::{check_domain, tangent_frame, xyz_to_lonlat, LonLat};
use crate::projection::{ProjectionKind, ProjectionSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TissotSample {
    pub at: LonLat,
    /// Scale factor along the meridian.
    pub h: f64,
    /// Scale factor along the parallel.
    pub k: f64,
    /// Angle between the projected meridian and parallel, in `[0, pi]`.
    pub theta_prime: f64,
    pub a: f64,
    pub b: f64,
    pub area_scale: f64,
    /// Maximum angular deformation.
    pub omega: f64,
}

impl TissotSample {
    /// Builds a sample from the two columns of the scaled Jacobian: the image of a unit
    /// step north (`meridian`) and of a unit step east (`parallel`).
    pub fn from_jacobian(at: LonLat, meridian: [f64; 2], parallel: [f64; 2]) -> Self {
        let [p, r] = meridian;
        let [q, s] = parallel;
        let h = libm::hypot(p, r);
        let k = libm::hypot(q, s);
        let det = p * s - q * r;
        let dot = p * q + r * s;
        let theta_prime = libm::atan2(det.abs(), dot);
        let sum = libm::sqrt(h * h + k * k + 2.0 * det.abs());
        let diff = if det >= 0.0 {
            libm::hypot(p - s, q + r)
        } else {
            libm::hypot(p + s, q - r)
        };
        let a = 0.5 * (sum + diff);
        let b = 0.5 * (sum - diff);
        let omega = 2.0 * libm::asin((diff / sum).min(1.0));
        TissotSample {
            at,
            h,
            k,
            theta_prime,
            a,
            b,
            area_scale: a * b,
            omega,
        }
    }

    /// Ratio of the indicatrix axes; 1 for a circle.
    pub fn aspect(&self) -> f64 {
        self.a / self.b
    }
}

/// Analytic partial derivatives of the forward projection at `p`:
/// `(d(x,y)/dlat, d(x,y)/dlon)`.
pub fn partials(spec: &ProjectionSpec, p: LonLat) -> Result<([f64; 2], [f64; 2])> {
    check_domain(spec, p)?;
    let (s, c) = libm::sincos(p.lat);
    Ok(match spec.kind {
        ProjectionKind::Equirectangular => ([0.0, 1.0], [1.0, 0.0]),
        ProjectionKind::Mercator => ([0.0, 1.0 / c], [1.0, 0.0]),
        ProjectionKind::GallPeters => (
            [0.0, core::f64::consts::SQRT_2 * c],
            [core::f64::consts::FRAC_1_SQRT_2, 0.0],
        ),
        ProjectionKind::Gnomonic => {
            let (s0, c0) = libm::sincos(spec.center.lat);
            let (sd, cd) = libm::sincos(p.lon - spec.center.lon);
            let den = s0 * s + c0 * c * cd;
            let nx = c * sd;
            let ny = c0 * s - s0 * c * cd;
            let (den_lat, den_lon) = (s0 * c - c0 * s * cd, -c0 * c * sd);
            let (nx_lat, nx_lon) = (-s * sd, c * cd);
            let (ny_lat, ny_lon) = (c0 * c + s0 * s * cd, s0 * c * sd);
            let d2 = den * den;
            (
                [
                    (nx_lat * den - nx * den_lat) / d2,
                    (ny_lat * den - ny * den_lat) / d2,
                ],
                [
                    (nx_lon * den - nx * den_lon) / d2,
                    (ny_lon * den - ny * den_lon) / d2,
                ],
            )
        }
    })
}

/// Tissot indicatrix of `spec` at `p`.
pub fn tissot_at(spec: &ProjectionSpec, p: LonLat) -> Result<TissotSample> {
    if p.lat.abs() >= FRAC_PI_2 {
        return Err(Error::AtPole);
    }
    let (d_lat, d_lon) = partials(spec, p)?;
    let c = libm::cos(p.lat);
    Ok(TissotSample::from_jacobian(
        p,
        d_lat,
        [d_lon[0] / c, d_lon[1] / c],
    ))
}

/// A grid point dropped from a [`TissotGrid`] and why.
#[derive(Clone, Debug, PartialEq)]
pub struct Skipped {
    pub at: LonLat,
    pub reason: Error,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TissotGrid {
    pub samples: Vec<TissotSample>,
    pub skipped: Vec<Skipped>,
}

/// Grid cell centers: `lon_j = -pi + (j + 1/2) 2pi / lon_steps`,
/// `lat_i = -pi/2 + (i + 1/2) pi / lat_steps`, row-major by latitude then longitude.
pub fn grid_points(lon_steps: usize, lat_steps: usize) -> impl Iterator<Item = LonLat> {
    (0..lat_steps).flat_map(move |i| {
        let lat = -FRAC_PI_2 + (i as f64 + 0.5) * PI / lat_steps as f64;
        (0..lon_steps).map(move |j| {
            let lon = -PI + (j as f64 + 0.5) * 2.0 * PI / lon_steps as f64;
            LonLat::new(lon, lat)
        })
    })
}

/// Evaluates [`tissot_at`] over a regular lon/lat grid, recording out-of-domain points.
pub fn tissot_grid(spec: &ProjectionSpec, lon_steps: usize, lat_steps: usize) -> TissotGrid {
    let mut grid = TissotGrid::default();
    for p in grid_points(lon_steps, lat_steps) {
        match tissot_at(spec, p) {
            Ok(s) => grid.samples.push(s),
            Err(reason) => grid.skipped.push(Skipped { at: p, reason }),
        }
    }
    grid
}

/// Barycentric sample positions used per face, strictly inside the triangle.
///
/// The first sample is always the centroid; further samples are interior points of the
/// barycentric lattice `(i, j, l) / r`, `i, j, l >= 1`, in lexicographic order, with the
/// smallest `r` that provides enough points.
pub fn face_sample_points(samples_per_face: usize) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(samples_per_face);
    if samples_per_face == 0 {
        return pts;
    }
    pts.push([1.0 / 3.0; 3]);
    let extra = samples_per_face - 1;
    if extra == 0 {
        return pts;
    }
    let mut r = 4usize;
    loop {
        let interior = (r - 1) * (r - 2) / 2 - usize::from(r.is_multiple_of(3));
        if interior >= extra {
            break;
        }
        r += 1;
    }
    'outer: for i in 1..r {
        for j in 1..r - i {
            let l = r - i - j;
            if i == j && j == l {
                continue;
            }
            let rf = r as f64;
            pts.push([i as f64 / rf, j as f64 / rf, l as f64 / rf]);
            if pts.len() == samples_per_face {
                break 'outer;
            }
        }
    }
    pts
}

/// Scale of the radial map onto an order-0 face at its centroid (the inradius of the
/// unit-circumradius icosahedron). Icosphere indicatrices are expressed in this unit.
pub fn icosphere_unit_scale() -> f64 {
    let base = Icosphere::new(0).expect("order 0 always fits");
    let [a, b, c] = base.face_vertices(0);
    let n = (b - a).cross(c - a).normalized();
    n.dot(a)
}

/// Indicatrix of the radial (central) map from the sphere onto the plane of `face`,
/// evaluated at the sphere point above barycentric position `bary`.
pub fn tissot_face_point(
    sphere: &Icosphere,
    face: usize,
    bary: [f64; 3],
    unit_scale: f64,
) -> TissotSample {
    let [a, b, c] = sphere.face_vertices(face);
    let p = (a * bary[0] + b * bary[1] + c * bary[2]).normalized();
    let normal = (b - a).cross(c - a).normalized();
    let dist = normal.dot(a);
    let np = normal.dot(p);
    let u1 = (b - a).normalized();
    let u2 = normal.cross(u1);
    let (east, north) = tangent_frame(p);
    // d/dt [dist * (p + t w) / (n . (p + t w))] at t = 0
    let image = |w: Vec3| -> [f64; 2] {
        let d = (w - p * (normal.dot(w) / np)) * (dist / (np * unit_scale));
        [d.dot(u1), d.dot(u2)]
    };
    let at = xyz_to_lonlat(p).unwrap_or_default();
    TissotSample::from_jacobian(at, image(north), image(east))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionSummary {
    pub count: usize,
    pub min_aspect: f64,
    pub max_aspect: f64,
    pub mean_aspect: f64,
    pub min_area_scale: f64,
    pub max_area_scale: f64,
    pub mean_area_scale: f64,
}

impl DistortionSummary {
    /// `max_area_scale / min_area_scale`.
    pub fn area_ratio(&self) -> f64 {
        self.max_area_scale / self.min_area_scale
    }

    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a TissotSample>) -> Self {
        let mut acc = SummaryAccumulator::default();
        for s in samples {
            acc.push(s);
        }
        acc.finish()
    }
}

/// Running min/max/sum of indicatrix aspect and area scale. Merging accumulators in a
/// fixed order gives deterministic results.
#[derive(Clone, Copy, Debug)]
pub struct SummaryAccumulator {
    count: usize,
    min_aspect: f64,
    max_aspect: f64,
    sum_aspect: f64,
    min_area: f64,
    max_area: f64,
    sum_area: f64,
}

impl Default for SummaryAccumulator {
    fn default() -> Self {
        SummaryAccumulator {
            count: 0,
            min_aspect: f64::INFINITY,
            max_aspect: f64::NEG_INFINITY,
            sum_aspect: 0.0,
            min_area: f64::INFINITY,
            max_area: f64::NEG_INFINITY,
            sum_area: 0.0,
        }
    }
}

impl SummaryAccumulator {
    pub fn push(&mut self, s: &TissotSample) {
        let aspect = s.aspect();
        self.count += 1;
        self.min_aspect = self.min_aspect.min(aspect);
        self.max_aspect = self.max_aspect.max(aspect);
        self.sum_aspect += aspect;
        self.min_area = self.min_area.min(s.area_scale);
        self.max_area = self.max_area.max(s.area_scale);
        self.sum_area += s.area_scale;
    }

    pub fn merge(&mut self, o: &SummaryAccumulator) {
        self.count += o.count;
        self.min_aspect = self.min_aspect.min(o.min_aspect);
        self.max_aspect = self.max_aspect.max(o.max_aspect);
        self.sum_aspect += o.sum_aspect;
        self.min_area = self.min_area.min(o.min_area);
        self.max_area = self.max_area.max(o.max_area);
        self.sum_area += o.sum_area;
    }

    pub fn finish(&self) -> DistortionSummary {
        let n = self.count.max(1) as f64;
        DistortionSummary {
            count: self.count,
            min_aspect: self.min_aspect,
            max_aspect: self.max_aspect,
            mean_aspect: self.sum_aspect / n,
            min_area_scale: self.min_area,
            max_area_scale: self.max_area,
            mean_area_scale: self.sum_area / n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcosphereDistortion {
    /// Face-major, then in [`face_sample_points`] order.
    pub samples: Vec<TissotSample>,
    pub summary: DistortionSummary,
}

/// Per-face radial-map indicatrices over the whole icosphere.
pub fn tissot_icosphere(sphere: &Icosphere, samples_per_face: usize) -> IcosphereDistortion {
    let points = face_sample_points(samples_per_face.max(1));
    let unit = icosphere_unit_scale();
    let mut samples = Vec::with_capacity(sphere.num_faces() * points.len());
    for f in 0..sphere.num_faces() {
        for &bary in &points {
            samples.push(tissot_face_point(sphere, f, bary, unit));
        }
    }
    let summary = DistortionSummary::from_samples(&samples);
    IcosphereDistortion { samples, summary }
}

/// Summary over faces `faces` without retaining the samples.
pub fn icosphere_summary_range(
    sphere: &Icosphere,
    samples_per_face: usize,
    faces: core::ops::Range<usize>,
) -> SummaryAccumulator {
    let points = face_sample_points(samples_per_face.max(1));
    let unit = icosphere_unit_scale();
    let mut acc = SummaryAccumulator::default();
    for f in faces {
        for &bary in &points {
            acc.push(&tissot_face_point(sphere, f, bary, unit));
        }
    }
    acc
}

pub fn icosphere_summary(sphere: &Icosphere, samples_per_face: usize) -> DistortionSummary {
    icosphere_summary_range(sphere, samples_per_face, 0..sphere.num_faces()).finish()
}
