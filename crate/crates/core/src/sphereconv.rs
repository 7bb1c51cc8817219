//! Convolution on icosphere vertex signals.
//!
//! A planar `kh x kw` tap grid is placed on the tangent plane at every vertex and mapped
//! onto the sphere with the inverse gnomonic projection (kernel "up" follows local north).
//! Each tap is then located on the mesh and sampled by barycentric interpolation of the
//! three face corners. The located taps are precomputed once into a
//! [`SamplingOperator`], which turns convolution into gather + weighted sum:
//!
//! ```text
//! out[v, co] = sum_tap sum_ci kernel[tap, ci, co] * gather(sig, v, tap, ci)
//! ```
//!
//! Taps are ordered row-major: `m in -kh/2..=kh/2` steps along local north, then
//! `n in -kw/2..=kw/2` along local east.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::geodesic::{self, Icosphere, Location};
use crate::math::clamp_between;
use crate::projection::{lonlat_to_xyz, unproject, xyz_to_lonlat, LonLat, ProjectionSpec};
use crate::resample::SphereSignal;
use crate::{Error, Result};

/// Tap grid dimensions and angular spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelGeometry {
    pub kh: usize,
    pub kw: usize,
    /// Tangent-plane distance between adjacent taps, in sphere radii (radians at the
    /// tangent point).
    pub spacing: f64,
}

impl KernelGeometry {
    pub fn new(kh: usize, kw: usize, spacing: f64) -> Result<Self> {
        let g = KernelGeometry { kh, kw, spacing };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kh == 0 || self.kw == 0 || self.kh.is_multiple_of(2) || self.kw.is_multiple_of(2) {
            return Err(Error::Dimension("kernel dimensions must be odd and >= 1"));
        }
        if self.kh > u16::MAX as usize || self.kw > u16::MAX as usize {
            return Err(Error::Dimension("kernel dimensions must fit in 16 bits"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Domain("kernel spacing must be positive and finite"));
        }
        Ok(())
    }

    pub fn taps(&self) -> usize {
        self.kh * self.kw
    }

    fn half_extent(&self) -> usize {
        (self.kh / 2).max(self.kw / 2)
    }

    /// Grid offsets `(m, n)` in tap order.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> {
        let (hh, hw) = ((self.kh / 2) as isize, (self.kw / 2) as isize);
        (-hh..=hh).flat_map(move |m| (-hw..=hw).map(move |n| (m, n)))
    }

    /// Index of the central tap.
    pub fn center_tap(&self) -> usize {
        self.taps() / 2
    }
}

/// Tap positions of one kernel placement.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelPattern {
    pub center: LonLat,
    pub kh: usize,
    pub kw: usize,
    /// Row-major in `(m, n)`; see [`KernelGeometry::offsets`].
    pub taps: Vec<LonLat>,
}

impl KernelPattern {
    /// Tap at grid offset `(m, n)`: `m` steps along local north, `n` along local east.
    pub fn tap(&self, m: isize, n: isize) -> LonLat {
        let row = (m + (self.kh / 2) as isize) as usize;
        let col = (n + (self.kw / 2) as isize) as usize;
        self.taps[row * self.kw + col]
    }

    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> {
        let g = KernelGeometry {
            kh: self.kh,
            kw: self.kw,
            spacing: 1.0,
        };
        g.offsets()
    }
}

/// Taps placed on the tangent plane at `center` and mapped back with the inverse gnomonic
/// projection: tap `(m, n)` is `unproject((n * spacing, m * spacing))`.
pub fn gnomonic_pattern(
    center: LonLat,
    kh: usize,
    kw: usize,
    spacing: f64,
) -> Result<KernelPattern> {
    let g = KernelGeometry::new(kh, kw, spacing)?;
    if !center.is_valid() {
        return Err(Error::Domain("pattern center is not a valid lon/lat"));
    }
    if g.half_extent() as f64 * spacing >= FRAC_PI_2 {
        return Err(Error::Domain(
            "kernel extends to a hemisphere; spacing too large",
        ));
    }
    let spec = ProjectionSpec::gnomonic(center);
    let taps = g
        .offsets()
        .map(|(m, n)| {
            if m == 0 && n == 0 {
                Ok(center)
            } else {
                unproject(&spec, [n as f64 * spacing, m as f64 * spacing])
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelPattern {
        center,
        kh,
        kw,
        taps,
    })
}

/// Taps at constant latitude steps, with longitude steps stretched by `sec(lat)` of each
/// tap row so every row keeps the same arc length between taps.
pub fn equirect_pattern(
    center: LonLat,
    kh: usize,
    kw: usize,
    spacing: f64,
) -> Result<KernelPattern> {
    let g = KernelGeometry::new(kh, kw, spacing)?;
    if !center.is_valid() {
        return Err(Error::Domain("pattern center is not a valid lon/lat"));
    }
    let taps = g
        .offsets()
        .map(|(m, n)| {
            let lat = center.lat + m as f64 * spacing;
            if lat.abs() >= FRAC_PI_2 {
                return Err(Error::Domain("equirectangular tap row reaches a pole"));
            }
            if m == 0 && n == 0 {
                return Ok(center);
            }
            Ok(LonLat::new(
                center.lon + n as f64 * spacing / libm::cos(lat),
                lat,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelPattern {
        center,
        kh,
        kw,
        taps,
    })
}

/// One located kernel tap. Corner 0 carries the largest weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub face: u32,
    pub corners: [u32; 3],
    pub weights: [f64; 3],
}

impl Tap {
    /// Reorders a [`Location`] so that the dominant corner comes first (ties keep the
    /// earlier slot); the pairing of corners and weights is preserved.
    pub fn from_location(loc: &Location) -> Tap {
        let mut best = 0;
        for k in 1..3 {
            if loc.weights[k] > loc.weights[best] {
                best = k;
            }
        }
        let order = [best, (best + 1) % 3, (best + 2) % 3];
        Tap {
            face: loc.face as u32,
            corners: order.map(|k| loc.corners[k]),
            weights: order.map(|k| loc.weights[k]),
        }
    }

    /// Barycentric interpolation of channel `ch` of `sig`, anchored at corner 0 so that a
    /// constant signal is reproduced exactly.
    #[inline]
    pub fn sample(&self, sig: &SphereSignal, ch: usize) -> f64 {
        let base = sig.get(self.corners[0] as usize, ch);
        let mut v = base;
        let (mut lo, mut hi) = (base, base);
        for k in 1..3 {
            let w = self.weights[k];
            if w != 0.0 {
                let x = sig.get(self.corners[k] as usize, ch);
                v += w * (x - base);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        clamp_between(v, lo, hi)
    }
}

/// Precomputed tap locations for every vertex of one icosphere, stored as parallel
/// arrays indexed by `vertex * taps_per_vertex + tap`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingOperator {
    order: u32,
    kh: usize,
    kw: usize,
    spacing: f64,
    faces: Vec<u32>,
    corners: Vec<[u32; 3]>,
    weights: Vec<[f64; 3]>,
}

/// Tolerance on per-tap weight sums.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

impl SamplingOperator {
    /// Assembles an operator from taps in vertex-major order, checking its invariants.
    pub fn from_taps(order: u32, geometry: KernelGeometry, taps: &[Tap]) -> Result<Self> {
        geometry.validate()?;
        if order > 14 {
            return Err(Error::Dimension("operator order out of range"));
        }
        let nv = geodesic::vertex_count(order);
        let nf = geodesic::face_count(order);
        if taps.len() != nv * geometry.taps() {
            return Err(Error::Dimension("operator tap count != V(order) * kh * kw"));
        }
        for t in taps {
            if t.face as usize >= nf || t.corners.iter().any(|&c| c as usize >= nv) {
                return Err(Error::Dimension(
                    "tap references a face or vertex out of range",
                ));
            }
            let sum: f64 = t.weights.iter().sum();
            if t.weights.iter().any(|&w| !(0.0..=1.0).contains(&w))
                || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE
            {
                return Err(Error::Domain("tap weights must be in [0, 1] and sum to 1"));
            }
        }
        Ok(SamplingOperator {
            order,
            kh: geometry.kh,
            kw: geometry.kw,
            spacing: geometry.spacing,
            faces: taps.iter().map(|t| t.face).collect(),
            corners: taps.iter().map(|t| t.corners).collect(),
            weights: taps.iter().map(|t| t.weights).collect(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn geometry(&self) -> KernelGeometry {
        KernelGeometry {
            kh: self.kh,
            kw: self.kw,
            spacing: self.spacing,
        }
    }

    pub fn taps_per_vertex(&self) -> usize {
        self.kh * self.kw
    }

    pub fn num_vertices(&self) -> usize {
        self.faces.len() / self.taps_per_vertex()
    }

    pub fn tap(&self, vertex: usize, tap: usize) -> Tap {
        let i = vertex * self.taps_per_vertex() + tap;
        Tap {
            face: self.faces[i],
            corners: self.corners[i],
            weights: self.weights[i],
        }
    }

    pub fn taps(&self) -> impl Iterator<Item = Tap> + '_ {
        (0..self.faces.len()).map(|i| Tap {
            face: self.faces[i],
            corners: self.corners[i],
            weights: self.weights[i],
        })
    }

    /// Interpolated value of `sig` at tap `tap` of `vertex`.
    #[inline]
    pub fn gather(&self, sig: &SphereSignal, vertex: usize, tap: usize, ch: usize) -> f64 {
        self.tap(vertex, tap).sample(sig, ch)
    }
}

/// Locates the kernel taps of vertex `v`, appending them to `out`.
///
/// The central tap resolves to `v` itself with weight exactly 1 on the lowest-index face
/// incident to `v`.
pub fn vertex_taps(
    sphere: &Icosphere,
    geometry: &KernelGeometry,
    v: usize,
    out: &mut Vec<Tap>,
) -> Result<()> {
    let center = xyz_to_lonlat(sphere.vertex(v))?;
    let pattern = gnomonic_pattern(center, geometry.kh, geometry.kw, geometry.spacing)?;
    let center_tap = geometry.center_tap();
    for (t, p) in pattern.taps.iter().enumerate() {
        if t == center_tap {
            let face = sphere.face_adjacency(v)[0];
            let f = sphere.faces()[face as usize];
            let slot = f
                .iter()
                .position(|&c| c as usize == v)
                .expect("incident face");
            out.push(Tap {
                face,
                corners: [f[slot], f[(slot + 1) % 3], f[(slot + 2) % 3]],
                weights: [1.0, 0.0, 0.0],
            });
        } else {
            let loc = sphere.locate(lonlat_to_xyz(*p))?;
            out.push(Tap::from_location(&loc));
        }
    }
    Ok(())
}

/// Resolves the tap spacing: explicit value or the mesh's mean edge angle.
pub fn operator_geometry(
    sphere: &Icosphere,
    kh: usize,
    kw: usize,
    spacing: Option<f64>,
) -> Result<KernelGeometry> {
    KernelGeometry::new(kh, kw, spacing.unwrap_or_else(|| sphere.mean_edge_angle()))
}

/// Builds the sampling operator of a `kh x kw` gnomonic kernel on `sphere`.
/// `spacing` defaults to [`Icosphere::mean_edge_angle`].
pub fn build_operator(
    sphere: &Icosphere,
    kh: usize,
    kw: usize,
    spacing: Option<f64>,
) -> Result<SamplingOperator> {
    let geometry = operator_geometry(sphere, kh, kw, spacing)?;
    let mut taps = Vec::with_capacity(sphere.num_vertices() * geometry.taps());
    for v in 0..sphere.num_vertices() {
        vertex_taps(sphere, &geometry, v, &mut taps)?;
    }
    SamplingOperator::from_taps(sphere.order(), geometry, &taps)
}

/// Dense kernel weights laid out tap-major, then input channel, then output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub kh: usize,
    pub kw: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn new(kh: usize, kw: usize, c_in: usize, c_out: usize, weights: Vec<f64>) -> Result<Self> {
        if kh == 0 || kw == 0 || kh.is_multiple_of(2) || kw.is_multiple_of(2) {
            return Err(Error::Dimension("kernel dimensions must be odd and >= 1"));
        }
        if c_in == 0 || c_out == 0 {
            return Err(Error::Dimension("kernel channel counts must be >= 1"));
        }
        if weights.len() != kh * kw * c_in * c_out {
            return Err(Error::Dimension(
                "kernel weight count != kh * kw * c_in * c_out",
            ));
        }
        Ok(Kernel {
            kh,
            kw,
            c_in,
            c_out,
            weights,
        })
    }

    /// Central tap maps each channel to itself; all other weights are zero.
    pub fn identity(kh: usize, kw: usize, channels: usize) -> Result<Self> {
        let mut w = vec![0.0; kh * kw * channels * channels];
        let center = kh * kw / 2;
        for c in 0..channels {
            w[(center * channels + c) * channels + c] = 1.0;
        }
        Self::new(kh, kw, channels, channels, w)
    }

    /// Builds a per-channel (diagonal) kernel whose weight depends on the tap offset only.
    pub fn from_tap_weights(
        kh: usize,
        kw: usize,
        channels: usize,
        mut f: impl FnMut(isize, isize) -> f64,
    ) -> Result<Self> {
        let mut w = vec![0.0; kh * kw * channels * channels];
        let (hh, hw) = ((kh / 2) as isize, (kw / 2) as isize);
        for (t, (m, n)) in (-hh..=hh)
            .flat_map(|m| (-hw..=hw).map(move |n| (m, n)))
            .enumerate()
        {
            let value = f(m, n);
            for c in 0..channels {
                w[(t * channels + c) * channels + c] = value;
            }
        }
        Self::new(kh, kw, channels, channels, w)
    }

    #[inline]
    pub fn weight(&self, tap: usize, c_in: usize, c_out: usize) -> f64 {
        self.weights[(tap * self.c_in + c_in) * self.c_out + c_out]
    }
}

pub fn check_convolve(op: &SamplingOperator, sig: &SphereSignal, kernel: &Kernel) -> Result<()> {
    if op.order != sig.order() {
        return Err(Error::OrderMismatch {
            expected: op.order,
            found: sig.order(),
        });
    }
    if kernel.kh != op.kh || kernel.kw != op.kw {
        return Err(Error::Dimension("kernel size does not match the operator"));
    }
    if kernel.c_in != sig.channels() {
        return Err(Error::Dimension("kernel input channels != signal channels"));
    }
    Ok(())
}

/// Output channels of vertex `v`. Inputs must have passed [`check_convolve`].
#[inline]
pub fn convolve_vertex(
    op: &SamplingOperator,
    sig: &SphereSignal,
    kernel: &Kernel,
    v: usize,
    out: &mut [f64],
) {
    // -0.0 is the additive identity, so a single non-zero term passes through unchanged.
    out.fill(-0.0);
    let taps = op.taps_per_vertex();
    for t in 0..taps {
        let tap = op.tap(v, t);
        for ci in 0..kernel.c_in {
            let row = &kernel.weights[(t * kernel.c_in + ci) * kernel.c_out..][..kernel.c_out];
            if row.iter().all(|&w| w == 0.0) {
                continue;
            }
            let g = tap.sample(sig, ci);
            for (o, &w) in out.iter_mut().zip(row) {
                if w != 0.0 {
                    *o += w * g;
                }
            }
        }
    }
}

/// Gather-multiply-accumulate convolution; no normalization is applied.
pub fn convolve(
    op: &SamplingOperator,
    sig: &SphereSignal,
    kernel: &Kernel,
) -> Result<SphereSignal> {
    check_convolve(op, sig, kernel)?;
    let c = kernel.c_out;
    let mut data = vec![0.0; op.num_vertices() * c];
    for (v, out) in data.chunks_exact_mut(c).enumerate() {
        convolve_vertex(op, sig, kernel, v, out);
    }
    SphereSignal::new(op.order, c, data)
}

/// Restriction to the coarser mesh: keeps the first `V(n - 1)` vertices.
pub fn downsample(sig: &SphereSignal, target: &Icosphere) -> Result<SphereSignal> {
    if sig.order() == 0 || target.order() + 1 != sig.order() {
        return Err(Error::OrderMismatch {
            expected: target.order() + 1,
            found: sig.order(),
        });
    }
    let keep = target.num_vertices() * sig.channels();
    SphereSignal::new(target.order(), sig.channels(), sig.data()[..keep].to_vec())
}

/// Prolongation to the next order: inherited vertices copy their value, each new
/// midpoint takes the mean of its parent edge's endpoints.
pub fn upsample(sig: &SphereSignal, target: &Icosphere) -> Result<SphereSignal> {
    if target.order() != sig.order() + 1 {
        return Err(Error::OrderMismatch {
            expected: target.order().saturating_sub(1),
            found: sig.order(),
        });
    }
    let c = sig.channels();
    let coarse = target.coarse_vertex_count();
    let mut data = Vec::with_capacity(target.num_vertices() * c);
    data.extend_from_slice(sig.data());
    for v in coarse..target.num_vertices() {
        let [a, b] = target
            .parent_edge(v)
            .expect("fine vertex has a parent edge");
        for ch in 0..c {
            data.push((sig.get(a as usize, ch) + sig.get(b as usize, ch)) * 0.5);
        }
    }
    SphereSignal::new(target.order(), c, data)
}

/// Largest great-circle distance between corresponding taps of two patterns.
pub fn max_tap_separation(a: &KernelPattern, b: &KernelPattern) -> f64 {
    a.taps
        .iter()
        .zip(&b.taps)
        .map(|(p, q)| lonlat_to_xyz(*p).angle_to(lonlat_to_xyz(*q)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnomonic_pattern_on_the_equator() {
        let s = 0.1;
        let p = gnomonic_pattern(LonLat::new(0.0, 0.0), 3, 3, s).unwrap();
        assert_eq!(p.tap(0, 0), LonLat::new(0.0, 0.0));
        let east = p.tap(0, 1);
        assert!((east.lon - libm::atan(s)).abs() < 1e-15 && east.lat.abs() < 1e-15);
        for m in [-1, 1] {
            let t = p.tap(m, 0);
            assert!(t.lon.abs() < 1e-15);
            assert!((t.lat - m as f64 * libm::atan(s)).abs() < 1e-15);
        }
    }

    use core::f64::consts::PI;

    #[test]
    fn equirect_pattern_stretches_longitude() {
        let s = 0.01;
        let c = LonLat::new(0.0, PI / 3.0);
        let p = equirect_pattern(c, 3, 3, s).unwrap();
        assert!((p.tap(0, 1).lon - 2.0 * s).abs() < 1e-14);
        assert!(equirect_pattern(LonLat::new(0.0, 1.5), 3, 3, 0.1).is_err());
    }

    #[test]
    fn pattern_errors() {
        let c = LonLat::new(0.0, 0.0);
        assert!(gnomonic_pattern(c, 2, 3, 0.1).is_err());
        assert!(gnomonic_pattern(c, 3, 3, 0.0).is_err());
        assert!(gnomonic_pattern(c, 3, 3, 2.0).is_err());
        assert!(gnomonic_pattern(c, 5, 5, 0.8).is_err());
    }

    #[test]
    fn one_by_one_operator_is_identity_gather() {
        let s = Icosphere::new(2).unwrap();
        let op = build_operator(&s, 1, 1, None).unwrap();
        for v in 0..s.num_vertices() {
            let t = op.tap(v, 0);
            assert_eq!(t.corners[0] as usize, v);
            assert_eq!(t.weights, [1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn three_by_three_operator_invariants() {
        let s = Icosphere::new(2).unwrap();
        let op = build_operator(&s, 3, 3, None).unwrap();
        assert_eq!(op.taps().count(), 162 * 9);
        for t in op.taps() {
            assert!(t.weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
            assert!((t.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let sig = SphereSignal::filled(2, 1, 0.7).unwrap();
        for v in 0..s.num_vertices() {
            for t in 0..9 {
                assert_eq!(op.gather(&sig, v, t, 0), 0.7);
            }
        }
    }

    #[test]
    fn identity_and_box_kernels() {
        let s = Icosphere::new(2).unwrap();
        let op = build_operator(&s, 3, 3, None).unwrap();
        let sig = SphereSignal::from_fn(&s, 2, |p, c| p.x + c as f64 * p.z).unwrap();
        let id = Kernel::identity(3, 3, 2).unwrap();
        assert_eq!(convolve(&op, &sig, &id).unwrap(), sig);

        let k = SphereSignal::filled(2, 1, 1.25).unwrap();
        let ones = Kernel::from_tap_weights(3, 3, 1, |_, _| 1.0).unwrap();
        let out = convolve(&op, &k, &ones).unwrap();
        assert!(out.data().iter().all(|&v| v == 9.0 * 1.25));
    }

    #[test]
    fn convolve_dimension_checks() {
        let s = Icosphere::new(1).unwrap();
        let op = build_operator(&s, 3, 3, None).unwrap();
        let sig = SphereSignal::filled(1, 2, 0.0).unwrap();
        assert!(convolve(&op, &sig, &Kernel::identity(1, 1, 2).unwrap()).is_err());
        assert!(convolve(&op, &sig, &Kernel::identity(3, 3, 3).unwrap()).is_err());
        let other = SphereSignal::filled(2, 2, 0.0).unwrap();
        assert!(convolve(&op, &other, &Kernel::identity(3, 3, 2).unwrap()).is_err());
    }

    #[test]
    fn up_and_down_sampling() {
        let s0 = Icosphere::new(0).unwrap();
        let s1 = Icosphere::new(1).unwrap();
        let mut one_hot = vec![0.0; 12];
        one_hot[3] = 1.0;
        let sig = SphereSignal::new(0, 1, one_hot).unwrap();
        let up = upsample(&sig, &s1).unwrap();
        assert_eq!(up.get(3, 0), 1.0);
        let halves: Vec<usize> = (0..42).filter(|&v| up.get(v, 0) == 0.5).collect();
        assert_eq!(halves.len(), 5);
        for v in halves {
            assert!(s1.parent_edge(v).unwrap().contains(&3));
        }
        assert_eq!((0..42).filter(|&v| up.get(v, 0) == 0.0).count(), 36);
        assert_eq!(downsample(&up, &s0).unwrap(), sig);
        assert!(downsample(&sig, &s0).is_err());
        assert!(upsample(&up, &s1).is_err());
    }
}
