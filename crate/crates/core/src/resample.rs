//! Equirectangular rasters, icosphere vertex signals, and resampling between them.
//!
//! Pixel `(row i, col j)` of an `H x W` panorama has its center at
//! `lon = (j + 1/2) / W * 2pi - pi`, `lat = pi/2 - (i + 1/2) / H * pi`.
//!
//! Raster -> sphere pulls values with bilinear interpolation over pixel centers (periodic
//! in longitude, rows clamped at the outermost centers near the poles). Sphere -> raster
//! locates each pixel center on the mesh and blends the three face corners with their
//! barycentric weights, or copies the dominant corner.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::geodesic::{self, Icosphere, Location};
use crate::math::{clamp_between, lerp};
use crate::projection::{lonlat_to_xyz, xyz_to_lonlat, LonLat};
use crate::{Error, Result};

/// Row-major, channel-interleaved raster.
#[derive(Clone, Debug, PartialEq)]
pub struct EquirectImage {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl EquirectImage {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Dimension("image dimensions must be non-zero"));
        }
        if data.len() != height * width * channels {
            return Err(Error::Dimension("image data length != H * W * C"));
        }
        Ok(EquirectImage {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    /// Samples `f(lon, lat, channel)` at every pixel center.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(LonLat, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for i in 0..height {
            for j in 0..width {
                let p = pixel_center(height, width, i, j);
                for c in 0..channels {
                    data.push(f(p, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Full panoramas have `W = 2H`.
    pub fn check_panorama_aspect(&self) -> Result<()> {
        if self.width != 2 * self.height {
            return Err(Error::Dimension(
                "equirectangular panorama must have W = 2H",
            ));
        }
        Ok(())
    }
}

pub fn pixel_center(height: usize, width: usize, row: usize, col: usize) -> LonLat {
    LonLat {
        lon: (col as f64 + 0.5) / width as f64 * TAU - PI,
        lat: FRAC_PI_2 - (row as f64 + 0.5) / height as f64 * PI,
    }
}

/// Vertex-major, channel-interleaved values on the vertices of an order-`order` icosphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereSignal {
    order: u32,
    channels: usize,
    data: Vec<f64>,
}

impl SphereSignal {
    pub fn new(order: u32, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Dimension("signal needs at least one channel"));
        }
        if order > 14 || data.len() != geodesic::vertex_count(order) * channels {
            return Err(Error::Dimension("signal length != V(order) * C"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SphereSignal {
            order,
            channels,
            data,
        })
    }

    pub fn filled(order: u32, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            order,
            channels,
            vec![value; geodesic::vertex_count(order) * channels],
        )
    }

    /// Evaluates `f(vertex position, channel)` at every vertex of `sphere`.
    pub fn from_fn(
        sphere: &Icosphere,
        channels: usize,
        mut f: impl FnMut(crate::Vec3, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(sphere.num_vertices() * channels);
        for v in sphere.vertices() {
            for c in 0..channels {
                data.push(f(*v, c));
            }
        }
        Self::new(sphere.order(), channels, data)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_vertices(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, vertex: usize, channel: usize) -> f64 {
        self.data[vertex * self.channels + channel]
    }

    pub fn vertex(&self, vertex: usize) -> &[f64] {
        &self.data[vertex * self.channels..(vertex + 1) * self.channels]
    }

    pub fn check_sphere(&self, sphere: &Icosphere) -> Result<()> {
        if self.order != sphere.order() {
            return Err(Error::OrderMismatch {
                expected: sphere.order(),
                found: self.order,
            });
        }
        Ok(())
    }
}

/// How [`sphere_to_equirect`] turns a located face into a pixel value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RenderMode {
    Barycentric,
    /// Copy the corner with the largest weight (ties go to the lowest vertex index).
    NearestVertex,
}

/// Fractional raster coordinates of `p`: `(row, col)` in pixel-center units, row clamped
/// to `[0, H - 1]`, col in `[0, W)`.
fn raster_coords(img: &EquirectImage, p: LonLat) -> (f64, f64) {
    let h = img.height as f64;
    let w = img.width as f64;
    let row = ((FRAC_PI_2 - p.lat) / PI * h - 0.5).clamp(0.0, h - 1.0);
    let mut col = (p.lon + PI) / TAU * w - 0.5;
    col -= libm::floor(col / w) * w;
    if col >= w {
        col -= w;
    }
    (row, col)
}

/// Bilinear sample of every channel at `p`, written into `out`.
pub fn sample_bilinear(img: &EquirectImage, p: LonLat, out: &mut [f64]) {
    let (row, col) = raster_coords(img, p);
    let r0 = libm::floor(row) as usize;
    let r1 = (r0 + 1).min(img.height - 1);
    let tr = row - r0 as f64;
    let c0 = (libm::floor(col) as usize).min(img.width - 1);
    let c1 = (c0 + 1) % img.width;
    let tc = col - c0 as f64;
    for (ch, o) in out.iter_mut().enumerate() {
        let (a, b) = (img.get(r0, c0, ch), img.get(r0, c1, ch));
        let (c, d) = (img.get(r1, c0, ch), img.get(r1, c1, ch));
        let top = clamp_between(lerp(a, b, tc), a.min(b), a.max(b));
        let bottom = clamp_between(lerp(c, d, tc), c.min(d), c.max(d));
        *o = clamp_between(lerp(top, bottom, tr), top.min(bottom), top.max(bottom));
    }
}

/// Value of the pixel whose center is nearest to `p` in raster coordinates.
pub fn sample_nearest(img: &EquirectImage, p: LonLat, out: &mut [f64]) {
    let (row, col) = raster_coords(img, p);
    let r = (libm::floor(row + 0.5) as usize).min(img.height - 1);
    let c = (libm::floor(col + 0.5) as usize) % img.width;
    out.copy_from_slice(img.pixel(r, c));
}

pub fn check_resample_input(img: &EquirectImage) -> Result<()> {
    if img.height < 2 || img.width < 2 {
        return Err(Error::Dimension("equirect_to_sphere needs H, W >= 2"));
    }
    Ok(())
}

/// Pulls raster values onto the vertices of `sphere` with bilinear interpolation.
pub fn equirect_to_sphere(img: &EquirectImage, sphere: &Icosphere) -> Result<SphereSignal> {
    equirect_to_sphere_with(img, sphere, sample_bilinear)
}

/// Like [`equirect_to_sphere`] but with nearest-pixel lookup, for class-id maps.
pub fn equirect_to_sphere_nearest(img: &EquirectImage, sphere: &Icosphere) -> Result<SphereSignal> {
    equirect_to_sphere_with(img, sphere, sample_nearest)
}

fn equirect_to_sphere_with(
    img: &EquirectImage,
    sphere: &Icosphere,
    sample: fn(&EquirectImage, LonLat, &mut [f64]),
) -> Result<SphereSignal> {
    check_resample_input(img)?;
    let c = img.channels;
    let mut data = vec![0.0; sphere.num_vertices() * c];
    for (v, out) in data.chunks_exact_mut(c).enumerate() {
        let p = xyz_to_lonlat(sphere.vertex(v))?;
        sample(img, p, out);
    }
    SphereSignal::new(sphere.order(), c, data)
}

/// Interpolates `sig` at a located point.
pub fn interpolate(sig: &SphereSignal, loc: &Location, mode: RenderMode, out: &mut [f64]) {
    match mode {
        RenderMode::Barycentric => {
            let [_, wb, wc] = loc.weights;
            let [a, b, c] = loc.corners.map(|i| i as usize);
            for (ch, o) in out.iter_mut().enumerate() {
                let (va, vb, vc) = (sig.get(a, ch), sig.get(b, ch), sig.get(c, ch));
                let v = va + wb * (vb - va) + wc * (vc - va);
                *o = clamp_between(v, va.min(vb).min(vc), va.max(vb).max(vc));
            }
        }
        RenderMode::NearestVertex => {
            let mut best = 0;
            for k in 1..3 {
                let (w, bw) = (loc.weights[k], loc.weights[best]);
                if w > bw || (w == bw && loc.corners[k] < loc.corners[best]) {
                    best = k;
                }
            }
            out.copy_from_slice(sig.vertex(loc.corners[best] as usize));
        }
    }
}

#[allow(clippy::too_many_arguments)]
/// Renders pixel `(row, col)` of an `height x width` panorama from `sig`.
pub fn render_pixel(
    sig: &SphereSignal,
    sphere: &Icosphere,
    height: usize,
    width: usize,
    row: usize,
    col: usize,
    mode: RenderMode,
    out: &mut [f64],
) -> Result<()> {
    let p = lonlat_to_xyz(pixel_center(height, width, row, col));
    let loc = sphere.locate(p)?;
    interpolate(sig, &loc, mode, out);
    Ok(())
}

pub fn check_render_input(
    sig: &SphereSignal,
    sphere: &Icosphere,
    height: usize,
    width: usize,
) -> Result<()> {
    sig.check_sphere(sphere)?;
    if height < 2 || width < 2 {
        return Err(Error::Dimension("sphere_to_equirect needs H, W >= 2"));
    }
    Ok(())
}

/// Renders `sig` into an `height x width` equirectangular raster.
pub fn sphere_to_equirect(
    sig: &SphereSignal,
    sphere: &Icosphere,
    height: usize,
    width: usize,
    mode: RenderMode,
) -> Result<EquirectImage> {
    check_render_input(sig, sphere, height, width)?;
    let c = sig.channels;
    let mut data = vec![0.0; height * width * c];
    for (k, out) in data.chunks_exact_mut(c).enumerate() {
        render_pixel(sig, sphere, height, width, k / width, k % width, mode, out)?;
    }
    EquirectImage::new(height, width, c, data)
}
