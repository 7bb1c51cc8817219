//! Multi-threaded drivers over the core per-vertex / per-pixel kernels.
//!
//! Every output element is computed by the same scalar routine as the sequential path and
//! written to a disjoint slot, and reductions merge fixed-size blocks in index order, so
//! results are bitwise identical for any thread count.

use geosphere_core::distortion::{
    face_sample_points, icosphere_summary_range, icosphere_unit_scale, tissot_face_point,
    DistortionSummary, SummaryAccumulator, TissotSample,
};
use geosphere_core::projection::xyz_to_lonlat;
use geosphere_core::resample::{
    check_render_input, check_resample_input, render_pixel, sample_bilinear, sample_nearest,
};
use geosphere_core::sphereconv::{check_convolve, convolve_vertex, operator_geometry, vertex_taps};
use geosphere_core::{
    EquirectImage, Icosphere, Kernel, RenderMode, Result, SamplingOperator, SphereSignal,
};
use rayon::prelude::*;

/// Work-unit size for reductions; fixed so block boundaries never depend on the pool.
const BLOCK: usize = 4096;

/// Runs `f` on a pool with `threads` workers (`None`: rayon's default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Parallel [`geosphere_core::resample::equirect_to_sphere`]; `nearest` selects
/// nearest-pixel lookup for class maps.
pub fn equirect_to_sphere(
    img: &EquirectImage,
    sphere: &Icosphere,
    nearest: bool,
) -> Result<SphereSignal> {
    check_resample_input(img)?;
    let c = img.channels();
    let sample = if nearest {
        sample_nearest
    } else {
        sample_bilinear
    };
    let mut data = vec![0.0; sphere.num_vertices() * c];
    data.par_chunks_mut(c)
        .enumerate()
        .try_for_each(|(v, out)| -> Result<()> {
            sample(img, xyz_to_lonlat(sphere.vertex(v))?, out);
            Ok(())
        })?;
    SphereSignal::new(sphere.order(), c, data)
}

pub fn sphere_to_equirect(
    sig: &SphereSignal,
    sphere: &Icosphere,
    height: usize,
    width: usize,
    mode: RenderMode,
) -> Result<EquirectImage> {
    check_render_input(sig, sphere, height, width)?;
    let c = sig.channels();
    let mut data = vec![0.0; height * width * c];
    data.par_chunks_mut(c)
        .enumerate()
        .try_for_each(|(k, out)| {
            render_pixel(sig, sphere, height, width, k / width, k % width, mode, out)
        })?;
    EquirectImage::new(height, width, c, data)
}

pub fn build_operator(
    sphere: &Icosphere,
    kh: usize,
    kw: usize,
    spacing: Option<f64>,
) -> Result<SamplingOperator> {
    let geometry = operator_geometry(sphere, kh, kw, spacing)?;
    let n = sphere.num_vertices();
    let blocks: Vec<_> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut taps = Vec::with_capacity(BLOCK * geometry.taps());
            for v in b * BLOCK..((b + 1) * BLOCK).min(n) {
                vertex_taps(sphere, &geometry, v, &mut taps)?;
            }
            Ok(taps)
        })
        .collect::<Result<_>>()?;
    let taps: Vec<_> = blocks.concat();
    SamplingOperator::from_taps(sphere.order(), geometry, &taps)
}

pub fn convolve(
    op: &SamplingOperator,
    sig: &SphereSignal,
    kernel: &Kernel,
) -> Result<SphereSignal> {
    check_convolve(op, sig, kernel)?;
    let c = kernel.c_out;
    let mut data = vec![0.0; op.num_vertices() * c];
    data.par_chunks_mut(c)
        .enumerate()
        .for_each(|(v, out)| convolve_vertex(op, sig, kernel, v, out));
    SphereSignal::new(op.order(), c, data)
}

/// Parallel [`geosphere_core::distortion::icosphere_summary`].
pub fn icosphere_summary(sphere: &Icosphere, samples_per_face: usize) -> DistortionSummary {
    let n = sphere.num_faces();
    let parts: Vec<SummaryAccumulator> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            icosphere_summary_range(
                sphere,
                samples_per_face,
                b * BLOCK..((b + 1) * BLOCK).min(n),
            )
        })
        .collect();
    let mut acc = SummaryAccumulator::default();
    for p in &parts {
        acc.merge(p);
    }
    acc.finish()
}

/// Every per-face sample, face-major.
pub fn icosphere_samples(sphere: &Icosphere, samples_per_face: usize) -> Vec<TissotSample> {
    let points = face_sample_points(samples_per_face.max(1));
    let unit = icosphere_unit_scale();
    (0..sphere.num_faces())
        .into_par_iter()
        .flat_map_iter(|f| {
            points
                .iter()
                .map(move |&bary| tissot_face_point(sphere, f, bary, unit))
        })
        .collect()
}
