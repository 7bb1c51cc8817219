#![allow(dead_code)]

use geosphere_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random direction by rejection sampling in the unit ball.
pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Moller-Trumbore intersection of the ray `origin + t dir` with triangle `(a, b, c)`.
/// Returns `(t, [wa, wb, wc])` if the ray hits the triangle (with slack `eps`).
pub fn ray_triangle(dir: Vec3, a: Vec3, b: Vec3, c: Vec3, eps: f64) -> Option<(f64, [f64; 3])> {
    let e1 = b - a;
    let e2 = c - a;
    let pv = dir.cross(e2);
    let det = e1.dot(pv);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = -a;
    let u = tv.dot(pv) * inv;
    if u < -eps || u > 1.0 + eps {
        return None;
    }
    let qv = tv.cross(e1);
    let v = dir.dot(qv) * inv;
    if v < -eps || u + v > 1.0 + eps {
        return None;
    }
    let t = e2.dot(qv) * inv;
    (t > 0.0).then_some((t, [1.0 - u - v, u, v]))
}

/// Real polynomial basis of spherical harmonics with degree <= 3 (16 functions).
pub fn sh_basis(p: Vec3) -> [f64; 16] {
    let (x, y, z) = (p.x, p.y, p.z);
    [
        1.0,
        x,
        y,
        z,
        x * y,
        y * z,
        3.0 * z * z - 1.0,
        x * z,
        x * x - y * y,
        y * (3.0 * x * x - y * y),
        x * y * z,
        y * (5.0 * z * z - 1.0),
        z * (5.0 * z * z - 3.0),
        x * (5.0 * z * z - 1.0),
        z * (x * x - y * y),
        x * (x * x - 3.0 * y * y),
    ]
}

/// A fixed band-limited field (spherical-harmonic degrees 0..=3).
pub fn band_limited_field(p: Vec3) -> f64 {
    const COEFFS: [f64; 16] = [
        0.3, 0.8, -0.5, 0.6, 0.9, -0.7, 0.4, 0.5, -0.6, 0.35, 1.2, -0.25, 0.3, 0.2, -0.45, 0.15,
    ];
    sh_basis(p).iter().zip(COEFFS).map(|(b, c)| b * c).sum()
}

/// Singular values (largest first) of a 2x2 matrix `[[p, q], [r, s]]`.
pub fn singular_values_2x2(p: f64, q: f64, r: f64, s: f64) -> (f64, f64) {
    let e = (p + s) / 2.0;
    let f = (p - s) / 2.0;
    let g = (r + q) / 2.0;
    let h = (r - q) / 2.0;
    let qq = (e * e + h * h).sqrt();
    let rr = (f * f + g * g).sqrt();
    (qq + rr, (qq - rr).abs())
}
