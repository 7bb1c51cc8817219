//! On-disk formats: ISPH vertex signals, ISOP operator caches, OFF meshes, CSV reports and
//! plain-text kernel weights.
//!
//! Binary formats are little-endian and end with a CRC32 (IEEE) of their payload.

use std::fmt::Write as _;
use std::io::{self, Write};

use geosphere_core::distortion::TissotSample;
use geosphere_core::geodesic::vertex_count;
use geosphere_core::sphereconv::{KernelGeometry, Tap};
use geosphere_core::{Icosphere, Kernel, KernelPattern, SamplingOperator, SphereSignal};

use crate::error::{Error, Result};

pub const ISPH_MAGIC: [u8; 4] = *b"ISPH";
pub const ISOP_MAGIC: [u8; 4] = *b"ISOP";
pub const FORMAT_VERSION: u32 = 1;

/// Highest order accepted when decoding, matching the mesh builder's hard limit.
const MAX_FILE_ORDER: u32 = 14;

const ISPH_HEADER: usize = 24;
const ISOP_HEADER: usize = 24;
const ISOP_RECORD: usize = 40;

pub const TISSOT_CSV_HEADER: &str = "lon,lat,h,k,theta_prime,a,b,area_scale,omega";
pub const PATTERN_CSV_HEADER: &str = "m,n,lon,lat";

/// Bounds-checked little-endian cursor that reports failures by byte offset.
struct Reader<'a> {
    what: &'static str,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(what: &'static str, buf: &'a [u8]) -> Self {
        Reader { what, buf, pos: 0 }
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::at_byte(self.what, offset as u64, message)
    }

    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.err(
                self.buf.len(),
                format!(
                    "truncated while reading {field} ({n} bytes needed at byte {})",
                    self.pos
                ),
            )),
        }
    }

    fn array<const N: usize>(&mut self, field: &str) -> Result<[u8; N]> {
        Ok(self.take(N, field)?.try_into().expect("length checked"))
    }

    fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array(field)?))
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array(field)?))
    }

    fn u64(&mut self, field: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array(field)?))
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array(field)?))
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<()> {
        let got = self.array::<4>("magic")?;
        if got != expected {
            return Err(self.err(0, format!("bad magic {got:02x?}, expected {expected:02x?}")));
        }
        Ok(())
    }

    fn version(&mut self) -> Result<()> {
        let at = self.pos;
        let v = self.u32("version")?;
        if v != FORMAT_VERSION {
            return Err(self.err(at, format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn order(&mut self) -> Result<u32> {
        let at = self.pos;
        let order = self.u32("order")?;
        if order > MAX_FILE_ORDER {
            return Err(self.err(at, format!("order {order} exceeds {MAX_FILE_ORDER}")));
        }
        Ok(order)
    }

    /// Checks the trailing CRC over `payload_start..current position` and that nothing
    /// follows it.
    fn finish_crc(&mut self, payload_start: usize) -> Result<()> {
        let payload = &self.buf[payload_start..self.pos];
        let at = self.pos;
        let stored = self.u32("crc32")?;
        let actual = crc32fast::hash(payload);
        if stored != actual {
            return Err(self.err(
                at,
                format!("crc32 mismatch: stored {stored:08x}, computed {actual:08x}"),
            ));
        }
        if self.pos != self.buf.len() {
            return Err(self.err(self.pos, "trailing bytes after crc32"));
        }
        Ok(())
    }
}

/// Serializes a signal as ISPH. Values are narrowed to float32.
pub fn encode_isph(sig: &SphereSignal) -> Vec<u8> {
    let mut out = Vec::with_capacity(ISPH_HEADER + sig.data().len() * 4 + 4);
    out.extend_from_slice(&ISPH_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&sig.order().to_le_bytes());
    out.extend_from_slice(&(sig.channels() as u32).to_le_bytes());
    out.extend_from_slice(&(sig.num_vertices() as u64).to_le_bytes());
    for &x in sig.data() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    let crc = crc32fast::hash(&out[ISPH_HEADER..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_isph(bytes: &[u8]) -> Result<SphereSignal> {
    let mut r = Reader::new("ISPH", bytes);
    r.magic(ISPH_MAGIC)?;
    r.version()?;
    let order = r.order()?;
    let at = r.pos;
    let channels = r.u32("channels")?;
    if channels == 0 {
        return Err(r.err(at, "channel count is zero"));
    }
    let at = r.pos;
    let count = r.u64("vertex count")?;
    let expected = vertex_count(order) as u64;
    if count != expected {
        return Err(r.err(
            at,
            format!("vertex count {count} does not match order {order} ({expected})"),
        ));
    }
    let len = expected as usize * channels as usize;
    let start = r.pos;
    let payload = r.take(len * 4, "payload")?;
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
        .collect();
    r.finish_crc(start)?;
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(r.err(start + 4 * i, "non-finite value in payload"));
    }
    Ok(SphereSignal::new(order, channels as usize, data)?)
}

/// Serializes an operator as ISOP.
pub fn encode_isop(op: &SamplingOperator) -> Vec<u8> {
    let g = op.geometry();
    let n = op.num_vertices() * op.taps_per_vertex();
    let mut out = Vec::with_capacity(ISOP_HEADER + n * ISOP_RECORD + 4);
    out.extend_from_slice(&ISOP_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&op.order().to_le_bytes());
    out.extend_from_slice(&(g.kh as u16).to_le_bytes());
    out.extend_from_slice(&(g.kw as u16).to_le_bytes());
    out.extend_from_slice(&g.spacing.to_le_bytes());
    for t in op.taps() {
        out.extend_from_slice(&t.face.to_le_bytes());
        for c in t.corners {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for w in t.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out[ISOP_HEADER..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_isop(bytes: &[u8]) -> Result<SamplingOperator> {
    let mut r = Reader::new("ISOP", bytes);
    r.magic(ISOP_MAGIC)?;
    r.version()?;
    let order = r.order()?;
    let at = r.pos;
    let kh = r.u16("kh")? as usize;
    let kw = r.u16("kw")? as usize;
    let spacing = r.f64("spacing")?;
    let geometry = KernelGeometry::new(kh, kw, spacing).map_err(|e| r.err(at, e.to_string()))?;
    let n = vertex_count(order) * geometry.taps();
    let start = r.pos;
    let mut taps = Vec::with_capacity(n);
    for _ in 0..n {
        let face = r.u32("tap face")?;
        let corners = [
            r.u32("tap corner")?,
            r.u32("tap corner")?,
            r.u32("tap corner")?,
        ];
        let weights = [
            r.f64("tap weight")?,
            r.f64("tap weight")?,
            r.f64("tap weight")?,
        ];
        taps.push(Tap {
            face,
            corners,
            weights,
        });
    }
    r.finish_crc(start)?;
    SamplingOperator::from_taps(order, geometry, &taps).map_err(|e| r.err(start, e.to_string()))
}

/// ASCII OFF: header, counts line, one vertex per line, faces as `3 i j k`.
pub fn write_off(w: &mut impl Write, sphere: &Icosphere) -> io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(
        w,
        "{} {} {}",
        sphere.num_vertices(),
        sphere.num_faces(),
        sphere.num_edges()
    )?;
    for v in sphere.vertices() {
        writeln!(w, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z)?;
    }
    for [a, b, c] in sphere.faces() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any f64.
fn push_float(line: &mut String, x: f64) {
    write!(line, "{x:.16e}").expect("writing to a String");
}

pub fn write_tissot_csv<'a>(
    w: &mut impl Write,
    samples: impl IntoIterator<Item = &'a TissotSample>,
) -> io::Result<()> {
    writeln!(w, "{TISSOT_CSV_HEADER}")?;
    let mut line = String::new();
    for s in samples {
        line.clear();
        let fields = [
            s.at.lon,
            s.at.lat,
            s.h,
            s.k,
            s.theta_prime,
            s.a,
            s.b,
            s.area_scale,
            s.omega,
        ];
        for (i, x) in fields.into_iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            push_float(&mut line, x);
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// One row per tap, `m,n,lon,lat` with angles in radians.
pub fn write_pattern_csv(w: &mut impl Write, pattern: &KernelPattern) -> io::Result<()> {
    writeln!(w, "{PATTERN_CSV_HEADER}")?;
    let mut line = String::new();
    for ((m, n), t) in pattern.offsets().zip(&pattern.taps) {
        line.clear();
        write!(line, "{m},{n},").expect("writing to a String");
        push_float(&mut line, t.lon);
        line.push(',');
        push_float(&mut line, t.lat);
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Parses a kernel file: `kh kw c_in c_out` on the first line, then
/// `kh * kw * c_in * c_out` whitespace-separated weights (tap-major, then input channel,
/// then output channel). Lines starting with `#` are ignored.
pub fn parse_kernel(text: &str) -> Result<Kernel> {
    const WHAT: &str = "kernel";
    let mut tokens = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i as u64 + 1, t)));
    let mut dims = [0usize; 4];
    for (k, name) in ["kh", "kw", "c_in", "c_out"].iter().enumerate() {
        let (line, tok) = tokens
            .next()
            .ok_or_else(|| Error::at_line(WHAT, 1, format!("missing {name}")))?;
        dims[k] = tok.parse().map_err(|_| {
            Error::at_line(WHAT, line, format!("{name} is not an integer: {tok:?}"))
        })?;
    }
    let [kh, kw, c_in, c_out] = dims;
    let n = kh
        .checked_mul(kw)
        .and_then(|x| x.checked_mul(c_in))
        .and_then(|x| x.checked_mul(c_out))
        .ok_or_else(|| Error::at_line(WHAT, 1, "kernel dimensions overflow"))?;
    let mut weights = Vec::with_capacity(n.min(1 << 20));
    let mut last_line = 1;
    for (line, tok) in tokens {
        let x: f64 = tok
            .parse()
            .map_err(|_| Error::at_line(WHAT, line, format!("not a number: {tok:?}")))?;
        if !x.is_finite() {
            return Err(Error::at_line(WHAT, line, "weight is not finite"));
        }
        weights.push(x);
        last_line = line;
    }
    if weights.len() != n {
        return Err(Error::at_line(
            WHAT,
            last_line,
            format!("expected {n} weights, found {}", weights.len()),
        ));
    }
    Kernel::new(kh, kw, c_in, c_out, weights).map_err(|e| Error::at_line(WHAT, 1, e.to_string()))
}

/// Inverse of [`parse_kernel`]; one line per tap.
pub fn format_kernel(kernel: &Kernel) -> String {
    let mut s = format!(
        "{} {} {} {}\n",
        kernel.kh, kernel.kw, kernel.c_in, kernel.c_out
    );
    for row in kernel.weights.chunks(kernel.c_in * kernel.c_out) {
        let line: Vec<String> = row.iter().map(|w| format!("{w:?}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}
