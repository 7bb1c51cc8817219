//! The `geosphere` command-line tool.
//!
//! Exit status: 0 on success, 1 for runtime and I/O failures, 2 for invalid usage.
//! All angle flags are in degrees; files always store radians.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use geosphere_core::distortion::{tissot_grid, DistortionSummary};
use geosphere_core::geodesic::DEFAULT_MAX_ORDER;
use geosphere_core::metrics::mean_iou;
use geosphere_core::projection::{LonLat, ProjectionKind, ProjectionSpec};
use geosphere_core::sphereconv::{equirect_pattern, gnomonic_pattern};
use geosphere_core::{Icosphere, RenderMode};

use crate::error::{Error, Result};
use crate::formats;
use crate::parallel;
use crate::raster::{self, Depth};

#[derive(Debug, Parser)]
#[command(
    name = "geosphere",
    version,
    about = "Geodesic spherical image toolkit"
)]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true, env = "GEOSPHERE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an icosphere, print its counts and optionally export it as OFF.
    Build(BuildArgs),
    /// Resample an equirectangular PNG onto icosphere vertices (ISPH output).
    Resample(ResampleArgs),
    /// Render an ISPH signal back to an equirectangular PNG.
    Render(RenderArgs),
    /// Tissot indicatrix report for a projection or the icosphere.
    Tissot(TissotArgs),
    /// Dump a kernel sampling pattern as CSV.
    Pattern(PatternArgs),
    /// Convolve an ISPH signal with a kernel file.
    Conv(ConvArgs),
    /// Per-class and mean intersection-over-union of two class-id PNGs.
    Miou(MiouArgs),
}

#[derive(Debug, clap::Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub order: u32,
    /// Highest order accepted.
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: u32,
    /// Write the mesh as ASCII OFF.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ResampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub order: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep integer sample values instead of scaling to [0, 1].
    #[arg(long)]
    pub raw: bool,
    /// Nearest-pixel lookup (for class-id maps) instead of bilinear.
    #[arg(long)]
    pub nearest: bool,
    /// Accept images whose width is not twice their height.
    #[arg(long)]
    pub any_aspect: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Barycentric,
    Nearest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DepthArg {
    #[value(name = "8")]
    Eight,
    #[value(name = "16")]
    Sixteen,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Defaults to twice the height.
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long, value_enum, default_value = "barycentric")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "8")]
    pub depth: DepthArg,
    /// Write values as integer samples instead of scaling from [0, 1].
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjectionArg {
    #[value(alias = "equirect")]
    Equirectangular,
    Mercator,
    #[value(alias = "gall-peters")]
    Gallpeters,
    Gnomonic,
    Icosphere,
}

#[derive(Debug, clap::Args)]
pub struct TissotArgs {
    #[arg(long, value_enum)]
    pub projection: ProjectionArg,
    #[arg(long, default_value_t = 72)]
    pub lon_steps: usize,
    #[arg(long, default_value_t = 36)]
    pub lat_steps: usize,
    /// Gnomonic tangent point longitude, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub center_lon: f64,
    /// Gnomonic tangent point latitude, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub center_lat: f64,
    /// Mercator latitude clamp, degrees.
    #[arg(long, default_value_t = 85.0)]
    pub lat_clamp: f64,
    /// Icosphere order.
    #[arg(long, default_value_t = 7)]
    pub order: u32,
    #[arg(long, default_value_t = 4)]
    pub samples_per_face: usize,
    /// CSV report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternKind {
    Gnomonic,
    #[value(alias = "equirectangular")]
    Equirect,
}

#[derive(Debug, clap::Args)]
pub struct PatternArgs {
    #[arg(long, value_enum, default_value = "gnomonic")]
    pub kind: PatternKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub center_lon: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub center_lat: f64,
    #[arg(long, default_value_t = 3)]
    pub kh: usize,
    #[arg(long, default_value_t = 3)]
    pub kw: usize,
    /// Tap spacing in degrees (default: mean edge angle of the `--order` icosphere).
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 7)]
    pub order: u32,
    /// CSV path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ConvArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// ISOP operator cache; created if missing, reused otherwise.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Tap spacing in degrees (default: the mesh's mean edge angle).
    #[arg(long)]
    pub spacing: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct MiouArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub label: PathBuf,
    #[arg(long)]
    pub classes: u32,
    /// Label id excluded from scoring.
    #[arg(long)]
    pub ignore: Option<u32>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn sphere(order: u32) -> Result<Icosphere> {
    Icosphere::with_max_order(order, DEFAULT_MAX_ORDER).map_err(|e| usage(e.to_string()))
}

fn lonlat_degrees(lon: f64, lat: f64) -> Result<LonLat> {
    if !lon.is_finite() || !(-90.0..=90.0).contains(&lat) {
        return Err(usage(format!("invalid center ({lon}, {lat}) degrees")));
    }
    Ok(LonLat::from_degrees(lon, lat))
}

fn spacing_radians(deg: Option<f64>) -> Result<Option<f64>> {
    match deg {
        Some(d) if !(d > 0.0 && d.is_finite()) => Err(usage(format!("invalid spacing {d}"))),
        d => Ok(d.map(f64::to_radians)),
    }
}

fn summary_line(s: &DistortionSummary) -> String {
    format!(
        "min_aspect={:.12} max_aspect={:.12} mean_aspect={:.12} min_area_scale={:.12} max_area_scale={:.12} area_ratio={:.12}",
        s.min_aspect,
        s.max_aspect,
        s.mean_aspect,
        s.min_area_scale,
        s.max_area_scale,
        s.area_ratio()
    )
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    // Output is buffered so the command can run inside the worker pool.
    let mut buf = Vec::new();
    let result = parallel::with_threads(threads, || execute(cli.command, &mut buf));
    out.write_all(&buf).map_err(|e| Error::io("<stdout>", e))?;
    result
}

fn execute(command: Command, out: &mut Vec<u8>) -> Result<()> {
    let say = |out: &mut dyn Write, line: String| -> Result<()> {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
    };
    match command {
        Command::Build(a) => {
            let s = Icosphere::with_max_order(a.order, a.max_order)
                .map_err(|e| usage(e.to_string()))?;
            if let Some(path) = &a.out {
                write_with(path, |w| formats::write_off(w, &s))?;
            }
            say(
                out,
                format!(
                    "vertices={} faces={} edges={}",
                    s.num_vertices(),
                    s.num_faces(),
                    s.num_edges()
                ),
            )
        }
        Command::Resample(a) => {
            let s = sphere(a.order)?;
            let img = raster::decode_png(&read(&a.input)?, a.raw)?;
            if !a.any_aspect {
                img.check_panorama_aspect()
                    .map_err(|e| usage(format!("{e} (pass --any-aspect to override)")))?;
            }
            let sig = parallel::equirect_to_sphere(&img, &s, a.nearest)?;
            write(&a.out, &formats::encode_isph(&sig))?;
            say(
                out,
                format!(
                    "pixels={} vertices={} channels={}",
                    img.height() * img.width(),
                    sig.num_vertices(),
                    sig.channels()
                ),
            )
        }
        Command::Render(a) => {
            let width = a.width.unwrap_or(a.height * 2);
            if a.height < 2 || width < 2 {
                return Err(usage("render needs --height and --width of at least 2"));
            }
            let sig = formats::decode_isph(&read(&a.input)?)?;
            let s = sphere(sig.order())?;
            let mode = match a.mode {
                ModeArg::Barycentric => RenderMode::Barycentric,
                ModeArg::Nearest => RenderMode::NearestVertex,
            };
            let img = parallel::sphere_to_equirect(&sig, &s, a.height, width, mode)?;
            let depth = match a.depth {
                DepthArg::Eight => Depth::Eight,
                DepthArg::Sixteen => Depth::Sixteen,
            };
            write(&a.out, &raster::encode_png(&img, depth, a.raw)?)?;
            say(
                out,
                format!(
                    "pixels={} vertices={}",
                    a.height * width,
                    sig.num_vertices()
                ),
            )
        }
        Command::Tissot(a) => tissot(a, out),
        Command::Pattern(a) => {
            let center = lonlat_degrees(a.center_lon, a.center_lat)?;
            let spacing = match spacing_radians(a.spacing)? {
                Some(s) => s,
                None => sphere(a.order)?.mean_edge_angle(),
            };
            let pattern = match a.kind {
                PatternKind::Gnomonic => gnomonic_pattern(center, a.kh, a.kw, spacing),
                PatternKind::Equirect => equirect_pattern(center, a.kh, a.kw, spacing),
            }
            .map_err(|e| usage(e.to_string()))?;
            match &a.out {
                Some(path) => write_with(path, |w| formats::write_pattern_csv(w, &pattern)),
                None => {
                    formats::write_pattern_csv(out, &pattern).map_err(|e| Error::io("<stdout>", e))
                }
            }
        }
        Command::Conv(a) => {
            let spacing = spacing_radians(a.spacing)?;
            let sig = formats::decode_isph(&read(&a.input)?)?;
            let text = fs::read_to_string(&a.kernel).map_err(|e| Error::io(&a.kernel, e))?;
            let kernel = formats::parse_kernel(&text)?;
            let s = sphere(sig.order())?;
            let geometry =
                geosphere_core::sphereconv::operator_geometry(&s, kernel.kh, kernel.kw, spacing)?;
            let (op, cache) = match &a.cache {
                Some(path) if path.exists() => {
                    let op = formats::decode_isop(&read(path)?)?;
                    let g = op.geometry();
                    if op.order() != s.order()
                        || (g.kh, g.kw) != (geometry.kh, geometry.kw)
                        || g.spacing.to_bits() != geometry.spacing.to_bits()
                    {
                        return Err(Error::at_byte(
                            "ISOP",
                            8,
                            format!(
                                "cache {} was built for order {} {}x{} spacing {}, need order {} {}x{} spacing {}",
                                path.display(),
                                op.order(),
                                g.kh,
                                g.kw,
                                g.spacing,
                                s.order(),
                                geometry.kh,
                                geometry.kw,
                                geometry.spacing
                            ),
                        ));
                    }
                    (op, "hit")
                }
                Some(path) => {
                    let op = parallel::build_operator(&s, kernel.kh, kernel.kw, spacing)?;
                    write(path, &formats::encode_isop(&op))?;
                    (op, "miss")
                }
                None => (
                    parallel::build_operator(&s, kernel.kh, kernel.kw, spacing)?,
                    "none",
                ),
            };
            let result = parallel::convolve(&op, &sig, &kernel)?;
            write(&a.out, &formats::encode_isph(&result))?;
            say(
                out,
                format!(
                    "vertices={} taps={} channels={} cache={cache}",
                    result.num_vertices(),
                    op.taps_per_vertex(),
                    result.channels()
                ),
            )
        }
        Command::Miou(a) => {
            let pred = raster::decode_png(&read(&a.pred)?, true)?;
            let label = raster::decode_png(&read(&a.label)?, true)?;
            let report = mean_iou(&pred, &label, a.classes, a.ignore)?;
            say(
                out,
                format!(
                    "{:<8}{:>14}{:>14}{:>10}",
                    "class", "intersection", "union", "iou"
                ),
            )?;
            for (c, iou) in report.per_class.iter().enumerate() {
                let value = iou.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                say(
                    out,
                    format!(
                        "{:<8}{:>14}{:>14}{:>10}",
                        c, report.intersections[c], report.unions[c], value
                    ),
                )?;
            }
            let overall = report
                .overall
                .map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            say(out, format!("{:<8}{:>38}", "mean", overall))
        }
    }
}

fn tissot(a: TissotArgs, out: &mut Vec<u8>) -> Result<()> {
    let say = |out: &mut dyn Write, line: String| -> Result<()> {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
    };
    if a.projection == ProjectionArg::Icosphere {
        if a.samples_per_face == 0 {
            return Err(usage("--samples-per-face must be at least 1"));
        }
        let s = sphere(a.order)?;
        let summary = parallel::icosphere_summary(&s, a.samples_per_face);
        if let Some(path) = &a.out {
            let samples = parallel::icosphere_samples(&s, a.samples_per_face);
            write_with(path, |w| formats::write_tissot_csv(w, &samples))?;
        }
        return say(
            out,
            format!(
                "order={} samples={} {}",
                a.order,
                summary.count,
                summary_line(&summary)
            ),
        );
    }
    if a.lon_steps == 0 || a.lat_steps == 0 {
        return Err(usage("grid steps must be at least 1"));
    }
    if !(a.lat_clamp > 0.0 && a.lat_clamp < 90.0) {
        return Err(usage(format!(
            "--lat-clamp must be in (0, 90), got {}",
            a.lat_clamp
        )));
    }
    let kind = match a.projection {
        ProjectionArg::Equirectangular => ProjectionKind::Equirectangular,
        ProjectionArg::Mercator => ProjectionKind::Mercator,
        ProjectionArg::Gallpeters => ProjectionKind::GallPeters,
        ProjectionArg::Gnomonic => ProjectionKind::Gnomonic,
        ProjectionArg::Icosphere => unreachable!("handled above"),
    };
    let center = lonlat_degrees(a.center_lon, a.center_lat)?;
    let spec = ProjectionSpec {
        center,
        ..ProjectionSpec::new(kind)
    }
    .with_lat_clamp(a.lat_clamp.to_radians());
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let grid = tissot_grid(&spec, a.lon_steps, a.lat_steps);
    if let Some(path) = &a.out {
        write_with(path, |w| formats::write_tissot_csv(w, &grid.samples))?;
    }
    let summary = DistortionSummary::from_samples(&grid.samples);
    let max_omega = grid.samples.iter().map(|s| s.omega).fold(0.0, f64::max);
    say(
        out,
        format!(
            "samples={} skipped={} max_omega={:.6e} {}",
            grid.samples.len(),
            grid.skipped.len(),
            max_omega,
            summary_line(&summary)
        ),
    )
}

/// Parses `args` (including the program name), runs the command and returns the exit
/// status. Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().ansi().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
