//! Result files. Every file is staged in a temporary file next to its destination and
//! renamed into place, so a failed run never leaves a partial file behind.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use mechopt_core::optimizer::TracePoint;
use mechopt_core::workspace::{PointEvaluation, SingularityPoint};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Pretty JSON with every float in full-precision exponent form.
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PreciseFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub const WORKSPACE_MAP_HEADER: &str = "alpha_rad,beta_rad,rho1_m,rho2_m,dexterity,covered,det_j";
pub const TRACE_HEADER: &str = "eval_index,best_f";
pub const SINGULARITY_HEADER: &str = "alpha_rad,beta_rad,det_j";

/// One row per grid point; lengths are `NaN` where a leg is degenerate.
pub fn workspace_map_csv(points: &[PointEvaluation]) -> String {
    let mut out = String::from(WORKSPACE_MAP_HEADER);
    out.push('\n');
    for p in points {
        let (r1, r2) = p.lengths.map_or((f64::NAN, f64::NAN), |l| (l.rho1, l.rho2));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(p.tilt.alpha),
            fmt_f64(p.tilt.beta),
            fmt_f64(r1),
            fmt_f64(r2),
            fmt_f64(p.dexterity),
            u8::from(p.covered),
            fmt_f64(p.det_j)
        );
    }
    out
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for t in trace {
        let _ = writeln!(out, "{},{}", t.eval, fmt_f64(t.best_f));
    }
    out
}

pub fn singularity_csv(points: &[SingularityPoint]) -> String {
    let mut out = String::from(SINGULARITY_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(p.tilt.alpha),
            fmt_f64(p.tilt.beta),
            fmt_f64(p.det_j)
        );
    }
    out
}
