//! Artifact writers. Every number goes out with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use flatflow_core::flow::StepReport;
use flatflow_core::geometry::snapshot;
use flatflow_core::FlowState;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats are written as `{:.16e}`.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

/// One row per step.
pub fn write_steps_csv(path: &Path, reports: &[StepReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "step",
        "time",
        "perimeter",
        "area",
        "dissipation",
        "lambda",
        "el_residual",
        "el_residual_start",
        "inner_iters",
        "max_displacement",
        "accepted",
    ])?;
    for r in reports {
        w.write_record([
            r.step.to_string(),
            num(r.time),
            num(r.perimeter_after),
            num(r.area_after),
            num(r.dissipation.value),
            num(r.lambda),
            num(r.el_residual),
            num(r.el_residual_start),
            r.inner_iters.to_string(),
            num(r.max_displacement()),
            r.accepted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `snapshots/curve_<step>.txt` for every sampled state.
pub fn write_snapshots(dir: &Path, states: &[FlowState]) -> Result<(), CliError> {
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps)?;
    for s in states {
        fs::write(snaps.join(format!("curve_{}.txt", s.step)), snapshot::write_region(&s.region))?;
    }
    Ok(())
}

/// Writes a CSV with a header and pre-formatted rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
        }
        let s = to_json(&S {
            a: 0.1,
            b: vec![1.0, f64::NAN],
            c: None,
        })
        .unwrap();
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("1.0000000000000000e0"));
        assert!(s.contains("null"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
