//! File output: atomic writes, the time-series CSV, and serde helpers for
//! floats that may be infinite.

use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use super::run::Row;
use crate::analysis::Check;
use crate::error::Result;

/// Writes `path` by filling a temporary file in the same directory and
/// renaming it into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir)?;
    let mut w = BufWriter::new(tmp);
    fill(&mut w)?;
    let tmp = w.into_inner().map_err(|e| e.into_error())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// Serializes an `f64` as a number, or as `"inf"`, `"-inf"`, `"nan"`.
pub mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::fmt_float(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other}"))),
            },
        }
    }
}

/// [`float`] for `Option<f64>`, with `None` as `null`.
pub mod opt_float {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::float::serialize(x, s),
            None => s.serialize_none(),
        }
    }
}

pub const CSV_HEADER: &str = "n,t,l2_sq,h1_sq,h2_sq,l3,fp_iters,energy_residual,\
verdict_l2,verdict_h1,verdict_lemma,verdict_y1,verdict_bound,y1,y2,y_plus,slack_min";

fn flag(c: Option<&Check>) -> &'static str {
    match c {
        Some(c) if c.ok => "true",
        Some(_) => "false",
        None => "na",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".into(), fmt_float)
}

/// One CSV line (without newline) for `row`.
pub fn csv_line(row: &Row) -> String {
    let nb = &row.norms;
    let mut s = String::new();
    write!(
        s,
        "{},{},{},{},{},{},{},{}",
        row.n,
        fmt_float(row.t),
        fmt_float(nb.l2_sq),
        fmt_float(nb.h1_sq),
        fmt_float(nb.h2_sq),
        fmt_float(nb.l3),
        row.fp_iters,
        fmt_float(row.energy_residual),
    )
    .expect("writing to a String");
    let v = row.verdict.as_ref();
    for c in [
        v.map(|v| &v.l2_recurrence),
        v.map(|v| &v.h1_recurrence),
        v.and_then(|v| v.lemma_hypotheses.as_ref()),
        v.and_then(|v| v.y1_membership.as_ref()),
        v.and_then(|v| v.bound.as_ref()),
    ] {
        s.push(',');
        s.push_str(flag(c));
    }
    for x in
        [v.and_then(|v| v.cubic.y1), v.and_then(|v| v.cubic.y2), v.map(|v| v.cubic.y_plus), v.map(|v| v.slack_min())]
    {
        s.push(',');
        s.push_str(&opt(x));
    }
    s
}

pub fn write_csv(w: &mut dyn Write, rows: &[Row]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", csv_line(row))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "float")] f64);

    #[test]
    fn non_finite_round_trip() {
        for v in [f64::INFINITY, f64::NEG_INFINITY, 0.1, 1e-300] {
            let s = serde_json::to_string(&W(v)).unwrap();
            assert_eq!(serde_json::from_str::<W>(&s).unwrap().0, v);
        }
        assert_eq!(serde_json::to_string(&W(f64::INFINITY)).unwrap(), "\"inf\"");
    }

    #[test]
    fn shortest_decimals() {
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(1.0), "1.0");
        for v in [1.0 / 3.0, 124.0254507542079, 6.02e-23] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, |w| Ok(w.write_all(b"hello")?)).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"hello");
        let err = write_atomic(&p, |w| {
            w.write_all(b"partial")?;
            Err(crate::error::invalid("interrupted"))
        });
        assert!(err.is_err());
        assert_eq!(std::fs::read(&p).unwrap(), b"hello");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
