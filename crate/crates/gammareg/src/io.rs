//! CSV formats for sampled functions, envelopes, facet dumps, and
//! measurement curves.
//!
//! All floating-point fields are printed with 17 significant digits so
//! that written files parse back to bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::RatioCurve;
use crate::envelope::hull3d::Facet;
use crate::envelope::{EnvelopeResult1D, EnvelopeResult2D};
use crate::error::{Error, Result};
use crate::gridfn::{Grid1D, Grid2D, SampledFn1D, SampledFn2D};

/// Render a float with 17 significant digits (round-trip safe).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_field(s: &str, line_no: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(format!("line {line_no}: cannot parse number from {s:?}")))
}

fn split_line(line: &str, want: usize, line_no: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != want {
        return Err(Error::parse(format!(
            "line {line_no}: expected {want} fields, got {}",
            fields.len()
        )));
    }
    Ok(fields)
}

fn check_header(line: Option<&str>, expect: &str) -> Result<()> {
    match line {
        Some(h) if h.trim() == expect => Ok(()),
        Some(h) => Err(Error::parse(format!(
            "expected header {expect:?}, got {:?}",
            h.trim()
        ))),
        None => Err(Error::parse("empty file")),
    }
}

/// Serialize a 1D sampled function as `x,value` rows in ascending x.
pub fn fn1d_to_csv(f: &SampledFn1D) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        let _ = writeln!(out, "{},{}", fmt_g17(*x), fmt_g17(*v));
    }
    out
}

/// Parse a 1D sampled function. Rejects unsorted or duplicate abscissae.
pub fn fn1d_from_csv(text: &str) -> Result<SampledFn1D> {
    let mut lines = text.lines();
    check_header(lines.next(), "x,value")?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = k + 2;
        let fields = split_line(line, 2, line_no)?;
        xs.push(parse_field(fields[0], line_no)?);
        vs.push(parse_field(fields[1], line_no)?);
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parse("abscissae must be strictly increasing"));
    }
    let grid = Grid1D::new(xs).map_err(|e| Error::parse(e.to_string()))?;
    SampledFn1D::new(grid, vs).map_err(|e| Error::parse(e.to_string()))
}

/// Serialize a 2D sampled function: `x,y,value`, masked nodes only,
/// row-major (x outer, y inner).
pub fn fn2d_to_csv(f: &SampledFn2D) -> String {
    let mut out = String::from("x,y,value\n");
    for (((_, _), (x, y)), v) in f.grid().masked_nodes().zip(f.values()) {
        let _ = writeln!(out, "{},{},{}", fmt_g17(x), fmt_g17(y), fmt_g17(*v));
    }
    out
}

/// Parse a 2D sampled function. The node set defines the mask; rows must
/// arrive in row-major order with no duplicates.
pub fn fn2d_from_csv(text: &str) -> Result<SampledFn2D> {
    let mut lines = text.lines();
    check_header(lines.next(), "x,y,value")?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = k + 2;
        let fields = split_line(line, 3, line_no)?;
        rows.push((
            parse_field(fields[0], line_no)?,
            parse_field(fields[1], line_no)?,
            parse_field(fields[2], line_no)?,
        ));
    }
    if rows.is_empty() {
        return Err(Error::parse("no data rows"));
    }
    if rows
        .windows(2)
        .any(|w| (w[0].0, w[0].1) >= (w[1].0, w[1].1))
    {
        return Err(Error::parse(
            "rows must be strictly increasing in (x, y) row-major order",
        ));
    }
    let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    xs.dedup();
    let mut ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let xg = Grid1D::new(xs).map_err(|e| Error::parse(e.to_string()))?;
    let yg = Grid1D::new(ys).map_err(|e| Error::parse(e.to_string()))?;
    let mut mask = vec![false; xg.len() * yg.len()];
    let mut values = Vec::with_capacity(rows.len());
    for &(x, y, v) in &rows {
        let i = xg.find_node(x).expect("x came from the node set");
        let j = yg
            .find_node(y)
            .ok_or_else(|| Error::parse("internal: y node lookup failed"))?;
        mask[i * yg.len() + j] = true;
        values.push(v);
    }
    // Geometry errors (fewer than 3 non-collinear nodes) pass through
    // untouched so callers can distinguish them from parse failures.
    let grid = Grid2D::from_mask(xg, yg, mask)?;
    SampledFn2D::new(grid, values)
}

/// Envelope output: `x,value,contact` with contact as 0/1.
pub fn envelope1d_to_csv(env: &EnvelopeResult1D) -> String {
    let mut out = String::from("x,value,contact\n");
    let f = &env.envelope;
    for ((x, v), c) in f.grid().nodes().iter().zip(f.values()).zip(&env.contact) {
        let _ = writeln!(out, "{},{},{}", fmt_g17(*x), fmt_g17(*v), u8::from(*c));
    }
    out
}

/// Envelope output: `x,y,value,contact`, masked nodes only, row-major.
pub fn envelope2d_to_csv(env: &EnvelopeResult2D) -> String {
    let mut out = String::from("x,y,value,contact\n");
    let f = &env.envelope;
    for ((((_, _), (x, y)), v), c) in f
        .grid()
        .masked_nodes()
        .zip(f.values())
        .zip(&env.contact)
    {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_g17(x),
            fmt_g17(y),
            fmt_g17(*v),
            u8::from(*c)
        );
    }
    out
}

/// Facet dump for debugging: `i,j,k,nx,ny,nz,offset`.
pub fn facets_to_csv(facets: &[Facet]) -> String {
    let mut out = String::from("i,j,k,nx,ny,nz,offset\n");
    for f in facets {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.indices[0],
            f.indices[1],
            f.indices[2],
            fmt_g17(f.normal[0]),
            fmt_g17(f.normal[1]),
            fmt_g17(f.normal[2]),
            fmt_g17(f.offset)
        );
    }
    out
}

/// Measurement curve: `t,gap0,supdist,ratio,bound,xstar`.
pub fn curve_to_csv(curve: &RatioCurve) -> String {
    let mut out = String::from("t,gap0,supdist,ratio,bound,xstar\n");
    for s in &curve.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_g17(s.t),
            fmt_g17(s.gap0),
            fmt_g17(s.supdist),
            fmt_g17(s.ratio),
            fmt_g17(s.bound),
            fmt_g17(s.xstar)
        );
    }
    out
}

/// Parse a modulus table: header `t,phi`, pairs in ascending t.
pub fn phi_table_from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    check_header(lines.next(), "t,phi")?;
    let mut pairs = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = k + 2;
        let fields = split_line(line, 2, line_no)?;
        pairs.push((
            parse_field(fields[0], line_no)?,
            parse_field(fields[1], line_no)?,
        ));
    }
    Ok(pairs)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::from)
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fn1d_round_trip_is_exact() {
        let g = Grid1D::uniform(-1.0, 1.0, 7).unwrap();
        let f = SampledFn1D::from_fn(g, |x| (x * 3.1).sin() / 3.0).unwrap();
        let back = fn1d_from_csv(&fn1d_to_csv(&f)).unwrap();
        assert_eq!(back.grid().nodes(), f.grid().nodes());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn fn1d_rejects_malformed() {
        assert!(fn1d_from_csv("x,value\n1.0\n").is_err());
        assert!(fn1d_from_csv("bad,header\n0,1\n").is_err());
        assert!(fn1d_from_csv("x,value\n0,1\n0,2\n").is_err()); // duplicate x
        assert!(fn1d_from_csv("x,value\n1,1\n0,2\n").is_err()); // unsorted
        assert!(fn1d_from_csv("x,value\n0,abc\n1,2\n").is_err());
    }

    #[test]
    fn fn2d_round_trip_preserves_mask() {
        let xs = Grid1D::uniform(-1.0, 1.0, 7).unwrap();
        let ys = Grid1D::uniform(-1.0, 1.0, 7).unwrap();
        let g = Grid2D::unit_disk(xs, ys, 1e-12).unwrap();
        let f = SampledFn2D::from_fn(g, |x, y| x * x - y).unwrap();
        let back = fn2d_from_csv(&fn2d_to_csv(&f)).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().masked_count(), f.grid().masked_count());
    }

    #[test]
    fn fn2d_collinear_is_geometry_error() {
        let text = "x,y,value\n0,0,1\n1,1,2\n2,2,3\n";
        assert!(matches!(fn2d_from_csv(text), Err(Error::Geometry(_))));
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2.0_f64.powi(-40), -std::f64::consts::PI] {
            let s = fmt_g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
