//! File formats: 1-D signal CSV, PGM images, curve/surface CSV with a JSON
//! sidecar, and the result tables.
//!
//! Floats are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diffusion::ParamComponents;
use crate::error::{Error, Result};
use crate::geometry::{ParamSurface, SurfaceKind};
use crate::scalespace::LocalScaleSet;
use crate::signal::{Boundary, SampledField};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Metadata stored next to a data file as `<stem>.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SurfaceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub truth: BTreeMap<String, f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn read_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    let p = sidecar_path(path);
    if !p.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&p)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Error::format(format!("{}: {e}", p.display())))
}

pub fn write_sidecar(path: &Path, s: &Sidecar) -> Result<()> {
    write_json(&sidecar_path(path), s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::other(e.to_string())),
            _ => Error::format(e.to_string()),
        })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::format(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::format(format!("{}: row {}: '{s}' is not a number", path.display(), line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format(format!("{}: no data rows", path.display())));
    }
    Ok(Table { header, rows })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::WriterBuilder::new()
        .from_path(path)
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Uniform spacing of sorted coordinates; `None` if not uniform.
fn uniform_spacing(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(h > 0.0) {
        return None;
    }
    xs.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-6 * h).then_some(h)
}

/// 1-D signal from a CSV with header `x,value` and uniformly spaced `x`.
///
/// The boundary policy comes from `boundary`, else from the sidecar, else
/// defaults to clamp.
pub fn read_signal_csv(path: &Path, boundary: Option<Boundary>) -> Result<SampledField> {
    let t = read_table(path)?;
    if t.header != ["x", "value"] {
        return Err(Error::format(format!(
            "{}: expected header 'x,value', got '{}'",
            path.display(),
            t.header.join(",")
        )));
    }
    let xs: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    let h = uniform_spacing(&xs).ok_or_else(|| Error::format(format!("{}: x must be increasing and uniformly spaced", path.display())))?;
    let b = match boundary {
        Some(b) => b,
        None => read_sidecar(path)?.and_then(|s| s.boundary).unwrap_or(Boundary::Clamp),
    };
    let values = t.rows.iter().map(|r| r[1]).collect();
    Ok(SampledField::new_1d(values, h, b)?.with_origin([xs[0], 0.0]))
}

pub fn write_signal_csv(path: &Path, field: &SampledField, truth: &BTreeMap<String, f64>) -> Result<()> {
    if field.dims() != 1 {
        return Err(Error::contract("signal CSV holds 1-D fields only"));
    }
    let mut w = csv_writer(path)?;
    w.write_record(["x", "value"]).map_err(csv_err)?;
    for (i, v) in field.values().iter().enumerate() {
        w.write_record([fmt_f64(field.coords(i)[0]), fmt_f64(*v)]).map_err(csv_err)?;
    }
    w.flush()?;
    write_sidecar(
        path,
        &Sidecar {
            boundary: Some(field.boundary()),
            truth: truth.clone(),
            ..Sidecar::default()
        },
    )
}

/// Plain (`P2`) PGM image rescaled to `[0, 1]` by its maxval.
pub fn read_pgm(path: &Path, h: f64, boundary: Boundary) -> Result<SampledField> {
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let bad = |what: &str| Error::format(format!("{}: {what}", path.display()));
    if tokens.next() != Some("P2") {
        return Err(bad("expected plain PGM magic 'P2'"));
    }
    let mut num = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(&format!("missing or invalid {what}")))
    };
    let (nx, ny, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if nx == 0 || ny == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("invalid image header"));
    }
    let mut values = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        let v = num("pixel")?;
        if v > maxval {
            return Err(bad("pixel exceeds maxval"));
        }
        values.push(v as f64 / maxval as f64);
    }
    if tokens.next().is_some() {
        return Err(bad("trailing data after pixels"));
    }
    SampledField::new_2d(values, nx, ny, h, boundary)
}

pub fn write_pgm(path: &Path, values: &[f64], nx: usize, ny: usize, maxval: u16) -> Result<()> {
    if values.len() != nx * ny {
        return Err(Error::contract("pixel count mismatch"));
    }
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "P2\n{nx} {ny}\n{maxval}")?;
    for row in values.chunks(nx) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * maxval as f64).round() as u32).to_string())
            .collect();
        writeln!(f, "{}", line.join(" "))?;
    }
    f.flush()?;
    Ok(())
}

fn column_block(header: &[String], prefix: &str) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1.. {
        match header.iter().position(|h| *h == format!("{prefix}{k}")) {
            Some(i) => out.push(i),
            None => break,
        }
    }
    out
}

/// Sampled surface from a CSV with header `r1..rd,x1..xn[,w]` and a sidecar
/// giving `d`, `n`, `closed` and `kind`. Rows may come in any order.
pub fn read_curve(path: &Path) -> Result<ParamSurface> {
    let side = read_sidecar(path)?
        .ok_or_else(|| Error::format(format!("{}: missing sidecar {}", path.display(), sidecar_path(path).display())))?;
    let t = read_table(path)?;
    let rcols = column_block(&t.header, "r");
    let xcols = column_block(&t.header, "x");
    let wcol = t.header.iter().position(|h| h == "w");
    let d = side.d.unwrap_or(rcols.len());
    let n = side.n.unwrap_or(xcols.len());
    let expected = rcols.len() + xcols.len() + wcol.is_some() as usize;
    if rcols.len() != d || xcols.len() != n || t.header.len() != expected || d == 0 {
        return Err(Error::format(format!(
            "{}: header '{}' does not match d={d}, n={n}",
            path.display(),
            t.header.join(",")
        )));
    }
    let closed = side.closed.unwrap_or(false);
    let kind = side.kind.unwrap_or(SurfaceKind::GeneralParametric);

    // lattice per axis from the distinct parameter values
    let mut shape = Vec::with_capacity(d);
    let mut origin = Vec::with_capacity(d);
    let mut h_r = None::<f64>;
    for &c in &rcols {
        let mut v: Vec<f64> = t.rows.iter().map(|r| r[c]).collect();
        v.sort_by(f64::total_cmp);
        let span = v[v.len() - 1] - v[0];
        let tol = 1e-9 * span.abs().max(1.0);
        v.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let h = uniform_spacing(&v).ok_or_else(|| Error::format(format!("{}: parameter axis is not a uniform lattice", path.display())))?;
        if let Some(h0) = h_r {
            if (h - h0).abs() > 1e-6 * h0 {
                return Err(Error::format(format!("{}: parameter spacing differs between axes", path.display())));
            }
        }
        h_r = Some(h);
        shape.push(v.len());
        origin.push(v[0]);
    }
    let h_r = h_r.unwrap();
    let count: usize = shape.iter().product();
    if count != t.rows.len() {
        return Err(Error::format(format!(
            "{}: {} rows do not fill a {shape:?} lattice",
            path.display(),
            t.rows.len()
        )));
    }
    let strides = crate::geometry::strides(&shape);
    let mut slot: Vec<Option<usize>> = vec![None; count];
    for (row_i, row) in t.rows.iter().enumerate() {
        let mut idx = 0;
        for (k, &c) in rcols.iter().enumerate() {
            let j = ((row[c] - origin[k]) / h_r).round() as usize;
            idx += j * strides[k];
        }
        if slot[idx].replace(row_i).is_some() {
            return Err(Error::format(format!(
                "{}: duplicate lattice point in row {}",
                path.display(),
                row_i + 1
            )));
        }
    }
    let order: Vec<usize> = slot.into_iter().map(|s| s.unwrap()).collect();
    let rows = &t.rows;
    let samples: Vec<f64> = order.iter().flat_map(|&r| xcols.iter().map(move |&c| rows[r][c])).collect();
    let mut s = ParamSurface::new(d, n, shape, h_r, origin, samples, kind, closed)?;
    if let Some(wc) = wcol {
        s = s.with_explicit_weights(order.iter().map(|&r| t.rows[r][wc]).collect())?;
    }
    Ok(s)
}

pub fn write_curve(path: &Path, s: &ParamSurface, truth: &BTreeMap<String, f64>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = (1..=s.d()).map(|k| format!("r{k}")).collect();
    header.extend((1..=s.n()).map(|k| format!("x{k}")));
    if s.explicit_weights().is_some() {
        header.push("w".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..s.len() {
        let mut rec: Vec<String> = s.param(i).into_iter().map(fmt_f64).collect();
        rec.extend(s.point(i).iter().map(|v| fmt_f64(*v)));
        if let Some(wt) = s.explicit_weights() {
            rec.push(fmt_f64(wt[i]));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    write_sidecar(
        path,
        &Sidecar {
            d: Some(s.d()),
            n: Some(s.n()),
            closed: Some(s.closed()),
            kind: Some(s.kind()),
            truth: truth.clone(),
            ..Sidecar::default()
        },
    )
}

/// Curve samples of a diffused parametrization, on the `[0,1]^d` lattice.
pub fn write_components(path: &Path, p: &ParamComponents) -> Result<()> {
    let h = p.h();
    let samples: Vec<f64> = (0..p.len()).flat_map(|i| p.point(i)).collect();
    let s = ParamSurface::new(
        p.d,
        p.n(),
        p.shape.clone(),
        h,
        vec![0.0; p.d],
        samples,
        SurfaceKind::GeneralParametric,
        p.closed,
    )?;
    write_curve(path, &s, &BTreeMap::new())
}

/// Points from any CSV with columns `x1..xn` (other columns ignored except
/// an optional `w`).
pub fn read_points(path: &Path) -> Result<(usize, Vec<f64>, Option<Vec<f64>>)> {
    let t = read_table(path)?;
    let xcols = column_block(&t.header, "x");
    if xcols.is_empty() {
        return Err(Error::format(format!("{}: no x1.. columns", path.display())));
    }
    let xc = &xcols;
    let pts = t.rows.iter().flat_map(|r| xc.iter().map(move |&c| r[c])).collect();
    let w = t
        .header
        .iter()
        .position(|h| h == "w")
        .map(|c| t.rows.iter().map(|r| r[c]).collect());
    Ok((xcols.len(), pts, w))
}

pub fn write_points(path: &Path, pts: &[[f64; 2]], truth: &BTreeMap<String, f64>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x1", "x2"]).map_err(csv_err)?;
    for p in pts {
        w.write_record([fmt_f64(p[0]), fmt_f64(p[1])]).map_err(csv_err)?;
    }
    w.flush()?;
    write_sidecar(
        path,
        &Sidecar {
            n: Some(2),
            truth: truth.clone(),
            ..Sidecar::default()
        },
    )
}

pub fn write_scales_csv(path: &Path, sets: &[LocalScaleSet]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["point_id", "tau", "t", "S", "d2S", "visible", "separated"])
        .map_err(csv_err)?;
    for set in sets {
        for e in &set.entries {
            w.write_record([
                set.point.to_string(),
                fmt_f64(e.tau),
                fmt_f64(e.t),
                fmt_f64(e.value),
                fmt_f64(e.curvature),
                e.visible.to_string(),
                e.separated.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_decay_csv(path: &Path, measures: &[(usize, f64)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["N", "measure"]).map_err(csv_err)?;
    for (n, m) in measures {
        w.write_record([n.to_string(), fmt_f64(*m)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Generic numeric table with a fixed header.
pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
