//! Artifact formats: PGM rasters, CSV fields, level tables, surfaces.
//!
//! Rasters put the largest `y` in the top row. A 3D box is written as its
//! `z` slices stacked top to bottom, `z = 0` first.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conformal::Surface;
use crate::domain::RasterMask;
use crate::error::IoError;
use crate::field::{IndicatorSet, ScalarField};
use crate::grid::Grid;
use crate::levelset::LevelSetFamily;
use crate::metric::CutMetric;

fn p(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: p(path), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Raster size and the cell shown at each pixel, row-major from the top.
fn raster_layout(grid: &Grid) -> (u32, u32, Vec<usize>) {
    let [nx, ny, nz] = grid.dims();
    let nz = if grid.dim() == 3 { nz } else { 1 };
    let mut cells = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for row in 0..ny {
            for i in 0..nx {
                cells.push(grid.index([i, ny - 1 - row, k]));
            }
        }
    }
    (nx as u32, (ny * nz) as u32, cells)
}

/// Binary PGM; 16-bit samples are big-endian as the format requires.
fn encode_pgm(path: &Path, w: u32, h: u32, samples: &[u16], maxval: u16) -> Result<(), IoError> {
    let mut out = create(path)?;
    let mut bytes = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    for &v in samples {
        if maxval > 255 {
            bytes.extend_from_slice(&v.to_be_bytes());
        } else {
            bytes.push(v as u8);
        }
    }
    out.write_all(&bytes).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// 8-bit binary PGM: 255 inside the set, 0 outside.
pub fn write_mask_pgm(path: &Path, set: &IndicatorSet, grid: &Grid) -> Result<(), IoError> {
    let (w, h, cells) = raster_layout(grid);
    let samples: Vec<u16> = cells.iter().map(|&c| if set.contains(c) { 255 } else { 0 }).collect();
    encode_pgm(path, w, h, &samples, 255)
}

/// Reads a binary or ASCII PGM; pixels brighter than half scale are inside.
pub fn read_mask_pgm(path: &Path) -> Result<RasterMask, IoError> {
    let img = image::ImageReader::open(path)
        .map_err(io_err(path))?
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(|source| IoError::Image { path: p(path), source })?
        .to_luma16();
    let (width, height) = img.dimensions();
    Ok(RasterMask {
        width: width as usize,
        height: height as usize,
        inside: img.pixels().map(|px| px.0[0] > u16::MAX / 2).collect(),
    })
}

/// Affine scale of a 16-bit field raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterScale {
    pub min: f64,
    pub max: f64,
    /// Set when every finite value is equal; the raster is then all zero.
    pub constant: bool,
}

/// Writes `base.csv`, `base.pgm` (16-bit) and `base.json` (the scale).
/// Non-finite values are written as empty CSV cells and black pixels.
pub fn emit_field(field: &ScalarField, grid: &Grid, base: &Path) -> Result<RasterScale, IoError> {
    let v = field.as_slice();
    let finite = v.iter().copied().filter(|x| x.is_finite());
    let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (min, max) = if min <= max { (min, max) } else { (0.0, 0.0) };
    let scale = RasterScale {
        min,
        max,
        constant: min == max,
    };
    write_field_csv(field, grid, &base.with_extension("csv"))?;
    let (w, h, cells) = raster_layout(grid);
    let mut samples = Vec::with_capacity(cells.len());
    for &c in &cells {
        let x = v[c];
        let level = if !x.is_finite() || scale.constant {
            0u16
        } else {
            ((x - min) / (max - min) * 65535.0).round().clamp(0.0, 65535.0) as u16
        };
        samples.push(level);
    }
    encode_pgm(&base.with_extension("pgm"), w, h, &samples, u16::MAX)?;
    let json_path = base.with_extension("json");
    let mut out = create(&json_path)?;
    serde_json::to_writer_pretty(&mut out, &scale).map_err(|source| IoError::Json {
        path: p(&json_path),
        source,
    })?;
    out.flush().map_err(io_err(&json_path))?;
    Ok(scale)
}

/// Reads back a field written by [`emit_field`] from its raster and sidecar.
pub fn read_field_pgm(grid: &Grid, base: &Path) -> Result<ScalarField, IoError> {
    let json_path = base.with_extension("json");
    let text = std::fs::read_to_string(&json_path).map_err(io_err(&json_path))?;
    let scale: RasterScale = serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: p(&json_path),
        source,
    })?;
    let pgm = base.with_extension("pgm");
    let img = image::ImageReader::open(&pgm)
        .map_err(io_err(&pgm))?
        .with_guessed_format()
        .map_err(io_err(&pgm))?
        .decode()
        .map_err(|source| IoError::Image { path: p(&pgm), source })?
        .to_luma16();
    let (w, h, cells) = raster_layout(grid);
    if img.dimensions() != (w, h) {
        return Err(IoError::Format {
            path: p(&pgm),
            msg: format!("raster is {:?}, grid needs {w}x{h}", img.dimensions()),
        });
    }
    let mut values = vec![0.0; grid.len()];
    for (px, &c) in img.pixels().zip(&cells) {
        values[c] = scale.min + (scale.max - scale.min) * px.0[0] as f64 / 65535.0;
    }
    Ok(ScalarField::from_vec(grid, values))
}

/// One row per cell: lattice coordinates along each axis, then the value.
pub fn write_field_csv(field: &ScalarField, grid: &Grid, path: &Path) -> Result<(), IoError> {
    let csv_err = |source| IoError::Csv { path: p(path), source };
    let mut w = csv::Writer::from_writer(create(path)?);
    let axes = ["i", "j", "k"];
    let mut header: Vec<&str> = axes[..grid.dim()].to_vec();
    header.push("value");
    w.write_record(&header).map_err(csv_err)?;
    for c in 0..grid.len() {
        let l = grid.lattice(c);
        let mut rec: Vec<String> = l[..grid.dim()].iter().map(|v| v.to_string()).collect();
        let v = field.get(c);
        rec.push(if v.is_finite() { format!("{v:?}") } else { String::new() });
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a field written by [`write_field_csv`] onto `grid`; cells absent
/// from the file are NaN.
pub fn read_field_csv(grid: &Grid, path: &Path) -> Result<ScalarField, IoError> {
    let csv_err = |source| IoError::Csv { path: p(path), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut values = vec![f64::NAN; grid.len()];
    let d = grid.dim();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = |msg: &str| IoError::Format {
            path: p(path),
            msg: format!("row {}: {msg}", line + 2),
        };
        if rec.len() != d + 1 {
            return Err(bad("wrong column count"));
        }
        let mut l = [0i64; 3];
        for a in 0..d {
            l[a] = rec[a].trim().parse().map_err(|_| bad("bad lattice index"))?;
        }
        let c = grid.from_lattice(l).ok_or_else(|| bad("cell outside grid"))?;
        let s = rec[d].trim();
        values[c] = if s.is_empty() {
            f64::NAN
        } else {
            s.parse().map_err(|_| bad("bad value"))?
        };
    }
    Ok(ScalarField::from_vec(grid, values))
}

/// `levels.csv`: level index, level, weighted perimeter, cell count.
pub fn write_levels_csv(fam: &LevelSetFamily, metric: &CutMetric, path: &Path) -> Result<(), IoError> {
    let csv_err = |source| IoError::Csv { path: p(path), source };
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["k", "t", "perimeter", "cells"]).map_err(csv_err)?;
    for (k, &t) in fam.levels().iter().enumerate() {
        let per = metric.to_real(metric.cut_units(fam.set(k), None));
        w.write_record([
            k.to_string(),
            format!("{t:?}"),
            format!("{per:?}"),
            fam.set(k).count().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes the level table and one mask per level into `dir`.
pub fn dump_family(fam: &LevelSetFamily, metric: &CutMetric, dir: &Path) -> Result<(), IoError> {
    write_levels_csv(fam, metric, &dir.join("levels.csv"))?;
    for k in 0..fam.len() {
        write_mask_pgm(&dir.join(format!("level_{k:04}.pgm")), fam.set(k), metric.grid())?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

/// Plane curve from `x,y` rows; a header row is skipped when it does not parse.
pub fn read_polyline_csv(path: &Path, closed: bool) -> Result<Surface, IoError> {
    let csv_err = |source| IoError::Csv { path: p(path), source };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse).collect();
        match parsed {
            Ok(v) if v.len() == 2 => points.push([v[0], v[1]]),
            Err(_) if line == 0 => continue,
            _ => {
                return Err(IoError::Format {
                    path: p(path),
                    msg: format!("row {} is not an x,y pair", line + 1),
                })
            }
        }
    }
    Ok(Surface::Polyline { points, closed })
}

/// Triangle mesh in OFF format; polygons with more than three vertices are
/// fanned into triangles.
pub fn read_off(path: &Path) -> Result<Surface, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |msg: String| IoError::Format { path: p(path), msg };
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("OFF") {
        return Err(bad("missing OFF header".into()));
    }
    let mut next_num = |what: &str| -> Result<f64, IoError> {
        tokens
            .next()
            .ok_or_else(|| bad(format!("unexpected end of file reading {what}")))?
            .parse::<f64>()
            .map_err(|_| bad(format!("bad number in {what}")))
    };
    let nv = next_num("vertex count")? as usize;
    let nf = next_num("face count")? as usize;
    let _edges = next_num("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push([next_num("vertex")?, next_num("vertex")?, next_num("vertex")?]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for f in 0..nf {
        let k = next_num("face")? as usize;
        let idx: Vec<usize> = (0..k)
            .map(|_| next_num("face").map(|v| v as usize))
            .collect::<Result<_, _>>()?;
        if k < 3 || idx.iter().any(|&i| i >= nv) {
            return Err(bad(format!("face {f} is invalid")));
        }
        for j in 1..k - 1 {
            triangles.push([idx[0], idx[j], idx[j + 1]]);
        }
    }
    Ok(Surface::TriangleMesh { vertices, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = build_domain(&Shape::unit_disk(), 0.125, 3).unwrap();
        let g = d.grid();
        let u = ScalarField::from_fn(g, |c| g.center(c)[0] * 3.0 - 1.0);
        let base = dir.path().join("u");
        let s = emit_field(&u, g, &base).unwrap();
        let back = read_field_pgm(g, &base).unwrap();
        let tol = (s.max - s.min) / 65535.0;
        for c in 0..g.len() {
            assert!((back.get(c) - u.get(c)).abs() <= tol);
        }
        let csv = read_field_csv(g, &base.with_extension("csv")).unwrap();
        assert_eq!(csv, u);
    }

    #[test]
    fn constant_field_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let d = build_domain(&Shape::unit_disk(), 0.25, 3).unwrap();
        let u = ScalarField::constant(d.grid(), 2.5);
        let s = emit_field(&u, d.grid(), &dir.path().join("c")).unwrap();
        assert!(s.constant && s.min == 2.5);
        let back = read_field_pgm(d.grid(), &dir.path().join("c")).unwrap();
        assert!(back.as_slice().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn mask_orientation_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = build_domain(&Shape::unit_disk(), 0.25, 3).unwrap();
        let g = d.grid();
        let top = IndicatorSet::from_fn(g, |c| g.center(c)[1] > 0.5);
        let path = dir.path().join("m.pgm");
        write_mask_pgm(&path, &top, g).unwrap();
        let m = read_mask_pgm(&path).unwrap();
        assert_eq!((m.width, m.height), (g.dims()[0], g.dims()[1]));
        assert!(m.inside[0]);
        assert!(!m.inside[m.inside.len() - 1]);
    }

    #[test]
    fn ascii_pgm_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        std::fs::write(&path, "P2\n3 2\n255\n0 255 0\n255 255 255\n").unwrap();
        let m = read_mask_pgm(&path).unwrap();
        assert_eq!(m.inside, vec![false, true, false, true, true, true]);
    }

    #[test]
    fn off_and_polyline_readers() {
        let dir = tempfile::tempdir().unwrap();
        let off = dir.path().join("q.off");
        std::fs::write(&off, "OFF\n# square\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n").unwrap();
        match read_off(&off).unwrap() {
            Surface::TriangleMesh { triangles, .. } => assert_eq!(triangles.len(), 2),
            _ => panic!(),
        }
        let csv = dir.path().join("c.csv");
        std::fs::write(&csv, "x,y\n0,0\n1,0\n1,1\n").unwrap();
        match read_polyline_csv(&csv, false).unwrap() {
            Surface::Polyline { points, .. } => assert_eq!(points.len(), 3),
            _ => panic!(),
        }
        std::fs::write(&csv, "0,0\n1\n").unwrap();
        assert!(matches!(read_polyline_csv(&csv, false), Err(IoError::Format { .. } | IoError::Csv { .. })));
    }
}
