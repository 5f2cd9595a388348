//! Heatmaps (16-bit PGM with a JSON sidecar), CSV tables and Matrix Market
//! dumps.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{GridDomain, Neighbor};
use crate::geometry::Point;
use crate::sparse::CsrMatrix;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("not a 16-bit binary PGM: {0}")]
    BadPgm(String),
    #[error("log scaling needs a positive value, field has none")]
    NoPositiveValues,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    /// Natural logarithm; non-positive values map to the lowest level.
    Log,
}

/// How pixel levels map back to field values.
///
/// Level 0 marks lattice cells outside the interior. An interior value `v`
/// has level `1 + round((s(v) − min) / (max − min) · 65534)` where `s` is
/// the identity or `ln`, clamped to `[1, 65535]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub width: usize,
    pub height: usize,
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub h: f64,
    /// Coordinates of the centre of the first pixel of the last row.
    pub origin: Point,
    pub layout: String,
}

impl Sidecar {
    /// Field value represented by an interior pixel level.
    pub fn decode(&self, level: u16) -> Option<f64> {
        if level == 0 {
            return None;
        }
        let s = self.min + (level as f64 - 1.0) / 65534.0 * (self.max - self.min);
        Some(match self.scale {
            Scale::Linear => s,
            Scale::Log => s.exp(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub pixels: Vec<u16>,
    pub sidecar: Sidecar,
}

impl Heatmap {
    /// Render a nodal field on the lattice of `grid`, top row first.
    pub fn from_field(grid: &GridDomain, values: &[f64], scale: Scale) -> Result<Heatmap, IoError> {
        if values.len() != grid.interior_count() {
            return Err(IoError::LengthMismatch {
                got: values.len(),
                expected: grid.interior_count(),
            });
        }
        let transformed: Vec<f64> = match scale {
            Scale::Linear => values.to_vec(),
            Scale::Log => {
                let floor = values
                    .iter()
                    .copied()
                    .filter(|v| *v > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if !floor.is_finite() {
                    return Err(IoError::NoPositiveValues);
                }
                values.iter().map(|v| v.max(floor).ln()).collect()
            }
        };
        let finite = transformed.iter().copied().filter(|v| v.is_finite());
        let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (min, max) = if min.is_finite() { (min, max) } else { (0.0, 0.0) };
        let span = if max > min { max - min } else { 1.0 };
        let (width, height) = grid.lattice_dims();
        let mut pixels = vec![0u16; width * height];
        for (node, &v) in transformed.iter().enumerate() {
            let (i, j) = grid.lattice_coords(node);
            let level = if v.is_finite() {
                (1.0 + ((v - min) / span * 65534.0).round()).clamp(1.0, 65535.0) as u16
            } else {
                1
            };
            pixels[(height - 1 - j) * width + i] = level;
        }
        let origin = lattice_origin(grid);
        Ok(Heatmap {
            pixels,
            sidecar: Sidecar {
                width,
                height,
                scale,
                min,
                max,
                h: grid.h(),
                origin,
                layout: "row-major, first row at largest y, 16-bit big-endian, level 0 = outside".into(),
            },
        })
    }

    /// Indicator image of a node set, for overlays of geodesics or chains.
    pub fn from_nodes(grid: &GridDomain, nodes: impl IntoIterator<Item = usize>) -> Result<Heatmap, IoError> {
        let mut values = vec![0.0; grid.interior_count()];
        for n in nodes {
            values[n] = 1.0;
        }
        Heatmap::from_field(grid, &values, Scale::Linear)
    }

    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.pixels[(self.sidecar.height - 1 - j) * self.sidecar.width + i]
    }

    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n65535\n", self.sidecar.width, self.sidecar.height)?;
        let bytes: Vec<u8> = self.pixels.iter().flat_map(|p| p.to_be_bytes()).collect();
        out.write_all(&bytes)
    }

    /// Write `<stem>.pgm` and `<stem>.sidecar.json` into `dir`; returns both
    /// paths.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<[PathBuf; 2], IoError> {
        let pgm = dir.join(format!("{stem}.pgm"));
        let side = dir.join(format!("{stem}.sidecar.json"));
        let mut w = BufWriter::new(File::create(&pgm).map_err(io_err(&pgm))?);
        self.write_pgm(&mut w).and_then(|_| w.flush()).map_err(io_err(&pgm))?;
        let f = File::create(&side).map_err(io_err(&side))?;
        serde_json::to_writer_pretty(f, &self.sidecar)?;
        Ok([pgm, side])
    }
}

fn lattice_origin(grid: &GridDomain) -> Point {
    // the lattice cell (0, 0) is either interior, ghost or outside; recover its
    // position from any interior node
    let (i, j) = grid.lattice_coords(0);
    let p = grid.point(0);
    Point::new(p.x - i as f64 * grid.h(), p.y - j as f64 * grid.h())
}

/// Parse a binary 16-bit PGM as written by [`Heatmap::write_pgm`].
pub fn read_pgm<R: Read>(mut input: R) -> Result<(usize, usize, Vec<u16>), IoError> {
    let mut buf = Vec::new();
    input
        .read_to_end(&mut buf)
        .map_err(|e| IoError::BadPgm(e.to_string()))?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < buf.len() && buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(IoError::BadPgm("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&buf[start..pos]).into_owned());
    }
    pos += 1;
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| IoError::BadPgm(format!("bad number {s:?}")))
    };
    if fields[0] != "P5" || num(&fields[3])? != 65535 {
        return Err(IoError::BadPgm(format!("header {:?}", fields)));
    }
    let (w, h) = (num(&fields[1])?, num(&fields[2])?);
    let data = buf.get(pos..).unwrap_or(&[]);
    if data.len() != 2 * w * h {
        return Err(IoError::BadPgm(format!(
            "expected {} data bytes, found {}",
            2 * w * h,
            data.len()
        )));
    }
    Ok((w, h, data.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

/// Write serializable flat records as CSV with a header row.
pub fn write_csv<W: Write, S: Serialize>(out: W, rows: impl IntoIterator<Item = S>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FieldRow {
    pub node: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// `node, x, y, value` rows for a nodal field.
pub fn field_rows<'a>(grid: &'a GridDomain, values: &'a [f64]) -> impl Iterator<Item = FieldRow> + 'a {
    values.iter().enumerate().map(move |(node, &value)| {
        let p = grid.point(node);
        FieldRow {
            node,
            x: p.x,
            y: p.y,
            value,
        }
    })
}

pub fn write_matrix_market(path: &Path, matrix: &CsrMatrix) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    matrix
        .write_matrix_market(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

/// Whether a lattice cell of the heatmap is interior.
pub fn is_interior_cell(grid: &GridDomain, i: usize, j: usize) -> bool {
    matches!(grid.cell(i as i64, j as i64), Neighbor::Interior(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{rasterize, rasterize_with, DomainSpec, RasterOptions};

    fn three_by_three() -> GridDomain {
        rasterize_with(
            &DomainSpec::Square { side: 1.0 },
            0.25,
            RasterOptions { min_cells: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn pgm_round_trip_and_decoding() {
        let g = rasterize(&DomainSpec::UnitDisk, 0.125).unwrap();
        let values: Vec<f64> = g.points().map(|p| p.x + 2.0).collect();
        let map = Heatmap::from_field(&g, &values, Scale::Linear).unwrap();
        let mut bytes = Vec::new();
        map.write_pgm(&mut bytes).unwrap();
        let (w, h, px) = read_pgm(&bytes[..]).unwrap();
        assert_eq!((w, h), g.lattice_dims());
        assert_eq!(px, map.pixels);
        let step = (map.sidecar.max - map.sidecar.min) / 65534.0;
        for (node, &v) in values.iter().enumerate() {
            let (i, j) = g.lattice_coords(node);
            assert!(is_interior_cell(&g, i, j));
            let back = map.sidecar.decode(map.get(i, j)).unwrap();
            assert!((back - v).abs() <= step);
        }
        assert_eq!(px.iter().filter(|&&p| p == 0).count(), w * h - g.interior_count());
    }

    #[test]
    fn log_scale_spans_the_range() {
        let g = three_by_three();
        let values = vec![1e-6, 1e-3, 1.0, 0.0, 10.0, 1e-2, 1e-1, 5.0, 2.0];
        let map = Heatmap::from_field(&g, &values, Scale::Log).unwrap();
        assert_eq!(map.pixels.iter().copied().max(), Some(65535));
        assert_eq!(map.pixels.iter().filter(|&&p| p == 1).count(), 2);
        assert!(Heatmap::from_field(&g, &vec![0.0; 9], Scale::Log).is_err());
    }

    #[test]
    fn csv_has_header_and_dot_decimals() {
        let g = three_by_three();
        let vals: Vec<f64> = (0..g.interior_count()).map(|k| k as f64 * 0.5).collect();
        let mut out = Vec::new();
        write_csv(&mut out, field_rows(&g, &vals)).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,x,y,value"));
        assert_eq!(lines.count(), g.interior_count());
        assert!(text.contains(",0.5\n"));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<FieldRow> = r.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows[3].value, 1.5);
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let g = three_by_three();
        let map = Heatmap::from_nodes(&g, [0, 4]).unwrap();
        let [pgm, side] = map.save(dir.path(), "overlay").unwrap();
        let (_, _, px) = read_pgm(File::open(pgm).unwrap()).unwrap();
        assert_eq!(px.iter().filter(|&&p| p == 65535).count(), 2);
        let sc: Sidecar = serde_json::from_reader(File::open(side).unwrap()).unwrap();
        assert_eq!(sc, map.sidecar);
        let m = CsrMatrix::identity(3);
        let mm = dir.path().join("id.mtx");
        write_matrix_market(&mm, &m).unwrap();
        assert!(std::fs::read_to_string(mm).unwrap().starts_with("%%MatrixMarket"));
    }
}
