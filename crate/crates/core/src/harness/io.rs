//! CSV and legacy-VTK output.
//!
//! Cell CSVs carry one header line `# nx=..,ny=..,h=..,k=..,t=..` followed by
//! one value per line in storage order (`y` outer). Values are written in the
//! shortest round-trip form, so reading a file back is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{ChnsError, Result};
use crate::grid::{CellField, StaggeredGrid};
use crate::model::ChnsState;
use crate::ops;

/// Header of a cell CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvHeader {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub k: f64,
    pub t: f64,
}

pub fn write_cell_csv(w: &mut dyn Write, f: &CellField, g: &StaggeredGrid, t: f64) -> Result<()> {
    f.check(g)?;
    writeln!(w, "# nx={},ny={},h={:e},k={:e},t={:e}", g.nx, g.ny, g.h, g.k, t)?;
    for v in f.as_slice() {
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

fn bad(line: usize, message: impl Into<String>) -> ChnsError {
    ChnsError::Parse { line, message: message.into() }
}

/// Read a file written by [`write_cell_csv`].
pub fn read_cell_csv(r: &mut dyn BufRead) -> Result<(CsvHeader, Vec<f64>)> {
    let mut lines = r.lines();
    let head = lines.next().ok_or_else(|| bad(1, "empty file"))??;
    let body = head.strip_prefix("# ").ok_or_else(|| bad(1, "missing header"))?;
    let mut hdr = CsvHeader { nx: 0, ny: 0, h: 0.0, k: 0.0, t: 0.0 };
    for item in body.split(',') {
        let (k, v) = item.split_once('=').ok_or_else(|| bad(1, format!("bad header item `{item}`")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(1, format!("bad number `{v}`")));
        match k {
            "nx" => hdr.nx = v.parse().map_err(|_| bad(1, "bad nx"))?,
            "ny" => hdr.ny = v.parse().map_err(|_| bad(1, "bad ny"))?,
            "h" => hdr.h = num(v)?,
            "k" => hdr.k = num(v)?,
            "t" => hdr.t = num(v)?,
            other => return Err(bad(1, format!("unknown header key `{other}`"))),
        }
    }
    let mut values = Vec::with_capacity(hdr.nx * hdr.ny);
    for (i, line) in lines.enumerate() {
        let line = line?;
        values.push(line.trim().parse::<f64>().map_err(|_| bad(i + 2, format!("bad value `{line}`")))?);
    }
    if values.len() != hdr.nx * hdr.ny {
        return Err(bad(0, format!("expected {} values, found {}", hdr.nx * hdr.ny, values.len())));
    }
    Ok((hdr, values))
}

/// Legacy ASCII VTK structured-points file with `Z`, `P` and the velocity
/// interpolated to cell centers.
pub fn write_vtk(w: &mut dyn Write, s: &ChnsState, g: &StaggeredGrid) -> Result<()> {
    let (uc, vc) = ops::velocity_at_centers(&s.u, g);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "chns step {} t={:e}", s.step, s.t)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} 1", g.nx + 1, g.ny + 1)?;
    writeln!(w, "ORIGIN {:e} {:e} 0", g.x_lo, g.y_lo)?;
    writeln!(w, "SPACING {:e} {:e} 1", g.h, g.k)?;
    writeln!(w, "CELL_DATA {}", g.nx * g.ny)?;
    for (name, f) in [("Z", &s.z), ("P", &s.p)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in f.as_slice() {
            writeln!(w, "{v:e}")?;
        }
    }
    writeln!(w, "VECTORS U double")?;
    for (a, b) in uc.as_slice().iter().zip(vc.as_slice()) {
        writeln!(w, "{a:e} {b:e} 0")?;
    }
    Ok(())
}

/// Files written for one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub step: usize,
    pub t: f64,
    pub z: PathBuf,
    pub p: PathBuf,
    pub u1: PathBuf,
    pub u2: PathBuf,
    pub vtk: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Write `Z`, `P` and the center-interpolated velocity as cell CSVs.
pub fn write_snapshot(dir: &Path, s: &ChnsState, g: &StaggeredGrid, vtk: bool) -> Result<SnapshotRecord> {
    std::fs::create_dir_all(dir)?;
    let (uc, vc) = ops::velocity_at_centers(&s.u, g);
    let name = |q: &str| dir.join(format!("{q}_{:06}.csv", s.step));
    let rec = SnapshotRecord {
        step: s.step,
        t: s.t,
        z: name("z"),
        p: name("p"),
        u1: name("u1"),
        u2: name("u2"),
        vtk: vtk.then(|| dir.join(format!("state_{:06}.vtk", s.step))),
    };
    for (path, f) in [(&rec.z, &s.z), (&rec.p, &s.p), (&rec.u1, &uc), (&rec.u2, &vc)] {
        let mut w = create(path)?;
        write_cell_csv(&mut w, f, g, s.t)?;
        w.flush()?;
    }
    if let Some(path) = &rec.vtk {
        let mut w = create(path)?;
        write_vtk(&mut w, s, g)?;
        w.flush()?;
    }
    Ok(rec)
}
