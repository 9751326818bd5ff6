//! File formats: little-endian binary grids and states, CSV tables, JSON.
//!
//! Phase field: `"SCTL"`, version `u32`, `d`, `nx`, `nv` (`u32`), the two
//! extents (`f64`), then the values in row-major order.
//! Density operator: `"SCTQ"`, version, `n`, `rank` (`u32`), extent, `ħ`,
//! the weights, then each vector as interleaved `(re, im)` pairs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sctl_core::dynamics::EvolutionLog;
use sctl_core::transport::TransportPlan;
use sctl_core::{Axis, Complex64, MixedState, PhaseField, PhaseGrid};

use crate::error::{io_err, LabError, LabResult};

pub const FIELD_MAGIC: &[u8; 4] = b"SCTL";
pub const STATE_MAGIC: &[u8; 4] = b"SCTQ";
pub const FORMAT_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> LabResult<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len()).ok_or_else(|| LabError::Format("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> LabResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> LabResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> LabResult<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn header(&mut self, magic: &[u8; 4]) -> LabResult<()> {
        if self.take(4)? != magic {
            return Err(LabError::Format(format!("missing {} magic", String::from_utf8_lossy(magic))));
        }
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(LabError::Format(format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn finish(&self) -> LabResult<()> {
        if self.pos != self.buf.len() {
            return Err(LabError::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn encode_field(f: &PhaseField) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(40 + 8 * f.values().len());
    out.extend_from_slice(FIELD_MAGIC);
    for v in [FORMAT_VERSION, g.dim() as u32, g.nx() as u32, g.nv() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [g.x().extent(), g.v().extent()].iter().chain(f.values()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> LabResult<PhaseField> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.header(FIELD_MAGIC)?;
    let (d, nx, nv) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    if !(d == 1 || d == 3) {
        return Err(LabError::Format(format!("dimension {d}")));
    }
    let (xe, ve) = (r.f64()?, r.f64()?);
    let grid = PhaseGrid::new(d, Axis::new(nx, xe)?, Axis::new(nv, ve)?)?;
    let values = r.f64s(grid.cells())?;
    r.finish()?;
    Ok(PhaseField::new(grid, values)?)
}

pub fn encode_state(op: &MixedState) -> Vec<u8> {
    let n = op.axis().len();
    let mut out = Vec::with_capacity(32 + 8 * op.rank() * (1 + 2 * n));
    out.extend_from_slice(STATE_MAGIC);
    for v in [FORMAT_VERSION, n as u32, op.rank() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut push = |x: f64| out.extend_from_slice(&x.to_le_bytes());
    push(op.axis().extent());
    push(op.hbar());
    op.weights().iter().for_each(|w| push(*w));
    for v in op.vectors() {
        for z in v {
            push(z.re);
            push(z.im);
        }
    }
    out
}

pub fn decode_state(bytes: &[u8]) -> LabResult<MixedState> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.header(STATE_MAGIC)?;
    let (n, rank) = (r.u32()? as usize, r.u32()? as usize);
    let (xe, hbar) = (r.f64()?, r.f64()?);
    let axis = Axis::new(n, xe)?;
    let weights = r.f64s(rank)?;
    let mut vectors = Vec::with_capacity(rank);
    for _ in 0..rank {
        let raw = r.f64s(2 * n)?;
        vectors.push(raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    r.finish()?;
    Ok(MixedState::new(hbar, axis, weights, vectors)?)
}

pub fn read_field(path: &Path) -> LabResult<PhaseField> {
    decode_field(&fs::read(path).map_err(io_err(path))?)
}

pub fn read_state(path: &Path) -> LabResult<MixedState> {
    decode_state(&fs::read(path).map_err(io_err(path))?)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> LabResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> LabResult<()> {
    write_bytes(path, text.as_bytes())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize + ?Sized>(path: &Path, value: &T) -> LabResult<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

/// One compact JSON document per line.
pub fn write_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> LabResult<()> {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it)?);
        s.push('\n');
    }
    write_text(path, &s)
}

/// Minimal CSV table; floats use the shortest round-trip representation.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => write!(self.text, "{x:?}").expect("string write"),
                Cell::U(x) => write!(self.text, "{x}").expect("string write"),
                Cell::S(x) if x.contains([',', '"', '\n']) => write!(self.text, "\"{}\"", x.replace('"', "\"\"")).expect("string write"),
                Cell::S(x) => self.text.push_str(x),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

/// Columns `x, v, value` (one dimension) or `x1..x3, v1..v3, value`.
pub fn field_csv(f: &PhaseField) -> Csv {
    let g = f.grid();
    let d = g.dim();
    let mut csv = if d == 1 { Csv::new(&["x", "v", "value"]) } else { Csv::new(&["x1", "x2", "x3", "v1", "v2", "v3", "value"]) };
    let (mut x, mut v) = ([0.0; 3], [0.0; 3]);
    for (i, val) in f.values().iter().enumerate() {
        g.coords(i, &mut x[..d], &mut v[..d]);
        let mut row: Vec<Cell> = x[..d].iter().chain(&v[..d]).map(|a| Cell::F(*a)).collect();
        row.push(Cell::F(*val));
        csv.row(&row);
    }
    csv
}

pub fn log_csv(log: &EvolutionLog) -> Csv {
    let mut csv = Csv::new(&["t", "mass_f", "mass_op", "rho_inf_f", "rho_inf_op", "energy_f", "energy_op", "C_inf"]);
    for i in 0..log.len() {
        csv.row(&[
            Cell::F(log.times[i]),
            Cell::F(log.mass_f[i]),
            Cell::F(log.mass_op[i]),
            Cell::F(log.rho_inf_f[i]),
            Cell::F(log.rho_inf_op[i]),
            Cell::F(log.energy_f[i]),
            Cell::F(log.energy_op[i]),
            Cell::F(log.c_inf[i]),
        ]);
    }
    csv
}

/// Sparse triplets `i, j, mass`.
pub fn plan_csv(plan: &TransportPlan) -> Csv {
    let mut csv = Csv::new(&["i", "j", "mass"]);
    for &(i, j, m) in &plan.entries {
        csv.row(&[Cell::U(i as u64), Cell::U(j as u64), Cell::F(m)]);
    }
    csv
}
