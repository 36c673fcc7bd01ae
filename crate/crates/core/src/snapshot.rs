//! Per-cell snapshot records and their CSV form.
//!
//! Schema (one row per cell, LF line endings):
//!
//! ```text
//! t,x,side,A,u,w,Q_net,Q_gross,p,A_gross
//! ```
//!
//! `w` is empty on the free segment. Numbers are written with 17
//! significant digits so that reading a file back gives the same `f64`s.

use crate::physio::{self, CatheterConfig, Side, VesselParams};
use crate::scheme::{Grid, SimState};
use std::io::{Read, Write};
use thiserror::Error;

pub const CSV_HEADER: [&str; 10] = [
    "t", "x", "side", "A", "u", "w", "Q_net", "Q_gross", "p", "A_gross",
];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Schema { line: u64, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub x: f64,
    pub side: Side,
    pub a: f64,
    pub u: f64,
    pub w: Option<f64>,
    pub q_net: f64,
    pub q_gross: f64,
    pub p: f64,
    pub a_gross: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub rows: Vec<SnapshotRow>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Snapshot {
    pub fn from_state(
        state: &SimState,
        grid: &Grid,
        params: &VesselParams,
        cath: &CatheterConfig,
    ) -> Self {
        let rows = grid
            .centers()
            .enumerate()
            .map(|(j, (side, x))| {
                let (a, u) = (state.a[j], state.u[j]);
                let device_area = side.device_area(cath);
                let w = match side {
                    Side::Catheterized => Some(state.w[j]),
                    Side::Free => None,
                };
                let q_net = a * u;
                SnapshotRow {
                    x,
                    side,
                    a,
                    u,
                    w,
                    q_net,
                    q_gross: q_net + w.map_or(0.0, |w| device_area * w),
                    p: physio::pressure_unchecked(a, device_area, params),
                    a_gross: a + device_area,
                }
            })
            .collect();
        Self { t: state.t, rows }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SnapshotError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(CSV_HEADER)?;
        let t = fmt_f64(self.t);
        for row in &self.rows {
            writer.write_record([
                t.as_str(),
                &fmt_f64(row.x),
                row.side.as_str(),
                &fmt_f64(row.a),
                &fmt_f64(row.u),
                &row.w.map(fmt_f64).unwrap_or_default(),
                &fmt_f64(row.q_net),
                &fmt_f64(row.q_gross),
                &fmt_f64(row.p),
                &fmt_f64(row.a_gross),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, SnapshotError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = reader.headers()?.clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(SnapshotError::Schema {
                line: 1,
                message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
            });
        }

        let mut t = None;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let schema = |message: String| SnapshotError::Schema { line, message };
            let num = |i: usize| -> Result<f64, SnapshotError> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| schema(format!("column {}: {e}", CSV_HEADER[i])))
            };

            let row_t = num(0)?;
            match t {
                None => t = Some(row_t),
                Some(t0) if t0 != row_t => {
                    return Err(schema(format!("time {row_t} differs from {t0}")))
                }
                Some(_) => {}
            }
            let side: Side = record[2].parse().map_err(schema)?;
            let w = match (side, record[5].is_empty()) {
                (Side::Catheterized, false) => Some(num(5)?),
                (Side::Free, true) => None,
                (Side::Catheterized, true) => {
                    return Err(schema("missing w on the catheterized side".into()))
                }
                (Side::Free, false) => return Err(schema("w given on the free side".into())),
            };
            rows.push(SnapshotRow {
                x: num(1)?,
                side,
                a: num(3)?,
                u: num(4)?,
                w,
                q_net: num(6)?,
                q_gross: num(7)?,
                p: num(8)?,
                a_gross: num(9)?,
            });
        }
        let t = t.ok_or(SnapshotError::Schema {
            line: 1,
            message: "no data rows".into(),
        })?;
        Ok(Self { t, rows })
    }
}
