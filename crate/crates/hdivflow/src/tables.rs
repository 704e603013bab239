//! CSV tables: convergence rows and velocity cutlines.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use hdivflow_core::analysis::{ConvergenceRow, ConvergenceTable, Cutline};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub nu: f64,
    pub r: f64,
    pub h: f64,
    pub dt: f64,
    #[serde(rename = "velERR")]
    pub vel_err: f64,
    #[serde(rename = "preERR")]
    pub pre_err: f64,
    pub order_vel: Option<f64>,
    pub order_pre: Option<f64>,
}

impl From<&ConvergenceRow> for ConvergenceRecord {
    fn from(row: &ConvergenceRow) -> Self {
        Self {
            nu: row.nu,
            r: row.r,
            h: row.h,
            dt: row.dt,
            vel_err: row.vel_err,
            pre_err: row.pre_err,
            order_vel: row.order_vel,
            order_pre: row.order_pre,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutlineRecord {
    pub x_station: f64,
    pub y: f64,
    pub ux: f64,
}

pub fn convergence_records(tables: &[ConvergenceTable]) -> Vec<ConvergenceRecord> {
    tables.iter().flat_map(|t| t.rows.iter().map(ConvergenceRecord::from)).collect()
}

pub fn cutline_records(cutline: &Cutline) -> Vec<CutlineRecord> {
    cutline
        .values
        .iter()
        .map(|&(y, ux)| CutlineRecord {
            x_station: cutline.x,
            y,
            ux,
        })
        .collect()
}

pub fn write_records<T: Serialize>(records: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records<T: for<'de> Deserialize<'de>>(input: impl Read) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(Error::from)
}

pub fn save_records<T: Serialize>(records: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_records(records, &mut buf).map_err(|e| e.in_file(path))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_records<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file).map_err(|e| e.in_file(path))
}
