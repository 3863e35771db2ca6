use std::io::{Read, Write};

use super::ExperimentRecord;
use crate::error::{Error, Result};

pub const RECORDS_HEADER: [&str; 8] = [
    "r",
    "M",
    "seed",
    "kl_raw",
    "kl_clamped",
    "mode_coverage",
    "oracle_calls",
    "wall_ms",
];

/// Writes one row per record; floats use shortest round-trip formatting.
pub fn write_records_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORDS_HEADER)?;
    for rec in records {
        w.write_record([
            format!("{:?}", rec.r),
            rec.m.to_string(),
            rec.seed.to_string(),
            format!("{:?}", rec.kl_raw),
            format!("{:?}", rec.kl_clamped),
            rec.mode_coverage.to_string(),
            rec.oracle_calls.to_string(),
            rec.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    for col in RECORDS_HEADER {
        if !header.iter().any(|h| h == col) {
            return Err(Error::Schema(format!("missing column `{col}`")));
        }
    }
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
