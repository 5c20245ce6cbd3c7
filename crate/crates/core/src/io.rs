// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV serialization for waveforms, sweep results and Wigner grids.
//!
//! Floats are written as `{:.16e}`, 17 significant digits, so every value
//! survives a round trip exactly. Row numbers in errors count the header as
//! row 1.

use std::io::{Read, Write};

use crate::control::{Segment, Waveform};
use crate::ec::EcResult;
use crate::error::{Error, Result};
use crate::wigner::WignerGrid;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(row: usize, reason: impl Into<String>) -> Error {
    Error::Csv {
        row,
        reason: reason.into(),
    }
}

/// Waveform header: `segment,duration_s,u1,…,uK`.
pub fn waveform_header(num_controls: usize) -> Vec<String> {
    let mut h = vec!["segment".to_string(), "duration_s".to_string()];
    h.extend((1..=num_controls).map(|k| format!("u{k}")));
    h
}

pub fn write_waveform<W: Write>(w: &Waveform, num_controls: usize, out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(waveform_header(num_controls)).map_err(into_io)?;
    for (i, seg) in w.segments.iter().enumerate() {
        if seg.amplitudes.len() != num_controls {
            return Err(Error::ControlCountMismatch {
                segment: i,
                expected: num_controls,
                found: seg.amplitudes.len(),
            });
        }
        let mut rec = vec![i.to_string(), num(seg.duration)];
        rec.extend(seg.amplitudes.iter().map(|&u| num(u)));
        wr.write_record(&rec).map_err(into_io)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn waveform_to_string(w: &Waveform, num_controls: usize) -> Result<String> {
    let mut buf = Vec::new();
    write_waveform(w, num_controls, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

fn into_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Reads a waveform CSV. Durations must be positive and finite; the number
/// of controls is taken from the header.
pub fn read_waveform<R: Read>(input: R) -> Result<Waveform> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rd.records();
    let header = match records.next() {
        None => {
            return Err(csv_err(
                1,
                "empty file, expected header `segment,duration_s,u1,...`",
            ))
        }
        Some(r) => r.map_err(|e| csv_err(1, e.to_string()))?,
    };
    let k = header.len().saturating_sub(2);
    let expected = waveform_header(k);
    if header.len() < 2 || header.iter().zip(&expected).any(|(a, b)| a.trim() != b) {
        return Err(csv_err(
            1,
            format!(
                "bad header `{}`, expected `{}`",
                header.iter().collect::<Vec<_>>().join(","),
                expected.join(",")
            ),
        ));
    }
    let mut segments = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| csv_err(row, e.to_string()))?;
        if rec.len() != k + 2 {
            return Err(csv_err(
                row,
                format!("expected {} fields, found {}", k + 2, rec.len()),
            ));
        }
        let field = |j: usize| -> Result<f64> {
            let s = rec[j].trim();
            let v: f64 = s
                .parse()
                .map_err(|_| csv_err(row, format!("column `{}`: not a number: `{s}`", expected[j])))?;
            if !v.is_finite() {
                return Err(csv_err(
                    row,
                    format!("column `{}`: non-finite value", expected[j]),
                ));
            }
            Ok(v)
        };
        let index: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| csv_err(row, format!("column `segment`: not an index: `{}`", &rec[0])))?;
        if index != i {
            return Err(csv_err(row, format!("segment index {index}, expected {i}")));
        }
        let duration = field(1)?;
        if duration <= 0.0 {
            return Err(csv_err(row, format!("duration {duration} must be positive")));
        }
        let amplitudes = (2..k + 2).map(field).collect::<Result<Vec<_>>>()?;
        segments.push(Segment { duration, amplitudes });
    }
    Ok(Waveform::new(segments))
}

/// `epsilon,corrected,uncorrected,trigger_rate`.
pub fn ec_result_to_string(r: &EcResult) -> Result<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["epsilon", "corrected", "uncorrected", "trigger_rate"])
        .map_err(into_io)?;
    for p in &r.points {
        wr.write_record([
            num(p.epsilon),
            num(p.corrected),
            num(p.uncorrected),
            num(p.trigger_rate),
        ])
        .map_err(into_io)?;
    }
    let buf = wr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// `theta,phi,w`, one row per grid point, `θ` outermost.
pub fn wigner_grid_to_string(g: &WignerGrid) -> Result<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["theta", "phi", "w"]).map_err(into_io)?;
    for (i, &t) in g.thetas.iter().enumerate() {
        for (j, &p) in g.phis.iter().enumerate() {
            wr.write_record([num(t), num(p), num(g.values[(i, j)])])
                .map_err(into_io)?;
        }
    }
    let buf = wr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}
