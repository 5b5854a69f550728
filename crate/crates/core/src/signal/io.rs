//! CSV and binary dataset formats.
//!
//! CSV: header `subject_id,fs,sbp,dbp,label,s0,...,s{T-1}`; missing
//! pressures or label are empty fields. Binary: magic `RPGD`, u16 version,
//! u64 record count, then per record a u32-prefixed UTF-8 id, f64 fs,
//! flagged sbp/dbp (u8 flag + f64), flagged label (u8 flag + u8), u32 T and
//! T little-endian f32 samples. All integers little-endian.

use std::path::Path;

use super::record::{Dataset, PpgRecord, SplitTag};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RPGD";
const VERSION: u16 = 1;
const FIXED_COLUMNS: [&str; 5] = ["subject_id", "fs", "sbp", "dbp", "label"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Binary,
}

impl DataFormat {
    /// `.csv` selects CSV, anything else the binary format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DataFormat::Csv,
            _ => DataFormat::Binary,
        }
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        DataFormat::Csv => parse_csv(&bytes)?,
        DataFormat::Binary => parse_binary(&bytes)?,
    };
    Ok(Dataset::new(records, SplitTag::Unsplit))
}

pub fn save_dataset(d: &Dataset, path: &Path, format: DataFormat) -> Result<()> {
    let bytes = match format {
        DataFormat::Csv => {
            let mut out = Vec::new();
            write_csv(d, &mut out)?;
            out
        }
        DataFormat::Binary => write_binary(d)?,
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn record_error(index: usize, e: Error) -> Error {
    match e {
        Error::LabelConsistency { stored, implied, .. } => {
            Error::LabelConsistency { record: index, stored, implied }
        }
        other => Error::Parse { record: index, message: other.to_string() },
    }
}

fn opt_field(s: &str) -> Option<&str> {
    let s = s.trim();
    (!s.is_empty()).then_some(s)
}

fn parse_f64(field: &str, name: &str, record: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        record,
        message: format!("{name}: cannot parse {field:?} as a number"),
    })
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<PpgRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(bytes);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    if header.len() < FIXED_COLUMNS.len()
        || header.iter().zip(FIXED_COLUMNS).any(|(h, want)| h.trim() != want)
    {
        return Err(Error::Format(format!(
            "header must start with {}",
            FIXED_COLUMNS.join(",")
        )));
    }
    for (j, h) in header.iter().skip(FIXED_COLUMNS.len()).enumerate() {
        if h.trim() != format!("s{j}") {
            return Err(Error::Format(format!("sample column {j} is named {h:?}, expected s{j}")));
        }
    }
    let width = header.len();
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse { record: i, message: e.to_string() })?;
        if row.len() != width {
            return Err(Error::Parse {
                record: i,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let id = row[0].to_string();
        let fs = parse_f64(&row[1], "fs", i)?;
        if !(fs > 0.0) {
            return Err(Error::Parse { record: i, message: format!("fs must be positive, got {fs}") });
        }
        let sbp = opt_field(&row[2]).map(|s| parse_f64(s, "sbp", i)).transpose()?;
        let dbp = opt_field(&row[3]).map(|s| parse_f64(s, "dbp", i)).transpose()?;
        let label = opt_field(&row[4])
            .map(|s| match s {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::Parse {
                    record: i,
                    message: format!("label must be 0 or 1, got {other:?}"),
                }),
            })
            .transpose()?;
        let samples = row
            .iter()
            .skip(FIXED_COLUMNS.len())
            .enumerate()
            .map(|(j, s)| parse_f64(s, &format!("s{j}"), i))
            .collect::<Result<Vec<_>>>()?;
        records.push(PpgRecord::new(id, samples, fs, sbp, dbp, label).map_err(|e| record_error(i, e))?);
    }
    Ok(records)
}

/// Writes the CSV format. Every record must have the same length.
///
/// Numbers use the shortest representation that parses back to the same
/// `f64`, so a CSV round trip is lossless.
pub fn write_csv<W: std::io::Write>(d: &Dataset, out: W) -> Result<()> {
    let t = common_length(d)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..t).map(|j| format!("s{j}")));
    w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in d.records() {
        let mut row = Vec::with_capacity(t + FIXED_COLUMNS.len());
        row.push(r.subject_id().to_string());
        row.push(r.fs().to_string());
        row.push(opt(r.sbp()));
        row.push(opt(r.dbp()));
        row.push(r.label().to_string());
        row.extend(r.samples().iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn common_length(d: &Dataset) -> Result<usize> {
    let t = d.records().first().map_or(0, PpgRecord::len);
    if let Some(i) = d.records().iter().position(|r| r.len() != t) {
        return Err(Error::InvalidInput(format!(
            "CSV needs equal-length records: record {i} has {} samples, record 0 has {t}",
            d.records()[i].len()
        )));
    }
    Ok(t)
}

/// Encodes the binary format. Samples are narrowed to `f32`.
pub fn write_binary(d: &Dataset) -> Result<Vec<u8>> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.u64(d.len() as u64);
    for r in d.records() {
        w.len_u32(r.subject_id().len())?;
        w.bytes(r.subject_id().as_bytes());
        w.f64(r.fs());
        for p in [r.sbp(), r.dbp()] {
            match p {
                Some(v) => {
                    w.u8(1);
                    w.f64(v);
                }
                None => w.u8(0),
            }
        }
        w.u8(1);
        w.u8(r.label());
        w.len_u32(r.len())?;
        for &s in r.samples() {
            w.f32(s as f32);
        }
    }
    Ok(w.finish())
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<PpgRecord>> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let n = r.u64()?;
    let mut records = Vec::new();
    for i in 0..n as usize {
        let wrap = |e: Error| Error::Parse { record: i, message: e.to_string() };
        let id_len = r.len_u32().map_err(wrap)?;
        let id = std::str::from_utf8(r.take(id_len).map_err(wrap)?)
            .map_err(|e| Error::Parse { record: i, message: format!("subject id: {e}") })?
            .to_string();
        let fs = r.f64().map_err(wrap)?;
        if !(fs > 0.0) {
            return Err(Error::Parse { record: i, message: format!("fs must be positive, got {fs}") });
        }
        let mut pressures = [None; 2];
        for p in &mut pressures {
            if r.u8().map_err(wrap)? != 0 {
                *p = Some(r.f64().map_err(wrap)?);
            }
        }
        let label = if r.u8().map_err(wrap)? != 0 { Some(r.u8().map_err(wrap)?) } else { None };
        let t = r.len_u32().map_err(wrap)?;
        let raw = r.take(t.checked_mul(4).ok_or_else(|| wrap(Error::Format("length overflow".into())))?)
            .map_err(wrap)?;
        let samples = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
            .collect();
        records.push(
            PpgRecord::new(id, samples, fs, pressures[0], pressures[1], label)
                .map_err(|e| record_error(i, e))?,
        );
    }
    r.finish()?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(t: usize) -> String {
        let mut h = FIXED_COLUMNS.join(",");
        for j in 0..t {
            h.push_str(&format!(",s{j}"));
        }
        h
    }

    fn row(id: &str, fs: &str, sbp: &str, dbp: &str, label: &str, t: usize) -> String {
        let mut s = format!("{id},{fs},{sbp},{dbp},{label}");
        for j in 0..t {
            s.push_str(&format!(",{}", (j as f64 * 0.01).sin()));
        }
        s
    }

    fn parse(text: &str) -> Result<Vec<PpgRecord>> {
        parse_csv(text.as_bytes())
    }

    #[test]
    fn two_row_fixture() {
        let text = format!(
            "{}\n{}\n{}\n",
            header(875),
            row("s1", "125", "120", "80", "0", 875),
            row("s2", "125", "", "", "1", 875)
        );
        let recs = parse(&text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].len(), 875);
        assert_eq!(recs[1].label(), 1);
        assert_eq!(recs[1].sbp(), None);
    }

    #[test]
    fn zero_fs_is_parse_error() {
        let text = format!("{}\n{}\n", header(20), row("s1", "0", "", "", "0", 20));
        assert!(matches!(parse(&text), Err(Error::Parse { record: 0, .. })));
    }

    #[test]
    fn label_contradiction_is_consistency_error() {
        let text = format!(
            "{}\n{}\n{}\n",
            header(20),
            row("s1", "125", "120", "80", "0", 20),
            row("s2", "125", "150", "85", "0", 20)
        );
        assert!(matches!(
            parse(&text),
            Err(Error::LabelConsistency { record: 1, stored: 0, implied: 1 })
        ));
    }

    #[test]
    fn label_derived_when_blank() {
        let text = format!("{}\n{}\n", header(20), row("s1", "125", "150", "85", "", 20));
        assert_eq!(parse(&text).unwrap()[0].label(), 1);
    }

    #[test]
    fn malformed_rows_name_the_row() {
        let short = format!(
            "{}\n{}\n{}\n",
            header(20),
            row("s1", "125", "", "", "0", 20),
            row("s2", "125", "", "", "0", 19)
        );
        assert!(matches!(parse(&short), Err(Error::Parse { record: 1, .. })));
        let bad = row("s1", "125", "", "", "0", 20).replacen(",0,", ",0,abc,", 1);
        let text = format!("{}\n{}\n", header(21), bad);
        assert!(matches!(parse(&text), Err(Error::Parse { record: 0, .. })));
        let text = format!("{}\n{}\n", header(20), row("s1", "125", "", "", "2", 20));
        assert!(matches!(parse(&text), Err(Error::Parse { record: 0, .. })));
    }

    #[test]
    fn bad_header_rejected() {
        let text = "id,fs,sbp,dbp,label,s0\na,1,,,0,1\n";
        assert!(matches!(parse(text), Err(Error::Format(_))));
        let text = "subject_id,fs,sbp,dbp,label,s1\na,1,,,0,1\n";
        assert!(matches!(parse(text), Err(Error::Format(_))));
    }

    #[test]
    fn binary_round_trip_narrows_to_f32() {
        let r = PpgRecord::new("ab", vec![0.1, -2.5, 3.0], 125.0, Some(150.0), Some(95.0), None)
            .unwrap();
        let r2 = PpgRecord::new("c", vec![1.0; 2], 50.0, None, None, Some(0)).unwrap();
        let d = Dataset::new(vec![r, r2], SplitTag::Train);
        let bytes = write_binary(&d).unwrap();
        assert_eq!(&bytes[..4], b"RPGD");
        let back = parse_binary(&bytes).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].subject_id(), "ab");
        assert_eq!(back[0].samples()[0], 0.1f32 as f64);
        assert_eq!(back[0].sbp(), Some(150.0));
        assert_eq!(back[0].label(), 1);
        assert_eq!(back[1].sbp(), None);
        assert_eq!(back[1].fs(), 50.0);
    }

    #[test]
    fn binary_truncation_detected() {
        let r = PpgRecord::new("ab", vec![0.1; 10], 125.0, None, None, Some(0)).unwrap();
        let bytes = write_binary(&Dataset::new(vec![r], SplitTag::Train)).unwrap();
        assert!(parse_binary(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(parse_binary(&extra).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(matches!(parse_binary(&bad), Err(Error::Format(_))));
    }
}
