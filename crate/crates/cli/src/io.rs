//! Embedding files: the binary `EMB1` container and headerless CSV.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sagvic::Mat;

use crate::error::{CliError, CliResult};

pub const EMB_MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 12;

/// Serialises `m` as magic, `n` and `d` (u32 LE), then the row-major f64
/// LE payload.
pub fn encode_emb(m: &Mat) -> Result<Vec<u8>, String> {
    let n = u32::try_from(m.rows()).map_err(|_| format!("{} rows do not fit the header", m.rows()))?;
    let d = u32::try_from(m.cols()).map_err(|_| format!("{} columns do not fit the header", m.cols()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.as_slice().len());
    out.extend_from_slice(EMB_MAGIC);
    out.write_u32::<LittleEndian>(n).expect("vec write");
    out.write_u32::<LittleEndian>(d).expect("vec write");
    for &v in m.as_slice() {
        out.write_f64::<LittleEndian>(v).expect("vec write");
    }
    Ok(out)
}

pub fn decode_emb(bytes: &[u8]) -> Result<Mat, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("truncated header ({} bytes)", bytes.len()));
    }
    if &bytes[..4] != EMB_MAGIC {
        return Err(format!(
            "bad magic {:?}, expected \"EMB1\"",
            String::from_utf8_lossy(&bytes[..4])
        ));
    }
    let mut cur = Cursor::new(&bytes[4..]);
    let n = cur.read_u32::<LittleEndian>().expect("header length checked") as usize;
    let d = cur.read_u32::<LittleEndian>().expect("header length checked") as usize;
    let expected = n.checked_mul(d).and_then(|c| c.checked_mul(8));
    let payload = bytes.len() - HEADER_LEN;
    if expected != Some(payload) {
        return Err(format!(
            "payload length mismatch: header says {n}x{d}, payload has {payload} bytes"
        ));
    }
    let mut data = vec![0.0; n * d];
    cur.read_f64_into::<LittleEndian>(&mut data)
        .expect("payload length checked");
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(format!("non-finite value at row {}, column {}", i / d, i % d));
    }
    Mat::from_vec(n, d, data).map_err(|e| e.to_string())
}

/// Headerless comma-separated rows of decimals. Every row must have the
/// same width and every value must be finite.
pub fn parse_csv_matrix(text: &str) -> Result<Mat, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("line {}: {e}", r + 1))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(format!("line {}: {} fields, expected {w}", r + 1, record.len()));
            }
            _ => {}
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| format!("line {}, field {}: '{field}' is not a number", r + 1, c + 1))?;
            if !v.is_finite() {
                return Err(format!("line {}, field {}: non-finite value '{field}'", r + 1, c + 1));
            }
            data.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| "no rows".to_string())?;
    Mat::from_vec(rows, width, data).map_err(|e| e.to_string())
}

pub fn format_csv_matrix(m: &Mat) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    let mut f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| CliError::io(path, e))?;
    Ok(buf)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_bytes(path)?).map_err(|_| CliError::format(path, "not valid UTF-8"))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `.csv` files are read as CSV, anything else as `EMB1`.
pub fn load_embeddings(path: &Path) -> CliResult<Mat> {
    if is_csv(path) {
        parse_csv_matrix(&read_text(path)?).map_err(|e| CliError::format(path, e))
    } else {
        decode_emb(&read_bytes(path)?).map_err(|e| CliError::format(path, e))
    }
}

pub fn save_embeddings(path: &Path, m: &Mat) -> CliResult<()> {
    if is_csv(path) {
        write_bytes(path, format_csv_matrix(m).as_bytes())
    } else {
        let bytes = encode_emb(m).map_err(|e| CliError::format(path, e))?;
        write_bytes(path, &bytes)
    }
}
