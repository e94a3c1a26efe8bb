//! Matrix files: the `SEQMAT01` binary container and plain CSV.
//!
//! Binary layout: the 8 ASCII bytes `SEQMAT01`, `rows` and `cols` as u64
//! little-endian, then `rows·cols` f64 little-endian values column-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SEQMAT01";

pub fn write_binary<W: Write>(m: &DenseMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected SEQMAT01".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            len * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    DenseMatrix::new(rows, cols, data)
}

/// One matrix row per line, comma separated, shortest round-trip decimals.
pub fn write_csv<W: Write>(m: &DenseMatrix, mut w: W) -> Result<()> {
    for i in 0..m.rows() {
        let line: Vec<String> = (0..m.cols()).map(|j| format!("{:e}", m.get(i, j))).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("line {}: cannot parse {tok:?}: {e}", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "line {} has {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    let mut data = Vec::with_capacity(r * c);
    for j in 0..c {
        data.extend(rows.iter().map(|row| row[j]));
    }
    DenseMatrix::new(r, c, data)
}

/// Writes `m` to `path`, CSV when `csv` is set, `SEQMAT01` otherwise.
pub fn save(m: &DenseMatrix, path: &Path, csv: bool) -> Result<()> {
    let file = File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let w = BufWriter::new(file);
    if csv {
        write_csv(m, w)
    } else {
        write_binary(m, w)
    }
}

/// Reads a matrix, sniffing the binary magic and falling back to CSV.
pub fn load(path: &Path) -> Result<DenseMatrix> {
    let mut file = File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut head = [0u8; 8];
    let got = file.read(&mut head)?;
    let rest = BufReader::new(file);
    if got == 8 && &head == MAGIC {
        read_binary(std::io::Cursor::new(head).chain(rest))
    } else {
        read_csv(std::io::Cursor::new(head[..got].to_vec()).chain(rest))
    }
}
