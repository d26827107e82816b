//! Field and path files.
//!
//! Binary field layout, little-endian:
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 4     | magic `AFB1`                    |
//! | 4     | `u32` grid size `M`             |
//! | 8     | `f64` `h_h` (NaN when unknown)  |
//! | 8     | `f64` `h_v` (NaN when unknown)  |
//! | 8     | `u64` seed                      |
//! | 8 (M+1)^2 | `f64` samples, row-major in `k1` |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::projection::ProjectionResult;
use crate::scalar::Real;
use crate::synthesis::{GridField2D, SampledPath};

pub const FIELD_MAGIC: &[u8; 4] = b"AFB1";
const HEADER_LEN: usize = 32;

pub fn write_field<T: Real, W: Write>(field: &GridField2D<T>, mut out: W) -> Result<()> {
    let size = u32::try_from(field.size()).map_err(|_| Error::Format("grid size exceeds u32".into()))?;
    let (hh, hv) = field.truth.unwrap_or((f64::NAN, f64::NAN));
    out.write_all(FIELD_MAGIC)?;
    out.write_all(&size.to_le_bytes())?;
    out.write_all(&hh.to_le_bytes())?;
    out.write_all(&hv.to_le_bytes())?;
    out.write_all(&field.seed.to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field<T: Real, R: Read>(mut input: R) -> Result<GridField2D<T>> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header).map_err(|e| Error::Format(format!("short header: {e}")))?;
    if &header[..4] != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let f64_at = |i: usize| f64::from_le_bytes(header[i..i + 8].try_into().unwrap());
    let size = u32_at(4) as usize;
    let (hh, hv) = (f64_at(8), f64_at(16));
    let seed = u64::from_le_bytes(header[24..32].try_into().unwrap());
    let count = (size + 1) * (size + 1);
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 8 * count {
        return Err(Error::Format(format!("expected {} sample bytes, found {}", 8 * count, body.len())));
    }
    let values = body.chunks_exact(8).map(|c| T::of(f64::from_le_bytes(c.try_into().unwrap()))).collect();
    let mut field = GridField2D::new(size, values)?;
    field.truth = if hh.is_nan() || hv.is_nan() { None } else { Some((hh, hv)) };
    field.seed = seed;
    Ok(field)
}

pub fn save_field<T: Real>(field: &GridField2D<T>, path: impl AsRef<Path>) -> Result<()> {
    write_field(field, BufWriter::new(File::create(path)?))
}

pub fn load_field<T: Real>(path: impl AsRef<Path>) -> Result<GridField2D<T>> {
    read_field(BufReader::new(File::open(path)?))
}

/// One CSV line per `k1`, `M + 1` columns.
pub fn write_field_csv<T: Real, W: Write>(field: &GridField2D<T>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for k1 in 0..=field.size() {
        w.write_record(field.row(k1).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column `t,value` CSV with `t = k / (len - 1)`.
pub fn write_series_csv<T: Real, W: Write>(values: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    let steps = values.len().saturating_sub(1).max(1) as f64;
    for (k, v) in values.iter().enumerate() {
        w.write_record([(k as f64 / steps).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_path_csv<T: Real, W: Write>(path: &SampledPath<T>, out: W) -> Result<()> {
    write_series_csv(path.values(), out)
}

pub fn write_projection_csv<T: Real, W: Write>(projection: &ProjectionResult<T>, out: W) -> Result<()> {
    write_series_csv(&projection.values, out)
}

/// Reads a path from `t,value` CSV (header required). Rows must be in order;
/// the `t` column is ignored beyond that.
pub fn read_path_csv<T: Real, R: Read>(input: R) -> Result<SampledPath<T>> {
    let mut r = csv::Reader::from_reader(input);
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = rec.get(1).ok_or_else(|| Error::Parse("path CSV needs two columns".into()))?;
        let v: f64 = field.trim().parse().map_err(|e| Error::Parse(format!("value {field:?}: {e}")))?;
        values.push(T::of(v));
    }
    SampledPath::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{AnisotropicIndex, SpectralModel};
    use crate::synthesis::{afb_sra, Seed};

    #[test]
    fn binary_round_trip_and_layout() {
        let model = SpectralModel::planar(AnisotropicIndex::axis_pair(0.7, 0.2).unwrap());
        let f = afb_sra::<f64>(&model, 8, Seed(77)).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 8 * 81);
        assert_eq!(&buf[..4], b"AFB1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 0.7);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 0.2);
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 77);
        let g: GridField2D<f64> = read_field(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn unknown_truth_is_nan() {
        let f = GridField2D::<f64>::from_fn(2, |i, j| (i + j) as f64).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert!(f64::from_le_bytes(buf[8..16].try_into().unwrap()).is_nan());
        let g: GridField2D<f64> = read_field(buf.as_slice()).unwrap();
        assert_eq!(g.truth, None);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(read_field::<f64, _>(&b"AFB2"[..]), Err(Error::Format(_))));
        let f = GridField2D::<f64>::from_fn(2, |_, _| 1.0).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        buf[0] = b'X';
        assert!(read_field::<f64, _>(buf.as_slice()).is_err());
        buf[0] = b'A';
        buf.pop();
        assert!(read_field::<f64, _>(buf.as_slice()).is_err());
    }

    #[test]
    fn path_csv_round_trip() {
        let p = SampledPath::new(vec![0.0, 0.25, -1.5, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n0,0\n"));
        let q: SampledPath<f64> = read_path_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
    }

    #[test]
    fn field_csv_shape() {
        let f = GridField2D::<f64>::from_fn(2, |i, j| (10 * i + j) as f64).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,1,2\n10,11,12\n20,21,22\n");
    }
}
