//! Point-cloud file formats.
//!
//! Binary: magic `PNPC`, u32 little-endian point count, then 3*N f32
//! little-endian coordinates interleaved (x, y, z). Text: one `x y z` line
//! per point, whitespace separated.

use std::fs;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PNPC";

pub fn write_cloud_binary(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(8 + cloud.len() * 12);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(cloud.len() as u32).to_le_bytes());
    for p in &cloud.points {
        for &c in p {
            buf.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_cloud_binary(path: &Path) -> Result<PointCloud> {
    let data = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let shape_id = stem_of(path);
    if data.len() < 8 || &data[..4] != MAGIC {
        return Err(Error::InvalidData(format!(
            "{}: missing PNPC magic",
            path.display()
        )));
    }
    let n = u32::from_le_bytes([data[4], data[5], data[6], data[7]]) as usize;
    let expected = 8 + n * 12;
    if data.len() != expected {
        return Err(Error::InvalidData(format!(
            "{}: expected {} bytes for {} points, found {}",
            path.display(),
            expected,
            n,
            data.len()
        )));
    }
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let base = 8 + i * 12;
        let mut p = [0.0f64; 3];
        for (j, c) in p.iter_mut().enumerate() {
            let o = base + j * 4;
            *c = f32::from_le_bytes([data[o], data[o + 1], data[o + 2], data[o + 3]]) as f64;
        }
        points.push(p);
    }
    PointCloud::new(shape_id, points)
}

pub fn write_cloud_text(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in &cloud.points {
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_cloud_text(path: &Path) -> Result<PointCloud> {
    let data = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut points = Vec::new();
    for (lineno, line) in data.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Format {
                path: path.display().to_string(),
                line: lineno + 1,
                message: format!("expected 3 coordinates, found {}", fields.len()),
            });
        }
        let mut p = [0.0f64; 3];
        for (c, f) in p.iter_mut().zip(&fields) {
            *c = f.parse::<f64>().map_err(|e| Error::Format {
                path: path.display().to_string(),
                line: lineno + 1,
                message: format!("bad coordinate {f:?}: {e}"),
            })?;
        }
        points.push(p);
    }
    PointCloud::new(stem_of(path), points)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cloud".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pnpc");
        let cloud = PointCloud::new("c", vec![[0.125, -3.5, 10.0], [1.0, 2.0, 3.0]]).unwrap();
        write_cloud_binary(&cloud, &path).unwrap();
        let back = read_cloud_binary(&path).unwrap();
        // the chosen coordinates are exactly representable in f32
        assert_eq!(back.points, cloud.points);
        assert_eq!(back.shape_id, "c");
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.xyz");
        let cloud =
            PointCloud::new("c", vec![[0.1234567890123, -3.5, 1e-7], [1.0, 2.0, 3.0]]).unwrap();
        write_cloud_text(&cloud, &path).unwrap();
        let back = read_cloud_text(&path).unwrap();
        assert_eq!(back.points, cloud.points);
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pnpc");
        std::fs::write(&path, b"XXXX\x01\x00\x00\x00").unwrap();
        assert!(read_cloud_binary(&path).is_err());
    }

    #[test]
    fn text_error_carries_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.xyz");
        std::fs::write(&path, "0 0 0\n1 2\n").unwrap();
        match read_cloud_text(&path) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
