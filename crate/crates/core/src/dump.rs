//! Flat binary field dumps: a 64-byte header (magic, version, d, m, ℓ as
//! 8-byte little-endian values, then zero padding) followed by the values as
//! little-endian f64 in row-major order.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::twobody::{BoxGeometry, GridField};

pub const MAGIC: &[u8; 8] = b"BOSEGRID";
pub const VERSION: u64 = 1;
pub const HEADER_LEN: usize = 64;

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn encode(field: &GridField) -> Vec<u8> {
    let g = &field.geometry;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.d as u64).to_le_bytes());
    out.extend_from_slice(&(g.m as u64).to_le_bytes());
    out.extend_from_slice(&g.ell.to_le_bytes());
    out.resize(HEADER_LEN, 0);
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<GridField> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Invalid("not a field dump (bad magic)".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
    if word(1) != VERSION {
        return Err(Error::Invalid(format!("unsupported field dump version {}", word(1))));
    }
    let (d, m) = (word(2) as usize, word(3) as usize);
    let ell = f64::from_le_bytes(bytes[32..40].try_into().unwrap());
    let geometry = BoxGeometry::new(d, ell, m)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * geometry.unknowns() {
        return Err(Error::Dimension(format!(
            "dump holds {} bytes of values, geometry needs {}",
            body.len(),
            8 * geometry.unknowns()
        )));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    GridField::new(geometry, values)
}

pub fn write_field(path: &Path, field: &GridField) -> Result<()> {
    write_atomic(path, &encode(field))
}

pub fn read_field(path: &Path) -> Result<GridField> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = BoxGeometry::new(2, 3.5, 4).unwrap();
        let f = GridField::new(g, (0..256).map(|i| i as f64 * 0.25 - 3.0).collect()).unwrap();
        let bytes = encode(&f);
        assert_eq!(bytes.len(), 64 + 256 * 8);
        assert_eq!(&bytes[..8], b"BOSEGRID");
        assert!(bytes[40..64].iter().all(|&b| b == 0));
        assert_eq!(decode(&bytes).unwrap(), f);
    }

    #[test]
    fn rejects_truncated_body() {
        let f = GridField::constant(BoxGeometry::new(1, 1.0, 4).unwrap(), 1.0);
        let bytes = encode(&f);
        assert!(matches!(decode(&bytes[..bytes.len() - 8]), Err(Error::Dimension(_))));
        assert!(decode(b"nonsense").is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.bin");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
