//! `GSM1` binary model files.
//!
//! Layout (little-endian): the 4-byte magic `GSM1`, `u32 nx, ny`,
//! `f64 x0, y0, dx, dy`, then `nx * ny` velocities and `nx * ny` densities,
//! each row-major with x varying fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::model::MaterialField;

pub const MAGIC: &[u8; 4] = b"GSM1";
pub const HEADER_BYTES: usize = 4 + 2 * 4 + 4 * 8;

/// Halo given to geometries read from disk; callers resample onto their own grid.
pub const LOADED_HALO: usize = 2;

pub fn encode_model(field: &MaterialField, geom: &GridGeometry) -> Vec<u8> {
    let n = geom.nx * geom.ny;
    let mut out = Vec::with_capacity(HEADER_BYTES + 16 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(geom.nx as u32).to_le_bytes());
    out.extend_from_slice(&(geom.ny as u32).to_le_bytes());
    for v in [geom.x0, geom.y0, geom.dx, geom.dy] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for f in [&field.c, &field.rho] {
        for v in f.interior_iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<(MaterialField, GridGeometry)> {
    if bytes.len() < 4 {
        return Err(Error::Truncated { expected: HEADER_BYTES, found: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if &magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Truncated { expected: HEADER_BYTES, found: bytes.len() });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(4), u32_at(8));
    let header = [f64_at(12), f64_at(20), f64_at(28), f64_at(36)];
    if let Some(k) = header.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "header", index: k });
    }
    let [x0, y0, dx, dy] = header;
    let n = nx * ny;
    let expected = HEADER_BYTES + 16 * n;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    let read = |base: usize| -> Vec<f64> { (0..n).map(|k| f64_at(base + 8 * k)).collect() };
    let speed = read(HEADER_BYTES);
    let density = read(HEADER_BYTES + 8 * n);
    if let Some(k) = speed.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "velocity", index: k });
    }
    if let Some(k) = density.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "density", index: k });
    }
    let geom = GridGeometry::new(nx, ny, dx, dy, x0, y0, LOADED_HALO)?;
    let field = MaterialField::from_speed_density(&geom, &speed, &density)?;
    Ok((field, geom))
}

pub fn save_model(field: &MaterialField, geom: &GridGeometry, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_model(field, geom))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(MaterialField, GridGeometry)> {
    decode_model(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_3x3() -> (MaterialField, GridGeometry) {
        let g = GridGeometry::new(3, 3, 1.0, 1.0, 0.0, 0.0, 2).unwrap();
        (MaterialField::uniform(&g, 1500.0, 1.0).unwrap(), g)
    }

    #[test]
    fn byte_count_matches_layout() {
        let (m, g) = uniform_3x3();
        let bytes = encode_model(&m, &g);
        // magic + 2 u32 + 4 f64 + 9 velocities + 9 densities
        assert_eq!(bytes.len(), 4 + 8 + 32 + 9 * 8 + 9 * 8);
        assert_eq!(&bytes[..4], b"GSM1");
    }

    #[test]
    fn distinct_errors_for_corrupt_files() {
        let (m, g) = uniform_3x3();
        let mut bytes = encode_model(&m, &g);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_model(&bad), Err(Error::BadMagic { .. })));
        assert!(matches!(decode_model(&bytes[..bytes.len() - 1]), Err(Error::Truncated { .. })));
        assert!(matches!(decode_model(&bytes[..10]), Err(Error::Truncated { .. })));
        let off = HEADER_BYTES + 8 * 4;
        bytes[off..off + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(
            decode_model(&bytes),
            Err(Error::NonFinite { what: "velocity", index: 4 })
        ));
    }

    #[test]
    fn file_round_trip() {
        let (m, g) = uniform_3x3();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.gsm");
        save_model(&m, &g, &path).unwrap();
        let (m2, g2) = load_model(&path).unwrap();
        assert_eq!(g2, g);
        assert_eq!(m2, m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip_is_bit_exact(
            nx in 3usize..7, ny in 3usize..7,
            dx in 0.01f64..100.0, dy in 0.01f64..100.0,
            x0 in -1e4f64..1e4, y0 in -1e4f64..1e4,
            seed in proptest::collection::vec((1e-3f64..1e4, 1e-3f64..1e4), 49),
        ) {
            let g = GridGeometry::new(nx, ny, dx, dy, x0, y0, 2).unwrap();
            let n = nx * ny;
            let speed: Vec<f64> = seed[..n].iter().map(|p| p.0).collect();
            let rho: Vec<f64> = seed[..n].iter().map(|p| p.1).collect();
            let m = MaterialField::from_speed_density(&g, &speed, &rho).unwrap();
            let (m2, g2) = decode_model(&encode_model(&m, &g)).unwrap();
            prop_assert_eq!(g2, g);
            prop_assert_eq!(m2.c.interior(), speed);
            prop_assert_eq!(m2.rho.interior(), rho);
        }
    }
}
