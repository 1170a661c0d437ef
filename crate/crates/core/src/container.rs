//! Versioned little-endian binary container shared by checkpoints and
//! activation tables.
//!
//! Layout: 8-byte magic, `u32` version, `u64` header length, UTF-8 JSON
//! header, then the payload as raw `f64` values.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: String },
    #[error("unsupported version {found}, expected {expected}")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("truncated container")]
    Truncated,
    #[error("payload length {0} is not a whole number of f64 values")]
    RaggedPayload(usize),
    #[error("malformed header: {0}")]
    Header(String),
}

pub fn write(magic: &[u8; 8], version: u32, header: &str, payload: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + header.len() + 8 * payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Splits a container into its JSON header and payload.
pub fn read<'a>(bytes: &'a [u8], magic: &[u8; 8], version: u32) -> Result<(&'a str, Vec<f64>), ContainerError> {
    if bytes.len() < 20 {
        return Err(ContainerError::Truncated);
    }
    if &bytes[..8] != magic {
        return Err(ContainerError::BadMagic { expected: String::from_utf8_lossy(magic).into_owned() });
    }
    let found = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if found != version {
        return Err(ContainerError::UnsupportedVersion { found, expected: version });
    }
    let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if body.len() < header_len {
        return Err(ContainerError::Truncated);
    }
    let header =
        std::str::from_utf8(&body[..header_len]).map_err(|e| ContainerError::Header(e.to_string()))?;
    let raw = &body[header_len..];
    if raw.len() % 8 != 0 {
        return Err(ContainerError::RaggedPayload(raw.len()));
    }
    let payload = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((header, payload))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAGIC: &[u8; 8] = b"TESTCONT";

    #[test]
    fn round_trip_is_bit_exact() {
        let payload = [0.1, -0.0, f64::MIN_POSITIVE, 1e300];
        let bytes = write(MAGIC, 3, "{\"a\":1}", &payload);
        let (header, back) = read(&bytes, MAGIC, 3).unwrap();
        assert_eq!(header, "{\"a\":1}");
        let bits: Vec<u64> = back.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, payload.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_corruption() {
        let bytes = write(MAGIC, 1, "{}", &[1.0]);
        assert!(matches!(read(&bytes, b"OTHERMAG", 1), Err(ContainerError::BadMagic { .. })));
        assert!(matches!(read(&bytes, MAGIC, 2), Err(ContainerError::UnsupportedVersion { found: 1, .. })));
        assert!(matches!(read(&bytes[..bytes.len() - 3], MAGIC, 1), Err(ContainerError::RaggedPayload(5))));
        assert!(matches!(read(&bytes[..10], MAGIC, 1), Err(ContainerError::Truncated)));
    }
}
