use std::path::Path;

use crate::error::{Result, SharcError};
use crate::mesh::NormalizationTransform;

pub const MAGIC: [u8; 4] = *b"SHRC";
pub const FORMAT_VERSION: u16 = 1;
/// magic, version, bandwidth, anchor count, then center (3 × f64) and scale (f64).
pub const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 32;

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorRecord {
    pub position: [f32; 3],
    pub coeffs: Vec<f32>,
}

/// Stored shape: anchors with their coefficient vectors plus the transform
/// back to the original mesh frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SharcRepresentation {
    pub version: u16,
    pub bandwidth: u16,
    pub transform: NormalizationTransform,
    pub anchors: Vec<AnchorRecord>,
}

impl SharcRepresentation {
    pub fn new(bandwidth: u16, transform: NormalizationTransform) -> Self {
        SharcRepresentation {
            version: FORMAT_VERSION,
            bandwidth,
            transform,
            anchors: Vec::new(),
        }
    }

    pub fn coeffs_per_anchor(&self) -> usize {
        let l = self.bandwidth as usize;
        (l + 1) * (l + 1)
    }
}

pub fn serialized_len(anchor_count: usize, bandwidth: u16) -> usize {
    let l = bandwidth as usize;
    HEADER_LEN + anchor_count * (12 + 4 * (l + 1) * (l + 1))
}

pub fn serialize(rep: &SharcRepresentation) -> Result<Vec<u8>> {
    let per = rep.coeffs_per_anchor();
    let count = u32::try_from(rep.anchors.len()).map_err(|_| SharcError::InvalidArgument("too many anchors".into()))?;
    let mut out = Vec::with_capacity(serialized_len(rep.anchors.len(), rep.bandwidth));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&rep.version.to_le_bytes());
    out.extend_from_slice(&rep.bandwidth.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    for c in rep.transform.center {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&rep.transform.scale.to_le_bytes());
    for a in &rep.anchors {
        if a.coeffs.len() != per {
            return Err(SharcError::InvalidArgument(format!(
                "anchor has {} coefficients, expected {per}",
                a.coeffs.len()
            )));
        }
        if a.position.iter().chain(a.coeffs.iter()).any(|v| !v.is_finite()) {
            return Err(SharcError::NonFinite("anchor payload"));
        }
        for p in a.position {
            out.extend_from_slice(&p.to_le_bytes());
        }
        for c in &a.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut buf = [0u8; N];
        buf.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        buf
    }
    fn f32(&mut self) -> f32 {
        f32::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<SharcRepresentation> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(SharcError::BadMagic(bytes[..4].try_into().unwrap()));
        }
        return Err(SharcError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take();
    if magic != MAGIC {
        return Err(SharcError::BadMagic(magic));
    }
    let version = u16::from_le_bytes(r.take());
    if version != FORMAT_VERSION {
        return Err(SharcError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let bandwidth = u16::from_le_bytes(r.take());
    let count = u32::from_le_bytes(r.take()) as usize;
    let center = [r.f64(), r.f64(), r.f64()];
    let scale = r.f64();
    if center.iter().any(|v| !v.is_finite()) || !scale.is_finite() || scale <= 0.0 {
        return Err(SharcError::NonFinite("normalization transform"));
    }
    let expected = serialized_len(count, bandwidth);
    if bytes.len() != expected {
        if bytes.len() < expected {
            return Err(SharcError::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        return Err(SharcError::malformed(
            "sharc",
            format!("{} trailing bytes", bytes.len() - expected),
        ));
    }
    let mut rep = SharcRepresentation {
        version,
        bandwidth,
        transform: NormalizationTransform { center, scale },
        anchors: Vec::with_capacity(count),
    };
    let per = rep.coeffs_per_anchor();
    for _ in 0..count {
        let position = [r.f32(), r.f32(), r.f32()];
        let coeffs: Vec<f32> = (0..per).map(|_| r.f32()).collect();
        if position.iter().chain(coeffs.iter()).any(|v| !v.is_finite()) {
            return Err(SharcError::NonFinite("anchor payload"));
        }
        rep.anchors.push(AnchorRecord { position, coeffs });
    }
    Ok(rep)
}

/// Writes the representation and returns the number of bytes written.
pub fn write_representation(rep: &SharcRepresentation, path: &Path) -> Result<usize> {
    let bytes = serialize(rep)?;
    std::fs::write(path, &bytes).map_err(|e| SharcError::io(path, e))?;
    Ok(bytes.len())
}

pub fn read_representation(path: &Path) -> Result<SharcRepresentation> {
    let bytes = std::fs::read(path).map_err(|e| SharcError::io(path, e))?;
    deserialize(&bytes)
}
