//! Binary field snapshots.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `SWFIELD1` |
//! | 4 | endianness tag `0x01020304` |
//! | 4 | cutoff `M` |
//! | 4 | number of fields `F` |
//! | 4 | length `L` of the provenance text |
//! | L | provenance, UTF-8 |
//! | F·(2M+1)³·16 | `(Re, Im)` as `f64` pairs, lexicographic lattice order, field after field |

use std::io::{self, Read, Write};

use supwave_core::{CauchyPair, FourierField};

pub const MAGIC: &[u8; 8] = b"SWFIELD1";
const ENDIAN_TAG: u32 = 0x0102_0304;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a field snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported byte order tag {0:#010x}")]
    BadEndianness(u32),
    #[error("snapshot holds {got} fields, expected {expected}")]
    FieldCount { expected: u32, got: u32 },
    #[error("snapshot provenance is not UTF-8")]
    BadProvenance,
    #[error("snapshot coefficients are not Hermitian: {0}")]
    Invalid(#[from] supwave_core::Error),
}

/// Decoded snapshot contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub provenance: String,
    pub fields: Vec<FourierField>,
}

pub fn write_fields<W: Write>(mut out: W, fields: &[&FourierField], provenance: &str) -> io::Result<()> {
    let cutoff = fields.first().map_or(0, |f| f.cutoff());
    if fields.iter().any(|f| f.cutoff() != cutoff) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "fields in one snapshot must share a cutoff"));
    }
    let mut buf = Vec::with_capacity(24 + provenance.len() + fields.len() * fields.first().map_or(0, |f| f.coeffs().len()) * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&ENDIAN_TAG.to_le_bytes());
    buf.extend_from_slice(&(cutoff as u32).to_le_bytes());
    buf.extend_from_slice(&(fields.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(provenance.len() as u32).to_le_bytes());
    buf.extend_from_slice(provenance.as_bytes());
    for f in fields {
        for c in f.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out.write_all(&buf)
}

pub fn write_pair<W: Write>(out: W, pair: &CauchyPair, provenance: &str) -> io::Result<()> {
    write_fields(out, &[&pair.u0, &pair.u1], provenance)
}

fn read_u32(input: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<Snapshot, SnapshotError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let tag = read_u32(&mut input)?;
    if tag != ENDIAN_TAG {
        return Err(SnapshotError::BadEndianness(tag));
    }
    let cutoff = read_u32(&mut input)? as usize;
    let count = read_u32(&mut input)?;
    let len = read_u32(&mut input)? as usize;
    let mut text = vec![0u8; len];
    input.read_exact(&mut text)?;
    let provenance = String::from_utf8(text).map_err(|_| SnapshotError::BadProvenance)?;
    let side = 2 * cutoff + 1;
    let n = side * side * side;
    let mut fields = Vec::with_capacity(count as usize);
    let mut raw = vec![0u8; n * 16];
    for _ in 0..count {
        input.read_exact(&mut raw)?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                supwave_core::Complex64::new(re, im)
            })
            .collect();
        fields.push(FourierField::from_coeffs(cutoff, coeffs)?);
    }
    Ok(Snapshot { provenance, fields })
}

/// Reads a two-field snapshot as `(u₀, u₁)` with regularity label `s`.
pub fn read_pair<R: Read>(input: R, s: f64) -> Result<(CauchyPair, String), SnapshotError> {
    let snap = read_snapshot(input)?;
    if snap.fields.len() != 2 {
        return Err(SnapshotError::FieldCount { expected: 2, got: snap.fields.len() as u32 });
    }
    let mut it = snap.fields.into_iter();
    let (u0, u1) = (it.next().expect("two fields"), it.next().expect("two fields"));
    Ok((CauchyPair::new(u0, u1, s)?, snap.provenance))
}
