//! SHA-256 helpers shared by bundle writing and decomposition metadata.

use ndarray::Array2;
use sha2::{Digest, Sha256};

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of field contents: every value as little-endian f64, fields
/// concatenated in the order given, rows in row-major order.
pub(crate) fn digest_fields(fields: &[&Array2<f64>]) -> String {
    let mut hasher = Sha256::new();
    for field in fields {
        for &v in field.iter() {
            hasher.update(v.to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}
