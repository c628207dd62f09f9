//! Canonical structured-text encoding and content hashing.
//!
//! Every persisted or hashed value goes through [`to_canonical`]: compact JSON
//! with struct fields in declaration order and maps in key order (all maps in
//! the model are `BTreeMap`). Two equal values always encode to the same bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Compact canonical JSON.
pub fn to_canonical<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("model types always serialize")
}

/// Indented canonical JSON, used for golden files and CLI output.
pub fn to_canonical_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("model types always serialize")
}

/// Hex SHA-256 of the canonical encoding.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    hex::encode(Sha256::digest(to_canonical(value).as_bytes()))
}
