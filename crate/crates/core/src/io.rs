//! Text formatting shared by the JSON and CSV outputs.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Float with 17 significant digits, e.g. `3.1415926535897931e0`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `f64` that serializes to JSON with 17 significant digits; non-finite
/// values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt_f64(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// `serialize_with` helper for `f64` fields.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Float(*x).serialize(s)
}

/// `serialize_with` helper for `Vec<f64>` fields.
pub fn ser_f64_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| Float(x)))
}

/// `serialize_with` helper for matrices stored as rows.
pub fn ser_f64_rows<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rows.iter().map(|r| r.iter().map(|&x| Float(x)).collect::<Vec<_>>()))
}

/// Converts a slice to serializable floats.
pub fn floats<T: Copy + Into<f64>>(xs: &[T]) -> Vec<Float> {
    xs.iter().map(|&x| Float(x.into())).collect()
}
