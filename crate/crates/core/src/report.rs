//! Serialization helpers shared by every JSON report.
//!
//! Floats are written with 17 significant digits so that re-running a
//! command reproduces its report byte for byte. Rationals are written as
//! `"p/q"` strings.

use num_rational::BigRational;
use serde::Serializer;
use serde_json::value::RawValue;

use crate::poly::rational_to_string;

/// Fixed 17-significant-digit rendering. Non-finite values become `null`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        "null".to_string()
    }
}

pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format_f64(*x)).map_err(serde::ser::Error::custom)?;
    serde::Serialize::serialize(&raw, s)
}

pub fn serialize_f64_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F64(*x))?;
    }
    seq.end()
}

pub fn serialize_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_f64(v, s),
        None => s.serialize_none(),
    }
}

/// Newtype that serializes through [`format_f64`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64(pub f64);

impl serde::Serialize for F64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_f64(&self.0, s)
    }
}

pub fn serialize_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(q))
}

pub mod rational_vec {
    use num_rational::BigRational;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    use crate::poly::rational_to_string;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&rational_to_string(q))?;
        }
        seq.end()
    }
}

/// Serializes via `Display`.
pub fn serialize_display<T: std::fmt::Display, S: Serializer>(
    v: &T,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(
            serde_json::to_string(&F64(1.5)).unwrap(),
            "1.5000000000000000e0"
        );
        assert_eq!(serde_json::to_string(&F64(f64::NAN)).unwrap(), "null");
        let back: f64 = format_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }
}
