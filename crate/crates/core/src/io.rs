//! JSON input and output. Floats are written with 17 significant digits so that
//! output round-trips exactly and is byte-identical across runs.

use std::io;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveError, CurveFile, LoopImmersion};
use crate::slice::NormalSection;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("section coefficients must be nonempty rows of equal length with finite entries")]
    Section,
}

/// Writes every `f64` in scientific notation with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).expect("serializing in-memory values cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses a curve file; NaN and infinite coordinates are rejected.
pub fn parse_curve(text: &str) -> Result<LoopImmersion, IoError> {
    let file: CurveFile = serde_json::from_str(text)?;
    Ok(LoopImmersion::try_from(file)?)
}

pub fn curve_json(curve: &LoopImmersion) -> String {
    to_json(&CurveFile::from(curve))
}

/// `{"base": <path of the base curve file>, "coeffs": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionFile {
    pub base: String,
    pub coeffs: Vec<Vec<f64>>,
}

impl SectionFile {
    pub fn new(base: impl Into<String>, s: &NormalSection) -> Self {
        Self { base: base.into(), coeffs: s.rows() }
    }

    pub fn section(&self) -> Result<NormalSection, IoError> {
        NormalSection::from_rows(&self.coeffs).ok_or(IoError::Section)
    }
}

pub fn parse_section(text: &str) -> Result<SectionFile, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let xs = vec![0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0];
        let text = to_json(&xs);
        assert!(text.contains("1.0000000000000001e-1"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, xs);
    }

    #[test]
    fn curve_reader_rejects_bad_input() {
        assert!(parse_curve(r#"{"ambient_dim": 2, "samples": [[0, 1], [1]]}"#).is_err());
        assert!(parse_curve(r#"{"ambient_dim": 2, "samples": [[0, 1]], "extra": 1}"#).is_err());
        let c = crate::generate::CurveGeneratorSpec::circle(16).generate().unwrap();
        assert_eq!(parse_curve(&curve_json(&c)).unwrap(), c);
    }
}
