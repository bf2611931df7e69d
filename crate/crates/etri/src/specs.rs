//! Inputs: rectangle boundary partitions and hemmed domains.
//!
//! A partition is either JSON:
//! ```json
//! {"width": 2, "height": 1, "lambda": 2, "sides": [[0, 1, 2], [0, 1], [0, 2], [0, 0.5, 1]]}
//! ```
//! or plain text with one coordinate per line under the side headers
//! `S0` (bottom, x), `S1` (right, y), `S2` (top, x) and `S3` (left, y); `#`
//! starts a comment:
//! ```text
//! S0
//! 0
//! 1
//! 2
//! S1
//! 0
//! 1
//! ...
//! ```
//! A domain; each curve gives exactly one of `terms` (`[k, re, im]` for the
//! Laurent coefficient of `z^k`), `hole` or `outer`:
//! ```json
//! {"epsilon": 0.1, "curves": [
//!   {"hole": {"centre": [0, 0], "r": 0.2}, "radius": 2.718281828459045, "degree": 12},
//!   {"outer": {"centre": [0, 0], "r": 2}, "radius": 2.718281828459045, "degree": 12}]}
//! ```
//! A chain is `{"pieces": [domain, ...]}`.

use etri_core::hemmed::{BoundaryCurve, HemmedDomainSpec};
use etri_core::rect::BoundaryPartition;
use etri_core::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{FormatError, ParseError};
use crate::etri_format::tokenize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub width: f64,
    pub height: f64,
    pub lambda: f64,
    pub sides: [Vec<f64>; 4],
}

impl From<PartitionFile> for BoundaryPartition {
    fn from(p: PartitionFile) -> Self {
        BoundaryPartition::new(p.width, p.height, p.sides, p.lambda)
    }
}

impl From<&BoundaryPartition> for PartitionFile {
    fn from(p: &BoundaryPartition) -> Self {
        PartitionFile { width: p.width, height: p.height, lambda: p.lambda, sides: p.sides.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleFile {
    pub centre: [f64; 2],
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<(i32, f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole: Option<CircleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<CircleFile>,
    pub radius: f64,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub epsilon: f64,
    pub curves: Vec<CurveFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub pieces: Vec<DomainFile>,
}

impl CurveFile {
    fn to_curve(&self, index: usize) -> Result<BoundaryCurve, String> {
        let centre = |c: &CircleFile| Complex::new(c.centre[0], c.centre[1]);
        match (&self.terms, &self.hole, &self.outer) {
            (Some(t), None, None) => {
                Ok(BoundaryCurve::new(t.iter().map(|&(k, re, im)| (k, Complex::new(re, im))).collect(), self.radius, self.degree))
            }
            (None, Some(c), None) => Ok(BoundaryCurve::hole(centre(c), c.r, self.radius, self.degree)),
            (None, None, Some(c)) => Ok(BoundaryCurve::outer(centre(c), c.r, self.radius, self.degree)),
            _ => Err(format!("curve {index} must give exactly one of `terms`, `hole` or `outer`")),
        }
    }
}

impl DomainFile {
    pub fn to_spec(&self) -> Result<HemmedDomainSpec, String> {
        let curves = self.curves.iter().enumerate().map(|(i, c)| c.to_curve(i)).collect::<Result<_, _>>()?;
        Ok(HemmedDomainSpec { curves, epsilon: self.epsilon })
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse(ParseError::from(e)))
}

/// Reads a JSON partition.
pub fn read_partition(text: &str) -> Result<BoundaryPartition, FormatError> {
    Ok(parse_json::<PartitionFile>(text)?.into())
}

/// Reads a partition in either format. For the text format the rectangle
/// defaults to the last coordinates of `S0` and `S1`; `lambda` is taken from
/// the argument. Explicit dimensions must agree with a JSON file.
pub fn read_partition_any(text: &str, width: Option<f64>, height: Option<f64>, lambda: f64) -> Result<BoundaryPartition, FormatError> {
    if text.trim_start().starts_with('{') {
        let p = read_partition(text)?;
        let clash = |given: Option<f64>, have: f64| given.is_some_and(|g| g != have);
        if clash(width, p.width) || clash(height, p.height) {
            return Err(FormatError::Parse(ParseError::new(1, 1, "rectangle dimensions disagree with the partition file")));
        }
        return Ok(p);
    }
    let mut sides: [Option<Vec<f64>>; 4] = Default::default();
    let mut current: Option<usize> = None;
    let mut last_line = 1;
    for (line, tokens) in tokenize(text) {
        last_line = line;
        let (col, word) = tokens[0];
        if tokens.len() != 1 {
            return Err(FormatError::Parse(ParseError::new(line, tokens[1].0, "expected one value per line")));
        }
        if let Some(k) = ["S0", "S1", "S2", "S3"].iter().position(|h| *h == word) {
            if sides[k].is_some() {
                return Err(FormatError::Parse(ParseError::new(line, col, format!("side {word} given twice"))));
            }
            sides[k] = Some(Vec::new());
            current = Some(k);
            continue;
        }
        let Some(k) = current else {
            return Err(FormatError::Parse(ParseError::new(line, col, "expected a side header S0..S3")));
        };
        let x: f64 = word.parse().map_err(|_| FormatError::Parse(ParseError::new(line, col, format!("expected a number, found `{word}`"))))?;
        if !x.is_finite() {
            return Err(FormatError::Parse(ParseError::new(line, col, "coordinate is not finite")));
        }
        sides[k].as_mut().unwrap().push(x);
    }
    let missing = sides.iter().position(|s| s.as_ref().is_none_or(|v| v.is_empty()));
    if let Some(k) = missing {
        return Err(FormatError::Parse(ParseError::new(last_line, 1, format!("side S{k} is missing or empty"))));
    }
    let [s0, s1, s2, s3] = sides.map(Option::unwrap);
    let w = width.unwrap_or(*s0.last().unwrap());
    let h = height.unwrap_or(*s1.last().unwrap());
    Ok(BoundaryPartition::new(w, h, [s0, s1, s2, s3], lambda))
}

/// Writes the text partition format.
pub fn write_partition_text(p: &BoundaryPartition) -> String {
    let mut out = String::new();
    for (k, side) in p.sides.iter().enumerate() {
        out.push_str(&format!("S{k}\n"));
        for x in side {
            out.push_str(&format!("{x:?}\n"));
        }
    }
    out
}

pub fn read_domain(text: &str) -> Result<HemmedDomainSpec, FormatError> {
    parse_json::<DomainFile>(text)?.to_spec().map_err(|m| FormatError::Parse(ParseError::new(1, 1, m)))
}

pub fn read_chain(text: &str) -> Result<Vec<HemmedDomainSpec>, FormatError> {
    let chain: ChainFile = parse_json(text)?;
    chain.pieces.iter().map(|p| p.to_spec().map_err(|m| FormatError::Parse(ParseError::new(1, 1, m)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_shorthands() {
        let text = r#"{"epsilon": 0.1, "curves": [
            {"hole": {"centre": [0, 0], "r": 0.2}, "radius": 2.5, "degree": 12},
            {"terms": [[0, 0, 0], [-1, 2, 0]], "radius": 2.5, "degree": 12}]}"#;
        let spec = read_domain(text).unwrap();
        assert_eq!(spec.curves[0], BoundaryCurve::hole(Complex::new(0.0, 0.0), 0.2, 2.5, 12));
        assert_eq!(spec.curves[1].eval(Complex::new(2.0, 0.0)), Complex::new(1.0, 0.0));
    }

    #[test]
    fn json_errors_have_positions() {
        match read_domain("{\"epsilon\": 0.1,\n \"curvez\": []}") {
            Err(FormatError::Parse(p)) => assert_eq!(p.line, 2),
            other => panic!("{other:?}"),
        }
        let both = r#"{"epsilon": 0.1, "curves": [{"hole": {"centre": [0, 0], "r": 1}, "outer": {"centre": [0, 0], "r": 2}, "radius": 2, "degree": 4}]}"#;
        assert!(matches!(read_domain(both), Err(FormatError::Parse(_))));
    }

    #[test]
    fn text_partition() {
        let p = BoundaryPartition::uniform(2.0, 1.0, 4, 2, 2.0);
        let text = write_partition_text(&p);
        assert_eq!(read_partition_any(&text, None, None, 2.0).unwrap(), p);
        let json = serde_json::to_string(&PartitionFile::from(&p)).unwrap();
        assert_eq!(read_partition_any(&json, Some(2.0), None, 9.0).unwrap(), p);
        assert!(read_partition_any(&json, Some(3.0), None, 2.0).is_err());
        match read_partition_any("S0\n0\n1\nS1\n0\nq\n", None, None, 2.0) {
            Err(FormatError::Parse(e)) => assert_eq!((e.line, e.column), (6, 1)),
            other => panic!("{other:?}"),
        }
        assert!(read_partition_any("0\n", None, None, 2.0).is_err());
        assert!(read_partition_any("S0\n0\n1\nS0\n", None, None, 2.0).is_err());
        assert!(read_partition_any("S0\n0\n1\nS1\n0\n1\n", None, None, 2.0).is_err());
    }

    #[test]
    fn partition_round_trip() {
        let p = BoundaryPartition::uniform(2.0, 1.0, 4, 2, 2.0);
        let text = serde_json::to_string(&PartitionFile::from(&p)).unwrap();
        assert_eq!(read_partition(&text).unwrap(), p);
    }
}
