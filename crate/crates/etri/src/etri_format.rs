//! The `ETRI 1` text format for abstract equilateral surfaces.
//!
//! ```text
//! ETRI 1
//! faces 2
//! glue 0 0 1 0
//! glue 0 1 1 2
//! glue 0 2 1 1
//! colour 0 -1
//! ```
//!
//! `#` starts a comment. Vertex class ids in `colour` lines are canonical.

use std::fmt::Write;

use etri_core::surface::{Colour, Colouring, EquilateralSurface, Slot};

use crate::error::{FormatError, ParseError};

/// A surface with an optional vertex colouring.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceFile {
    pub surface: EquilateralSurface,
    pub colouring: Option<Colouring>,
}

/// Non-empty lines with comments removed, as `(line, tokens)` where each
/// token carries its 1-based column.
pub(crate) fn tokenize(text: &str) -> impl Iterator<Item = (usize, Vec<(usize, &str)>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((s + 1, &line[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

pub(crate) fn expect_args<'a>(
    line: usize,
    tokens: &[(usize, &'a str)],
    count: usize,
) -> Result<Vec<(usize, &'a str)>, ParseError> {
    let (col, name) = tokens[0];
    if tokens.len() < count + 1 {
        let end = tokens.last().map_or(1, |t| t.0 + t.1.len());
        return Err(ParseError::new(line, end, format!("`{name}` expects {count} arguments")));
    }
    if tokens.len() > count + 1 {
        return Err(ParseError::new(line, tokens[count + 1].0, format!("unexpected token after `{name}` at column {col}")));
    }
    Ok(tokens[1..].to_vec())
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, (col, tok): (usize, &str), what: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError::new(line, col, format!("expected {what}, found `{tok}`")))
}

fn parse_colour(line: usize, (col, tok): (usize, &str)) -> Result<Colour, ParseError> {
    match tok {
        "-1" => Ok(Colour::MinusOne),
        "1" => Ok(Colour::One),
        "inf" => Ok(Colour::Infinity),
        _ => Err(ParseError::new(line, col, format!("expected -1, 1 or inf, found `{tok}`"))),
    }
}

/// Parses and validates an `ETRI 1` document.
pub fn read_etri(text: &str) -> Result<SurfaceFile, FormatError> {
    let mut lines = tokenize(text);
    match lines.next() {
        Some((_, t)) if t.len() == 2 && t[0].1 == "ETRI" && t[1].1 == "1" => {}
        Some((l, t)) => return Err(ParseError::new(l, t[0].0, "expected header `ETRI 1`").into()),
        None => return Err(ParseError::new(1, 1, "missing header `ETRI 1`").into()),
    }
    let mut faces: Option<usize> = None;
    let mut gluings = Vec::new();
    let mut colours: Vec<(usize, usize, Colour)> = Vec::new();
    for (l, t) in lines {
        let (col, directive) = t[0];
        match directive {
            "faces" => {
                if faces.is_some() {
                    return Err(ParseError::new(l, col, "duplicate `faces` line").into());
                }
                let a = expect_args(l, &t, 1)?;
                faces = Some(parse_num(l, a[0], "a face count")?);
            }
            "glue" | "colour" if faces.is_none() => {
                return Err(ParseError::new(l, col, format!("`{directive}` before `faces`")).into());
            }
            "glue" => {
                let a = expect_args(l, &t, 4)?;
                let f1 = parse_num(l, a[0], "a face index")?;
                let s1 = parse_num(l, a[1], "a side index")?;
                let f2 = parse_num(l, a[2], "a face index")?;
                let s2 = parse_num(l, a[3], "a side index")?;
                gluings.push((Slot::new(f1, s1), Slot::new(f2, s2)));
            }
            "colour" => {
                let a = expect_args(l, &t, 2)?;
                colours.push((l, parse_num(l, a[0], "a vertex class id")?, parse_colour(l, a[1])?));
            }
            _ => return Err(ParseError::new(l, col, format!("unknown directive `{directive}`")).into()),
        }
    }
    let faces = faces.ok_or_else(|| ParseError::new(text.lines().count().max(1), 1, "missing `faces` line"))?;
    let surface = EquilateralSurface::build(faces, &gluings)?;
    surface.validate()?;
    let colouring = if colours.is_empty() {
        None
    } else {
        let n = surface.vertex_count();
        let mut slots: Vec<Option<Colour>> = vec![None; n];
        for (l, v, c) in colours {
            if v >= n {
                return Err(FormatError::InvalidColouring(format!("line {l}: vertex class {v} out of range (surface has {n})")));
            }
            if slots[v].replace(c).is_some() {
                return Err(FormatError::InvalidColouring(format!("line {l}: vertex class {v} coloured twice")));
            }
        }
        let colours: Option<Vec<Colour>> = slots.into_iter().collect();
        let colouring = Colouring { colours: colours.ok_or_else(|| FormatError::InvalidColouring("some vertex classes have no colour".into()))? };
        if !colouring.is_valid_for(&surface) {
            return Err(FormatError::InvalidColouring("some face does not see three distinct colours".into()));
        }
        Some(colouring)
    };
    Ok(SurfaceFile { surface, colouring })
}

pub fn write_etri(surface: &EquilateralSurface, colouring: Option<&Colouring>) -> String {
    let mut out = String::from("ETRI 1\n");
    writeln!(out, "faces {}", surface.face_count()).unwrap();
    for (a, b) in surface.gluings() {
        writeln!(out, "glue {} {} {} {}", a.face, a.side, b.face, b.side).unwrap();
    }
    if let Some(c) = colouring {
        for (v, col) in c.colours.iter().enumerate() {
            writeln!(out, "colour {v} {col}").unwrap();
        }
    }
    out
}
