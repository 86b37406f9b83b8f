use std::fmt::Write as _;
use std::path::Path;

use super::{Pore, PoreTemplate};
use crate::error::{Error, Result};

pub(crate) fn check_token(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(Error::domain(format!(
            "identifier {id:?} must be non-empty and contain no whitespace"
        )));
    }
    Ok(())
}

/// `PORETPL 1 <source_id> <ppi> <count>` then `x y area circularity confidence`.
pub fn write_pore_template(t: &PoreTemplate) -> Result<String> {
    check_token(&t.source_id)?;
    let mut s = format!("PORETPL 1 {} {} {}\n", t.source_id, t.ppi, t.pores.len());
    for p in &t.pores {
        writeln!(
            s,
            "{:.6} {:.6} {:.6} {:.6} {:.6}",
            p.x, p.y, p.area, p.circularity, p.confidence
        )
        .unwrap();
    }
    Ok(s)
}

pub(crate) fn parse_header<'a>(
    line: Option<&'a str>,
    magic: &str,
    fields: usize,
) -> Result<Vec<&'a str>> {
    let line = line.ok_or_else(|| Error::parse(1, "empty file"))?;
    let tok: Vec<&str> = line.split_whitespace().collect();
    if tok.first() != Some(&magic) {
        return Err(Error::parse(1, format!("expected {magic} header")));
    }
    if tok.get(1) != Some(&"1") {
        return Err(Error::parse(1, "unsupported format version"));
    }
    if tok.len() != fields {
        return Err(Error::parse(1, format!("{magic} header needs {fields} fields")));
    }
    Ok(tok)
}

pub(crate) fn parse_num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {s:?}")))
}

/// Parses the text form. Pore order is kept as written.
pub fn parse_pore_template(text: &str) -> Result<PoreTemplate> {
    let mut lines = text.lines();
    let h = parse_header(lines.next(), "PORETPL", 5)?;
    let source_id = h[2].to_string();
    let ppi: u32 = parse_num(h[3], 1, "ppi")?;
    let count: usize = parse_num(h[4], 1, "count")?;
    let mut pores = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::parse(ln, "expected 5 fields"));
        }
        pores.push(Pore {
            x: parse_num(f[0], ln, "x")?,
            y: parse_num(f[1], ln, "y")?,
            area: parse_num(f[2], ln, "area")?,
            circularity: parse_num(f[3], ln, "circularity")?,
            confidence: parse_num(f[4], ln, "confidence")?,
        });
    }
    if pores.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} pores, found {}", pores.len()),
        ));
    }
    Ok(PoreTemplate {
        source_id,
        ppi,
        pores,
    })
}

pub fn read_pore_template(path: &Path) -> Result<PoreTemplate> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pore_template(&text)
}
