use std::fmt::Write as _;
use std::path::Path;

use super::GroundTruthPores;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::pores::format_support::{check_token, parse_header, parse_num};

/// `POREGT 1 <source_id> <ppi> <count>` then `x y` per line.
pub fn write_ground_truth(t: &GroundTruthPores) -> Result<String> {
    check_token(&t.source_id)?;
    let mut s = format!("POREGT 1 {} {} {}\n", t.source_id, t.ppi, t.points.len());
    for p in &t.points {
        writeln!(s, "{:.6} {:.6}", p.x, p.y).unwrap();
    }
    Ok(s)
}

pub fn parse_ground_truth(text: &str) -> Result<GroundTruthPores> {
    let mut lines = text.lines();
    let h = parse_header(lines.next(), "POREGT", 5)?;
    let ppi: u32 = parse_num(h[3], 1, "ppi")?;
    let count: usize = parse_num(h[4], 1, "count")?;
    let mut points = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::parse(ln, "expected 2 fields"));
        }
        points.push(Point::new(parse_num(f[0], ln, "x")?, parse_num(f[1], ln, "y")?));
    }
    if points.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} points, found {}", points.len()),
        ));
    }
    Ok(GroundTruthPores::new(h[2], ppi, points))
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruthPores> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_exact() {
        let t = GroundTruthPores::new("s1", 1000, vec![Point::new(1.5, 2.25), Point::new(100.0, 0.125)]);
        let text = write_ground_truth(&t).unwrap();
        assert_eq!(text, "POREGT 1 s1 1000 2\n1.500000 2.250000\n100.000000 0.125000\n");
        assert_eq!(write_ground_truth(&parse_ground_truth(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(parse_ground_truth("POREGT 1 s 1000 2\n1 2\n").is_err());
        assert!(parse_ground_truth("PORETPL 1 s 1000 0\n").is_err());
    }
}
