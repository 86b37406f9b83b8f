use std::fmt::Write as _;
use std::path::Path;

use super::{Minutia, MinutiaPair, MinutiaPairSet, MinutiaeTemplate};
use crate::error::{Error, Result};
use crate::pores::format_support::{check_token, parse_header, parse_num};

/// `MNTTPL 1 <source_id> <ppi> <count>` then `x y angle kind quality`.
pub fn write_minutiae_template(t: &MinutiaeTemplate) -> Result<String> {
    check_token(&t.source_id)?;
    let mut s = format!("MNTTPL 1 {} {} {}\n", t.source_id, t.ppi, t.minutiae.len());
    for m in &t.minutiae {
        writeln!(
            s,
            "{:.6} {:.6} {:.6} {} {:.6}",
            m.x,
            m.y,
            m.angle,
            m.kind.as_str(),
            m.quality
        )
        .unwrap();
    }
    Ok(s)
}

pub fn parse_minutiae_template(text: &str) -> Result<MinutiaeTemplate> {
    let mut lines = text.lines();
    let h = parse_header(lines.next(), "MNTTPL", 5)?;
    let ppi: u32 = parse_num(h[3], 1, "ppi")?;
    let count: usize = parse_num(h[4], 1, "count")?;
    let mut minutiae = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::parse(ln, "expected 5 fields"));
        }
        let angle: f64 = parse_num(f[2], ln, "angle")?;
        minutiae.push(Minutia {
            x: parse_num(f[0], ln, "x")?,
            y: parse_num(f[1], ln, "y")?,
            angle: angle.rem_euclid(std::f64::consts::TAU),
            kind: f[3].parse().map_err(|e: String| Error::parse(ln, e))?,
            quality: parse_num(f[4], ln, "quality")?,
        });
    }
    if minutiae.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} minutiae, found {}", minutiae.len()),
        ));
    }
    Ok(MinutiaeTemplate {
        source_id: h[2].to_string(),
        ppi,
        minutiae,
    })
}

pub fn read_minutiae_template(path: &Path) -> Result<MinutiaeTemplate> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_minutiae_template(&text)
}

/// `PAIRS 1 <count>` then `latent_idx rolled_idx score`.
pub fn write_pairs(p: &MinutiaPairSet) -> String {
    let mut s = format!("PAIRS 1 {}\n", p.pairs.len());
    for pair in &p.pairs {
        writeln!(s, "{} {} {:.6}", pair.latent, pair.rolled, pair.score).unwrap();
    }
    s
}

pub fn parse_pairs(text: &str) -> Result<MinutiaPairSet> {
    let mut lines = text.lines();
    let h = parse_header(lines.next(), "PAIRS", 3)?;
    let count: usize = parse_num(h[2], 1, "count")?;
    let mut pairs = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(ln, "expected 3 fields"));
        }
        pairs.push(MinutiaPair {
            latent: parse_num(f[0], ln, "latent index")?,
            rolled: parse_num(f[1], ln, "rolled index")?,
            score: parse_num(f[2], ln, "score")?,
        });
    }
    if pairs.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} pairs, found {}", pairs.len()),
        ));
    }
    let set = MinutiaPairSet::new(pairs);
    if set.len() != count {
        return Err(Error::parse(1, "pairs file repeats a minutia index"));
    }
    Ok(set)
}

pub fn read_pairs(path: &Path) -> Result<MinutiaPairSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minutiae::MinutiaKind;

    #[test]
    fn template_round_trip() {
        let mut m = Minutia::new(10.25, 3.5, 1.0);
        m.kind = MinutiaKind::Bifurcation;
        m.quality = 0.75;
        let t = MinutiaeTemplate::new("r1", 1000, vec![m, Minutia::new(0.0, 0.0, 6.0)]);
        let text = write_minutiae_template(&t).unwrap();
        assert!(text.starts_with("MNTTPL 1 r1 1000 2\n10.250000 3.500000 1.000000 bifurcation 0.750000\n"));
        let back = parse_minutiae_template(&text).unwrap();
        assert_eq!(write_minutiae_template(&back).unwrap(), text);
    }

    #[test]
    fn pairs_round_trip_and_validation() {
        let set = MinutiaPairSet::new(vec![
            MinutiaPair { latent: 0, rolled: 4, score: 0.5 },
            MinutiaPair { latent: 2, rolled: 1, score: 1.0 },
        ]);
        let text = write_pairs(&set);
        assert_eq!(text, "PAIRS 1 2\n0 4 0.500000\n2 1 1.000000\n");
        assert_eq!(parse_pairs(&text).unwrap(), set);
        assert!(parse_pairs("PAIRS 1 2\n0 4 0.5\n0 1 1.0\n").is_err());
        assert!(parse_pairs("PAIRS 1 1\n0 x 0.5\n").is_err());
        assert!(parse_minutiae_template("MNTTPL 1 a 1000 1\n1 2 3 loop 1\n").is_err());
    }
}
