//! Text round-trip format.
//!
//! ```text
//! segment     := cells ["@" lo]                      e.g. 1100, 0110@-3
//! line        := "..." "(" t ")|" cells "|(" t ")..." ["@" lo]
//!                                                    e.g. ...(1)|0110|(0)...
//! two-species := cells ["@" lo] | line form          digits 1 = first, 2 = second, 0 = hole
//! coloured    := colour ("," colour)* ["@" lo]      e.g. 3,1,2
//! ```
//!
//! `lo` is the site of the first written cell and defaults to 1. The unicode
//! ellipsis `…` is accepted in place of `...`.

use std::fmt;
use std::str::FromStr;

use super::{Cell, ColoredConfig, LineConfig, SegmentConfig, Species, TwoSpeciesConfig};
use crate::error::{Error, Result};

fn split_lo(s: &str) -> Result<(&str, i64)> {
    match s.rsplit_once('@') {
        Some((body, lo)) => {
            let lo = lo
                .trim()
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("site `{lo}`: {e}")))?;
            Ok((body.trim(), lo))
        }
        None => Ok((s.trim(), 1)),
    }
}

fn write_lo(f: &mut fmt::Formatter<'_>, lo: i64) -> fmt::Result {
    if lo != 1 {
        write!(f, "@{lo}")?;
    }
    Ok(())
}

fn cell_char(c: Cell) -> char {
    match c {
        Cell::Particle => '1',
        Cell::Hole => '0',
    }
}

fn parse_cell(ch: char) -> Result<Cell> {
    match ch {
        '1' => Ok(Cell::Particle),
        '0' => Ok(Cell::Hole),
        other => Err(Error::Parse(format!("unexpected cell `{other}`"))),
    }
}

fn species_char(s: Species) -> char {
    match s {
        Species::First => '1',
        Species::Second => '2',
        Species::Hole => '0',
    }
}

fn parse_species(ch: char) -> Result<Species> {
    match ch {
        '1' => Ok(Species::First),
        '2' => Ok(Species::Second),
        '0' => Ok(Species::Hole),
        other => Err(Error::Parse(format!("unexpected species `{other}`"))),
    }
}

/// Split `...(a)|body|(b)...` into `(a, body, b)`.
fn split_line(s: &str) -> Option<(char, String, char)> {
    let s = s.replace('…', "...");
    let inner = s.strip_prefix("...(")?.strip_suffix(")...")?;
    let mut parts = inner.split('|');
    let left = parts.next()?.strip_suffix(')')?;
    let body = parts.next()?.to_string();
    let right = parts.next()?.strip_prefix('(')?;
    if parts.next().is_some() || left.chars().count() != 1 || right.chars().count() != 1 {
        return None;
    }
    Some((left.chars().next()?, body, right.chars().next()?))
}

impl fmt::Display for SegmentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.occ {
            write!(f, "{}", cell_char(c))?;
        }
        write_lo(f, self.lo)
    }
}

impl FromStr for SegmentConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (body, lo) = split_lo(s)?;
        let occ = body.chars().map(parse_cell).collect::<Result<Vec<_>>>()?;
        SegmentConfig::new(lo, occ)
    }
}

impl fmt::Display for LineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "...({})|", cell_char(self.left_tail))?;
        for &c in &self.occ {
            write!(f, "{}", cell_char(c))?;
        }
        write!(f, "|({})...", cell_char(self.right_tail))?;
        write_lo(f, self.lo)
    }
}

impl FromStr for LineConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (body, lo) = split_lo(s)?;
        let (l, cells, r) = split_line(body)
            .ok_or_else(|| Error::Parse(format!("not a line configuration: `{s}`")))?;
        let occ = cells.chars().map(parse_cell).collect::<Result<Vec<_>>>()?;
        Ok(LineConfig::new(lo, occ, parse_cell(l)?, parse_cell(r)?))
    }
}

impl fmt::Display for TwoSpeciesConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "...({})|", species_char(self.left_tail))?;
        for &c in &self.occ {
            write!(f, "{}", species_char(c))?;
        }
        write!(f, "|({})...", species_char(self.right_tail))?;
        write_lo(f, self.lo)
    }
}

impl FromStr for TwoSpeciesConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (body, lo) = split_lo(s)?;
        let (l, cells, r) = match split_line(body) {
            Some((l, cells, r)) => (parse_species(l)?, cells, parse_species(r)?),
            None => (Species::First, body.to_string(), Species::Hole),
        };
        let occ = cells
            .chars()
            .map(parse_species)
            .collect::<Result<Vec<_>>>()?;
        TwoSpeciesConfig::new(lo, occ, l, r)
    }
}

impl fmt::Display for ColoredConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.colors.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write_lo(f, self.lo)
    }
}

impl FromStr for ColoredConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (body, lo) = split_lo(s)?;
        let colors = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("colour `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ColoredConfig::new(lo, colors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_examples() {
        let l: LineConfig = "…(1)|0110|(0)…".parse().unwrap();
        assert_eq!(l.tails(), (Cell::Particle, Cell::Hole));
        assert_eq!(l.window(), (1, 4));
        assert_eq!(l.to_string(), "...(1)|0110|(0)...");
        let s: SegmentConfig = "0110@-3".parse().unwrap();
        assert_eq!(s.get(-2), Some(Cell::Particle));
        assert_eq!(s.to_string(), "0110@-3");
        let c: ColoredConfig = "3,1,2".parse().unwrap();
        assert_eq!(c.colors(), &[3, 1, 2]);
        let t: TwoSpeciesConfig = "120".parse().unwrap();
        assert_eq!(
            t.species(),
            &[Species::First, Species::Second, Species::Hole]
        );
        assert!("012x".parse::<SegmentConfig>().is_err());
        assert!("(1)|01|(0)".parse::<LineConfig>().is_err());
        assert!("1,1".parse::<ColoredConfig>().is_err());
    }

    proptest! {
        #[test]
        fn line_round_trip(bits in proptest::collection::vec(0u8..2, 1..40), lo in -50i64..50, l in 0u8..2, r in 0u8..2) {
            let cell = |b: u8| if b == 1 { Cell::Particle } else { Cell::Hole };
            let c = LineConfig::new(lo, bits.iter().map(|&b| cell(b)).collect(), cell(l), cell(r));
            let back: LineConfig = c.to_string().parse().unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn coloured_round_trip(perm in Just((0..12i64).collect::<Vec<_>>()).prop_shuffle(), lo in -20i64..20) {
            let c = ColoredConfig::new(lo, perm.iter().map(|x| x + lo).collect()).unwrap();
            let back: ColoredConfig = c.to_string().parse().unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
