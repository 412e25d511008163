//! Particle configurations on a segment or on the integers, the partial order
//! on same-charge configurations, and positional statistics.
//!
//! Values are ordered by priority: a smaller value beats a larger one. This
//! holds for colours (`i64`), for [`Cell`] (particle before hole) and for
//! [`Species`] (first class, then second class, then hole), so the dynamics
//! can treat every configuration type with one update rule.

mod text;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation of a single site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cell {
    Particle,
    Hole,
}

impl Cell {
    pub fn is_particle(self) -> bool {
        self == Cell::Particle
    }
}

/// Occupation in a two-species system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    First,
    Second,
    Hole,
}

/// A site index extended by the two infinities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Site {
    NegInfinity,
    At(i64),
    PosInfinity,
}

impl Site {
    pub fn finite(self) -> Option<i64> {
        match self {
            Site::At(i) => Some(i),
            _ => None,
        }
    }
}

/// Configurations that expose a contiguous block of sites and can swap
/// neighbours. Implemented by every type the segment dynamics acts on.
pub trait Lattice {
    type Value: Copy + Ord;

    fn lo(&self) -> i64;
    fn values(&self) -> &[Self::Value];
    /// Swap the values at offsets `i` and `i + 1`.
    fn swap_offset(&mut self, i: usize);

    fn hi(&self) -> i64 {
        self.lo() + self.values().len() as i64 - 1
    }
}

/// Particle/hole configuration on `[lo;hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentConfig {
    lo: i64,
    occ: Vec<Cell>,
}

impl SegmentConfig {
    pub fn new(lo: i64, occ: Vec<Cell>) -> Result<Self> {
        if occ.is_empty() {
            return Err(Error::InvalidParameter("empty segment".into()));
        }
        Ok(Self { lo, occ })
    }

    /// Build from 0/1 flags, 1 meaning particle.
    pub fn from_bits(lo: i64, bits: &[u8]) -> Result<Self> {
        let occ = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(Cell::Hole),
                1 => Ok(Cell::Particle),
                _ => Err(Error::Parse(format!("occupation flag {b}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lo, occ)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.occ
    }

    pub fn len(&self) -> usize {
        self.occ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occ.is_empty()
    }

    pub fn get(&self, i: i64) -> Option<Cell> {
        let off = i.checked_sub(self.lo)?;
        usize::try_from(off)
            .ok()
            .and_then(|o| self.occ.get(o).copied())
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().filter(|c| c.is_particle()).count()
    }

    pub fn set(&mut self, i: i64, cell: Cell) -> Result<()> {
        let (lo, hi) = (self.lo, self.hi());
        if i < lo || i > hi {
            return Err(Error::InvalidParameter(format!(
                "site {i} outside [{lo};{hi}]"
            )));
        }
        self.occ[(i - lo) as usize] = cell;
        Ok(())
    }

    /// Particle positions from right to left, i.e. `x_1 > x_2 > ...`.
    pub fn particle_positions(&self) -> Vec<i64> {
        self.occ
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| c.is_particle())
            .map(|(i, _)| self.lo + i as i64)
            .collect()
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Cell] {
        &mut self.occ
    }
}

impl Lattice for SegmentConfig {
    type Value = Cell;
    fn lo(&self) -> i64 {
        self.lo
    }
    fn values(&self) -> &[Cell] {
        &self.occ
    }
    fn swap_offset(&mut self, i: usize) {
        self.occ.swap(i, i + 1);
    }
}

/// Particle/hole configuration on the integers: an explicit window plus
/// constant tails on either side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineConfig {
    lo: i64,
    occ: Vec<Cell>,
    left_tail: Cell,
    right_tail: Cell,
}

impl LineConfig {
    pub fn new(lo: i64, occ: Vec<Cell>, left_tail: Cell, right_tail: Cell) -> Self {
        Self {
            lo,
            occ,
            left_tail,
            right_tail,
        }
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.occ.len() as i64 - 1)
    }

    pub fn window_cells(&self) -> &[Cell] {
        &self.occ
    }

    pub fn tails(&self) -> (Cell, Cell) {
        (self.left_tail, self.right_tail)
    }

    pub fn get(&self, i: i64) -> Cell {
        if i < self.lo {
            self.left_tail
        } else if i - self.lo >= self.occ.len() as i64 {
            self.right_tail
        } else {
            self.occ[(i - self.lo) as usize]
        }
    }

    /// Grow the window so that it contains `[lo;hi]`, filling from the tails.
    pub fn materialize(&mut self, lo: i64, hi: i64) {
        let (wlo, whi) = self.window();
        if lo < wlo {
            let extra = (wlo - lo) as usize;
            let mut occ = vec![self.left_tail; extra];
            occ.extend_from_slice(&self.occ);
            self.occ = occ;
            self.lo = lo;
        }
        if hi > whi {
            let extra = (hi - whi) as usize;
            self.occ.extend(std::iter::repeat_n(self.right_tail, extra));
        }
    }

    pub fn set(&mut self, i: i64, cell: Cell) {
        self.materialize(i, i);
        self.occ[(i - self.lo) as usize] = cell;
    }

    /// Whether both configurations describe the same element of `{0,1}^Z`.
    pub fn same_state(&self, other: &LineConfig) -> bool {
        if self.tails() != other.tails() {
            return false;
        }
        let (a, b) = self.window();
        let (c, d) = other.window();
        (a.min(c)..=b.max(d)).all(|i| self.get(i) == other.get(i))
    }

    /// The `Z` of `Omega_Z` for holes-left/particles-right configurations:
    /// the particles below `Z` are as many as the holes at or above `Z`.
    pub fn charge(&self) -> Option<i64> {
        if self.tails() != (Cell::Hole, Cell::Particle) {
            return None;
        }
        let holes = self.occ.iter().filter(|c| !c.is_particle()).count() as i64;
        Some(self.lo + holes)
    }

    /// Position of the `m`-th particle counted from the right (`m >= 1`),
    /// for configurations with a finite number of particles to the right.
    pub fn particle_from_right(&self, m: usize) -> Option<i64> {
        if self.right_tail == Cell::Particle || m == 0 {
            return None;
        }
        let (lo, hi) = self.window();
        let mut seen = 0usize;
        for i in (lo..=hi).rev() {
            if self.get(i).is_particle() {
                seen += 1;
                if seen == m {
                    return Some(i);
                }
            }
        }
        if self.left_tail == Cell::Particle {
            Some(lo - 1 - (m - seen - 1) as i64)
        } else {
            None
        }
    }
}

/// Coloured configuration: a permutation of `[lo;hi]`, `colors[i]` being the
/// colour of the particle at site `lo + i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColoredConfig {
    lo: i64,
    colors: Vec<i64>,
}

impl ColoredConfig {
    pub fn new(lo: i64, colors: Vec<i64>) -> Result<Self> {
        let n = colors.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "empty coloured configuration".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &c in &colors {
            let off = c - lo;
            if off < 0 || off >= n as i64 || seen[off as usize] {
                return Err(Error::InvalidParameter(format!(
                    "colours are not a permutation of [{lo};{}]",
                    lo + n as i64 - 1
                )));
            }
            seen[off as usize] = true;
        }
        Ok(Self { lo, colors })
    }

    pub fn identity(lo: i64, hi: i64) -> Result<Self> {
        Self::new(lo, (lo..=hi).collect())
    }

    pub fn reversal(lo: i64, hi: i64) -> Result<Self> {
        Self::new(lo, (lo..=hi).rev().collect())
    }

    pub fn colors(&self) -> &[i64] {
        &self.colors
    }

    pub fn color_at(&self, i: i64) -> Option<i64> {
        usize::try_from(i - self.lo)
            .ok()
            .and_then(|o| self.colors.get(o).copied())
    }

    pub(crate) fn colors_mut(&mut self) -> &mut [i64] {
        &mut self.colors
    }
}

impl Lattice for ColoredConfig {
    type Value = i64;
    fn lo(&self) -> i64 {
        self.lo
    }
    fn values(&self) -> &[i64] {
        &self.colors
    }
    fn swap_offset(&mut self, i: usize) {
        self.colors.swap(i, i + 1);
    }
}

/// First/second class particles and holes on a window with constant tails.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoSpeciesConfig {
    lo: i64,
    occ: Vec<Species>,
    left_tail: Species,
    right_tail: Species,
}

impl TwoSpeciesConfig {
    pub fn new(
        lo: i64,
        occ: Vec<Species>,
        left_tail: Species,
        right_tail: Species,
    ) -> Result<Self> {
        if occ.is_empty() {
            return Err(Error::InvalidParameter("empty two-species window".into()));
        }
        if left_tail == Species::Second || right_tail == Species::Second {
            return Err(Error::InvalidParameter(
                "tails hold first class particles or holes".into(),
            ));
        }
        Ok(Self {
            lo,
            occ,
            left_tail,
            right_tail,
        })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.occ.len() as i64 - 1)
    }

    pub fn species(&self) -> &[Species] {
        &self.occ
    }

    pub fn tails(&self) -> (Species, Species) {
        (self.left_tail, self.right_tail)
    }

    pub fn get(&self, i: i64) -> Species {
        if i < self.lo {
            self.left_tail
        } else if i - self.lo >= self.occ.len() as i64 {
            self.right_tail
        } else {
            self.occ[(i - self.lo) as usize]
        }
    }

    pub fn count(&self, s: Species) -> usize {
        self.occ.iter().filter(|&&x| x == s).count()
    }

    /// Merge second class particles into first class ones.
    pub fn collapse(&self) -> SegmentConfig {
        let occ = self
            .occ
            .iter()
            .map(|s| {
                if *s == Species::Hole {
                    Cell::Hole
                } else {
                    Cell::Particle
                }
            })
            .collect();
        SegmentConfig { lo: self.lo, occ }
    }

    pub(crate) fn species_mut(&mut self) -> &mut [Species] {
        &mut self.occ
    }
}

impl Lattice for TwoSpeciesConfig {
    type Value = Species;
    fn lo(&self) -> i64 {
        self.lo
    }
    fn values(&self) -> &[Species] {
        &self.occ
    }
    fn swap_offset(&mut self, i: usize) {
        self.occ.swap(i, i + 1);
    }
}

/// Names of the distinguished initial configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfigName {
    /// Particles packed to the left of `[1;N]`.
    Xi0,
    /// Particles packed to the right of `[1;N]`.
    Xi1,
    /// `1_[1;k] + 1_{>N}` on the integers.
    Zeta0,
    /// `1_{>N-k}` on the integers.
    Zeta1,
    /// Particles at every negative site.
    Step,
    /// Particles at every site `<= k`.
    StepShifted,
}

impl std::str::FromStr for ConfigName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "xi0" => ConfigName::Xi0,
            "xi1" => ConfigName::Xi1,
            "zeta0" => ConfigName::Zeta0,
            "zeta1" => ConfigName::Zeta1,
            "step" => ConfigName::Step,
            "step_shifted" => ConfigName::StepShifted,
            other => return Err(Error::UnknownName(other.to_string())),
        })
    }
}

/// Result of [`make_named_config`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedConfig {
    Segment(SegmentConfig),
    Line(LineConfig),
}

impl NamedConfig {
    pub fn into_segment(self) -> Option<SegmentConfig> {
        match self {
            NamedConfig::Segment(s) => Some(s),
            NamedConfig::Line(_) => None,
        }
    }

    pub fn into_line(self) -> Option<LineConfig> {
        match self {
            NamedConfig::Line(l) => Some(l),
            NamedConfig::Segment(_) => None,
        }
    }
}

pub fn make_named_config(name: ConfigName, n: usize, k: usize) -> Result<NamedConfig> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside [1;{n}]")));
    }
    let (n_i, k_i) = (n as i64, k as i64);
    let packed = |left: bool| -> Vec<Cell> {
        (1..=n_i)
            .map(|i| {
                let particle = if left { i <= k_i } else { i > n_i - k_i };
                if particle {
                    Cell::Particle
                } else {
                    Cell::Hole
                }
            })
            .collect()
    };
    Ok(match name {
        ConfigName::Xi0 => NamedConfig::Segment(SegmentConfig {
            lo: 1,
            occ: packed(true),
        }),
        ConfigName::Xi1 => NamedConfig::Segment(SegmentConfig {
            lo: 1,
            occ: packed(false),
        }),
        ConfigName::Zeta0 => {
            NamedConfig::Line(LineConfig::new(1, packed(true), Cell::Hole, Cell::Particle))
        }
        ConfigName::Zeta1 => NamedConfig::Line(LineConfig::new(
            1,
            packed(false),
            Cell::Hole,
            Cell::Particle,
        )),
        ConfigName::Step => NamedConfig::Line(LineConfig::new(
            -1,
            vec![Cell::Particle, Cell::Hole],
            Cell::Particle,
            Cell::Hole,
        )),
        ConfigName::StepShifted => NamedConfig::Line(LineConfig::new(
            k_i,
            vec![Cell::Particle, Cell::Hole],
            Cell::Particle,
            Cell::Hole,
        )),
    })
}

/// Occupation-valued configurations, finite or infinite.
pub trait Occupancy {
    fn window(&self) -> (i64, i64);
    fn cell(&self, i: i64) -> Cell;
    /// `None` for a finite segment.
    fn tails(&self) -> Option<(Cell, Cell)>;
}

impl Occupancy for SegmentConfig {
    fn window(&self) -> (i64, i64) {
        (self.lo, self.hi())
    }
    fn cell(&self, i: i64) -> Cell {
        self.get(i).unwrap_or(Cell::Hole)
    }
    fn tails(&self) -> Option<(Cell, Cell)> {
        None
    }
}

impl Occupancy for LineConfig {
    fn window(&self) -> (i64, i64) {
        LineConfig::window(self)
    }
    fn cell(&self, i: i64) -> Cell {
        self.get(i)
    }
    fn tails(&self) -> Option<(Cell, Cell)> {
        Some(LineConfig::tails(self))
    }
}

/// Infimum of the occupied sites (`+inf` for the empty configuration).
pub fn leftmost_particle(c: &impl Occupancy) -> Site {
    let tails = c.tails();
    if let Some((Cell::Particle, _)) = tails {
        return Site::NegInfinity;
    }
    let (lo, hi) = c.window();
    if let Some(i) = (lo..=hi).find(|&i| c.cell(i).is_particle()) {
        return Site::At(i);
    }
    match tails {
        Some((_, Cell::Particle)) => Site::At(hi + 1),
        _ => Site::PosInfinity,
    }
}

/// Supremum of the empty sites (`-inf` for a fully occupied configuration).
pub fn rightmost_hole(c: &impl Occupancy) -> Site {
    let tails = c.tails();
    if let Some((_, Cell::Hole)) = tails {
        return Site::PosInfinity;
    }
    let (lo, hi) = c.window();
    if let Some(i) = (lo..=hi).rev().find(|&i| !c.cell(i).is_particle()) {
        return Site::At(i);
    }
    match tails {
        Some((Cell::Hole, _)) => Site::At(lo - 1),
        _ => Site::NegInfinity,
    }
}

/// `a ⪯ b`: at every cut the number of holes to the right in `b` does not
/// exceed that of `a`. Both must be segments over the same sites with equal
/// particle counts, or holes-left/particles-right lines of equal charge.
pub fn partial_order_leq(a: &impl Occupancy, b: &impl Occupancy) -> Result<bool> {
    let (lo, hi) = match (a.tails(), b.tails()) {
        (None, None) => {
            if a.window() != b.window() {
                return Err(Error::DomainMismatch(
                    "segments over different sites".into(),
                ));
            }
            a.window()
        }
        (Some(ta), Some(tb)) if ta == (Cell::Hole, Cell::Particle) && tb == ta => {
            let (alo, ahi) = a.window();
            let (blo, bhi) = b.window();
            (alo.min(blo), ahi.max(bhi))
        }
        _ => {
            return Err(Error::DomainMismatch(
                "order is defined on segments or on holes-left/particles-right lines".into(),
            ))
        }
    };
    let particles = |c: &dyn Fn(i64) -> Cell| (lo..=hi).filter(|&i| c(i).is_particle()).count();
    let ca = |i| a.cell(i);
    let cb = |i| b.cell(i);
    if particles(&ca) != particles(&cb) {
        return Err(Error::DomainMismatch("different particle counts".into()));
    }
    let (mut holes_a, mut holes_b) = (0usize, 0usize);
    for r in (lo..=hi).rev() {
        holes_a += usize::from(!a.cell(r).is_particle());
        holes_b += usize::from(!b.cell(r).is_particle());
        if holes_b > holes_a {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Colours `<= k` become particles, the rest holes.
pub fn project_colors(c: &ColoredConfig, k: i64) -> SegmentConfig {
    let occ = c
        .colors
        .iter()
        .map(|&col| if col <= k { Cell::Particle } else { Cell::Hole })
        .collect();
    SegmentConfig { lo: c.lo, occ }
}

/// Colours `<= k1` become first class, `(k1;k2]` second class, the rest holes.
pub fn project_two_species(c: &ColoredConfig, k1: i64, k2: i64) -> Result<TwoSpeciesConfig> {
    if k1 >= k2 {
        return Err(Error::InvalidParameter(format!(
            "thresholds need k1 < k2, got {k1} >= {k2}"
        )));
    }
    let occ = c
        .colors
        .iter()
        .map(|&col| {
            if col <= k1 {
                Species::First
            } else if col <= k2 {
                Species::Second
            } else {
                Species::Hole
            }
        })
        .collect();
    Ok(TwoSpeciesConfig {
        lo: c.lo,
        occ,
        left_tail: Species::First,
        right_tail: Species::Hole,
    })
}
