//! Grid geometry, occupancy state, target patterns and stochastic loading.
//!
//! Sites are addressed either by [`Site`] (row, column) or by their row-major
//! index. The two orderings agree: sorting indices sorts sites
//! lexicographically, which is what every planner relies on for
//! deterministic tie-breaking.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default spacing between neighbouring tweezers, in micrometers.
pub const DEFAULT_PITCH_UM: f64 = 5.0;

/// A lattice site, ordered lexicographically by (row, col).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

impl Site {
    pub const fn new(row: usize, col: usize) -> Self {
        Site { row, col }
    }

    pub fn manhattan(self, other: Site) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    pub fn is_neighbor(self, other: Site) -> bool {
        self.manhattan(other) == 1
    }
}

impl From<[usize; 2]> for Site {
    fn from([row, col]: [usize; 2]) -> Self {
        Site { row, col }
    }
}

impl From<Site> for [usize; 2] {
    fn from(s: Site) -> Self {
        [s.row, s.col]
    }
}

impl From<(usize, usize)> for Site {
    fn from((row, col): (usize, usize)) -> Self {
        Site { row, col }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Rectangular tweezer grid. Equality ignores the pitch, which is metadata.
/// Serializes as `"RxC"`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Lattice {
    rows: usize,
    cols: usize,
    pitch_um: f64,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl Eq for Lattice {}

impl Lattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidLattice { rows, cols });
        }
        Ok(Lattice {
            rows,
            cols,
            pitch_um: DEFAULT_PITCH_UM,
        })
    }

    pub fn square(side: usize) -> Result<Self> {
        Lattice::new(side, side)
    }

    pub fn with_pitch(mut self, pitch_um: f64) -> Self {
        self.pitch_um = pitch_um;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pitch_um(&self) -> f64 {
        self.pitch_um
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: Site) -> bool {
        site.row < self.rows && site.col < self.cols
    }

    pub fn check(&self, site: Site) -> Result<()> {
        if self.contains(site) {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                site,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    #[inline]
    pub fn index(&self, site: Site) -> usize {
        debug_assert!(self.contains(site));
        site.row * self.cols + site.col
    }

    #[inline]
    pub fn site(&self, index: usize) -> Site {
        Site {
            row: index / self.cols,
            col: index % self.cols,
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    /// 4-connected neighbours of `index`, in increasing index order.
    #[inline]
    pub fn neighbors(&self, index: usize) -> Neighbors {
        let (r, c) = (index / self.cols, index % self.cols);
        let mut n = Neighbors {
            buf: [0; 4],
            len: 0,
            pos: 0,
        };
        if r > 0 {
            n.push(index - self.cols);
        }
        if c > 0 {
            n.push(index - 1);
        }
        if c + 1 < self.cols {
            n.push(index + 1);
        }
        if r + 1 < self.rows {
            n.push(index + self.cols);
        }
        n
    }

    /// True when `index` lies on the outer rim of the lattice.
    pub fn on_border(&self, index: usize) -> bool {
        let (r, c) = (index / self.cols, index % self.cols);
        r == 0 || c == 0 || r + 1 == self.rows || c + 1 == self.cols
    }

    #[inline]
    pub fn manhattan_idx(&self, a: usize, b: usize) -> usize {
        let (ar, ac) = (a / self.cols, a % self.cols);
        let (br, bc) = (b / self.cols, b % self.cols);
        ar.abs_diff(br) + ac.abs_diff(bc)
    }

    /// Largest grid distance between two sites.
    pub fn diameter(&self) -> usize {
        self.rows + self.cols - 2
    }

    pub(crate) fn ensure_same(&self, other: &Lattice, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LatticeMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for Lattice {
    type Err = Error;

    /// Parses `RxC`, e.g. `8x8`.
    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = parse_dims(s).ok_or_else(|| {
            Error::InvalidParameter(format!("bad lattice `{s}` (expected RxC)"))
        })?;
        Lattice::new(r, c)
    }
}

impl TryFrom<String> for Lattice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Lattice> for String {
    fn from(l: Lattice) -> String {
        l.to_string()
    }
}

fn parse_dims(s: &str) -> Option<(usize, usize)> {
    let (r, c) = s.trim().split_once(['x', 'X'])?;
    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
}

/// Fixed-capacity neighbour list.
#[derive(Clone, Copy, Debug)]
pub struct Neighbors {
    buf: [usize; 4],
    len: u8,
    pos: u8,
}

impl Neighbors {
    #[inline]
    fn push(&mut self, i: usize) {
        self.buf[self.len as usize] = i;
        self.len += 1;
    }
}

impl Iterator for Neighbors {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.pos < self.len {
            self.pos += 1;
            Some(self.buf[self.pos as usize - 1])
        } else {
            None
        }
    }
}

/// Which sites currently hold an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occupancy {
    lattice: Lattice,
    filled: Vec<bool>,
}

impl Occupancy {
    pub fn empty(lattice: Lattice) -> Self {
        Occupancy {
            lattice,
            filled: vec![false; lattice.len()],
        }
    }

    pub fn full(lattice: Lattice) -> Self {
        Occupancy {
            lattice,
            filled: vec![true; lattice.len()],
        }
    }

    pub fn from_sites<I, S>(lattice: Lattice, sites: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Site>,
    {
        let mut occ = Occupancy::empty(lattice);
        for s in sites {
            let s = s.into();
            lattice.check(s)?;
            occ.filled[lattice.index(s)] = true;
        }
        Ok(occ)
    }

    pub fn from_mask(lattice: Lattice, filled: Vec<bool>) -> Result<Self> {
        if filled.len() != lattice.len() {
            return Err(Error::LatticeMismatch(format!(
                "mask of {} sites for {lattice}",
                filled.len()
            )));
        }
        Ok(Occupancy { lattice, filled })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn is_filled(&self, site: Site) -> bool {
        self.lattice.contains(site) && self.filled[self.lattice.index(site)]
    }

    #[inline]
    pub fn is_filled_idx(&self, index: usize) -> bool {
        self.filled[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.filled
    }


    pub fn set(&mut self, site: Site, value: bool) {
        let i = self.lattice.index(site);
        self.filled[i] = value;
    }

    pub fn count(&self) -> usize {
        self.filled.iter().filter(|&&f| f).count()
    }

    pub fn filled_sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.filled
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| self.lattice.site(i))
    }

    /// One line per row, `#` for an atom and `.` for an empty trap.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.lattice.len() + self.lattice.rows);
        for r in 0..self.lattice.rows {
            for c in 0..self.lattice.cols {
                out.push(if self.filled[r * self.lattice.cols + c] {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`Occupancy::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let grid = parse_grid(text)?;
        let lattice = Lattice::new(grid.len(), grid[0].len())?;
        Occupancy::from_mask(lattice, grid.into_iter().flatten().collect())
    }
}

fn parse_grid(text: &str) -> Result<Vec<Vec<bool>>> {
    let rows: Vec<Vec<bool>> = text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.chars()
                .map(|ch| match ch {
                    '#' => Ok(true),
                    '.' => Ok(false),
                    other => Err(Error::InvalidParameter(format!(
                        "unexpected character `{other}` in grid (use `#` or `.`)"
                    ))),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidParameter("ragged grid rows".into()));
    }
    Ok(rows)
}

/// Sites that must be occupied at the end of a rearrangement. Everything
/// else is reservoir.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetPattern {
    lattice: Lattice,
    mask: Vec<bool>,
    count: usize,
}

impl TargetPattern {
    pub fn from_sites<I, S>(lattice: Lattice, sites: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Site>,
    {
        let mut mask = vec![false; lattice.len()];
        for s in sites {
            let s = s.into();
            lattice.check(s)?;
            mask[lattice.index(s)] = true;
        }
        TargetPattern::from_mask(lattice, mask)
    }

    pub fn from_mask(lattice: Lattice, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != lattice.len() {
            return Err(Error::LatticeMismatch(format!(
                "mask of {} sites for {lattice}",
                mask.len()
            )));
        }
        let count = mask.iter().filter(|&&t| t).count();
        if count == 0 {
            return Err(Error::EmptyTarget);
        }
        Ok(TargetPattern {
            lattice,
            mask,
            count,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn contains(&self, site: Site) -> bool {
        self.lattice.contains(site) && self.mask[self.lattice.index(site)]
    }

    #[inline]
    pub fn contains_idx(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| self.lattice.site(i))
    }

    /// Number of reservoir (non-target) sites.
    pub fn outside_len(&self) -> usize {
        self.lattice.len() - self.count
    }
}

/// How to lay a target pattern onto a lattice. Serializes as its string
/// form (bitmaps inline, see [`PatternSpec::from_str`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PatternSpec {
    /// Centered `k`×`k` square.
    Square(usize),
    /// Centered rows×cols rectangle.
    Rect(usize, usize),
    /// Centered bitmap, `true` = target.
    Bitmap(Vec<Vec<bool>>),
}

impl PatternSpec {
    /// Reads a bitmap file: one row per line, `#` target and `.` reservoir.
    pub fn bitmap_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(PatternSpec::Bitmap(parse_grid(&text)?))
    }

    /// Bounding box of the pattern.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            PatternSpec::Square(k) => (*k, *k),
            PatternSpec::Rect(r, c) => (*r, *c),
            PatternSpec::Bitmap(rows) => (rows.len(), rows.first().map_or(0, Vec::len)),
        }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternSpec::Square(k) => write!(f, "square:{k}"),
            PatternSpec::Rect(r, c) => write!(f, "rect:{r}x{c}"),
            PatternSpec::Bitmap(rows) => {
                f.write_str("grid:")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        f.write_str("/")?;
                    }
                    for &b in row {
                        f.write_str(if b { "#" } else { "." })?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    /// Parses `square:K`, `rect:RxC`, `bitmap:<path>` (the file is read
    /// here) or `grid:<rows>` with rows separated by `/`, e.g. `grid:#.#/###`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadPatternSpec(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "square" => {
                let k: usize = arg.trim().parse().map_err(|_| bad())?;
                Ok(PatternSpec::Square(k))
            }
            "rect" => {
                let (r, c) = parse_dims(arg).ok_or_else(bad)?;
                Ok(PatternSpec::Rect(r, c))
            }
            "bitmap" => PatternSpec::bitmap_from_file(Path::new(arg.trim())),
            "grid" => Ok(PatternSpec::Bitmap(parse_grid(&arg.replace('/', "\n"))?)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for PatternSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PatternSpec> for String {
    fn from(p: PatternSpec) -> String {
        p.to_string()
    }
}

/// Places `spec` centered on `lattice`; odd margins put the extra row or
/// column after the pattern.
pub fn make_target(lattice: Lattice, spec: &PatternSpec) -> Result<TargetPattern> {
    let (pr, pc) = spec.dims();
    if pr == 0 || pc == 0 {
        return Err(Error::EmptyTarget);
    }
    if pr > lattice.rows() || pc > lattice.cols() {
        return Err(Error::PatternDoesNotFit {
            pattern: spec.to_string(),
            rows: lattice.rows(),
            cols: lattice.cols(),
        });
    }
    let r0 = (lattice.rows() - pr) / 2;
    let c0 = (lattice.cols() - pc) / 2;
    let mut mask = vec![false; lattice.len()];
    for r in 0..pr {
        for c in 0..pc {
            let on = match spec {
                PatternSpec::Square(_) | PatternSpec::Rect(..) => true,
                PatternSpec::Bitmap(rows) => rows[r][c],
            };
            if on {
                mask[lattice.index(Site::new(r0 + r, c0 + c))] = true;
            }
        }
    }
    TargetPattern::from_mask(lattice, mask)
}

/// Reservoir sizing: the smallest square lattice whose expected atom count
/// exceeds the target size by `surplus`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizingRule {
    pub surplus: f64,
}

impl Default for SizingRule {
    fn default() -> Self {
        SizingRule { surplus: 1.1 }
    }
}

impl SizingRule {
    /// Smallest `L ≥ max(dims)` with `ceil(L²·p) ≥ surplus · target_sites`.
    pub fn lattice_for(&self, dims: (usize, usize), target_sites: usize, p: f64) -> Result<Lattice> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "loading probability {p} cannot fill any target"
            )));
        }
        let need = self.surplus * target_sites as f64;
        let mut side = dims.0.max(dims.1).max(1);
        while (((side * side) as f64) * p).ceil() < need {
            side += 1;
        }
        Lattice::square(side)
    }

    pub fn lattice_for_spec(&self, spec: &PatternSpec, p: f64) -> Result<Lattice> {
        let sites = match spec {
            PatternSpec::Square(k) => k * k,
            PatternSpec::Rect(r, c) => r * c,
            PatternSpec::Bitmap(rows) => rows.iter().flatten().filter(|&&b| b).count(),
        };
        self.lattice_for(spec.dims(), sites, p)
    }
}

/// Independent per-site loading with probability `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadingModel {
    p: f64,
    seed: u64,
}

impl LoadingModel {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "loading probability {p} outside [0, 1]"
            )));
        }
        Ok(LoadingModel { p, seed })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub fn sample_loading(lattice: Lattice, model: &LoadingModel) -> Occupancy {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let filled = (0..lattice.len()).map(|_| rng.gen_bool(model.p)).collect();
    Occupancy { lattice, filled }
}

/// Vacant targets and atoms sitting outside the target, both sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Defects {
    pub vacant_targets: Vec<Site>,
    pub surplus_atoms: Vec<Site>,
}

pub fn defects(occ: &Occupancy, target: &TargetPattern) -> Result<Defects> {
    occ.lattice().ensure_same(target.lattice(), "occupancy vs target")?;
    let lattice = occ.lattice();
    let mut out = Defects::default();
    for i in 0..lattice.len() {
        match (target.contains_idx(i), occ.is_filled_idx(i)) {
            (true, false) => out.vacant_targets.push(lattice.site(i)),
            (false, true) => out.surplus_atoms.push(lattice.site(i)),
            _ => {}
        }
    }
    Ok(out)
}

pub fn vacant_target_count(occ: &Occupancy, target: &TargetPattern) -> usize {
    (0..occ.lattice().len())
        .filter(|&i| target.contains_idx(i) && !occ.is_filled_idx(i))
        .count()
}

/// An instance is solvable only if there are at least as many atoms as targets.
pub fn is_feasible(occ: &Occupancy, target: &TargetPattern) -> bool {
    occ.count() >= target.len()
}

/// ASCII picture: `@` filled target, `_` vacant target, `o` reservoir atom,
/// `.` empty reservoir trap.
pub fn render(occ: &Occupancy, target: &TargetPattern) -> String {
    let lattice = occ.lattice();
    let mut out = String::new();
    for r in 0..lattice.rows() {
        for c in 0..lattice.cols() {
            let i = r * lattice.cols() + c;
            out.push(match (target.contains_idx(i), occ.is_filled_idx(i)) {
                (true, true) => '@',
                (true, false) => '_',
                (false, true) => 'o',
                (false, false) => '.',
            });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loading_extremes() {
        let l = Lattice::square(8).unwrap();
        assert_eq!(sample_loading(l, &LoadingModel::new(0.0, 3).unwrap()).count(), 0);
        assert_eq!(sample_loading(l, &LoadingModel::new(1.0, 3).unwrap()).count(), 64);
    }

    #[test]
    fn loading_is_reproducible() {
        let l = Lattice::new(12, 9).unwrap();
        let m = LoadingModel::new(0.5, 77).unwrap();
        assert_eq!(sample_loading(l, &m), sample_loading(l, &m));
        let other = LoadingModel::new(0.5, 78).unwrap();
        assert_ne!(sample_loading(l, &m), sample_loading(l, &other));
    }

    #[test]
    fn loading_rejects_bad_probability() {
        assert!(LoadingModel::new(1.5, 0).is_err());
        assert!(LoadingModel::new(-0.1, 0).is_err());
    }

    #[test]
    fn rect_in_8x8() {
        let l = Lattice::square(8).unwrap();
        let t = make_target(l, &PatternSpec::Rect(5, 6)).unwrap();
        assert_eq!(t.len(), 30);
        // margins: 3 rows split 1/2, 2 cols split 1/1
        assert!(t.contains(Site::new(1, 1)));
        assert!(t.contains(Site::new(5, 6)));
        assert!(!t.contains(Site::new(6, 1)));
        assert!(!t.contains(Site::new(0, 1)));
    }

    #[test]
    fn square_full_cover_and_reservoir() {
        let l = Lattice::square(6).unwrap();
        let t = make_target(l, &PatternSpec::Square(6)).unwrap();
        assert_eq!(t.len(), 36);
        assert_eq!(t.outside_len(), 0);

        let l = Lattice::square(20).unwrap();
        let t = make_target(l, &PatternSpec::Square(14)).unwrap();
        assert_eq!(t.len(), 196);
        assert_eq!(t.outside_len(), 204);
    }

    #[test]
    fn centering_breaks_ties_low() {
        let l = Lattice::square(5).unwrap();
        let t = make_target(l, &PatternSpec::Square(2)).unwrap();
        let sites: Vec<Site> = t.sites().collect();
        assert_eq!(sites[0], Site::new(1, 1));
    }

    #[test]
    fn pattern_too_big() {
        let l = Lattice::square(4).unwrap();
        assert!(matches!(
            make_target(l, &PatternSpec::Rect(5, 2)),
            Err(Error::PatternDoesNotFit { .. })
        ));
    }

    #[test]
    fn pattern_spec_parsing() {
        assert_eq!("square:14".parse::<PatternSpec>().unwrap(), PatternSpec::Square(14));
        assert_eq!("rect:5x6".parse::<PatternSpec>().unwrap(), PatternSpec::Rect(5, 6));
        assert!("circle:3".parse::<PatternSpec>().is_err());
        assert!("rect:5".parse::<PatternSpec>().is_err());
    }

    #[test]
    fn bitmap_pattern_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("L.txt");
        std::fs::write(&path, "#..\n#..\n###\n").unwrap();
        let spec: PatternSpec = format!("bitmap:{}", path.display()).parse().unwrap();
        let t = make_target(Lattice::square(5).unwrap(), &spec).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.contains(Site::new(1, 1)));
        assert!(t.contains(Site::new(3, 3)));
        assert!(!t.contains(Site::new(1, 2)));
    }

    #[test]
    fn defects_edge_cases() {
        let l = Lattice::square(4).unwrap();
        let t = make_target(l, &PatternSpec::Square(2)).unwrap();
        let d = defects(&Occupancy::empty(l), &t).unwrap();
        assert_eq!(d.vacant_targets.len(), 4);
        assert!(d.surplus_atoms.is_empty());

        let full = Occupancy::full(l);
        let d = defects(&full, &t).unwrap();
        assert!(d.vacant_targets.is_empty());
        assert_eq!(d.surplus_atoms.len(), 12);

        let other = Occupancy::empty(Lattice::square(5).unwrap());
        assert!(defects(&other, &t).is_err());
    }

    #[test]
    fn sizing_rule_values() {
        let rule = SizingRule::default();
        assert_eq!(rule.lattice_for((14, 14), 196, 0.5).unwrap().rows(), 21);
        assert_eq!(rule.lattice_for((30, 30), 900, 0.5).unwrap().rows(), 45);
        assert_eq!(rule.lattice_for((5, 6), 30, 0.53).unwrap().rows(), 8);
        assert!(rule.lattice_for((3, 3), 9, 0.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let l = Lattice::new(3, 4).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0), (1, 3), (2, 2)]).unwrap();
        assert_eq!(Occupancy::from_text(&occ.to_text()).unwrap(), occ);
    }

    #[test]
    fn neighbors_sorted() {
        let l = Lattice::new(3, 3).unwrap();
        assert_eq!(l.neighbors(4).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        assert_eq!(l.neighbors(0).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(l.neighbors(8).collect::<Vec<_>>(), vec![5, 7]);
    }
}
