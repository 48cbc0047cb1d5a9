//! Wang tiling rules as exact energy problems, plus an exact piecewise-affine
//! encoding of plane rotations into a finite tile alphabet.
//!
//! The module has two halves.
//!
//! The first half treats a *tiling rule* — a pair of allowed-adjacency
//! relations on a finite alphabet — as data: [`is_valid_tiling`] checks a
//! concrete grid against a rule (open edges or torus wrap, chosen
//! explicitly), [`rule_to_hamiltonian`] turns a rule into adjacency-indicator
//! pair interactions so the energy machinery of [`crate::hierarchy`] applies,
//! and [`periodic_tiling_search`] looks for a torus-valid periodic
//! configuration up to a period budget.  Absence of a periodic witness proves
//! nothing (there are rules whose valid tilings are all aperiodic), and the
//! search is documented as a bounded probe, not a decision procedure.
//!
//! The second half builds the tile family used to encode an irrational
//! rotation.  A [`KariSystem`] is a rational affine map `f(z) = Mz + c`
//! together with a list of closed unit squares with integer corners.  From it
//! we derive: the bounded grid of feasible carry vectors
//! ([`kari_left_vector_set`]), the finite tile alphabet ([`kari_alphabet`]),
//! floor-difference digit rows ([`beatty_row`]), exact strip tilings that
//! simulate the orbit of a rational point row by row
//! ([`kari_strip_tiling`]), exact density witnesses over finite grids
//! ([`witnesses`], [`orbit_witnesses`]), and the analytic density curve
//! ([`curve_point`]) — the single place in the crate where floating point is
//! used.
//!
//! Tiles are identified by their four edge labels `(top, bottom, left,
//! right)`.  A label combination whose top corner belongs to several regions
//! is emitted once, carrying the smallest such region index; strip tilings,
//! by contrast, label every tile with the region actually visited by the
//! orbit, which is what the density witnesses measure.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hierarchy::Hamiltonian;
use crate::lattice::{Pattern, Region};
use crate::rat::{format_rat, parse_rat, rat, rat_int, Rat};
use crate::Result;

/// A Wang-style tiling rule: an alphabet size and the sets of allowed
/// horizontal and vertical ordered adjacencies.
///
/// A pair `(a, b)` in the horizontal set allows tile `b` immediately to the
/// right of tile `a`; a pair `(a, b)` in the vertical set allows tile `b`
/// immediately above tile `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TilingRuleDto", try_from = "TilingRuleDto")]
pub struct TilingRule {
    alphabet: usize,
    horizontal: BTreeSet<(usize, usize)>,
    vertical: BTreeSet<(usize, usize)>,
}

impl TilingRule {
    /// Build a rule, validating that every pair references a tile index
    /// below `alphabet`.
    pub fn new(
        alphabet: usize,
        horizontal: impl IntoIterator<Item = (usize, usize)>,
        vertical: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<TilingRule> {
        if alphabet == 0 {
            return Err(Error::structural("tiling rule needs a nonempty alphabet"));
        }
        let horizontal: BTreeSet<_> = horizontal.into_iter().collect();
        let vertical: BTreeSet<_> = vertical.into_iter().collect();
        for &(a, b) in horizontal.iter().chain(vertical.iter()) {
            if a >= alphabet || b >= alphabet {
                return Err(Error::structural(format!(
                    "tiling rule pair ({a}, {b}) references a tile outside alphabet 0..{alphabet}"
                )));
            }
        }
        Ok(TilingRule {
            alphabet,
            horizontal,
            vertical,
        })
    }

    /// The rule allowing every ordered pair in both directions.
    pub fn full(alphabet: usize) -> Result<TilingRule> {
        let all: Vec<(usize, usize)> = (0..alphabet)
            .flat_map(|a| (0..alphabet).map(move |b| (a, b)))
            .collect();
        TilingRule::new(alphabet, all.clone(), all)
    }

    /// Alphabet size.
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Allowed horizontal adjacencies `(left, right)`.
    pub fn horizontal(&self) -> &BTreeSet<(usize, usize)> {
        &self.horizontal
    }

    /// Allowed vertical adjacencies `(lower, upper)`.
    pub fn vertical(&self) -> &BTreeSet<(usize, usize)> {
        &self.vertical
    }
}

/// Edge-wrap convention for grid validity checks, always chosen explicitly
/// by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WrapMode {
    /// Check only pairs fully inside the grid.
    Open,
    /// Also check pairs that wrap around both axes.
    Torus,
}

/// The first adjacency violation found in a grid, in scan order
/// (bottom row first, left to right, horizontal before vertical per site).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleViolation {
    /// Coordinates `(x, y)` of the left / lower tile of the offending pair.
    pub site: (usize, usize),
    /// The disallowed ordered pair of tile indices.
    pub pair: (usize, usize),
    /// True for a horizontal adjacency, false for a vertical one.
    pub horizontal: bool,
}

/// Check a grid of tile indices against a rule.
///
/// Returns `Ok(None)` when every adjacent pair (under the chosen wrap
/// convention) is allowed, and `Ok(Some(violation))` with the first failing
/// pair otherwise.  Grid values at or above the alphabet size are a domain
/// error.
pub fn is_valid_tiling(
    rule: &TilingRule,
    grid: &Pattern,
    wrap: WrapMode,
) -> Result<Option<RuleViolation>> {
    let rows = grid.rows();
    let h = rows.len();
    let w = rows[0].len();
    for row in rows {
        for &v in row {
            if v as usize >= rule.alphabet {
                return Err(Error::domain(format!(
                    "grid value {v} is outside the rule alphabet 0..{}",
                    rule.alphabet
                )));
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let a = rows[y][x] as usize;
            let hx = match wrap {
                WrapMode::Open => (x + 1 < w).then(|| rows[y][x + 1] as usize),
                WrapMode::Torus => Some(rows[y][(x + 1) % w] as usize),
            };
            if let Some(b) = hx {
                if !rule.horizontal.contains(&(a, b)) {
                    return Ok(Some(RuleViolation {
                        site: (x, y),
                        pair: (a, b),
                        horizontal: true,
                    }));
                }
            }
            let vy = match wrap {
                WrapMode::Open => (y + 1 < h).then(|| rows[y + 1][x] as usize),
                WrapMode::Torus => Some(rows[(y + 1) % h][x] as usize),
            };
            if let Some(b) = vy {
                if !rule.vertical.contains(&(a, b)) {
                    return Ok(Some(RuleViolation {
                        site: (x, y),
                        pair: (a, b),
                        horizontal: false,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The two energy encodings of a tiling rule.
///
/// The adjacency-indicator interaction is naturally a *maximisation*: the
/// per-site value reaches exactly 2 precisely when a valid tiling exists
/// (both the horizontal and the vertical indicator then average to 1).  The
/// crate's energy machinery minimises, so the negated tables are returned
/// alongside: the minimum of `minimizing` equals minus the maximum of
/// `maximizing`, and a valid tiling corresponds to minimum value −2.
#[derive(Debug, Clone)]
pub struct TilingEnergyForms {
    /// Indicator tables; per-site maximum 2 iff the rule admits a tiling.
    pub maximizing: Hamiltonian,
    /// Negated indicator tables for use with the minimising solvers.
    pub minimizing: Hamiltonian,
}

/// Encode a tiling rule as nearest-neighbour pair interactions.
///
/// The horizontal table is indexed `[left][right]`.  The vertical pair
/// region puts its first site at the origin and its second site one step
/// below, so the vertical table is indexed `[upper][lower]` and the rule's
/// `(lower, upper)` pairs land at `table[upper][lower]`.
pub fn rule_to_hamiltonian(rule: &TilingRule) -> Result<TilingEnergyForms> {
    let d = rule.alphabet;
    let mut h_table = vec![vec![Rat::zero(); d]; d];
    let mut v_table = vec![vec![Rat::zero(); d]; d];
    for &(a, b) in &rule.horizontal {
        h_table[a][b] = Rat::one();
    }
    for &(lower, upper) in &rule.vertical {
        v_table[upper][lower] = Rat::one();
    }
    let build = |hs: &[Vec<Rat>], vs: &[Vec<Rat>]| -> Result<Hamiltonian> {
        Hamiltonian::new(
            d,
            vec![
                Hamiltonian::pair_term(d, Region::pair_h(), hs)?,
                Hamiltonian::pair_term(d, Region::pair_v(), vs)?,
            ],
        )
    };
    let neg = |t: &[Vec<Rat>]| -> Vec<Vec<Rat>> {
        t.iter().map(|r| r.iter().map(|x| -x.clone()).collect()).collect()
    };
    Ok(TilingEnergyForms {
        maximizing: build(&h_table, &v_table)?,
        minimizing: build(&neg(&h_table), &neg(&v_table))?,
    })
}

/// Result of a bounded periodic-tiling search.
#[derive(Debug, Clone)]
pub struct PeriodicTilingSearch {
    /// A torus-valid grid, if one was found within the period budget.
    pub witness: Option<Pattern>,
    /// True when the placement budget ran out before the search space was
    /// exhausted; absence of a witness is then even weaker evidence.
    pub partial: bool,
}

/// Search for a torus-valid periodic grid with both periods at most
/// `max_period`, with a default placement budget of one million.
///
/// Box shapes are visited in increasing area (ties by width) and cells are
/// filled bottom row first, so the returned witness is deterministic.
/// Finding no witness does **not** prove the rule admits no tiling.
pub fn periodic_tiling_search(
    rule: &TilingRule,
    max_period: usize,
) -> Result<PeriodicTilingSearch> {
    periodic_tiling_search_with_budget(rule, max_period, 1_000_000)
}

/// [`periodic_tiling_search`] with an explicit placement budget.
pub fn periodic_tiling_search_with_budget(
    rule: &TilingRule,
    max_period: usize,
    budget: u64,
) -> Result<PeriodicTilingSearch> {
    if max_period == 0 {
        return Err(Error::structural("period budget must be at least 1"));
    }
    if rule.alphabet > 256 {
        return Err(Error::domain(format!(
            "periodic witnesses are patterns over at most 256 tiles, got alphabet {}",
            rule.alphabet
        )));
    }
    let mut shapes: Vec<(usize, usize)> = (1..=max_period)
        .flat_map(|m| (1..=max_period).map(move |n| (m, n)))
        .collect();
    shapes.sort_by_key(|&(m, n)| (m * n, m));
    let mut spent: u64 = 0;
    for (m, n) in shapes {
        let mut grid = vec![vec![0u8; m]; n];
        if search_torus(rule, &mut grid, 0, m, n, &mut spent, budget) {
            let pattern = Pattern::new(rule.alphabet, grid)?;
            return Ok(PeriodicTilingSearch {
                witness: Some(pattern),
                partial: false,
            });
        }
        if spent >= budget {
            return Ok(PeriodicTilingSearch {
                witness: None,
                partial: true,
            });
        }
    }
    Ok(PeriodicTilingSearch {
        witness: None,
        partial: false,
    })
}

/// Depth-first fill of an `m`×`n` torus in row-major order (bottom row
/// first); every placement checks the already-determined neighbours,
/// including wrapped ones once a row or column closes.
fn search_torus(
    rule: &TilingRule,
    grid: &mut [Vec<u8>],
    cell: usize,
    m: usize,
    n: usize,
    spent: &mut u64,
    budget: u64,
) -> bool {
    if cell == m * n {
        return true;
    }
    let (y, x) = (cell / m, cell % m);
    for v in 0..rule.alphabet {
        if *spent >= budget {
            return false;
        }
        *spent += 1;
        let ok = {
            let hv = |a: usize, b: usize| rule.horizontal.contains(&(a, b));
            let vv = |a: usize, b: usize| rule.vertical.contains(&(a, b));
            // With period 1 the wrapped neighbour is the cell being placed.
            let wrap_h = if m == 1 { v } else { grid[y][0] as usize };
            let wrap_v = if n == 1 { v } else { grid[0][x] as usize };
            (x == 0 || hv(grid[y][x - 1] as usize, v))
                && (x + 1 < m || hv(v, wrap_h))
                && (y == 0 || vv(grid[y - 1][x] as usize, v))
                && (y + 1 < n || vv(v, wrap_v))
        };
        if ok {
            grid[y][x] = v as u8;
            if search_torus(rule, grid, cell + 1, m, n, spent, budget) {
                return true;
            }
        }
    }
    false
}

/// A rational affine plane map `f(z) = Mz + c` together with a list of
/// closed unit squares (given by their integer lower-left corners) that the
/// encoded orbits must stay inside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "KariSystemDto", try_from = "KariSystemDto")]
pub struct KariSystem {
    matrix: [[Rat; 2]; 2],
    offset: [Rat; 2],
    regions: Vec<(i64, i64)>,
}

impl KariSystem {
    /// Build a system; the regions must be distinct unit squares.
    pub fn new(
        matrix: [[Rat; 2]; 2],
        offset: [Rat; 2],
        regions: Vec<(i64, i64)>,
    ) -> Result<KariSystem> {
        if regions.is_empty() {
            return Err(Error::structural("affine tile system needs at least one region"));
        }
        let distinct: BTreeSet<_> = regions.iter().collect();
        if distinct.len() != regions.len() {
            return Err(Error::structural("affine tile system regions must be distinct"));
        }
        Ok(KariSystem {
            matrix,
            offset,
            regions,
        })
    }

    /// The rotation-by-`arccos(4/5)` system about `(-1/5, 2/5)` on the two
    /// unit squares with lower-left corners `(-1, 0)` and `(0, 0)`.
    pub fn rotation_example() -> KariSystem {
        KariSystem {
            matrix: [[rat(4, 5), rat(-3, 5)], [rat(3, 5), rat(4, 5)]],
            offset: [rat(1, 5), rat(1, 5)],
            regions: vec![(-1, 0), (0, 0)],
        }
    }

    /// True when this is exactly [`KariSystem::rotation_example`], the one
    /// system whose immortality test has a closed form here.
    pub fn is_rotation_example(&self) -> bool {
        *self == KariSystem::rotation_example()
    }

    /// The map matrix `M`.
    pub fn matrix(&self) -> &[[Rat; 2]; 2] {
        &self.matrix
    }

    /// The map offset `c`.
    pub fn offset(&self) -> &[Rat; 2] {
        &self.offset
    }

    /// Lower-left corners of the regions.
    pub fn regions(&self) -> &[(i64, i64)] {
        &self.regions
    }

    /// Apply `f(z) = Mz + c` exactly.
    pub fn apply(&self, z: &[Rat; 2]) -> [Rat; 2] {
        [
            &self.matrix[0][0] * &z[0] + &self.matrix[0][1] * &z[1] + &self.offset[0],
            &self.matrix[1][0] * &z[0] + &self.matrix[1][1] * &z[1] + &self.offset[1],
        ]
    }

    /// Apply the inverse map exactly; a singular matrix is a domain error.
    pub fn apply_inverse(&self, z: &[Rat; 2]) -> Result<[Rat; 2]> {
        let [[a, b], [c, d]] = &self.matrix;
        let det = a * d - b * c;
        if det.is_zero() {
            return Err(Error::domain(
                "the map matrix is singular, so backward orbits are undefined",
            ));
        }
        let x = &z[0] - &self.offset[0];
        let y = &z[1] - &self.offset[1];
        Ok([(d * &x - b * &y) / &det, (a * &y - c * &x) / &det])
    }

    /// The fixed point `(I - M)^{-1} c`; a map with `1` as an eigenvalue is
    /// a domain error.
    pub fn fixed_point(&self) -> Result<[Rat; 2]> {
        let [[a, b], [c, d]] = &self.matrix;
        let one = Rat::one();
        let (ia, ib, ic, id) = (&one - a, -b.clone(), -c.clone(), &one - d);
        let det = &ia * &id - &ib * &ic;
        if det.is_zero() {
            return Err(Error::domain("the map has no unique fixed point"));
        }
        Ok([
            (&id * &self.offset[0] - &ib * &self.offset[1]) / &det,
            (&ia * &self.offset[1] - &ic * &self.offset[0]) / &det,
        ])
    }

    /// The four integer corners of region `i` in reading order
    /// (lower-left, lower-right, upper-left, upper-right).
    pub fn region_corners(&self, i: usize) -> [(i64, i64); 4] {
        let (mx, ny) = self.regions[i];
        [(mx, ny), (mx + 1, ny), (mx, ny + 1), (mx + 1, ny + 1)]
    }

    /// Sorted union of all region corners, shared corners listed once.
    pub fn corner_union(&self) -> Vec<(i64, i64)> {
        let set: BTreeSet<(i64, i64)> = (0..self.regions.len())
            .flat_map(|i| self.region_corners(i))
            .collect();
        set.into_iter().collect()
    }

    /// Index of the first listed region whose closed square contains `z`,
    /// if any.  Points on a shared boundary belong to the earlier region.
    pub fn region_of(&self, z: &[Rat; 2]) -> Option<usize> {
        self.regions.iter().position(|&(mx, ny)| {
            z[0] >= rat_int(mx)
                && z[0] <= rat_int(mx + 1)
                && z[1] >= rat_int(ny)
                && z[1] <= rat_int(ny + 1)
        })
    }
}

/// One tile of the affine encoding: a region index and four edge labels
/// satisfying `f(top) + left = bottom + right` exactly.
///
/// Tiles are ordered and compared by their edge labels; the region is
/// carried data (the canonical smallest region for alphabet tiles, the
/// orbit's actual region for strip tiles) and does not affect identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "KariTileDto", try_from = "KariTileDto")]
pub struct KariTile {
    /// Region index the tile's top vector belongs to.
    pub region: usize,
    /// Integer top digit vector.
    pub top: (i64, i64),
    /// Integer bottom digit vector.
    pub bottom: (i64, i64),
    /// Rational left carry vector.
    pub left: [Rat; 2],
    /// Rational right carry vector.
    pub right: [Rat; 2],
}

impl KariTile {
    /// The identity key: the four edge labels in `(top, bottom, left,
    /// right)` order.
    pub fn edge_labels(&self) -> ((i64, i64), (i64, i64), [Rat; 2], [Rat; 2]) {
        (self.top, self.bottom, self.left.clone(), self.right.clone())
    }
}

impl PartialEq for KariTile {
    fn eq(&self, other: &Self) -> bool {
        self.edge_labels() == other.edge_labels()
    }
}

impl Eq for KariTile {}

impl PartialOrd for KariTile {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KariTile {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.edge_labels().cmp(&other.edge_labels())
    }
}

/// Check the tile identity `f(top) + left = bottom + right` exactly.
pub fn kari_tile_identity(sys: &KariSystem, tile: &KariTile) -> bool {
    let ft = sys.apply(&[rat_int(tile.top.0), rat_int(tile.top.1)]);
    ft[0].clone() + &tile.left[0] == rat_int(tile.bottom.0) + &tile.right[0]
        && ft[1].clone() + &tile.left[1] == rat_int(tile.bottom.1) + &tile.right[1]
}

/// Per-coordinate carry bounds: the carry grid spans
/// `[c_s - Σ_{j: M_{s,j}>0} M_{s,j},  c_s + 1 - Σ_{j: M_{s,j}<0} M_{s,j}]`
/// on the grid of multiples of one over the row's common denominator.
fn carry_axis(sys: &KariSystem, s: usize) -> Vec<Rat> {
    let row = &sys.matrix[s];
    let c = &sys.offset[s];
    let mut lo = c.clone();
    let mut hi = c + Rat::one();
    for entry in row {
        if entry.is_positive() {
            lo -= entry;
        } else if entry.is_negative() {
            hi -= entry;
        }
    }
    let mut den = c.denom().clone();
    for entry in row {
        den = den.lcm(entry.denom());
    }
    let den_rat = Rat::from_integer(den.clone());
    let mut k = (&lo * &den_rat).ceil().to_integer();
    let k_hi = (&hi * &den_rat).floor().to_integer();
    let mut out = Vec::new();
    while k <= k_hi {
        out.push(Rat::new(k.clone(), den.clone()));
        k += BigInt::one();
    }
    out
}

/// The finite grid of feasible carry vectors: per coordinate, all multiples
/// of one over the row's common denominator within the closed carry bounds.
///
/// Returned sorted ascending by `(first, second)` coordinate.
pub fn kari_left_vector_set(sys: &KariSystem) -> Vec<[Rat; 2]> {
    let a0 = carry_axis(sys, 0);
    let a1 = carry_axis(sys, 1);
    let mut out = Vec::with_capacity(a0.len() * a1.len());
    for x in &a0 {
        for y in &a1 {
            out.push([x.clone(), y.clone()]);
        }
    }
    out
}

/// Generate the full tile alphabet of a system.
///
/// Every combination of a region `i`, a top corner of region `i`, a bottom
/// corner from the union of all regions, and a left carry from the grid is
/// kept when the forced right carry `f(top) + left - bottom` stays inside
/// the grid.  Tiles are identified by their edge labels: a combination whose
/// top corner is shared by several regions is emitted once with the smallest
/// such region index.  The result is sorted by edge labels, so repeated runs
/// are byte-identical.
pub fn kari_alphabet(sys: &KariSystem) -> Vec<KariTile> {
    let carries = kari_left_vector_set(sys);
    let carry_set: BTreeSet<(Rat, Rat)> = carries
        .iter()
        .map(|l| (l[0].clone(), l[1].clone()))
        .collect();
    let bottoms = sys.corner_union();
    let mut tiles: BTreeMap<((i64, i64), (i64, i64), [Rat; 2], [Rat; 2]), usize> = BTreeMap::new();
    for i in 0..sys.regions().len() {
        for top in sys.region_corners(i) {
            let ft = sys.apply(&[rat_int(top.0), rat_int(top.1)]);
            for &bottom in &bottoms {
                for l in &carries {
                    let r0 = &ft[0] + &l[0] - rat_int(bottom.0);
                    let r1 = &ft[1] + &l[1] - rat_int(bottom.1);
                    if carry_set.contains(&(r0.clone(), r1.clone())) {
                        let key = (top, bottom, l.clone(), [r0, r1]);
                        let entry = tiles.entry(key).or_insert(i);
                        if i < *entry {
                            *entry = i;
                        }
                    }
                }
            }
        }
    }
    tiles
        .into_iter()
        .map(|((top, bottom, left, right), region)| KariTile {
            region,
            top,
            bottom,
            left,
            right,
        })
        .collect()
}

/// Floor of an exact rational as a big integer.
fn floor_int(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

/// The digit sequence `B_k(v) = ⌊kv⌋ - ⌊(k-1)v⌋` (componentwise floors) for
/// `k` in the inclusive range `k_lo..=k_hi`.
///
/// Sliding-window averages of consecutive digits telescope to `v` up to one
/// over the window length per coordinate.
pub fn beatty_row(v: &[Rat; 2], k_lo: i64, k_hi: i64) -> Result<Vec<(i64, i64)>> {
    if k_lo > k_hi {
        return Err(Error::structural(format!(
            "empty digit range: {k_lo} > {k_hi}"
        )));
    }
    let mut out = Vec::with_capacity((k_hi - k_lo + 1) as usize);
    let mut prev = [
        floor_int(&(&v[0] * rat_int(k_lo - 1))),
        floor_int(&(&v[1] * rat_int(k_lo - 1))),
    ];
    for k in k_lo..=k_hi {
        let cur = [
            floor_int(&(&v[0] * rat_int(k))),
            floor_int(&(&v[1] * rat_int(k))),
        ];
        let dx = (&cur[0] - &prev[0])
            .try_into()
            .map_err(|_| Error::structural("digit overflowed a 64-bit integer"))?;
        let dy = (&cur[1] - &prev[1])
            .try_into()
            .map_err(|_| Error::structural("digit overflowed a 64-bit integer"))?;
        out.push((dx, dy));
        prev = cur;
    }
    Ok(out)
}

/// Build the tile at column index `k` of the row encoding point `z`, whose
/// next-row image is `fz`; `region` is the row's region label.
fn strip_tile(sys: &KariSystem, z: &[Rat; 2], fz: &[Rat; 2], region: usize, k: i64) -> KariTile {
    let km1 = rat_int(k - 1);
    let kk = rat_int(k);
    let a_prev = [floor_int(&(&z[0] * &km1)), floor_int(&(&z[1] * &km1))];
    let a_cur = [floor_int(&(&z[0] * &kk)), floor_int(&(&z[1] * &kk))];
    let af_prev = [floor_int(&(&fz[0] * &km1)), floor_int(&(&fz[1] * &km1))];
    let af_cur = [floor_int(&(&fz[0] * &kk)), floor_int(&(&fz[1] * &kk))];
    let top = (
        i64::try_from(&a_cur[0] - &a_prev[0]).expect("digit fits i64"),
        i64::try_from(&a_cur[1] - &a_prev[1]).expect("digit fits i64"),
    );
    let bottom = (
        i64::try_from(&af_cur[0] - &af_prev[0]).expect("digit fits i64"),
        i64::try_from(&af_cur[1] - &af_prev[1]).expect("digit fits i64"),
    );
    let f_aprev = sys.apply(&[
        Rat::from_integer(a_prev[0].clone()),
        Rat::from_integer(a_prev[1].clone()),
    ]);
    let f_acur = sys.apply(&[
        Rat::from_integer(a_cur[0].clone()),
        Rat::from_integer(a_cur[1].clone()),
    ]);
    let left = [
        &f_aprev[0] - Rat::from_integer(af_prev[0].clone()) + &sys.offset()[0] * &km1,
        &f_aprev[1] - Rat::from_integer(af_prev[1].clone()) + &sys.offset()[1] * &km1,
    ];
    let right = [
        &f_acur[0] - Rat::from_integer(af_cur[0].clone()) + &sys.offset()[0] * &kk,
        &f_acur[1] - Rat::from_integer(af_cur[1].clone()) + &sys.offset()[1] * &kk,
    ];
    KariTile {
        region,
        top,
        bottom,
        left,
        right,
    }
}

/// Tile an `rows`×`cols` strip that simulates the forward orbit of `v`.
///
/// Row `j` (row 0 on top, increasing downward) encodes the `j`-th image of
/// `v` under the map, with column `k` holding the digit tile of index
/// `k_offset + k`.  The orbit must stay inside the region union for rows
/// `0..=rows` (the final row's bottom digits read one step further); the
/// first escaping row index is named in the error otherwise.  Within the
/// result, each tile's right carry equals its right neighbour's left carry
/// and each tile's bottom digit equals the digit below, by construction.
pub fn kari_strip_tiling(
    sys: &KariSystem,
    v: &[Rat; 2],
    rows: usize,
    cols: usize,
    k_offset: i64,
) -> Result<Vec<Vec<KariTile>>> {
    if rows == 0 || cols == 0 {
        return Err(Error::structural("strip needs at least one row and column"));
    }
    let mut points = Vec::with_capacity(rows + 1);
    let mut z = v.clone();
    for j in 0..=rows {
        if sys.region_of(&z).is_none() {
            return Err(Error::domain(format!(
                "orbit leaves the region union at row {j}: point ({}, {})",
                format_rat(&z[0]),
                format_rat(&z[1])
            )));
        }
        let next = sys.apply(&z);
        points.push(z);
        z = next;
    }
    let mut grid = Vec::with_capacity(rows);
    for j in 0..rows {
        let region = sys
            .region_of(&points[j])
            .expect("membership checked above");
        let mut row = Vec::with_capacity(cols);
        for k in 0..cols {
            row.push(strip_tile(
                sys,
                &points[j],
                &points[j + 1],
                region,
                k_offset + k as i64,
            ));
        }
        grid.push(row);
    }
    Ok(grid)
}

/// The first adjacency violation in a grid of tiles, if any: within a row,
/// a tile's right carry must equal its right neighbour's left carry and
/// both must carry the same region; vertically, a tile's bottom digit must
/// equal the top digit of the tile below it.
///
/// Returns the `(row, column)` of the offending tile and a short
/// description.  Ragged grids are a structural error.
pub fn kari_grid_violation(
    grid: &[Vec<KariTile>],
) -> Result<Option<(usize, usize, &'static str)>> {
    if grid.is_empty() || grid[0].is_empty() {
        return Err(Error::structural("tile grid must be nonempty"));
    }
    let cols = grid[0].len();
    if grid.iter().any(|row| row.len() != cols) {
        return Err(Error::structural("tile grid rows must have equal length"));
    }
    for (j, row) in grid.iter().enumerate() {
        for (k, tile) in row.iter().enumerate() {
            if k + 1 < cols {
                let next = &row[k + 1];
                if tile.region != next.region {
                    return Ok(Some((j, k, "row mixes regions")));
                }
                if tile.right != next.left {
                    return Ok(Some((j, k, "right carry does not match neighbour's left carry")));
                }
            }
            if j + 1 < grid.len() {
                let below = &grid[j + 1][k];
                if tile.bottom != below.top {
                    return Ok(Some((j, k, "bottom digit does not match tile below")));
                }
            }
        }
    }
    Ok(None)
}

/// Exact immortality test for [`KariSystem::rotation_example`]: the point
/// stays in the region union forever iff its squared distance from the
/// rotation centre `(-1/5, 2/5)` is at most `(2/5)^2`.
///
/// Other systems have no closed-form test here; probing their orbits with
/// [`orbit`] is the supported alternative, and passing one is a domain
/// error.
pub fn is_immortal(sys: &KariSystem, z: &[Rat; 2]) -> Result<bool> {
    if !sys.is_rotation_example() {
        return Err(Error::domain(
            "the closed-form immortality test only covers the built-in rotation system; \
             inspect other systems with orbit",
        ));
    }
    let dx = &z[0] - rat(-1, 5);
    let dy = &z[1] - rat(2, 5);
    Ok(&dx * &dx + &dy * &dy <= rat(4, 25))
}

/// The exact orbit `f^j(z)` for `j` in the inclusive range `j_lo..=j_hi`.
///
/// Negative indices use the inverse map and require `M` to be invertible.
pub fn orbit(sys: &KariSystem, z: &[Rat; 2], j_lo: i64, j_hi: i64) -> Result<Vec<[Rat; 2]>> {
    if j_lo > j_hi {
        return Err(Error::structural(format!("empty orbit range: {j_lo} > {j_hi}")));
    }
    let mut out = Vec::with_capacity((j_hi - j_lo + 1) as usize);
    let mut cur = z.clone();
    if j_lo >= 0 {
        for _ in 0..j_lo {
            cur = sys.apply(&cur);
        }
    } else {
        for _ in 0..(-j_lo) {
            cur = sys.apply_inverse(&cur)?;
        }
    }
    for _ in j_lo..j_hi {
        out.push(cur.clone());
        cur = sys.apply(&cur);
    }
    out.push(cur);
    Ok(out)
}

/// Which top-vector coordinate the density witness averages.
///
/// The first coordinate is the documented convention; the second is exposed
/// because the two finite-sample witnesses differ while sharing the same
/// asymptotic curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopCoordinate {
    /// Average `top.0 + 1/5` over second-region tiles (the default).
    First,
    /// Average `top.1 + 1/5` over second-region tiles.
    Second,
}

/// Exact density witnesses of a tile grid with the default first-coordinate
/// convention; see [`witnesses_with`].
pub fn witnesses(grid: &[Vec<KariTile>]) -> Result<(Rat, Rat)> {
    witnesses_with(grid, TopCoordinate::First)
}

/// Exact density witnesses `(omega, eta)` of a tile grid.
///
/// `omega` is the average over all grid cells of `top coordinate + 1/5`
/// restricted to tiles labelled with region index 1 (the second listed
/// region); `eta` is the fraction of cells labelled with region index 1.
pub fn witnesses_with(grid: &[Vec<KariTile>], coord: TopCoordinate) -> Result<(Rat, Rat)> {
    if grid.is_empty() || grid[0].is_empty() {
        return Err(Error::structural("tile grid must be nonempty"));
    }
    let cells = rat_int((grid.len() * grid[0].len()) as i64);
    let mut weighted = Rat::zero();
    let mut count: i64 = 0;
    for row in grid {
        for tile in row {
            if tile.region == 1 {
                count += 1;
                let t = match coord {
                    TopCoordinate::First => tile.top.0,
                    TopCoordinate::Second => tile.top.1,
                };
                weighted += rat_int(t) + rat(1, 5);
            }
        }
    }
    Ok((weighted / &cells, rat_int(count) / &cells))
}

/// Exact row-limit density witnesses over `n` orbit rows.
///
/// This is the `cols → ∞` limit of [`witnesses`] on a strip from the same
/// starting point: each row's top-digit average telescopes to the row's
/// orbit point, so the witnesses become exact orbit averages of
/// `first coordinate + 1/5` (over second-region rows) and of the
/// second-region indicator.  The whole computation is integer arithmetic on
/// a common scaled denominator, so it stays exact for thousands of rows.
/// Rows must stay inside the region union; the first escaping row is named
/// otherwise.
pub fn orbit_witnesses(sys: &KariSystem, v: &[Rat; 2], n: usize) -> Result<(Rat, Rat)> {
    if n == 0 {
        return Err(Error::structural("row count must be positive"));
    }
    // Common scale sigma clearing every matrix and offset denominator.
    let mut sigma = BigInt::one();
    for row in sys.matrix() {
        for e in row {
            sigma = sigma.lcm(e.denom());
        }
    }
    for e in sys.offset() {
        sigma = sigma.lcm(e.denom());
    }
    let m_int: Vec<Vec<BigInt>> = sys
        .matrix()
        .iter()
        .map(|row| row.iter().map(|e| (e * Rat::from_integer(sigma.clone())).to_integer()).collect())
        .collect();
    let e_int: Vec<BigInt> = sys
        .offset()
        .iter()
        .map(|e| (e * Rat::from_integer(sigma.clone())).to_integer())
        .collect();
    // Start: v = Z / den with one shared denominator.
    let mut den: BigInt = v[0].denom().lcm(v[1].denom());
    let mut z0 = (&v[0] * Rat::from_integer(den.clone())).to_integer();
    let mut z1 = (&v[1] * Rat::from_integer(den.clone())).to_integer();
    let mut acc = BigInt::zero();
    let mut hits: i64 = 0;
    let mut last_den = den.clone();
    for j in 0..n {
        // Region membership test on integers: m*den <= z <= (m+1)*den.
        let inside = |corner: (i64, i64), z0: &BigInt, z1: &BigInt, den: &BigInt| {
            let lo0 = BigInt::from(corner.0) * den;
            let lo1 = BigInt::from(corner.1) * den;
            *z0 >= lo0 && *z0 <= &lo0 + den && *z1 >= lo1 && *z1 <= &lo1 + den
        };
        let region = sys
            .regions()
            .iter()
            .position(|&c| inside(c, &z0, &z1, &den));
        let Some(region) = region else {
            return Err(Error::domain(format!(
                "orbit leaves the region union at row {j}"
            )));
        };
        let hit = region == 1;
        acc = &acc * &sigma + if hit { z0.clone() } else { BigInt::zero() };
        if hit {
            hits += 1;
        }
        last_den = den.clone();
        if j + 1 < n {
            let nz0 = &m_int[0][0] * &z0 + &m_int[0][1] * &z1 + &e_int[0] * &den;
            let nz1 = &m_int[1][0] * &z0 + &m_int[1][1] * &z1 + &e_int[1] * &den;
            z0 = nz0;
            z1 = nz1;
            den *= &sigma;
        } else {
            // Keep the accumulator aligned with the final row's denominator.
        }
    }
    let rows = rat_int(n as i64);
    let omega = (Rat::new(acc, last_den) + rat_int(hits) * rat(1, 5)) / &rows;
    let eta = rat_int(hits) / &rows;
    Ok((omega, eta))
}

/// A point of the analytic density curve, the only floating-point
/// computation in the crate.
///
/// For `mu` in `[1/5, 2/5]` the curve is
/// `omega = (mu/pi) * sqrt(1 - (1/(5 mu))^2)`,
/// `eta = arccos(1/(5 mu)) / pi`; values outside the interval (beyond an
/// internal `1e-12` slack) are a domain error.
pub fn curve_point(mu: f64) -> Result<(f64, f64)> {
    const SLACK: f64 = 1e-12;
    if !(0.2 - SLACK..=0.4 + SLACK).contains(&mu) {
        return Err(Error::domain(format!(
            "curve parameter {mu} is outside [1/5, 2/5]"
        )));
    }
    let mu = mu.clamp(0.2, 0.4);
    let ratio = (1.0 / (5.0 * mu)).clamp(-1.0, 1.0);
    let omega = mu / std::f64::consts::PI * (1.0 - ratio * ratio).max(0.0).sqrt();
    let eta = ratio.acos() / std::f64::consts::PI;
    Ok((omega, eta))
}

/// A rational point at exact distance `mu` from the rotation centre of
/// [`KariSystem::rotation_example`], lying along the rational direction
/// `(3/5, 4/5)`; immortal for `mu ≤ 2/5`.
pub fn rotation_example_point(mu: &Rat) -> [Rat; 2] {
    [rat(-1, 5) + rat(3, 5) * mu, rat(2, 5) + rat(4, 5) * mu]
}

#[derive(Serialize, Deserialize)]
struct TilingRuleDto {
    alphabet: usize,
    horizontal: Vec<(usize, usize)>,
    vertical: Vec<(usize, usize)>,
}

impl From<TilingRule> for TilingRuleDto {
    fn from(rule: TilingRule) -> TilingRuleDto {
        TilingRuleDto {
            alphabet: rule.alphabet,
            horizontal: rule.horizontal.into_iter().collect(),
            vertical: rule.vertical.into_iter().collect(),
        }
    }
}

impl TryFrom<TilingRuleDto> for TilingRule {
    type Error = Error;

    fn try_from(dto: TilingRuleDto) -> Result<TilingRule> {
        TilingRule::new(dto.alphabet, dto.horizontal, dto.vertical)
    }
}

#[derive(Serialize, Deserialize)]
struct KariSystemDto {
    matrix: [[String; 2]; 2],
    offset: [String; 2],
    regions: Vec<(i64, i64)>,
}

impl From<KariSystem> for KariSystemDto {
    fn from(sys: KariSystem) -> KariSystemDto {
        KariSystemDto {
            matrix: sys.matrix.map(|row| row.map(|e| format_rat(&e))),
            offset: sys.offset.map(|e| format_rat(&e)),
            regions: sys.regions,
        }
    }
}

impl TryFrom<KariSystemDto> for KariSystem {
    type Error = Error;

    fn try_from(dto: KariSystemDto) -> Result<KariSystem> {
        let parse2 = |pair: &[String; 2]| -> Result<[Rat; 2]> {
            Ok([parse_rat(&pair[0])?, parse_rat(&pair[1])?])
        };
        let matrix = [parse2(&dto.matrix[0])?, parse2(&dto.matrix[1])?];
        let offset = parse2(&dto.offset)?;
        KariSystem::new(matrix, offset, dto.regions)
    }
}

#[derive(Serialize, Deserialize)]
struct KariTileDto {
    region: usize,
    top: (i64, i64),
    bottom: (i64, i64),
    left: [String; 2],
    right: [String; 2],
}

impl From<KariTile> for KariTileDto {
    fn from(tile: KariTile) -> KariTileDto {
        KariTileDto {
            region: tile.region,
            top: tile.top,
            bottom: tile.bottom,
            left: tile.left.map(|e| format_rat(&e)),
            right: tile.right.map(|e| format_rat(&e)),
        }
    }
}

impl TryFrom<KariTileDto> for KariTile {
    type Error = Error;

    fn try_from(dto: KariTileDto) -> Result<KariTile> {
        let parse2 = |pair: &[String; 2]| -> Result<[Rat; 2]> {
            Ok([parse_rat(&pair[0])?, parse_rat(&pair[1])?])
        };
        Ok(KariTile {
            region: dto.region,
            top: dto.top,
            bottom: dto.bottom,
            left: parse2(&dto.left)?,
            right: parse2(&dto.right)?,
        })
    }
}
