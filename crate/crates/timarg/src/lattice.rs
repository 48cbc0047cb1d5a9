//! Regions, configurations, distributions, marginalisation, and exact
//! symmetrisation on the two-dimensional integer lattice.
//!
//! Geometry conventions, used throughout the crate:
//!
//! * Sites are integer pairs `(x, y)` with `y` increasing upward.
//! * A [`Pattern`] stores `rows[r][c]` as the value at site `(c, r)`, so
//!   `rows[0]` is the bottom lattice row.
//! * A [`Region`] keeps its sites sorted by `(y, x)` ascending; a
//!   configuration over a region is keyed by its base-`d` digits in that
//!   order, first site most significant.
//! * The named pair regions: [`Region::pair_h`] couples a site to its right
//!   neighbour, [`Region::pair_v`] to the site *below* (in a pair table
//!   `P(a, b)` for `v`, the `a` role sits on top), [`Region::pair_plus`] to
//!   the up-right diagonal neighbour, and [`Region::pair_minus`] to the
//!   down-right one.  In every pair table the `a` role is the value at
//!   `(0, 0)` and `b` the value at the partner site.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rat::{parse_rat, Rat};
use crate::Result;

/// A finite, duplicate-free set of lattice sites.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Region {
    sites: Vec<(i64, i64)>,
}

impl Region {
    /// Build a region from sites; rejects empty input and duplicates.
    pub fn new(sites: impl IntoIterator<Item = (i64, i64)>) -> Result<Region> {
        let mut sites: Vec<(i64, i64)> = sites.into_iter().collect();
        if sites.is_empty() {
            return Err(Error::structural("region must be nonempty"));
        }
        sites.sort_by_key(|&(x, y)| (y, x));
        for w in sites.windows(2) {
            if w[0] == w[1] {
                return Err(Error::structural(format!(
                    "duplicate site ({}, {}) in region",
                    w[0].0, w[0].1
                )));
            }
        }
        Ok(Region { sites })
    }

    /// Horizontal pair `{(0,0), (1,0)}`.
    pub fn pair_h() -> Region {
        Region::new([(0, 0), (1, 0)]).unwrap()
    }

    /// Vertical pair `{(0,0), (0,-1)}`: the second site lies below the first.
    pub fn pair_v() -> Region {
        Region::new([(0, 0), (0, -1)]).unwrap()
    }

    /// Up-diagonal pair `{(0,0), (1,1)}`.
    pub fn pair_plus() -> Region {
        Region::new([(0, 0), (1, 1)]).unwrap()
    }

    /// Down-diagonal pair `{(0,0), (1,-1)}`.
    pub fn pair_minus() -> Region {
        Region::new([(0, 0), (1, -1)]).unwrap()
    }

    /// The `m`-wide, `n`-tall rectangle `{0..m-1} x {0..n-1}`.
    pub fn rect(m: i64, n: i64) -> Result<Region> {
        if m < 1 || n < 1 {
            return Err(Error::structural(format!(
                "rectangle dimensions must be positive, got {m} x {n}"
            )));
        }
        Region::new((0..n).flat_map(|y| (0..m).map(move |x| (x, y))))
    }

    /// Sites in canonical `(y, x)`-ascending order.
    pub fn sites(&self) -> &[(i64, i64)] {
        &self.sites
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    /// Always false (regions are nonempty by construction).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether `site` belongs to the region.
    pub fn contains(&self, site: (i64, i64)) -> bool {
        self.index_of(site).is_some()
    }

    /// Position of `site` in canonical order, if present.
    pub fn index_of(&self, site: (i64, i64)) -> Option<usize> {
        self.sites
            .binary_search_by_key(&(site.1, site.0), |&(x, y)| (y, x))
            .ok()
    }

    /// Whether every site of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }

    /// The region shifted by `(dx, dy)`.
    pub fn translate(&self, dx: i64, dy: i64) -> Region {
        Region {
            sites: self.sites.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
        }
    }

    /// Inclusive bounding box `(x_min, x_max, y_min, y_max)`.
    pub fn bounding_box(&self) -> (i64, i64, i64, i64) {
        let xs = self.sites.iter().map(|s| s.0);
        let ys = self.sites.iter().map(|s| s.1);
        (
            xs.clone().min().unwrap(),
            xs.max().unwrap(),
            ys.clone().min().unwrap(),
            ys.max().unwrap(),
        )
    }
}

/// Number of configurations `d^sites`, guarded against overflow.
pub fn config_count(d: usize, sites: usize) -> Result<u64> {
    let mut n: u64 = 1;
    for _ in 0..sites {
        n = n.checked_mul(d as u64).ok_or_else(|| {
            Error::resource(format!("d^|region| with d={d} and {sites} sites overflows"))
        })?;
    }
    Ok(n)
}

/// Decode a configuration key into per-site digits (canonical site order,
/// first site most significant).
pub fn decode_config(key: u64, d: usize, sites: usize) -> Vec<u8> {
    let mut digits = vec![0u8; sites];
    let mut k = key;
    for slot in digits.iter_mut().rev() {
        *slot = (k % d as u64) as u8;
        k /= d as u64;
    }
    digits
}

/// Encode per-site digits into a configuration key.
pub fn encode_config(digits: &[u8], d: usize) -> u64 {
    digits
        .iter()
        .fold(0u64, |acc, &v| acc * d as u64 + v as u64)
}

/// A probability distribution over the configurations of a finite region.
///
/// Zero-probability configurations are stored implicitly; iteration is in
/// configuration-key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DistributionDto", try_from = "DistributionDto")]
pub struct Distribution {
    d: usize,
    region: Region,
    probs: BTreeMap<u64, Rat>,
}

impl Distribution {
    /// Build and validate a distribution.  Probabilities must be
    /// nonnegative, sum to exactly one, and key configurations in range;
    /// explicit zeros are dropped.
    pub fn new(d: usize, region: Region, probs: BTreeMap<u64, Rat>) -> Result<Distribution> {
        check_dimension(d)?;
        let count = config_count(d, region.len())?;
        let mut total = Rat::zero();
        let mut clean = BTreeMap::new();
        for (key, p) in probs {
            if key >= count {
                return Err(Error::structural(format!(
                    "configuration key {key} out of range (region has {count} configurations)"
                )));
            }
            if p.is_negative() {
                return Err(Error::structural(format!(
                    "negative probability {p} at configuration {key}"
                )));
            }
            if p.is_zero() {
                continue;
            }
            total += &p;
            clean.insert(key, p);
        }
        if !total.is_one() {
            return Err(Error::structural(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Distribution {
            d,
            region,
            probs: clean,
        })
    }

    /// Point mass on a single configuration.
    pub fn point_mass(d: usize, region: Region, key: u64) -> Result<Distribution> {
        Distribution::new(d, region, BTreeMap::from([(key, Rat::one())]))
    }

    /// Local dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The underlying region.
    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Probability of a configuration key (zero if unstored).
    pub fn prob(&self, key: u64) -> Rat {
        self.probs.get(&key).cloned().unwrap_or_else(Rat::zero)
    }

    /// Nonzero entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rat)> {
        self.probs.iter().map(|(k, p)| (*k, p))
    }

    /// The same distribution on the region shifted by `(dx, dy)`.
    ///
    /// Canonical site order is translation-invariant, so configuration keys
    /// carry over unchanged.
    pub fn translate(&self, dx: i64, dy: i64) -> Distribution {
        Distribution {
            d: self.d,
            region: self.region.translate(dx, dy),
            probs: self.probs.clone(),
        }
    }

    /// Push the distribution forward through an injective site map (e.g. a
    /// lattice isometry): the value at site `s` moves to `f(s)`.
    pub fn map_sites(&self, f: impl Fn((i64, i64)) -> (i64, i64)) -> Result<Distribution> {
        let images: Vec<(i64, i64)> = self.region.sites().iter().map(|&s| f(s)).collect();
        let region = Region::new(images.iter().copied())?;
        // Position in the new canonical order of each original site's image.
        let new_pos: Vec<usize> = images
            .iter()
            .map(|&s| region.index_of(s).expect("image site present"))
            .collect();
        let mut probs = BTreeMap::new();
        for (key, p) in self.iter() {
            let digits = decode_config(key, self.d, self.region.len());
            let mut moved = vec![0u8; digits.len()];
            for (i, &v) in digits.iter().enumerate() {
                moved[new_pos[i]] = v;
            }
            probs.insert(encode_config(&moved, self.d), p.clone());
        }
        Distribution::new(self.d, region, probs)
    }

    /// Marginal on a subregion: partner sites are summed out exactly.
    pub fn marginalize(&self, sub: &Region) -> Result<Distribution> {
        if !sub.is_subset_of(&self.region) {
            return Err(Error::domain(
                "marginalisation target is not a subset of the distribution's region",
            ));
        }
        let positions: Vec<usize> = sub
            .sites()
            .iter()
            .map(|&s| self.region.index_of(s).expect("subset checked"))
            .collect();
        let mut out: BTreeMap<u64, Rat> = BTreeMap::new();
        for (key, p) in self.iter() {
            let digits = decode_config(key, self.d, self.region.len());
            let sub_digits: Vec<u8> = positions.iter().map(|&i| digits[i]).collect();
            *out.entry(encode_config(&sub_digits, self.d))
                .or_insert_with(Rat::zero) += p;
        }
        Distribution::new(self.d, sub.clone(), out)
    }
}

pub(crate) fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::structural(format!(
            "local dimension must be at least 2, got {d}"
        )));
    }
    if d > 256 {
        return Err(Error::structural(format!(
            "local dimension {d} exceeds the supported maximum of 256"
        )));
    }
    Ok(())
}

/// A marginal specification: for each listed region, the exact distribution
/// a joint measure is required to reproduce there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MarginalSpecDto", try_from = "MarginalSpecDto")]
pub struct MarginalSpec {
    /// Local dimension shared by all entries.
    pub d: usize,
    /// `(region, required marginal)` pairs.
    pub entries: Vec<(Region, Distribution)>,
}

impl MarginalSpec {
    /// Build and validate: every entry's distribution must live on its
    /// region with the shared local dimension.
    pub fn new(d: usize, entries: Vec<(Region, Distribution)>) -> Result<MarginalSpec> {
        check_dimension(d)?;
        for (region, dist) in &entries {
            if dist.d() != d {
                return Err(Error::structural(format!(
                    "entry has local dimension {}, spec requires {d}",
                    dist.d()
                )));
            }
            if dist.region() != region {
                return Err(Error::structural(
                    "entry distribution does not live on its stated region",
                ));
            }
        }
        Ok(MarginalSpec { d, entries })
    }

    /// The entry distribution for `region`, if listed.
    pub fn entry(&self, region: &Region) -> Option<&Distribution> {
        self.entries
            .iter()
            .find(|(r, _)| r == region)
            .map(|(_, q)| q)
    }
}

/// Build a pair-region distribution from a `d x d` table `P(a, b)` where `a`
/// is the value at `(0, 0)` and `b` the value at the partner site.
pub fn pair_distribution(d: usize, region: &Region, table: &[Vec<Rat>]) -> Result<Distribution> {
    check_dimension(d)?;
    if region.len() != 2 {
        return Err(Error::structural("pair table requires a two-site region"));
    }
    let anchor = region
        .index_of((0, 0))
        .ok_or_else(|| Error::structural("pair region must contain the site (0, 0)"))?;
    if table.len() != d || table.iter().any(|row| row.len() != d) {
        return Err(Error::structural(format!("pair table must be {d} x {d}")));
    }
    let mut probs = BTreeMap::new();
    for (a, row) in table.iter().enumerate() {
        for (b, p) in row.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mut digits = [0u8; 2];
            digits[anchor] = a as u8;
            digits[1 - anchor] = b as u8;
            probs.insert(encode_config(&digits, d), p.clone());
        }
    }
    Distribution::new(d, region.clone(), probs)
}

/// Extract the `d x d` table `P(a, b)` (role convention as in
/// [`pair_distribution`]) from a pair-region distribution.
pub fn pair_table(dist: &Distribution) -> Result<Vec<Vec<Rat>>> {
    let region = dist.region();
    if region.len() != 2 {
        return Err(Error::structural("pair table requires a two-site region"));
    }
    let anchor = region
        .index_of((0, 0))
        .ok_or_else(|| Error::structural("pair region must contain the site (0, 0)"))?;
    let d = dist.d();
    let mut table = vec![vec![Rat::zero(); d]; d];
    for (key, p) in dist.iter() {
        let digits = decode_config(key, d, 2);
        let a = digits[anchor] as usize;
        let b = digits[1 - anchor] as usize;
        table[a][b] = p.clone();
    }
    Ok(table)
}

/// A finite `m x n` block of values, read as one period of a fully periodic
/// (doubly cyclic) configuration of the plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PatternDto", try_from = "PatternDto")]
pub struct Pattern {
    d: usize,
    rows: Vec<Vec<u8>>,
}

impl Pattern {
    /// Build and validate: rows must be nonempty, rectangular, and hold
    /// values below `d`.  `rows[r][c]` is the value at site `(c, r)`.
    pub fn new(d: usize, rows: Vec<Vec<u8>>) -> Result<Pattern> {
        check_dimension(d)?;
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::structural("pattern must be at least 1 x 1"));
        }
        let width = rows[0].len();
        for row in &rows {
            if row.len() != width {
                return Err(Error::structural("pattern rows have unequal lengths"));
            }
            for &v in row {
                if v as usize >= d {
                    return Err(Error::structural(format!(
                        "pattern value {v} outside 0..{d}"
                    )));
                }
            }
        }
        Ok(Pattern { d, rows })
    }

    /// Local dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Period width `m`.
    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    /// Period height `n`.
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Row data (`rows[r][c]` = site `(c, r)`).
    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// Value at `(x, y)` of the periodic extension (coordinates wrap).
    pub fn value_at(&self, x: i64, y: i64) -> u8 {
        let m = self.width() as i64;
        let n = self.height() as i64;
        self.rows[y.rem_euclid(n) as usize][x.rem_euclid(m) as usize]
    }

    /// The pattern with x and y exchanged (reflection across the main
    /// diagonal), mapping site `(x, y)` to `(y, x)`.
    pub fn transpose(&self) -> Pattern {
        let rows = (0..self.width())
            .map(|x| (0..self.height()).map(|y| self.rows[y][x]).collect())
            .collect();
        Pattern {
            d: self.d,
            rows,
        }
    }
}

/// Exact symmetrisation of a periodic pattern: for each target region the
/// empirical distribution of the configurations seen through that region,
/// averaged over all `m * n` translates of the pattern's period.
pub fn symmetrize_pattern(pattern: &Pattern, targets: &[Region]) -> Result<MarginalSpec> {
    let m = pattern.width() as i64;
    let n = pattern.height() as i64;
    let mn = Rat::from_integer((m * n).into());
    let mut entries = Vec::with_capacity(targets.len());
    for target in targets {
        let mut counts: BTreeMap<u64, i64> = BTreeMap::new();
        for sy in 0..n {
            for sx in 0..m {
                let digits: Vec<u8> = target
                    .sites()
                    .iter()
                    .map(|&(x, y)| pattern.value_at(x + sx, y + sy))
                    .collect();
                *counts.entry(encode_config(&digits, pattern.d())).or_insert(0) += 1;
            }
        }
        let probs = counts
            .into_iter()
            .map(|(k, c)| (k, Rat::from_integer(c.into()) / &mn))
            .collect();
        entries.push((
            target.clone(),
            Distribution::new(pattern.d(), target.clone(), probs)?,
        ));
    }
    MarginalSpec::new(pattern.d(), entries)
}

/// Decide whether a distribution on a horizontal segment extends to a
/// translation-invariant measure on the line: true exactly when its left and
/// right `(s-1)`-site marginals coincide.
pub fn check_1d_ti(q: &Distribution) -> Result<bool> {
    let sites = q.region().sites();
    let y = sites[0].1;
    let x0 = sites[0].0;
    for (i, &(x, sy)) in sites.iter().enumerate() {
        if sy != y || x != x0 + i as i64 {
            return Err(Error::domain(
                "translation-invariance check requires a horizontal segment of consecutive sites",
            ));
        }
    }
    let s = sites.len() as i64;
    if s == 1 {
        return Ok(true);
    }
    let left = Region::new((0..s - 1).map(|i| (x0 + i, y)))?;
    let right = Region::new((1..s).map(|i| (x0 + i, y)))?;
    let left_marginal = q.marginalize(&left)?;
    let right_marginal = q.marginalize(&right)?.translate(-1, 0);
    Ok(left_marginal == right_marginal)
}

/// Average a rectangle distribution over the four axis reflections of its
/// rectangle; the output is invariant under both reflections.
pub fn reflect_symmetrize(dist: &Distribution) -> Result<Distribution> {
    let region = dist.region();
    let (x0, x1, y0, y1) = region.bounding_box();
    let area = (x1 - x0 + 1) * (y1 - y0 + 1);
    if region.len() as i64 != area {
        return Err(Error::domain(
            "reflection symmetrisation requires a full rectangular region",
        ));
    }
    // Site-index permutations for the three nontrivial reflections.
    let perm = |fx: bool, fy: bool| -> Vec<usize> {
        region
            .sites()
            .iter()
            .map(|&(x, y)| {
                let rx = if fx { x0 + x1 - x } else { x };
                let ry = if fy { y0 + y1 - y } else { y };
                region.index_of((rx, ry)).expect("rectangle is closed under reflection")
            })
            .collect()
    };
    let perms = [perm(false, false), perm(true, false), perm(false, true), perm(true, true)];
    let quarter = Rat::new(1.into(), 4.into());
    let mut out: BTreeMap<u64, Rat> = BTreeMap::new();
    for (key, p) in dist.iter() {
        let digits = decode_config(key, dist.d(), region.len());
        for perm in &perms {
            // The reflected configuration assigns to site i the original
            // value at the reflected site.
            let reflected: Vec<u8> = perm.iter().map(|&j| digits[j]).collect();
            *out.entry(encode_config(&reflected, dist.d()))
                .or_insert_with(Rat::zero) += p * &quarter;
        }
    }
    Distribution::new(dist.d(), region.clone(), out)
}

// ---------------------------------------------------------------------------
// JSON wire formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DistributionDto {
    d: usize,
    region: Vec<[i64; 2]>,
    probs: BTreeMap<String, String>,
}

impl From<Distribution> for DistributionDto {
    fn from(dist: Distribution) -> DistributionDto {
        DistributionDto {
            d: dist.d,
            region: dist.region.sites().iter().map(|&(x, y)| [x, y]).collect(),
            probs: dist
                .probs
                .iter()
                .map(|(k, p)| (k.to_string(), p.to_string()))
                .collect(),
        }
    }
}

impl TryFrom<DistributionDto> for Distribution {
    type Error = Error;

    fn try_from(dto: DistributionDto) -> Result<Distribution> {
        let region = Region::new(dto.region.iter().map(|&[x, y]| (x, y)))?;
        let mut probs = BTreeMap::new();
        for (key, value) in &dto.probs {
            let k: u64 = key
                .parse()
                .map_err(|_| Error::structural(format!("invalid configuration key {key:?}")))?;
            if probs.insert(k, parse_rat(value)?).is_some() {
                return Err(Error::structural(format!(
                    "duplicate configuration key {key:?}"
                )));
            }
        }
        Distribution::new(dto.d, region, probs)
    }
}

#[derive(Serialize, Deserialize)]
struct MarginalSpecDto {
    d: usize,
    entries: Vec<DistributionDto>,
}

impl From<MarginalSpec> for MarginalSpecDto {
    fn from(spec: MarginalSpec) -> MarginalSpecDto {
        MarginalSpecDto {
            d: spec.d,
            entries: spec.entries.into_iter().map(|(_, q)| q.into()).collect(),
        }
    }
}

impl TryFrom<MarginalSpecDto> for MarginalSpec {
    type Error = Error;

    fn try_from(dto: MarginalSpecDto) -> Result<MarginalSpec> {
        let entries = dto
            .entries
            .into_iter()
            .map(|e| {
                let dist: Distribution = e.try_into()?;
                Ok((dist.region().clone(), dist))
            })
            .collect::<Result<Vec<_>>>()?;
        MarginalSpec::new(dto.d, entries)
    }
}

#[derive(Serialize, Deserialize)]
struct PatternDto {
    d: usize,
    rows: Vec<Vec<u8>>,
}

impl From<Pattern> for PatternDto {
    fn from(p: Pattern) -> PatternDto {
        PatternDto {
            d: p.d,
            rows: p.rows,
        }
    }
}

impl TryFrom<PatternDto> for Pattern {
    type Error = Error;

    fn try_from(dto: PatternDto) -> Result<Pattern> {
        Pattern::new(dto.d, dto.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn uniform_on(d: usize, region: Region, keys: &[u64]) -> Distribution {
        let p = Rat::new(1.into(), (keys.len() as i64).into());
        Distribution::new(d, region, keys.iter().map(|&k| (k, p.clone())).collect()).unwrap()
    }

    #[test]
    fn region_canonical_order_and_lookup() {
        let r = Region::new([(1, 1), (0, 0), (1, 0), (0, 1)]).unwrap();
        assert_eq!(r.sites(), &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert_eq!(r.index_of((1, 0)), Some(1));
        assert_eq!(r.index_of((2, 2)), None);
        assert!(Region::new([(0, 0), (0, 0)]).is_err());
        assert!(Region::new([]).is_err());
    }

    #[test]
    fn named_regions() {
        assert_eq!(Region::pair_h().sites(), &[(0, 0), (1, 0)]);
        assert_eq!(Region::pair_v().sites(), &[(0, -1), (0, 0)]);
        assert_eq!(Region::pair_plus().sites(), &[(0, 0), (1, 1)]);
        assert_eq!(Region::pair_minus().sites(), &[(1, -1), (0, 0)]);
        assert_eq!(Region::rect(3, 2).unwrap().len(), 6);
        assert!(Region::rect(0, 2).is_err());
    }

    #[test]
    fn config_round_trip() {
        let digits = [2u8, 0, 1];
        let key = encode_config(&digits, 3);
        assert_eq!(key, 2 * 9 + 0 * 3 + 1);
        assert_eq!(decode_config(key, 3, 3), digits);
    }

    #[test]
    fn marginalize_identity() {
        let q = uniform_on(2, Region::rect(2, 1).unwrap(), &[1, 2]);
        assert_eq!(q.marginalize(q.region()).unwrap(), q);
    }

    #[test]
    fn marginalize_product_recovers_factor() {
        // Independent sites: (0,0) is 0 w.p. 1/3; (1,0) is 0 w.p. 1/2.
        let region = Region::rect(2, 1).unwrap();
        let probs = BTreeMap::from([
            (0, rat(1, 6)), // 00
            (1, rat(1, 6)), // 01
            (2, rat(1, 3)), // 10
            (3, rat(1, 3)), // 11
        ]);
        let q = Distribution::new(2, region, probs).unwrap();
        let site = Region::new([(0, 0)]).unwrap();
        let marginal = q.marginalize(&site).unwrap();
        assert_eq!(marginal.prob(0), rat(1, 3));
        assert_eq!(marginal.prob(1), rat(2, 3));
    }

    #[test]
    fn marginalize_square_to_pair() {
        // Uniform on the all-zero and all-one 2x2 configurations; the
        // horizontal pair marginal is 1/2 on agreement, by direct count.
        let q = uniform_on(2, Region::rect(2, 2).unwrap(), &[0, 15]);
        let marginal = q.marginalize(&Region::pair_h()).unwrap();
        let table = pair_table(&marginal).unwrap();
        assert_eq!(table[0][0], rat(1, 2));
        assert_eq!(table[1][1], rat(1, 2));
        assert_eq!(table[0][1], rat_int(0));
    }

    #[test]
    fn marginalize_rejects_non_subset() {
        let q = uniform_on(2, Region::rect(2, 1).unwrap(), &[0, 3]);
        let err = q.marginalize(&Region::new([(5, 5)]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn marginalize_is_transitive() {
        let region = Region::rect(2, 2).unwrap();
        let q = uniform_on(2, region, &[1, 6, 9, 14]);
        let pair = Region::pair_h();
        let site = Region::new([(0, 0)]).unwrap();
        let direct = q.marginalize(&site).unwrap();
        let via_pair = q.marginalize(&pair).unwrap().marginalize(&site).unwrap();
        assert_eq!(direct, via_pair);
    }

    #[test]
    fn one_dimensional_ti_check() {
        let two = Region::rect(2, 1).unwrap();
        // Uniform on {01, 10}: both one-site marginals uniform.
        assert!(check_1d_ti(&uniform_on(2, two.clone(), &[1, 2])).unwrap());
        // Point mass on 01: marginals differ.
        let delta = Distribution::point_mass(2, two.clone(), 1).unwrap();
        assert!(!check_1d_ti(&delta).unwrap());
        // A product of one fixed single-site factor is i.i.d., hence fine.
        let iid = Distribution::new(
            2,
            two,
            BTreeMap::from([(0, rat(4, 9)), (1, rat(2, 9)), (2, rat(2, 9)), (3, rat(1, 9))]),
        )
        .unwrap();
        assert!(check_1d_ti(&iid).unwrap());
        // Single site: always extendable.
        let single = Distribution::point_mass(2, Region::new([(3, 0)]).unwrap(), 1).unwrap();
        assert!(check_1d_ti(&single).unwrap());
        // Non-segment regions are out of domain.
        let err = check_1d_ti(&uniform_on(2, Region::rect(1, 2).unwrap(), &[1, 2])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    fn all_pair_targets() -> Vec<Region> {
        vec![
            Region::pair_h(),
            Region::pair_v(),
            Region::pair_plus(),
            Region::pair_minus(),
        ]
    }

    fn table_of(spec: &MarginalSpec, region: &Region) -> Vec<Vec<Rat>> {
        pair_table(spec.entry(region).unwrap()).unwrap()
    }

    #[test]
    fn symmetrize_striped_pattern() {
        // Horizontal stripes of 0s (bottom) and 1s (top): equal values along
        // rows, opposite values along columns and both diagonals.
        let p = Pattern::new(2, vec![vec![0, 0], vec![1, 1]]).unwrap();
        let spec = symmetrize_pattern(&p, &all_pair_targets()).unwrap();
        let agree = vec![vec![rat(1, 2), rat_int(0)], vec![rat_int(0), rat(1, 2)]];
        let differ = vec![vec![rat_int(0), rat(1, 2)], vec![rat(1, 2), rat_int(0)]];
        assert_eq!(table_of(&spec, &Region::pair_h()), agree);
        assert_eq!(table_of(&spec, &Region::pair_v()), differ);
        assert_eq!(table_of(&spec, &Region::pair_plus()), differ);
        assert_eq!(table_of(&spec, &Region::pair_minus()), differ);
    }

    #[test]
    fn symmetrize_constant_pattern() {
        let p = Pattern::new(2, vec![vec![0]]).unwrap();
        let spec = symmetrize_pattern(&p, &all_pair_targets()).unwrap();
        for target in all_pair_targets() {
            let table = table_of(&spec, &target);
            assert_eq!(table[0][0], rat_int(1));
        }
    }

    #[test]
    fn symmetrize_diagonal_three_cycle() {
        // One period of the plane filled by the cyclic anti-diagonal: ones on
        // x + y = 2 (mod 3).  Along h, v, and the up-diagonal the two values
        // never agree on 1; along the down-diagonal the value repeats.
        let p = Pattern::new(2, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]).unwrap();
        let spec = symmetrize_pattern(&p, &all_pair_targets()).unwrap();
        let never_both_one = vec![
            vec![rat(1, 3), rat(1, 3)],
            vec![rat(1, 3), rat_int(0)],
        ];
        let repeat = vec![vec![rat(2, 3), rat_int(0)], vec![rat_int(0), rat(1, 3)]];
        assert_eq!(table_of(&spec, &Region::pair_h()), never_both_one);
        assert_eq!(table_of(&spec, &Region::pair_v()), never_both_one);
        assert_eq!(table_of(&spec, &Region::pair_plus()), never_both_one);
        assert_eq!(table_of(&spec, &Region::pair_minus()), repeat);
    }

    #[test]
    fn symmetrize_matches_windowed_enumeration() {
        // Independent oracle: read every window of the pattern tiled over a
        // 3x3 block of periods and average the indicator by hand.
        let p = Pattern::new(3, vec![vec![0, 2, 1], vec![1, 1, 0]]).unwrap();
        let target = Region::pair_plus();
        let spec = symmetrize_pattern(&p, std::slice::from_ref(&target)).unwrap();
        let (m, n) = (p.width() as i64, p.height() as i64);
        let mut counts: BTreeMap<u64, i64> = BTreeMap::new();
        for sy in n..2 * n {
            for sx in m..2 * m {
                let digits: Vec<u8> = target
                    .sites()
                    .iter()
                    .map(|&(x, y)| p.rows()[((y + sy) % n) as usize][((x + sx) % m) as usize])
                    .collect();
                *counts.entry(encode_config(&digits, 3)).or_insert(0) += 1;
            }
        }
        let entry = spec.entry(&target).unwrap();
        for (key, count) in counts {
            assert_eq!(entry.prob(key), Rat::new(count.into(), (m * n).into()));
        }
    }

    #[test]
    fn symmetrize_output_has_consistent_site_marginals() {
        let p = Pattern::new(2, vec![vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let spec = symmetrize_pattern(&p, &all_pair_targets()).unwrap();
        let site0: Vec<Rat> = {
            let t = table_of(&spec, &Region::pair_h());
            (0..2).map(|a| &t[a][0] + &t[a][1]).collect()
        };
        for target in all_pair_targets() {
            let t = table_of(&spec, &target);
            for a in 0..2 {
                let row: Rat = &t[a][0] + &t[a][1];
                let col: Rat = &t[0][a] + &t[1][a];
                assert_eq!(row, site0[a], "first-role marginal differs");
                assert_eq!(col, site0[a], "second-role marginal differs");
            }
        }
    }

    #[test]
    fn reflect_symmetrize_examples() {
        // A point mass on "01" over a 1x2 horizontal pair averages to half
        // weight on each orientation.
        let q = Distribution::point_mass(2, Region::rect(2, 1).unwrap(), 1).unwrap();
        let sym = reflect_symmetrize(&q).unwrap();
        assert_eq!(sym.prob(1), rat(1, 2));
        assert_eq!(sym.prob(2), rat(1, 2));
        // Idempotence and fixed points.
        assert_eq!(reflect_symmetrize(&sym).unwrap(), sym);
        // Non-rectangular regions are rejected.
        let tri = uniform_on(2, Region::new([(0, 0), (1, 0), (0, 1)]).unwrap(), &[0, 7]);
        assert!(matches!(
            reflect_symmetrize(&tri).unwrap_err(),
            Error::Domain(_)
        ));
    }

    #[test]
    fn reflect_symmetrize_square() {
        // Point mass on the 2x2 configuration with a single 1 at the bottom
        // left: the average puts 1/4 on each corner position.
        let region = Region::rect(2, 2).unwrap();
        // Digits in site order (0,0),(1,0),(0,1),(1,1).
        let key = encode_config(&[1, 0, 0, 0], 2);
        let q = Distribution::point_mass(2, region, key).unwrap();
        let sym = reflect_symmetrize(&q).unwrap();
        for corner in [
            encode_config(&[1, 0, 0, 0], 2),
            encode_config(&[0, 1, 0, 0], 2),
            encode_config(&[0, 0, 1, 0], 2),
            encode_config(&[0, 0, 0, 1], 2),
        ] {
            assert_eq!(sym.prob(corner), rat(1, 4));
        }
    }

    #[test]
    fn distribution_validation() {
        let region = Region::rect(2, 1).unwrap();
        // Sum must be one.
        assert!(Distribution::new(2, region.clone(), BTreeMap::from([(0, rat(1, 2))])).is_err());
        // No negative probabilities.
        assert!(Distribution::new(
            2,
            region.clone(),
            BTreeMap::from([(0, rat(3, 2)), (1, rat(-1, 2))])
        )
        .is_err());
        // Keys must be in range.
        assert!(Distribution::new(2, region, BTreeMap::from([(4, rat_int(1))])).is_err());
    }

    #[test]
    fn distribution_json_round_trip() {
        let q = uniform_on(3, Region::pair_v(), &[1, 5, 7]);
        let json = serde_json::to_string(&q).unwrap();
        let back: Distribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        // The wire form uses the documented field names and rational strings.
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["d"], 3);
        assert_eq!(value["region"][0][1], -1);
        assert_eq!(value["probs"]["1"], "1/3");
    }

    #[test]
    fn pattern_json_round_trip_and_validation() {
        let p = Pattern::new(2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"d":2,"rows":[[0,1],[1,0]]}"#);
        let back: Pattern = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(Pattern::new(2, vec![vec![0, 2]]).is_err());
        assert!(Pattern::new(2, vec![vec![0, 1], vec![0]]).is_err());
        assert!(serde_json::from_str::<Pattern>(r#"{"d":2,"rows":[[0,3]]}"#).is_err());
    }

    #[test]
    fn pattern_torus_addressing() {
        let p = Pattern::new(2, vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(p.value_at(0, 0), 0);
        assert_eq!(p.value_at(1, 0), 1);
        assert_eq!(p.value_at(0, 1), 1);
        assert_eq!(p.value_at(-1, -1), p.value_at(1, 1));
        assert_eq!(p.value_at(2, 2), p.value_at(0, 0));
        let t = p.transpose();
        assert_eq!(t.value_at(0, 1), p.value_at(1, 0));
        assert_eq!(t.value_at(1, 0), p.value_at(0, 1));
    }

    #[test]
    fn map_sites_quarter_rotation() {
        // Point mass "0 then 1" on a horizontal pair, rotated a quarter turn
        // counterclockwise, becomes "0 below 1" on a vertical pair.
        let q = Distribution::point_mass(2, Region::rect(2, 1).unwrap(), 1).unwrap();
        let rotated = q.map_sites(|(x, y)| (-y, x)).unwrap();
        assert_eq!(
            rotated.region(),
            &Region::new([(0, 0), (0, 1)]).unwrap()
        );
        // Site order is (0,0) then (0,1); the 1 sits at (0,1).
        assert_eq!(rotated.prob(encode_config(&[0, 1], 2)), rat_int(1));
        // Translating back and forth is the identity.
        assert_eq!(q.translate(3, -2).translate(-3, 2), q);
    }

    #[test]
    fn marginal_spec_json_round_trip() {
        let p = Pattern::new(2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let spec = symmetrize_pattern(&p, &[Region::pair_h(), Region::pair_v()]).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: MarginalSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
